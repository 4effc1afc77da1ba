//! Exercises the command surface: exit codes, echo round-trip, baseline
//! traces, and database dumps.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/paper8.scenario")
}

fn qcps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcps"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn missing_file_exits_2() {
    let out = qcps(&["run", "/no/such/file.scenario"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_document_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scenario");
    std::fs::write(&path, "seed = \"not a number\"").unwrap();
    let out = qcps(&["partition", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_finite_coordinate_exits_2_and_names_node() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture())
        .unwrap()
        .replace("x = 30.0", "x = inf");
    let path = dir.path().join("inf.scenario");
    std::fs::write(&path, text).unwrap();
    let out = qcps(&["partition", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("node A"));
}

#[test]
fn duplicate_node_id_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture())
        .unwrap()
        .replace("id = \"B\"", "id = \"A\"");
    let path = dir.path().join("dup.scenario");
    std::fs::write(&path, text).unwrap();
    let out = qcps(&["partition", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn zero_nodes_is_an_empty_listing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.scenario");
    std::fs::write(
        &path,
        r#"
seed = 1
threshold = 50.0
nodes = []
workload = []

[radio]
e_elec_nj = 50.0
e_amp_pj = 100.0
header_bits = 64
reading_bits = 256
gateway = { x = 0.0, y = 0.0, z = 0.0 }
"#,
    )
    .unwrap();
    let out = qcps(&["partition", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn echo_round_trips() {
    let out = qcps(&["partition", fixture().to_str().unwrap(), "--echo"]);
    assert_eq!(out.status.code(), Some(0));
    let echoed = String::from_utf8(out.stdout).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("echoed.scenario");
    std::fs::write(&path, &echoed).unwrap();
    let again = qcps(&["partition", path.to_str().unwrap(), "--echo"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), echoed);
}

#[test]
fn baseline_run_is_two_direct_messages_for_the_query() {
    let out = qcps(&[
        "run",
        fixture().to_str().unwrap(),
        "--model",
        "baseline",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let hops: Vec<(&str, &str)> = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[3], f[4])
        })
        .collect();
    assert_eq!(hops, [("A", "B"), ("B", "A")]);
}

#[test]
fn db_dump_writes_one_csv_per_type() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dbs");
    let out = qcps(&[
        "run",
        fixture().to_str().unwrap(),
        "--db-dump",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let env = std::fs::read_to_string(dump.join("environment.csv")).unwrap();
    let act = std::fs::read_to_string(dump.join("activity.csv")).unwrap();
    assert!(env.starts_with("node_id,sim_time,value,unit\n"));
    assert_eq!(env.lines().count(), 1 + 4); // A, D, E, H reported once
    assert_eq!(act.lines().count(), 1 + 4); // B, C, F, G
    assert!(act.lines().any(|l| l.starts_with("B,1.000,3.2,steps")));
}

#[test]
fn compare_reports_qcps_cheaper_for_one_query_per_node() {
    // same deployment, workload replaced by one cross-grid query per node
    let base = std::fs::read_to_string(fixture()).unwrap();
    let deployment = base.split("[[workload]]").next().unwrap();
    let mut text = deployment.to_owned();
    for (i, (requester, target)) in [
        ("A", "B"),
        ("B", "A"),
        ("C", "D"),
        ("D", "C"),
        ("E", "F"),
        ("F", "E"),
        ("G", "H"),
        ("H", "G"),
    ]
    .iter()
    .enumerate()
    {
        text.push_str(&format!(
            "\n[[workload]]\nat = {}.0\naction = {{ cross_query = {{ requester = \"{requester}\", target = \"{target}\" }} }}\n",
            i + 1
        ));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("queries.scenario");
    std::fs::write(&path, text).unwrap();

    let out = qcps(&["compare", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("QCPS cheaper: yes"), "output:\n{text}");
    assert!(text.contains("node_id,model,tx_j,rx_j,compute_j,msgs_sent,msgs_received"));
}
