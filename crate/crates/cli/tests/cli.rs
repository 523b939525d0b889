use std::process::{Command, Output};

use rmt_charpoly::harness::{parse_csv_rows, RunReport, CSV_HEADER};

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rmt-charpoly"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("RMT_THREADS", t),
        None => cmd.env_remove("RMT_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn edge_table_has_header_and_rows() {
    let out = run(&["edge", "--n-list", "125,1000", "--deterministic"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with(CSV_HEADER));
    assert!(!text.contains('\r'));
    let rows = parse_csv_rows(&text).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].abs_err < rows[0].abs_err);
}

#[test]
fn csv_and_json_carry_the_same_rows() {
    let base = [
        "bulk",
        "--alpha",
        "2",
        "--nu",
        "1",
        "--n-list",
        "64,128",
        "--deterministic",
    ];
    let csv = run(&base, None);
    let json = run(&[&base[..], &["--format", "json"]].concat(), None);
    let report = RunReport::from_json(&stdout(&json)).unwrap();
    assert_eq!(report.rows, parse_csv_rows(&stdout(&csv)).unwrap());
    assert!(report.wall_clock_s.is_none());
    assert!(report.diagnostics.contains_key("contours"));
}

#[test]
fn deterministic_reports_are_byte_identical_across_thread_counts() {
    let args = [
        "mc",
        "--samples",
        "4000",
        "--seed",
        "3",
        "--points",
        "0.5:-0.5,1:0.3",
        "--format",
        "json",
        "--deterministic",
    ];
    let a = run(&args, Some("1"));
    let b = run(&args, Some("3"));
    let c = run(&args, Some("0"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn timing_is_reported_unless_deterministic() {
    let out = run(&["kernel", "--format", "json"], None);
    assert!(RunReport::from_json(&stdout(&out))
        .unwrap()
        .wall_clock_s
        .is_some());
}

#[test]
fn bad_arguments_exit_with_three() {
    for args in [
        &["edge", "--n-list", "1000,125"][..],
        &["bulk", "--xi", "1.9"],
        &["bulk", "--n", "1024"],
        &["edge", "--format", "xml"],
        &["nonsense"],
        &["mc", "--samples", "10"],
        &["oracle", "--n", "7"],
    ] {
        assert_eq!(run(args, None).status.code(), Some(3), "{args:?}");
    }
    assert_eq!(run(&["kernel"], Some("many")).status.code(), Some(3));
}

#[test]
fn numerical_refusal_exits_with_two() {
    let out = run(
        &[
            "bulk", "--mu", "30", "--nu", "0", "--n", "2", "--format", "json",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    let report = RunReport::from_json(&stdout(&out)).unwrap();
    assert!(report.rows.is_empty());
    assert_eq!(report.flagged(), 1);
}

#[test]
fn ill_conditioned_edge_rows_are_kept_with_a_warning() {
    let out = run(
        &[
            "edge", "--mu", "25", "--nu", "-25", "--n", "1", "--format", "json",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let report = RunReport::from_json(&stdout(&out)).unwrap();
    assert_eq!((report.rows.len(), report.warnings()), (1, 1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(run(&["--help"], None).status.code(), Some(0));
    assert_eq!(run(&["--version"], None).status.code(), Some(0));
}

#[test]
fn out_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("rmt-charpoly-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("kernel.csv");
    let out = run(
        &["kernel", "--mu", "0.5", "--out", path.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rows = parse_csv_rows(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn fast_selftest_passes() {
    let out = run(&["selftest", "--fast"], Some("1"));
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 13);
}
