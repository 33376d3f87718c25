use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn misodof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_misodof")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn in_process(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("misodof").chain(args.iter().copied());
    let code = misodof_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn compare_cyclic_values() {
    let o = misodof(&["compare", data("cyclic3.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("zfbf: 1/1 (1.000000)"), "{text}");
    assert!(text.contains("rs: 7/5 (1.400000)"), "{text}");
    assert!(text.contains("trs-orth: 7/5"), "{text}");
    assert!(text.contains("trs-max: 17/10 (1.700000)"), "{text}");
}

#[test]
fn sumdof_hierarchical_trs() {
    let path = data("hierarchical3.toml");
    let (code, out, _) = in_process(&["sumdof", "--scheme", "trs-max", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("trs-max: 2/1 (2.000000)"), "{out}");
}

#[test]
fn region_listing_for_pair() {
    let path = data("hierarchical3.toml");
    let (code, out, _) = in_process(&["region", "--set", "2,3", "--max", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines,
        [
            "d_p_2, d_p_3, d_c >= 0",
            "d_p_2 <= 1/1",
            "d_p_3 <= 1/1",
            "d_c <= 1/1",
            "d_p_2 + d_p_3 <= 2/5",
            "d_p_2 + d_c <= 1/1",
            "d_p_3 + d_c <= 1/1",
            "d_p_2 + d_p_3 + d_c <= 6/5",
            "max sum: 6/5 (1.200000)",
        ]
    );
}

#[test]
fn cyclic_gen_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_misodof"))
        .env("MISODOF_OUT_DIR", dir.path())
        .args(["cyclic-gen", "--K", "3", "--a", "0.2", "--b", "4/5", "-o", "gen.toml"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let written = dir.path().join("gen.toml");
    assert_eq!(
        std::fs::read_to_string(&written).unwrap(),
        std::fs::read_to_string(data("cyclic3.toml")).unwrap()
    );
    let o = misodof(&["sumdof", "--scheme", "trs-max", written.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("trs-max: 17/10"));
}

#[test]
fn plan_and_explicit_policy() {
    let path = data("cyclic3.toml");
    let (code, out, _) = in_process(&["plan", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("thresholds: [1/5, 4/5, 1/1]"), "{out}");
    let (code, out, _) = in_process(&["plan", "--scheme", "rs", "--r", "1/5,1/5,1/5", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("kind: RateSplitting"), "{out}");
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = data("hierarchical3.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_misodof"))
        .env("MISODOF_OUT_DIR", dir.path())
        .args([
            "simulate",
            path.to_str().unwrap(),
            "--trials",
            "100",
            "--sweep",
            "20,30,40",
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("aggregate slope"));
    let csv = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("P_dB,user,message,mean_rate,stderr"));
    assert!(csv.lines().any(|l| l.starts_with("40,all,sum,")));
}

#[test]
fn sumdof_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let (code, _, _) = in_process(&[
        "sumdof",
        data("cyclic3.toml").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().next(), Some("scheme,value_num,value_den,S,r,layers"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn exit_codes() {
    assert_eq!(misodof(&["--help"]).status.code(), Some(0));
    assert_eq!(misodof(&["--version"]).status.code(), Some(0));
    assert_eq!(misodof(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        misodof(&["sumdof", "--scheme", "best", "x.toml"]).status.code(),
        Some(2)
    );
    assert_eq!(misodof(&["compare", "missing.toml"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "K = 2\nconnectivity = [\"11\", \"11\"]\n\n[[qualities]]\nrx = 2\ntx = 1\nnum = 5\nden = 4\n",
    )
    .unwrap();
    let o = misodof(&["compare", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("QualityOutOfRange at (2,1): 5/4"));

    let (code, _, err) = in_process(&["region", "--set", "4", data("cyclic3.toml").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("InvalidUserList"), "{err}");
    let (code, _, err) = in_process(&["simulate", data("cyclic3.toml").to_str().unwrap(), "--sweep", "1:0:3"]);
    assert_eq!(code, 1);
    assert!(err.contains("InvalidSweep"), "{err}");
}

#[test]
fn partial_topology_reports_rs_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("c6.toml");
    let (code, _, _) = in_process(&[
        "cyclic-gen",
        "--K",
        "6",
        "--a",
        "1/5",
        "--b",
        "4/5",
        "-o",
        topo.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, out, _) = in_process(&["sumdof", topo.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("rs: n/a"), "{out}");
    assert!(out.contains("zfbf: 3/1"), "{out}");
    let (code, _, err) = in_process(&["sumdof", "--scheme", "rs", topo.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("NotFullyConnected"), "{err}");
}
