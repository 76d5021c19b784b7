use std::process::{Command, Output};

fn ffcircle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffcircle")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn orthogonality_passes() {
    let o = ffcircle(&["verify", "orthogonality", "--n", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("# pass: true"));
    assert!(out.contains("n,samples,failures,max_abs_error,pass"));
}

#[test]
fn major_arc_passes_and_echoes_parameters() {
    let o = ffcircle(&["verify", "major-arc", "--n", "8", "--seed", "7", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for line in ["# seed: 7", "# field: 2", "# stamp: conforming", "# disjoint_violations: 0"] {
        assert!(out.contains(line), "missing {line:?} in\n{out}");
    }
}

#[test]
fn override_rho_marks_output_nonconforming() {
    let o = ffcircle(&["verify", "major-arc", "--n", "6", "--override-rho", "1/2", "--format", "csv"]);
    assert!(stdout(&o).contains("# stamp: nonconforming"));
    let o = ffcircle(&["shadow", "--exponents", "3", "--override-rho", "1/3", "--format", "csv"]);
    assert!(stdout(&o).contains("# stamp: nonconforming"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(ffcircle(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(ffcircle(&["verify", "orthogonality", "--field", "4"]).status.code(), Some(2));
}

#[test]
fn small_limit_is_a_resource_error() {
    let o = ffcircle(&["verify", "large-scale", "--limit", "100"]);
    assert_eq!(o.status.code(), Some(3));
    let o = ffcircle(&["verify", "all", "--limit", "1000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("skipped"));
}

#[test]
fn fixed_seed_gives_identical_bytes() {
    let args = ["report", "inverse", "--n", "8", "--trials", "20", "--seed", "11", "--format", "json"];
    let a = ffcircle(&args);
    let b = ffcircle(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = ffcircle(&["report", "inverse", "--n", "8", "--trials", "20", "--seed", "12", "--format", "json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn json_output_parses() {
    let o = ffcircle(&["shadow", "--exponents", "1,2,3,5", "--field", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v["rows"][0];
    assert_eq!(row["shadow"], "{1,2,3,4,5}");
    assert_eq!(row["kStar"], "{2,5}");
    assert_eq!(row["agree"], true);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "field = \"3\"\nexponents = \"1,2\"\nseed = 5\nformat = \"csv\"\n").unwrap();
    let o = ffcircle(&["kstar", "--config", path.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("# field: 3"), "{out}");
    assert!(out.contains("# seed: 9"));
    assert!(out.contains("\"{1,2}\",3,\"{1,2}\""));

    std::fs::write(&path, "colour = \"blue\"\n").unwrap();
    assert_eq!(ffcircle(&["kstar", "--config", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("approx.csv");
    let o = ffcircle(&[
        "approx",
        "--alpha",
        "t^-1+t^-4+t^-7",
        "--rn",
        "6",
        "--max-deg",
        "3",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    // (t^-1 + t^-4 + t^-7) = t^2 / (t^3 + 1) exactly over F_2.
    assert!(text.contains("t^3+1,t^2,-inf,3,true"), "{text}");
}

#[test]
fn classify_and_ergodic_sim_run() {
    let o = ffcircle(&["classify", "--alpha", "0", "--n", "6", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0,major,(0)/(1)"), "{}", stdout(&o));

    let o = ffcircle(&["ergodic-sim", "--nmax", "4", "--cuts", "0,2,4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("# stabilization_index:"));
    assert!(out.contains("n,x,g,average"));
}
