use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn awayfw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_awayfw"))
        .args(args)
        .env_remove("AWAYFW_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn text(out: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    )
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn generated_points_run_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let pts = tmp.path().join("pts.csv");
    let out = awayfw(&[
        "gen-dopt",
        "--m",
        "25",
        "--n",
        "3",
        "--seed",
        "4",
        "-o",
        pts.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out));
    assert_eq!(fs::read_to_string(&pts).unwrap().lines().count(), 25);

    let results = tmp.path().join("results");
    let cfg = write_config(
        tmp.path(),
        &format!(
            "solvers = [\"AFW-A\", \"MG\", \"RSGM-B\"]\nmax_iterations = 500\noutput_dir = \"{}\"\n\n[instance]\nkind = \"dopt_file\"\npath = \"{}\"\n",
            results.display(),
            pts.display()
        ),
    );
    let out = awayfw(&["run", &cfg]);
    assert!(out.status.success(), "{}", text(&out));
    for tag in ["AFW-A", "MG", "RSGM-B"] {
        assert!(results.join(format!("trace_{tag}.csv")).exists());
        assert!(results.join(format!("metrics_{tag}.csv")).exists());
    }
    assert!(results.join("run_meta.json").exists());

    let out = awayfw(&["report", results.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("AFW-A"));
}

#[test]
fn output_dir_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "solvers = [\"MG\"]\nmax_iterations = 200\noutput_dir = \"unused\"\n\n[instance]\nkind = \"dopt\"\nm = 12\nn = 2\nseed = 1\n",
    );
    let dir = tmp.path().join("elsewhere");
    let out = awayfw(&["run", &cfg, "--output-dir", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out));
    assert!(dir.join("trace_MG.csv").exists());
}

#[test]
fn fstar_of_three_point_design_is_ln3() {
    let tmp = tempfile::tempdir().unwrap();
    let pts = tmp.path().join("pts.csv");
    fs::write(&pts, "1,0\n0,1\n1,1\n").unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!("[instance]\nkind = \"dopt_file\"\npath = \"{}\"\n", pts.display()),
    );
    let out = awayfw(&["fstar", &cfg]);
    assert!(out.status.success(), "{}", text(&out));
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v - 3f64.ln()).abs() < 1e-9);
}

#[test]
fn gen_mhp_writes_arrivals_and_infectivity() {
    let tmp = tempfile::tempdir().unwrap();
    let ev = tmp.path().join("ev.csv");
    let inf = tmp.path().join("a.csv");
    let out = awayfw(&[
        "gen-mhp",
        "--m",
        "3",
        "--t",
        "100",
        "--sparsity",
        "0.3",
        "--radius",
        "0.5",
        "--seed",
        "2",
        "-o",
        ev.to_str().unwrap(),
        "--infectivity",
        inf.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out));
    assert!(fs::read_to_string(&ev).unwrap().lines().count() > 10);
    assert_eq!(fs::read_to_string(&inf).unwrap().lines().count(), 3);
}

#[test]
fn errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.toml");
    let out = awayfw(&["run", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("error:"));

    let cfg = write_config(
        tmp.path(),
        "solvers = []\n\n[instance]\nkind = \"dopt\"\nm = 5\nn = 2\nseed = 0\n",
    );
    let out = awayfw(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1), "{}", text(&out));

    let out = awayfw(&["report", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
