use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn wavedim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavedim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("WAVEDIM_OUT")
        .output()
        .unwrap()
}

fn run_ok(sub: &str, config: &Path, out: &Path) -> String {
    let o = wavedim(&[sub, "--config", config.to_str().unwrap()], out);
    assert!(
        o.status.success(),
        "{sub} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p
}

const LINEAR: &str = r#"
schema_version = 1
[grid]
lower = [0.0]
upper = [3.141592653589793]
points = [32]
[model]
kind = "zero"
[dynamics]
alpha = 1.0
dt = 0.01
horizon = 2.0
"#;

#[test]
fn bound_report_values() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = run_ok("bound", &configs().join("bound_example.toml"), dir.path());
    for line in [
        "delta_star = 0.375",
        "nu_alpha = 0.25",
        "dim_H_bound = 16",
        "dim_F_bound = 32",
        "d_scan = 11",
    ] {
        assert!(
            stdout.lines().any(|l| l == line),
            "missing `{line}` in\n{stdout}"
        );
    }
    let csv = std::fs::read_to_string(dir.path().join("bound.csv")).unwrap();
    assert!(csv.starts_with("lambda1,alpha,"));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("report.txt")).unwrap(),
        stdout
    );
}

#[test]
fn linear_energy_column_decreases() {
    let dir = tempfile::tempdir().unwrap();
    run_ok("simulate", &configs().join("linear_1d.toml"), dir.path());
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "energy").unwrap();
    let e: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    assert!(e.len() > 100);
    assert!(e.windows(2).all(|w| w[1] < w[0]));
    assert!(dir.path().join("final_state.bin").exists());
}

#[test]
fn pipeline_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = run_ok("pipeline", &configs().join("cubic_1d.toml"), dir.path());
    let block = stdout
        .split("[cross-check]")
        .nth(1)
        .expect("cross-check block");
    assert!(block.contains("empirical_le_analytic = yes"), "{block}");
    for f in ["attractor.csv", "bound.csv", "ky_fan.csv", "report.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = configs().join("cubic_1d.toml");
    for sub in ["simulate", "attractor", "tangent", "spectral"] {
        run_ok(sub, &cfg, a.path());
        run_ok(sub, &cfg, b.path());
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 7);
    for n in names {
        assert_eq!(
            std::fs::read(a.path().join(&n)).unwrap(),
            std::fs::read(b.path().join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn seed_changes_random_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("linear_1d.toml");
    let c = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(wavedim(&["simulate", "--config", c, "--seed", "1"], &a)
        .status
        .success());
    assert!(wavedim(&["simulate", "--config", c, "--seed", "2"], &b)
        .status
        .success());
    assert_ne!(
        std::fs::read(a.join("trajectory.csv")).unwrap(),
        std::fs::read(b.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LINEAR);
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_wavedim"))
        .args([
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--threads",
            "2",
        ])
        .env("WAVEDIM_OUT", &target)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.join("trajectory.csv").exists());
}

fn exit_code(body: &str, sub: &str) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), body);
    let o = wavedim(
        &[sub, "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

#[test]
fn config_errors_exit_2() {
    let (code, err) = exit_code(
        &LINEAR.replace("[dynamics]", "[dynamics]\nstep = 3"),
        "simulate",
    );
    assert_eq!(code, 2);
    assert!(err.contains("step"), "{err}");
    assert_eq!(
        exit_code(
            &LINEAR.replace("schema_version = 1", "schema_version = 9"),
            "simulate"
        )
        .0,
        2
    );
    assert_eq!(
        exit_code(&LINEAR.replace("dt = 0.01", "dt = -0.01"), "simulate").0,
        2
    );
    assert_eq!(exit_code(LINEAR, "attractor").0, 2);
    let o = wavedim(
        &["simulate", "--config", "/nonexistent/run.toml"],
        Path::new("/tmp"),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hypothesis_violations_exit_3() {
    let non_coercive = LINEAR.replace(
        "[model]",
        "[beta]\nkind = \"constant\"\nvalue = -5.0\n[model]",
    );
    let (code, err) = exit_code(&non_coercive, "simulate");
    assert_eq!(code, 3);
    assert!(err.contains("coercivity"), "{err}");

    let focusing = LINEAR.replace(
        "kind = \"zero\"",
        "kind = \"cubic\"\na = 1.0\nb = -1.0\n[model.dissipative]\nmu = 1.0\nc = 1.0",
    );
    let (code, err) = exit_code(&focusing, "attractor");
    assert_eq!(code, 3);
    assert!(err.contains("dissipativity"), "{err}");

    let negative_slope = LINEAR.replace("kind = \"zero\"", "kind = \"cubic\"\na = -1.0\nb = 1.0");
    assert_eq!(exit_code(&negative_slope, "spectral").0, 3);
}

#[test]
fn blow_up_exits_4() {
    let body = LINEAR.replace("kind = \"zero\"", "kind = \"cubic\"\na = 0.0\nb = -1.0")
        + "[initial]\nkind = \"modes\"\nu = [6.0]\n";
    let body = body.replace("horizon = 2.0", "horizon = 10.0");
    let (code, err) = exit_code(&body, "simulate");
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("escape"), "{err}");
}
