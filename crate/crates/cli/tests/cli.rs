use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn grekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grekit")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_lr_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = grekit(&["verify-lr", "--seed", "42", "--trials", "200", "--out", path(out_dir)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = fs::read(a.join("verify_lr.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("verify_lr.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().next().unwrap(), "trial,rows,cols,eta,min_margin,argmin,passed");
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn verify_csiszar_reports_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = grekit(&["verify-csiszar", "--seed", "1", "--trials", "100", "--out", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("verify_csiszar.csv")).unwrap();
    assert!(text.starts_with("trial,mode,eta,h_before,h_after,margin,integrated_gap,status\n"));
    assert!(text.contains(",stochastic,"));
}

#[test]
fn power_iterate_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = grekit(&["power-iterate", "--seed", "3", "--out", path(dir.path())]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("power_iterate.csv")).unwrap();
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn growth_config_file_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("growth.toml");
    fs::write(
        &cfg,
        "x_max = 4.0\nn_cells = 40\nv = \"zero\"\nw = \"zero\"\nB = \"linear\"\nb = \"parabolic\"\n\
         dt_safety = 0.5\nt_end = 1.0\neta = { kind = \"TV\" }\npsi0 = \"x\"\n",
    )
    .unwrap();
    let out = grekit(&["simulate-growth", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("growth_trace.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "k,t,entropy,weighted_mass,csiszar_margin");
}

#[test]
fn transport_preset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = grekit(&["simulate-transport", "--preset", "beam-isotropic", "--out", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("transport_trace.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "k,t,mass_f,mass_g,entropy,lr_min_margin");
    assert_eq!(text.lines().count(), 1002);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "n_x = \"many\"\n").unwrap();
    assert_eq!(code(&grekit(&["simulate-transport", "--config", path(&bad), "--out", path(dir.path())])), 1);
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&grekit(&["simulate-growth", "--config", path(&missing), "--out", path(dir.path())])), 1);
    assert_eq!(code(&grekit(&["simulate-growth", "--preset", "nope", "--out", path(dir.path())])), 1);
    assert_eq!(code(&grekit(&["verify-lr", "--trials", "abc"])), 1);
    assert_eq!(code(&grekit(&["no-such-command"])), 1);
    assert_eq!(code(&grekit(&["--help"])), 0);
}

#[test]
fn lost_preconditions_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let slab = dir.path().join("slab.toml");
    fs::write(
        &slab,
        "L = 1.0\nn_x = 10\nv_max = 1.0\nn_v = 4\nsigma = 1.0\nscattering = \"ISOTROPIC\"\n\
         cfl_safety = 1.2\nt_end = 0.1\neta = { kind = \"QUAD\" }\nf0 = \"uniform(1)\"\n",
    )
    .unwrap();
    assert_eq!(code(&grekit(&["simulate-transport", "--config", path(&slab), "--out", path(dir.path())])), 3);

    let drift = dir.path().join("drift.toml");
    fs::write(
        &drift,
        "x_max = 1.0\nn_cells = 20\nv = \"const:1\"\nw = \"zero\"\nB = \"zero\"\nb = \"none\"\n\
         t_end = 5.0\neta = { kind = \"QUAD\" }\npsi0 = \"const:1\"\n",
    )
    .unwrap();
    assert_eq!(code(&grekit(&["simulate-growth", "--config", path(&drift), "--out", path(dir.path())])), 3);
}
