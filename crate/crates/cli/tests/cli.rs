use gsw_core::monopole::read_bundle;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gsw(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsw"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report_value(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("report.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")).map(str::to_string))
        .unwrap_or_else(|| panic!("{key} missing from report"))
}

#[test]
fn invariants_pass_for_several_seeds() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["0", "42"] {
        let o = gsw(&["invariants", "--seed", seed], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
    let csv = fs::read_to_string(dir.path().join("invariants.csv")).unwrap();
    assert!(csv.starts_with("check,worst,tol,pass\n"));
    assert!(report_value(dir.path(), "conventions").starts_with("gsw-conventions"));
}

#[test]
fn flipped_omega_sign_fails_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = gsw(&["invariants", "--flip-omega-sign"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hkalg.permuting"));
}

#[test]
fn vortex_solve_finds_one_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = gsw(
        &[
            "solve", "--dim", "2", "--size", "64", "--degree", "1", "--t", "auto+1",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report_value(dir.path(), "divisor_total"), "1");
    for name in [
        "residuals.csv",
        "kw_trace.csv",
        "divisor.csv",
        "report.txt",
        "solution/config.txt",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let margin: f64 = report_value(dir.path(), "threshold_margin")
        .parse()
        .unwrap();
    assert!((margin - 1.0).abs() < 1e-12);
}

#[test]
fn below_threshold_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = gsw(
        &["solve", "--size", "16", "--degree", "1", "--t", "auto-0.5"],
        dir.path(),
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("margin"));
    let o = gsw(
        &["solve", "--size", "16", "--degree", "1", "--t", "auto"],
        dir.path(),
    );
    assert_eq!(code(&o), 3, "the threshold is strict");
}

#[test]
fn constant_spinor_has_empty_divisor() {
    let dir = tempfile::tempdir().unwrap();
    let o = gsw(
        &[
            "solve", "--size", "32", "--degree", "0", "--alpha", "const", "--t", "2",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read_to_string(dir.path().join("divisor.csv")).unwrap(),
        "x1,x2,multiplicity\n"
    );
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "solve", "--size", "32", "--degree", "2", "--n", "2", "--seed", "5",
    ];
    assert_eq!(code(&gsw(&args, a.path())), 0);
    assert_eq!(code(&gsw(&args, b.path())), 0);
    for name in [
        "residuals.csv",
        "kw_trace.csv",
        "divisor.csv",
        "report.txt",
        "solution/config.txt",
        "solution/connection.bin",
        "solution/f1.bin",
        "solution/g2.bin",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn project_multi_spinor_solution() {
    let dir = tempfile::tempdir().unwrap();
    let solved = dir.path().join("solved");
    let o = gsw(
        &["solve", "--size", "64", "--degree", "2", "--n", "3"],
        &solved,
    );
    assert_eq!(code(&o), 0);
    let projected = dir.path().join("projected");
    let o = gsw(
        &["project", solved.join("solution").to_str().unwrap()],
        &projected,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: f64 = report_value(&projected, "holomorphy_residual")
        .parse()
        .unwrap();
    assert!(r <= 1e-8, "holomorphy residual {r}");
    assert_eq!(report_value(&projected, "divisor_total"), "2");
}

#[test]
fn project_classical_bundle_is_identity_up_to_phase() {
    let dir = tempfile::tempdir().unwrap();
    let solved = dir.path().join("solved");
    assert_eq!(
        code(&gsw(&["solve", "--size", "32", "--degree", "1"], &solved)),
        0
    );
    let projected = dir.path().join("projected");
    assert_eq!(
        code(&gsw(
            &["project", solved.join("solution").to_str().unwrap()],
            &projected
        )),
        0
    );
    let (a, _) = read_bundle(&solved.join("solution")).unwrap();
    let (b, _) = read_bundle(&projected.join("projected")).unwrap();
    let k = (0..a.grid.len())
        .max_by(|&i, &j| a.alpha()[i].norm().total_cmp(&a.alpha()[j].norm()))
        .unwrap();
    let phase = b.alpha()[k] / a.alpha()[k];
    assert!((phase.norm() - 1.0).abs() < 1e-12);
    for (x, y) in a.alpha().iter().zip(b.alpha()) {
        assert!((phase * x - y).norm() < 1e-10);
    }
    assert_eq!(a.conn, b.conn);
}

#[test]
fn corrupted_bundle_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let solved = dir.path().join("solved");
    assert_eq!(
        code(&gsw(&["solve", "--size", "16", "--degree", "1"], &solved)),
        0
    );
    let bin = solved.join("solution/f1.bin");
    let mut bytes = fs::read(&bin).unwrap();
    bytes[..4].copy_from_slice(b"XXXX");
    fs::write(&bin, bytes).unwrap();
    let o = gsw(
        &["project", solved.join("solution").to_str().unwrap()],
        &dir.path().join("p"),
    );
    assert_eq!(code(&o), 64);
    let o = gsw(
        &["project", dir.path().join("missing").to_str().unwrap()],
        &dir.path().join("p"),
    );
    assert_eq!(code(&o), 64);
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve", "--dim", "3"],
        vec!["solve", "--t", "soon"],
        vec!["solve", "--alpha", "const"],
        vec!["solve", "--bogus"],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&gsw(&args, dir.path())), 64, "{args:?}");
    }
    let help = Command::new(env!("CARGO_BIN_EXE_gsw"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(code(&help), 0);
}

#[test]
fn config_file_supplies_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# small vortex\nsize = 32\ndegree = 2\nt = auto+0.5\n",
    )
    .unwrap();
    let o = gsw(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(report_value(dir.path(), "divisor_total"), "2");
    assert_eq!(report_value(dir.path(), "sizes"), "[32, 32]");
}

#[test]
fn four_torus_solve() {
    let dir = tempfile::tempdir().unwrap();
    let o = gsw(
        &["solve", "--dim", "4", "--size", "16", "--degree", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report_value(dir.path(), "divisor_total"), "1");
    assert_eq!(report_value(dir.path(), "sizes"), "[16, 16, 4, 4]");
}
