//! End-to-end tests of the tauspace binary: artifact determinism, exit
//! codes, and the golden configs shipped in configs/.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_tauspace")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_tauspace(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    let out_dir = dir.to_str().unwrap().to_string();
    full.push("--out");
    let leaked: &'static str = Box::leak(out_dir.into_boxed_str());
    full.push(leaked);
    run_tauspace(&full)
}

fn read_artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn free_particle_csv_final_row_reaches_tau_8() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("free_particle.cfg");
    let out = run_in(dir.path(), &["simulate", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x,p,tau,m,H");
    let last = lines.last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[0], 10.0);
    assert!((fields[3] - 8.0).abs() <= 8.0 * 1e-9, "tau = {}", fields[3]);
}

#[test]
fn golden_configs_run_and_are_bitwise_stable() {
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["simulate"], "free_particle.cfg"),
        (vec!["simulate"], "linear_decay.cfg"),
        (vec!["simulate"], "weak_field_shell.cfg"),
        (vec!["barycentric"], "barycentric_345.cfg"),
        (vec!["phase", "loop"], "bargmann_loop.cfg"),
        (vec!["phase", "cavity"], "cavity.cfg"),
        (vec!["phase", "interfere"], "interferometer.cfg"),
        (vec!["uncertainty", "grav"], "grav_scatter.cfg"),
        (vec!["oracle", "loop"], "oracle_loop.cfg"),
    ];
    for (subcmd, config_name) in cases {
        let config = configs_dir().join(config_name);
        let config_str = config.to_str().unwrap();
        let mut artifacts = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let mut args: Vec<&str> = subcmd.clone();
            args.extend(["--config", config_str]);
            let out = run_in(dir.path(), &args);
            assert!(
                out.status.success(),
                "{config_name}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            artifacts.push(read_artifacts(dir.path()));
        }
        assert_eq!(artifacts[0], artifacts[1], "{config_name} artifacts drifted across runs");
    }
}

#[test]
fn spectrometer_monte_carlo_is_seed_stable() {
    let config = configs_dir().join("spectrometer.cfg");
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    // smaller n than the golden config to keep the test quick
    let args = [
        "uncertainty",
        "spectrometer",
        "--config",
        config.to_str().unwrap(),
        "--monte-carlo",
        "2000",
    ];
    let a = run_in(dir_a.path(), &args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run_in(dir_b.path(), &args);
    assert!(b.status.success());
    assert_eq!(read_artifacts(dir_a.path()), read_artifacts(dir_b.path()));

    // a different seed must change the samples
    let dir_c = tempfile::tempdir().unwrap();
    let mut args_seeded: Vec<&str> = args.to_vec();
    args_seeded.extend(["--seed", "7"]);
    let c = run_in(dir_c.path(), &args_seeded);
    assert!(c.status.success());
    assert_ne!(read_artifacts(dir_a.path()), read_artifacts(dir_c.path()));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(
        &bad,
        "[scenario]\nkind = phase-cavity\n\n[cavity]\nv = 1.2\ntheta = 0.4\nt = 1\n",
    )
    .unwrap();
    let out = run_tauspace(&["phase", "cavity", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cavity"), "stderr: {stderr}");

    // missing config file is also a config error
    let out = run_tauspace(&["simulate", "--config", "/nonexistent.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kind_subcommand_mismatch_exits_2() {
    let config = configs_dir().join("cavity.cfg");
    let out = run_tauspace(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("deplete.cfg");
    // mass hits zero at t = 10, integration must abort
    std::fs::write(
        &cfg,
        "[scenario]\nkind = simulate\n\n[simulate]\nhamiltonian = linear_decay\nlambda = 0.1\n\
         p = 0.0\nm = 1.0\nt1 = 12.0\n",
    )
    .unwrap();
    let out = run_tauspace(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mass reached zero"), "stderr: {stderr}");
}

#[test]
fn sweep_cavity_is_monotone_and_sweep_interfere_periodic() {
    let dir = tempfile::tempdir().unwrap();
    let cavity = configs_dir().join("cavity.cfg");
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "--config",
            cavity.to_str().unwrap(),
            "--param",
            "theta",
            "--from",
            "0",
            "--to",
            "1.5707963267948966",
            "--points",
            "21",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "theta,tau_component,tau_composite,difference");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    for w in rows.windows(2) {
        assert!(w[1][2] >= w[0][2], "tau_composite not monotone");
    }
    // equality with the component clock only in the aligned case
    assert_eq!(rows[0][1], rows[0][2]);
    for row in &rows[1..] {
        assert!(row[2] > row[1]);
    }
}

#[test]
fn shipped_configs_round_trip_through_serializer() {
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("cfg") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let once = tauspace_cli::config::parse_config(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let twice =
            tauspace_cli::config::parse_config(&tauspace_cli::config::serialize_config(&once))
                .unwrap();
        assert_eq!(once, twice, "{} does not round-trip", path.display());
    }
}

#[test]
fn sweep_interfere_delta_tau_is_periodic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("interfere_sweep.cfg");
    std::fs::write(
        &cfg,
        "[scenario]\nkind = phase-interfere\n\n[interfere]\nt_span = 20.0\nbranch1 = const 0.0\n\
         branch2 = const 0.0\nmass = 1.0\ngamma = 0.0\n",
    )
    .unwrap();
    let to = 4.0 * std::f64::consts::PI;
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--param",
            "delta_tau",
            "--from",
            "0",
            "--to",
            &to.to_string(),
            "--points",
            "129",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 129);
    // one full period 2 pi hbar / m spans 64 grid points here
    for k in 0..65 {
        let (a, b) = (rows[k][1], rows[k + 64][1]);
        assert!((a - b).abs() < 1e-9, "intensity {a} vs {b} one period apart at row {k}");
    }
    // and the intensity actually oscillates across the sweep
    let max = rows.iter().map(|r| r[1]).fold(f64::MIN, f64::max);
    let min = rows.iter().map(|r| r[1]).fold(f64::MAX, f64::min);
    assert!(max > 0.99 && min < 0.01, "sweep range [{min}, {max}]");
}

#[test]
fn sweep_with_empty_range_errors() {
    let cavity = configs_dir().join("cavity.cfg");
    let out = run_tauspace(&[
        "sweep",
        "--config",
        cavity.to_str().unwrap(),
        "--param",
        "theta",
        "--from",
        "0",
        "--to",
        "1",
        "--points",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run_tauspace(&[
        "sweep",
        "--config",
        cavity.to_str().unwrap(),
        "--param",
        "bogus",
        "--from",
        "0",
        "--to",
        "1",
        "--points",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_print_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("barycentric_345.cfg");
    let out = run_in(dir.path(), &["barycentric", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[barycentric]"));
    assert!(stdout.contains("velocity = 4.0000000000000002e-1"), "stdout: {stdout}");
}
