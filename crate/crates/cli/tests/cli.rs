//! Exit codes, configuration layering and output format of the binary.

use std::path::Path;
use std::process::{Command, Output};

fn lambda1d(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lambda1d"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout_value(output: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&output.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{text}"))
        .to_string()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn zero_duration_gives_the_initial_condition() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let output = lambda1d(&["population", "--tmax", "0"], &out);
    assert!(output.status.success());
    assert_eq!(
        rows(&out),
        vec![
            vec!["t_gamma", "rho_ee", "exp_minus_t", "exp_minus_2t"],
            vec!["0", "1", "1", "1"]
        ]
    );
}

#[test]
fn csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    assert!(
        lambda1d(&["population", "--tmax", "1", "--sample", "0.1"], &out)
            .status
            .success()
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            let digits = cell
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(char::is_ascii_digit)
                .count();
            assert!(digits <= 10, "{cell}");
            cell.parse::<f64>().unwrap();
        }
    }
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn default_sweep_peaks_at_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    assert!(lambda1d(&["sweep"], &out).status.success());
    let table = rows(&out);
    assert_eq!(
        table[0],
        vec!["delta_over_gamma", "p_aa", "p_ab", "fidelity"]
    );
    assert_eq!(table.len(), 201);
    let best = table[1..]
        .iter()
        .map(|r| (r[0].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert_eq!(format!("{:.2}", best.0), "2.00");
    assert!((best.1 - 2.0 / 3.0).abs() < 1e-4);
}

#[test]
fn numeric_sweep_tracks_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    assert!(
        lambda1d(&["sweep", "--mode", "numeric", "--points", "6"], &out)
            .status
            .success()
    );
    let table = rows(&out);
    assert_eq!(table[0].last().unwrap(), "numeric_gap");
    assert_eq!(table.len(), 7);
    for row in &table[1..] {
        assert!(row[4].parse::<f64>().unwrap() < 5e-3);
    }
}

#[test]
fn single_point_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let output = lambda1d(
        &[
            "sweep",
            "--delta-min",
            "5",
            "--delta-max",
            "5",
            "--points",
            "1",
        ],
        &out,
    );
    assert!(output.status.success());
    let table = rows(&out);
    assert_eq!(table.len(), 2);
    assert_eq!(table[1][1], "0.625");
}

#[test]
fn atom_in_g_b_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let output = lambda1d(&["scatter", "--ground", "g_B"], &out);
    assert!(output.status.success());
    assert_eq!(stdout_value(&output, "transparent"), "1");
    assert_eq!(stdout_value(&output, "residual_a"), "1");
    assert!(rows(&out).contains(&vec!["residual_a".to_string(), "1".to_string()]));
}

#[test]
fn noise_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.csv");
    let output = lambda1d(&["noise", "--beta", "0.98", "--dephasing", "0.1"], &out);
    assert!(output.status.success());
    assert_eq!(stdout_value(&output, "factor"), "0.882");
    assert_eq!(stdout_value(&output, "degraded_fidelity"), "0.735");
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(&config, "# noise run\nbeta = 0.9\ndephasing=0.2\n").unwrap();
    let out = dir.path().join("n.csv");
    let cfg = config.to_str().unwrap();

    let from_file = lambda1d(&["noise", "--config", cfg], &out);
    assert_eq!(stdout_value(&from_file, "factor"), "0.72");
    let overridden = lambda1d(&["noise", "--config", cfg, "--dephasing", "0"], &out);
    assert_eq!(stdout_value(&overridden, "factor"), "0.9");
    let defaults = lambda1d(&["noise"], &out);
    assert_eq!(stdout_value(&defaults, "factor"), "1");
}

#[test]
fn invalid_input_exits_with_two_and_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.csv");
    for args in [
        vec!["noise", "--beta", "1.5"],
        vec!["population", "--delta", "-1"],
        vec!["population", "--sample", "0.0105"],
        vec!["sweep", "--delta-min", "3", "--delta-max", "1"],
        vec!["epr", "--delta-long", "0.5"],
        vec!["scatter", "--ground", "g_C"],
    ] {
        let output = lambda1d(&args, &out);
        assert_eq!(
            output.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        assert!(!out.exists(), "{args:?} left a file behind");
    }
    let config = dir.path().join("typo.cfg");
    std::fs::write(&config, "detla=2\n").unwrap();
    let output = lambda1d(&["population", "--config", config.to_str().unwrap()], &out);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_output_path_is_invalid() {
    let output = Command::new(env!("CARGO_BIN_EXE_lambda1d"))
        .arg("noise")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn failed_tolerance_check_exits_with_three() {
    // A coarse grid misplaces the long packet's transfer beyond tolerance.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let output = lambda1d(&["scatter", "--dr", "2"], &out);
    assert_eq!(
        output.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&output.stdout)
    );
    assert!(out.exists());
}
