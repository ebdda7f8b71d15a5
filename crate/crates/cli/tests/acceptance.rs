//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use lambda1d_core::analysis::numeric_spacing;
use lambda1d_core::twophoton::long_time_horizon;
use lambda1d_core::{
    build_epr_state, cloning_fidelity, concurrence, excited_population,
    make_exponential_wavepacket, optimal_delta, probabilities_closed_form, solve_analytic,
    PhysicalParams, SingleExcitationState, SpatialGrid, TwoPhotonPolarizationState, TwoPhotonState,
};
use num_complex::Complex64 as C64;

type Check = Result<String, String>;
type Criterion = (&'static str, fn(&Path) -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Run {
    output: Output,
    csv: String,
}

impl Run {
    fn value(&self, key: &str) -> Result<f64, String> {
        String::from_utf8_lossy(&self.output.stdout)
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
            .ok_or_else(|| format!("missing `{key}`"))?
            .parse()
            .map_err(|e| format!("`{key}`: {e}"))
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.csv
            .lines()
            .skip(1)
            .map(|l| {
                l.split(',')
                    .map(|c| c.parse().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect()
    }
}

fn lambda1d(dir: &Path, name: &str, args: &[&str]) -> Result<Run, String> {
    let out = dir.join(name);
    let output = Command::new(env!("CARGO_BIN_EXE_lambda1d"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    if !output.status.success() {
        return Err(format!(
            "{args:?} exited with {:?}: {}",
            output.status.code(),
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    let csv = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    Ok(Run { output, csv })
}

fn optimal_cloning(dir: &Path) -> Check {
    let params = PhysicalParams::new(2.0).map_err(|e| e.to_string())?;
    let (closed, _) = probabilities_closed_form(&params).map_err(|e| e.to_string())?;
    let run = lambda1d(
        dir,
        "c1.csv",
        &[
            "sweep",
            "--mode",
            "numeric",
            "--delta-min",
            "2",
            "--delta-max",
            "2",
            "--points",
            "1",
        ],
    )?;
    let row = &run.rows()[0];
    let (numeric, fidelity) = (row[1], row[3]);
    let f_closed = cloning_fidelity(&params).map_err(|e| e.to_string())?;
    ensure(
        (closed - 2.0 / 3.0).abs() < 5e-3
            && (numeric - 2.0 / 3.0).abs() < 5e-3
            && (fidelity - 5.0 / 6.0).abs() < 5e-3
            && (f_closed - 5.0 / 6.0).abs() < 5e-3,
        format!("p_aa closed {closed:.6}, numeric {numeric:.6}; F numeric {fidelity:.6}, closed {f_closed:.6}"),
    )
}

fn optimal_bandwidth(_: &Path) -> Check {
    let best = optimal_delta(&PhysicalParams::default()).map_err(|e| e.to_string())?;
    ensure(
        (best - 2.0).abs() <= 1e-4,
        format!("argmax p_aa at Δ/Γ = {best:.7}"),
    )
}

fn limits(_: &Path) -> Check {
    let at = |d: f64| probabilities_closed_form(&PhysicalParams::new(d).unwrap()).unwrap();
    let (wide_aa, wide_ab) = at(100.0);
    let (_, narrow_ab) = at(1e-6);
    ensure(
        (wide_aa - 0.5).abs() < 2e-2
            && (wide_ab - 0.5).abs() < 2e-2
            && (narrow_ab - 1.0).abs() < 1e-3,
        format!("Δ=100Γ: p_aa {wide_aa:.4}, p_ab {wide_ab:.4}; Δ=1e-6Γ: p_ab {narrow_ab:.7}"),
    )
}

fn population_curves(dir: &Path) -> Check {
    let fast = lambda1d(
        dir,
        "c4a.csv",
        &["population", "--delta", "2", "--tmax", "6", "--dr", "0.001"],
    )?;
    let slow = lambda1d(
        dir,
        "c4b.csv",
        &[
            "population",
            "--delta",
            "0.5",
            "--tmax",
            "6",
            "--dr",
            "0.001",
        ],
    )?;
    let bounded = fast
        .rows()
        .iter()
        .all(|r| r[3] - 1e-12 <= r[1] && r[1] <= r[2] + 1e-12);
    let t_1e = fast.value("time_to_1e")?;
    let dip = slow.value("reabsorption")? == 1.0 && slow.value("min_decay_rate")? < 1.0;
    let no_dip = fast.value("reabsorption")? == 0.0;

    // Curve values against the quadrature solver at every 0.5/Γ.
    let mut worst: f64 = 0.0;
    for (delta, run) in [(2.0, &fast), (0.5, &slow)] {
        let params = PhysicalParams::new(delta).unwrap();
        let grid = SpatialGrid::for_packet(&params, 1e-3, 6.01).unwrap();
        let packet = make_exponential_wavepacket(&params, &grid).unwrap();
        for row in run.rows().iter().step_by(50) {
            let exact = excited_population(
                &solve_analytic(&params, &packet, row[0]).map_err(|e| e.to_string())?,
            );
            worst = worst.max((row[1] - exact).abs());
        }
    }
    ensure(
        bounded && (t_1e / 0.67 - 1.0).abs() <= 0.15 && dip && no_dip && worst < 1e-3,
        format!(
            "Δ=2Γ within [e^-2t, e^-t]: {bounded}, time to 1/e {t_1e:.4}/Γ; Δ=0.5Γ reabsorption dip: {dip}; \
             max |CSV − quadrature| {worst:.2e}"
        ),
    )
}

fn unitarity_ledger(_: &Path) -> Check {
    let mut worst: f64 = 0.0;
    for delta in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let params = PhysicalParams::new(delta).unwrap();
        let dr = numeric_spacing(&params);
        let grid = SpatialGrid::for_packet(&params, dr, dr).map_err(|e| e.to_string())?;
        let packet = make_exponential_wavepacket(&params, &grid).map_err(|e| e.to_string())?;
        let horizon = (long_time_horizon(&params) / dr).ceil() * dr;
        let tp = TwoPhotonState::from_packet(
            &params,
            &packet,
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            horizon,
        )
        .map_err(|e| e.to_string())?;
        for k in 0..20 {
            let t = (((horizon * k as f64 / 19.0) / dr).round() * dr).min(tp.t());
            let snap = tp.snapshot(t).map_err(|e| e.to_string())?;
            worst = worst.max((snap.rho_ee + snap.probabilities.total() - 1.0).abs());
        }
    }
    ensure(
        worst < 1e-3,
        format!("max |ρ_ee + p_aa + p_ab − 1| = {worst:.2e} over 20 times × 6 widths"),
    )
}

fn state_transfer(dir: &Path) -> Check {
    let run = lambda1d(
        dir,
        "c6.csv",
        &["scatter", "--ground", "g_A", "--delta", "0.001"],
    )?;
    let residual = run.value("residual_a")?;
    let fidelity = run.value("transfer_fidelity")?;
    let phase = run.value("phase")?;
    ensure(
        residual < 0.01 && fidelity > 0.99 && (phase - PI).abs() <= 0.05,
        format!("residual a-norm {residual:.5}, transfer fidelity {fidelity:.5}, phase {phase:.5}"),
    )
}

fn epr_production(dir: &Path) -> Check {
    let ideal =
        concurrence(&build_epr_state(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap()).unwrap();
    let run = lambda1d(dir, "c7.csv", &["epr", "--delta-long", "0.001"])?;
    let overlap = run.value("mode_overlap")?;
    let at_overlap = run.value("concurrence")?;
    let werner = concurrence(&TwoPhotonPolarizationState::werner(0.5).unwrap()).unwrap();
    ensure(
        (ideal - 1.0).abs() <= 1e-9 && at_overlap >= 0.99 && (overlap - 0.0632).abs() < 1e-3 && (werner - 0.25).abs() < 1e-9,
        format!("ideal {ideal:.12}; overlap {overlap:.5} → concurrence {at_overlap:.9}; Werner(0.5) {werner:.12}"),
    )
}

fn noise_estimates(dir: &Path) -> Check {
    let circuit = lambda1d(
        dir,
        "c8a.csv",
        &["noise", "--beta", "1", "--dephasing", "0.1"],
    )?
    .value("factor")?;
    let photonic = lambda1d(
        dir,
        "c8b.csv",
        &["noise", "--beta", "0.98", "--dephasing", "0.1"],
    )?
    .value("factor")?;
    ensure(
        (circuit - 0.90).abs() <= 1e-9 && (photonic - 0.882).abs() <= 1e-9,
        format!("β=1: {circuit}, β=0.98: {photonic}"),
    )
}

fn solver_pair(_: &Path) -> Check {
    let worst_gap = |delta: f64, dr: f64| -> f64 {
        let params = PhysicalParams::new(delta).unwrap();
        let grid = SpatialGrid::for_packet(&params, dr, 3.0 + dr).unwrap();
        let packet = make_exponential_wavepacket(&params, &grid).unwrap();
        let mut state = SingleExcitationState::new(&params, &packet).unwrap();
        let mut worst: f64 = 0.0;
        for t in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            state.advance_to(t).unwrap();
            let exact = excited_population(&solve_analytic(&params, &packet, t).unwrap());
            worst = worst.max((excited_population(&state) - exact).abs());
        }
        worst
    };
    let gaps: Vec<f64> = [0.5, 1.0, 2.0, 5.0]
        .iter()
        .map(|&d| worst_gap(d, 1e-3))
        .collect();
    let ratio = worst_gap(2.0, 4e-3) / worst_gap(2.0, 2e-3);
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    ensure(
        max_gap < 1e-3 && ratio > 1.8,
        format!("max |step − quadrature| {max_gap:.2e} at dr=1e-3; error ratio under halving dr {ratio:.2}"),
    )
}

fn determinism(dir: &Path) -> Check {
    let runs: [&[&str]; 5] = [
        &["population", "--delta", "0.5", "--tmax", "6"],
        &["sweep", "--mode", "numeric", "--points", "6"],
        &["scatter"],
        &["epr"],
        &["noise", "--beta", "0.98", "--dephasing", "0.1"],
    ];
    let mut differing = Vec::new();
    for args in runs {
        let first = lambda1d(dir, "d1.csv", args)?.csv;
        let second = lambda1d(dir, "d2.csv", args)?.csv;
        if first != second {
            differing.push(args[0]);
        }
    }
    ensure(
        differing.is_empty(),
        format!("{} subcommands, differing: {differing:?}", runs.len()),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: [Criterion; 10] = [
        ("optimal cloning point", optimal_cloning),
        ("optimal bandwidth", optimal_bandwidth),
        ("bandwidth limits", limits),
        ("population curves", population_curves),
        ("unitarity ledger", unitarity_ledger),
        ("monochromatic state transfer", state_transfer),
        ("EPR production", epr_production),
        ("noise estimates", noise_estimates),
        ("solver-pair equivalence", solver_pair),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check(dir.path());
        let elapsed: Duration = start.elapsed();
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "criterion {:>2} {tag} {name}: {detail} ({:.2}s)",
            n + 1,
            elapsed.as_secs_f64()
        );
        if result.is_err() {
            failed.push(*name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {} of {} criteria failed: {failed:?}",
            failed.len(),
            criteria.len()
        );
        ExitCode::FAILURE
    }
}
