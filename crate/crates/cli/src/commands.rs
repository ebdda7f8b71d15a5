//! Subcommand implementations.

use std::path::Path;

use anyhow::anyhow;
use num_complex::Complex64 as C64;

use lambda1d_core::analysis::{crossing_delta, Spacing, SweepMode};
use lambda1d_core::scattering::{passage_time, transfer_report, MONOCHROMATIC_LIMIT};
use lambda1d_core::{
    build_epr_state, cloning_fidelity, concurrence, make_exponential_wavepacket, noise_degradation,
    overlap, scatter_single_photon, sweep_delta, GroundState, NoiseParams, PhysicalParams,
    SpatialGrid, TwoPhotonState,
};

use crate::config::ConfigFile;
use crate::output::{write_atomic, Cell, Summary, Table};
use crate::{
    CliError, Command, Common, EprArgs, ModeArg, NoiseArgs, PopulationArgs, ScatterArgs,
    SpacingArg, SweepArgs,
};

/// Largest accepted |numeric − closed form| per sweep row.
pub const SWEEP_GAP_TOLERANCE: f64 = 5e-3;
/// Decay rates below this fraction of Γ count as reabsorption.
pub const REABSORPTION_RATE: f64 = 0.9;
/// Populations below this are too small for a meaningful decay rate.
const RATE_FLOOR: f64 = 1e-6;
/// Largest accepted gap between the numeric and closed-form mode overlap.
pub const OVERLAP_TOLERANCE: f64 = 1e-3;
/// Norm drift accepted for scattering outside the long-packet check.
pub const NORM_TOLERANCE: f64 = 1e-4;

pub fn run(common: &Common, command: Command) -> Result<(), CliError> {
    let config = ConfigFile::load(common.config.as_deref())?;
    let out = common
        .out
        .clone()
        .ok_or_else(|| CliError::Invalid("--out PATH is required".into()))?;
    match command {
        Command::Population(args) => population(&config, &out, &args),
        Command::Sweep(args) => sweep(&config, &out, &args),
        Command::Scatter(args) => scatter(&config, &out, &args),
        Command::Epr(args) => epr(&config, &out, &args),
        Command::Noise(args) => noise(&config, &out, &args),
    }
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Invalid(format!(
            "{name} must be positive, got {x}"
        )))
    }
}

/// `x / unit` when it is an integer to within rounding.
fn whole_multiple(name: &str, x: f64, unit: f64) -> Result<usize, CliError> {
    let ratio = x / unit;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-6 * n.max(1.0) {
        return Err(CliError::Invalid(format!(
            "{name} = {x} is not a multiple of {unit}"
        )));
    }
    Ok(n as usize)
}

fn finish(out: &Path, table: &Table, failures: Vec<String>) -> Result<(), CliError> {
    write_atomic(out, &table.render())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(failures.join("; ")))
    }
}

fn population(config: &ConfigFile, out: &Path, args: &PopulationArgs) -> Result<(), CliError> {
    let delta = positive("delta", config.resolve(args.delta, "delta", 2.0)?)?;
    let detuning = config.resolve(args.detuning, "detuning", 0.0)?;
    let tmax = config.resolve(args.tmax, "tmax", 6.0)?;
    let dr = positive("dr", config.resolve(args.dr, "dr", 1e-3)?)?;
    let sample = positive("sample", config.resolve(args.sample, "sample", 0.01)?)?;
    if !(tmax >= 0.0 && tmax.is_finite()) {
        return Err(CliError::Invalid(format!(
            "tmax must be non-negative, got {tmax}"
        )));
    }
    let params = PhysicalParams::new(delta)?.with_detuning(detuning);
    params.validate()?;
    let dt = dr / params.c;
    let stride = whole_multiple("sample", sample, dt)?;
    let rows = whole_multiple("tmax", tmax, sample)?;

    let grid = SpatialGrid::for_packet(&params, dr, dr)?;
    let packet = make_exponential_wavepacket(&params, &grid)?;
    let t_end = (rows * stride) as f64 * dt;
    let tp = TwoPhotonState::from_packet(
        &params,
        &packet,
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        t_end,
    )?;

    let gamma = params.gamma;
    let mut table = Table::new(&["t_gamma", "rho_ee", "exp_minus_t", "exp_minus_2t"]);
    let mut curve = Vec::with_capacity(rows + 1);
    for k in 0..=rows {
        let t = (k * stride) as f64 * dt;
        let rho = tp.snapshot(t)?.rho_ee;
        let tg = t * gamma;
        table.push(vec![
            tg.into(),
            rho.into(),
            (-tg).exp().into(),
            (-2.0 * tg).exp().into(),
        ]);
        curve.push((tg, rho));
    }

    let mut failures = Vec::new();
    if (curve[0].1 - 1.0).abs() > 1e-9 {
        failures.push(format!("rho_ee(0) = {} differs from 1", curve[0].1));
    }
    if let Some((t, rho)) = curve
        .iter()
        .find(|(_, rho)| !(-1e-9..=1.0 + 1e-9).contains(rho))
    {
        failures.push(format!("rho_ee({t}) = {rho} outside [0, 1]"));
    }

    let mut summary = Summary::default();
    summary.add("time_to_1e", time_to_level(&curve, (-1.0f64).exp()));
    let min_rate = minimum_decay_rate(&curve);
    summary.add("min_decay_rate", min_rate);
    summary.add("reabsorption", min_rate < REABSORPTION_RATE);
    print!("{}", summary.lines());
    finish(out, &table, failures)
}

/// First time the curve drops to `level`, interpolated linearly; NaN if never.
fn time_to_level(curve: &[(f64, f64)], level: f64) -> f64 {
    curve
        .windows(2)
        .find(|w| w[0].1 > level && w[1].1 <= level)
        .map(|w| w[0].0 + (w[0].1 - level) / (w[0].1 - w[1].1) * (w[1].0 - w[0].0))
        .unwrap_or(f64::NAN)
}

/// Smallest −d ln ρ / d(Γt) between consecutive rows; NaN for a single row.
fn minimum_decay_rate(curve: &[(f64, f64)]) -> f64 {
    curve
        .windows(2)
        .filter(|w| w[1].1 > RATE_FLOOR)
        .map(|w| -(w[1].1 / w[0].1).ln() / (w[1].0 - w[0].0))
        .fold(f64::NAN, f64::min)
}

fn sweep(config: &ConfigFile, out: &Path, args: &SweepArgs) -> Result<(), CliError> {
    let min = config.resolve(args.delta_min, "delta_min", 0.01)?;
    let max = config.resolve(args.delta_max, "delta_max", 12.0)?;
    let points = config.resolve(args.points, "points", 200)?;
    let mode_arg = config.resolve(args.mode, "mode", ModeArg::ClosedForm)?;
    let spacing = match config.resolve(args.spacing, "spacing", SpacingArg::Linear)? {
        SpacingArg::Linear => Spacing::Linear,
        SpacingArg::Log => Spacing::Log,
    };
    let dr = config
        .resolve_optional(args.dr, "dr")?
        .map(|dr| positive("dr", dr))
        .transpose()?;
    let detuning = config.resolve(args.detuning, "detuning", 0.0)?;
    let template = PhysicalParams::default().with_detuning(detuning);
    template.validate()?;
    let mode = match mode_arg {
        ModeArg::ClosedForm => SweepMode::ClosedForm,
        ModeArg::Numeric => SweepMode::Numeric { dr },
    };
    let rows = sweep_delta(&template, (min, max), points, mode, spacing)?;

    let numeric = matches!(mode, SweepMode::Numeric { .. });
    let mut header = vec!["delta_over_gamma", "p_aa", "p_ab", "fidelity"];
    if numeric {
        header.push("numeric_gap");
    }
    let mut table = Table::new(&header);
    let mut failures = Vec::new();
    let mut errors = Vec::new();
    for row in &rows {
        let mut cells: Vec<Cell> = vec![
            row.delta_over_gamma.into(),
            row.p_aa.into(),
            row.p_ab.into(),
            row.fidelity.into(),
        ];
        if numeric {
            cells.push(row.numeric_gap.unwrap_or(f64::NAN).into());
        }
        table.push(cells);
        if let Some(e) = &row.error {
            errors.push(format!("Δ/Γ = {}: {e}", row.delta_over_gamma));
            continue;
        }
        match row.numeric_gap {
            Some(gap) if gap.is_nan() || gap >= SWEEP_GAP_TOLERANCE => failures.push(format!(
                "Δ/Γ = {}: numeric gap {gap:.3e}",
                row.delta_over_gamma
            )),
            None if (row.p_aa + row.p_ab - 1.0).abs() > 1e-9 => {
                failures.push(format!("Δ/Γ = {}: p_aa + p_ab ≠ 1", row.delta_over_gamma))
            }
            _ => {}
        }
    }

    let mut summary = Summary::default();
    if let Some(best) = rows
        .iter()
        .filter(|r| r.p_aa.is_finite())
        .max_by(|a, b| a.p_aa.total_cmp(&b.p_aa))
    {
        summary.add("max_p_aa_delta_over_gamma", best.delta_over_gamma);
        summary.add("max_p_aa", best.p_aa);
    }
    summary.add("crossing_delta_over_gamma", crossing_delta(&template)?);
    print!("{}", summary.lines());

    if !errors.is_empty() {
        write_atomic(out, &table.render())?;
        return Err(CliError::Runtime(anyhow!(
            "{} rows failed: {}",
            errors.len(),
            errors.join("; ")
        )));
    }
    finish(out, &table, failures)
}

fn ground_label(ground: GroundState) -> &'static str {
    match ground {
        GroundState::GA => "g_A",
        GroundState::GB => "g_B",
    }
}

fn scatter(config: &ConfigFile, out: &Path, args: &ScatterArgs) -> Result<(), CliError> {
    let ground = config.resolve(args.ground, "ground", GroundState::GA)?;
    let delta = positive("delta", config.resolve(args.delta, "delta", 0.001)?)?;
    let detuning = config.resolve(args.detuning, "detuning", 0.0)?;
    let dr = positive("dr", config.resolve(args.dr, "dr", 0.02)?)?;
    let params = PhysicalParams::new(delta)?.with_detuning(detuning);
    params.validate()?;

    let grid = SpatialGrid::for_packet(&params, dr, dr)?;
    let input = make_exponential_wavepacket(&params, &grid)?;
    let dt = dr / params.c;
    let t = (passage_time(&params, &input) / dt).ceil() * dt;
    let result = scatter_single_photon(&params, &input, ground, t)?;

    let mut summary = Summary::default();
    summary.add("ground", ground_label(ground));
    summary.add("delta_over_gamma", delta / params.gamma);
    summary.add("t_gamma", result.t * params.gamma);
    summary.add("residual_a", result.residual_a);
    summary.add("norm_b", result.norm_b());
    summary.add("transfer_fidelity", result.transfer_fidelity);
    summary.add("transfer_overlap_re", result.transfer_overlap.re);
    summary.add("transfer_overlap_im", result.transfer_overlap.im);
    summary.add("total_norm", result.total_norm());

    let mut failures = Vec::new();
    match ground {
        GroundState::GB => {
            let transparent =
                (result.residual_a - input.norm_sqr()).abs() <= 1e-12 && result.norm_b() == 0.0;
            summary.add("transparent", transparent);
            if !transparent {
                failures.push("atom in g_B is not transparent".to_string());
            }
        }
        GroundState::GA => {
            let report = transfer_report(&params, &result)?;
            summary.add("phase", report.phase);
            summary.add("shape_error", report.shape_error);
            summary.add("relation_error", report.relation_error);
            summary.add("relation_bound", report.relation_bound);
            if report.delta_over_gamma <= MONOCHROMATIC_LIMIT {
                summary.add("transfer_passed", report.passed());
                if !report.passed() {
                    failures.push(format!("state transfer outside tolerance: {report:?}"));
                }
            }
        }
    }
    if (result.total_norm() - 1.0).abs() > NORM_TOLERANCE {
        failures.push(format!("norm {} not conserved", result.total_norm()));
    }
    print!("{}", summary.lines());
    finish(out, &summary.table(), failures)
}

fn epr(config: &ConfigFile, out: &Path, args: &EprArgs) -> Result<(), CliError> {
    let delta_long = positive(
        "delta_long",
        config.resolve(args.delta_long, "delta_long", 0.001)?,
    )?;
    let dr = positive("dr", config.resolve(args.dr, "dr", 0.02)?)?;
    let long_params = PhysicalParams::new(delta_long)?;
    let gamma = long_params.gamma;

    // The short photon is the spontaneous emission, of width Γ.
    let grid = SpatialGrid::for_packet(&long_params, dr, dr)?;
    let long = make_exponential_wavepacket(&long_params, &grid)?;
    let short = make_exponential_wavepacket(&long_params.with_delta(gamma), &grid)?;
    let mode_overlap = overlap(&short, &long)?;
    let closed_form = 2.0 * (gamma * delta_long).sqrt() / (gamma + delta_long);

    let report = lambda1d_core::scattering::monochromatic_transfer_check_with(&long_params, dr)?;
    let transfer_phase = -report.transfer_overlap / report.transfer_overlap.norm();
    let state = build_epr_state(transfer_phase, mode_overlap)?;
    let c = concurrence(&state)?;
    let metadata = state.metadata().expect("built states carry metadata");

    let mut summary = Summary::default();
    summary.add("delta_long_over_gamma", delta_long / gamma);
    summary.add("mode_overlap", mode_overlap.norm());
    summary.add("mode_overlap_closed_form", closed_form);
    summary.add("transfer_fidelity", report.transfer_fidelity);
    summary.add("transfer_phase", transfer_phase.arg());
    summary.add("concurrence", c);
    summary.add("reduced_entropy_bits", state.reduced_entropy());
    summary.add("double_occupancy", metadata.double_occupancy);
    summary.add("overlap_model", metadata.model);

    let mut failures = Vec::new();
    if (mode_overlap.norm() - closed_form).abs() > OVERLAP_TOLERANCE {
        failures.push(format!(
            "mode overlap {} differs from {closed_form}",
            mode_overlap.norm()
        ));
    }
    if !report.passed() {
        failures.push(format!("state transfer outside tolerance: {report:?}"));
    }
    print!("{}", summary.lines());
    finish(out, &summary.table(), failures)
}

fn noise(config: &ConfigFile, out: &Path, args: &NoiseArgs) -> Result<(), CliError> {
    let beta = config.resolve(args.beta, "beta", 1.0)?;
    let gamma_star = config.resolve(args.dephasing, "dephasing", 0.0)?;
    let optimal = cloning_fidelity(&PhysicalParams::new(2.0)?)?;
    let fidelity = config.resolve(args.fidelity, "fidelity", optimal)?;
    let entanglement = config.resolve(args.concurrence, "concurrence", 1.0)?;
    for (name, x) in [("fidelity", fidelity), ("concurrence", entanglement)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(CliError::Invalid(format!(
                "{name} must lie in [0, 1], got {x}"
            )));
        }
    }
    let factor = noise_degradation(&NoiseParams::new(beta, gamma_star)?)?;

    let mut summary = Summary::default();
    summary.add("beta", beta);
    summary.add("gamma_star_over_gamma", gamma_star);
    summary.add("factor", factor);
    summary.add("fidelity", fidelity);
    summary.add("degraded_fidelity", factor * fidelity);
    summary.add("concurrence", entanglement);
    summary.add("degraded_concurrence", factor * entanglement);
    print!("{}", summary.lines());
    finish(out, &summary.table(), Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_crossing_and_rates() {
        let curve: Vec<(f64, f64)> = (0..=100)
            .map(|k| (0.01 * k as f64, (-2.0 * 0.01 * k as f64).exp()))
            .collect();
        assert!((time_to_level(&curve, (-1.0f64).exp()) - 0.5).abs() < 1e-4);
        assert!((minimum_decay_rate(&curve) - 2.0).abs() < 1e-9);
        assert!(time_to_level(&curve[..2], 0.01).is_nan());
        assert!(minimum_decay_rate(&curve[..1]).is_nan());
    }

    #[test]
    fn multiples() {
        assert_eq!(whole_multiple("sample", 0.01, 1e-3).unwrap(), 10);
        assert_eq!(whole_multiple("tmax", 0.0, 0.01).unwrap(), 0);
        assert!(whole_multiple("sample", 0.0105, 1e-3).is_err());
    }
}
