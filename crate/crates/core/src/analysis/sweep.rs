//! Sweeps of the two-photon probabilities over the packet's spectral width.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::twophoton::{converged_probabilities, probabilities_closed_form};
use crate::units::PhysicalParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepMode {
    ClosedForm,
    /// Time-dependent solution at grid spacing `dr`, or [`numeric_spacing`].
    Numeric {
        dr: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub delta_over_gamma: f64,
    pub p_aa: f64,
    pub p_ab: f64,
    pub fidelity: f64,
    /// max(|Δp_aa|, |Δp_ab|) between numeric and closed form (numeric mode).
    pub numeric_gap: Option<f64>,
    /// Solver failure for this row; the values are NaN.
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(delta_over_gamma: f64, error: String) -> Self {
        Self {
            delta_over_gamma,
            p_aa: f64::NAN,
            p_ab: f64::NAN,
            fidelity: f64::NAN,
            numeric_gap: None,
            error: Some(error),
        }
    }
}

/// Grid spacing resolving both the decay time and the packet length.
pub fn numeric_spacing(params: &PhysicalParams) -> f64 {
    0.01 * params.c / params.gamma.max(params.delta_spec)
}

/// `n` values of Δ/Γ from `min` to `max`; a single point needs `min == max`.
pub fn sweep_points(min: f64, max: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(min > 0.0 && max.is_finite()) {
        return Err(invalid(
            "range",
            format!("need 0 < Δ_min ≤ Δ_max, got [{min}, {max}]"),
        ));
    }
    match n {
        0 => Err(invalid("points", "at least one point is needed")),
        1 if min == max => Ok(vec![min]),
        1 => Err(invalid("points", "a single point needs Δ_min = Δ_max")),
        _ if min >= max => Err(invalid(
            "range",
            format!("need Δ_min < Δ_max, got [{min}, {max}]"),
        )),
        _ => {
            let last = (n - 1) as f64;
            let point = |k: usize| match spacing {
                Spacing::Linear => min + (max - min) * k as f64 / last,
                Spacing::Log => min * (max / min).powf(k as f64 / last),
            };
            // Pin the endpoints so rounding cannot leave the range.
            Ok((0..n)
                .map(|k| if k + 1 == n { max } else { point(k) })
                .collect())
        }
    }
}

/// Rows (Δ/Γ, p_aa, p_ab, F) in ascending Δ. Rows run in parallel; a row
/// whose solver fails carries the error instead of aborting the sweep.
pub fn sweep_delta(
    template: &PhysicalParams,
    range: (f64, f64),
    n: usize,
    mode: SweepMode,
    spacing: Spacing,
) -> Result<Vec<SweepRow>> {
    template.validate()?;
    if let SweepMode::Numeric { dr: Some(dr) } = mode {
        if !(dr > 0.0 && dr.is_finite()) {
            return Err(invalid("dr", format!("{dr} must be positive")));
        }
    }
    let points = sweep_points(range.0, range.1, n, spacing)?;
    Ok(sweep_with(template, &points, |params| row(params, mode)))
}

fn sweep_with<F>(template: &PhysicalParams, points: &[f64], solve: F) -> Vec<SweepRow>
where
    F: Fn(&PhysicalParams) -> Result<SweepRow> + Sync,
{
    points
        .par_iter()
        .map(|&ratio| {
            let params = template.with_delta(ratio * template.gamma);
            solve(&params).unwrap_or_else(|e| SweepRow::failed(ratio, e.to_string()))
        })
        .collect()
}

fn row(params: &PhysicalParams, mode: SweepMode) -> Result<SweepRow> {
    let delta_over_gamma = params.delta_spec / params.gamma;
    let (p_aa, p_ab) = probabilities_closed_form(params)?;
    match mode {
        SweepMode::ClosedForm => Ok(SweepRow {
            delta_over_gamma,
            p_aa,
            p_ab,
            fidelity: p_aa + 0.5 * p_ab,
            numeric_gap: None,
            error: None,
        }),
        SweepMode::Numeric { dr } => {
            let result =
                converged_probabilities(params, dr.unwrap_or_else(|| numeric_spacing(params)))?;
            let p = result.probabilities;
            Ok(SweepRow {
                delta_over_gamma,
                p_aa: p.p_aa,
                p_ab: p.p_ab,
                fidelity: p.p_aa + 0.5 * p.p_ab,
                numeric_gap: Some((p.p_aa - p_aa).abs().max((p.p_ab - p_ab).abs())),
                error: None,
            })
        }
    }
}

/// Δ/Γ where p_aa = p_ab = 1/2, by bisection on the closed form.
pub fn crossing_delta(template: &PhysicalParams) -> Result<f64> {
    template.validate()?;
    let excess = |ratio: f64| {
        probabilities_closed_form(&template.with_delta(ratio * template.gamma))
            .map(|(p_aa, _)| p_aa - 0.5)
    };
    // p_aa − 1/2 is negative for small Δ and positive up to the maximum at 2Γ.
    let (mut lo, mut hi) = (1e-6, 2.0);
    if excess(lo)? >= 0.0 || excess(hi)? <= 0.0 {
        return Err(invalid("bracket", "p_aa does not cross 1/2 in the bracket"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
