//! Numerical integration: adaptive Gauss–Kronrod for smooth complex
//! integrands and trapezoidal rules on uniform grids.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (non-negative half) and weights; the odd
// entries are the 7-point Gauss abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * w;
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// Integrates `f` over `[a, b]` to the requested relative (or absolute)
/// accuracy by bisecting the panel with the largest error estimate.
pub fn integrate<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<C64> {
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut panels = vec![kronrod(&f, a, b)];
    loop {
        let total: C64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(total);
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                error,
                intervals: panels.len(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel cannot be split further in floating point.
            return Err(Error::Quadrature {
                error,
                intervals: panels.len() + 1,
            });
        }
        panels.push(kronrod(&f, p.a, mid));
        panels.push(kronrod(&f, mid, p.b));
    }
}

/// Like [`integrate`], but splits `[a, b]` at the given interior breakpoints
/// (discontinuities of the integrand) first.
pub fn integrate_with_breaks<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<C64> {
    let mut edges = vec![a];
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    let mut total = C64::new(0.0, 0.0);
    for w in edges.windows(2) {
        total += integrate(&f, w[0], w[1], rel_tol, abs_tol)?;
    }
    Ok(total)
}

/// Trapezoidal integral of uniformly spaced samples.
pub fn trapz(values: &[f64], dx: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, .., last] => dx * (values.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}

/// Trapezoidal integral of uniformly spaced complex samples.
pub fn trapz_complex(values: &[C64], dx: f64) -> C64 {
    match values {
        [] | [_] => C64::new(0.0, 0.0),
        [first, .., last] => (values.iter().sum::<C64>() - (first + last) * 0.5) * dx,
    }
}

/// Running trapezoidal integral `I_n = ∫_0^{x_n} y`, with `I_0 = 0`.
pub fn cumulative_trapz(values: &[C64], dx: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = C64::new(0.0, 0.0);
    if let Some(&first) = values.first() {
        out.push(acc);
        let mut prev = first;
        for &y in &values[1..] {
            acc += (prev + y) * (0.5 * dx);
            out.push(acc);
            prev = y;
        }
    }
    out
}

/// Running trapezoidal integral of real samples.
pub fn cumulative_trapz_real(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    if let Some(&first) = values.first() {
        out.push(acc);
        let mut prev = first;
        for &y in &values[1..] {
            acc += 0.5 * dx * (prev + y);
            out.push(acc);
            prev = y;
        }
    }
    out
}
