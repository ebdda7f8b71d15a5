//! Two-photon amplitudes after the atom has emitted, and the probabilities
//! of ending with two equally or two differently polarized photons.
//!
//! The amplitudes are retarded copies of the single-excitation field,
//!
//! ```text
//! φ^aa(r₁,r₂,t)  = K [Θ(t − r₂/c)Θ(r₂) ψ^a(r₁ − r₂, t − r₂/c) + (1 ↔ 2)]
//! φ^ab_A(r₁,r₂,t) = K Θ(t − r₁/c)Θ(r₁) ψ^b(r₂ − r₁, t − r₁/c)
//! φ^ab_B(r₁,r₂,t) = K Θ(t − r₂/c)Θ(r₂) ψ^a(r₁ − r₂, t − r₂/c)
//! ```
//!
//! with `K = sqrt(π ρ_1D Γ)/2`, and φ^bb built from ψ^b like φ^aa from ψ^a.
//! The probabilities are `p_aa = 2∬|φ^aa|²`, `p_bb = 2∬|φ^bb|²` and
//! `p_ab = 4∬(|φ^ab_A|² + |φ^ab_B|²)`.
//!
//! Every ψ value on the retarded arguments is a function of the atom-site
//! history alone, so the double integrals factor into running
//! one-dimensional integrals over that history (the compressed
//! representation, linear in the number of time steps). A dense (r₁, r₂)
//! representation is available for small grids as a cross-check.

use num_complex::Complex64 as C64;

use crate::dynamics::{Polarization, SingleExcitationState};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{cumulative_trapz, cumulative_trapz_real};
use crate::units::{PhysicalParams, SpatialGrid, TAIL_LENGTHS};
use crate::wavepacket::{make_exponential_wavepacket, Wavepacket};

/// Evaluation time standing in for t → ∞, in units of 1/Γ.
pub const HORIZON: f64 = 30.0;
/// Window over which the probabilities must have settled, in units of 1/Γ.
pub const CONVERGENCE_WINDOW: f64 = 5.0;
/// Largest probability drift over the convergence window.
pub const DRIFT_TOLERANCE: f64 = 1e-4;
/// Largest number of entries per dense amplitude array.
pub const DENSE_LIMIT: usize = 4_000_000;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Which two-photon amplitude to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Amplitude {
    Aa,
    Bb,
    AbA,
    AbB,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probabilities {
    pub p_aa: f64,
    pub p_ab: f64,
    pub p_bb: f64,
}

impl Probabilities {
    pub fn total(&self) -> f64 {
        self.p_aa + self.p_ab + self.p_bb
    }

    fn max_gap(&self, other: &Probabilities) -> f64 {
        (self.p_aa - other.p_aa)
            .abs()
            .max((self.p_ab - other.p_ab).abs())
            .max((self.p_bb - other.p_bb).abs())
    }
}

/// Populations at one instant: the excited atom and the two-photon sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub rho_ee: f64,
    pub probabilities: Probabilities,
}

/// Running integrals for one polarization channel, indexed by time step.
#[derive(Clone, Debug)]
struct Channel {
    /// Free-frame atom-site samples g(s) = ψ(0⁻,s) e^{κs}, extended past t.
    g: Vec<C64>,
    /// P̃(τ) = ∫_0^τ g(s) e^{κ(s−τ)} ds.
    p: Vec<C64>,
    /// G(s) = g(s) + (Γ/2) P̃(s).
    big_g: Vec<C64>,
    /// ρ^pol(τ), the excited population carried by this channel.
    rho: Vec<f64>,
    /// ∫_0^τ ρ^pol.
    emitted: Vec<f64>,
    /// Interference term of 2∬|φ^{pp}|², as a running integral.
    cross: Vec<f64>,
    active: bool,
}

impl Channel {
    fn build(g: Vec<C64>, steps: usize, params: &PhysicalParams, dt: f64) -> Self {
        let n = steps + 1;
        let active = g.iter().any(|v| *v != ZERO);
        if !active {
            return Self {
                g,
                p: vec![ZERO; n],
                big_g: vec![ZERO; n],
                rho: vec![0.0; n],
                emitted: vec![0.0; n],
                cross: vec![0.0; n],
                active,
            };
        }
        let gamma = params.gamma;
        let c = params.c;
        let kappa = params.decay();
        let step_decay = (-kappa * dt).exp();

        let mut p = Vec::with_capacity(n);
        p.push(ZERO);
        for k in 1..n {
            let next = p[k - 1] * step_decay + (g[k - 1] * step_decay + g[k]) * (0.5 * dt);
            p.push(next);
        }
        let big_g: Vec<C64> = (0..n).map(|k| g[k] + p[k] * (0.5 * gamma)).collect();
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();

        let v1 = cumulative_trapz(
            &times
                .iter()
                .zip(&big_g)
                .map(|(&s, gg)| (-kappa.conj() * s).exp() * gg)
                .collect::<Vec<_>>(),
            dt,
        );
        let v2 = cumulative_trapz_real(
            &times
                .iter()
                .map(|&s| (-gamma * s).exp())
                .collect::<Vec<_>>(),
            dt,
        );
        let a1 = cumulative_trapz_real(&big_g.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>(), dt);

        // ∫_{s_k}^{end} |g|² for the photon still travelling towards the atom.
        let mut tail = vec![0.0; g.len()];
        for k in (0..g.len() - 1).rev() {
            tail[k] = tail[k + 1] + 0.5 * dt * (g[k].norm_sqr() + g[k + 1].norm_sqr());
        }

        let rho: Vec<f64> = (0..n)
            .map(|k| {
                let tau = times[k];
                let free = (-gamma * tau).exp();
                let left = free * tail[k];
                let right = free * a1[k] + 0.25 * gamma * gamma * p[k].norm_sqr() * v2[k]
                    - gamma * ((-kappa.conj() * tau).exp() * p[k] * v1[k].conj()).re;
                c * (left + right)
            })
            .collect();
        let emitted = cumulative_trapz_real(&rho, dt);
        let integrand: Vec<f64> = (0..n)
            .map(|k| {
                let gc = g[k].conj();
                (gc * (-kappa * times[k]).exp() * v1[k] - gc * p[k] * (0.5 * gamma * v2[k])).re
            })
            .collect();
        let cross = cumulative_trapz_real(&integrand, dt)
            .into_iter()
            .map(|v| gamma * c * v)
            .collect();
        Self {
            g,
            p,
            big_g,
            rho,
            emitted,
            cross,
            active,
        }
    }

    /// ψ(m·dr, k·dt) reconstructed from the history.
    fn psi(&self, params: &PhysicalParams, dt: f64, m: isize, k: usize) -> C64 {
        if !self.active {
            return ZERO;
        }
        let kappa = params.decay();
        let tau = k as f64 * dt;
        if m <= 0 {
            // Still travelling towards the atom: free propagation.
            return match self.g.get(k + m.unsigned_abs()) {
                Some(v) => v * (-kappa * tau).exp(),
                None => ZERO,
            };
        }
        let m = m as usize;
        if m > k {
            return ZERO;
        }
        let crossing = k - m;
        self.big_g[crossing] * (-kappa * tau).exp()
            - self.p[k] * (0.5 * params.gamma) * (-kappa * (crossing as f64 * dt)).exp()
    }
}

/// Two-photon amplitudes at time `t` in history-compressed form, optionally
/// accompanied by dense samples on the (r₁, r₂) grid.
#[derive(Clone, Debug)]
pub struct TwoPhotonState {
    params: PhysicalParams,
    dt: f64,
    steps: usize,
    channels: [Channel; 2],
    dense: Option<DenseAmplitudes>,
}

/// Dense samples of the four amplitudes on a square grid.
///
/// The axis lists the nodes `r ≤ 0` followed by the nodes `0 ≤ r ≤ ct`; the
/// atom position appears twice, first as the left limit `0⁻` and then as the
/// right limit `0⁺`, so that the Θ(r) jumps fall on block boundaries.
/// Arrays are row-major, `values[i₁ · len + i₂]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseAmplitudes {
    pub positions: Vec<f64>,
    /// Index of the `0⁺` node: the first node of the right block.
    pub split: usize,
    pub dr: f64,
    pub phi_aa: Vec<C64>,
    pub phi_bb: Vec<C64>,
    pub phi_ab_a: Vec<C64>,
    pub phi_ab_b: Vec<C64>,
}

impl DenseAmplitudes {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn get(&self, which: Amplitude, i1: usize, i2: usize) -> C64 {
        let values = match which {
            Amplitude::Aa => &self.phi_aa,
            Amplitude::Bb => &self.phi_bb,
            Amplitude::AbA => &self.phi_ab_a,
            Amplitude::AbB => &self.phi_ab_b,
        };
        values[i1 * self.len() + i2]
    }

    /// Product trapezoidal rule for ∬|φ|², block by block.
    fn norm_sqr(&self, which: Amplitude) -> f64 {
        let weights = self.weights();
        let n = self.len();
        let mut total = 0.0;
        for i1 in 0..n {
            if weights[i1] == 0.0 {
                continue;
            }
            let row: f64 = (0..n)
                .map(|i2| weights[i2] * self.get(which, i1, i2).norm_sqr())
                .sum();
            total += weights[i1] * row;
        }
        total
    }

    fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.dr; self.len()];
        for (start, end) in [(0, self.split), (self.split, self.len())] {
            if end - start < 2 {
                w[start..end].iter_mut().for_each(|x| *x = 0.0);
            } else {
                w[start] *= 0.5;
                w[end - 1] *= 0.5;
            }
        }
        w
    }

    pub fn probabilities(&self) -> Probabilities {
        Probabilities {
            p_aa: 2.0 * self.norm_sqr(Amplitude::Aa),
            p_bb: 2.0 * self.norm_sqr(Amplitude::Bb),
            p_ab: 4.0 * (self.norm_sqr(Amplitude::AbA) + self.norm_sqr(Amplitude::AbB)),
        }
    }
}

impl TwoPhotonState {
    fn from_histories(
        params: &PhysicalParams,
        dt: f64,
        steps: usize,
        g_a: Vec<C64>,
        g_b: Vec<C64>,
    ) -> Result<Self> {
        Ok(Self {
            params: *params,
            dt,
            steps,
            channels: [
                Channel::build(g_a, steps, params, dt),
                Channel::build(g_b, steps, params, dt),
            ],
            dense: None,
        })
    }

    /// Builds the state directly from an incoming packet `amp_a |a⟩ + amp_b |b⟩`
    /// on an excited atom, without storing the single-excitation field.
    pub fn from_packet(
        params: &PhysicalParams,
        packet: &Wavepacket,
        amp_a: C64,
        amp_b: C64,
        t: f64,
    ) -> Result<Self> {
        params.validate()?;
        if t < 0.0 || !t.is_finite() {
            return Err(Error::NegativeTime(t));
        }
        if packet.support_end() > 1e-12 * packet.grid().dr() {
            return Err(Error::Precondition(
                "incoming packet must vanish right of the atom".into(),
            ));
        }
        let grid = packet.grid();
        let zero = grid
            .zero_index()
            .ok_or_else(|| invalid("grid", "the atom position r = 0 must be a grid node"))?;
        let dt = grid.dr() / params.c;
        let steps = aligned_steps(t, dt)?;
        // g(s_j) = ψ(−c s_j, 0): the packet read backwards from the atom.
        let g: Vec<C64> = (0..=steps + zero)
            .map(|j| {
                if j <= zero {
                    packet.amplitude()[zero - j]
                } else {
                    ZERO
                }
            })
            .collect();
        Self::from_histories(
            params,
            dt,
            steps,
            g.iter().map(|v| v * amp_a).collect(),
            g.iter().map(|v| v * amp_b).collect(),
        )
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn t(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Amplitude prefactor K = sqrt(π ρ_1D Γ)/2.
    pub fn prefactor(&self) -> f64 {
        self.params.two_photon_prefactor()
    }

    pub fn dense(&self) -> Option<&DenseAmplitudes> {
        self.dense.as_ref()
    }

    fn channel(&self, pol: Polarization) -> &Channel {
        match pol {
            Polarization::A => &self.channels[0],
            Polarization::B => &self.channels[1],
        }
    }

    /// Number of grid cells left of the atom covered by the history extension.
    fn left_cells(&self) -> usize {
        self.channels[0].g.len() - 1 - self.steps
    }

    /// `Θ(t − r/c)Θ(r) ψ(r' − r, t − r/c)` for node indices relative to the
    /// atom; `right` selects the right limit at `r = 0`.
    fn emitted(&self, pol: Polarization, r: isize, right: bool, r_other: isize) -> C64 {
        let emitted_at = if right { r >= 0 } else { r > 0 };
        if !emitted_at || r as usize > self.steps || self.steps == 0 {
            return ZERO;
        }
        self.channel(pol)
            .psi(&self.params, self.dt, r_other - r, self.steps - r as usize)
    }

    fn amplitude_at_nodes(
        &self,
        which: Amplitude,
        i1: isize,
        right1: bool,
        i2: isize,
        right2: bool,
    ) -> C64 {
        let k = self.prefactor();
        let value = match which {
            Amplitude::Aa => {
                self.emitted(Polarization::A, i2, right2, i1)
                    + self.emitted(Polarization::A, i1, right1, i2)
            }
            Amplitude::Bb => {
                self.emitted(Polarization::B, i2, right2, i1)
                    + self.emitted(Polarization::B, i1, right1, i2)
            }
            Amplitude::AbA => self.emitted(Polarization::B, i1, right1, i2),
            Amplitude::AbB => self.emitted(Polarization::A, i2, right2, i1),
        };
        value * k
    }

    /// Amplitude at `(r₁, r₂)`, with positions rounded to the nearest grid
    /// node. `r = 0` is taken as the left limit (the photon has not been
    /// emitted yet).
    pub fn amplitude(&self, which: Amplitude, r1: f64, r2: f64) -> C64 {
        let dr = self.dt * self.params.c;
        let i1 = (r1 / dr).round() as isize;
        let i2 = (r2 / dr).round() as isize;
        let reach = self.steps as isize;
        let left = -(self.left_cells() as isize);
        if i1 > reach || i2 > reach || i1 < left || i2 < left {
            return ZERO;
        }
        self.amplitude_at_nodes(which, i1, false, i2, false)
    }

    /// Samples every amplitude on the (r₁, r₂) grid covering the history.
    pub fn with_dense(mut self) -> Result<Self> {
        let left = self.left_cells();
        let len = left + 1 + self.steps + 1;
        if len * len > DENSE_LIMIT {
            return Err(Error::Precondition(format!(
                "dense representation needs {len}² samples (limit {DENSE_LIMIT})"
            )));
        }
        let dr = self.dt * self.params.c;
        let nodes: Vec<(isize, bool)> = (-(left as isize)..=0)
            .map(|i| (i, false))
            .chain((0..=self.steps as isize).map(|i| (i, true)))
            .collect();
        let sample = |which: Amplitude| -> Vec<C64> {
            let mut out = Vec::with_capacity(len * len);
            for &(i1, right1) in &nodes {
                for &(i2, right2) in &nodes {
                    out.push(self.amplitude_at_nodes(which, i1, right1, i2, right2));
                }
            }
            out
        };
        let dense = DenseAmplitudes {
            positions: nodes.iter().map(|&(i, _)| i as f64 * dr).collect(),
            split: left + 1,
            dr,
            phi_aa: sample(Amplitude::Aa),
            phi_bb: sample(Amplitude::Bb),
            phi_ab_a: sample(Amplitude::AbA),
            phi_ab_b: sample(Amplitude::AbB),
        };
        self.dense = Some(dense);
        Ok(self)
    }

    /// Excited population and two-photon probabilities at an earlier time
    /// `tau ≤ t` on the step grid.
    pub fn snapshot(&self, tau: f64) -> Result<Snapshot> {
        let k = aligned_steps(tau, self.dt)?;
        if k > self.steps {
            return Err(Error::InsufficientHistory(format!(
                "requested t = {tau} beyond t = {}",
                self.t()
            )));
        }
        let gamma = self.params.gamma;
        let [a, b] = &self.channels;
        Ok(Snapshot {
            t: k as f64 * self.dt,
            rho_ee: a.rho[k] + b.rho[k],
            probabilities: Probabilities {
                p_aa: 0.5 * gamma * a.emitted[k] + a.cross[k],
                p_bb: 0.5 * gamma * b.emitted[k] + b.cross[k],
                p_ab: 0.5 * gamma * (a.emitted[k] + b.emitted[k]),
            },
        })
    }

    /// Excited population at the evaluation time.
    pub fn excited_population(&self) -> f64 {
        let [a, b] = &self.channels;
        a.rho[self.steps] + b.rho[self.steps]
    }
}

fn aligned_steps(t: f64, dt: f64) -> Result<usize> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let x = t / dt;
    let k = x.round();
    if (x - k).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "t = {t} is not a multiple of dt = {dt}"
        )));
    }
    Ok(k as usize)
}

/// Two-photon amplitudes at time `t` composed from a single-excitation state.
pub fn assemble_two_photon(state: &SingleExcitationState, t: f64) -> Result<TwoPhotonState> {
    let history = state.history();
    if history.start.abs() > 1e-9 * history.dt {
        return Err(Error::InsufficientHistory(format!(
            "history starts at t = {}, not at 0",
            history.start
        )));
    }
    if t > state.t() + 1e-9 * state.dt() {
        return Err(Error::InsufficientHistory(format!(
            "requested t = {t}, history ends at {}",
            state.t()
        )));
    }
    let steps = aligned_steps(t, state.dt())?;
    TwoPhotonState::from_histories(
        state.params(),
        state.dt(),
        steps,
        state.extended_history(Polarization::A),
        state.extended_history(Polarization::B),
    )
}

/// Probabilities from the dense samples when present, otherwise from the
/// compressed representation.
pub fn probabilities_numeric(tp: &TwoPhotonState) -> Probabilities {
    match &tp.dense {
        Some(dense) => dense.probabilities(),
        None => {
            tp.snapshot(tp.t())
                .expect("evaluation time is on the grid")
                .probabilities
        }
    }
}

/// Closed-form long-time probabilities `(p_aa, p_ab)` for the exponential packet.
pub fn probabilities_closed_form(params: &PhysicalParams) -> Result<(f64, f64)> {
    params.validate()?;
    let r = params.delta_spec / params.gamma;
    let s = (1.0 + r) * (1.0 + r);
    Ok((r * (4.0 + r) / (2.0 * s), 0.5 * (1.0 + (1.0 - 2.0 * r) / s)))
}

/// Cloning fidelity `p_aa · 1 + p_ab · 1/2`.
pub fn cloning_fidelity(params: &PhysicalParams) -> Result<f64> {
    let (p_aa, p_ab) = probabilities_closed_form(params)?;
    Ok(p_aa + 0.5 * p_ab)
}

/// Spectral width maximizing `p_aa`, searched over [0.01Γ, 100Γ].
pub fn optimal_delta(template: &PhysicalParams) -> Result<f64> {
    optimal_delta_in(template, 0.01 * template.gamma, 100.0 * template.gamma)
}

/// Golden-section search for the maximum of `p_aa` over `[lo, hi]`, to 1e−6 Γ.
pub fn optimal_delta_in(template: &PhysicalParams, lo: f64, hi: f64) -> Result<f64> {
    template.validate()?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid(
            "bracket",
            format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        ));
    }
    let p_aa = |delta: f64| probabilities_closed_form(&template.with_delta(delta)).map(|(p, _)| p);
    let tol = 1e-6 * template.gamma;
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (p_aa(x1)?, p_aa(x2)?);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = p_aa(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = p_aa(x1)?;
        }
    }
    let interior = 0.5 * (a + b);
    // A monotone p_aa on the bracket puts the maximum on an end point.
    let candidates = [
        (lo, p_aa(lo)?),
        (interior, p_aa(interior)?),
        (hi, p_aa(hi)?),
    ];
    let best = candidates
        .iter()
        .copied()
        .fold(candidates[1], |best, c| if c.1 > best.1 { c } else { best });
    Ok(best.0)
}

/// Long-time probabilities from the numeric route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Converged {
    pub t: f64,
    pub rho_ee: f64,
    pub probabilities: Probabilities,
    /// Largest change of any probability over the last [`CONVERGENCE_WINDOW`].
    pub drift: f64,
}

impl Converged {
    pub fn converged(&self) -> bool {
        self.drift < DRIFT_TOLERANCE
    }
}

/// Evaluation time standing in for t → ∞: 30/Γ, extended for long packets
/// until the incoming tail has passed.
pub fn long_time_horizon(params: &PhysicalParams) -> f64 {
    (HORIZON / params.gamma)
        .max(TAIL_LENGTHS * params.packet_length() / params.c + 10.0 / params.gamma)
}

/// Numeric `p_aa`, `p_ab`, `p_bb` for the exponential packet on an excited
/// atom, evaluated at [`long_time_horizon`] with spacing `dr`.
pub fn converged_probabilities(params: &PhysicalParams, dr: f64) -> Result<Converged> {
    let grid = SpatialGrid::for_packet(params, dr, dr)?;
    let packet = make_exponential_wavepacket(params, &grid)?;
    let dt = grid.dr() / params.c;
    let t = (long_time_horizon(params) / dt).ceil() * dt;
    let tp = TwoPhotonState::from_packet(params, &packet, C64::new(1.0, 0.0), ZERO, t)?;
    let end = tp.snapshot(tp.t())?;
    let earlier = tp.snapshot(((t - CONVERGENCE_WINDOW / params.gamma) / dt).round() * dt)?;
    let drift = end.probabilities.max_gap(&earlier.probabilities);
    let result = Converged {
        t: end.t,
        rho_ee: end.rho_ee,
        probabilities: end.probabilities,
        drift,
    };
    if !result.converged() {
        log::warn!(
            "probabilities drift by {drift:.3e} over the last {CONVERGENCE_WINDOW}/Γ at Δ = {}",
            params.delta_spec
        );
    }
    Ok(result)
}
