//! Single-excitation dynamics: atom excited plus one photon in the guide.
//!
//! Both joint amplitudes ψ^a(r,t) and ψ^b(r,t) obey the transport equation
//!
//! ```text
//! (∂_t + c ∂_r) ψ(r,t) = −(Γ/2 + iν_A) ψ(r,t) − (Γ/2) Θ(r) Θ(t − r/c) ψ(−r, t − r/c)
//! ```
//!
//! The delay term describes reabsorption of the incoming photon after the
//! atom has emitted its own photon at time `t − r/c`. Two independent
//! solvers are provided: a characteristic time stepper that only ever looks
//! at stored atom-site values, and a quadrature of the closed-form solution
//!
//! ```text
//! ψ(r,t) = ψ(r − ct, 0) e^{−κt}
//!          − (Γ/2) Θ(r) Θ(t − r/c) e^{−κt} e^{−κ(t − r/c)} ∫_{t−r/c}^{t} e^{κt'} ψ(−ct', 0) dt'
//! ```
//!
//! with κ = Γ/2 + iν_A.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::quadrature::integrate_with_breaks;
use crate::units::{PhysicalParams, SpatialGrid};
use crate::wavepacket::Wavepacket;

/// Relative accuracy of the feedback integral in [`solve_analytic`].
pub const ANALYTIC_REL_TOL: f64 = 1e-8;

/// Largest Γ(t − t₀) the stepper accepts; |u|² grows like e^{Γ(t − t₀)}.
pub const MAX_DECAY_EXPONENT: f64 = 600.0;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Photon polarization channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    A,
    B,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::A, Polarization::B];

    fn index(self) -> usize {
        match self {
            Polarization::A => 0,
            Polarization::B => 1,
        }
    }
}

/// Time series of the atom-site amplitude on a uniform time grid.
///
/// Samples are stored with the free decay removed, `g(s) = ψ(0⁻, s) e^{κs}`,
/// so that long runs do not underflow. For the standard initial condition
/// `g(s)` is the incoming profile `ψ(−cs, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomSiteHistory {
    /// Time of the first sample.
    pub start: f64,
    pub dt: f64,
    /// κ = Γ/2 + iν_A.
    pub decay: C64,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl AtomSiteHistory {
    pub fn samples(&self, pol: Polarization) -> &[C64] {
        match pol {
            Polarization::A => &self.a,
            Polarization::B => &self.b,
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Physical amplitude ψ(0⁻, s_j).
    pub fn value(&self, pol: Polarization, j: usize) -> C64 {
        let s = self.start + j as f64 * self.dt;
        self.samples(pol)[j] * (-self.decay * s).exp()
    }

    /// Time of the last stored sample.
    pub fn end(&self) -> f64 {
        self.start + (self.len().saturating_sub(1)) as f64 * self.dt
    }
}

/// Amplitudes of one polarization in the interaction picture, indexed by
/// characteristic.
///
/// Characteristic `ℓ` sits on node `ℓ + k` after `k` steps; its physical
/// amplitude is `u[ℓ] · e^{−κ(t − t_origin)}`. Left of the atom the
/// characteristics are never touched, so the decay is carried entirely by
/// the common factor.
#[derive(Clone, Debug)]
struct Channel {
    u: Vec<C64>,
    /// `prefix[i] = Σ_{m<i} |u[m]|²`, valid for characteristics that have
    /// not reached the atom yet.
    prefix: Vec<f64>,
    active: bool,
}

impl Channel {
    fn new(values: &[C64], capacity: usize) -> Self {
        let mut u = vec![ZERO; capacity];
        u.extend_from_slice(values);
        let mut prefix = Vec::with_capacity(u.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for v in &u {
            acc += v.norm_sqr();
            prefix.push(acc);
        }
        let active = values.iter().any(|v| *v != ZERO);
        Self { u, prefix, active }
    }
}

/// Joint amplitudes ψ^a(r,t), ψ^b(r,t) of the one-photon, excited-atom sector.
#[derive(Clone, Debug)]
pub struct SingleExcitationState {
    params: PhysicalParams,
    grid: SpatialGrid,
    zero: usize,
    origin: f64,
    steps: usize,
    channels: [Channel; 2],
    /// e^{κ j dt} for j = 0..=right cells + 1.
    growth: Vec<C64>,
    history: AtomSiteHistory,
}

impl SingleExcitationState {
    /// Atom excited, incoming photon in polarization `a` with profile `packet`.
    pub fn new(params: &PhysicalParams, packet: &Wavepacket) -> Result<Self> {
        Self::polarized(params, packet, C64::new(1.0, 0.0), ZERO)
    }

    /// Atom excited, incoming photon `amp_a |a⟩ + amp_b |b⟩` with profile `packet`.
    ///
    /// The amplitudes are not renormalized, which keeps the map linear.
    pub fn polarized(
        params: &PhysicalParams,
        packet: &Wavepacket,
        amp_a: C64,
        amp_b: C64,
    ) -> Result<Self> {
        if packet.support_end() > 1e-12 * packet.grid().dr() {
            return Err(Error::Precondition(format!(
                "incoming packet must vanish right of the atom, support ends at {}",
                packet.support_end()
            )));
        }
        let a: Vec<C64> = packet.amplitude().iter().map(|v| v * amp_a).collect();
        let b: Vec<C64> = packet.amplitude().iter().map(|v| v * amp_b).collect();
        Self::from_fields(params, packet.grid(), &a, &b)
    }

    /// Initial state (t = 0) from raw samples; both fields must vanish for r > 0.
    pub fn from_fields(
        params: &PhysicalParams,
        grid: &SpatialGrid,
        psi_a: &[C64],
        psi_b: &[C64],
    ) -> Result<Self> {
        let zero = grid
            .zero_index()
            .ok_or_else(|| invalid("grid", "the atom position r = 0 must be a grid node"))?;
        for field in [psi_a, psi_b] {
            if field.len() != grid.n_points() {
                return Err(Error::GridMismatch(format!(
                    "{} samples for a grid of {} points",
                    field.len(),
                    grid.n_points()
                )));
            }
            if field[zero + 1..].iter().any(|v| *v != ZERO) {
                return Err(Error::Precondition(
                    "initial amplitudes must vanish for r > 0".into(),
                ));
            }
        }
        let history = AtomSiteHistory {
            start: 0.0,
            dt: grid.dr() / params.c,
            decay: params.decay(),
            a: vec![psi_a[zero]],
            b: vec![psi_b[zero]],
        };
        Self::assemble(params, grid, 0.0, [psi_a, psi_b], history)
    }

    fn assemble(
        params: &PhysicalParams,
        grid: &SpatialGrid,
        origin: f64,
        fields: [&[C64]; 2],
        history: AtomSiteHistory,
    ) -> Result<Self> {
        params.validate()?;
        let zero = grid
            .zero_index()
            .ok_or_else(|| invalid("grid", "the atom position r = 0 must be a grid node"))?;
        let capacity = grid.n_points();
        let dt = grid.dr() / params.c;
        let right = grid.n_points() - zero;
        let growth = (0..=right + 1)
            .map(|j| (params.decay() * (j as f64 * dt)).exp())
            .collect();
        Ok(Self {
            params: *params,
            grid: *grid,
            zero,
            origin,
            steps: 0,
            channels: [
                Channel::new(fields[0], capacity),
                Channel::new(fields[1], capacity),
            ],
            growth,
            history,
        })
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Current time.
    pub fn t(&self) -> f64 {
        self.origin + self.steps as f64 * self.dt()
    }

    /// Time step locked to the grid, dt = dr/c.
    pub fn dt(&self) -> f64 {
        self.grid.dr() / self.params.c
    }

    pub fn history(&self) -> &AtomSiteHistory {
        &self.history
    }

    fn frame_factor(&self) -> C64 {
        (-self.params.decay() * (self.t() - self.origin)).exp()
    }

    fn slot(&self, node: usize) -> usize {
        node + self.channels[0].u.len() - self.grid.n_points() - self.steps
    }

    /// Farthest right cell index (relative to the atom) inside the light cone.
    fn light_cone_cells(&self) -> usize {
        (self.t() / self.dt() + 1e-9).floor() as usize
    }

    /// Amplitude on grid node `node`.
    pub fn psi_at_node(&self, pol: Polarization, node: usize) -> C64 {
        self.channels[pol.index()].u[self.slot(node)] * self.frame_factor()
    }

    /// Field of one polarization on every grid node.
    pub fn field(&self, pol: Polarization) -> Vec<C64> {
        let scale = self.frame_factor();
        let ch = &self.channels[pol.index()];
        (0..self.grid.n_points())
            .map(|p| ch.u[self.slot(p)] * scale)
            .collect()
    }

    /// ψ(0⁻, t), the amplitude of a photon currently at the atom.
    pub fn atom_site(&self, pol: Polarization) -> C64 {
        self.psi_at_node(pol, self.zero)
    }

    /// Free-frame atom-site samples `ψ(0⁻, s) e^{κs}` (see [`AtomSiteHistory`])
    /// for every s on the history grid, continued beyond the current time by
    /// free propagation of the field still left of the atom.
    pub fn extended_history(&self, pol: Polarization) -> Vec<C64> {
        let mut out = self.history.samples(pol).to_vec();
        let to_free = self.to_free_frame();
        let ch = &self.channels[pol.index()];
        // Node zero − j reaches the atom after j further steps, untouched.
        out.extend((1..=self.zero).map(|j| ch.u[self.slot(self.zero - j)] * to_free));
        out
    }

    fn to_free_frame(&self) -> C64 {
        (self.params.decay() * self.origin).exp()
    }

    /// Advances by one step dt = dr/c.
    ///
    /// Along each characteristic the transport term is an exact one-cell
    /// shift and the local decay an exact integrating factor; only the
    /// feedback source needs quadrature. For a cell `j` cells right of the
    /// atom the delayed amplitude ψ(−x, t − x/c) is the atom-site value
    /// ψ(0⁻, t) propagated back by x/c, i.e. `ψ(0⁻,t) e^{κx/c}`, and the
    /// source is integrated over the step by the trapezoidal rule.
    pub fn step(&mut self) -> Result<()> {
        let reach = self.light_cone_cells();
        if self.params.gamma * (self.t() - self.origin) > MAX_DECAY_EXPONENT {
            return Err(Error::Precondition(format!(
                "stepping beyond Γ(t − t₀) = {MAX_DECAY_EXPONENT} overflows the interaction picture"
            )));
        }
        if self.zero + reach + 1 >= self.grid.n_points() {
            return Err(Error::HistoryUnderflow(format!(
                "grid right extent {} exhausted at t = {}",
                self.grid.r_max(),
                self.t()
            )));
        }
        let dt = self.dt();
        let gain = -0.25 * self.params.gamma * dt;
        let at_atom = self.slot(self.zero);
        let next = at_atom - 1;
        let step_growth = self.growth[1];
        for ch in self.channels.iter_mut().filter(|ch| ch.active) {
            let source = (ch.u[at_atom] + ch.u[next] * step_growth) * gain;
            for (u, g) in ch.u[at_atom..=at_atom + reach].iter_mut().zip(&self.growth) {
                *u += source * g;
            }
        }
        self.steps += 1;
        let to_free = self.to_free_frame();
        let at_atom = self.slot(self.zero);
        self.history.a.push(self.channels[0].u[at_atom] * to_free);
        self.history.b.push(self.channels[1].u[at_atom] * to_free);
        Ok(())
    }

    /// Steps forward until `t` (which must lie on the step grid).
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let remaining = (t - self.t()) / self.dt();
        let n = remaining.round();
        if remaining < -1e-9 || (remaining - n).abs() > 1e-6 {
            return Err(Error::Precondition(format!(
                "cannot step from t = {} to t = {t} with dt = {}",
                self.t(),
                self.dt()
            )));
        }
        for _ in 0..n as usize {
            self.step()?;
        }
        Ok(())
    }
}

/// One step of the delay PDE; `dt` must equal dr/c.
pub fn step_delay_pde(mut state: SingleExcitationState, dt: f64) -> Result<SingleExcitationState> {
    let expected = state.dt();
    if (dt - expected).abs() > 1e-12 * expected {
        return Err(Error::CflViolation { dt, expected });
    }
    state.step()?;
    Ok(state)
}

/// ρ_ee(t) = ∫ (|ψ^a|² + |ψ^b|²) dr.
pub fn excited_population(state: &SingleExcitationState) -> f64 {
    let dr = state.grid.dr();
    let reach = state
        .light_cone_cells()
        .min(state.grid.n_points() - 1 - state.zero);
    let scale = (-state.params.gamma * (state.t() - state.origin)).exp();
    let mut total = 0.0;
    for ch in state.channels.iter().filter(|ch| ch.active) {
        // Left of the atom, characteristics are untouched: use prefix sums.
        let first = state.slot(0);
        let atom = state.slot(state.zero);
        let left = ch.prefix[atom + 1]
            - ch.prefix[first]
            - 0.5 * (ch.u[first].norm_sqr() + ch.u[atom].norm_sqr());
        // Inside the light cone the field carries feedback; sum explicitly.
        let cone = &ch.u[atom..=atom + reach];
        let mut right: f64 = cone.iter().map(|v| v.norm_sqr()).sum();
        right -= 0.5 * (cone[0].norm_sqr() + cone[cone.len() - 1].norm_sqr());
        // Beyond the light cone lies the initial data right of the atom,
        // separated from the cone by a jump.
        let beyond_start = atom + reach + 1;
        let beyond_end = state.slot(state.grid.n_points() - 1);
        let mut beyond = 0.0;
        if beyond_start < beyond_end {
            beyond = ch.prefix[beyond_end + 1]
                - ch.prefix[beyond_start]
                - 0.5 * (ch.u[beyond_start].norm_sqr() + ch.u[beyond_end].norm_sqr());
        }
        total += left + right + beyond;
    }
    total * dr * scale
}

/// Evaluates the closed-form solution at time `t` on the packet's grid.
pub fn solve_analytic(
    params: &PhysicalParams,
    packet: &Wavepacket,
    t: f64,
) -> Result<SingleExcitationState> {
    solve_analytic_polarized(params, packet, C64::new(1.0, 0.0), ZERO, t)
}

/// Closed-form solution for the incoming photon `amp_a |a⟩ + amp_b |b⟩`.
pub fn solve_analytic_polarized(
    params: &PhysicalParams,
    packet: &Wavepacket,
    amp_a: C64,
    amp_b: C64,
    t: f64,
) -> Result<SingleExcitationState> {
    params.validate()?;
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    if packet.support_end() > 1e-12 * packet.grid().dr() {
        return Err(Error::Precondition(
            "incoming packet must vanish right of the atom".into(),
        ));
    }
    let grid = *packet.grid();
    let c = params.c;
    let kappa = params.decay();
    let half_gamma = 0.5 * params.gamma;
    let dt = grid.dr() / c;
    let free = (-kappa * t).exp();
    // Break the feedback integral where the packet profile jumps.
    let breaks: Vec<f64> = if packet.shape().is_some() {
        packet.breakpoints().iter().map(|r| -r / c).collect()
    } else {
        // Piecewise-linear samples: integrate cell by cell.
        (0..grid.n_points())
            .map(|i| -grid.position(i) / c)
            .filter(|s| *s > 0.0)
            .collect()
    };

    let zero = grid
        .zero_index()
        .expect("checked by the packet constructor");
    let dr = grid.dr();
    // Snap onto node multiples so that jumps sitting on nodes take their left limit.
    let snap = |x: f64| {
        let k = (x / dr).round();
        if (x / dr - k).abs() < 1e-9 {
            k * dr
        } else {
            x
        }
    };
    let mut base = Vec::with_capacity(grid.n_points());
    for i in 0..grid.n_points() {
        let r = (i as f64 - zero as f64) * dr;
        let mut psi = packet.eval(snap(r - c * t)) * free;
        if r > 0.0 && snap(r - c * t) <= 0.0 {
            let crossing = (t - r / c).max(0.0);
            let integrand = |s: f64| (kappa * s).exp() * packet.eval(snap(-c * s));
            let integral =
                integrate_with_breaks(integrand, crossing, t, &breaks, ANALYTIC_REL_TOL, 1e-15)?;
            psi -= integral * half_gamma * free * (-kappa * crossing).exp();
        }
        base.push(psi);
    }

    // Atom-site history on the grid s = t − j dt ≥ 0.
    let back = (t / dt + 1e-9).floor() as usize;
    let start = t - back as f64 * dt;
    let atom_site: Vec<C64> = (0..=back)
        .map(|j| {
            let s = start + j as f64 * dt;
            packet.eval(snap(-c * s))
        })
        .collect();
    let history = AtomSiteHistory {
        start: if start.abs() < 1e-9 * dt { 0.0 } else { start },
        dt,
        decay: kappa,
        a: atom_site.iter().map(|v| v * amp_a).collect(),
        b: atom_site.iter().map(|v| v * amp_b).collect(),
    };
    let a: Vec<C64> = base.iter().map(|v| v * amp_a).collect();
    let b: Vec<C64> = base.iter().map(|v| v * amp_b).collect();
    SingleExcitationState::assemble(params, &grid, t, [&a, &b], history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::make_exponential_wavepacket;

    fn setup(delta: f64, dr: f64, t_max: f64) -> (PhysicalParams, Wavepacket) {
        let params = PhysicalParams::new(delta).unwrap();
        let grid = SpatialGrid::for_packet(&params, dr, t_max).unwrap();
        let packet = make_exponential_wavepacket(&params, &grid).unwrap();
        (params, packet)
    }

    #[test]
    fn initial_population_is_one() {
        let (params, packet) = setup(2.0, 1e-3, 1.0);
        let state = SingleExcitationState::new(&params, &packet).unwrap();
        assert!((excited_population(&state) - 1.0).abs() < 1e-9);
        let analytic = solve_analytic(&params, &packet, 0.0).unwrap();
        assert!((excited_population(&analytic) - 1.0).abs() < 1e-9);
        let field = analytic.field(Polarization::A);
        let worst = field
            .iter()
            .zip(packet.amplitude())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "max deviation {worst}");
    }

    #[test]
    fn rejects_wrong_time_step() {
        let (params, packet) = setup(2.0, 1e-2, 1.0);
        let state = SingleExcitationState::new(&params, &packet).unwrap();
        assert!(matches!(
            step_delay_pde(state.clone(), 0.02),
            Err(Error::CflViolation { .. })
        ));
        let stepped = step_delay_pde(state, 0.01).unwrap();
        assert!((stepped.t() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_time() {
        let (params, packet) = setup(2.0, 1e-2, 1.0);
        assert!(matches!(
            solve_analytic(&params, &packet, -1.0),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn exhausting_the_grid_is_an_error() {
        let (params, packet) = setup(2.0, 0.1, 0.5);
        let mut state = SingleExcitationState::new(&params, &packet).unwrap();
        assert!(state.advance_to(0.4).is_ok());
        assert!(matches!(
            state.advance_to(5.0),
            Err(Error::HistoryUnderflow(_))
        ));
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let (params, packet) = setup(2.0, 1e-2, 3.0);
        let zeros = vec![ZERO; packet.grid().n_points()];
        let mut state =
            SingleExcitationState::from_fields(&params, packet.grid(), &zeros, &zeros).unwrap();
        state.advance_to(3.0).unwrap();
        assert!(state.field(Polarization::A).iter().all(|v| *v == ZERO));
        assert_eq!(excited_population(&state), 0.0);
    }

    #[test]
    fn b_channel_untouched_by_a_photon() {
        let (params, packet) = setup(1.0, 1e-2, 5.0);
        let mut state = SingleExcitationState::new(&params, &packet).unwrap();
        state.advance_to(5.0).unwrap();
        assert!(state.field(Polarization::B).iter().all(|v| *v == ZERO));
        assert!(state.history().b.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn stepper_resumes_from_analytic_state() {
        let (params, packet) = setup(2.0, 1e-2, 4.0);
        let mut from_analytic = solve_analytic(&params, &packet, 1.0).unwrap();
        from_analytic.advance_to(3.0).unwrap();
        let direct = solve_analytic(&params, &packet, 3.0).unwrap();
        let gap = (excited_population(&from_analytic) - excited_population(&direct)).abs();
        assert!(gap < 1e-4, "gap {gap}");
    }

    #[test]
    fn extended_history_continues_with_incoming_packet() {
        let (params, packet) = setup(2.0, 1e-2, 2.0);
        let mut state = SingleExcitationState::new(&params, &packet).unwrap();
        state.advance_to(1.0).unwrap();
        let h = state.extended_history(Polarization::A);
        let dt = state.dt();
        for j in [0usize, 50, 100, 150, 400] {
            let s = j as f64 * dt;
            let expected = packet.eval(-s);
            assert!((h[j] - expected).norm() < 1e-12, "j = {j}");
            if j <= 100 {
                let physical = state.history().value(Polarization::A, j);
                assert!((physical - expected * (-params.decay() * s).exp()).norm() < 1e-12);
            }
        }
    }
}
