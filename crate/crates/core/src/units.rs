//! Physical parameters and the spatial discretization shared by every solver.
//!
//! Everything is expressed in natural units: the atomic decay rate `gamma`
//! sets the time scale, `c = 1` by default, and the one-dimensional mode
//! density obeys `2π ρ_1D c = 1`, so that the spatial norm `∫|ψ(r)|² dr`
//! coincides with the mode-space norm `Σ_ν |ψ_ν|²`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// Left extent of an auto-sized grid, in units of the packet length `c/Δ`.
/// The truncated tail then carries `e^{-25}` of the norm.
pub const TAIL_LENGTHS: f64 = 25.0;

/// Largest norm fraction a packet may lose to grid truncation.
pub const TAIL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Decay rate Γ of the excited state into the guided continuum.
    pub gamma: f64,
    /// Spectral width Δ of the incoming exponential packet.
    pub delta_spec: f64,
    /// Detuning δ = ν_L − ν_A of the packet carrier.
    pub detuning: f64,
    /// Atomic frequency ν_A; zero in the rotating frame.
    pub nu_a: f64,
    /// Propagation speed.
    pub c: f64,
    /// 1D mode density; tied to `c` by `2π ρ_1D c = 1`.
    pub rho_1d: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            delta_spec: 1.0,
            detuning: 0.0,
            nu_a: 0.0,
            c: 1.0,
            rho_1d: 1.0 / (2.0 * PI),
        }
    }
}

impl PhysicalParams {
    /// Natural units (Γ = c = 1, rotating frame, resonant) with spectral width `delta_spec`.
    pub fn new(delta_spec: f64) -> Result<Self> {
        let params = Self {
            delta_spec,
            ..Self::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_delta(mut self, delta_spec: f64) -> Self {
        self.delta_spec = delta_spec;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_nu_a(mut self, nu_a: f64) -> Self {
        self.nu_a = nu_a;
        self
    }

    /// Changes the propagation speed and re-imposes `2π ρ_1D c = 1`.
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self.rho_1d = 1.0 / (2.0 * PI * c);
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("gamma", self.gamma)?;
        positive("delta_spec", self.delta_spec)?;
        positive("c", self.c)?;
        positive("rho_1d", self.rho_1d)?;
        finite("detuning", self.detuning)?;
        finite("nu_a", self.nu_a)?;
        let convention = 2.0 * PI * self.rho_1d * self.c;
        if (convention - 1.0).abs() > 1e-12 {
            return Err(invalid(
                "rho_1d",
                format!("2π ρ_1D c = {convention}, expected 1"),
            ));
        }
        Ok(())
    }

    /// Carrier frequency ν_L = ν_A + δ.
    pub fn nu_l(&self) -> f64 {
        self.nu_a + self.detuning
    }

    /// Complex amplitude decay constant Γ/2 + iν_A.
    pub fn decay(&self) -> C64 {
        C64::new(0.5 * self.gamma, self.nu_a)
    }

    /// Normalization 𝒩 = sqrt(2π ρ_1D Δ) of the exponential packet.
    pub fn packet_norm(&self) -> f64 {
        (2.0 * PI * self.rho_1d * self.delta_spec).sqrt()
    }

    /// Prefactor sqrt(π ρ_1D Γ)/2 of the two-photon amplitudes.
    pub fn two_photon_prefactor(&self) -> f64 {
        0.5 * (PI * self.rho_1d * self.gamma).sqrt()
    }

    /// Emission amplitude sqrt(Γ π ρ_1D) radiated into the guide per unit excited amplitude.
    pub fn emission_coupling(&self) -> f64 {
        (self.gamma * PI * self.rho_1d).sqrt()
    }

    /// Absorption strength sqrt(Γ/(π ρ_1D)) driving the excited amplitude.
    pub fn absorption_coupling(&self) -> f64 {
        (self.gamma / (PI * self.rho_1d)).sqrt()
    }

    /// Length c/Δ of the packet's exponential envelope (in intensity).
    pub fn packet_length(&self) -> f64 {
        self.c / self.delta_spec
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}

/// Uniform grid over the waveguide coordinate. The atom sits at `r = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid {
    r_min: f64,
    r_max: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) {
            return Err(invalid("grid", "bounds must be finite"));
        }
        if !(r_min < 0.0 && 0.0 < r_max) {
            return Err(invalid(
                "grid",
                format!("need r_min < 0 < r_max, got [{r_min}, {r_max}]"),
            ));
        }
        if n_points < 2 {
            return Err(invalid("grid", "need at least two points"));
        }
        Ok(Self {
            r_min,
            r_max,
            n_points,
        })
    }

    /// Grid with spacing `dr`, `n_left` cells left of the atom and `n_right`
    /// cells right of it; `r = 0` is the node with index `n_left`.
    pub fn from_cells(dr: f64, n_left: usize, n_right: usize) -> Result<Self> {
        if !(dr.is_finite() && dr > 0.0) {
            return Err(invalid("dr", format!("must be positive, got {dr}")));
        }
        if n_left == 0 || n_right == 0 {
            return Err(invalid(
                "grid",
                "need at least one cell on each side of the atom",
            ));
        }
        Self::new(
            -(n_left as f64) * dr,
            n_right as f64 * dr,
            n_left + n_right + 1,
        )
    }

    /// Grid whose left extent holds 25 packet lengths and whose right extent
    /// holds at least `r_right`.
    pub fn for_packet(params: &PhysicalParams, dr: f64, r_right: f64) -> Result<Self> {
        params.validate()?;
        let n_left = cells(TAIL_LENGTHS * params.packet_length(), dr);
        let n_right = cells(r_right, dr).max(1);
        Self::from_cells(dr, n_left, n_right)
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_points - 1) as f64
    }

    pub fn position(&self, index: usize) -> f64 {
        self.r_min + index as f64 * self.dr()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.position(i))
    }

    /// Index of the node at `r`, if `r` lies on a node.
    pub fn index_of(&self, r: f64) -> Option<usize> {
        let x = (r - self.r_min) / self.dr();
        let i = x.round();
        if (x - i).abs() < 1e-6 && i >= 0.0 && (i as usize) < self.n_points {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Index of the node at the atom position, if the grid has one there.
    pub fn zero_index(&self) -> Option<usize> {
        self.index_of(0.0)
    }

    /// Number of cells right of the atom (requires a node at zero).
    pub fn right_cells(&self) -> Option<usize> {
        self.zero_index().map(|z| self.n_points - 1 - z)
    }

    pub fn ensure_same(&self, other: &SpatialGrid) -> Result<()> {
        let tol = 1e-9 * self.dr();
        if self.n_points == other.n_points
            && (self.r_min - other.r_min).abs() <= tol
            && (self.r_max - other.r_max).abs() <= tol
        {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "[{}, {}]/{} vs [{}, {}]/{}",
                self.r_min, self.r_max, self.n_points, other.r_min, other.r_max, other.n_points
            )))
        }
    }
}

/// Number of whole cells of width `dr` needed to cover `length`.
pub(crate) fn cells(length: f64, dr: f64) -> usize {
    let n = length / dr;
    // Tolerate representation error so that e.g. 6.0 / 0.001 is 6000 cells.
    let rounded = n.round();
    if (n - rounded).abs() < 1e-9 * n.max(1.0) {
        rounded as usize
    } else {
        n.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_units_satisfy_convention() {
        let p = PhysicalParams::new(2.0).unwrap();
        assert_eq!(p.gamma, 1.0);
        assert!((2.0 * PI * p.rho_1d * p.c - 1.0).abs() < 1e-15);
        let q = p.with_c(3.0);
        q.validate().unwrap();
        assert!((2.0 * PI * q.rho_1d * q.c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(PhysicalParams::new(0.0).is_err());
        assert!(PhysicalParams::new(-1.0).is_err());
        assert!(PhysicalParams::new(1.0)
            .unwrap()
            .with_gamma(0.0)
            .validate()
            .is_err());
        let p = PhysicalParams {
            rho_1d: 1.0,
            ..PhysicalParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn grid_invariants() {
        assert!(SpatialGrid::new(0.0, 1.0, 10).is_err());
        assert!(SpatialGrid::new(-1.0, 1.0, 1).is_err());
        let g = SpatialGrid::from_cells(0.01, 300, 200).unwrap();
        assert_eq!(g.n_points(), 501);
        assert_eq!(g.zero_index(), Some(300));
        assert_eq!(g.right_cells(), Some(200));
        assert!((g.dr() - 0.01).abs() < 1e-15);
        assert_eq!(g.index_of(0.005), None);
    }

    #[test]
    fn auto_grid_holds_twenty_five_lengths() {
        let p = PhysicalParams::new(2.0).unwrap();
        let g = SpatialGrid::for_packet(&p, 1e-3, 6.0).unwrap();
        assert!(g.r_min() <= -12.5 + 1e-9);
        assert_eq!(g.right_cells(), Some(6000));
    }
}
