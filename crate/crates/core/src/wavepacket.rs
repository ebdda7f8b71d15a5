//! Single-photon wavepackets on the spatial grid.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::units::{PhysicalParams, SpatialGrid, TAIL_TOLERANCE};

/// Tolerance on the unit norm of a constructed packet.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// A discontinuity on a grid node: the node value is the left limit and
/// `right` the right limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub node: usize,
    pub right: C64,
}

/// A complex amplitude sampled on a grid, without any normalization contract.
///
/// Node values are left limits. Jumps listed in `jumps` carry their right
/// limits, so that quadratures treat each side of a discontinuity with its
/// own one-sided trapezoid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    pub grid: SpatialGrid,
    pub values: Vec<C64>,
    /// Sorted by node.
    pub jumps: Vec<Jump>,
}

impl SampledField {
    pub fn new(grid: SpatialGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self {
            grid,
            values,
            jumps: Vec::new(),
        })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.n_points()],
            jumps: Vec::new(),
        }
    }

    /// Declares a discontinuity at `node` with right limit `right`.
    pub fn with_jump(mut self, node: usize, right: C64) -> Self {
        match self.jumps.binary_search_by_key(&node, |j| j.node) {
            Ok(i) => self.jumps[i].right = right,
            Err(i) => self.jumps.insert(i, Jump { node, right }),
        }
        self
    }

    /// Value just right of node `i`.
    pub fn right_limit(&self, i: usize) -> C64 {
        match self.jumps.binary_search_by_key(&i, |j| j.node) {
            Ok(k) => self.jumps[k].right,
            Err(_) => self.values[i],
        }
    }

    /// Cell-by-cell trapezoidal rule for `∫ f(p(r), q(r)) dr`.
    fn cell_trapz<T>(&self, other: &SampledField, f: impl Fn(C64, C64) -> T) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let cells = (0..self.values.len() - 1).map(|i| {
            f(self.right_limit(i), other.right_limit(i))
                + f(self.values[i + 1], other.values[i + 1])
        });
        cells.sum::<T>() * (0.5 * self.grid.dr())
    }

    /// ∫|f|² dr.
    pub fn norm_sqr(&self) -> f64 {
        self.cell_trapz(self, |p, _| p.norm_sqr())
    }

    /// ∫ conj(self)·other dr.
    pub fn inner(&self, other: &SampledField) -> Result<C64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.cell_trapz(other, |p, q| p.conj() * q))
    }

    /// L² distance ‖self − other‖.
    pub fn distance(&self, other: &SampledField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.cell_trapz(other, |p, q| (p - q).norm_sqr()).sqrt())
    }

    /// Pointwise modulus, as a real-valued field stored in the real part.
    pub fn modulus(&self) -> SampledField {
        let abs = |v: &C64| C64::new(v.norm(), 0.0);
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(abs).collect(),
            jumps: self
                .jumps
                .iter()
                .map(|j| Jump {
                    node: j.node,
                    right: abs(&j.right),
                })
                .collect(),
        }
    }

    /// Linear interpolation between one-sided node values; zero outside the grid.
    pub fn interpolate(&self, r: f64) -> C64 {
        let dr = self.grid.dr();
        let x = (r - self.grid.r_min()) / dr;
        let last = (self.grid.n_points() - 1) as f64;
        if !(0.0..=last).contains(&x) {
            return C64::new(0.0, 0.0);
        }
        let i = x.floor() as usize;
        let w = x - i as f64;
        if i + 1 >= self.values.len() || w == 0.0 {
            return self.values[i];
        }
        self.right_limit(i) * (1.0 - w) + self.values[i + 1] * w
    }

    /// The field scaled by `factor`.
    pub fn scaled(&self, factor: C64) -> SampledField {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            jumps: self
                .jumps
                .iter()
                .map(|j| Jump {
                    node: j.node,
                    right: j.right * factor,
                })
                .collect(),
        }
    }
}

/// Closed-form profile `𝒩 Θ(edge − r) exp[(Δ/2 + iν_L)(r − edge)/c]`.
///
/// At `r = edge` the profile takes its left limit 𝒩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialShape {
    pub norm: f64,
    pub delta: f64,
    pub carrier: f64,
    pub edge: f64,
    pub c: f64,
}

impl ExponentialShape {
    pub fn eval(&self, r: f64) -> C64 {
        if r > self.edge {
            return C64::new(0.0, 0.0);
        }
        let x = (r - self.edge) / self.c;
        C64::new(0.5 * self.delta * x, self.carrier * x).exp() * self.norm
    }
}

/// A normalized single-photon amplitude profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Wavepacket {
    field: SampledField,
    carrier: f64,
    support_end: f64,
    shape: Option<ExponentialShape>,
}

impl Wavepacket {
    /// Wraps raw samples, normalizing them to unit norm.
    ///
    /// The profile is taken to vanish immediately right of its last nonzero
    /// sample, which is the convention of one-sided packets ending at a jump.
    pub fn from_samples(grid: SpatialGrid, amplitude: Vec<C64>, carrier: f64) -> Result<Self> {
        let mut field = SampledField::new(grid, amplitude)?;
        let last = field
            .values
            .iter()
            .rposition(|v| *v != C64::new(0.0, 0.0))
            .unwrap_or(0);
        if last + 1 < grid.n_points() {
            field = field.with_jump(last, C64::new(0.0, 0.0));
        }
        let norm = field.norm_sqr();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid(
                "amplitude",
                "packet must have finite, nonzero norm",
            ));
        }
        Ok(Self {
            field: field.scaled(C64::new(norm.sqrt().recip(), 0.0)),
            carrier,
            support_end: grid.position(last),
            shape: None,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.field.grid
    }

    pub fn amplitude(&self) -> &[C64] {
        &self.field.values
    }

    pub fn field(&self) -> &SampledField {
        &self.field
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    /// Right-most position where the packet may be nonzero.
    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn shape(&self) -> Option<&ExponentialShape> {
        self.shape.as_ref()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.field.norm_sqr()
    }

    /// Amplitude at an arbitrary position: exact for closed-form packets,
    /// linearly interpolated otherwise.
    pub fn eval(&self, r: f64) -> C64 {
        if r > self.support_end {
            return C64::new(0.0, 0.0);
        }
        match &self.shape {
            Some(shape) => shape.eval(r),
            None => self.field.interpolate(r),
        }
    }

    /// Positions where the profile is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Some(shape) => vec![shape.edge],
            None => Vec::new(),
        }
    }

    /// Drops the closed-form description, keeping only the samples.
    pub fn without_shape(mut self) -> Self {
        self.shape = None;
        self
    }

    /// Translates the packet by `cells` grid cells (positive = to the right).
    ///
    /// Fails if more than the tail tolerance of the norm would leave the grid.
    pub fn shifted(&self, cells: isize) -> Result<Self> {
        let n = self.field.values.len() as isize;
        let dr = self.field.grid.dr();
        let mut values = vec![C64::new(0.0, 0.0); n as usize];
        let mut lost = 0.0;
        for (i, v) in self.field.values.iter().enumerate() {
            let j = i as isize + cells;
            if (0..n).contains(&j) {
                values[j as usize] = *v;
            } else {
                lost += v.norm_sqr() * dr;
            }
        }
        if lost > TAIL_TOLERANCE {
            return Err(Error::GridTooShort {
                tail_mass: lost,
                limit: TAIL_TOLERANCE,
            });
        }
        let mut field = SampledField {
            grid: self.field.grid,
            values,
            jumps: Vec::new(),
        };
        for jump in &self.field.jumps {
            let j = jump.node as isize + cells;
            if (0..n - 1).contains(&j) {
                field = field.with_jump(j as usize, jump.right);
            }
        }
        let scale = field.norm_sqr().sqrt().recip();
        let offset = cells as f64 * dr;
        Ok(Self {
            field: field.scaled(C64::new(scale, 0.0)),
            carrier: self.carrier,
            support_end: self.support_end + offset,
            shape: self.shape.map(|s| ExponentialShape {
                norm: s.norm * scale,
                edge: s.edge + offset,
                ..s
            }),
        })
    }
}

/// One-sided exponential packet ending at the atom, as emitted spontaneously
/// by a neighbouring atom of linewidth Δ.
pub fn make_exponential_wavepacket(
    params: &PhysicalParams,
    grid: &SpatialGrid,
) -> Result<Wavepacket> {
    params.validate()?;
    let zero = grid
        .zero_index()
        .ok_or_else(|| invalid("grid", "the atom position r = 0 must be a grid node"))?;
    // Fraction of ∫|ψ|² lying left of r_min for the continuum profile.
    let tail_mass = (params.delta_spec * grid.r_min() / params.c).exp();
    if tail_mass > TAIL_TOLERANCE {
        return Err(Error::GridTooShort {
            tail_mass,
            limit: TAIL_TOLERANCE,
        });
    }
    let shape = ExponentialShape {
        norm: params.packet_norm(),
        delta: params.delta_spec,
        carrier: params.nu_l(),
        edge: 0.0,
        c: params.c,
    };
    let values: Vec<C64> = (0..grid.n_points())
        .map(|i| {
            if i <= zero {
                shape.eval(grid.position(i))
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let field = SampledField::new(*grid, values)?.with_jump(zero, C64::new(0.0, 0.0));
    let scale = field.norm_sqr().sqrt().recip();
    Ok(Wavepacket {
        field: field.scaled(C64::new(scale, 0.0)),
        carrier: params.nu_l(),
        support_end: 0.0,
        shape: Some(ExponentialShape {
            norm: shape.norm * scale,
            ..shape
        }),
    })
}

/// ⟨p|q⟩ = ∫ conj(p) q dr.
pub fn overlap(p: &Wavepacket, q: &Wavepacket) -> Result<C64> {
    p.field.inner(&q.field)
}
