//! Two-photon polarization states and the Wootters concurrence.
//!
//! Basis order is |a a⟩, |a b⟩, |b a⟩, |b b⟩, with the first label the
//! polarization of the photon in the short time bin S and the second that of
//! the photon in the long bin L.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// Tolerance on trace, Hermiticity and negative eigenvalues.
pub const PHYSICAL_TOLERANCE: f64 = 1e-9;

/// Label recorded on states built from nonorthogonal time-bin modes.
pub const OVERLAP_MODEL: &str = "gram-schmidt; doubly occupied S bin mixed over labels";

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Basis index of a polarization pair.
pub fn index(first_b: bool, second_b: bool) -> usize {
    2 * usize::from(first_b) + usize::from(second_b)
}

/// How a state built by [`build_epr_state`] came about.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeMetadata {
    pub transfer_phase: C64,
    /// ⟨a_S|a_L⟩ = ⟨b_S|b_L⟩.
    pub mode_overlap: C64,
    /// Norm of the Gram–Schmidt expansion before renormalization.
    pub raw_norm: f64,
    /// Weight of the component with both photons in the S bin.
    pub double_occupancy: f64,
    pub model: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhotonPolarizationState {
    rho: Matrix4<C64>,
    amplitudes: Option<[C64; 4]>,
    metadata: Option<ModeMetadata>,
}

impl TwoPhotonPolarizationState {
    pub fn from_density_matrix(rho: Matrix4<C64>) -> Result<Self> {
        validate(&rho)?;
        Ok(Self {
            rho,
            amplitudes: None,
            metadata: None,
        })
    }

    /// Pure state from amplitudes in basis order; normalized on the way in.
    pub fn from_pure(amplitudes: [C64; 4]) -> Result<Self> {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid(
                "amplitudes",
                format!("norm {norm} cannot be normalized"),
            ));
        }
        let amplitudes = amplitudes.map(|c| c / norm);
        let rho = Matrix4::from_fn(|i, j| amplitudes[i] * amplitudes[j].conj());
        let mut state = Self::from_density_matrix(rho)?;
        state.amplitudes = Some(amplitudes);
        Ok(state)
    }

    /// Singlet (|ab⟩ − |ba⟩)/√2.
    pub fn singlet() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_pure([ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO])
            .expect("singlet is normalized")
    }

    /// `p·|Ψ⁻⟩⟨Ψ⁻| + (1 − p)·I/4` for `p` in [−1/3, 1].
    pub fn werner(p: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=1.0).contains(&p) {
            return Err(invalid("p", format!("Werner weight {p} outside [-1/3, 1]")));
        }
        let rho = Self::singlet().rho * C64::new(p, 0.0)
            + Matrix4::identity() * C64::new(0.25 * (1.0 - p), 0.0);
        Self::from_density_matrix(rho)
    }

    pub fn maximally_mixed() -> Self {
        Self::from_density_matrix(Matrix4::identity() * C64::new(0.25, 0.0))
            .expect("I/4 is physical")
    }

    pub fn density_matrix(&self) -> &Matrix4<C64> {
        &self.rho
    }

    /// Amplitudes in basis order when the state is pure by construction.
    pub fn amplitudes(&self) -> Option<&[C64; 4]> {
        self.amplitudes.as_ref()
    }

    /// Amplitude of |x_S, y_L⟩, where `true` stands for polarization b.
    pub fn amplitude(&self, s_b: bool, l_b: bool) -> Option<C64> {
        self.amplitudes.map(|a| a[index(s_b, l_b)])
    }

    pub fn metadata(&self) -> Option<&ModeMetadata> {
        self.metadata.as_ref()
    }

    /// Applies the local unitary `u_s ⊗ u_l`.
    pub fn rotate_locally(&self, u_s: &Matrix2<C64>, u_l: &Matrix2<C64>) -> Result<Self> {
        for u in [u_s, u_l] {
            if (u * u.adjoint() - Matrix2::identity()).camax() > 1e-9 {
                return Err(invalid("rotation", "matrix is not unitary"));
            }
        }
        let u = u_s.kronecker(u_l);
        let rho = u * self.rho * u.adjoint();
        let amplitudes = self.amplitudes.map(|a| {
            let v = u * nalgebra::Vector4::from(a);
            [v[0], v[1], v[2], v[3]]
        });
        Ok(Self {
            rho,
            amplitudes,
            metadata: self.metadata.clone(),
        })
    }

    /// Reduced polarization state of the S photon.
    pub fn reduced_s(&self) -> Matrix2<C64> {
        Matrix2::from_fn(|i, j| self.rho[(2 * i, 2 * j)] + self.rho[(2 * i + 1, 2 * j + 1)])
    }

    /// Von Neumann entropy of the reduced S-photon state, in bits.
    pub fn reduced_entropy(&self) -> f64 {
        SymmetricEigen::new(self.reduced_s())
            .eigenvalues
            .iter()
            .filter(|&&p| p > 1e-15)
            .map(|&p| -p * p.log2())
            .sum()
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }
}

fn validate(rho: &Matrix4<C64>) -> Result<()> {
    if rho.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonPhysical("non-finite entries".into()));
    }
    let trace = rho.trace();
    if (trace - ONE).norm() > PHYSICAL_TOLERANCE {
        return Err(Error::NonPhysical(format!("trace {trace} differs from 1")));
    }
    let skew = (rho - rho.adjoint()).camax();
    if skew > PHYSICAL_TOLERANCE {
        return Err(Error::NonPhysical(format!(
            "not Hermitian (max |ρ − ρ†| = {skew:.3e})"
        )));
    }
    let lowest = SymmetricEigen::new(hermitian_part(rho)).eigenvalues.min();
    if lowest < -PHYSICAL_TOLERANCE {
        return Err(Error::NonPhysical(format!(
            "negative eigenvalue {lowest:.3e}"
        )));
    }
    Ok(())
}

fn hermitian_part(m: &Matrix4<C64>) -> Matrix4<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Final two-photon state (|b_S,a_L⟩ − φ|a_S,b_L⟩)/√2 for transfer phase φ
/// and time-bin overlap s = ⟨x_S|x_L⟩.
///
/// The L modes are orthogonalized against S, x_L = s·x_S + r·x_L⊥ with
/// r = sqrt(1 − |s|²). The part with both photons in S, s(1 − φ)|a_S b_S⟩,
/// carries no bin label; it is mixed equally into |a b⟩ and |b a⟩.
pub fn build_epr_state(
    transfer_phase: C64,
    mode_overlap: C64,
) -> Result<TwoPhotonPolarizationState> {
    if !transfer_phase.is_finite() || (transfer_phase.norm() - 1.0).abs() > 1e-6 {
        return Err(invalid(
            "transfer_phase",
            format!("|{transfer_phase}| is not 1"),
        ));
    }
    if !mode_overlap.is_finite() || mode_overlap.norm() > 1.0 {
        return Err(invalid(
            "mode_overlap",
            format!("|{mode_overlap}| exceeds 1"),
        ));
    }
    let phase = transfer_phase / transfer_phase.norm();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s2 = mode_overlap.norm_sqr();
    let r = (1.0 - s2).sqrt();

    let coherent = [ZERO, -phase * r * h, C64::new(r * h, 0.0), ZERO];
    let double = 0.5 * s2 * (ONE - phase).norm_sqr();
    let raw_norm = coherent.iter().map(|c| c.norm_sqr()).sum::<f64>() + double;
    if raw_norm <= 0.0 {
        return Err(Error::NonPhysical(
            "both photons end in the same mode".into(),
        ));
    }

    let mut rho = Matrix4::from_fn(|i, j| coherent[i] * coherent[j].conj());
    let (ab, ba) = (index(false, true), index(true, false));
    rho[(ab, ab)] += C64::new(0.5 * double, 0.0);
    rho[(ba, ba)] += C64::new(0.5 * double, 0.0);
    rho /= C64::new(raw_norm, 0.0);

    let mut state = TwoPhotonPolarizationState::from_density_matrix(rho)?;
    if double == 0.0 {
        state.amplitudes = Some(coherent.map(|c| c / raw_norm.sqrt()));
    }
    state.metadata = Some(ModeMetadata {
        transfer_phase: phase,
        mode_overlap,
        raw_norm,
        double_occupancy: double / raw_norm,
        model: OVERLAP_MODEL,
    });
    Ok(state)
}

/// Eigenvalues of ρ below this are rounding noise; their square roots would
/// otherwise enter the concurrence at the 1e−8 level.
const RANK_CUTOFF: f64 = 1e-13;

/// Wootters concurrence, max(0, λ₁ − λ₂ − λ₃ − λ₄). With ρ = W W†, the λᵢ are
/// the singular values of Wᵀ (σ_y⊗σ_y) W, i.e. the square roots of the
/// eigenvalues of ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y).
pub fn concurrence(state: &TwoPhotonPolarizationState) -> Result<f64> {
    let rho = state.density_matrix();
    validate(rho)?;
    let eig = SymmetricEigen::new(hermitian_part(rho));
    let weights = eig
        .eigenvalues
        .map(|p| C64::new(if p > RANK_CUTOFF { p.sqrt() } else { 0.0 }, 0.0));
    let w = eig.eigenvectors * Matrix4::from_diagonal(&weights);

    let sigma_y = Matrix2::new(ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO);
    let flip = sigma_y.kronecker(&sigma_y);
    let tau = w.transpose() * flip * w;

    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}
