//! Simulation of a Λ-type three-level atom in a semi-infinite one-dimensional
//! waveguide, driven by a single-photon pulse.
//!
//! Depending on the spectral width of the incoming photon the atom acts as a
//! universal optimal cloner of the photon polarization (width ≈ 2Γ) or as a
//! deterministic source of polarization-entangled photon pairs (width ≪ Γ).
//!
//! Units: Γ = c = 1 and `2π ρ_1D c = 1` unless set otherwise in
//! [`PhysicalParams`].

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod quadrature;
pub mod scattering;
pub mod twophoton;
pub mod units;
pub mod wavepacket;

pub use analysis::{
    build_epr_state, concurrence, noise_degradation, sweep_delta, NoiseParams,
    TwoPhotonPolarizationState,
};
pub use dynamics::{
    excited_population, solve_analytic, solve_analytic_polarized, step_delay_pde, AtomSiteHistory,
    Polarization, SingleExcitationState,
};
pub use error::{Error, Result};
pub use scattering::{
    monochromatic_transfer_check, scatter_at, scatter_single_photon, GroundState, ScatteringResult,
    TransferReport,
};
pub use twophoton::{
    assemble_two_photon, cloning_fidelity, converged_probabilities, optimal_delta,
    probabilities_closed_form, probabilities_numeric, Probabilities, TwoPhotonState,
};
pub use units::{PhysicalParams, SpatialGrid};
pub use wavepacket::{make_exponential_wavepacket, overlap, SampledField, Wavepacket};
