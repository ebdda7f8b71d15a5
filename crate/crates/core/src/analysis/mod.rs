//! Entanglement of the emitted pairs, noise estimates and parameter sweeps.

pub mod epr;
pub mod noise;
pub mod sweep;

pub use epr::{build_epr_state, concurrence, ModeMetadata, TwoPhotonPolarizationState};
pub use noise::{noise_degradation, NoiseParams};
pub use sweep::{
    crossing_delta, numeric_spacing, sweep_delta, sweep_points, Spacing, SweepMode, SweepRow,
};

/// How a scalar output was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    ClosedForm,
    Numeric,
    /// A modelling choice beyond the closed forms, named by its label.
    Model(&'static str),
}

/// A labeled scalar output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigureOfMerit {
    pub key: &'static str,
    pub value: f64,
    pub source: Source,
}

impl FigureOfMerit {
    pub fn new(key: &'static str, value: f64, source: Source) -> Self {
        Self { key, value, source }
    }
}
