//! Multiplicative estimate of losses into non-guided modes and pure dephasing.

use crate::error::{invalid, Result};

/// Dephasing above this fraction of Γ is outside the estimate's validity.
pub const DEPHASING_WARN: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    /// β = Γ/(Γ + γ), with γ the decay rate into non-guided modes.
    pub beta: f64,
    /// Pure dephasing rate γ* in units of Γ.
    pub gamma_star: f64,
}

impl NoiseParams {
    pub fn new(beta: f64, gamma_star: f64) -> Result<Self> {
        let noise = Self { beta, gamma_star };
        noise.validate()?;
        Ok(noise)
    }

    /// β from the two decay rates.
    pub fn from_rates(gamma: f64, gamma_loss: f64, gamma_star: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma_loss >= 0.0 && gamma.is_finite() && gamma_loss.is_finite()) {
            return Err(invalid(
                "rates",
                format!("need Γ > 0 and γ ≥ 0, got Γ = {gamma}, γ = {gamma_loss}"),
            ));
        }
        Self::new(gamma / (gamma + gamma_loss), gamma_star)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(invalid("beta", format!("{} is outside (0, 1]", self.beta)));
        }
        if !(self.gamma_star >= 0.0 && self.gamma_star.is_finite()) {
            return Err(invalid(
                "gamma_star",
                format!("{} must be finite and non-negative", self.gamma_star),
            ));
        }
        if self.gamma_star > 1.0 {
            return Err(invalid(
                "gamma_star",
                format!("{}Γ makes the factor negative", self.gamma_star),
            ));
        }
        Ok(())
    }
}

/// Degradation factor β(1 − γ*/Γ) applied to fidelities and entanglement.
pub fn noise_degradation(noise: &NoiseParams) -> Result<f64> {
    noise.validate()?;
    if noise.gamma_star > DEPHASING_WARN {
        log::warn!(
            "γ* = {}Γ is not small against Γ; the estimate is unreliable",
            noise.gamma_star
        );
    }
    Ok(noise.beta * (1.0 - noise.gamma_star))
}
