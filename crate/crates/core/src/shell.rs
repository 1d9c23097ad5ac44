//! Initial conditions on a fixed-energy shell, parameterized by the invariant `I`.
//!
//! At `A = a0` the quantum oscillator receives `E_q = f·E` with `⟨L⟩ = 0`, and
//! the remaining energy goes into `P_A > 0`. Solving
//! `⟨p̂²⟩/2m_q + m_qω²⟨x̂²⟩/2 = E_q` together with `⟨x̂²⟩⟨p̂²⟩ = I` on the
//! branch with the larger `⟨x̂²⟩` gives a family that tends to a classical
//! oscillator at its turning point as `I → 0`.

use crate::algebra::{ExpectationState, ModelParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyShell {
    pub energy: f64,
    /// Fraction of the energy held by the quantum oscillator at `t = 0`.
    pub quantum_fraction: f64,
    pub a0: f64,
}

impl Default for EnergyShell {
    fn default() -> Self {
        Self {
            energy: 1.0,
            quantum_fraction: 0.8,
            a0: 0.0,
        }
    }
}

impl EnergyShell {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy > 0.0 && self.energy.is_finite()) {
            return Err(Error::Validation(format!("shell.energy must be positive (got {})", self.energy)));
        }
        if !(self.quantum_fraction > 0.0 && self.quantum_fraction <= 1.0) {
            return Err(Error::Validation(format!(
                "shell.quantum_fraction must lie in (0, 1] (got {})",
                self.quantum_fraction
            )));
        }
        if !self.a0.is_finite() {
            return Err(Error::Validation("shell.a0 must be finite".into()));
        }
        Ok(())
    }

    /// Largest `I` the shell can carry: `(f·E/ω(a0))²`.
    pub fn i_max(&self, p: &ModelParams) -> f64 {
        let eq = self.quantum_fraction * self.energy;
        eq * eq / p.omega_sq(self.a0)
    }

    /// Initial moments with invariant `i ≥ 0` on this shell.
    pub fn state_for_i(&self, i: f64, p: &ModelParams) -> Result<ExpectationState> {
        self.validate()?;
        if !(i >= 0.0) {
            return Err(Error::Domain(format!("I must be non-negative (got {i})")));
        }
        let w2 = p.omega_sq(self.a0);
        let eq = self.quantum_fraction * self.energy;
        let disc = eq * eq - w2 * i;
        if disc < 0.0 {
            return Err(Error::Unreachable(format!(
                "I = {i:e} exceeds the shell maximum {:e} (E_r too small)",
                self.i_max(p)
            )));
        }
        let x2 = (eq + disc.sqrt()) / (p.m_q * w2);
        let p2 = if i == 0.0 { 0.0 } else { i / x2 };
        let p_a = (2.0 * p.m_cl * (self.energy - eq)).max(0.0).sqrt();
        Ok(ExpectationState::new(x2, p2, 0.0, self.a0, p_a))
    }

    /// `I = (E/(E_r·ω_q))²`, the invariant realizing relative energy `e_r` on this shell.
    pub fn i_for_relative_energy(&self, e_r: f64, p: &ModelParams) -> Result<f64> {
        if !(e_r > 0.0) {
            return Err(Error::Domain(format!("E_r must be positive (got {e_r})")));
        }
        let s = self.energy / (e_r * p.omega_q);
        Ok(s * s)
    }
}
