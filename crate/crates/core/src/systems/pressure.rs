use super::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Barotropic pressure law `p(rho) = kappa * rho^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    pub kappa: f64,
    pub gamma: f64,
}

impl Default for PressureLaw {
    /// `p(rho) = rho^2`.
    fn default() -> Self {
        Self {
            kappa: 1.0,
            gamma: 2.0,
        }
    }
}

impl PressureLaw {
    pub fn pressure<S: Scalar>(&self, rho: S) -> S {
        rho.powf(self.gamma).scale(self.kappa)
    }

    /// Pressure potential `P(rho) = rho * int_1^rho p(z) / z^2 dz`.
    pub fn potential<S: Scalar>(&self, rho: S) -> S {
        if (self.gamma - 1.0).abs() < 1e-12 {
            (rho * rho.ln()).scale(self.kappa)
        } else {
            let g1 = self.gamma - 1.0;
            (rho * (rho.powf(g1) - S::cst(1.0))).scale(self.kappa / g1)
        }
    }

    /// `P'(rho) = (P(rho) + p(rho)) / rho`.
    pub fn potential_derivative<S: Scalar>(&self, rho: S) -> S {
        (self.potential(rho) + self.pressure(rho)) / rho
    }
}
