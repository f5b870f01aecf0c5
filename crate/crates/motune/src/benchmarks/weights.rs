use serde::{Deserialize, Serialize};

/// Controller weights derived from the five decision-variable exponents:
/// each weight is `10^theta_i`. The heading weight is fixed since only the
/// relation between weights matters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightMapping {
    /// Position-error weight (x and y share it, terminal equals stage).
    pub w_pos: f64,
    /// Lateral-acceleration weight.
    pub w_alat: f64,
    /// Longitudinal-acceleration input weight.
    pub r_a: f64,
    /// Steering-rate input weight.
    pub r_omega: f64,
    /// Speed-error weight.
    pub r_v: f64,
    /// Fixed heading-error weight.
    pub q_psi: f64,
}

impl WeightMapping {
    pub fn from_theta(theta: &[f64]) -> Self {
        assert_eq!(theta.len(), 5, "weight mapping expects 5 exponents");
        Self {
            w_pos: 10f64.powf(theta[0]),
            w_alat: 10f64.powf(theta[1]),
            r_a: 10f64.powf(theta[2]),
            r_omega: 10f64.powf(theta[3]),
            r_v: 10f64.powf(theta[4]),
            q_psi: 1.0,
        }
    }
}
