use serde::{Deserialize, Serialize};

use crate::geometry::unit_ball_volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RadiusMode {
    /// `ceil(4 (mu / zeta)^(1/dim))`, exponent `1/dim`.
    #[default]
    Practical,
    /// Lower bound that guarantees asymptotic optimality, exponent `1/(dim+1)`.
    Optimal,
    /// Connect only to the nearest (or closest) node.
    Zero,
}

/// Shrinking connection radius `min(gamma (ln k / k)^e, eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSchedule {
    pub mode: RadiusMode,
    pub eta: f64,
    pub gamma: f64,
    pub dim: usize,
}

/// `gamma` for [`RadiusMode::Practical`].
pub fn practical_gamma(free_measure: f64, dim: usize) -> f64 {
    (4.0 * (free_measure / unit_ball_volume(dim)).powf(1.0 / dim as f64)).ceil()
}

/// Smallest `gamma` for [`RadiusMode::Optimal`] given an estimate of the optimal cost.
pub fn optimal_gamma(free_measure: f64, dim: usize, cost_estimate: f64, theta: f64, epsilon: f64, kappa: f64) -> f64 {
    let d = dim as f64;
    let inner = (1.0 + epsilon / 4.0) * cost_estimate / ((d + 1.0) * theta * (1.0 - kappa)) * free_measure / unit_ball_volume(dim);
    (2.0 + theta) * inner.powf(1.0 / (d + 1.0))
}

impl RadiusSchedule {
    pub fn practical(eta: f64, dim: usize, free_measure: f64) -> Self {
        RadiusSchedule {
            mode: RadiusMode::Practical,
            eta,
            gamma: practical_gamma(free_measure, dim),
            dim,
        }
    }

    pub fn optimal(eta: f64, dim: usize, free_measure: f64, cost_estimate: f64, theta: f64, epsilon: f64, kappa: f64) -> Self {
        RadiusSchedule {
            mode: RadiusMode::Optimal,
            eta,
            gamma: optimal_gamma(free_measure, dim, cost_estimate, theta, epsilon, kappa),
            dim,
        }
    }

    pub fn zero(eta: f64, dim: usize) -> Self {
        RadiusSchedule {
            mode: RadiusMode::Zero,
            eta,
            gamma: 0.0,
            dim,
        }
    }

    /// Radius for a tree with `k` distinct positions. `k <= 1` gives `eta`.
    pub fn radius(&self, k: usize) -> f64 {
        let exponent = match self.mode {
            RadiusMode::Zero => return 0.0,
            RadiusMode::Practical => 1.0 / self.dim as f64,
            RadiusMode::Optimal => 1.0 / (self.dim as f64 + 1.0),
        };
        if k <= 1 {
            return self.eta;
        }
        let k = k as f64;
        (self.gamma * (k.ln() / k).powf(exponent)).min(self.eta)
    }
}
