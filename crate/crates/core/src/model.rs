//! Per-step model inputs shared by the engine, the oracle and scenario files.

use serde::{Deserialize, Serialize};

use crate::covariance::Covariance;
use crate::linalg::Matrix;

/// Evolution equation `H uᵢ = F uᵢ₋₁ + c + ε`, `cov(ε) = K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evolution {
    /// Dimension of the new state.
    #[serde(rename = "n")]
    pub dim: usize,
    /// `ℓ x n`; when absent the engine uses `[I_ℓ | 0]`.
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Matrix>,
    /// `ℓ x n_prev`.
    #[serde(rename = "F")]
    pub f: Matrix,
    pub c: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Covariance,
}

impl Evolution {
    pub fn new(dim: usize, h: Option<Matrix>, f: Matrix, c: Vec<f64>, k: Covariance) -> Self {
        Self { dim, h, f, c, k }
    }

    /// Number of evolution equations, `ℓ`.
    pub fn equations(&self) -> usize {
        self.f.rows()
    }
}

/// Observation equation `o = G u + δ`, `cov(δ) = C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    #[serde(rename = "G")]
    pub g: Matrix,
    pub o: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Covariance,
}

impl Observation {
    pub fn new(g: Matrix, o: Vec<f64>, c: Covariance) -> Self {
        Self { g, o, c }
    }
}

/// Inputs of one step: an evolution (absent for step 0) and an optional
/// observation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepInput {
    /// State dimension of step 0 when it has no observation.
    #[serde(rename = "n", default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(rename = "evolve", default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<Evolution>,
    #[serde(rename = "observe", default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<Observation>,
}

impl StepInput {
    pub fn first(observation: Observation) -> Self {
        Self {
            dim: None,
            evolution: None,
            observation: Some(observation),
        }
    }

    pub fn first_unobserved(dim: usize) -> Self {
        Self {
            dim: Some(dim),
            evolution: None,
            observation: None,
        }
    }

    pub fn next(evolution: Evolution, observation: Option<Observation>) -> Self {
        Self {
            dim: None,
            evolution: Some(evolution),
            observation,
        }
    }

    /// State dimension of this step, when it can be read off the inputs.
    pub fn state_dim(&self) -> Option<usize> {
        self.evolution
            .as_ref()
            .map(|e| e.dim)
            .or(self.dim)
            .or_else(|| self.observation.as_ref().map(|o| o.g.cols()))
    }
}
