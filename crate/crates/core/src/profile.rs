//! Numerical tolerances shared by every method.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Budgets and thresholds for one evaluation run.
///
/// Field names match the CLI flags one-to-one (`--eps-tail`, `--eps-conv`,
/// `--n-max`, `--grid-depth`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Truncation budget for the neglected tail of each Abel mean.
    pub eps_tail: f64,
    /// Stabilization threshold for the last grid means.
    pub eps_conv: f64,
    /// Margin for declaring a limit mismatch in probes.
    pub eps_witness: f64,
    /// Hard cap on evaluated terms.
    pub n_max: u64,
    /// Number of Abel grid points `x_j = 1 - 2^-j`.
    pub grid_depth: u32,
    /// Accept heuristic (uncertified) tails when classifying.
    pub trust_heuristic: bool,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            eps_tail: 1e-8,
            eps_conv: 1e-4,
            eps_witness: 1e-2,
            n_max: 20_000_000,
            grid_depth: 20,
            trust_heuristic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("{field} must be finite and positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("n_max must be at least 1")]
    EmptyBudget,
    #[error("grid_depth must be between 1 and 52, got {0}")]
    GridDepth(u32),
}

impl ToleranceProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        for (field, value) in [
            ("eps_tail", self.eps_tail),
            ("eps_conv", self.eps_conv),
            ("eps_witness", self.eps_witness),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ProfileError::NotPositive { field, value });
            }
        }
        if self.n_max == 0 {
            return Err(ProfileError::EmptyBudget);
        }
        if self.grid_depth == 0 || self.grid_depth > 52 {
            return Err(ProfileError::GridDepth(self.grid_depth));
        }
        Ok(())
    }

    /// Non-fatal configuration warnings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.grid_depth < 63 && self.n_max < (1u64 << self.grid_depth) {
            out.push(format!(
                "n_max = {} is below 2^grid_depth = {}; deep grid points will be capped",
                self.n_max,
                1u64 << self.grid_depth
            ));
        }
        out
    }

    pub fn with_grid_depth(mut self, grid_depth: u32) -> Self {
        self.grid_depth = grid_depth;
        self
    }

    pub fn with_n_max(mut self, n_max: u64) -> Self {
        self.n_max = n_max;
        self
    }
}
