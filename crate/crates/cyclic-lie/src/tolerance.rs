//! Numerical tolerances used by every approximate comparison in the crate.
//!
//! All thresholds are combined with a problem-size scale factor at the point
//! of use (typically `max(1, structure constants, gram entries)`), so the
//! values below are relative magnitudes, not absolute ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Threshold for rank decisions (singular values, null spaces, pivoting).
    pub eps_rank: f64,
    /// Threshold for equality of computed quantities.
    pub eps_eq: f64,
    /// Threshold for clustering eigenvalues when grouping invariant subspaces.
    pub eps_cluster: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eps_rank: 1e-9,
            eps_eq: 1e-9,
            eps_cluster: 1e-7,
        }
    }
}

impl ToleranceConfig {
    /// Default tolerances with `eps_eq` replaced (the `--tol` CLI override).
    pub fn with_eps_eq(eps_eq: f64) -> Self {
        ToleranceConfig {
            eps_eq,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_rank", self.eps_rank),
            ("eps_eq", self.eps_eq),
            ("eps_cluster", self.eps_cluster),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a positive finite number, got {v}"
                )));
            }
        }
        Ok(())
    }
}
