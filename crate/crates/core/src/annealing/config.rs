use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings of one dual-annealing run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub initial_temp: f64,
    /// Visiting-distribution parameter `q_v`.
    pub visit: f64,
    /// Acceptance parameter `q_a`.
    pub accept: f64,
    pub maxiter: usize,
    pub maxfun: usize,
    /// Restart when the visiting temperature falls below this fraction of `initial_temp`.
    pub restart_temp_ratio: f64,
    pub local_search: bool,
    pub seed: u64,
    /// Magnitude cap on single visiting displacements.
    pub tail_limit: f64,
}

impl Default for AnnealConfig {
    /// Gate-synthesis settings: `initial_temp = 3·10⁴`, `maxfun = 3·10⁴`, `maxiter = 3·10³`.
    fn default() -> Self {
        Self {
            initial_temp: 3.0e4,
            visit: 2.62,
            accept: -5.0,
            maxiter: 3000,
            maxfun: 30_000,
            restart_temp_ratio: 2.0e-5,
            local_search: true,
            seed: 0,
            tail_limit: 1.0e8,
        }
    }
}

impl AnnealConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial_temp > 0.0) || !self.initial_temp.is_finite() {
            return Err(Error::param("initial_temp", "must be positive and finite"));
        }
        // q_v = 3 makes the visiting width exponent (q_v − 1)/(3 − q_v) diverge.
        if !(self.visit > 1.0 && self.visit < 3.0) {
            return Err(Error::param("visit", "must lie in (1, 3)"));
        }
        if !self.accept.is_finite() {
            return Err(Error::param("accept", "must be finite"));
        }
        if self.maxiter == 0 {
            return Err(Error::param("maxiter", "must be at least 1"));
        }
        if self.maxfun == 0 {
            return Err(Error::param("maxfun", "must be at least 1"));
        }
        if !(self.restart_temp_ratio > 0.0 && self.restart_temp_ratio < 1.0) {
            return Err(Error::param("restart_temp_ratio", "must lie in (0, 1)"));
        }
        if !(self.tail_limit > 0.0) {
            return Err(Error::param("tail_limit", "must be positive"));
        }
        Ok(())
    }
}
