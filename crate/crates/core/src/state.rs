use crate::error::{Error, Result};

/// A point (ρ, m) of state space; w = m/ρ is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub rho: f64,
    pub m: f64,
}

impl State {
    pub fn new(rho: f64, m: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidState(format!("rho must be positive and finite, got {rho}")));
        }
        if !m.is_finite() {
            return Err(Error::InvalidState(format!("m must be finite, got {m}")));
        }
        Ok(Self { rho, m })
    }

    /// State with m = ρ·w.
    pub fn from_rho_w(rho: f64, w: f64) -> Result<Self> {
        Self::new(rho, rho * w)
    }

    #[inline]
    pub fn w(&self) -> f64 {
        self.m / self.rho
    }
}
