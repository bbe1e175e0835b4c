//! Cosine curriculum schedules.
//!
//! With `t = (l / L) · π/2`:
//!
//! * sampling probability `δ(l) = μ (1 − cos t)` ramps from 0 up to `μ`;
//! * positive/anchor threshold `α₊(l) = 1 − β₊ cos t` tightens from `1 − β₊` to 1;
//! * negative threshold `α₋(l) = β₋ cos t` tightens from `β₋` to 0.
//!
//! ```
//! use gnncl::curriculum::CurriculumSchedule;
//!
//! let s = CurriculumSchedule::new(1.0, 0.6, 0.1, 2000).unwrap();
//! assert_eq!(s.delta(0).unwrap(), 0.0);
//! assert!((s.alpha_plus(0).unwrap() - 0.4).abs() < 1e-12);
//! assert!((s.delta(1000).unwrap() - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12);
//! ```

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurriculumSchedule {
    pub mu: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub total_epochs: usize,
}

impl Default for CurriculumSchedule {
    fn default() -> Self {
        Self {
            mu: 1.0,
            beta_plus: 0.6,
            beta_minus: 0.1,
            total_epochs: 2000,
        }
    }
}

impl CurriculumSchedule {
    pub fn new(mu: f64, beta_plus: f64, beta_minus: f64, total_epochs: usize) -> Result<Self> {
        let s = Self {
            mu,
            beta_plus,
            beta_minus,
            total_epochs,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("mu", self.mu),
            ("beta_plus", self.beta_plus),
            ("beta_minus", self.beta_minus),
        ] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {x} outside [0, 1]"
                )));
            }
        }
        if self.total_epochs == 0 {
            return Err(Error::InvalidArgument("total_epochs must be >= 1".into()));
        }
        Ok(())
    }

    fn cos_phase(&self, epoch: usize) -> Result<f64> {
        if epoch > self.total_epochs {
            return Err(Error::EpochOutOfRange {
                epoch,
                total: self.total_epochs,
            });
        }
        if epoch == self.total_epochs {
            // cos(π/2) is 6e-17 in floating point; pin the endpoint.
            return Ok(0.0);
        }
        Ok((epoch as f64 / self.total_epochs as f64 * FRAC_PI_2).cos())
    }

    /// Oversampling probability at `epoch`.
    pub fn delta(&self, epoch: usize) -> Result<f64> {
        Ok(self.mu * (1.0 - self.cos_phase(epoch)?))
    }

    /// Anchor / positive threshold at `epoch`.
    pub fn alpha_plus(&self, epoch: usize) -> Result<f64> {
        Ok(1.0 - self.beta_plus * self.cos_phase(epoch)?)
    }

    /// Negative threshold at `epoch`.
    pub fn alpha_minus(&self, epoch: usize) -> Result<f64> {
        Ok(self.beta_minus * self.cos_phase(epoch)?)
    }
}
