use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A frequency band in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandSpec {
    pub const fn new(low_hz: f64, high_hz: f64) -> Self {
        BandSpec { low_hz, high_hz }
    }

    pub fn width(&self) -> f64 {
        self.high_hz - self.low_hz
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.low_hz && f <= self.high_hz
    }

    /// Checks `0 < low < high < fs/2`.
    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::config(format!("sampling rate {fs} must be positive")));
        }
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz && self.high_hz < fs / 2.0) {
            return Err(Error::config(format!(
                "band {}-{} Hz invalid for fs {fs} Hz (need 0 < low < high < {})",
                self.low_hz,
                self.high_hz,
                fs / 2.0
            )));
        }
        Ok(())
    }
}
