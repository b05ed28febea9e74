use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How a raw metric value is mapped onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum NormalizeMethod {
    /// Linear map of `[min, max]` onto `[0, 1]`.
    Fixed { min: f64, max: f64 },
    /// Linear map of the range seen over the trailing `window_s` seconds,
    /// inset by `margin` of the spread on both sides so values near the
    /// extremes saturate.
    RollingMinmax {
        window_s: f64,
        #[serde(default = "default_margin")]
        margin: f64,
    },
    /// `1 / (1 + exp(-slope * (raw - center)))`.
    Logistic { center: f64, slope: f64 },
}

fn default_margin() -> f64 {
    0.05
}

impl Default for NormalizeMethod {
    fn default() -> Self {
        NormalizeMethod::RollingMinmax {
            window_s: 60.0,
            margin: default_margin(),
        }
    }
}

impl NormalizeMethod {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NormalizeMethod::Fixed { min, max } if !(min < max) => Err(Error::config(format!(
                "fixed normalizer needs min < max, got {min} and {max}"
            ))),
            NormalizeMethod::RollingMinmax { window_s, margin }
                if !(window_s > 0.0) || !(0.0..0.5).contains(&margin) =>
            {
                Err(Error::config(format!(
                    "rolling normalizer needs window_s > 0 and margin in [0, 0.5), got {window_s} and {margin}"
                )))
            }
            NormalizeMethod::Logistic { slope, .. } if !slope.is_finite() || slope == 0.0 => {
                Err(Error::config("logistic normalizer needs a finite non-zero slope"))
            }
            _ => Ok(()),
        }
    }
}

/// Stateful normalizer; rolling mode keeps its own history.
#[derive(Debug, Clone)]
pub struct Normalizer {
    method: NormalizeMethod,
    // monotonic deques of (t, value) for running min and max
    mins: VecDeque<(f64, f64)>,
    maxs: VecDeque<(f64, f64)>,
}

impl Normalizer {
    pub fn new(method: NormalizeMethod) -> Result<Self> {
        method.validate()?;
        Ok(Normalizer {
            method,
            mins: VecDeque::new(),
            maxs: VecDeque::new(),
        })
    }

    pub fn fixed(min: f64, max: f64) -> Result<Self> {
        Normalizer::new(NormalizeMethod::Fixed { min, max })
    }

    pub fn rolling(window_s: f64) -> Result<Self> {
        Normalizer::new(NormalizeMethod::RollingMinmax {
            window_s,
            margin: default_margin(),
        })
    }

    pub fn logistic(center: f64, slope: f64) -> Result<Self> {
        Normalizer::new(NormalizeMethod::Logistic { center, slope })
    }

    /// Passes raw values through unchanged apart from clamping.
    pub fn identity() -> Self {
        Normalizer::fixed(0.0, 1.0).expect("valid range")
    }

    pub fn method(&self) -> &NormalizeMethod {
        &self.method
    }

    /// Maps `raw` observed at `t` onto `[0, 1]`.
    pub fn normalize(&mut self, raw: f64, t: f64) -> f64 {
        if !raw.is_finite() {
            return 0.5;
        }
        let v = match self.method {
            NormalizeMethod::Fixed { min, max } => (raw - min) / (max - min),
            NormalizeMethod::Logistic { center, slope } => {
                1.0 / (1.0 + (-slope * (raw - center)).exp())
            }
            NormalizeMethod::RollingMinmax { window_s, margin } => {
                self.observe(raw, t, window_s);
                let lo = self.mins.front().map_or(raw, |m| m.1);
                let hi = self.maxs.front().map_or(raw, |m| m.1);
                let spread = hi - lo;
                let scale = 1.0f64.max(lo.abs()).max(hi.abs());
                if spread <= 1e-12 * scale {
                    0.5
                } else {
                    let lo = lo + margin * spread;
                    let hi = hi - margin * spread;
                    (raw - lo) / (hi - lo)
                }
            }
        };
        v.clamp(0.0, 1.0)
    }

    fn observe(&mut self, raw: f64, t: f64, window_s: f64) {
        while self.mins.back().is_some_and(|m| m.1 >= raw) {
            self.mins.pop_back();
        }
        self.mins.push_back((t, raw));
        while self.maxs.back().is_some_and(|m| m.1 <= raw) {
            self.maxs.pop_back();
        }
        self.maxs.push_back((t, raw));
        let horizon = t - window_s;
        while self.mins.front().is_some_and(|m| m.0 < horizon) {
            self.mins.pop_front();
        }
        while self.maxs.front().is_some_and(|m| m.0 < horizon) {
            self.maxs.pop_front();
        }
    }

    pub fn reset(&mut self) {
        self.mins.clear();
        self.maxs.clear();
    }
}
