use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use tobe_transport::Modality;

use super::{gaussian, meta, rng, sample_count, Generated, Signal};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RespSpec {
    pub fs: f64,
    pub period_s: f64,
    pub amplitude: f64,
    /// Belt reading at full exhale.
    #[serde(default)]
    pub baseline: f64,
    /// Relative standard deviation of each cycle's period.
    #[serde(default)]
    pub jitter: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RespTruth {
    /// Breathing phase per sample, 0 at inhale onset.
    pub phase: Vec<f64>,
    /// Inhale onset times.
    pub cycle_starts: Vec<f64>,
}

impl RespSpec {
    pub fn new(fs: f64, period_s: f64, amplitude: f64) -> Self {
        RespSpec {
            fs,
            period_s,
            amplitude,
            baseline: 0.0,
            jitter: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period_s > 0.0 && self.period_s.is_finite()) {
            return Err(Error::config(format!("period_s must be positive, got {}", self.period_s)));
        }
        if !(self.fs > 0.0) {
            return Err(Error::config(format!("respiration fs must be positive, got {}", self.fs)));
        }
        if !(self.amplitude >= 0.0) || !(0.0..0.5).contains(&self.jitter) {
            return Err(Error::config("amplitude must be >= 0 and jitter in [0, 0.5)"));
        }
        Ok(())
    }
}

/// Inflation `0.5 - 0.5 cos(2 pi phase)`: empty lungs at phase 0, full at 0.5.
pub fn gen_respiration(spec: &RespSpec, duration_s: f64) -> Result<Generated<RespTruth>> {
    spec.validate()?;
    let n = sample_count(spec.fs, duration_s)?;
    let mut rng = rng(spec.seed);
    let mut starts = vec![0.0];
    while *starts.last().unwrap() < duration_s {
        let k = if spec.jitter > 0.0 {
            (1.0 + spec.jitter * gaussian(&mut rng)).max(0.3)
        } else {
            1.0
        };
        starts.push(starts.last().unwrap() + spec.period_s * k);
    }
    let mut phase = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut c = 0;
    for i in 0..n {
        let t = i as f64 / spec.fs;
        while starts[c + 1] <= t {
            c += 1;
        }
        let ph = (t - starts[c]) / (starts[c + 1] - starts[c]);
        phase.push(ph);
        x.push(spec.baseline + spec.amplitude * (0.5 - 0.5 * (2.0 * PI * ph).cos()));
    }
    starts.pop();
    Ok(Generated {
        meta: meta("synth-resp", Modality::Resp, vec!["BELT".into()], spec.fs, "a.u.", spec.seed),
        signal: Signal {
            fs: spec.fs,
            t0: 0.0,
            channels: vec![x],
        },
        truth: RespTruth {
            phase,
            cycle_starts: starts,
        },
    })
}
