use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use tobe_transport::Modality;

use super::{gaussian, meta, rng, sample_count, Generated, Signal};
use crate::{Error, Result};

pub const MIN_BPM: f64 = 30.0;
pub const MAX_BPM: f64 = 220.0;

/// One vertex of a piecewise-linear heart-rate profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpmPoint {
    pub t: f64,
    pub bpm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EcgSpec {
    pub fs: f64,
    /// Held constant before the first and after the last point.
    pub bpm_profile: Vec<BpmPoint>,
    #[serde(default)]
    pub rsa_depth: f64,
    #[serde(default = "default_rsa_period")]
    pub rsa_period_s: f64,
    #[serde(default, rename = "noise_uV")]
    pub noise_uv: f64,
    /// Standard deviation of independent beat-time jitter.
    #[serde(default)]
    pub ibi_jitter_s: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_rsa_period() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcgTruth {
    pub beat_times: Vec<f64>,
}

impl EcgTruth {
    pub fn ibis(&self) -> Vec<f64> {
        self.beat_times.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

impl EcgSpec {
    pub fn constant(fs: f64, bpm: f64) -> Self {
        EcgSpec {
            fs,
            bpm_profile: vec![BpmPoint { t: 0.0, bpm }],
            rsa_depth: 0.0,
            rsa_period_s: default_rsa_period(),
            noise_uv: 0.0,
            ibi_jitter_s: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fs >= 100.0 && self.fs.is_finite()) {
            return Err(Error::config(format!("ecg fs must be at least 100 Hz, got {}", self.fs)));
        }
        if self.bpm_profile.is_empty() {
            return Err(Error::config("bpm_profile needs at least one point"));
        }
        if self.bpm_profile.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::config("bpm_profile times must be strictly increasing"));
        }
        if !(self.rsa_depth >= 0.0) {
            return Err(Error::config(format!("rsa_depth must be >= 0, got {}", self.rsa_depth)));
        }
        for p in &self.bpm_profile {
            let (lo, hi) = (p.bpm - self.rsa_depth, p.bpm + self.rsa_depth);
            if !(lo >= MIN_BPM && hi <= MAX_BPM) {
                return Err(Error::config(format!(
                    "bpm {} (with rsa_depth {}) outside [{MIN_BPM}, {MAX_BPM}]",
                    p.bpm, self.rsa_depth
                )));
            }
        }
        if self.rsa_depth > 0.0 && !(self.rsa_period_s > 0.0) {
            return Err(Error::config("rsa_period_s must be positive"));
        }
        if !(self.noise_uv >= 0.0) || !(self.ibi_jitter_s >= 0.0) {
            return Err(Error::config("noise_uV and ibi_jitter_s must be >= 0"));
        }
        Ok(())
    }

    /// Instantaneous rate at `t`, including respiratory modulation.
    pub fn bpm_at(&self, t: f64) -> f64 {
        let p = &self.bpm_profile;
        let base = if t <= p[0].t {
            p[0].bpm
        } else if t >= p[p.len() - 1].t {
            p[p.len() - 1].bpm
        } else {
            let k = p.partition_point(|q| q.t <= t);
            let (a, b) = (p[k - 1], p[k]);
            a.bpm + (b.bpm - a.bpm) * (t - a.t) / (b.t - a.t)
        };
        // peaks with chest inflation: HR rises on the inhale
        base - self.rsa_depth * (2.0 * PI * t / self.rsa_period_s).cos()
    }
}

const TEMPLATE: [(f64, f64, f64); 3] = [
    // offset s, amplitude uV, width s
    (-0.025, -100.0, 0.010),
    (0.0, 1000.0, 0.008),
    (0.025, -250.0, 0.010),
];

/// Beat times where the integrated rate crosses an integer; the phase starts
/// half a beat in so a constant rate R over D seconds gives R*D/60 beats.
fn beat_times(spec: &EcgSpec, duration_s: f64) -> Vec<f64> {
    let dt = 1e-3;
    let mut beats = Vec::new();
    let mut phase = 0.5;
    let mut t = 0.0;
    let mut r0 = spec.bpm_at(0.0) / 60.0;
    while t < duration_s {
        let r1 = spec.bpm_at(t + dt) / 60.0;
        let next = phase + 0.5 * (r0 + r1) * dt;
        if next.floor() > phase.floor() {
            let frac = (next.floor() - phase) / (next - phase);
            let tb = t + frac * dt;
            if tb < duration_s {
                beats.push(tb);
            }
        }
        phase = next;
        r0 = r1;
        t += dt;
    }
    beats
}

pub fn gen_ecg(spec: &EcgSpec, duration_s: f64) -> Result<Generated<EcgTruth>> {
    spec.validate()?;
    let n = sample_count(spec.fs, duration_s)?;
    let mut rng = rng(spec.seed);
    let mut beats = beat_times(spec, duration_s);
    if spec.ibi_jitter_s > 0.0 {
        for b in &mut beats {
            *b += spec.ibi_jitter_s * gaussian(&mut rng);
        }
        for i in 1..beats.len() {
            beats[i] = beats[i].max(beats[i - 1] + 0.3);
        }
        beats.retain(|&b| (0.0..duration_s).contains(&b));
    }

    let fs = spec.fs;
    let mut x = vec![0.0; n];
    for &b in &beats {
        for &(off, amp, w) in &TEMPLATE {
            let c = b + off;
            let lo = (((c - 5.0 * w) * fs).floor().max(0.0)) as usize;
            let hi = (((c + 5.0 * w) * fs).ceil() as usize).min(n);
            for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
                let z = (i as f64 / fs - c) / w;
                *v += amp * (-0.5 * z * z).exp();
            }
        }
    }
    if spec.noise_uv > 0.0 {
        for v in &mut x {
            *v += spec.noise_uv * gaussian(&mut rng);
        }
    }
    Ok(Generated {
        meta: meta("synth-ecg", Modality::Ecg, vec!["ECG".into()], fs, "uV", spec.seed),
        signal: Signal {
            fs,
            t0: 0.0,
            channels: vec![x],
        },
        truth: EcgTruth { beat_times: beats },
    })
}
