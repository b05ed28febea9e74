use serde::{Deserialize, Serialize};
use tobe_transport::Modality;

use super::{meta, sample_count, Generated, Signal};
use crate::{Error, Result};

/// A skin conductance response: onset `t`, peak `amplitude` reached
/// `rise_s` after onset, then decaying with time constant `decay_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScrEvent {
    pub t: f64,
    pub amplitude: f64,
    pub rise_s: f64,
    pub decay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdaSpec {
    pub fs: f64,
    #[serde(rename = "tonic_uS")]
    pub tonic_us: f64,
    #[serde(default)]
    pub scr_events: Vec<ScrEvent>,
    #[serde(default)]
    pub seed: u64,
}

impl EdaSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fs > 0.0) {
            return Err(Error::config(format!("eda fs must be positive, got {}", self.fs)));
        }
        if !(self.tonic_us >= 0.0) {
            return Err(Error::config(format!("tonic_uS must be >= 0, got {}", self.tonic_us)));
        }
        for e in &self.scr_events {
            if !(e.rise_s > 0.0 && e.decay_s > e.rise_s) {
                return Err(Error::config(format!(
                    "scr at t={} needs 0 < rise_s < decay_s, got {} and {}",
                    e.t, e.rise_s, e.decay_s
                )));
            }
        }
        Ok(())
    }
}

fn peak_time(tau_r: f64, tau_d: f64) -> f64 {
    tau_r * tau_d / (tau_d - tau_r) * (tau_d / tau_r).ln()
}

/// Rise constant giving a bi-exponential peak `rise_s` after onset.
fn rise_constant(rise_s: f64, tau_d: f64) -> f64 {
    // peak time grows monotonically from 0 to tau_d as tau_r goes 0 -> tau_d
    let (mut lo, mut hi) = (1e-9 * tau_d, tau_d * (1.0 - 1e-9));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if peak_time(mid, tau_d) < rise_s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Conductance contributed by `ev` at time `t`.
pub fn scr_response(ev: &ScrEvent, t: f64) -> f64 {
    let dt = t - ev.t;
    if dt <= 0.0 {
        return 0.0;
    }
    let tau_r = rise_constant(ev.rise_s, ev.decay_s);
    let shape = |u: f64| (-u / ev.decay_s).exp() - (-u / tau_r).exp();
    ev.amplitude * shape(dt) / shape(peak_time(tau_r, ev.decay_s))
}

pub fn gen_eda(spec: &EdaSpec, duration_s: f64) -> Result<Generated<()>> {
    spec.validate()?;
    let n = sample_count(spec.fs, duration_s)?;
    let mut x = vec![spec.tonic_us; n];
    for ev in &spec.scr_events {
        let tau_r = rise_constant(ev.rise_s, ev.decay_s);
        let norm = {
            let tp = peak_time(tau_r, ev.decay_s);
            (-tp / ev.decay_s).exp() - (-tp / tau_r).exp()
        };
        for (i, v) in x.iter_mut().enumerate() {
            let dt = i as f64 / spec.fs - ev.t;
            if dt > 0.0 {
                *v += ev.amplitude * ((-dt / ev.decay_s).exp() - (-dt / tau_r).exp()) / norm;
            }
        }
    }
    Ok(Generated {
        meta: meta("synth-eda", Modality::Eda, vec!["EDA".into()], spec.fs, "uS", spec.seed),
        signal: Signal {
            fs: spec.fs,
            t0: 0.0,
            channels: vec![x],
        },
        truth: (),
    })
}
