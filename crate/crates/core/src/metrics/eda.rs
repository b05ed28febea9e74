use std::collections::VecDeque;

use super::heart::{grid_time, GRID_HZ};
use super::types::{MetricId, MetricValue};
use crate::signal::Normalizer;
use crate::{Error, Result};

pub const SMOOTHING_S: f64 = 2.0;

/// Arousal from skin conductance: a centred 2 s moving average sampled on
/// the 4 Hz grid. A value stamped `t` averages `[t - 1, t + 1)`, so it is
/// available one second after `t`.
#[derive(Debug, Clone)]
pub struct ArousalTracker {
    buf: VecDeque<(f64, f64)>,
    next_k: Option<i64>,
    norm: Normalizer,
}

impl ArousalTracker {
    pub fn new(fs: f64, norm: Normalizer) -> Result<Self> {
        if !(fs >= 10.0) {
            return Err(Error::contract(format!("arousal needs fs >= 10 Hz, got {fs}")));
        }
        Ok(ArousalTracker {
            buf: VecDeque::new(),
            next_k: None,
            norm,
        })
    }

    pub fn reset_normalizer(&mut self) {
        self.norm.reset();
    }

    pub fn push(&mut self, t: f64, x: f64, out: &mut Vec<MetricValue>) {
        let half = SMOOTHING_S / 2.0;
        if self.next_k.is_none() {
            self.next_k = Some(((t + half) * GRID_HZ).ceil() as i64);
        }
        self.buf.push_back((t, x));
        while let Some(k) = self.next_k {
            let tc = grid_time(k);
            if t < tc + half {
                break;
            }
            let (mut sum, mut n) = (0.0, 0usize);
            for &(ts, v) in &self.buf {
                if ts >= tc - half && ts < tc + half {
                    sum += v;
                    n += 1;
                }
            }
            if n > 0 {
                let raw = sum / n as f64;
                let normalized = self.norm.normalize(raw, tc);
                out.push(MetricValue::new(MetricId::Arousal, tc, raw, normalized));
            }
            self.next_k = Some(k + 1);
            let horizon = grid_time(k + 1) - half;
            while self.buf.front().is_some_and(|p| p.0 < horizon) {
                self.buf.pop_front();
            }
        }
    }
}

/// Arousal values for a whole record sampled from t = 0.
pub fn arousal(eda: &[f64], fs: f64, norm: Normalizer) -> Result<Vec<MetricValue>> {
    let mut tr = ArousalTracker::new(fs, norm)?;
    let mut out = Vec::new();
    for (i, &x) in eda.iter().enumerate() {
        tr.push(i as f64 / fs, x, &mut out);
    }
    Ok(out)
}
