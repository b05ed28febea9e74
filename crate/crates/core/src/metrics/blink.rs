use std::collections::VecDeque;

use super::types::BlinkEvent;
use crate::signal::{dc_blocker, SosFilter};
use crate::{Error, Result};

pub const BASELINE_S: f64 = 5.0;
pub const THRESHOLD_SD: f64 = 4.0;
pub const REFRACTORY_S: f64 = 0.3;
const SMOOTH_S: f64 = 0.04;
const DC_CUTOFF_HZ: f64 = 0.1;
/// Samples wait this long before joining the baseline so a blink's rising
/// edge never inflates it.
const ADMIT_DELAY_S: f64 = 0.25;

/// Blink detector for the F8 electrode.
///
/// The input is DC-removed and a 5 s trailing baseline of it (excluding
/// blinks, the 250 ms before them and their refractory tail) gives a
/// standard deviation. A blink
/// starts when a ~40 ms moving mean of the DC-removed signal rises above 4
/// baseline standard deviations; it is reported at its peak once the signal
/// drops back, followed by a 300 ms refractory period.
#[derive(Debug, Clone)]
pub struct BlinkDetector {
    fs: f64,
    hp: SosFilter,
    smooth: VecDeque<f64>,
    smooth_len: usize,
    smooth_sum: f64,
    baseline: VecDeque<f64>,
    pending: VecDeque<(f64, f64)>,
    base_len: usize,
    sum: f64,
    sum_sq: f64,
    t_first: Option<f64>,
    active: Option<(f64, f64)>,
    threshold: f64,
    refractory_until: f64,
}

impl BlinkDetector {
    pub fn new(fs: f64) -> Result<Self> {
        if !(fs > 2.0 * DC_CUTOFF_HZ && fs.is_finite()) {
            return Err(Error::contract(format!("blink detection needs a positive rate, got {fs}")));
        }
        let smooth_len = ((SMOOTH_S * fs).round() as usize).max(1);
        Ok(BlinkDetector {
            fs,
            hp: dc_blocker(fs, DC_CUTOFF_HZ)?,
            smooth: VecDeque::with_capacity(smooth_len + 1),
            smooth_len,
            smooth_sum: 0.0,
            baseline: VecDeque::new(),
            pending: VecDeque::new(),
            base_len: (BASELINE_S * fs).round() as usize,
            sum: 0.0,
            sum_sq: 0.0,
            t_first: None,
            active: None,
            threshold: 0.0,
            refractory_until: f64::NEG_INFINITY,
        })
    }

    /// Current detection threshold in input units.
    pub fn threshold(&self) -> f64 {
        let n = self.baseline.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        THRESHOLD_SD * var.sqrt()
    }

    fn admit(&mut self, y: f64) {
        self.baseline.push_back(y);
        self.sum += y;
        self.sum_sq += y * y;
        if self.baseline.len() > self.base_len {
            let old = self.baseline.pop_front().unwrap_or(0.0);
            self.sum -= old;
            self.sum_sq -= old * old;
        }
    }

    pub fn push(&mut self, t: f64, x: f64) -> Option<BlinkEvent> {
        let t0 = *self.t_first.get_or_insert(t);
        let y = self.hp.process_sample(x);
        self.smooth_sum += y;
        self.smooth.push_back(y);
        if self.smooth.len() > self.smooth_len {
            self.smooth_sum -= self.smooth.pop_front().unwrap_or(0.0);
        }
        let s = self.smooth_sum / self.smooth.len() as f64;
        // the moving mean lags its input by half its length
        let ts = t - 0.5 * (self.smooth.len() - 1) as f64 / self.fs;

        let mut event = None;
        match self.active {
            Some((tp, peak)) => {
                if s > peak {
                    self.active = Some((ts, s));
                } else if s < self.threshold {
                    self.active = None;
                    self.refractory_until = t + REFRACTORY_S;
                    event = Some(BlinkEvent { t: tp, peak_amplitude: peak });
                }
            }
            None => {
                let armed = t - t0 >= BASELINE_S && t >= self.refractory_until;
                let thr = self.threshold();
                if armed && thr > 0.0 && s > thr {
                    self.threshold = thr;
                    self.active = Some((ts, s));
                }
            }
        }

        if self.active.is_some() {
            self.pending.clear();
        } else if t >= self.refractory_until {
            self.pending.push_back((t, y));
        }
        while self.pending.front().is_some_and(|p| t - p.0 >= ADMIT_DELAY_S) {
            let (_, v) = self.pending.pop_front().unwrap_or_default();
            self.admit(v);
        }
        event
    }
}

/// Runs the detector over a whole F8 record sampled from t = 0.
pub fn detect_blinks(eog_f8: &[f64], fs: f64) -> Result<Vec<BlinkEvent>> {
    let mut det = BlinkDetector::new(fs)?;
    Ok(eog_f8
        .iter()
        .enumerate()
        .filter_map(|(i, &x)| det.push(i as f64 / fs, x))
        .collect())
}
