use std::collections::VecDeque;
use std::f64::consts::PI;

use super::types::{BreathPhase, MetricId, MetricValue};
use crate::signal::{NormalizeMethod, Normalizer, SosFilter};
use crate::{Error, Result};

/// Duration of the calibration breathing captured when no fixed range is
/// configured.
pub const ONBOARDING_S: f64 = 30.0;
pub const OUTPUT_HZ: f64 = 10.0;
const SMOOTH_HZ: f64 = 1.0;
const SLOPE_WINDOW_S: f64 = 20.0;
const HYSTERESIS: f64 = 0.1;

/// How belt readings become inflation in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    /// Learn the range over an onboarding period, then hold it fixed.
    Onboarding { duration_s: f64 },
    Method(NormalizeMethod),
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration::Onboarding {
            duration_s: ONBOARDING_S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slope {
    Unknown,
    Rising,
    Falling,
}

/// Chest inflation and breathing phase from a respiration belt.
///
/// Phase anchors are the upward (inhale onset, phase 0) and downward (full
/// lungs, phase 0.5) zero crossings of the smoothed derivative, accepted
/// with hysteresis and corrected for the smoothing delay. Between anchors
/// phase advances at the rate of the last observed half cycle.
#[derive(Debug, Clone)]
pub struct RespirationTracker {
    fs: f64,
    lp: SosFilter,
    delay: f64,
    prev_y: Option<f64>,
    slopes: VecDeque<(f64, f64)>,
    slope: Slope,
    prev_d: Option<(f64, f64)>,
    up_cross: Option<f64>,
    down_cross: Option<f64>,
    anchors: VecDeque<(f64, f64)>,
    phase: f64,
    norm: Normalizer,
    onboarding: Option<(f64, f64, f64)>,
    t_first: Option<f64>,
    next_emit: f64,
    calibration: Calibration,
}

fn group_delay(f: &SosFilter, fs: f64) -> f64 {
    let (f1, f2) = (0.02, 0.04);
    let p1 = f.response(f1, fs).arg();
    let p2 = f.response(f2, fs).arg();
    -(p2 - p1) / (2.0 * PI * (f2 - f1))
}

impl RespirationTracker {
    pub fn new(fs: f64, calibration: Calibration) -> Result<Self> {
        if !(fs >= 10.0 && fs.is_finite()) {
            return Err(Error::contract(format!("respiration needs fs >= 10 Hz, got {fs}")));
        }
        let lp = SosFilter::lowpass(fs, SMOOTH_HZ, 2)?;
        let (norm, onboarding) = match calibration {
            Calibration::Onboarding { duration_s } => {
                if !(duration_s > 0.0) {
                    return Err(Error::config("onboarding duration must be positive"));
                }
                (
                    Normalizer::rolling(duration_s)?,
                    Some((duration_s, f64::INFINITY, f64::NEG_INFINITY)),
                )
            }
            Calibration::Method(m) => (Normalizer::new(m)?, None),
        };
        Ok(RespirationTracker {
            fs,
            delay: group_delay(&lp, fs) + 0.5 / fs,
            lp,
            prev_y: None,
            slopes: VecDeque::new(),
            slope: Slope::Unknown,
            prev_d: None,
            up_cross: None,
            down_cross: None,
            anchors: VecDeque::with_capacity(3),
            phase: 0.0,
            norm,
            onboarding,
            t_first: None,
            next_emit: f64::NEG_INFINITY,
            calibration,
        })
    }

    /// Discards the learned inflation range; onboarding restarts with the
    /// next sample. Phase tracking is unaffected.
    pub fn recalibrate(&mut self) {
        let fresh = RespirationTracker::new(self.fs, self.calibration).expect("validated at construction");
        self.norm = fresh.norm;
        self.onboarding = fresh.onboarding;
        self.t_first = None;
    }

    /// The fixed range learned during onboarding, once complete.
    pub fn calibrated_range(&self) -> Option<(f64, f64)> {
        match self.norm.method() {
            NormalizeMethod::Fixed { min, max } if self.onboarding.is_none() => Some((*min, *max)),
            _ => None,
        }
    }

    fn track_slope(&mut self, t: f64, d: f64) {
        if let Some((tp, dp)) = self.prev_d {
            if dp <= 0.0 && d > 0.0 {
                self.up_cross = Some(tp + (t - tp) * (-dp) / (d - dp));
            } else if dp >= 0.0 && d < 0.0 {
                self.down_cross = Some(tp + (t - tp) * dp / (dp - d));
            }
        }
        self.prev_d = Some((t, d));
        self.slopes.push_back((t, d.abs()));
        while self.slopes.front().is_some_and(|p| t - p.0 > SLOPE_WINDOW_S) {
            self.slopes.pop_front();
        }
        let h = HYSTERESIS * self.slopes.iter().map(|p| p.1).fold(0.0, f64::max);
        if h <= 0.0 {
            return;
        }
        if d > h && self.slope != Slope::Rising {
            if let (Slope::Falling, Some(tc)) = (self.slope, self.up_cross) {
                self.anchor(tc - self.delay, 0.0);
            }
            self.slope = Slope::Rising;
        } else if d < -h && self.slope != Slope::Falling {
            if let (Slope::Rising, Some(tc)) = (self.slope, self.down_cross) {
                self.anchor(tc - self.delay, 0.5);
            }
            self.slope = Slope::Falling;
        }
    }

    fn anchor(&mut self, t: f64, phase: f64) {
        if self.anchors.len() == 3 {
            self.anchors.pop_front();
        }
        self.anchors.push_back((t, phase));
    }

    fn current_phase(&mut self, t: f64) -> (f64, bool) {
        let n = self.anchors.len();
        if n < 2 {
            return (self.phase, true);
        }
        let (ta, pa) = self.anchors[n - 1];
        let half = ta - self.anchors[n - 2].0;
        if !(half > 0.0) || t - ta > 4.0 * half {
            return (self.phase, true);
        }
        let adv = (0.5 * (t - ta) / half).clamp(0.0, 0.499);
        self.phase = (pa + adv).rem_euclid(1.0);
        (self.phase, false)
    }

    fn inflation(&mut self, t: f64, x: f64) -> f64 {
        let t0 = *self.t_first.get_or_insert(t);
        if let Some((dur, lo, hi)) = &mut self.onboarding {
            *lo = lo.min(x);
            *hi = hi.max(x);
            if t - t0 >= *dur {
                let (lo, hi) = (*lo, *hi);
                if hi > lo {
                    if let Ok(f) = Normalizer::fixed(lo, hi) {
                        self.norm = f;
                    }
                    self.onboarding = None;
                }
            }
        }
        self.norm.normalize(x, t)
    }

    /// Feeds one belt sample; returns a phase and inflation value at 10 Hz.
    pub fn push(&mut self, t: f64, x: f64) -> Option<(BreathPhase, MetricValue)> {
        let y = self.lp.process_sample(x);
        if let Some(py) = self.prev_y {
            self.track_slope(t, (y - py) * self.fs);
        }
        self.prev_y = Some(y);
        let inflation = self.inflation(t, x);
        if t + 1e-9 < self.next_emit {
            return None;
        }
        self.next_emit = if self.next_emit.is_finite() {
            self.next_emit + 1.0 / OUTPUT_HZ
        } else {
            t + 1.0 / OUTPUT_HZ
        };
        let (phase, stale) = self.current_phase(t);
        Some((
            BreathPhase {
                t,
                phase,
                inflation,
                stale,
            },
            MetricValue::new(MetricId::Respiration, t, inflation, inflation),
        ))
    }
}

/// Breathing phase and inflation for a whole belt record sampled from t = 0.
pub fn respiration(belt: &[f64], fs: f64, calibration: Calibration) -> Result<Vec<(BreathPhase, MetricValue)>> {
    let mut tr = RespirationTracker::new(fs, calibration)?;
    Ok(belt
        .iter()
        .enumerate()
        .filter_map(|(i, &x)| tr.push(i as f64 / fs, x))
        .collect())
}
