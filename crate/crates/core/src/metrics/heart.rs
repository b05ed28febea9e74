use std::collections::VecDeque;

use super::types::{BeatEvent, MetricId, MetricValue};
use crate::signal::{Normalizer, SosFilter};
use crate::Result;

/// Rate of the common resampling grid shared by all users.
pub const GRID_HZ: f64 = 4.0;
const MEDIAN_OF: usize = 4;

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Heart rate as 60 / median of the last four inter-beat intervals.
#[derive(Debug, Clone)]
pub struct HeartRateTracker {
    last_beat: Option<f64>,
    ibis: VecDeque<f64>,
    norm: Normalizer,
}

impl HeartRateTracker {
    pub fn new(norm: Normalizer) -> Self {
        HeartRateTracker {
            last_beat: None,
            ibis: VecDeque::with_capacity(MEDIAN_OF),
            norm,
        }
    }

    pub fn reset_normalizer(&mut self) {
        self.norm.reset();
    }

    /// One value per beat once two beats have been seen.
    pub fn push(&mut self, beat: BeatEvent) -> Option<MetricValue> {
        let prev = self.last_beat.replace(beat.t)?;
        let ibi = beat.t - prev;
        if !(ibi > 0.0) {
            return None;
        }
        if self.ibis.len() == MEDIAN_OF {
            self.ibis.pop_front();
        }
        self.ibis.push_back(ibi);
        let raw = 60.0 / median(self.ibis.make_contiguous());
        let normalized = self.norm.normalize(raw, beat.t);
        Some(MetricValue::new(MetricId::HeartRate, beat.t, raw, normalized))
    }
}

/// Heart-rate values from a beat list (one per beat after the first).
pub fn heart_rate(beats: &[BeatEvent], norm: Normalizer) -> Vec<MetricValue> {
    let mut tr = HeartRateTracker::new(norm);
    beats.iter().filter_map(|b| tr.push(*b)).collect()
}

/// Samples of a series on the shared grid `t = k / GRID_HZ`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSeries {
    first_k: i64,
    values: VecDeque<f64>,
    capacity: usize,
}

impl GridSeries {
    pub fn new(capacity: usize) -> Self {
        GridSeries {
            first_k: 0,
            values: VecDeque::new(),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&mut self, k: i64, v: f64) {
        match self.last_k() {
            Some(last) if k != last + 1 => {
                // a gap breaks continuity: start over
                self.values.clear();
                self.first_k = k;
            }
            None => self.first_k = k,
            _ => {}
        }
        self.values.push_back(v);
        if self.values.len() > self.capacity {
            self.values.pop_front();
            self.first_k += 1;
        }
    }

    pub fn last_k(&self) -> Option<i64> {
        (!self.values.is_empty()).then(|| self.first_k + self.values.len() as i64 - 1)
    }

    pub fn first_k(&self) -> Option<i64> {
        (!self.values.is_empty()).then_some(self.first_k)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `n` values ending at grid index `end`, if all are present.
    pub fn window(&self, end: i64, n: usize) -> Option<Vec<f64>> {
        let first = self.first_k()?;
        let start = end - n as i64 + 1;
        if start < first || end > self.last_k()? {
            return None;
        }
        let off = (start - first) as usize;
        Some(self.values.iter().skip(off).take(n).copied().collect())
    }
}

pub fn grid_time(k: i64) -> f64 {
    k as f64 / GRID_HZ
}

/// Converts beats to instantaneous rate on the 4 Hz grid. Each interval's
/// rate 60 / IBI is placed at the interval midpoint and grid points between
/// midpoints are linearly interpolated; nothing is extrapolated.
#[derive(Debug, Clone)]
pub struct HrResampler {
    last_beat: Option<f64>,
    last_point: Option<(f64, f64)>,
    next_k: Option<i64>,
}

impl Default for HrResampler {
    fn default() -> Self {
        HrResampler::new()
    }
}

impl HrResampler {
    pub fn new() -> Self {
        HrResampler {
            last_beat: None,
            last_point: None,
            next_k: None,
        }
    }

    /// Adds a beat; returns newly defined `(k, bpm)` grid samples.
    pub fn push(&mut self, beat: BeatEvent) -> Vec<(i64, f64)> {
        let mut out = Vec::new();
        let Some(prev) = self.last_beat.replace(beat.t) else {
            return out;
        };
        let ibi = beat.t - prev;
        if !(ibi > 0.0) {
            return out;
        }
        let point = (0.5 * (prev + beat.t), 60.0 / ibi);
        if let Some((t0, v0)) = self.last_point {
            let (t1, v1) = point;
            let mut k = self.next_k.unwrap_or((t0 * GRID_HZ).ceil() as i64);
            while grid_time(k) <= t1 {
                let t = grid_time(k);
                if t >= t0 {
                    out.push((k, v0 + (v1 - v0) * (t - t0) / (t1 - t0)));
                }
                k += 1;
            }
            self.next_k = Some(k);
        }
        self.last_point = Some(point);
        out
    }
}

/// Low-passes a belt signal and samples it on the 4 Hz grid.
#[derive(Debug, Clone)]
pub struct BreathResampler {
    lp: SosFilter,
    prev: Option<(f64, f64)>,
    next_k: Option<i64>,
}

impl BreathResampler {
    pub fn new(fs: f64) -> Result<Self> {
        Ok(BreathResampler {
            lp: SosFilter::lowpass(fs, 1.0, 2)?,
            prev: None,
            next_k: None,
        })
    }

    pub fn push(&mut self, t: f64, x: f64, out: &mut Vec<(i64, f64)>) {
        let y = self.lp.process_sample(x);
        if let Some((t0, y0)) = self.prev {
            let mut k = self.next_k.unwrap_or((t0 * GRID_HZ).ceil() as i64);
            while grid_time(k) <= t {
                let tk = grid_time(k);
                if tk >= t0 && t > t0 {
                    out.push((k, y0 + (y - y0) * (tk - t0) / (t - t0)));
                }
                k += 1;
            }
            self.next_k = Some(k);
        }
        self.prev = Some((t, y));
    }
}
