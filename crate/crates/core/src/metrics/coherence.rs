use super::heart::{grid_time, GridSeries, GRID_HZ};
use super::types::{MetricId, MetricValue};
use crate::signal::{msc, BandSpec, CoherenceConfig};
use crate::{Error, Result};

pub const COHERENCE_WINDOW_S: f64 = 10.0;
pub const COHERENCE_BAND: BandSpec = BandSpec::new(0.05, 0.3);

fn window_len() -> usize {
    (COHERENCE_WINDOW_S * GRID_HZ) as usize
}

fn trailing_msc(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = window_len();
    if x.len() < n || y.len() < n {
        return Err(Error::contract(format!(
            "coherence needs {COHERENCE_WINDOW_S} s of both series on the {GRID_HZ} Hz grid"
        )));
    }
    msc(&x[x.len() - n..], &y[y.len() - n..], GRID_HZ, COHERENCE_BAND, &CoherenceConfig::default())
}

/// Coherence between heart rate and breathing over the trailing 10 s of two
/// series already on the 4 Hz grid and aligned at their ends.
pub fn cardiac_coherence(hr: &[f64], breath: &[f64]) -> Result<f64> {
    trailing_msc(hr, breath)
}

/// Coherence between two users' heart rates, same windowing as
/// [`cardiac_coherence`].
pub fn pair_synchrony(hr_a: &[f64], hr_b: &[f64]) -> Result<f64> {
    trailing_msc(hr_a, hr_b)
}

/// Streaming coherence of two grid series, emitted once per second.
#[derive(Debug, Clone)]
pub struct CoherenceTracker {
    metric: MetricId,
    a: GridSeries,
    b: GridSeries,
    next_emit: Option<i64>,
}

impl CoherenceTracker {
    pub fn new(metric: MetricId) -> Self {
        let cap = window_len() + 8;
        CoherenceTracker {
            metric,
            a: GridSeries::new(cap),
            b: GridSeries::new(cap),
            next_emit: None,
        }
    }

    pub fn cardiac() -> Self {
        CoherenceTracker::new(MetricId::CardiacCoherence)
    }

    pub fn synchrony() -> Self {
        CoherenceTracker::new(MetricId::PairSynchrony)
    }

    pub fn push_a(&mut self, k: i64, v: f64) {
        self.a.push(k, v);
    }

    pub fn push_b(&mut self, k: i64, v: f64) {
        self.b.push(k, v);
    }

    /// Grid index up to which both series are defined.
    pub fn common_end(&self) -> Option<i64> {
        Some(self.a.last_k()?.min(self.b.last_k()?))
    }

    /// Whether a full window of both series is available.
    pub fn ready(&self) -> bool {
        self.common_end()
            .is_some_and(|e| self.a.window(e, window_len()).is_some() && self.b.window(e, window_len()).is_some())
    }

    pub fn poll(&mut self, out: &mut Vec<MetricValue>) {
        let (Some(end), Some(fa), Some(fb)) = (self.common_end(), self.a.first_k(), self.b.first_k()) else {
            return;
        };
        let per_s = GRID_HZ as i64;
        let n = window_len();
        let earliest = fa.max(fb) + n as i64 - 1;
        let earliest = (earliest + per_s - 1).div_euclid(per_s) * per_s;
        let mut e = self.next_emit.map_or(earliest, |k| k.max(earliest));
        while e <= end {
            if let (Some(x), Some(y)) = (self.a.window(e, n), self.b.window(e, n)) {
                if let Ok(raw) = msc(&x, &y, GRID_HZ, COHERENCE_BAND, &CoherenceConfig::default()) {
                    out.push(MetricValue::new(self.metric, grid_time(e), raw, raw));
                }
            }
            e += per_s;
        }
        self.next_emit = Some(e);
    }
}
