use serde::{Deserialize, Serialize};

use super::{PhaseId, RelaxationProtocol};
use crate::metrics::{MetricId, MetricValue};

/// Values older than this are left out of group aggregates.
pub const GROUP_STALE_S: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    Rising,
    Falling,
}

/// Breathing gauge: a triangle wave, rising first, paced by the gauge's
/// half cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeState {
    pub t: f64,
    pub level: f64,
    pub direction: Direction,
}

/// The phase running at session time `t` with its start time.
pub fn phase_at(protocol: &RelaxationProtocol, t: f64) -> Option<(PhaseId, f64)> {
    protocol.schedule().into_iter().find(|&(start, end, _)| t >= start && t < end).map(|(s, _, p)| (p, s))
}

/// Gauge reading at session time `t`; `None` outside GUIDED phases.
pub fn gauge_level(protocol: &RelaxationProtocol, t: f64) -> Option<GaugeState> {
    let (PhaseId::Guided, start) = phase_at(protocol, t)? else {
        return None;
    };
    let half = protocol.gauge.half_cycle_s;
    let pos = (t - start).rem_euclid(2.0 * half);
    let (level, direction) = if pos < half {
        (pos / half, Direction::Rising)
    } else {
        (2.0 - pos / half, Direction::Falling)
    };
    Some(GaugeState { t, level, direction })
}

/// Group reading for `metric`: the mean of each user's latest normalized
/// value, ignoring users silent for more than five seconds at `now`.
pub fn group_aggregate<'a>(
    latest: impl IntoIterator<Item = &'a MetricValue>,
    metric: MetricId,
    now: f64,
) -> Option<MetricValue> {
    let fresh: Vec<f64> = latest
        .into_iter()
        .filter(|v| v.metric_id == metric && now - v.t <= GROUP_STALE_S && v.t <= now)
        .map(|v| v.normalized)
        .collect();
    if fresh.is_empty() {
        return None;
    }
    let mean = fresh.iter().sum::<f64>() / fresh.len() as f64;
    Some(MetricValue::new(metric, now, mean, mean))
}
