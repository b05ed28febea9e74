use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{evaluate_timeline, AvatarConfig, Binding, Mode, Timeline, Transform};
use crate::metrics::{MetricId, MetricValue};
use crate::Result;

/// Time constant of the display smoothing on continuous bindings.
pub const SMOOTHING_S: f64 = 0.2;
/// A binding with no input for this long is flagged stale.
pub const STALE_AFTER_S: f64 = 5.0;
/// Stale anchors return to phase 0 over this long.
pub const EASE_OUT_S: f64 = 1.0;

/// A discrete event that restarts playback of PERIODIC bindings on
/// `metric_id` (beats drive HEART_RATE, breath onsets drive RESPIRATION).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trigger {
    pub metric_id: MetricId,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderItem {
    pub anchor_id: String,
    pub sprite_ref: String,
    pub transform: Transform,
    pub phase: f64,
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderFrame {
    pub t: f64,
    pub version: u64,
    pub items: Vec<RenderItem>,
}

#[derive(Debug, Clone, Default)]
struct AnchorState {
    last_tick: Option<f64>,
    target: f64,
    last_update: Option<f64>,
    last_trigger: Option<f64>,
    // phase displayed on the previous tick
    shown: Option<f64>,
    // phase displayed when the binding went stale
    frozen: Option<f64>,
}

/// Owns an avatar config plus the per-anchor playback state and turns
/// metric updates into render frames. `tick` is a pure function of the
/// config and the sequence of inputs, so replaying a log reproduces the
/// same frames.
#[derive(Debug, Clone)]
pub struct Mapper {
    config: Arc<AvatarConfig>,
    state: HashMap<String, AnchorState>,
}

impl Mapper {
    pub fn new(config: AvatarConfig) -> Result<Self> {
        config.validate()?;
        Ok(Mapper { config: Arc::new(config), state: HashMap::new() })
    }

    /// Current config snapshot; later edits do not affect it.
    pub fn config(&self) -> Arc<AvatarConfig> {
        Arc::clone(&self.config)
    }

    pub fn bind(&mut self, metric: MetricId, anchor_id: &str, timeline_id: &str, mode: Mode) -> Result<u64> {
        let next = self.config.bind(metric, anchor_id, timeline_id, mode)?;
        self.state.remove(anchor_id);
        self.config = Arc::new(next);
        Ok(self.config.version)
    }

    pub fn upsert_timeline(&mut self, t: Timeline) -> u64 {
        self.config = Arc::new(self.config.upsert_timeline(t));
        self.config.version
    }

    pub fn tick(&mut self, now: f64, values: &[MetricValue], triggers: &[Trigger]) -> RenderFrame {
        let config = Arc::clone(&self.config);
        let items = config
            .bindings
            .iter()
            .map(|b| {
                let timeline = config.timeline(&b.timeline).expect("validated binding");
                let st = self.state.entry(b.anchor.clone()).or_default();
                let (phase, stale) = advance(st, b, now, values, triggers);
                RenderItem {
                    anchor_id: b.anchor.clone(),
                    sprite_ref: timeline.sprite_ref.clone(),
                    transform: evaluate_timeline(timeline, phase),
                    phase,
                    stale,
                }
            })
            .collect();
        RenderFrame { t: now, version: config.version, items }
    }
}

fn advance(st: &mut AnchorState, b: &Binding, now: f64, values: &[MetricValue], triggers: &[Trigger]) -> (f64, bool) {
    // the smoothing switches target at each value's own timestamp
    let mut cursor = st.last_tick;
    let mut fresh: Vec<&MetricValue> = values
        .iter()
        .filter(|v| v.metric_id == b.metric && v.t <= now && st.last_update.is_none_or(|u| v.t > u))
        .collect();
    fresh.sort_by(|x, y| x.t.total_cmp(&y.t));
    for v in fresh {
        if let (Mode::Continuous, Some(s), Some(c), None) = (b.mode, st.shown, cursor, st.frozen) {
            if v.t > c {
                st.shown = Some(smooth(s, st.target, v.t - c));
                cursor = Some(v.t);
            }
        }
        st.last_update = Some(v.t);
        st.target = v.normalized;
    }
    let dt = cursor.map_or(0.0, |c| (now - c).max(0.0));
    st.last_tick = Some(now);

    for tr in triggers.iter().filter(|tr| tr.metric_id == b.metric && tr.t <= now) {
        if st.last_trigger.is_none_or(|u| tr.t > u) {
            st.last_trigger = Some(tr.t);
        }
    }

    let last_input = match (st.last_update, st.last_trigger) {
        (Some(u), Some(v)) => Some(u.max(v)),
        (u, v) => u.or(v),
    };
    let Some(last_input) = last_input else {
        return (0.0, true);
    };
    let stale_for = now - last_input - STALE_AFTER_S;
    let stale = stale_for > 0.0;

    let phase = match b.mode {
        Mode::Continuous if !stale => {
            st.frozen = None;
            match st.shown {
                None => st.target,
                Some(s) => smooth(s, st.target, dt),
            }
        }
        Mode::Continuous => *st.frozen.get_or_insert(st.shown.unwrap_or(0.0)) * ease_out(stale_for),
        Mode::Periodic { duration_s } => {
            let playing = match st.last_trigger {
                Some(t0) if now - t0 < duration_s => (now - t0) / duration_s,
                _ => 0.0,
            };
            if stale {
                playing * ease_out(stale_for)
            } else {
                playing
            }
        }
    }
    .clamp(0.0, 1.0);
    st.shown = Some(phase);
    (phase, stale)
}

fn smooth(from: f64, to: f64, dt: f64) -> f64 {
    from + (1.0 - (-dt / SMOOTHING_S).exp()) * (to - from)
}

/// 1 at the start of the ease, 0 after `EASE_OUT_S`, cosine shaped.
fn ease_out(elapsed: f64) -> f64 {
    let u = (elapsed / EASE_OUT_S).clamp(0.0, 1.0);
    0.5 * (1.0 + (PI * u).cos())
}
