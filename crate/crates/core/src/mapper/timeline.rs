use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Upper bound on keyframes kept by [`record_timeline`].
pub const MAX_KEYFRAMES: usize = 64;

/// Scale, rotation (radians) and translation (avatar units) of a sprite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transform {
    #[serde(rename = "sx")]
    pub scale_x: f64,
    #[serde(rename = "sy")]
    pub scale_y: f64,
    #[serde(rename = "rot")]
    pub rotation: f64,
    #[serde(rename = "tx")]
    pub translate_x: f64,
    #[serde(rename = "ty")]
    pub translate_y: f64,
}

impl Transform {
    pub const IDENTITY: Transform =
        Transform { scale_x: 1.0, scale_y: 1.0, rotation: 0.0, translate_x: 0.0, translate_y: 0.0 };

    pub fn scale(s: f64) -> Self {
        Transform { scale_x: s, scale_y: s, ..Self::IDENTITY }
    }

    pub fn rotation(r: f64) -> Self {
        Transform { rotation: r, ..Self::IDENTITY }
    }

    pub fn translation(x: f64, y: f64) -> Self {
        Transform { translate_x: x, translate_y: y, ..Self::IDENTITY }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.scale_x, self.scale_y, self.rotation, self.translate_x, self.translate_y];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::rejected("transform components must be finite"));
        }
        if self.scale_x <= 0.0 || self.scale_y <= 0.0 {
            return Err(Error::rejected(format!(
                "scale must be positive, got ({}, {})",
                self.scale_x, self.scale_y
            )));
        }
        Ok(())
    }
}

impl Default for Transform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KeyDoc", into = "KeyDoc")]
pub struct Keyframe {
    pub phase: f64,
    pub transform: Transform,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyDoc {
    phase: f64,
    sx: f64,
    sy: f64,
    rot: f64,
    tx: f64,
    ty: f64,
}

impl From<Keyframe> for KeyDoc {
    fn from(k: Keyframe) -> Self {
        let t = k.transform;
        KeyDoc { phase: k.phase, sx: t.scale_x, sy: t.scale_y, rot: t.rotation, tx: t.translate_x, ty: t.translate_y }
    }
}

impl TryFrom<KeyDoc> for Keyframe {
    type Error = Error;

    fn try_from(d: KeyDoc) -> Result<Self> {
        let transform =
            Transform { scale_x: d.sx, scale_y: d.sy, rotation: d.rot, translate_x: d.tx, translate_y: d.ty };
        transform.validate()?;
        Ok(Keyframe { phase: d.phase, transform })
    }
}

/// A keyframe animation addressed by phase in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TimelineDoc", into = "TimelineDoc")]
pub struct Timeline {
    pub id: String,
    pub sprite_ref: String,
    keyframes: Vec<Keyframe>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimelineDoc {
    id: String,
    sprite: String,
    keys: Vec<Keyframe>,
}

impl From<Timeline> for TimelineDoc {
    fn from(t: Timeline) -> Self {
        TimelineDoc { id: t.id, sprite: t.sprite_ref, keys: t.keyframes }
    }
}

impl TryFrom<TimelineDoc> for Timeline {
    type Error = Error;

    fn try_from(d: TimelineDoc) -> Result<Self> {
        Timeline::new(d.id, d.sprite, d.keys)
    }
}

impl Timeline {
    /// Phases must rise strictly from exactly 0 to exactly 1.
    pub fn new(id: impl Into<String>, sprite_ref: impl Into<String>, keyframes: Vec<Keyframe>) -> Result<Self> {
        let id = id.into();
        if keyframes.len() < 2 {
            return Err(Error::rejected(format!("timeline {id:?} needs at least 2 keyframes")));
        }
        if keyframes[0].phase != 0.0 || keyframes[keyframes.len() - 1].phase != 1.0 {
            return Err(Error::rejected(format!("timeline {id:?} must start at phase 0 and end at phase 1")));
        }
        if keyframes.windows(2).any(|w| !(w[1].phase > w[0].phase)) {
            return Err(Error::rejected(format!("timeline {id:?} keyframe phases must be strictly increasing")));
        }
        for k in &keyframes {
            k.transform.validate()?;
        }
        Ok(Timeline { id, sprite_ref: sprite_ref.into(), keyframes })
    }

    /// Two-keyframe timeline from `a` at phase 0 to `b` at phase 1.
    pub fn linear(id: impl Into<String>, sprite_ref: impl Into<String>, a: Transform, b: Transform) -> Result<Self> {
        Self::new(
            id,
            sprite_ref,
            vec![Keyframe { phase: 0.0, transform: a }, Keyframe { phase: 1.0, transform: b }],
        )
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }

    pub fn evaluate(&self, phase: f64) -> Transform {
        evaluate_timeline(self, phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GestureSample {
    pub t: f64,
    pub transform: Transform,
}

/// Turns a captured gesture into a timeline: time is rescaled onto phase
/// [0, 1] and long captures are thinned to the samples nearest a uniform
/// phase grid. First and last samples are kept verbatim.
pub fn record_timeline(
    id: impl Into<String>,
    sprite_ref: impl Into<String>,
    samples: &[GestureSample],
) -> Result<Timeline> {
    if samples.len() < 2 {
        return Err(Error::rejected(format!("a gesture needs at least 2 samples, got {}", samples.len())));
    }
    if samples.iter().any(|s| !s.t.is_finite()) || samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::rejected("gesture sample times must be strictly increasing"));
    }
    let t0 = samples[0].t;
    let span = samples[samples.len() - 1].t - t0;
    let phase_of = |i: usize| {
        if i == samples.len() - 1 {
            1.0
        } else {
            (samples[i].t - t0) / span
        }
    };

    let picks: Vec<usize> = if samples.len() <= MAX_KEYFRAMES {
        (0..samples.len()).collect()
    } else {
        let mut picks = vec![0];
        let mut i = 0;
        for k in 1..MAX_KEYFRAMES - 1 {
            let target = k as f64 / (MAX_KEYFRAMES - 1) as f64;
            while i + 1 < samples.len() - 1 && phase_of(i + 1) <= target {
                i += 1;
            }
            let best = if i + 1 < samples.len() - 1 && phase_of(i + 1) - target < target - phase_of(i) {
                i + 1
            } else {
                i
            };
            if best > *picks.last().unwrap() {
                picks.push(best);
            }
        }
        picks.push(samples.len() - 1);
        picks
    };

    let keys = picks
        .into_iter()
        .map(|i| Keyframe { phase: phase_of(i), transform: samples[i].transform })
        .collect();
    Timeline::new(id, sprite_ref, keys)
}

/// Piecewise-linear interpolation; rotation takes the shorter way around
/// the circle. Phases outside [0, 1] are clamped and NaN reads as 0.
pub fn evaluate_timeline(timeline: &Timeline, phase: f64) -> Transform {
    let keys = &timeline.keyframes;
    let p = if phase.is_nan() { 0.0 } else { phase.clamp(0.0, 1.0) };
    // index of the first keyframe with phase > p
    let hi = keys.partition_point(|k| k.phase <= p);
    if hi == 0 {
        return keys[0].transform;
    }
    let a = &keys[hi - 1];
    if a.phase == p || hi == keys.len() {
        return a.transform;
    }
    let b = &keys[hi];
    let u = (p - a.phase) / (b.phase - a.phase);
    let (ta, tb) = (a.transform, b.transform);
    let lerp = |x: f64, y: f64| x + (y - x) * u;
    Transform {
        scale_x: lerp(ta.scale_x, tb.scale_x),
        scale_y: lerp(ta.scale_y, tb.scale_y),
        rotation: ta.rotation + shortest_arc(ta.rotation, tb.rotation) * u,
        translate_x: lerp(ta.translate_x, tb.translate_x),
        translate_y: lerp(ta.translate_y, tb.translate_y),
    }
}

/// Signed angle from `a` to `b` in (-π, π].
pub fn shortest_arc(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}
