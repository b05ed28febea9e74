use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Timeline;
use crate::metrics::MetricId;
use crate::{Error, Result};

/// A named attachment point on the avatar. Position is in normalized
/// avatar coordinates, origin top-left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub size: f64,
}

impl Anchor {
    pub fn new(id: impl Into<String>, x: f64, y: f64, size: f64) -> Self {
        Anchor { id: id.into(), x, y, size }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Timeline phase follows the normalized metric.
    Continuous,
    /// Each trigger plays the timeline once over `duration_s`.
    Periodic { duration_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BindingDoc", into = "BindingDoc")]
pub struct Binding {
    pub metric: MetricId,
    pub anchor: String,
    pub timeline: String,
    pub mode: Mode,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
enum ModeTag {
    Continuous,
    Periodic,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BindingDoc {
    metric: MetricId,
    anchor: String,
    timeline: String,
    mode: ModeTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration_s: Option<f64>,
}

impl From<Binding> for BindingDoc {
    fn from(b: Binding) -> Self {
        let (mode, duration_s) = match b.mode {
            Mode::Continuous => (ModeTag::Continuous, None),
            Mode::Periodic { duration_s } => (ModeTag::Periodic, Some(duration_s)),
        };
        BindingDoc { metric: b.metric, anchor: b.anchor, timeline: b.timeline, mode, duration_s }
    }
}

impl TryFrom<BindingDoc> for Binding {
    type Error = Error;

    fn try_from(d: BindingDoc) -> Result<Self> {
        let mode = match (d.mode, d.duration_s) {
            (ModeTag::Continuous, None) => Mode::Continuous,
            (ModeTag::Continuous, Some(_)) => {
                return Err(Error::rejected("duration_s only applies to PERIODIC bindings"))
            }
            (ModeTag::Periodic, Some(duration_s)) => Mode::Periodic { duration_s },
            (ModeTag::Periodic, None) => return Err(Error::rejected("PERIODIC bindings need duration_s")),
        };
        let b = Binding { metric: d.metric, anchor: d.anchor, timeline: d.timeline, mode };
        b.validate_mode()?;
        Ok(b)
    }
}

impl Binding {
    fn validate_mode(&self) -> Result<()> {
        if let Mode::Periodic { duration_s } = self.mode {
            if !(duration_s.is_finite() && duration_s > 0.0) {
                return Err(Error::rejected(format!("duration_s must be positive, got {duration_s}")));
            }
        }
        Ok(())
    }
}

/// Anchors, timelines and the bindings between them for one avatar.
///
/// `version` counts accepted edits. It is runtime state: it is not written
/// to JSON and does not take part in equality.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvatarConfig {
    pub avatar_id: String,
    pub anchors: Vec<Anchor>,
    pub timelines: Vec<Timeline>,
    pub bindings: Vec<Binding>,
    #[serde(skip)]
    pub version: u64,
}

impl PartialEq for AvatarConfig {
    fn eq(&self, o: &Self) -> bool {
        self.avatar_id == o.avatar_id
            && self.anchors == o.anchors
            && self.timelines == o.timelines
            && self.bindings == o.bindings
    }
}

impl AvatarConfig {
    pub fn new(avatar_id: impl Into<String>) -> Self {
        AvatarConfig { avatar_id: avatar_id.into(), anchors: vec![], timelines: vec![], bindings: vec![], version: 0 }
    }

    pub fn with_anchor(mut self, a: Anchor) -> Result<Self> {
        self.anchors.push(a);
        self.validate()?;
        Ok(self)
    }

    pub fn with_timeline(mut self, t: Timeline) -> Result<Self> {
        self.timelines.push(t);
        self.validate()?;
        Ok(self)
    }

    pub fn anchor(&self, id: &str) -> Option<&Anchor> {
        self.anchors.iter().find(|a| a.id == id)
    }

    pub fn timeline(&self, id: &str) -> Option<&Timeline> {
        self.timelines.iter().find(|t| t.id == id)
    }

    pub fn binding(&self, anchor: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.anchor == anchor)
    }

    /// Attaches `metric` to `anchor_id` through `timeline_id`, replacing any
    /// binding the anchor already had.
    pub fn bind(&self, metric: MetricId, anchor_id: &str, timeline_id: &str, mode: Mode) -> Result<AvatarConfig> {
        if self.anchor(anchor_id).is_none() {
            return Err(Error::rejected(format!("unknown anchor {anchor_id:?}")));
        }
        if self.timeline(timeline_id).is_none() {
            return Err(Error::rejected(format!("unknown timeline {timeline_id:?}")));
        }
        let b = Binding { metric, anchor: anchor_id.to_string(), timeline: timeline_id.to_string(), mode };
        b.validate_mode()?;
        let mut next = self.clone();
        match next.bindings.iter_mut().find(|x| x.anchor == anchor_id) {
            Some(slot) => *slot = b,
            None => next.bindings.push(b),
        }
        next.version += 1;
        Ok(next)
    }

    /// Adds a timeline or replaces the one with the same id.
    pub fn upsert_timeline(&self, t: Timeline) -> AvatarConfig {
        let mut next = self.clone();
        match next.timelines.iter_mut().find(|x| x.id == t.id) {
            Some(slot) => *slot = t,
            None => next.timelines.push(t),
        }
        next.version += 1;
        next
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for a in &self.anchors {
            if !seen.insert(a.id.as_str()) {
                return Err(Error::rejected(format!("duplicate anchor {:?}", a.id)));
            }
            let in_unit = |v: f64| (0.0..=1.0).contains(&v);
            if !in_unit(a.x) || !in_unit(a.y) {
                return Err(Error::rejected(format!("anchor {:?} position must lie in [0, 1]", a.id)));
            }
            if !(a.size.is_finite() && a.size > 0.0) {
                return Err(Error::rejected(format!("anchor {:?} size must be positive", a.id)));
            }
        }
        let mut seen = HashSet::new();
        for t in &self.timelines {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::rejected(format!("duplicate timeline {:?}", t.id)));
            }
        }
        let mut bound = HashSet::new();
        for b in &self.bindings {
            if self.anchor(&b.anchor).is_none() {
                return Err(Error::rejected(format!("binding refers to unknown anchor {:?}", b.anchor)));
            }
            if self.timeline(&b.timeline).is_none() {
                return Err(Error::rejected(format!("binding refers to unknown timeline {:?}", b.timeline)));
            }
            if !bound.insert(b.anchor.as_str()) {
                return Err(Error::rejected(format!("anchor {:?} has more than one binding", b.anchor)));
            }
            b.validate_mode()?;
        }
        Ok(())
    }

    /// Parses and validates a JSON document. Errors carry the key path of
    /// the offending field, e.g. `timelines[0].keys[3].sz`.
    pub fn from_json(s: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: AvatarConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::rejected(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("avatar config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::rejected(format!("{}: {e}", path.display())))
    }
}
