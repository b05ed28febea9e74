use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tobe_transport::Modality;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MetricId {
    HeartRate,
    Arousal,
    Respiration,
    Vigilance,
    Workload,
    Meditation,
    Valence,
    CardiacCoherence,
    PairSynchrony,
}

/// Who can perceive the signal a metric reflects: 1 visible to others
/// (blinks), 2 perceived by oneself (heart, breath), 3 hidden (EEG, EDA,
/// derived indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Visibility {
    Public = 1,
    Personal = 2,
    Hidden = 3,
}

impl From<Visibility> for u8 {
    fn from(v: Visibility) -> u8 {
        v as u8
    }
}

impl TryFrom<u8> for Visibility {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Visibility::Public),
            2 => Ok(Visibility::Personal),
            3 => Ok(Visibility::Hidden),
            _ => Err(format!("visibility level must be 1, 2 or 3, got {v}")),
        }
    }
}

impl MetricId {
    pub const ALL: [MetricId; 9] = [
        MetricId::HeartRate,
        MetricId::Arousal,
        MetricId::Respiration,
        MetricId::Vigilance,
        MetricId::Workload,
        MetricId::Meditation,
        MetricId::Valence,
        MetricId::CardiacCoherence,
        MetricId::PairSynchrony,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::HeartRate => "HEART_RATE",
            MetricId::Arousal => "AROUSAL",
            MetricId::Respiration => "RESPIRATION",
            MetricId::Vigilance => "VIGILANCE",
            MetricId::Workload => "WORKLOAD",
            MetricId::Meditation => "MEDITATION",
            MetricId::Valence => "VALENCE",
            MetricId::CardiacCoherence => "CARDIAC_COHERENCE",
            MetricId::PairSynchrony => "PAIR_SYNCHRONY",
        }
    }

    pub fn visibility(self) -> Visibility {
        match self {
            MetricId::HeartRate | MetricId::Respiration => Visibility::Personal,
            _ => Visibility::Hidden,
        }
    }

    /// Input streams a user must provide for this metric.
    pub fn required_modalities(self) -> &'static [Modality] {
        match self {
            MetricId::HeartRate | MetricId::PairSynchrony => &[Modality::Ecg],
            MetricId::Arousal => &[Modality::Eda],
            MetricId::Respiration => &[Modality::Resp],
            MetricId::Vigilance | MetricId::Workload | MetricId::Meditation | MetricId::Valence => &[Modality::Eeg],
            MetricId::CardiacCoherence => &[Modality::Ecg, Modality::Resp],
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub metric_id: MetricId,
    pub t: f64,
    pub raw: f64,
    pub normalized: f64,
    pub visibility_level: Visibility,
}

impl MetricValue {
    pub fn new(metric_id: MetricId, t: f64, raw: f64, normalized: f64) -> Self {
        MetricValue {
            metric_id,
            t,
            raw,
            normalized: normalized.clamp(0.0, 1.0),
            visibility_level: metric_id.visibility(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatEvent {
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlinkEvent {
    pub t: f64,
    pub peak_amplitude: f64,
}

impl BlinkEvent {
    pub const VISIBILITY: Visibility = Visibility::Public;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreathPhase {
    pub t: f64,
    /// In `[0, 1)`, 0 at inhale onset.
    pub phase: f64,
    pub inflation: f64,
    /// Set while no breathing cycle has been observed recently; `phase` is
    /// then held at its last value.
    pub stale: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_names() {
        let v = MetricValue::new(MetricId::CardiacCoherence, 1.0, 0.5, 0.5);
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"CARDIAC_COHERENCE\""));
        assert!(s.contains("\"visibility_level\":3"));
        assert_eq!(serde_json::from_str::<MetricValue>(&s).unwrap(), v);
        assert_eq!("heart_rate".parse::<MetricId>().unwrap(), MetricId::HeartRate);
    }

    #[test]
    fn visibility_levels() {
        assert_eq!(MetricId::HeartRate.visibility() as u8, 2);
        assert_eq!(MetricId::Respiration.visibility() as u8, 2);
        assert_eq!(MetricId::Vigilance.visibility() as u8, 3);
        assert_eq!(BlinkEvent::VISIBILITY as u8, 1);
    }
}
