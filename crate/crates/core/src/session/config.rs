use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tobe_transport::Modality;

use crate::document;
use crate::mapper::AvatarConfig;
use crate::metrics::{ChannelLayout, MetricId};
use crate::signal::NormalizeMethod;
use crate::synth::{read_recording_meta, Source, SynthSpec};
use crate::{Error, Result};

pub const DEFAULT_RENDER_HZ: f64 = 10.0;

/// Where a user's samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    /// In-process generator; each user gets its own seed.
    Generator(SynthSpec),
    /// A recording file, replayed on the session clock.
    Recording(PathBuf),
    /// A live network stream, resolved by name.
    Stream { name: String, modality: Modality },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub user_id: String,
    pub sources: Vec<SourceConfig>,
    pub metrics: Vec<MetricId>,
    /// Avatar document; a stock avatar is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avatar: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub normalizers: BTreeMap<MetricId, NormalizeMethod>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PhaseId {
    Guided,
    Solo,
    Sync,
}

impl PhaseId {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseId::Guided => "GUIDED",
            PhaseId::Solo => "SOLO",
            PhaseId::Sync => "SYNC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolPhase {
    pub phase_id: PhaseId,
    pub duration_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    /// Duration of one rise (or one fall) of the breathing gauge.
    pub half_cycle_s: f64,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        GaugeConfig { half_cycle_s: 5.0 }
    }
}

/// Guided, solo and synchronised relaxation, five minutes each by default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationProtocol {
    #[serde(default = "default_phases")]
    pub phases: Vec<ProtocolPhase>,
    #[serde(default)]
    pub gauge: GaugeConfig,
}

fn default_phases() -> Vec<ProtocolPhase> {
    [PhaseId::Guided, PhaseId::Solo, PhaseId::Sync]
        .into_iter()
        .map(|phase_id| ProtocolPhase { phase_id, duration_s: 300.0 })
        .collect()
}

impl Default for RelaxationProtocol {
    fn default() -> Self {
        RelaxationProtocol { phases: default_phases(), gauge: GaugeConfig::default() }
    }
}

impl RelaxationProtocol {
    pub fn total_s(&self) -> f64 {
        self.phases.iter().map(|p| p.duration_s).sum()
    }

    /// `(start, end, phase)` for every phase, back to back from t = 0.
    pub fn schedule(&self) -> Vec<(f64, f64, PhaseId)> {
        let mut t = 0.0;
        self.phases
            .iter()
            .map(|p| {
                let start = t;
                t += p.duration_s;
                (start, t, p.phase_id)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::config("protocol needs at least one phase"));
        }
        for p in &self.phases {
            if !(p.duration_s > 0.0 && p.duration_s.is_finite()) {
                return Err(Error::config(format!(
                    "protocol phase {} duration must be positive, got {}",
                    p.phase_id.as_str(),
                    p.duration_s
                )));
            }
        }
        let h = self.gauge.half_cycle_s;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config(format!("gauge half_cycle_s must be positive, got {h}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub users: Vec<UserConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<RelaxationProtocol>,
    /// Session length without a protocol. Defaults to the longest replayed
    /// or generated source; live-only sessions run until stopped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    /// Rate of render frames and gauge updates.
    #[serde(default = "default_render_hz")]
    pub render_hz: f64,
    /// Relative paths in the document resolve against this directory.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_render_hz() -> f64 {
    DEFAULT_RENDER_HZ
}

impl SessionConfig {
    /// Parses and validates a JSON document; relative paths resolve
    /// against the working directory.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SessionConfig = document::parse(text, true)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_yaml(text: &str) -> Result<Self> {
        let cfg: SessionConfig = document::parse(text, false)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// The two users whose heart rates are compared for PAIR_SYNCHRONY.
    pub fn synchrony_pair(&self) -> Option<(usize, usize)> {
        let who: Vec<usize> = (0..self.users.len())
            .filter(|&i| self.users[i].metrics.contains(&MetricId::PairSynchrony))
            .collect();
        match who[..] {
            [a, b] => Some((a, b)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::config("session needs at least one user"));
        }
        if !(self.render_hz > 0.0 && self.render_hz <= 120.0) {
            return Err(Error::config(format!("render_hz must be in (0, 120], got {}", self.render_hz)));
        }
        if let Some(p) = &self.protocol {
            p.validate()?;
            if self.duration_s.is_some() {
                return Err(Error::config("duration_s conflicts with protocol; the protocol sets the length"));
            }
        }
        if let Some(d) = self.duration_s {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::config(format!("duration_s must be positive, got {d}")));
            }
        }
        let mut ids = HashSet::new();
        for u in &self.users {
            if !ids.insert(u.user_id.as_str()) {
                return Err(Error::config(format!("duplicate user id {:?}", u.user_id)));
            }
            self.validate_user(u)?;
        }
        let sync_users = self.users.iter().filter(|u| u.metrics.contains(&MetricId::PairSynchrony)).count();
        if sync_users == 1 || sync_users > 2 {
            return Err(Error::config(format!(
                "PAIR_SYNCHRONY compares exactly two users, {sync_users} enable it"
            )));
        }
        Ok(())
    }

    fn validate_user(&self, u: &UserConfig) -> Result<()> {
        let who = &u.user_id;
        if who.is_empty() {
            return Err(Error::config("user_id must not be empty"));
        }
        let mut modalities = Vec::new();
        for s in &u.sources {
            let (m, labels) = match s {
                SourceConfig::Generator(g) => {
                    g.validate().map_err(|e| Error::config(format!("user {who:?}: generator: {e}")))?;
                    let labels = match g.source()? {
                        Source::Eeg(e) => e.channels.iter().map(|c| c.label.clone()).collect(),
                        _ => vec![],
                    };
                    (g.modality()?, labels)
                }
                SourceConfig::Recording(p) => {
                    let path = self.resolve(p);
                    let meta = read_recording_meta(&path)
                        .map_err(|e| Error::config(format!("user {who:?}: recording {}: {e}", path.display())))?;
                    (meta.modality, meta.channel_labels)
                }
                SourceConfig::Stream { modality, .. } => (*modality, vec![]),
            };
            if m == Modality::Eeg && !labels.is_empty() {
                ChannelLayout::from_labels(&labels).map_err(|e| Error::config(format!("user {who:?}: {e}")))?;
            }
            if modalities.contains(&m) && m != Modality::Metric {
                return Err(Error::config(format!("user {who:?} has two {m} sources")));
            }
            modalities.push(m);
        }
        let mut seen = HashSet::new();
        for &metric in &u.metrics {
            if !seen.insert(metric) {
                return Err(Error::config(format!("user {who:?} enables {metric} twice")));
            }
            for need in metric.required_modalities() {
                if !modalities.contains(need) {
                    return Err(Error::config(format!("user {who:?}: {metric} needs a {need} source")));
                }
            }
        }
        for (metric, method) in &u.normalizers {
            if matches!(metric, MetricId::CardiacCoherence | MetricId::PairSynchrony) {
                return Err(Error::config(format!("user {who:?}: {metric} is already in [0, 1] and takes no normalizer")));
            }
            method.validate().map_err(|e| Error::config(format!("user {who:?}: {metric} normalizer: {e}")))?;
        }
        if let Some(p) = &u.avatar {
            let path = self.resolve(p);
            AvatarConfig::load(&path).map_err(|e| Error::config(format!("user {who:?}: avatar {e}")))?;
        }
        Ok(())
    }
}

/// Reads and validates a session document. `.json` files are parsed as
/// JSON, anything else as YAML. Relative paths inside resolve against the
/// document's directory.
pub fn load_session(path: impl AsRef<Path>) -> Result<SessionConfig> {
    let path = path.as_ref();
    let mut cfg: SessionConfig = document::load(path, "session config")?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.validate()?;
    Ok(cfg)
}
