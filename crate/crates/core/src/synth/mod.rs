//! Seeded signal generators with ground truth, and CSV recordings.

mod ecg;
mod eda;
mod eeg;
mod recording;
mod resp;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use tobe_transport::{Modality, SampleChunk, StreamMeta};

use crate::signal::Window;
use crate::{Error, Result};

pub use ecg::{gen_ecg, BpmPoint, EcgSpec, EcgTruth};
pub use eda::{gen_eda, scr_response, EdaSpec, ScrEvent};
pub use eeg::{gen_eeg, ChannelSpec, Component, CouplingSpec, EegSpec, EegTruth, BLINK_AMPLITUDE_UV, BLINK_DURATION_S};
pub use recording::{
    parse_recording, read_recording, read_recording_meta, replay, write_recording, Recorder, Recording, ReplayIter,
};
pub use resp::{gen_respiration, RespSpec, RespTruth};

/// Uniformly sampled multichannel data starting at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub fs: f64,
    pub t0: f64,
    pub channels: Vec<Vec<f64>>,
}

impl Signal {
    pub fn n_samples(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.fs
    }

    pub fn channel(&self, ch: usize) -> &[f64] {
        &self.channels[ch]
    }

    pub fn frame(&self, i: usize) -> Vec<f64> {
        self.channels.iter().map(|c| c[i]).collect()
    }

    pub fn to_window(&self) -> Result<Window> {
        Window::new(self.channels.clone(), self.fs, self.t0)
    }

    /// Splits the signal into transport chunks of at most `chunk_len` samples.
    pub fn chunks(&self, chunk_len: usize) -> Vec<SampleChunk> {
        let n = self.n_samples();
        let step = chunk_len.max(1);
        (0..n)
            .step_by(step)
            .map(|start| {
                let end = (start + step).min(n);
                let ts: Vec<f64> = (start..end).map(|i| self.time(i)).collect();
                let mut samples = Vec::with_capacity((end - start) * self.n_channels());
                for i in start..end {
                    samples.extend(self.channels.iter().map(|c| c[i] as f32));
                }
                SampleChunk::new(ts, samples, self.n_channels()).expect("generated samples are finite")
            })
            .collect()
    }
}

/// A generator's output: what goes on the wire plus what really happened.
#[derive(Debug, Clone)]
pub struct Generated<T> {
    pub meta: StreamMeta,
    pub signal: Signal,
    pub truth: T,
}

/// The generator a spec file selects.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Ecg(EcgSpec),
    Respiration(RespSpec),
    Eeg(EegSpec),
    Eda(EdaSpec),
}

/// Generator spec as written in YAML/JSON spec files: a name, a duration and
/// exactly one of the `ecg`, `respiration`, `eeg` or `eda` sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ecg: Option<EcgSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub respiration: Option<RespSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eeg: Option<EegSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eda: Option<EdaSpec>,
}

impl SynthSpec {
    pub fn new(name: impl Into<String>, duration_s: f64, source: Source) -> Self {
        let mut s = SynthSpec {
            name: Some(name.into()),
            duration_s,
            ecg: None,
            respiration: None,
            eeg: None,
            eda: None,
        };
        match source {
            Source::Ecg(x) => s.ecg = Some(x),
            Source::Respiration(x) => s.respiration = Some(x),
            Source::Eeg(x) => s.eeg = Some(x),
            Source::Eda(x) => s.eda = Some(x),
        }
        s
    }

    pub fn source(&self) -> Result<Source> {
        let mut found = Vec::new();
        if let Some(x) = &self.ecg {
            found.push(Source::Ecg(x.clone()));
        }
        if let Some(x) = &self.respiration {
            found.push(Source::Respiration(x.clone()));
        }
        if let Some(x) = &self.eeg {
            found.push(Source::Eeg(x.clone()));
        }
        if let Some(x) = &self.eda {
            found.push(Source::Eda(x.clone()));
        }
        match found.len() {
            1 => Ok(found.pop().unwrap()),
            0 => Err(Error::config("spec needs one of ecg, respiration, eeg, eda")),
            _ => Err(Error::config("spec must select exactly one of ecg, respiration, eeg, eda")),
        }
    }

    pub fn modality(&self) -> Result<Modality> {
        Ok(match self.source()? {
            Source::Ecg(_) => Modality::Ecg,
            Source::Respiration(_) => Modality::Resp,
            Source::Eeg(_) => Modality::Eeg,
            Source::Eda(_) => Modality::Eda,
        })
    }

    pub fn name(&self) -> String {
        match (&self.name, self.modality()) {
            (Some(n), _) => n.clone(),
            (None, Ok(m)) => format!("synth-{}", m.as_str().to_lowercase()),
            (None, Err(_)) => "synth".into(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self.source() {
            Ok(Source::Ecg(s)) => s.seed,
            Ok(Source::Respiration(s)) => s.seed,
            Ok(Source::Eeg(s)) => s.seed,
            Ok(Source::Eda(s)) => s.seed,
            Err(_) => 0,
        }
    }

    /// Copy of the spec with its seed replaced (independent instantiation).
    pub fn with_seed(&self, seed: u64) -> SynthSpec {
        let mut s = self.clone();
        if let Some(x) = &mut s.ecg {
            x.seed = seed;
        }
        if let Some(x) = &mut s.respiration {
            x.seed = seed;
        }
        if let Some(x) = &mut s.eeg {
            x.seed = seed;
        }
        if let Some(x) = &mut s.eda {
            x.seed = seed;
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.duration_s;
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::config(format!("duration_s must be positive, got {d}")));
        }
        match self.source()? {
            Source::Ecg(s) => s.validate(),
            Source::Respiration(s) => s.validate(),
            Source::Eeg(s) => s.validate(),
            Source::Eda(s) => s.validate(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::document::parse(text, true)
    }

    pub fn from_yaml(text: &str) -> Result<Self> {
        crate::document::parse(text, false)
    }

    /// Reads and validates a spec file (`.json` as JSON, otherwise YAML).
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let spec: SynthSpec = crate::document::load(path.as_ref(), "generator spec")?;
        spec.validate()?;
        Ok(spec)
    }

    /// Runs the generator, discarding modality-specific ground truth.
    pub fn generate(&self) -> Result<Generated<()>> {
        fn strip<T>(g: Generated<T>, name: String) -> Generated<()> {
            let mut meta = g.meta;
            meta.source_id = meta.source_id.replacen(&meta.name, &name, 1);
            meta.name = name;
            Generated {
                meta,
                signal: g.signal,
                truth: (),
            }
        }
        self.validate()?;
        let (name, d) = (self.name(), self.duration_s);
        Ok(match self.source()? {
            Source::Ecg(s) => strip(gen_ecg(&s, d)?, name),
            Source::Respiration(s) => strip(gen_respiration(&s, d)?, name),
            Source::Eeg(s) => strip(gen_eeg(&s, d)?, name),
            Source::Eda(s) => strip(gen_eda(&s, d)?, name),
        })
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub(crate) fn sample_count(fs: f64, duration_s: f64) -> Result<usize> {
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(Error::config(format!("fs must be positive, got {fs}")));
    }
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::config(format!("duration_s must be positive, got {duration_s}")));
    }
    Ok((duration_s * fs).round() as usize)
}

pub(crate) fn meta(name: &str, modality: Modality, labels: Vec<String>, fs: f64, unit: &str, seed: u64) -> StreamMeta {
    StreamMeta::new(name, modality, labels, fs, unit, format!("synth-{name}-{seed}"))
}
