//! Physiological signal processing for tangible avatars.
//!
//! Raw biosignals (ECG, EDA, respiration, EOG, EEG) go in; normalized metric
//! streams, discrete events and per-frame render instructions come out.
//!
//! - [`signal`]: filters, referencing, windows, spectral power, phase locking
//!   and coherence.
//! - [`metrics`]: heart rate, arousal, respiration, blinks, the four EEG
//!   indices, cardiac coherence and inter-user synchrony.
//! - [`synth`]: seeded generators with ground truth, plus CSV recording and
//!   replay.
//! - [`mapper`]: keyframe timelines, metric-to-anchor bindings, render frames.
//! - [`session`]: multi-user orchestration and the relaxation protocol.

mod document;
mod error;
pub mod mapper;
pub mod metrics;
pub mod session;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use tobe_transport as transport;
