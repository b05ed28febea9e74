//! Physiological metrics computed from raw modality streams.

mod blink;
mod coherence;
mod eda;
mod eeg;
mod heart;
pub mod layout;
mod resp;
mod rpeak;
mod types;

pub use blink::{detect_blinks, BlinkDetector};
pub use coherence::{cardiac_coherence, pair_synchrony, CoherenceTracker, COHERENCE_BAND, COHERENCE_WINDOW_S};
pub use eda::{arousal, ArousalTracker};
pub use eeg::{
    meditation, valence, vigilance, workload, EegExtractor, EegNormalizers, HOP_S, MEDITATION_WINDOW_S,
    RATIO_WINDOW_S,
};
pub use heart::{grid_time, heart_rate, BreathResampler, GridSeries, HeartRateTracker, HrResampler, GRID_HZ};
pub use layout::ChannelLayout;
pub use resp::{respiration, Calibration, RespirationTracker, ONBOARDING_S};
pub use rpeak::{detect_r_peaks, RPeakDetector};
pub use types::{BeatEvent, BlinkEvent, BreathPhase, MetricId, MetricValue, Visibility};
