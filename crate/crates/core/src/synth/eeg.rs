use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use tobe_transport::Modality;

use super::{gaussian, meta, rng, sample_count, Generated, Signal};
use crate::metrics::layout::LABELS;
use crate::{Error, Result};

pub const BLINK_AMPLITUDE_UV: f64 = 80.0;
pub const BLINK_DURATION_S: f64 = 0.2;
const BLINK_CHANNELS: [&str; 2] = ["FP1", "F8"];

/// Band-limited activity. A zero bandwidth gives a pure sine of peak
/// `amplitude_uV`; otherwise noise confined to `center ± bandwidth/2` with
/// the same mean power as that sine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub center_hz: f64,
    #[serde(default)]
    pub bandwidth_hz: f64,
    #[serde(rename = "amplitude_uV")]
    pub amplitude_uv: f64,
}

impl Component {
    pub fn sine(freq_hz: f64, amplitude_uv: f64) -> Self {
        Component {
            center_hz: freq_hz,
            bandwidth_hz: 0.0,
            amplitude_uv,
        }
    }

    pub fn band(low_hz: f64, high_hz: f64, amplitude_uv: f64) -> Self {
        Component {
            center_hz: 0.5 * (low_hz + high_hz),
            bandwidth_hz: high_hz - low_hz,
            amplitude_uv,
        }
    }

    pub fn low_hz(&self) -> f64 {
        self.center_hz - 0.5 * self.bandwidth_hz
    }

    pub fn high_hz(&self) -> f64 {
        self.center_hz + 0.5 * self.bandwidth_hz
    }

    /// Mean power contributed by the component.
    pub fn power(&self) -> f64 {
        0.5 * self.amplitude_uv * self.amplitude_uv
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub label: String,
    #[serde(default)]
    pub components: Vec<Component>,
}

/// Shared activity on `channels`: each gets `c * common + sqrt(1 - c^2) * own`
/// band-limited noise, scaled like a [`Component`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub channels: Vec<String>,
    pub coefficient: f64,
    pub low_hz: f64,
    pub high_hz: f64,
    #[serde(rename = "amplitude_uV")]
    pub amplitude_uv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EegSpec {
    pub fs: f64,
    #[serde(default = "default_channels")]
    pub channels: Vec<ChannelSpec>,
    #[serde(default)]
    pub coupling: Vec<CouplingSpec>,
    /// White Gaussian noise added to every channel.
    #[serde(default, rename = "background_uV")]
    pub background_uv: f64,
    #[serde(default)]
    pub blink_rate_per_min: f64,
    /// No blinks are injected before this time.
    #[serde(default = "default_blink_onset")]
    pub blink_onset_s: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_channels() -> Vec<ChannelSpec> {
    LABELS
        .iter()
        .map(|l| ChannelSpec {
            label: l.to_string(),
            components: Vec::new(),
        })
        .collect()
}

fn default_blink_onset() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct EegTruth {
    /// Per channel, the `(low_hz, high_hz, power)` of each injected band.
    pub band_powers: Vec<Vec<(f64, f64, f64)>>,
    pub coupling: Vec<CouplingSpec>,
    /// Blink pulse centres.
    pub blink_times: Vec<f64>,
}

impl EegSpec {
    /// The standard eight electrodes with no activity.
    pub fn silent(fs: f64) -> Self {
        EegSpec {
            fs,
            channels: default_channels(),
            coupling: Vec::new(),
            background_uv: 0.0,
            blink_rate_per_min: 0.0,
            blink_onset_s: default_blink_onset(),
            seed: 0,
        }
    }

    pub fn channel_mut(&mut self, label: &str) -> Option<&mut ChannelSpec> {
        self.channels.iter_mut().find(|c| c.label.eq_ignore_ascii_case(label))
    }

    /// Adds `component` to every named channel.
    pub fn add(&mut self, labels: &[&str], component: Component) -> &mut Self {
        for l in labels {
            if let Some(c) = self.channel_mut(l) {
                c.components.push(component);
            }
        }
        self
    }

    fn index(&self, label: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.label.eq_ignore_ascii_case(label))
    }

    pub fn validate(&self) -> Result<()> {
        let nyq = self.fs / 2.0;
        if !(self.fs > 0.0) {
            return Err(Error::config(format!("eeg fs must be positive, got {}", self.fs)));
        }
        if self.channels.is_empty() {
            return Err(Error::config("eeg spec needs at least one channel"));
        }
        for ch in &self.channels {
            for c in &ch.components {
                if !(c.amplitude_uv >= 0.0) || !(c.bandwidth_hz >= 0.0) {
                    return Err(Error::config(format!(
                        "component on {} needs amplitude_uV >= 0 and bandwidth_hz >= 0",
                        ch.label
                    )));
                }
                if !(c.low_hz() >= 0.0 && c.high_hz() < nyq) || (c.bandwidth_hz > 0.0 && c.low_hz() <= 0.0) {
                    return Err(Error::config(format!(
                        "component {}..{} Hz on {} exceeds the Nyquist range (0, {nyq})",
                        c.low_hz(),
                        c.high_hz(),
                        ch.label
                    )));
                }
            }
        }
        for cp in &self.coupling {
            if !(0.0..=1.0).contains(&cp.coefficient) {
                return Err(Error::config(format!(
                    "coupling coefficient must be in [0, 1], got {}",
                    cp.coefficient
                )));
            }
            if !(cp.low_hz > 0.0 && cp.low_hz < cp.high_hz && cp.high_hz < nyq) {
                return Err(Error::config(format!(
                    "coupling band {}..{} Hz exceeds the Nyquist range (0, {nyq})",
                    cp.low_hz, cp.high_hz
                )));
            }
            if !(cp.amplitude_uv >= 0.0) {
                return Err(Error::config("coupling amplitude_uV must be >= 0"));
            }
            if let Some(l) = cp.channels.iter().find(|l| self.index(l).is_none()) {
                return Err(Error::config(format!("coupling names unknown channel {l}")));
            }
        }
        if !(self.background_uv >= 0.0) || !(self.blink_rate_per_min >= 0.0) {
            return Err(Error::config("background_uV and blink_rate_per_min must be >= 0"));
        }
        Ok(())
    }
}

/// Unit-RMS noise confined to `[lo, hi]` Hz by zeroing FFT bins.
fn band_noise(rng: &mut ChaCha8Rng, n: usize, fs: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut buf: Vec<Complex64> = (0..n).map(|_| Complex64::new(gaussian(rng), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let df = fs / n as f64;
    for (k, z) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * df;
        if f < lo || f > hi {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|z| z.re).collect();
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        x.iter().map(|v| v / rms).collect()
    } else {
        x
    }
}

fn component_signal(rng: &mut ChaCha8Rng, c: &Component, n: usize, fs: f64) -> Vec<f64> {
    if c.bandwidth_hz == 0.0 {
        let phase = rng.gen::<f64>() * 2.0 * PI;
        (0..n)
            .map(|i| c.amplitude_uv * (2.0 * PI * c.center_hz * i as f64 / fs + phase).sin())
            .collect()
    } else {
        let scale = c.amplitude_uv / 2f64.sqrt();
        band_noise(rng, n, fs, c.low_hz(), c.high_hz())
            .into_iter()
            .map(|v| v * scale)
            .collect()
    }
}

pub fn gen_eeg(spec: &EegSpec, duration_s: f64) -> Result<Generated<EegTruth>> {
    spec.validate()?;
    let n = sample_count(spec.fs, duration_s)?;
    let fs = spec.fs;
    let mut rng = rng(spec.seed);
    let mut channels = vec![vec![0.0; n]; spec.channels.len()];
    let mut band_powers = vec![Vec::new(); spec.channels.len()];

    for (ch, cs) in spec.channels.iter().enumerate() {
        for c in &cs.components {
            let x = component_signal(&mut rng, c, n, fs);
            channels[ch].iter_mut().zip(x).for_each(|(a, b)| *a += b);
            band_powers[ch].push((c.low_hz(), c.high_hz(), c.power()));
        }
    }

    for cp in &spec.coupling {
        let common = band_noise(&mut rng, n, fs, cp.low_hz, cp.high_hz);
        let scale = cp.amplitude_uv / 2f64.sqrt();
        let own_w = (1.0 - cp.coefficient * cp.coefficient).sqrt();
        for l in &cp.channels {
            let ch = spec.index(l).expect("validated");
            let own = band_noise(&mut rng, n, fs, cp.low_hz, cp.high_hz);
            for i in 0..n {
                channels[ch][i] += scale * (cp.coefficient * common[i] + own_w * own[i]);
            }
            band_powers[ch].push((cp.low_hz, cp.high_hz, 0.5 * cp.amplitude_uv * cp.amplitude_uv));
        }
    }

    if spec.background_uv > 0.0 {
        for ch in channels.iter_mut() {
            for v in ch.iter_mut() {
                *v += spec.background_uv * gaussian(&mut rng);
            }
        }
    }

    let mut blink_times = Vec::new();
    if spec.blink_rate_per_min > 0.0 {
        let mean_gap = 60.0 / spec.blink_rate_per_min;
        let mut t = spec.blink_onset_s.max(BLINK_DURATION_S);
        loop {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            // exponential gaps, kept at least 1 s apart
            t += (-mean_gap * u.ln()).max(1.0);
            if t + BLINK_DURATION_S >= duration_s {
                break;
            }
            blink_times.push(t);
        }
        let half = BLINK_DURATION_S / 2.0;
        for l in BLINK_CHANNELS {
            let Some(ch) = spec.index(l) else { continue };
            for &tb in &blink_times {
                let lo = ((tb - half) * fs).ceil().max(0.0) as usize;
                let hi = (((tb + half) * fs).floor() as usize).min(n.saturating_sub(1));
                for i in lo..=hi {
                    let u = (i as f64 / fs - (tb - half)) / BLINK_DURATION_S;
                    channels[ch][i] += BLINK_AMPLITUDE_UV * (PI * u).sin();
                }
            }
        }
    }

    let labels = spec.channels.iter().map(|c| c.label.clone()).collect();
    Ok(Generated {
        meta: meta("synth-eeg", Modality::Eeg, labels, fs, "uV", spec.seed),
        signal: Signal { fs, t0: 0.0, channels },
        truth: EegTruth {
            band_powers,
            coupling: spec.coupling.clone(),
            blink_times,
        },
    })
}
