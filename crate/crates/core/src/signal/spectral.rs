//! Welch spectral estimates: band log-power and magnitude-squared coherence.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{BandSpec, Window};
use crate::{Error, Result};

/// Powers are floored here before taking the log.
pub const POWER_FLOOR: f64 = 1e-12;

/// Segment length for EEG band power, seconds.
pub const POWER_SEGMENT_S: f64 = 2.0;

/// Segmenting for coherence estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceConfig {
    pub segment_s: f64,
    pub hop_s: f64,
    /// FFT length in seconds; segments are zero-padded up to it.
    pub nfft_s: f64,
}

impl Default for CoherenceConfig {
    /// Three-second Hann segments every second, padded to a 4 s FFT
    /// (0.25 Hz bins). Eight segments over a 10 s window.
    fn default() -> Self {
        CoherenceConfig {
            segment_s: 3.0,
            hop_s: 1.0,
            nfft_s: 4.0,
        }
    }
}

pub(crate) fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

struct Welch {
    seg: usize,
    hop: usize,
    nfft: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    /// `1 / (fs * sum(w^2))`, density scaling.
    scale: f64,
    fs: f64,
}

impl Welch {
    fn new(fs: f64, seg: usize, hop: usize, nfft: usize) -> Self {
        let window = hann(seg);
        let wss: f64 = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        Welch {
            seg,
            hop,
            nfft,
            window,
            fft,
            scale: 1.0 / (fs * wss),
            fs,
        }
    }

    fn n_segments(&self, n: usize) -> usize {
        if n < self.seg {
            0
        } else {
            1 + (n - self.seg) / self.hop
        }
    }

    fn n_bins(&self) -> usize {
        self.nfft / 2 + 1
    }

    fn freq(&self, k: usize) -> f64 {
        k as f64 * self.fs / self.nfft as f64
    }

    /// One-sided density weight for bin `k`.
    fn one_sided(&self, k: usize) -> f64 {
        if k == 0 || (self.nfft.is_multiple_of(2) && k == self.nfft / 2) {
            1.0
        } else {
            2.0
        }
    }

    /// Mean-removed, windowed, zero-padded spectrum of one segment.
    fn spectrum(&self, xs: &[f64], buf: &mut Vec<Complex64>) {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        buf.clear();
        buf.extend(
            xs.iter()
                .zip(&self.window)
                .map(|(x, w)| Complex64::new((x - mean) * w, 0.0)),
        );
        buf.resize(self.nfft, Complex64::new(0.0, 0.0));
        self.fft.process(buf);
    }

    fn psd(&self, xs: &[f64]) -> Vec<f64> {
        let n_seg = self.n_segments(xs.len());
        let mut acc = vec![0.0; self.n_bins()];
        let mut buf = Vec::with_capacity(self.nfft);
        for s in 0..n_seg {
            self.spectrum(&xs[s * self.hop..s * self.hop + self.seg], &mut buf);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += buf[k].norm_sqr();
            }
        }
        let norm = self.scale / n_seg as f64;
        acc.iter()
            .enumerate()
            .map(|(k, a)| a * norm * self.one_sided(k))
            .collect()
    }

    /// Per-bin coherence `|Pxy|^2 / (Pxx Pyy)`.
    fn coherence(&self, xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let n_seg = self.n_segments(xs.len());
        let bins = self.n_bins();
        let mut pxx = vec![0.0; bins];
        let mut pyy = vec![0.0; bins];
        let mut pxy = vec![Complex64::new(0.0, 0.0); bins];
        let mut bx = Vec::with_capacity(self.nfft);
        let mut by = Vec::with_capacity(self.nfft);
        for s in 0..n_seg {
            let r = s * self.hop..s * self.hop + self.seg;
            self.spectrum(&xs[r.clone()], &mut bx);
            self.spectrum(&ys[r], &mut by);
            for k in 0..bins {
                pxx[k] += bx[k].norm_sqr();
                pyy[k] += by[k].norm_sqr();
                pxy[k] += bx[k] * by[k].conj();
            }
        }
        (0..bins)
            .map(|k| {
                let den = pxx[k] * pyy[k];
                if den > 0.0 {
                    (pxy[k].norm_sqr() / den).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Natural log of the power inside `band` for each selected channel.
///
/// Power is the integral of a Welch PSD (Hann, 2 s segments, 50% overlap)
/// over the band's bins; windows shorter than one segment use a single
/// segment spanning the window.
pub fn band_log_power(window: &Window, band: BandSpec, channels: &[usize]) -> Result<Vec<f64>> {
    let fs = window.fs();
    band.validate(fs)?;
    let n = window.n_samples();
    if (n as f64) / fs < 2.0 / band.low_hz {
        return Err(Error::contract(format!(
            "window of {:.3} s is shorter than two cycles of {} Hz",
            n as f64 / fs,
            band.low_hz
        )));
    }
    let seg = ((POWER_SEGMENT_S * fs).round() as usize).clamp(2, n);
    let hop = (seg / 2).max(1);
    let welch = Welch::new(fs, seg, hop, seg);
    let df = fs / seg as f64;
    channels
        .iter()
        .map(|&ch| {
            if ch >= window.n_channels() {
                return Err(Error::contract(format!(
                    "channel {ch} out of range for {} channels",
                    window.n_channels()
                )));
            }
            let psd = welch.psd(window.channel(ch));
            let power: f64 = psd
                .iter()
                .enumerate()
                .filter(|(k, _)| band.contains(welch.freq(*k)))
                .map(|(_, p)| p * df)
                .sum();
            Ok(power.max(POWER_FLOOR).ln())
        })
        .collect()
}

/// Magnitude-squared coherence between `xs` and `ys`, maximised over the
/// frequency bins inside `band`. Result in `[0, 1]`.
pub fn msc(xs: &[f64], ys: &[f64], fs: f64, band: BandSpec, config: &CoherenceConfig) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::contract(format!(
            "coherence inputs differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    band.validate(fs)?;
    let seg = (config.segment_s * fs).round() as usize;
    let hop = (config.hop_s * fs).round() as usize;
    let nfft = ((config.nfft_s * fs).round() as usize).max(seg);
    if seg < 2 || hop == 0 {
        return Err(Error::config(format!(
            "coherence segments of {seg} samples every {hop} are too short at {fs} Hz"
        )));
    }
    let welch = Welch::new(fs, seg, hop, nfft);
    let n_seg = welch.n_segments(xs.len());
    if n_seg < 2 {
        return Err(Error::contract(format!(
            "{} samples give {n_seg} Welch segment(s); coherence needs at least 2",
            xs.len()
        )));
    }
    let coh = welch.coherence(xs, ys);
    coh.iter()
        .enumerate()
        .filter(|(k, _)| band.contains(welch.freq(*k)))
        .map(|(_, c)| *c)
        .reduce(f64::max)
        .ok_or_else(|| {
            Error::config(format!(
                "band {}-{} Hz holds no bin at {:.4} Hz resolution",
                band.low_hz,
                band.high_hz,
                fs / nfft as f64
            ))
        })
}

/// [`msc`] on two single-channel windows with the default segmenting.
pub fn msc_windows(x: &Window, y: &Window, band: BandSpec) -> Result<f64> {
    if x.fs() != y.fs() {
        return Err(Error::contract("coherence inputs differ in sampling rate"));
    }
    if x.n_channels() != 1 || y.n_channels() != 1 {
        return Err(Error::contract("coherence expects single-channel windows"));
    }
    msc(x.channel(0), y.channel(0), x.fs(), band, &CoherenceConfig::default())
}
