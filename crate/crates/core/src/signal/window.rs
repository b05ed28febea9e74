use std::collections::VecDeque;

use crate::{Error, Result};

/// A block of multichannel samples, stored per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    channels: Vec<Vec<f64>>,
    fs: f64,
    t_start: f64,
}

impl Window {
    pub fn new(channels: Vec<Vec<f64>>, fs: f64, t_start: f64) -> Result<Self> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::contract(format!("window sampling rate {fs} must be positive")));
        }
        let n = channels.first().map_or(0, Vec::len);
        if channels.is_empty() || channels.iter().any(|c| c.len() != n) {
            return Err(Error::contract("window channels must be non-empty and equally long"));
        }
        if n < 2 {
            return Err(Error::contract("window needs at least 2 samples"));
        }
        Ok(Window {
            channels,
            fs,
            t_start,
        })
    }

    pub fn single(samples: Vec<f64>, fs: f64, t_start: f64) -> Result<Self> {
        Window::new(vec![samples], fs, t_start)
    }

    /// Builds a window from row-major frames.
    pub fn from_frames(frames: &[Vec<f64>], fs: f64, t_start: f64) -> Result<Self> {
        let n_ch = frames.first().map_or(0, Vec::len);
        let mut channels = vec![Vec::with_capacity(frames.len()); n_ch];
        for f in frames {
            if f.len() != n_ch {
                return Err(Error::contract("ragged frames"));
            }
            for (c, &x) in channels.iter_mut().zip(f) {
                c.push(x);
            }
        }
        Window::new(channels, fs, t_start)
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.n_samples() as f64 / self.fs
    }

    pub fn duration(&self) -> f64 {
        self.n_samples() as f64 / self.fs
    }

    pub fn n_samples(&self) -> usize {
        self.channels[0].len()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, ch: usize) -> &[f64] {
        &self.channels[ch]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channels_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// A new window holding only `chans`, in that order.
    pub fn select(&self, chans: &[usize]) -> Result<Window> {
        let picked = chans
            .iter()
            .map(|&c| {
                self.channels
                    .get(c)
                    .cloned()
                    .ok_or_else(|| Error::contract(format!("channel {c} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Window::new(picked, self.fs, self.t_start)
    }

    /// Samples `[start, start + len)` of every channel.
    pub fn slice(&self, start: usize, len: usize) -> Result<Window> {
        if start + len > self.n_samples() {
            return Err(Error::contract("slice past the end of the window"));
        }
        Window::new(
            self.channels
                .iter()
                .map(|c| c[start..start + len].to_vec())
                .collect(),
            self.fs,
            self.t_start + start as f64 / self.fs,
        )
    }
}

/// Cuts a recording into windows of `length_s` every `hop_s`. Trailing data
/// that does not fill a window is left out.
pub fn sliding_windows(stream: &Window, length_s: f64, hop_s: f64) -> Result<Vec<Window>> {
    let (len, hop) = window_sizes(stream.fs(), length_s, hop_s)?;
    let n = stream.n_samples();
    if n < len {
        return Ok(Vec::new());
    }
    (0..=(n - len) / hop)
        .map(|k| stream.slice(k * hop, len))
        .collect()
}

fn window_sizes(fs: f64, length_s: f64, hop_s: f64) -> Result<(usize, usize)> {
    if !(length_s > 0.0 && hop_s > 0.0 && hop_s <= length_s) {
        return Err(Error::config(format!(
            "window length {length_s} s / hop {hop_s} s invalid (need 0 < hop <= length)"
        )));
    }
    let len = (length_s * fs).round() as usize;
    let hop = ((hop_s * fs).round() as usize).max(1);
    if len < 2 {
        return Err(Error::config(format!(
            "{length_s} s at {fs} Hz is shorter than 2 samples"
        )));
    }
    Ok((len, hop))
}

/// Streaming counterpart of [`sliding_windows`]: feed frames, collect windows
/// as soon as they are complete.
#[derive(Debug, Clone)]
pub struct SlidingWindower {
    fs: f64,
    len: usize,
    hop: usize,
    n_channels: usize,
    buf: Vec<VecDeque<f64>>,
    t_first: Option<f64>,
}

impl SlidingWindower {
    pub fn new(fs: f64, n_channels: usize, length_s: f64, hop_s: f64) -> Result<Self> {
        let (len, hop) = window_sizes(fs, length_s, hop_s)?;
        if n_channels == 0 {
            return Err(Error::config("windower needs at least one channel"));
        }
        Ok(SlidingWindower {
            fs,
            len,
            hop,
            n_channels,
            buf: vec![VecDeque::with_capacity(len + hop); n_channels],
            t_first: None,
        })
    }

    pub fn window_len(&self) -> usize {
        self.len
    }

    pub fn buffered(&self) -> usize {
        self.buf[0].len()
    }

    /// Adds one frame stamped `t`; returns a window when one completes.
    pub fn push(&mut self, t: f64, frame: &[f64]) -> Option<Window> {
        debug_assert_eq!(frame.len(), self.n_channels);
        if self.buf[0].is_empty() {
            self.t_first = Some(t);
        }
        for (b, &x) in self.buf.iter_mut().zip(frame) {
            b.push_back(x);
        }
        if self.buf[0].len() < self.len {
            return None;
        }
        let t_start = self.t_first.unwrap_or(t);
        let channels: Vec<Vec<f64>> = self
            .buf
            .iter()
            .map(|b| b.iter().take(self.len).copied().collect())
            .collect();
        for b in &mut self.buf {
            b.drain(..self.hop.min(b.len()));
        }
        self.t_first = Some(t_start + self.hop as f64 / self.fs);
        Window::new(channels, self.fs, t_start).ok()
    }

    pub fn reset(&mut self) {
        self.buf.iter_mut().for_each(VecDeque::clear);
        self.t_first = None;
    }
}
