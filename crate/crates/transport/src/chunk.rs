use crate::{Error, Result};

/// A timestamped block of multichannel samples, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleChunk {
    timestamps: Vec<f64>,
    samples: Vec<f32>,
    n_channels: usize,
}

impl SampleChunk {
    /// Builds a chunk, checking shape, timestamp ordering and finiteness.
    pub fn new(timestamps: Vec<f64>, samples: Vec<f32>, n_channels: usize) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::Contract("chunk must have at least one channel".into()));
        }
        if samples.len() != timestamps.len() * n_channels {
            return Err(Error::Contract(format!(
                "{} samples do not fill {} rows of {} channels",
                samples.len(),
                timestamps.len(),
                n_channels
            )));
        }
        if let Some(t) = timestamps.iter().find(|t| !t.is_finite()) {
            return Err(Error::Contract(format!("non-finite timestamp {t}")));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Contract(format!(
                "timestamps not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::Contract(format!("non-finite sample {x}")));
        }
        Ok(SampleChunk {
            timestamps,
            samples,
            n_channels,
        })
    }

    /// Builds a chunk from per-row vectors.
    pub fn from_rows(timestamps: Vec<f64>, rows: &[Vec<f32>]) -> Result<Self> {
        let n_channels = rows.first().map_or(0, Vec::len);
        if rows.len() != timestamps.len() {
            return Err(Error::Contract(format!(
                "{} rows for {} timestamps",
                rows.len(),
                timestamps.len()
            )));
        }
        if rows.iter().any(|r| r.len() != n_channels) {
            return Err(Error::Contract("ragged rows".into()));
        }
        SampleChunk::new(timestamps, rows.concat(), n_channels)
    }

    pub fn n_samples(&self) -> usize {
        self.timestamps.len()
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    /// Row-major samples, `n_samples * n_channels` long.
    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.samples[i * self.n_channels..(i + 1) * self.n_channels]
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f32])> + '_ {
        self.timestamps
            .iter()
            .copied()
            .zip(self.samples.chunks_exact(self.n_channels))
    }

    pub fn channel(&self, ch: usize) -> impl Iterator<Item = f32> + '_ {
        self.samples
            .iter()
            .skip(ch)
            .step_by(self.n_channels)
            .copied()
    }

    pub fn first_timestamp(&self) -> Option<f64> {
        self.timestamps.first().copied()
    }

    pub fn last_timestamp(&self) -> Option<f64> {
        self.timestamps.last().copied()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f32>, usize) {
        (self.timestamps, self.samples, self.n_channels)
    }
}
