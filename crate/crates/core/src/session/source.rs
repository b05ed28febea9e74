use std::time::Duration;

use tobe_transport::{resolve_streams, Inlet, Modality, SampleChunk, StreamFilter, StreamMeta};

use crate::synth::{Generated, Recording};
use crate::{Error, Result};

/// What a source reported on its latest poll.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceState {
    Live,
    /// A bounded source delivered everything it had.
    Ended,
    Failed(String),
}

/// A user's sample feed, timestamped on the session clock (t = 0 at start).
pub trait SampleSource: Send {
    fn meta(&self) -> &StreamMeta;

    /// Appends every sample with session time <= `until` not yet delivered.
    fn poll(&mut self, until: f64, out: &mut Vec<SampleChunk>) -> SourceState;

    /// Time of the last sample, for bounded sources.
    fn end_time(&self) -> Option<f64> {
        None
    }

    /// Called once when the session clock starts, with the local transport
    /// clock reading that corresponds to session time 0.
    fn start(&mut self, _origin_local: f64) {}
}

/// A source held in memory: generator output or a loaded recording.
pub struct MemorySource {
    meta: StreamMeta,
    timestamps: Vec<f64>,
    samples: Vec<f32>,
    pos: usize,
}

impl MemorySource {
    /// `timestamps` must already be on the session clock.
    pub fn new(meta: StreamMeta, timestamps: Vec<f64>, samples: Vec<f32>) -> Result<Self> {
        let n = meta.channel_count();
        if samples.len() != timestamps.len() * n {
            return Err(Error::contract("sample count does not match timestamps × channels"));
        }
        if timestamps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::contract("timestamps must be strictly increasing"));
        }
        Ok(MemorySource { meta, timestamps, samples, pos: 0 })
    }

    pub fn from_generated(g: Generated<()>) -> Result<Self> {
        let sig = &g.signal;
        let n = sig.n_samples();
        let timestamps = (0..n).map(|i| sig.time(i)).collect();
        let mut samples = Vec::with_capacity(n * sig.n_channels());
        for i in 0..n {
            samples.extend(sig.channels.iter().map(|c| c[i] as f32));
        }
        MemorySource::new(g.meta, timestamps, samples)
    }

    /// Replays a recording with its first sample at session time 0.
    pub fn from_recording(rec: Recording) -> Result<Self> {
        let t0 = rec.timestamps.first().copied().unwrap_or(0.0);
        let timestamps = rec.timestamps.iter().map(|t| t - t0).collect();
        MemorySource::new(rec.meta, timestamps, rec.samples)
    }

    fn grace(&self) -> f64 {
        // a bounded source counts as ended once it has been silent this long
        (2.0 / self.meta.nominal_rate.max(1e-3)).max(1.0)
    }
}

impl SampleSource for MemorySource {
    fn meta(&self) -> &StreamMeta {
        &self.meta
    }

    fn poll(&mut self, until: f64, out: &mut Vec<SampleChunk>) -> SourceState {
        let end = self.pos + self.timestamps[self.pos..].partition_point(|&t| t <= until);
        if end > self.pos {
            let n = self.meta.channel_count();
            let chunk = SampleChunk::new(
                self.timestamps[self.pos..end].to_vec(),
                self.samples[self.pos * n..end * n].to_vec(),
                n,
            );
            match chunk {
                Ok(c) => out.push(c),
                Err(e) => return SourceState::Failed(e.to_string()),
            }
            self.pos = end;
        }
        match self.end_time() {
            Some(last) if self.pos == self.timestamps.len() && until >= last + self.grace() => SourceState::Ended,
            None => SourceState::Ended,
            _ => SourceState::Live,
        }
    }

    fn end_time(&self) -> Option<f64> {
        self.timestamps.last().copied()
    }
}

/// A live network stream. Sender timestamps are moved onto the session
/// clock with a measured clock offset.
pub struct StreamSource {
    inlet: Inlet,
    offset_s: f64,
    origin: f64,
    down_since: Option<f64>,
    last_retry: f64,
}

impl StreamSource {
    /// Resolves the stream `name` of the given modality and connects to it.
    pub fn open(name: &str, modality: Modality, timeout: Duration) -> Result<Self> {
        let filter = StreamFilter { modality: Some(modality), name: Some(name.to_string()), source_id: None };
        let found = resolve_streams(&filter, timeout)?;
        let info = found
            .first()
            .ok_or_else(|| Error::config(format!("no {modality} stream named {name:?} found")))?;
        let mut inlet = Inlet::open(info)?;
        let offset_s = inlet.measure_clock_offset(Duration::from_secs(1)).map(|o| o.offset_s).unwrap_or(0.0);
        Ok(StreamSource { inlet, offset_s, origin: tobe_transport::local_clock(), down_since: None, last_retry: 0.0 })
    }
}

impl SampleSource for StreamSource {
    fn meta(&self) -> &StreamMeta {
        self.inlet.meta()
    }

    fn start(&mut self, origin_local: f64) {
        self.origin = origin_local;
    }

    fn poll(&mut self, until: f64, out: &mut Vec<SampleChunk>) -> SourceState {
        if let Some(since) = self.down_since {
            if until - self.last_retry < 1.0 {
                return SourceState::Failed(format!("disconnected at {since:.1} s"));
            }
            self.last_retry = until;
            if self.inlet.reconnect().is_err() {
                return SourceState::Failed(format!("disconnected at {since:.1} s"));
            }
            self.down_since = None;
        }
        loop {
            match self.inlet.pull_chunk(Duration::ZERO) {
                Ok(Some(chunk)) => {
                    let shift = self.offset_s - self.origin;
                    let (ts, samples, n) = chunk.into_parts();
                    let ts = ts.into_iter().map(|t| t + shift).collect();
                    if let Ok(c) = SampleChunk::new(ts, samples, n) {
                        out.push(c);
                    }
                }
                Ok(None) => return SourceState::Live,
                Err(e) => {
                    self.down_since = Some(until);
                    self.last_retry = until;
                    return SourceState::Failed(e.to_string());
                }
            }
        }
    }
}
