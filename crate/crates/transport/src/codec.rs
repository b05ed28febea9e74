//! TCP data framing.
//!
//! ```text
//! chunk: 0x5C | u32 n_samples | u32 n_channels | f64 ts[n_samples] | f32 x[n_samples * n_channels]
//! ping:  0x5D | u64 nonce
//! pong:  0x5E | u64 nonce | f64 sender_clock
//! ```
//!
//! All integers and floats are little-endian; samples are row-major.

use crate::{Error, Result, SampleChunk};

pub const CHUNK_MAGIC: u8 = 0x5C;
pub const PING_MAGIC: u8 = 0x5D;
pub const PONG_MAGIC: u8 = 0x5E;

/// Upper bound on channels per chunk accepted by the decoder.
pub const MAX_CHANNELS: u32 = 4096;
/// Upper bound on `n_samples * n_channels` accepted by the decoder.
pub const MAX_VALUES: u64 = 1 << 24;

const CHUNK_HEADER: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Chunk(SampleChunk),
    Ping { nonce: u64 },
    Pong { nonce: u64, sender_clock: f64 },
}

pub fn encode_chunk(chunk: &SampleChunk, out: &mut Vec<u8>) {
    out.reserve(CHUNK_HEADER + chunk.n_samples() * 8 + chunk.samples().len() * 4);
    out.push(CHUNK_MAGIC);
    out.extend_from_slice(&(chunk.n_samples() as u32).to_le_bytes());
    out.extend_from_slice(&(chunk.n_channels() as u32).to_le_bytes());
    for t in chunk.timestamps() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for x in chunk.samples() {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub fn encode(frame: &Frame, out: &mut Vec<u8>) {
    match frame {
        Frame::Chunk(chunk) => encode_chunk(chunk, out),
        Frame::Ping { nonce } => {
            out.push(PING_MAGIC);
            out.extend_from_slice(&nonce.to_le_bytes());
        }
        Frame::Pong {
            nonce,
            sender_clock,
        } => {
            out.push(PONG_MAGIC);
            out.extend_from_slice(&nonce.to_le_bytes());
            out.extend_from_slice(&sender_clock.to_le_bytes());
        }
    }
}

pub fn encode_to_vec(frame: &Frame) -> Vec<u8> {
    let mut out = Vec::new();
    encode(frame, &mut out);
    out
}

/// Incremental decoder over a byte stream.
///
/// Feed bytes with [`Decoder::extend`] and drain frames with
/// [`Decoder::next_frame`]. A framing error is terminal: the stream has lost
/// sync and the connection should be dropped.
#[derive(Debug, Default)]
pub struct Decoder {
    buf: Vec<u8>,
    pos: usize,
}

impl Decoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, bytes: &[u8]) {
        if self.pos > 0 && self.pos >= self.buf.len() / 2 {
            self.buf.drain(..self.pos);
            self.pos = 0;
        }
        self.buf.extend_from_slice(bytes);
    }

    pub fn buffered(&self) -> usize {
        self.buf.len() - self.pos
    }

    /// Returns the next complete frame, `Ok(None)` if more bytes are needed.
    pub fn next_frame(&mut self) -> Result<Option<Frame>> {
        let avail = &self.buf[self.pos..];
        let Some(&magic) = avail.first() else {
            return Ok(None);
        };
        match magic {
            PING_MAGIC => {
                if avail.len() < 9 {
                    return Ok(None);
                }
                let nonce = u64::from_le_bytes(avail[1..9].try_into().unwrap());
                self.pos += 9;
                Ok(Some(Frame::Ping { nonce }))
            }
            PONG_MAGIC => {
                if avail.len() < 17 {
                    return Ok(None);
                }
                let nonce = u64::from_le_bytes(avail[1..9].try_into().unwrap());
                let sender_clock = f64::from_le_bytes(avail[9..17].try_into().unwrap());
                self.pos += 17;
                Ok(Some(Frame::Pong {
                    nonce,
                    sender_clock,
                }))
            }
            CHUNK_MAGIC => {
                if avail.len() < CHUNK_HEADER {
                    return Ok(None);
                }
                let n_samples = u32::from_le_bytes(avail[1..5].try_into().unwrap());
                let n_channels = u32::from_le_bytes(avail[5..9].try_into().unwrap());
                if n_channels == 0 || n_channels > MAX_CHANNELS {
                    return Err(Error::Framing(format!("bad channel count {n_channels}")));
                }
                let values = u64::from(n_samples) * u64::from(n_channels);
                if values > MAX_VALUES {
                    return Err(Error::Framing(format!(
                        "chunk of {n_samples}x{n_channels} exceeds size limit"
                    )));
                }
                let (n, c) = (n_samples as usize, n_channels as usize);
                let total = CHUNK_HEADER + n * 8 + n * c * 4;
                if avail.len() < total {
                    return Ok(None);
                }
                let ts_bytes = &avail[CHUNK_HEADER..CHUNK_HEADER + n * 8];
                let timestamps: Vec<f64> = ts_bytes
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                    .collect();
                let samples: Vec<f32> = avail[CHUNK_HEADER + n * 8..total]
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                    .collect();
                let chunk = SampleChunk::new(timestamps, samples, c).map_err(|e| match e {
                    Error::Contract(msg) => Error::Framing(msg),
                    other => other,
                })?;
                self.pos += total;
                Ok(Some(Frame::Chunk(chunk)))
            }
            other => Err(Error::Framing(format!("unknown frame type 0x{other:02X}"))),
        }
    }
}

/// Decodes exactly one frame occupying all of `bytes`.
pub fn decode_exact(bytes: &[u8]) -> Result<Frame> {
    let mut dec = Decoder::new();
    dec.extend(bytes);
    match dec.next_frame()? {
        Some(frame) if dec.buffered() == 0 => Ok(frame),
        Some(_) => Err(Error::Framing("trailing bytes after frame".into())),
        None => Err(Error::Framing("truncated frame".into())),
    }
}
