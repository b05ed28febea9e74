use std::io::{Read, Write};
use std::net::{Shutdown, TcpStream};
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{unbounded, Receiver, RecvTimeoutError};

use crate::codec::{self, Decoder, Frame};
use crate::{local_clock, ClockOffset, Error, Result, SampleChunk, StreamInfo, StreamMeta};

const CONNECT_TIMEOUT: Duration = Duration::from_secs(2);

enum Event {
    Chunk(SampleChunk),
    Closed(String),
}

struct Link {
    stream: TcpStream,
    events: Receiver<Event>,
    pongs: Receiver<(u64, f64, f64)>,
}

/// Subscribing end of a stream.
///
/// Chunks arrive in push order while the connection lasts. After a
/// disconnection, [`Inlet::reconnect`] resumes delivery; chunks pushed while
/// disconnected are not replayed.
pub struct Inlet {
    info: StreamInfo,
    link: Link,
    disconnected: Option<String>,
    next_nonce: u64,
    last_offset: Option<ClockOffset>,
}

impl Inlet {
    pub fn open(info: &StreamInfo) -> Result<Inlet> {
        let link = connect(info)?;
        Ok(Inlet {
            info: info.clone(),
            link,
            disconnected: None,
            next_nonce: 1,
            last_offset: None,
        })
    }

    pub fn meta(&self) -> &StreamMeta {
        &self.info.meta
    }

    pub fn info(&self) -> &StreamInfo {
        &self.info
    }

    pub fn is_connected(&self) -> bool {
        self.disconnected.is_none()
    }

    /// Waits up to `max_wait` for the next chunk.
    ///
    /// `Ok(None)` means nothing arrived in time; [`Error::Disconnected`] means
    /// the outlet went away and every chunk received before that has already
    /// been returned.
    pub fn pull_chunk(&mut self, max_wait: Duration) -> Result<Option<SampleChunk>> {
        if let Some(reason) = &self.disconnected {
            return match self.link.events.try_recv() {
                Ok(Event::Chunk(c)) => Ok(Some(c)),
                _ => Err(Error::Disconnected(reason.clone())),
            };
        }
        match self.link.events.recv_timeout(max_wait) {
            Ok(Event::Chunk(c)) => Ok(Some(c)),
            Ok(Event::Closed(reason)) => {
                self.disconnected = Some(reason.clone());
                Err(Error::Disconnected(reason))
            }
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => {
                let reason = "reader stopped".to_string();
                self.disconnected = Some(reason.clone());
                Err(Error::Disconnected(reason))
            }
        }
    }

    /// Ping/pong midpoint estimate of `receiver_clock - sender_clock`.
    ///
    /// On failure the previous estimate stays available through
    /// [`Inlet::last_offset`].
    pub fn measure_clock_offset(&mut self, timeout: Duration) -> Result<ClockOffset> {
        if let Some(reason) = &self.disconnected {
            return Err(Error::Disconnected(reason.clone()));
        }
        let nonce = self.next_nonce;
        self.next_nonce += 1;
        let t_send = local_clock();
        let ping = codec::encode_to_vec(&Frame::Ping { nonce });
        self.link
            .stream
            .write_all(&ping)
            .map_err(|e| Error::Disconnected(e.to_string()))?;
        let deadline = Instant::now() + timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match self.link.pongs.recv_timeout(remaining) {
                Ok((n, sender_clock, t_recv)) if n == nonce => {
                    let off = ClockOffset::from_exchange(t_send, sender_clock, t_recv);
                    self.last_offset = Some(off);
                    return Ok(off);
                }
                Ok(_) => continue,
                Err(RecvTimeoutError::Timeout) => {
                    return Err(Error::Timeout(timeout.as_secs_f64()))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(Error::Disconnected("reader stopped".into()))
                }
            }
        }
    }

    pub fn last_offset(&self) -> Option<ClockOffset> {
        self.last_offset
    }

    /// Opens a fresh connection to the same outlet.
    pub fn reconnect(&mut self) -> Result<()> {
        let _ = self.link.stream.shutdown(Shutdown::Both);
        self.link = connect(&self.info)?;
        self.disconnected = None;
        Ok(())
    }
}

impl Drop for Inlet {
    fn drop(&mut self) {
        let _ = self.link.stream.shutdown(Shutdown::Both);
    }
}

fn connect(info: &StreamInfo) -> Result<Link> {
    let stream = TcpStream::connect_timeout(&info.endpoint, CONNECT_TIMEOUT)
        .map_err(|e| Error::Disconnected(format!("connect to {}: {e}", info.endpoint)))?;
    stream.set_nodelay(true)?;
    let mut reader = stream.try_clone()?;
    let (ev_tx, events) = unbounded();
    let (pong_tx, pongs) = unbounded();
    let n_channels = info.meta.channel_count();
    thread::Builder::new()
        .name(format!("inlet-{}", info.meta.name))
        .spawn(move || {
            let mut dec = Decoder::new();
            let mut buf = vec![0u8; 64 * 1024];
            let reason = 'outer: loop {
                let n = match reader.read(&mut buf) {
                    Ok(0) => break "outlet closed the connection".to_string(),
                    Ok(n) => n,
                    Err(e) => break e.to_string(),
                };
                dec.extend(&buf[..n]);
                loop {
                    match dec.next_frame() {
                        Ok(Some(Frame::Chunk(c))) => {
                            if c.n_channels() != n_channels {
                                break 'outer format!(
                                    "chunk with {} channels on a {}-channel stream",
                                    c.n_channels(),
                                    n_channels
                                );
                            }
                            if ev_tx.send(Event::Chunk(c)).is_err() {
                                return;
                            }
                        }
                        Ok(Some(Frame::Pong {
                            nonce,
                            sender_clock,
                        })) => {
                            let _ = pong_tx.send((nonce, sender_clock, local_clock()));
                        }
                        Ok(Some(Frame::Ping { .. })) => {}
                        Ok(None) => break,
                        Err(e) => break 'outer e.to_string(),
                    }
                }
            };
            let _ = ev_tx.send(Event::Closed(reason));
        })?;
    Ok(Link {
        stream,
        events,
        pongs,
    })
}
