use std::collections::{HashSet, VecDeque};
use std::io::{ErrorKind, Read, Write};
use std::net::{IpAddr, Ipv4Addr, Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, LazyLock, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use log::{debug, warn};

use crate::codec::{self, Decoder, Frame};
use crate::discovery::{self, encode_beacon};
use crate::{local_clock, Error, Result, SampleChunk, StreamMeta};

static ADVERTISED: LazyLock<Mutex<HashSet<String>>> = LazyLock::new(Default::default);

const POLL: Duration = Duration::from_millis(10);

#[derive(Debug, Clone)]
pub struct OutletConfig {
    /// TCP port to listen on; `None` picks an ephemeral port.
    pub port_hint: Option<u16>,
    pub discovery_port: u16,
    pub beacon_interval: Duration,
    /// Chunks queued per connection (and while nobody is connected).
    pub queue_capacity: usize,
    /// Host written into beacons; unspecified lets resolvers use the
    /// beacon's source address.
    pub advertise_host: IpAddr,
    /// Added to the local clock when answering pings. Only useful for
    /// simulating a sender with a skewed clock.
    pub clock_skew_s: f64,
}

impl Default for OutletConfig {
    fn default() -> Self {
        OutletConfig {
            port_hint: None,
            discovery_port: discovery::discovery_port(),
            beacon_interval: Duration::from_secs(1),
            queue_capacity: 1024,
            advertise_host: IpAddr::V4(Ipv4Addr::UNSPECIFIED),
            clock_skew_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutletStats {
    pub pushed: u64,
    /// Chunks discarded by drop-oldest overflow, summed over queues.
    pub dropped: u64,
    pub connections: usize,
}

type Bytes = Arc<[u8]>;

struct ConnQueue {
    state: Mutex<ConnState>,
    ready: Condvar,
}

struct ConnState {
    frames: VecDeque<Bytes>,
    closed: bool,
}

impl ConnQueue {
    fn new(frames: VecDeque<Bytes>) -> Self {
        ConnQueue {
            state: Mutex::new(ConnState {
                frames,
                closed: false,
            }),
            ready: Condvar::new(),
        }
    }

    /// Returns the number of frames dropped to make room.
    fn push(&self, frame: Bytes, capacity: usize) -> u64 {
        let mut st = self.state.lock().unwrap();
        let mut dropped = 0;
        while st.frames.len() >= capacity {
            st.frames.pop_front();
            dropped += 1;
        }
        st.frames.push_back(frame);
        self.ready.notify_one();
        dropped
    }

    fn push_front(&self, frame: Bytes) {
        let mut st = self.state.lock().unwrap();
        st.frames.push_front(frame);
        self.ready.notify_one();
    }

    fn close(&self) {
        self.state.lock().unwrap().closed = true;
        self.ready.notify_all();
    }

    fn is_closed(&self) -> bool {
        self.state.lock().unwrap().closed
    }

    fn pop(&self) -> Option<Bytes> {
        let mut st = self.state.lock().unwrap();
        loop {
            if st.closed {
                return None;
            }
            if let Some(f) = st.frames.pop_front() {
                return Some(f);
            }
            st = self.ready.wait(st).unwrap();
        }
    }
}

struct Connection {
    queue: Arc<ConnQueue>,
    stream: TcpStream,
}

struct Shared {
    conns: Mutex<Vec<Connection>>,
    pending: Mutex<VecDeque<Bytes>>,
    capacity: usize,
    pushed: AtomicU64,
    dropped: AtomicU64,
    shutdown: AtomicBool,
    clock_skew_s: f64,
}

/// Publishing end of a stream.
///
/// Dropping the outlet stops advertising, closes every inlet connection and
/// releases its `source_id`.
pub struct Outlet {
    meta: StreamMeta,
    local_addr: SocketAddr,
    shared: Arc<Shared>,
    workers: Vec<JoinHandle<()>>,
}

impl Outlet {
    pub fn open(meta: StreamMeta) -> Result<Outlet> {
        Outlet::open_with(meta, OutletConfig::default())
    }

    pub fn open_with(meta: StreamMeta, config: OutletConfig) -> Result<Outlet> {
        meta.validate()?;
        if config.queue_capacity == 0 {
            return Err(Error::Config("queue capacity must be positive".into()));
        }
        if !ADVERTISED.lock().unwrap().insert(meta.source_id.clone()) {
            return Err(Error::DuplicateSource(meta.source_id.clone()));
        }
        match Outlet::start(meta.clone(), &config) {
            Ok(outlet) => Ok(outlet),
            Err(e) => {
                ADVERTISED.lock().unwrap().remove(&meta.source_id);
                Err(e)
            }
        }
    }

    fn start(meta: StreamMeta, config: &OutletConfig) -> Result<Outlet> {
        let listener = TcpListener::bind((Ipv4Addr::UNSPECIFIED, config.port_hint.unwrap_or(0)))
            .map_err(|e| {
                Error::Config(format!(
                    "cannot listen on TCP port {}: {e}",
                    config.port_hint.unwrap_or(0)
                ))
            })?;
        listener.set_nonblocking(true)?;
        let local_addr = listener.local_addr()?;
        let beacon_socket = discovery::bind_sender()?;
        let beacon = encode_beacon(&meta, config.advertise_host, local_addr.port());

        let shared = Arc::new(Shared {
            conns: Mutex::new(Vec::new()),
            pending: Mutex::new(VecDeque::new()),
            capacity: config.queue_capacity,
            pushed: AtomicU64::new(0),
            dropped: AtomicU64::new(0),
            shutdown: AtomicBool::new(false),
            clock_skew_s: config.clock_skew_s,
        });

        let accept = {
            let shared = Arc::clone(&shared);
            thread::Builder::new()
                .name(format!("outlet-accept-{}", meta.name))
                .spawn(move || accept_loop(listener, shared))?
        };
        let beacons = {
            let shared = Arc::clone(&shared);
            let interval = config.beacon_interval;
            let port = config.discovery_port;
            thread::Builder::new()
                .name(format!("outlet-beacon-{}", meta.name))
                .spawn(move || {
                    while !shared.shutdown.load(Ordering::Relaxed) {
                        if let Err(e) = discovery::send_beacon(&beacon_socket, &beacon, port) {
                            warn!("beacon send failed: {e}");
                        }
                        let mut slept = Duration::ZERO;
                        while slept < interval && !shared.shutdown.load(Ordering::Relaxed) {
                            thread::sleep(POLL);
                            slept += POLL;
                        }
                    }
                })?
        };

        Ok(Outlet {
            meta,
            local_addr,
            shared,
            workers: vec![accept, beacons],
        })
    }

    pub fn meta(&self) -> &StreamMeta {
        &self.meta
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Endpoint reachable from this host.
    pub fn loopback_endpoint(&self) -> SocketAddr {
        SocketAddr::new(IpAddr::V4(Ipv4Addr::LOCALHOST), self.local_addr.port())
    }

    /// Enqueues a chunk for every connected inlet. Never blocks: queues that
    /// are full drop their oldest chunk, counted in [`OutletStats::dropped`].
    pub fn push_chunk(&self, chunk: &SampleChunk) -> Result<()> {
        if chunk.n_channels() != self.meta.channel_count() {
            return Err(Error::Contract(format!(
                "chunk has {} channels, stream {:?} has {}",
                chunk.n_channels(),
                self.meta.name,
                self.meta.channel_count()
            )));
        }
        let mut bytes = Vec::new();
        codec::encode_chunk(chunk, &mut bytes);
        let frame: Bytes = bytes.into();
        self.shared.pushed.fetch_add(1, Ordering::Relaxed);

        let mut conns = self.shared.conns.lock().unwrap();
        conns.retain(|c| !c.queue.is_closed());
        if conns.is_empty() {
            let mut pending = self.shared.pending.lock().unwrap();
            if pending.len() >= self.shared.capacity {
                pending.pop_front();
                self.shared.dropped.fetch_add(1, Ordering::Relaxed);
            }
            pending.push_back(frame);
        } else {
            for c in conns.iter() {
                let dropped = c.queue.push(Arc::clone(&frame), self.shared.capacity);
                self.shared.dropped.fetch_add(dropped, Ordering::Relaxed);
            }
        }
        Ok(())
    }

    pub fn stats(&self) -> OutletStats {
        let mut conns = self.shared.conns.lock().unwrap();
        conns.retain(|c| !c.queue.is_closed());
        OutletStats {
            pushed: self.shared.pushed.load(Ordering::Relaxed),
            dropped: self.shared.dropped.load(Ordering::Relaxed),
            connections: conns.len(),
        }
    }

    /// Chunks waiting for a first inlet.
    pub fn pending(&self) -> usize {
        self.shared.pending.lock().unwrap().len()
    }

    pub fn has_consumers(&self) -> bool {
        self.stats().connections > 0
    }
}

impl Drop for Outlet {
    fn drop(&mut self) {
        self.shared.shutdown.store(true, Ordering::Relaxed);
        for c in self.shared.conns.lock().unwrap().drain(..) {
            c.queue.close();
            let _ = c.stream.shutdown(Shutdown::Both);
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
        ADVERTISED.lock().unwrap().remove(&self.meta.source_id);
    }
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>) {
    while !shared.shutdown.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, peer)) => {
                debug!("inlet connected from {peer}");
                if let Err(e) = serve(stream, &shared) {
                    warn!("failed to serve inlet {peer}: {e}");
                }
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(POLL),
            Err(e) => {
                warn!("accept failed: {e}");
                thread::sleep(POLL);
            }
        }
    }
}

fn serve(stream: TcpStream, shared: &Arc<Shared>) -> Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    let mut conns = shared.conns.lock().unwrap();
    // the first inlet inherits whatever was pushed before anyone listened
    let backlog = if conns.iter().all(|c| c.queue.is_closed()) {
        std::mem::take(&mut *shared.pending.lock().unwrap())
    } else {
        VecDeque::new()
    };
    let queue = Arc::new(ConnQueue::new(backlog));

    let mut writer = stream.try_clone()?;
    let mut reader = stream.try_clone()?;
    {
        let queue = Arc::clone(&queue);
        thread::Builder::new()
            .name("outlet-writer".into())
            .spawn(move || {
                while let Some(frame) = queue.pop() {
                    if writer.write_all(&frame).is_err() {
                        break;
                    }
                }
                queue.close();
                let _ = writer.shutdown(Shutdown::Both);
            })?;
    }
    {
        let queue = Arc::clone(&queue);
        let skew = shared.clock_skew_s;
        thread::Builder::new()
            .name("outlet-reader".into())
            .spawn(move || {
                let mut dec = Decoder::new();
                let mut buf = [0u8; 256];
                loop {
                    match reader.read(&mut buf) {
                        Ok(0) | Err(_) => break,
                        Ok(n) => dec.extend(&buf[..n]),
                    }
                    loop {
                        match dec.next_frame() {
                            Ok(Some(Frame::Ping { nonce })) => {
                                let pong = Frame::Pong {
                                    nonce,
                                    sender_clock: local_clock() + skew,
                                };
                                queue.push_front(codec::encode_to_vec(&pong).into());
                            }
                            Ok(Some(_)) => {}
                            Ok(None) => break,
                            Err(e) => {
                                warn!("inlet sent bad frame: {e}");
                                queue.close();
                                return;
                            }
                        }
                    }
                }
                queue.close();
            })?;
    }
    conns.push(Connection { queue, stream });
    Ok(())
}
