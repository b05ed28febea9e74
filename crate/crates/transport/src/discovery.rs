//! UDP discovery beacons.
//!
//! ```text
//! "TOBE" | 0x01 | u16 LE length | UTF-8 JSON document
//! ```
//!
//! The document holds every [`StreamMeta`] field plus `host` and `port` of
//! the outlet's TCP listener. A `host` of `0.0.0.0` means "use the address the
//! beacon came from".

use std::collections::BTreeMap;
use std::net::{IpAddr, Ipv4Addr, SocketAddr, SocketAddrV4, UdpSocket};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use socket2::{Domain, Protocol, Socket, Type};

use crate::{Error, Modality, Result, StreamMeta};

pub const BEACON_MAGIC: &[u8; 4] = b"TOBE";
pub const BEACON_VERSION: u8 = 0x01;
pub const DEFAULT_DISCOVERY_PORT: u16 = 16571;
pub const DISCOVERY_PORT_ENV: &str = "TOBE_DISCOVERY_PORT";

/// Discovery port from `TOBE_DISCOVERY_PORT`, falling back to 16571.
pub fn discovery_port() -> u16 {
    std::env::var(DISCOVERY_PORT_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DISCOVERY_PORT)
}

/// A stream heard on the network: its metadata and where to connect.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamInfo {
    pub meta: StreamMeta,
    pub endpoint: SocketAddr,
}

#[derive(Serialize, Deserialize)]
struct BeaconDoc {
    #[serde(flatten)]
    meta: StreamMeta,
    host: String,
    port: u16,
}

pub fn encode_beacon(meta: &StreamMeta, host: IpAddr, port: u16) -> Vec<u8> {
    let doc = serde_json::to_vec(&BeaconDoc {
        meta: meta.clone(),
        host: host.to_string(),
        port,
    })
    .expect("stream metadata serializes");
    let mut out = Vec::with_capacity(7 + doc.len());
    out.extend_from_slice(BEACON_MAGIC);
    out.push(BEACON_VERSION);
    out.extend_from_slice(&(doc.len() as u16).to_le_bytes());
    out.extend_from_slice(&doc);
    out
}

/// Parses a beacon; `from` replaces an unspecified advertised host.
pub fn decode_beacon(bytes: &[u8], from: Option<IpAddr>) -> Result<StreamInfo> {
    if bytes.len() < 7 || &bytes[..4] != BEACON_MAGIC {
        return Err(Error::Framing("not a beacon".into()));
    }
    if bytes[4] != BEACON_VERSION {
        return Err(Error::Framing(format!("beacon version {}", bytes[4])));
    }
    let len = u16::from_le_bytes([bytes[5], bytes[6]]) as usize;
    let body = bytes
        .get(7..7 + len)
        .ok_or_else(|| Error::Framing("truncated beacon".into()))?;
    let doc: BeaconDoc =
        serde_json::from_slice(body).map_err(|e| Error::Framing(format!("beacon document: {e}")))?;
    doc.meta
        .validate()
        .map_err(|e| Error::Framing(e.to_string()))?;
    let mut host: IpAddr = doc
        .host
        .parse()
        .map_err(|_| Error::Framing(format!("beacon host {:?}", doc.host)))?;
    if host.is_unspecified() {
        host = from.unwrap_or(IpAddr::V4(Ipv4Addr::LOCALHOST));
    }
    Ok(StreamInfo {
        meta: doc.meta,
        endpoint: SocketAddr::new(host, doc.port),
    })
}

/// Which advertised streams a resolver keeps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamFilter {
    pub modality: Option<Modality>,
    pub name: Option<String>,
    pub source_id: Option<String>,
}

impl StreamFilter {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn modality(modality: Modality) -> Self {
        StreamFilter {
            modality: Some(modality),
            ..Self::default()
        }
    }

    pub fn name(name: impl Into<String>) -> Self {
        StreamFilter {
            name: Some(name.into()),
            ..Self::default()
        }
    }

    pub fn matches(&self, meta: &StreamMeta) -> bool {
        self.modality.is_none_or(|m| m == meta.modality)
            && self.name.as_ref().is_none_or(|n| *n == meta.name)
            && self.source_id.as_ref().is_none_or(|s| *s == meta.source_id)
    }
}

pub(crate) fn bind_listener(port: u16) -> Result<UdpSocket> {
    let socket = Socket::new(Domain::IPV4, Type::DGRAM, Some(Protocol::UDP))?;
    socket.set_reuse_address(true)?;
    #[cfg(unix)]
    socket.set_reuse_port(true)?;
    socket.set_broadcast(true)?;
    let addr = SocketAddrV4::new(Ipv4Addr::UNSPECIFIED, port);
    socket
        .bind(&addr.into())
        .map_err(|e| Error::Config(format!("cannot listen on UDP port {port}: {e}")))?;
    Ok(socket.into())
}

pub(crate) fn bind_sender() -> Result<UdpSocket> {
    let socket = UdpSocket::bind((Ipv4Addr::UNSPECIFIED, 0))?;
    socket.set_broadcast(true)?;
    Ok(socket)
}

/// Sends one beacon to the broadcast address, falling back to loopback
/// broadcast on hosts without a routable interface.
pub(crate) fn send_beacon(socket: &UdpSocket, beacon: &[u8], port: u16) -> Result<()> {
    match socket.send_to(beacon, (Ipv4Addr::BROADCAST, port)) {
        Ok(_) => Ok(()),
        Err(_) => {
            socket.send_to(beacon, (Ipv4Addr::new(127, 255, 255, 255), port))?;
            Ok(())
        }
    }
}

/// Listens on the default discovery port (see [`discovery_port`]).
pub fn resolve_streams(filter: &StreamFilter, timeout: Duration) -> Result<Vec<StreamInfo>> {
    resolve_streams_on(discovery_port(), filter, timeout)
}

/// Collects every beacon heard on `port` within `timeout` that matches
/// `filter`, one entry per `source_id`, sorted by name then source id.
pub fn resolve_streams_on(
    port: u16,
    filter: &StreamFilter,
    timeout: Duration,
) -> Result<Vec<StreamInfo>> {
    let socket = bind_listener(port)?;
    let deadline = Instant::now() + timeout;
    let mut found: BTreeMap<String, StreamInfo> = BTreeMap::new();
    let mut buf = vec![0u8; 65_536];
    loop {
        let remaining = deadline.saturating_duration_since(Instant::now());
        if remaining.is_zero() {
            break;
        }
        socket.set_read_timeout(Some(remaining.max(Duration::from_millis(1))))?;
        match socket.recv_from(&mut buf) {
            Ok((n, from)) => {
                if let Ok(info) = decode_beacon(&buf[..n], Some(from.ip())) {
                    if filter.matches(&info.meta) {
                        found.insert(info.meta.source_id.clone(), info);
                    }
                }
            }
            Err(e)
                if matches!(
                    e.kind(),
                    std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                ) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let mut out: Vec<StreamInfo> = found.into_values().collect();
    out.sort_by(|a, b| {
        (&a.meta.name, &a.meta.source_id).cmp(&(&b.meta.name, &b.meta.source_id))
    });
    Ok(out)
}
