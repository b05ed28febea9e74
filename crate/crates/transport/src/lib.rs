//! Publish/subscribe transport for timestamped multichannel signal streams.
//!
//! An [`Outlet`] advertises a stream on the local network with a periodic UDP
//! beacon and serves sample chunks over TCP to any number of [`Inlet`]s.
//! [`resolve_streams`] listens for beacons and returns what it heard.
//!
//! Wire formats live in [`codec`] (TCP data frames) and [`discovery`] (UDP
//! beacons). Both are small enough to audit by hand.

pub mod chunk;
pub mod clock;
pub mod codec;
pub mod discovery;
mod error;
pub mod inlet;
pub mod meta;
pub mod outlet;

pub use chunk::SampleChunk;
pub use clock::{local_clock, ClockOffset};
pub use discovery::{resolve_streams, StreamFilter, StreamInfo, DEFAULT_DISCOVERY_PORT};
pub use error::{Error, Result};
pub use inlet::Inlet;
pub use meta::{Modality, StreamMeta};
pub use outlet::{Outlet, OutletConfig, OutletStats};
