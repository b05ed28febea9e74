use std::time::{SystemTime, UNIX_EPOCH};

/// Seconds on the host clock, shared by every process on the machine.
pub fn local_clock() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Estimated offset between a receiver clock and a sender clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockOffset {
    /// `receiver_clock - sender_clock`, in seconds.
    pub offset_s: f64,
    /// Round-trip time of the measuring ping/pong.
    pub rtt_s: f64,
}

impl ClockOffset {
    /// Midpoint estimate from a ping sent at `t_send`, answered with
    /// `sender_clock`, and received back at `t_recv` (receiver clock).
    pub fn from_exchange(t_send: f64, sender_clock: f64, t_recv: f64) -> Self {
        ClockOffset {
            offset_s: 0.5 * (t_send + t_recv) - sender_clock,
            rtt_s: (t_recv - t_send).max(0.0),
        }
    }

    /// Maps a sender timestamp onto the receiver clock.
    pub fn to_receiver(&self, sender_t: f64) -> f64 {
        sender_t + self.offset_s
    }
}
