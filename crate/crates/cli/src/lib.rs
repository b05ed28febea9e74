//! The `tobe` command line: signal generation, stream tools, session runs
//! and the dashboard bridge.

use std::fmt;

pub mod bridge;
pub mod commands;
pub mod message;

pub use bridge::Bridge;
pub use message::BridgeMessage;

/// How a command finished when it did not fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    Interrupted,
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INTERRUPTED: u8 = 130;

/// Bad arguments or input files detected by the CLI itself.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Exit status for a failed command. Invalid input (configs, specs,
/// arguments) gives 2; anything that went wrong at runtime gives 1.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use tobe_core::Error as Core;
    use tobe_transport::Error as Transport;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<Core>() {
            return match e {
                Core::Config(_) | Core::Rejected(_) | Core::Parse { .. } => EXIT_USAGE,
                Core::Transport(Transport::Config(_)) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
        }
        if let Some(Transport::Config(_)) = cause.downcast_ref::<Transport>() {
            return EXIT_USAGE;
        }
    }
    EXIT_FAILURE
}
