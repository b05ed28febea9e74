//! Multi-user sessions: configuration, the relaxation protocol, per-user
//! pipelines and the coordinator that merges them into one event log.

mod config;
mod engine;
mod pipeline;
mod protocol;
mod source;

pub use config::{
    load_session, GaugeConfig, PhaseId, ProtocolPhase, RelaxationProtocol, SessionConfig, SourceConfig, UserConfig,
    DEFAULT_RENDER_HZ,
};
pub use engine::{
    run_session, user_seed, Clock, Control, ControlReply, ControlRequest, EventBody, LogRecord, RunOptions,
    SessionEvent, SessionPlan, SessionSummary, SimulatedClock, UserPlan, WallClock,
};
pub use pipeline::{PipelineOutput, UserPipeline};
pub use protocol::{gauge_level, group_aggregate, phase_at, Direction, GaugeState, GROUP_STALE_S};
pub use source::{MemorySource, SampleSource, SourceState, StreamSource};
