use serde::{Deserialize, Serialize};
use serde_json::Value;
use tobe_core::mapper::{GestureSample, Mode, RenderFrame, Transform};
use tobe_core::metrics::MetricId;
use tobe_core::session::{Control, EventBody, PhaseId, SessionEvent};

/// Everything exchanged with dashboard clients over `/ws`, one JSON text
/// frame per message, tagged by `type`.
///
/// `user_id` is null on session-wide values (group aggregates, pair
/// synchrony and the shared anchor's frames).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BridgeMessage {
    Metric { t: f64, user_id: Option<String>, metric_id: MetricId, raw: f64, normalized: f64 },
    Render { t: f64, user_id: Option<String>, frame: RenderFrame },
    Protocol { t: f64, phase_id: PhaseId },
    Gauge { t: f64, level: f64 },

    BindRequest {
        id: Value,
        user_id: String,
        metric_id: MetricId,
        anchor_id: String,
        timeline_id: String,
        /// `CONTINUOUS` or `PERIODIC`.
        mode: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration_s: Option<f64>,
    },
    TimelineUpload { id: Value, user_id: String, timeline_id: String, sprite: String, samples: Vec<GestureDoc> },
    CalibrationCommand {
        id: Value,
        user_id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric_id: Option<MetricId>,
    },
    SessionCommand { id: Value, command: SessionCommand },

    /// Reply to a control message, echoing its `id`.
    Ack {
        t: f64,
        id: Value,
        ok: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        result: Option<Value>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionCommand {
    Start,
    Pause,
    Stop,
}

/// One captured gesture sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureDoc {
    pub t: f64,
    pub sx: f64,
    pub sy: f64,
    #[serde(default)]
    pub rot: f64,
    #[serde(default)]
    pub tx: f64,
    #[serde(default)]
    pub ty: f64,
}

impl From<GestureDoc> for GestureSample {
    fn from(g: GestureDoc) -> Self {
        GestureSample {
            t: g.t,
            transform: Transform { scale_x: g.sx, scale_y: g.sy, rotation: g.rot, translate_x: g.tx, translate_y: g.ty },
        }
    }
}

impl BridgeMessage {
    /// The dashboard-facing view of a session event, if it has one.
    pub fn from_event(e: &SessionEvent) -> Option<Self> {
        let t = e.t;
        let user_id = e.user_id.clone();
        Some(match &e.body {
            EventBody::Metric(v) | EventBody::Group(v) => {
                BridgeMessage::Metric { t, user_id, metric_id: v.metric_id, raw: v.raw, normalized: v.normalized }
            }
            EventBody::Render(frame) => BridgeMessage::Render { t, user_id, frame: frame.clone() },
            EventBody::Protocol { phase_id, .. } => BridgeMessage::Protocol { t, phase_id: *phase_id },
            EventBody::Gauge(g) => BridgeMessage::Gauge { t, level: g.level },
            _ => return None,
        })
    }

    /// Splits a control message into its correlation id and session command.
    pub fn into_control(self) -> Result<(Value, Control), String> {
        Ok(match self {
            BridgeMessage::BindRequest { id, user_id, metric_id, anchor_id, timeline_id, mode, duration_s } => {
                let mode = match (mode.as_str(), duration_s) {
                    ("CONTINUOUS", None) => Mode::Continuous,
                    ("CONTINUOUS", Some(_)) => return Err("CONTINUOUS bindings take no duration_s".into()),
                    ("PERIODIC", Some(d)) => Mode::Periodic { duration_s: d },
                    ("PERIODIC", None) => return Err("PERIODIC bindings need duration_s".into()),
                    (other, _) => return Err(format!("unknown mode {other:?}; expected CONTINUOUS or PERIODIC")),
                };
                (id, Control::Bind { user_id, metric: metric_id, anchor: anchor_id, timeline: timeline_id, mode })
            }
            BridgeMessage::TimelineUpload { id, user_id, timeline_id, sprite, samples } => (
                id,
                Control::UploadTimeline { user_id, timeline_id, sprite, samples: samples.into_iter().map(Into::into).collect() },
            ),
            BridgeMessage::CalibrationCommand { id, user_id, metric_id } => {
                (id, Control::Calibrate { user_id, metric: metric_id })
            }
            BridgeMessage::SessionCommand { id, command } => (
                id,
                match command {
                    SessionCommand::Start => Control::Resume,
                    SessionCommand::Pause => Control::Pause,
                    SessionCommand::Stop => Control::Stop,
                },
            ),
            other => return Err(format!("{} messages are sent by the core, not accepted from clients", other.kind())),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BridgeMessage::Metric { .. } => "metric",
            BridgeMessage::Render { .. } => "render",
            BridgeMessage::Protocol { .. } => "protocol",
            BridgeMessage::Gauge { .. } => "gauge",
            BridgeMessage::BindRequest { .. } => "bind_request",
            BridgeMessage::TimelineUpload { .. } => "timeline_upload",
            BridgeMessage::CalibrationCommand { .. } => "calibration_command",
            BridgeMessage::SessionCommand { .. } => "session_command",
            BridgeMessage::Ack { .. } => "ack",
        }
    }
}
