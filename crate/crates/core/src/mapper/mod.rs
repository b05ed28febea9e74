//! Avatar feedback: keyframe timelines recorded from gestures, bindings of
//! metrics to anchor points, and per-frame render instructions.

mod config;
mod presets;
mod render;
mod timeline;

pub use config::{Anchor, AvatarConfig, Binding, Mode};
pub use presets::{default_avatar, shared_avatar, SHARED_ANCHOR};
pub use render::{Mapper, RenderFrame, RenderItem, Trigger, EASE_OUT_S, SMOOTHING_S, STALE_AFTER_S};
pub use timeline::{
    evaluate_timeline, record_timeline, shortest_arc, GestureSample, Keyframe, Timeline, Transform, MAX_KEYFRAMES,
};
