use std::f64::consts::{FRAC_PI_2, PI};

use super::{Anchor, AvatarConfig, Keyframe, Mode, Timeline, Transform};
use crate::metrics::MetricId;

/// Anchor id of the display shared between two users.
pub const SHARED_ANCHOR: &str = "shared";

fn keys(points: &[(f64, Transform)]) -> Vec<Keyframe> {
    points.iter().map(|&(phase, transform)| Keyframe { phase, transform }).collect()
}

fn preset(metric: MetricId) -> Option<(Anchor, Timeline, Mode)> {
    let s = Transform::scale;
    let (anchor, timeline, mode) = match metric {
        MetricId::HeartRate => (
            Anchor::new("chest", 0.55, 0.42, 0.12),
            Timeline::new("heartbeat", "heart.svg", keys(&[(0.0, s(1.0)), (0.3, s(1.3)), (1.0, s(1.0))])),
            Mode::Periodic { duration_s: 0.6 },
        ),
        MetricId::Respiration => (
            Anchor::new("torso", 0.5, 0.5, 0.3),
            Timeline::linear("inflate", "lungs.svg", s(0.8), s(1.2)),
            Mode::Continuous,
        ),
        MetricId::CardiacCoherence => (
            Anchor::new("forehead", 0.5, 0.12, 0.12),
            Timeline::linear("bloom", "flower.svg", s(0.05), s(1.0)),
            Mode::Continuous,
        ),
        MetricId::Workload => (
            Anchor::new("head", 0.5, 0.06, 0.2),
            Timeline::new(
                "spin",
                "cogs.svg",
                keys(&[
                    (0.0, Transform::rotation(0.0)),
                    (0.25, Transform::rotation(FRAC_PI_2)),
                    (0.5, Transform::rotation(PI)),
                    (0.75, Transform::rotation(3.0 * FRAC_PI_2)),
                    (1.0, Transform::rotation(2.0 * PI)),
                ]),
            ),
            Mode::Continuous,
        ),
        MetricId::Vigilance => (
            Anchor::new("eyes", 0.5, 0.18, 0.1),
            Timeline::linear("open", "eye.svg", Transform { scale_y: 0.1, ..s(1.0) }, s(1.0)),
            Mode::Continuous,
        ),
        MetricId::Meditation => (
            Anchor::new("halo", 0.5, 0.0, 0.25),
            Timeline::linear("glow", "halo.svg", s(0.2), s(1.0)),
            Mode::Continuous,
        ),
        MetricId::Valence => (
            Anchor::new("mouth", 0.5, 0.26, 0.08),
            Timeline::linear("smile", "mouth.svg", Transform::rotation(-0.4), Transform::rotation(0.4)),
            Mode::Continuous,
        ),
        MetricId::Arousal => (
            Anchor::new("hands", 0.3, 0.62, 0.1),
            Timeline::linear("sweat", "drops.svg", Transform::translation(0.0, 0.0), Transform::translation(0.0, 0.08)),
            Mode::Continuous,
        ),
        MetricId::PairSynchrony => return None,
    };
    Some((anchor, timeline.expect("preset timelines are valid"), mode))
}

/// A stock avatar with one visualization per enabled metric: pulsing
/// heart, breathing lungs, coherence flower, workload cogs and so on.
pub fn default_avatar(avatar_id: &str, metrics: &[MetricId]) -> AvatarConfig {
    let mut cfg = AvatarConfig::new(avatar_id);
    for &m in metrics {
        if let Some((anchor, timeline, mode)) = preset(m) {
            let (a, t) = (anchor.id.clone(), timeline.id.clone());
            cfg.anchors.push(anchor);
            cfg.timelines.push(timeline);
            cfg = cfg.bind(m, &a, &t, mode).expect("preset ids exist");
        }
    }
    cfg.version = 0;
    cfg
}

/// The flower between two users that blooms with their heart-rate
/// synchrony.
pub fn shared_avatar() -> AvatarConfig {
    let mut cfg = AvatarConfig::new(SHARED_ANCHOR);
    cfg.anchors.push(Anchor::new(SHARED_ANCHOR, 0.5, 0.5, 0.4));
    cfg.timelines.push(
        Timeline::linear("bloom", "flower.svg", Transform::scale(0.05), Transform::scale(1.0)).expect("valid"),
    );
    let mut cfg = cfg.bind(MetricId::PairSynchrony, SHARED_ANCHOR, "bloom", Mode::Continuous).expect("ids exist");
    cfg.version = 0;
    cfg
}
