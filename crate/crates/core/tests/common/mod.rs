#![allow(dead_code)]

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tobe_core::metrics::{
    BeatEvent, BreathResampler, CoherenceTracker, HrResampler, MetricValue, GRID_HZ,
};

pub fn noise(rng: &mut ChaCha8Rng, n: usize, sigma: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sigma * z
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Greedy one-to-one matching of detections to truth within `tol` seconds.
/// Returns (true positives, false positives, false negatives).
pub fn match_events(truth: &[f64], detected: &[f64], tol: f64) -> (usize, usize, usize) {
    let mut used = vec![false; detected.len()];
    let mut tp = 0;
    for &t in truth {
        let best = detected
            .iter()
            .enumerate()
            .filter(|(i, d)| !used[*i] && (*d - t).abs() <= tol)
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()));
        if let Some((i, _)) = best {
            used[i] = true;
            tp += 1;
        }
    }
    (tp, detected.len() - tp, truth.len() - tp)
}

/// Half-sine pulses of `amp` and `width` centred at `times`.
pub fn add_pulses(x: &mut [f64], fs: f64, times: &[f64], amp: f64, width: f64) {
    for &tc in times {
        let lo = ((tc - width / 2.0) * fs).ceil().max(0.0) as usize;
        let hi = (((tc + width / 2.0) * fs).floor() as usize).min(x.len() - 1);
        for (i, v) in x.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let u = (i as f64 / fs - (tc - width / 2.0)) / width;
            *v += amp * (PI * u).sin();
        }
    }
}

/// Heart-rate series on the 4 Hz grid from beat times.
pub fn hr_grid(beats: &[f64]) -> Vec<(i64, f64)> {
    let mut r = HrResampler::new();
    beats.iter().flat_map(|&t| r.push(BeatEvent { t })).collect()
}

/// Low-passed belt on the 4 Hz grid.
pub fn breath_grid(belt: &[f64], fs: f64) -> Vec<(i64, f64)> {
    let mut r = BreathResampler::new(fs).unwrap();
    let mut out = Vec::new();
    for (i, &x) in belt.iter().enumerate() {
        r.push(i as f64 / fs, x, &mut out);
    }
    out
}

/// Streams two grid series through a coherence tracker.
pub fn track(mut tr: CoherenceTracker, a: &[(i64, f64)], b: &[(i64, f64)]) -> Vec<MetricValue> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 <= b[j].0);
        if take_a {
            tr.push_a(a[i].0, a[i].1);
            i += 1;
        } else {
            tr.push_b(b[j].0, b[j].1);
            j += 1;
        }
        tr.poll(&mut out);
    }
    out
}

/// `f(t)` sampled on grid indices `0..n`.
pub fn on_grid(n: i64, f: impl Fn(f64) -> f64) -> Vec<(i64, f64)> {
    (0..n).map(|k| (k, f(k as f64 / GRID_HZ))).collect()
}

/// Spearman rank correlation (no ties expected).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// A valid avatar config with random ids, geometry, keyframes and bindings.
pub fn random_avatar(rng: &mut ChaCha8Rng) -> tobe_core::mapper::AvatarConfig {
    use rand::Rng;
    use tobe_core::mapper::{Anchor, AvatarConfig, Keyframe, Mode, Timeline, Transform};
    use tobe_core::metrics::MetricId;

    let mut cfg = AvatarConfig::new(format!("avatar-{}", rng.gen::<u32>()));
    let n_anchors = rng.gen_range(1..6);
    for i in 0..n_anchors {
        cfg.anchors.push(Anchor::new(format!("a{i}-{}", rng.gen::<u16>()), rng.gen(), rng.gen(), rng.gen_range(0.01..0.5)));
    }
    let n_timelines = rng.gen_range(1..5);
    for i in 0..n_timelines {
        let n_keys = rng.gen_range(2..20);
        let mut phases: Vec<f64> = (0..n_keys - 2).map(|_| rng.gen_range(0.0..1.0)).filter(|&p| p > 0.0).collect();
        phases.sort_by(f64::total_cmp);
        phases.dedup();
        phases.insert(0, 0.0);
        phases.push(1.0);
        let keys = phases
            .into_iter()
            .map(|phase| Keyframe {
                phase,
                transform: Transform {
                    scale_x: rng.gen_range(0.05..4.0),
                    scale_y: rng.gen_range(0.05..4.0),
                    rotation: rng.gen_range(-10.0..10.0),
                    translate_x: rng.gen_range(-1.0..1.0),
                    translate_y: rng.gen_range(-1.0..1.0),
                },
            })
            .collect();
        cfg.timelines.push(Timeline::new(format!("t{i}"), format!("sprite-{}.svg", rng.gen::<u16>()), keys).unwrap());
    }
    for a in cfg.anchors.clone() {
        if rng.gen_bool(0.3) {
            continue;
        }
        let metric = MetricId::ALL[rng.gen_range(0..MetricId::ALL.len())];
        let timeline = cfg.timelines[rng.gen_range(0..cfg.timelines.len())].id.clone();
        let mode = if rng.gen() { Mode::Continuous } else { Mode::Periodic { duration_s: rng.gen_range(0.05..5.0) } };
        cfg = cfg.bind(metric, &a.id, &timeline, mode).unwrap();
    }
    cfg.validate().unwrap();
    cfg
}
