//! End-to-end acceptance checks. Runs as its own binary (no libtest
//! harness) and prints one PASS/FAIL line per criterion; exits non-zero if
//! any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, RngCore};
use tobe_core::mapper::{
    evaluate_timeline, AvatarConfig, Anchor, Keyframe, Mapper, Mode, Timeline, Transform, Trigger,
};
use tobe_core::metrics::*;
use tobe_core::session::{load_session, run_session, LogRecord, RunOptions, SessionPlan, SimulatedClock};
use tobe_core::signal::{BandSpec, Normalizer, SosFilter, Window};
use tobe_core::synth::{
    gen_ecg, gen_eeg, gen_respiration, write_recording, Component, CouplingSpec, EcgSpec, EegSpec, RespSpec,
};
use tobe_core::transport::codec::{decode_exact, encode_to_vec, Decoder, Frame};
use tobe_core::transport::{Inlet, Modality, Outlet, OutletConfig, SampleChunk, StreamInfo, StreamMeta};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn beat_times(beats: &[BeatEvent]) -> Vec<f64> {
    beats.iter().map(|b| b.t).collect()
}

fn heart_rate_accuracy() -> Outcome {
    let start = Instant::now();
    let mut worst = (1.0f64, 1.0f64, 0.0f64);
    for (i, bpm) in [60.0, 80.0, 120.0].into_iter().enumerate() {
        let mut spec = EcgSpec::constant(250.0, bpm);
        spec.noise_uv = 20.0;
        spec.seed = 100 + i as u64;
        let g = gen_ecg(&spec, 60.0).map_err(|e| e.to_string())?;
        let beats = detect_r_peaks(&g.signal.channels[0], 250.0).map_err(|e| e.to_string())?;
        let (tp, fp, fn_) = match_events(&g.truth.beat_times, &beat_times(&beats), 0.05);
        let recall = tp as f64 / (tp + fn_) as f64;
        let precision = tp as f64 / (tp + fp).max(1) as f64;
        let err = heart_rate(&beats, Normalizer::identity())
            .iter()
            .map(|v| (v.raw - bpm).abs())
            .fold(0.0, f64::max);
        worst = (worst.0.min(recall), worst.1.min(precision), worst.2.max(err));
    }
    let took = start.elapsed().as_secs_f64();
    check(
        worst.0 >= 0.99 && worst.1 >= 0.99 && worst.2 <= 1.0 && took < 5.0,
        format!(
            "min recall {:.4}, min precision {:.4}, max |BPM error| {:.3}, {took:.2} s",
            worst.0, worst.1, worst.2
        ),
    )
}

fn cardiac_coherence_discrimination() -> Outcome {
    let start = Instant::now();
    let breath = gen_respiration(&RespSpec::new(25.0, 10.0, 1.0), 60.0).map_err(|e| e.to_string())?;
    let bg = breath_grid(breath.signal.channel(0), 25.0);

    let mut coupled_min = f64::INFINITY;
    for seed in 0..10 {
        let mut spec = EcgSpec::constant(250.0, 70.0);
        spec.rsa_depth = 5.0;
        spec.rsa_period_s = 10.0;
        spec.noise_uv = 20.0;
        spec.seed = 300 + seed;
        let e = gen_ecg(&spec, 60.0).map_err(|e| e.to_string())?;
        let beats = detect_r_peaks(&e.signal.channels[0], 250.0).map_err(|e| e.to_string())?;
        let out = track(CoherenceTracker::cardiac(), &hr_grid(&beat_times(&beats)), &bg);
        coupled_min = out.iter().map(|v| v.raw).fold(coupled_min, f64::min);
    }

    let trials = 200;
    let mut low = 0;
    for seed in 0..trials {
        let mut spec = EcgSpec::constant(250.0, 70.0);
        spec.ibi_jitter_s = 0.05;
        spec.noise_uv = 20.0;
        spec.seed = 1000 + seed;
        let e = gen_ecg(&spec, 12.0).map_err(|e| e.to_string())?;
        let beats = detect_r_peaks(&e.signal.channels[0], 250.0).map_err(|e| e.to_string())?;
        let out = track(CoherenceTracker::cardiac(), &hr_grid(&beat_times(&beats)), &bg);
        if out.first().is_some_and(|v| v.raw < 0.45) {
            low += 1;
        }
    }
    let took = start.elapsed().as_secs_f64();
    check(
        coupled_min >= 0.95 && low as f64 >= 0.95 * trials as f64 && took < 30.0,
        format!("coupled min {coupled_min:.3}, independent < 0.45 in {low}/{trials}, {took:.2} s"),
    )
}

fn coupled_eeg(coef: f64, seed: u64) -> EegSpec {
    let mut s = EegSpec::silent(128.0);
    s.seed = seed;
    let mut chans: Vec<String> = layout::FRONT.iter().map(|s| s.to_string()).collect();
    chans.extend(layout::REAR.iter().map(|s| s.to_string()));
    s.coupling.push(CouplingSpec { channels: chans, coefficient: coef, low_hz: 7.0, high_hz: 28.0, amplitude_uv: 20.0 });
    s
}

fn eeg_window(spec: &EegSpec, secs: f64) -> Result<Window, String> {
    gen_eeg(spec, secs).and_then(|g| g.signal.to_window()).map_err(|e| e.to_string())
}

fn plv_endpoints() -> Outcome {
    let layout = ChannelLayout::default();
    let med = |coef: f64, seed: u64| -> Result<f64, String> {
        meditation(&eeg_window(&coupled_eeg(coef, seed), 10.0)?, &layout).map_err(|e| e.to_string())
    };
    let same = med(1.0, 1)?;
    let trials = 200;
    let mut low = 0;
    for s in 0..trials {
        if med(0.0, 5000 + s)? < 0.25 {
            low += 1;
        }
    }
    let coefs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let raws = coefs.iter().map(|&c| med(c, 7)).collect::<Result<Vec<_>, _>>()?;
    let rho = spearman(&coefs, &raws);
    check(
        (same - 1.0).abs() <= 0.02 && low as f64 >= 0.95 * trials as f64 && rho > 0.9,
        format!("identical {same:.4}, independent < 0.25 in {low}/{trials}, Spearman {rho:.3}"),
    )
}

fn eeg_ratio_metrics() -> Outcome {
    let layout = ChannelLayout::default();
    let ln4 = 4f64.ln();
    let build = |parts: &[(&[&str], Component)]| {
        let mut s = EegSpec::silent(250.0);
        s.seed = 40;
        s.background_uv = 0.5;
        for (labels, c) in parts {
            s.add(labels, *c);
        }
        s
    };
    let raw = |f: fn(&Window, &ChannelLayout) -> tobe_core::Result<f64>, spec: EegSpec| -> Result<f64, String> {
        f(&eeg_window(&spec, 4.0)?, &layout).map_err(|e| e.to_string())
    };
    let all = &layout::LABELS[..];
    let vig = |beta: f64, theta: f64| build(&[(all, Component::band(15.5, 19.5, beta)), (all, Component::band(5.0, 9.0, theta))]);
    let work = |front: f64, rear: f64| {
        build(&[(&layout::FRONTAL[..], Component::band(4.0, 6.0, front)), (&layout::PARIETAL_OCCIPITAL[..], Component::band(9.0, 11.0, rear))])
    };
    let val = |left: f64, right: f64| build(&[(&layout::LEFT[..], Component::sine(10.0, left)), (&layout::RIGHT[..], Component::sine(10.0, right))]);

    let v0 = raw(vigilance, vig(10.0, 10.0))?;
    let w0 = raw(workload, work(10.0, 10.0))?;
    let a0 = raw(valence, val(10.0, 10.0))?;
    // doubled amplitude is four times the band power
    let shifts = [
        ("vigilance beta", raw(vigilance, vig(20.0, 10.0))? - v0, ln4),
        ("vigilance theta", raw(vigilance, vig(10.0, 20.0))? - v0, -ln4),
        ("workload frontal", raw(workload, work(20.0, 10.0))? - w0, ln4),
        ("workload parietal", raw(workload, work(10.0, 20.0))? - w0, -ln4),
        ("valence left", raw(valence, val(20.0, 10.0))? - a0, ln4),
        ("valence right", raw(valence, val(10.0, 20.0))? - a0, -ln4),
    ];
    let worst = shifts.iter().map(|(_, got, want)| (got - want).abs()).fold(0.0, f64::max);

    let mut spec = EegSpec::silent(250.0);
    spec.background_uv = 5.0;
    spec.seed = 41;
    spec.add(&["F7", "O1", "P8"], Component::band(8.0, 12.0, 15.0));
    let w = eeg_window(&spec, 4.0)?;
    let mut ch = w.channels().to_vec();
    for (l, r) in layout.left().iter().zip(layout.right()) {
        ch.swap(*l, r);
    }
    let swapped = Window::new(ch, w.fs(), w.t_start()).map_err(|e| e.to_string())?;
    let anti = (valence(&w, &layout).map_err(|e| e.to_string())? + valence(&swapped, &layout).map_err(|e| e.to_string())?).abs();
    check(
        worst <= 0.1 && anti <= 1e-6,
        format!("max |shift - log 4| {worst:.4}, valence swap residual {anti:.2e}"),
    )
}

fn blink_detection() -> Outcome {
    let fs = 250.0;
    let (mut tp_all, mut truth_all, mut fp_all, mut minutes) = (0, 0, 0, 0.0);
    for seed in 0..5 {
        let secs = 120.0;
        let mut r = rng(600 + seed);
        let mut x = noise(&mut r, (secs * fs) as usize, 10.0);
        let mut truth = Vec::new();
        let mut t = 6.0;
        while t < secs - 1.0 {
            truth.push(t);
            t += r.gen_range(2.0..5.0);
        }
        add_pulses(&mut x, fs, &truth, 80.0, 0.2);
        let det = beat_free_times(&detect_blinks(&x, fs).map_err(|e| e.to_string())?);
        let (tp, fp, _) = match_events(&truth, &det, 0.1);
        tp_all += tp;
        truth_all += truth.len();
        fp_all += fp;
        minutes += secs / 60.0;
    }
    let recall = tp_all as f64 / truth_all as f64;
    let fp_rate = fp_all as f64 / minutes;
    check(
        recall >= 0.95 && fp_rate <= 1.0,
        format!("recall {recall:.4} ({tp_all}/{truth_all}), {fp_rate:.2} false positives per minute"),
    )
}

fn beat_free_times(blinks: &[BlinkEvent]) -> Vec<f64> {
    blinks.iter().map(|b| b.t).collect()
}

fn streaming_and_transport() -> Outcome {
    let mut r = rng(700);
    // chunked vs one-pass filtering
    let fs = 250.0;
    let xs = noise(&mut r, 20_000, 50.0);
    let designs = [
        SosFilter::bandpass(fs, BandSpec::new(1.0, 40.0)).map_err(|e| e.to_string())?,
        SosFilter::lowpass(fs, 5.0, 4).map_err(|e| e.to_string())?,
        SosFilter::highpass(fs, 0.5, 2).map_err(|e| e.to_string())?,
    ];
    let mut filter_err = 0.0f64;
    for d in &designs {
        let whole = d.clone().process(&xs);
        for _ in 0..20 {
            let mut f = d.clone();
            let mut parts = Vec::with_capacity(xs.len());
            let mut i = 0;
            while i < xs.len() {
                let n = r.gen_range(1..700).min(xs.len() - i);
                parts.extend(f.process(&xs[i..i + n]));
                i += n;
            }
            filter_err = whole.iter().zip(&parts).map(|(a, b)| (a - b).abs()).fold(filter_err, f64::max);
        }
    }

    // network round trip of 10^6 random samples
    let meta = StreamMeta::new("acceptance", Modality::Eeg, ["a", "b", "c", "d"], 250.0, "uV", "acceptance-rt");
    let cfg = OutletConfig {
        discovery_port: 40000 + (std::process::id() % 10000) as u16,
        beacon_interval: Duration::from_millis(200),
        queue_capacity: 4096,
        ..OutletConfig::default()
    };
    let outlet = Outlet::open_with(meta, cfg).map_err(|e| e.to_string())?;
    let info = StreamInfo { meta: outlet.meta().clone(), endpoint: outlet.loopback_endpoint() };
    let mut inlet = Inlet::open(&info).map_err(|e| e.to_string())?;
    while !outlet.has_consumers() {
        thread::sleep(Duration::from_millis(2));
    }
    let (rows, ch, per_chunk) = (250_000usize, 4usize, 500usize);
    let mut sent = Vec::new();
    let mut t = 0.0;
    for _ in 0..rows / per_chunk {
        let ts: Vec<f64> = (0..per_chunk)
            .map(|_| {
                t += r.gen_range(1e-6..1e-2);
                t
            })
            .collect();
        // any finite bit pattern; chunks reject NaN and infinities
        let xs: Vec<f32> = (0..per_chunk * ch)
            .map(|_| loop {
                let x = f32::from_bits(r.next_u32());
                if x.is_finite() {
                    break x;
                }
            })
            .collect();
        sent.push(SampleChunk::new(ts, xs, ch).map_err(|e| e.to_string())?);
    }
    let expected: Vec<(u64, Vec<u32>)> = sent
        .iter()
        .flat_map(|c| c.rows().map(|(t, row)| (t.to_bits(), row.iter().map(|x| x.to_bits()).collect())))
        .collect();
    let sender = thread::spawn(move || {
        for c in &sent {
            outlet.push_chunk(c).unwrap();
        }
        outlet
    });
    let mut got = Vec::with_capacity(expected.len());
    let deadline = Instant::now() + Duration::from_secs(60);
    while got.len() < expected.len() && Instant::now() < deadline {
        if let Some(c) = inlet.pull_chunk(Duration::from_millis(200)).map_err(|e| e.to_string())? {
            got.extend(c.rows().map(|(t, row)| (t.to_bits(), row.iter().map(|x| x.to_bits()).collect::<Vec<_>>())));
        }
    }
    drop(sender.join());
    let bit_exact = got == expected;

    // decoder fuzzing
    let fuzz = panic::catch_unwind(AssertUnwindSafe(|| {
        let mut rejected = 0u32;
        for i in 0..100_000u32 {
            let frame = match i % 3 {
                0 => Frame::Ping { nonce: r.next_u64() },
                1 => Frame::Pong { nonce: r.next_u64(), sender_clock: f64::from_bits(r.next_u64()) },
                _ => {
                    let (n, c) = (r.gen_range(1..20), r.gen_range(1..5));
                    let ts = (0..n).map(|k| k as f64).collect();
                    let xs = (0..n * c).map(|_| r.gen()).collect();
                    Frame::Chunk(SampleChunk::new(ts, xs, c).unwrap())
                }
            };
            let mut bytes = encode_to_vec(&frame);
            match r.gen_range(0..4) {
                0 => {
                    for _ in 0..r.gen_range(1..6) {
                        let at = r.gen_range(0..bytes.len());
                        bytes[at] ^= 1 << r.gen_range(0..8);
                    }
                }
                1 => bytes.truncate(r.gen_range(0..bytes.len())),
                2 => bytes = (0..r.gen_range(0..64)).map(|_| r.gen()).collect(),
                _ => {
                    let at = r.gen_range(0..=bytes.len());
                    let extra: Vec<u8> = (0..r.gen_range(1..32)).map(|_| r.gen()).collect();
                    bytes.splice(at..at, extra);
                }
            }
            if decode_exact(&bytes).is_err() {
                rejected += 1;
            }
            let mut dec = Decoder::new();
            for piece in bytes.chunks(r.gen_range(1..16)) {
                dec.extend(piece);
                while let Ok(Some(_)) = dec.next_frame() {}
            }
        }
        rejected
    }));
    let fuzz_detail = match &fuzz {
        Ok(rej) => format!("100000 fuzzed frames, {rej} rejected, no panic"),
        Err(_) => "decoder panicked on a fuzzed frame".into(),
    };
    check(
        filter_err <= 1e-6 && bit_exact && fuzz.is_ok(),
        format!(
            "chunked filter max diff {filter_err:.2e}; {} of {} samples round-tripped bit-exact: {bit_exact}; {fuzz_detail}",
            got.len() * ch,
            expected.len() * ch
        ),
    )
}

fn protocol_replay_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let err = |e: tobe_core::Error| e.to_string();
    for (user, seed, bpm) in [("ana", 1u64, 64.0), ("ben", 2, 72.0)] {
        let mut ecg = EcgSpec::constant(250.0, bpm);
        ecg.rsa_depth = 4.0;
        ecg.noise_uv = 20.0;
        ecg.seed = seed;
        let g = gen_ecg(&ecg, 901.0).map_err(err)?;
        let meta = StreamMeta { name: format!("{user}-ecg"), ..g.meta.clone() };
        write_recording(d.join(format!("{user}-ecg.csv")), &meta, &g.signal.chunks(250)).map_err(err)?;
        let mut belt = RespSpec::new(50.0, 10.0, 1.0);
        belt.seed = seed + 10;
        let g = gen_respiration(&belt, 901.0).map_err(err)?;
        let meta = StreamMeta { name: format!("{user}-belt"), ..g.meta.clone() };
        write_recording(d.join(format!("{user}-belt.csv")), &meta, &g.signal.chunks(50)).map_err(err)?;
    }
    let user = |u: &str| {
        format!(
            r#"{{"user_id": "{u}", "sources": [{{"recording": "{u}-ecg.csv"}}, {{"recording": "{u}-belt.csv"}}],
                "metrics": ["HEART_RATE", "RESPIRATION", "CARDIAC_COHERENCE", "PAIR_SYNCHRONY"]}}"#
        )
    };
    let doc = format!(r#"{{"users": [{}, {}], "protocol": {{}}}}"#, user("ana"), user("ben"));
    std::fs::write(d.join("relaxation.json"), doc).map_err(|e| e.to_string())?;

    let mut logs = Vec::new();
    let mut slowest = 0.0f64;
    for _ in 0..3 {
        let start = Instant::now();
        let cfg = load_session(d.join("relaxation.json")).map_err(err)?;
        let plan = SessionPlan::from_config(&cfg).map_err(err)?;
        let mut log = Vec::new();
        run_session(
            plan,
            &mut SimulatedClock::new(),
            &mut |e| {
                log.extend_from_slice(e.to_json().as_bytes());
                log.push(b'\n');
                Ok(())
            },
            RunOptions::default(),
        )
        .map_err(err)?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        logs.push(log);
    }
    let identical = logs.windows(2).all(|w| w[0] == w[1]);
    let records: Vec<LogRecord> = std::str::from_utf8(&logs[0])
        .map_err(|e| e.to_string())?
        .lines()
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut marks: Vec<f64> = records.iter().filter(|r| r.kind == "protocol").map(|r| r.t).collect();
    marks.extend(records.iter().filter(|r| r.kind == "session_end").map(|r| r.t));
    let on_time = marks.len() == 4
        && marks.iter().zip([0.0, 300.0, 600.0, 900.0]).all(|(got, want)| (got - want).abs() <= 0.1);
    check(
        identical && on_time && slowest < 10.0,
        format!(
            "3 runs, {} records, {} bytes, identical: {identical}; transitions {marks:?}; slowest run {slowest:.2} s",
            records.len(),
            logs[0].len()
        ),
    )
}

fn mapper_correctness() -> Outcome {
    let mut r = rng(800);
    let mut key_err = 0.0f64;
    let mut mid_err = 0.0f64;
    for _ in 0..200 {
        let n = r.gen_range(2..40);
        let mut phases: Vec<f64> = (0..n - 2).map(|_| r.gen_range(0.0..1.0)).filter(|&p| p > 0.0).collect();
        phases.sort_by(f64::total_cmp);
        phases.dedup();
        phases.insert(0, 0.0);
        phases.push(1.0);
        let keys: Vec<Keyframe> = phases
            .iter()
            .map(|&phase| Keyframe {
                phase,
                transform: Transform {
                    scale_x: r.gen_range(0.1..3.0),
                    scale_y: r.gen_range(0.1..3.0),
                    rotation: r.gen_range(-1.5..1.5),
                    translate_x: r.gen_range(-1.0..1.0),
                    translate_y: r.gen_range(-1.0..1.0),
                },
            })
            .collect();
        let tl = Timeline::new("t", "s.svg", keys.clone()).map_err(|e| e.to_string())?;
        for k in &keys {
            let got = evaluate_timeline(&tl, k.phase);
            if got != k.transform {
                key_err = key_err.max(1.0);
            }
        }
        for w in keys.windows(2) {
            let got = evaluate_timeline(&tl, 0.5 * (w[0].phase + w[1].phase));
            let (a, b) = (w[0].transform, w[1].transform);
            // rotations stay within (-1.5, 1.5) so the short arc is the plain one
            let want = [
                (a.scale_x + b.scale_x) / 2.0,
                (a.scale_y + b.scale_y) / 2.0,
                (a.rotation + b.rotation) / 2.0,
                (a.translate_x + b.translate_x) / 2.0,
                (a.translate_y + b.translate_y) / 2.0,
            ];
            let have = [got.scale_x, got.scale_y, got.rotation, got.translate_x, got.translate_y];
            mid_err = have.iter().zip(want).map(|(h, w)| (h - w).abs()).fold(mid_err, f64::max);
        }
    }

    let tl = Timeline::linear("pulse", "heart.svg", Transform::scale(1.0), Transform::scale(2.0)).map_err(|e| e.to_string())?;
    let cfg = AvatarConfig::new("acceptance")
        .with_anchor(Anchor::new("chest", 0.5, 0.5, 0.1))
        .and_then(|c| c.with_timeline(tl))
        .and_then(|c| c.bind(MetricId::HeartRate, "chest", "pulse", Mode::Periodic { duration_s: 0.8 }))
        .map_err(|e| e.to_string())?;
    let mut m = Mapper::new(cfg).map_err(|e| e.to_string())?;
    let frame = m.tick(10.4, &[], &[Trigger { metric_id: MetricId::HeartRate, t: 10.0 }]);
    let half = frame.items[0].phase;

    let mut round_trips = 0;
    for _ in 0..100 {
        let cfg = random_avatar(&mut r);
        let back = AvatarConfig::from_json(&cfg.to_json()).map_err(|e| e.to_string())?;
        if back == cfg {
            round_trips += 1;
        }
    }
    check(
        key_err == 0.0 && mid_err <= 1e-9 && (half - 0.5).abs() < 1e-12 && round_trips == 100,
        format!(
            "keyframes exact: {}, max midpoint error {mid_err:.1e}, periodic phase at half duration {half}, {round_trips}/100 JSON round trips equal",
            key_err == 0.0
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("heart-rate accuracy", heart_rate_accuracy),
        ("cardiac coherence discrimination", cardiac_coherence_discrimination),
        ("phase-locking endpoints", plv_endpoints),
        ("EEG ratio metrics", eeg_ratio_metrics),
        ("blink detection", blink_detection),
        ("streaming equivalence and transport", streaming_and_transport),
        ("protocol replay determinism", protocol_replay_determinism),
        ("mapper correctness", mapper_correctness),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{took:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail} [{took:.1} s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
