use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tobe_transport::SampleChunk;

use super::pipeline::{PipelineOutput, UserPipeline};
use super::protocol::{gauge_level, group_aggregate, phase_at, GaugeState};
use super::source::{MemorySource, SampleSource, SourceState, StreamSource};
use super::{PhaseId, RelaxationProtocol, SessionConfig, SourceConfig};
use crate::mapper::{default_avatar, record_timeline, shared_avatar, AvatarConfig, GestureSample, Mapper, Mode, RenderFrame};
use crate::metrics::{BeatEvent, BlinkEvent, CoherenceTracker, MetricId, MetricValue};
use crate::signal::NormalizeMethod;
use crate::synth::read_recording;
use crate::{Error, Result};

/// Session time source. Simulated clocks never sleep, so a recorded
/// session replays as fast as it can be computed.
pub trait Clock: Send {
    fn now(&self) -> f64;
    /// Returns once session time `t` has been reached.
    fn wait_until(&mut self, t: f64);
    fn is_simulated(&self) -> bool;
    fn pause(&mut self) {}
    fn resume(&mut self) {}
}

#[derive(Debug, Default)]
pub struct SimulatedClock {
    now: f64,
}

impl SimulatedClock {
    pub fn new() -> Self {
        SimulatedClock::default()
    }
}

impl Clock for SimulatedClock {
    fn now(&self) -> f64 {
        self.now
    }

    fn wait_until(&mut self, t: f64) {
        self.now = self.now.max(t);
    }

    fn is_simulated(&self) -> bool {
        true
    }
}

/// Wall time since the session started, minus time spent paused.
#[derive(Debug)]
pub struct WallClock {
    start: Instant,
    paused: Duration,
    paused_at: Option<Instant>,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock { start: Instant::now(), paused: Duration::ZERO, paused_at: None }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        WallClock::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        let held = self.paused + self.paused_at.map_or(Duration::ZERO, |p| p.elapsed());
        self.start.elapsed().saturating_sub(held).as_secs_f64()
    }

    fn wait_until(&mut self, t: f64) {
        let ahead = t - self.now();
        if ahead > 0.0 {
            thread::sleep(Duration::from_secs_f64(ahead));
        }
    }

    fn is_simulated(&self) -> bool {
        false
    }

    fn pause(&mut self) {
        self.paused_at.get_or_insert_with(Instant::now);
    }

    fn resume(&mut self) {
        if let Some(p) = self.paused_at.take() {
            self.paused += p.elapsed();
        }
    }
}

/// What happened; serialized as the `payload` of a log record.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum EventBody {
    SessionStart { users: Vec<String>, duration_s: Option<f64>, simulated: bool },
    SessionEnd { interrupted: bool },
    Protocol { phase_id: PhaseId, index: usize, start_s: f64, end_s: f64 },
    Gauge(GaugeState),
    Metric(MetricValue),
    Group(MetricValue),
    Beat(BeatEvent),
    Blink(BlinkEvent),
    Render(RenderFrame),
    Degraded { source: String, reason: String },
    Recovered { source: String },
    Control { command: String, version: Option<u64> },
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::SessionStart { .. } => "session_start",
            EventBody::SessionEnd { .. } => "session_end",
            EventBody::Protocol { .. } => "protocol",
            EventBody::Gauge(_) => "gauge",
            EventBody::Metric(_) => "metric",
            EventBody::Group(_) => "group",
            EventBody::Beat(_) => "beat",
            EventBody::Blink(_) => "blink",
            EventBody::Render(_) => "render",
            EventBody::Degraded { .. } => "degraded",
            EventBody::Recovered { .. } => "recovered",
            EventBody::Control { .. } => "control",
        }
    }
}

/// One event-log record. `t` is the session time at which the session
/// emitted it; measurement times (beat instants, window ends) are inside
/// the payload.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionEvent {
    pub t: f64,
    pub user_id: Option<String>,
    pub body: EventBody,
}

#[derive(Serialize)]
struct Wire<'a> {
    t: f64,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    user_id: Option<&'a str>,
    payload: &'a EventBody,
}

impl Serialize for SessionEvent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Wire { t: self.t, kind: self.body.kind(), user_id: self.user_id.as_deref(), payload: &self.body }.serialize(s)
    }
}

impl SessionEvent {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

/// A log record read back from NDJSON.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct LogRecord {
    pub t: f64,
    pub kind: String,
    #[serde(default)]
    pub user_id: Option<String>,
    pub payload: serde_json::Value,
}

/// Operator commands accepted while a session runs.
#[derive(Debug, Clone)]
pub enum Control {
    Bind { user_id: String, metric: MetricId, anchor: String, timeline: String, mode: Mode },
    UploadTimeline { user_id: String, timeline_id: String, sprite: String, samples: Vec<GestureSample> },
    /// Restarts normalization for one metric, or all of a user's metrics.
    Calibrate { user_id: String, metric: Option<MetricId> },
    Pause,
    Resume,
    Stop,
}

pub type ControlReply = std::result::Result<serde_json::Value, String>;

pub struct ControlRequest {
    pub command: Control,
    pub reply: Sender<ControlReply>,
}

impl ControlRequest {
    pub fn new(command: Control) -> (Self, Receiver<ControlReply>) {
        let (tx, rx) = mpsc::channel();
        (ControlRequest { command, reply: tx }, rx)
    }
}

/// One user's inputs ready to run.
pub struct UserPlan {
    pub user_id: String,
    pub metrics: Vec<MetricId>,
    pub sources: Vec<Box<dyn SampleSource>>,
    pub avatar: AvatarConfig,
    pub normalizers: BTreeMap<MetricId, NormalizeMethod>,
}

/// A validated config with its sources instantiated.
pub struct SessionPlan {
    pub users: Vec<UserPlan>,
    pub protocol: Option<RelaxationProtocol>,
    /// `None` runs until stopped.
    pub duration_s: Option<f64>,
    pub render_hz: f64,
    pub pair: Option<(usize, usize)>,
}

/// Seed for one user's copy of a generator, so users sharing a spec get
/// independent noise.
pub fn user_seed(seed: u64, user_id: &str) -> u64 {
    // FNV-1a over the id, folded into the seed with a splitmix64 round
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in user_id.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SessionPlan {
    pub fn from_config(cfg: &SessionConfig) -> Result<Self> {
        cfg.validate()?;
        let mut users = Vec::new();
        let mut bounded_end: Option<f64> = None;
        let mut live = false;
        for u in &cfg.users {
            let mut sources: Vec<Box<dyn SampleSource>> = Vec::new();
            for s in &u.sources {
                let src: Box<dyn SampleSource> = match s {
                    SourceConfig::Generator(spec) => {
                        let g = spec.with_seed(user_seed(spec.seed(), &u.user_id)).generate()?;
                        Box::new(MemorySource::from_generated(g)?)
                    }
                    SourceConfig::Recording(p) => {
                        Box::new(MemorySource::from_recording(read_recording(cfg.resolve(p))?)?)
                    }
                    SourceConfig::Stream { name, modality } => {
                        live = true;
                        Box::new(StreamSource::open(name, *modality, Duration::from_secs(2))?)
                    }
                };
                if let Some(end) = src.end_time() {
                    bounded_end = Some(bounded_end.map_or(end, |b: f64| b.max(end)));
                }
                sources.push(src);
            }
            let avatar = match &u.avatar {
                Some(p) => AvatarConfig::load(cfg.resolve(p))?,
                None => default_avatar(&u.user_id, &u.metrics),
            };
            users.push(UserPlan {
                user_id: u.user_id.clone(),
                metrics: u.metrics.clone(),
                sources,
                avatar,
                normalizers: u.normalizers.clone(),
            });
        }
        let duration_s = match (&cfg.protocol, cfg.duration_s) {
            (Some(p), _) => Some(p.total_s()),
            (None, Some(d)) => Some(d),
            (None, None) if live => None,
            (None, None) => bounded_end.map(|e| (e * cfg.render_hz).ceil() / cfg.render_hz),
        };
        Ok(SessionPlan {
            users,
            protocol: cfg.protocol.clone(),
            duration_s,
            render_hz: cfg.render_hz,
            pair: cfg.synchrony_pair(),
        })
    }
}

#[derive(Default)]
pub struct RunOptions {
    pub control: Option<Receiver<ControlRequest>>,
    /// Raised externally (e.g. on SIGINT) to end the session early.
    pub stop: Option<Arc<AtomicBool>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionSummary {
    pub interrupted: bool,
    pub events: u64,
    pub end_t: f64,
}

enum ToWorker {
    Step(f64),
    Control(Control, Sender<ControlReply>),
}

#[derive(Default)]
struct StepOut {
    events: Vec<SessionEvent>,
    hr_grid: Vec<(i64, f64)>,
}

struct UserRuntime {
    user_id: String,
    sources: Vec<Box<dyn SampleSource>>,
    names: Vec<String>,
    states: Vec<SourceState>,
    pipeline: UserPipeline,
    mapper: Mapper,
    failed: bool,
    queued: Vec<EventBody>,
    chunks: Vec<SampleChunk>,
    out: PipelineOutput,
}

impl UserRuntime {
    fn step(&mut self, until: f64) -> StepOut {
        let mut bodies = std::mem::take(&mut self.queued);
        let mut res = StepOut::default();
        let (mut values, mut triggers) = (Vec::new(), Vec::new());
        for i in 0..self.sources.len() {
            self.chunks.clear();
            let state = self.sources[i].poll(until, &mut self.chunks);
            for c in &self.chunks {
                self.out.clear();
                if let Err(e) = self.pipeline.push(i, c, &mut self.out) {
                    self.failed = true;
                    bodies.push(EventBody::Degraded { source: "pipeline".into(), reason: e.to_string() });
                    break;
                }
                bodies.extend(self.out.values.iter().map(|v| EventBody::Metric(*v)));
                bodies.extend(self.out.beats.iter().map(|b| EventBody::Beat(*b)));
                bodies.extend(self.out.blinks.iter().map(|b| EventBody::Blink(*b)));
                values.extend_from_slice(&self.out.values);
                triggers.extend_from_slice(&self.out.triggers);
                res.hr_grid.extend_from_slice(&self.out.hr_grid);
            }
            if self.failed {
                break;
            }
            if state != self.states[i] {
                let source = self.names[i].clone();
                bodies.push(match &state {
                    SourceState::Live => EventBody::Recovered { source },
                    SourceState::Ended => EventBody::Degraded { source, reason: "source ended".into() },
                    SourceState::Failed(r) => EventBody::Degraded { source, reason: r.clone() },
                });
                self.states[i] = state;
            }
        }
        if !self.failed {
            let frame = self.mapper.tick(until, &values, &triggers);
            if !frame.items.is_empty() {
                bodies.push(EventBody::Render(frame));
            }
        }
        res.events = bodies
            .into_iter()
            .map(|body| SessionEvent { t: until, user_id: Some(self.user_id.clone()), body })
            .collect();
        res
    }

    fn control(&mut self, c: Control) -> ControlReply {
        match c {
            Control::Bind { metric, anchor, timeline, mode, .. } => {
                let version = self.mapper.bind(metric, &anchor, &timeline, mode).map_err(|e| e.to_string())?;
                self.queued.push(EventBody::Control { command: format!("bind {metric} {anchor}"), version: Some(version) });
                Ok(serde_json::json!({ "version": version }))
            }
            Control::UploadTimeline { timeline_id, sprite, samples, .. } => {
                let tl = record_timeline(timeline_id, sprite, &samples).map_err(|e| e.to_string())?;
                let version = self.mapper.upsert_timeline(tl.clone());
                self.queued.push(EventBody::Control { command: format!("timeline {}", tl.id), version: Some(version) });
                Ok(serde_json::json!({ "version": version, "timeline": tl }))
            }
            Control::Calibrate { metric, .. } => {
                self.pipeline.recalibrate(metric);
                let what = metric.map_or("all".to_string(), |m| m.to_string());
                self.queued.push(EventBody::Control { command: format!("calibrate {what}"), version: None });
                Ok(serde_json::json!({ "calibrating": what }))
            }
            Control::Pause | Control::Resume | Control::Stop => Err("not a user command".into()),
        }
    }
}

fn panic_text(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

fn spawn_worker(mut rt: UserRuntime) -> (Sender<ToWorker>, Receiver<StepOut>, JoinHandle<()>) {
    let (tx, rx) = mpsc::channel::<ToWorker>();
    let (otx, orx) = mpsc::channel::<StepOut>();
    let name = format!("user-{}", rt.user_id);
    let handle = thread::Builder::new()
        .name(name)
        .spawn(move || {
            for msg in rx {
                match msg {
                    ToWorker::Step(until) => {
                        let out = if rt.failed {
                            StepOut::default()
                        } else {
                            match panic::catch_unwind(AssertUnwindSafe(|| rt.step(until))) {
                                Ok(out) => out,
                                Err(p) => {
                                    rt.failed = true;
                                    let body = EventBody::Degraded { source: "pipeline".into(), reason: panic_text(p) };
                                    StepOut {
                                        events: vec![SessionEvent { t: until, user_id: Some(rt.user_id.clone()), body }],
                                        hr_grid: vec![],
                                    }
                                }
                            }
                        };
                        if otx.send(out).is_err() {
                            return;
                        }
                    }
                    ToWorker::Control(c, reply) => {
                        let r = if rt.failed { Err(format!("user {:?} is degraded", rt.user_id)) } else { rt.control(c) };
                        let _ = reply.send(r);
                    }
                }
            }
        })
        .expect("spawn user pipeline thread");
    (tx, orx, handle)
}

struct Worker {
    user_id: String,
    tx: Sender<ToWorker>,
    rx: Receiver<StepOut>,
    handle: Option<JoinHandle<()>>,
    alive: bool,
}

/// Runs a session to completion (or until stopped), handing every event to
/// `sink` in log order: session time, then user id with session-wide
/// events first.
///
/// Each user's pipeline runs on its own thread; a failing source or
/// pipeline degrades only that user. With a simulated clock the log is a
/// pure function of the plan.
pub fn run_session(
    plan: SessionPlan,
    clock: &mut dyn Clock,
    sink: &mut dyn FnMut(&SessionEvent) -> Result<()>,
    opts: RunOptions,
) -> Result<SessionSummary> {
    let SessionPlan { users, protocol, duration_s, render_hz, pair } = plan;
    if clock.is_simulated() {
        if users.iter().flat_map(|u| &u.sources).any(|s| s.end_time().is_none()) {
            return Err(Error::config("live stream sources need the wall clock"));
        }
        if duration_s.is_none() {
            return Err(Error::config("a simulated session needs a bounded duration"));
        }
    }
    if !(render_hz > 0.0) {
        return Err(Error::config("render_hz must be positive"));
    }

    let user_ids: Vec<String> = users.iter().map(|u| u.user_id.clone()).collect();
    let mut group_metrics: Vec<MetricId> = MetricId::ALL
        .into_iter()
        .filter(|m| *m != MetricId::PairSynchrony && users.iter().filter(|u| u.metrics.contains(m)).count() >= 2)
        .collect();
    group_metrics.sort();

    let origin_local = tobe_transport::local_clock();
    let mut workers = Vec::new();
    for mut u in users {
        for s in &mut u.sources {
            s.start(origin_local);
        }
        let metas: Vec<_> = u.sources.iter().map(|s| s.meta()).collect();
        let pipeline = UserPipeline::new(&metas, &u.metrics, &u.normalizers)
            .map_err(|e| Error::config(format!("user {:?}: {e}", u.user_id)))?;
        let names = metas.iter().map(|m| m.name.clone()).collect();
        let states = vec![SourceState::Live; u.sources.len()];
        let rt = UserRuntime {
            user_id: u.user_id.clone(),
            sources: u.sources,
            names,
            states,
            pipeline,
            mapper: Mapper::new(u.avatar)?,
            failed: false,
            queued: vec![],
            chunks: vec![],
            out: PipelineOutput::default(),
        };
        let (tx, rx, handle) = spawn_worker(rt);
        workers.push(Worker { user_id: u.user_id, tx, rx, handle: Some(handle), alive: true });
    }

    let mut count = 0u64;
    let mut emit = |batch: &mut Vec<SessionEvent>, sink: &mut dyn FnMut(&SessionEvent) -> Result<()>| -> Result<()> {
        batch.sort_by(|a, b| a.t.total_cmp(&b.t).then_with(|| a.user_id.cmp(&b.user_id)));
        for e in batch.drain(..) {
            sink(&e)?;
            count += 1;
        }
        Ok(())
    };

    let schedule = protocol.as_ref().map(|p| p.schedule()).unwrap_or_default();
    let mut batch = vec![SessionEvent {
        t: 0.0,
        user_id: None,
        body: EventBody::SessionStart { users: user_ids, duration_s, simulated: clock.is_simulated() },
    }];
    if let Some(&(start_s, end_s, phase_id)) = schedule.first() {
        batch.push(SessionEvent { t: 0.0, user_id: None, body: EventBody::Protocol { phase_id, index: 0, start_s, end_s } });
    }
    emit(&mut batch, sink)?;

    let in_sync_window = |t: f64| match &protocol {
        Some(p) => matches!(phase_at(p, t), Some((PhaseId::Sync, _))),
        None => true,
    };
    let mut synchrony = pair.map(|_| CoherenceTracker::synchrony());
    let mut shared = match pair {
        Some(_) => Some(Mapper::new(shared_avatar())?),
        None => None,
    };
    let mut latest: BTreeMap<(MetricId, String), MetricValue> = BTreeMap::new();

    let stop = opts.stop.unwrap_or_default();
    let mut paused = false;
    let mut k: u64 = 0;
    let mut prev_end = 0.0;
    let interrupted = loop {
        if let Some(rx) = &opts.control {
            loop {
                let req = if paused {
                    match rx.recv_timeout(Duration::from_millis(50)) {
                        Ok(r) => Some(r),
                        Err(RecvTimeoutError::Timeout) => None,
                        Err(RecvTimeoutError::Disconnected) => {
                            paused = false;
                            clock.resume();
                            None
                        }
                    }
                } else {
                    rx.try_recv().ok()
                };
                match req {
                    Some(ControlRequest { command, reply }) => match command {
                        Control::Pause => {
                            paused = true;
                            clock.pause();
                            let _ = reply.send(Ok(serde_json::json!({ "paused": true })));
                        }
                        Control::Resume => {
                            paused = false;
                            clock.resume();
                            let _ = reply.send(Ok(serde_json::json!({ "paused": false })));
                        }
                        Control::Stop => {
                            stop.store(true, Ordering::SeqCst);
                            let _ = reply.send(Ok(serde_json::json!({ "stopping": true })));
                        }
                        c => {
                            let who = match &c {
                                Control::Bind { user_id, .. }
                                | Control::UploadTimeline { user_id, .. }
                                | Control::Calibrate { user_id, .. } => user_id.clone(),
                                _ => unreachable!(),
                            };
                            match workers.iter().find(|w| w.user_id == who && w.alive) {
                                Some(w) => {
                                    if w.tx.send(ToWorker::Control(c, reply.clone())).is_err() {
                                        let _ = reply.send(Err(format!("user {who:?} is not running")));
                                    }
                                }
                                None => {
                                    let _ = reply.send(Err(format!("unknown user {who:?}")));
                                }
                            }
                        }
                    },
                    None if paused && !stop.load(Ordering::SeqCst) => continue,
                    None => break,
                }
            }
        }
        if stop.load(Ordering::SeqCst) {
            break true;
        }

        k += 1;
        let mut end = k as f64 / render_hz;
        let last = duration_s.is_some_and(|d| end >= d);
        if let (true, Some(d)) = (last, duration_s) {
            end = d;
        }
        clock.wait_until(end);

        for w in workers.iter().filter(|w| w.alive) {
            let _ = w.tx.send(ToWorker::Step(end));
        }
        let mut grids = vec![Vec::new(); workers.len()];
        for (i, w) in workers.iter_mut().enumerate() {
            if !w.alive {
                continue;
            }
            match w.rx.recv() {
                Ok(out) => {
                    for e in &out.events {
                        if let (EventBody::Metric(v), Some(u)) = (&e.body, &e.user_id) {
                            latest.insert((v.metric_id, u.clone()), *v);
                        }
                    }
                    batch.extend(out.events);
                    grids[i] = out.hr_grid;
                }
                Err(_) => {
                    w.alive = false;
                    batch.push(SessionEvent {
                        t: end,
                        user_id: Some(w.user_id.clone()),
                        body: EventBody::Degraded { source: "pipeline".into(), reason: "pipeline thread stopped".into() },
                    });
                }
            }
        }

        for (i, &(start_s, end_s, phase_id)) in schedule.iter().enumerate().skip(1) {
            if start_s > prev_end && start_s <= end {
                batch.push(SessionEvent {
                    t: start_s,
                    user_id: None,
                    body: EventBody::Protocol { phase_id, index: i, start_s, end_s },
                });
            }
        }
        if let Some(g) = protocol.as_ref().and_then(|p| gauge_level(p, end)) {
            batch.push(SessionEvent { t: end, user_id: None, body: EventBody::Gauge(g) });
        }

        if let (Some(tr), Some((a, b))) = (&mut synchrony, pair) {
            for &(k, v) in &grids[a] {
                tr.push_a(k, v);
            }
            for &(k, v) in &grids[b] {
                tr.push_b(k, v);
            }
            let mut vals = Vec::new();
            tr.poll(&mut vals);
            vals.retain(|v| in_sync_window(v.t));
            for v in &vals {
                batch.push(SessionEvent { t: end, user_id: None, body: EventBody::Metric(*v) });
            }
            if let Some(m) = &mut shared {
                if in_sync_window(end) {
                    let frame = m.tick(end, &vals, &[]);
                    batch.push(SessionEvent { t: end, user_id: None, body: EventBody::Render(frame) });
                }
            }
        }

        if end.floor() > prev_end.floor() {
            for &m in &group_metrics {
                let vals = latest.range((m, String::new())..).take_while(|(key, _)| key.0 == m).map(|(_, v)| v);
                if let Some(g) = group_aggregate(vals, m, end) {
                    batch.push(SessionEvent { t: end, user_id: None, body: EventBody::Group(g) });
                }
            }
        }

        emit(&mut batch, sink)?;
        prev_end = end;
        if last {
            break false;
        }
    };

    batch.push(SessionEvent { t: prev_end, user_id: None, body: EventBody::SessionEnd { interrupted } });
    emit(&mut batch, sink)?;

    for mut w in workers {
        drop(w.tx);
        if let Some(h) = w.handle.take() {
            let _ = h.join();
        }
    }
    Ok(SessionSummary { interrupted, events: count, end_t: prev_end })
}
