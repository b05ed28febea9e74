use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use tobe_core::session::{load_session, run_session, Clock, RunOptions, SessionPlan, SimulatedClock, WallClock};
use tobe_core::synth::{read_recording, replay as paced, write_recording, Recorder, SynthSpec};
use tobe_transport::{local_clock, resolve_streams, Error as TransportError, Inlet, Outlet, SampleChunk, StreamFilter, StreamInfo};
use tokio::runtime::Runtime;

use crate::bridge::Bridge;
use crate::{Status, UsageError};

/// Chunks of about a tenth of a second.
fn chunk_len(rate: f64) -> usize {
    ((rate / 10.0).round() as usize).max(1)
}

fn csv_header(out: &mut impl Write, labels: &[String]) -> io::Result<()> {
    writeln!(out, "t,{}", labels.join(","))
}

fn csv_rows(out: &mut impl Write, chunk: &SampleChunk, until: Option<f64>) -> io::Result<bool> {
    for (t, row) in chunk.rows() {
        if until.is_some_and(|u| t >= u) {
            return Ok(false);
        }
        write!(out, "{t}")?;
        for x in row {
            write!(out, ",{x}")?;
        }
        writeln!(out)?;
    }
    Ok(true)
}

/// Publishes chunks stamped on the local clock, paced so that a chunk goes
/// out once its last sample is due.
fn stream_paced(
    outlet: &Outlet,
    chunks: impl IntoIterator<Item = SampleChunk>,
    t0: f64,
    speed: f64,
    stop: &AtomicBool,
) -> anyhow::Result<Status> {
    let start = Instant::now();
    let origin = local_clock();
    for chunk in chunks {
        if stop.load(Ordering::SeqCst) {
            return Ok(Status::Interrupted);
        }
        let due = (chunk.last_timestamp().unwrap_or(t0) - t0) / speed;
        let ahead = due - start.elapsed().as_secs_f64();
        if ahead > 0.0 {
            thread::sleep(Duration::from_secs_f64(ahead));
        }
        let (ts, xs, n) = chunk.into_parts();
        let ts = ts.into_iter().map(|t| origin + (t - t0) / speed).collect();
        outlet.push_chunk(&SampleChunk::new(ts, xs, n)?)?;
    }
    // give connected inlets a moment to drain before the outlet closes
    thread::sleep(Duration::from_millis(500));
    Ok(Status::Done)
}

pub fn synth(spec: &Path, out: Option<&Path>, stream: bool, stop: &AtomicBool) -> anyhow::Result<Status> {
    let spec = SynthSpec::load(spec)?;
    let g = spec.generate()?;
    let n = chunk_len(g.meta.nominal_rate);
    if let Some(path) = out {
        let rows = write_recording(path, &g.meta, &g.signal.chunks(n))
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {rows} samples ({} s of {}) to {}", spec.duration_s, g.meta.modality, path.display());
        return Ok(Status::Done);
    }
    if !stream {
        return Err(UsageError("synth needs --out FILE or --stream".into()).into());
    }
    let outlet = Outlet::open(g.meta.clone())?;
    eprintln!(
        "streaming {:?} ({}, {} ch @ {} Hz) for {} s",
        g.meta.name,
        g.meta.modality,
        g.meta.channel_count(),
        g.meta.nominal_rate,
        spec.duration_s
    );
    stream_paced(&outlet, g.signal.chunks(n), 0.0, 1.0, stop)
}

pub fn replay(file: &Path, speed: f64, stream: bool, stop: &AtomicBool) -> anyhow::Result<Status> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(UsageError(format!("--speed must be a positive number, got {speed}")).into());
    }
    let rec = read_recording(file).with_context(|| format!("reading {}", file.display()))?;
    let n = chunk_len(rec.meta.nominal_rate);
    let t0 = rec.timestamps.first().copied().unwrap_or(0.0);
    if stream {
        let outlet = Outlet::open(rec.meta.clone())?;
        eprintln!("replaying {:?} at {speed}x as a stream ({:.1} s)", rec.meta.name, rec.duration() / speed);
        return stream_paced(&outlet, rec.chunks(n), t0, speed, stop);
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    csv_header(&mut out, &rec.meta.channel_labels)?;
    for chunk in paced(&rec, speed, n)? {
        if stop.load(Ordering::SeqCst) {
            out.flush()?;
            return Ok(Status::Interrupted);
        }
        csv_rows(&mut out, &chunk, None)?;
        out.flush()?;
    }
    Ok(Status::Done)
}

pub fn streams_list(wait: f64) -> anyhow::Result<Status> {
    let mut found = resolve_streams(&StreamFilter::any(), Duration::from_secs_f64(wait.max(0.0)))?;
    found.sort_by(|a, b| (&a.meta.name, &a.meta.source_id).cmp(&(&b.meta.name, &b.meta.source_id)));
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for s in &found {
        let m = &s.meta;
        writeln!(
            out,
            "{}\t{}\t{}\t{} Hz\t{}\t{}\t{}",
            m.name,
            m.modality,
            m.channel_labels.join(","),
            m.nominal_rate,
            m.unit,
            m.source_id,
            s.endpoint
        )?;
    }
    Ok(Status::Done)
}

fn find_stream(name: &str, wait: f64) -> anyhow::Result<StreamInfo> {
    resolve_streams(&StreamFilter::name(name), Duration::from_secs_f64(wait.max(0.0)))?
        .into_iter()
        .next()
        .ok_or_else(|| anyhow!("no stream named {name:?} found"))
}

/// Pulls chunks from `inlet` until `seconds` of samples have passed, the
/// stream ends or `stop` is raised.
fn pull_loop(
    inlet: &mut Inlet,
    seconds: Option<f64>,
    stop: &AtomicBool,
    mut each: impl FnMut(&SampleChunk, Option<f64>) -> anyhow::Result<bool>,
) -> anyhow::Result<Status> {
    let mut until = None;
    loop {
        if stop.load(Ordering::SeqCst) {
            return Ok(Status::Interrupted);
        }
        match inlet.pull_chunk(Duration::from_millis(100)) {
            Ok(Some(chunk)) => {
                if until.is_none() {
                    until = seconds.zip(chunk.timestamps().first()).map(|(s, t)| t + s);
                }
                if !each(&chunk, until)? {
                    return Ok(Status::Done);
                }
            }
            Ok(None) => {}
            Err(TransportError::Disconnected(why)) => {
                eprintln!("stream ended: {why}");
                return Ok(Status::Done);
            }
            Err(e) => return Err(e.into()),
        }
    }
}

pub fn streams_dump(name: &str, seconds: Option<f64>, wait: f64, stop: &AtomicBool) -> anyhow::Result<Status> {
    let info = find_stream(name, wait)?;
    let mut inlet = Inlet::open(&info)?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    csv_header(&mut out, &info.meta.channel_labels)?;
    let status = pull_loop(&mut inlet, seconds, stop, |chunk, until| {
        let more = csv_rows(&mut out, chunk, until)?;
        out.flush()?;
        Ok(more)
    });
    out.flush()?;
    status
}

pub fn record(name: &str, file: &Path, seconds: Option<f64>, wait: f64, stop: &AtomicBool) -> anyhow::Result<Status> {
    let info = find_stream(name, wait)?;
    let mut inlet = Inlet::open(&info)?;
    let out = BufWriter::new(File::create(file).with_context(|| format!("creating {}", file.display()))?);
    let mut rec = Recorder::new(out, &info.meta)?;
    eprintln!("recording {:?} to {}", info.meta.name, file.display());
    let status = pull_loop(&mut inlet, seconds, stop, |chunk, until| {
        let keep = chunk.timestamps().partition_point(|&t| until.is_none_or(|u| t < u));
        if keep == chunk.n_samples() {
            rec.write_chunk(chunk)?;
            return Ok(true);
        }
        if keep > 0 {
            let n = chunk.n_channels();
            let part = SampleChunk::new(chunk.timestamps()[..keep].to_vec(), chunk.samples()[..keep * n].to_vec(), n)?;
            rec.write_chunk(&part)?;
        }
        Ok(false)
    });
    let rows = rec.rows();
    rec.finish()?.flush()?;
    eprintln!("wrote {rows} samples");
    status
}

pub struct RunArgs<'a> {
    pub session: &'a Path,
    pub bridge: Option<u16>,
    pub replay_clock: bool,
    pub log: Option<&'a Path>,
}

pub fn run(args: RunArgs<'_>, rt: &Runtime, stop: Arc<AtomicBool>) -> anyhow::Result<Status> {
    let cfg = load_session(args.session)?;
    let plan = SessionPlan::from_config(&cfg)?;
    let mut clock: Box<dyn Clock> = if args.replay_clock {
        Box::new(SimulatedClock::new())
    } else {
        Box::new(WallClock::new())
    };
    let live = !clock.is_simulated();

    let (control_tx, control_rx) = mpsc::channel();
    let bridge = match args.bridge {
        Some(port) => {
            let addr = SocketAddr::from((Ipv4Addr::UNSPECIFIED, port));
            let b = rt
                .block_on(Bridge::bind(addr, Some(control_tx.clone())))
                .map_err(|e| UsageError(format!("cannot serve the bridge on port {port}: {e}")))?;
            eprintln!("bridge listening on ws://{}/ws", b.local_addr());
            Some(b)
        }
        None => None,
    };
    drop(control_tx);

    let mut out: Box<dyn Write> = match args.log {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    let opts = RunOptions { control: Some(control_rx), stop: Some(stop.clone()) };
    let mut sink = |e: &tobe_core::session::SessionEvent| -> tobe_core::Result<()> {
        out.write_all(e.to_json().as_bytes())?;
        out.write_all(b"\n")?;
        if live {
            out.flush()?;
        }
        if let Some(b) = &bridge {
            b.publish_event(e);
        }
        Ok(())
    };
    let summary = run_session(plan, clock.as_mut(), &mut sink, opts);
    out.flush()?;
    if let Some(b) = bridge {
        rt.block_on(b.shutdown(Duration::from_secs(1)));
    }
    let summary = summary?;
    eprintln!(
        "session {} at t = {} s, {} events",
        if summary.interrupted { "stopped" } else { "completed" },
        summary.end_t,
        summary.events
    );
    // a stop requested from the dashboard is a normal end; only a signal counts as interrupted
    Ok(if summary.interrupted && stop.load(Ordering::SeqCst) { Status::Interrupted } else { Status::Done })
}
