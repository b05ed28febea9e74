use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use tobe_cli::commands::{self, RunArgs};
use tobe_cli::{exit_code, Status, EXIT_INTERRUPTED, EXIT_OK};
use tokio::runtime::Runtime;

#[derive(Parser)]
#[command(name = "tobe", version, about = "Biofeedback signal streaming, metrics and sessions")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic signal from a spec file
    Synth {
        spec: PathBuf,
        /// Write a recording file
        #[arg(long, value_name = "FILE", conflicts_with = "stream", required_unless_present = "stream")]
        out: Option<PathBuf>,
        /// Publish as a live stream, paced in real time
        #[arg(long)]
        stream: bool,
    },
    /// Run a session, writing its event log as NDJSON
    Run {
        session: PathBuf,
        /// Serve the dashboard bridge on this port
        #[arg(long, value_name = "PORT")]
        bridge: Option<u16>,
        /// Run as fast as possible on a simulated clock (recordings and generators only)
        #[arg(long)]
        replay_clock: bool,
        /// Write the event log here instead of stdout
        #[arg(long, value_name = "FILE")]
        log: Option<PathBuf>,
    },
    /// Discover and inspect live streams
    Streams {
        #[command(subcommand)]
        action: StreamsCmd,
    },
    /// Save a live stream to a recording file
    Record {
        stream: String,
        file: PathBuf,
        /// Stop after this many seconds of samples
        #[arg(long)]
        seconds: Option<f64>,
        /// How long to look for the stream
        #[arg(long, default_value_t = 3.0, value_name = "SECONDS")]
        wait: f64,
    },
    /// Play back a recording as CSV or as a live stream
    Replay {
        file: PathBuf,
        /// Playback rate relative to real time
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        #[arg(long)]
        stream: bool,
    },
}

#[derive(Subcommand)]
enum StreamsCmd {
    /// List streams advertised on the network
    List {
        /// How long to listen for advertisements
        #[arg(long, default_value_t = 2.0, value_name = "SECONDS")]
        wait: f64,
    },
    /// Print a stream's samples as CSV
    Dump {
        name: String,
        /// Stop after this many seconds of samples
        #[arg(long)]
        seconds: Option<f64>,
        #[arg(long, default_value_t = 3.0, value_name = "SECONDS")]
        wait: f64,
    },
}

/// Raises `stop` on the first SIGINT; a second one exits at once.
fn watch_interrupt(rt: &Runtime, stop: Arc<AtomicBool>) {
    #[cfg(unix)]
    let mut sig = {
        use tokio::signal::unix::{signal, SignalKind};
        let _guard = rt.enter();
        signal(SignalKind::interrupt()).expect("installing the SIGINT handler")
    };
    rt.spawn(async move {
        loop {
            #[cfg(unix)]
            let got = sig.recv().await.is_some();
            #[cfg(not(unix))]
            let got = tokio::signal::ctrl_c().await.is_ok();
            if !got {
                return;
            }
            if stop.swap(true, Ordering::SeqCst) {
                std::process::exit(EXIT_INTERRUPTED.into());
            }
            log::info!("interrupted; finishing up");
        }
    });
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let rt = Runtime::new().expect("starting the async runtime");
    let stop = Arc::new(AtomicBool::new(false));
    watch_interrupt(&rt, stop.clone());

    let res = match &cli.cmd {
        Cmd::Synth { spec, out, stream } => commands::synth(spec, out.as_deref(), *stream, &stop),
        Cmd::Run { session, bridge, replay_clock, log } => commands::run(
            RunArgs { session, bridge: *bridge, replay_clock: *replay_clock, log: log.as_deref() },
            &rt,
            stop.clone(),
        ),
        Cmd::Streams { action: StreamsCmd::List { wait } } => commands::streams_list(*wait),
        Cmd::Streams { action: StreamsCmd::Dump { name, seconds, wait } } => {
            commands::streams_dump(name, *seconds, *wait, &stop)
        }
        Cmd::Record { stream, file, seconds, wait } => commands::record(stream, file, *seconds, *wait, &stop),
        Cmd::Replay { file, speed, stream } => commands::replay(file, *speed, *stream, &stop),
    };
    let code = match res {
        Ok(Status::Done) => EXIT_OK,
        Ok(Status::Interrupted) => EXIT_INTERRUPTED,
        Err(e) => {
            eprintln!("tobe: {e:#}");
            exit_code(&e)
        }
    };
    rt.shutdown_timeout(std::time::Duration::from_millis(200));
    ExitCode::from(code)
}
