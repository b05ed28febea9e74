//! End-to-end runs of the `tobe` binary.

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::thread;
use std::time::{Duration, Instant};

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

/// Each test gets its own discovery port so parallel tests don't see each
/// other's streams.
fn tobe(port_slot: u16) -> Command {
    let port = 30000 + (std::process::id() % 5000) as u16 * 5 + port_slot;
    let mut c = Command::new(env!("CARGO_BIN_EXE_tobe"));
    c.env("TOBE_DISCOVERY_PORT", port.to_string());
    c
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawning tobe")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout).lines().map(str::to_owned).collect()
}

fn send_sigint(child: &Child) {
    let ok = Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap().success();
    assert!(ok, "kill -INT failed");
}

#[test]
fn out_of_range_bpm_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.yaml");
    std::fs::write(&spec, "duration_s: 5\necg: {fs: 250, bpm_profile: [{t: 0, bpm: 900}]}\n").unwrap();
    let out = run(tobe(0).arg("synth").arg(&spec).arg("--out").arg(dir.path().join("x.csv")));
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("bpm"), "{}", stderr(&out));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn unknown_spec_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("typo.yaml");
    std::fs::write(&spec, "duration_s: 5\necg: {fs: 250, bpm_profile: [{t: 0, bpm: 60}], nosie_uV: 3}\n").unwrap();
    let out = run(tobe(0).arg("synth").arg(&spec).arg("--out").arg(dir.path().join("x.csv")));
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nosie_uV"), "{}", stderr(&out));
}

#[test]
fn synth_writes_a_recording() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ecg.csv");
    let out = run(tobe(0).arg("synth").arg(repo("configs/ecg.yaml")).arg("--out").arg(&file));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&file).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# tobe-recording"));
    // 60 s at 250 Hz
    assert_eq!(lines.count(), 15000);
}

#[test]
fn replay_prints_csv_and_rejects_bad_speed() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("belt.csv");
    assert_eq!(code(&run(tobe(0).arg("synth").arg(repo("configs/belt.yaml")).arg("--out").arg(&file))), 0);
    let out = run(tobe(0).arg("replay").arg(&file).args(["--speed", "1000"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let lines = stdout_lines(&out);
    assert_eq!(lines[0], "t,BELT");
    assert_eq!(lines.len(), 1 + 3000);
    for bad in ["0", "-1", "nan"] {
        let out = run(tobe(0).arg("replay").arg(&file).args(["--speed", bad]));
        assert_eq!(code(&out), 2, "speed {bad}: {}", stderr(&out));
    }
}

#[test]
fn empty_stream_list_exits_0() {
    let out = run(tobe(1).args(["streams", "list", "--wait", "0.3"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn dumping_an_unknown_stream_exits_1() {
    let out = run(tobe(2).args(["streams", "dump", "nobody", "--wait", "0.3"]));
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("nobody"));
}

#[test]
fn synthesized_stream_is_listed_dumped_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut synth = tobe(3)
        .arg("synth")
        .arg(repo("configs/ecg.yaml"))
        .arg("--stream")
        .stderr(Stdio::null())
        .spawn()
        .unwrap();

    let list = run(tobe(3).args(["streams", "list", "--wait", "1.5"]));
    assert_eq!(code(&list), 0);
    let lines = stdout_lines(&list);
    assert_eq!(lines.len(), 1, "{lines:?}");
    let cols: Vec<&str> = lines[0].split('\t').collect();
    assert_eq!(&cols[..4], &["chest-ecg", "ECG", "ECG", "250 Hz"]);

    let dump = run(tobe(3).args(["streams", "dump", "chest-ecg", "--seconds", "1"]));
    assert_eq!(code(&dump), 0, "{}", stderr(&dump));
    let rows = stdout_lines(&dump);
    assert_eq!(rows[0], "t,ECG");
    let n = rows.len() - 1;
    assert!((249..=251).contains(&n), "{n} rows in one second");
    let ts: Vec<f64> = rows[1..].iter().map(|r| r.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| (w[1] - w[0] - 0.004).abs() < 1e-6));

    let file = dir.path().join("rec.csv");
    let rec = run(tobe(3).args(["record", "chest-ecg"]).arg(&file).args(["--seconds", "2"]));
    assert_eq!(code(&rec), 0, "{}", stderr(&rec));
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.starts_with("# tobe-recording v1 name=chest-ecg modality=ECG rate=250"));
    assert_eq!(text.lines().count(), 1 + 500);

    send_sigint(&synth);
    assert_eq!(synth.wait().unwrap().code(), Some(130));
}

#[test]
fn replay_clock_session_writes_a_complete_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("pair.ndjson");
    let t = Instant::now();
    let out = run(tobe(0).arg("run").arg(repo("configs/pair.yaml")).arg("--replay-clock").arg("--log").arg(&log));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(t.elapsed() < Duration::from_secs(30));
    let records: Vec<serde_json::Value> =
        std::fs::read_to_string(&log).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records[0]["kind"], "session_start");
    let last = records.last().unwrap();
    assert_eq!(last["kind"], "session_end");
    assert_eq!(last["payload"]["interrupted"], false);
    assert_eq!(last["t"], 90.0);
    let phases: Vec<&str> =
        records.iter().filter(|r| r["kind"] == "protocol").map(|r| r["payload"]["phase_id"].as_str().unwrap()).collect();
    assert_eq!(phases, ["GUIDED", "SOLO", "SYNC"]);
    assert!(records.iter().any(|r| r["kind"] == "metric" && r["payload"]["metric_id"] == "PAIR_SYNCHRONY"));

    // same input, same log
    let again = dir.path().join("again.ndjson");
    run(tobe(0).arg("run").arg(repo("configs/pair.yaml")).arg("--replay-clock").arg("--log").arg(&again));
    assert_eq!(std::fs::read(&log).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn invalid_session_exits_2_before_starting() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.yaml");
    std::fs::write(
        &cfg,
        "users:\n  - user_id: u\n    sources:\n      - generator: {duration_s: 5, respiration: {fs: 50, period_s: 10, amplitude: 1}}\n    metrics: [HEART_RATE]\n",
    )
    .unwrap();
    let out = run(tobe(0).arg("run").arg(&cfg).arg("--replay-clock"));
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("HEART_RATE"));
    assert!(out.stdout.is_empty());
}

#[test]
fn sigint_flushes_the_log_and_exits_130() {
    let mut child = tobe(4)
        .arg("run")
        .arg(repo("configs/pair.yaml"))
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    // wait until the session is under way
    let first = lines.next().unwrap().unwrap();
    assert!(first.contains("session_start"));
    thread::sleep(Duration::from_millis(1200));
    send_sigint(&child);
    let rest: Vec<String> = lines.map(Result::unwrap).collect();
    assert_eq!(child.wait().unwrap().code(), Some(130));
    let last: serde_json::Value = serde_json::from_str(rest.last().unwrap()).unwrap();
    assert_eq!(last["kind"], "session_end");
    assert_eq!(last["payload"]["interrupted"], true);
    assert!(last["t"].as_f64().unwrap() < 10.0);
}
