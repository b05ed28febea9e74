use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use tobe_transport::{Modality, SampleChunk, StreamMeta};

use crate::{Error, Result};

const MAGIC: &str = "# tobe-recording v1";

/// A recording loaded in memory: timestamps plus row-major samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub meta: StreamMeta,
    pub timestamps: Vec<f64>,
    pub samples: Vec<f32>,
}

impl Recording {
    pub fn n_channels(&self) -> usize {
        self.meta.channel_count()
    }

    pub fn n_samples(&self) -> usize {
        self.timestamps.len()
    }

    pub fn duration(&self) -> f64 {
        match (self.timestamps.first(), self.timestamps.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn chunks(&self, chunk_len: usize) -> Vec<SampleChunk> {
        let nc = self.n_channels();
        let step = chunk_len.max(1);
        (0..self.n_samples())
            .step_by(step)
            .map(|s| {
                let e = (s + step).min(self.n_samples());
                SampleChunk::new(self.timestamps[s..e].to_vec(), self.samples[s * nc..e * nc].to_vec(), nc)
                    .expect("validated on load")
            })
            .collect()
    }
}

fn escape(v: &str) -> String {
    v.replace('%', "%25").replace(' ', "%20")
}

fn unescape(v: &str) -> String {
    v.replace("%20", " ").replace("%25", "%")
}

fn header(meta: &StreamMeta) -> String {
    let labels: Vec<String> = meta.channel_labels.iter().map(|l| escape(l)).collect();
    format!(
        "{MAGIC} name={} modality={} rate={} channels={} unit={}",
        escape(&meta.name),
        meta.modality,
        meta.nominal_rate,
        labels.join(";"),
        escape(&meta.unit)
    )
}

fn parse_header(line: &str) -> Result<StreamMeta> {
    let bad = |m: &str| Error::Parse {
        line: 1,
        message: m.to_string(),
    };
    let rest = line.strip_prefix(MAGIC).ok_or_else(|| bad("missing tobe-recording v1 header"))?;
    let (mut name, mut modality, mut rate, mut channels, mut unit) = (None, None, None, None, None);
    for field in rest.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| bad(&format!("malformed header field {field:?}")))?;
        match k {
            "name" => name = Some(unescape(v)),
            "modality" => modality = Some(v.parse::<Modality>().map_err(|e| bad(&e.to_string()))?),
            "rate" => rate = Some(v.parse::<f64>().map_err(|_| bad(&format!("bad rate {v:?}")))?),
            "channels" => channels = Some(v.split(';').map(unescape).collect::<Vec<_>>()),
            "unit" => unit = Some(unescape(v)),
            _ => return Err(bad(&format!("unknown header field {k:?}"))),
        }
    }
    let name = name.ok_or_else(|| bad("header lacks name"))?;
    let meta = StreamMeta::new(
        name.clone(),
        modality.ok_or_else(|| bad("header lacks modality"))?,
        channels.ok_or_else(|| bad("header lacks channels"))?,
        rate.ok_or_else(|| bad("header lacks rate"))?,
        unit.unwrap_or_default(),
        format!("replay-{name}"),
    );
    meta.validate().map_err(|e| bad(&e.to_string()))?;
    Ok(meta)
}

/// Streams chunks into a recording file.
///
/// Timestamps are written in shortest round-trip form and samples as `f32`
/// shortest round-trip (at most 9 significant digits), so reading the file
/// back is bit-exact.
pub struct Recorder<W: Write> {
    out: csv::Writer<W>,
    n_channels: usize,
    last_t: Option<f64>,
    rows: u64,
}

impl<W: Write> Recorder<W> {
    pub fn new(mut writer: W, meta: &StreamMeta) -> Result<Self> {
        meta.validate()?;
        writeln!(writer, "{}", header(meta))?;
        Ok(Recorder {
            out: csv::WriterBuilder::new().has_headers(false).from_writer(writer),
            n_channels: meta.channel_count(),
            last_t: None,
            rows: 0,
        })
    }

    pub fn write_chunk(&mut self, chunk: &SampleChunk) -> Result<()> {
        if chunk.n_channels() != self.n_channels {
            return Err(Error::contract(format!(
                "chunk has {} channels, recording has {}",
                chunk.n_channels(),
                self.n_channels
            )));
        }
        let mut record = Vec::with_capacity(1 + self.n_channels);
        for (t, row) in chunk.rows() {
            if self.last_t.is_some_and(|p| t <= p) {
                return Err(Error::contract(format!("timestamp {t} does not increase")));
            }
            record.clear();
            record.push(t.to_string());
            record.extend(row.iter().map(|v| v.to_string()));
            self.out.write_record(&record).map_err(csv_err)?;
            self.last_t = Some(t);
            self.rows += 1;
        }
        Ok(())
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn finish(self) -> Result<W> {
        self.out.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

pub fn write_recording<'a>(
    path: impl AsRef<Path>,
    meta: &StreamMeta,
    chunks: impl IntoIterator<Item = &'a SampleChunk>,
) -> Result<u64> {
    let mut rec = Recorder::new(BufWriter::new(File::create(path)?), meta)?;
    for c in chunks {
        rec.write_chunk(c)?;
    }
    let rows = rec.rows();
    rec.finish()?.flush()?;
    Ok(rows)
}

/// Reads only the header line of a recording file.
pub fn read_recording_meta(path: impl AsRef<Path>) -> Result<StreamMeta> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    parse_header(first.trim_end())
}

pub fn read_recording(path: impl AsRef<Path>) -> Result<Recording> {
    parse_recording(File::open(path)?)
}

pub fn parse_recording(reader: impl Read) -> Result<Recording> {
    let mut reader = BufReader::new(reader);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let meta = parse_header(first.trim_end())?;
    let nc = meta.channel_count();

    let mut rows = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut timestamps = Vec::new();
    let mut samples = Vec::new();
    for rec in rows.records() {
        let rec = rec.map_err(csv_err)?;
        // the header line was consumed before the csv reader started
        let line = rec.position().map_or(0, |p| p.line()) + 1;
        let err = |m: String| Error::Parse { line, message: m };
        if rec.len() != 1 + nc {
            return Err(err(format!("expected {} columns, found {}", 1 + nc, rec.len())));
        }
        let t: f64 = rec[0].trim().parse().map_err(|_| err(format!("bad timestamp {:?}", &rec[0])))?;
        if !t.is_finite() {
            return Err(err(format!("non-finite timestamp {t}")));
        }
        if let Some(&p) = timestamps.last() {
            if t <= p {
                return Err(err(format!("timestamp {t} is not after {p}")));
            }
        }
        for field in rec.iter().skip(1) {
            let v: f32 = field.trim().parse().map_err(|_| err(format!("bad sample {field:?}")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite sample {v}")));
            }
            samples.push(v);
        }
        timestamps.push(t);
    }
    Ok(Recording {
        meta,
        timestamps,
        samples,
    })
}

/// Paced iterator over a recording's chunks. With `speed` s > 0 a chunk is
/// released once `(t_last - t_first) / s` wall seconds have elapsed since
/// the first one; `speed` 0 releases everything immediately.
pub struct ReplayIter {
    chunks: std::vec::IntoIter<SampleChunk>,
    t0: Option<f64>,
    speed: f64,
    start: Option<Instant>,
}

impl Iterator for ReplayIter {
    type Item = SampleChunk;

    fn next(&mut self) -> Option<SampleChunk> {
        let chunk = self.chunks.next()?;
        if self.speed > 0.0 {
            let start = *self.start.get_or_insert_with(Instant::now);
            let t0 = self.t0.unwrap_or(0.0);
            let due = (chunk.last_timestamp().unwrap_or(t0) - t0) / self.speed;
            let elapsed = start.elapsed().as_secs_f64();
            if due > elapsed {
                thread::sleep(Duration::from_secs_f64(due - elapsed));
            }
        }
        Some(chunk)
    }
}

pub fn replay(recording: &Recording, speed: f64, chunk_len: usize) -> Result<ReplayIter> {
    if !(speed >= 0.0 && speed.is_finite()) {
        return Err(Error::config(format!("replay speed must be >= 0, got {speed}")));
    }
    Ok(ReplayIter {
        chunks: recording.chunks(chunk_len).into_iter(),
        t0: recording.timestamps.first().copied(),
        speed,
        start: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> StreamMeta {
        StreamMeta::new("belt 1", Modality::Resp, ["A", "B"], 10.0, "a.u.", "x")
    }

    #[test]
    fn header_round_trip() {
        let m = meta();
        let back = parse_header(&header(&m)).unwrap();
        assert_eq!(back.name, "belt 1");
        assert_eq!(back.channel_labels, m.channel_labels);
        assert_eq!(back.modality, Modality::Resp);
    }

    #[test]
    fn malformed_row_names_its_line() {
        let text = format!("{}\n0,1,2\n0.1,1\n", header(&meta()));
        match parse_recording(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
