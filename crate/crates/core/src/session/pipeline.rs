use std::collections::BTreeMap;

use tobe_transport::{Modality, SampleChunk, StreamMeta};

use crate::mapper::Trigger;
use crate::metrics::{
    ArousalTracker, BeatEvent, BlinkDetector, BlinkEvent, BreathResampler, Calibration, ChannelLayout,
    CoherenceTracker, EegExtractor, EegNormalizers, HeartRateTracker, HrResampler, MetricId, MetricValue,
    RPeakDetector, RespirationTracker,
};
use crate::signal::{NormalizeMethod, Normalizer};
use crate::{Error, Result};

/// Everything a user's pipeline produces from one chunk.
#[derive(Debug, Clone, Default)]
pub struct PipelineOutput {
    pub values: Vec<MetricValue>,
    pub beats: Vec<BeatEvent>,
    pub blinks: Vec<BlinkEvent>,
    pub triggers: Vec<Trigger>,
    /// Heart rate on the 4 Hz grid, for inter-user synchrony.
    pub hr_grid: Vec<(i64, f64)>,
}

impl PipelineOutput {
    pub fn clear(&mut self) {
        self.values.clear();
        self.beats.clear();
        self.blinks.clear();
        self.triggers.clear();
        self.hr_grid.clear();
    }
}

struct Ecg {
    detector: RPeakDetector,
    rate: Option<HeartRateTracker>,
    grid: Option<HrResampler>,
}

struct Resp {
    tracker: Option<RespirationTracker>,
    grid: Option<BreathResampler>,
    last_phase: Option<f64>,
}

struct Eeg {
    extractor: Option<EegExtractor>,
    frame: Vec<f64>,
}

struct Blink {
    detector: BlinkDetector,
    channel: usize,
}

enum Stage {
    Ecg(Ecg),
    Resp(Resp),
    Eda(ArousalTracker),
    Eeg(Eeg),
    Idle,
}

/// One user's metric extractors, wired per source. Sources are addressed
/// by their position in the user's source list.
pub struct UserPipeline {
    stages: Vec<(Stage, Option<Blink>)>,
    cardiac: Option<CoherenceTracker>,
    wants_grid: bool,
}

fn normalizer(norms: &BTreeMap<MetricId, NormalizeMethod>, m: MetricId) -> Result<Normalizer> {
    Normalizer::new(norms.get(&m).copied().unwrap_or_default())
}

impl UserPipeline {
    pub fn new(metas: &[&StreamMeta], metrics: &[MetricId], norms: &BTreeMap<MetricId, NormalizeMethod>) -> Result<Self> {
        let on = |m: MetricId| metrics.contains(&m);
        let cardiac = on(MetricId::CardiacCoherence);
        let wants_grid = on(MetricId::PairSynchrony);
        let has_eog = metas.iter().any(|m| m.modality == Modality::Eog);
        let mut stages = Vec::new();
        for meta in metas {
            let fs = meta.nominal_rate;
            if meta.modality != Modality::Metric && !(fs > 0.0) {
                return Err(Error::config(format!("stream {:?} has no nominal rate", meta.name)));
            }
            let f8 = || meta.channel_labels.iter().position(|l| l.eq_ignore_ascii_case("F8"));
            let mut blink = None;
            let stage = match meta.modality {
                Modality::Ecg => Stage::Ecg(Ecg {
                    detector: RPeakDetector::new(fs)?,
                    rate: on(MetricId::HeartRate).then(|| normalizer(norms, MetricId::HeartRate)).transpose()?.map(HeartRateTracker::new),
                    grid: (cardiac || wants_grid).then(HrResampler::new),
                }),
                Modality::Resp => {
                    let tracker = if on(MetricId::Respiration) {
                        let cal = match norms.get(&MetricId::Respiration) {
                            Some(m) => Calibration::Method(*m),
                            None => Calibration::default(),
                        };
                        Some(RespirationTracker::new(fs, cal)?)
                    } else {
                        None
                    };
                    let grid = cardiac.then(|| BreathResampler::new(fs)).transpose()?;
                    Stage::Resp(Resp { tracker, grid, last_phase: None })
                }
                Modality::Eda => match on(MetricId::Arousal) {
                    true => Stage::Eda(ArousalTracker::new(fs, normalizer(norms, MetricId::Arousal)?)?),
                    false => Stage::Idle,
                },
                Modality::Eeg => {
                    let enabled: Vec<MetricId> = [MetricId::Vigilance, MetricId::Workload, MetricId::Meditation, MetricId::Valence]
                        .into_iter()
                        .filter(|m| on(*m))
                        .collect();
                    let extractor = if enabled.is_empty() {
                        None
                    } else {
                        let norms = EegNormalizers {
                            vigilance: normalizer(norms, MetricId::Vigilance)?,
                            workload: normalizer(norms, MetricId::Workload)?,
                            meditation: normalizer(norms, MetricId::Meditation)?,
                            valence: normalizer(norms, MetricId::Valence)?,
                        };
                        let layout = ChannelLayout::from_labels(&meta.channel_labels)?;
                        Some(EegExtractor::new(fs, layout, &enabled, norms)?)
                    };
                    // blinks come from F8 when there is no dedicated EOG channel
                    if let (false, Some(ch)) = (has_eog, f8()) {
                        blink = Some(Blink { detector: BlinkDetector::new(fs)?, channel: ch });
                    }
                    Stage::Eeg(Eeg { extractor, frame: vec![0.0; meta.channel_count()] })
                }
                Modality::Eog => {
                    blink = Some(Blink { detector: BlinkDetector::new(fs)?, channel: f8().unwrap_or(0) });
                    Stage::Idle
                }
                Modality::Metric => Stage::Idle,
            };
            stages.push((stage, blink));
        }
        Ok(UserPipeline { stages, cardiac: cardiac.then(CoherenceTracker::cardiac), wants_grid })
    }

    /// Runs one chunk from source `source` through its extractors.
    pub fn push(&mut self, source: usize, chunk: &SampleChunk, out: &mut PipelineOutput) -> Result<()> {
        let (stage, blink) = self
            .stages
            .get_mut(source)
            .ok_or_else(|| Error::contract(format!("no source #{source}")))?;
        if let Some(b) = blink {
            for (t, row) in chunk.rows() {
                if let Some(ev) = b.detector.push(t, row[b.channel] as f64) {
                    out.blinks.push(ev);
                }
            }
        }
        let mut grid = Vec::new();
        match stage {
            Stage::Ecg(ecg) => {
                let mut beats = Vec::new();
                for (t, row) in chunk.rows() {
                    ecg.detector.push(t, row[0] as f64, &mut beats);
                }
                for &beat in &beats {
                    if let Some(v) = ecg.rate.as_mut().and_then(|r| r.push(beat)) {
                        out.values.push(v);
                    }
                    if let Some(g) = &mut ecg.grid {
                        for (k, bpm) in g.push(beat) {
                            if let Some(c) = &mut self.cardiac {
                                c.push_a(k, bpm);
                            }
                            if self.wants_grid {
                                out.hr_grid.push((k, bpm));
                            }
                        }
                    }
                    out.triggers.push(Trigger { metric_id: MetricId::HeartRate, t: beat.t });
                }
                out.beats.extend(beats);
            }
            Stage::Resp(resp) => {
                for (t, row) in chunk.rows() {
                    let x = row[0] as f64;
                    if let Some(tr) = &mut resp.tracker {
                        if let Some((phase, value)) = tr.push(t, x) {
                            let wrapped = resp.last_phase.is_some_and(|p| p >= 0.5 && phase.phase < 0.5);
                            if wrapped && !phase.stale {
                                out.triggers.push(Trigger { metric_id: MetricId::Respiration, t });
                            }
                            resp.last_phase = Some(phase.phase);
                            out.values.push(value);
                        }
                    }
                    if let Some(g) = &mut resp.grid {
                        g.push(t, x, &mut grid);
                    }
                }
                if let Some(c) = &mut self.cardiac {
                    for (k, v) in grid.drain(..) {
                        c.push_b(k, v);
                    }
                }
            }
            Stage::Eda(tr) => {
                for (t, row) in chunk.rows() {
                    tr.push(t, row[0] as f64, &mut out.values);
                }
            }
            Stage::Eeg(eeg) => {
                if let Some(ex) = &mut eeg.extractor {
                    for (t, row) in chunk.rows() {
                        for (dst, &x) in eeg.frame.iter_mut().zip(row) {
                            *dst = x as f64;
                        }
                        ex.push(t, &eeg.frame, &mut out.values)?;
                    }
                }
            }
            Stage::Idle => {}
        }
        if let Some(c) = &mut self.cardiac {
            c.poll(&mut out.values);
        }
        Ok(())
    }

    /// Restarts normalization for `metric`, or for every metric.
    pub fn recalibrate(&mut self, metric: Option<MetricId>) {
        let hit = |m: MetricId| metric.is_none_or(|x| x == m);
        for (stage, _) in &mut self.stages {
            match stage {
                Stage::Ecg(Ecg { rate: Some(r), .. }) if hit(MetricId::HeartRate) => r.reset_normalizer(),
                Stage::Resp(Resp { tracker: Some(t), .. }) if hit(MetricId::Respiration) => t.recalibrate(),
                Stage::Eda(a) if hit(MetricId::Arousal) => a.reset_normalizer(),
                Stage::Eeg(Eeg { extractor: Some(e), .. })
                    if metric.is_none()
                        || matches!(
                            metric,
                            Some(MetricId::Vigilance | MetricId::Workload | MetricId::Meditation | MetricId::Valence)
                        ) =>
                {
                    e.reset_normalizers()
                }
                _ => {}
            }
        }
    }
}
