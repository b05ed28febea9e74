use std::collections::VecDeque;

use super::types::BeatEvent;
use crate::signal::{dc_blocker, BandSpec, SosFilter};
use crate::{Error, Result};

const REFRACTORY_S: f64 = 0.25;
const LEARNING_S: f64 = 2.0;
const INTEGRATION_S: f64 = 0.15;
/// How far back from an integrated-energy peak the R wave is searched.
const SEARCH_S: f64 = 0.25;
const HISTORY_S: f64 = 0.6;
/// Identical non-zero samples for this long mark a clipped amplifier.
const FLAT_TOP_S: f64 = 0.04;
const QUALITY_HOLD_S: f64 = 2.0;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    energy: f64,
    t_r: f64,
    search_start: u64,
}

/// Streaming QRS detector: band-pass 5-15 Hz, five-point derivative,
/// squaring, 150 ms moving integration and adaptive signal/noise peak
/// thresholds with a 250 ms refractory period and search-back for missed
/// beats. R waves are located on the DC-removed input with sub-sample
/// refinement.
#[derive(Debug, Clone)]
pub struct RPeakDetector {
    fs: f64,
    bp: SosFilter,
    hp: SosFilter,
    deriv: VecDeque<f64>,
    mwi: VecDeque<f64>,
    mwi_len: usize,
    mwi_sum: f64,
    hist: VecDeque<(u64, f64, f64)>,
    n: u64,
    t_first: Option<f64>,
    prev_energy: f64,
    peak: Option<(f64, u64)>,
    learning: Option<Learning>,
    spki: f64,
    npki: f64,
    last_beat: Option<f64>,
    rr: VecDeque<f64>,
    missed: Vec<Candidate>,
    last_raw: f64,
    flat_run: usize,
    last_flat: Option<u64>,
    last_flat_t: Option<f64>,
    now: f64,
}

#[derive(Debug, Clone, Default)]
struct Learning {
    candidates: Vec<Candidate>,
    energy_sum: f64,
    samples: u64,
}

impl RPeakDetector {
    pub fn new(fs: f64) -> Result<Self> {
        if !(fs >= 100.0 && fs.is_finite()) {
            return Err(Error::contract(format!("R-peak detection needs fs >= 100 Hz, got {fs}")));
        }
        let mwi_len = ((INTEGRATION_S * fs).round() as usize).max(1);
        Ok(RPeakDetector {
            fs,
            bp: SosFilter::bandpass(fs, BandSpec::new(5.0, 15.0))?,
            hp: dc_blocker(fs, 0.5)?,
            deriv: VecDeque::from(vec![0.0; 5]),
            mwi: VecDeque::from(vec![0.0; mwi_len]),
            mwi_len,
            mwi_sum: 0.0,
            hist: VecDeque::new(),
            n: 0,
            t_first: None,
            prev_energy: 0.0,
            peak: None,
            learning: Some(Learning::default()),
            spki: 0.0,
            npki: 0.0,
            last_beat: None,
            rr: VecDeque::new(),
            missed: Vec::new(),
            last_raw: 0.0,
            flat_run: 0,
            last_flat: None,
            last_flat_t: None,
            now: f64::NEG_INFINITY,
        })
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    /// True while a clipped (flat-topped) input was seen in the last 2 s.
    pub fn saturated(&self) -> bool {
        self.last_flat_t.is_some_and(|t| self.now - t <= QUALITY_HOLD_S)
    }

    /// Feeds one sample; detected beats are appended to `out`.
    pub fn push(&mut self, t: f64, x: f64, out: &mut Vec<BeatEvent>) {
        let n = self.n;
        self.n += 1;
        self.now = t;
        let t0 = *self.t_first.get_or_insert(t);

        if x != 0.0 && x == self.last_raw {
            self.flat_run += 1;
            if (self.flat_run + 1) as f64 >= FLAT_TOP_S * self.fs {
                self.last_flat = Some(n);
                self.last_flat_t = Some(t);
            }
        } else {
            self.flat_run = 0;
        }
        self.last_raw = x;

        let hp = self.hp.process_sample(x);
        self.hist.push_back((n, t, hp));
        let keep = (HISTORY_S * self.fs) as usize;
        while self.hist.len() > keep {
            self.hist.pop_front();
        }

        let b = self.bp.process_sample(x);
        self.deriv.pop_front();
        self.deriv.push_back(b);
        let d = &self.deriv;
        let slope = (2.0 * d[4] + d[3] - d[1] - 2.0 * d[0]) / 8.0;
        let sq = slope * slope;
        self.mwi_sum += sq - self.mwi.pop_front().unwrap_or(0.0);
        self.mwi.push_back(sq);
        let energy = (self.mwi_sum / self.mwi_len as f64).max(0.0);

        if let Some(l) = &mut self.learning {
            l.energy_sum += energy;
            l.samples += 1;
        }

        let hold = (INTEGRATION_S * self.fs) as u64;
        match self.peak {
            None => {
                if energy > self.prev_energy && energy > 0.0 {
                    self.peak = Some((energy, n));
                }
            }
            Some((v, idx)) => {
                if energy > v {
                    self.peak = Some((energy, n));
                } else if energy < 0.5 * v || n - idx > hold {
                    self.peak = None;
                    if let Some(c) = self.locate(v, idx) {
                        self.candidate(c, out);
                    }
                }
            }
        }
        self.prev_energy = energy;

        if self.learning.is_some() && t - t0 >= LEARNING_S {
            self.finish_learning(out);
        }
    }

    /// Finds the R wave preceding an integrated-energy peak at sample `idx`.
    fn locate(&self, energy: f64, idx: u64) -> Option<Candidate> {
        let back = (SEARCH_S * self.fs) as u64;
        let start = idx.saturating_sub(back);
        let seg: Vec<&(u64, f64, f64)> = self.hist.iter().filter(|h| h.0 >= start && h.0 <= idx).collect();
        let (k, _) = seg
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .2.abs().total_cmp(&b.1 .2.abs()))?;
        let (_, tk, yk) = *seg[k];
        let mut t_r = tk;
        if k > 0 && k + 1 < seg.len() {
            let (ym, yp) = (seg[k - 1].2.abs(), seg[k + 1].2.abs());
            let y0 = yk.abs();
            let den = ym - 2.0 * y0 + yp;
            if den < 0.0 {
                let delta = (0.5 * (ym - yp) / den).clamp(-0.5, 0.5);
                t_r += delta * (seg[k + 1].1 - tk);
            }
        }
        Some(Candidate {
            energy,
            t_r,
            search_start: start,
        })
    }

    fn finish_learning(&mut self, out: &mut Vec<BeatEvent>) {
        let Some(l) = self.learning.take() else { return };
        let max = l.candidates.iter().map(|c| c.energy).fold(0.0, f64::max);
        self.spki = max / 3.0;
        self.npki = 0.5 * l.energy_sum / l.samples.max(1) as f64;
        for c in l.candidates {
            self.classify(c, out);
        }
    }

    fn candidate(&mut self, c: Candidate, out: &mut Vec<BeatEvent>) {
        if let Some(l) = &mut self.learning {
            l.candidates.push(c);
            return;
        }
        self.search_back(c.t_r, out);
        self.classify(c, out);
    }

    fn threshold(&self) -> f64 {
        self.npki + 0.25 * (self.spki - self.npki)
    }

    fn classify(&mut self, c: Candidate, out: &mut Vec<BeatEvent>) {
        if self.last_beat.is_some_and(|lb| c.t_r - lb < REFRACTORY_S) {
            return;
        }
        if c.energy > self.threshold() && c.energy > 0.0 {
            self.spki = 0.125 * c.energy + 0.875 * self.spki;
            self.accept(c, out);
        } else {
            self.npki = 0.125 * c.energy + 0.875 * self.npki;
            self.missed.push(c);
        }
    }

    /// Recovers the strongest sub-threshold peak once a beat is overdue.
    fn search_back(&mut self, now: f64, out: &mut Vec<BeatEvent>) {
        let (Some(last), Some(avg)) = (self.last_beat, self.rr_average()) else {
            return;
        };
        if now - last <= 1.66 * avg {
            return;
        }
        let thr2 = 0.5 * self.threshold();
        let best = self
            .missed
            .iter()
            .filter(|c| c.t_r - last >= REFRACTORY_S && c.energy > thr2 && c.energy > 0.0)
            .max_by(|a, b| a.energy.total_cmp(&b.energy))
            .copied();
        if let Some(c) = best {
            self.spki = 0.25 * c.energy + 0.75 * self.spki;
            self.accept(c, out);
        }
    }

    fn accept(&mut self, c: Candidate, out: &mut Vec<BeatEvent>) {
        self.missed.clear();
        if self.last_flat.is_some_and(|f| f >= c.search_start) {
            return;
        }
        if let Some(lb) = self.last_beat {
            self.rr.push_back(c.t_r - lb);
            if self.rr.len() > 8 {
                self.rr.pop_front();
            }
        }
        self.last_beat = Some(c.t_r);
        out.push(BeatEvent { t: c.t_r });
    }

    fn rr_average(&self) -> Option<f64> {
        (!self.rr.is_empty()).then(|| self.rr.iter().sum::<f64>() / self.rr.len() as f64)
    }

    /// Flushes the learning period early (end of a short recording).
    pub fn flush(&mut self, out: &mut Vec<BeatEvent>) {
        if let Some((v, idx)) = self.peak.take() {
            if let Some(c) = self.locate(v, idx) {
                self.candidate(c, out);
            }
        }
        if self.learning.is_some() {
            self.finish_learning(out);
        }
    }
}

/// Runs the detector over a whole record sampled from t = 0.
pub fn detect_r_peaks(ecg: &[f64], fs: f64) -> Result<Vec<BeatEvent>> {
    let mut det = RPeakDetector::new(fs)?;
    let mut out = Vec::new();
    for (i, &x) in ecg.iter().enumerate() {
        det.push(i as f64 / fs, x, &mut out);
    }
    det.flush(&mut out);
    Ok(out)
}
