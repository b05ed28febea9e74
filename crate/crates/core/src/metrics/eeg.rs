use super::layout::ChannelLayout;
use super::types::{MetricId, MetricValue};
use crate::signal::{
    analytic_band, band_log_power, common_average_reference_in_place, plv_analytic, BandSpec, Normalizer,
    SlidingWindower, Window,
};
use crate::{Error, Result};

pub const VIGILANCE_BETA: BandSpec = BandSpec::new(15.0, 20.0);
pub const VIGILANCE_THETA_ALPHA: BandSpec = BandSpec::new(4.0, 10.0);
pub const WORKLOAD_DELTA_THETA: BandSpec = BandSpec::new(1.0, 8.0);
pub const WORKLOAD_ALPHA: BandSpec = BandSpec::new(8.0, 14.0);
pub const MEDITATION_BAND: BandSpec = BandSpec::new(7.0, 28.0);
pub const VALENCE_ALPHA: BandSpec = BandSpec::new(8.0, 12.0);

pub const MIN_WINDOW_S: f64 = 2.0;
pub const RATIO_WINDOW_S: f64 = 2.0;
pub const MEDITATION_WINDOW_S: f64 = 10.0;
pub const HOP_S: f64 = 1.0;

fn check(window: &Window) -> Result<()> {
    // tolerate one sample of rounding in the window length
    if window.duration() + 0.5 / window.fs() < MIN_WINDOW_S {
        return Err(Error::contract(format!(
            "EEG metrics need a window of at least {MIN_WINDOW_S} s, got {:.3} s",
            window.duration()
        )));
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn mean_power(window: &Window, band: BandSpec, channels: &[usize]) -> Result<f64> {
    if channels.is_empty() {
        return Err(Error::contract("electrode set is empty for this stream"));
    }
    Ok(mean(&band_log_power(window, band, channels)?))
}

/// Raw vigilance: mean over all electrodes of log beta (15-20 Hz) minus log
/// theta + low alpha (4-10 Hz) power.
pub fn vigilance(window: &Window, layout: &ChannelLayout) -> Result<f64> {
    check(window)?;
    let all = layout.all();
    Ok(mean_power(window, VIGILANCE_BETA, &all)? - mean_power(window, VIGILANCE_THETA_ALPHA, &all)?)
}

/// Raw workload: frontal log delta + theta (1-8 Hz) minus parietal/occipital
/// log wide alpha (8-14 Hz).
pub fn workload(window: &Window, layout: &ChannelLayout) -> Result<f64> {
    check(window)?;
    Ok(mean_power(window, WORKLOAD_DELTA_THETA, &layout.frontal())?
        - mean_power(window, WORKLOAD_ALPHA, &layout.parietal_occipital())?)
}

/// Raw meditation: mean 7-28 Hz phase locking value over all front x rear
/// electrode pairs.
pub fn meditation(window: &Window, layout: &ChannelLayout) -> Result<f64> {
    check(window)?;
    let (front, rear) = (layout.front(), layout.rear());
    if front.is_empty() || rear.is_empty() {
        return Err(Error::contract("meditation needs front and rear electrodes"));
    }
    let fs = window.fs();
    let za: Vec<_> = front
        .iter()
        .map(|&c| analytic_band(window.channel(c), fs, MEDITATION_BAND))
        .collect::<Result<_>>()?;
    let zb: Vec<_> = rear
        .iter()
        .map(|&c| analytic_band(window.channel(c), fs, MEDITATION_BAND))
        .collect::<Result<_>>()?;
    let mut sum = 0.0;
    for a in &za {
        for b in &zb {
            sum += plv_analytic(a, b);
        }
    }
    Ok(sum / (za.len() * zb.len()) as f64)
}

/// Raw valence: left minus right log alpha (8-12 Hz) power.
pub fn valence(window: &Window, layout: &ChannelLayout) -> Result<f64> {
    check(window)?;
    Ok(mean_power(window, VALENCE_ALPHA, &layout.left())? - mean_power(window, VALENCE_ALPHA, &layout.right())?)
}

/// Normalizers for the four EEG indices.
#[derive(Debug, Clone)]
pub struct EegNormalizers {
    pub vigilance: Normalizer,
    pub workload: Normalizer,
    pub meditation: Normalizer,
    pub valence: Normalizer,
}

impl Default for EegNormalizers {
    fn default() -> Self {
        let rolling = Normalizer::new(Default::default()).expect("default normalizer is valid");
        EegNormalizers {
            vigilance: rolling.clone(),
            workload: rolling.clone(),
            meditation: rolling.clone(),
            valence: rolling,
        }
    }
}

/// Streams EEG frames and emits the enabled indices: ratio metrics on 2 s
/// windows of common-average-referenced data, meditation on 10 s windows,
/// both every second. Values are stamped at the window end.
///
/// Meditation sees the frames as recorded. Re-referencing eight electrodes
/// to their mean adds a -1/7 correlation between every pair, which phase
/// locking reads as synchrony and which masks genuine coupling.
#[derive(Debug, Clone)]
pub struct EegExtractor {
    layout: ChannelLayout,
    enabled: Vec<MetricId>,
    short: SlidingWindower,
    long: SlidingWindower,
    norms: EegNormalizers,
    frame: Vec<f64>,
}

impl EegExtractor {
    pub fn new(fs: f64, layout: ChannelLayout, enabled: &[MetricId], norms: EegNormalizers) -> Result<Self> {
        if let Some(m) = enabled.iter().find(|m| {
            !matches!(
                m,
                MetricId::Vigilance | MetricId::Workload | MetricId::Meditation | MetricId::Valence
            )
        }) {
            return Err(Error::config(format!("{m} is not an EEG metric")));
        }
        let n = layout.len();
        Ok(EegExtractor {
            short: SlidingWindower::new(fs, n, RATIO_WINDOW_S, HOP_S)?,
            long: SlidingWindower::new(fs, n, MEDITATION_WINDOW_S, HOP_S)?,
            layout,
            enabled: enabled.to_vec(),
            norms,
            frame: vec![0.0; n],
        })
    }

    pub fn reset_normalizers(&mut self) {
        let n = &mut self.norms;
        for norm in [&mut n.vigilance, &mut n.workload, &mut n.meditation, &mut n.valence] {
            norm.reset();
        }
    }

    pub fn push(&mut self, t: f64, frame: &[f64], out: &mut Vec<MetricValue>) -> Result<()> {
        if frame.len() != self.layout.len() {
            return Err(Error::contract(format!(
                "EEG frame has {} channels, layout has {}",
                frame.len(),
                self.layout.len()
            )));
        }
        if self.enabled.contains(&MetricId::Meditation) {
            if let Some(w) = self.long.push(t, frame) {
                let te = w.t_end();
                let raw = meditation(&w, &self.layout)?;
                let n = self.norms.meditation.normalize(raw, te);
                out.push(MetricValue::new(MetricId::Meditation, te, raw, n));
            }
        }
        self.frame.copy_from_slice(frame);
        common_average_reference_in_place(&mut self.frame)?;
        let ratios = self.enabled.iter().any(|m| *m != MetricId::Meditation);
        if ratios {
            if let Some(w) = self.short.push(t, &self.frame) {
                let te = w.t_end();
                for m in self.enabled.clone() {
                    let (raw, norm) = match m {
                        MetricId::Vigilance => (vigilance(&w, &self.layout)?, &mut self.norms.vigilance),
                        MetricId::Workload => (workload(&w, &self.layout)?, &mut self.norms.workload),
                        MetricId::Valence => (valence(&w, &self.layout)?, &mut self.norms.valence),
                        _ => continue,
                    };
                    let n = norm.normalize(raw, te);
                    out.push(MetricValue::new(m, te, raw, n));
                }
            }
        }
        Ok(())
    }
}
