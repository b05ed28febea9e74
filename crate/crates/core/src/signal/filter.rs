//! Butterworth IIR filters as cascaded second-order sections.
//!
//! Designs go through the analog prototype's poles, a frequency
//! transformation, and the bilinear transform with prewarping. Every filter
//! keeps its state between calls, so feeding a signal in chunks gives the
//! same output as feeding it at once.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::BandSpec;
use crate::{Error, Result};

/// Order of the analog prototype used for band-pass designs. The resulting
/// digital filter has twice this order (four biquads).
pub const BANDPASS_ORDER: usize = 4;

/// One second-order section, `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + self.b[1] * z_inv + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z_inv + self.a[1] * z2;
        num / den
    }
}

/// A cascade of biquads with transposed direct-form II state.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    sections: Vec<Biquad>,
    state: Vec<[f64; 2]>,
}

#[derive(Clone, Copy)]
enum Shape {
    Lowpass,
    Highpass,
    Bandpass,
}

impl SosFilter {
    pub fn from_sections(sections: Vec<Biquad>) -> Self {
        let state = vec![[0.0; 2]; sections.len()];
        SosFilter { sections, state }
    }

    /// Band-pass Butterworth built from a 4th-order prototype.
    pub fn bandpass(fs: f64, band: BandSpec) -> Result<Self> {
        band.validate(fs)?;
        let w1 = prewarp(band.low_hz, fs);
        let w2 = prewarp(band.high_hz, fs);
        let bw = w2 - w1;
        let w0 = (w1 * w2).sqrt();
        let mut poles = Vec::with_capacity(2 * BANDPASS_ORDER);
        for p in prototype_poles(BANDPASS_ORDER) {
            let half = p * bw / 2.0;
            let root = (half * half - w0 * w0).sqrt();
            poles.push(half + root);
            poles.push(half - root);
        }
        let digital: Vec<Complex64> = poles.into_iter().map(|s| bilinear(s, fs)).collect();
        let center = 2.0 * (w0 / (2.0 * fs)).atan();
        Ok(assemble(&digital, Shape::Bandpass, center))
    }

    pub fn lowpass(fs: f64, cutoff_hz: f64, order: usize) -> Result<Self> {
        check_cutoff(fs, cutoff_hz, order)?;
        let wc = prewarp(cutoff_hz, fs);
        let digital: Vec<Complex64> = prototype_poles(order)
            .into_iter()
            .map(|p| bilinear(p * wc, fs))
            .collect();
        Ok(assemble(&digital, Shape::Lowpass, 0.0))
    }

    pub fn highpass(fs: f64, cutoff_hz: f64, order: usize) -> Result<Self> {
        check_cutoff(fs, cutoff_hz, order)?;
        let wc = prewarp(cutoff_hz, fs);
        let digital: Vec<Complex64> = prototype_poles(order)
            .into_iter()
            .map(|p| bilinear(wc / p, fs))
            .collect();
        Ok(assemble(&digital, Shape::Highpass, PI))
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|s| *s = [0.0; 2]);
    }

    #[inline]
    pub fn process_sample(&mut self, x: f64) -> f64 {
        let mut v = x;
        for (sec, st) in self.sections.iter().zip(self.state.iter_mut()) {
            let y = sec.b[0] * v + st[0];
            st[0] = sec.b[1] * v - sec.a[0] * y + st[1];
            st[1] = sec.b[2] * v - sec.a[1] * y;
            v = y;
        }
        v
    }

    pub fn process_in_place(&mut self, xs: &mut [f64]) {
        for x in xs {
            *x = self.process_sample(*x);
        }
    }

    pub fn process(&mut self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.process_sample(x)).collect()
    }

    /// Complex response at `freq_hz`.
    pub fn response(&self, freq_hz: f64, fs: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / fs);
        self.sections
            .iter()
            .map(|s| s.response(z_inv))
            .product()
    }

    /// Magnitude response in dB at `freq_hz`.
    pub fn gain_db(&self, freq_hz: f64, fs: f64) -> f64 {
        20.0 * self.response(freq_hz, fs).norm().log10()
    }
}

/// One independent filter per channel, sharing a design.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    filters: Vec<SosFilter>,
}

impl FilterBank {
    pub fn new(design: SosFilter, n_channels: usize) -> Self {
        FilterBank {
            filters: vec![design; n_channels],
        }
    }

    pub fn n_channels(&self) -> usize {
        self.filters.len()
    }

    /// Filters one sample per channel in place.
    pub fn process_frame(&mut self, frame: &mut [f64]) {
        for (f, x) in self.filters.iter_mut().zip(frame.iter_mut()) {
            *x = f.process_sample(*x);
        }
    }

    pub fn channel_mut(&mut self, ch: usize) -> &mut SosFilter {
        &mut self.filters[ch]
    }

    pub fn reset(&mut self) {
        self.filters.iter_mut().for_each(SosFilter::reset);
    }
}

/// One-shot causal band-pass of a whole signal.
pub fn bandpass(xs: &[f64], fs: f64, band: BandSpec) -> Result<Vec<f64>> {
    Ok(SosFilter::bandpass(fs, band)?.process(xs))
}

/// Removes DC drift with a 2nd-order Butterworth high-pass at `cutoff_hz`.
pub fn dc_remove(xs: &[f64], fs: f64, cutoff_hz: f64) -> Result<Vec<f64>> {
    Ok(dc_blocker(fs, cutoff_hz)?.process(xs))
}

/// The streaming filter behind [`dc_remove`].
pub fn dc_blocker(fs: f64, cutoff_hz: f64) -> Result<SosFilter> {
    SosFilter::highpass(fs, cutoff_hz, 2)
}

fn check_cutoff(fs: f64, cutoff_hz: f64, order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::config("filter order must be positive"));
    }
    if !(fs > 0.0 && cutoff_hz > 0.0 && cutoff_hz < fs / 2.0) {
        return Err(Error::config(format!(
            "cutoff {cutoff_hz} Hz invalid for fs {fs} Hz (need 0 < cutoff < {})",
            fs / 2.0
        )));
    }
    Ok(())
}

fn prewarp(f_hz: f64, fs: f64) -> f64 {
    2.0 * fs * (PI * f_hz / fs).tan()
}

/// Left-half-plane poles of the unit-cutoff Butterworth prototype.
fn prototype_poles(order: usize) -> Vec<Complex64> {
    let n = order as f64;
    (0..order)
        .map(|k| Complex64::from_polar(1.0, PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n)))
        .collect()
}

fn bilinear(s: Complex64, fs: f64) -> Complex64 {
    let k = 2.0 * fs;
    (k + s) / (k - s)
}

/// Groups conjugate poles into sections, attaches the zeros implied by
/// `shape`, and scales the cascade to unit gain at `norm_omega` (rad/sample).
fn assemble(poles: &[Complex64], shape: Shape, norm_omega: f64) -> SosFilter {
    const IMAG_EPS: f64 = 1e-12;
    let mut complex: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > IMAG_EPS).collect();
    complex.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut real: Vec<f64> = poles
        .iter()
        .filter(|p| p.im.abs() <= IMAG_EPS)
        .map(|p| p.re)
        .collect();
    real.sort_by(f64::total_cmp);

    let mut dens: Vec<([f64; 2], bool)> = complex
        .iter()
        .map(|p| ([-2.0 * p.re, p.norm_sqr()], true))
        .collect();
    let mut it = real.chunks(2);
    for pair in &mut it {
        match *pair {
            [a, b] => dens.push(([-(a + b), a * b], true)),
            [a] => dens.push(([-a, 0.0], false)),
            _ => unreachable!(),
        }
    }

    let mut sections: Vec<Biquad> = dens
        .into_iter()
        .map(|(a, second_order)| {
            let b = match (shape, second_order) {
                (Shape::Lowpass, true) => [1.0, 2.0, 1.0],
                (Shape::Lowpass, false) => [1.0, 1.0, 0.0],
                (Shape::Highpass, true) => [1.0, -2.0, 1.0],
                (Shape::Highpass, false) => [1.0, -1.0, 0.0],
                (Shape::Bandpass, _) => [1.0, 0.0, -1.0],
            };
            Biquad { b, a }
        })
        .collect();

    let z_inv = Complex64::from_polar(1.0, -norm_omega);
    for sec in &mut sections {
        let g = sec.response(z_inv).norm();
        if g > 0.0 && g.is_finite() {
            sec.b.iter_mut().for_each(|b| *b /= g);
        }
    }
    SosFilter::from_sections(sections)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(f: f64, fs: f64, n: usize, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * f * i as f64 / fs).sin())
            .collect()
    }

    fn rms(xs: &[f64]) -> f64 {
        (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
    }

    #[test]
    fn bandpass_has_four_sections_and_unit_center_gain() {
        let f = SosFilter::bandpass(250.0, BandSpec::new(8.0, 12.0)).unwrap();
        assert_eq!(f.sections().len(), 4);
        // geometric center of the prewarped edges
        let w0 = (prewarp(8.0, 250.0) * prewarp(12.0, 250.0)).sqrt();
        let fc = 250.0 / PI * (w0 / 500.0).atan();
        assert!(f.gain_db(fc, 250.0).abs() < 1e-9);
        assert!((f.gain_db(8.0, 250.0) + 3.0103).abs() < 0.01);
        assert!((f.gain_db(12.0, 250.0) + 3.0103).abs() < 0.01);
    }

    #[test]
    fn bandpass_rejects_one_octave_out_by_20_db() {
        let fs = 250.0;
        for band in [
            BandSpec::new(15.0, 20.0),
            BandSpec::new(4.0, 10.0),
            BandSpec::new(1.0, 8.0),
            BandSpec::new(8.0, 14.0),
            BandSpec::new(7.0, 28.0),
            BandSpec::new(8.0, 12.0),
            BandSpec::new(5.0, 15.0),
        ] {
            let f = SosFilter::bandpass(fs, band).unwrap();
            let lo = f.gain_db(band.low_hz / 2.0, fs);
            let hi = f.gain_db(band.high_hz * 2.0, fs);
            assert!(lo <= -20.0, "{band:?} lower octave {lo}");
            assert!(hi <= -20.0, "{band:?} upper octave {hi}");
        }
    }

    #[test]
    fn lowpass_and_highpass_edges() {
        let lp = SosFilter::lowpass(100.0, 10.0, 3).unwrap();
        assert_eq!(lp.sections().len(), 2);
        assert!(lp.gain_db(0.0, 100.0).abs() < 1e-9);
        assert!((lp.gain_db(10.0, 100.0) + 3.0103).abs() < 0.01);
        let hp = SosFilter::highpass(100.0, 1.0, 2).unwrap();
        assert!(hp.gain_db(50.0, 100.0).abs() < 1e-9);
        assert!((hp.gain_db(1.0, 100.0) + 3.0103).abs() < 0.01);
        assert!(hp.response(0.0, 100.0).norm() < 1e-12);
    }

    #[test]
    fn invalid_designs_rejected() {
        assert!(SosFilter::bandpass(20.0, BandSpec::new(8.0, 12.0)).is_err());
        assert!(dc_remove(&[0.0], 100.0, 0.0).is_err());
        assert!(dc_remove(&[0.0], 100.0, 50.0).is_err());
        assert!(SosFilter::lowpass(100.0, 10.0, 0).is_err());
    }

    #[test]
    fn passband_sine_kept_stopband_sine_removed() {
        let fs = 250.0;
        let band = BandSpec::new(8.0, 12.0);
        let settle = 2 * 250;
        let n = 10 * 250;
        let x = sine(10.0, fs, n, 1.0);
        let y = bandpass(&x, fs, band).unwrap();
        assert!(rms(&y[settle..]) >= 0.9 * rms(&x[settle..]));
        let x = sine(40.0, fs, n, 1.0);
        let y = bandpass(&x, fs, band).unwrap();
        assert!(rms(&y[settle..]) <= 0.1 * rms(&x[settle..]));
    }

    #[test]
    fn zeros_stay_zero() {
        let y = bandpass(&[0.0; 500], 250.0, BandSpec::new(8.0, 12.0)).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
        let y = dc_remove(&[0.0; 500], 250.0, 0.5).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_offset_removed() {
        let y = dc_remove(&vec![100.0; 250 * 20], 250.0, 0.5).unwrap();
        assert!(y[250 * 5..].iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn dc_blocker_passband_within_1_db() {
        let hp = dc_blocker(250.0, 0.5).unwrap();
        for f in [2.0, 5.0, 10.0, 40.0, 100.0] {
            assert!(hp.gain_db(f, 250.0).abs() < 1.0, "{f} Hz");
        }
        assert!(hp.gain_db(0.001, 250.0) < -40.0);
    }
}
