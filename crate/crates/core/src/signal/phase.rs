//! Instantaneous phase and phase locking.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{BandSpec, Window};
use crate::{Error, Result};

/// Band-limited analytic signal of `xs`.
///
/// Positive-frequency bins inside `band` are doubled, everything else is
/// zeroed, and the result is transformed back. This is an ideal band-pass
/// and a Hilbert transform in one FFT round trip, applied to the window as
/// a whole.
pub fn analytic_band(xs: &[f64], fs: f64, band: BandSpec) -> Result<Vec<Complex64>> {
    band.validate(fs)?;
    let n = xs.len();
    if n < 2 {
        return Err(Error::contract("analytic signal needs at least 2 samples"));
    }
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = k as f64 * fs / n as f64;
        let positive = k > 0 && 2 * k < n;
        *v = if positive && band.contains(f) {
            *v * 2.0
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= inv);
    Ok(buf)
}

/// Phase locking value between two equally long signals in `band`:
/// the magnitude of the mean unit phasor of their phase difference.
pub fn plv(a: &[f64], b: &[f64], fs: f64, band: BandSpec) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "phase locking inputs differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let za = analytic_band(a, fs, band)?;
    let zb = analytic_band(b, fs, band)?;
    Ok(plv_analytic(&za, &zb))
}

/// Phase locking value of precomputed analytic signals.
pub fn plv_analytic(za: &[Complex64], zb: &[Complex64]) -> f64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for (x, y) in za.iter().zip(zb) {
        let d = x * y.conj();
        let mag = d.norm();
        if mag > 0.0 {
            sum += d / mag;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        (sum.norm() / count as f64).clamp(0.0, 1.0)
    }
}

/// [`plv`] on two single-channel windows.
pub fn plv_windows(a: &Window, b: &Window, band: BandSpec) -> Result<f64> {
    if a.fs() != b.fs() {
        return Err(Error::contract("phase locking inputs differ in sampling rate"));
    }
    if a.n_channels() != 1 || b.n_channels() != 1 {
        return Err(Error::contract("phase locking expects single-channel windows"));
    }
    plv(a.channel(0), b.channel(0), a.fs(), band)
}
