//! Return spectra: windowed transforms of `S11(k)` onto orbit length.

use std::f64::consts::PI;
use std::fmt::Write as _;

use log::warn;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::helmholtz::{ComplexSpectrum, SweepKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Hann => "hann",
            Window::Rectangular => "rectangular",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(Window::Hann),
            "rectangular" | "none" => Ok(Window::Rectangular),
            _ => Err(Error::config("window", format!("unknown window `{s}` (valid: hann, rectangular)"))),
        }
    }

    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSpectrum {
    /// Orbit length over the reflector radius.
    pub lengths: Vec<f64>,
    pub amplitude: Vec<Complex64>,
    pub magnitude: Vec<f64>,
    pub window: Window,
    /// `(k_min, k_max)` in 1/cm.
    pub band: (f64, f64),
    /// Natural length resolution `2 pi / (R dk_band)`.
    pub resolution: f64,
}

/// Resolution below which companions are treated as resolvable.
pub const RESOLUTION_TARGET: f64 = 0.05;

fn uniform_step(axis: &[f64]) -> Result<f64> {
    if axis.len() < 2 {
        return Err(Error::config("samples", "need at least 2 samples"));
    }
    let step = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    for (i, w) in axis.windows(2).enumerate() {
        if ((w[1] - w[0]) - step).abs() > 1e-6 * step.abs() {
            return Err(Error::NonUniformAxis { index: i + 1 });
        }
    }
    Ok(step)
}

/// Transforms the mean-subtracted, windowed `S11(k)` into
/// `A(L) = sum_j w_j (S_j - <S>) e^{-i k_j L} / sum_j w_j`, evaluated on an
/// FFT grid zero-padded by `pad` and truncated at `l_max_over_r`.
pub fn return_spectrum(spectrum: &ComplexSpectrum, window: Window, pad: usize, l_max_over_r: f64) -> Result<ReturnSpectrum> {
    if spectrum.kind != SweepKind::Frequency {
        return Err(Error::config("sweep", "return spectrum needs a frequency sweep"));
    }
    let dk = uniform_step(&spectrum.axis)?;
    let n = spectrum.len();
    let k0 = spectrum.axis[0];
    let band = (k0, spectrum.axis[n - 1]);
    let radius = spectrum.radius;
    let resolution = 2.0 * PI / (radius * (band.1 - band.0));
    if resolution >= RESOLUTION_TARGET {
        warn!(
            "band resolution {:.4} R exceeds {:.2} R; close orbit lengths will not separate",
            resolution, RESOLUTION_TARGET
        );
    }
    let w = window.weights(n);
    let wsum: f64 = w.iter().sum();
    let mean = spectrum.s11.iter().sum::<Complex64>() / n as f64;
    let m = (n * pad.max(1)).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (b, (s, wi)) in buf.iter_mut().zip(spectrum.s11.iter().zip(&w)) {
        *b = (s - mean) * (wi / wsum);
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let dl = 2.0 * PI / (m as f64 * dk);
    let count = ((l_max_over_r * radius / dl).floor() as usize + 1).min(m / 2);
    let mut lengths = Vec::with_capacity(count);
    let mut amplitude = Vec::with_capacity(count);
    for (q, v) in buf.iter().take(count).enumerate() {
        let l = q as f64 * dl;
        lengths.push(l / radius);
        amplitude.push(v * Complex64::from_polar(1.0, -k0 * l));
    }
    let magnitude = amplitude.iter().map(|a| a.norm()).collect();
    Ok(ReturnSpectrum {
        lengths,
        amplitude,
        magnitude,
        window,
        band,
        resolution,
    })
}

impl ReturnSpectrum {
    /// Rows `l_over_r,magnitude`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l_over_r,magnitude\n");
        for (l, m) in self.lengths.iter().zip(&self.magnitude) {
            let _ = writeln!(s, "{l:.9},{m:.12e}");
        }
        s
    }

    /// Largest magnitude within `[lo, hi]` (in L/R) and its position.
    pub fn max_in(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        self.lengths
            .iter()
            .zip(&self.magnitude)
            .filter(|(l, _)| **l >= lo && **l <= hi)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(l, m)| (*l, *m))
    }

    /// Local maxima of the magnitude as `(L/R, magnitude)`, strongest first.
    pub fn local_maxima(&self, min_prominence: f64) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = super::peaks::find_peaks(&self.magnitude, min_prominence)
            .into_iter()
            .map(|(i, _)| (self.lengths[i], self.magnitude[i]))
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }
}
