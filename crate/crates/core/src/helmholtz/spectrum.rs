use std::fmt::Write as _;

use num_complex::Complex64;

use super::arc::{nodes_for, solve_arc_density};
use super::kernel::{s11_from_site_green, transmission};
use crate::error::{Error, Result};
use crate::geometry::ResonatorGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Axis is the wave number in 1/cm.
    Frequency,
    /// Axis is the wall-vertex separation D in cm.
    Distance,
}

/// Complex reflection coefficient over a sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub kind: SweepKind,
    pub axis: Vec<f64>,
    pub s11: Vec<Complex64>,
    pub tsq: Vec<f64>,
    pub radius: f64,
    pub kappa: f64,
}

impl ComplexSpectrum {
    pub fn new(kind: SweepKind, axis: Vec<f64>, s11: Vec<Complex64>, radius: f64, kappa: f64) -> Result<Self> {
        if axis.len() != s11.len() {
            return Err(Error::Numerical("axis and S11 lengths differ".into()));
        }
        let tsq = s11.iter().map(|s| transmission(*s)).collect();
        Ok(ComplexSpectrum {
            kind,
            axis,
            s11,
            tsq,
            radius,
            kappa,
        })
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// Largest `|S11|` over the sweep.
    pub fn max_abs_s11(&self) -> f64 {
        self.s11.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Rows `axis_value,re_s11,im_s11,tsq`, plus `d_minus_r` for distance sweeps.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("axis_value,re_s11,im_s11,tsq");
        if self.kind == SweepKind::Distance {
            s.push_str(",d_minus_r");
        }
        s.push('\n');
        for i in 0..self.len() {
            let _ = write!(
                s,
                "{:.12},{:.12e},{:.12e},{:.12e}",
                self.axis[i], self.s11[i].re, self.s11[i].im, self.tsq[i]
            );
            if self.kind == SweepKind::Distance {
                let _ = write!(s, ",{:.12}", self.axis[i] - self.radius);
            }
            s.push('\n');
        }
        s
    }
}

/// Full-wave reflection coefficient of the antenna.
pub fn s11_quantum(geom: &ResonatorGeometry, k: f64, kappa: f64, nodes_per_wavelength: f64) -> Result<Complex64> {
    if !(kappa > 0.0) {
        return Err(Error::config("coupling_kappa", "must be positive"));
    }
    let sol = solve_arc_density(geom, k, nodes_for(geom, k, nodes_per_wavelength))?;
    Ok(s11_from_site_green(sol.site_green()?, kappa))
}
