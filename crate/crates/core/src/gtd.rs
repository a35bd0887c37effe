//! Semiclassical return amplitude at the antenna: a coherent sum over the
//! closed-orbit catalog with Keller knife-edge coefficients at the tips.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ResonatorGeometry;
use crate::helmholtz::{s11_from_site_green, transmission, wall_only_site_green};
use crate::raytrace::{build_orbit_catalog, ClosedOrbit, OrbitKind};

/// Speed of light in cm/ns, so `f` in GHz pairs with lengths in cm.
pub const SPEED_OF_LIGHT: f64 = 29.979_245_8;

/// Cap on |sec| near optical boundaries.
pub const SEC_CLAMP: f64 = 1e3;

/// Floor on |m12| when a focus lands on the antenna.
pub const M12_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WaveNumber(f64);

impl WaveNumber {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::config("k", format!("wave number must be positive, got {k}")));
        }
        Ok(WaveNumber(k))
    }

    pub fn from_ghz(f: f64) -> Result<Self> {
        Self::new(2.0 * PI * f / SPEED_OF_LIGHT)
    }

    pub fn k(self) -> f64 {
        self.0
    }

    pub fn ghz(self) -> f64 {
        SPEED_OF_LIGHT * self.0 / (2.0 * PI)
    }

    pub fn wavelength(self) -> f64 {
        2.0 * PI / self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCoefficient {
    pub value: Complex64,
    pub clamped: bool,
}

fn clamped_sec(x: f64) -> (f64, bool) {
    let c = x.cos();
    if c.abs() < 1.0 / SEC_CLAMP {
        let sign = if c < 0.0 { -1.0 } else { 1.0 };
        (sign * SEC_CLAMP, true)
    } else {
        (1.0 / c, false)
    }
}

/// Dirichlet knife-edge coefficient for angles measured from the screen face.
pub fn knife_edge_coefficient(k: WaveNumber, theta_in: f64, theta_out: f64) -> EdgeCoefficient {
    let (a, ca) = clamped_sec(0.5 * (theta_out - theta_in));
    let (b, cb) = clamped_sec(0.5 * (theta_out + theta_in));
    let pre = -Complex64::from_polar(1.0, FRAC_PI_4) / (2.0 * (2.0 * PI * k.k()).sqrt());
    EdgeCoefficient {
        value: pre * (a - b),
        clamped: ca || cb,
    }
}

/// `(1/sqrt(8 pi k)) e^{-3 i pi / 4}`.
fn prefactor(k: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), -3.0 * FRAC_PI_4)
}

/// Angular factor of the source/image pair for launch and arrival angles
/// measured from the wall normal.
fn dipole_factor(k: f64, d_a: f64, launch: f64, arrival: f64) -> f64 {
    -4.0 * (k * d_a * launch.cos()).sin() * (k * d_a * arrival.cos()).sin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub value: Complex64,
    pub clamped_edge: bool,
    pub regularized_focus: bool,
}

/// Amplitude of one catalog orbit, multiplicity included.
pub fn orbit_contribution(orbit: &ClosedOrbit, geom: &ResonatorGeometry, k: WaveNumber) -> Result<Contribution> {
    if !(orbit.length > 0.0) {
        return Err(Error::config("orbit", "zero-length orbit"));
    }
    let kk = k.k();
    let mut amp = prefactor(kk)
        * dipole_factor(kk, geom.antenna_offset(), orbit.launch_angle, orbit.arrival_angle)
        * orbit.multiplicity as f64;
    let mut regularized_focus = false;
    for m12 in orbit.tube_m12(geom.radius()) {
        let m = m12.abs();
        if m < M12_EPS {
            regularized_focus = true;
        }
        amp /= m.max(M12_EPS).sqrt();
    }
    let mut clamped_edge = false;
    for e in &orbit.diffraction_events {
        let d = knife_edge_coefficient(k, e.theta_in, e.theta_out);
        clamped_edge |= d.clamped;
        amp *= d.value;
    }
    let phase = kk * orbit.length - orbit.maslov_count as f64 * FRAC_PI_2;
    Ok(Contribution {
        value: amp * Complex64::from_polar(1.0, phase),
        clamped_edge,
        regularized_focus,
    })
}

/// Which orbits enter the coherent sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitSelection {
    All,
    GeometricOnly,
}

impl OrbitSelection {
    fn admits(self, orbit: &ClosedOrbit) -> bool {
        match self {
            OrbitSelection::All => true,
            OrbitSelection::GeometricOnly => orbit.kind == OrbitKind::Geometric,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnAmplitude {
    pub total: Complex64,
    /// `(catalog index, contribution)` in catalog order.
    pub breakdown: Vec<(usize, Complex64)>,
    pub clamped_edges: usize,
    pub regularized_foci: usize,
}

/// Coherent sum over a prebuilt catalog, in catalog order.
pub fn return_from_catalog(
    catalog: &[ClosedOrbit],
    geom: &ResonatorGeometry,
    k: WaveNumber,
    selection: OrbitSelection,
) -> Result<ReturnAmplitude> {
    if !geom.is_on_axis() {
        return Err(Error::config("antenna_y_cm", "the orbit catalog assumes an on-axis antenna"));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut breakdown = Vec::with_capacity(catalog.len());
    let mut clamped_edges = 0;
    let mut regularized_foci = 0;
    for (i, orbit) in catalog.iter().enumerate() {
        if !selection.admits(orbit) {
            continue;
        }
        let c = orbit_contribution(orbit, geom, k)?;
        clamped_edges += c.clamped_edge as usize;
        regularized_foci += c.regularized_focus as usize;
        total += c.value;
        breakdown.push((i, c.value));
    }
    if breakdown.is_empty() {
        warn!("semiclassical return: empty orbit catalog");
    }
    Ok(ReturnAmplitude {
        total,
        breakdown,
        clamped_edges,
        regularized_foci,
    })
}

pub fn semiclassical_return(geom: &ResonatorGeometry, k: WaveNumber, l_max: f64) -> Result<ReturnAmplitude> {
    let catalog = build_orbit_catalog(geom, l_max);
    return_from_catalog(&catalog, geom, k, OrbitSelection::All)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalSample {
    pub k: f64,
    pub s11: Complex64,
    pub tsq: f64,
    /// Raw `1 - |S11|^2` fell outside `[0, 1]` and was clamped.
    pub clamped: bool,
}

/// Maps a return amplitude through the antenna model with the wall-only
/// site term added.
pub fn transmission_from_return(geom: &ResonatorGeometry, k: WaveNumber, g_sc: Complex64, kappa: f64) -> SemiclassicalSample {
    let g = wall_only_site_green(k.k(), geom.antenna_offset()) + g_sc;
    let s11 = s11_from_site_green(g, kappa);
    let raw = transmission(s11);
    let tsq = raw.clamp(0.0, 1.0);
    SemiclassicalSample {
        k: k.k(),
        s11,
        tsq,
        clamped: tsq != raw,
    }
}

pub fn semiclassical_transmission(
    geom: &ResonatorGeometry,
    k: WaveNumber,
    kappa: f64,
    l_max: f64,
) -> Result<SemiclassicalSample> {
    if !(kappa > 0.0) {
        return Err(Error::config("coupling_kappa", "must be positive"));
    }
    let ret = semiclassical_return(geom, k, l_max)?;
    Ok(transmission_from_return(geom, k, ret.total, kappa))
}

/// Rows `k,f_ghz,re_s11,im_s11,tsq`.
pub fn semiclassical_csv(samples: &[SemiclassicalSample]) -> String {
    let mut s = String::from("k,f_ghz,re_s11,im_s11,tsq\n");
    for p in samples {
        let f = SPEED_OF_LIGHT * p.k / (2.0 * PI);
        let _ = writeln!(s, "{:.12},{:.12},{:.12e},{:.12e},{:.12e}", p.k, f, p.s11.re, p.s11.im, p.tsq);
    }
    s
}

/// Rows `index,kind,l_cm,re,im,abs` for one wave number.
pub fn breakdown_csv(catalog: &[ClosedOrbit], ret: &ReturnAmplitude) -> String {
    let mut s = String::from("index,kind,l_cm,re,im,abs\n");
    for &(i, c) in &ret.breakdown {
        let kind = match catalog[i].kind {
            OrbitKind::Geometric => "geometric",
            OrbitKind::Diffractive => "diffractive",
        };
        let _ = writeln!(s, "{i},{kind},{:.9},{:.12e},{:.12e},{:.12e}", catalog[i].length, c.re, c.im, c.norm());
    }
    s
}
