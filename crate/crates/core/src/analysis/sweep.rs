//! Frequency and distance sweeps, full-wave and semiclassical.

use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ResonatorGeometry;
use crate::gtd::{return_from_catalog, transmission_from_return, OrbitSelection, SemiclassicalSample, WaveNumber};
use crate::helmholtz::{nodes_for, s11_from_site_green, solve_with_rule, ChebyshevRule, ComplexSpectrum, SweepKind};
use crate::raytrace::build_orbit_catalog_split;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSettings {
    pub nodes_per_wavelength: f64,
    pub kappa: f64,
}

impl Default for WaveSettings {
    fn default() -> Self {
        WaveSettings {
            nodes_per_wavelength: 20.0,
            kappa: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalSettings {
    /// Cutoff for diffractive orbits, cm.
    pub l_max: f64,
    /// Cutoff for the horizontal-orbit repetitions, cm.
    pub geometric_l_max: f64,
    pub kappa: f64,
    pub selection: OrbitSelection,
}

impl SemiclassicalSettings {
    /// Cutoffs given in units of the radius.
    pub fn for_radius(radius: f64, l_max_over_r: f64, geometric_l_max_over_r: f64, kappa: f64) -> Self {
        SemiclassicalSettings {
            l_max: l_max_over_r * radius,
            geometric_l_max: geometric_l_max_over_r.max(l_max_over_r) * radius,
            kappa,
            selection: OrbitSelection::All,
        }
    }

    pub fn with_selection(self, selection: OrbitSelection) -> Self {
        SemiclassicalSettings { selection, ..self }
    }
}

/// `samples` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::config("samples", format!("need at least 2, got {samples}")));
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::config("range", format!("empty or invalid range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| if i + 1 == samples { hi } else { lo + step * i as f64 })
        .collect())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::config("coupling_kappa", format!("must be positive, got {kappa}")))
    }
}

fn annotate<T>(results: Vec<Result<T>>, axis: &[f64]) -> Result<Vec<T>> {
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Sample {
                index,
                axis_value: axis[index],
                source: Box::new(e),
            })
        })
        .collect()
}

/// Full-wave `S11(k)` at fixed geometry over `[k_min, k_max]`.
pub fn sweep_frequency(
    geom: &ResonatorGeometry,
    k_min: f64,
    k_max: f64,
    samples: usize,
    settings: &WaveSettings,
) -> Result<ComplexSpectrum> {
    check_kappa(settings.kappa)?;
    if !(k_min > 0.0) {
        return Err(Error::config("f_min_ghz", "must be positive"));
    }
    let axis = linspace(k_min, k_max, samples)?;
    let rule = Arc::new(ChebyshevRule::new(nodes_for(geom, k_max, settings.nodes_per_wavelength)));
    let raw: Vec<Result<Complex64>> = axis
        .par_iter()
        .map(|&k| {
            let sol = solve_with_rule(geom, k, rule.clone())?;
            Ok(s11_from_site_green(sol.site_green()?, settings.kappa))
        })
        .collect();
    let s11 = annotate(raw, &axis)?;
    ComplexSpectrum::new(SweepKind::Frequency, axis, s11, geom.radius(), settings.kappa)
}

/// Full-wave `S11(D)` at fixed wave number; the geometry is rebuilt per
/// sample from `template` with only the separation changed.
pub fn sweep_distance(
    template: &ResonatorGeometry,
    d_min: f64,
    d_max: f64,
    samples: usize,
    k: f64,
    settings: &WaveSettings,
) -> Result<ComplexSpectrum> {
    check_kappa(settings.kappa)?;
    if !(d_min > 0.0) {
        return Err(Error::config("d_min_cm", "must be positive"));
    }
    let axis = linspace(d_min, d_max, samples)?;
    let rule = Arc::new(ChebyshevRule::new(nodes_for(template, k, settings.nodes_per_wavelength)));
    let raw: Vec<Result<Complex64>> = axis
        .par_iter()
        .map(|&d| {
            let geom = template.with_separation(d)?;
            let sol = solve_with_rule(&geom, k, rule.clone())?;
            Ok(s11_from_site_green(sol.site_green()?, settings.kappa))
        })
        .collect();
    let s11 = annotate(raw, &axis)?;
    ComplexSpectrum::new(SweepKind::Distance, axis, s11, template.radius(), settings.kappa)
}

fn semiclassical_spectrum(kind: SweepKind, axis: Vec<f64>, samples: Vec<SemiclassicalSample>, radius: f64, kappa: f64) -> ComplexSpectrum {
    let clamped = samples.iter().filter(|s| s.clamped).count();
    if clamped > 0 {
        warn!("semiclassical sweep: |T|^2 clamped to [0, 1] at {clamped} of {} samples", samples.len());
    }
    ComplexSpectrum {
        kind,
        axis,
        s11: samples.iter().map(|s| s.s11).collect(),
        tsq: samples.iter().map(|s| s.tsq).collect(),
        radius,
        kappa,
    }
}

/// Semiclassical `|T|^2(k)` at fixed geometry.
pub fn semiclassical_sweep_frequency(
    geom: &ResonatorGeometry,
    k_min: f64,
    k_max: f64,
    samples: usize,
    settings: &SemiclassicalSettings,
) -> Result<(ComplexSpectrum, Vec<SemiclassicalSample>)> {
    check_kappa(settings.kappa)?;
    let axis = linspace(k_min, k_max, samples)?;
    let catalog = build_orbit_catalog_split(geom, settings.l_max, settings.geometric_l_max);
    let raw: Vec<Result<SemiclassicalSample>> = axis
        .par_iter()
        .map(|&k| {
            let k = WaveNumber::new(k)?;
            let ret = return_from_catalog(&catalog, geom, k, settings.selection)?;
            Ok(transmission_from_return(geom, k, ret.total, settings.kappa))
        })
        .collect();
    let pts = annotate(raw, &axis)?;
    let spec = semiclassical_spectrum(SweepKind::Frequency, axis, pts.clone(), geom.radius(), settings.kappa);
    Ok((spec, pts))
}

/// Semiclassical `|T|^2(D)` at fixed wave number.
pub fn semiclassical_sweep_distance(
    template: &ResonatorGeometry,
    d_min: f64,
    d_max: f64,
    samples: usize,
    k: f64,
    settings: &SemiclassicalSettings,
) -> Result<ComplexSpectrum> {
    check_kappa(settings.kappa)?;
    let axis = linspace(d_min, d_max, samples)?;
    let wk = WaveNumber::new(k)?;
    let raw: Vec<Result<SemiclassicalSample>> = axis
        .par_iter()
        .map(|&d| {
            let geom = template.with_separation(d)?;
            let catalog = build_orbit_catalog_split(&geom, settings.l_max, settings.geometric_l_max);
            let ret = return_from_catalog(&catalog, &geom, wk, settings.selection)?;
            Ok(transmission_from_return(&geom, wk, ret.total, settings.kappa))
        })
        .collect();
    let pts = annotate(raw, &axis)?;
    Ok(semiclassical_spectrum(SweepKind::Distance, axis, pts, template.radius(), settings.kappa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_geometry;

    #[test]
    fn linspace_endpoints_and_errors() {
        let v = linspace(1.0, 2.0, 2).unwrap();
        assert_eq!(v, vec![1.0, 2.0]);
        assert_eq!(linspace(0.0, 1.0, 11).unwrap()[10], 1.0);
        assert!(linspace(0.0, 1.0, 1).unwrap_err().is_config());
        assert!(linspace(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn two_sample_sweep_gives_two_rows() {
        let g = build_geometry(30.5, 106.0, 33.0, 0.2).unwrap();
        let s = sweep_frequency(&g, 1.1, 1.2, 2, &WaveSettings::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.axis, vec![1.1, 1.2]);
        assert!(s.max_abs_s11() <= 1.0 + 1e-9);
    }

    #[test]
    fn sample_errors_carry_axis_value() {
        // Separations too small for the antenna offset fail validation.
        let g = build_geometry(30.5, 106.0, 33.0, 0.2).unwrap();
        let err = sweep_distance(&g, 1.0, 33.0, 3, 1.18, &WaveSettings::default()).unwrap_err();
        match err {
            Error::Sample { index, axis_value, .. } => {
                assert_eq!(index, 0);
                assert_eq!(axis_value, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semiclassical_sweep_is_deterministic_and_bounded() {
        let g = build_geometry(30.5, 106.0, 33.0, 0.2).unwrap();
        let st = SemiclassicalSettings::for_radius(30.5, 6.0, 40.0, 1.0);
        let a = semiclassical_sweep_distance(&g, 31.0, 40.0, 40, 1.18, &st).unwrap();
        let b = semiclassical_sweep_distance(&g, 31.0, 40.0, 40, 1.18, &st).unwrap();
        assert_eq!(a, b);
        assert!(a.tsq.iter().all(|t| (0.0..=1.0).contains(t)));
    }
}
