//! Sweeps combined with peak fitting, ablation classification and labels.

use log::info;

use super::modes::label_mode;
use super::peaks::{classify_peaks, fit_peaks, Peak, PeakKind};
use super::sweep::{
    semiclassical_sweep_distance, semiclassical_sweep_frequency, sweep_distance, sweep_frequency, SemiclassicalSettings,
    WaveSettings,
};
use crate::error::Result;
use crate::geometry::ResonatorGeometry;
use crate::gtd::OrbitSelection;
use crate::helmholtz::{field_grid, nodes_for, solve_arc_density, ComplexSpectrum, Grid};

/// Margin past the stability transition, in wavelengths, below which the
/// unstable-orbit expansion is not used.
pub const TRANSITION_MARGIN_WAVELENGTHS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudySettings {
    pub wave: WaveSettings,
    pub semiclassical: SemiclassicalSettings,
    pub prominence: f64,
    /// Matching tolerance in wavelengths (distance sweeps) or the
    /// equivalent wave-number shift (frequency sweeps).
    pub tolerance_wavelengths: f64,
}

#[derive(Debug, Clone)]
pub struct Study {
    pub quantum: ComplexSpectrum,
    pub peaks: Vec<Peak>,
    /// Semiclassical spectra with and without diffraction, when the sweep
    /// reaches the unstable regime.
    pub with_diffraction: Option<ComplexSpectrum>,
    pub without_diffraction: Option<ComplexSpectrum>,
    pub model_peaks: Vec<Peak>,
    pub ladder_peaks: Vec<Peak>,
    /// Axis interval where the semiclassical model is used.
    pub model_domain: Option<(f64, f64)>,
    pub tolerance: f64,
}

impl Study {
    pub fn of_kind(&self, kind: PeakKind) -> Vec<&Peak> {
        self.peaks.iter().filter(|p| p.kind == kind).collect()
    }

    /// Model peaks with no counterpart in the diffraction-free model.
    pub fn diffraction_only(&self) -> Vec<f64> {
        super::peaks::unmatched_centers(&self.model_peaks, &self.ladder_peaks, self.tolerance)
    }
}

fn in_domain(peaks: Vec<Peak>, dom: (f64, f64)) -> Vec<Peak> {
    peaks.into_iter().filter(|p| p.center >= dom.0 && p.center <= dom.1).collect()
}

/// Full-wave `|T|^2(D)` with peaks classified against the semiclassical
/// model with and without tip diffraction.
pub fn distance_study(template: &ResonatorGeometry, d_min: f64, d_max: f64, samples: usize, k: f64, s: &StudySettings) -> Result<Study> {
    let quantum = sweep_distance(template, d_min, d_max, samples, k, &s.wave)?;
    let mut peaks = fit_peaks(&quantum, s.prominence);
    let lambda = 2.0 * std::f64::consts::PI / k;
    let tolerance = s.tolerance_wavelengths * lambda;
    let lo = template.radius() + TRANSITION_MARGIN_WAVELENGTHS * lambda;
    let mut study = Study {
        quantum,
        peaks: Vec::new(),
        with_diffraction: None,
        without_diffraction: None,
        model_peaks: Vec::new(),
        ladder_peaks: Vec::new(),
        model_domain: None,
        tolerance,
    };
    if d_max > lo {
        let start = d_min.max(lo);
        // Same sample density as the full-wave sweep.
        let n = ((samples as f64 * (d_max - start) / (d_max - d_min)).ceil() as usize).max(2);
        let full = semiclassical_sweep_distance(template, start, d_max, n, k, &s.semiclassical)?;
        let bare = semiclassical_sweep_distance(
            template,
            start,
            d_max,
            n,
            k,
            &s.semiclassical.with_selection(OrbitSelection::GeometricOnly),
        )?;
        let dom = (start, d_max);
        study.model_peaks = in_domain(fit_peaks(&full, s.prominence), dom);
        study.ladder_peaks = in_domain(fit_peaks(&bare, s.prominence), dom);
        let with: Vec<f64> = study.model_peaks.iter().map(|p| p.center).collect();
        let without: Vec<f64> = study.ladder_peaks.iter().map(|p| p.center).collect();
        classify_peaks(&mut peaks, &with, &without, tolerance);
        study.with_diffraction = Some(full);
        study.without_diffraction = Some(bare);
        study.model_domain = Some(dom);
    } else {
        classify_peaks(&mut peaks, &[], &[], tolerance);
    }
    study.peaks = peaks;
    Ok(study)
}

/// Full-wave `|T|^2(k)` at fixed geometry with the same classification.
/// The tolerance in `k` corresponds to a separation shift of
/// `tolerance_wavelengths` wavelengths at mid-band.
pub fn frequency_study(geom: &ResonatorGeometry, k_min: f64, k_max: f64, samples: usize, s: &StudySettings) -> Result<Study> {
    let quantum = sweep_frequency(geom, k_min, k_max, samples, &s.wave)?;
    let mut peaks = fit_peaks(&quantum, s.prominence);
    let k_mid = 0.5 * (k_min + k_max);
    let lambda = 2.0 * std::f64::consts::PI / k_mid;
    let tolerance = k_mid * s.tolerance_wavelengths * lambda / geom.separation();
    let margin = geom.separation() - geom.radius();
    let lambda_max = 2.0 * std::f64::consts::PI / k_min;
    let mut study = Study {
        quantum,
        peaks: Vec::new(),
        with_diffraction: None,
        without_diffraction: None,
        model_peaks: Vec::new(),
        ladder_peaks: Vec::new(),
        model_domain: None,
        tolerance,
    };
    if margin >= TRANSITION_MARGIN_WAVELENGTHS * lambda_max {
        let n = 2 * samples;
        let (full, _) = semiclassical_sweep_frequency(geom, k_min, k_max, n, &s.semiclassical)?;
        let (bare, _) = semiclassical_sweep_frequency(
            geom,
            k_min,
            k_max,
            n,
            &s.semiclassical.with_selection(OrbitSelection::GeometricOnly),
        )?;
        study.model_peaks = fit_peaks(&full, s.prominence);
        study.ladder_peaks = fit_peaks(&bare, s.prominence);
        let with: Vec<f64> = study.model_peaks.iter().map(|p| p.center).collect();
        let without: Vec<f64> = study.ladder_peaks.iter().map(|p| p.center).collect();
        classify_peaks(&mut peaks, &with, &without, tolerance);
        study.with_diffraction = Some(full);
        study.without_diffraction = Some(bare);
        study.model_domain = Some((k_min, k_max));
    } else {
        info!("geometry within {TRANSITION_MARGIN_WAVELENGTHS} wavelengths of the transition or stable; peaks left unclassified");
        classify_peaks(&mut peaks, &[], &[], tolerance);
    }
    study.peaks = peaks;
    Ok(study)
}

/// Attaches `(n, m)` labels to distance-sweep peaks on the stable side.
pub fn label_stable_peaks(study: &mut Study, template: &ResonatorGeometry, k: f64, s: &StudySettings, grid_h: f64, exclusion: f64) -> Result<()> {
    for p in study.peaks.iter_mut().filter(|p| p.center < template.radius()) {
        let geom = template.with_separation(p.center)?;
        let sol = solve_arc_density(&geom, k, nodes_for(&geom, k, s.wave.nodes_per_wavelength))?;
        let map = field_grid(&sol, Grid::for_geometry(&geom, grid_h)?)?;
        let lab = label_mode(&map, &geom, exclusion);
        if !lab.ambiguous {
            p.label = Some((lab.n, lab.m));
        }
    }
    Ok(())
}
