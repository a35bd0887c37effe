//! Sweeps, peak fits, node counting, return spectra and shift maps.

mod fourier;
mod modes;
mod peaks;
mod slater;
mod study;
mod sweep;

pub use fourier::{return_spectrum, ReturnSpectrum, Window, RESOLUTION_TARGET};
pub use modes::{
    axis_maximum_distance, interpolate, label_mode, strip_mean_intensity, transverse_angle, ModeLabel, NOISE_FLOOR,
};
pub use peaks::{
    classify_peaks, find_peaks, fit_peaks, fit_peaks_xy, mean_spacing, peaks_csv, peaks_in, unmatched_centers, Peak,
    PeakKind,
};
pub use slater::{slater_shift_map, ShiftMap, CONTOUR_FRACTION};
pub use study::{
    distance_study, frequency_study, label_stable_peaks, Study, StudySettings, TRANSITION_MARGIN_WAVELENGTHS,
};
pub use sweep::{
    linspace, semiclassical_sweep_distance, semiclassical_sweep_frequency, sweep_distance, sweep_frequency,
    SemiclassicalSettings, WaveSettings,
};
