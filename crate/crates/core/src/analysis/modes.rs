//! Node counting on resonant field maps.

use num_complex::Complex64;

use crate::geometry::{Point, ResonatorGeometry};
use crate::helmholtz::FieldMap;

/// Quantum numbers read off a field map: `n` counts half-wavelengths along
/// the axis, `m` the sign changes across it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLabel {
    pub n: u32,
    pub m: u32,
    /// A crossing fell where `|psi|` is below the noise floor.
    pub ambiguous: bool,
}

/// Relative amplitude below which a sign change is not trusted.
pub const NOISE_FLOOR: f64 = 1e-3;

/// Phase that makes the map as real as possible.
fn global_phase(field: &FieldMap) -> Complex64 {
    let s: Complex64 = field
        .psi
        .iter()
        .zip(&field.mask)
        .filter(|(_, &m)| !m)
        .map(|(p, _)| p * p)
        .sum();
    Complex64::from_polar(1.0, -0.5 * s.arg())
}

/// Bilinear interpolation of `psi`; `None` if any corner is masked or the
/// point is off the grid.
pub fn interpolate(field: &FieldMap, p: Point) -> Option<Complex64> {
    let g = &field.grid;
    let fx = (p.x - g.x0) / g.h;
    let fy = (p.y - g.y0) / g.h;
    if fx < 0.0 || fy < 0.0 {
        return None;
    }
    let (i, j) = (fx.floor() as usize, fy.floor() as usize);
    if i + 1 >= g.nx || j + 1 >= g.ny {
        // Points on the last row or column.
        if i < g.nx && j < g.ny && (fx - i as f64).abs() < 1e-12 && (fy - j as f64).abs() < 1e-12 {
            let idx = g.index(i, j);
            return (!field.mask[idx]).then_some(field.psi[idx]);
        }
        return None;
    }
    let (tx, ty) = (fx - i as f64, fy - j as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for (di, dj, w) in [
        (0, 0, (1.0 - tx) * (1.0 - ty)),
        (1, 0, tx * (1.0 - ty)),
        (0, 1, (1.0 - tx) * ty),
        (1, 1, tx * ty),
    ] {
        let idx = g.index(i + di, j + dj);
        if field.mask[idx] {
            if w > 0.0 {
                return None;
            }
            continue;
        }
        acc += field.psi[idx] * w;
    }
    Some(acc)
}

/// Counts sign changes of a sampled real profile; also reports whether any
/// crossing sits below `floor`.
fn sign_changes(values: &[f64], floor: f64) -> (u32, bool) {
    let mut count = 0;
    let mut ambiguous = false;
    let mut last: Option<f64> = None;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if let Some(prev) = last {
            if prev.signum() != v.signum() {
                count += 1;
                if prev.abs().max(v.abs()) < floor {
                    ambiguous = true;
                }
            }
        }
        last = Some(v);
    }
    (count, ambiguous)
}

/// Labels a stable-regime resonance. `n` is the number of interior sign
/// changes of `Re psi` along the axis plus one; `m` the number of sign
/// changes along the arc about the reflector centre through the axis
/// midpoint. Regions within `exclusion` cm of the antenna are skipped.
pub fn label_mode(field: &FieldMap, geom: &ResonatorGeometry, exclusion: f64) -> ModeLabel {
    let phase = global_phase(field);
    let scale = field
        .psi
        .iter()
        .zip(&field.mask)
        .filter(|(_, &m)| !m)
        .map(|(p, _)| p.norm())
        .fold(0.0, f64::max);
    let floor = NOISE_FLOOR * scale;
    let h = field.grid.h;
    let d = geom.separation();
    let src = geom.antenna();

    let steps = ((d / (0.25 * h)).ceil() as usize).max(8);
    let axis: Vec<f64> = (1..steps)
        .map(|s| Point::new(d * s as f64 / steps as f64, 0.0))
        .filter(|p| p.distance(src) > exclusion)
        .filter_map(|p| interpolate(field, p))
        .map(|v| (v * phase).re)
        .collect();
    let (nodes_axis, amb_n) = sign_changes(&axis, floor);

    let c = geom.arc_center();
    let rho = geom.radius() - 0.5 * d;
    let reach = geom.half_angle();
    let steps = ((2.0 * rho * reach / (0.25 * h)).ceil() as usize).max(16);
    let arc: Vec<f64> = (0..=steps)
        .map(|s| {
            let t = -reach + 2.0 * reach * s as f64 / steps as f64;
            c + Point::from_angle(t) * rho
        })
        .filter(|p| p.x > 0.0 && p.distance(src) > exclusion)
        .filter_map(|p| interpolate(field, p))
        .map(|v| (v * phase).re)
        .collect();
    let (nodes_arc, amb_m) = sign_changes(&arc, floor);

    ModeLabel {
        n: nodes_axis + 1,
        m: nodes_arc,
        ambiguous: amb_n || amb_m || axis.is_empty() || arc.len() < 2,
    }
}

/// Distance from the antenna to the largest `|psi|^2` on the axis, skipping
/// the antenna neighbourhood.
pub fn axis_maximum_distance(field: &FieldMap, geom: &ResonatorGeometry, exclusion: f64) -> Option<f64> {
    let src = geom.antenna();
    let g = &field.grid;
    let j = (0..g.ny).find(|&j| g.y(j) == 0.0)?;
    (0..g.nx)
        .filter(|&i| g.x(i) > 0.0 && g.x(i) < geom.separation())
        .map(|i| (g.point(i, j), g.index(i, j)))
        .filter(|(p, idx)| !field.mask[*idx] && p.distance(src) > exclusion)
        .max_by(|a, b| field.e2[a.1].total_cmp(&field.e2[b.1]))
        .map(|(p, _)| p.distance(src))
}

/// Mean `|psi|^2` over a strip of the given `width` centred on the
/// segment `a`..`b` (a line when `width` is zero), skipping points within
/// `exclusion` of `src` and masked cells.
pub fn strip_mean_intensity(field: &FieldMap, a: Point, b: Point, width: f64, exclusion: f64, src: Point) -> Option<f64> {
    let len = a.distance(b);
    if len <= 0.0 {
        return None;
    }
    let step = 0.25 * field.grid.h;
    let along = (b - a) * (1.0 / len);
    let across = Point::new(-along.y, along.x);
    let n_len = ((len / step).ceil() as usize).max(4);
    let n_wid = (width / step).ceil() as usize;
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in 0..=n_len {
        let base = a + along * (len * s as f64 / n_len as f64);
        for w in 0..=n_wid {
            let off = if n_wid == 0 { 0.0 } else { width * (w as f64 / n_wid as f64 - 0.5) };
            let p = base + across * off;
            if p.distance(src) <= exclusion {
                continue;
            }
            if let Some(v) = interpolate(field, p) {
                sum += v.norm_sqr();
                count += 1;
            }
        }
    }
    (count > 0).then(|| sum / count as f64)
}

/// Polar angle of `p` about the reflector centre.
pub fn transverse_angle(geom: &ResonatorGeometry, p: Point) -> f64 {
    (p - geom.arc_center()).angle()
}
