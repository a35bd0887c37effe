//! Peak detection, joint Lorentzian fits and f/d classification.

use std::fmt::Write as _;

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use log::debug;
use nalgebra::{DMatrix, DVector, Dyn, Owned};

use crate::error::Result;
use crate::helmholtz::ComplexSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakKind {
    FabryPerot,
    Diffractive,
    Unclassified,
}

impl PeakKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PeakKind::FabryPerot => "f",
            PeakKind::Diffractive => "d",
            PeakKind::Unclassified => "u",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub center: f64,
    /// Full width at half maximum.
    pub width: f64,
    pub height: f64,
    pub prominence: f64,
    pub kind: PeakKind,
    pub label: Option<(u32, u32)>,
    /// False when the Lorentzian fit failed; `center` is then the raw
    /// sample position and `width` the half-prominence estimate.
    pub fit_converged: bool,
}

/// Indices of local maxima with topographic prominence of at least
/// `min_prominence`, with their prominences.
pub fn find_peaks(y: &[f64], min_prominence: f64) -> Vec<(usize, f64)> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            // Walk across a flat top.
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let top = (i + j) / 2;
                let p = prominence(y, top);
                if p >= min_prominence {
                    out.push((top, p));
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left_min = h;
    for v in y[..i].iter().rev() {
        if *v > h {
            break;
        }
        left_min = left_min.min(*v);
    }
    let mut right_min = h;
    for v in &y[i + 1..] {
        if *v > h {
            break;
        }
        right_min = right_min.min(*v);
    }
    h - left_min.max(right_min)
}

/// Width estimate from the half-prominence crossings, in axis units.
fn half_prominence_width(x: &[f64], y: &[f64], i: usize, p: f64) -> (f64, usize, usize) {
    let level = y[i] - 0.5 * p;
    let mut l = i;
    while l > 0 && y[l] > level {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < y.len() && y[r] > level {
        r += 1;
    }
    let cross = |a: usize, b: usize| {
        let (ya, yb) = (y[a], y[b]);
        if (yb - ya).abs() < f64::MIN_POSITIVE {
            x[a]
        } else {
            x[a] + (level - ya) / (yb - ya) * (x[b] - x[a])
        }
    };
    let xl = if l < i { cross(l, l + 1) } else { x[i] };
    let xr = if r > i { cross(r, r - 1) } else { x[i] };
    ((xr - xl).abs().max(x[1] - x[0]), l, r)
}

/// Sum of Lorentzians plus a constant, fitted over a window.
struct LorentzFit<'a> {
    x: &'a [f64],
    y: &'a [f64],
    /// `[c_0, w_0, h_0, c_1, ..., baseline]`.
    p: DVector<f64>,
}

fn lorentz(x: f64, c: f64, w: f64, h: f64) -> (f64, f64, f64, f64) {
    let hw = 0.5 * w;
    let u = (x - c) / hw;
    let d = 1.0 / (1.0 + u * u);
    let v = h * d;
    // Partial derivatives with respect to c, w, h.
    let dv_du = -2.0 * h * u * d * d;
    (v, dv_du * (-1.0 / hw), dv_du * (-u / w), d)
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for LorentzFit<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, p: &DVector<f64>) {
        self.p.copy_from(p);
    }

    fn params(&self) -> DVector<f64> {
        self.p.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let m = (self.p.len() - 1) / 3;
        let b = self.p[self.p.len() - 1];
        Some(DVector::from_iterator(
            self.x.len(),
            self.x.iter().zip(self.y).map(|(&x, &y)| {
                let mut v = b;
                for q in 0..m {
                    v += lorentz(x, self.p[3 * q], self.p[3 * q + 1], self.p[3 * q + 2]).0;
                }
                v - y
            }),
        ))
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let m = (self.p.len() - 1) / 3;
        let mut jac = DMatrix::zeros(self.x.len(), self.p.len());
        for (r, &x) in self.x.iter().enumerate() {
            for q in 0..m {
                let (_, dc, dw, dh) = lorentz(x, self.p[3 * q], self.p[3 * q + 1], self.p[3 * q + 2]);
                jac[(r, 3 * q)] = dc;
                jac[(r, 3 * q + 1)] = dw;
                jac[(r, 3 * q + 2)] = dh;
            }
            jac[(r, self.p.len() - 1)] = 1.0;
        }
        Some(jac)
    }
}

struct Seed {
    index: usize,
    prominence: f64,
    width: f64,
    lo: usize,
    hi: usize,
}

/// Local maxima above `min_prominence`, each refined by a least-squares
/// Lorentzian fit; overlapping peaks are fitted jointly.
pub fn fit_peaks_xy(x: &[f64], y: &[f64], min_prominence: f64) -> Vec<Peak> {
    if x.len() < 3 {
        return Vec::new();
    }
    let seeds: Vec<Seed> = find_peaks(y, min_prominence)
        .into_iter()
        .map(|(i, p)| {
            let (w, l, r) = half_prominence_width(x, y, i, p);
            let span = ((r - l) as f64 * 1.5).ceil() as usize + 2;
            Seed {
                index: i,
                prominence: p,
                width: w,
                lo: i.saturating_sub(span),
                hi: (i + span).min(x.len() - 1),
            }
        })
        .collect();

    let mut peaks = Vec::with_capacity(seeds.len());
    let mut start = 0;
    while start < seeds.len() {
        let mut end = start + 1;
        let mut hi = seeds[start].hi;
        while end < seeds.len() && seeds[end].lo <= hi {
            hi = hi.max(seeds[end].hi);
            end += 1;
        }
        peaks.extend(fit_cluster(x, y, &seeds[start..end]));
        start = end;
    }
    peaks
}

fn fit_cluster(x: &[f64], y: &[f64], seeds: &[Seed]) -> Vec<Peak> {
    let lo = seeds.iter().map(|s| s.lo).min().unwrap_or(0);
    let hi = seeds.iter().map(|s| s.hi).max().unwrap_or(0);
    let (xs, ys) = (&x[lo..=hi], &y[lo..=hi]);
    let base = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let mut p = Vec::with_capacity(3 * seeds.len() + 1);
    for s in seeds {
        p.extend([x[s.index], s.width, (y[s.index] - base).max(1e-12)]);
    }
    p.push(base);
    let enough = xs.len() > p.len();
    let fitted = if enough {
        let problem = LorentzFit {
            x: xs,
            y: ys,
            p: DVector::from_vec(p.clone()),
        };
        let (done, report) = LevenbergMarquardt::new().minimize(problem);
        report.termination.was_successful().then_some(done.p)
    } else {
        None
    };
    let b = fitted.as_ref().map(|f| f[f.len() - 1]).unwrap_or(base);
    let (xmin, xmax) = (xs[0], xs[xs.len() - 1]);
    seeds
        .iter()
        .enumerate()
        .map(|(q, s)| {
            let ok = fitted.as_ref().and_then(|f| {
                let (c, w, h) = (f[3 * q], f[3 * q + 1].abs(), f[3 * q + 2]);
                let sane = c >= xmin && c <= xmax && w > 0.0 && w < 4.0 * (xmax - xmin) && h > 0.0;
                sane.then_some((c, w))
            });
            match ok {
                Some((c, w)) => {
                    let f = fitted.as_ref().expect("fit present");
                    let mut at_c = b;
                    for r in 0..seeds.len() {
                        at_c += lorentz(c, f[3 * r], f[3 * r + 1], f[3 * r + 2]).0;
                    }
                    Peak {
                        center: c,
                        width: w,
                        height: at_c.clamp(0.0, 1.0),
                        prominence: s.prominence,
                        kind: PeakKind::Unclassified,
                        label: None,
                        fit_converged: true,
                    }
                }
                None => {
                    debug!("Lorentzian fit failed near {:.6}; keeping raw peak", x[s.index]);
                    Peak {
                        center: x[s.index],
                        width: s.width,
                        height: y[s.index].clamp(0.0, 1.0),
                        prominence: s.prominence,
                        kind: PeakKind::Unclassified,
                        label: None,
                        fit_converged: false,
                    }
                }
            }
        })
        .collect()
}

/// Peaks of `|T|^2` over a spectrum's axis.
pub fn fit_peaks(spectrum: &ComplexSpectrum, min_prominence: f64) -> Vec<Peak> {
    fit_peaks_xy(&spectrum.axis, &spectrum.tsq, min_prominence)
}

/// Classifies `peaks` by diffraction ablation. Each peak of the model
/// with diffraction (`with_diffraction`) is f when the model without
/// diffraction has a peak within `tol`, d otherwise. Model peaks are then
/// matched one-to-one to the nearest unmatched `peaks` within `tol`, which
/// inherit the kind; the rest stay unclassified.
pub fn classify_peaks(peaks: &mut [Peak], with_diffraction: &[f64], without_diffraction: &[f64], tol: f64) {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in peaks.iter().enumerate() {
        for (j, &c) in with_diffraction.iter().enumerate() {
            let d = (p.center - c).abs();
            if d <= tol {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut peak_used = vec![false; peaks.len()];
    let mut model_used = vec![false; with_diffraction.len()];
    for p in peaks.iter_mut() {
        p.kind = PeakKind::Unclassified;
    }
    for (_, i, j) in pairs {
        if peak_used[i] || model_used[j] {
            continue;
        }
        peak_used[i] = true;
        model_used[j] = true;
        let c = with_diffraction[j];
        peaks[i].kind = if without_diffraction.iter().any(|&v| (v - c).abs() <= tol) {
            PeakKind::FabryPerot
        } else {
            PeakKind::Diffractive
        };
    }
}

/// Peak centres of `with` that have no counterpart within `tol` in `without`.
pub fn unmatched_centers(with: &[Peak], without: &[Peak], tol: f64) -> Vec<f64> {
    with.iter()
        .filter(|p| without.iter().all(|q| (q.center - p.center).abs() > tol))
        .map(|p| p.center)
        .collect()
}

/// Rows `center,width,height,kind,n,m`.
pub fn peaks_csv(peaks: &[Peak]) -> String {
    let mut s = String::from("center,width,height,kind,n,m\n");
    for p in peaks {
        let (n, m) = p
            .label
            .map(|(n, m)| (n.to_string(), m.to_string()))
            .unwrap_or_default();
        let _ = writeln!(s, "{:.9},{:.9},{:.9},{},{},{}", p.center, p.width, p.height, p.kind.as_str(), n, m);
    }
    s
}

/// Peaks in a spectrum restricted to an axis interval.
pub fn peaks_in(peaks: &[Peak], lo: f64, hi: f64) -> Vec<Peak> {
    peaks.iter().filter(|p| p.center >= lo && p.center <= hi).cloned().collect()
}

pub fn mean_spacing(centers: &[f64]) -> Result<f64> {
    if centers.len() < 2 {
        return Err(crate::error::Error::Numerical("fewer than two peaks".into()));
    }
    Ok((centers[centers.len() - 1] - centers[0]) / (centers.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lorentz_sum(x: f64, parts: &[(f64, f64, f64)], base: f64) -> f64 {
        base + parts
            .iter()
            .map(|&(c, w, h)| h / (1.0 + (2.0 * (x - c) / w).powi(2)))
            .sum::<f64>()
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let y = vec![0.3; 100];
        assert!(fit_peaks_xy(&x, &y, 1e-6).is_empty());
    }

    #[test]
    fn single_lorentzian_recovered() {
        let x: Vec<f64> = (0..400).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|&v| lorentz_sum(v, &[(2.1, 0.2, 0.5)], 0.02)).collect();
        let p = fit_peaks_xy(&x, &y, 0.01);
        assert_eq!(p.len(), 1);
        assert!(p[0].fit_converged);
        assert_relative_eq!(p[0].center, 2.1, epsilon = 1e-6);
        assert_relative_eq!(p[0].width, 0.2, max_relative = 1e-4);
        assert_relative_eq!(p[0].height, 0.52, max_relative = 1e-4);
    }

    #[test]
    fn overlapping_pair_recovered() {
        let parts = [(3.0, 0.3, 0.4), (3.9, 0.3, 0.25)];
        let x: Vec<f64> = (0..600).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|&v| lorentz_sum(v, &parts, 0.01)).collect();
        let p = fit_peaks_xy(&x, &y, 0.01);
        assert_eq!(p.len(), 2);
        for (got, &(c, w, h)) in p.iter().zip(&parts) {
            assert!(got.fit_converged);
            assert!((got.center - c).abs() < 0.1 * w);
            assert!((got.width - w).abs() < 0.1 * w);
            // Height includes the baseline and the neighbour's tail.
            let expected = lorentz_sum(c, &parts, 0.01);
            assert!((got.height - expected).abs() < 0.1 * h);
        }
    }

    #[test]
    fn prominence_filters_ripples() {
        let x: Vec<f64> = (0..500).map(|i| i as f64 * 0.02).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| lorentz_sum(v, &[(5.0, 0.5, 0.3)], 0.0) + 1e-4 * (40.0 * v).sin())
            .collect();
        assert_eq!(find_peaks(&y, 1e-2).len(), 1);
        assert!(find_peaks(&y, 1e-5).len() > 5);
    }

    #[test]
    fn classification_and_csv() {
        let mk = |c: f64| Peak {
            center: c,
            width: 0.2,
            height: 0.1,
            prominence: 0.05,
            kind: PeakKind::Unclassified,
            label: None,
            fit_converged: true,
        };
        // 0.9 and 1.0 both sit near the ladder rung; only the closer one
        // is claimed by the model peak at 1.02.
        let mut peaks = vec![mk(0.9), mk(1.0), mk(2.3), mk(4.0)];
        classify_peaks(&mut peaks, &[1.02, 2.4, 3.0], &[0.95, 3.0], 0.2);
        let kinds: Vec<_> = peaks.iter().map(|p| p.kind).collect();
        assert_eq!(
            kinds,
            vec![PeakKind::Unclassified, PeakKind::FabryPerot, PeakKind::Diffractive, PeakKind::Unclassified]
        );
        peaks.remove(0);
        peaks[0].label = Some((4, 0));
        let csv = peaks_csv(&peaks);
        assert!(csv.lines().nth(1).unwrap().ends_with(",f,4,0"));
        assert!(csv.lines().nth(2).unwrap().ends_with(",d,,"));
    }

    #[test]
    fn unmatched_peaks() {
        let mk = |c: f64| Peak {
            center: c,
            width: 0.2,
            height: 0.1,
            prominence: 0.05,
            kind: PeakKind::Unclassified,
            label: None,
            fit_converged: true,
        };
        let with = [mk(1.0), mk(2.0), mk(3.0)];
        let without = [mk(1.02), mk(3.05)];
        assert_eq!(unmatched_centers(&with, &without, 0.1), vec![2.0]);
    }
}
