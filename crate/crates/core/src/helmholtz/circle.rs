//! Closed Dirichlet circle in free space: the same single-layer Nyström
//! scheme on a periodic rule, plus the exact cylindrical-harmonic series.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::kernel::free_green;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::special::{hankel1_n, j0, jn, y0, EULER_GAMMA};

#[derive(Debug, Clone)]
pub struct CircleSolution {
    pub radius: f64,
    pub k: f64,
    pub source: Point,
    pub nodes: Vec<Point>,
    /// `sigma * radius` at the nodes.
    pub density: Vec<Complex64>,
}

/// Solves for the density of a Dirichlet circle of radius `radius` centred
/// at the origin, driven by a point source at `source`, with `2n` nodes.
pub fn solve_circle(radius: f64, k: f64, source: Point, n: usize) -> Result<CircleSolution> {
    if source.norm() <= radius {
        return Err(Error::config("source", "must lie outside the circle"));
    }
    let m = 2 * n;
    let t: Vec<f64> = (0..m).map(|j| PI * j as f64 / n as f64).collect();
    let nodes: Vec<Point> = t.iter().map(|&tj| Point::from_angle(tj) * radius).collect();
    let diag = Complex64::new(-((k * radius / 2.0).ln() + EULER_GAMMA) / (2.0 * PI), 0.25);
    let rw = |d: f64| {
        let mut s = 0.0;
        for q in 1..n {
            s += (q as f64 * d).cos() / q as f64;
        }
        -2.0 * PI / n as f64 * s - PI / (n * n) as f64 * (n as f64 * d).cos()
    };
    // R depends only on the index difference.
    let r_weights: Vec<f64> = (0..m).map(|d| rw(t[d])).collect();
    let mut a = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let rj = r_weights[(i + m - j) % m];
            let v = if i == j {
                let m1 = -1.0 / (4.0 * PI);
                m1 * rj + PI / n as f64 * diag
            } else {
                let kr = k * nodes[i].distance(nodes[j]);
                let m1 = -j0(kr) / (4.0 * PI);
                let ls = (4.0 * (0.5 * (t[i] - t[j])).sin().powi(2)).ln();
                let m2 = Complex64::new(-0.25 * y0(kr) - m1 * ls, 0.25 * j0(kr));
                m1 * rj + PI / n as f64 * m2
            };
            a[(i, j)] = v;
        }
    }
    let rhs = DVector::from_fn(m, |i, _| -free_green(k, nodes[i].distance(source)));
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("circle system singular at k = {k}")))?;
    Ok(CircleSolution {
        radius,
        k,
        source,
        nodes,
        density: x.iter().copied().collect(),
    })
}

impl CircleSolution {
    /// Scattered field at a point away from the circle.
    pub fn scattered_at(&self, r: Point) -> Complex64 {
        let w = 2.0 * PI / self.nodes.len() as f64;
        self.nodes
            .iter()
            .zip(&self.density)
            .map(|(x, s)| *s * free_green(self.k, r.distance(*x)))
            .sum::<Complex64>()
            * w
    }
}

/// Exact scattered field of a Dirichlet circle for a point source outside.
pub fn exact_circle_scattered(radius: f64, k: f64, source: Point, r: Point) -> Complex64 {
    let ka = k * radius;
    let (rs, ps) = (source.norm(), source.angle());
    let (rr, pr) = (r.norm(), r.angle());
    let m_max = (ka + 10.0 * ka.cbrt() + 30.0).ceil() as i32;
    let mut s = Complex64::new(0.0, 0.0);
    for m in -m_max..=m_max {
        let ratio = jn(m, ka) / hankel1_n(m, ka);
        let term = ratio * hankel1_n(m, k * rs) * hankel1_n(m, k * rr) * Complex64::from_polar(1.0, m as f64 * (pr - ps));
        s += term;
    }
    Complex64::new(0.0, -0.25) * s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_rel_error(n: usize, k: f64) -> f64 {
        let a = 5.0;
        let src = Point::new(9.0, 1.5);
        let sol = solve_circle(a, k, src, n).unwrap();
        let probes = [Point::new(-8.0, 2.0), Point::new(0.0, 7.5), Point::new(12.0, -6.0), Point::new(6.0, 0.5)];
        let scale = probes.iter().map(|p| exact_circle_scattered(a, k, src, *p).norm()).fold(0.0, f64::max);
        probes
            .iter()
            .map(|p| (sol.scattered_at(*p) - exact_circle_scattered(a, k, src, *p)).norm() / scale)
            .fold(0.0, f64::max)
    }

    #[test]
    fn matches_series_at_twenty_per_wavelength() {
        let k = 2.1;
        let waves = 2.0 * PI * 5.0 * k / (2.0 * PI);
        let n = (20.0 * waves / 2.0).ceil() as usize;
        let e = max_rel_error(n, k);
        assert!(e < 1e-3, "relative error {e:e}");
    }

    #[test]
    fn error_drops_with_refinement() {
        let k = 2.1;
        let e1 = max_rel_error(24, k);
        let e2 = max_rel_error(48, k);
        assert!(e2 < 0.5 * e1, "{e1:e} -> {e2:e}");
    }

    #[test]
    fn rejects_source_inside() {
        assert!(solve_circle(5.0, 1.0, Point::new(1.0, 0.0), 16).is_err());
    }
}
