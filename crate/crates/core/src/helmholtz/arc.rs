//! Single-layer Nyström solver for the open arc above the Dirichlet wall.
//!
//! The arc is parametrised by `y` in `[-1, 1]`, `theta = beta * y`, and the
//! density is written `sigma R beta = omega(y) / sqrt(1 - y^2)`, which puts
//! the edge singularity into the Chebyshev weight. `omega` is smooth and is
//! sampled at first-kind Chebyshev nodes.

use std::f64::consts::PI;
use std::sync::Arc;

use log::debug;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::kernel::{free_green, half_plane_green};
use crate::error::{Error, Result};
use crate::geometry::{distance_to_arc, Point, ResonatorGeometry};
use crate::special::{j0, y0, EULER_GAMMA};

/// Systems with a condition estimate above this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Minimum nodes per wavelength along the arc.
pub const MIN_NODES_PER_WAVELENGTH: f64 = 16.0;
const MIN_NODES: usize = 32;
/// Oversampling of the density for evaluation points close to the arc.
const NEAR_OVERSAMPLE: usize = 8;

/// Chebyshev nodes with the product-integration weights for `ln|y - y'|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevRule {
    pub n: usize,
    pub y: Vec<f64>,
    /// Row-major `n x n`: `sum_j W[i][j] f(y_j)` approximates
    /// `int f(y') ln|y_i - y'| / sqrt(1 - y'^2) dy'`.
    log_weights: Vec<f64>,
}

fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| ((2 * j + 1) as f64 * PI / (2 * n) as f64).cos()).collect()
}

/// `T_0(y) .. T_{n-1}(y)`.
fn chebyshev_values(y: f64, n: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if n > 1 {
        out[1] = y;
    }
    for m in 2..n {
        out[m] = 2.0 * y * out[m - 1] - out[m - 2];
    }
}

/// Weights `w_j` with `sum_j w_j f(y_j) ~ int f(y') ln|y - y'| dy' / sqrt(1-y'^2)`
/// for an arbitrary `y` in `[-1, 1]`.
fn log_weights_at(y: f64, nodes_t: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut ty = vec![0.0; n];
    chebyshev_values(y, n, &mut ty);
    let scale = PI / n as f64;
    nodes_t
        .iter()
        .map(|tj| {
            let mut s = std::f64::consts::LN_2;
            for m in 1..n {
                s += 2.0 * ty[m] * tj[m] / m as f64;
            }
            -scale * s
        })
        .collect()
}

impl ChebyshevRule {
    pub fn new(n: usize) -> Self {
        let y = chebyshev_nodes(n);
        let nodes_t = Self::node_polys(&y);
        let mut log_weights = Vec::with_capacity(n * n);
        for &yi in &y {
            log_weights.extend(log_weights_at(yi, &nodes_t, n));
        }
        ChebyshevRule { n, y, log_weights }
    }

    fn node_polys(y: &[f64]) -> Vec<Vec<f64>> {
        let n = y.len();
        y.iter()
            .map(|&yj| {
                let mut t = vec![0.0; n];
                chebyshev_values(yj, n, &mut t);
                t
            })
            .collect()
    }

    pub fn log_weight(&self, i: usize, j: usize) -> f64 {
        self.log_weights[i * self.n + j]
    }

    pub fn weight(&self) -> f64 {
        PI / self.n as f64
    }

    /// Chebyshev coefficients of the interpolant through values at the nodes.
    pub fn coefficients(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut t = vec![0.0; n];
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for (j, &v) in values.iter().enumerate() {
            chebyshev_values(self.y[j], n, &mut t);
            for m in 0..n {
                c[m] += v * t[m];
            }
        }
        c[0] /= n as f64;
        for cm in c.iter_mut().skip(1) {
            *cm *= 2.0 / n as f64;
        }
        c
    }
}

/// Node count for the arc of `geom` at wave number `k`.
pub fn nodes_for(geom: &ResonatorGeometry, k: f64, nodes_per_wavelength: f64) -> usize {
    let per = nodes_per_wavelength.max(MIN_NODES_PER_WAVELENGTH);
    let waves = geom.arc_length() * k / (2.0 * PI);
    ((per * waves).ceil() as usize).max(MIN_NODES)
}

/// Solved density for one geometry and wave number.
#[derive(Debug, Clone)]
pub struct ArcSolution {
    pub geom: ResonatorGeometry,
    pub k: f64,
    pub source: Point,
    pub rule: Arc<ChebyshevRule>,
    pub nodes: Vec<Point>,
    /// Weighted density `omega_j` at the nodes.
    pub omega: Vec<Complex64>,
    pub condition_estimate: f64,
}

fn arc_at(geom: &ResonatorGeometry, y: f64) -> Point {
    geom.arc_point(geom.half_angle() * y)
}

/// Solves for the arc density that cancels the antenna field on the arc.
pub fn solve_arc_density(geom: &ResonatorGeometry, k: f64, n: usize) -> Result<ArcSolution> {
    solve_with_rule(geom, k, Arc::new(ChebyshevRule::new(n)))
}

/// As [`solve_arc_density`], reusing precomputed weights.
pub fn solve_with_rule(geom: &ResonatorGeometry, k: f64, rule: Arc<ChebyshevRule>) -> Result<ArcSolution> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::config("k", format!("wave number must be positive, got {k}")));
    }
    let n = rule.n;
    let floor = nodes_for(geom, k, MIN_NODES_PER_WAVELENGTH);
    if n < floor {
        return Err(Error::config(
            "nodes_per_wavelength",
            format!("{n} arc nodes is below the floor of {floor} at k = {k}"),
        ));
    }
    let nodes: Vec<Point> = rule.y.iter().map(|&y| arc_at(geom, y)).collect();
    let source = geom.antenna();
    let rbeta = geom.radius() * geom.half_angle();
    let w = rule.weight();
    let diag_c = Complex64::new(
        -((k / 2.0).ln() + EULER_GAMMA + rbeta.ln()) / (2.0 * PI),
        0.25,
    );

    // Upper triangle of the complex-symmetric matrix, row by row.
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = nodes[i];
            (i..n)
                .map(|j| {
                    let xj = nodes[j];
                    let image = -free_green(k, xi.distance(xj.mirror_x()));
                    if i == j {
                        let a = -1.0 / (2.0 * PI);
                        a * rule.log_weight(i, i) + w * (diag_c + image)
                    } else {
                        let rho = xi.distance(xj);
                        let kr = k * rho;
                        let (jv, yv) = (j0(kr), y0(kr));
                        let a = -jv / (2.0 * PI);
                        let lnd = (rule.y[i] - rule.y[j]).abs().ln();
                        let c = Complex64::new(-0.25 * yv - a * lnd, 0.25 * jv);
                        a * rule.log_weight(i, j) + w * (c + image)
                    }
                })
                .collect()
        })
        .collect();
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            a[(i, j)] = v;
            // The log weights are symmetric, so the whole matrix is.
            a[(j, i)] = v;
        }
    }
    let mut rhs = DVector::<Complex64>::zeros(n);
    for i in 0..n {
        rhs[i] = -half_plane_green(k, nodes[i], source)?;
    }

    let norm1 = column_norm1(&a);
    let lu = a.lu();
    let omega = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("arc system singular at k = {k}")))?;
    let inv_norm = inverse_norm_estimate(&lu, n);
    let condition_estimate = norm1 * inv_norm;
    if !(condition_estimate <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned {
            estimate: condition_estimate,
        });
    }
    debug!("arc solve: N = {n}, k = {k:.6}, cond ~ {condition_estimate:.3e}");
    Ok(ArcSolution {
        geom: *geom,
        k,
        source,
        rule,
        nodes,
        omega: omega.iter().copied().collect(),
        condition_estimate,
    })
}

fn column_norm1(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Lower bound on `||A^{-1}||_1` from a few deterministic probe solves.
fn inverse_norm_estimate(lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>, n: usize) -> f64 {
    let probes: [&dyn Fn(usize) -> Complex64; 3] = [
        &|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
        &|i| Complex64::from_polar(1.0, 2.399_963 * i as f64),
        &|i| Complex64::new(1.0 + i as f64 / n as f64, 0.0),
    ];
    let mut best = 0.0f64;
    for p in probes {
        let b = DVector::from_fn(n, |i, _| p(i));
        let bn: f64 = b.iter().map(|v| v.norm()).sum();
        match lu.solve(&b) {
            Some(x) => best = best.max(x.iter().map(|v| v.norm()).sum::<f64>() / bn),
            None => return f64::INFINITY,
        }
    }
    best
}

/// Where a field point sits relative to the arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proximity {
    Far,
    /// Evaluated with the oversampled density.
    Near,
    /// Inside the exclusion band; not evaluated.
    Excluded,
}

impl ArcSolution {
    pub fn n(&self) -> usize {
        self.rule.n
    }

    /// Largest node spacing along the arc.
    pub fn node_spacing(&self) -> f64 {
        self.geom.radius() * self.geom.half_angle() * PI / self.n() as f64
    }

    pub fn proximity(&self, r: Point) -> Proximity {
        let d = distance_to_arc(r, &self.geom);
        let s = self.node_spacing();
        if d < 0.5 * s {
            Proximity::Excluded
        } else if d < 4.0 * s {
            Proximity::Near
        } else {
            Proximity::Far
        }
    }

    /// Scattered field of the arc density at `r`.
    pub fn scattered_at(&self, r: Point) -> Result<Complex64> {
        match self.proximity(r) {
            Proximity::Excluded => Err(Error::Numerical(format!(
                "point ({:.4}, {:.4}) lies inside the arc exclusion band",
                r.x, r.y
            ))),
            Proximity::Near => self.scattered_oversampled(r, NEAR_OVERSAMPLE),
            Proximity::Far => {
                let w = self.rule.weight();
                let mut s = Complex64::new(0.0, 0.0);
                for (x, o) in self.nodes.iter().zip(&self.omega) {
                    s += *o * half_plane_green(self.k, r, *x)?;
                }
                Ok(s * w)
            }
        }
    }

    fn scattered_oversampled(&self, r: Point, factor: usize) -> Result<Complex64> {
        let m = self.n() * factor;
        let c = self.rule.coefficients(&self.omega);
        let mut t = vec![0.0; self.n()];
        let mut s = Complex64::new(0.0, 0.0);
        for y in chebyshev_nodes(m) {
            chebyshev_values(y, self.n(), &mut t);
            let om: Complex64 = c.iter().zip(&t).map(|(ci, ti)| ci * ti).sum();
            s += om * half_plane_green(self.k, r, arc_at(&self.geom, y))?;
        }
        Ok(s * (PI / m as f64))
    }

    /// Total field `psi(r)` of the antenna in the presence of wall and arc.
    pub fn field_at(&self, r: Point) -> Result<Complex64> {
        if r.distance(self.source) == 0.0 {
            return Err(Error::Singular("field requested at the antenna".into()));
        }
        Ok(half_plane_green(self.k, r, self.source)? + self.scattered_at(r)?)
    }

    /// Regularised site Green function at the antenna.
    pub fn site_green(&self) -> Result<Complex64> {
        let d_a = self.geom.antenna_offset();
        let self_term = Complex64::new(0.0, 0.25) - free_green(self.k, 2.0 * d_a);
        Ok(self_term + self.scattered_at(self.source)?)
    }

    /// Total field on the arc at parameter `y`, using product integration
    /// for the logarithmic part; zero for an exact solution.
    pub fn boundary_field(&self, y: f64) -> Result<Complex64> {
        let n = self.n();
        let nodes_t = ChebyshevRule::node_polys(&self.rule.y);
        let lw = log_weights_at(y, &nodes_t, n);
        let x = arc_at(&self.geom, y);
        let rbeta = self.geom.radius() * self.geom.half_angle();
        let k = self.k;
        let w = self.rule.weight();
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let xj = self.nodes[j];
            let rho = x.distance(xj);
            let dy = (y - self.rule.y[j]).abs();
            let image = -free_green(k, x.distance(xj.mirror_x()));
            let (a, c) = if dy < 1e-14 {
                let c = Complex64::new(-((k / 2.0).ln() + EULER_GAMMA + rbeta.ln()) / (2.0 * PI), 0.25);
                (-1.0 / (2.0 * PI), c)
            } else {
                let kr = k * rho;
                let (jv, yv) = (j0(kr), y0(kr));
                let a = -jv / (2.0 * PI);
                (a, Complex64::new(-0.25 * yv - a * dy.ln(), 0.25 * jv))
            };
            s += self.omega[j] * (a * lw[j] + w * (c + image));
        }
        Ok(s + half_plane_green(k, x, self.source)?)
    }

    /// Largest relative boundary residual over `m` check points placed
    /// midway between nodes.
    pub fn boundary_residual(&self, m: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..m {
            let y = ((i as f64 + 0.5) * PI / m as f64).cos() * 0.999;
            let x = arc_at(&self.geom, y);
            scale = scale.max(half_plane_green(self.k, x, self.source)?.norm());
            worst = worst.max(self.boundary_field(y)?.norm());
        }
        Ok(worst / scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_geometry;
    use approx::assert_relative_eq;

    fn k563() -> f64 {
        2.0 * PI * 5.63 / 29.979_245_8
    }

    #[test]
    fn log_weights_integrate_chebyshev_polynomials() {
        // int T_m(y') ln|y - y'| / sqrt(1-y'^2) dy' = -pi ln2 (m=0), -(pi/m) T_m(y).
        let rule = ChebyshevRule::new(24);
        let mut t = vec![0.0; 24];
        for m in [0usize, 1, 5, 17] {
            for i in [0usize, 7, 12, 23] {
                let f: Vec<f64> = rule
                    .y
                    .iter()
                    .map(|&y| {
                        chebyshev_values(y, 24, &mut t);
                        t[m]
                    })
                    .collect();
                let q: f64 = (0..24).map(|j| rule.log_weight(i, j) * f[j]).sum();
                chebyshev_values(rule.y[i], 24, &mut t);
                let exact = if m == 0 { -PI * std::f64::consts::LN_2 } else { -PI / m as f64 * t[m] };
                assert_relative_eq!(q, exact, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn log_weights_symmetric() {
        let rule = ChebyshevRule::new(40);
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(rule.log_weight(i, j), rule.log_weight(j, i));
            }
        }
    }

    #[test]
    fn boundary_condition_met_between_nodes() {
        let g = build_geometry(30.5, 106.0, 32.5, 0.2).unwrap();
        let k = k563();
        let sol = solve_arc_density(&g, k, nodes_for(&g, k, 20.0)).unwrap();
        let res = sol.boundary_residual(37).unwrap();
        assert!(res < 1e-6, "relative residual {res:e}");
    }

    #[test]
    fn density_symmetric_for_on_axis_source() {
        let g = build_geometry(30.5, 115.0, 32.5, 0.2).unwrap();
        let sol = solve_arc_density(&g, k563(), 220).unwrap();
        let n = sol.n();
        let scale = sol.omega.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for j in 0..n {
            assert!((sol.omega[j] - sol.omega[n - 1 - j]).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn doubling_nodes_converges() {
        let g = build_geometry(30.5, 106.0, 28.0, 0.2).unwrap();
        let k = k563();
        let n = nodes_for(&g, k, 20.0);
        let a = solve_arc_density(&g, k, n).unwrap();
        let b = solve_arc_density(&g, k, 2 * n).unwrap();
        for p in [Point::new(10.0, 0.0), Point::new(14.0, 9.0), Point::new(45.0, -20.0), Point::new(5.0, 30.0)] {
            let fa = a.field_at(p).unwrap();
            let fb = b.field_at(p).unwrap();
            assert!((fa - fb).norm() < 1e-5 * fb.norm(), "at {p:?}: {fa} vs {fb}");
        }
        let ga = a.site_green().unwrap();
        let gb = b.site_green().unwrap();
        assert!((ga - gb).norm() < 1e-6);
    }

    #[test]
    fn node_floor_enforced() {
        let g = build_geometry(30.5, 106.0, 28.0, 0.2).unwrap();
        let err = solve_arc_density(&g, k563(), 40).unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn near_field_matches_refined_solve() {
        let g = build_geometry(30.5, 106.0, 28.0, 0.2).unwrap();
        let k = k563();
        let sol = solve_arc_density(&g, k, nodes_for(&g, k, 20.0)).unwrap();
        let fine = solve_arc_density(&g, k, 4 * sol.n()).unwrap();
        // A point one node spacing inside the arc near the vertex.
        let p = Point::new(28.0 - 1.2 * sol.node_spacing(), 0.3);
        assert_eq!(sol.proximity(p), Proximity::Near);
        assert_eq!(fine.proximity(p), Proximity::Far);
        let a = sol.field_at(p).unwrap();
        let b = fine.field_at(p).unwrap();
        assert!((a - b).norm() < 1e-5 * b.norm().max(1e-3), "{a} vs {b}");
        let inside = Point::new(28.0 - 0.1 * sol.node_spacing(), 0.0);
        assert_eq!(sol.proximity(inside), Proximity::Excluded);
        assert!(sol.field_at(inside).is_err());
    }

    #[test]
    fn wall_field_vanishes() {
        let g = build_geometry(30.5, 106.0, 28.0, 0.2).unwrap();
        let sol = solve_arc_density(&g, k563(), 200).unwrap();
        assert_eq!(sol.field_at(Point::new(0.0, 4.0)).unwrap(), Complex64::new(0.0, 0.0));
    }
}
