//! Green functions of the Dirichlet half-plane and the point-antenna model.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::special::hankel1_0;

const I4: Complex64 = Complex64::new(0.0, 0.25);

/// Free-space outgoing Green function `(i/4) H0(k r)`.
pub fn free_green(k: f64, r: f64) -> Complex64 {
    I4 * hankel1_0(k * r)
}

/// `(i/4)[H0(k|r - s|) - H0(k|r - s*|)]`, with `s*` the mirror of `s`
/// in the wall `x = 0`.
pub fn half_plane_green(k: f64, r: Point, s: Point) -> Result<Complex64> {
    let direct = r.distance(s);
    if direct == 0.0 {
        return Err(Error::Singular(format!("half_plane_green at coincident points ({}, {})", r.x, r.y)));
    }
    if r.x == 0.0 || s.x == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let image = r.distance(s.mirror_x());
    Ok(free_green(k, direct) - free_green(k, image))
}

/// Regularised site Green function of the wall alone at distance `d_a`:
/// `(i/4)(1 - H0(2 k d_a))`.
pub fn wall_only_site_green(k: f64, d_a: f64) -> Complex64 {
    I4 * (Complex64::new(1.0, 0.0) - hankel1_0(2.0 * k * d_a))
}

/// Antenna reflection coefficient `(1 + i kappa g)/(1 - i kappa g)`.
pub fn s11_from_site_green(g: Complex64, kappa: f64) -> Complex64 {
    let ikg = Complex64::new(0.0, kappa) * g;
    (1.0 + ikg) / (1.0 - ikg)
}

/// `1 - |S11|^2`.
pub fn transmission(s11: Complex64) -> f64 {
    1.0 - s11.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{j0, y0};
    use approx::assert_relative_eq;

    #[test]
    fn vanishes_on_wall_and_is_reciprocal() {
        let s = Point::new(0.2, 0.0);
        let r = Point::new(0.0, 3.7);
        assert_eq!(half_plane_green(1.2, r, s).unwrap(), Complex64::new(0.0, 0.0));
        let a = Point::new(3.0, -1.0);
        let b = Point::new(7.5, 4.0);
        assert_eq!(half_plane_green(1.2, a, b).unwrap(), half_plane_green(1.2, b, a).unwrap());
        assert!(half_plane_green(1.2, a, a).is_err());
    }

    #[test]
    fn far_field_decay() {
        // Large-argument oracle: the dipole pair radiates as
        // sqrt(2/(pi k rho)) * sin(k d cos phi) / 2 along direction phi.
        let k = 1.18;
        let s = Point::new(0.2, 0.0);
        for rho in [200.0, 800.0] {
            let r = Point::new(rho, 0.0);
            let g = half_plane_green(k, r, s).unwrap().norm();
            let oracle = (2.0 / (std::f64::consts::PI * k * rho)).sqrt() * 0.5 * (k * 0.2f64).sin();
            assert_relative_eq!(g, oracle, max_relative = 2e-3);
        }
    }

    #[test]
    fn wall_only_reference() {
        let k = 2.0 * std::f64::consts::PI * 5.63 / 29.979_245_8;
        let g = wall_only_site_green(k, 0.2);
        let x = 2.0 * k * 0.2;
        assert_relative_eq!(g.im, (1.0 - j0(x)) / 4.0, epsilon = 1e-15);
        assert_relative_eq!(g.re, y0(x) / 4.0, epsilon = 1e-15);
        assert_relative_eq!(g.im, 0.014, epsilon = 5e-4);
        let s11 = s11_from_site_green(g, 1.0);
        let tsq = transmission(s11);
        assert!(tsq > 0.0 && tsq < 0.1);
        assert_relative_eq!(tsq, 0.05, epsilon = 5e-3);
    }

    #[test]
    fn antenna_unitary_limit() {
        let s11 = s11_from_site_green(Complex64::new(-0.3, 0.0), 1.0);
        assert_relative_eq!(s11.norm(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(transmission(s11), 0.0, epsilon = 1e-15);
    }
}
