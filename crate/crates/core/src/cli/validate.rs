//! Built-in oracle checks run by `validate`.

use num_complex::Complex64;

use crate::analysis::{return_spectrum, Window};
use crate::error::Result;
use crate::geometry::{build_geometry, stability_class, Point, StabilityClass, DEFAULT_STABILITY_TOL};
use crate::helmholtz::{exact_circle_scattered, solve_circle, ComplexSpectrum, SweepKind};
use crate::raytrace::horizontal_monodromy;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn circle_error(n: usize, k: f64, a: f64) -> f64 {
    let src = Point::new(2.0 * a, 0.3 * a);
    let Ok(sol) = solve_circle(a, k, src, n) else {
        return f64::INFINITY;
    };
    let probes = [
        Point::new(-1.6 * a, 0.4 * a),
        Point::new(0.0, 1.5 * a),
        Point::new(2.4 * a, -1.2 * a),
        Point::new(1.2 * a, 0.1 * a),
    ];
    let exact: Vec<Complex64> = probes.iter().map(|p| exact_circle_scattered(a, k, src, *p)).collect();
    let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    probes
        .iter()
        .zip(&exact)
        .map(|(p, e)| (sol.scattered_at(*p) - e).norm() / scale)
        .fold(0.0, f64::max)
}

/// Dirichlet circle against the cylindrical-harmonic series at 20 nodes
/// per wavelength, and the error drop when the node count doubles.
pub fn circle_check() -> OracleCheck {
    let (k, a) = (2.1f64, 5.0);
    let n = (20.0 * k * a / 2.0).ceil() as usize;
    let e = circle_error(n, k, a);
    let (e1, e2) = (circle_error(24, k, a), circle_error(48, k, a));
    OracleCheck {
        name: "circle scattering",
        passed: e < 1e-3 && e2 < 0.5 * e1,
        detail: format!("relative error {e:.3e} at 20/wavelength; {e1:.3e} -> {e2:.3e} on doubling"),
    }
}

/// Horizontal-orbit trace against `2 - 4D/R`, and the stability flip at `D = R`.
pub fn monodromy_check() -> OracleCheck {
    let r = 30.5;
    let mut worst = 0.0f64;
    let mut flips_ok = true;
    for i in 0..100 {
        let d = 15.0 + 31.0 * i as f64 / 99.0;
        let Ok(g) = build_geometry(r, 106.0, d, 0.2) else {
            flips_ok = false;
            continue;
        };
        let s = horizontal_monodromy(&g);
        worst = worst.max((s.trace - (2.0 - 4.0 * d / r)).abs());
        let class = stability_class(&g, DEFAULT_STABILITY_TOL);
        let expected = if d < r { StabilityClass::Stable } else { StabilityClass::Unstable };
        flips_ok &= class == expected && s.stable == (d < r);
    }
    OracleCheck {
        name: "monodromy closed form",
        passed: worst <= 1e-12 && flips_ok,
        detail: format!("max trace deviation {worst:.2e}; classification flips at D = R: {flips_ok}"),
    }
}

/// Single synthetic echo lands at its length.
pub fn fourier_check() -> Result<OracleCheck> {
    let (r, l0) = (30.5, 2.0 * 31.62);
    let n = 4000;
    let axis: Vec<f64> = (0..n).map(|i| 0.5 + 4.5 * i as f64 / (n - 1) as f64).collect();
    let s11 = axis.iter().map(|k| Complex64::from_polar(0.5, k * l0)).collect();
    let spec = ComplexSpectrum::new(SweepKind::Frequency, axis, s11, r, 1.0)?;
    let rs = return_spectrum(&spec, Window::Hann, 8, 4.0)?;
    let (at, _) = rs.max_in(0.0, 4.0).unwrap_or((f64::NAN, 0.0));
    let err = (at - l0 / r).abs();
    Ok(OracleCheck {
        name: "Fourier identity",
        passed: err <= rs.resolution,
        detail: format!("echo at {:.4} R, found {:.4} R (bin {:.4} R)", l0 / r, at, rs.resolution),
    })
}

pub fn run_all() -> Result<Vec<OracleCheck>> {
    Ok(vec![circle_check(), monodromy_check(), fourier_check()?])
}
