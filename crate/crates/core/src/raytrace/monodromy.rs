use std::ops::Mul;

use crate::geometry::ResonatorGeometry;

/// Linear map of transverse (position, angle) deviations around a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m: [[f64; 2]; 2],
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix {
        m: [[1.0, 0.0], [0.0, 1.0]],
    };

    /// Free flight over `length`.
    pub fn free(length: f64) -> Self {
        TransferMatrix {
            m: [[1.0, length], [0.0, 1.0]],
        }
    }

    /// Thin-lens equivalent of a curved mirror with the given focal power
    /// (positive power focuses).
    pub fn lens(power: f64) -> Self {
        TransferMatrix {
            m: [[1.0, 0.0], [-power, 1.0]],
        }
    }

    /// Reflection off a circle of radius `radius` at incidence `cos_incidence`
    /// (tangential plane). Concave side focuses.
    pub fn mirror(radius: f64, cos_incidence: f64, concave: bool) -> Self {
        let power = 2.0 / (radius * cos_incidence);
        Self::lens(if concave { power } else { -power })
    }

    pub fn m12(&self) -> f64 {
        self.m[0][1]
    }

    pub fn m22(&self) -> f64 {
        self.m[1][1]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::IDENTITY, |acc, _| *self * acc)
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;
    fn mul(self, o: TransferMatrix) -> TransferMatrix {
        let a = self.m;
        let b = o.m;
        TransferMatrix {
            m: [
                [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
            ],
        }
    }
}

/// Linear stability of the horizontal orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityResult {
    pub trace: f64,
    /// Lyapunov exponent per round trip; zero when stable.
    pub lyapunov: f64,
    pub stable: bool,
}

impl StabilityResult {
    pub fn from_trace(trace: f64) -> Self {
        let half = trace.abs() / 2.0;
        let stable = half <= 1.0;
        StabilityResult {
            trace,
            lyapunov: if stable { 0.0 } else { half.acosh() },
            stable,
        }
    }
}

/// Round-trip matrix of the horizontal orbit, starting at the wall:
/// flight `D`, vertex mirror, flight `D`, flat wall.
pub fn horizontal_round_trip(geom: &ResonatorGeometry) -> TransferMatrix {
    let d = geom.separation();
    let flight = TransferMatrix::free(d);
    let mirror = TransferMatrix::mirror(geom.radius(), 1.0, true);
    TransferMatrix::IDENTITY * flight * mirror * flight
}

pub fn horizontal_monodromy(geom: &ResonatorGeometry) -> StabilityResult {
    StabilityResult::from_trace(horizontal_round_trip(geom).trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_geometry;
    use approx::assert_relative_eq;

    fn geom(d: f64) -> ResonatorGeometry {
        build_geometry(30.5, 115.0, d, 0.2).unwrap()
    }

    /// Hand-multiplied 2x2 product, independent of `TransferMatrix`.
    fn oracle_trace(d: f64, r: f64) -> f64 {
        let f = [[1.0, d], [0.0, 1.0]];
        let m = [[1.0, 0.0], [-2.0 / r, 1.0]];
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            let mut c = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        c[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            c
        };
        let p = mul(f, mul(m, f));
        p[0][0] + p[1][1]
    }

    #[test]
    fn confocal_midpoint() {
        let s = horizontal_monodromy(&geom(15.25));
        assert_relative_eq!(s.trace, 0.0, epsilon = 1e-12);
        assert!(s.stable);
        assert_eq!(s.lyapunov, 0.0);
    }

    #[test]
    fn transition_point() {
        let s = horizontal_monodromy(&geom(30.5));
        assert_relative_eq!(s.trace, -2.0, epsilon = 1e-12);
        assert!(s.stable);
        assert_eq!(s.lyapunov, 0.0);
    }

    #[test]
    fn unstable_reference() {
        let s = horizontal_monodromy(&geom(32.5));
        let tr = oracle_trace(32.5, 30.5);
        assert_relative_eq!(s.trace, tr, epsilon = 1e-12);
        assert_relative_eq!(s.trace, -2.262, epsilon = 1e-3);
        assert_relative_eq!(s.lyapunov, (tr.abs() / 2.0).acosh(), epsilon = 1e-12);
        assert_relative_eq!(s.lyapunov, 0.507, epsilon = 1e-3);
        assert!(!s.stable);
    }

    #[test]
    fn closed_form_trace_over_grid() {
        for i in 0..100 {
            let d = 16.0 + 0.3 * i as f64;
            let s = horizontal_monodromy(&geom(d));
            assert!((s.trace - (2.0 - 4.0 * d / 30.5)).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn compositions_stay_symplectic(ops in proptest::collection::vec((0.0f64..50.0, 5.0f64..80.0, 0.2f64..1.0, any::<bool>()), 1..40)) {
                let mut m = TransferMatrix::IDENTITY;
                for (len, r, c, concave) in ops {
                    m = TransferMatrix::mirror(r, c, concave) * TransferMatrix::free(len) * m;
                    // det rounding scales with the squared entry size.
                    let scale = m.m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
                    prop_assert!((m.det() - 1.0).abs() < 1e-10 * (1.0 + scale * scale));
                }
            }
        }
    }
}
