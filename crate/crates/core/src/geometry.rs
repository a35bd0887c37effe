//! Resonator configuration and primitive geometric queries.
//!
//! Coordinate frame: the Dirichlet wall is the line `x = 0`, the symmetry
//! axis is `y = 0` and the reflector is a circular arc of radius `R` whose
//! vertex sits at `(D, 0)`. The antenna is a point source at `(d_a, 0)`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A point (or vector) in the plane, in centimetres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Unit vector at `angle` radians from the +x axis.
    pub fn from_angle(angle: f64) -> Self {
        Point::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    /// Mirror image under `y -> -y`.
    pub fn mirror_y(self) -> Point {
        Point::new(self.x, -self.y)
    }

    /// Mirror image in the wall, `x -> -x`.
    pub fn mirror_x(self) -> Point {
        Point::new(-self.x, self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Default marginality tolerance (relative).
pub const DEFAULT_STABILITY_TOL: f64 = 1e-9;

/// Default antenna offset from the wall (2 mm).
pub const DEFAULT_ANTENNA_OFFSET_CM: f64 = 0.2;

/// Wall plus arc reflector configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorGeometry {
    radius: f64,
    alpha_deg: f64,
    separation: f64,
    antenna_offset: f64,
    antenna_y: f64,
}

impl ResonatorGeometry {
    /// Builds and validates a geometry with the antenna on the symmetry axis.
    pub fn new(radius: f64, alpha_deg: f64, separation: f64, antenna_offset: f64) -> Result<Self> {
        Self::with_antenna_y(radius, alpha_deg, separation, antenna_offset, 0.0)
    }

    /// Like [`ResonatorGeometry::new`] but allows an off-axis antenna.
    ///
    /// Off-axis placement breaks the `y -> -y` symmetry and lets odd
    /// transverse modes couple; it is not used by any of the reference runs.
    pub fn with_antenna_y(
        radius: f64,
        alpha_deg: f64,
        separation: f64,
        antenna_offset: f64,
        antenna_y: f64,
    ) -> Result<Self> {
        let positive = |v: f64, name: &str| -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(name, format!("must be a positive finite length, got {v}")));
            }
            Ok(())
        };
        positive(radius, "radius_cm")?;
        positive(separation, "separation_cm")?;
        positive(antenna_offset, "antenna_offset_cm")?;
        if !(alpha_deg.is_finite() && alpha_deg > 0.0 && alpha_deg < 180.0) {
            return Err(Error::config(
                "alpha_deg",
                format!("opening angle must lie in (0, 180) degrees, got {alpha_deg}"),
            ));
        }
        if antenna_offset >= 0.1 * separation {
            return Err(Error::config(
                "antenna_offset_cm",
                format!("antenna offset {antenna_offset} cm must be small against the separation {separation} cm"),
            ));
        }
        if !antenna_y.is_finite() {
            return Err(Error::config("antenna_y_cm", "must be finite"));
        }
        let geom = ResonatorGeometry {
            radius,
            alpha_deg,
            separation,
            antenna_offset,
            antenna_y,
        };
        let (tip, _) = tip_positions(&geom);
        if tip.x <= antenna_offset {
            return Err(Error::config(
                "separation_cm",
                format!("reflector tips reach x = {:.4} cm, behind the antenna; increase separation or reduce alpha", tip.x),
            ));
        }
        Ok(geom)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn alpha_deg(&self) -> f64 {
        self.alpha_deg
    }

    /// Half opening angle in radians.
    pub fn half_angle(&self) -> f64 {
        0.5 * self.alpha_deg.to_radians()
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn antenna_offset(&self) -> f64 {
        self.antenna_offset
    }

    /// Antenna position `(d_a, y_a)`.
    pub fn antenna(&self) -> Point {
        Point::new(self.antenna_offset, self.antenna_y)
    }

    /// Foot of the antenna on the wall; phase centre of the source and its image.
    pub fn antenna_foot(&self) -> Point {
        Point::new(0.0, self.antenna_y)
    }

    pub fn is_on_axis(&self) -> bool {
        self.antenna_y == 0.0
    }

    /// Centre of curvature of the reflector, `(D - R, 0)`.
    pub fn arc_center(&self) -> Point {
        Point::new(self.separation - self.radius, 0.0)
    }

    /// Reflector vertex `(D, 0)`.
    pub fn vertex(&self) -> Point {
        Point::new(self.separation, 0.0)
    }

    /// Arc point at parameter `theta` (radians from the +x axis about the centre).
    pub fn arc_point(&self, theta: f64) -> Point {
        self.arc_center() + Point::from_angle(theta) * self.radius
    }

    /// Arc length of the reflector.
    pub fn arc_length(&self) -> f64 {
        self.radius * self.alpha_deg.to_radians()
    }

    pub fn contains_theta(&self, theta: f64) -> bool {
        theta.abs() <= self.half_angle()
    }

    /// Copy with a different separation, re-validated.
    pub fn with_separation(&self, separation: f64) -> Result<Self> {
        Self::with_antenna_y(self.radius, self.alpha_deg, separation, self.antenna_offset, self.antenna_y)
    }

    /// Copy with a different opening angle, re-validated.
    pub fn with_alpha(&self, alpha_deg: f64) -> Result<Self> {
        Self::with_antenna_y(self.radius, alpha_deg, self.separation, self.antenna_offset, self.antenna_y)
    }
}

/// Builds a validated geometry; see [`ResonatorGeometry::new`].
pub fn build_geometry(radius: f64, alpha_deg: f64, separation: f64, antenna_offset: f64) -> Result<ResonatorGeometry> {
    ResonatorGeometry::new(radius, alpha_deg, separation, antenna_offset)
}

/// Upper and lower reflector tips, at `theta = +alpha/2` and `-alpha/2`.
pub fn tip_positions(geom: &ResonatorGeometry) -> (Point, Point) {
    let half = geom.half_angle();
    let c = geom.arc_center();
    let dx = geom.radius * half.cos();
    let dy = geom.radius * half.sin();
    (Point::new(c.x + dx, dy), Point::new(c.x + dx, -dy))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Stable,
    Marginal,
    Unstable,
}

/// Stable when the centre of curvature lies behind the wall (`D < R`).
pub fn stability_class(geom: &ResonatorGeometry, tol: f64) -> StabilityClass {
    let (d, r) = (geom.separation, geom.radius);
    if d < r * (1.0 - tol) {
        StabilityClass::Stable
    } else if d > r * (1.0 + tol) {
        StabilityClass::Unstable
    } else {
        StabilityClass::Marginal
    }
}

/// Intersection of a ray with the reflector arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcHit {
    pub point: Point,
    pub theta: f64,
    pub path_length: f64,
}

/// Relative discriminant below which a ray counts as tangent to the circle.
const GRAZING_TOL: f64 = 1e-12;
/// Minimum forward distance, so a ray leaving a surface does not re-hit it.
const MIN_STEP: f64 = 1e-9;

/// Nearest forward intersection of the ray `origin + t * direction` (t > 0)
/// with the arc. Tangent rays do not hit.
pub fn ray_arc_intersect(origin: Point, direction: Point, geom: &ResonatorGeometry) -> Option<ArcHit> {
    let c = geom.arc_center();
    let r = geom.radius;
    let oc = origin - c;
    let b = direction.dot(oc);
    let q = oc.dot(oc) - r * r;
    let disc = b * b - q;
    if disc <= GRAZING_TOL * r * r {
        return None;
    }
    let s = disc.sqrt();
    // Stable root ordering: t1 <= t2.
    let (t1, t2) = if b > 0.0 {
        let t1 = -b - s;
        (t1, if t1 != 0.0 { q / t1 } else { -b + s })
    } else {
        let t2 = -b + s;
        (if t2 != 0.0 { q / t2 } else { -b - s }, t2)
    };
    let (t1, t2) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    for t in [t1, t2] {
        if t <= MIN_STEP {
            continue;
        }
        let p = origin + direction * t;
        let theta = (p - c).angle();
        if geom.contains_theta(theta) {
            return Some(ArcHit {
                point: p,
                theta,
                path_length: t,
            });
        }
    }
    None
}

/// Specular reflection `d' = d - 2 (d.n) n`.
pub fn reflect(direction: Point, normal: Point) -> Point {
    direction - normal * (2.0 * direction.dot(normal))
}

/// Shortest distance from `p` to the reflector arc.
pub fn distance_to_arc(p: Point, geom: &ResonatorGeometry) -> f64 {
    let c = geom.arc_center();
    let rel = p - c;
    let theta = rel.angle();
    if geom.contains_theta(theta) {
        (rel.norm() - geom.radius).abs()
    } else {
        let (a, b) = tip_positions(geom);
        p.distance(a).min(p.distance(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn split_geometry() -> ResonatorGeometry {
        build_geometry(30.5, 115.0, 32.5, 0.2).unwrap()
    }

    #[test]
    fn builds_reference_geometries() {
        let g = split_geometry();
        assert_relative_eq!(g.arc_center().x, 2.0, epsilon = 1e-12);
        assert_eq!(g.arc_center().y, 0.0);
        assert_relative_eq!(g.vertex().x, 32.5, epsilon = 1e-12);
        assert!(build_geometry(30.5, 106.0, 32.5, 0.2).is_ok());
        assert!(build_geometry(30.5, 106.0, 25.0, 0.2).is_ok());
    }

    #[test]
    fn rejects_bad_parameters_by_name() {
        let err = build_geometry(30.5, 115.0, -1.0, 0.2).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "separation_cm"));
        let err = build_geometry(30.5, 190.0, 32.5, 0.2).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "alpha_deg"));
        let err = build_geometry(0.0, 115.0, 32.5, 0.2).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "radius_cm"));
        let err = build_geometry(30.5, 115.0, 32.5, 5.0).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "antenna_offset_cm"));
        // Tips would poke through the wall.
        assert!(build_geometry(30.5, 170.0, 5.0, 0.2).is_err());
    }

    #[test]
    fn tips_match_hand_evaluation() {
        let (up, lo) = tip_positions(&split_geometry());
        // (D - R + R cos 57.5 deg, R sin 57.5 deg)
        assert_relative_eq!(up.x, 18.3878, epsilon = 1e-3);
        assert_relative_eq!(up.y, 25.7230, epsilon = 1e-3);
        assert_eq!(lo, up.mirror_y());
    }

    #[test]
    fn tips_approach_quarter_circle_ends() {
        let g = build_geometry(30.5, 179.9999, 40.0, 0.2).unwrap();
        let (up, lo) = tip_positions(&g);
        assert_relative_eq!(up.x, 40.0 - 30.5, epsilon = 1e-4);
        assert_relative_eq!(up.y, 30.5, epsilon = 1e-6);
        assert_relative_eq!(lo.y, -30.5, epsilon = 1e-6);
    }

    #[test]
    fn stability_classes() {
        let g = |d| build_geometry(30.5, 115.0, d, 0.2).unwrap();
        assert_eq!(stability_class(&g(15.25), DEFAULT_STABILITY_TOL), StabilityClass::Stable);
        assert_eq!(stability_class(&g(32.5), DEFAULT_STABILITY_TOL), StabilityClass::Unstable);
        assert_eq!(stability_class(&g(30.5), DEFAULT_STABILITY_TOL), StabilityClass::Marginal);
    }

    #[test]
    fn stability_flips_once() {
        let mut flips = 0;
        let mut prev = None;
        for i in 0..=400 {
            let d = 20.0 + 0.05 * i as f64;
            let c = stability_class(&build_geometry(30.5, 106.0, d, 0.2).unwrap(), DEFAULT_STABILITY_TOL);
            if c == StabilityClass::Marginal {
                continue;
            }
            if let Some(p) = prev {
                if p != c {
                    flips += 1;
                }
            }
            prev = Some(c);
        }
        assert_eq!(flips, 1);
    }

    #[test]
    fn axial_ray_hits_vertex() {
        let g = split_geometry();
        let hit = ray_arc_intersect(Point::ORIGIN, Point::new(1.0, 0.0), &g).unwrap();
        assert_relative_eq!(hit.point.x, 32.5, epsilon = 1e-12);
        assert_relative_eq!(hit.theta, 0.0, epsilon = 1e-14);
        assert_relative_eq!(hit.path_length, 32.5, epsilon = 1e-12);
    }

    #[test]
    fn ray_outside_span_misses() {
        let g = split_geometry();
        // Straight up along the wall never meets the arc.
        assert!(ray_arc_intersect(Point::new(1.0, 0.0), Point::new(0.0, 1.0), &g).is_none());
        // Aimed above the upper tip from the origin.
        let dir = Point::from_angle(80f64.to_radians());
        assert!(ray_arc_intersect(Point::ORIGIN, dir, &g).is_none());
        // Pointing away from the reflector.
        assert!(ray_arc_intersect(Point::new(1.0, 0.0), Point::new(-1.0, 0.0), &g).is_none());
    }

    #[test]
    fn grazing_ray_matches_quadratic_oracle() {
        let g = split_geometry();
        let c = g.arc_center();
        // Tangent at the vertex: x = D, vertical ray.
        let origin = Point::new(32.5, -5.0);
        assert!(ray_arc_intersect(origin, Point::new(0.0, 1.0), &g).is_none());
        // Slightly inside: two roots, brute-force oracle from the circle equation.
        let x0 = 32.5 - 1e-3;
        let origin = Point::new(x0, -5.0);
        let hit = ray_arc_intersect(origin, Point::new(0.0, 1.0), &g).unwrap();
        let dy = (30.5f64.powi(2) - (x0 - c.x).powi(2)).sqrt();
        assert_relative_eq!(hit.point.y, -dy, epsilon = 1e-9);
        assert_relative_eq!(hit.path_length, 5.0 - dy, epsilon = 1e-9);
    }

    #[test]
    fn reflection_examples() {
        let r = reflect(Point::new(1.0, 0.0), Point::new(-1.0, 0.0));
        assert_relative_eq!(r.x, -1.0);
        assert_relative_eq!(r.y, 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = reflect(Point::new(s, s), Point::new(0.0, -1.0));
        assert_relative_eq!(r.x, s, epsilon = 1e-15);
        assert_relative_eq!(r.y, -s, epsilon = 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn arc_points_on_circle(theta in -1.0f64..1.0, d in 20.0f64..45.0) {
                let g = build_geometry(30.5, 115.0, d, 0.2).unwrap();
                let p = g.arc_point(theta);
                prop_assert!(((p - g.arc_center()).norm() - 30.5).abs() <= 1e-12 * 30.5);
            }

            #[test]
            fn intersections_mirror_symmetric(phi in -1.2f64..1.2, x0 in 0.0f64..10.0, y0 in -5.0f64..5.0) {
                let g = split_geometry();
                let o = Point::new(x0, y0);
                let d = Point::from_angle(phi);
                let a = ray_arc_intersect(o, d, &g);
                let b = ray_arc_intersect(o.mirror_y(), d.mirror_y(), &g);
                match (a, b) {
                    (Some(a), Some(b)) => {
                        prop_assert_eq!(a.point.x, b.point.x);
                        prop_assert_eq!(a.point.y, -b.point.y);
                        prop_assert_eq!(a.theta, -b.theta);
                    }
                    (None, None) => {}
                    _ => prop_assert!(false, "asymmetric hit"),
                }
            }

            #[test]
            fn reflect_is_involution_and_keeps_norm(a in 0.0f64..6.3, b in 0.0f64..6.3) {
                let d = Point::from_angle(a);
                let n = Point::from_angle(b);
                let r = reflect(d, n);
                prop_assert!((r.norm() - 1.0).abs() < 1e-12);
                prop_assert!((r.dot(n) + d.dot(n)).abs() < 1e-12);
                let back = reflect(r, n);
                prop_assert!((back - d).norm() < 1e-12);
            }
        }
    }
}
