//! Classical ray dynamics between the wall and the reflector.

mod monodromy;
mod orbits;

pub use monodromy::{horizontal_monodromy, horizontal_round_trip, StabilityResult, TransferMatrix};
pub use orbits::{
    build_orbit_catalog, build_orbit_catalog_split, catalog_to_csv, maslov_count, shoot_to_tip, tip_legs, ClosedOrbit, DiffractionEvent,
    OrbitKind, PathEvent, Segment, TipLeg, TipSide,
};

use crate::geometry::{ray_arc_intersect, reflect, Point, ResonatorGeometry};

/// Minimum travel before a ray may hit the next surface.
const EPS_STEP: f64 = 1e-9;

/// Which surface a ray strikes next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Surface {
    Wall,
    Arc { theta: f64 },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Hit {
    pub point: Point,
    pub distance: f64,
    pub surface: Surface,
}

/// Nearest forward hit on the wall or the arc; `None` means the ray leaves.
pub(crate) fn next_hit(origin: Point, dir: Point, geom: &ResonatorGeometry) -> Option<Hit> {
    let wall = if dir.x < 0.0 {
        let t = -origin.x / dir.x;
        (t > EPS_STEP).then(|| Hit {
            point: Point::new(0.0, origin.y + t * dir.y),
            distance: t,
            surface: Surface::Wall,
        })
    } else {
        None
    };
    let arc = ray_arc_intersect(origin, dir, geom).map(|h| Hit {
        point: h.point,
        distance: h.path_length,
        surface: Surface::Arc { theta: h.theta },
    });
    match (wall, arc) {
        (Some(w), Some(a)) => Some(if a.distance < w.distance { a } else { w }),
        (w, a) => w.or(a),
    }
}

/// Outward unit normal of the struck surface at `hit`.
pub(crate) fn surface_normal(hit: &Hit, geom: &ResonatorGeometry) -> Point {
    match hit.surface {
        Surface::Wall => Point::new(1.0, 0.0),
        Surface::Arc { .. } => (hit.point - geom.arc_center()).normalized(),
    }
}

/// A traced ray path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub vertices: Vec<Point>,
    pub total_length: f64,
    pub bounce_count: usize,
    pub escaped: bool,
}

/// Follows a ray through specular bounces until it can no longer reach the
/// wall or the arc, or until `max_bounces` reflections have happened.
pub fn trace(start: Point, direction: Point, geom: &ResonatorGeometry, max_bounces: usize) -> Trajectory {
    let mut vertices = vec![start];
    let mut origin = start;
    let mut dir = direction.normalized();
    let mut total_length = 0.0;
    let mut bounce_count = 0;
    loop {
        if bounce_count >= max_bounces {
            return Trajectory {
                vertices,
                total_length,
                bounce_count,
                escaped: false,
            };
        }
        let Some(hit) = next_hit(origin, dir, geom) else {
            return Trajectory {
                vertices,
                total_length,
                bounce_count,
                escaped: true,
            };
        };
        total_length += hit.distance;
        vertices.push(hit.point);
        dir = reflect(dir, surface_normal(&hit, geom)).normalized();
        origin = hit.point;
        bounce_count += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_geometry;

    #[test]
    fn axial_ray_retraces_horizontal_orbit() {
        let g = build_geometry(30.5, 115.0, 32.5, 0.2).unwrap();
        let t = trace(Point::new(0.2, 0.0), Point::new(1.0, 0.0), &g, 200);
        assert!(!t.escaped);
        assert_eq!(t.bounce_count, 200);
        for v in &t.vertices[1..] {
            assert_eq!(v.y, 0.0);
            assert!(v.x == 0.0 || (v.x - 32.5).abs() < 1e-12);
        }
        let seg_sum: f64 = t.vertices.windows(2).map(|w| w[0].distance(w[1])).sum();
        assert!((seg_sum - t.total_length).abs() < 1e-9);
    }

    #[test]
    fn off_axis_ray_escapes_unstable() {
        let g = build_geometry(30.5, 115.0, 32.5, 0.2).unwrap();
        let t = trace(Point::new(0.2, 0.0), Point::from_angle(1e-3), &g, 10_000);
        assert!(t.escaped);
        assert!(t.bounce_count < 100, "took {} bounces", t.bounce_count);
    }

    #[test]
    fn stable_geometry_traps_rays() {
        let g = build_geometry(30.5, 106.0, 25.0, 0.2).unwrap();
        for phi in [0.01, 0.2, 0.5, 0.8] {
            let t = trace(Point::new(0.2, 0.0), Point::from_angle(phi), &g, 10_000);
            assert!(!t.escaped, "escaped at launch angle {phi}");
        }
    }
}
