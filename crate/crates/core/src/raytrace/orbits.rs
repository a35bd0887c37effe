//! Closed orbits from the antenna back to the antenna: the horizontal orbit
//! with its repetitions, and single-diffraction orbits through a reflector tip.
//!
//! All orbits start and end at the antenna foot on the wall, `(0, y_a)`, the
//! phase centre of the source/image pair. Launch and arrival angles are kept
//! so the semiclassical engine can apply the pair's angular factor.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;

use log::debug;

use super::monodromy::TransferMatrix;
use super::{next_hit, surface_normal, Surface};
use crate::geometry::{reflect, tip_positions, Point, ResonatorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TipSide {
    Upper,
    Lower,
}

/// What happens at the end of a straight segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathEvent {
    /// Specular Dirichlet reflection on the wall; also used for the final
    /// arrival at the antenna foot.
    Wall,
    /// Specular reflection on the arc.
    Arc { cos_incidence: f64, concave: bool },
    /// Diffraction at a reflector tip.
    Tip(TipSide),
}

impl PathEvent {
    pub fn is_reflection(&self) -> bool {
        matches!(self, PathEvent::Wall | PathEvent::Arc { .. })
    }

    fn matrix(&self, radius: f64) -> TransferMatrix {
        match *self {
            PathEvent::Arc { cos_incidence, concave } => TransferMatrix::mirror(radius, cos_incidence, concave),
            _ => TransferMatrix::IDENTITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
    pub end_event: PathEvent,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    pub fn direction(&self) -> Point {
        (self.end - self.start).normalized()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitKind {
    Geometric,
    Diffractive,
}

/// Tip diffraction with angles measured from the screen face, in `(0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionEvent {
    pub tip: Point,
    pub side: TipSide,
    /// Direction from the tip back towards the incoming ray.
    pub theta_in: f64,
    /// Direction of the outgoing ray.
    pub theta_out: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedOrbit {
    pub kind: OrbitKind,
    pub legs: Vec<Segment>,
    pub length: f64,
    /// Round-trip group index: `n` for the n-th horizontal repetition; for a
    /// diffractive orbit, one plus the number of wall/arc round trips.
    pub repetitions: u32,
    pub maslov_count: u32,
    pub diffraction_events: Vec<DiffractionEvent>,
    pub multiplicity: u32,
    /// Specular bounces on the outgoing and returning tip legs.
    pub tip_bounces: (usize, usize),
    /// Launch direction at the antenna, radians from the wall normal.
    pub launch_angle: f64,
    /// Angle from the wall normal at which the orbit comes back.
    pub arrival_angle: f64,
}

impl ClosedOrbit {
    /// |m12| of each ray tube (one per diffraction-free stretch).
    pub fn tube_m12(&self, radius: f64) -> Vec<f64> {
        tubes(&self.legs)
            .into_iter()
            .map(|t| tube_matrix(t, radius).m12())
            .collect()
    }

    pub fn bounce_count(&self) -> usize {
        self.legs.iter().filter(|s| s.end_event.is_reflection()).count()
    }
}

fn tubes(legs: &[Segment]) -> Vec<&[Segment]> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, s) in legs.iter().enumerate() {
        if matches!(s.end_event, PathEvent::Tip(_)) {
            out.push(&legs[start..=i]);
            start = i + 1;
        }
    }
    if start < legs.len() {
        out.push(&legs[start..]);
    }
    out
}

/// Transfer matrix of a tube up to (not including) its final event.
fn tube_matrix(tube: &[Segment], radius: f64) -> TransferMatrix {
    let mut m = TransferMatrix::IDENTITY;
    for (i, s) in tube.iter().enumerate() {
        m = TransferMatrix::free(s.length()) * m;
        if i + 1 < tube.len() {
            m = s.end_event.matrix(radius) * m;
        }
    }
    m
}

/// Sub-lengths sampled per segment when looking for conjugate points.
const CONJUGATE_SAMPLES: usize = 1000;

/// Number of conjugate points (sign changes of m12) along one tube.
fn conjugate_points(tube: &[Segment], radius: f64) -> u32 {
    let mut m = TransferMatrix::IDENTITY;
    let mut count = 0;
    let mut last_sign = 0.0f64;
    let mut perturbed = 0;
    for (i, s) in tube.iter().enumerate() {
        let len = s.length();
        let mut prev_value = m.m12();
        for j in 1..=CONJUGATE_SAMPLES {
            let ds = len * j as f64 / CONJUGATE_SAMPLES as f64;
            let mut value = m.m12() + ds * m.m22();
            if value == 0.0 && !(i + 1 == tube.len() && j == CONJUGATE_SAMPLES) {
                // Sample landed on a focus: look half a step back instead.
                let half = len * (j as f64 - 0.5) / CONJUGATE_SAMPLES as f64;
                value = 0.5 * (prev_value + m.m12() + half * m.m22());
                perturbed += 1;
            }
            let sign = value.signum();
            if value != 0.0 {
                if last_sign != 0.0 && sign != last_sign {
                    count += 1;
                }
                last_sign = sign;
            }
            prev_value = value;
        }
        m = TransferMatrix::free(len) * m;
        if i + 1 < tube.len() {
            m = s.end_event.matrix(radius) * m;
        }
    }
    if perturbed > 0 {
        debug!("conjugate-point scan: {perturbed} samples resolved by midpoint perturbation");
    }
    count
}

/// Maslov count in units of pi/2: two per Dirichlet reflection (wall or
/// arc, including the arrival back at the wall) plus one per conjugate point
/// of each ray tube.
pub fn maslov_count(legs: &[Segment], radius: f64) -> u32 {
    let reflections = legs.iter().filter(|s| s.end_event.is_reflection()).count() as u32;
    let conj: u32 = tubes(legs).into_iter().map(|t| conjugate_points(t, radius)).sum();
    2 * reflections + conj
}

/// A ray path from the antenna foot to a reflector tip.
#[derive(Debug, Clone, PartialEq)]
pub struct TipLeg {
    pub side: TipSide,
    pub bounces: usize,
    /// Launch direction, radians from the +x axis.
    pub launch_angle: f64,
    /// Antenna foot, bounce points, tip.
    pub vertices: Vec<Point>,
    pub length: f64,
}

impl TipLeg {
    pub fn tip(&self) -> Point {
        *self.vertices.last().expect("leg has vertices")
    }

    /// Direction of travel when arriving at the tip.
    pub fn arrival_direction(&self) -> Point {
        let n = self.vertices.len();
        (self.vertices[n - 1] - self.vertices[n - 2]).normalized()
    }

    fn mirrored(&self) -> TipLeg {
        TipLeg {
            side: match self.side {
                TipSide::Upper => TipSide::Lower,
                TipSide::Lower => TipSide::Upper,
            },
            bounces: self.bounces,
            launch_angle: -self.launch_angle,
            vertices: self.vertices.iter().map(|p| p.mirror_y()).collect(),
            length: self.length,
        }
    }

    /// Segments from the antenna foot to the tip.
    pub fn forward_segments(&self, geom: &ResonatorGeometry) -> Vec<Segment> {
        polyline_segments(&self.vertices, geom, PathEvent::Tip(self.side))
    }

    /// Segments from the tip back to the antenna foot.
    pub fn reverse_segments(&self, geom: &ResonatorGeometry) -> Vec<Segment> {
        let rev: Vec<Point> = self.vertices.iter().rev().copied().collect();
        polyline_segments(&rev, geom, PathEvent::Wall)
    }
}

/// Classifies interior vertices of a specular polyline.
fn polyline_segments(vertices: &[Point], geom: &ResonatorGeometry, last: PathEvent) -> Vec<Segment> {
    let c = geom.arc_center();
    let n = vertices.len();
    (0..n - 1)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[i + 1]);
            let end_event = if i + 2 == n {
                last
            } else if b.x.abs() < 1e-12 {
                PathEvent::Wall
            } else {
                let u = (b - a).normalized();
                let normal = (b - c).normalized();
                PathEvent::Arc {
                    cos_incidence: u.dot(normal).abs(),
                    concave: u.dot(b - c) > 0.0,
                }
            };
            Segment { start: a, end: b, end_event }
        })
        .collect()
}

/// Result of tracing exactly `n` bounces from the antenna foot.
struct Shot {
    vertices: Vec<Point>,
    dir: Point,
    signature: u64,
}

fn shoot(geom: &ResonatorGeometry, origin: Point, angle: f64, bounces: usize) -> Option<Shot> {
    let mut vertices = Vec::with_capacity(bounces + 2);
    vertices.push(origin);
    let mut p = origin;
    let mut dir = Point::from_angle(angle);
    let mut signature = 1u64;
    for _ in 0..bounces {
        let hit = next_hit(p, dir, geom)?;
        signature = signature.wrapping_mul(3).wrapping_add(match hit.surface {
            Surface::Wall => 1,
            Surface::Arc { .. } => 2,
        });
        dir = reflect(dir, surface_normal(&hit, geom)).normalized();
        p = hit.point;
        vertices.push(p);
    }
    Some(Shot { vertices, dir, signature })
}

/// Signed miss of the final segment relative to `target` (sine of the
/// angle between the ray and the direction to the target).
fn miss(shot: &Shot, target: Point) -> Option<f64> {
    let p = *shot.vertices.last()?;
    let to = target - p;
    let dist = to.norm();
    if dist < 1e-12 || to.dot(shot.dir) <= 0.0 {
        return None;
    }
    Some(shot.dir.cross(to) / dist)
}

/// Launch-angle samples in the bracketing scan.
const SCAN_SAMPLES: usize = 6000;
const ROOT_TOL: f64 = 1e-10;

/// All ray paths from the antenna foot that reach the given tip after
/// exactly `bounces` specular reflections, sorted by length.
pub fn tip_legs(geom: &ResonatorGeometry, bounces: usize, side: TipSide) -> Vec<TipLeg> {
    let (upper, lower) = tip_positions(geom);
    let tip = match side {
        TipSide::Upper => upper,
        TipSide::Lower => lower,
    };
    let origin = geom.antenna_foot();
    if bounces == 0 {
        let leg = TipLeg {
            side,
            bounces: 0,
            launch_angle: (tip - origin).angle(),
            vertices: vec![origin, tip],
            length: origin.distance(tip),
        };
        return vec![leg];
    }
    if geom.is_on_axis() && side == TipSide::Lower {
        return tip_legs(geom, bounces, TipSide::Upper).iter().map(TipLeg::mirrored).collect();
    }

    let lo = -FRAC_PI_2 + 1e-6;
    let hi = FRAC_PI_2 - 1e-6;
    let step = (hi - lo) / SCAN_SAMPLES as f64;
    let eval = |a: f64| shoot(geom, origin, a, bounces).and_then(|s| miss(&s, tip).map(|m| (m, s.signature)));

    let mut legs = Vec::new();
    let mut failures = 0usize;
    let mut prev: Option<(f64, f64, u64)> = None;
    for i in 0..=SCAN_SAMPLES {
        let a = lo + step * i as f64;
        let cur = eval(a).map(|(m, sig)| (a, m, sig));
        if let (Some((a0, m0, s0)), Some((a1, m1, s1))) = (prev, cur) {
            if s0 == s1 && m0.signum() != m1.signum() {
                match bisect(&eval, a0, m0, a1, s0) {
                    Some(root) => {
                        if let Some(leg) = finish_leg(geom, origin, root, bounces, tip, side) {
                            legs.push(leg);
                        }
                    }
                    None => failures += 1,
                }
            }
        }
        prev = cur;
    }
    if failures > 0 {
        debug!("shoot_to_tip: {failures} brackets failed to converge ({bounces} bounces)");
    }
    legs.sort_by(|a, b| a.length.total_cmp(&b.length));
    legs
}

fn bisect(
    eval: &impl Fn(f64) -> Option<(f64, u64)>,
    mut a0: f64,
    mut m0: f64,
    mut a1: f64,
    signature: u64,
) -> Option<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (a0 + a1);
        let (m, sig) = eval(mid)?;
        if sig != signature {
            return None;
        }
        if m == 0.0 || (a1 - a0).abs() < 1e-16 {
            return Some(mid);
        }
        if m.signum() == m0.signum() {
            a0 = mid;
            m0 = m;
        } else {
            a1 = mid;
        }
    }
    Some(0.5 * (a0 + a1))
}

fn finish_leg(
    geom: &ResonatorGeometry,
    origin: Point,
    angle: f64,
    bounces: usize,
    tip: Point,
    side: TipSide,
) -> Option<TipLeg> {
    let shot = shoot(geom, origin, angle, bounces)?;
    if miss(&shot, tip)?.abs() > ROOT_TOL {
        return None;
    }
    let last = *shot.vertices.last()?;
    let to_tip = last.distance(tip);
    // The final stretch must not strike the arc or the wall before the tip.
    if let Some(hit) = next_hit(last, shot.dir, geom) {
        if hit.distance < to_tip * (1.0 - 1e-7) {
            return None;
        }
    }
    let mut vertices = shot.vertices;
    vertices.push(tip);
    let length = vertices.windows(2).map(|w| w[0].distance(w[1])).sum();
    Some(TipLeg {
        side,
        bounces,
        launch_angle: angle,
        vertices,
        length,
    })
}

/// Shortest path from the antenna foot to the upper tip with exactly
/// `n_specular` bounces, if the bracketing scan finds one.
pub fn shoot_to_tip(geom: &ResonatorGeometry, n_specular: usize) -> Option<TipLeg> {
    tip_legs(geom, n_specular, TipSide::Upper).into_iter().next()
}

/// Angle of `dir` measured from the screen face at a tip, in `[0, 2 pi)`.
fn screen_angle(geom: &ResonatorGeometry, side: TipSide, dir: Point) -> f64 {
    let beta = geom.half_angle();
    // Tangent pointing from the tip into the reflector.
    let face = match side {
        TipSide::Upper => Point::new(beta.sin(), -beta.cos()),
        TipSide::Lower => Point::new(beta.sin(), beta.cos()),
    };
    let a = face.cross(dir).atan2(face.dot(dir));
    let a = match side {
        TipSide::Upper => a,
        TipSide::Lower => -a,
    };
    a.rem_euclid(TAU)
}

fn horizontal_orbit(geom: &ResonatorGeometry, n: u32) -> ClosedOrbit {
    let foot = geom.antenna_foot();
    let vertex = Point::new(geom.separation(), foot.y);
    let mut legs = Vec::with_capacity(2 * n as usize);
    for _ in 0..n {
        legs.push(Segment {
            start: foot,
            end: vertex,
            end_event: PathEvent::Arc {
                cos_incidence: 1.0,
                concave: true,
            },
        });
        legs.push(Segment {
            start: vertex,
            end: foot,
            end_event: PathEvent::Wall,
        });
    }
    let maslov = maslov_count(&legs, geom.radius());
    ClosedOrbit {
        kind: OrbitKind::Geometric,
        length: 2.0 * n as f64 * geom.separation(),
        legs,
        repetitions: n,
        maslov_count: maslov,
        diffraction_events: Vec::new(),
        multiplicity: 1,
        tip_bounces: (0, 0),
        launch_angle: 0.0,
        arrival_angle: 0.0,
    }
}

fn diffractive_orbit(geom: &ResonatorGeometry, out: &TipLeg, back: &TipLeg) -> ClosedOrbit {
    debug_assert_eq!(out.side, back.side);
    let mut legs = out.forward_segments(geom);
    legs.extend(back.reverse_segments(geom));
    let incoming = out.arrival_direction();
    let outgoing = -back.arrival_direction();
    let event = DiffractionEvent {
        tip: out.tip(),
        side: out.side,
        theta_in: screen_angle(geom, out.side, -incoming),
        theta_out: screen_angle(geom, out.side, outgoing),
    };
    let maslov = maslov_count(&legs, geom.radius());
    let same = out == back;
    let round_trips = (out.bounces + back.bounces) / 2;
    ClosedOrbit {
        kind: OrbitKind::Diffractive,
        length: out.length + back.length,
        legs,
        repetitions: 1 + round_trips as u32,
        maslov_count: maslov,
        diffraction_events: vec![event],
        // Mirror tip, plus time reversal when the two legs differ.
        multiplicity: if same { 2 } else { 4 },
        tip_bounces: (out.bounces, back.bounces),
        launch_angle: out.launch_angle,
        arrival_angle: back.launch_angle,
    }
}

/// Hard cap on specular bounces per tip leg.
const MAX_TIP_BOUNCES: usize = 24;

/// Closed orbits up to length `l_max`, sorted by length.
///
/// Geometric: the horizontal orbit and its repetitions, `L = 2 n D`.
/// Diffractive: every pair of tip legs (out, back) whose summed length fits;
/// the mirror-image tip and the time-reversed pair are folded into the
/// multiplicity, so a group with `n - 1` wall/arc round trips holds `n`
/// ordered leg pairs per tip.
pub fn build_orbit_catalog(geom: &ResonatorGeometry, l_max: f64) -> Vec<ClosedOrbit> {
    build_orbit_catalog_split(geom, l_max, l_max)
}

/// As [`build_orbit_catalog`], with separate length cutoffs for the
/// geometric and diffractive families.
pub fn build_orbit_catalog_split(geom: &ResonatorGeometry, l_max: f64, geometric_l_max: f64) -> Vec<ClosedOrbit> {
    let mut orbits = Vec::new();
    let d = geom.separation();
    let mut n = 1u32;
    while 2.0 * n as f64 * d <= geometric_l_max * (1.0 + 1e-12) {
        orbits.push(horizontal_orbit(geom, n));
        n += 1;
    }

    let (tip, _) = tip_positions(geom);
    let direct = tip_legs(geom, 0, TipSide::Upper);
    let shortest = direct[0].length;
    // Every segment spans at least the wall-to-tip gap.
    let max_bounces = ((l_max - shortest) / tip.x).floor().max(0.0) as usize;
    let mut legs: Vec<TipLeg> = direct;
    for b in 1..=max_bounces.min(MAX_TIP_BOUNCES) {
        legs.extend(
            tip_legs(geom, b, TipSide::Upper)
                .into_iter()
                .filter(|l| l.length + shortest <= l_max),
        );
    }
    legs.sort_by(|a, b| a.length.total_cmp(&b.length).then(a.bounces.cmp(&b.bounces)));
    for i in 0..legs.len() {
        for j in i..legs.len() {
            if legs[i].length + legs[j].length <= l_max {
                orbits.push(diffractive_orbit(geom, &legs[i], &legs[j]));
            }
        }
    }
    orbits.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then((a.kind as u8).cmp(&(b.kind as u8)))
            .then(a.tip_bounces.cmp(&b.tip_bounces))
    });
    orbits
}

/// One record per orbit, comma separated.
pub fn catalog_to_csv(orbits: &[ClosedOrbit], radius: f64) -> String {
    let mut s = String::from(
        "kind,l_cm,l_over_r,repetitions,multiplicity,maslov_count,bounces_out,bounces_back,theta_in_deg,theta_out_deg\n",
    );
    for o in orbits {
        let (tin, tout) = o
            .diffraction_events
            .first()
            .map(|e| (format!("{:.6}", e.theta_in.to_degrees()), format!("{:.6}", e.theta_out.to_degrees())))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{:.9},{:.9},{},{},{},{},{},{},{}",
            match o.kind {
                OrbitKind::Geometric => "geometric",
                OrbitKind::Diffractive => "diffractive",
            },
            o.length,
            o.length / radius,
            o.repetitions,
            o.multiplicity,
            o.maslov_count,
            o.tip_bounces.0,
            o.tip_bounces.1,
            tin,
            tout
        );
    }
    s
}
