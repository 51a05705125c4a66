//! Planar primitives: points, disks, power distance, bisectors, convex
//! clipping and the circular-arc polygon booleans used by the coverage maps.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

/// Relative tolerance; multiply by the scene diameter to get `eps_geom`.
pub const EPS_REL: f64 = 1e-9;

const TAU: f64 = 2.0 * PI;

pub fn eps_geom(scene_diameter: f64) -> f64 {
    EPS_REL * scene_diameter.abs().max(1e-300)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("disks share a center; their power bisector is undefined")]
    ConcentricDisks,
    #[error("arc chain is open or wrongly oriented at piece {0}")]
    InvalidChain(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn dist2(self, o: Point2) -> f64 {
        (self - o).norm2()
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn lex_lt(self, o: Point2) -> bool {
        self.x < o.x || (self.x == o.x && self.y < o.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub const fn new(center: Point2, radius: f64) -> Self {
        Disk { center, radius }
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    fn point_at_angle(&self, theta: f64) -> Point2 {
        self.center + Point2::new(theta.cos(), theta.sin()) * self.radius
    }

    fn angle_of(&self, p: Point2) -> f64 {
        normalize_angle((p.y - self.center.y).atan2(p.x - self.center.x))
    }
}

/// δ(x, d): distance to the center minus the radius.
pub fn signed_distance(x: Point2, d: &Disk) -> f64 {
    x.dist(d.center) - d.radius
}

/// ρ(x, d): squared center distance minus squared radius.
pub fn power_distance(x: Point2, d: &Disk) -> f64 {
    x.dist2(d.center) - d.radius * d.radius
}

/// The closed set `{p : normal·p <= offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: Point2,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Point2, offset: f64) -> Self {
        debug_assert!(normal.x != 0.0 || normal.y != 0.0);
        HalfPlane { normal, offset }
    }

    /// Positive outside, negative inside.
    pub fn eval(&self, p: Point2) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.eval(p) <= 0.0
    }

    pub fn flipped(&self) -> HalfPlane {
        HalfPlane::new(self.normal * -1.0, -self.offset)
    }
}

/// Half-plane of points whose power distance to `d1` is at most that to `d2`.
pub fn power_bisector(d1: &Disk, d2: &Disk) -> Result<HalfPlane, GeometryError> {
    power_bisector_weighted(d1.center, d1.radius * d1.radius, d2.center, d2.radius * d2.radius)
}

/// Same as [`power_bisector`] but with explicit weights `w = r²`.
pub fn power_bisector_weighted(
    c1: Point2,
    w1: f64,
    c2: Point2,
    w2: f64,
) -> Result<HalfPlane, GeometryError> {
    if c1 == c2 {
        return Err(GeometryError::ConcentricDisks);
    }
    // |x-c1|² - w1 <= |x-c2|² - w2  <=>  2(c2-c1)·x <= |c2|² - w2 - |c1|² + w1
    let normal = (c2 - c1) * 2.0;
    let offset = c2.norm2() - w2 - c1.norm2() + w1;
    Ok(HalfPlane::new(normal, offset))
}

/// Axis-parallel rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Window {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Window { x0, y0, x1, y1 }
    }

    pub fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1].iter().all(|v| v.is_finite())
            && self.x1 > self.x0
            && self.y1 > self.y0
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn polygon(&self) -> ConvexPolygon {
        ConvexPolygon::rect(self.x0, self.y0, self.x1, self.y1)
    }

    /// Smallest window containing both.
    pub fn union(&self, o: &Window) -> Window {
        Window::new(
            self.x0.min(o.x0),
            self.y0.min(o.y0),
            self.x1.max(o.x1),
            self.y1.max(o.y1),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point2>) -> Self {
        ConvexPolygon { vertices }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        ConvexPolygon::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn contains(&self, p: Point2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(p - a) >= 0.0
        })
    }

    pub fn diameter(&self) -> f64 {
        bbox_diameter(self.vertices.iter().copied())
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len() as f64;
        let s = self
            .vertices
            .iter()
            .fold(Point2::new(0.0, 0.0), |acc, &v| acc + v);
        s * (1.0 / n)
    }

    /// Directed edges as (start, end) pairs.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

fn shoelace(v: &[Point2]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        s += v[i].cross(v[(i + 1) % n]);
    }
    0.5 * s
}

fn bbox_diameter(pts: impl Iterator<Item = Point2>) -> f64 {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if lo.x > hi.x {
        0.0
    } else {
        lo.dist(hi)
    }
}

/// Clip a convex vertex ring where `labels[i]` tags the edge `v[i] -> v[i+1]`.
/// Edges created along the clip line get `new_label`.
pub(crate) fn clip_labeled<L: Copy>(
    verts: &[Point2],
    labels: &[L],
    h: &HalfPlane,
    new_label: L,
    eps: f64,
) -> (Vec<Point2>, Vec<L>) {
    let n = verts.len();
    let vals: Vec<f64> = verts.iter().map(|&p| h.eval(p)).collect();
    if vals.iter().all(|&e| e <= 0.0) {
        return (verts.to_vec(), labels.to_vec());
    }
    let mut out_v = Vec::with_capacity(n + 1);
    let mut out_l = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (p, q) = (verts[i], verts[j]);
        let (ep, eq) = (vals[i], vals[j]);
        let p_in = ep <= 0.0;
        let q_in = eq <= 0.0;
        if p_in {
            out_v.push(p);
            if q_in {
                out_l.push(labels[i]);
            } else {
                out_l.push(labels[i]);
                out_v.push(p.lerp(q, ep / (ep - eq)));
                out_l.push(new_label);
            }
        } else if q_in {
            out_v.push(p.lerp(q, ep / (ep - eq)));
            out_l.push(labels[i]);
        }
    }
    dedupe_ring(&mut out_v, &mut out_l, eps);
    (out_v, out_l)
}

fn dedupe_ring<L: Copy>(v: &mut Vec<Point2>, l: &mut Vec<L>, eps: f64) {
    let mut i = 0;
    while v.len() > 1 && i < v.len() {
        let j = (i + 1) % v.len();
        if v[i].dist(v[j]) <= eps {
            v.remove(i);
            l.remove(i);
        } else {
            i += 1;
        }
    }
}

fn nondegenerate(v: &[Point2], scale: f64) -> bool {
    v.len() >= 3 && shoelace(v) > 1e-18 * scale * scale
}

/// `poly ∩ h`, or `None` when the intersection has zero area.
pub fn clip_convex(poly: &ConvexPolygon, h: &HalfPlane) -> Option<ConvexPolygon> {
    let scale = poly.diameter();
    let labels = vec![(); poly.vertices.len()];
    let (v, _) = clip_labeled(&poly.vertices, &labels, h, (), eps_geom(scale));
    if nondegenerate(&v, scale) {
        Some(ConvexPolygon::new(v))
    } else {
        None
    }
}

/// Intersection of two convex polygons by clipping `a` with every edge of `b`.
pub fn convex_polygon_intersection(a: &ConvexPolygon, b: &ConvexPolygon) -> Option<ConvexPolygon> {
    let scale = a.diameter().max(b.diameter());
    let eps = eps_geom(scale);
    let mut v = a.vertices.clone();
    let mut labels = vec![(); v.len()];
    for (p, q) in b.edges() {
        let d = q - p;
        if d.norm() <= eps {
            continue;
        }
        // inside = left of p->q
        let normal = Point2::new(d.y, -d.x);
        let h = HalfPlane::new(normal, normal.dot(p));
        let (nv, nl) = clip_labeled(&v, &labels, &h, (), eps);
        v = nv;
        labels = nl;
        if v.len() < 3 {
            return None;
        }
    }
    if nondegenerate(&v, scale) {
        Some(ConvexPolygon::new(v))
    } else {
        None
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Counterclockwise; the region lies inside the supporting disk.
    Outward,
    /// Clockwise; the region lies outside the supporting disk.
    Inward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularArc {
    pub supporting_disk: Disk,
    pub start_angle: f64,
    pub end_angle: f64,
    pub orientation: Orientation,
}

impl CircularArc {
    pub fn full_circle(disk: Disk) -> Self {
        CircularArc {
            supporting_disk: disk,
            start_angle: 0.0,
            end_angle: 0.0,
            orientation: Orientation::Outward,
        }
    }

    /// Signed angular extent; equal start and end angles mean a full turn.
    pub fn sweep(&self) -> f64 {
        match self.orientation {
            Orientation::Outward => {
                let s = (self.end_angle - self.start_angle).rem_euclid(TAU);
                if s == 0.0 {
                    TAU
                } else {
                    s
                }
            }
            Orientation::Inward => {
                let s = (self.start_angle - self.end_angle).rem_euclid(TAU);
                if s == 0.0 {
                    -TAU
                } else {
                    -s
                }
            }
        }
    }

    pub fn is_full_circle(&self) -> bool {
        self.sweep().abs() >= TAU
    }

    fn angle_at(&self, t: f64) -> f64 {
        self.start_angle + self.sweep() * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    Arc(CircularArc),
    Segment(Point2, Point2),
}

impl Piece {
    pub fn start(&self) -> Point2 {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point2 {
        self.point_at(1.0)
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        match self {
            Piece::Segment(a, b) => a.lerp(*b, t),
            Piece::Arc(a) => a.supporting_disk.point_at_angle(a.angle_at(t)),
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Piece::Segment(a, b) => a.dist(*b),
            Piece::Arc(a) => a.sweep().abs() * a.supporting_disk.radius,
        }
    }

    /// Sub-piece for the parameter interval `[t0, t1]`.
    fn sub(&self, t0: f64, t1: f64) -> Piece {
        match self {
            Piece::Segment(a, b) => Piece::Segment(a.lerp(*b, t0), a.lerp(*b, t1)),
            Piece::Arc(a) => Piece::Arc(CircularArc {
                supporting_disk: a.supporting_disk,
                start_angle: normalize_angle(a.angle_at(t0)),
                end_angle: normalize_angle(a.angle_at(t1)),
                orientation: a.orientation,
            }),
        }
    }

    /// ½∮(x dy − y dx) along the piece.
    fn green(&self) -> f64 {
        match self {
            Piece::Segment(a, b) => 0.5 * a.cross(*b),
            Piece::Arc(a) => {
                let c = a.supporting_disk.center;
                let r = a.supporting_disk.radius;
                let t0 = a.start_angle;
                let t1 = t0 + a.sweep();
                0.5 * (r * r * (t1 - t0) + r * c.x * (t1.sin() - t0.sin())
                    - r * c.y * (t1.cos() - t0.cos()))
            }
        }
    }

    /// Parameters in `[0, 1]` where the piece meets the circle of `d`.
    /// Tangent contacts are not reported.
    fn circle_hits(&self, d: &Disk, eps: f64) -> Vec<f64> {
        match self {
            Piece::Segment(p, q) => segment_circle(*p, *q, d, eps),
            Piece::Arc(a) => {
                let s = &a.supporting_disk;
                let mut out = Vec::new();
                for pt in circle_circle(s, d, eps) {
                    let ang = s.angle_of(pt);
                    let sw = a.sweep();
                    let off = if sw > 0.0 {
                        (ang - a.start_angle).rem_euclid(TAU)
                    } else {
                        (a.start_angle - ang).rem_euclid(TAU)
                    };
                    let t = off / sw.abs();
                    if t <= 1.0 {
                        out.push(t);
                    } else if a.is_full_circle() || (off - TAU).abs() * s.radius <= eps {
                        out.push(0.0);
                    }
                }
                out.sort_by(f64::total_cmp);
                out
            }
        }
    }
}

fn segment_circle(p: Point2, q: Point2, d: &Disk, eps: f64) -> Vec<f64> {
    let dir = q - p;
    let a = dir.norm2();
    if a == 0.0 {
        return Vec::new();
    }
    let w = p - d.center;
    let b = 2.0 * dir.dot(w);
    let c = w.norm2() - d.radius * d.radius;
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let qq = -0.5 * (b + b.signum() * sq);
    let (mut t1, mut t2) = if qq != 0.0 { (qq / a, c / qq) } else { (0.0, 0.0) };
    if t1 > t2 {
        std::mem::swap(&mut t1, &mut t2);
    }
    // near-tangent contacts count as no contact
    if (t2 - t1) * a.sqrt() <= eps {
        return Vec::new();
    }
    [t1, t2]
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .collect()
}

fn circle_circle(c1: &Disk, c2: &Disk, eps: f64) -> Vec<Point2> {
    let d = c1.center.dist(c2.center);
    if d == 0.0 || d >= c1.radius + c2.radius || d <= (c1.radius - c2.radius).abs() {
        return Vec::new();
    }
    let a = (d * d + c1.radius * c1.radius - c2.radius * c2.radius) / (2.0 * d);
    let h2 = c1.radius * c1.radius - a * a;
    if h2 <= 0.0 {
        return Vec::new();
    }
    let h = h2.sqrt();
    if h <= eps {
        return Vec::new();
    }
    let u = (c2.center - c1.center) * (1.0 / d);
    let base = c1.center + u * a;
    vec![base + u.perp() * h, base - u.perp() * h]
}

/// Closed chain of arcs and segments bounding one region, counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcPolygon {
    pub pieces: Vec<Piece>,
}

impl ArcPolygon {
    pub fn new(pieces: Vec<Piece>) -> Self {
        ArcPolygon { pieces }
    }

    pub fn circle(d: Disk) -> Self {
        ArcPolygon::new(vec![Piece::Arc(CircularArc::full_circle(d))])
    }

    pub fn from_convex(poly: &ConvexPolygon) -> Self {
        ArcPolygon::new(poly.edges().map(|(a, b)| Piece::Segment(a, b)).collect())
    }

    pub fn arcs(&self) -> impl Iterator<Item = &CircularArc> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Arc(a) => Some(a),
            Piece::Segment(..) => None,
        })
    }

    fn scale(&self) -> f64 {
        let mut pts: Vec<Point2> = Vec::new();
        for p in &self.pieces {
            match p {
                Piece::Segment(a, b) => {
                    pts.push(*a);
                    pts.push(*b);
                }
                Piece::Arc(a) => {
                    let d = a.supporting_disk;
                    pts.push(d.center + Point2::new(d.radius, d.radius));
                    pts.push(d.center - Point2::new(d.radius, d.radius));
                }
            }
        }
        bbox_diameter(pts.into_iter())
    }

    /// Rotate so the chain starts at its lexicographically smallest endpoint.
    fn canonicalize(mut self) -> Self {
        if let Some((k, _)) = self
            .pieces
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let (pa, pb) = (a.1.start(), b.1.start());
                if pa.lex_lt(pb) {
                    std::cmp::Ordering::Less
                } else if pb.lex_lt(pa) {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            })
        {
            self.pieces.rotate_left(k);
        }
        self
    }

    /// Even-odd membership by casting a ray toward +x. Points on the
    /// boundary may land on either side.
    pub fn contains(&self, q: Point2) -> bool {
        let mut inside = false;
        for pc in &self.pieces {
            match pc {
                Piece::Segment(a, b) => {
                    if (a.y > q.y) != (b.y > q.y) {
                        let x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
                        if x > q.x {
                            inside = !inside;
                        }
                    }
                }
                Piece::Arc(a) => {
                    let d = a.supporting_disk;
                    let dy = q.y - d.center.y;
                    let h2 = d.radius * d.radius - dy * dy;
                    if h2 <= 0.0 {
                        continue;
                    }
                    let h = h2.sqrt();
                    for x in [d.center.x - h, d.center.x + h] {
                        if x <= q.x {
                            continue;
                        }
                        let ang = d.angle_of(Point2::new(x, q.y));
                        let sw = a.sweep();
                        let off = if sw > 0.0 {
                            (ang - a.start_angle).rem_euclid(TAU)
                        } else {
                            (a.start_angle - ang).rem_euclid(TAU)
                        };
                        if off < sw.abs() {
                            inside = !inside;
                        }
                    }
                }
            }
        }
        inside
    }

    /// Membership for the convex chains produced by intersecting a convex
    /// polygon with a disk (segments bound half-planes, arcs bound disks).
    fn convex_contains(&self, p: Point2) -> bool {
        self.pieces.iter().all(|pc| match pc {
            Piece::Segment(a, b) => (*b - *a).cross(p - *a) >= 0.0,
            Piece::Arc(a) => match a.orientation {
                Orientation::Outward => power_distance(p, &a.supporting_disk) <= 0.0,
                Orientation::Inward => power_distance(p, &a.supporting_disk) >= 0.0,
            },
        })
    }
}

/// Enclosed area by Green's theorem; fails on open or clockwise chains.
pub fn arc_polygon_area(p: &ArcPolygon) -> Result<f64, GeometryError> {
    let n = p.pieces.len();
    if n == 0 {
        return Err(GeometryError::InvalidChain(0));
    }
    let scale = p.scale();
    let tol = 1e-7 * scale.max(1e-300);
    for i in 0..n {
        let e = p.pieces[i].end();
        let s = p.pieces[(i + 1) % n].start();
        if e.dist(s) > tol {
            return Err(GeometryError::InvalidChain(i));
        }
    }
    let a: f64 = p.pieces.iter().map(|pc| pc.green()).sum();
    if a < -1e-9 * scale * scale {
        return Err(GeometryError::InvalidChain(0));
    }
    Ok(a.max(0.0))
}

#[derive(Clone, Copy)]
struct Hit {
    piece: usize,
    t: f64,
    point: Point2,
}

/// Cut a convex chain by the circle of `d` and keep the part inside
/// (`keep_inside`) or outside the disk. The caller guarantees the chain
/// bounds a convex region.
fn cut_by_disk(chain: &ArcPolygon, d: &Disk, keep_inside: bool, eps: f64) -> Vec<ArcPolygon> {
    let mut hits: Vec<Hit> = Vec::new();
    for (i, pc) in chain.pieces.iter().enumerate() {
        for t in pc.circle_hits(d, eps) {
            hits.push(Hit {
                piece: i,
                t,
                point: pc.point_at(t),
            });
        }
    }
    hits.sort_by(|a, b| a.piece.cmp(&b.piece).then(a.t.total_cmp(&b.t)));
    let mut uniq: Vec<Hit> = Vec::with_capacity(hits.len());
    for h in hits {
        if uniq.last().is_some_and(|l| l.point.dist(h.point) <= eps) {
            continue;
        }
        uniq.push(h);
    }
    while uniq.len() > 1 && uniq[0].point.dist(uniq[uniq.len() - 1].point) <= eps {
        uniq.pop();
    }

    let inside = |p: Point2| signed_distance(p, d) < 0.0;

    if uniq.is_empty() {
        let probe = chain.pieces[0].point_at(0.5);
        let chain_in = inside(probe);
        let rim = d.center + Point2::new(d.radius, 0.0);
        let disk_in_chain = !chain_in && chain.convex_contains(rim) && chain.convex_contains(d.center);
        return match (keep_inside, chain_in, disk_in_chain) {
            (true, true, _) => vec![chain.clone()],
            (true, false, true) => vec![ArcPolygon::circle(*d)],
            (true, false, false) => Vec::new(),
            (false, true, _) => Vec::new(),
            // a hole; callers split the region first so this is unreachable
            (false, false, true) => vec![chain.clone()],
            (false, false, false) => vec![chain.clone()],
        };
    }

    // runs of the chain between consecutive hits
    let k = uniq.len();
    let n = chain.pieces.len();
    let mut runs: Vec<(Vec<Piece>, bool)> = Vec::with_capacity(k);
    for r in 0..k {
        let a = uniq[r];
        let b = uniq[(r + 1) % k];
        let mut subs = Vec::new();
        if k > 1 && a.piece == b.piece && b.t > a.t {
            subs.push(chain.pieces[a.piece].sub(a.t, b.t));
        } else {
            subs.push(chain.pieces[a.piece].sub(a.t, 1.0));
            let mut i = (a.piece + 1) % n;
            while i != b.piece {
                subs.push(chain.pieces[i]);
                i = (i + 1) % n;
            }
            subs.push(chain.pieces[b.piece].sub(0.0, b.t));
        }
        let pieces: Vec<Piece> = subs.into_iter().filter(|s| s.length() > eps).collect();
        let keep = match pieces
            .iter()
            .max_by(|x, y| x.length().total_cmp(&y.length()))
        {
            Some(longest) => inside(longest.point_at(0.5)) == keep_inside,
            None => false,
        };
        runs.push((pieces, keep));
    }

    let orientation = if keep_inside {
        Orientation::Outward
    } else {
        Orientation::Inward
    };
    let hit_angle: Vec<f64> = uniq.iter().map(|h| d.angle_of(h.point)).collect();
    let mut used = vec![false; k];
    let mut out = Vec::new();
    for start in 0..k {
        if used[start] || !runs[start].1 {
            continue;
        }
        let mut pieces: Vec<Piece> = Vec::new();
        let mut r = start;
        let mut guard = 0;
        loop {
            used[r] = true;
            pieces.extend(runs[r].0.iter().copied());
            let end_idx = (r + 1) % k;
            let from = hit_angle[end_idx];
            // nearest kept run start along the circle in travel direction
            let mut best: Option<(usize, f64)> = None;
            for (s, run) in runs.iter().enumerate() {
                if !run.1 {
                    continue;
                }
                let to = hit_angle[s];
                let gap = if keep_inside {
                    (to - from).rem_euclid(TAU)
                } else {
                    (from - to).rem_euclid(TAU)
                };
                if best.is_none_or(|(_, g)| gap < g) {
                    best = Some((s, gap));
                }
            }
            let (next, gap) = best.expect("at least one kept run");
            if gap * d.radius > eps {
                pieces.push(Piece::Arc(CircularArc {
                    supporting_disk: *d,
                    start_angle: from,
                    end_angle: hit_angle[next],
                    orientation,
                }));
            }
            r = next;
            guard += 1;
            if used[r] || guard > k {
                break;
            }
        }
        if !pieces.is_empty() {
            out.push(ArcPolygon::new(pieces));
        }
    }
    out
}

/// `(region ∩ include) \ exclude` as disjoint arc polygons.
pub fn region_disk_boolean(region: &ConvexPolygon, include: &Disk, exclude: &Disk) -> Vec<ArcPolygon> {
    let scale = region
        .diameter()
        .max(2.0 * include.radius)
        .max(region.vertices[0].dist(include.center));
    let eps = eps_geom(scale);
    let base = ArcPolygon::from_convex(region);
    let mut out = Vec::new();
    for a in cut_by_disk(&base, include, true, eps) {
        if exclude.radius <= 0.0 {
            out.push(a);
            continue;
        }
        if encloses_disk(&a, exclude, eps) {
            // split through the excluded center so no piece has a hole
            let cy = exclude.center.y;
            for h in [
                HalfPlane::new(Point2::new(0.0, 1.0), cy),
                HalfPlane::new(Point2::new(0.0, -1.0), -cy),
            ] {
                if let Some(half) = clip_convex(region, &h) {
                    out.extend(region_disk_boolean(&half, include, exclude));
                }
            }
            return out.into_iter().map(ArcPolygon::canonicalize).collect();
        }
        out.extend(cut_by_disk(&a, exclude, false, eps));
    }
    out.into_iter().map(ArcPolygon::canonicalize).collect()
}

/// True when the circle of `d` lies strictly inside the convex chain.
fn encloses_disk(chain: &ArcPolygon, d: &Disk, eps: f64) -> bool {
    if !chain.convex_contains(d.center) {
        return false;
    }
    if chain.pieces.iter().any(|p| !p.circle_hits(d, eps).is_empty()) {
        return false;
    }
    let probe = chain.pieces[0].point_at(0.5);
    signed_distance(probe, d) >= 0.0 && chain.convex_contains(d.center + Point2::new(d.radius, 0.0))
}

/// Standard circle-circle lens area.
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.max(0.0).sqrt()
}
