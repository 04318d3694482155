//! Planar geometry: points, simple polygons, segment classification, the
//! labeled workspace and visibility-graph geodesics.
//!
//! Every predicate uses the absolute tolerance [`EPS_GEO`]: a point within
//! `EPS_GEO` of a polygon's boundary is *on* the boundary.

mod polygon;
mod visibility;
mod workspace;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

pub use polygon::{Location, Polygon};
pub use visibility::{GeodesicField, VisibilityGraph};
pub use workspace::{EnvironmentFile, GeometryError, Rect, Region, RegionFile, SeparationNorm, Workspace};

pub const EPS_GEO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
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
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Distance from `p` to the closed segment `ab`.
pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Do the closed segments `ab` and `cd` share a point (within `EPS_GEO`)?
pub fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    if denom.abs() > 1e-15 {
        let t = (c - a).cross(s) / denom;
        let u = (c - a).cross(r) / denom;
        let tol_t = EPS_GEO / r.norm().max(1e-300);
        let tol_u = EPS_GEO / s.norm().max(1e-300);
        if (-tol_t..=1.0 + tol_t).contains(&t) && (-tol_u..=1.0 + tol_u).contains(&u) {
            return true;
        }
    }
    point_segment_dist(a, c, d) <= EPS_GEO
        || point_segment_dist(b, c, d) <= EPS_GEO
        || point_segment_dist(c, a, b) <= EPS_GEO
        || point_segment_dist(d, a, b) <= EPS_GEO
}

/// Parameters `t` in `(0, 1)` at which segment `pq` meets segment `ab`.
///
/// For collinear overlaps both ends of the overlap are reported.
pub(crate) fn segment_hits(p: Point, q: Point, a: Point, b: Point, out: &mut Vec<f64>) {
    let r = q - p;
    let s = b - a;
    let rr = r.dot(r);
    if rr == 0.0 {
        return;
    }
    let denom = r.cross(s);
    let scale = r.norm() * s.norm();
    if denom.abs() > 1e-12 * scale {
        let t = (a - p).cross(s) / denom;
        let u = (a - p).cross(r) / denom;
        let tol = 1e-12;
        if (-tol..=1.0 + tol).contains(&u) && t > 0.0 && t < 1.0 {
            out.push(t);
        }
        return;
    }
    // Parallel: only collinear pairs contribute.
    if point_line_dist(a, p, q) > EPS_GEO {
        return;
    }
    for v in [a, b] {
        let t = (v - p).dot(r) / rr;
        if t > 0.0 && t < 1.0 {
            out.push(t);
        }
    }
}

fn point_line_dist(x: Point, p: Point, q: Point) -> f64 {
    let r = q - p;
    (x - p).cross(r).abs() / r.norm()
}

/// Volume of the unit ball in `dim` dimensions.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        d => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}
