use super::{point_segment_dist, segment_hits, segments_touch, Point, EPS_GEO};

/// Where a point lies relative to a closed polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

impl Location {
    /// Member of the closed polygon.
    pub fn closed(self) -> bool {
        self != Location::Outside
    }
}

/// A simple polygon given by its vertex ring (either orientation, not repeated).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    lo: Point,
    hi: Point,
}

impl Polygon {
    /// Returns `None` for fewer than three vertices, zero area or self-intersection.
    pub fn new(vertices: Vec<Point>) -> Option<Self> {
        if vertices.len() < 3 || vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return None;
        }
        let lo = vertices.iter().fold(Point::new(f64::INFINITY, f64::INFINITY), |m, p| {
            Point::new(m.x.min(p.x), m.y.min(p.y))
        });
        let hi = vertices.iter().fold(Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| {
            Point::new(m.x.max(p.x), m.y.max(p.y))
        });
        let poly = Polygon { vertices, lo, hi };
        if poly.area() <= EPS_GEO || !poly.is_simple() {
            return None;
        }
        Some(poly)
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Option<Self> {
        Polygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn bbox(&self) -> (Point, Point) {
        (self.lo, self.hi)
    }

    fn signed_area(&self) -> f64 {
        self.edges().map(|(a, b)| a.cross(b)).sum::<f64>() / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point {
        let a = self.signed_area();
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Point::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let e: Vec<(Point, Point)> = self.edges().collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Adjacent edges may only share their common vertex.
                    let (a, b) = e[i];
                    let (c, d) = e[j];
                    let shared = if j == i + 1 { b } else { a };
                    let other_i = if j == i + 1 { a } else { b };
                    let other_j = if j == i + 1 { d } else { c };
                    if point_segment_dist(other_j, a, b) <= EPS_GEO && other_j != shared
                        || point_segment_dist(other_i, c, d) <= EPS_GEO && other_i != shared
                    {
                        return false;
                    }
                } else if segments_touch(e[i].0, e[i].1, e[j].0, e[j].1) {
                    return false;
                }
            }
        }
        true
    }

    pub fn boundary_dist(&self, p: Point) -> f64 {
        self.edges().map(|(a, b)| point_segment_dist(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Even-odd ray test; meaningful away from the boundary.
    fn crossing_inside(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn locate(&self, p: Point) -> Location {
        if p.x < self.lo.x - EPS_GEO || p.x > self.hi.x + EPS_GEO || p.y < self.lo.y - EPS_GEO || p.y > self.hi.y + EPS_GEO {
            return Location::Outside;
        }
        if self.boundary_dist(p) <= EPS_GEO {
            Location::Boundary
        } else if self.crossing_inside(p) {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    pub fn bbox_overlaps_segment(&self, p: Point, q: Point) -> bool {
        p.x.max(q.x) >= self.lo.x - EPS_GEO
            && p.x.min(q.x) <= self.hi.x + EPS_GEO
            && p.y.max(q.y) >= self.lo.y - EPS_GEO
            && p.y.min(q.y) <= self.hi.y + EPS_GEO
    }

    /// Splits segment `pq` where it meets the boundary and locates each open piece.
    ///
    /// The result lists the piece locations in order from `p` to `q`; a
    /// segment that never meets the boundary is a single piece.
    pub fn segment_pieces(&self, p: Point, q: Point) -> Vec<Location> {
        if !self.bbox_overlaps_segment(p, q) {
            return vec![Location::Outside];
        }
        let mut ts = vec![0.0];
        for (a, b) in self.edges() {
            segment_hits(p, q, a, b, &mut ts);
        }
        ts.push(1.0);
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        ts.windows(2).map(|w| self.locate(p.lerp(q, 0.5 * (w[0] + w[1])))).collect()
    }

    /// Number of changes of closed membership along `p -> q`: the endpoints
    /// and every open piece between boundary contacts, in order.
    pub fn membership_changes(&self, p: Point, q: Point) -> usize {
        let seq = std::iter::once(self.locate(p))
            .chain(self.segment_pieces(p, q))
            .chain(std::iter::once(self.locate(q)))
            .map(Location::closed);
        let mut changes = 0;
        let mut prev = None;
        for m in seq {
            if prev.is_some_and(|x| x != m) {
                changes += 1;
            }
            prev = Some(m);
        }
        changes
    }

    /// Transversal crossings of the boundary by the open segment `(p, q)`.
    ///
    /// Pieces running along the boundary are skipped, so touching a vertex
    /// or an edge and turning back counts zero, as do endpoints on the boundary.
    pub fn boundary_crossings(&self, p: Point, q: Point) -> usize {
        if p == q {
            return 0;
        }
        let sides: Vec<bool> = self
            .segment_pieces(p, q)
            .into_iter()
            .filter(|l| *l != Location::Boundary)
            .map(|l| l == Location::Inside)
            .collect();
        sides.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Does the open segment `pq` pass through the polygon's interior?
    pub fn segment_enters_interior(&self, p: Point, q: Point) -> bool {
        if p == q {
            return self.locate(p) == Location::Inside;
        }
        self.segment_pieces(p, q).contains(&Location::Inside)
    }

    /// Do the closures of two polygons intersect?
    pub fn closure_intersects(&self, other: &Polygon) -> bool {
        let (a_lo, a_hi) = self.bbox();
        let (b_lo, b_hi) = other.bbox();
        if a_hi.x < b_lo.x - EPS_GEO || b_hi.x < a_lo.x - EPS_GEO || a_hi.y < b_lo.y - EPS_GEO || b_hi.y < a_lo.y - EPS_GEO {
            return false;
        }
        for (a, b) in self.edges() {
            for (c, d) in other.edges() {
                if segments_touch(a, b, c, d) {
                    return true;
                }
            }
        }
        self.locate(other.vertices[0]).closed() || other.locate(self.vertices[0]).closed()
    }

    /// Sorted crossing ordinates of the vertical line `x` with the boundary.
    pub(crate) fn vertical_cuts(&self, x: f64) -> Vec<f64> {
        let mut ys: Vec<f64> = self
            .edges()
            .filter(|(a, b)| (a.x < x) != (b.x < x))
            .map(|(a, b)| a.y + (x - a.x) / (b.x - a.x) * (b.y - a.y))
            .collect();
        ys.sort_by(f64::total_cmp);
        ys
    }
}
