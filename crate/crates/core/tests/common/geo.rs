//! Geometry oracles written against raw polygon vertices only.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tlrrt::geometry::{Point, Workspace};

/// Segments passing this close to a polygon vertex, or starting or ending
/// this close to a boundary, are too close to tangency for sampling to judge.
pub const TANGENCY_BAND: f64 = 2e-3;
/// Samples per segment; pieces shorter than the band are never skipped.
pub const SAMPLES: usize = 2000;

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (ab, ap) = (b - a, p - a);
    let l2 = ab.dot(ab);
    let t = if l2 == 0.0 { 0.0 } else { (ap.dot(ab) / l2).clamp(0.0, 1.0) };
    p.dist(a.lerp(b, t))
}

fn edges(v: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

fn boundary_dist(v: &[Point], p: Point) -> f64 {
    edges(v).map(|(a, b)| seg_dist(p, a, b)).fold(f64::INFINITY, f64::min)
}

/// Even-odd ray cast; boundary points are reported separately.
fn ray_inside(v: &[Point], p: Point) -> bool {
    let mut inside = false;
    for (a, b) in edges(v) {
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
            inside = !inside;
        }
    }
    inside
}

pub fn in_closed(v: &[Point], p: Point) -> bool {
    boundary_dist(v, p) <= 1e-12 || ray_inside(v, p)
}

pub fn in_open(v: &[Point], p: Point) -> bool {
    boundary_dist(v, p) > 1e-12 && ray_inside(v, p)
}

fn polygons(ws: &Workspace) -> impl Iterator<Item = &[Point]> {
    ws.obstacles().iter().map(|o| o.vertices()).chain(ws.regions().iter().map(|r| r.polygon.vertices()))
}

pub fn near_tangent(ws: &Workspace, p: Point, q: Point) -> bool {
    polygons(ws).any(|v| {
        v.iter().any(|&c| seg_dist(c, p, q) < TANGENCY_BAND) || boundary_dist(v, p) < TANGENCY_BAND || boundary_dist(v, q) < TANGENCY_BAND
    })
}

/// Dense sampling: no sample inside an obstacle, and along the samples each
/// closed region is entered or left at most once.
pub fn dense_transition_valid(ws: &Workspace, p: Point, q: Point) -> bool {
    let b = ws.bounds();
    let pts: Vec<Point> = (0..=SAMPLES).map(|k| p.lerp(q, k as f64 / SAMPLES as f64)).collect();
    if pts.iter().any(|s| s.x < b.min.x || s.x > b.max.x || s.y < b.min.y || s.y > b.max.y) {
        return false;
    }
    if ws.obstacles().iter().any(|o| pts.iter().any(|&s| in_open(o.vertices(), s))) {
        return false;
    }
    ws.regions().iter().all(|r| {
        let m: Vec<bool> = pts.iter().map(|&s| in_closed(r.polygon.vertices(), s)).collect();
        m.windows(2).filter(|w| w[0] != w[1]).count() <= 1
    })
}

/// Half long random segments, half short ones that resolve region detail.
pub fn random_segment(rng: &mut ChaCha8Rng) -> (Point, Point) {
    let p = Point::new(rng.random(), rng.random());
    let q = if rng.random_bool(0.5) {
        Point::new(rng.random(), rng.random())
    } else {
        let (r, a): (f64, f64) = (rng.random_range(0.0..0.2), rng.random_range(0.0..std::f64::consts::TAU));
        Point::new((p.x + r * a.cos()).clamp(0.0, 1.0), (p.y + r * a.sin()).clamp(0.0, 1.0))
    };
    (p, q)
}

/// Does the segment meet the open interior of the convex polygon `v`?
/// Cyrus–Beck clipping against strict half-planes.
fn enters_convex(v: &[Point], p: Point, q: Point) -> bool {
    let area: f64 = edges(v).map(|(a, b)| a.cross(b)).sum();
    let s = area.signum();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let d = q - p;
    for (a, b) in edges(v) {
        let e = b - a;
        // Inside means s * cross(e, x - a) > 0.
        let num = s * e.cross(p - a);
        let den = s * e.cross(d);
        if den.abs() < 1e-15 {
            if num <= 1e-12 {
                return false;
            }
        } else {
            let t = -num / den;
            if den > 0.0 {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
        }
    }
    hi - lo > 1e-9
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

/// Dijkstra on a 200x200 lattice of cell centres whose moves are all offsets
/// up to 5 cells in each axis (coprime), so that lattice paths approximate
/// Euclidean lengths to well under one percent.
pub struct GridOracle {
    obstacles: Vec<Vec<Point>>,
    free: Vec<bool>,
    moves: Vec<(i64, i64, f64)>,
}

impl GridOracle {
    pub const N: usize = 200;
    pub const H: f64 = 1.0 / Self::N as f64;
    /// Two cell widths: the query points are joined to nearby lattice nodes
    /// and lattice paths round obstacle corners through cell centres.
    pub const SNAP_SLACK: f64 = 2.0 * Self::H;

    pub fn new(ws: &Workspace) -> Self {
        let obstacles: Vec<Vec<Point>> = ws.obstacles().iter().map(|o| o.vertices().to_vec()).collect();
        let free = (0..Self::N * Self::N).map(|k| obstacles.iter().all(|o| !in_closed(o, Self::node(k)))).collect();
        let gcd = |mut a: i64, mut b: i64| {
            while b != 0 {
                (a, b) = (b, a % b);
            }
            a.abs()
        };
        let mut moves = Vec::new();
        for dx in -5i64..=5 {
            for dy in -5i64..=5 {
                if (dx, dy) != (0, 0) && gcd(dx, dy) == 1 {
                    moves.push((dx, dy, (dx as f64).hypot(dy as f64) * Self::H));
                }
            }
        }
        GridOracle { obstacles, free, moves }
    }

    fn node(k: usize) -> Point {
        Point::new(((k % Self::N) as f64 + 0.5) * Self::H, ((k / Self::N) as f64 + 0.5) * Self::H)
    }

    fn clear(&self, p: Point, q: Point) -> bool {
        self.obstacles.iter().all(|o| !enters_convex(o, p, q))
    }

    /// Free lattice nodes within three cells of `p` that `p` sees directly.
    fn anchors(&self, p: Point) -> Vec<(usize, f64)> {
        let (i, j) = ((p.x / Self::H) as i64, (p.y / Self::H) as i64);
        let mut out = Vec::new();
        for a in i - 3..=i + 3 {
            for b in j - 3..=j + 3 {
                if a < 0 || b < 0 || a >= Self::N as i64 || b >= Self::N as i64 {
                    continue;
                }
                let k = b as usize * Self::N + a as usize;
                if self.free[k] && self.clear(p, Self::node(k)) {
                    out.push((k, p.dist(Self::node(k))));
                }
            }
        }
        out
    }

    /// Length of the shortest lattice path from `p` to `q`.
    pub fn distance(&self, p: Point, q: Point) -> Option<f64> {
        let n = Self::N as i64;
        let mut dist = vec![f64::INFINITY; Self::N * Self::N];
        let mut heap = BinaryHeap::new();
        for (k, d) in self.anchors(p) {
            dist[k] = d;
            heap.push(Item(d, k));
        }
        while let Some(Item(d, k)) = heap.pop() {
            if d > dist[k] {
                continue;
            }
            let (x, y) = ((k % Self::N) as i64, (k / Self::N) as i64);
            for &(dx, dy, w) in &self.moves {
                let (a, b) = (x + dx, y + dy);
                if a < 0 || b < 0 || a >= n || b >= n {
                    continue;
                }
                let m = (b * n + a) as usize;
                if !self.free[m] || d + w >= dist[m] || !self.clear(Self::node(k), Self::node(m)) {
                    continue;
                }
                dist[m] = d + w;
                heap.push(Item(d + w, m));
            }
        }
        let best = self.anchors(q).into_iter().map(|(k, d)| dist[k] + d).fold(f64::INFINITY, f64::min);
        let direct = if self.clear(p, q) { p.dist(q) } else { f64::INFINITY };
        let best = best.min(direct);
        best.is_finite().then_some(best)
    }
}
