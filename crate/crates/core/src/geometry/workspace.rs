use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::visibility::shortest_path;
use super::{segment_hits, GeodesicField, Location, Point, Polygon, VisibilityGraph, EPS_GEO};
use crate::formula::RobotLabels;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("bounds must satisfy min < max in both coordinates")]
    InvalidBounds,
    #[error("obstacle {0} is not a simple polygon with positive area")]
    InvalidObstacle(usize),
    #[error("region {0} is not a simple polygon with positive area")]
    InvalidRegion(u32),
    #[error("region labels must be exactly 1..W without repeats, got {0:?}")]
    BadLabels(Vec<u32>),
    #[error("need at least one robot")]
    NoRobots,
    #[error("minimum separation must be finite and nonnegative, got {0}")]
    InvalidSeparation(f64),
    #[error("no collision-free path between {0:?} and {1:?}")]
    NoPath(Point, Point),
    #[error("environment file: {0}")]
    Parse(String),
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Rect { min, max }
    }

    pub fn unit() -> Self {
        Rect::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x - EPS_GEO && p.x <= self.max.x + EPS_GEO && p.y >= self.min.y - EPS_GEO && p.y <= self.max.y + EPS_GEO
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparationNorm {
    /// Robots must be more than `R` apart along at least one axis.
    #[default]
    Chebyshev,
    Euclidean,
}

/// Closed labeled region `ell_label`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub label: u32,
    pub polygon: Polygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFile {
    pub label: u32,
    pub vertices: Vec<Point>,
}

/// On-disk environment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentFile {
    pub bounds: Rect,
    #[serde(default)]
    pub obstacles: Vec<Vec<Point>>,
    pub regions: Vec<RegionFile>,
    pub n_robots: usize,
    pub min_separation: f64,
    #[serde(default)]
    pub separation_norm: SeparationNorm,
}

/// Bounded planar workspace with open polygonal obstacles and closed regions.
#[derive(Debug, Clone)]
pub struct Workspace {
    bounds: Rect,
    obstacles: Vec<Polygon>,
    regions: Vec<Region>,
    n_robots: usize,
    min_separation: f64,
    norm: SeparationNorm,
    vis: VisibilityGraph,
}

impl Workspace {
    pub fn new(
        bounds: Rect,
        obstacles: Vec<Polygon>,
        mut regions: Vec<Region>,
        n_robots: usize,
        min_separation: f64,
        norm: SeparationNorm,
    ) -> Result<Self, GeometryError> {
        if !(bounds.min.x < bounds.max.x && bounds.min.y < bounds.max.y) {
            return Err(GeometryError::InvalidBounds);
        }
        if n_robots == 0 {
            return Err(GeometryError::NoRobots);
        }
        if !(min_separation.is_finite() && min_separation >= 0.0) {
            return Err(GeometryError::InvalidSeparation(min_separation));
        }
        regions.sort_by_key(|r| r.label);
        let labels: Vec<u32> = regions.iter().map(|r| r.label).collect();
        if labels.iter().enumerate().any(|(i, &l)| l != i as u32 + 1) {
            return Err(GeometryError::BadLabels(labels));
        }
        let mut ws = Workspace {
            bounds,
            obstacles,
            regions,
            n_robots,
            min_separation,
            norm,
            vis: VisibilityGraph::default(),
        };
        let corners: Vec<Point> = ws
            .obstacles
            .iter()
            .flat_map(|o| o.vertices().iter().copied())
            .filter(|&v| ws.point_free(v))
            .collect();
        ws.vis = VisibilityGraph::build(corners, |a, b| ws.segment_free(a, b));
        Ok(ws)
    }

    pub fn from_file(f: &EnvironmentFile) -> Result<Self, GeometryError> {
        let obstacles = f
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, vs)| Polygon::new(vs.clone()).ok_or(GeometryError::InvalidObstacle(i)))
            .collect::<Result<Vec<_>, _>>()?;
        let regions = f
            .regions
            .iter()
            .map(|r| {
                Polygon::new(r.vertices.clone())
                    .map(|polygon| Region { label: r.label, polygon })
                    .ok_or(GeometryError::InvalidRegion(r.label))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Workspace::new(f.bounds, obstacles, regions, f.n_robots, f.min_separation, f.separation_norm)
    }

    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let f: EnvironmentFile = serde_json::from_str(text).map_err(|e| GeometryError::Parse(e.to_string()))?;
        Workspace::from_file(&f)
    }

    pub fn to_file(&self) -> EnvironmentFile {
        EnvironmentFile {
            bounds: self.bounds,
            obstacles: self.obstacles.iter().map(|o| o.vertices().to_vec()).collect(),
            regions: self
                .regions
                .iter()
                .map(|r| RegionFile {
                    label: r.label,
                    vertices: r.polygon.vertices().to_vec(),
                })
                .collect(),
            n_robots: self.n_robots,
            min_separation: self.min_separation,
            separation_norm: self.norm,
        }
    }

    /// Same geometry for a different team size.
    pub fn with_robots(&self, n_robots: usize) -> Result<Self, GeometryError> {
        let mut f = self.to_file();
        f.n_robots = n_robots;
        Workspace::from_file(&f)
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    /// Regions ordered by label; `regions()[j - 1]` is `ell_j`.
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, label: u32) -> &Region {
        &self.regions[label as usize - 1]
    }

    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn n_robots(&self) -> usize {
        self.n_robots
    }

    /// Dimension of the joint configuration space.
    pub fn dim(&self) -> usize {
        2 * self.n_robots
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn separation_norm(&self) -> SeparationNorm {
        self.norm
    }

    pub fn visibility(&self) -> &VisibilityGraph {
        &self.vis
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        self.bounds.contains(p)
    }

    pub fn point_free(&self, p: Point) -> bool {
        self.in_bounds(p) && self.obstacles.iter().all(|o| o.locate(p) != Location::Inside)
    }

    /// The closed segment stays in bounds and misses every obstacle interior.
    pub fn segment_free(&self, p: Point, q: Point) -> bool {
        self.in_bounds(p) && self.in_bounds(q) && self.obstacles.iter().all(|o| !o.segment_enters_interior(p, q))
    }

    /// Lowest label among the regions whose closure contains `p`.
    pub fn label_of(&self, p: Point) -> Option<u32> {
        self.regions.iter().find(|r| r.polygon.locate(p).closed()).map(|r| r.label)
    }

    pub fn labels(&self, x: &[Point]) -> RobotLabels {
        RobotLabels(x.iter().map(|&p| self.label_of(p)).collect())
    }

    pub fn boundary_crossings(&self, p: Point, q: Point, label: u32) -> usize {
        self.region(label).polygon.boundary_crossings(p, q)
    }

    /// `p -> q` is free and enters or leaves each region at most once.
    ///
    /// Membership is judged on closed regions, so sliding into a region
    /// boundary and back out counts as two changes even though neither is a
    /// transversal crossing.
    pub fn robot_transition_valid(&self, p: Point, q: Point) -> bool {
        self.segment_free(p, q) && self.regions.iter().all(|r| r.polygon.membership_changes(p, q) <= 1)
    }

    pub fn separated(&self, a: Point, b: Point) -> bool {
        let d = a - b;
        match self.norm {
            SeparationNorm::Chebyshev => d.x.abs().max(d.y.abs()) > self.min_separation,
            SeparationNorm::Euclidean => d.norm() > self.min_separation,
        }
    }

    pub fn joint_state_valid(&self, x: &[Point]) -> bool {
        x.len() == self.n_robots
            && x.iter().all(|&p| self.point_free(p))
            && (0..x.len()).all(|i| (i + 1..x.len()).all(|j| self.separated(x[i], x[j])))
    }

    pub fn joint_transition_valid(&self, x: &[Point], y: &[Point]) -> bool {
        x.len() == y.len() && x.iter().zip(y).all(|(&p, &q)| self.robot_transition_valid(p, q)) && self.joint_state_valid(y)
    }

    /// Closures of `ell_a` and `ell_b` share no point.
    pub fn regions_disjoint(&self, a: u32, b: u32) -> bool {
        a != b && !self.region(a).polygon.closure_intersects(&self.region(b).polygon)
    }

    /// Area of the free space raised to the team size.
    pub fn free_measure(&self) -> f64 {
        let single = self.bounds.area() - self.obstacle_union_area();
        single.powi(self.n_robots as i32)
    }

    /// Area of the union of obstacles clipped to the bounds.
    ///
    /// Splits the plane into vertical slabs at every vertex and every edge
    /// crossing; inside a slab the covered length is affine in `x`, so the
    /// midpoint rule is exact.
    fn obstacle_union_area(&self) -> f64 {
        let b = self.bounds;
        let edges: Vec<(Point, Point)> = self.obstacles.iter().flat_map(|o| o.edges()).collect();
        let mut xs: Vec<f64> = vec![b.min.x, b.max.x];
        xs.extend(self.obstacles.iter().flat_map(|o| o.vertices().iter().map(|v| v.x)));
        let mut ts = Vec::new();
        let horizon = [
            (Point::new(b.min.x, b.min.y), Point::new(b.max.x, b.min.y)),
            (Point::new(b.min.x, b.max.y), Point::new(b.max.x, b.max.y)),
        ];
        for (i, &(p, q)) in edges.iter().enumerate() {
            for &(a, c) in edges[i + 1..].iter().chain(horizon.iter()) {
                ts.clear();
                segment_hits(p, q, a, c, &mut ts);
                xs.extend(ts.iter().map(|&t| p.lerp(q, t).x));
            }
        }
        xs.retain(|x| *x >= b.min.x && *x <= b.max.x);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut area = 0.0;
        for w in xs.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if x1 - x0 <= 0.0 {
                continue;
            }
            let xm = 0.5 * (x0 + x1);
            let mut spans: Vec<(f64, f64)> = Vec::new();
            for o in &self.obstacles {
                let cuts = o.vertical_cuts(xm);
                for pair in cuts.chunks_exact(2) {
                    let lo = pair[0].max(b.min.y);
                    let hi = pair[1].min(b.max.y);
                    if hi > lo {
                        spans.push((lo, hi));
                    }
                }
            }
            spans.sort_by(|a, c| a.0.total_cmp(&c.0));
            let mut covered = 0.0;
            let mut cur: Option<(f64, f64)> = None;
            for (lo, hi) in spans {
                match cur {
                    Some((cl, ch)) if lo <= ch => cur = Some((cl, ch.max(hi))),
                    _ => {
                        if let Some((cl, ch)) = cur {
                            covered += ch - cl;
                        }
                        cur = Some((lo, hi));
                    }
                }
            }
            if let Some((cl, ch)) = cur {
                covered += ch - cl;
            }
            area += covered * (x1 - x0);
        }
        area
    }

    /// Shortest obstacle-avoiding polyline `[p, v1, ..., q]`.
    pub fn geodesic(&self, p: Point, q: Point) -> Result<Vec<Point>, GeometryError> {
        if !self.point_free(p) || !self.point_free(q) {
            return Err(GeometryError::NoPath(p, q));
        }
        shortest_path(self, p, q).ok_or(GeometryError::NoPath(p, q))
    }

    pub fn geodesic_length(&self, p: Point, q: Point) -> Result<f64, GeometryError> {
        Ok(self.geodesic(p, q)?.windows(2).map(|w| w[0].dist(w[1])).sum())
    }

    /// Distance field toward the centroid of `ell_label`.
    pub fn region_field(&self, label: u32) -> GeodesicField {
        GeodesicField::new(self, self.region(label).polygon.centroid())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn ws(obstacles: Vec<Polygon>, n: usize) -> Workspace {
        let regions = vec![
            Region {
                label: 1,
                polygon: Polygon::new(vec![p(0.1, 0.1), p(0.3, 0.1), p(0.1, 0.3)]).unwrap(),
            },
            Region {
                label: 2,
                polygon: Polygon::rect(0.7, 0.7, 0.9, 0.9).unwrap(),
            },
        ];
        Workspace::new(Rect::unit(), obstacles, regions, n, 0.005, SeparationNorm::Chebyshev).unwrap()
    }

    #[test]
    fn labels_and_freedom() {
        let w = ws(vec![Polygon::rect(0.4, 0.4, 0.5, 0.6).unwrap()], 1);
        assert_eq!(w.label_of(p(0.15, 0.15)), Some(1));
        assert_eq!(w.label_of(p(0.1, 0.1)), Some(1));
        assert_eq!(w.label_of(p(0.5, 0.1)), None);
        assert!(!w.point_free(p(0.45, 0.5)));
        assert!(w.point_free(p(0.4, 0.5)));
        assert!(!w.point_free(p(1.1, 0.5)));
        assert!(!w.segment_free(p(0.3, 0.5), p(0.6, 0.5)));
        assert!(w.segment_free(p(0.3, 0.3), p(0.3, 0.3)));
        // Sliding along the obstacle edge stays free.
        assert!(w.segment_free(p(0.4, 0.3), p(0.4, 0.7)));
    }

    #[test]
    fn hop_over_region_is_invalid() {
        let w = ws(vec![], 1);
        assert!(!w.robot_transition_valid(p(0.05, 0.15), p(0.35, 0.15)));
        assert!(w.robot_transition_valid(p(0.05, 0.15), p(0.15, 0.15)));
        assert!(w.robot_transition_valid(p(0.15, 0.15), p(0.05, 0.15)));
        assert_eq!(w.boundary_crossings(p(0.05, 0.15), p(0.35, 0.15), 1), 2);
    }

    #[test]
    fn separation() {
        let w = ws(vec![], 2);
        assert!(w.joint_state_valid(&[p(0.1, 0.1), p(0.2, 0.2)]));
        assert!(!w.joint_state_valid(&[p(0.1, 0.1), p(0.1, 0.1)]));
        assert!(!w.joint_state_valid(&[p(0.0, 0.0), p(0.004, 0.004)]));
        assert!(w.joint_state_valid(&[p(0.0, 0.0), p(0.006, 0.0)]));
    }

    #[test]
    fn measures() {
        assert_eq!(ws(vec![], 1).free_measure(), 1.0);
        let o = Polygon::rect(0.4, 0.4, 0.5, 0.6).unwrap();
        assert!((ws(vec![o.clone()], 1).free_measure() - 0.98).abs() < 1e-12);
        assert!((ws(vec![o.clone()], 2).free_measure() - 0.9604).abs() < 1e-12);
        // Overlap counted once, parts outside the bounds ignored.
        let o2 = Polygon::rect(0.45, 0.4, 0.55, 0.6).unwrap();
        let o3 = Polygon::rect(0.9, -0.5, 1.5, 0.5).unwrap();
        let m = ws(vec![o, o2, o3], 1).free_measure();
        assert!((m - (1.0 - 0.03 - 0.05)).abs() < 1e-12, "{m}");
    }

    #[test]
    fn geodesic_around_wall() {
        let w = ws(vec![Polygon::rect(0.4, 0.2, 0.6, 0.8).unwrap()], 1);
        let path = w.geodesic(p(0.2, 0.5), p(0.8, 0.5)).unwrap();
        assert_eq!(path.len(), 4);
        let len = w.geodesic_length(p(0.2, 0.5), p(0.8, 0.5)).unwrap();
        let expect = 2.0 * (0.2f64.hypot(0.3)) + 0.2;
        assert!((len - expect).abs() < 1e-12);
        assert_eq!(w.geodesic(p(0.2, 0.1), p(0.8, 0.1)).unwrap().len(), 2);
    }

    #[test]
    fn disjoint_regions() {
        let w = ws(vec![], 1);
        assert!(w.regions_disjoint(1, 2));
        assert!(!w.regions_disjoint(1, 1));
    }

    #[test]
    fn file_round_trip() {
        let w = ws(vec![Polygon::rect(0.4, 0.4, 0.5, 0.6).unwrap()], 2);
        let text = serde_json::to_string(&w.to_file()).unwrap();
        let back = Workspace::from_json(&text).unwrap();
        assert_eq!(back.to_file(), w.to_file());
    }

    #[test]
    fn rejects_bad_labels() {
        let f = EnvironmentFile {
            bounds: Rect::unit(),
            obstacles: vec![],
            regions: vec![RegionFile {
                label: 2,
                vertices: vec![p(0.1, 0.1), p(0.2, 0.1), p(0.1, 0.2)],
            }],
            n_robots: 1,
            min_separation: 0.0,
            separation_norm: SeparationNorm::Chebyshev,
        };
        assert_eq!(Workspace::from_file(&f).unwrap_err(), GeometryError::BadLabels(vec![2]));
    }
}
