use super::{Point, Workspace};

/// Obstacle vertices and the straight free segments between them.
#[derive(Debug, Clone, Default)]
pub struct VisibilityGraph {
    vertices: Vec<Point>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl VisibilityGraph {
    pub(crate) fn build(vertices: Vec<Point>, free: impl Fn(Point, Point) -> bool) -> Self {
        let n = vertices.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if free(vertices[i], vertices[j]) {
                    let d = vertices[i].dist(vertices[j]);
                    adj[i].push((j, d));
                    adj[j].push((i, d));
                }
            }
        }
        VisibilityGraph { vertices, adj }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    /// Dense Dijkstra from a set of seeded vertex distances.
    ///
    /// Returns distances and predecessors (`usize::MAX` for seeds and
    /// unreachable vertices). Ties resolve to the lowest vertex index.
    fn dijkstra(&self, mut dist: Vec<f64>) -> (Vec<f64>, Vec<usize>) {
        let n = self.vertices.len();
        let mut pred = vec![usize::MAX; n];
        let mut done = vec![false; n];
        loop {
            let mut best = None;
            for v in 0..n {
                if !done[v] && dist[v].is_finite() && best.is_none_or(|b: usize| dist[v] < dist[b]) {
                    best = Some(v);
                }
            }
            let Some(u) = best else { break };
            done[u] = true;
            for &(v, w) in &self.adj[u] {
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                    pred[v] = u;
                }
            }
        }
        (dist, pred)
    }
}

/// Geodesic distances from every visibility-graph vertex to one target point.
#[derive(Debug, Clone)]
pub struct GeodesicField {
    target: Point,
    dist: Vec<f64>,
}

impl GeodesicField {
    pub fn new(ws: &Workspace, target: Point) -> Self {
        let g = ws.visibility();
        let seed = g
            .vertices
            .iter()
            .map(|&v| if ws.segment_free(v, target) { v.dist(target) } else { f64::INFINITY })
            .collect();
        let (dist, _) = g.dijkstra(seed);
        GeodesicField { target, dist }
    }

    pub fn target(&self) -> Point {
        self.target
    }

    /// Best first hop from `p` toward the target and the geodesic length through it.
    fn first_hop(&self, ws: &Workspace, p: Point) -> Option<(Point, f64)> {
        if ws.segment_free(p, self.target) {
            return Some((self.target, p.dist(self.target)));
        }
        let g = ws.visibility();
        let mut best: Option<(Point, f64)> = None;
        for (i, &v) in g.vertices.iter().enumerate() {
            if !self.dist[i].is_finite() {
                continue;
            }
            let d = p.dist(v) + self.dist[i];
            if best.is_none_or(|(_, b)| d < b) && ws.segment_free(p, v) {
                best = Some((v, d));
            }
        }
        best
    }

    /// Geodesic length from `p` to the target, `None` if unreachable.
    pub fn distance(&self, ws: &Workspace, p: Point) -> Option<f64> {
        self.first_hop(ws, p).map(|(_, d)| d)
    }

    /// The second vertex of the geodesic from `p`: the point to head for.
    pub fn next_vertex(&self, ws: &Workspace, p: Point) -> Option<Point> {
        self.first_hop(ws, p).map(|(v, _)| v)
    }
}

/// Shortest path `[p, v1, ..., q]` through the visibility graph.
pub(crate) fn shortest_path(ws: &Workspace, p: Point, q: Point) -> Option<Vec<Point>> {
    if ws.segment_free(p, q) {
        return Some(vec![p, q]);
    }
    let g = ws.visibility();
    let seed = g
        .vertices
        .iter()
        .map(|&v| if ws.segment_free(p, v) { p.dist(v) } else { f64::INFINITY })
        .collect();
    let (dist, pred) = g.dijkstra(seed);
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in g.vertices.iter().enumerate() {
        if !dist[i].is_finite() {
            continue;
        }
        let d = dist[i] + v.dist(q);
        if best.is_none_or(|(_, b)| d < b) && ws.segment_free(v, q) {
            best = Some((i, d));
        }
    }
    let (mut v, _) = best?;
    let mut rev = vec![q, g.vertices[v]];
    while pred[v] != usize::MAX {
        v = pred[v];
        rev.push(g.vertices[v]);
    }
    rev.push(p);
    rev.reverse();
    Some(rev)
}
