//! Exact k-d tree over points of a fixed dimension, ids assigned in insertion order.

#[derive(Debug, Clone)]
struct KdNode {
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    nodes: Vec<KdNode>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KdTree {
    pub fn new(dim: usize) -> Self {
        KdTree {
            dim,
            coords: Vec::new(),
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    /// Inserts `p` and returns its id.
    pub fn insert(&mut self, p: &[f64]) -> usize {
        assert_eq!(p.len(), self.dim);
        let id = self.nodes.len();
        self.coords.extend_from_slice(p);
        if id == 0 {
            self.nodes.push(KdNode { axis: 0, left: None, right: None });
            return id;
        }
        let mut cur = 0;
        loop {
            let axis = self.nodes[cur].axis;
            let go_left = p[axis] < self.coords[cur * self.dim + axis];
            let slot = if go_left { self.nodes[cur].left } else { self.nodes[cur].right };
            match slot {
                Some(next) => cur = next,
                None => {
                    let axis = (axis + 1) % self.dim;
                    self.nodes.push(KdNode { axis, left: None, right: None });
                    if go_left {
                        self.nodes[cur].left = Some(id);
                    } else {
                        self.nodes[cur].right = Some(id);
                    }
                    return id;
                }
            }
        }
    }

    /// Closest point by Euclidean distance; ties go to the lowest id.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(0, q, &mut best);
        Some((best.0, best.1.sqrt()))
    }

    fn nearest_rec(&self, n: usize, q: &[f64], best: &mut (usize, f64)) {
        let d = dist2(self.point(n), q);
        if d < best.1 || (d == best.1 && n < best.0) {
            *best = (n, d);
        }
        let node = &self.nodes[n];
        let diff = q[node.axis] - self.coords[n * self.dim + node.axis];
        let (near, far) = if diff < 0.0 { (node.left, node.right) } else { (node.right, node.left) };
        if let Some(c) = near {
            self.nearest_rec(c, q, best);
        }
        if let Some(c) = far {
            // `<=` keeps equal-distance points with smaller ids reachable.
            if diff * diff <= best.1 {
                self.nearest_rec(c, q, best);
            }
        }
    }

    /// Ids of all points within distance `r` of `q`, ascending.
    pub fn within(&self, q: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.nodes.is_empty() && r >= 0.0 {
            self.within_rec(0, q, r, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn within_rec(&self, n: usize, q: &[f64], r: f64, out: &mut Vec<usize>) {
        if dist2(self.point(n), q).sqrt() <= r {
            out.push(n);
        }
        let node = &self.nodes[n];
        let diff = q[node.axis] - self.coords[n * self.dim + node.axis];
        if let Some(c) = node.left {
            if diff < 0.0 || diff <= r {
                self.within_rec(c, q, r, out);
            }
        }
        if let Some(c) = node.right {
            if diff >= 0.0 || -diff <= r {
                self.within_rec(c, q, r, out);
            }
        }
    }
}
