use std::collections::HashMap;

use super::index::KdTree;
use crate::buchi::Nba;
use crate::formula::RobotLabels;
use crate::geometry::{Point, Workspace};
use crate::product::{cost_c, JointState};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Position class (distinct joint position) of the node.
    pub class: usize,
    pub q: usize,
    /// The root is its own parent.
    pub parent: usize,
    pub cost: f64,
    pub children: Vec<usize>,
}

/// All nodes sharing one joint position, plus its cached labels.
#[derive(Debug, Clone)]
pub struct PositionClass {
    pub x: JointState,
    pub labels: RobotLabels,
    pub nodes: Vec<usize>,
}

fn key(x: &[Point]) -> Vec<u64> {
    x.iter().flat_map(|p| [p.x.to_bits(), p.y.to_bits()]).collect()
}

fn flat(x: &[Point]) -> Vec<f64> {
    x.iter().flat_map(|p| [p.x, p.y]).collect()
}

/// Product-space tree; node 0 is the root.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
    classes: Vec<PositionClass>,
    by_key: HashMap<Vec<u64>, usize>,
    index: KdTree,
}

impl Tree {
    pub fn new(ws: &Workspace, root_x: JointState, root_q: usize) -> Self {
        let mut t = Tree {
            nodes: Vec::new(),
            classes: Vec::new(),
            by_key: HashMap::new(),
            index: KdTree::new(2 * root_x.len()),
        };
        let c = t.class_for(ws, &root_x);
        t.nodes.push(Node {
            class: c,
            q: root_q,
            parent: 0,
            cost: 0.0,
            children: Vec::new(),
        });
        t.classes[c].nodes.push(0);
        t
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn classes(&self) -> &[PositionClass] {
        &self.classes
    }

    /// `|[V]~|`: number of distinct joint positions.
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn x(&self, id: usize) -> &JointState {
        &self.classes[self.nodes[id].class].x
    }

    pub fn labels(&self, id: usize) -> &RobotLabels {
        &self.classes[self.nodes[id].class].labels
    }

    pub fn find_class(&self, x: &[Point]) -> Option<usize> {
        self.by_key.get(&key(x)).copied()
    }

    /// Class of `x`, created if new.
    pub fn class_for(&mut self, ws: &Workspace, x: &[Point]) -> usize {
        let k = key(x);
        if let Some(&c) = self.by_key.get(&k) {
            return c;
        }
        let c = self.index.insert(&flat(x));
        debug_assert_eq!(c, self.classes.len());
        self.classes.push(PositionClass {
            x: x.to_vec(),
            labels: ws.labels(x),
            nodes: Vec::new(),
        });
        self.by_key.insert(k, c);
        c
    }

    pub fn find_node(&self, class: usize, q: usize) -> Option<usize> {
        self.classes[class].nodes.iter().copied().find(|&n| self.nodes[n].q == q)
    }

    /// Class nearest to `x` (lowest class id on ties) and its distance.
    pub fn nearest_class(&self, x: &[Point]) -> (usize, f64) {
        self.index.nearest(&flat(x)).expect("tree is never empty")
    }

    /// Classes within distance `r` of `x`, ascending.
    pub fn classes_within(&self, x: &[Point], r: f64) -> Vec<usize> {
        self.index.within(&flat(x), r)
    }

    /// Nodes whose position lies within `r` of `x`, ascending id.
    pub fn near(&self, x: &[Point], r: f64) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .classes_within(x, r)
            .into_iter()
            .flat_map(|c| self.classes[c].nodes.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Nodes at the position nearest to `x`.
    pub fn nearest(&self, x: &[Point]) -> Vec<usize> {
        let (c, _) = self.nearest_class(x);
        self.classes[c].nodes.clone()
    }

    pub(crate) fn push(&mut self, class: usize, q: usize, parent: usize, cost: f64) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            class,
            q,
            parent,
            cost,
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        self.classes[class].nodes.push(id);
        id
    }

    /// Moves `child` under `parent` and pushes the cost change down its subtree.
    pub(crate) fn reparent(&mut self, child: usize, parent: usize, cost: f64) {
        let old = self.nodes[child].parent;
        self.nodes[old].children.retain(|&c| c != child);
        self.nodes[parent].children.push(child);
        self.nodes[child].parent = parent;
        self.nodes[child].cost = cost;
        let mut stack = vec![child];
        while let Some(u) = stack.pop() {
            let cu = self.nodes[u].cost;
            let xu = self.nodes[u].class;
            let kids = self.nodes[u].children.clone();
            for k in kids {
                let step = cost_c(&self.classes[xu].x, &self.classes[self.nodes[k].class].x);
                self.nodes[k].cost = cu + step;
                stack.push(k);
            }
        }
    }

    /// Root-to-`id` node sequence.
    pub fn path_to(&self, id: usize) -> Vec<usize> {
        let mut path = vec![id];
        let mut cur = id;
        while cur != 0 {
            cur = self.nodes[cur].parent;
            path.push(cur);
            assert!(path.len() <= self.nodes.len(), "parent links contain a cycle");
        }
        path.reverse();
        path
    }

    /// Checks structure, stored costs and edge feasibility; returns the first problem.
    pub fn check_invariants(&self, ws: &Workspace, nba: &Nba, tol: f64) -> Result<(), String> {
        if self.nodes[0].parent != 0 || self.nodes[0].cost != 0.0 {
            return Err("root must be its own parent with zero cost".into());
        }
        for (id, n) in self.nodes.iter().enumerate().skip(1) {
            // Acyclicity: walk up at most len steps.
            let mut cur = id;
            let mut steps = 0;
            let mut recomputed = 0.0;
            let mut chain = Vec::new();
            while cur != 0 {
                chain.push(cur);
                cur = self.nodes[cur].parent;
                steps += 1;
                if steps > self.nodes.len() {
                    return Err(format!("node {id} does not reach the root"));
                }
            }
            for &c in chain.iter().rev() {
                let p = self.nodes[c].parent;
                recomputed += cost_c(self.x(p), self.x(c));
            }
            if (recomputed - n.cost).abs() > tol {
                return Err(format!("node {id}: stored cost {} vs path cost {recomputed}", n.cost));
            }
            let p = n.parent;
            if !self.nodes[p].children.contains(&id) {
                return Err(format!("node {id} missing from its parent's children"));
            }
            if !ws.joint_transition_valid(self.x(p), self.x(id)) {
                return Err(format!("edge {p}->{id} is not a valid transition"));
            }
            if !nba.can_step(self.nodes[p].q, self.labels(p), n.q) {
                return Err(format!("edge {p}->{id} is not enabled in the automaton"));
            }
        }
        Ok(())
    }
}
