//! Product states, path costs, prefix–suffix plans and the plan verifier.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::buchi::Nba;
use crate::formula::RobotLabels;
use crate::geometry::{Point, Workspace};

/// Positions of all robots, robot `i` at index `i`.
pub type JointState = Vec<Point>;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    pub x: JointState,
    pub q: usize,
}

/// Euclidean distance in the stacked 2N-dimensional space.
pub fn cost_c(a: &[Point], b: &[Point]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let d = *p - *q;
            d.x * d.x + d.y * d.y
        })
        .sum::<f64>()
        .sqrt()
}

pub fn path_cost(waypoints: &[JointState]) -> f64 {
    waypoints.windows(2).map(|w| cost_c(&w[0], &w[1])).sum()
}

/// Label observation of every waypoint; no stutter removal.
pub fn trace_of(ws: &Workspace, waypoints: &[JointState]) -> Vec<RobotLabels> {
    waypoints.iter().map(|x| ws.labels(x)).collect()
}

/// A lasso-shaped plan.
///
/// `prefix` runs from the start to the accepting waypoint `x_K`. `suffix`
/// is the open cycle `y_1 .. y_S` executed forever as
/// `x_K -> y_1 -> .. -> y_S -> x_K`; an empty suffix means staying at `x_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub prefix: Vec<JointState>,
    pub prefix_q: Vec<usize>,
    pub suffix: Vec<JointState>,
    pub suffix_q: Vec<usize>,
    pub prefix_cost: f64,
    /// Includes the closing segment back to `x_K`.
    pub suffix_cost: f64,
    pub weight: f64,
    pub cost: f64,
}

impl Plan {
    pub fn new(prefix: Vec<JointState>, prefix_q: Vec<usize>, suffix: Vec<JointState>, suffix_q: Vec<usize>, weight: f64) -> Self {
        let prefix_cost = path_cost(&prefix);
        let suffix_cost = cycle_cost(prefix.last().expect("prefix must be nonempty"), &suffix);
        Plan {
            prefix,
            prefix_q,
            suffix,
            suffix_q,
            prefix_cost,
            suffix_cost,
            weight,
            cost: weight * prefix_cost + (1.0 - weight) * suffix_cost,
        }
    }

    pub fn n_robots(&self) -> usize {
        self.prefix.first().map_or(0, Vec::len)
    }

    /// Accepting waypoint where the cycle starts and ends.
    pub fn anchor(&self) -> &JointState {
        self.prefix.last().expect("prefix must be nonempty")
    }

    /// `[x_K, y_1, .., y_S, x_K]`.
    pub fn closed_cycle(&self) -> Vec<JointState> {
        let mut c = Vec::with_capacity(self.suffix.len() + 2);
        c.push(self.anchor().clone());
        c.extend(self.suffix.iter().cloned());
        c.push(self.anchor().clone());
        c
    }

    /// Letters of the lasso word `prefix . cycle^w` the plan generates.
    pub fn lasso_word(&self, ws: &Workspace) -> (Vec<RobotLabels>, Vec<RobotLabels>) {
        let k = self.prefix.len() - 1;
        let pre = trace_of(ws, &self.prefix[..k]);
        let mut cycle = vec![ws.labels(self.anchor())];
        cycle.extend(trace_of(ws, &self.suffix));
        (pre, cycle)
    }
}

/// Cost of `anchor -> suffix.. -> anchor`.
pub fn cycle_cost(anchor: &[Point], suffix: &[JointState]) -> f64 {
    let mut prev = anchor;
    let mut total = 0.0;
    for y in suffix {
        total += cost_c(prev, y);
        prev = y;
    }
    total + cost_c(prev, anchor)
}

/// Weighted cost `w * prefix + (1 - w) * suffix`.
pub fn plan_cost(plan: &Plan, w: f64) -> f64 {
    w * path_cost(&plan.prefix) + (1.0 - w) * cycle_cost(plan.anchor(), &plan.suffix)
}

/// Why a plan was rejected; transitions are numbered along
/// `prefix ++ closed cycle`, starting at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanDefect {
    EmptyPrefix,
    TeamSize { waypoint: usize },
    InvalidStart,
    SegmentNotFree { transition: usize, robot: usize },
    RegionReentered { transition: usize, robot: usize },
    Separation { transition: usize },
    LassoRejected,
}

impl PlanDefect {
    /// Short stable name of the failing check.
    pub fn kind(&self) -> &'static str {
        match self {
            PlanDefect::EmptyPrefix => "empty prefix",
            PlanDefect::TeamSize { .. } => "team size mismatch",
            PlanDefect::InvalidStart => "invalid start",
            PlanDefect::SegmentNotFree { .. } => "segment not free",
            PlanDefect::RegionReentered { .. } => "region boundary crossed twice",
            PlanDefect::Separation { .. } => "separation violated",
            PlanDefect::LassoRejected => "lasso rejected",
        }
    }
}

impl fmt::Display for PlanDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanDefect::TeamSize { waypoint } => write!(f, "{} at waypoint {waypoint}", self.kind()),
            PlanDefect::SegmentNotFree { transition, robot } | PlanDefect::RegionReentered { transition, robot } => {
                write!(f, "{} (transition {transition}, robot {})", self.kind(), robot + 1)
            }
            PlanDefect::Separation { transition } => write!(f, "{} (transition {transition})", self.kind()),
            _ => f.write_str(self.kind()),
        }
    }
}

/// Checks every transition of the lasso geometrically and the induced word
/// against the automaton. Returns the first failing check.
pub fn verify_plan(plan: &Plan, nba: &Nba, ws: &Workspace) -> Result<(), PlanDefect> {
    if plan.prefix.is_empty() {
        return Err(PlanDefect::EmptyPrefix);
    }
    let n = ws.n_robots();
    for (i, x) in plan.prefix.iter().chain(&plan.suffix).enumerate() {
        if x.len() != n {
            return Err(PlanDefect::TeamSize { waypoint: i });
        }
    }
    let mut seq: Vec<&JointState> = plan.prefix.iter().collect();
    seq.extend(&plan.suffix);
    seq.push(plan.anchor());
    for (t, w) in seq.windows(2).enumerate() {
        let (x, y) = (w[0], w[1]);
        for r in 0..n {
            if !ws.segment_free(x[r], y[r]) {
                return Err(PlanDefect::SegmentNotFree { transition: t, robot: r });
            }
            if !ws.robot_transition_valid(x[r], y[r]) {
                return Err(PlanDefect::RegionReentered { transition: t, robot: r });
            }
        }
        if !ws.joint_state_valid(y) {
            return Err(PlanDefect::Separation { transition: t });
        }
    }
    if !ws.joint_state_valid(&plan.prefix[0]) {
        return Err(PlanDefect::InvalidStart);
    }
    let (pre, cycle) = plan.lasso_word(ws);
    if !nba.accepts_lasso(&pre, &cycle) {
        return Err(PlanDefect::LassoRejected);
    }
    Ok(())
}

/// Plan file: the plan plus what is needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub seed: u64,
    pub params: serde_json::Value,
    pub plan: Option<Plan>,
}

impl PlanFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
