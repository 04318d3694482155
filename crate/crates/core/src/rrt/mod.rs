//! Tree growth in the product of the joint workspace and the automaton, and
//! the unbiased prefix–suffix planner.

mod index;
mod radius;
mod tree;

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use index::KdTree;
pub use radius::{optimal_gamma, practical_gamma, RadiusMode, RadiusSchedule};
pub use tree::{Node, PositionClass, Tree};

use crate::buchi::Nba;
use crate::geometry::{Point, Workspace};
use crate::product::{cost_c, verify_plan, JointState, Plan};
use crate::rng::{derive_seed, stream, Site};

pub const DEFAULT_MAX_REJECTIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("start configuration is not a valid joint state")]
    InvalidStart,
    #[error("start configuration has {got} robots, workspace expects {expected}")]
    TeamSize { expected: usize, got: usize },
    #[error("automaton has no initial state")]
    NoInitial,
    #[error("no accepting state is reachable and on a cycle")]
    InfeasibleAutomaton,
    #[error("sampler gave up after {0} rejected samples")]
    SamplerStuck(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RrtParams {
    pub n_max_pre: usize,
    pub n_max_suf: usize,
    pub eta: f64,
    pub weight: f64,
    pub radius: RadiusMode,
    pub theta: f64,
    pub epsilon: f64,
    pub kappa: f64,
    /// Optimal-cost estimate for [`RadiusMode::Optimal`]; obtained from a
    /// practical-radius run when absent.
    pub cost_estimate: Option<f64>,
    /// Stop each tree as soon as it holds a goal node and return the first
    /// complete plan; iteration counts become caps.
    pub stop_at_first: bool,
    pub max_rejections: usize,
}

impl Default for RrtParams {
    fn default() -> Self {
        RrtParams {
            n_max_pre: 1000,
            n_max_suf: 1000,
            eta: 0.25,
            weight: 0.2,
            radius: RadiusMode::Practical,
            theta: 0.24,
            epsilon: 0.01,
            kappa: 0.01,
            cost_estimate: None,
            stop_at_first: false,
            max_rejections: DEFAULT_MAX_REJECTIONS,
        }
    }
}

impl RrtParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(format!("eta must be positive, got {}", self.eta));
        }
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(format!("weight must lie in [0, 1], got {}", self.weight));
        }
        if !(self.theta > 0.0 && self.theta < 0.25) {
            return Err(format!("theta must lie in (0, 1/4), got {}", self.theta));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) || !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err("epsilon and kappa must lie in (0, 1)".into());
        }
        if self.cost_estimate.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
            return Err("cost_estimate must be positive".into());
        }
        Ok(())
    }

    /// Radius schedule for this workspace; optimal mode needs `cost_estimate`.
    pub fn schedule(&self, ws: &Workspace) -> RadiusSchedule {
        let dim = ws.dim();
        match self.radius {
            RadiusMode::Practical => RadiusSchedule::practical(self.eta, dim, ws.free_measure()),
            RadiusMode::Zero => RadiusSchedule::zero(self.eta, dim),
            RadiusMode::Optimal => {
                let j = self.cost_estimate.expect("optimal radius needs a cost estimate");
                RadiusSchedule::optimal(self.eta, dim, ws.free_measure(), j, self.theta, self.epsilon, self.kappa)
            }
        }
    }
}

/// Straight step of length at most `eta` from `from` toward `to`.
pub fn steer(from: &[Point], to: &[Point], eta: f64) -> JointState {
    let d = cost_c(from, to);
    if d <= eta {
        return to.to_vec();
    }
    let t = eta / d;
    from.iter().zip(to).map(|(&a, &b)| a + (b - a) * t).collect()
}

/// Uniform free point for one robot, by rejection from the bounds.
pub fn sample_free_point(ws: &Workspace, rng: &mut ChaCha8Rng, budget: &mut usize) -> Result<Point, PlanError> {
    let b = ws.bounds();
    loop {
        let p = Point::new(rng.random_range(b.min.x..=b.max.x), rng.random_range(b.min.y..=b.max.y));
        if ws.point_free(p) {
            return Ok(p);
        }
        *budget = budget.checked_sub(1).ok_or(PlanError::SamplerStuck(DEFAULT_MAX_REJECTIONS))?;
    }
}

/// Independent uniform free positions for every robot; separation is not enforced.
pub fn sample_uniform(ws: &Workspace, rng: &mut ChaCha8Rng, budget: &mut usize) -> Result<JointState, PlanError> {
    (0..ws.n_robots()).map(|_| sample_free_point(ws, rng, budget)).collect()
}

/// A candidate position and nodes that must join its near set.
#[derive(Debug, Clone)]
pub struct Proposal {
    pub x_new: JointState,
    pub extra: Vec<usize>,
}

/// Source of new positions for [`grow`].
pub trait Sampler {
    /// `Ok(None)` consumes the iteration without inserting anything.
    fn propose(&mut self, tree: &Tree) -> Result<Option<Proposal>, PlanError>;

    fn inserted(&mut self, _tree: &Tree, _node: usize) {}
}

/// Uniform sampling, nearest position, steer; resampled until the new state is valid.
pub struct UniformSampler<'a> {
    ws: &'a Workspace,
    eta: f64,
    rng: ChaCha8Rng,
    max_rejections: usize,
}

impl<'a> UniformSampler<'a> {
    pub fn new(ws: &'a Workspace, eta: f64, seed: u64, max_rejections: usize) -> Self {
        UniformSampler {
            ws,
            eta,
            rng: stream(seed, Site::Uniform),
            max_rejections,
        }
    }
}

impl Sampler for UniformSampler<'_> {
    fn propose(&mut self, tree: &Tree) -> Result<Option<Proposal>, PlanError> {
        let mut budget = self.max_rejections;
        loop {
            let x_rand = sample_uniform(self.ws, &mut self.rng, &mut budget).map_err(|_| PlanError::SamplerStuck(self.max_rejections))?;
            let (c, _) = tree.nearest_class(&x_rand);
            let x_new = steer(&tree.classes()[c].x, &x_rand, self.eta);
            if self.ws.joint_state_valid(&x_new) {
                return Ok(Some(Proposal {
                    x_new,
                    extra: tree.classes()[c].nodes.clone(),
                }));
            }
            budget = budget.checked_sub(1).ok_or(PlanError::SamplerStuck(self.max_rejections))?;
        }
    }
}

/// Everything a growth run needs besides the tree and sampler.
pub struct GrowContext<'a> {
    pub ws: &'a Workspace,
    pub nba: &'a Nba,
    pub schedule: RadiusSchedule,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GrowStats {
    pub iterations: usize,
    pub inserted: usize,
    pub rewired: usize,
    /// Iteration (1-based) at which the first goal node appeared.
    pub first_goal: Option<usize>,
}

/// Called after every iteration with the tree and the iteration count.
pub type Observer<'o> = &'o mut dyn FnMut(&Tree, usize);

/// Runs up to `n_max` iterations of sample / extend / rewire.
///
/// Every valid `(x_new, b)` is tried for all automaton states `b` enabled
/// from some near node, in increasing `b`. Returns early after the first goal
/// node when `stop_at_first` is set.
pub fn grow<S: Sampler>(
    tree: &mut Tree,
    ctx: &GrowContext<'_>,
    sampler: &mut S,
    n_max: usize,
    goal: &dyn Fn(&Tree, usize) -> bool,
    stop_at_first: bool,
    observer: &mut dyn FnMut(&Tree, usize),
) -> Result<GrowStats, PlanError> {
    let mut stats = GrowStats::default();
    if goal(tree, 0) {
        stats.first_goal = Some(0);
        if stop_at_first {
            return Ok(stats);
        }
    }
    for it in 1..=n_max {
        stats.iterations = it;
        if let Some(prop) = sampler.propose(tree)? {
            let found = step(tree, ctx, sampler, prop, goal, &mut stats);
            if found && stats.first_goal.is_none() {
                stats.first_goal = Some(it);
            }
        }
        observer(tree, it);
        if stop_at_first && stats.first_goal.is_some() {
            break;
        }
    }
    Ok(stats)
}

/// One extend/rewire batch; returns whether a goal node was inserted.
fn step<S: Sampler>(
    tree: &mut Tree,
    ctx: &GrowContext<'_>,
    sampler: &mut S,
    prop: Proposal,
    goal: &dyn Fn(&Tree, usize) -> bool,
    stats: &mut GrowStats,
) -> bool {
    let Proposal { x_new, extra } = prop;
    let r = ctx.schedule.radius(tree.n_classes());
    let mut near = tree.near(&x_new, r);
    near.extend(extra);
    near.sort_unstable();
    near.dedup();

    // Straight-line validity depends only on the two positions, and is symmetric.
    let mut valid: HashMap<usize, bool> = HashMap::new();
    for &u in &near {
        let c = tree.node(u).class;
        valid.entry(c).or_insert_with(|| ctx.ws.joint_transition_valid(tree.x(u), &x_new));
    }
    let mut enabled: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &u in &near {
        if valid[&tree.node(u).class] {
            for b in ctx.nba.step(tree.node(u).q, tree.labels(u)) {
                enabled.entry(b).or_default().push(u);
            }
        }
    }
    let mut hit_goal = false;
    let existing = tree.find_class(&x_new);
    for (b, parents) in enabled {
        if existing.is_some_and(|c| tree.find_node(c, b).is_some()) {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for &u in &parents {
            let c = tree.node(u).cost + cost_c(tree.x(u), &x_new);
            if best.is_none_or(|(_, bc)| c < bc) {
                best = Some((u, c));
            }
        }
        let (parent, cost) = best.expect("parents nonempty");
        let class = tree.class_for(ctx.ws, &x_new);
        let id = tree.push(class, b, parent, cost);
        stats.inserted += 1;
        sampler.inserted(tree, id);
        hit_goal |= goal(tree, id);
        // Rewire.
        for &u in &near {
            if u == 0 || !valid[&tree.node(u).class] {
                continue;
            }
            let via = tree.node(id).cost + cost_c(&x_new, tree.x(u));
            if tree.node(u).cost > via && ctx.nba.can_step(b, tree.labels(id), tree.node(u).q) {
                tree.reparent(u, id, via);
                stats.rewired += 1;
            }
        }
    }
    hit_goal
}

/// Accepting automaton state: the prefix goal.
pub fn prefix_goal(nba: &Nba, tree: &Tree, id: usize) -> bool {
    nba.is_accepting(tree.node(id).q)
}

/// Node `id` can close the cycle with a single transition into the root.
pub fn suffix_goal(ws: &Workspace, nba: &Nba, tree: &Tree, id: usize) -> bool {
    nba.can_step(tree.node(id).q, tree.labels(id), tree.node(0).q) && ws.joint_transition_valid(tree.x(id), tree.x(0))
}

/// Positions and automaton states along the root path of `id`.
pub fn find_plan(tree: &Tree, id: usize) -> (Vec<JointState>, Vec<usize>) {
    let path = tree.path_to(id);
    (path.iter().map(|&n| tree.x(n).clone()).collect(), path.iter().map(|&n| tree.node(n).q).collect())
}

/// Outcome of a planning run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanReport {
    /// Cheapest verified plan found, if any.
    pub plan: Option<Plan>,
    /// `|P|`: goal nodes of the prefix tree(s).
    pub prefix_goals: usize,
    pub prefix_nodes: usize,
    pub prefix_iterations: usize,
    pub suffix_iterations: usize,
    /// Prefix iteration at which the first accepting node appeared.
    pub first_goal_iteration: Option<usize>,
    /// Plans rejected by the verifier or suffix attempts that failed.
    pub notes: Vec<String>,
}

pub(crate) fn check_start(ws: &Workspace, nba: &Nba, x0: &[Point]) -> Result<(), PlanError> {
    if x0.len() != ws.n_robots() {
        return Err(PlanError::TeamSize {
            expected: ws.n_robots(),
            got: x0.len(),
        });
    }
    if !ws.joint_state_valid(x0) {
        return Err(PlanError::InvalidStart);
    }
    if nba.initial().is_empty() {
        return Err(PlanError::NoInitial);
    }
    let dist = nba.distance_table();
    if nba.initial().iter().all(|&q| nba.feasible_accepting(&dist, q).is_empty()) {
        return Err(PlanError::InfeasibleAutomaton);
    }
    Ok(())
}

/// Assembles and verifies; keeps it in `best` if cheaper.
pub(crate) fn offer(report: &mut PlanReport, ws: &Workspace, nba: &Nba, plan: Plan) -> bool {
    match verify_plan(&plan, nba, ws) {
        Ok(()) => {
            if report.plan.as_ref().is_none_or(|b| plan.cost < b.cost) {
                report.plan = Some(plan);
            }
            true
        }
        Err(d) => {
            report.notes.push(format!("assembled plan rejected: {d}"));
            false
        }
    }
}

/// Unbiased planner: prefix tree per initial state, then a suffix tree per
/// accepting node unless its automaton state loops under its own label.
pub fn plan_unbiased(ws: &Workspace, nba: &Nba, x0: &[Point], params: &RrtParams, seed: u64, observer: Option<Observer<'_>>) -> Result<PlanReport, PlanError> {
    check_start(ws, nba, x0)?;
    let mut noop = |_: &Tree, _: usize| {};
    let observer: &mut dyn FnMut(&Tree, usize) = match observer {
        Some(o) => o,
        None => &mut noop,
    };
    let mut params = params.clone();
    if params.radius == RadiusMode::Optimal && params.cost_estimate.is_none() {
        let mut pilot = params.clone();
        pilot.radius = RadiusMode::Practical;
        pilot.stop_at_first = true;
        let est = plan_unbiased(ws, nba, x0, &pilot, derive_seed(seed, u64::MAX), None)?;
        params.cost_estimate = Some(est.plan.map_or(ws.bounds().width() + ws.bounds().height(), |p| p.cost.max(1e-9)));
    }
    let ctx = GrowContext {
        ws,
        nba,
        schedule: params.schedule(ws),
    };
    let mut report = PlanReport::default();
    let mut initial = nba.initial().to_vec();
    initial.sort_unstable();
    for (qi, &q0) in initial.iter().enumerate() {
        let tree_seed = derive_seed(seed, qi as u64);
        let mut tree = Tree::new(ws, x0.to_vec(), q0);
        let mut sampler = UniformSampler::new(ws, params.eta, tree_seed, params.max_rejections);
        let goal = |t: &Tree, id: usize| prefix_goal(nba, t, id);
        let stats = grow(&mut tree, &ctx, &mut sampler, params.n_max_pre, &goal, params.stop_at_first, &mut *observer)?;
        report.prefix_iterations += stats.iterations;
        report.prefix_nodes += tree.len();
        if report.first_goal_iteration.is_none() {
            report.first_goal_iteration = stats.first_goal;
        }
        let goals: Vec<usize> = (0..tree.len()).filter(|&id| prefix_goal(nba, &tree, id)).collect();
        report.prefix_goals += goals.len();
        for (ai, &a) in goals.iter().enumerate() {
            let (prefix, prefix_q) = find_plan(&tree, a);
            let anchor = tree.x(a).clone();
            let qa = tree.node(a).q;
            if nba.can_step(qa, tree.labels(a), qa) {
                offer(&mut report, ws, nba, Plan::new(prefix, prefix_q, vec![], vec![], params.weight));
            } else {
                let suf_seed = derive_seed(tree_seed, 1 + ai as u64);
                let mut st = Tree::new(ws, anchor.clone(), qa);
                let mut sampler = UniformSampler::new(ws, params.eta, suf_seed, params.max_rejections);
                let goal = |t: &Tree, id: usize| id != 0 && suffix_goal(ws, nba, t, id);
                let s = grow(&mut st, &ctx, &mut sampler, params.n_max_suf, &goal, params.stop_at_first, &mut *observer)?;
                report.suffix_iterations += s.iterations;
                let best = (1..st.len())
                    .filter(|&e| suffix_goal(ws, nba, &st, e))
                    .map(|e| (e, st.node(e).cost + cost_c(st.x(e), &anchor)))
                    .fold(None, |b: Option<(usize, f64)>, (e, c)| if b.is_none_or(|(_, bc)| c < bc) { Some((e, c)) } else { b });
                match best {
                    Some((e, _)) => {
                        let (mut cyc, mut cyc_q) = find_plan(&st, e);
                        cyc.remove(0);
                        cyc_q.remove(0);
                        offer(&mut report, ws, nba, Plan::new(prefix, prefix_q, cyc, cyc_q, params.weight));
                    }
                    None => report.notes.push(format!("no suffix cycle for prefix goal node {a}")),
                }
            }
            if params.stop_at_first && report.plan.is_some() {
                return Ok(report);
            }
        }
    }
    Ok(report)
}
