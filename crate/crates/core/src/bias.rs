//! Automaton-guided sampling: pick a promising tree node, a two-hop target in
//! the automaton, a clause of the target guard, and sample each robot toward
//! the region the clause asks for.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal};
use serde::{Deserialize, Serialize};

use crate::buchi::{DistanceTable, Nba};
use crate::formula::{DnfClause, RobotLabels};
use crate::geometry::{GeodesicField, Point, Polygon, Workspace};
use crate::product::{cost_c, JointState, Plan};
use crate::rng::{derive_seed, stream, Site};
use crate::rrt::{
    check_start, find_plan, grow, offer, prefix_goal, sample_free_point, steer, suffix_goal, GrowContext, Observer, PlanError, PlanReport,
    Proposal, RadiusMode, RrtParams, Sampler, Tree, UniformSampler,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClauseMode {
    Random,
    #[default]
    MinLength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasParams {
    pub p_closest: f64,
    pub p_idle: f64,
    pub y_rand: f64,
    pub mu_d: f64,
    pub sigma_d: f64,
    pub mu_alpha: f64,
    pub sigma_alpha: f64,
    /// Fixed UG parameter. When absent each set uses `1 / |set|`.
    pub p_ug: Option<f64>,
    pub clause_mode: ClauseMode,
    /// Redraws of a Gaussian sample that lands in an obstacle before falling back to uniform.
    pub gaussian_retries: usize,
    /// RRT* iterations per robot when closing a suffix cycle.
    pub closure_iterations: usize,
    /// Closure attempts per suffix tree, cheapest lower bound first.
    pub max_closures: usize,
}

impl Default for BiasParams {
    fn default() -> Self {
        BiasParams {
            p_closest: 0.9,
            p_idle: 1.0,
            y_rand: 0.99,
            mu_d: 0.0,
            sigma_d: 1.0 / 3.0,
            mu_alpha: 0.0,
            sigma_alpha: std::f64::consts::PI / 108.0,
            p_ug: None,
            clause_mode: ClauseMode::MinLength,
            gaussian_retries: 50,
            closure_iterations: 1000,
            max_closures: 8,
        }
    }
}

impl BiasParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.p_closest > 0.5 && self.p_closest < 1.0) {
            return Err(format!("p_closest must lie in (0.5, 1), got {}", self.p_closest));
        }
        if !(0.0..=1.0).contains(&self.p_idle) {
            return Err(format!("p_idle must lie in [0, 1], got {}", self.p_idle));
        }
        if !(self.y_rand > 0.5 && self.y_rand < 1.0) {
            return Err(format!("y_rand must lie in (0.5, 1), got {}", self.y_rand));
        }
        if !(self.sigma_d >= 0.0 && self.sigma_d.is_finite() && self.sigma_alpha >= 0.0 && self.sigma_alpha.is_finite()) {
            return Err("standard deviations must be finite and non-negative".into());
        }
        if !(self.mu_d.is_finite() && self.mu_alpha.is_finite()) {
            return Err("means must be finite".into());
        }
        if self.p_ug.is_some_and(|p| !(p > 0.0 && p < 1.0)) {
            return Err("p_ug must lie in (0, 1)".into());
        }
        Ok(())
    }
}

/// UG probability of rank `i >= 1`.
///
/// Uses the recurrence from rank 1 while it is well conditioned, and sums the
/// defining tail series directly deep in the tail where the recurrence would
/// cancel to noise.
pub fn ug_pmf(i: usize, p: f64) -> f64 {
    assert!(i >= 1, "ranks start at 1");
    if p >= 1.0 {
        return if i == 1 { 1.0 } else { 0.0 };
    }
    let r = 1.0 - p;
    let head = r.powi(i as i32 - 1);
    if head < 1e-3 {
        let (mut sum, mut term, mut n) = (0.0, p * head, i as f64);
        while term / n > sum * 1e-17 {
            sum += term / n;
            term *= r;
            n += 1.0;
        }
        return sum;
    }
    let mut prob = -p * p.ln() / r;
    let mut tail = p; // p (1-p)^(k-1)
    for k in 1..i {
        prob -= tail / k as f64;
        tail *= r;
    }
    prob.max(0.0)
}

/// Rank in `1..=n` drawn from the UG distribution conditioned on `rank <= n`.
///
/// UG is a geometric length followed by a uniform pick below it, so the draw is
/// exact by rejection; small sets use the inverse CDF instead.
pub fn ug_sample_finite(n: usize, p: f64, rng: &mut impl Rng) -> usize {
    assert!(n >= 1);
    if n == 1 || p >= 1.0 {
        return 1;
    }
    if n > 64 {
        let geo = Geometric::new(p).expect("p in (0, 1)");
        for _ in 0..10_000 {
            let k = geo.sample(rng).saturating_add(1);
            let i = rng.random_range(1..=k);
            if i as usize <= n {
                return i as usize;
            }
        }
    }
    let pmf: Vec<f64> = (1..=n).map(|k| ug_pmf(k, p)).collect();
    let total: f64 = pmf.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, w) in pmf.iter().enumerate() {
        if u < *w {
            return k + 1;
        }
        u -= w;
    }
    n
}

/// Hop distance toward a fixed automaton state.
pub trait AutomatonDistance {
    /// Distance from `q` to the target; `0` at the target itself.
    fn to_target(&self, q: usize) -> Option<u32>;

    /// Like `to_target`, but at the target it is the length of the way back around.
    fn around(&self, q: usize) -> Option<u32>;
}

/// Shortest hop counts in the automaton graph.
#[derive(Debug, Clone, Copy)]
pub struct HopDistance<'a> {
    pub table: &'a DistanceTable,
    pub target: usize,
}

impl AutomatonDistance for HopDistance<'_> {
    fn to_target(&self, q: usize) -> Option<u32> {
        self.table.get(q, self.target)
    }

    fn around(&self, q: usize) -> Option<u32> {
        self.table.get_cyclic(q, self.target)
    }
}

/// Nodes of minimal distance, and the rest, each in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DminSet {
    rho: u32,
    members: Vec<usize>,
    rest: Vec<usize>,
}

impl DminSet {
    /// Set holding only the root; `None` distances rank last.
    pub fn new(root_rho: Option<u32>) -> Self {
        DminSet {
            rho: root_rho.unwrap_or(u32::MAX),
            members: vec![0],
            rest: Vec::new(),
        }
    }

    /// Adds a node; ids must arrive in increasing order.
    pub fn insert(&mut self, id: usize, rho: Option<u32>) {
        let r = rho.unwrap_or(u32::MAX);
        if r < self.rho {
            // Old members are all older than `id`; merge keeps `rest` sorted.
            let old = std::mem::take(&mut self.members);
            let mut merged = Vec::with_capacity(self.rest.len() + old.len());
            let (mut i, mut j) = (0, 0);
            while i < self.rest.len() || j < old.len() {
                if j == old.len() || (i < self.rest.len() && self.rest[i] < old[j]) {
                    merged.push(self.rest[i]);
                    i += 1;
                } else {
                    merged.push(old[j]);
                    j += 1;
                }
            }
            self.rest = merged;
            self.rho = r;
            self.members.push(id);
        } else if r == self.rho {
            self.members.push(id);
        } else {
            self.rest.push(id);
        }
    }

    pub fn rho(&self) -> Option<u32> {
        (self.rho != u32::MAX).then_some(self.rho)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn rest(&self) -> &[usize] {
        &self.rest
    }
}

/// Node whose position and automaton state get extended next.
pub fn sample_closest(dmin: &DminSet, p_closest: f64, p_ug: Option<f64>, rng: &mut impl Rng) -> usize {
    let use_min = dmin.rest.is_empty() || (!dmin.members.is_empty() && rng.random::<f64>() < p_closest);
    let set = if use_min { &dmin.members } else { &dmin.rest };
    let p = p_ug.unwrap_or(1.0 / set.len() as f64);
    let rank = ug_sample_finite(set.len(), p, rng);
    set[set.len() - rank]
}

/// All two-hop targets `(q1, q2)` from `q` under `labels` that move toward the target.
///
/// `q1` must be enabled now and strictly closer than `q` (equal distance is
/// allowed when nothing is closer); `q2` must be a successor of `q1` strictly
/// closer than `q1`, measuring `q1` the long way round if it is the target.
pub fn successor_pairs<D: AutomatonDistance + ?Sized>(nba: &Nba, q: usize, labels: &RobotLabels, dist: &D) -> Vec<(usize, usize)> {
    let Some(cur) = dist.around(q) else {
        return Vec::new();
    };
    let first: Vec<(usize, u32)> = nba.step(q, labels).into_iter().filter_map(|s| dist.to_target(s).map(|d| (s, d))).collect();
    let closer: Vec<usize> = first.iter().filter(|&&(_, d)| d < cur).map(|&(s, _)| s).collect();
    let q1s = if closer.is_empty() {
        first.iter().filter(|&&(_, d)| d == cur).map(|&(s, _)| s).collect()
    } else {
        closer
    };
    let mut pairs = Vec::new();
    for s1 in q1s {
        let Some(d1) = dist.around(s1) else { continue };
        let mut next: Vec<usize> = nba.out_edges(s1).map(|e| e.dst).filter(|&s2| dist.to_target(s2).is_some_and(|d| d < d1)).collect();
        next.sort_unstable();
        pairs.extend(next.into_iter().map(|s2| (s1, s2)));
    }
    pairs
}

/// Uniform choice among [`successor_pairs`].
pub fn select_successors<D: AutomatonDistance + ?Sized>(
    nba: &Nba,
    q: usize,
    labels: &RobotLabels,
    dist: &D,
    rng: &mut impl Rng,
) -> Option<(usize, usize)> {
    successor_pairs(nba, q, labels, dist).choose(rng).copied()
}

/// One clause of a guard in DNF.
pub fn select_clause<'c>(clauses: &'c [DnfClause], mode: ClauseMode, rng: &mut impl Rng) -> Option<&'c DnfClause> {
    match mode {
        ClauseMode::Random => clauses.choose(rng),
        ClauseMode::MinLength => clauses.iter().min_by(|a, b| (a.pos.len(), &a.pos).cmp(&(b.pos.len(), &b.pos))),
    }
}

/// Region each robot must reach for `clause`; `None` when a robot is asked to be in two places.
pub fn region_assignment(clause: &DnfClause, n_robots: usize) -> Option<Vec<Option<u32>>> {
    let mut out = vec![None; n_robots];
    for a in &clause.pos {
        let slot = out.get_mut(a.robot as usize - 1)?;
        if slot.is_some_and(|r| r != a.region) {
            return None;
        }
        *slot = Some(a.region);
    }
    Some(out)
}

/// How often each branch of the sampler fired.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BiasCounters {
    pub proposals: usize,
    pub no_successor: usize,
    pub idle: usize,
    pub gaussian: usize,
    pub gaussian_fallback: usize,
    pub uniform: usize,
    pub unreachable_target: usize,
    pub invalid: usize,
}

/// Sampler for [`grow`] steering toward a fixed automaton state.
pub struct BiasedSampler<'a> {
    ws: &'a Workspace,
    nba: &'a Nba,
    dist: HopDistance<'a>,
    fields: &'a [GeodesicField],
    params: BiasParams,
    eta: f64,
    max_rejections: usize,
    dmin: DminSet,
    normal_d: Normal<f64>,
    normal_a: Normal<f64>,
    rng_closest: ChaCha8Rng,
    rng_succ: ChaCha8Rng,
    rng_clause: ChaCha8Rng,
    rng_idle: ChaCha8Rng,
    rng_branch: ChaCha8Rng,
    rng_gauss: ChaCha8Rng,
    rng_uniform: ChaCha8Rng,
    pub counters: BiasCounters,
}

impl<'a> BiasedSampler<'a> {
    /// `fields[j - 1]` must lead to region `j`. The root is ranked with the
    /// cyclic distance when `cyclic_root` is set (suffix trees).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ws: &'a Workspace,
        nba: &'a Nba,
        dist: HopDistance<'a>,
        fields: &'a [GeodesicField],
        params: &BiasParams,
        eta: f64,
        seed: u64,
        max_rejections: usize,
        tree: &Tree,
        cyclic_root: bool,
    ) -> Self {
        let q0 = tree.node(0).q;
        let root_rho = if cyclic_root { dist.around(q0) } else { dist.to_target(q0) };
        let mut dmin = DminSet::new(root_rho);
        for id in 1..tree.len() {
            dmin.insert(id, dist.to_target(tree.node(id).q));
        }
        BiasedSampler {
            ws,
            nba,
            dist,
            fields,
            params: params.clone(),
            eta,
            max_rejections,
            dmin,
            normal_d: Normal::new(params.mu_d, params.sigma_d).expect("valid sigma_d"),
            normal_a: Normal::new(params.mu_alpha, params.sigma_alpha).expect("valid sigma_alpha"),
            rng_closest: stream(seed, Site::ClosestNode),
            rng_succ: stream(seed, Site::Successors),
            rng_clause: stream(seed, Site::Clause),
            rng_idle: stream(seed, Site::Idle),
            rng_branch: stream(seed, Site::Branch),
            rng_gauss: stream(seed, Site::Gaussian),
            rng_uniform: stream(seed, Site::Uniform),
            counters: BiasCounters::default(),
        }
    }

    pub fn dmin(&self) -> &DminSet {
        &self.dmin
    }

    fn uniform_point(&mut self) -> Result<Point, PlanError> {
        let mut budget = self.max_rejections;
        self.counters.uniform += 1;
        sample_free_point(self.ws, &mut self.rng_uniform, &mut budget).map_err(|_| PlanError::SamplerStuck(self.max_rejections))
    }

    /// Sample for one robot at `from` that should head for region `region`.
    fn toward(&mut self, from: Point, region: u32) -> Result<Point, PlanError> {
        let field = &self.fields[region as usize - 1];
        let Some(target) = field.next_vertex(self.ws, from) else {
            self.counters.unreachable_target += 1;
            return self.uniform_point();
        };
        let dir = target - from;
        let base = if dir.norm() > 1e-12 { dir.y.atan2(dir.x) } else { 0.0 };
        for _ in 0..=self.params.gaussian_retries {
            let d = self.normal_d.sample(&mut self.rng_gauss).abs();
            let a = base + self.normal_a.sample(&mut self.rng_gauss);
            let p = Point::new(from.x + d * a.cos(), from.y + d * a.sin());
            if self.ws.point_free(p) {
                self.counters.gaussian += 1;
                return Ok(p);
            }
        }
        self.counters.gaussian_fallback += 1;
        self.uniform_point()
    }

    /// `x_rand` for the given closest position and per-robot region targets.
    pub fn sample_toward(&mut self, x_closest: &[Point], assignment: &[Option<u32>]) -> Result<JointState, PlanError> {
        let mut x_rand = Vec::with_capacity(x_closest.len());
        for (&from, target) in x_closest.iter().zip(assignment) {
            let p = match *target {
                None => {
                    if self.rng_idle.random::<f64>() < self.params.p_idle {
                        self.counters.idle += 1;
                        from
                    } else {
                        self.uniform_point()?
                    }
                }
                Some(j) => {
                    if self.rng_branch.random::<f64>() <= self.params.y_rand {
                        self.toward(from, j)?
                    } else {
                        self.uniform_point()?
                    }
                }
            };
            x_rand.push(p);
        }
        Ok(x_rand)
    }
}

impl Sampler for BiasedSampler<'_> {
    fn propose(&mut self, tree: &Tree) -> Result<Option<Proposal>, PlanError> {
        self.counters.proposals += 1;
        let id = sample_closest(&self.dmin, self.params.p_closest, self.params.p_ug, &mut self.rng_closest);
        let q = tree.node(id).q;
        let Some((s1, s2)) = select_successors(self.nba, q, tree.labels(id), &self.dist, &mut self.rng_succ) else {
            self.counters.no_successor += 1;
            return Ok(None);
        };
        let edge = self.nba.edge(s1, s2).expect("successor pair is an edge");
        let Some(assignment) =
            select_clause(&edge.clauses, self.params.clause_mode, &mut self.rng_clause).and_then(|c| region_assignment(c, self.ws.n_robots()))
        else {
            self.counters.no_successor += 1;
            return Ok(None);
        };
        let x_closest = tree.x(id).clone();
        let x_rand = self.sample_toward(&x_closest, &assignment)?;
        let x_new = steer(&x_closest, &x_rand, self.eta);
        if !self.ws.joint_state_valid(&x_new) {
            self.counters.invalid += 1;
            return Ok(None);
        }
        Ok(Some(Proposal { x_new, extra: vec![id] }))
    }

    fn inserted(&mut self, tree: &Tree, node: usize) {
        self.dmin.insert(node, self.dist.to_target(tree.node(node).q));
    }
}

/// Closes suffix cycles by per-robot RRT* with labeled regions as obstacles.
pub struct CycleCloser {
    free: Workspace,
    iterations: usize,
    eta: f64,
}

impl CycleCloser {
    pub fn new(ws: &Workspace, iterations: usize, eta: f64) -> Self {
        let mut obstacles: Vec<Polygon> = ws.obstacles().to_vec();
        obstacles.extend(ws.regions().iter().map(|r| r.polygon.clone()));
        let free = Workspace::new(ws.bounds(), obstacles, Vec::new(), 1, 0.0, ws.separation_norm()).expect("derived workspace is valid");
        CycleCloser { free, iterations, eta }
    }

    /// Workspace in which the closing paths are planned.
    pub fn free_space(&self) -> &Workspace {
        &self.free
    }

    /// Path `[a, .., b]` for one robot.
    pub fn robot_path(&self, a: Point, b: Point, seed: u64) -> Result<Vec<Point>, String> {
        if a == b {
            return Ok(vec![a]);
        }
        if !self.free.point_free(a) || !self.free.point_free(b) {
            return Err("closure endpoint lies in an obstacle or inside a labeled region".into());
        }
        if self.free.segment_free(a, b) {
            return Ok(vec![a, b]);
        }
        let nba = Nba::universal();
        let ctx = GrowContext {
            ws: &self.free,
            nba: &nba,
            schedule: RrtParams::default().schedule(&self.free),
        };
        let mut tree = Tree::new(&self.free, vec![a], 0);
        let mut sampler = UniformSampler::new(&self.free, self.eta, seed, crate::rrt::DEFAULT_MAX_REJECTIONS);
        grow(&mut tree, &ctx, &mut sampler, self.iterations, &|_, _| false, false, &mut |_, _| {}).map_err(|e| e.to_string())?;
        let best = (0..tree.len())
            .filter(|&n| self.free.segment_free(tree.x(n)[0], b))
            .map(|n| (n, tree.node(n).cost + tree.x(n)[0].dist(b)))
            .fold(None, |acc: Option<(usize, f64)>, (n, c)| if acc.is_none_or(|(_, bc)| c < bc) { Some((n, c)) } else { acc });
        let (n, _) = best.ok_or("closure tree never sees the endpoint")?;
        let mut path: Vec<Point> = tree.path_to(n).into_iter().map(|k| tree.x(k)[0]).collect();
        path.push(b);
        Ok(path)
    }

    /// Joint waypoints `[x_from, .., x_to]`; robots that arrive early idle.
    pub fn close(&self, x_from: &[Point], x_to: &[Point], seed: u64) -> Result<Vec<JointState>, String> {
        let paths = x_from
            .iter()
            .zip(x_to)
            .enumerate()
            .map(|(i, (&a, &b))| self.robot_path(a, b, derive_seed(seed, i as u64)).map_err(|e| format!("robot {}: {e}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let m = paths.iter().map(Vec::len).max().unwrap_or(1);
        Ok((0..m).map(|k| paths.iter().map(|p| p[k.min(p.len() - 1)]).collect()).collect())
    }
}

/// One-shot form of [`CycleCloser::close`].
pub fn suffix_cycle_close(ws: &Workspace, x_from: &[Point], x_to: &[Point], iterations: usize, eta: f64, seed: u64) -> Result<Vec<JointState>, String> {
    CycleCloser::new(ws, iterations, eta).close(x_from, x_to, seed)
}

/// Biased planner: prefix tree toward one randomly chosen feasible accepting
/// state, then biased suffix trees closed either by a single transition or by
/// region-avoiding paths back to the accepting position.
pub fn plan_biased(
    ws: &Workspace,
    nba: &Nba,
    x0: &[Point],
    params: &RrtParams,
    bias: &BiasParams,
    seed: u64,
    observer: Option<Observer<'_>>,
) -> Result<PlanReport, PlanError> {
    check_start(ws, nba, x0)?;
    let mut noop = |_: &Tree, _: usize| {};
    let observer: &mut dyn FnMut(&Tree, usize) = match observer {
        Some(o) => o,
        None => &mut noop,
    };
    let pruned = nba.prune(|a, b| ws.regions_disjoint(a, b));
    let table = pruned.distance_table();
    let mut initial = pruned.initial().to_vec();
    initial.sort_unstable();
    if initial.iter().all(|&q| pruned.feasible_accepting(&table, q).is_empty()) {
        return Err(PlanError::InfeasibleAutomaton);
    }
    let mut params = params.clone();
    if params.radius == RadiusMode::Optimal && params.cost_estimate.is_none() {
        let mut pilot = params.clone();
        pilot.radius = RadiusMode::Practical;
        pilot.stop_at_first = true;
        let est = plan_biased(ws, nba, x0, &pilot, bias, derive_seed(seed, u64::MAX), None)?;
        params.cost_estimate = Some(est.plan.map_or(ws.bounds().width() + ws.bounds().height(), |p| p.cost.max(1e-9)));
    }
    let ctx = GrowContext {
        ws,
        nba: &pruned,
        schedule: params.schedule(ws),
    };
    let fields: Vec<GeodesicField> = (1..=ws.n_regions() as u32).map(|j| ws.region_field(j)).collect();
    let closer = CycleCloser::new(ws, bias.closure_iterations, params.eta);
    let mut report = PlanReport::default();
    for (qi, &q0) in initial.iter().enumerate() {
        let feasible = pruned.feasible_accepting(&table, q0);
        if feasible.is_empty() {
            continue;
        }
        let tree_seed = derive_seed(seed, qi as u64);
        let q_f = *feasible.choose(&mut stream(tree_seed, Site::Target)).expect("nonempty");
        let mut tree = Tree::new(ws, x0.to_vec(), q0);
        let dist = HopDistance { table: &table, target: q_f };
        let mut sampler = BiasedSampler::new(ws, &pruned, dist, &fields, bias, params.eta, tree_seed, params.max_rejections, &tree, false);
        let goal = |t: &Tree, id: usize| prefix_goal(&pruned, t, id);
        let stats = grow(&mut tree, &ctx, &mut sampler, params.n_max_pre, &goal, params.stop_at_first, &mut *observer)?;
        report.prefix_iterations += stats.iterations;
        report.prefix_nodes += tree.len();
        if report.first_goal_iteration.is_none() {
            report.first_goal_iteration = stats.first_goal;
        }
        let goals: Vec<usize> = (0..tree.len()).filter(|&id| prefix_goal(&pruned, &tree, id)).collect();
        report.prefix_goals += goals.len();
        for (ai, &a) in goals.iter().enumerate() {
            let (prefix, prefix_q) = find_plan(&tree, a);
            let qa = tree.node(a).q;
            if pruned.can_step(qa, tree.labels(a), qa) {
                offer(&mut report, ws, nba, Plan::new(prefix, prefix_q, vec![], vec![], params.weight));
            } else {
                let suf = SuffixRun {
                    ws,
                    nba,
                    pruned: &pruned,
                    table: &table,
                    fields: &fields,
                    closer: &closer,
                    ctx: &ctx,
                    params: &params,
                    bias,
                };
                let found = suf.run(&mut report, &prefix, &prefix_q, derive_seed(tree_seed, 1 + ai as u64), &mut *observer)?;
                if !found {
                    report.notes.push(format!("no suffix cycle for prefix goal node {a}"));
                }
            }
            if params.stop_at_first && report.plan.is_some() {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

struct SuffixRun<'r> {
    ws: &'r Workspace,
    nba: &'r Nba,
    pruned: &'r Nba,
    table: &'r DistanceTable,
    fields: &'r [GeodesicField],
    closer: &'r CycleCloser,
    ctx: &'r GrowContext<'r>,
    params: &'r RrtParams,
    bias: &'r BiasParams,
}

impl SuffixRun<'_> {
    /// Grows a suffix tree at the end of `prefix` and offers every cycle it closes.
    fn run(
        &self,
        report: &mut PlanReport,
        prefix: &[JointState],
        prefix_q: &[usize],
        seed: u64,
        observer: &mut dyn FnMut(&Tree, usize),
    ) -> Result<bool, PlanError> {
        let anchor = prefix.last().expect("nonempty prefix").clone();
        let qa = *prefix_q.last().expect("nonempty prefix");
        let mut st = Tree::new(self.ws, anchor.clone(), qa);
        let dist = HopDistance { table: self.table, target: qa };
        let mut sampler = BiasedSampler::new(self.ws, self.pruned, dist, self.fields, self.bias, self.params.eta, seed, self.params.max_rejections, &st, true);
        let direct = |t: &Tree, id: usize| id != 0 && suffix_goal(self.ws, self.pruned, t, id);
        // Closure paths treat regions as obstacles, so both ends must lie outside them.
        let outside = |x: &[Point]| x.iter().all(|&p| self.closer.free_space().point_free(p));
        let anchor_outside = outside(&anchor);
        let closable = |t: &Tree, id: usize| anchor_outside && id != 0 && t.node(id).q == qa && outside(t.x(id));
        let goal = |t: &Tree, id: usize| direct(t, id) || closable(t, id);
        let mut remaining = self.params.n_max_suf;
        let mut seen = 1;
        let mut closures = 0;
        let mut found = false;
        loop {
            let s = grow(&mut st, self.ctx, &mut sampler, remaining, &goal, self.params.stop_at_first, &mut *observer)?;
            report.suffix_iterations += s.iterations;
            remaining -= s.iterations;
            // Single-transition closures first, then region-avoiding ones by lower bound.
            let mut pending: Vec<(f64, usize)> = Vec::new();
            for e in seen..st.len() {
                if direct(&st, e) {
                    let (mut cyc, mut cyc_q) = find_plan(&st, e);
                    cyc.remove(0);
                    cyc_q.remove(0);
                    found |= offer(report, self.ws, self.nba, Plan::new(prefix.to_vec(), prefix_q.to_vec(), cyc, cyc_q, self.params.weight));
                } else if closable(&st, e) {
                    pending.push((st.node(e).cost + cost_c(st.x(e), &anchor), e));
                }
            }
            seen = st.len();
            pending.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (_, e) in pending {
                if closures >= self.bias.max_closures {
                    break;
                }
                closures += 1;
                match self.closer.close(st.x(e), &anchor, derive_seed(seed, e as u64)) {
                    Ok(path) => {
                        let (mut cyc, mut cyc_q) = find_plan(&st, e);
                        cyc.remove(0);
                        cyc_q.remove(0);
                        let inner = &path[1..path.len() - 1];
                        cyc.extend(inner.iter().cloned());
                        cyc_q.extend(std::iter::repeat_n(qa, inner.len()));
                        found |= offer(report, self.ws, self.nba, Plan::new(prefix.to_vec(), prefix_q.to_vec(), cyc, cyc_q, self.params.weight));
                    }
                    Err(msg) => report.notes.push(format!("cycle closure from suffix node {e} failed: {msg}")),
                }
            }
            if !self.params.stop_at_first || found || remaining == 0 {
                return Ok(found);
            }
        }
    }
}
