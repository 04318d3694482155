//! Oracles shared by the integration tests. Nothing here calls into the
//! automaton code: formulas are judged directly on lasso words.
#![allow(dead_code)]

pub mod automata;
pub mod geo;
pub mod stats;

use std::collections::BTreeSet;

use tlrrt::buchi::{ltl_to_nba, Nba};
use tlrrt::formula::{parse_ltl, parse_prop, Atom, LtlFormula, PropFormula};
use tlrrt::geometry::Workspace;
use tlrrt::product::Plan;
use tlrrt::rrt::Tree;
use tlrrt::scenario::Scenario;

pub type Letter = BTreeSet<Atom>;

/// Truth of `f` at every position of the lasso `prefix . cycle^w`.
///
/// Positions past the prefix fold onto the cycle, so a word has
/// `prefix.len() + cycle.len()` distinct suffixes. Until is a least fixpoint
/// and release a greatest one, both reached after at most `n` sweeps.
pub fn holds_everywhere(f: &LtlFormula, prefix: &[Letter], cycle: &[Letter]) -> Vec<bool> {
    assert!(!cycle.is_empty());
    let n = prefix.len() + cycle.len();
    let succ = |i: usize| if i + 1 == n { prefix.len() } else { i + 1 };
    let at = |i: usize| if i < prefix.len() { &prefix[i] } else { &cycle[i - prefix.len()] };
    let until = |a: Vec<bool>, b: Vec<bool>| {
        let mut v = b.clone();
        loop {
            let next: Vec<bool> = (0..n).map(|i| b[i] || (a[i] && v[succ(i)])).collect();
            if next == v {
                return v;
            }
            v = next;
        }
    };
    let release = |a: Vec<bool>, b: Vec<bool>| {
        let mut v = b.clone();
        loop {
            let next: Vec<bool> = (0..n).map(|i| b[i] && (a[i] || v[succ(i)])).collect();
            if next == v {
                return v;
            }
            v = next;
        }
    };
    let rec = |g: &LtlFormula| holds_everywhere(g, prefix, cycle);
    match f {
        LtlFormula::True => vec![true; n],
        LtlFormula::False => vec![false; n],
        LtlFormula::Atom(a) => (0..n).map(|i| at(i).contains(a)).collect(),
        LtlFormula::Not(g) => rec(g).iter().map(|b| !b).collect(),
        LtlFormula::And(a, b) => rec(a).iter().zip(rec(b)).map(|(x, y)| *x && y).collect(),
        LtlFormula::Or(a, b) => rec(a).iter().zip(rec(b)).map(|(x, y)| *x || y).collect(),
        LtlFormula::Until(a, b) => until(rec(a), rec(b)),
        LtlFormula::Release(a, b) => release(rec(a), rec(b)),
        LtlFormula::Eventually(g) => until(vec![true; n], rec(g)),
        LtlFormula::Always(g) => release(vec![false; n], rec(g)),
    }
}

pub fn holds(f: &LtlFormula, prefix: &[Letter], cycle: &[Letter]) -> bool {
    holds_everywhere(f, prefix, cycle)[0]
}

/// Every lasso with `1 <= prefix + cycle <= max_len` over subsets of `atoms`.
pub fn all_lassos(atoms: &[Atom], max_len: usize) -> Vec<(Vec<Letter>, Vec<Letter>)> {
    let k = 1usize << atoms.len();
    let letters: Vec<Letter> = (0..k).map(|m| atoms.iter().enumerate().filter(|(b, _)| m >> b & 1 == 1).map(|(_, a)| *a).collect()).collect();
    let mut out = Vec::new();
    for total in 1..=max_len {
        let count = k.pow(total as u32);
        for code in 0..count {
            let word: Vec<Letter> = (0..total).map(|i| letters[code / k.pow(i as u32) % k].clone()).collect();
            for cyc in 1..=total {
                let pre = total - cyc;
                out.push((word[..pre].to_vec(), word[pre..].to_vec()));
            }
        }
    }
    out
}

/// Whether the plan's label word satisfies `f`, judged without the automaton.
pub fn plan_satisfies(ws: &Workspace, f: &LtlFormula, plan: &Plan) -> bool {
    let letter = |x: &[tlrrt::geometry::Point]| -> Letter {
        x.iter()
            .enumerate()
            .filter_map(|(i, &p)| ws.label_of(p).map(|j| Atom::new(i as u32 + 1, j)))
            .collect()
    };
    let k = plan.prefix.len() - 1;
    let prefix: Vec<Letter> = plan.prefix[..k].iter().map(|x| letter(x)).collect();
    let mut cycle = vec![letter(plan.anchor())];
    cycle.extend(plan.suffix.iter().map(|x| letter(x)));
    holds(f, &prefix, &cycle)
}

/// Workspace, formula, raw automaton and planning automaton of a scenario.
pub struct Task {
    pub ws: Workspace,
    pub formula: LtlFormula,
    pub nba: Nba,
    pub pruned: Nba,
    pub start: Vec<tlrrt::geometry::Point>,
}

pub fn task(sc: &Scenario) -> Task {
    let ws = Workspace::from_file(&sc.environment).unwrap();
    let formula = parse_ltl(&sc.formula).unwrap();
    let nba = ltl_to_nba(&formula).unwrap();
    let mut pruned = nba.prune(|a, b| ws.regions_disjoint(a, b));
    if !sc.subformulas.is_empty() {
        let xis: Vec<PropFormula> = sc.subformulas.iter().map(|s| parse_prop(s).unwrap()).collect();
        pruned = pruned.prune_multi_subformula(&xis);
    }
    Task {
        ws,
        formula,
        nba,
        pruned,
        start: sc.start.clone(),
    }
}

/// Observer state: checks tree invariants every 100 iterations and that no
/// node's cost ever goes up.
pub struct InvariantWatch<'a> {
    pub ws: &'a Workspace,
    pub nba: &'a Nba,
    pub checks: usize,
    pub violations: Vec<String>,
    root: Option<(Vec<tlrrt::geometry::Point>, usize)>,
    last_it: usize,
    costs: Vec<f64>,
}

impl<'a> InvariantWatch<'a> {
    pub fn new(ws: &'a Workspace, nba: &'a Nba) -> Self {
        InvariantWatch {
            ws,
            nba,
            checks: 0,
            violations: Vec::new(),
            root: None,
            last_it: 0,
            costs: Vec::new(),
        }
    }

    pub fn observe(&mut self, t: &Tree, it: usize) {
        let root = (t.x(0).clone(), t.node(0).q);
        // A new tree starts: new root, restarted iteration count, or fewer nodes.
        if self.root.as_ref() != Some(&root) || it <= self.last_it || t.len() < self.costs.len() {
            self.root = Some(root);
            self.costs.clear();
        }
        self.last_it = it;
        if it % 100 != 0 {
            return;
        }
        self.checks += 1;
        if let Err(e) = t.check_invariants(self.ws, self.nba, 1e-9) {
            self.violations.push(e);
        }
        for (id, &old) in self.costs.iter().enumerate() {
            if t.node(id).cost > old + 1e-9 {
                self.violations.push(format!("node {id} cost rose from {old} to {}", t.node(id).cost));
            }
        }
        self.costs = (0..t.len()).map(|id| t.node(id).cost).collect();
    }
}

/// Outcome of one planning run with every returned plan re-checked.
pub struct Checked {
    pub report: tlrrt::rrt::PlanReport,
    /// `verify_plan` against the unpruned automaton.
    pub verified: bool,
    /// Satisfaction judged by the lasso semantics above.
    pub satisfies: bool,
}

impl Checked {
    pub fn sound(&self) -> bool {
        self.report.plan.is_none() || (self.verified && self.satisfies)
    }
}

/// Plans `t` and checks the result; `watch` sees every tree iteration.
pub fn run_checked(
    t: &Task,
    mode: tlrrt::bench::Mode,
    params: &tlrrt::rrt::RrtParams,
    bias: &tlrrt::bias::BiasParams,
    seed: u64,
    watch: Option<&mut InvariantWatch<'_>>,
) -> Checked {
    let report = match watch {
        Some(w) => {
            let mut obs = |tree: &Tree, it: usize| w.observe(tree, it);
            tlrrt::bench::plan_with(mode, &t.ws, &t.pruned, &t.start, params, bias, seed, Some(&mut obs))
        }
        None => tlrrt::bench::plan_with(mode, &t.ws, &t.pruned, &t.start, params, bias, seed, None),
    }
    .expect("planner error");
    let (verified, satisfies) = match &report.plan {
        Some(p) => (tlrrt::product::verify_plan(p, &t.nba, &t.ws).is_ok(), plan_satisfies(&t.ws, &t.formula, p)),
        None => (false, false),
    };
    Checked { report, verified, satisfies }
}
