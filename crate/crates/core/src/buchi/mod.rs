//! Nondeterministic Büchi automata with propositional guards.
//!
//! Automata come from [`ltl_to_nba`] or from HOA text ([`parse_hoa`]). The
//! planner prunes them against the workspace, measures hop distances between
//! states and uses [`Nba::accepts_lasso`] as the final word on plan validity.

mod hoa;
mod translate;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::formula::{to_dnf, Atom, DnfClause, FormulaError, PropFormula, Valuation, DEFAULT_DNF_BOUND};

pub use hoa::{parse_hoa, parse_hoa_with_map, to_hoa, ApBinding};
pub use translate::{ltl_to_nba, ltl_to_nba_capped, DEFAULT_STATE_CAP};

#[derive(Debug, Error, PartialEq)]
pub enum BuchiError {
    #[error("automaton exceeds {cap} states")]
    TooManyStates { cap: usize },
    #[error("HOA line {line}: {msg}")]
    Hoa { line: usize, msg: String },
    #[error("unsupported acceptance condition `{0}`")]
    UnsupportedAcceptance(String),
    #[error("atomic proposition `{0}` has no binding to a pi(i,j) atom")]
    UnmappedAp(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// A guarded edge. `clauses` is the DNF of `guard`, kept alongside it so
/// evaluation in the planner's inner loop is a flat scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub guard: PropFormula,
    pub clauses: Vec<DnfClause>,
}

impl Edge {
    pub fn enabled<V: Valuation + ?Sized>(&self, labels: &V) -> bool {
        self.clauses.iter().any(|c| c.satisfied_by(labels))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nba {
    n_states: usize,
    initial: Vec<usize>,
    accepting: Vec<bool>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    index: BTreeMap<(usize, usize), usize>,
}

impl Nba {
    pub fn new(n_states: usize) -> Self {
        Nba {
            n_states,
            initial: Vec::new(),
            accepting: vec![false; n_states],
            edges: Vec::new(),
            out: vec![Vec::new(); n_states],
            index: BTreeMap::new(),
        }
    }

    /// One state, initial and accepting, with a `true` self-loop.
    pub fn universal() -> Self {
        let mut b = Nba::new(1);
        b.add_initial(0);
        b.set_accepting(0, true);
        b.add_edge(0, PropFormula::True, 0);
        b
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn add_initial(&mut self, q: usize) {
        assert!(q < self.n_states, "state {q} out of range");
        if !self.initial.contains(&q) {
            self.initial.push(q);
            self.initial.sort_unstable();
        }
    }

    pub fn set_accepting(&mut self, q: usize, yes: bool) {
        self.accepting[q] = yes;
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.n_states).filter(|&q| self.accepting[q]).collect()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn out_edges(&self, q: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.out[q].iter().map(move |&e| &self.edges[e])
    }

    pub fn edge(&self, src: usize, dst: usize) -> Option<&Edge> {
        self.index.get(&(src, dst)).map(|&e| &self.edges[e])
    }

    /// Adds `src --guard--> dst`, OR-ing into an existing edge on the same pair.
    /// Guards whose DNF is empty are dropped.
    pub fn add_edge(&mut self, src: usize, guard: PropFormula, dst: usize) {
        let clauses = to_dnf(&guard, DEFAULT_DNF_BOUND).unwrap_or_else(|_| vec![DnfClause::default()]);
        self.add_edge_with_clauses(src, guard, clauses, dst);
    }

    fn add_edge_with_clauses(&mut self, src: usize, guard: PropFormula, clauses: Vec<DnfClause>, dst: usize) {
        assert!(src < self.n_states && dst < self.n_states, "edge endpoint out of range");
        if clauses.is_empty() {
            return;
        }
        if let Some(&e) = self.index.get(&(src, dst)) {
            let edge = &mut self.edges[e];
            let old = std::mem::replace(&mut edge.guard, PropFormula::False);
            edge.guard = match old {
                PropFormula::Or(mut items) => {
                    items.push(guard);
                    PropFormula::Or(items)
                }
                old => PropFormula::Or(vec![old, guard]),
            };
            for c in clauses {
                if !edge.clauses.contains(&c) {
                    edge.clauses.push(c);
                }
            }
            edge.clauses.sort();
            return;
        }
        let mut clauses = clauses;
        clauses.sort();
        clauses.dedup();
        self.index.insert((src, dst), self.edges.len());
        self.out[src].push(self.edges.len());
        self.edges.push(Edge { src, dst, guard, clauses });
    }

    /// States reachable from `q` in one step when `labels` hold.
    pub fn step<V: Valuation + ?Sized>(&self, q: usize, labels: &V) -> Vec<usize> {
        let mut next: Vec<usize> = self.out_edges(q).filter(|e| e.enabled(labels)).map(|e| e.dst).collect();
        next.sort_unstable();
        next
    }

    pub fn can_step<V: Valuation + ?Sized>(&self, q: usize, labels: &V, dst: usize) -> bool {
        self.edge(q, dst).is_some_and(|e| e.enabled(labels))
    }

    /// Does some run on `prefix . cycle^w` visit an accepting state infinitely often?
    pub fn accepts_lasso<V: Valuation>(&self, prefix: &[V], cycle: &[V]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let mut current: BTreeSet<usize> = self.initial.iter().copied().collect();
        for letter in prefix {
            current = current.iter().flat_map(|&q| self.step(q, letter)).collect();
            if current.is_empty() {
                return false;
            }
        }
        // Product of cycle position and state; node id = pos * n + q.
        let n = self.n_states;
        let len = cycle.len();
        let succ: Vec<Vec<usize>> = (0..len * n)
            .map(|v| {
                let (pos, q) = (v / n, v % n);
                let np = (pos + 1) % len;
                self.step(q, &cycle[pos]).into_iter().map(|d| np * n + d).collect()
            })
            .collect();
        let mut seen = vec![false; len * n];
        let mut queue: VecDeque<usize> = current.iter().copied().collect();
        for &v in &queue {
            seen[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &w in &succ[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        // An accepting product node that is reachable and lies on a cycle.
        (0..len * n)
            .filter(|&v| seen[v] && self.accepting[v % n])
            .any(|v| reaches(&succ, &succ[v], v))
    }

    /// Replaces each guard by its feasible DNF clauses and drops dead edges.
    ///
    /// A clause is infeasible if it puts one robot in two regions whose
    /// closures are disjoint (`disjoint(j, k)`, 1-based labels).
    pub fn prune(&self, disjoint: impl Fn(u32, u32) -> bool) -> Nba {
        self.filter_clauses(|c| clause_feasible(c, &disjoint))
    }

    /// Removes clauses that need two or more of the given subformulas at once.
    ///
    /// Each `xi` must be a conjunction of atoms. A clause "needs" `xi` when all
    /// of `xi`'s atoms appear among its positive literals.
    pub fn prune_multi_subformula(&self, subformulas: &[PropFormula]) -> Nba {
        let sets: Vec<BTreeSet<Atom>> = subformulas.iter().filter_map(conjunction_atoms).collect();
        self.filter_clauses(|c| {
            let mut needed: Vec<&BTreeSet<Atom>> = sets.iter().filter(|s| s.is_subset(&c.pos)).collect();
            needed.dedup();
            needed.len() < 2
        })
    }

    fn filter_clauses(&self, keep: impl Fn(&DnfClause) -> bool) -> Nba {
        let mut out = Nba::new(self.n_states);
        out.initial = self.initial.clone();
        out.accepting = self.accepting.clone();
        for e in &self.edges {
            let clauses: Vec<DnfClause> = e.clauses.iter().filter(|c| c.is_consistent() && keep(c)).cloned().collect();
            if clauses.len() == e.clauses.len() {
                out.add_edge_with_clauses(e.src, e.guard.clone(), clauses, e.dst);
            } else if !clauses.is_empty() {
                let guard = PropFormula::or_all(clauses.iter().map(DnfClause::to_formula));
                out.add_edge_with_clauses(e.src, guard, clauses, e.dst);
            }
        }
        out
    }

    /// All-pairs hop distances plus the shortest nonempty cycle through each state.
    pub fn distance_table(&self) -> DistanceTable {
        let n = self.n_states;
        let succ: Vec<Vec<usize>> = (0..n).map(|q| self.out_edges(q).map(|e| e.dst).collect()).collect();
        let mut rho = vec![vec![INF; n]; n];
        for (src, row) in rho.iter_mut().enumerate() {
            row[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(q) = queue.pop_front() {
                for &d in &succ[q] {
                    if row[d] == INF {
                        row[d] = row[q] + 1;
                        queue.push_back(d);
                    }
                }
            }
        }
        let cycle = (0..n)
            .map(|q| {
                succ[q]
                    .iter()
                    .map(|&d| rho[d][q])
                    .filter(|&h| h != INF)
                    .min()
                    .map_or(INF, |h| h + 1)
            })
            .collect();
        DistanceTable { rho, cycle }
    }

    /// Accepting states reachable from `q0` that lie on a nonempty cycle.
    pub fn feasible_accepting(&self, dist: &DistanceTable, q0: usize) -> Vec<usize> {
        (0..self.n_states)
            .filter(|&q| self.accepting[q] && dist.get(q0, q).is_some() && dist.cycle(q).is_some())
            .collect()
    }

    /// Every atom mentioned by some guard clause.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.edges
            .iter()
            .flat_map(|e| e.clauses.iter().flat_map(|c| c.pos.iter().chain(c.neg.iter()).copied()))
            .collect()
    }
}

fn reaches(succ: &[Vec<usize>], from: &[usize], target: usize) -> bool {
    let mut seen = vec![false; succ.len()];
    let mut stack: Vec<usize> = from.to_vec();
    while let Some(v) = stack.pop() {
        if v == target {
            return true;
        }
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend(&succ[v]);
        }
    }
    false
}

fn clause_feasible(c: &DnfClause, disjoint: &impl Fn(u32, u32) -> bool) -> bool {
    if !c.is_consistent() {
        return false;
    }
    let pos: Vec<&Atom> = c.pos.iter().collect();
    for (i, a) in pos.iter().enumerate() {
        for b in &pos[i + 1..] {
            if a.robot == b.robot && a.region != b.region && disjoint(a.region, b.region) {
                return false;
            }
        }
    }
    true
}

/// Atom set of a conjunction of atoms, or `None` if `f` is not of that shape.
fn conjunction_atoms(f: &PropFormula) -> Option<BTreeSet<Atom>> {
    match f {
        PropFormula::Atom(a) => Some(BTreeSet::from([*a])),
        PropFormula::And(items) => {
            let mut out = BTreeSet::new();
            for g in items {
                out.extend(conjunction_atoms(g)?);
            }
            Some(out)
        }
        _ => None,
    }
}

const INF: u32 = u32::MAX;

/// Hop distances in an automaton's transition graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    rho: Vec<Vec<u32>>,
    cycle: Vec<u32>,
}

impl DistanceTable {
    /// Shortest hop count from `a` to `b`; `Some(0)` when `a == b`.
    pub fn get(&self, a: usize, b: usize) -> Option<u32> {
        let h = self.rho[a][b];
        (h != INF).then_some(h)
    }

    /// Length of the shortest nonempty cycle through `q`.
    pub fn cycle(&self, q: usize) -> Option<u32> {
        let h = self.cycle[q];
        (h != INF).then_some(h)
    }

    pub fn n_states(&self) -> usize {
        self.rho.len()
    }

    /// Distance to `target` where arriving back at `target` itself counts as a full
    /// cycle; used while growing a suffix cycle around an accepting state.
    pub fn get_cyclic(&self, a: usize, target: usize) -> Option<u32> {
        if a == target {
            self.cycle(target)
        } else {
            self.get(a, target)
        }
    }
}
