//! LTL to Büchi translation through very weak alternating automata.
//!
//! The pipeline follows the classic alternating-automaton route:
//!
//! 1. every `U`/`R` (and `F`/`G`) subformula of the NNF becomes a state of a
//!    very weak alternating automaton whose transitions are pairs
//!    `(clause, set of successor subformulas)`;
//! 2. sets of such states form a transition-based generalized Büchi
//!    automaton, one acceptance set per until-subformula;
//! 3. a level counter degeneralizes it into a state-based Büchi automaton;
//! 4. unreachable and unproductive states are trimmed and bisimilar states
//!    merged.
//!
//! Dominated transitions are dropped at both intermediate levels, which keeps
//! the automata close in size to those of dedicated translators.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{BuchiError, Nba};
use crate::formula::{DnfClause, LtlFormula, PropFormula};

pub const DEFAULT_STATE_CAP: usize = 100_000;

type StateSet = BTreeSet<usize>;
type Trans = (DnfClause, StateSet);

pub fn ltl_to_nba(f: &LtlFormula) -> Result<Nba, BuchiError> {
    ltl_to_nba_capped(f, DEFAULT_STATE_CAP)
}

pub fn ltl_to_nba_capped(f: &LtlFormula, cap: usize) -> Result<Nba, BuchiError> {
    let mut aut = Alternating::default();
    let init = aut.delta(&f.nnf());
    // Pseudo-state for the top-level formula; never an until-state.
    let init_id = aut.states.len();
    aut.states.push(LtlFormula::True);
    aut.until.push(false);
    aut.trans.push(simplify(init));
    let gba = Generalized::build(&aut, init_id, cap)?;
    let ba = degeneralize(&gba, cap)?;
    Ok(ba.trim().minimize().into_nba())
}

#[derive(Default)]
struct Alternating {
    states: Vec<LtlFormula>,
    until: Vec<bool>,
    trans: Vec<Vec<Trans>>,
    ids: BTreeMap<LtlFormula, usize>,
}

impl Alternating {
    /// Transition set of an NNF formula.
    fn delta(&mut self, f: &LtlFormula) -> Vec<Trans> {
        use LtlFormula as L;
        match f {
            L::True => vec![(DnfClause::default(), StateSet::new())],
            L::False => Vec::new(),
            L::Atom(a) => vec![(DnfClause::new([*a], []), StateSet::new())],
            L::Not(g) => match &**g {
                L::Atom(a) => vec![(DnfClause::new([], [*a]), StateSet::new())],
                _ => unreachable!("formula is in negation normal form"),
            },
            L::And(a, b) => {
                let (x, y) = (self.delta(a), self.delta(b));
                simplify(product(&x, &y))
            }
            L::Or(a, b) => {
                let mut x = self.delta(a);
                x.extend(self.delta(b));
                simplify(x)
            }
            L::Until(..) | L::Release(..) | L::Eventually(_) | L::Always(_) => {
                let id = self.state(f);
                self.trans[id].clone()
            }
        }
    }

    fn state(&mut self, f: &LtlFormula) -> usize {
        use LtlFormula as L;
        if let Some(&id) = self.ids.get(f) {
            return id;
        }
        let id = self.states.len();
        self.ids.insert(f.clone(), id);
        self.states.push(f.clone());
        self.until.push(matches!(f, L::Until(..) | L::Eventually(_)));
        self.trans.push(Vec::new());
        let loop_ = vec![(DnfClause::default(), StateSet::from([id]))];
        let t = match f {
            L::Until(a, b) => {
                let mut t = self.delta(b);
                let da = self.delta(a);
                t.extend(product(&da, &loop_));
                t
            }
            L::Eventually(b) => {
                let mut t = self.delta(b);
                t.extend(loop_);
                t
            }
            L::Release(a, b) => {
                let db = self.delta(b);
                let mut alt = self.delta(a);
                alt.extend(loop_);
                product(&db, &alt)
            }
            L::Always(b) => {
                let db = self.delta(b);
                product(&db, &loop_)
            }
            _ => unreachable!(),
        };
        self.trans[id] = simplify(t);
        id
    }
}

fn product(x: &[Trans], y: &[Trans]) -> Vec<Trans> {
    let mut out = Vec::new();
    for (b1, e1) in x {
        for (b2, e2) in y {
            if let Some(b) = b1.conjoin(b2) {
                out.push((b, e1.union(e2).copied().collect()));
            }
        }
    }
    out
}

/// Drops duplicates and transitions implied by a weaker one with fewer obligations.
fn simplify(mut t: Vec<Trans>) -> Vec<Trans> {
    t.sort();
    t.dedup();
    let keep: Vec<bool> = (0..t.len())
        .map(|i| {
            !(0..t.len()).any(|j| j != i && t[j].0.is_implied_by(&t[i].0) && t[j].1.is_subset(&t[i].1))
        })
        .collect();
    t.into_iter().zip(keep).filter_map(|(x, k)| k.then_some(x)).collect()
}

struct GbaEdge {
    clause: DnfClause,
    dst: usize,
    /// Bit `k` set when the edge is in the acceptance set of the `k`-th until-state.
    acc: Vec<bool>,
}

struct Generalized {
    n_sets: usize,
    edges: Vec<Vec<GbaEdge>>,
}

impl Generalized {
    fn build(aut: &Alternating, init: usize, cap: usize) -> Result<Self, BuchiError> {
        let untils: Vec<usize> = (0..aut.states.len()).filter(|&s| aut.until[s]).collect();
        let mut ids: BTreeMap<StateSet, usize> = BTreeMap::new();
        let mut sets: Vec<StateSet> = Vec::new();
        let mut edges: Vec<Vec<GbaEdge>> = Vec::new();
        let start = StateSet::from([init]);
        ids.insert(start.clone(), 0);
        sets.push(start);
        let mut next = 0;
        while next < sets.len() {
            let here = sets[next].clone();
            next += 1;
            let mut trans = vec![(DnfClause::default(), StateSet::new())];
            for &s in &here {
                trans = simplify(product(&trans, &aut.trans[s]));
            }
            let mut out: Vec<(DnfClause, StateSet, Vec<bool>)> = trans
                .into_iter()
                .map(|(b, e)| {
                    let acc = untils.iter().map(|&u| in_acceptance(aut, u, &b, &e)).collect();
                    (b, e, acc)
                })
                .collect();
            // A transition is dominated by a weaker one that reaches fewer
            // obligations and belongs to at least the same acceptance sets.
            let dominated: Vec<bool> = (0..out.len())
                .map(|i| {
                    (0..out.len()).any(|j| {
                        j != i
                            && out[j].0.is_implied_by(&out[i].0)
                            && out[j].1.is_subset(&out[i].1)
                            && out[i].2.iter().zip(&out[j].2).all(|(a, b)| !*a || *b)
                            && (out[i] != out[j] || j < i)
                    })
                })
                .collect();
            let mut kept = Vec::new();
            for (t, d) in out.drain(..).zip(dominated) {
                if d {
                    continue;
                }
                let dst = match ids.get(&t.1) {
                    Some(&id) => id,
                    None => {
                        if sets.len() >= cap {
                            return Err(BuchiError::TooManyStates { cap });
                        }
                        ids.insert(t.1.clone(), sets.len());
                        sets.push(t.1.clone());
                        sets.len() - 1
                    }
                };
                kept.push(GbaEdge {
                    clause: t.0,
                    dst,
                    acc: t.2,
                });
            }
            edges.push(kept);
        }
        Ok(Generalized {
            n_sets: untils.len(),
            edges,
        })
    }
}

/// Edge `(beta, next)` satisfies until-state `u` if it does not carry `u`
/// forward, or if `u` itself could have been discharged by a transition that
/// is no stronger.
fn in_acceptance(aut: &Alternating, u: usize, beta: &DnfClause, next: &StateSet) -> bool {
    !next.contains(&u)
        || aut.trans[u]
            .iter()
            .any(|(b, e)| b.is_implied_by(beta) && e.is_subset(next) && !e.contains(&u))
}

/// Plain state-based automaton used between degeneralization and output.
struct Raw {
    initial: usize,
    accepting: Vec<bool>,
    edges: Vec<Vec<(DnfClause, usize)>>,
}

fn degeneralize(g: &Generalized, cap: usize) -> Result<Raw, BuchiError> {
    let k = g.n_sets;
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut keys = vec![(0usize, 0usize)];
    ids.insert((0, 0), 0);
    let mut edges = Vec::new();
    let mut next = 0;
    while next < keys.len() {
        let (s, level) = keys[next];
        next += 1;
        let mut out = Vec::new();
        for e in &g.edges[s] {
            let mut j = if level == k { 0 } else { level };
            while j < k && e.acc[j] {
                j += 1;
            }
            let key = (e.dst, j);
            let dst = match ids.get(&key) {
                Some(&id) => id,
                None => {
                    if keys.len() >= cap {
                        return Err(BuchiError::TooManyStates { cap });
                    }
                    ids.insert(key, keys.len());
                    keys.push(key);
                    keys.len() - 1
                }
            };
            out.push((e.clause.clone(), dst));
        }
        edges.push(out);
    }
    Ok(Raw {
        initial: 0,
        accepting: keys.iter().map(|&(_, j)| j == k).collect(),
        edges,
    })
}

impl Raw {
    fn n(&self) -> usize {
        self.accepting.len()
    }

    fn succ(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|es| es.iter().map(|e| e.1).collect()).collect()
    }

    /// Keeps states reachable from the initial state that can reach an accepting cycle.
    fn trim(self) -> Raw {
        let n = self.n();
        let succ = self.succ();
        let mut pred = vec![Vec::new(); n];
        for (q, ds) in succ.iter().enumerate() {
            for &d in ds {
                pred[d].push(q);
            }
        }
        let on_cycle = |q: usize| {
            let mut seen = vec![false; n];
            let mut stack = succ[q].clone();
            while let Some(v) = stack.pop() {
                if v == q {
                    return true;
                }
                if !std::mem::replace(&mut seen[v], true) {
                    stack.extend(&succ[v]);
                }
            }
            false
        };
        let mut good = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&q| self.accepting[q] && on_cycle(q)).collect();
        while let Some(v) = stack.pop() {
            if !std::mem::replace(&mut good[v], true) {
                stack.extend(&pred[v]);
            }
        }
        // Renumber in breadth-first order from the initial state.
        let mut order = vec![usize::MAX; n];
        let mut keep = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        order[self.initial] = 0;
        keep.push(self.initial);
        while let Some(q) = queue.pop_front() {
            if !good[q] {
                continue;
            }
            for &d in &succ[q] {
                if good[d] && order[d] == usize::MAX {
                    order[d] = keep.len();
                    keep.push(d);
                    queue.push_back(d);
                }
            }
        }
        let edges = keep
            .iter()
            .map(|&q| {
                if !good[q] {
                    return Vec::new();
                }
                self.edges[q]
                    .iter()
                    .filter(|(_, d)| good[*d])
                    .map(|(c, d)| (c.clone(), order[*d]))
                    .collect()
            })
            .collect();
        Raw {
            initial: 0,
            accepting: keep.iter().map(|&q| self.accepting[q] && good[q]).collect(),
            edges,
        }
    }

    /// Merges bisimilar states (same acceptance, same guarded moves into the same classes).
    fn minimize(self) -> Raw {
        let n = self.n();
        let mut class: Vec<usize> = self.accepting.iter().map(|&a| a as usize).collect();
        loop {
            let mut sigs: BTreeMap<(usize, BTreeSet<(DnfClause, usize)>), usize> = BTreeMap::new();
            let mut next = vec![0; n];
            for q in 0..n {
                let moves: BTreeSet<(DnfClause, usize)> =
                    self.edges[q].iter().map(|(c, d)| (c.clone(), class[*d])).collect();
                let len = sigs.len();
                next[q] = *sigs.entry((class[q], moves)).or_insert(len);
            }
            let stable = sigs.len() == class.iter().collect::<BTreeSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        // Representative numbering by first occurrence keeps the initial state at 0.
        let mut rename = BTreeMap::new();
        let mut reps = Vec::new();
        for (q, &c) in class.iter().enumerate() {
            if let std::collections::btree_map::Entry::Vacant(v) = rename.entry(c) {
                v.insert(reps.len());
                reps.push(q);
            }
        }
        let edges = reps
            .iter()
            .map(|&q| {
                let mut es: Vec<(DnfClause, usize)> =
                    self.edges[q].iter().map(|(c, d)| (c.clone(), rename[&class[*d]])).collect();
                es.sort();
                es.dedup();
                es
            })
            .collect();
        Raw {
            initial: rename[&class[self.initial]],
            accepting: reps.iter().map(|&q| self.accepting[q]).collect(),
            edges,
        }
    }

    fn into_nba(self) -> Nba {
        let mut b = Nba::new(self.n());
        b.add_initial(self.initial);
        for (q, &acc) in self.accepting.iter().enumerate() {
            b.set_accepting(q, acc);
        }
        for (q, es) in self.edges.into_iter().enumerate() {
            let mut by_dst: BTreeMap<usize, Vec<DnfClause>> = BTreeMap::new();
            for (c, d) in es {
                by_dst.entry(d).or_default().push(c);
            }
            for (d, clauses) in by_dst {
                // Within one edge, a clause implied by another is redundant.
                let kept: Vec<DnfClause> = clauses
                    .iter()
                    .enumerate()
                    .filter(|(i, c)| {
                        !clauses
                            .iter()
                            .enumerate()
                            .any(|(j, o)| j != *i && o.is_implied_by(c) && (o != *c || j < *i))
                    })
                    .map(|(_, c)| c.clone())
                    .collect();
                let guard = PropFormula::or_all(kept.iter().map(DnfClause::to_formula));
                b.add_edge_with_clauses(q, guard, kept, d);
            }
        }
        b
    }
}
