//! Automaton fixtures and a BFS distance oracle.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tlrrt::buchi::{ltl_to_nba, Nba};
use tlrrt::formula::{parse_ltl, parse_prop, Atom, PropFormula};

use super::{all_lassos, holds};

/// Formulas over `pi(1,1)` and `pi(1,2)` covering every operator.
pub const FIXTURE_FORMULAS: &[&str] = &[
    "true",
    "false",
    "pi(1,1)",
    "!pi(1,1)",
    "F pi(1,1)",
    "G pi(1,1)",
    "G F pi(1,1)",
    "F G pi(1,1)",
    "pi(1,1) U pi(1,2)",
    "pi(1,1) R pi(1,2)",
    "!pi(1,1) U pi(1,2)",
    "G (!pi(1,1) || F pi(1,2))",
    "G F pi(1,1) && G F pi(1,2)",
    "F (pi(1,1) && F pi(1,2))",
    "(!pi(1,2) U pi(1,1)) && F pi(1,2)",
    "F G pi(1,1) || G F pi(1,2)",
    "G (pi(1,1) || pi(1,2)) && F G !pi(1,2)",
    "(pi(1,1) U G pi(1,2)) || F (pi(1,1) && G !pi(1,2))",
];

pub fn two_atoms() -> Vec<Atom> {
    vec![Atom::new(1, 1), Atom::new(1, 2)]
}

pub fn bfs(nba: &Nba, a: usize) -> Vec<Option<u32>> {
    let mut d = vec![None; nba.n_states()];
    d[a] = Some(0);
    let mut queue = VecDeque::from([a]);
    while let Some(u) = queue.pop_front() {
        for e in nba.edges().iter().filter(|e| e.src == u) {
            if d[e.dst].is_none() {
                d[e.dst] = Some(d[u].unwrap() + 1);
                queue.push_back(e.dst);
            }
        }
    }
    d
}

pub fn random_nba(rng: &mut ChaCha8Rng) -> Nba {
    let n = rng.random_range(1..=12);
    let mut b = Nba::new(n);
    b.add_initial(0);
    let density = rng.random_range(0.05..0.4);
    for s in 0..n {
        b.set_accepting(s, rng.random_bool(0.3));
        for t in 0..n {
            if rng.random_bool(density) {
                b.add_edge(s, PropFormula::atom(1, rng.random_range(1..=3)), t);
            }
        }
    }
    b
}

/// First disagreement between the distance table and BFS, if any.
pub fn distance_mismatch(b: &Nba) -> Option<String> {
    let table = b.distance_table();
    for a in 0..b.n_states() {
        let d = bfs(b, a);
        for t in 0..b.n_states() {
            if table.get(a, t) != d[t] {
                return Some(format!("rho({a},{t}) = {:?}, BFS {:?}", table.get(a, t), d[t]));
            }
        }
        // Shortest nonempty cycle: one edge out, then back.
        let cyc = b.edges().iter().filter(|e| e.src == a).filter_map(|e| bfs(b, e.dst)[a].map(|h| h + 1)).min();
        if table.cycle(a) != cyc {
            return Some(format!("cycle({a}) = {:?}, BFS {cyc:?}", table.cycle(a)));
        }
    }
    None
}

/// First fixture formula whose automaton disagrees with the semantics on a
/// lasso of total length at most `max_len`.
pub fn translation_mismatch(max_len: usize) -> Option<String> {
    let lassos = all_lassos(&two_atoms(), max_len);
    for text in FIXTURE_FORMULAS {
        let f = parse_ltl(text).unwrap();
        let nba = ltl_to_nba(&f).unwrap();
        for (pre, cyc) in &lassos {
            if nba.accepts_lasso(pre, cyc) != holds(&f, pre, cyc) {
                return Some(format!("{text} on {pre:?} ({cyc:?})^w"));
            }
        }
    }
    None
}

/// The three-state recurrence automaton; q0 initial, q2 accepting.
pub fn three_state_recurrence() -> Nba {
    let mut b = Nba::new(3);
    b.add_initial(0);
    b.set_accepting(2, true);
    let g = |s: &str| parse_prop(s).unwrap();
    b.add_edge(0, g("true"), 0);
    b.add_edge(0, g("pi(1,1)"), 1);
    b.add_edge(0, g("pi(1,1) && pi(2,2)"), 2);
    b.add_edge(1, g("true"), 1);
    b.add_edge(1, g("pi(2,2)"), 2);
    b.add_edge(2, g("true"), 0);
    b.add_edge(2, g("pi(1,1)"), 1);
    b.add_edge(2, g("pi(1,1) && pi(2,2)"), 2);
    b
}
