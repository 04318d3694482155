mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::automata::{distance_mismatch, three_state_recurrence, random_nba, translation_mismatch, two_atoms as atoms, FIXTURE_FORMULAS};
use common::{all_lassos, holds};
use tlrrt::buchi::{ltl_to_nba, parse_hoa, to_hoa};
use tlrrt::formula::{parse_ltl, Atom, LtlFormula};

#[test]
fn distance_table_matches_bfs_on_random_automata() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..100 {
        let b = random_nba(&mut rng);
        assert_eq!(distance_mismatch(&b), None, "automaton {k}");
    }
}

#[test]
fn three_state_recurrence_distances() {
    let d = three_state_recurrence().distance_table();
    assert_eq!(d.get(0, 2), Some(1));
    assert_eq!(d.get(1, 2), Some(1));
    assert_eq!(d.get(2, 2), Some(0));
}

#[test]
fn translation_agrees_with_lasso_semantics() {
    assert_eq!(translation_mismatch(6), None);
}

#[test]
fn hoa_round_trip_preserves_language() {
    let lassos = all_lassos(&atoms(), 4);
    for text in FIXTURE_FORMULAS {
        let nba = ltl_to_nba(&parse_ltl(text).unwrap()).unwrap();
        let back = parse_hoa(&to_hoa(&nba, Some(text))).unwrap();
        for (pre, cyc) in &lassos {
            assert_eq!(nba.accepts_lasso(pre, cyc), back.accepts_lasso(pre, cyc), "{text}");
        }
    }
}

#[test]
fn semantics_oracle_sanity() {
    let a: common::Letter = [Atom::new(1, 1)].into_iter().collect();
    let none = common::Letter::new();
    let gf = parse_ltl("G F pi(1,1)").unwrap();
    assert!(holds(&gf, &[], &[none.clone(), a.clone()]));
    assert!(!holds(&gf, &[a.clone()], &[none.clone()]));
    let until = parse_ltl("!pi(1,1) U pi(1,2)").unwrap();
    assert!(!holds(&until, &[a], &[none]));
}

fn arb_formula() -> impl Strategy<Value = LtlFormula> {
    let leaf = prop_oneof![Just(LtlFormula::True), Just(LtlFormula::False), (1u32..=2).prop_map(|j| LtlFormula::atom(1, j)),];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(LtlFormula::not),
            inner.clone().prop_map(LtlFormula::eventually),
            inner.clone().prop_map(LtlFormula::always),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LtlFormula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LtlFormula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LtlFormula::until(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| LtlFormula::release(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_formulas_agree_with_semantics(f in arb_formula()) {
        let nba = ltl_to_nba(&f).unwrap();
        for (pre, cyc) in all_lassos(&atoms(), 4) {
            prop_assert_eq!(nba.accepts_lasso(&pre, &cyc), holds(&f, &pre, &cyc), "{} on {:?} ({:?})^w", f, pre, cyc);
        }
    }

    #[test]
    fn nnf_preserves_semantics(f in arb_formula()) {
        let g = f.nnf();
        for (pre, cyc) in all_lassos(&atoms(), 4) {
            prop_assert_eq!(holds(&f, &pre, &cyc), holds(&g, &pre, &cyc));
        }
    }

    #[test]
    fn pruning_keeps_single_region_words(f in arb_formula()) {
        // A single robot is in at most one region, so dropping clauses that
        // demand two disjoint regions cannot change acceptance of such words.
        let nba = ltl_to_nba(&f).unwrap();
        let pruned = nba.prune(|a, b| a != b);
        for (pre, cyc) in all_lassos(&atoms(), 4) {
            if pre.iter().chain(&cyc).all(|l| l.len() <= 1) {
                prop_assert_eq!(nba.accepts_lasso(&pre, &cyc), pruned.accepts_lasso(&pre, &cyc));
            }
        }
    }
}
