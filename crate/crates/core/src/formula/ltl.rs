use std::collections::BTreeSet;
use std::fmt;

use super::syntax::{Cursor, Tok};
use super::{Atom, FormulaError};

/// LTL formula without the next operator.
///
/// `Eventually` and `Always` are kept as nodes so formulas echo the way they
/// were written; the automaton translation treats them as `true U a` and
/// `false R a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LtlFormula {
    True,
    False,
    Atom(Atom),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Release(Box<LtlFormula>, Box<LtlFormula>),
    Eventually(Box<LtlFormula>),
    Always(Box<LtlFormula>),
}

use LtlFormula as L;

impl LtlFormula {
    pub fn atom(robot: u32, region: u32) -> Self {
        L::Atom(Atom::new(robot, region))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: L) -> Self {
        L::Not(Box::new(f))
    }

    pub fn and(a: L, b: L) -> Self {
        L::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: L, b: L) -> Self {
        L::Or(Box::new(a), Box::new(b))
    }

    pub fn until(a: L, b: L) -> Self {
        L::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: L, b: L) -> Self {
        L::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(a: L) -> Self {
        L::Eventually(Box::new(a))
    }

    pub fn always(a: L) -> Self {
        L::Always(Box::new(a))
    }

    /// Left-nested conjunction of all items; `True` when empty.
    pub fn conj(items: impl IntoIterator<Item = L>) -> Self {
        items.into_iter().reduce(L::and).unwrap_or(L::True)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let L::Atom(a) = f {
                out.insert(*a);
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&L)) {
        f(self);
        match self {
            L::True | L::False | L::Atom(_) => {}
            L::Not(a) | L::Eventually(a) | L::Always(a) => a.visit(f),
            L::And(a, b) | L::Or(a, b) | L::Until(a, b) | L::Release(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    pub fn check_bounds(&self, n_robots: u32, n_regions: u32) -> Result<(), FormulaError> {
        self.atoms()
            .into_iter()
            .try_for_each(|a| a.check_bounds(n_robots, n_regions))
    }

    /// Negation normal form: `Not` only directly above atoms.
    pub fn nnf(&self) -> L {
        self.push_neg(false)
    }

    fn push_neg(&self, neg: bool) -> L {
        let bin = |a: &L, b: &L, f: fn(L, L) -> L| f(a.push_neg(neg), b.push_neg(neg));
        match (self, neg) {
            (L::True, false) | (L::False, true) => L::True,
            (L::True, true) | (L::False, false) => L::False,
            (L::Atom(a), false) => L::Atom(*a),
            (L::Atom(a), true) => L::not(L::Atom(*a)),
            (L::Not(a), n) => a.push_neg(!n),
            (L::And(a, b), false) | (L::Or(a, b), true) => bin(a, b, L::and),
            (L::Or(a, b), false) | (L::And(a, b), true) => bin(a, b, L::or),
            (L::Until(a, b), false) | (L::Release(a, b), true) => bin(a, b, L::until),
            (L::Release(a, b), false) | (L::Until(a, b), true) => bin(a, b, L::release),
            (L::Eventually(a), false) | (L::Always(a), true) => L::eventually(a.push_neg(neg)),
            (L::Always(a), false) | (L::Eventually(a), true) => L::always(a.push_neg(neg)),
        }
    }
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            L::True => write!(f, "true"),
            L::False => write!(f, "false"),
            L::Atom(a) => write!(f, "{a}"),
            L::Not(a) => write!(f, "!{a}"),
            L::Eventually(a) => write!(f, "F {a}"),
            L::Always(a) => write!(f, "G {a}"),
            L::And(a, b) => write!(f, "({a} && {b})"),
            L::Or(a, b) => write!(f, "({a} || {b})"),
            L::Until(a, b) => write!(f, "({a} U {b})"),
            L::Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}

/// Parses an LTL formula. `X` is rejected with [`FormulaError::UnsupportedOperator`].
pub fn parse_ltl(text: &str) -> Result<LtlFormula, FormulaError> {
    let mut cur = Cursor::new(text)?;
    let f = ltl_or(&mut cur)?;
    cur.finish()?;
    Ok(f)
}

fn ltl_or(cur: &mut Cursor) -> Result<L, FormulaError> {
    let mut f = ltl_and(cur)?;
    while cur.eat(&Tok::Or) {
        f = L::or(f, ltl_and(cur)?);
    }
    Ok(f)
}

fn ltl_and(cur: &mut Cursor) -> Result<L, FormulaError> {
    let mut f = ltl_until(cur)?;
    while cur.eat(&Tok::And) {
        f = L::and(f, ltl_until(cur)?);
    }
    Ok(f)
}

fn ltl_until(cur: &mut Cursor) -> Result<L, FormulaError> {
    let lhs = ltl_unary(cur)?;
    match cur.peek() {
        Tok::Word(w) if w == "U" => {
            cur.bump();
            Ok(L::until(lhs, ltl_until(cur)?))
        }
        Tok::Word(w) if w == "R" => {
            cur.bump();
            Ok(L::release(lhs, ltl_until(cur)?))
        }
        _ => Ok(lhs),
    }
}

fn ltl_unary(cur: &mut Cursor) -> Result<L, FormulaError> {
    let pos = cur.pos();
    match cur.peek().clone() {
        Tok::Not => {
            cur.bump();
            Ok(L::not(ltl_unary(cur)?))
        }
        Tok::Diamond => {
            cur.bump();
            Ok(L::eventually(ltl_unary(cur)?))
        }
        Tok::Square => {
            cur.bump();
            Ok(L::always(ltl_unary(cur)?))
        }
        Tok::LParen => {
            cur.bump();
            let f = ltl_or(cur)?;
            cur.expect(&Tok::RParen, "`)`")?;
            Ok(f)
        }
        Tok::Word(w) => {
            cur.bump();
            match w.as_str() {
                "F" => Ok(L::eventually(ltl_unary(cur)?)),
                "G" => Ok(L::always(ltl_unary(cur)?)),
                "true" => Ok(L::True),
                "false" => Ok(L::False),
                "pi" => Ok(L::Atom(cur.atom_args()?)),
                "X" => Err(FormulaError::UnsupportedOperator { op: w, pos }),
                "U" | "R" => Err(FormulaError::Syntax {
                    pos,
                    msg: format!("binary operator `{w}` is missing its left operand"),
                }),
                _ => Err(FormulaError::Syntax {
                    pos,
                    msg: format!("unknown identifier `{w}`"),
                }),
            }
        }
        _ => Err(cur.error("expected a formula")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::LabelSet;
    use proptest::prelude::*;

    fn p(r: u32, j: u32) -> L {
        L::atom(r, j)
    }

    #[test]
    fn parses_recurrence_pair() {
        let f = parse_ltl("[]<> pi(1,1) && []<> pi(2,2)").unwrap();
        let expected = L::and(L::always(L::eventually(p(1, 1))), L::always(L::eventually(p(2, 2))));
        assert_eq!(f, expected);
    }

    #[test]
    fn parses_until_with_negated_lhs() {
        let f = parse_ltl("!pi(1,1) U pi(1,2)").unwrap();
        assert_eq!(f, L::until(L::not(p(1, 1)), p(1, 2)));
    }

    #[test]
    fn until_is_right_associative_and_binds_tighter_than_and() {
        let f = parse_ltl("pi(1,1) U pi(1,2) U pi(1,3) && pi(1,4)").unwrap();
        assert_eq!(f, L::and(L::until(p(1, 1), L::until(p(1, 2), p(1, 3))), p(1, 4)));
    }

    #[test]
    fn rejects_next() {
        assert_eq!(
            parse_ltl("X pi(1,1)"),
            Err(FormulaError::UnsupportedOperator { op: "X".into(), pos: 0 })
        );
        assert!(matches!(
            parse_ltl("F (pi(1,1) && X pi(1,2))"),
            Err(FormulaError::UnsupportedOperator { pos: 14, .. })
        ));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_ltl("U pi(1,1)"), Err(FormulaError::Syntax { pos: 0, .. })));
        assert!(matches!(parse_ltl("(pi(1,1)"), Err(FormulaError::Syntax { pos: 8, .. })));
        assert!(matches!(parse_ltl("pi(1,1) pi(1,2)"), Err(FormulaError::Syntax { pos: 8, .. })));
        assert!(matches!(parse_ltl("foo"), Err(FormulaError::Syntax { .. })));
    }

    #[test]
    fn nnf_dualities() {
        assert_eq!(L::not(L::always(p(1, 1))).nnf(), L::eventually(L::not(p(1, 1))));
        assert_eq!(
            L::not(L::until(p(1, 1), p(1, 2))).nnf(),
            L::release(L::not(p(1, 1)), L::not(p(1, 2)))
        );
        assert_eq!(L::not(L::not(p(1, 1))).nnf(), p(1, 1));
        assert_eq!(L::not(L::True).nnf(), L::False);
    }

    /// Direct lasso semantics: position `i` of `prefix . cycle^w`, positions
    /// past the prefix folded onto the cycle.
    fn sat(f: &L, prefix: &[LabelSet], cycle: &[LabelSet]) -> Vec<bool> {
        let n = prefix.len() + cycle.len();
        let next = |i: usize| if i + 1 < n { i + 1 } else { prefix.len() };
        let letter = |i: usize| if i < prefix.len() { &prefix[i] } else { &cycle[i - prefix.len()] };
        let fix = |a: &[bool], b: &[bool], until: bool| {
            let mut v = vec![!until; n];
            for _ in 0..=n {
                for i in (0..n).rev() {
                    v[i] = if until { b[i] || (a[i] && v[next(i)]) } else { b[i] && (a[i] || v[next(i)]) };
                }
            }
            v
        };
        match f {
            L::True => vec![true; n],
            L::False => vec![false; n],
            L::Atom(a) => (0..n).map(|i| letter(i).contains(a)).collect(),
            L::Not(a) => sat(a, prefix, cycle).into_iter().map(|b| !b).collect(),
            L::And(a, b) | L::Or(a, b) => {
                let (x, y) = (sat(a, prefix, cycle), sat(b, prefix, cycle));
                let and = matches!(f, L::And(..));
                x.iter().zip(&y).map(|(u, v)| if and { *u && *v } else { *u || *v }).collect()
            }
            L::Until(a, b) => fix(&sat(a, prefix, cycle), &sat(b, prefix, cycle), true),
            L::Release(a, b) => fix(&sat(a, prefix, cycle), &sat(b, prefix, cycle), false),
            L::Eventually(a) => fix(&vec![true; n], &sat(a, prefix, cycle), true),
            L::Always(a) => fix(&vec![false; n], &sat(a, prefix, cycle), false),
        }
    }

    fn lassos(max_len: usize) -> Vec<(Vec<LabelSet>, Vec<LabelSet>)> {
        let letters: Vec<LabelSet> = (0..4u32)
            .map(|m| (0..2).filter(|b| m >> b & 1 == 1).map(|b| Atom::new(1, b + 1)).collect())
            .collect();
        let mut out = Vec::new();
        for total in 1..=max_len {
            for cyc in 1..=total {
                let pre = total - cyc;
                for code in 0..4usize.pow(total as u32) {
                    let word: Vec<LabelSet> = (0..total).map(|k| letters[code / 4usize.pow(k as u32) % 4].clone()).collect();
                    out.push((word[..pre].to_vec(), word[pre..].to_vec()));
                }
            }
        }
        out
    }

    fn arb_ltl() -> impl Strategy<Value = L> {
        let leaf = prop_oneof![Just(L::True), Just(L::False), (1..=2u32).prop_map(|j| L::atom(1, j))];
        leaf.prop_recursive(4, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(L::not),
                inner.clone().prop_map(L::eventually),
                inner.clone().prop_map(L::always),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| L::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| L::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| L::until(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| L::release(a, b)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn print_parse_round_trip(f in arb_ltl()) {
            prop_assert_eq!(parse_ltl(&f.to_string()).unwrap(), f);
        }

        #[test]
        fn nnf_is_equivalent_on_short_lassos(f in arb_ltl()) {
            let g = f.nnf();
            for (pre, cyc) in lassos(4) {
                prop_assert_eq!(sat(&f, &pre, &cyc)[0], sat(&g, &pre, &cyc)[0]);
            }
        }

        #[test]
        fn nnf_negations_only_on_atoms(f in arb_ltl()) {
            let mut ok = true;
            f.nnf().visit(&mut |h| if let L::Not(a) = h { ok &= matches!(**a, L::Atom(_)) });
            prop_assert!(ok);
        }
    }
}
