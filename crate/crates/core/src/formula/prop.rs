use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::syntax::{Cursor, Tok};
use super::{Atom, FormulaError, Valuation};

/// Default cap on the number of clauses produced by [`to_dnf`].
pub const DEFAULT_DNF_BOUND: usize = 4096;

/// Boolean guard over `pi(i,j)` atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropFormula {
    True,
    False,
    Atom(Atom),
    Not(Box<PropFormula>),
    And(Vec<PropFormula>),
    Or(Vec<PropFormula>),
}

impl PropFormula {
    pub fn atom(robot: u32, region: u32) -> Self {
        PropFormula::Atom(Atom::new(robot, region))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: PropFormula) -> Self {
        PropFormula::Not(Box::new(f))
    }

    /// Conjunction with constant folding; a single operand is returned as is.
    pub fn and_all(items: impl IntoIterator<Item = PropFormula>) -> Self {
        let mut out = Vec::new();
        for f in items {
            match f {
                PropFormula::True => {}
                PropFormula::False => return PropFormula::False,
                f => out.push(f),
            }
        }
        match out.len() {
            0 => PropFormula::True,
            1 => out.pop().unwrap(),
            _ => PropFormula::And(out),
        }
    }

    /// Disjunction with constant folding; a single operand is returned as is.
    pub fn or_all(items: impl IntoIterator<Item = PropFormula>) -> Self {
        let mut out = Vec::new();
        for f in items {
            match f {
                PropFormula::False => {}
                PropFormula::True => return PropFormula::True,
                f => out.push(f),
            }
        }
        match out.len() {
            0 => PropFormula::False,
            1 => out.pop().unwrap(),
            _ => PropFormula::Or(out),
        }
    }

    pub fn eval<V: Valuation + ?Sized>(&self, labels: &V) -> bool {
        match self {
            PropFormula::True => true,
            PropFormula::False => false,
            PropFormula::Atom(a) => labels.holds(*a),
            PropFormula::Not(f) => !f.eval(labels),
            PropFormula::And(fs) => fs.iter().all(|f| f.eval(labels)),
            PropFormula::Or(fs) => fs.iter().any(|f| f.eval(labels)),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            PropFormula::True | PropFormula::False => {}
            PropFormula::Atom(a) => {
                out.insert(*a);
            }
            PropFormula::Not(f) => f.collect_atoms(out),
            PropFormula::And(fs) | PropFormula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }

    pub fn check_bounds(&self, n_robots: u32, n_regions: u32) -> Result<(), FormulaError> {
        self.atoms()
            .into_iter()
            .try_for_each(|a| a.check_bounds(n_robots, n_regions))
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropFormula::True => write!(f, "true"),
            PropFormula::False => write!(f, "false"),
            PropFormula::Atom(a) => write!(f, "{a}"),
            PropFormula::Not(g) => write!(f, "!{g}"),
            PropFormula::And(gs) | PropFormula::Or(gs) => {
                let op = if matches!(self, PropFormula::And(_)) { " && " } else { " || " };
                write!(f, "(")?;
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{op}")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for PropFormula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PropFormula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_prop(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses a guard. Precedence is `!` over `&&` over `||`.
pub fn parse_prop(text: &str) -> Result<PropFormula, FormulaError> {
    let mut cur = Cursor::new(text)?;
    let f = prop_or(&mut cur)?;
    cur.finish()?;
    Ok(f)
}

/// Parses a guard and rejects atoms outside `n_robots` x `n_regions`.
pub fn parse_prop_bounded(text: &str, n_robots: u32, n_regions: u32) -> Result<PropFormula, FormulaError> {
    let f = parse_prop(text)?;
    f.check_bounds(n_robots, n_regions)?;
    Ok(f)
}

fn prop_or(cur: &mut Cursor) -> Result<PropFormula, FormulaError> {
    let mut items = vec![prop_and(cur)?];
    while cur.eat(&Tok::Or) {
        items.push(prop_and(cur)?);
    }
    Ok(if items.len() == 1 { items.pop().unwrap() } else { PropFormula::Or(items) })
}

fn prop_and(cur: &mut Cursor) -> Result<PropFormula, FormulaError> {
    let mut items = vec![prop_unary(cur)?];
    while cur.eat(&Tok::And) {
        items.push(prop_unary(cur)?);
    }
    Ok(if items.len() == 1 { items.pop().unwrap() } else { PropFormula::And(items) })
}

fn prop_unary(cur: &mut Cursor) -> Result<PropFormula, FormulaError> {
    if cur.eat(&Tok::Not) {
        return Ok(PropFormula::not(prop_unary(cur)?));
    }
    let pos = cur.pos();
    match cur.peek().clone() {
        Tok::LParen => {
            cur.bump();
            let f = prop_or(cur)?;
            cur.expect(&Tok::RParen, "`)`")?;
            Ok(f)
        }
        Tok::Word(w) => {
            cur.bump();
            match w.as_str() {
                "true" => Ok(PropFormula::True),
                "false" => Ok(PropFormula::False),
                "pi" => Ok(PropFormula::Atom(cur.atom_args()?)),
                "U" | "R" | "F" | "G" | "X" => Err(FormulaError::UnsupportedOperator { op: w, pos }),
                _ => Err(FormulaError::Syntax {
                    pos,
                    msg: format!("unknown identifier `{w}`"),
                }),
            }
        }
        Tok::Diamond | Tok::Square => Err(FormulaError::UnsupportedOperator {
            op: if *cur.peek() == Tok::Diamond { "<>".into() } else { "[]".into() },
            pos,
        }),
        _ => Err(cur.error("expected a guard")),
    }
}

/// Conjunction of literals: every atom in `pos` true, every atom in `neg` false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DnfClause {
    pub pos: BTreeSet<Atom>,
    pub neg: BTreeSet<Atom>,
}

impl DnfClause {
    pub fn new(pos: impl IntoIterator<Item = Atom>, neg: impl IntoIterator<Item = Atom>) -> Self {
        DnfClause {
            pos: pos.into_iter().collect(),
            neg: neg.into_iter().collect(),
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.pos.is_disjoint(&self.neg)
    }

    pub fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn satisfied_by<V: Valuation + ?Sized>(&self, labels: &V) -> bool {
        self.pos.iter().all(|a| labels.holds(*a)) && !self.neg.iter().any(|a| labels.holds(*a))
    }

    /// Conjunction of two clauses, or `None` when they contradict.
    pub fn conjoin(&self, other: &DnfClause) -> Option<DnfClause> {
        let pos: BTreeSet<Atom> = self.pos.union(&other.pos).copied().collect();
        let neg: BTreeSet<Atom> = self.neg.union(&other.neg).copied().collect();
        if pos.is_disjoint(&neg) {
            Some(DnfClause { pos, neg })
        } else {
            None
        }
    }

    /// True when every literal of `self` also appears in `other`, i.e. `other` implies `self`.
    pub fn is_implied_by(&self, other: &DnfClause) -> bool {
        self.pos.is_subset(&other.pos) && self.neg.is_subset(&other.neg)
    }

    pub fn to_formula(&self) -> PropFormula {
        PropFormula::and_all(
            self.pos
                .iter()
                .map(|a| PropFormula::Atom(*a))
                .chain(self.neg.iter().map(|a| PropFormula::not(PropFormula::Atom(*a)))),
        )
    }
}

/// Disjunctive normal form of `f`.
///
/// Contradictory clauses are dropped and duplicates merged, so `False` maps to
/// no clauses and `True` to a single empty clause.
pub fn to_dnf(f: &PropFormula, bound: usize) -> Result<Vec<DnfClause>, FormulaError> {
    let set = dnf_rec(f, false, bound)?;
    Ok(set.into_iter().collect())
}

fn dnf_rec(f: &PropFormula, negated: bool, bound: usize) -> Result<BTreeSet<DnfClause>, FormulaError> {
    let lit = |a: Atom, positive: bool| {
        let mut c = DnfClause::default();
        if positive {
            c.pos.insert(a);
        } else {
            c.neg.insert(a);
        }
        BTreeSet::from([c])
    };
    let out = match (f, negated) {
        (PropFormula::True, false) | (PropFormula::False, true) => BTreeSet::from([DnfClause::default()]),
        (PropFormula::True, true) | (PropFormula::False, false) => BTreeSet::new(),
        (PropFormula::Atom(a), n) => lit(*a, !n),
        (PropFormula::Not(g), n) => dnf_rec(g, !n, bound)?,
        (PropFormula::And(gs), false) | (PropFormula::Or(gs), true) => {
            let mut acc = BTreeSet::from([DnfClause::default()]);
            for g in gs {
                let rhs = dnf_rec(g, negated, bound)?;
                let mut next = BTreeSet::new();
                for a in &acc {
                    for b in &rhs {
                        if let Some(c) = a.conjoin(b) {
                            next.insert(c);
                            if next.len() > bound {
                                return Err(FormulaError::DnfTooLarge { bound });
                            }
                        }
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        (PropFormula::Or(gs), false) | (PropFormula::And(gs), true) => {
            let mut acc = BTreeSet::new();
            for g in gs {
                acc.extend(dnf_rec(g, negated, bound)?);
                if acc.len() > bound {
                    return Err(FormulaError::DnfTooLarge { bound });
                }
            }
            acc
        }
    };
    Ok(out)
}
