//! Propositional guards and LTL formulas without the next operator.
//!
//! Atoms are written `pi(i,j)` and mean "robot `i` is inside region `j`"
//! (both indices 1-based). The same lexer backs both grammars:
//!
//! ```text
//! prop  ::= or
//! or    ::= and ( "||" and )*
//! and   ::= unary ( "&&" unary )*
//! unary ::= "!" unary | primary
//!
//! ltl   ::= or
//! or    ::= and ( "||" and )*
//! and   ::= until ( "&&" until )*
//! until ::= unary ( ("U" | "R") until )?        right associative
//! unary ::= ("!" | "F" | "G" | "<>" | "[]") unary | primary
//!
//! primary ::= "true" | "false" | "pi" "(" INT "," INT ")" | "(" or ")"
//! ```
//!
//! `X` (next) is recognised only to be rejected.

mod ltl;
mod prop;
mod syntax;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ltl::{parse_ltl, LtlFormula};
pub use prop::{parse_prop, parse_prop_bounded, to_dnf, DnfClause, PropFormula, DEFAULT_DNF_BOUND};

/// Atomic proposition `pi(robot, region)`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub robot: u32,
    pub region: u32,
}

impl Atom {
    pub fn new(robot: u32, region: u32) -> Self {
        Atom { robot, region }
    }

    pub fn check_bounds(self, n_robots: u32, n_regions: u32) -> Result<(), FormulaError> {
        if self.robot == 0 || self.robot > n_robots || self.region == 0 || self.region > n_regions {
            return Err(FormulaError::AtomOutOfRange {
                atom: self,
                n_robots,
                n_regions,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pi({},{})", self.robot, self.region)
    }
}

impl Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        match parse_prop(&text) {
            Ok(PropFormula::Atom(a)) => Ok(a),
            _ => Err(serde::de::Error::custom(format!("`{text}` is not an atom pi(i,j)"))),
        }
    }
}

/// A set of atoms that are true at one instant.
pub type LabelSet = BTreeSet<Atom>;

/// Anything that can say whether an atom is currently true.
pub trait Valuation {
    fn holds(&self, atom: Atom) -> bool;
}

impl Valuation for BTreeSet<Atom> {
    fn holds(&self, atom: Atom) -> bool {
        self.contains(&atom)
    }
}

impl<V: Valuation + ?Sized> Valuation for &V {
    fn holds(&self, atom: Atom) -> bool {
        (**self).holds(atom)
    }
}

/// Per-robot region observation: entry `i` is the region robot `i+1` is in.
///
/// This is the compact form of a label set in which every robot satisfies at
/// most one atom, which is what the workspace labeling function produces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RobotLabels(pub Vec<Option<u32>>);

impl RobotLabels {
    pub fn empty(n_robots: usize) -> Self {
        RobotLabels(vec![None; n_robots])
    }

    pub fn to_set(&self) -> LabelSet {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|region| Atom::new(i as u32 + 1, region)))
            .collect()
    }
}

impl Valuation for RobotLabels {
    fn holds(&self, atom: Atom) -> bool {
        let idx = atom.robot as usize;
        idx >= 1 && idx <= self.0.len() && self.0[idx - 1] == Some(atom.region)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsupported operator `{op}` at offset {pos}")]
    UnsupportedOperator { op: String, pos: usize },
    #[error("atom {atom} out of range for {n_robots} robots and {n_regions} regions")]
    AtomOutOfRange {
        atom: Atom,
        n_robots: u32,
        n_regions: u32,
    },
    #[error("disjunctive normal form exceeds {bound} clauses")]
    DnfTooLarge { bound: usize },
}
