//! A subset of the HOA v1 format: state-based Büchi acceptance and explicit
//! edge labels.
//!
//! AP names are bound to `pi(i,j)` atoms either by spelling the atom as the
//! name (`AP: 2 "pi(1,1)" "pi(2,3)"`) or through an explicit list of
//! [`ApBinding`]s.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{BuchiError, Nba};
use crate::formula::{parse_prop, Atom, DnfClause, PropFormula};

/// Maps an AP name used in a HOA file to an atom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApBinding {
    pub name: String,
    pub atom: Atom,
}

pub fn parse_hoa(text: &str) -> Result<Nba, BuchiError> {
    parse_hoa_with_map(text, &[])
}

pub fn parse_hoa_with_map(text: &str, bindings: &[ApBinding]) -> Result<Nba, BuchiError> {
    let err = |line: usize, msg: &str| BuchiError::Hoa {
        line,
        msg: msg.to_string(),
    };
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut it = lines.into_iter().peekable();

    let mut n_states = None;
    let mut starts = Vec::new();
    let mut aps: Vec<Atom> = Vec::new();
    let mut all_accepting = false;
    let mut seen_version = false;
    let mut seen_acceptance = false;
    for (no, line) in it.by_ref() {
        if line == "--BODY--" {
            break;
        }
        let (key, rest) = line.split_once(':').ok_or_else(|| err(no, "expected `header: value`"))?;
        let rest = rest.trim();
        match key.trim() {
            "HOA" => {
                if rest != "v1" {
                    return Err(err(no, "only HOA v1 is supported"));
                }
                seen_version = true;
            }
            "States" => n_states = Some(rest.parse::<usize>().map_err(|_| err(no, "bad state count"))?),
            "Start" => {
                if rest.contains('&') {
                    return Err(err(no, "conjunctive initial states are not supported"));
                }
                starts.push(rest.parse::<usize>().map_err(|_| err(no, "bad start state"))?);
            }
            "AP" => {
                let toks = header_tokens(rest).map_err(|m| err(no, &m))?;
                let count: usize = toks
                    .first()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(no, "AP count missing"))?;
                if toks.len() != count + 1 {
                    return Err(err(no, "AP count does not match the names given"));
                }
                for name in &toks[1..] {
                    aps.push(resolve_ap(name, bindings)?);
                }
            }
            "acc-name" => {
                let name = rest.split_whitespace().next().unwrap_or("");
                match name {
                    "Buchi" => {}
                    "all" => all_accepting = true,
                    _ => return Err(BuchiError::UnsupportedAcceptance(rest.to_string())),
                }
            }
            "Acceptance" => {
                let compact: String = rest.chars().filter(|c| !c.is_whitespace()).collect();
                match compact.as_str() {
                    "1Inf(0)" => all_accepting = false,
                    "0t" => all_accepting = true,
                    _ => return Err(BuchiError::UnsupportedAcceptance(rest.to_string())),
                }
                seen_acceptance = true;
            }
            _ => {}
        }
    }
    if !seen_version {
        return Err(err(1, "missing `HOA: v1` header"));
    }
    if !seen_acceptance {
        return Err(err(1, "missing `Acceptance:` header"));
    }
    let n = n_states.ok_or_else(|| err(1, "missing `States:` header"))?;
    let mut b = Nba::new(n);
    for s in starts {
        if s >= n {
            return Err(err(1, "start state out of range"));
        }
        b.add_initial(s);
    }

    let mut current: Option<usize> = None;
    let mut ended = false;
    for (no, line) in it {
        if line == "--END--" {
            ended = true;
            break;
        }
        if let Some(rest) = line.strip_prefix("State:") {
            let rest = rest.trim();
            if rest.starts_with('[') {
                return Err(err(no, "state labels are not supported"));
            }
            let id_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let q: usize = rest[..id_end].parse().map_err(|_| err(no, "bad state id"))?;
            if q >= n {
                return Err(err(no, "state id out of range"));
            }
            let tail = rest[id_end..].trim();
            let tail = skip_quoted(tail);
            if let Some(marks) = tail.strip_prefix('{') {
                let inner = marks.split('}').next().unwrap_or("");
                let sets: Vec<&str> = inner.split_whitespace().collect();
                if sets.iter().any(|s| *s != "0") {
                    return Err(BuchiError::UnsupportedAcceptance(format!("acceptance set {{{inner}}}")));
                }
                b.set_accepting(q, !sets.is_empty());
            }
            if all_accepting {
                b.set_accepting(q, true);
            }
            current = Some(q);
            continue;
        }
        let q = current.ok_or_else(|| err(no, "edge before any `State:`"))?;
        let rest = line.strip_prefix('[').ok_or_else(|| err(no, "implicit edge labels are not supported"))?;
        let close = rest.find(']').ok_or_else(|| err(no, "unterminated label"))?;
        let guard = parse_label(&rest[..close], &aps).map_err(|m| err(no, &m))?;
        let tail = rest[close + 1..].trim();
        let dst_end = tail.find(|c: char| !c.is_ascii_digit()).unwrap_or(tail.len());
        let dst: usize = tail[..dst_end].parse().map_err(|_| err(no, "bad edge target"))?;
        if dst >= n {
            return Err(err(no, "edge target out of range"));
        }
        if tail[dst_end..].trim().starts_with('{') {
            return Err(BuchiError::UnsupportedAcceptance("transition-based marks".into()));
        }
        b.add_edge(q, guard, dst);
    }
    if !ended {
        return Err(err(text.lines().count(), "missing `--END--`"));
    }
    Ok(b)
}

fn resolve_ap(name: &str, bindings: &[ApBinding]) -> Result<Atom, BuchiError> {
    if let Some(b) = bindings.iter().find(|b| b.name == name) {
        return Ok(b.atom);
    }
    match parse_prop(name) {
        Ok(PropFormula::Atom(a)) => Ok(a),
        _ => Err(BuchiError::UnmappedAp(name.to_string())),
    }
}

fn skip_quoted(s: &str) -> &str {
    if let Some(rest) = s.strip_prefix('"') {
        match rest.find('"') {
            Some(i) => rest[i + 1..].trim(),
            None => "",
        }
    } else {
        s
    }
}

/// Splits a header value into bare words and quoted strings (quotes removed).
fn header_tokens(s: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut tok = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some('\\') => tok.extend(chars.next()),
                    Some(c) => tok.push(c),
                    None => return Err("unterminated string".into()),
                }
            }
            out.push(tok);
        } else {
            let mut tok = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                tok.push(c);
                chars.next();
            }
            out.push(tok);
        }
    }
    Ok(out)
}

/// Parses a HOA label expression (`t`, `f`, AP indices, `!`, `&`, `|`).
fn parse_label(s: &str, aps: &[Atom]) -> Result<PropFormula, String> {
    let toks: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = LabelParser { toks, at: 0, aps };
    let f = p.or()?;
    if p.at != p.toks.len() {
        return Err(format!("unexpected `{}` in label", p.toks[p.at]));
    }
    Ok(f)
}

struct LabelParser<'a> {
    toks: Vec<char>,
    at: usize,
    aps: &'a [Atom],
}

impl LabelParser<'_> {
    fn peek(&self) -> Option<char> {
        self.toks.get(self.at).copied()
    }

    fn or(&mut self) -> Result<PropFormula, String> {
        let mut items = vec![self.and()?];
        while self.peek() == Some('|') {
            self.at += 1;
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { PropFormula::Or(items) })
    }

    fn and(&mut self) -> Result<PropFormula, String> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some('&') {
            self.at += 1;
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { PropFormula::And(items) })
    }

    fn unary(&mut self) -> Result<PropFormula, String> {
        match self.peek() {
            Some('!') => {
                self.at += 1;
                Ok(PropFormula::not(self.unary()?))
            }
            Some('(') => {
                self.at += 1;
                let f = self.or()?;
                if self.peek() != Some(')') {
                    return Err("expected `)` in label".into());
                }
                self.at += 1;
                Ok(f)
            }
            Some('t') => {
                self.at += 1;
                Ok(PropFormula::True)
            }
            Some('f') => {
                self.at += 1;
                Ok(PropFormula::False)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.at;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.at += 1;
                }
                let idx: usize = self.toks[start..self.at].iter().collect::<String>().parse().unwrap();
                self.aps
                    .get(idx)
                    .map(|a| PropFormula::Atom(*a))
                    .ok_or_else(|| format!("AP index {idx} out of range"))
            }
            Some(c) => Err(format!("unexpected `{c}` in label")),
            None => Err("empty label".into()),
        }
    }
}

/// Writes `nba` as HOA v1 with `pi(i,j)` AP names.
pub fn to_hoa(nba: &Nba, name: Option<&str>) -> String {
    let atoms: Vec<Atom> = nba.atoms().into_iter().collect();
    let index: BTreeMap<Atom, usize> = atoms.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let mut s = String::new();
    writeln!(s, "HOA: v1").unwrap();
    if let Some(name) = name {
        writeln!(s, "name: \"{}\"", name.replace('\\', "\\\\").replace('"', "\\\"")).unwrap();
    }
    writeln!(s, "States: {}", nba.n_states()).unwrap();
    for q in nba.initial() {
        writeln!(s, "Start: {q}").unwrap();
    }
    write!(s, "AP: {}", atoms.len()).unwrap();
    for a in &atoms {
        write!(s, " \"{a}\"").unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "acc-name: Buchi").unwrap();
    writeln!(s, "Acceptance: 1 Inf(0)").unwrap();
    writeln!(s, "properties: explicit-labels state-acc").unwrap();
    writeln!(s, "--BODY--").unwrap();
    for q in 0..nba.n_states() {
        if nba.is_accepting(q) {
            writeln!(s, "State: {q} {{0}}").unwrap();
        } else {
            writeln!(s, "State: {q}").unwrap();
        }
        for e in nba.out_edges(q) {
            writeln!(s, "[{}] {}", label_text(&e.clauses, &index), e.dst).unwrap();
        }
    }
    writeln!(s, "--END--").unwrap();
    s
}

fn label_text(clauses: &[DnfClause], index: &BTreeMap<Atom, usize>) -> String {
    if clauses.is_empty() {
        return "f".into();
    }
    clauses
        .iter()
        .map(|c| {
            if c.is_empty() {
                return "t".to_string();
            }
            let lits: Vec<String> = c
                .pos
                .iter()
                .map(|a| index[a].to_string())
                .chain(c.neg.iter().map(|a| format!("!{}", index[a])))
                .collect();
            lits.join("&")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::LabelSet;

    const UNIVERSAL: &str = "HOA: v1\nStates: 1\nStart: 0\nAP: 0\nacc-name: Buchi\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0 {0}\n[t] 0\n--END--\n";

    const EVENTUALLY: &str = r#"HOA: v1
name: "F p"
States: 2
Start: 0
AP: 1 "p"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[!0] 0
[0] 1
State: 1 {0}
[t] 1
--END--
"#;

    fn set(atoms: &[(u32, u32)]) -> LabelSet {
        atoms.iter().map(|&(r, j)| Atom::new(r, j)).collect()
    }

    #[test]
    fn universal_document() {
        let b = parse_hoa(UNIVERSAL).unwrap();
        assert_eq!(b.n_states(), 1);
        assert!(b.accepts_lasso(&[set(&[(1, 1)])], &[set(&[])]));
    }

    #[test]
    fn eventually_with_binding() {
        let map = [ApBinding {
            name: "p".into(),
            atom: Atom::new(1, 2),
        }];
        let b = parse_hoa_with_map(EVENTUALLY, &map).unwrap();
        assert!(b.accepts_lasso(&[set(&[(1, 2)])], &[set(&[])]));
        assert!(!b.accepts_lasso::<LabelSet>(&[], &[set(&[])]));
        assert_eq!(parse_hoa(EVENTUALLY), Err(BuchiError::UnmappedAp("p".into())));
    }

    #[test]
    fn rejects_generalized_acceptance() {
        let text = UNIVERSAL.replace("acc-name: Buchi", "acc-name: generalized-Buchi 2");
        assert!(matches!(parse_hoa(&text), Err(BuchiError::UnsupportedAcceptance(_))));
        let text = UNIVERSAL.replace("Acceptance: 1 Inf(0)", "Acceptance: 2 Inf(0)&Inf(1)");
        assert!(matches!(parse_hoa(&text), Err(BuchiError::UnsupportedAcceptance(_))));
        let text = UNIVERSAL.replace("[t] 0", "[t] 0 {0}");
        assert!(matches!(parse_hoa(&text), Err(BuchiError::UnsupportedAcceptance(_))));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(parse_hoa("States: 1\n--BODY--\n--END--"), Err(BuchiError::Hoa { .. })));
        let text = UNIVERSAL.replace("[t] 0", "[t] 3");
        assert!(matches!(parse_hoa(&text), Err(BuchiError::Hoa { line: 9, .. })));
        let text = UNIVERSAL.replace("--END--\n", "");
        assert!(matches!(parse_hoa(&text), Err(BuchiError::Hoa { .. })));
    }

    #[test]
    fn emit_and_reparse() {
        let b = crate::buchi::ltl_to_nba(&crate::formula::parse_ltl("G F pi(1,1) && F pi(2,3)").unwrap()).unwrap();
        let text = to_hoa(&b, Some("task"));
        let c = parse_hoa(&text).unwrap();
        assert_eq!(c.n_states(), b.n_states());
        assert_eq!(c.n_edges(), b.n_edges());
        assert_eq!(to_hoa(&c, Some("task")), text);
    }
}
