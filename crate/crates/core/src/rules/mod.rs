//! Horn rules over relations, their measurement against an embedding model,
//! and the per-head index the reasoner consults.
//!
//! A rule has one body atom connecting `X` and `Y`, or two body atoms that
//! chain `X` to `Y` through `Z`, each atom in either argument order. The
//! head is always `H(X, Y)`. Two-atom bodies are stored with the atom that
//! mentions `X` first.

mod amie;
mod mine;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::embedding::TranslationModel;
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, RelationId};

pub use amie::{format_amie, parse_amie, AmieImport};
pub use mine::{mine_rules, ConfidenceKind, MinerConfig};

/// Every measured rule score is at least this, so heuristic scores grow
/// strictly along any rule path.
pub const OMEGA_FLOOR: f64 = 1.0 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    fn letter(self) -> char {
        match self {
            Var::X => 'X',
            Var::Y => 'Y',
            Var::Z => 'Z',
        }
    }

    fn from_letter(s: &str) -> Option<Var> {
        match s.trim() {
            "X" => Some(Var::X),
            "Y" => Some(Var::Y),
            "Z" => Some(Var::Z),
            _ => None,
        }
    }

    /// Position along the `X -> Z -> Y` path.
    fn path_position(self) -> u8 {
        match self {
            Var::X => 0,
            Var::Z => 1,
            Var::Y => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub relation: RelationId,
    pub arg1: Var,
    pub arg2: Var,
}

impl Atom {
    pub fn new(relation: RelationId, arg1: Var, arg2: Var) -> Self {
        Self {
            relation,
            arg1,
            arg2,
        }
    }

    fn mentions(&self, v: Var) -> bool {
        self.arg1 == v || self.arg2 == v
    }

    /// +1 when the atom points along the `X -> Y` path, -1 against it.
    pub fn path_sign(&self) -> f64 {
        if self.arg1.path_position() < self.arg2.path_position() {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    body: Vec<Atom>,
    head: RelationId,
    pub support: u64,
    pub confidence: f64,
    /// Set once the rule has been measured (or read from a rule file).
    pub omega: Option<f64>,
}

impl Rule {
    /// Validates the body shape and puts the `X` atom first.
    pub fn new(mut body: Vec<Atom>, head: RelationId) -> Result<Self> {
        let invalid = |why: &str| Err(Error::Config(format!("invalid rule body: {why}")));
        if body.iter().any(|a| a.arg1 == a.arg2) {
            return invalid("atom repeats a variable");
        }
        match body.len() {
            1 => {
                if !(body[0].mentions(Var::X) && body[0].mentions(Var::Y)) {
                    return invalid("single atom must connect X and Y");
                }
            }
            2 => {
                if !body.iter().all(|a| a.mentions(Var::Z)) {
                    return invalid("both atoms must mention Z");
                }
                let x = body.iter().filter(|a| a.mentions(Var::X)).count();
                let y = body.iter().filter(|a| a.mentions(Var::Y)).count();
                if x != 1 || y != 1 {
                    return invalid("atoms must chain X to Y through Z");
                }
                if !body[0].mentions(Var::X) {
                    body.swap(0, 1);
                }
            }
            n => return invalid(&format!("{n} body atoms (expected 1 or 2)")),
        }
        Ok(Self {
            body,
            head,
            support: 0,
            confidence: 0.0,
            omega: None,
        })
    }

    /// `B1(X,Z) & B2(Z,Y) => H(X,Y)`.
    pub fn chain(b1: RelationId, b2: RelationId, head: RelationId) -> Self {
        Rule::new(
            vec![Atom::new(b1, Var::X, Var::Z), Atom::new(b2, Var::Z, Var::Y)],
            head,
        )
        .expect("chain shape is valid")
    }

    /// `B(X,Y) => H(X,Y)`, or `B(Y,X) => H(X,Y)` when `reversed`.
    pub fn single(body: RelationId, reversed: bool, head: RelationId) -> Self {
        let atom = if reversed {
            Atom::new(body, Var::Y, Var::X)
        } else {
            Atom::new(body, Var::X, Var::Y)
        };
        Rule::new(vec![atom], head).expect("single-atom shape is valid")
    }

    pub fn with_stats(mut self, support: u64, confidence: f64) -> Self {
        self.support = support;
        self.confidence = confidence;
        self
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn head(&self) -> RelationId {
        self.head
    }

    /// `H(X,Y) => H(X,Y)`.
    pub fn is_tautology(&self) -> bool {
        self.body.len() == 1 && self.body[0] == Atom::new(self.head, Var::X, Var::Y)
    }

    /// Identity of the rule up to renaming of `Z` and body-atom order.
    pub fn key(&self) -> RuleKey {
        RuleKey {
            head: self.head,
            body: self.body.clone(),
        }
    }

    pub fn display<'a>(&'a self, g: &'a KnowledgeGraph) -> RuleDisplay<'a> {
        RuleDisplay { rule: self, g }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleKey {
    pub head: RelationId,
    pub body: Vec<Atom>,
}

pub struct RuleDisplay<'a> {
    rule: &'a Rule,
    g: &'a KnowledgeGraph,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.rule.body.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(
                f,
                "{}({},{})",
                self.g.relation_name(a.relation),
                a.arg1.letter(),
                a.arg2.letter()
            )?;
        }
        write!(f, " => {}(X,Y)", self.g.relation_name(self.rule.head))
    }
}

/// Rule score `exp(||path_sum - H|| / k)`, floored at [`OMEGA_FLOOR`].
///
/// `path_sum` adds each body relation vector with the sign of its direction
/// along the `X -> Y` path, so `B(Y,X) => H(X,Y)` compares `-B` with `H`.
pub fn measure_rule<M: TranslationModel + ?Sized>(model: &M, rule: &Rule) -> Result<f64> {
    let n = model.num_relations();
    for r in rule.body.iter().map(|a| a.relation).chain([rule.head]) {
        if r.index() >= n {
            return Err(Error::Unmeasurable(format!(
                "relation {} outside model with {n} relations",
                r.0
            )));
        }
    }
    let k = model.dim();
    let mut diff: Vec<f64> = model
        .relation_vector(rule.head)
        .iter()
        .map(|x| -x)
        .collect();
    for atom in &rule.body {
        let sign = atom.path_sign();
        for (d, b) in diff.iter_mut().zip(model.relation_vector(atom.relation)) {
            *d += sign * b;
        }
    }
    let omega = (model.norm_order().norm(&diff) / k as f64).exp();
    Ok(omega.max(OMEGA_FLOOR))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleId(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedRule {
    pub id: RuleId,
    pub rule: Rule,
    pub omega: f64,
}

/// Measured rules grouped by head relation, ascending by score within each
/// group. Rule ids are positions in the flat, grouped order.
#[derive(Debug, Clone, Default)]
pub struct RuleIndex {
    rules: Vec<IndexedRule>,
    by_head: HashMap<RelationId, Range<usize>>,
}

impl RuleIndex {
    /// Measures every rule against `model` and indexes the result.
    pub fn build<M: TranslationModel + ?Sized>(rules: Vec<Rule>, model: &M) -> Result<Self> {
        let measured = rules
            .into_iter()
            .map(|r| {
                let omega = measure_rule(model, &r)?;
                Ok((r, omega))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_scored(measured))
    }

    /// Indexes rules whose scores are already known. Scores below
    /// [`OMEGA_FLOOR`] are raised to it.
    pub fn from_scored(rules: Vec<(Rule, f64)>) -> Self {
        let mut unique: BTreeMap<RuleKey, (Rule, f64)> = BTreeMap::new();
        for (mut rule, omega) in rules {
            let omega = omega.max(OMEGA_FLOOR);
            rule.omega = Some(omega);
            match unique.get_mut(&rule.key()) {
                Some(existing) if existing.0.confidence >= rule.confidence => {}
                Some(existing) => *existing = (rule, omega),
                None => {
                    unique.insert(rule.key(), (rule, omega));
                }
            }
        }
        let mut sorted: Vec<(RuleKey, Rule, f64)> =
            unique.into_iter().map(|(k, (r, o))| (k, r, o)).collect();
        sorted.sort_by(|a, b| {
            a.0.head
                .cmp(&b.0.head)
                .then(a.2.total_cmp(&b.2))
                .then_with(|| a.0.cmp(&b.0))
        });

        let mut index = RuleIndex::default();
        for (i, (key, rule, omega)) in sorted.into_iter().enumerate() {
            index
                .by_head
                .entry(key.head)
                .and_modify(|range| range.end = i + 1)
                .or_insert(i..i + 1);
            index.rules.push(IndexedRule {
                id: RuleId(i as u32),
                rule,
                omega,
            });
        }
        index
    }

    pub fn rules_for(&self, head: RelationId) -> &[IndexedRule] {
        match self.by_head.get(&head) {
            Some(range) => &self.rules[range.clone()],
            None => &[],
        }
    }

    pub fn get(&self, id: RuleId) -> &IndexedRule {
        &self.rules[id.0 as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &IndexedRule> {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// One rule per line:
/// `B1(v,v) & B2(v,v) => H(X,Y) <TAB> support <TAB> confidence <TAB> omega`.
pub fn format_rule(rule: &Rule, g: &KnowledgeGraph) -> String {
    let mut line = format!("{}\t{}\t{}", rule.display(g), rule.support, rule.confidence);
    if let Some(omega) = rule.omega {
        line.push('\t');
        line.push_str(&omega.to_string());
    }
    line
}

/// Writes every indexed rule, grouped by head relation and ascending by score.
pub fn write_rules<W: Write>(mut w: W, index: &RuleIndex, g: &KnowledgeGraph) -> Result<()> {
    for entry in index.iter() {
        writeln!(w, "{}", format_rule(&entry.rule, g))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses one canonical rule line. The omega column is optional.
pub fn parse_rule_line(line: &str, g: &KnowledgeGraph) -> std::result::Result<Rule, String> {
    let mut cols = line.split('\t');
    let text = cols.next().unwrap_or_default();
    let (body_text, head_text) = text
        .split_once("=>")
        .ok_or_else(|| "missing \"=>\"".to_string())?;

    let parse_atom = |s: &str| -> std::result::Result<Atom, String> {
        let s = s.trim();
        let open = s
            .rfind('(')
            .ok_or_else(|| format!("malformed atom {s:?}"))?;
        let args = s[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| format!("malformed atom {s:?}"))?;
        let name = s[..open].trim();
        let relation = g
            .relation_id(name)
            .ok_or_else(|| format!("unknown relation {name:?}"))?;
        let (a1, a2) = args
            .split_once(',')
            .ok_or_else(|| format!("malformed arguments in {s:?}"))?;
        let arg1 = Var::from_letter(a1).ok_or_else(|| format!("bad variable {a1:?}"))?;
        let arg2 = Var::from_letter(a2).ok_or_else(|| format!("bad variable {a2:?}"))?;
        Ok(Atom::new(relation, arg1, arg2))
    };

    let head = parse_atom(head_text)?;
    if (head.arg1, head.arg2) != (Var::X, Var::Y) {
        return Err("head must be H(X,Y)".into());
    }
    let body = body_text
        .split('&')
        .map(parse_atom)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut rule = Rule::new(body, head.relation).map_err(|e| e.to_string())?;

    let mut number = |name: &str| -> std::result::Result<Option<f64>, String> {
        match cols.next().map(str::trim).filter(|c| !c.is_empty()) {
            None => Ok(None),
            Some(c) => c
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("bad {name} value {c:?}")),
        }
    };
    if let Some(s) = number("support")? {
        if s < 0.0 || s.fract() != 0.0 {
            return Err(format!("support must be a non-negative integer, got {s}"));
        }
        rule.support = s as u64;
    }
    if let Some(c) = number("confidence")? {
        rule.confidence = c;
    }
    rule.omega = number("omega")?;
    Ok(rule)
}

/// Reads a canonical rule file. Blank lines and `#` comments are skipped.
pub fn read_rules<R: Read>(reader: R, g: &KnowledgeGraph) -> Result<Vec<Rule>> {
    let mut rules = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rule = parse_rule_line(&line, g).map_err(|message| Error::Parse {
            line: i + 1,
            message,
        })?;
        rules.push(rule);
    }
    Ok(rules)
}
