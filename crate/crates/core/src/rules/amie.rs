//! Import of AMIE rule listings.
//!
//! AMIE prints one rule per line as `?a  r1  ?b  ?b  r2  ?c   => ?a  h  ?c`
//! followed by tab-separated numbers (head coverage, standard confidence,
//! PCA confidence, positive examples, ...). Lines without `=>` are headers
//! or log output and are ignored.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};

use super::{Atom, Rule, Var};
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, RelationId};

const STD_CONFIDENCE_COLUMN: usize = 2;
const POSITIVE_EXAMPLES_COLUMN: usize = 4;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AmieImport {
    pub rules: Vec<Rule>,
    /// Rules naming a relation the graph does not know.
    pub skipped_unknown_relation: usize,
    /// Rules outside the supported shapes: more than two body atoms,
    /// constants, or bodies that do not chain the head variables.
    pub skipped_unsupported: usize,
}

enum LineOutcome {
    Rule(Rule),
    UnknownRelation,
    Unsupported,
}

pub fn parse_amie<R: Read>(reader: R, g: &KnowledgeGraph) -> Result<AmieImport> {
    let mut import = AmieImport::default();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if !line.contains("=>") {
            continue;
        }
        let outcome = parse_line(&line, g).map_err(|message| Error::Parse {
            line: i + 1,
            message,
        })?;
        match outcome {
            LineOutcome::Rule(r) => import.rules.push(r),
            LineOutcome::UnknownRelation => import.skipped_unknown_relation += 1,
            LineOutcome::Unsupported => import.skipped_unsupported += 1,
        }
    }
    if import.skipped_unknown_relation > 0 || import.skipped_unsupported > 0 {
        log::warn!(
            "AMIE import skipped {} rules with unknown relations and {} unsupported rules",
            import.skipped_unknown_relation,
            import.skipped_unsupported
        );
    }
    Ok(import)
}

fn parse_line(line: &str, g: &KnowledgeGraph) -> std::result::Result<LineOutcome, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    let (body_text, head_text) = cols[0]
        .split_once("=>")
        .ok_or_else(|| "missing \"=>\"".to_string())?;
    let body_tokens: Vec<&str> = body_text.split_whitespace().collect();
    let head_tokens: Vec<&str> = head_text.split_whitespace().collect();
    if head_tokens.len() != 3 {
        return Err(format!(
            "head must be \"?x relation ?y\", got {:?}",
            head_text.trim()
        ));
    }
    if body_tokens.is_empty() || body_tokens.len() % 3 != 0 {
        return Err(format!(
            "body is not a sequence of atoms: {:?}",
            body_text.trim()
        ));
    }

    let num = |idx: usize| -> std::result::Result<Option<f64>, String> {
        match cols.get(idx).map(|c| c.trim()).filter(|c| !c.is_empty()) {
            None => Ok(None),
            Some(c) => c
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("bad numeric column {c:?}")),
        }
    };
    let confidence = num(STD_CONFIDENCE_COLUMN)?.unwrap_or(0.0);
    let support = num(POSITIVE_EXAMPLES_COLUMN)?.unwrap_or(0.0);

    let is_var = |tok: &str| tok.starts_with('?');
    let (hx, hrel, hy) = (head_tokens[0], head_tokens[1], head_tokens[2]);
    if !is_var(hx) || !is_var(hy) || hx == hy {
        return Ok(LineOutcome::Unsupported);
    }
    if body_tokens.len() / 3 > 2 {
        return Ok(LineOutcome::Unsupported);
    }

    let mut vars: HashMap<&str, Var> = HashMap::from([(hx, Var::X), (hy, Var::Y)]);
    let mut relations = vec![hrel];
    let mut raw_atoms = Vec::new();
    for atom in body_tokens.chunks(3) {
        let (a, rel, b) = (atom[0], atom[1], atom[2]);
        if !is_var(a) || !is_var(b) {
            return Ok(LineOutcome::Unsupported);
        }
        for v in [a, b] {
            if !vars.contains_key(v) {
                if vars.values().any(|x| *x == Var::Z) {
                    return Ok(LineOutcome::Unsupported);
                }
                vars.insert(v, Var::Z);
            }
        }
        relations.push(rel);
        raw_atoms.push((vars[a], rel, vars[b]));
    }

    let lookup = |name: &str| g.relation_id(strip_brackets(name));
    if relations.iter().any(|r| lookup(r).is_none()) {
        return Ok(LineOutcome::UnknownRelation);
    }
    let head: RelationId = lookup(hrel).expect("checked above");
    let body: Vec<Atom> = raw_atoms
        .into_iter()
        .map(|(a, rel, b)| Atom::new(lookup(rel).expect("checked above"), a, b))
        .collect();
    match Rule::new(body, head) {
        Ok(rule) => Ok(LineOutcome::Rule(
            rule.with_stats(support.max(0.0) as u64, confidence),
        )),
        Err(_) => Ok(LineOutcome::Unsupported),
    }
}

fn strip_brackets(name: &str) -> &str {
    name.strip_prefix('<')
        .and_then(|n| n.strip_suffix('>'))
        .unwrap_or(name)
}

/// Renders a rule the way AMIE prints it, with the numeric columns this
/// importer reads (other columns zero).
pub fn format_amie(rule: &Rule, g: &KnowledgeGraph) -> String {
    let var = |v: Var| match v {
        Var::X => "?a",
        Var::Y => "?b",
        Var::Z => "?z",
    };
    let mut text = String::new();
    for a in rule.body() {
        text.push_str(&format!(
            "{}  {}  {}  ",
            var(a.arg1),
            g.relation_name(a.relation),
            var(a.arg2)
        ));
    }
    text.push_str(&format!(" => ?a  {}  ?b", g.relation_name(rule.head())));
    format!(
        "{text}\t0\t{}\t0\t{}\t0\t0\t?a",
        rule.confidence, rule.support
    )
}
