//! Brute-force reference implementations for checking the search and the
//! miner on small instances. Nothing here prunes, memoizes or uses the
//! adjacency indexes; only train membership and raw model scores.

use std::collections::{BTreeMap, BTreeSet};

use crate::embedding::TranslationModel;
use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationId, Triplet};
use crate::rules::{Atom, ConfidenceKind, MinerConfig, Rule, RuleIndex, Var};

fn open_score<M: TranslationModel + ?Sized>(model: &M, x: &Triplet) -> f64 {
    model.score_raw(x) / model.dim() as f64 + 1.0
}

fn bind(atom: &Atom, x: EntityId, y: EntityId, z: EntityId) -> Triplet {
    let pick = |v| match v {
        Var::X => x,
        Var::Y => y,
        Var::Z => z,
    };
    Triplet::new(pick(atom.arg1), atom.relation, pick(atom.arg2))
}

struct Walk<'a, M: ?Sized> {
    g: &'a KnowledgeGraph,
    model: &'a M,
    index: &'a RuleIndex,
    max_depth: usize,
    state_guard: usize,
    visited: usize,
    best: f64,
}

impl<M: TranslationModel + ?Sized> Walk<'_, M> {
    fn visit(&mut self, facts: &[Triplet], h: f64, depth: usize) -> Result<()> {
        self.visited += 1;
        if self.visited > self.state_guard {
            return Err(Error::InstanceTooLarge(self.visited));
        }
        let l = facts
            .iter()
            .filter(|t| !self.g.contains(t))
            .fold(h, |acc, t| acc * open_score(self.model, t));
        self.best = self.best.min(l);

        let Some(pos) = facts.iter().position(|t| !self.g.contains(t)) else {
            return Ok(());
        };
        if depth >= self.max_depth {
            return Ok(());
        }
        let open = facts[pos];
        for entry in self.index.iter() {
            if entry.rule.head() != open.relation {
                continue;
            }
            let body = entry.rule.body();
            let mut groundings: Vec<Vec<Triplet>> = Vec::new();
            if body.len() == 1 {
                let t = bind(&body[0], open.head, open.tail, open.head);
                if self.g.contains(&t) {
                    groundings.push(vec![t]);
                }
            } else {
                for z in self.g.entities() {
                    let pair: Vec<Triplet> = body
                        .iter()
                        .map(|a| bind(a, open.head, open.tail, z))
                        .collect();
                    if pair.iter().any(|t| self.g.contains(t)) {
                        groundings.push(pair);
                    }
                }
            }
            for replacement in groundings {
                let mut next = facts[..pos].to_vec();
                next.extend(replacement);
                next.extend_from_slice(&facts[pos + 1..]);
                self.visit(&next, h * entry.omega, depth + 1)?;
            }
        }
        Ok(())
    }
}

/// Least state score over every state reachable from `x` within `max_depth`
/// rewritings, by plain depth-first enumeration. Fails with
/// [`Error::InstanceTooLarge`] once more than `state_guard` states are seen.
pub fn exhaustive_phi<M: TranslationModel + ?Sized>(
    g: &KnowledgeGraph,
    model: &M,
    index: &RuleIndex,
    x: &Triplet,
    max_depth: usize,
    state_guard: usize,
) -> Result<f64> {
    let mut walk = Walk {
        g,
        model,
        index,
        max_depth,
        state_guard,
        visited: 0,
        best: f64::INFINITY,
    };
    walk.visit(&[*x], 1.0, 0)?;
    Ok(walk.best)
}

/// Every closed rule shape with up to `cfg.max_body_atoms` atoms, counted by
/// enumerating all `(x, y)` and `z` over the entity set.
pub fn exhaustive_rules(g: &KnowledgeGraph, cfg: &MinerConfig) -> Result<Vec<Rule>> {
    let n = g.num_entities();
    let work = n
        .saturating_pow(3)
        .saturating_mul(g.num_relations().pow(2).max(1));
    if work > 50_000_000 {
        return Err(Error::InstanceTooLarge(work));
    }
    let relations: Vec<RelationId> = g.relations().collect();
    let mut bodies: Vec<Vec<Atom>> = Vec::new();
    if cfg.max_body_atoms >= 1 {
        for &b in &relations {
            bodies.push(vec![Atom::new(b, Var::X, Var::Y)]);
            bodies.push(vec![Atom::new(b, Var::Y, Var::X)]);
        }
    }
    if cfg.max_body_atoms >= 2 {
        for &b1 in &relations {
            for &b2 in &relations {
                for (a1, a2) in [(Var::X, Var::Z), (Var::Z, Var::X)] {
                    for (c1, c2) in [(Var::Z, Var::Y), (Var::Y, Var::Z)] {
                        bodies.push(vec![Atom::new(b1, a1, a2), Atom::new(b2, c1, c2)]);
                    }
                }
            }
        }
    }

    let mut rules = Vec::new();
    for body in bodies {
        let mut pairs: BTreeSet<(EntityId, EntityId)> = BTreeSet::new();
        for x in g.entities() {
            for y in g.entities() {
                let holds = if body.len() == 1 {
                    g.contains(&bind(&body[0], x, y, x))
                } else {
                    g.entities()
                        .any(|z| body.iter().all(|a| g.contains(&bind(a, x, y, z))))
                };
                if holds {
                    pairs.insert((x, y));
                }
            }
        }
        if pairs.is_empty() {
            continue;
        }
        let mut support: BTreeMap<RelationId, u64> = BTreeMap::new();
        for &head in &relations {
            let s = pairs
                .iter()
                .filter(|&&(x, y)| g.contains(&Triplet::new(x, head, y)))
                .count() as u64;
            support.insert(head, s);
        }
        for (head, s) in support {
            if s == 0 || s < cfg.min_support {
                continue;
            }
            let denominator = match cfg.confidence {
                ConfidenceKind::Standard => pairs.len(),
                ConfidenceKind::Pca => pairs
                    .iter()
                    .filter(|&&(x, _)| g.entities().any(|e| g.contains(&Triplet::new(x, head, e))))
                    .count(),
            };
            let confidence = s as f64 / denominator as f64;
            if confidence < cfg.min_confidence {
                continue;
            }
            let rule = Rule::new(body.clone(), head)?.with_stats(s, confidence);
            if !rule.is_tautology() {
                rules.push(rule);
            }
        }
    }
    rules.sort_by(|a, b| a.key().cmp(&b.key()));
    Ok(rules)
}
