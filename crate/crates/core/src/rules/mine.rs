//! Native closed-rule miner over the train split.
//!
//! Counts are over distinct `(X, Y)` pairs: a body holds for `(x, y)` when
//! some `z` grounds every body atom in train. Support is the number of body
//! pairs for which the head fact is also in train; standard confidence
//! divides by the number of body pairs, PCA confidence by the body pairs
//! whose `x` has at least one head fact.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Atom, Rule, Var};
use crate::graph::{EntityId, KnowledgeGraph, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConfidenceKind {
    Standard,
    Pca,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerConfig {
    pub max_body_atoms: usize,
    /// Rules need at least this many supporting pairs; zero-support rules are
    /// never emitted.
    pub min_support: u64,
    pub min_confidence: f64,
    pub confidence: ConfidenceKind,
}

impl Default for MinerConfig {
    fn default() -> Self {
        Self {
            max_body_atoms: 2,
            min_support: 2,
            min_confidence: 0.5,
            confidence: ConfidenceKind::Standard,
        }
    }
}

type Pair = (EntityId, EntityId);

/// Which way an atom is read relative to the path `X -> Z -> Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Dir {
    Forward,
    Backward,
}

const DIRS: [Dir; 2] = [Dir::Forward, Dir::Backward];

struct Adjacency {
    /// Per entity: `(relation, other)` for facts leaving it.
    out: Vec<Vec<(RelationId, EntityId)>>,
    /// Per entity: `(relation, other)` for facts entering it.
    inc: Vec<Vec<(RelationId, EntityId)>>,
    by_relation: Vec<Vec<Pair>>,
    heads_between: HashMap<Pair, Vec<RelationId>>,
}

impl Adjacency {
    fn new(g: &KnowledgeGraph) -> Self {
        let n = g.num_entities();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut by_relation = vec![Vec::new(); g.num_relations()];
        let mut heads_between: HashMap<Pair, Vec<RelationId>> = HashMap::new();
        for t in g.train() {
            out[t.head.index()].push((t.relation, t.tail));
            inc[t.tail.index()].push((t.relation, t.head));
            by_relation[t.relation.index()].push((t.head, t.tail));
            heads_between
                .entry((t.head, t.tail))
                .or_default()
                .push(t.relation);
        }
        Self {
            out,
            inc,
            by_relation,
            heads_between,
        }
    }

    /// Pairs `(start, end)` read along `dir`.
    fn oriented(&self, r: RelationId, dir: Dir) -> impl Iterator<Item = Pair> + '_ {
        self.by_relation[r.index()]
            .iter()
            .map(move |&(h, t)| match dir {
                Dir::Forward => (h, t),
                Dir::Backward => (t, h),
            })
    }

    /// `(relation, end)` for edges leaving `start` along `dir`.
    fn steps(&self, start: EntityId, dir: Dir) -> &[(RelationId, EntityId)] {
        match dir {
            Dir::Forward => &self.out[start.index()],
            Dir::Backward => &self.inc[start.index()],
        }
    }
}

fn x_atom(r: RelationId, dir: Dir) -> Atom {
    match dir {
        Dir::Forward => Atom::new(r, Var::X, Var::Z),
        Dir::Backward => Atom::new(r, Var::Z, Var::X),
    }
}

fn y_atom(r: RelationId, dir: Dir) -> Atom {
    match dir {
        Dir::Forward => Atom::new(r, Var::Z, Var::Y),
        Dir::Backward => Atom::new(r, Var::Y, Var::Z),
    }
}

fn single_atom(r: RelationId, dir: Dir) -> Atom {
    match dir {
        Dir::Forward => Atom::new(r, Var::X, Var::Y),
        Dir::Backward => Atom::new(r, Var::Y, Var::X),
    }
}

/// Mines every closed, connected rule with up to `cfg.max_body_atoms` body
/// atoms that meets both thresholds. Output is sorted by head, then body.
pub fn mine_rules(g: &KnowledgeGraph, cfg: &MinerConfig) -> Vec<Rule> {
    if cfg.max_body_atoms == 0 || g.train().is_empty() {
        return Vec::new();
    }
    let adj = Adjacency::new(g);
    let relations: Vec<RelationId> = g.relations().collect();

    let mut rules: Vec<Rule> = Vec::new();

    for &b in &relations {
        for dir in DIRS {
            let pairs: HashSet<Pair> = adj.oriented(b, dir).collect();
            rules.extend(emit(g, &adj, cfg, vec![single_atom(b, dir)], &pairs));
        }
    }

    if cfg.max_body_atoms >= 2 {
        let units: Vec<(RelationId, Dir)> = relations
            .iter()
            .flat_map(|&r| DIRS.into_iter().map(move |d| (r, d)))
            .collect();
        let chained: Vec<Vec<Rule>> = units
            .par_iter()
            .map(|&(b1, d1)| {
                // (b2, d2) -> body pairs for b1 read along d1, then b2 along d2
                let mut bodies: BTreeMap<(RelationId, Dir), HashSet<Pair>> = BTreeMap::new();
                for (x, z) in adj.oriented(b1, d1) {
                    for d2 in DIRS {
                        for &(b2, y) in adj.steps(z, d2) {
                            bodies.entry((b2, d2)).or_default().insert((x, y));
                        }
                    }
                }
                bodies
                    .into_iter()
                    .flat_map(|((b2, d2), pairs)| {
                        emit(g, &adj, cfg, vec![x_atom(b1, d1), y_atom(b2, d2)], &pairs)
                    })
                    .collect()
            })
            .collect();
        rules.extend(chained.into_iter().flatten());
    }

    rules.sort_by(|a, b| a.key().cmp(&b.key()));
    rules
}

fn emit(
    g: &KnowledgeGraph,
    adj: &Adjacency,
    cfg: &MinerConfig,
    body: Vec<Atom>,
    pairs: &HashSet<Pair>,
) -> Vec<Rule> {
    if pairs.is_empty() {
        return Vec::new();
    }
    let mut support: BTreeMap<RelationId, u64> = BTreeMap::new();
    for pair in pairs {
        if let Some(heads) = adj.heads_between.get(pair) {
            for &h in heads {
                *support.entry(h).or_default() += 1;
            }
        }
    }
    let mut out = Vec::new();
    for (head, s) in support {
        if s < cfg.min_support.max(1) {
            continue;
        }
        let denominator = match cfg.confidence {
            ConfidenceKind::Standard => pairs.len(),
            ConfidenceKind::Pca => pairs
                .iter()
                .filter(|(x, _)| !g.neighbors_out(*x, head).is_empty())
                .count(),
        };
        let confidence = s as f64 / denominator as f64;
        if confidence < cfg.min_confidence {
            continue;
        }
        let rule = Rule::new(body.clone(), head)
            .expect("miner only builds closed shapes")
            .with_stats(s, confidence);
        if !rule.is_tautology() {
            out.push(rule);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Triplet;

    fn t(h: u32, r: u32, tl: u32) -> Triplet {
        Triplet::new(EntityId(h), RelationId(r), EntityId(tl))
    }

    fn permissive(min_support: u64) -> MinerConfig {
        MinerConfig {
            max_body_atoms: 2,
            min_support,
            min_confidence: 0.0,
            confidence: ConfidenceKind::Standard,
        }
    }

    #[test]
    fn chain_rule_from_three_facts() {
        // a=0, z=1, b=2; B1=0, B2=1, H=2
        let g = KnowledgeGraph::from_ids(3, 3, &[t(0, 0, 1), t(1, 1, 2), t(0, 2, 2)], &[], &[]);
        let rules = mine_rules(&g, &permissive(1));
        let target = Rule::chain(RelationId(0), RelationId(1), RelationId(2));
        let found = rules
            .iter()
            .find(|r| r.key() == target.key())
            .expect("chain rule mined");
        assert_eq!(found.support, 1);
        assert_eq!(found.confidence, 1.0);
    }

    #[test]
    fn single_atom_rule() {
        let g = KnowledgeGraph::from_ids(2, 2, &[t(0, 0, 1), t(0, 1, 1)], &[], &[]);
        let rules = mine_rules(&g, &permissive(1));
        let target = Rule::single(RelationId(0), false, RelationId(1));
        let found = rules.iter().find(|r| r.key() == target.key()).unwrap();
        assert_eq!((found.support, found.confidence), (1, 1.0));
        assert!(rules.iter().all(|r| !r.is_tautology()));
    }

    #[test]
    fn support_threshold_filters_everything() {
        let g = KnowledgeGraph::from_ids(2, 2, &[t(0, 0, 1), t(0, 1, 1)], &[], &[]);
        assert!(mine_rules(&g, &permissive(2)).is_empty());
    }

    #[test]
    fn symmetric_relation_rule() {
        let g = KnowledgeGraph::from_ids(2, 1, &[t(0, 0, 1), t(1, 0, 0)], &[], &[]);
        let rules = mine_rules(&g, &permissive(1));
        let target = Rule::single(RelationId(0), true, RelationId(0));
        let found = rules.iter().find(|r| r.key() == target.key()).unwrap();
        assert_eq!((found.support, found.confidence), (2, 1.0));
    }

    #[test]
    fn pca_confidence_ignores_unknown_subjects() {
        // body B(X,Y) holds for (0,1) and (2,3); head H known only for x=0
        let g = KnowledgeGraph::from_ids(4, 2, &[t(0, 0, 1), t(2, 0, 3), t(0, 1, 1)], &[], &[]);
        let mut cfg = permissive(1);
        let target = Rule::single(RelationId(0), false, RelationId(1)).key();
        let std = mine_rules(&g, &cfg)
            .into_iter()
            .find(|r| r.key() == target)
            .unwrap();
        assert_eq!(std.confidence, 0.5);
        cfg.confidence = ConfidenceKind::Pca;
        let pca = mine_rules(&g, &cfg)
            .into_iter()
            .find(|r| r.key() == target)
            .unwrap();
        assert_eq!(pca.confidence, 1.0);
    }

    #[test]
    fn single_atom_limit_skips_chains() {
        let g = KnowledgeGraph::from_ids(3, 3, &[t(0, 0, 1), t(1, 1, 2), t(0, 2, 2)], &[], &[]);
        let cfg = MinerConfig {
            max_body_atoms: 1,
            ..permissive(1)
        };
        assert!(mine_rules(&g, &cfg).iter().all(|r| r.body().len() == 1));
    }
}
