#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use kgrbr::embedding::{EmbeddingModel, ModelKind, NormOrder, TranslationModel};
use kgrbr::graph::{EntityId, KnowledgeGraph, RelationId, Triplet};
use kgrbr::rules::{Atom, Rule, RuleIndex, Var};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn t(h: u32, r: u32, tl: u32) -> Triplet {
    Triplet::new(EntityId(h), RelationId(r), EntityId(tl))
}

/// Model with hand-picked raw scores for listed facts and `default_raw` for
/// the rest; `k = 1`, so a listed fact scores `raw + 1`.
pub struct TableModel {
    pub entities: usize,
    pub relations: usize,
    pub raw: HashMap<Triplet, f64>,
    pub default_raw: f64,
    zero: Vec<f64>,
}

impl TableModel {
    pub fn new(entities: usize, relations: usize, default_raw: f64) -> Self {
        Self {
            entities,
            relations,
            raw: HashMap::new(),
            default_raw,
            zero: vec![0.0],
        }
    }

    /// Sets the reasoning-scale score (`raw + 1`) of `x`.
    pub fn set_score(&mut self, x: Triplet, score: f64) {
        self.raw.insert(x, score - 1.0);
    }
}

impl TranslationModel for TableModel {
    fn dim(&self) -> usize {
        1
    }
    fn num_entities(&self) -> usize {
        self.entities
    }
    fn num_relations(&self) -> usize {
        self.relations
    }
    fn score_raw(&self, x: &Triplet) -> f64 {
        self.raw.get(x).copied().unwrap_or(self.default_raw)
    }
    fn relation_vector(&self, _r: RelationId) -> &[f64] {
        &self.zero
    }
    fn norm_order(&self) -> NormOrder {
        NormOrder::L2
    }
}

pub fn random_graph<R: Rng>(
    rng: &mut R,
    entities: usize,
    relations: usize,
    facts: usize,
) -> KnowledgeGraph {
    let mut set = BTreeSet::new();
    let cap = entities * entities * relations;
    while set.len() < facts.min(cap) {
        set.insert(t(
            rng.gen_range(0..entities as u32),
            rng.gen_range(0..relations as u32),
            rng.gen_range(0..entities as u32),
        ));
    }
    let train: Vec<Triplet> = set.into_iter().collect();
    KnowledgeGraph::from_ids(entities, relations, &train, &[], &[])
}

pub fn random_rule<R: Rng>(rng: &mut R, relations: usize) -> Rule {
    let rel = |rng: &mut R| RelationId(rng.gen_range(0..relations as u32));
    let head = rel(rng);
    if rng.gen_bool(0.25) {
        let b = rel(rng);
        let reversed = rng.gen_bool(0.5);
        return Rule::single(b, reversed, head);
    }
    let a1 = if rng.gen_bool(0.5) {
        Atom::new(rel(rng), Var::X, Var::Z)
    } else {
        Atom::new(rel(rng), Var::Z, Var::X)
    };
    let a2 = if rng.gen_bool(0.5) {
        Atom::new(rel(rng), Var::Z, Var::Y)
    } else {
        Atom::new(rel(rng), Var::Y, Var::Z)
    };
    Rule::new(vec![a1, a2], head).expect("closed chain shape")
}

pub struct SearchInstance {
    pub g: KnowledgeGraph,
    pub model: EmbeddingModel,
    pub index: RuleIndex,
    pub queries: Vec<Triplet>,
}

/// Small graph, random model and up to ten rules. Half the instances use
/// rule scores measured from the model, half draw them near 1 so the
/// search goes deep.
pub fn random_search_instance<R: Rng>(rng: &mut R) -> SearchInstance {
    let entities = if rng.gen_bool(0.5) {
        rng.gen_range(4..=12)
    } else {
        rng.gen_range(5..=50)
    };
    let relations = rng.gen_range(1..=8);
    let cap = (entities * entities * relations).min(300);
    let facts = rng.gen_range(cap / 4..=cap);
    let g = random_graph(rng, entities, relations, facts);

    let kind = if rng.gen_bool(0.5) {
        ModelKind::TransE
    } else {
        ModelKind::TransH
    };
    let norm = if rng.gen_bool(0.5) {
        NormOrder::L1
    } else {
        NormOrder::L2
    };
    let dim = rng.gen_range(1..=4);
    let model = EmbeddingModel::random(kind, dim, norm, entities, relations, rng);

    let n_rules = rng.gen_range(1..=10);
    let rules: Vec<Rule> = (0..n_rules).map(|_| random_rule(rng, relations)).collect();
    let index = if rng.gen_bool(0.5) {
        RuleIndex::build(rules, &model).expect("rules use model relations")
    } else {
        RuleIndex::from_scored(
            rules
                .into_iter()
                .map(|r| (r, rng.gen_range(1.0..1.4)))
                .collect(),
        )
    };

    let heads: Vec<RelationId> = index.iter().map(|e| e.rule.head()).collect();
    let queries = (0..3)
        .map(|_| {
            let r = if rng.gen_bool(0.8) {
                *heads.choose(rng).expect("at least one rule")
            } else {
                RelationId(rng.gen_range(0..relations as u32))
            };
            Triplet::new(
                EntityId(rng.gen_range(0..entities as u32)),
                r,
                EntityId(rng.gen_range(0..entities as u32)),
            )
        })
        .collect();
    SearchInstance {
        g,
        model,
        index,
        queries,
    }
}
