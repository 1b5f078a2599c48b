//! Margin-ranking training with one corrupted negative per positive.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    clamp_to_unit_ball, normalize, EmbeddingModel, ModelKind, NormOrder, TranslationModel,
};
use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationId, Triplet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegativeSampling {
    /// Corrupt head or tail with a fair coin.
    Uniform,
    /// Corrupt the head with probability `tph / (tph + hpt)` of the relation.
    Bernoulli,
}

impl FromStr for NegativeSampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" | "unif" => Ok(NegativeSampling::Uniform),
            "bernoulli" | "bern" => Ok(NegativeSampling::Bernoulli),
            _ => Err(Error::Config(format!("unknown negative sampling {s:?}"))),
        }
    }
}

impl fmt::Display for NegativeSampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NegativeSampling::Uniform => "uniform",
            NegativeSampling::Bernoulli => "bernoulli",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub dim: usize,
    pub learning_rate: f64,
    pub margin: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub norm: NormOrder,
    pub neg_sampling: NegativeSampling,
    pub seed: u64,
    /// Weight of the TransH soft orthogonality term.
    pub orth_weight: f64,
    /// Tolerated `|w·d| / ||d||` before the orthogonality term activates.
    pub orth_epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::TransE,
            dim: 100,
            learning_rate: 0.001,
            margin: 1.0,
            epochs: 1000,
            batch_size: 1000,
            norm: NormOrder::L2,
            neg_sampling: NegativeSampling::Uniform,
            seed: 0,
            orth_weight: 0.01,
            orth_epsilon: 0.001,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::Config("margin must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.orth_weight < 0.0 || self.orth_epsilon < 0.0 {
            return Err(Error::Config(
                "orthogonality settings must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: EmbeddingModel,
    pub log: Vec<EpochLog>,
}

/// Sparse parameter gradient keyed by row. Rows are kept in `BTreeMap`s so
/// updates are applied in a fixed order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gradient {
    pub entities: BTreeMap<EntityId, Vec<f64>>,
    pub relations: BTreeMap<RelationId, Vec<f64>>,
    pub normals: BTreeMap<RelationId, Vec<f64>>,
}

impl Gradient {
    pub fn is_zero(&self) -> bool {
        self.entities
            .values()
            .chain(self.relations.values())
            .chain(self.normals.values())
            .all(|row| row.iter().all(|x| *x == 0.0))
    }

    fn row<'a, K: Ord>(map: &'a mut BTreeMap<K, Vec<f64>>, key: K, dim: usize) -> &'a mut Vec<f64> {
        map.entry(key).or_insert_with(|| vec![0.0; dim])
    }
}

/// `max(0, margin + s(pos) - s(neg))`.
pub fn hinge_loss(model: &EmbeddingModel, pos: &Triplet, neg: &Triplet, margin: f64) -> f64 {
    (margin + model.score_raw(pos) - model.score_raw(neg)).max(0.0)
}

/// Adds the gradient of the hinge term for one (positive, negative) pair to
/// `grad` and returns the loss value. Inactive hinges contribute nothing.
pub fn accumulate_hinge_gradient(
    model: &EmbeddingModel,
    pos: &Triplet,
    neg: &Triplet,
    margin: f64,
    grad: &mut Gradient,
) -> f64 {
    let loss = hinge_loss(model, pos, neg, margin);
    if loss > 0.0 {
        add_score_gradient(model, pos, 1.0, grad);
        add_score_gradient(model, neg, -1.0, grad);
    }
    loss
}

fn add_score_gradient(model: &EmbeddingModel, x: &Triplet, sign: f64, grad: &mut Gradient) {
    let k = model.dim();
    let mut u = vec![0.0; k];
    let mut gu = vec![0.0; k];
    model.residual(x, &mut u);
    model.norm_order().norm_gradient(&u, &mut gu);

    match model.normal(x.relation) {
        None => {
            let gh = Gradient::row(&mut grad.entities, x.head, k);
            gh.iter_mut().zip(&gu).for_each(|(a, b)| *a += sign * b);
            let gt = Gradient::row(&mut grad.entities, x.tail, k);
            gt.iter_mut().zip(&gu).for_each(|(a, b)| *a -= sign * b);
            let gr = Gradient::row(&mut grad.relations, x.relation, k);
            gr.iter_mut().zip(&gu).for_each(|(a, b)| *a += sign * b);
        }
        Some(w) => {
            // u = e - (w·e) w + d with e = h - t
            let h = model.entity(x.head);
            let t = model.entity(x.tail);
            let e: Vec<f64> = h.iter().zip(t).map(|(a, b)| a - b).collect();
            let wg: f64 = w.iter().zip(&gu).map(|(a, b)| a * b).sum();
            let we: f64 = w.iter().zip(&e).map(|(a, b)| a * b).sum();
            let projected: Vec<f64> = gu.iter().zip(w).map(|(g, wi)| g - wg * wi).collect();

            let gh = Gradient::row(&mut grad.entities, x.head, k);
            gh.iter_mut()
                .zip(&projected)
                .for_each(|(a, b)| *a += sign * b);
            let gt = Gradient::row(&mut grad.entities, x.tail, k);
            gt.iter_mut()
                .zip(&projected)
                .for_each(|(a, b)| *a -= sign * b);
            let gd = Gradient::row(&mut grad.relations, x.relation, k);
            gd.iter_mut().zip(&gu).for_each(|(a, b)| *a += sign * b);
            let gw = Gradient::row(&mut grad.normals, x.relation, k);
            for i in 0..k {
                gw[i] -= sign * (wg * e[i] + we * gu[i]);
            }
        }
    }
}

/// TransH soft constraint for one relation:
/// `weight * max(0, (w·d)^2 / ||d||^2 - eps^2)`. Adds its gradient to `grad`
/// (when given) and returns the penalty.
pub fn orthogonality_penalty(
    model: &EmbeddingModel,
    r: RelationId,
    weight: f64,
    epsilon: f64,
    grad: Option<&mut Gradient>,
) -> f64 {
    let Some(w) = model.normal(r) else {
        return 0.0;
    };
    let d = model.relation(r);
    let a: f64 = w.iter().zip(d).map(|(x, y)| x * y).sum();
    let n2: f64 = d.iter().map(|x| x * x).sum();
    if n2 == 0.0 {
        return 0.0;
    }
    let excess = a * a / n2 - epsilon * epsilon;
    if excess <= 0.0 {
        return 0.0;
    }
    if let Some(grad) = grad {
        let k = model.dim();
        let gw = Gradient::row(&mut grad.normals, r, k);
        for i in 0..k {
            gw[i] += weight * 2.0 * a * d[i] / n2;
        }
        let gd = Gradient::row(&mut grad.relations, r, k);
        for i in 0..k {
            gd[i] += weight * (2.0 * a * w[i] / n2 - 2.0 * a * a * d[i] / (n2 * n2));
        }
    }
    weight * excess
}

const MAX_NEGATIVE_DRAWS: usize = 64;

struct Corruptor {
    num_entities: u32,
    head_prob: Vec<f64>,
}

impl Corruptor {
    fn new(g: &KnowledgeGraph, mode: NegativeSampling) -> Self {
        let head_prob = match mode {
            NegativeSampling::Uniform => vec![0.5; g.num_relations()],
            NegativeSampling::Bernoulli => {
                // tails-per-head and heads-per-tail averaged per relation
                let mut heads: Vec<HashMap<EntityId, usize>> =
                    vec![HashMap::new(); g.num_relations()];
                let mut tails: Vec<HashMap<EntityId, usize>> =
                    vec![HashMap::new(); g.num_relations()];
                for t in g.train() {
                    *heads[t.relation.index()].entry(t.head).or_default() += 1;
                    *tails[t.relation.index()].entry(t.tail).or_default() += 1;
                }
                heads
                    .iter()
                    .zip(&tails)
                    .map(|(hs, ts)| {
                        if hs.is_empty() || ts.is_empty() {
                            return 0.5;
                        }
                        let tph = hs.values().sum::<usize>() as f64 / hs.len() as f64;
                        let hpt = ts.values().sum::<usize>() as f64 / ts.len() as f64;
                        tph / (tph + hpt)
                    })
                    .collect()
            }
        };
        Self {
            num_entities: g.num_entities() as u32,
            head_prob,
        }
    }

    /// Replaces exactly one side of `pos`; `None` if every draw hit a train fact.
    fn corrupt<R: Rng>(&self, g: &KnowledgeGraph, pos: &Triplet, rng: &mut R) -> Option<Triplet> {
        let replace_head = rng.gen_bool(self.head_prob[pos.relation.index()]);
        for _ in 0..MAX_NEGATIVE_DRAWS {
            let e = EntityId(rng.gen_range(0..self.num_entities));
            let neg = if replace_head {
                Triplet::new(e, pos.relation, pos.tail)
            } else {
                Triplet::new(pos.head, pos.relation, e)
            };
            if !g.contains(&neg) {
                return Some(neg);
            }
        }
        None
    }
}

/// Trains a model on the train split with mini-batch SGD.
///
/// Each positive gets one negative; the batch gradient is the sum over its
/// samples. After every step the touched rows are projected back onto the
/// model's constraint set (unit entities for TransE, entities inside the unit
/// ball and unit normals for TransH). Fully determined by `cfg.seed`.
pub fn train(g: &KnowledgeGraph, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if g.train().is_empty() {
        return Err(Error::Config("train split is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = EmbeddingModel::random(
        cfg.kind,
        cfg.dim,
        cfg.norm,
        g.num_entities(),
        g.num_relations(),
        &mut rng,
    );
    let corruptor = Corruptor::new(g, cfg.neg_sampling);
    let mut order: Vec<usize> = (0..g.train().len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut samples = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = Gradient::default();
            for &i in batch {
                let pos = g.train()[i];
                let Some(neg) = corruptor.corrupt(g, &pos, &mut rng) else {
                    continue;
                };
                total += accumulate_hinge_gradient(&model, &pos, &neg, cfg.margin, &mut grad);
                samples += 1;
            }
            if cfg.kind == ModelKind::TransH && cfg.orth_weight > 0.0 {
                let touched: Vec<RelationId> = grad.relations.keys().copied().collect();
                for r in touched {
                    total += orthogonality_penalty(
                        &model,
                        r,
                        cfg.orth_weight,
                        cfg.orth_epsilon,
                        Some(&mut grad),
                    );
                }
            }
            apply(&mut model, &grad, cfg.learning_rate);
        }
        let mean_loss = if samples == 0 {
            0.0
        } else {
            total / samples as f64
        };
        if epoch % 100 == 0 || epoch + 1 == cfg.epochs {
            log::info!("epoch {epoch}: mean loss {mean_loss:.6}");
        }
        log.push(EpochLog { epoch, mean_loss });
    }
    Ok(TrainOutcome { model, log })
}

fn apply(model: &mut EmbeddingModel, grad: &Gradient, lr: f64) {
    let kind = model.kind();
    for (&e, g) in &grad.entities {
        let row = model.entity_mut(e);
        row.iter_mut().zip(g).for_each(|(p, d)| *p -= lr * d);
        match kind {
            ModelKind::TransE => normalize(row),
            ModelKind::TransH => clamp_to_unit_ball(row),
        }
    }
    for (&r, g) in &grad.relations {
        model
            .relation_mut(r)
            .iter_mut()
            .zip(g)
            .for_each(|(p, d)| *p -= lr * d);
    }
    for (&r, g) in &grad.normals {
        let row = model.normal_mut(r);
        row.iter_mut().zip(g).for_each(|(p, d)| *p -= lr * d);
        normalize(row);
    }
}
