//! Translation-based embedding models.
//!
//! A model scores a fact by how far the (possibly projected) head, shifted by
//! the relation's translation, lands from the tail. Lower is better. The
//! reasoner and the rule measurement only see models through
//! [`TranslationModel`], so further translation families (TransR, TransD)
//! can be added by implementing that trait.

mod io;
mod train;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationId, Triplet};

pub use train::{
    accumulate_hinge_gradient, hinge_loss, orthogonality_penalty, train, EpochLog, Gradient,
    NegativeSampling, TrainConfig, TrainOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    TransE,
    TransH,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transe" => Ok(ModelKind::TransE),
            "transh" => Ok(ModelKind::TransH),
            _ => Err(Error::Config(format!(
                "unknown model kind {s:?} (expected transe or transh)"
            ))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::TransE => "transe",
            ModelKind::TransH => "transh",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormOrder {
    L1,
    L2,
}

impl NormOrder {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormOrder::L1 => v.iter().map(|x| x.abs()).sum(),
            NormOrder::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    /// Subgradient of the norm at `v`, written into `out`. Zero at the kink.
    pub fn norm_gradient(self, v: &[f64], out: &mut [f64]) {
        match self {
            NormOrder::L1 => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o = if *x > 0.0 {
                        1.0
                    } else if *x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                }
            }
            NormOrder::L2 => {
                let n = self.norm(v);
                for (o, x) in out.iter_mut().zip(v) {
                    *o = if n > 0.0 { x / n } else { 0.0 };
                }
            }
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            NormOrder::L1 => 1,
            NormOrder::L2 => 2,
        }
    }
}

impl FromStr for NormOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "l1" => Ok(NormOrder::L1),
            "2" | "l2" => Ok(NormOrder::L2),
            _ => Err(Error::Config(format!(
                "norm order must be 1 or 2, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// What the reasoner needs from an embedding model.
pub trait TranslationModel {
    fn dim(&self) -> usize;
    fn num_entities(&self) -> usize;
    fn num_relations(&self) -> usize;
    /// Distance `||h + r - t||` in the model's own geometry.
    fn score_raw(&self, x: &Triplet) -> f64;
    /// The additive translation component of `r`, used to measure rules.
    fn relation_vector(&self, r: RelationId) -> &[f64];
    fn norm_order(&self) -> NormOrder;
}

/// Embedding score of a fact on the reasoning scale: exactly 1 for train
/// facts, otherwise `score_raw / k + 1`.
pub fn triplet_score<M: TranslationModel + ?Sized>(
    model: &M,
    g: &KnowledgeGraph,
    x: &Triplet,
) -> f64 {
    if g.contains(x) {
        1.0
    } else {
        open_triplet_score(model, x)
    }
}

/// `score_raw / k + 1`, for callers that already know `x` is not a train fact.
#[inline]
pub fn open_triplet_score<M: TranslationModel + ?Sized>(model: &M, x: &Triplet) -> f64 {
    model.score_raw(x) / model.dim() as f64 + 1.0
}

/// Dense TransE / TransH parameters, stored as row-major `f64` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    kind: ModelKind,
    dim: usize,
    norm: NormOrder,
    entities: Vec<f64>,
    relations: Vec<f64>,
    /// Hyperplane normals, one row per relation; empty for TransE.
    normals: Vec<f64>,
}

impl EmbeddingModel {
    /// Assembles a model from explicit parameter matrices.
    pub fn from_parts(
        kind: ModelKind,
        dim: usize,
        norm: NormOrder,
        entities: Vec<f64>,
        relations: Vec<f64>,
        normals: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config(
                "embedding dimension must be at least 1".into(),
            ));
        }
        if entities.len() % dim != 0 || relations.len() % dim != 0 {
            return Err(Error::Dimension(format!(
                "parameter matrices are not multiples of k = {dim}"
            )));
        }
        let expected_normals = match kind {
            ModelKind::TransE => 0,
            ModelKind::TransH => relations.len(),
        };
        if normals.len() != expected_normals {
            return Err(Error::Dimension(format!(
                "{kind} expects {expected_normals} normal components, got {}",
                normals.len()
            )));
        }
        if entities
            .iter()
            .chain(&relations)
            .chain(&normals)
            .any(|x| !x.is_finite())
        {
            return Err(Error::Format("non-finite parameter".into()));
        }
        Ok(Self {
            kind,
            dim,
            norm,
            entities,
            relations,
            normals,
        })
    }

    /// Uniform initialization in `[-6/sqrt(k), 6/sqrt(k)]`; entity, relation
    /// and normal rows are then normalized.
    pub fn random<R: Rng>(
        kind: ModelKind,
        dim: usize,
        norm: NormOrder,
        num_entities: usize,
        num_relations: usize,
        rng: &mut R,
    ) -> Self {
        let bound = 6.0 / (dim as f64).sqrt();
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n * dim)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect()
        };
        let entities = draw(num_entities);
        let relations = draw(num_relations);
        let normals = match kind {
            ModelKind::TransE => Vec::new(),
            ModelKind::TransH => draw(num_relations),
        };
        let mut model = Self {
            kind,
            dim,
            norm,
            entities,
            relations,
            normals,
        };
        for e in 0..num_entities {
            normalize(model.entity_mut(EntityId(e as u32)));
        }
        for r in 0..num_relations {
            normalize(model.relation_mut(RelationId(r as u32)));
            if kind == ModelKind::TransH {
                normalize(model.normal_mut(RelationId(r as u32)));
            }
        }
        model
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn entity(&self, e: EntityId) -> &[f64] {
        let k = self.dim;
        &self.entities[e.index() * k..(e.index() + 1) * k]
    }

    pub fn relation(&self, r: RelationId) -> &[f64] {
        let k = self.dim;
        &self.relations[r.index() * k..(r.index() + 1) * k]
    }

    /// TransH hyperplane normal of `r`; `None` for TransE.
    pub fn normal(&self, r: RelationId) -> Option<&[f64]> {
        match self.kind {
            ModelKind::TransE => None,
            ModelKind::TransH => {
                let k = self.dim;
                Some(&self.normals[r.index() * k..(r.index() + 1) * k])
            }
        }
    }

    pub(crate) fn entity_mut(&mut self, e: EntityId) -> &mut [f64] {
        let k = self.dim;
        &mut self.entities[e.index() * k..(e.index() + 1) * k]
    }

    pub(crate) fn relation_mut(&mut self, r: RelationId) -> &mut [f64] {
        let k = self.dim;
        &mut self.relations[r.index() * k..(r.index() + 1) * k]
    }

    pub(crate) fn normal_mut(&mut self, r: RelationId) -> &mut [f64] {
        let k = self.dim;
        &mut self.normals[r.index() * k..(r.index() + 1) * k]
    }

    /// Fails unless the model covers exactly the graph's dictionaries.
    pub fn check_graph(&self, g: &KnowledgeGraph) -> Result<()> {
        if self.num_entities() != g.num_entities() || self.num_relations() != g.num_relations() {
            return Err(Error::Dimension(format!(
                "model has {} entities / {} relations, graph has {} / {}",
                self.num_entities(),
                self.num_relations(),
                g.num_entities(),
                g.num_relations()
            )));
        }
        Ok(())
    }

    /// Residual vector `h⊥ + r - t⊥` of a fact.
    pub(crate) fn residual(&self, x: &Triplet, out: &mut [f64]) {
        let h = self.entity(x.head);
        let t = self.entity(x.tail);
        let r = self.relation(x.relation);
        match self.normal(x.relation) {
            None => {
                for i in 0..self.dim {
                    out[i] = h[i] + r[i] - t[i];
                }
            }
            Some(w) => {
                let we: f64 = (0..self.dim).map(|i| w[i] * (h[i] - t[i])).sum();
                for i in 0..self.dim {
                    out[i] = h[i] + r[i] - t[i] - we * w[i];
                }
            }
        }
    }
}

impl TranslationModel for EmbeddingModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_entities(&self) -> usize {
        self.entities.len() / self.dim
    }

    fn num_relations(&self) -> usize {
        self.relations.len() / self.dim
    }

    fn score_raw(&self, x: &Triplet) -> f64 {
        let h = self.entity(x.head);
        let t = self.entity(x.tail);
        let r = self.relation(x.relation);
        let (w, we) = match self.normal(x.relation) {
            Some(w) => (w, (0..self.dim).map(|i| w[i] * (h[i] - t[i])).sum::<f64>()),
            None => (&[][..], 0.0),
        };
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut u = h[i] + r[i] - t[i];
            if !w.is_empty() {
                u -= we * w[i];
            }
            acc += match self.norm {
                NormOrder::L1 => u.abs(),
                NormOrder::L2 => u * u,
            };
        }
        match self.norm {
            NormOrder::L1 => acc,
            NormOrder::L2 => acc.sqrt(),
        }
    }

    /// TransE: `r`; TransH: the on-hyperplane translation `d_r`, never `w_r`.
    fn relation_vector(&self, r: RelationId) -> &[f64] {
        self.relation(r)
    }

    fn norm_order(&self) -> NormOrder {
        self.norm
    }
}

pub(crate) fn normalize(v: &mut [f64]) {
    let n = NormOrder::L2.norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Projects `v` onto the unit ball.
pub(crate) fn clamp_to_unit_ball(v: &mut [f64]) {
    let n = NormOrder::L2.norm(v);
    if n > 1.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(h: u32, r: u32, tl: u32) -> Triplet {
        Triplet::new(EntityId(h), RelationId(r), EntityId(tl))
    }

    fn transe_2d(entities: &[[f64; 2]], relations: &[[f64; 2]], norm: NormOrder) -> EmbeddingModel {
        EmbeddingModel::from_parts(
            ModelKind::TransE,
            2,
            norm,
            entities.iter().flatten().copied().collect(),
            relations.iter().flatten().copied().collect(),
            Vec::new(),
        )
        .unwrap()
    }

    #[test]
    fn exact_translation_scores_zero() {
        let m = transe_2d(&[[0.3, -0.2], [0.3, -0.2]], &[[0.0, 0.0]], NormOrder::L2);
        assert_eq!(m.score_raw(&t(0, 0, 1)), 0.0);
    }

    #[test]
    fn three_four_five() {
        let m = transe_2d(&[[0.0, 0.0], [0.0, 0.0]], &[[0.3, 0.4]], NormOrder::L2);
        assert!((m.score_raw(&t(0, 0, 1)) - 0.5).abs() < 1e-15);
        let m1 = transe_2d(&[[0.0, 0.0], [0.0, 0.0]], &[[0.3, 0.4]], NormOrder::L1);
        assert!((m1.score_raw(&t(0, 0, 1)) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn transh_projection_is_noop_when_normal_is_orthogonal() {
        // h - t = (1, 2, 0), w = e_z, d = 0
        let m = EmbeddingModel::from_parts(
            ModelKind::TransH,
            3,
            NormOrder::L2,
            vec![1.0, 2.0, 5.0, 0.0, 0.0, -3.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        assert!((m.score_raw(&t(0, 0, 1)) - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn transh_removes_normal_component() {
        // h - t along w only: projected distance equals |d|
        let m = EmbeddingModel::from_parts(
            ModelKind::TransH,
            2,
            NormOrder::L2,
            vec![0.0, 4.0, 0.0, 0.0],
            vec![0.6, 0.0],
            vec![0.0, 1.0],
        )
        .unwrap();
        assert!((m.score_raw(&t(0, 0, 1)) - 0.6).abs() < 1e-12);
        assert_eq!(m.relation_vector(RelationId(0)), &[0.6, 0.0]);
        assert_eq!(m.normal(RelationId(0)), Some(&[0.0, 1.0][..]));
    }

    #[test]
    fn triplet_score_branches() {
        let m = transe_2d(
            &[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            &[[0.0, 0.4]],
            NormOrder::L2,
        );
        let g = KnowledgeGraph::from_ids(3, 1, &[t(0, 0, 1)], &[], &[]);
        assert_eq!(triplet_score(&m, &g, &t(0, 0, 1)), 1.0);
        // raw 0.4, k = 2
        assert!((triplet_score(&m, &g, &t(0, 0, 2)) - 1.2).abs() < 1e-15);

        let perfect = transe_2d(
            &[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            &[[0.0, 0.0]],
            NormOrder::L2,
        );
        assert_eq!(triplet_score(&perfect, &g, &t(0, 0, 2)), 1.0);
    }

    #[test]
    fn from_parts_validates_shapes() {
        assert!(EmbeddingModel::from_parts(
            ModelKind::TransE,
            2,
            NormOrder::L2,
            vec![0.0; 3],
            vec![],
            vec![]
        )
        .is_err());
        assert!(EmbeddingModel::from_parts(
            ModelKind::TransH,
            2,
            NormOrder::L2,
            vec![0.0; 2],
            vec![0.0; 2],
            vec![]
        )
        .is_err());
        assert!(EmbeddingModel::from_parts(
            ModelKind::TransE,
            0,
            NormOrder::L2,
            vec![],
            vec![],
            vec![]
        )
        .is_err());
        assert!(EmbeddingModel::from_parts(
            ModelKind::TransE,
            1,
            NormOrder::L2,
            vec![f64::NAN],
            vec![],
            vec![]
        )
        .is_err());
    }

    #[test]
    fn parse_kinds_and_norms() {
        assert_eq!("TransH".parse::<ModelKind>().unwrap(), ModelKind::TransH);
        assert!("transr".parse::<ModelKind>().is_err());
        assert_eq!("l1".parse::<NormOrder>().unwrap(), NormOrder::L1);
        assert_eq!("2".parse::<NormOrder>().unwrap(), NormOrder::L2);
        assert!("3".parse::<NormOrder>().is_err());
    }

    #[test]
    fn check_graph_detects_size_mismatch() {
        let m = transe_2d(&[[0.0, 0.0], [0.0, 0.0]], &[[0.0, 0.0]], NormOrder::L2);
        let g = KnowledgeGraph::from_ids(3, 1, &[t(0, 0, 2)], &[], &[]);
        assert!(matches!(m.check_graph(&g), Err(Error::Dimension(_))));
    }
}
