//! Best-first rule reasoning over search states.
//!
//! A state is a list of facts in which at most one (the *open* fact) is
//! missing from the train graph. Extending a state rewrites the open fact
//! through a rule whose head matches it, grounding the body so that at least
//! one replacement fact is in train. Each state carries:
//!
//! * `h_score`: product of the scores of the rules applied so far;
//! * `l_score`: `h_score` times the embedding score of every fact
//!   (train facts score exactly 1).
//!
//! Since every rule score exceeds 1, `h_score` lower-bounds the `l_score` of
//! a state and of all its descendants. The search pops states by ascending
//! `h_score`, keeps the least `l_score` seen as the query's score, stops
//! extending a state once its `h_score` reaches that incumbent, and only
//! queues a child whose `h_score` is below its parent's `l_score`.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::embedding::{open_triplet_score, triplet_score, TranslationModel};
use crate::graph::{EntityId, KnowledgeGraph, Triplet};
use crate::rules::{Atom, RuleId, RuleIndex, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateTriplet {
    pub triplet: Triplet,
    pub in_kg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchState {
    pub triplets: Vec<StateTriplet>,
    pub h_score: f64,
    pub l_score: f64,
    pub depth: usize,
    pub path: Vec<RuleId>,
}

impl SearchState {
    /// The query on its own: `h_score = 1`, `l_score` = its embedding score.
    pub fn initial<M: TranslationModel + ?Sized>(
        g: &KnowledgeGraph,
        model: &M,
        x: Triplet,
    ) -> Self {
        Self {
            triplets: vec![StateTriplet {
                triplet: x,
                in_kg: g.contains(&x),
            }],
            h_score: 1.0,
            l_score: triplet_score(model, g, &x),
            depth: 0,
            path: Vec::new(),
        }
    }

    pub fn open_position(&self) -> Option<usize> {
        self.triplets.iter().position(|t| !t.in_kg)
    }

    pub fn is_terminal(&self) -> bool {
        self.triplets.iter().all(|t| t.in_kg)
    }

    /// Facts of the state as a sorted multiset; equal signatures mean equal
    /// states up to the rule path that produced them.
    pub fn signature(&self) -> Vec<Triplet> {
        let mut sig: Vec<Triplet> = self.triplets.iter().map(|t| t.triplet).collect();
        sig.sort_unstable();
        sig
    }

    /// Shape and score invariants that hold for every reachable state: at
    /// most one open fact, one more fact per two-atom rewrite, `1 <= H <= L`.
    pub fn check_invariants(&self) -> Result<(), String> {
        let open = self.triplets.iter().filter(|t| !t.in_kg).count();
        if open > 1 {
            return Err(format!("{open} facts outside the graph"));
        }
        // a single-atom rewrite swaps one fact for one train fact, so it can
        // only be the last step and leaves the count one short
        let single_atom_end =
            self.is_terminal() && self.depth > 0 && self.triplets.len() == self.depth;
        if self.triplets.len() != self.depth + 1 && !single_atom_end {
            return Err(format!(
                "{} facts at depth {}",
                self.triplets.len(),
                self.depth
            ));
        }
        if self.path.len() != self.depth {
            return Err(format!(
                "path length {} at depth {}",
                self.path.len(),
                self.depth
            ));
        }
        if !(self.h_score >= 1.0) {
            return Err(format!("h_score {} < 1", self.h_score));
        }
        if !(self.l_score >= self.h_score) {
            return Err(format!(
                "l_score {} < h_score {}",
                self.l_score, self.h_score
            ));
        }
        Ok(())
    }

    /// Compact rendering: facts in order, open fact starred.
    pub fn describe(&self) -> String {
        self.triplets
            .iter()
            .map(|t| {
                let x = t.triplet;
                let star = if t.in_kg { "" } else { "*" };
                format!("({},{},{}){star}", x.head.0, x.relation.0, x.tail.0)
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub max_depth: usize,
    pub max_pops: usize,
    /// Heuristic scores within the same `epsilon_tie`-wide bucket pop in
    /// insertion order. Zero orders by exact value, then insertion order.
    pub epsilon_tie: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_depth: 10,
            max_pops: 100_000,
            epsilon_tie: 0.0,
        }
    }
}

/// One way to rewrite a fact: the rule used and the grounded body.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub rule: RuleId,
    pub omega: f64,
    pub replacement: Vec<Triplet>,
}

fn ground(atom: &Atom, x: EntityId, y: EntityId, z: EntityId) -> Triplet {
    let bind = |v: Var| match v {
        Var::X => x,
        Var::Y => y,
        Var::Z => z,
    };
    Triplet::new(bind(atom.arg1), atom.relation, bind(atom.arg2))
}

/// Candidate values of `Z` that put `atom` in train, given the entity bound
/// to its other variable.
fn z_candidates<'g>(g: &'g KnowledgeGraph, atom: &Atom, bound: EntityId) -> &'g [EntityId] {
    if atom.arg1 == Var::Z {
        g.neighbors_in(bound, atom.relation)
    } else {
        g.neighbors_out(bound, atom.relation)
    }
}

fn sorted_union(a: &[EntityId], b: &[EntityId]) -> Vec<EntityId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// All rewritings of `x` by rules with head `x.relation`, binding `X` to the
/// head and `Y` to the tail. Every replacement has at least one train fact:
/// single-atom bodies only when the grounded atom is in train, two-atom
/// bodies for every `Z` that grounds either atom in train.
pub fn expand_triplet(g: &KnowledgeGraph, index: &RuleIndex, x: &Triplet) -> Vec<Expansion> {
    let mut out = Vec::new();
    for entry in index.rules_for(x.relation) {
        match entry.rule.body() {
            [atom] => {
                let t = ground(atom, x.head, x.tail, x.head);
                if g.contains(&t) {
                    out.push(Expansion {
                        rule: entry.id,
                        omega: entry.omega,
                        replacement: vec![t],
                    });
                }
            }
            [x_atom, y_atom] => {
                let zs = sorted_union(
                    z_candidates(g, x_atom, x.head),
                    z_candidates(g, y_atom, x.tail),
                );
                for z in zs {
                    out.push(Expansion {
                        rule: entry.id,
                        omega: entry.omega,
                        replacement: vec![
                            ground(x_atom, x.head, x.tail, z),
                            ground(y_atom, x.head, x.tail, z),
                        ],
                    });
                }
            }
            _ => unreachable!("rules have one or two body atoms"),
        }
    }
    out
}

/// Children of `s`, one per rewriting of its open fact. Returns nothing for a
/// terminal state.
pub fn extend_state<M: TranslationModel + ?Sized>(
    g: &KnowledgeGraph,
    model: &M,
    index: &RuleIndex,
    s: &SearchState,
) -> Vec<SearchState> {
    let Some(pos) = s.open_position() else {
        return Vec::new();
    };
    let open = s.triplets[pos].triplet;
    expand_triplet(g, index, &open)
        .into_iter()
        .map(|e| {
            let mut triplets = Vec::with_capacity(s.triplets.len() + e.replacement.len() - 1);
            triplets.extend_from_slice(&s.triplets[..pos]);
            triplets.extend(e.replacement.iter().map(|&t| StateTriplet {
                triplet: t,
                in_kg: g.contains(&t),
            }));
            triplets.extend_from_slice(&s.triplets[pos + 1..]);

            let h_score = s.h_score * e.omega;
            let l_score = triplets
                .iter()
                .filter(|t| !t.in_kg)
                .fold(h_score, |acc, t| {
                    acc * open_triplet_score(model, &t.triplet)
                });
            let mut path = s.path.clone();
            path.push(e.rule);
            SearchState {
                triplets,
                h_score,
                l_score,
                depth: s.depth + 1,
                path,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "action")]
pub enum PopAction {
    /// Rewritten; `pushed` children queued, `pruned` dropped because their
    /// heuristic score reached the parent's state score.
    Extended {
        pushed: usize,
        pruned: usize,
    },
    /// Heuristic score reached the incumbent.
    CutOff,
    /// Every fact is in the graph.
    Terminal,
    DepthLimit,
    /// A copy of this state with a lower heuristic score was queued later.
    Superseded,
}

/// Hooks into the search for tracing and invariant checking.
pub trait SearchObserver {
    fn on_child(&mut self, _parent: &SearchState, _child: &SearchState, _pushed: bool) {}
    /// Called once per pop, after the incumbent has been updated with the
    /// popped state and the state has been handled.
    fn on_pop(&mut self, _pop: usize, _state: &SearchState, _phi: f64, _action: &PopAction) {}
}

impl SearchObserver for () {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub pop: usize,
    pub state: String,
    pub h: f64,
    pub l: f64,
    pub phi: f64,
    pub depth: usize,
    #[serde(flatten)]
    pub action: PopAction,
}

/// Collects one [`TraceRecord`] per pop.
#[derive(Debug, Default)]
pub struct TraceRecorder {
    pub records: Vec<TraceRecord>,
}

impl TraceRecorder {
    /// Line-delimited JSON, one record per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }
}

impl SearchObserver for TraceRecorder {
    fn on_pop(&mut self, pop: usize, state: &SearchState, phi: f64, action: &PopAction) {
        self.records.push(TraceRecord {
            pop,
            state: state.describe(),
            h: state.h_score,
            l: state.l_score,
            phi,
            depth: state.depth,
            action: action.clone(),
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiResult {
    pub phi: f64,
    /// Rules applied to reach the state that set `phi`; empty when the
    /// embedding score of the query itself was best.
    pub path: Vec<RuleId>,
    pub pops: usize,
    /// The pop budget ran out before the queue emptied.
    pub truncated: bool,
}

struct Queued {
    key: f64,
    seq: u64,
    state: SearchState,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // BinaryHeap is a max-heap: smallest key, then earliest seq, is greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Score of `x`: the least state score reachable by rule rewriting, starting
/// from its embedding score. Lower means more plausible; always `>= 1`.
pub fn phi<M: TranslationModel + ?Sized>(
    g: &KnowledgeGraph,
    model: &M,
    index: &RuleIndex,
    x: &Triplet,
    cfg: &SearchConfig,
) -> PhiResult {
    phi_observed(g, model, index, x, cfg, &mut ())
}

pub fn phi_observed<M: TranslationModel + ?Sized, O: SearchObserver + ?Sized>(
    g: &KnowledgeGraph,
    model: &M,
    index: &RuleIndex,
    x: &Triplet,
    cfg: &SearchConfig,
    observer: &mut O,
) -> PhiResult {
    let s0 = SearchState::initial(g, model, *x);
    let mut result = PhiResult {
        phi: s0.l_score,
        path: Vec::new(),
        pops: 0,
        truncated: false,
    };
    if index.rules_for(x.relation).is_empty() {
        return result;
    }

    let key = |h: f64| {
        if cfg.epsilon_tie > 0.0 {
            (h / cfg.epsilon_tie).floor()
        } else {
            h
        }
    };
    let mut seq = 0u64;
    let mut queue = BinaryHeap::new();
    let mut best_h: HashMap<Vec<Triplet>, f64> = HashMap::new();
    best_h.insert(s0.signature(), s0.h_score);
    queue.push(Queued {
        key: key(s0.h_score),
        seq,
        state: s0,
    });

    while let Some(Queued { state: cur, .. }) = queue.pop() {
        if result.pops >= cfg.max_pops {
            result.truncated = true;
            break;
        }
        result.pops += 1;
        if cur.l_score < result.phi {
            result.phi = cur.l_score;
            result.path = cur.path.clone();
        }

        let action = if best_h
            .get(&cur.signature())
            .is_some_and(|&h| h < cur.h_score)
        {
            PopAction::Superseded
        } else if cur.is_terminal() {
            PopAction::Terminal
        } else if cur.h_score >= result.phi {
            PopAction::CutOff
        } else if cur.depth >= cfg.max_depth {
            PopAction::DepthLimit
        } else {
            let (mut pushed, mut pruned) = (0, 0);
            for child in extend_state(g, model, index, &cur) {
                debug_assert!(
                    child.check_invariants().is_ok(),
                    "{:?}",
                    child.check_invariants()
                );
                let admit = child.h_score < cur.l_score
                    && match best_h.entry(child.signature()) {
                        Entry::Occupied(mut e) if child.h_score < *e.get() => {
                            e.insert(child.h_score);
                            true
                        }
                        Entry::Occupied(_) => false,
                        Entry::Vacant(e) => {
                            e.insert(child.h_score);
                            true
                        }
                    };
                observer.on_child(&cur, &child, admit);
                if admit {
                    pushed += 1;
                    seq += 1;
                    queue.push(Queued {
                        key: key(child.h_score),
                        seq,
                        state: child,
                    });
                } else {
                    pruned += 1;
                }
            }
            PopAction::Extended { pushed, pruned }
        };
        observer.on_pop(result.pops, &cur, result.phi, &action);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{EmbeddingModel, ModelKind, NormOrder};
    use crate::graph::RelationId;
    use crate::rules::Rule;

    fn t(h: u32, r: u32, tl: u32) -> Triplet {
        Triplet::new(EntityId(h), RelationId(r), EntityId(tl))
    }

    /// 1-d TransE with every entity at the origin and relation `i` at
    /// `offsets[i]`, so an open fact of relation `i` scores `|offset| + 1`.
    fn flat_model(num_entities: usize, offsets: &[f64]) -> EmbeddingModel {
        EmbeddingModel::from_parts(
            ModelKind::TransE,
            1,
            NormOrder::L2,
            vec![0.0; num_entities],
            offsets.to_vec(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn chain_expansion_grounds_through_x_side() {
        // h=0, z1=1, t=2; B1=0, B2=1, r=2
        let g = KnowledgeGraph::from_ids(3, 3, &[t(0, 0, 1)], &[], &[]);
        let index = RuleIndex::from_scored(vec![(
            Rule::chain(RelationId(0), RelationId(1), RelationId(2)),
            1.1,
        )]);
        let exps = expand_triplet(&g, &index, &t(0, 2, 2));
        assert_eq!(exps.len(), 1);
        assert_eq!(exps[0].replacement, vec![t(0, 0, 1), t(1, 1, 2)]);
    }

    #[test]
    fn inverted_atoms_ground_through_z() {
        // B3(Z,X) & B4(Z,Y) => r(X,Y); train has (z1, B3, h)
        let rule = Rule::new(
            vec![
                Atom::new(RelationId(0), Var::Z, Var::X),
                Atom::new(RelationId(1), Var::Z, Var::Y),
            ],
            RelationId(2),
        )
        .unwrap();
        let g = KnowledgeGraph::from_ids(3, 3, &[t(1, 0, 0)], &[], &[]);
        let index = RuleIndex::from_scored(vec![(rule, 1.2)]);
        let exps = expand_triplet(&g, &index, &t(0, 2, 2));
        assert_eq!(exps.len(), 1);
        assert_eq!(exps[0].replacement, vec![t(1, 0, 0), t(1, 1, 2)]);
    }

    #[test]
    fn z_found_from_both_sides_is_listed_once() {
        let g = KnowledgeGraph::from_ids(4, 3, &[t(0, 0, 1), t(1, 1, 2), t(3, 1, 2)], &[], &[]);
        let index = RuleIndex::from_scored(vec![(
            Rule::chain(RelationId(0), RelationId(1), RelationId(2)),
            1.1,
        )]);
        let zs: Vec<Vec<Triplet>> = expand_triplet(&g, &index, &t(0, 2, 2))
            .into_iter()
            .map(|e| e.replacement)
            .collect();
        assert_eq!(
            zs,
            vec![vec![t(0, 0, 1), t(1, 1, 2)], vec![t(0, 0, 3), t(3, 1, 2)]]
        );
    }

    #[test]
    fn no_rules_no_expansions() {
        let g = KnowledgeGraph::from_ids(2, 2, &[t(0, 0, 1)], &[], &[]);
        let index = RuleIndex::from_scored(vec![(
            Rule::single(RelationId(0), false, RelationId(0)),
            1.5,
        )]);
        assert!(expand_triplet(&g, &index, &t(0, 1, 1)).is_empty());
    }

    #[test]
    fn single_atom_needs_a_train_fact() {
        let g = KnowledgeGraph::from_ids(2, 2, &[t(1, 0, 0)], &[], &[]);
        let index = RuleIndex::from_scored(vec![
            (Rule::single(RelationId(0), true, RelationId(1)), 1.5),
            (Rule::single(RelationId(0), false, RelationId(1)), 1.6),
        ]);
        let exps = expand_triplet(&g, &index, &t(0, 1, 1));
        assert_eq!(exps.len(), 1);
        assert_eq!(exps[0].replacement, vec![t(1, 0, 0)]);
    }

    #[test]
    fn child_scores_multiply() {
        let g = KnowledgeGraph::from_ids(3, 3, &[t(0, 0, 1), t(1, 1, 2)], &[], &[]);
        let model = flat_model(3, &[0.0, 0.0, 0.5]);
        let index = RuleIndex::from_scored(vec![(
            Rule::chain(RelationId(0), RelationId(1), RelationId(2)),
            1.1,
        )]);
        let s0 = SearchState::initial(&g, &model, t(0, 2, 2));
        let kids = extend_state(&g, &model, &index, &s0);
        assert_eq!(kids.len(), 1);
        assert!((kids[0].h_score - 1.1).abs() < 1e-15);
        assert!((kids[0].l_score - 1.1).abs() < 1e-15);
        assert!(kids[0].is_terminal());

        let parent = SearchState {
            h_score: 1.1,
            l_score: 1.65,
            depth: 0,
            ..s0.clone()
        };
        let index2 = RuleIndex::from_scored(vec![(
            Rule::chain(RelationId(0), RelationId(1), RelationId(2)),
            1.2,
        )]);
        let kids = extend_state(&g, &model, &index2, &parent);
        assert_eq!(kids[0].h_score, 1.1 * 1.2);
    }

    #[test]
    fn terminal_state_has_no_children() {
        let g = KnowledgeGraph::from_ids(2, 1, &[t(0, 0, 1)], &[], &[]);
        let model = flat_model(2, &[0.0]);
        let index = RuleIndex::from_scored(vec![(
            Rule::single(RelationId(0), true, RelationId(0)),
            1.1,
        )]);
        let s = SearchState::initial(&g, &model, t(0, 0, 1));
        assert!(s.is_terminal());
        assert!(extend_state(&g, &model, &index, &s).is_empty());
    }

    #[test]
    fn fast_path_without_rules() {
        // raw 0.4 with k = 2 in 2-d
        let model = EmbeddingModel::from_parts(
            ModelKind::TransE,
            2,
            NormOrder::L2,
            vec![0.0; 4],
            vec![0.0, 0.4],
            vec![],
        )
        .unwrap();
        let g = KnowledgeGraph::from_ids(2, 1, &[], &[], &[]);
        let res = phi(
            &g,
            &model,
            &RuleIndex::default(),
            &t(0, 0, 1),
            &SearchConfig::default(),
        );
        assert!((res.phi - 1.2).abs() < 1e-15);
        assert!(res.path.is_empty());
        assert_eq!(res.pops, 0);
    }

    #[test]
    fn chain_derivation_beats_embedding_score() {
        // a=0, b=1, c=2; B1=0, B2=1, r=2 whose open facts score 1.5
        let g = KnowledgeGraph::from_ids(3, 3, &[t(0, 0, 1), t(1, 1, 2)], &[], &[]);
        let model = flat_model(3, &[0.0, 0.0, 0.5]);
        let index = RuleIndex::from_scored(vec![(
            Rule::chain(RelationId(0), RelationId(1), RelationId(2)),
            1.1,
        )]);
        let res = phi(&g, &model, &index, &t(0, 2, 2), &SearchConfig::default());
        assert!((res.phi - 1.1).abs() < 1e-15);
        assert_eq!(res.path, vec![RuleId(0)]);
        assert!(!res.truncated);
    }

    #[test]
    fn train_query_scores_one() {
        let g = KnowledgeGraph::from_ids(2, 1, &[t(0, 0, 1)], &[], &[]);
        let model = flat_model(2, &[3.0]);
        let index = RuleIndex::from_scored(vec![(
            Rule::single(RelationId(0), true, RelationId(0)),
            1.1,
        )]);
        assert_eq!(
            phi(&g, &model, &index, &t(0, 0, 1), &SearchConfig::default()).phi,
            1.0
        );
    }

    #[test]
    fn pop_budget_truncates() {
        // r0(X,Z) & r0(Z,Y) => r0 on a dense graph: many states
        let mut train = Vec::new();
        for a in 0..6 {
            for b in 0..6 {
                if a != b && (a + b) % 3 != 0 {
                    train.push(t(a, 0, b));
                }
            }
        }
        let g = KnowledgeGraph::from_ids(6, 1, &train, &[], &[]);
        let model = flat_model(6, &[5.0]);
        let index = RuleIndex::from_scored(vec![(
            Rule::chain(RelationId(0), RelationId(0), RelationId(0)),
            1.01,
        )]);
        let cfg = SearchConfig {
            max_pops: 3,
            ..Default::default()
        };
        let res = phi(&g, &model, &index, &t(0, 0, 3), &cfg);
        assert!(res.pops <= 3);
        assert!(res.truncated);
    }

    #[test]
    fn depth_zero_keeps_embedding_score() {
        let g = KnowledgeGraph::from_ids(3, 3, &[t(0, 0, 1), t(1, 1, 2)], &[], &[]);
        let model = flat_model(3, &[0.0, 0.0, 0.5]);
        let index = RuleIndex::from_scored(vec![(
            Rule::chain(RelationId(0), RelationId(1), RelationId(2)),
            1.1,
        )]);
        let cfg = SearchConfig {
            max_depth: 0,
            ..Default::default()
        };
        assert_eq!(phi(&g, &model, &index, &t(0, 2, 2), &cfg).phi, 1.5);
    }

    #[test]
    fn trace_is_json_lines() {
        let g = KnowledgeGraph::from_ids(3, 3, &[t(0, 0, 1), t(1, 1, 2)], &[], &[]);
        let model = flat_model(3, &[0.0, 0.0, 0.5]);
        let index = RuleIndex::from_scored(vec![(
            Rule::chain(RelationId(0), RelationId(1), RelationId(2)),
            1.1,
        )]);
        let mut trace = TraceRecorder::default();
        phi_observed(
            &g,
            &model,
            &index,
            &t(0, 2, 2),
            &SearchConfig::default(),
            &mut trace,
        );
        let text = trace.to_json_lines();
        let lines: Vec<serde_json::Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0]["action"], "extended");
        assert_eq!(lines[0]["pushed"], 1);
        assert_eq!(lines[1]["action"], "terminal");
        assert_eq!(lines[1]["state"], "(0,0,1) (1,1,2)");
    }

    #[test]
    fn epsilon_buckets_pop_fifo() {
        let a = Queued {
            key: 1.0,
            seq: 2,
            state: SearchState::initial(
                &KnowledgeGraph::from_ids(1, 1, &[], &[], &[]),
                &flat_model(1, &[0.0]),
                t(0, 0, 0),
            ),
        };
        let b = Queued {
            key: 1.0,
            seq: 1,
            state: a.state.clone(),
        };
        let c = Queued {
            key: 0.5,
            seq: 9,
            state: a.state.clone(),
        };
        let mut heap = BinaryHeap::from(vec![a, b, c]);
        let order: Vec<u64> = std::iter::from_fn(|| heap.pop().map(|q| q.seq)).collect();
        assert_eq!(order, vec![9, 1, 2]);
    }
}
