//! Dictionary-encoded triple store.
//!
//! Entities and relations are interned into dense ids in first-appearance
//! order (train, then valid, then test). Adjacency indices and the
//! reasoning membership set cover the train split only; `all_known` covers
//! every split and is what the filtered ranking protocol consults.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationId(pub u32);

impl EntityId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An id-encoded fact `(head, relation, tail)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triplet {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triplet {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

impl fmt::Display for Triplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head.0, self.relation.0, self.tail.0)
    }
}

/// A triple as it appears in a dataset file, before interning.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawTriple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl RawTriple {
    pub fn new(
        head: impl Into<String>,
        relation: impl Into<String>,
        tail: impl Into<String>,
    ) -> Self {
        Self {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Head,
    Relation,
    Tail,
}

/// Column layout of a TSV dataset file, written as a permutation of `h`,
/// `r` and `t` (e.g. `hrt`, `htr`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnOrder([Field; 3]);

impl ColumnOrder {
    pub const HRT: ColumnOrder = ColumnOrder([Field::Head, Field::Relation, Field::Tail]);
    pub const HTR: ColumnOrder = ColumnOrder([Field::Head, Field::Tail, Field::Relation]);

    fn apply(&self, cols: [&str; 3]) -> RawTriple {
        let mut out = RawTriple::new("", "", "");
        for (field, value) in self.0.iter().zip(cols) {
            let slot = match field {
                Field::Head => &mut out.head,
                Field::Relation => &mut out.relation,
                Field::Tail => &mut out.tail,
            };
            *slot = value.to_string();
        }
        out
    }
}

impl Default for ColumnOrder {
    fn default() -> Self {
        Self::HRT
    }
}

impl FromStr for ColumnOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "column order must be a permutation of \"hrt\", got {s:?}"
            ))
        };
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 3 {
            return Err(bad());
        }
        let mut fields = [Field::Head; 3];
        for (slot, c) in fields.iter_mut().zip(&chars) {
            *slot = match c {
                'h' => Field::Head,
                'r' => Field::Relation,
                't' => Field::Tail,
                _ => return Err(bad()),
            };
        }
        for f in [Field::Head, Field::Relation, Field::Tail] {
            if !fields.contains(&f) {
                return Err(bad());
            }
        }
        Ok(ColumnOrder(fields))
    }
}

impl fmt::Display for ColumnOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for field in self.0 {
            let c = match field {
                Field::Head => 'h',
                Field::Relation => 'r',
                Field::Tail => 't',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parses tab-separated triples. Blank lines are skipped; every other line
/// must have exactly three fields.
pub fn parse_tsv<R: Read>(reader: R, order: ColumnOrder) -> Result<Vec<RawTriple>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 3 tab-separated fields, found {}", cols.len()),
            });
        }
        out.push(order.apply([cols[0], cols[1], cols[2]]));
    }
    Ok(out)
}

pub fn load_tsv(path: impl AsRef<Path>, order: ColumnOrder) -> Result<Vec<RawTriple>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_tsv(file, order).map_err(|e| e.in_file(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub entities: usize,
    pub relations: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub known: usize,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: IndexSet<String>,
    relations: IndexSet<String>,
    train: Vec<Triplet>,
    valid: Vec<Triplet>,
    test: Vec<Triplet>,
    train_set: HashSet<Triplet>,
    out_index: HashMap<(EntityId, RelationId), Vec<EntityId>>,
    in_index: HashMap<(EntityId, RelationId), Vec<EntityId>>,
    all_known: HashSet<Triplet>,
}

impl KnowledgeGraph {
    /// Interns all three splits and builds the train-only indices.
    /// Exact duplicate train facts collapse; valid and test keep file order.
    pub fn build(train: &[RawTriple], valid: &[RawTriple], test: &[RawTriple]) -> Self {
        let mut g = KnowledgeGraph::default();
        let train: Vec<Triplet> = train.iter().map(|t| g.intern(t)).collect();
        let valid: Vec<Triplet> = valid.iter().map(|t| g.intern(t)).collect();
        let test: Vec<Triplet> = test.iter().map(|t| g.intern(t)).collect();
        g.index_splits(train, valid, test);
        g
    }

    /// Builds a graph directly from id-encoded splits over `num_entities`
    /// anonymous entities (`e0`, `e1`, ...) and `num_relations` relations
    /// (`r0`, ...). Used by generators and tests.
    ///
    /// Panics if a triplet references an id outside those ranges.
    pub fn from_ids(
        num_entities: usize,
        num_relations: usize,
        train: &[Triplet],
        valid: &[Triplet],
        test: &[Triplet],
    ) -> Self {
        let mut g = KnowledgeGraph {
            entities: (0..num_entities).map(|i| format!("e{i}")).collect(),
            relations: (0..num_relations).map(|i| format!("r{i}")).collect(),
            ..Default::default()
        };
        for t in train.iter().chain(valid).chain(test) {
            assert!(
                t.head.index() < num_entities
                    && t.tail.index() < num_entities
                    && t.relation.index() < num_relations,
                "triplet {t} out of range"
            );
        }
        g.index_splits(train.to_vec(), valid.to_vec(), test.to_vec());
        g
    }

    fn index_splits(&mut self, train: Vec<Triplet>, valid: Vec<Triplet>, test: Vec<Triplet>) {
        for t in train {
            if self.train_set.insert(t) {
                self.train.push(t);
                self.out_index
                    .entry((t.head, t.relation))
                    .or_default()
                    .push(t.tail);
                self.in_index
                    .entry((t.tail, t.relation))
                    .or_default()
                    .push(t.head);
            }
        }
        for list in self
            .out_index
            .values_mut()
            .chain(self.in_index.values_mut())
        {
            list.sort_unstable();
        }
        self.valid = valid;
        self.test = test;
        self.all_known = self
            .train
            .iter()
            .chain(&self.valid)
            .chain(&self.test)
            .copied()
            .collect();
    }

    fn intern(&mut self, t: &RawTriple) -> Triplet {
        let (h, _) = self.entities.insert_full(t.head.clone());
        let (r, _) = self.relations.insert_full(t.relation.clone());
        let (tl, _) = self.entities.insert_full(t.tail.clone());
        Triplet::new(
            EntityId(h as u32),
            RelationId(r as u32),
            EntityId(tl as u32),
        )
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entities.get_index_of(name).map(|i| EntityId(i as u32))
    }

    pub fn relation_id(&self, name: &str) -> Option<RelationId> {
        self.relations
            .get_index_of(name)
            .map(|i| RelationId(i as u32))
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        &self.entities[id.index()]
    }

    pub fn relation_name(&self, id: RelationId) -> &str {
        &self.relations[id.index()]
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> {
        (0..self.entities.len() as u32).map(EntityId)
    }

    pub fn relations(&self) -> impl Iterator<Item = RelationId> {
        (0..self.relations.len() as u32).map(RelationId)
    }

    pub fn train(&self) -> &[Triplet] {
        &self.train
    }

    pub fn valid(&self) -> &[Triplet] {
        &self.valid
    }

    pub fn test(&self) -> &[Triplet] {
        &self.test
    }

    pub fn split(&self, split: Split) -> &[Triplet] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    /// Reasoning membership: true iff `x` is a train fact.
    #[inline]
    pub fn contains(&self, x: &Triplet) -> bool {
        self.train_set.contains(x)
    }

    /// Filtering membership over train ∪ valid ∪ test.
    #[inline]
    pub fn is_known(&self, x: &Triplet) -> bool {
        self.all_known.contains(x)
    }

    /// Sorted tails `t` with `(head, relation, t)` in train.
    pub fn neighbors_out(&self, head: EntityId, relation: RelationId) -> &[EntityId] {
        self.out_index
            .get(&(head, relation))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Sorted heads `h` with `(h, relation, tail)` in train.
    pub fn neighbors_in(&self, tail: EntityId, relation: RelationId) -> &[EntityId] {
        self.in_index
            .get(&(tail, relation))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            entities: self.num_entities(),
            relations: self.num_relations(),
            train: self.train.len(),
            valid: self.valid.len(),
            test: self.test.len(),
            known: self.all_known.len(),
        }
    }

    pub fn to_raw(&self, t: &Triplet) -> RawTriple {
        RawTriple::new(
            self.entity_name(t.head),
            self.relation_name(t.relation),
            self.entity_name(t.tail),
        )
    }

    /// Maps string triples onto existing ids; `None` if any name is unknown.
    pub fn encode(&self, t: &RawTriple) -> Option<Triplet> {
        Some(Triplet::new(
            self.entity_id(&t.head)?,
            self.relation_id(&t.relation)?,
            self.entity_id(&t.tail)?,
        ))
    }
}

/// Writes triples as `head<TAB>relation<TAB>tail` lines.
pub fn write_tsv<W: std::io::Write>(mut w: W, triples: &[RawTriple]) -> std::io::Result<()> {
    for t in triples {
        writeln!(w, "{}\t{}\t{}", t.head, t.relation, t.tail)?;
    }
    Ok(())
}
