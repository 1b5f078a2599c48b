//! Filtered link-prediction ranking for the embedding baseline and the rule
//! reasoner, with per-query rank records and rank comparison.

use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{triplet_score, TranslationModel};
use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, Triplet};
use crate::oracle::exhaustive_phi;
use crate::reasoner::{phi, SearchConfig};
use crate::rules::RuleIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Head,
    Tail,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Head, Side::Tail];

    /// `x` with the entity on this side replaced by `e`.
    pub fn corrupt(self, x: &Triplet, e: EntityId) -> Triplet {
        match self {
            Side::Head => Triplet::new(e, x.relation, x.tail),
            Side::Tail => Triplet::new(x.head, x.relation, e),
        }
    }

    fn entity(self, x: &Triplet) -> EntityId {
        match self {
            Side::Head => x.head,
            Side::Tail => x.tail,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Head => "head",
            Side::Tail => "tail",
        })
    }
}

/// The test fact followed by every corruption of `side` that is not a known
/// fact of any split.
pub fn filtered_candidates(g: &KnowledgeGraph, test: &Triplet, side: Side) -> Vec<Triplet> {
    let own = side.entity(test);
    let mut out = vec![*test];
    out.extend(
        g.entities()
            .filter(|&e| e != own)
            .map(|e| side.corrupt(test, e))
            .filter(|c| !g.is_known(c)),
    );
    out
}

/// Rank of `scores[0]` among `scores` (lower is better). Ties count against
/// the first entry.
pub fn pessimistic_rank(scores: &[f64]) -> usize {
    let target = scores[0];
    1 + scores[1..].iter().filter(|&&s| s <= target).count()
}

/// Filtered rank of `test` when every candidate is scored by `score`.
pub fn rank_candidates<F>(g: &KnowledgeGraph, test: &Triplet, side: Side, score: F) -> usize
where
    F: Fn(&Triplet) -> f64,
{
    let scores: Vec<f64> = filtered_candidates(g, test, side)
        .iter()
        .map(score)
        .collect();
    pessimistic_rank(&scores)
}

/// Unfiltered rank: every corruption competes, known facts included.
pub fn raw_rank<F>(g: &KnowledgeGraph, test: &Triplet, side: Side, score: F) -> usize
where
    F: Fn(&Triplet) -> f64,
{
    let own = side.entity(test);
    let mut scores = vec![score(test)];
    scores.extend(
        g.entities()
            .filter(|&e| e != own)
            .map(|e| score(&side.corrupt(test, e))),
    );
    pessimistic_rank(&scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub mr: f64,
    pub mrr: f64,
    pub hits1: f64,
    pub hits10: f64,
    pub n_queries: usize,
}

impl Metrics {
    pub fn from_ranks(ranks: impl IntoIterator<Item = usize>) -> Self {
        let (mut n, mut sum, mut rr, mut h1, mut h10) = (0usize, 0.0, 0.0, 0usize, 0usize);
        for r in ranks {
            n += 1;
            sum += r as f64;
            rr += 1.0 / r as f64;
            h1 += (r <= 1) as usize;
            h10 += (r <= 10) as usize;
        }
        if n == 0 {
            return Self::default();
        }
        let n_f = n as f64;
        Self {
            mr: sum / n_f,
            mrr: rr / n_f,
            hits1: h1 as f64 / n_f,
            hits10: h10 as f64 / n_f,
            n_queries: n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRecord {
    pub test_index: usize,
    pub side: Side,
    pub rank_baseline: usize,
    pub rank_emrbr: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MethodPair {
    pub baseline: Metrics,
    pub emrbr: Metrics,
}

impl MethodPair {
    fn from_records<'a>(records: impl Iterator<Item = &'a RankRecord> + Clone) -> Self {
        Self {
            baseline: Metrics::from_ranks(records.clone().map(|r| r.rank_baseline)),
            emrbr: Metrics::from_ranks(records.map(|r| r.rank_emrbr)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: MethodPair,
    pub head: MethodPair,
    pub tail: MethodPair,
    /// Reasoner calls that hit the pop budget.
    pub truncated_searches: usize,
    /// Reasoner scores that disagreed with brute-force enumeration; only
    /// counted when the oracle check is enabled.
    pub oracle_mismatches: usize,
    pub oracle_checks: usize,
}

impl EvalReport {
    pub fn from_records(records: &[RankRecord]) -> Self {
        Self {
            overall: MethodPair::from_records(records.iter()),
            head: MethodPair::from_records(records.iter().filter(|r| r.side == Side::Head)),
            tail: MethodPair::from_records(records.iter().filter(|r| r.side == Side::Tail)),
            ..Default::default()
        }
    }

    /// `{baseline: {mr, mrr, hits1, hits10, n_queries, percent, per_side},
    /// emrbr: {...}, truncated_searches, ...}`.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let block = |m: &Metrics| {
            json!({
                "mr": m.mr,
                "mrr": m.mrr,
                "hits1": m.hits1,
                "hits10": m.hits10,
                "n_queries": m.n_queries,
            })
        };
        let method = |pick: fn(&MethodPair) -> &Metrics| {
            let m = pick(&self.overall);
            let mut v = block(m);
            v["percent"] = json!({
                "mrr": 100.0 * m.mrr,
                "hits1": 100.0 * m.hits1,
                "hits10": 100.0 * m.hits10,
            });
            v["per_side"] = json!({
                "head": block(pick(&self.head)),
                "tail": block(pick(&self.tail)),
            });
            v
        };
        json!({
            "baseline": method(|p| &p.baseline),
            "emrbr": method(|p| &p.emrbr),
            "truncated_searches": self.truncated_searches,
            "oracle_checks": self.oracle_checks,
            "oracle_mismatches": self.oracle_mismatches,
        })
    }

    /// Fixed-width table with metrics in percent (MR as-is).
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<8} {:<9} {:>10} {:>8} {:>8} {:>8} {:>8}\n",
            "side", "method", "MR", "MRR%", "Hits@1%", "Hits@10%", "queries"
        );
        for (side, pair) in [
            ("all", &self.overall),
            ("head", &self.head),
            ("tail", &self.tail),
        ] {
            for (name, m) in [("baseline", &pair.baseline), ("emrbr", &pair.emrbr)] {
                out.push_str(&format!(
                    "{:<8} {:<9} {:>10.2} {:>8.2} {:>8.2} {:>8.2} {:>8}\n",
                    side,
                    name,
                    m.mr,
                    100.0 * m.mrr,
                    100.0 * m.hits1,
                    100.0 * m.hits10,
                    m.n_queries
                ));
            }
        }
        if self.truncated_searches > 0 {
            out.push_str(&format!(
                "truncated searches: {}\n",
                self.truncated_searches
            ));
        }
        if self.oracle_checks > 0 {
            out.push_str(&format!(
                "oracle mismatches: {} of {}\n",
                self.oracle_mismatches, self.oracle_checks
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub state_guard: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub search: SearchConfig,
    /// Rescore only the baseline's best `n` filtered candidates (and the test
    /// fact) with the reasoner; the rest keep their embedding score.
    pub rerank_top: Option<usize>,
    pub oracle: Option<OracleCheck>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            rerank_top: None,
            oracle: None,
        }
    }
}

/// Validates a rerank window size.
pub fn rerank_window(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Config("rerank window must be at least 1".into()));
    }
    Ok(n)
}

#[derive(Debug, Default)]
struct QueryOutcome {
    rank_baseline: usize,
    rank_emrbr: usize,
    truncated: usize,
    oracle_checks: usize,
    oracle_mismatches: usize,
    oracle_error: Option<Error>,
}

fn rank_query<M: TranslationModel + Sync + ?Sized>(
    g: &KnowledgeGraph,
    model: &M,
    index: &RuleIndex,
    test: &Triplet,
    side: Side,
    cfg: &EvalConfig,
) -> QueryOutcome {
    let candidates = filtered_candidates(g, test, side);
    let baseline: Vec<f64> = candidates
        .iter()
        .map(|c| triplet_score(model, g, c))
        .collect();
    let rank_baseline = pessimistic_rank(&baseline);

    let mut out = QueryOutcome {
        rank_baseline,
        ..Default::default()
    };

    // positions rescored by the reasoner; the rest keep the baseline score
    let chosen: Vec<usize> = match cfg.rerank_top {
        None => (0..candidates.len()).collect(),
        Some(n) => {
            let mut order: Vec<usize> = (0..candidates.len()).collect();
            order.sort_by(|&a, &b| baseline[a].total_cmp(&baseline[b]).then(a.cmp(&b)));
            order.truncate(n);
            if !order.contains(&0) {
                order.push(0);
            }
            order.sort_unstable();
            order
        }
    };

    let mut scores = baseline;
    for &i in &chosen {
        let c = &candidates[i];
        let res = phi(g, model, index, c, &cfg.search);
        out.truncated += res.truncated as usize;
        if let Some(oc) = cfg.oracle {
            match exhaustive_phi(g, model, index, c, cfg.search.max_depth, oc.state_guard) {
                Ok(v) => {
                    out.oracle_checks += 1;
                    if (v - res.phi).abs() > oc.tolerance {
                        out.oracle_mismatches += 1;
                    }
                }
                Err(e) => out.oracle_error = Some(e),
            }
        }
        scores[i] = res.phi;
    }
    out.rank_emrbr = pessimistic_rank(&scores);
    out
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub report: EvalReport,
    pub records: Vec<RankRecord>,
}

/// Ranks both sides of each listed test fact (indices into the test split)
/// under the baseline and the reasoner. Queries run in parallel; records come
/// back in `(test_index, side)` input order.
pub fn evaluate<M: TranslationModel + Sync + ?Sized>(
    g: &KnowledgeGraph,
    model: &M,
    index: &RuleIndex,
    test_indices: &[usize],
    cfg: &EvalConfig,
) -> Result<EvalOutput> {
    if let Some(n) = cfg.rerank_top {
        rerank_window(n)?;
    }
    let tests = g.test();
    if let Some(&bad) = test_indices.iter().find(|&&i| i >= tests.len()) {
        return Err(Error::Config(format!(
            "test index {bad} out of range ({} test facts)",
            tests.len()
        )));
    }
    let jobs: Vec<(usize, Side)> = test_indices
        .iter()
        .flat_map(|&i| Side::BOTH.into_iter().map(move |s| (i, s)))
        .collect();
    let mut outcomes: Vec<QueryOutcome> = jobs
        .par_iter()
        .map(|&(i, side)| rank_query(g, model, index, &tests[i], side, cfg))
        .collect();

    if let Some(e) = outcomes.iter_mut().find_map(|o| o.oracle_error.take()) {
        return Err(e);
    }
    let records: Vec<RankRecord> = jobs
        .iter()
        .zip(&outcomes)
        .map(|(&(test_index, side), o)| RankRecord {
            test_index,
            side,
            rank_baseline: o.rank_baseline,
            rank_emrbr: o.rank_emrbr,
        })
        .collect();
    let mut report = EvalReport::from_records(&records);
    report.truncated_searches = outcomes.iter().map(|o| o.truncated).sum();
    report.oracle_checks = outcomes.iter().map(|o| o.oracle_checks).sum();
    report.oracle_mismatches = outcomes.iter().map(|o| o.oracle_mismatches).sum();
    Ok(EvalOutput { report, records })
}

/// Test facts whose relation heads at least `min_rules` rules, most rules
/// first (ties by test order), at most `limit` of them.
pub fn build_rule_rich_subset(
    g: &KnowledgeGraph,
    index: &RuleIndex,
    min_rules: usize,
    limit: Option<usize>,
) -> Vec<usize> {
    let mut picked: Vec<(usize, usize)> = g
        .test()
        .iter()
        .enumerate()
        .map(|(i, t)| (index.rules_for(t.relation).len(), i))
        .filter(|&(n, _)| n >= min_rules)
        .collect();
    picked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    picked
        .into_iter()
        .map(|(_, i)| i)
        .take(limit.unwrap_or(usize::MAX))
        .collect()
}

pub fn write_rank_records<W: Write>(w: W, records: &[RankRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in records {
        csv.serialize(r).map_err(csv_error)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_rank_records<R: Read>(r: R) -> Result<Vec<RankRecord>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(csv_error))
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::from(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub test_index: usize,
    pub side: Side,
    pub rank_emrbr: usize,
    pub rank_baseline: usize,
    /// `rank_baseline - rank_emrbr`; positive when the reasoner ranks the
    /// fact better.
    pub delta: i64,
}

/// Baseline ranks from `baseline` against reasoner ranks from `emrbr`,
/// matched on `(test_index, side)`, biggest improvement first. Both streams
/// must cover exactly the same queries; pass one stream twice to compare
/// the two ranks of a single run.
pub fn compare_ranks(baseline: &[RankRecord], emrbr: &[RankRecord]) -> Result<Vec<DeltaRow>> {
    use std::collections::BTreeMap;
    let key = |r: &RankRecord| (r.test_index, r.side);
    let left: BTreeMap<_, _> = baseline.iter().map(|r| (key(r), r.rank_baseline)).collect();
    let right: BTreeMap<_, _> = emrbr.iter().map(|r| (key(r), r.rank_emrbr)).collect();
    let missing: Vec<String> = left
        .keys()
        .filter(|k| !right.contains_key(k))
        .chain(right.keys().filter(|k| !left.contains_key(k)))
        .map(|(i, s)| format!("{i}/{s}"))
        .collect();
    if !missing.is_empty() {
        return Err(Error::KeyMismatch(missing.join(", ")));
    }
    if left.len() != baseline.len() || right.len() != emrbr.len() {
        return Err(Error::KeyMismatch(
            "duplicate (test_index, side) records".into(),
        ));
    }
    let mut rows: Vec<DeltaRow> = left
        .iter()
        .map(|(&(test_index, side), &rank_baseline)| {
            let rank_emrbr = right[&(test_index, side)];
            DeltaRow {
                test_index,
                side,
                rank_emrbr,
                rank_baseline,
                delta: rank_baseline as i64 - rank_emrbr as i64,
            }
        })
        .collect();
    rows.sort_by(|x, y| {
        y.delta
            .cmp(&x.delta)
            .then(x.test_index.cmp(&y.test_index))
            .then(x.side.cmp(&y.side))
    });
    Ok(rows)
}

pub fn write_delta_rows<W: Write>(w: W, rows: &[DeltaRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r).map_err(csv_error)?;
    }
    csv.flush()?;
    Ok(())
}
