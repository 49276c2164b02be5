//! Weighted aggregation of normalized scores and token-budgeted,
//! domain-proportional top-k selection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fs;
use std::io::Write;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::corpus::{Document, DomainTag};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::presets::slimpajama_proportions;
use crate::scores::ScoreMatrix;

const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Nonnegative weights over named scores that sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexMap<String, f64>", into = "IndexMap<String, f64>")]
pub struct WeightVector {
    names: Vec<String>,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let (names, weights): (Vec<String>, Vec<f64>) =
            pairs.into_iter().map(|(n, w)| (n.into(), w)).unzip();
        if names.is_empty() {
            return Err(Error::invalid("weight vector is empty"));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::invalid(format!("weight `{n}` given twice")));
            }
        }
        if let Some((n, w)) = names.iter().zip(&weights).find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid(format!("weight `{n}` = {w} is not a nonnegative number")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!("weights sum to {sum}, not 1")));
        }
        Ok(WeightVector { names, weights })
    }

    /// Scales nonnegative weights onto the simplex.
    pub fn from_unnormalized<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let pairs: Vec<(String, f64)> = pairs.into_iter().map(|(n, w)| (n.into(), w)).collect();
        let sum: f64 = pairs.iter().map(|(_, w)| w).sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::invalid("weights must have a positive finite sum"));
        }
        if let Some((n, w)) = pairs.iter().find(|(_, w)| !(*w >= 0.0)) {
            return Err(Error::invalid(format!("weight `{n}` = {w} is negative")));
        }
        WeightVector::new(pairs.into_iter().map(|(n, w)| (n, w / sum)))
    }

    pub fn uniform<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let w = 1.0 / names.len() as f64;
        WeightVector::new(names.iter().map(|n| (n.as_ref().to_string(), w)))
    }

    /// All weight on one score.
    pub fn single(name: impl Into<String>) -> Self {
        WeightVector {
            names: vec![name.into()],
            weights: vec![1.0],
        }
    }

    /// Builds from raw coordinates aligned with `names`.
    pub fn from_coordinates<S: AsRef<str>>(names: &[S], coords: &[f64]) -> Result<Self> {
        if names.len() != coords.len() {
            return Err(Error::invalid("names and coordinates differ in length"));
        }
        WeightVector::new(names.iter().map(|n| n.as_ref().to_string()).zip(coords.iter().copied()))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.weights[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(String::as_str).zip(self.weights.iter().copied())
    }

    /// L1 distance, matching coordinates by name; absent names count as 0.
    pub fn l1_distance(&self, other: &WeightVector) -> f64 {
        let mut d: f64 = self.iter().map(|(n, w)| (w - other.get(n).unwrap_or(0.0)).abs()).sum();
        d += other
            .iter()
            .filter(|(n, _)| self.get(n).is_none())
            .map(|(_, w)| w.abs())
            .sum::<f64>();
        d
    }
}

impl TryFrom<IndexMap<String, f64>> for WeightVector {
    type Error = Error;

    fn try_from(map: IndexMap<String, f64>) -> Result<Self> {
        WeightVector::new(map)
    }
}

impl From<WeightVector> for IndexMap<String, f64> {
    fn from(w: WeightVector) -> Self {
        w.names.into_iter().zip(w.weights).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TieBreak {
    /// Smaller id wins.
    #[default]
    LexicographicId,
    /// Smaller seeded hash of the id wins; ids break hash ties.
    HashedId { seed: u64 },
}

/// Token budget and per-domain shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPlan {
    pub token_budget: u64,
    pub domain_targets: IndexMap<DomainTag, f64>,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl SelectionPlan {
    pub fn new(
        token_budget: u64,
        domain_targets: impl IntoIterator<Item = (DomainTag, f64)>,
        tie_break: TieBreak,
    ) -> Result<Self> {
        let plan = SelectionPlan {
            token_budget,
            domain_targets: domain_targets.into_iter().collect(),
            tie_break,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// The SlimPajama domain mix.
    pub fn slimpajama(token_budget: u64) -> Self {
        SelectionPlan::new(
            token_budget,
            slimpajama_proportions().into_iter().map(|(n, p)| (DomainTag::new(n), p)),
            TieBreak::LexicographicId,
        )
        .expect("published mix is valid")
    }

    /// Everything from CommonCrawl.
    pub fn cc_only(token_budget: u64) -> Self {
        SelectionPlan::single_domain(token_budget, DomainTag::new("CommonCrawl"))
    }

    pub fn single_domain(token_budget: u64, domain: DomainTag) -> Self {
        SelectionPlan {
            token_budget,
            domain_targets: [(domain, 1.0)].into_iter().collect(),
            tie_break: TieBreak::LexicographicId,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.token_budget == 0 {
            return Err(Error::invalid("token budget must be positive"));
        }
        if self.domain_targets.is_empty() {
            return Err(Error::invalid("plan has no domains"));
        }
        if let Some((d, p)) = self.domain_targets.iter().find(|(_, p)| !(**p >= 0.0)) {
            return Err(Error::invalid(format!("domain `{d}` has proportion {p}")));
        }
        let sum: f64 = self.domain_targets.values().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!("domain proportions sum to {sum}, not 1")));
        }
        Ok(())
    }

    pub fn target_tokens(&self, domain: &DomainTag) -> f64 {
        self.domain_targets.get(domain).copied().unwrap_or(0.0) * self.token_budget as f64
    }
}

/// The per-document facts selection needs, aligned with score matrix rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolEntry {
    pub id: String,
    pub domain: DomainTag,
    pub tokens: u64,
}

impl From<&Document> for PoolEntry {
    fn from(d: &Document) -> Self {
        PoolEntry {
            id: d.id.clone(),
            domain: d.domain.clone(),
            tokens: d.token_estimate,
        }
    }
}

pub fn pool_of<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Vec<PoolEntry> {
    docs.into_iter().map(PoolEntry::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainOutcome {
    pub domain: DomainTag,
    pub target_proportion: f64,
    pub target_tokens: f64,
    pub pool_documents: usize,
    pub pool_tokens: u64,
    pub selected_documents: usize,
    pub selected_tokens: u64,
    /// Lowest aggregate score admitted; `None` when nothing was selected.
    pub threshold: Option<f64>,
    /// Tokens missing from the target when the pool ran dry.
    pub shortfall_tokens: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub token_budget: u64,
    pub total_tokens: u64,
    /// Selected ids, grouped by plan domain, best first within a domain.
    pub selected: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<usize>,
    pub domains: Vec<DomainOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub token_budget: u64,
    pub total_tokens: u64,
    pub selected_documents: usize,
    pub achieved_proportions: IndexMap<String, f64>,
    pub thresholds: IndexMap<String, Option<f64>>,
    pub shortfalls: IndexMap<String, f64>,
}

impl SelectionResult {
    pub fn achieved_proportion(&self, domain: &str) -> f64 {
        let tokens = self
            .domains
            .iter()
            .find(|d| d.domain.as_str() == domain)
            .map_or(0, |d| d.selected_tokens);
        if self.total_tokens == 0 {
            0.0
        } else {
            tokens as f64 / self.total_tokens as f64
        }
    }

    pub fn has_shortfall(&self) -> bool {
        self.domains.iter().any(|d| d.shortfall_tokens.is_some())
    }

    pub fn report(&self) -> SelectionReport {
        SelectionReport {
            token_budget: self.token_budget,
            total_tokens: self.total_tokens,
            selected_documents: self.selected.len(),
            achieved_proportions: self
                .domains
                .iter()
                .map(|d| (d.domain.to_string(), self.achieved_proportion(d.domain.as_str())))
                .collect(),
            thresholds: self.domains.iter().map(|d| (d.domain.to_string(), d.threshold)).collect(),
            shortfalls: self
                .domains
                .iter()
                .filter_map(|d| d.shortfall_tokens.map(|s| (d.domain.to_string(), s)))
                .collect(),
        }
    }

    /// One id per line.
    pub fn write_manifest(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::with_capacity(self.selected.len() * 12);
        for id in &self.selected {
            out.extend_from_slice(id.as_bytes());
            out.push(b'\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn write_report(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut json = serde_json::to_vec_pretty(&self.report())?;
        json.write_all(b"\n").expect("vec write");
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

/// `Σ_j w_j · scores_j` over `names`-aligned scores.
pub fn aggregate_score(scores: &[f64], names: &[String], w: &WeightVector) -> Result<f64> {
    if scores.len() != names.len() {
        return Err(Error::invalid("score vector and names differ in length"));
    }
    let mut total = 0.0;
    for (name, weight) in w.iter() {
        let i = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownScore(name.to_string()))?;
        total += weight * scores[i];
    }
    Ok(total)
}

/// Aggregate of the normalized view for every row.
pub fn aggregate_scores(matrix: &ScoreMatrix, w: &WeightVector, exec: Execution) -> Result<Vec<f64>> {
    if !matrix.is_normalized() {
        return Err(Error::invalid("score matrix is not normalized"));
    }
    let terms: Vec<(usize, f64)> = w
        .iter()
        .map(|(name, weight)| {
            matrix
                .column_index(name)
                .map(|c| (c, weight))
                .ok_or_else(|| Error::UnknownScore(name.to_string()))
        })
        .collect::<Result<_>>()?;
    Ok(exec.map_range(matrix.rows(), |r| {
        let row = matrix.normalized_row(r).expect("normalized");
        terms.iter().map(|&(c, weight)| weight * row[c]).fold(0.0, |acc, t| acc + t)
    }))
}

struct Ranked<'a> {
    score: f64,
    tie: u64,
    id: &'a str,
    row: usize,
    tokens: u64,
}

impl Ranked<'_> {
    /// Greater = selected earlier.
    fn priority(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.tie.cmp(&self.tie))
            .then_with(|| other.id.cmp(self.id))
    }
}

impl PartialEq for Ranked<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.priority(other) == Ordering::Equal
    }
}
impl Eq for Ranked<'_> {}
impl PartialOrd for Ranked<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority(other)
    }
}

fn tie_key(policy: TieBreak, id: &str) -> u64 {
    match policy {
        TieBreak::LexicographicId => 0,
        TieBreak::HashedId { seed } => xxh3_64_with_seed(id.as_bytes(), seed),
    }
}

/// Quota filling: per plan domain, documents in descending score order
/// until the domain's token target is reached. The document that crosses
/// the target is kept.
pub fn select_by_scores(
    scores: &[f64],
    pool: &[PoolEntry],
    plan: &SelectionPlan,
    admitted: Option<&[bool]>,
    exec: Execution,
) -> Result<SelectionResult> {
    plan.validate()?;
    if scores.len() != pool.len() {
        return Err(Error::invalid("scores and pool differ in length"));
    }
    let domains: Vec<(&DomainTag, f64)> = plan.domain_targets.iter().map(|(d, p)| (d, *p)).collect();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); domains.len()];
    for (row, entry) in pool.iter().enumerate() {
        if admitted.is_some_and(|a| !a[row]) {
            continue;
        }
        if let Some(g) = domains.iter().position(|(d, _)| *d == &entry.domain) {
            groups[g].push(row);
        }
    }

    let per_domain = exec.map_range(domains.len(), |g| {
        let (domain, proportion) = domains[g];
        let target = proportion * plan.token_budget as f64;
        let rows = &groups[g];
        let pool_tokens: u64 = rows.iter().map(|&r| pool[r].tokens).sum();
        let mut heap: BinaryHeap<Ranked> = rows
            .iter()
            .map(|&r| Ranked {
                score: scores[r],
                tie: tie_key(plan.tie_break, &pool[r].id),
                id: &pool[r].id,
                row: r,
                tokens: pool[r].tokens,
            })
            .collect();
        let mut taken = Vec::new();
        let mut tokens = 0u64;
        let mut threshold = None;
        while (tokens as f64) < target {
            let Some(best) = heap.pop() else { break };
            tokens += best.tokens;
            threshold = Some(best.score);
            taken.push(best.row);
        }
        let shortfall = ((tokens as f64) < target).then_some(target - tokens as f64);
        (
            taken,
            DomainOutcome {
                domain: domain.clone(),
                target_proportion: proportion,
                target_tokens: target,
                pool_documents: rows.len(),
                pool_tokens,
                selected_documents: 0,
                selected_tokens: tokens,
                threshold,
                shortfall_tokens: shortfall,
            },
        )
    });

    let mut result = SelectionResult {
        token_budget: plan.token_budget,
        total_tokens: 0,
        selected: Vec::new(),
        rows: Vec::new(),
        domains: Vec::with_capacity(per_domain.len()),
    };
    for (taken, mut outcome) in per_domain {
        outcome.selected_documents = taken.len();
        result.total_tokens += outcome.selected_tokens;
        result.selected.extend(taken.iter().map(|&r| pool[r].id.clone()));
        result.rows.extend(taken);
        result.domains.push(outcome);
    }
    Ok(result)
}

fn check_alignment(matrix: &ScoreMatrix, pool: &[PoolEntry]) -> Result<()> {
    if matrix.rows() != pool.len() {
        return Err(Error::invalid(format!(
            "score matrix has {} rows but the pool has {} documents",
            matrix.rows(),
            pool.len()
        )));
    }
    if let Some((id, entry)) = matrix.doc_ids().iter().zip(pool).find(|(id, e)| **id != e.id) {
        return Err(Error::invalid(format!(
            "score matrix row `{id}` does not match pool document `{}`",
            entry.id
        )));
    }
    Ok(())
}

/// Top-k selection under the aggregate of `w` over the normalized matrix.
pub fn select_top_k(
    matrix: &ScoreMatrix,
    pool: &[PoolEntry],
    w: &WeightVector,
    plan: &SelectionPlan,
    exec: Execution,
) -> Result<SelectionResult> {
    check_alignment(matrix, pool)?;
    let scores = aggregate_scores(matrix, w, exec)?;
    select_by_scores(&scores, pool, plan, None, exec)
}

/// Admits documents whose normalized score meets every threshold, then
/// fills the plan in order of the uniform mean of all scores.
pub fn intersection_select(
    matrix: &ScoreMatrix,
    pool: &[PoolEntry],
    thresholds: &[(String, f64)],
    plan: &SelectionPlan,
    exec: Execution,
) -> Result<SelectionResult> {
    check_alignment(matrix, pool)?;
    let cols: Vec<(usize, f64)> = thresholds
        .iter()
        .map(|(n, t)| {
            matrix
                .column_index(n)
                .map(|c| (c, *t))
                .ok_or_else(|| Error::UnknownScore(n.clone()))
        })
        .collect::<Result<_>>()?;
    let uniform = WeightVector::uniform(matrix.names())?;
    let scores = aggregate_scores(matrix, &uniform, exec)?;
    let admitted: Vec<bool> = exec.map_range(matrix.rows(), |r| {
        let row = matrix.normalized_row(r).expect("normalized");
        cols.iter().all(|&(c, t)| row[c] >= t)
    });
    select_by_scores(&scores, pool, plan, Some(&admitted), exec)
}
