//! The per-document score matrix: all quality scores side by side, model
//! rating ingestion, normalization and rank correlation.

mod correlation;
mod io;
mod normalize;
mod ratings;

use std::collections::HashMap;

use serde::Serialize;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::importance::IMPORTANCE_NAMES;
use crate::signals::SIGNAL_NAMES;

pub use correlation::{pearson, spearman_matrix, CorrelationMatrix};
pub use normalize::{average_ranks, Normalization};
pub use ratings::{read_ratings, IngestReport, RatingAnnotation};

/// Model-based raters whose values are ingested rather than computed.
pub const MODEL_RATERS: [&str; 11] = [
    "Fineweb-edu",
    "Advertisement",
    "Fluency",
    "Required Expertise",
    "Writing Style",
    "Facts and Trivia",
    "Educational Value",
    "Professionalism",
    "Readability",
    "Reasoning",
    "Cleanliness",
];

/// Raters on the additive 0–5 scale.
pub const PRRC_RATERS: [&str; 4] = ["Professionalism", "Readability", "Reasoning", "Cleanliness"];
pub const PRRC_RANGE: (f64, f64) = (0.0, 5.0);

/// All 25 score names: signals, importance scores, model ratings.
pub const CANONICAL_SCORE_NAMES: [&str; 25] = [
    SIGNAL_NAMES[0],
    SIGNAL_NAMES[1],
    SIGNAL_NAMES[2],
    SIGNAL_NAMES[3],
    SIGNAL_NAMES[4],
    SIGNAL_NAMES[5],
    SIGNAL_NAMES[6],
    SIGNAL_NAMES[7],
    SIGNAL_NAMES[8],
    SIGNAL_NAMES[9],
    SIGNAL_NAMES[10],
    IMPORTANCE_NAMES[0],
    IMPORTANCE_NAMES[1],
    IMPORTANCE_NAMES[2],
    MODEL_RATERS[0],
    MODEL_RATERS[1],
    MODEL_RATERS[2],
    MODEL_RATERS[3],
    MODEL_RATERS[4],
    MODEL_RATERS[5],
    MODEL_RATERS[6],
    MODEL_RATERS[7],
    MODEL_RATERS[8],
    MODEL_RATERS[9],
    MODEL_RATERS[10],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    Signal,
    Importance,
    ModelRating,
    Custom,
}

impl ScoreKind {
    pub fn of(name: &str) -> Self {
        if SIGNAL_NAMES.contains(&name) {
            ScoreKind::Signal
        } else if IMPORTANCE_NAMES.contains(&name) {
            ScoreKind::Importance
        } else if MODEL_RATERS.contains(&name) {
            ScoreKind::ModelRating
        } else {
            ScoreKind::Custom
        }
    }
}

/// Known names first in canonical order, then the rest in first-seen order.
pub fn canonical_order<S: AsRef<str>>(names: &[S]) -> Vec<String> {
    let mut out: Vec<String> = CANONICAL_SCORE_NAMES
        .iter()
        .filter(|c| names.iter().any(|n| n.as_ref() == **c))
        .map(|c| c.to_string())
        .collect();
    for n in names {
        let n = n.as_ref();
        if !out.iter().any(|o| o == n) {
            out.push(n.to_string());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImputedCell {
    pub doc_id: String,
    pub score: String,
    pub value: f64,
}

/// `n × m` scores, row-major. Missing raw cells are NaN until imputed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    names: Vec<String>,
    doc_ids: Vec<String>,
    raw: Vec<f64>,
    normalized: Option<Vec<f64>>,
    imputed: Vec<ImputedCell>,
    row_of: HashMap<String, usize>,
}

impl ScoreMatrix {
    /// An all-missing matrix.
    pub fn new(names: Vec<String>, doc_ids: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::invalid(format!("duplicate score name `{n}`")));
            }
        }
        let mut row_of = HashMap::with_capacity(doc_ids.len());
        for (i, id) in doc_ids.iter().enumerate() {
            if row_of.insert(id.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate document id `{id}`")));
            }
        }
        let raw = vec![f64::NAN; names.len() * doc_ids.len()];
        Ok(ScoreMatrix {
            names,
            doc_ids,
            raw,
            normalized: None,
            imputed: Vec::new(),
            row_of,
        })
    }

    /// Builds from the documents' score maps. With `names = None` the union
    /// of all names present is used, in canonical order.
    pub fn from_documents(docs: &[Document], names: Option<&[String]>) -> Result<Self> {
        let names = match names {
            Some(n) => n.to_vec(),
            None => {
                let mut seen: Vec<String> = Vec::new();
                for d in docs {
                    for k in d.scores.iter().flat_map(|s| s.keys()) {
                        if !seen.contains(k) {
                            seen.push(k.clone());
                        }
                    }
                }
                canonical_order(&seen)
            }
        };
        let mut m = ScoreMatrix::new(names, docs.iter().map(|d| d.id.clone()).collect())?;
        for (row, d) in docs.iter().enumerate() {
            if let Some(scores) = &d.scores {
                for (col, name) in m.names.clone().iter().enumerate() {
                    if let Some(v) = scores.get(name) {
                        m.set(row, col, *v)?;
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn rows(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn row_index(&self, doc_id: &str) -> Option<usize> {
        self.row_of.get(doc_id).copied()
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::invalid(format!(
                "non-finite value for `{}` on `{}`",
                self.names[col], self.doc_ids[row]
            )));
        }
        let m = self.cols();
        self.raw[row * m + col] = value;
        self.normalized = None;
        Ok(())
    }

    pub fn raw(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.raw[row * self.cols() + col];
        (!v.is_nan()).then_some(v)
    }

    pub fn raw_row(&self, row: usize) -> &[f64] {
        let m = self.cols();
        &self.raw[row * m..(row + 1) * m]
    }

    pub fn raw_column(&self, col: usize) -> Vec<f64> {
        (0..self.rows()).map(|r| self.raw[r * self.cols() + col]).collect()
    }

    pub fn is_complete(&self) -> bool {
        !self.raw.iter().any(|v| v.is_nan())
    }

    pub fn missing_in_column(&self, col: usize) -> usize {
        (0..self.rows())
            .filter(|&r| self.raw[r * self.cols() + col].is_nan())
            .count()
    }

    pub fn imputed(&self) -> &[ImputedCell] {
        &self.imputed
    }

    /// Normalized row; `None` until [`ScoreMatrix::normalize`] has run.
    pub fn normalized_row(&self, row: usize) -> Option<&[f64]> {
        let m = self.cols();
        self.normalized.as_ref().map(|n| &n[row * m..(row + 1) * m])
    }

    pub fn normalized(&self, row: usize, col: usize) -> Option<f64> {
        self.normalized.as_ref().map(|n| n[row * self.cols() + col])
    }

    pub fn normalized_column(&self, col: usize) -> Option<Vec<f64>> {
        let m = self.cols();
        self.normalized
            .as_ref()
            .map(|n| (0..self.rows()).map(|r| n[r * m + col]).collect())
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized.is_some()
    }

    /// Fills missing model ratings with the column median and records each
    /// filled cell. Missing signals, importance or custom scores are an
    /// error: they are computed, so a gap means a broken upstream step.
    pub fn impute_missing(&mut self) -> Result<usize> {
        let m = self.cols();
        let mut filled = 0;
        for col in 0..m {
            let missing = self.missing_in_column(col);
            if missing == 0 {
                continue;
            }
            let name = &self.names[col];
            if ScoreKind::of(name) != ScoreKind::ModelRating {
                return Err(Error::invalid(format!(
                    "score `{name}` is missing for {missing} documents and cannot be imputed"
                )));
            }
            let mut present: Vec<f64> = self.raw_column(col).into_iter().filter(|v| !v.is_nan()).collect();
            if present.is_empty() {
                return Err(Error::invalid(format!("score `{name}` has no values to impute from")));
            }
            present.sort_by(f64::total_cmp);
            let k = present.len();
            let median = if k % 2 == 1 {
                present[k / 2]
            } else {
                0.5 * (present[k / 2 - 1] + present[k / 2])
            };
            for row in 0..self.rows() {
                if self.raw[row * m + col].is_nan() {
                    self.raw[row * m + col] = median;
                    self.imputed.push(ImputedCell {
                        doc_id: self.doc_ids[row].clone(),
                        score: name.clone(),
                        value: median,
                    });
                    filled += 1;
                }
            }
        }
        self.normalized = None;
        Ok(filled)
    }

    /// Sub-matrix with the given columns, in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<ScoreMatrix> {
        let cols: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n.as_ref()).ok_or_else(|| Error::UnknownScore(n.as_ref().into())))
            .collect::<Result<_>>()?;
        let mut out = ScoreMatrix::new(
            names.iter().map(|n| n.as_ref().to_string()).collect(),
            self.doc_ids.clone(),
        )?;
        let k = cols.len();
        for r in 0..self.rows() {
            for (j, &c) in cols.iter().enumerate() {
                out.raw[r * k + j] = self.raw[r * self.cols() + c];
            }
        }
        if let Some(norm) = &self.normalized {
            let mut n = vec![0.0; self.rows() * k];
            for r in 0..self.rows() {
                for (j, &c) in cols.iter().enumerate() {
                    n[r * k + j] = norm[r * self.cols() + c];
                }
            }
            out.normalized = Some(n);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DomainTag, ScoreMap, TokenEstimator};

    fn doc(id: &str, scores: &[(&str, f64)]) -> Document {
        let map: ScoreMap = scores.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Document::new(id, "x", DomainTag::new("C4"), &TokenEstimator::Whitespace).with_scores(map)
    }

    #[test]
    fn canonical_column_order() {
        let docs = vec![
            doc("a", &[("custom", 1.0), ("Reasoning", 2.0), ("doc_word_count", 3.0)]),
            doc("b", &[("books_importance", 0.1)]),
        ];
        let m = ScoreMatrix::from_documents(&docs, None).unwrap();
        assert_eq!(
            m.names(),
            &["doc_word_count", "books_importance", "Reasoning", "custom"]
        );
        assert_eq!(m.raw(0, 2), Some(2.0));
        assert_eq!(m.raw(1, 2), None);
    }

    #[test]
    fn imputation_policy() {
        let docs = vec![
            doc("a", &[("Reasoning", 1.0), ("doc_word_count", 3.0)]),
            doc("b", &[("Reasoning", 3.0), ("doc_word_count", 4.0)]),
            doc("c", &[("doc_word_count", 5.0)]),
        ];
        let mut m = ScoreMatrix::from_documents(&docs, None).unwrap();
        assert_eq!(m.impute_missing().unwrap(), 1);
        let col = m.column_index("Reasoning").unwrap();
        assert_eq!(m.raw(2, col), Some(2.0));
        assert_eq!(m.imputed()[0].doc_id, "c");
        assert!(m.is_complete());

        let docs = vec![doc("a", &[("doc_word_count", 3.0)]), doc("b", &[("Reasoning", 3.0)])];
        let mut m = ScoreMatrix::from_documents(&docs, None).unwrap();
        assert!(m.impute_missing().is_err());
    }

    #[test]
    fn duplicate_ids_and_names_rejected() {
        assert!(ScoreMatrix::new(vec!["a".into()], vec!["x".into(), "x".into()]).is_err());
        assert!(ScoreMatrix::new(vec!["a".into(), "a".into()], vec!["x".into()]).is_err());
    }

    #[test]
    fn canonical_names_are_distinct() {
        let set: std::collections::HashSet<_> = CANONICAL_SCORE_NAMES.iter().collect();
        assert_eq!(set.len(), 25);
        assert_eq!(ScoreKind::of("Writing Style"), ScoreKind::ModelRating);
        assert_eq!(ScoreKind::of("math_importance"), ScoreKind::Importance);
        assert_eq!(ScoreKind::of("doc_num_sentences"), ScoreKind::Signal);
    }
}
