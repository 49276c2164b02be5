use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ScoreMatrix, MODEL_RATERS, PRRC_RANGE, PRRC_RATERS};
use crate::error::{Error, Result};

/// One model rating for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingAnnotation {
    #[serde(alias = "id")]
    pub doc_id: String,
    pub rater: String,
    pub value: f64,
}

impl RatingAnnotation {
    pub fn new(doc_id: impl Into<String>, rater: impl Into<String>, value: f64) -> Self {
        RatingAnnotation {
            doc_id: doc_id.into(),
            rater: rater.into(),
            value,
        }
    }

    fn validate(&self) -> Result<()> {
        if !MODEL_RATERS.contains(&self.rater.as_str()) {
            return Err(Error::UnregisteredRater(self.rater.clone()));
        }
        let (lo, hi) = if PRRC_RATERS.contains(&self.rater.as_str()) {
            PRRC_RANGE
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        if !self.value.is_finite() || self.value < lo || self.value > hi {
            return Err(Error::RatingOutOfRange {
                doc_id: self.doc_id.clone(),
                rater: self.rater.clone(),
                value: self.value,
                lo,
                hi,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub written: usize,
    /// Annotations whose document is not in the matrix.
    pub unknown_doc_ids: Vec<String>,
    /// Fraction of documents carrying each rater after ingestion.
    pub coverage: BTreeMap<String, f64>,
}

impl ScoreMatrix {
    /// Writes ratings into their cells. Raters must already be columns of
    /// the matrix. An unregistered rater or out-of-range value aborts;
    /// unknown document ids are collected in the report.
    pub fn ingest_ratings<I>(&mut self, annotations: I) -> Result<IngestReport>
    where
        I: IntoIterator<Item = RatingAnnotation>,
    {
        let mut report = IngestReport::default();
        let mut unknown = HashSet::new();
        for a in annotations {
            a.validate()?;
            let col = self
                .column_index(&a.rater)
                .ok_or_else(|| Error::UnknownScore(a.rater.clone()))?;
            match self.row_index(&a.doc_id) {
                Some(row) => {
                    self.set(row, col, a.value)?;
                    report.written += 1;
                }
                None => {
                    if unknown.insert(a.doc_id.clone()) {
                        report.unknown_doc_ids.push(a.doc_id);
                    }
                }
            }
        }
        let n = self.rows().max(1) as f64;
        for (col, name) in self.names().iter().enumerate() {
            if MODEL_RATERS.contains(&name.as_str()) {
                let covered = self.rows() - self.missing_in_column(col);
                report.coverage.insert(name.clone(), covered as f64 / n);
            }
        }
        Ok(report)
    }
}

/// Reads a JSONL ratings file: `{"doc_id": .., "rater": .., "value": ..}` per line.
pub fn read_ratings(path: impl AsRef<Path>) -> Result<Vec<RatingAnnotation>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let a: RatingAnnotation = serde_json::from_str(&line).map_err(|e| Error::Record {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(a);
    }
    Ok(out)
}
