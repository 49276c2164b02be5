//! Ranked weight reports and the weights file.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::WeightVector;

/// Weights closer than this share a rank.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedWeight {
    pub name: String,
    pub weight: f64,
    pub rank: usize,
}

impl RankedWeight {
    pub fn percent(&self) -> f64 {
        self.weight * 100.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    pub entries: Vec<RankedWeight>,
}

impl WeightReport {
    pub fn get(&self, name: &str) -> Option<&RankedWeight> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_weights(&self) -> Result<WeightVector> {
        WeightVector::new(self.entries.iter().map(|e| (e.name.clone(), e.weight)))
    }
}

impl fmt::Display for WeightReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
        for e in &self.entries {
            writeln!(f, "{:>4}  {:<width$}  {:>6.2}%", e.rank, e.name, e.percent())?;
        }
        Ok(())
    }
}

/// Names sorted by weight, heaviest first. Equal weights share the better
/// rank and the next rank skips accordingly (1, 2, 2, 4, ...); the sort is
/// stable, so tied names keep their input order.
pub fn rank_weights(w: &WeightVector) -> WeightReport {
    let mut pairs: Vec<(&str, f64)> = w.iter().collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut entries: Vec<RankedWeight> = Vec::with_capacity(pairs.len());
    for (i, (name, weight)) in pairs.into_iter().enumerate() {
        let rank = match entries.last() {
            Some(prev) if (prev.weight - weight).abs() <= TIE_TOLERANCE => prev.rank,
            _ => i + 1,
        };
        entries.push(RankedWeight {
            name: name.to_string(),
            weight,
            rank,
        });
    }
    WeightReport { entries }
}

pub fn write_weights_file(path: impl AsRef<Path>, report: &WeightReport) -> Result<()> {
    let path = path.as_ref();
    let mut json = serde_json::to_string_pretty(&report.entries)?;
    json.push('\n');
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Reads a weights file back into a weight vector (entry order kept).
pub fn read_weights_file(path: impl AsRef<Path>) -> Result<WeightVector> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries: Vec<RankedWeight> = serde_json::from_str(&text)?;
    WeightReport { entries }.to_weights()
}
