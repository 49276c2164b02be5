use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use super::ScoreMatrix;
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `(rank - 1) / (n - 1)` with average ranks for ties.
    #[default]
    Rank,
    /// Standard normal CDF of the column z-score.
    ZScore,
}

/// 1-based average ranks; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j share the mean rank
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

fn rank_column(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 1 {
        return vec![0.5];
    }
    let denom = (n - 1) as f64;
    average_ranks(values).into_iter().map(|r| (r - 1.0) / denom).collect()
}

fn zscore_column(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    values
        .iter()
        .map(|v| {
            if sd > 0.0 {
                0.5 * (1.0 + erf((v - mean) / sd / std::f64::consts::SQRT_2))
            } else {
                0.5
            }
        })
        .collect()
}

impl ScoreMatrix {
    /// Computes the normalized view in place, one column per task.
    pub fn normalize(&mut self, mode: Normalization, exec: Execution) -> Result<()> {
        if self.rows() == 0 {
            return Err(Error::invalid("cannot normalize an empty matrix"));
        }
        if !self.is_complete() {
            return Err(Error::invalid("matrix has missing cells; impute first"));
        }
        let cols: Vec<usize> = (0..self.cols()).collect();
        let columns = exec.map(&cols, |&c| {
            let raw = self.raw_column(c);
            match mode {
                Normalization::Rank => rank_column(&raw),
                Normalization::ZScore => zscore_column(&raw),
            }
        });
        let (n, m) = (self.rows(), self.cols());
        let mut out = vec![0.0; n * m];
        for (c, column) in columns.into_iter().enumerate() {
            for (r, v) in column.into_iter().enumerate() {
                out[r * m + c] = v;
            }
        }
        self.normalized = Some(out);
        Ok(())
    }

    /// A copy with the rank-normalized view populated.
    pub fn rank_normalize(&self) -> Result<ScoreMatrix> {
        let mut out = self.clone();
        out.normalize(Normalization::Rank, Execution::default())?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(columns: &[&[f64]]) -> ScoreMatrix {
        let n = columns[0].len();
        let names = (0..columns.len()).map(|i| format!("s{i}")).collect();
        let ids = (0..n).map(|i| format!("d{i}")).collect();
        let mut m = ScoreMatrix::new(names, ids).unwrap();
        for (c, col) in columns.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                m.set(r, c, *v).unwrap();
            }
        }
        m
    }

    #[test]
    fn rank_examples() {
        let m = matrix(&[&[10.0, 20.0, 30.0], &[5.0, 5.0, 9.0]]).rank_normalize().unwrap();
        assert_eq!(m.normalized_column(0).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(m.normalized_column(1).unwrap(), vec![0.25, 0.25, 1.0]);
    }

    #[test]
    fn single_row_maps_to_half() {
        let m = matrix(&[&[42.0]]).rank_normalize().unwrap();
        assert_eq!(m.normalized(0, 0), Some(0.5));
    }

    #[test]
    fn empty_and_incomplete_rejected() {
        let m = ScoreMatrix::new(vec!["a".into()], vec![]).unwrap();
        assert!(m.rank_normalize().is_err());
        let m = ScoreMatrix::new(vec!["a".into()], vec!["x".into()]).unwrap();
        assert!(m.rank_normalize().is_err());
    }

    #[test]
    fn monotone_transform_invariance() {
        let base = [3.0, -1.0, 7.5, 7.5, 0.0, 2.0];
        let exp: Vec<f64> = base.iter().map(|v: &f64| v.exp() * 3.0 + 1.0).collect();
        let a = matrix(&[&base]).rank_normalize().unwrap();
        let b = matrix(&[&exp]).rank_normalize().unwrap();
        assert_eq!(a.normalized_column(0), b.normalized_column(0));
    }

    #[test]
    fn zscore_mode_is_bounded_and_monotone() {
        let mut m = matrix(&[&[1.0, 2.0, 3.0, 10.0], &[4.0, 4.0, 4.0, 4.0]]);
        m.normalize(Normalization::ZScore, Execution::Sequential).unwrap();
        let c = m.normalized_column(0).unwrap();
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(c.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(m.normalized_column(1).unwrap(), vec![0.5; 4]);
    }
}
