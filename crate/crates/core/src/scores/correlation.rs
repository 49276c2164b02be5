use super::normalize::average_ranks;
use super::ScoreMatrix;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Symmetric `m × m` rank correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    values: Vec<f64>,
    /// Off-diagonal cells involving a constant column; stored as NaN.
    pub undefined: Vec<(usize, usize)>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.names.len() + j]
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn is_defined(&self, i: usize, j: usize) -> bool {
        !self.get(i, j).is_nan()
    }
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman correlation of every pair of raw score columns: Pearson
/// correlation of average-tie ranks.
pub fn spearman_matrix(matrix: &ScoreMatrix, exec: Execution) -> Result<CorrelationMatrix> {
    if matrix.rows() < 2 {
        return Err(Error::invalid("correlation needs at least two documents"));
    }
    if !matrix.is_complete() {
        return Err(Error::invalid("matrix has missing cells"));
    }
    let m = matrix.cols();
    let cols: Vec<usize> = (0..m).collect();
    let ranks = exec.map(&cols, |&c| average_ranks(&matrix.raw_column(c)));
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let rhos = exec.map(&pairs, |&(i, j)| pearson(&ranks[i], &ranks[j]));

    let mut values = vec![0.0; m * m];
    let mut undefined = Vec::new();
    for i in 0..m {
        values[i * m + i] = 1.0;
    }
    for (&(i, j), rho) in pairs.iter().zip(rhos) {
        let v = match rho {
            Some(v) => v,
            None => {
                undefined.push((i, j));
                f64::NAN
            }
        };
        values[i * m + j] = v;
        values[j * m + i] = v;
    }
    Ok(CorrelationMatrix {
        names: matrix.names().to_vec(),
        values,
        undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(columns: &[Vec<f64>]) -> ScoreMatrix {
        let n = columns[0].len();
        let mut m = ScoreMatrix::new(
            (0..columns.len()).map(|i| format!("s{i}")).collect(),
            (0..n).map(|i| format!("d{i}")).collect(),
        )
        .unwrap();
        for (c, col) in columns.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                m.set(r, c, *v).unwrap();
            }
        }
        m
    }

    #[test]
    fn self_and_reversed() {
        let x = vec![1.0, 4.0, 2.0, 8.0, 5.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let c = spearman_matrix(&matrix(&[x.clone(), x, neg]), Execution::Sequential).unwrap();
        assert_eq!(c.get(0, 1), 1.0);
        assert_eq!(c.get(0, 2), -1.0);
        assert_eq!(c.get(2, 2), 1.0);
    }

    #[test]
    fn constant_column_is_flagged() {
        let c = spearman_matrix(
            &matrix(&[vec![1.0, 2.0, 3.0], vec![7.0, 7.0, 7.0]]),
            Execution::Sequential,
        )
        .unwrap();
        assert!(!c.is_defined(0, 1));
        assert_eq!(c.undefined, vec![(0, 1)]);
        assert_eq!(c.get(1, 1), 1.0);
    }

    #[test]
    fn needs_two_rows() {
        assert!(spearman_matrix(&matrix(&[vec![1.0]]), Execution::Sequential).is_err());
    }
}
