//! Principal-component view of the loss surface.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::gbrt::Regressor;
use crate::error::{Error, Result};
use crate::proxy::ExperimentRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapePoint {
    pub experiment_id: String,
    pub pc1: f64,
    pub pc2: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    /// Unit principal directions, one or two.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues of the weight covariance, largest first.
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    pub points: Vec<LandscapePoint>,
    /// `(pc1, pc2, predicted_loss)` over the grid, row-major in pc2.
    pub grid: Vec<(f64, f64, f64)>,
}

impl Landscape {
    pub fn is_one_dimensional(&self) -> bool {
        self.components.len() < 2
    }

    pub fn write_grid_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
        w.write_record(["pc1", "pc2", "loss"])?;
        for (a, b, l) in &self.grid {
            w.write_record([a.to_string(), b.to_string(), l.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_points_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn axis(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 || hi <= lo {
        return vec![(lo + hi) / 2.0];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Projects the successful records onto the top two principal directions
/// of their weights and evaluates `model` on a `grid`×`grid` lattice over
/// the projected range. Falls back to one direction when the weights span
/// only a line.
pub fn pca_landscape(records: &[ExperimentRecord], model: &dyn Regressor, grid: usize) -> Result<Landscape> {
    let names = model.names().to_vec();
    let m = names.len();
    let ok: Vec<&ExperimentRecord> = records.iter().filter(|r| r.is_ok()).collect();
    if ok.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 successful records, got {}", ok.len())));
    }
    if grid == 0 {
        return Err(Error::invalid("grid must be at least 1"));
    }
    let n = ok.len();
    let mut x = DMatrix::<f64>::zeros(n, m);
    for (i, r) in ok.iter().enumerate() {
        for (j, name) in names.iter().enumerate() {
            x[(i, j)] = r
                .weights
                .get(name)
                .ok_or_else(|| Error::invalid(format!("{} lacks weight `{name}`", r.experiment_id)))?;
        }
    }
    let mean: Vec<f64> = (0..m).map(|j| x.column(j).mean()).collect();
    for (j, mu) in mean.iter().enumerate() {
        x.column_mut(j).add_scalar_mut(-mu);
    }
    let cov = (x.transpose() * &x) / (n - 1) as f64;
    let eigen = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));
    let explained_variance: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i].max(0.0)).collect();
    let total: f64 = explained_variance.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("experiment weights have no spread"));
    }
    let explained_ratio: Vec<f64> = explained_variance.iter().map(|v| v / total).collect();
    let rank = explained_variance.iter().filter(|&&v| v > total * 1e-12).count();
    let dims = rank.min(2);
    if dims < 2 {
        log::warn!("experiment weights span a single direction; landscape is one-dimensional");
    }

    let components: Vec<Vec<f64>> = order[..dims]
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eigen.eigenvectors.column(i).iter().copied().collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.iter_mut().for_each(|a| *a /= norm);
            // Sign convention: the largest-magnitude coordinate is positive.
            let pivot = v
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
                .map(|(k, _)| k)
                .unwrap_or(0);
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|a| *a = -*a);
            }
            v
        })
        .collect();

    let project = |row: usize, c: &[f64]| -> f64 { (0..m).map(|j| x[(row, j)] * c[j]).sum() };
    let points: Vec<LandscapePoint> = ok
        .iter()
        .enumerate()
        .map(|(i, r)| LandscapePoint {
            experiment_id: r.experiment_id.clone(),
            pc1: project(i, &components[0]),
            pc2: components.get(1).map_or(0.0, |c| project(i, c)),
            loss: r.loss.expect("ok record"),
        })
        .collect();

    let range = |f: fn(&LandscapePoint) -> f64| {
        points
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    };
    let (lo1, hi1) = range(|p| p.pc1);
    let (lo2, hi2) = range(|p| p.pc2);
    let axis1 = axis(lo1, hi1, grid);
    let axis2 = if dims == 2 { axis(lo2, hi2, grid) } else { vec![0.0] };
    let mut lattice = Vec::with_capacity(axis1.len() * axis2.len());
    let mut point = vec![0.0; m];
    for &b in &axis2 {
        for &a in &axis1 {
            for j in 0..m {
                point[j] = mean[j] + a * components[0][j] + components.get(1).map_or(0.0, |c| b * c[j]);
            }
            lattice.push((a, b, model.predict(&point)));
        }
    }

    Ok(Landscape {
        names,
        mean,
        components,
        explained_variance,
        explained_ratio,
        points,
        grid: lattice,
    })
}
