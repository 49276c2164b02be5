use std::fs::File;
use std::path::Path;

use super::{CorrelationMatrix, ScoreMatrix};
use crate::error::{Error, Result};

impl ScoreMatrix {
    /// Columnar CSV: header `doc_id,<names...>`, one row per document, raw
    /// values in shortest round-trip form, missing cells empty.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = vec!["doc_id".to_string()];
        header.extend(self.names().iter().cloned());
        w.write_record(&header)?;
        for (row, id) in self.doc_ids().iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(
                self.raw_row(row)
                    .iter()
                    .map(|v| if v.is_nan() { String::new() } else { v.to_string() }),
            );
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<ScoreMatrix> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::Reader::from_reader(file);
        let header = r.headers()?.clone();
        if header.get(0) != Some("doc_id") {
            return Err(Error::invalid("score matrix header must start with `doc_id`"));
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut ids = Vec::new();
        let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            ids.push(rec.get(0).unwrap_or_default().to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|s| {
                    if s.is_empty() {
                        Ok(None)
                    } else {
                        s.parse::<f64>()
                            .map(Some)
                            .map_err(|e| Error::invalid(format!("bad cell `{s}`: {e}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(row);
        }
        let mut m = ScoreMatrix::new(names, ids)?;
        for (row, vals) in cells.into_iter().enumerate() {
            for (col, v) in vals.into_iter().enumerate() {
                if let Some(v) = v {
                    m.set(row, col, v)?;
                }
            }
        }
        Ok(m)
    }
}

impl CorrelationMatrix {
    /// CSV with a header row and a leading name column; undefined cells are `NaN`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = vec![String::new()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.dim() {
            let mut rec = vec![self.names[i].clone()];
            rec.extend((0..self.dim()).map(|j| {
                let v = self.get(i, j);
                if v.is_nan() { "NaN".to_string() } else { v.to_string() }
            }));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}
