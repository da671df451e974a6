use crate::dataset::{Dataset, Row};
use crate::error::{Error, Result};

pub const STD_FLOOR: f64 = 1e-12;

/// Per-feature z-scoring fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations, floored at [`STD_FLOOR`].
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty);
        }
        let n = train.len() as f64;
        let d = train.n_features();
        let mut means = vec![0.0; d];
        for r in train.rows() {
            for (m, v) in means.iter_mut().zip(&r.values) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = vec![0.0; d];
        for r in train.rows() {
            for ((s, v), m) in stds.iter_mut().zip(&r.values).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        stds.iter_mut()
            .for_each(|s| *s = (*s / n).sqrt().max(STD_FLOOR));
        Ok(Self { means, stds })
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                actual: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| if *s <= STD_FLOOR { 0.0 } else { (v - m) / s })
            .collect())
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        let rows = ds
            .rows()
            .iter()
            .map(|r| {
                Ok(Row {
                    values: self.transform(&r.values)?,
                    label: r.label.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ds.with_rows(rows))
    }
}
