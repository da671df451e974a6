use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 3;

/// Euclidean k-nearest-neighbour vote.
#[derive(Debug, Clone)]
pub struct KnnModel {
    points: Vec<Vec<f64>>,
    labels: Vec<ClassLabel>,
    k: usize,
}

impl KnnModel {
    pub fn fit(train: &Dataset, k: usize) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty);
        }
        if k == 0 || k > train.len() {
            return Err(Error::ConfigInvalid(format!(
                "k = {k} must lie in [1, {}]",
                train.len()
            )));
        }
        Ok(Self {
            points: train.rows().iter().map(|r| r.values.clone()).collect(),
            labels: train.rows().iter().map(|r| r.label.clone()).collect(),
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Majority label of the k nearest rows. Equal distances favour the lower
    /// training index; tied votes go to the class owning the nearest neighbour.
    pub fn predict(&self, x: &[f64]) -> Result<ClassLabel> {
        let d = self.points[0].len();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.len(),
            });
        }
        let mut dists: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let sq: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (sq, i)
            })
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let neighbours = &dists[..self.k];

        // (label, votes, rank of its nearest neighbour)
        let mut tally: Vec<(&ClassLabel, usize, usize)> = Vec::new();
        for (rank, &(_, i)) in neighbours.iter().enumerate() {
            let label = &self.labels[i];
            match tally.iter_mut().find(|(l, _, _)| *l == label) {
                Some(entry) => entry.1 += 1,
                None => tally.push((label, 1, rank)),
            }
        }
        let best = tally
            .iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
            .expect("k >= 1");
        Ok(best.0.clone())
    }
}
