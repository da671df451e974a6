//! Wilcoxon rank-sum (Mann-Whitney U) testing and per-feature significance.

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

/// Largest combined sample size handled by exact enumeration.
pub const EXACT_MAX_TOTAL: usize = 20;

/// Average ranks (1-based) of the pooled sample, plus `sum(t^3 - t)` over tie groups.
fn pooled_ranks(a: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let mut pooled: Vec<(f64, usize)> = a.iter().chain(b).copied().zip(0..).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for p in &pooled[i..j] {
            ranks[p.1] = avg;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Mann-Whitney U of the first sample.
pub fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (ranks, _) = pooled_ranks(a, b);
    let na = a.len() as f64;
    ranks[..a.len()].iter().sum::<f64>() - na * (na + 1.0) / 2.0
}

/// Number of size-`na` subsets of ranks `1..=na+nb` for each U value.
fn u_counts(na: usize, nb: usize) -> Vec<f64> {
    // ways[j][u]: choose j of the ranks seen so far with U = u
    let max_u = na * nb;
    let mut ways = vec![vec![0.0f64; max_u + 1]; na + 1];
    ways[0][0] = 1.0;
    for rank in 1..=na + nb {
        for j in (1..=na.min(rank)).rev() {
            // placing this rank in sample a adds (rank - j) to U
            let shift = rank - j;
            if shift > nb {
                continue;
            }
            for u in (shift..=max_u).rev() {
                let add = ways[j - 1][u - shift];
                ways[j][u] += add;
            }
        }
    }
    ways.swap_remove(na)
}

/// Two-sided exact p-value from the null distribution of U. Requires no ties.
pub fn rank_sum_exact(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty);
    }
    let u = u_statistic(a, b).round() as usize;
    let counts = u_counts(a.len(), b.len());
    let total: f64 = counts.iter().sum();
    let lower: f64 = counts[..=u].iter().sum();
    let upper: f64 = counts[u..].iter().sum();
    Ok((2.0 * lower.min(upper) / total).min(1.0))
}

/// Two-sided normal approximation with tie-corrected variance and a 0.5
/// continuity correction.
pub fn rank_sum_normal(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty);
    }
    let (ranks, tie_term) = pooled_ranks(a, b);
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let n = na + nb;
    let u = ranks[..a.len()].iter().sum::<f64>() - na * (na + 1.0) / 2.0;
    let mean = na * nb / 2.0;
    let tie_adjust = if n > 1.0 {
        tie_term / (n * (n - 1.0))
    } else {
        0.0
    };
    let var = na * nb / 12.0 * ((n + 1.0) - tie_adjust);
    if var <= 0.0 {
        return Ok(1.0);
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    Ok(erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
}

/// Two-sided rank-sum p-value. Exact for small tie-free samples, normal
/// approximation otherwise; identical pooled values give 1.
pub fn rank_sum_p(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let first = a[0];
    if a.iter().chain(b).all(|&v| v == first) {
        return Ok(1.0);
    }
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let tied = pooled.windows(2).any(|w| w[0] == w[1]);
    if pooled.len() <= EXACT_MAX_TOTAL && !tied {
        rank_sum_exact(a, b)
    } else {
        rank_sum_normal(a, b)
    }
}

/// Symmetric class-by-class p-values for one feature, unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueMatrix {
    pub feature_index: usize,
    pub labels: Vec<ClassLabel>,
    pub p: Vec<Vec<f64>>,
}

impl PValueMatrix {
    /// Mean over the distinct off-diagonal pairs.
    pub fn off_diagonal_mean(&self) -> f64 {
        let k = self.labels.len();
        let mut sum = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                sum += self.p[i][j];
            }
        }
        sum / (k * (k - 1) / 2) as f64
    }
}

pub fn pvalue_matrix(ds: &Dataset, feature_index: usize) -> Result<PValueMatrix> {
    let labels = ds.labels_present();
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }
    let values = labels
        .iter()
        .map(|l| ds.values_for(feature_index, l))
        .collect::<Result<Vec<_>>>()?;
    let k = labels.len();
    let mut p = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let v = rank_sum_p(&values[i], &values[j])?;
            p[i][j] = v;
            p[j][i] = v;
        }
    }
    Ok(PValueMatrix {
        feature_index,
        labels,
        p,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceProfile {
    pub feature_names: Vec<String>,
    pub average_p: Vec<f64>,
    pub matrices: Vec<PValueMatrix>,
}

/// Average pairwise p-value of every feature.
pub fn significance_profile(ds: &Dataset) -> Result<SignificanceProfile> {
    let matrices = (0..ds.n_features())
        .into_par_iter()
        .map(|f| pvalue_matrix(ds, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(SignificanceProfile {
        feature_names: ds.feature_names().to_vec(),
        average_p: matrices
            .iter()
            .map(PValueMatrix::off_diagonal_mean)
            .collect(),
        matrices,
    })
}
