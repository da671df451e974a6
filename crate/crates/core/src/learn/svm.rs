//! Soft-margin SVM trained by sequential minimal optimisation, combined
//! one-vs-one for multiclass problems.
//!
//! The dual solved per class pair is
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Each step picks the maximal violating pair (second-order choice of the
//! second index), solves the two-variable subproblem analytically and clips to
//! the box. The optimum is declared when the KKT gap drops below the tolerance.

use rayon::prelude::*;

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

pub const KKT_TOLERANCE: f64 = 1e-3;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `1 / (d * mean feature variance)` of each pair's training rows.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf(Gamma),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub kernel: Kernel,
    pub c: f64,
    pub tolerance: f64,
}

impl SvmParams {
    pub fn linear(c: f64) -> Self {
        Self {
            kernel: Kernel::Linear,
            c,
            tolerance: KKT_TOLERANCE,
        }
    }

    pub fn rbf(c: f64, gamma: Gamma) -> Self {
        Self {
            kernel: Kernel::Rbf(gamma),
            c,
            tolerance: KKT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ResolvedKernel {
    Linear,
    Rbf { gamma: f64 },
}

impl ResolvedKernel {
    fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            ResolvedKernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            ResolvedKernel::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * sq).exp()
            }
        }
    }
}

/// Binary machine separating `classes.0` (positive side) from `classes.1`.
#[derive(Debug, Clone)]
pub struct PairMachine {
    pub classes: (usize, usize),
    /// Indices into the model's stored training rows.
    pub support: Vec<usize>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub gamma: Option<f64>,
    pub iterations: usize,
    kernel: ResolvedKernel,
}

impl PairMachine {
    fn decision(&self, points: &[Vec<f64>], x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.dual_coef)
            .map(|(&i, &c)| c * self.kernel.eval(&points[i], x))
            .sum::<f64>()
            + self.bias
    }

    /// `sum_i alpha_i y_i`, zero at a feasible dual point.
    pub fn equality_residual(&self) -> f64 {
        self.dual_coef.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct SvmModel {
    pub params: SvmParams,
    classes: Vec<ClassLabel>,
    points: Vec<Vec<f64>>,
    pairs: Vec<PairMachine>,
}

struct DualSolution {
    alpha: Vec<f64>,
    bias: f64,
    iterations: usize,
}

/// SMO on a dense kernel matrix. `y` holds +1/-1.
fn solve_dual(k: &[Vec<f64>], y: &[f64], c: f64, tol: f64) -> DualSolution {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(10_000_000);
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    while iterations < max_iter {
        // i: maximal -y G over I_up (lowest index on ties)
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] > g_max {
                g_max = -y[t] * grad[t];
                i = t;
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            g_min = g_min.min(v);
            if i != usize::MAX && v < g_max {
                let b = g_max - v;
                let a = k[i][i] + k[t][t] - 2.0 * k[i][t];
                let score = -(b * b) / if a > 0.0 { a } else { TAU };
                if score < best {
                    best = score;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < tol {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (k[i][i] + k[j][j] + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (k[i][i] + k[j][j] - 2.0 * q(i, j) * y[i] * y[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    // bias: mean of y G over free vectors, else the midpoint of the feasible band
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if (at_upper && y[t] < 0.0) || (at_lower && y[t] > 0.0) {
            ub = ub.min(yg);
        } else if at_upper || at_lower {
            lb = lb.max(yg);
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };
    DualSolution {
        alpha,
        bias: -rho,
        iterations,
    }
}

fn auto_gamma(rows: &[&[f64]]) -> f64 {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mut var_sum = 0.0;
    for f in 0..d {
        let mean = rows.iter().map(|r| r[f]).sum::<f64>() / n;
        var_sum += rows.iter().map(|r| (r[f] - mean).powi(2)).sum::<f64>() / n;
    }
    let mean_var = var_sum / d as f64;
    if mean_var > 0.0 {
        1.0 / (d as f64 * mean_var)
    } else {
        1.0 / d as f64
    }
}

impl SvmModel {
    pub fn fit(train: &Dataset, params: SvmParams) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty);
        }
        if !(params.c.is_finite() && params.c > 0.0) {
            return Err(Error::ConfigInvalid(format!(
                "C must be positive, got {}",
                params.c
            )));
        }
        if let Kernel::Rbf(Gamma::Fixed(g)) = params.kernel {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::ConfigInvalid(format!(
                    "gamma must be positive, got {g}"
                )));
            }
        }
        if train
            .rows()
            .iter()
            .any(|r| r.values.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        let classes = train.labels_present();
        if classes.len() < 2 {
            return Err(Error::SingleClass);
        }
        let class_of: Vec<usize> = train
            .rows()
            .iter()
            .map(|r| classes.iter().position(|c| c == &r.label).expect("present"))
            .collect();
        let points: Vec<Vec<f64>> = train.rows().iter().map(|r| r.values.clone()).collect();

        let pair_list: Vec<(usize, usize)> = (0..classes.len())
            .flat_map(|a| (a + 1..classes.len()).map(move |b| (a, b)))
            .collect();
        let pairs = pair_list
            .par_iter()
            .map(|&(a, b)| {
                let members: Vec<usize> = (0..points.len())
                    .filter(|&i| class_of[i] == a || class_of[i] == b)
                    .collect();
                let y: Vec<f64> = members
                    .iter()
                    .map(|&i| if class_of[i] == a { 1.0 } else { -1.0 })
                    .collect();
                let rows: Vec<&[f64]> = members.iter().map(|&i| points[i].as_slice()).collect();
                let (kernel, gamma) = match params.kernel {
                    Kernel::Linear => (ResolvedKernel::Linear, None),
                    Kernel::Rbf(Gamma::Fixed(g)) => (ResolvedKernel::Rbf { gamma: g }, Some(g)),
                    Kernel::Rbf(Gamma::Auto) => {
                        let g = auto_gamma(&rows);
                        (ResolvedKernel::Rbf { gamma: g }, Some(g))
                    }
                };
                let gram: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|ri| rows.iter().map(|rj| kernel.eval(ri, rj)).collect())
                    .collect();
                let sol = solve_dual(&gram, &y, params.c, params.tolerance);
                let (support, dual_coef) = sol
                    .alpha
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0.0)
                    .map(|(t, &a)| (members[t], a * y[t]))
                    .unzip();
                PairMachine {
                    classes: (a, b),
                    support,
                    dual_coef,
                    bias: sol.bias,
                    gamma,
                    iterations: sol.iterations,
                    kernel,
                }
            })
            .collect();
        Ok(Self {
            params,
            classes,
            points,
            pairs,
        })
    }

    pub fn classes(&self) -> &[ClassLabel] {
        &self.classes
    }

    pub fn pairs(&self) -> &[PairMachine] {
        &self.pairs
    }

    /// Decision values of every pair, positive favouring `classes.0`.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.points[0].len();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.len(),
            });
        }
        Ok(self
            .pairs
            .iter()
            .map(|p| p.decision(&self.points, x))
            .collect())
    }

    /// Weight vector of a linear pair machine.
    pub fn linear_weights(&self, pair: usize) -> Option<Vec<f64>> {
        let p = self.pairs.get(pair)?;
        if p.kernel != ResolvedKernel::Linear {
            return None;
        }
        let mut w = vec![0.0; self.points[0].len()];
        for (&i, &c) in p.support.iter().zip(&p.dual_coef) {
            for (wk, xk) in w.iter_mut().zip(&self.points[i]) {
                *wk += c * xk;
            }
        }
        Some(w)
    }

    /// One-vs-one vote. Ties go to the larger summed |decision| over the pairs
    /// each tied class won, then to the lower class ordinal.
    pub fn predict(&self, x: &[f64]) -> Result<ClassLabel> {
        let values = self.decision_values(x)?;
        let k = self.classes.len();
        let mut votes = vec![0usize; k];
        let mut strength = vec![0.0f64; k];
        for (p, &v) in self.pairs.iter().zip(&values) {
            let winner = if v > 0.0 { p.classes.0 } else { p.classes.1 };
            votes[winner] += 1;
            strength[winner] += v.abs();
        }
        let top = *votes.iter().max().expect("two or more classes");
        let mut best: Option<usize> = None;
        for c in (0..k).filter(|&c| votes[c] == top) {
            best = match best {
                None => Some(c),
                Some(b) if strength[c] > strength[b] => Some(c),
                Some(b) => Some(b),
            };
        }
        Ok(self.classes[best.expect("non-empty")].clone())
    }
}
