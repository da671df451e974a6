//! Repeated stratified k-fold cross-validation.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, ContactMode, Dataset, Task};
use crate::error::{Error, Result};
use crate::features::extract_dataset;
use crate::learn::{Classifier, Learner, ModelSpec, StandardizedModel};
use crate::simulator::{generate_corpus, SimConfig};

pub const DEFAULT_FOLDS: usize = 6;
pub const DEFAULT_RUNS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    /// Sorted row indices of each fold.
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

/// Shuffles each class with the seeded generator and deals its rows
/// round-robin across the folds. Dealing continues where the previous class
/// stopped so fold sizes stay balanced.
pub fn make_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::ConfigInvalid(format!("k = {k} must be at least 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for label in ds.labels_present() {
        let mut members: Vec<usize> = ds
            .rows()
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label == label)
            .map(|(i, _)| i)
            .collect();
        if members.len() < k {
            return Err(Error::TooFewPerClass {
                label: label.name().to_string(),
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldPlan { k, folds, seed })
}

pub fn accuracy(predictions: &[ClassLabel], truths: &[ClassLabel]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::Empty);
    }
    let hits = predictions
        .iter()
        .zip(truths)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// `m[i][j]` counts rows of true class `labels[i]` predicted as `labels[j]`.
pub fn confusion(
    predictions: &[ClassLabel],
    truths: &[ClassLabel],
    labels: &[ClassLabel],
) -> Result<Vec<Vec<usize>>> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::Empty);
    }
    let pos = |l: &ClassLabel| {
        labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| Error::UnknownLabel(l.name().to_string()))
    };
    let mut m = vec![vec![0; labels.len()]; labels.len()];
    for (p, t) in predictions.iter().zip(truths) {
        m[pos(t)?][pos(p)?] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: String,
    pub k: usize,
    pub labels: Vec<String>,
    /// Mean fold accuracy of each run.
    pub run_accuracies: Vec<f64>,
    pub fold_accuracies: Vec<Vec<f64>>,
    pub mean_accuracy: f64,
    /// Summed over every validation prediction of every run.
    pub confusion: Vec<Vec<usize>>,
    pub seeds: Vec<u64>,
}

struct FoldOutcome {
    accuracy: f64,
    confusion: Vec<Vec<usize>>,
}

fn run_fold<L: Learner>(
    ds: &Dataset,
    learner: &L,
    fold: &[usize],
    labels: &[ClassLabel],
) -> Result<FoldOutcome> {
    let test_idx: BTreeSet<usize> = fold.iter().copied().collect();
    let (train, test) = ds.split_by_indices(&test_idx)?;
    let model = StandardizedModel::fit(learner, &train)?;
    let predictions = test
        .rows()
        .iter()
        .map(|r| model.predict(&r.values))
        .collect::<Result<Vec<_>>>()?;
    let truths: Vec<ClassLabel> = test.rows().iter().map(|r| r.label.clone()).collect();
    Ok(FoldOutcome {
        accuracy: accuracy(&predictions, &truths)?,
        confusion: confusion(&predictions, &truths, labels)?,
    })
}

/// `runs` repetitions of k-fold CV; run `r` uses fold seed `seed + r`.
/// Each fold standardises on its own training rows only.
pub fn cross_validate<L: Learner>(
    ds: &Dataset,
    learner: &L,
    k: usize,
    runs: usize,
    seed: u64,
) -> Result<CvReport> {
    if runs == 0 {
        return Err(Error::ConfigInvalid("runs must be at least 1".into()));
    }
    let labels = ds.labels_present();
    let seeds: Vec<u64> = (0..runs as u64).map(|r| seed.wrapping_add(r)).collect();
    let plans = seeds
        .iter()
        .map(|&s| make_folds(ds, k, s))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..runs)
        .flat_map(|r| (0..k).map(move |f| (r, f)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(r, f)| run_fold(ds, learner, &plans[r].folds[f], &labels))
        .collect::<Result<Vec<_>>>()?;

    let mut conf = vec![vec![0; labels.len()]; labels.len()];
    let mut fold_accuracies = vec![Vec::with_capacity(k); runs];
    for (&(r, _), out) in jobs.iter().zip(&outcomes) {
        fold_accuracies[r].push(out.accuracy);
        for (row, add) in conf.iter_mut().zip(&out.confusion) {
            for (c, a) in row.iter_mut().zip(add) {
                *c += a;
            }
        }
    }
    let run_accuracies: Vec<f64> = fold_accuracies
        .iter()
        .map(|f| f.iter().sum::<f64>() / f.len() as f64)
        .collect();
    let mean_accuracy = run_accuracies.iter().sum::<f64>() / runs as f64;
    Ok(CvReport {
        model: learner.name(),
        k,
        labels: labels.iter().map(|l| l.name().to_string()).collect(),
        run_accuracies,
        fold_accuracies,
        mean_accuracy,
        confusion: conf,
        seeds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub trials_per_class: usize,
    pub seed: u64,
    pub k: usize,
    pub runs: usize,
    pub models: Vec<ModelSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            trials_per_class: 60,
            seed: 7,
            k: DEFAULT_FOLDS,
            runs: DEFAULT_RUNS,
            models: ModelSpec::defaults(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub task: Task,
    pub mode: ContactMode,
    pub reports: Vec<CvReport>,
}

pub const GROUPS: [(Task, ContactMode); 4] = [
    (Task::Texture, ContactMode::Flexion),
    (Task::Texture, ContactMode::Abduction),
    (Task::Stiffness, ContactMode::Flexion),
    (Task::Stiffness, ContactMode::Abduction),
];

/// Simulate, extract and cross-validate one (task, mode) group.
pub fn run_group(cfg: &ExperimentConfig, task: Task, mode: ContactMode) -> Result<GroupReport> {
    let corpus = generate_corpus(task, mode, cfg.trials_per_class, &cfg.sim, cfg.seed)?;
    let ds = extract_dataset(&corpus)?;
    let reports = cfg
        .models
        .iter()
        .map(|m| cross_validate(&ds, m, cfg.k, cfg.runs, cfg.seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupReport {
        task,
        mode,
        reports,
    })
}

/// The full task x contact-mode x model accuracy grid.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<GroupReport>> {
    GROUPS
        .iter()
        .map(|&(task, mode)| run_group(cfg, task, mode))
        .collect()
}
