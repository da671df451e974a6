//! Domain types shared across the pipeline: class labels, strain traces,
//! feature vectors and labelled datasets.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TEXTURE_LABELS: [&str; 8] = ["F", "R1", "R2", "R3", "T1", "T2", "C1", "C2"];
const STIFFNESS_LABELS: [&str; 5] = ["PLA", "RUBBER_SOLID", "RUBBER_SHELL", "SPONGE", "NONE"];

/// Which discrimination task a trace or dataset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Texture,
    Stiffness,
}

impl Task {
    pub fn label_names(self) -> &'static [&'static str] {
        match self {
            Task::Texture => &TEXTURE_LABELS,
            Task::Stiffness => &STIFFNESS_LABELS,
        }
    }

    /// All labels of the task in ordinal order.
    pub fn labels(self) -> Vec<ClassLabel> {
        self.label_names()
            .iter()
            .enumerate()
            .map(|(i, n)| ClassLabel::new(*n, i))
            .collect()
    }

    pub fn label(self, name: &str) -> Result<ClassLabel> {
        self.label_names()
            .iter()
            .position(|n| *n == name)
            .map(|i| ClassLabel::new(name, i))
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Texture => "texture",
            Task::Stiffness => "stiffness",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "texture" => Ok(Task::Texture),
            "stiffness" => Ok(Task::Stiffness),
            other => Err(Error::ConfigInvalid(format!("unknown task `{other}`"))),
        }
    }
}

/// Flexion contact (FC) or abduction contact (AC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContactMode {
    #[serde(rename = "FC")]
    Flexion,
    #[serde(rename = "AC")]
    Abduction,
}

impl ContactMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ContactMode::Flexion => "FC",
            ContactMode::Abduction => "AC",
        }
    }
}

impl fmt::Display for ContactMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContactMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "FC" => Ok(ContactMode::Flexion),
            "AC" => Ok(ContactMode::Abduction),
            other => Err(Error::ConfigInvalid(format!(
                "unknown contact mode `{other}`"
            ))),
        }
    }
}

/// A class name plus its ordinal within the task.
///
/// Equality and hashing use the name only; the ordinal is a convenience for
/// ordering classes and breaking ties.
#[derive(Debug, Clone, Eq)]
pub struct ClassLabel {
    name: String,
    ordinal: usize,
}

impl ClassLabel {
    pub fn new(name: impl Into<String>, ordinal: usize) -> Self {
        Self {
            name: name.into(),
            ordinal,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ordinal(&self) -> usize {
        self.ordinal
    }
}

impl PartialEq for ClassLabel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Hash for ClassLabel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// One uniformly sampled tendon-strain recording (newtons).
#[derive(Debug, Clone, PartialEq)]
pub struct StrainTrace {
    samples: Vec<f64>,
    sample_rate_hz: f64,
    pub kind: Task,
    pub mode: ContactMode,
    pub label: ClassLabel,
    pub trial_id: String,
    /// Generator seed; `None` for ingested recordings.
    pub seed: Option<u64>,
}

impl StrainTrace {
    pub fn new(
        samples: Vec<f64>,
        sample_rate_hz: f64,
        kind: Task,
        mode: ContactMode,
        label: ClassLabel,
        trial_id: impl Into<String>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidTrace(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidTrace("no samples".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            kind,
            mode,
            label,
            trial_id: trial_id.into(),
            seed,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

/// Ordered named features for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: names.len(),
                right: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { names, values })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_parts(self) -> (Vec<String>, Vec<f64>) {
        (self.names, self.values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<f64>,
    pub label: ClassLabel,
}

/// Feature matrix with labels. Row order is significant and preserved by every
/// operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    rows: Vec<Row>,
    pub task: Task,
    pub mode: ContactMode,
}

impl Dataset {
    /// Assembles a dataset; the first row fixes the feature name ordering.
    pub fn build(
        rows: Vec<(FeatureVector, ClassLabel)>,
        task: Task,
        mode: ContactMode,
    ) -> Result<Self> {
        let mut iter = rows.into_iter();
        let (first, first_label) = iter.next().ok_or(Error::Empty)?;
        let (feature_names, values) = first.into_parts();
        let mut out = vec![Row {
            values,
            label: first_label,
        }];
        for (i, (fv, label)) in iter.enumerate() {
            if fv.names() != feature_names.as_slice() {
                return Err(Error::InconsistentFeatures { row: i + 1 });
            }
            out.push(Row {
                values: fv.into_parts().1,
                label,
            });
        }
        Ok(Self {
            feature_names,
            rows: out,
            task,
            mode,
        })
    }

    /// Builds from raw rows sharing `feature_names`. Used when the vectors are
    /// already known to be consistent (e.g. after a transform).
    pub fn from_rows(
        feature_names: Vec<String>,
        rows: Vec<Row>,
        task: Task,
        mode: ContactMode,
    ) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.values.len() != feature_names.len() {
                return Err(Error::InconsistentFeatures { row: i });
            }
            if r.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self {
            feature_names,
            rows,
            task,
            mode,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct labels present, ordered by (ordinal, name).
    pub fn labels_present(&self) -> Vec<ClassLabel> {
        let mut seen: Vec<ClassLabel> = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.label) {
                seen.push(r.label.clone());
            }
        }
        seen.sort_by(|a, b| (a.ordinal, &a.name).cmp(&(b.ordinal, &b.name)));
        seen
    }

    pub fn count_of(&self, label: &ClassLabel) -> usize {
        self.rows.iter().filter(|r| &r.label == label).count()
    }

    /// Decomposes back into `(FeatureVector, ClassLabel)` pairs.
    pub fn to_feature_rows(&self) -> Vec<(FeatureVector, ClassLabel)> {
        self.rows
            .iter()
            .map(|r| {
                (
                    FeatureVector {
                        names: self.feature_names.clone(),
                        values: r.values.clone(),
                    },
                    r.label.clone(),
                )
            })
            .collect()
    }

    /// Partitions rows into (train, test); both keep relative order.
    pub fn split_by_indices(&self, test_idx: &BTreeSet<usize>) -> Result<(Dataset, Dataset)> {
        if let Some(&bad) = test_idx.iter().find(|&&i| i >= self.rows.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.rows.len(),
            });
        }
        let (test, train): (Vec<_>, Vec<_>) = self
            .rows
            .iter()
            .enumerate()
            .partition(|(i, _)| test_idx.contains(i));
        let strip = |v: Vec<(usize, &Row)>| v.into_iter().map(|(_, r)| r.clone()).collect();
        Ok((self.with_rows(strip(train)), self.with_rows(strip(test))))
    }

    /// Values of one feature over the rows carrying `label`, in row order.
    pub fn values_for(&self, feature_index: usize, label: &ClassLabel) -> Result<Vec<f64>> {
        if feature_index >= self.feature_names.len() {
            return Err(Error::IndexOutOfRange {
                index: feature_index,
                len: self.feature_names.len(),
            });
        }
        let values: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| &r.label == label)
            .map(|r| r.values[feature_index])
            .collect();
        if values.is_empty() {
            return Err(Error::UnknownLabel(label.name.clone()));
        }
        Ok(values)
    }

    pub(crate) fn with_rows(&self, rows: Vec<Row>) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows,
            task: self.task,
            mode: self.mode,
        }
    }
}
