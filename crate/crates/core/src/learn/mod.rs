//! Classifiers behind a shared fit/predict contract.

mod knn;
mod standardize;
mod svm;
mod tree;

pub use knn::{KnnModel, DEFAULT_K};
pub use standardize::{Standardizer, STD_FLOOR};
pub use svm::{Gamma, Kernel, PairMachine, SvmModel, SvmParams, KKT_TOLERANCE};
pub use tree::{gini, Node, TreeModel};

use std::fmt;
use std::str::FromStr;

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

/// A fitted model.
pub trait Classifier: Send + Sync {
    fn predict(&self, x: &[f64]) -> Result<ClassLabel>;
}

/// Something that can be fitted to a dataset.
pub trait Learner: Sync {
    type Model: Classifier;

    fn name(&self) -> String;
    fn fit(&self, train: &Dataset) -> Result<Self::Model>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Knn { k: usize },
    SvmLinear { c: f64 },
    SvmRbf { c: f64, gamma: Gamma },
    DecisionTree,
}

impl ModelSpec {
    /// The four default configurations, in report order.
    pub fn defaults() -> Vec<ModelSpec> {
        vec![
            ModelSpec::Knn { k: DEFAULT_K },
            ModelSpec::SvmLinear { c: 1.0 },
            ModelSpec::SvmRbf {
                c: 1.0,
                gamma: Gamma::Auto,
            },
            ModelSpec::DecisionTree,
        ]
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            ModelSpec::Knn { .. } => "knn",
            ModelSpec::SvmLinear { .. } => "svm-linear",
            ModelSpec::SvmRbf { .. } => "svm-rbf",
            ModelSpec::DecisionTree => "dtree",
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "knn" => Ok(ModelSpec::Knn { k: DEFAULT_K }),
            "svm-linear" => Ok(ModelSpec::SvmLinear { c: 1.0 }),
            "svm-rbf" => Ok(ModelSpec::SvmRbf {
                c: 1.0,
                gamma: Gamma::Auto,
            }),
            "dtree" => Ok(ModelSpec::DecisionTree),
            other => Err(Error::ConfigInvalid(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum TrainedModel {
    Knn(KnnModel),
    Svm(SvmModel),
    Tree(TreeModel),
}

impl Classifier for TrainedModel {
    fn predict(&self, x: &[f64]) -> Result<ClassLabel> {
        match self {
            TrainedModel::Knn(m) => m.predict(x),
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::Tree(m) => m.predict(x),
        }
    }
}

impl Learner for ModelSpec {
    type Model = TrainedModel;

    fn name(&self) -> String {
        self.short_name().to_string()
    }

    fn fit(&self, train: &Dataset) -> Result<TrainedModel> {
        Ok(match *self {
            ModelSpec::Knn { k } => TrainedModel::Knn(KnnModel::fit(train, k)?),
            ModelSpec::SvmLinear { c } => {
                TrainedModel::Svm(SvmModel::fit(train, SvmParams::linear(c))?)
            }
            ModelSpec::SvmRbf { c, gamma } => {
                TrainedModel::Svm(SvmModel::fit(train, SvmParams::rbf(c, gamma))?)
            }
            ModelSpec::DecisionTree => TrainedModel::Tree(TreeModel::fit(train)?),
        })
    }
}

/// A model trained on z-scored features together with its scaler.
#[derive(Debug, Clone)]
pub struct StandardizedModel<M> {
    pub scaler: Standardizer,
    pub model: M,
}

impl<M: Classifier> StandardizedModel<M> {
    pub fn fit<L: Learner<Model = M>>(learner: &L, train: &Dataset) -> Result<Self> {
        let scaler = Standardizer::fit(train)?;
        let model = learner.fit(&scaler.apply(train)?)?;
        Ok(Self { scaler, model })
    }
}

impl<M: Classifier> Classifier for StandardizedModel<M> {
    fn predict(&self, x: &[f64]) -> Result<ClassLabel> {
        self.model.predict(&self.scaler.transform(x)?)
    }
}
