//! Tactile sensing from tendon strain.
//!
//! The pipeline simulates palpation traces for textured plates and objects of
//! varying stiffness, turns each trace into features (Fourier magnitudes for
//! glides, hold-phase regression for taps), scores four classifiers under
//! repeated stratified k-fold cross-validation, and ranks features by their
//! average pairwise rank-sum p-value.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod learn;
pub mod plot;
pub mod simulator;
pub mod stats;

pub use dataset::{ClassLabel, ContactMode, Dataset, FeatureVector, Row, StrainTrace, Task};
pub use error::{Error, Result};
