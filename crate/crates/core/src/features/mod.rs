//! Feature extraction: Fourier magnitudes for texture glides, hold-phase
//! regression for stiffness taps.

mod spectrum;
mod stiffness;

pub use spectrum::{
    dft, dft_magnitudes, frequency_feature_name, texture_features, texture_features_with,
    window_trace, zero_mean, Spectrum, Window, DEFAULT_LEAD_CROP_S, DEFAULT_WINDOW_LEN,
};
pub use stiffness::{
    hold_regression, linear_fit, segment_phases, stiffness_features, stiffness_features_with,
    PhaseConfig, PhaseSegmentation, RegressionResult, MIN_STATIC_SPAN, STIFFNESS_FEATURE_NAMES,
};

use rayon::prelude::*;

use crate::dataset::{Dataset, FeatureVector, StrainTrace, Task};
use crate::error::{Error, Result};

/// Task-appropriate features for one trace.
pub fn extract(trace: &StrainTrace) -> Result<FeatureVector> {
    match trace.kind {
        Task::Texture => texture_features(trace),
        Task::Stiffness => stiffness_features(trace),
    }
}

/// Extracts every trace into a dataset, preserving order. All traces must
/// share task and contact mode.
pub fn extract_dataset(traces: &[StrainTrace]) -> Result<Dataset> {
    let first = traces.first().ok_or(Error::Empty)?;
    if let Some(bad) = traces
        .iter()
        .find(|t| t.kind != first.kind || t.mode != first.mode)
    {
        return Err(Error::InvalidTrace(format!(
            "trace `{}` is {}/{} but the corpus is {}/{}",
            bad.trial_id, bad.kind, bad.mode, first.kind, first.mode
        )));
    }
    let rows = traces
        .par_iter()
        .map(|t| extract(t).map(|f| (f, t.label.clone())))
        .collect::<Result<Vec<_>>>()?;
    Dataset::build(rows, first.kind, first.mode)
}
