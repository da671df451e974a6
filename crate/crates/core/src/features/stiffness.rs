//! Stiffness-tap segmentation and hold-phase regression features.

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureVector, StrainTrace};
use crate::error::{Error, Result};

pub const STIFFNESS_FEATURE_NAMES: [&str; 3] = ["slope", "intercept", "r"];

/// Minimum static-phase span, in samples, when contact is detected.
pub const MIN_STATIC_SPAN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseConfig {
    pub onset_threshold_n: f64,
    pub release_fraction: f64,
    pub guard_samples: usize,
    /// Length of the centred window used when no contact is detected.
    pub fallback_window_s: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            onset_threshold_n: 0.5,
            release_fraction: 0.5,
            guard_samples: 6,
            fallback_window_s: 4.0,
        }
    }
}

/// Sample indices of the three tap phases. `static_start..=static_end` is the
/// regression window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSegmentation {
    pub onset_index: usize,
    pub peak_index: usize,
    pub static_start: usize,
    pub static_end: usize,
    pub release_index: usize,
    pub contact_detected: bool,
}

impl PhaseSegmentation {
    pub fn static_len(&self) -> usize {
        self.static_end - self.static_start + 1
    }
}

pub fn segment_phases(trace: &StrainTrace, cfg: &PhaseConfig) -> Result<PhaseSegmentation> {
    let s = trace.samples();
    let Some(onset) = s.iter().position(|&v| v > cfg.onset_threshold_n) else {
        let want = (cfg.fallback_window_s * trace.sample_rate_hz()).round() as usize;
        let width = want.clamp(1, s.len());
        let start = (s.len() - width) / 2;
        let end = start + width - 1;
        return Ok(PhaseSegmentation {
            onset_index: start,
            peak_index: start,
            static_start: start,
            static_end: end,
            release_index: end,
            contact_detected: false,
        });
    };
    let mut peak = onset;
    for (i, &v) in s.iter().enumerate().skip(onset) {
        if v > s[peak] {
            peak = i;
        }
    }
    let level = cfg.release_fraction * s[peak];
    let release = s
        .iter()
        .enumerate()
        .skip(peak + 1)
        .find(|(_, &v)| v < level)
        .map(|(i, _)| i)
        .unwrap_or(s.len() - 1);
    let static_start = peak + cfg.guard_samples;
    let static_end = release.saturating_sub(cfg.guard_samples);
    if static_end < static_start + MIN_STATIC_SPAN {
        return Err(Error::StaticPhaseTooShort {
            span: static_end.saturating_sub(static_start),
        });
    }
    Ok(PhaseSegmentation {
        onset_index: onset,
        peak_index: peak,
        static_start,
        static_end,
        release_index: release,
        contact_detected: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation of `t` and `y`.
    pub r: f64,
}

/// Least-squares line `y = slope * t + intercept`.
pub fn linear_fit(t: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if t.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: t.len(),
            right: y.len(),
        });
    }
    let n = t.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::ConfigInvalid(
            "regression times must be strictly increasing".into(),
        ));
    }
    let nf = n as f64;
    let t_mean = t.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let dt = ti - t_mean;
        let dy = yi - y_mean;
        sxx += dt * dt;
        sxy += dt * dy;
        syy += dy * dy;
    }
    if syy / nf < 1e-15 {
        return Ok(RegressionResult {
            slope: 0.0,
            intercept: y[0],
            r: 0.0,
        });
    }
    let slope = sxy / sxx;
    Ok(RegressionResult {
        slope,
        intercept: y_mean - slope * t_mean,
        r: (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0),
    })
}

/// Regression of the static phase against time measured from its first sample.
pub fn hold_regression(trace: &StrainTrace, cfg: &PhaseConfig) -> Result<RegressionResult> {
    let seg = segment_phases(trace, cfg)?;
    let fs = trace.sample_rate_hz();
    let y = &trace.samples()[seg.static_start..=seg.static_end];
    let t: Vec<f64> = (0..y.len()).map(|i| i as f64 / fs).collect();
    linear_fit(&t, y)
}

pub fn stiffness_features_with(trace: &StrainTrace, cfg: &PhaseConfig) -> Result<FeatureVector> {
    let fit = hold_regression(trace, cfg)?;
    FeatureVector::new(
        STIFFNESS_FEATURE_NAMES
            .iter()
            .map(|s| s.to_string())
            .collect(),
        vec![fit.slope, fit.intercept, fit.r],
    )
}

/// `[slope, intercept, r]` of the hold phase.
pub fn stiffness_features(trace: &StrainTrace) -> Result<FeatureVector> {
    stiffness_features_with(trace, &PhaseConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ContactMode, Task};
    use crate::simulator::{
        simulate_stiffness_trial, stiffness_presets, SimConfig, StiffnessClass, TapLayout,
    };

    fn raw(samples: Vec<f64>) -> StrainTrace {
        StrainTrace::new(
            samples,
            60.0,
            Task::Stiffness,
            ContactMode::Flexion,
            Task::Stiffness.label("PLA").unwrap(),
            "s",
            None,
        )
        .unwrap()
    }

    fn quiet() -> SimConfig {
        SimConfig {
            noise_sigma_n: 0.0,
            ..SimConfig::default()
        }
    }

    fn preset(name: &str) -> (crate::dataset::ClassLabel, StiffnessClass) {
        stiffness_presets()
            .into_iter()
            .find(|(l, _)| l.name() == name)
            .unwrap()
    }

    #[test]
    fn exact_line() {
        let r = linear_fit(&[0.0, 1.0, 2.0], &[5.0, 3.0, 1.0]).unwrap();
        assert!((r.slope + 2.0).abs() < 1e-12);
        assert!((r.intercept - 5.0).abs() < 1e-12);
        assert!((r.r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_response() {
        let r = linear_fit(&[0.0, 1.0, 2.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!((r.slope, r.intercept, r.r), (0.0, 4.0, 0.0));
    }

    #[test]
    fn fit_errors() {
        assert_eq!(linear_fit(&[1.0], &[1.0]), Err(Error::TooFewPoints(1)));
        assert!(matches!(
            linear_fit(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            linear_fit(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::ConfigInvalid(_))
        ));
    }

    #[test]
    fn segmentation_matches_construction() {
        let (l, cls) = preset("RUBBER_SHELL");
        let cfg = quiet();
        let t = simulate_stiffness_trial(&cls, l, ContactMode::Flexion, &cfg, 1, "x").unwrap();
        let lay = TapLayout::new(&cls, &cfg);
        let seg = segment_phases(&t, &PhaseConfig::default()).unwrap();
        assert!(seg.contact_detected);
        // first rise sample above 0.5 N: peak * k / 30 > 0.5 at k = 2
        assert!(seg.onset_index.abs_diff(lay.rise_start) <= 1);
        assert_eq!(seg.peak_index, lay.peak);
        // half-level crossing during the release ramp
        let s = t.samples();
        let crossing = (lay.hold_end..lay.len).find(|&n| s[n] < 5.0).unwrap();
        assert!(seg.release_index.abs_diff(crossing) <= 1);
        assert_eq!(seg.static_start, lay.peak + 6);
        assert_eq!(seg.static_end, seg.release_index - 6);
    }

    #[test]
    fn no_contact_uses_centred_window() {
        let t = raw(vec![0.0; 348]);
        let seg = segment_phases(&t, &PhaseConfig::default()).unwrap();
        assert!(!seg.contact_detected);
        assert_eq!(seg.static_len(), 240);
        assert_eq!(seg.static_start, 54);
    }

    #[test]
    fn never_released_runs_to_end() {
        let mut s = vec![0.0; 10];
        s.extend((1..=10).map(|i| i as f64));
        s.extend(std::iter::repeat_n(10.0, 40));
        let t = raw(s);
        let seg = segment_phases(&t, &PhaseConfig::default()).unwrap();
        assert_eq!(seg.release_index, t.len() - 1);
        assert_eq!(seg.peak_index, 19);
    }

    #[test]
    fn short_plateau_is_rejected() {
        let mut s = vec![0.0; 10];
        s.extend([5.0; 12]);
        s.extend([0.0; 10]);
        assert!(matches!(
            segment_phases(&raw(s), &PhaseConfig::default()),
            Err(Error::StaticPhaseTooShort { .. })
        ));
    }

    #[test]
    fn preset_features() {
        let cfg = quiet();
        let (l, none) = preset("NONE");
        let t = simulate_stiffness_trial(&none, l, ContactMode::Flexion, &cfg, 3, "n").unwrap();
        assert_eq!(stiffness_features(&t).unwrap().values(), &[0.0, 0.0, 0.0]);

        let (l, sponge) = preset("SPONGE");
        let t = simulate_stiffness_trial(&sponge, l, ContactMode::Flexion, &cfg, 3, "s").unwrap();
        let f = stiffness_features(&t).unwrap();
        assert!((f.values()[0] + 1.5).abs() < 1e-9);
        assert!((f.values()[2] + 1.0).abs() < 1e-9);
        assert_eq!(f.names(), &["slope", "intercept", "r"]);
    }

    #[test]
    fn features_are_deterministic() {
        let (l, cls) = preset("PLA");
        let cfg = SimConfig::default();
        let a =
            simulate_stiffness_trial(&cls, l.clone(), ContactMode::Flexion, &cfg, 42, "a").unwrap();
        let b = simulate_stiffness_trial(&cls, l, ContactMode::Flexion, &cfg, 42, "a").unwrap();
        assert_eq!(
            stiffness_features(&a).unwrap(),
            stiffness_features(&b).unwrap()
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn r_is_bounded(y in prop::collection::vec(-1e3f64..1e3, 2..60)) {
                let t: Vec<f64> = (0..y.len()).map(|i| i as f64 * 0.1).collect();
                let fit = linear_fit(&t, &y).unwrap();
                prop_assert!((-1.0..=1.0).contains(&fit.r));
            }

            #[test]
            fn exact_lines_have_unit_r(
                a in -50.0f64..50.0,
                b in prop::num::f64::NORMAL.prop_filter("nonzero", |b| b.abs() > 1e-3 && b.abs() < 1e3),
                n in 2usize..100,
            ) {
                let t: Vec<f64> = (0..n).map(|i| i as f64 / 60.0).collect();
                let y: Vec<f64> = t.iter().map(|x| a + b * x).collect();
                let fit = linear_fit(&t, &y).unwrap();
                prop_assert!((fit.r.abs() - 1.0).abs() <= 1e-9);
                prop_assert_eq!(fit.r.signum(), b.signum());
            }
        }
    }
}
