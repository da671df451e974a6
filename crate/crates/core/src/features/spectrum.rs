//! Windowing, zero-mean normalisation and DFT magnitude features.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dataset::{FeatureVector, StrainTrace};
use crate::error::{Error, Result};

pub const DEFAULT_LEAD_CROP_S: f64 = 0.5;
pub const DEFAULT_WINDOW_LEN: usize = 180;

/// A contiguous slice of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub start_index: usize,
    pub samples: Vec<f64>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Drops `ceil(lead_crop_s * fs)` samples and keeps the next `length`.
pub fn window_trace(trace: &StrainTrace, lead_crop_s: f64, length: usize) -> Result<Window> {
    if !(lead_crop_s.is_finite() && lead_crop_s >= 0.0) {
        return Err(Error::ConfigInvalid(format!("lead crop {lead_crop_s} s")));
    }
    if length == 0 {
        return Err(Error::ConfigInvalid(
            "window length must be positive".into(),
        ));
    }
    // small slack keeps e.g. 0.5 * 60 from ceiling to 31 on rounding noise
    let start = (lead_crop_s * trace.sample_rate_hz() - 1e-9)
        .ceil()
        .max(0.0) as usize;
    let required = start + length;
    if trace.len() < required {
        return Err(Error::TooShort {
            required,
            actual: trace.len(),
        });
    }
    Ok(Window {
        start_index: start,
        samples: trace.samples()[start..required].to_vec(),
    })
}

pub fn zero_mean(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(samples.iter().map(|s| s - mean).collect())
}

/// Full two-sided DFT, `X_k = sum_n x_n exp(-2 pi i k n / N)`.
///
/// Mixed-radix decimation in time; prime lengths fall back to direct
/// summation against the shared twiddle table.
pub fn dft(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let twiddles: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
        .collect();
    let input: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    transform(&input, &twiddles, 1)
}

fn smallest_factor(n: usize) -> usize {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut f = 3;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return f;
        }
        f += 2;
    }
    n
}

/// `twiddles` belongs to the top-level length; `stride` maps this level onto it.
fn transform(x: &[Complex64], twiddles: &[Complex64], stride: usize) -> Vec<Complex64> {
    let n = x.len();
    if n == 1 {
        return x.to_vec();
    }
    let w = |j: usize| twiddles[(j % n) * stride];
    let p = smallest_factor(n);
    if p == n {
        return (0..n)
            .map(|k| x.iter().enumerate().map(|(j, &v)| v * w(j * k)).sum())
            .collect();
    }
    let m = n / p;
    let subs: Vec<Vec<Complex64>> = (0..p)
        .map(|r| {
            let part: Vec<Complex64> = x.iter().skip(r).step_by(p).copied().collect();
            transform(&part, twiddles, stride * p)
        })
        .collect();
    (0..n)
        .map(|k| {
            subs.iter()
                .enumerate()
                .map(|(r, sub)| sub[k % m] * w(r * k))
                .sum()
        })
        .collect()
}

/// One-sided magnitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub mags: Vec<f64>,
}

/// Unnormalised `|X_k|` for `k = 0..=N/2` at frequencies `k * fs / N`.
pub fn dft_magnitudes(samples: &[f64], fs: f64) -> Result<Spectrum> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooShort {
            required: 2,
            actual: n,
        });
    }
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::ConfigInvalid(format!("sample rate {fs}")));
    }
    let spectrum = dft(samples);
    let bins = n / 2 + 1;
    Ok(Spectrum {
        freqs: (0..bins).map(|k| k as f64 * fs / n as f64).collect(),
        mags: spectrum[..bins].iter().map(|c| c.norm()).collect(),
    })
}

pub fn frequency_feature_name(freq_hz: f64) -> String {
    format!("freq_{freq_hz:.2}")
}

/// Window, zero-mean and take DFT magnitudes with explicit window settings.
pub fn texture_features_with(
    trace: &StrainTrace,
    lead_crop_s: f64,
    length: usize,
) -> Result<FeatureVector> {
    let window = window_trace(trace, lead_crop_s, length)?;
    let centered = zero_mean(&window.samples)?;
    let spec = dft_magnitudes(&centered, trace.sample_rate_hz())?;
    // Anything below the rounding bound of mean removal plus transform is
    // indistinguishable from zero. This keeps the DC bin of a zero-meaned
    // window at exactly 0 rather than a few ulps that ranks would pick up.
    let raw_l1: f64 = window.samples.iter().map(|v| v.abs()).sum();
    let floor = window.samples.len() as f64 * f64::EPSILON * raw_l1;
    let mags = spec
        .mags
        .into_iter()
        .map(|m| if m <= floor { 0.0 } else { m })
        .collect();
    let names = spec
        .freqs
        .iter()
        .map(|&f| frequency_feature_name(f))
        .collect();
    FeatureVector::new(names, mags)
}

/// 91 Fourier magnitudes (0 to 30 Hz in 1/3 Hz steps at 60 Hz sampling).
pub fn texture_features(trace: &StrainTrace) -> Result<FeatureVector> {
    texture_features_with(trace, DEFAULT_LEAD_CROP_S, DEFAULT_WINDOW_LEN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ContactMode, Task};

    fn trace(samples: Vec<f64>) -> StrainTrace {
        StrainTrace::new(
            samples,
            60.0,
            Task::Texture,
            ContactMode::Flexion,
            Task::Texture.label("F").unwrap(),
            "t",
            None,
        )
        .unwrap()
    }

    fn naive(x: &[f64]) -> Vec<Complex64> {
        let n = x.len() as f64;
        (0..x.len())
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let a = -2.0 * PI * (k as f64) * (j as f64) / n;
                        Complex64::new(v * a.cos(), v * a.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn window_examples() {
        let t = trace((0..300).map(|i| i as f64).collect());
        let w = window_trace(&t, 0.5, 180).unwrap();
        assert_eq!(w.start_index, 30);
        assert_eq!(w.samples, (30..210).map(|i| i as f64).collect::<Vec<_>>());

        let short = trace(vec![0.0; 200]);
        assert_eq!(
            window_trace(&short, 0.5, 180),
            Err(Error::TooShort {
                required: 210,
                actual: 200
            })
        );

        let w = window_trace(&t, 0.0, 300).unwrap();
        assert_eq!(w.samples, t.samples());
    }

    #[test]
    fn zero_mean_examples() {
        assert_eq!(zero_mean(&[1.0, 2.0, 3.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(zero_mean(&[5.0; 4]).unwrap(), vec![0.0; 4]);
        assert_eq!(zero_mean(&[]), Err(Error::Empty));
    }

    #[test]
    fn constant_signal_is_dc_only() {
        let s = dft_magnitudes(&[1.0; 180], 60.0).unwrap();
        assert_eq!(s.mags.len(), 91);
        assert!((s.mags[0] - 180.0).abs() < 1e-9);
        assert!(s.mags[1..].iter().all(|&m| m <= 1e-9));
        assert_eq!(s.freqs[90], 30.0);
        assert!((s.freqs[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_lands_in_its_bin() {
        let x: Vec<f64> = (0..180)
            .map(|n| (2.0 * PI * 10.0 * n as f64 / 60.0).cos())
            .collect();
        let s = dft_magnitudes(&x, 60.0).unwrap();
        assert!((s.mags[30] - 90.0).abs() < 1e-6);
        for (k, &m) in s.mags.iter().enumerate() {
            if k != 30 {
                assert!(m <= 1e-6, "bin {k}: {m}");
            }
        }
    }

    #[test]
    fn matches_naive_for_awkward_lengths() {
        for n in [2usize, 3, 7, 12, 97, 180, 251, 256] {
            let x: Vec<f64> = (0..n)
                .map(|i| ((i * 7919) % 101) as f64 / 13.0 - 3.0)
                .collect();
            let fast = dft(&x);
            let slow = naive(&x);
            let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() <= 1e-9 * scale, "n={n}");
            }
        }
    }

    #[test]
    fn short_or_empty_inputs() {
        assert!(matches!(
            dft_magnitudes(&[1.0], 60.0),
            Err(Error::TooShort { .. })
        ));
        assert!(dft(&[]).is_empty());
    }

    #[test]
    fn feature_names_follow_bins() {
        let f = texture_features(&trace(vec![3.0; 240])).unwrap();
        assert_eq!(f.len(), 91);
        assert_eq!(f.names()[0], "freq_0.00");
        assert_eq!(f.names()[1], "freq_0.33");
        assert_eq!(f.names()[90], "freq_30.00");
        assert!(f.values().iter().all(|&v| v <= 1e-9));
    }

    #[test]
    fn dc_feature_is_exactly_zero() {
        // 0.1 and friends do not sum to a clean mean in binary
        let samples: Vec<f64> = (0..240)
            .map(|i| 12.0 + 0.1 * ((i * 7919) % 13) as f64)
            .collect();
        let f = texture_features(&trace(samples)).unwrap();
        assert_eq!(f.values()[0], 0.0);
        assert!(f.values()[1..].iter().any(|&v| v > 1.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn parseval(x in prop::collection::vec(-100.0f64..100.0, 2..200)) {
                let spec = dft(&x);
                let energy: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
                let direct = x.len() as f64 * x.iter().map(|v| v * v).sum::<f64>();
                prop_assert!((energy - direct).abs() <= 1e-9 * direct.max(1e-300));
            }

            #[test]
            fn offset_leaves_features_unchanged(
                x in prop::collection::vec(-5.0f64..5.0, 240),
                c in -50.0f64..50.0,
            ) {
                let a = texture_features(&trace(x.clone())).unwrap();
                let b = texture_features(&trace(x.iter().map(|v| v + c).collect())).unwrap();
                let scale: f64 = x.iter().map(|v| v.abs()).sum::<f64>() + 180.0 * c.abs();
                for (p, q) in a.values().iter().zip(b.values()) {
                    prop_assert!((p - q).abs() <= 1e-10 * scale);
                }
            }

            #[test]
            fn scaling_scales_features(
                x in prop::collection::vec(-5.0f64..5.0, 240),
                c in 0.0f64..20.0,
            ) {
                let a = texture_features(&trace(x.clone())).unwrap();
                let b = texture_features(&trace(x.iter().map(|v| v * c).collect())).unwrap();
                let top = a.values().iter().fold(0.0f64, |m, v| m.max(*v));
                for (p, q) in a.values().iter().zip(b.values()) {
                    prop_assert!((c * p - q).abs() <= 1e-9 * (c * top).max(1e-300));
                }
            }
        }
    }
}
