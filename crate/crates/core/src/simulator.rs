//! Synthetic tendon-strain traces for texture glides and stiffness taps.
//!
//! Texture glides model strain as a baseline preload plus a gain times the
//! fingertip drop into the plate grooves. The drop is the plate height profile
//! smoothed by a Gaussian contact kernel. Stiffness taps are trapezoids: a
//! linear rise, a linearly drifting hold and a linear release.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{ClassLabel, ContactMode, StrainTrace, Task};
use crate::error::{Error, Result};

/// Abduction contacts load the tendon at roughly a quarter of the flexion range.
pub const ABDUCTION_SCALE: f64 = 0.25;

/// Zero-strain padding before and after a stiffness tap.
pub const TAP_PADDING_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Flat,
    Rectangular,
    Triangular,
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TexturePlate {
    pub profile: Profile,
    pub period_mm: f64,
    pub depth_mm: f64,
    /// Groove fraction of the period; only rectangular plates use it.
    pub duty: f64,
    pub length_mm: f64,
}

impl TexturePlate {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.to_string()));
        if !(self.length_mm.is_finite() && self.length_mm > 0.0) {
            return bad("plate length must be positive");
        }
        if !(self.depth_mm.is_finite() && self.depth_mm >= 0.0) {
            return bad("groove depth must be non-negative");
        }
        match self.profile {
            Profile::Flat => {
                if self.depth_mm != 0.0 {
                    return bad("flat plate must have zero depth");
                }
            }
            _ => {
                if !(self.period_mm.is_finite() && self.period_mm > 0.0) {
                    return bad("groove period must be positive");
                }
            }
        }
        if self.profile == Profile::Rectangular && !(self.duty > 0.0 && self.duty < 1.0) {
            return bad("rectangular duty must lie in (0, 1)");
        }
        Ok(())
    }

    /// Groove depth below the plate surface at `x_mm`, in `[0, depth_mm]`.
    pub fn height_profile(&self, x_mm: f64) -> Result<f64> {
        if !(0.0..=self.length_mm).contains(&x_mm) {
            return Err(Error::OutOfPlate {
                x_mm,
                length_mm: self.length_mm,
            });
        }
        Ok(self.depth_mm * self.unit_profile(x_mm))
    }

    fn unit_profile(&self, x_mm: f64) -> f64 {
        if self.profile == Profile::Flat {
            return 0.0;
        }
        let u = x_mm.rem_euclid(self.period_mm);
        // triangular grooves occupy the first half of each period
        let half = self.period_mm / 2.0;
        match self.profile {
            Profile::Flat => 0.0,
            Profile::Rectangular => {
                if u < self.duty * self.period_mm {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Triangular => {
                if u < half {
                    1.0 - (u - half / 2.0).abs() / (half / 2.0)
                } else {
                    0.0
                }
            }
            Profile::Circular => {
                // circular arc spanning the whole period with unit sagitta,
                // i.e. a cylinder pressed in until its chord equals the period
                let r = (self.period_mm * self.period_mm / 4.0 + 1.0) / 2.0;
                let c = u - half;
                ((r * r - c * c).max(0.0).sqrt() - (r - 1.0)).clamp(0.0, 1.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessClass {
    pub peak_strain_n: f64,
    /// Drift during the hold, N/s; never positive.
    pub hold_slope_n_per_s: f64,
    pub rise_s: f64,
    pub release_s: f64,
}

impl StiffnessClass {
    pub fn validate(&self) -> Result<()> {
        let ok = self.peak_strain_n.is_finite()
            && self.peak_strain_n >= 0.0
            && self.hold_slope_n_per_s.is_finite()
            && self.hold_slope_n_per_s <= 0.0
            && self.rise_s.is_finite()
            && self.rise_s > 0.0
            && self.release_s.is_finite()
            && self.release_s > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(format!(
                "invalid stiffness class {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub glide_speed_mm_s: f64,
    pub sample_rate_hz: f64,
    pub baseline_strain_n: f64,
    pub texture_gain_n_per_mm: f64,
    /// Standard deviation of the Gaussian contact kernel.
    pub kernel_width_mm: f64,
    pub noise_sigma_n: f64,
    pub hold_s: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            glide_speed_mm_s: 15.0,
            sample_rate_hz: 60.0,
            baseline_strain_n: 12.0,
            texture_gain_n_per_mm: 2.0,
            kernel_width_mm: 1.0,
            noise_sigma_n: 0.05,
            hold_s: 4.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("glide_speed_mm_s", self.glide_speed_mm_s),
            ("sample_rate_hz", self.sample_rate_hz),
            ("baseline_strain_n", self.baseline_strain_n),
            ("texture_gain_n_per_mm", self.texture_gain_n_per_mm),
            ("kernel_width_mm", self.kernel_width_mm),
            ("hold_s", self.hold_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ConfigInvalid(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.noise_sigma_n.is_finite() && self.noise_sigma_n >= 0.0) {
            return Err(Error::ConfigInvalid(
                "noise_sigma_n must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Configuration actually used for a contact mode.
    pub fn for_mode(&self, mode: ContactMode) -> SimConfig {
        match mode {
            ContactMode::Flexion => *self,
            ContactMode::Abduction => SimConfig {
                baseline_strain_n: self.baseline_strain_n * ABDUCTION_SCALE,
                noise_sigma_n: self.noise_sigma_n * ABDUCTION_SCALE,
                ..*self
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClassSpec {
    Texture(TexturePlate),
    Stiffness(StiffnessClass),
}

pub fn texture_presets() -> Vec<(ClassLabel, TexturePlate)> {
    let plate = |profile, period_mm: f64| TexturePlate {
        profile,
        period_mm,
        depth_mm: if profile == Profile::Flat { 0.0 } else { 1.0 },
        duty: 0.5,
        length_mm: 60.0,
    };
    let specs = [
        plate(Profile::Flat, 4.0),
        plate(Profile::Rectangular, 4.0),
        plate(Profile::Rectangular, 6.0),
        plate(Profile::Rectangular, 8.0),
        plate(Profile::Triangular, 4.0),
        plate(Profile::Triangular, 8.0),
        plate(Profile::Circular, 4.0),
        plate(Profile::Circular, 8.0),
    ];
    Task::Texture.labels().into_iter().zip(specs).collect()
}

pub fn stiffness_presets() -> Vec<(ClassLabel, StiffnessClass)> {
    let tap = |peak_strain_n, hold_slope_n_per_s| StiffnessClass {
        peak_strain_n,
        hold_slope_n_per_s,
        rise_s: 0.5,
        release_s: 0.3,
    };
    let specs = [
        tap(13.0, -0.2),
        tap(12.0, -0.6),
        tap(10.0, -0.9),
        tap(7.0, -1.5),
        tap(0.0, 0.0),
    ];
    Task::Stiffness.labels().into_iter().zip(specs).collect()
}

/// Preset class specifications in ordinal order.
pub fn presets(task: Task) -> Vec<(ClassLabel, ClassSpec)> {
    match task {
        Task::Texture => texture_presets()
            .into_iter()
            .map(|(l, s)| (l, ClassSpec::Texture(s)))
            .collect(),
        Task::Stiffness => stiffness_presets()
            .into_iter()
            .map(|(l, s)| (l, ClassSpec::Stiffness(s)))
            .collect(),
    }
}

fn noise(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sigma * z
}

fn samples_for(duration_s: f64, fs: f64) -> usize {
    (duration_s * fs).round() as usize
}

/// Noise-free glide strain at every sample.
fn texture_signal(plate: &TexturePlate, cfg: &SimConfig) -> Result<Vec<f64>> {
    let fs = cfg.sample_rate_hz;
    let v = cfg.glide_speed_mm_s;
    let n = samples_for(plate.length_mm / v, fs);
    if n == 0 {
        return Err(Error::ConfigInvalid("glide produces no samples".into()));
    }
    let dx = v / fs;
    let sigma = cfg.kernel_width_mm;
    let half = (4.0 * sigma / dx).ceil() as i64;
    let weights: Vec<f64> = (-half..=half)
        .map(|j| {
            let d = j as f64 * dx;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = v * i as f64 / fs;
        let mut drop = 0.0;
        for (w, j) in weights.iter().zip(-half..=half) {
            // replicate the plate edge beyond its ends
            let xs = (x - j as f64 * dx).clamp(0.0, plate.length_mm);
            drop += w * plate.height_profile(xs)?;
        }
        out.push(cfg.baseline_strain_n + cfg.texture_gain_n_per_mm * drop / total);
    }
    Ok(out)
}

pub fn simulate_texture_trial(
    plate: &TexturePlate,
    label: ClassLabel,
    mode: ContactMode,
    cfg: &SimConfig,
    seed: u64,
    trial_id: impl Into<String>,
) -> Result<StrainTrace> {
    plate.validate()?;
    cfg.validate()?;
    let mut samples = texture_signal(plate, cfg)?;
    if cfg.noise_sigma_n > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in &mut samples {
            *s += noise(&mut rng, cfg.noise_sigma_n);
        }
    }
    StrainTrace::new(
        samples,
        cfg.sample_rate_hz,
        Task::Texture,
        mode,
        label,
        trial_id,
        Some(seed),
    )
}

/// Sample-index layout of a simulated tap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TapLayout {
    /// First rising sample.
    pub rise_start: usize,
    /// Sample holding the peak strain (last rise sample).
    pub peak: usize,
    /// Last hold sample.
    pub hold_end: usize,
    /// First sample of the zero tail.
    pub release_end: usize,
    pub len: usize,
}

impl TapLayout {
    pub fn new(cls: &StiffnessClass, cfg: &SimConfig) -> Self {
        let fs = cfg.sample_rate_hz;
        let pad = samples_for(TAP_PADDING_S, fs);
        let rise = samples_for(cls.rise_s, fs).max(1);
        let hold = samples_for(cfg.hold_s, fs).max(1);
        let release = samples_for(cls.release_s, fs).max(1);
        let peak = pad + rise - 1;
        let hold_end = peak + hold;
        let release_end = hold_end + release + 1;
        Self {
            rise_start: pad,
            peak,
            hold_end,
            release_end,
            len: release_end + pad,
        }
    }
}

fn tap_signal(cls: &StiffnessClass, cfg: &SimConfig) -> Vec<f64> {
    let fs = cfg.sample_rate_hz;
    let lay = TapLayout::new(cls, cfg);
    let rise = (lay.peak + 1 - lay.rise_start) as f64;
    let release = (lay.release_end - 1 - lay.hold_end) as f64;
    let hold_at =
        |n: usize| cls.peak_strain_n + cls.hold_slope_n_per_s * (n - lay.peak) as f64 / fs;
    let hold_final = hold_at(lay.hold_end);
    (0..lay.len)
        .map(|n| {
            if n < lay.rise_start || n >= lay.release_end {
                0.0
            } else if n <= lay.peak {
                cls.peak_strain_n * (n + 1 - lay.rise_start) as f64 / rise
            } else if n <= lay.hold_end {
                hold_at(n)
            } else {
                hold_final * (1.0 - (n - lay.hold_end) as f64 / release)
            }
        })
        .collect()
}

pub fn simulate_stiffness_trial(
    cls: &StiffnessClass,
    label: ClassLabel,
    mode: ContactMode,
    cfg: &SimConfig,
    seed: u64,
    trial_id: impl Into<String>,
) -> Result<StrainTrace> {
    cls.validate()?;
    cfg.validate()?;
    let mut samples = tap_signal(cls, cfg);
    if cfg.noise_sigma_n > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in &mut samples {
            *s += noise(&mut rng, cfg.noise_sigma_n);
        }
    }
    StrainTrace::new(
        samples,
        cfg.sample_rate_hz,
        Task::Stiffness,
        mode,
        label,
        trial_id,
        Some(seed),
    )
}

/// Per-trial seed derived from the corpus seed, class name and trial index.
pub fn trial_seed(seed: u64, label: &str, index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update([0u8]);
    h.update((index as u64).to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn simulate_trial(
    spec: &ClassSpec,
    label: ClassLabel,
    mode: ContactMode,
    cfg: &SimConfig,
    seed: u64,
    trial_id: impl Into<String>,
) -> Result<StrainTrace> {
    let mode_cfg = cfg.for_mode(mode);
    match spec {
        ClassSpec::Texture(p) => simulate_texture_trial(p, label, mode, &mode_cfg, seed, trial_id),
        ClassSpec::Stiffness(s) => {
            simulate_stiffness_trial(s, label, mode, &mode_cfg, seed, trial_id)
        }
    }
}

/// `trials_per_class` traces for every preset class of `task`, grouped by class
/// in ordinal order.
pub fn generate_corpus(
    task: Task,
    mode: ContactMode,
    trials_per_class: usize,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Vec<StrainTrace>> {
    if trials_per_class == 0 {
        return Err(Error::ConfigInvalid(
            "trials_per_class must be at least 1".into(),
        ));
    }
    cfg.validate()?;
    let jobs: Vec<(ClassLabel, ClassSpec, usize)> = presets(task)
        .into_iter()
        .flat_map(|(l, s)| (0..trials_per_class).map(move |i| (l.clone(), s, i)))
        .collect();
    jobs.into_par_iter()
        .map(|(label, spec, i)| {
            let id = format!("{}-{}-{}-{:03}", task, mode, label, i);
            let s = trial_seed(seed, label.name(), i);
            simulate_trial(&spec, label, mode, cfg, s, id)
        })
        .collect()
}
