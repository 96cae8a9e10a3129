//! Channel-noise models for robustness evaluation.
//!
//! Each model perturbs a fixed number of randomly chosen channels of the
//! response vectors: additive Gaussian or uniform noise scaled to 40% of the
//! channel standard deviation, data loss that zeroes 40% of the samples on a
//! channel, or outliers that triple 40% of them. Unselected channels stay
//! bit-identical and all counts remain nonnegative.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classify::ResponseVector;
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, thiserror::Error, PartialEq, Eq)]
pub enum NoiseError {
    #[error("cannot noise an empty dataset")]
    EmptyDataset,
    #[error("channel count {count} exceeds vector dimension {dim}")]
    TooManyChannels { count: usize, dim: usize },
    #[error("fraction must lie in [0, 1]")]
    BadFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    Uniform,
    Missing,
    Outliers,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::Gaussian,
        NoiseKind::Uniform,
        NoiseKind::Missing,
        NoiseKind::Outliers,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Uniform => "uniform",
            NoiseKind::Missing => "missing",
            NoiseKind::Outliers => "outliers",
        }
    }
}

/// Parameters of one noise application.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Fraction of samples hit on each selected channel (missing/outliers).
    pub fraction: f64,
    /// Number of channels to perturb.
    pub channel_count: usize,
    /// Additive noise scale as a multiple of the channel std
    /// (gaussian/uniform).
    pub scale: f64,
    /// Multiplier applied by the outlier model.
    pub outlier_factor: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Self {
        Self {
            kind,
            fraction: 0.4,
            channel_count: 4,
            scale: 0.4,
            outlier_factor: 3.0,
            seed,
        }
    }
}

/// Which channels a noise application touched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub channels: Vec<usize>,
    /// Samples perturbed per selected channel (missing/outliers).
    pub samples_per_channel: usize,
}

/// Per-channel population standard deviation over the dataset.
pub fn channel_stds(dataset: &[ResponseVector]) -> Vec<f64> {
    let dim = dataset.first().map_or(0, |rv| rv.counts.len());
    let n = dataset.len() as f64;
    let mut mean = alloc::vec![0.0; dim];
    for rv in dataset {
        for (m, v) in mean.iter_mut().zip(&rv.counts) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut var = alloc::vec![0.0; dim];
    for rv in dataset {
        for ((s, v), m) in var.iter_mut().zip(&rv.counts).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    var.into_iter().map(|s| libm::sqrt(s / n)).collect()
}

/// Applies one noise model to a dataset, returning the perturbed copy and a
/// record of the affected channels. Deterministic in (dataset, spec).
pub fn apply_noise(
    dataset: &[ResponseVector],
    spec: &NoiseSpec,
) -> Result<(Vec<ResponseVector>, NoiseRecord), NoiseError> {
    if dataset.is_empty() {
        return Err(NoiseError::EmptyDataset);
    }
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(NoiseError::BadFraction);
    }
    let dim = dataset[0].counts.len();
    if spec.channel_count > dim {
        return Err(NoiseError::TooManyChannels {
            count: spec.channel_count,
            dim,
        });
    }

    // Channels drawn uniformly without replacement.
    let mut channel_rng = rng::stream(spec.seed, &[tag::NOISE_CHANNELS]);
    let mut all: Vec<usize> = (0..dim).collect();
    all.shuffle(&mut channel_rng);
    let mut channels: Vec<usize> = all.into_iter().take(spec.channel_count).collect();
    channels.sort_unstable();

    let stds = channel_stds(dataset);
    let n = dataset.len();
    let hit_count = libm::round(spec.fraction * n as f64) as usize;

    let mut noised: Vec<ResponseVector> = dataset.to_vec();
    // Fraction 0 disables the harness for every model (for the additive
    // models the fraction plays no other role).
    if spec.fraction == 0.0 {
        return Ok((
            noised,
            NoiseRecord {
                channels,
                samples_per_channel: 0,
            },
        ));
    }
    for (ci, &channel) in channels.iter().enumerate() {
        let mut rng = rng::stream(spec.seed, &[tag::NOISE_SAMPLES, ci as u64]);
        match spec.kind {
            NoiseKind::Gaussian => {
                let sigma = spec.scale * stds[channel];
                if sigma > 0.0 {
                    let normal = Normal::new(0.0, sigma).unwrap();
                    for rv in noised.iter_mut() {
                        let v = rv.counts[channel] + normal.sample(&mut rng);
                        rv.counts[channel] = v.max(0.0);
                    }
                }
            }
            NoiseKind::Uniform => {
                let half = spec.scale * stds[channel];
                if half > 0.0 {
                    for rv in noised.iter_mut() {
                        let v = rv.counts[channel] + rng.random_range(-half..half);
                        rv.counts[channel] = v.max(0.0);
                    }
                }
            }
            NoiseKind::Missing => {
                for i in pick_samples(&mut rng, n, hit_count) {
                    noised[i].counts[channel] = 0.0;
                }
            }
            NoiseKind::Outliers => {
                for i in pick_samples(&mut rng, n, hit_count) {
                    noised[i].counts[channel] *= spec.outlier_factor;
                }
            }
        }
    }
    Ok((
        noised,
        NoiseRecord {
            channels,
            samples_per_channel: hit_count,
        },
    ))
}

/// `count` sample indices drawn without replacement.
fn pick_samples<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(rng);
    indices.truncate(count);
    indices
}
