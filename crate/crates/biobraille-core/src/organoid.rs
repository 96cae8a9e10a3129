//! Seeded stochastic stand-in for a neural organoid on an eight-electrode
//! array.
//!
//! The model is deliberately simple: each stimulated electrode j contributes
//! an expected evoked spike count to every recording channel k through a
//! nonnegative coupling matrix with a dominant diagonal. The per-electrode
//! drive grows affinely with pulse count above a small activation offset,
//! gates on a phase-amplitude threshold with saturation above it, and rises
//! monotonically with phase duration (the most variable of the three gains).
//! Every one of those response curves is drawn per electrode when the model
//! is built, so different organoids apply genuinely different nonlinear
//! transforms to the same stimulus; that heterogeneity is what makes a
//! multi-organoid ensemble more than three noisy copies. Trigger delay
//! shifts spike timing only; it never enters the rate. Evoked counts are
//! Poisson, spike times follow a fast primary decay plus a
//! pulse-count-dependent secondary peak near 60 ms, and sparse baseline
//! activity is superposed uniformly over the recording window.
//!
//! All draws come from streams keyed by (trial seed, channel, source), so a
//! trial is a pure function of (model, pattern, trial seed) and total counts
//! are exactly invariant under trigger-delay changes.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::encoder::{ElectrodeStim, StimPattern};
use crate::rng::{self, tag};

/// Number of electrodes per organoid.
pub const NUM_ELECTRODES: usize = 8;

/// Platform limits for stimulation parameters.
pub const PLATFORM_MAX_PULSES: u8 = 10;
pub const PLATFORM_MAX_AMPLITUDE_UA: f64 = 20.0;
pub const PLATFORM_MAX_DURATION_US: u32 = 300;
pub const PLATFORM_MAX_DELAY_US: u32 = 4000;

#[derive(Debug, Clone, Copy, thiserror::Error, PartialEq)]
pub enum StimError {
    #[error("pattern must cover {NUM_ELECTRODES} electrodes, got {0}")]
    WrongElectrodeCount(usize),
    #[error("electrode {electrode}: {what} outside platform range")]
    PatternOutOfRange {
        electrode: usize,
        what: &'static str,
    },
    #[error("recording window must have positive length")]
    BadWindow,
    #[error("invalid organoid config: {0}")]
    BadConfig(&'static str),
    #[error("bin width must divide the window length")]
    BadBinning,
}

/// Recording window relative to stimulus onset, microseconds, half-open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordingWindow {
    pub start_us: i64,
    pub end_us: i64,
}

impl RecordingWindow {
    pub const fn new(start_us: i64, end_us: i64) -> Self {
        Self { start_us, end_us }
    }

    /// Default 500 ms readout window.
    pub const fn readout() -> Self {
        Self::new(0, 500_000)
    }

    /// 200 ms window used by the single-parameter sweeps.
    pub const fn sweep() -> Self {
        Self::new(0, 200_000)
    }

    /// 100 ms before to 500 ms after stimulation.
    pub const fn peristimulus() -> Self {
        Self::new(-100_000, 500_000)
    }

    pub fn len_us(&self) -> i64 {
        self.end_us - self.start_us
    }

    pub fn len_s(&self) -> f64 {
        self.len_us() as f64 * 1e-6
    }
}

/// Electrode coordinates on the array, normalized to the unit square, plus
/// the physical scale used when reporting activity-centre shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeLayout {
    pub coords: [(f64, f64); NUM_ELECTRODES],
    pub um_per_unit: f64,
}

impl Default for ElectrodeLayout {
    fn default() -> Self {
        // Two rows of four with the placement irregularities of a real
        // array: every electrode sits at a different distance from the array
        // centre, so activity-centre shift magnitudes cannot collapse onto
        // each other by mirror symmetry.
        Self {
            coords: [
                (0.059, 0.265),
                (0.341, 0.246),
                (0.701, 0.178),
                (0.729, 0.378),
                (0.200, 0.660),
                (0.256, 0.890),
                (0.617, 0.687),
                (0.870, 0.698),
            ],
            um_per_unit: 100.0,
        }
    }
}

/// Structural parameters of the response model. Scalar values are centres;
/// the per-electrode response curves are drawn from the given ranges when a
/// model is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrganoidConfig {
    /// Uniform range of the coupling diagonal (self drive).
    pub diag_gain: (f64, f64),
    /// Upper bound of uniform off-diagonal coupling (cross-talk).
    pub cross_gain_max: f64,
    /// Per organoid, this many stimulation electrodes sit in poorly
    /// responsive tissue: their whole coupling column is scaled by
    /// `weak_electrode_gain`. Different organoids are weak in different
    /// places, which is what makes an ensemble complementary.
    pub weak_electrode_count: u8,
    pub weak_electrode_gain: f64,
    /// Expected evoked spikes per effective pulse per unit coupling at
    /// amplitude gain 1 and duration gain 1.
    pub pulse_gain: f64,
    /// Pulses below this per-electrode offset contribute nothing; the drive
    /// grows affinely above it. Drawn uniformly per electrode.
    pub pulse_offset_range: (f64, f64),
    /// Per-electrode activation threshold range (uA); amplitudes below the
    /// drawn threshold evoke nothing. Kept at or below 4 uA so the platform
    /// default amplitude drives every electrode.
    pub amplitude_threshold_range_ua: (f64, f64),
    /// Saturation amplitude, drawn as threshold + U(this range) (uA); the
    /// amplitude gain is ~90% of its ceiling there.
    pub amplitude_saturation_above_ua: (f64, f64),
    /// Amplitude gain just above threshold (fraction of ceiling), drawn
    /// uniformly per electrode.
    pub amplitude_floor_range: (f64, f64),
    /// Duration gain exponent range: gain = (duration/100us)^exponent with a
    /// per-electrode exponent. The most variable response dimension.
    pub duration_exponent_range: (f64, f64),
    /// Log-normal sigma of the fixed per-electrode duration-gain jitter.
    pub duration_jitter: f64,
    /// Network recruitment is all-or-none per stimulated electrode and
    /// trial: short trains often fail to ignite a burst. Probability of
    /// recruitment at a single pulse; rises linearly to 1 at
    /// `recruit_full_pulses`.
    pub recruit_floor: f64,
    /// Pulse count from which recruitment is certain.
    pub recruit_full_pulses: f64,
    /// Spontaneous rate per channel (Hz).
    pub baseline_rate_hz: f64,
    /// Primary evoked-response decay constant (ms).
    pub tau_primary_ms: f64,
    /// Latency and width of the late secondary response peak (ms).
    pub secondary_latency_ms: f64,
    pub secondary_sigma_ms: f64,
    /// Fraction of evoked spikes in the secondary peak at the maximal pulse
    /// count; zero at `secondary_onset_pulses` and below, linear in between.
    pub secondary_max_weight: f64,
    pub secondary_onset_pulses: u8,
    /// Minimal spacing enforced between successive spikes on one channel.
    pub refractory_floor_us: i64,
    pub layout: ElectrodeLayout,
}

impl Default for OrganoidConfig {
    fn default() -> Self {
        Self {
            diag_gain: (0.7, 1.3),
            cross_gain_max: 0.06,
            pulse_gain: 60.0,
            pulse_offset_range: (0.3, 1.5),
            weak_electrode_count: 2,
            weak_electrode_gain: 0.3,
            amplitude_threshold_range_ua: (3.0, 4.0),
            amplitude_saturation_above_ua: (4.0, 11.0),
            amplitude_floor_range: (0.15, 0.55),
            duration_exponent_range: (0.25, 1.0),
            duration_jitter: 0.25,
            recruit_floor: 0.35,
            recruit_full_pulses: 4.0,
            baseline_rate_hz: 3.0,
            tau_primary_ms: 8.0,
            secondary_latency_ms: 60.0,
            secondary_sigma_ms: 15.0,
            secondary_max_weight: 0.55,
            secondary_onset_pulses: 3,
            // Each electrode records a multi-unit ensemble, so the enforced
            // spacing is far below a single neuron's refractory period.
            refractory_floor_us: 100,
            layout: ElectrodeLayout::default(),
        }
    }
}

fn valid_range(r: (f64, f64)) -> bool {
    r.0.is_finite() && r.1.is_finite() && r.1 >= r.0
}

impl OrganoidConfig {
    pub fn validate(&self) -> Result<(), StimError> {
        if !(self.diag_gain.0 > 0.0 && self.diag_gain.1 >= self.diag_gain.0) {
            return Err(StimError::BadConfig("diagonal gain range must be positive"));
        }
        if !(self.cross_gain_max >= 0.0) || self.cross_gain_max >= self.diag_gain.0 {
            return Err(StimError::BadConfig(
                "cross-talk must be nonnegative and below the diagonal gain",
            ));
        }
        if !valid_range(self.amplitude_threshold_range_ua)
            || self.amplitude_threshold_range_ua.0 <= 0.0
        {
            return Err(StimError::BadConfig("amplitude threshold range invalid"));
        }
        if !valid_range(self.amplitude_saturation_above_ua)
            || self.amplitude_saturation_above_ua.0 <= 0.0
        {
            return Err(StimError::BadConfig(
                "saturation must lie strictly above the threshold",
            ));
        }
        if !valid_range(self.amplitude_floor_range)
            || self.amplitude_floor_range.0 < 0.0
            || self.amplitude_floor_range.1 > 1.0
        {
            return Err(StimError::BadConfig("amplitude floor must be a fraction"));
        }
        if !valid_range(self.duration_exponent_range) || self.duration_exponent_range.0 <= 0.0 {
            return Err(StimError::BadConfig("duration exponents must be positive"));
        }
        if !valid_range(self.pulse_offset_range) || self.pulse_offset_range.0 < 0.0 {
            return Err(StimError::BadConfig("pulse offsets must be nonnegative"));
        }
        if !(self.pulse_gain >= 0.0) || !(self.baseline_rate_hz >= 0.0) {
            return Err(StimError::BadConfig("rates must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.recruit_floor) || !(self.recruit_full_pulses >= 1.0) {
            return Err(StimError::BadConfig("recruitment curve invalid"));
        }
        if self.weak_electrode_count as usize >= NUM_ELECTRODES
            || !(0.0..=1.0).contains(&self.weak_electrode_gain)
        {
            return Err(StimError::BadConfig("weak-electrode spec invalid"));
        }
        if !(self.tau_primary_ms > 0.0) || !(self.secondary_sigma_ms > 0.0) {
            return Err(StimError::BadConfig("time constants must be positive"));
        }
        if !(0.0..=1.0).contains(&self.secondary_max_weight) {
            return Err(StimError::BadConfig("weights must be fractions"));
        }
        Ok(())
    }
}

/// One simulated organoid: seed plus every derived parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrganoidModel {
    pub seed: u64,
    pub config: OrganoidConfig,
    /// coupling[k][j]: drive gain from stimulating electrode j into recording
    /// channel k. Strictly dominant diagonal.
    pub coupling: Vec<Vec<f64>>,
    /// Fixed per-electrode multiplier on the duration gain.
    pub duration_gain_jitter: Vec<f64>,
    /// Per-electrode response curves.
    pub amplitude_threshold_ua: Vec<f64>,
    pub amplitude_saturation_ua: Vec<f64>,
    pub amplitude_floor: Vec<f64>,
    pub duration_exponent: Vec<f64>,
    pub pulse_offset: Vec<f64>,
}

/// Per-channel spike timestamps (us relative to stimulus onset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    pub channels: Vec<Vec<i64>>,
}

impl SpikeTrain {
    /// Spikes per channel within a half-open window.
    pub fn counts_in(&self, window: RecordingWindow) -> Vec<u64> {
        self.channels
            .iter()
            .map(|ch| {
                ch.iter()
                    .filter(|&&t| t >= window.start_us && t < window.end_us)
                    .count() as u64
            })
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.channels.iter().map(|ch| ch.len() as u64).sum()
    }
}

/// Builds a model from a seed: coupling matrix with dominant diagonal and
/// randomized cross-talk, plus per-electrode response curves (duration-gain
/// jitter and exponent, amplitude threshold/saturation/floor, pulse offset).
pub fn build_organoid(seed: u64, config: &OrganoidConfig) -> Result<OrganoidModel, StimError> {
    config.validate()?;
    let mut coupling = Vec::with_capacity(NUM_ELECTRODES);
    for k in 0..NUM_ELECTRODES {
        let mut rng = rng::stream(seed, &[tag::COUPLING, k as u64]);
        let mut row = vec![0.0; NUM_ELECTRODES];
        for (j, value) in row.iter_mut().enumerate() {
            *value = if j == k {
                rng.random_range(config.diag_gain.0..=config.diag_gain.1)
            } else if config.cross_gain_max > 0.0 {
                rng.random_range(0.0..config.cross_gain_max)
            } else {
                0.0
            };
        }
        coupling.push(row);
    }

    // Electrodes sitting in poorly responsive tissue: scale their whole
    // coupling column down. Which electrodes are weak differs per seed.
    if config.weak_electrode_count > 0 && config.weak_electrode_gain < 1.0 {
        let mut rng = rng::stream(seed, &[tag::COUPLING, 0xdead]);
        let mut electrodes: Vec<usize> = (0..NUM_ELECTRODES).collect();
        electrodes.shuffle(&mut rng);
        for &j in electrodes.iter().take(config.weak_electrode_count as usize) {
            for row in coupling.iter_mut() {
                row[j] *= config.weak_electrode_gain;
            }
        }
    }

    let mut rng = rng::stream(seed, &[tag::DURATION_JITTER]);
    let normal = Normal::new(0.0, config.duration_jitter.max(1e-12)).unwrap();
    let duration_gain_jitter: Vec<f64> = (0..NUM_ELECTRODES)
        .map(|_| libm::exp(normal.sample(&mut rng)).clamp(0.5, 2.0))
        .collect();
    let uniform = |rng: &mut rand_chacha::ChaCha8Rng, (lo, hi): (f64, f64)| {
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    };
    let amplitude_threshold_ua: Vec<f64> = (0..NUM_ELECTRODES)
        .map(|_| uniform(&mut rng, config.amplitude_threshold_range_ua))
        .collect();
    let amplitude_saturation_ua: Vec<f64> = amplitude_threshold_ua
        .iter()
        .map(|thr| thr + uniform(&mut rng, config.amplitude_saturation_above_ua))
        .collect();
    let amplitude_floor: Vec<f64> = (0..NUM_ELECTRODES)
        .map(|_| uniform(&mut rng, config.amplitude_floor_range))
        .collect();
    let duration_exponent: Vec<f64> = (0..NUM_ELECTRODES)
        .map(|_| uniform(&mut rng, config.duration_exponent_range))
        .collect();
    let pulse_offset: Vec<f64> = (0..NUM_ELECTRODES)
        .map(|_| uniform(&mut rng, config.pulse_offset_range))
        .collect();

    Ok(OrganoidModel {
        seed,
        config: config.clone(),
        coupling,
        duration_gain_jitter,
        amplitude_threshold_ua,
        amplitude_saturation_ua,
        amplitude_floor,
        duration_exponent,
        pulse_offset,
    })
}

impl OrganoidModel {
    /// Amplitude gain of electrode `j`: zero below its threshold, then a
    /// saturating rise from the electrode's floor toward 1 (about 90% of the
    /// way at its saturation amplitude).
    pub fn amplitude_gain(&self, j: usize, amplitude_ua: f64) -> f64 {
        let thr = self.amplitude_threshold_ua[j];
        if amplitude_ua < thr {
            return 0.0;
        }
        let floor = self.amplitude_floor[j];
        let tau = (self.amplitude_saturation_ua[j] - thr) / core::f64::consts::LN_10;
        let rise = 1.0 - libm::exp(-(amplitude_ua - thr) / tau);
        floor + (1.0 - floor) * rise
    }

    /// Duration gain of electrode `j`: its jittered power law of the phase
    /// duration.
    pub fn duration_gain(&self, j: usize, duration_us: u32) -> f64 {
        self.duration_gain_jitter[j]
            * libm::pow(duration_us as f64 / 100.0, self.duration_exponent[j])
    }

    /// Effective pulse count of electrode `j`: affine above the electrode's
    /// activation offset, so spike output stays linear in pulse count.
    pub fn effective_pulses(&self, j: usize, num_pulses: u8) -> f64 {
        (num_pulses as f64 - self.pulse_offset[j]).max(0.0)
    }

    /// Expected evoked spikes contributed by electrode `j` per unit coupling,
    /// conditional on recruitment. Trigger delay never enters here.
    pub fn electrode_drive(&self, j: usize, stim: &ElectrodeStim) -> f64 {
        if stim.num_pulses == 0 {
            return 0.0;
        }
        self.config.pulse_gain
            * self.effective_pulses(j, stim.num_pulses)
            * self.amplitude_gain(j, stim.phase_amplitude_ua)
            * self.duration_gain(j, stim.phase_duration_us)
    }

    /// Probability that a train of `num_pulses` recruits a network burst.
    pub fn recruitment_prob(&self, num_pulses: u8) -> f64 {
        if num_pulses == 0 {
            return 0.0;
        }
        let c = &self.config;
        let span = (c.recruit_full_pulses - 1.0).max(f64::MIN_POSITIVE);
        (c.recruit_floor + (1.0 - c.recruit_floor) * (num_pulses as f64 - 1.0) / span).clamp(0.0, 1.0)
    }

    /// Expected evoked spike count on channel `k` for a pattern, including
    /// the recruitment probability.
    pub fn channel_rate(&self, k: usize, pattern: &StimPattern) -> f64 {
        pattern
            .electrodes
            .iter()
            .enumerate()
            .map(|(j, stim)| {
                self.coupling[k][j]
                    * self.recruitment_prob(stim.num_pulses)
                    * self.electrode_drive(j, stim)
            })
            .sum()
    }

    /// Fraction of evoked spikes routed to the secondary peak for a train of
    /// `num_pulses` pulses.
    pub fn secondary_weight(&self, num_pulses: u8) -> f64 {
        let c = &self.config;
        if num_pulses <= c.secondary_onset_pulses {
            return 0.0;
        }
        let span = (PLATFORM_MAX_PULSES - c.secondary_onset_pulses) as f64;
        c.secondary_max_weight * (((num_pulses - c.secondary_onset_pulses) as f64) / span).min(1.0)
    }
}

fn validate_pattern(pattern: &StimPattern) -> Result<(), StimError> {
    if pattern.electrodes.len() != NUM_ELECTRODES {
        return Err(StimError::WrongElectrodeCount(pattern.electrodes.len()));
    }
    for (electrode, e) in pattern.electrodes.iter().enumerate() {
        if e.num_pulses > PLATFORM_MAX_PULSES {
            return Err(StimError::PatternOutOfRange {
                electrode,
                what: "pulse count",
            });
        }
        if !(0.0..=PLATFORM_MAX_AMPLITUDE_UA).contains(&e.phase_amplitude_ua) {
            return Err(StimError::PatternOutOfRange {
                electrode,
                what: "phase amplitude",
            });
        }
        if e.phase_duration_us > PLATFORM_MAX_DURATION_US {
            return Err(StimError::PatternOutOfRange {
                electrode,
                what: "phase duration",
            });
        }
        if e.trigger_delay_us > PLATFORM_MAX_DELAY_US {
            return Err(StimError::PatternOutOfRange {
                electrode,
                what: "trigger delay",
            });
        }
    }
    Ok(())
}

/// A pattern that stimulates nothing (spontaneous activity).
pub fn silent_pattern() -> StimPattern {
    StimPattern {
        electrodes: vec![ElectrodeStim::silent(); NUM_ELECTRODES],
    }
}

/// Simulates one trial. Pure function of (model, pattern, window, trial
/// seed); trials parallelize freely.
pub fn stimulate(
    model: &OrganoidModel,
    pattern: &StimPattern,
    window: RecordingWindow,
    trial_seed: u64,
) -> Result<SpikeTrain, StimError> {
    validate_pattern(pattern)?;
    if window.len_us() <= 0 {
        return Err(StimError::BadWindow);
    }
    let c = &model.config;
    let secondary = Normal::new(
        c.secondary_latency_ms * 1000.0,
        c.secondary_sigma_ms * 1000.0,
    )
    .unwrap();

    // All-or-none burst recruitment, drawn once per stimulated electrode so
    // every recording channel sees the same outcome. Keyed without the
    // trigger delay, like every other draw.
    let recruited: Vec<bool> = pattern
        .electrodes
        .iter()
        .enumerate()
        .map(|(j, stim)| {
            let p = model.recruitment_prob(stim.num_pulses);
            p > 0.0 && rng::stream(trial_seed, &[tag::RECRUIT, j as u64]).random::<f64>() < p
        })
        .collect();

    let mut channels = Vec::with_capacity(NUM_ELECTRODES);
    for k in 0..NUM_ELECTRODES {
        let mut spikes: Vec<i64> = Vec::new();

        for (j, stim) in pattern.electrodes.iter().enumerate() {
            if !recruited[j] {
                continue;
            }
            let lambda = model.coupling[k][j] * model.electrode_drive(j, stim);
            if lambda <= 0.0 {
                continue;
            }
            let mut rng = rng::stream(trial_seed, &[tag::EVOKED, k as u64, j as u64]);
            let n = Poisson::new(lambda).unwrap().sample(&mut rng) as u64;
            let w_secondary = model.secondary_weight(stim.num_pulses);
            for _ in 0..n {
                let offset_us = if rng.random::<f64>() < w_secondary {
                    secondary.sample(&mut rng).max(0.0)
                } else {
                    -c.tau_primary_ms * 1000.0 * libm::log(1.0 - rng.random::<f64>())
                };
                let t = stim.trigger_delay_us as i64 + offset_us as i64;
                spikes.push(t.clamp(window.start_us, window.end_us - 1));
            }
        }

        if c.baseline_rate_hz > 0.0 {
            let mut rng = rng::stream(trial_seed, &[tag::BASELINE, k as u64]);
            let n = Poisson::new(c.baseline_rate_hz * window.len_s())
                .unwrap()
                .sample(&mut rng) as u64;
            for _ in 0..n {
                spikes.push(rng.random_range(window.start_us..window.end_us));
            }
        }

        spikes.sort_unstable();
        if c.refractory_floor_us > 0 {
            let mut prev = i64::MIN;
            for t in spikes.iter_mut() {
                if prev != i64::MIN && *t < prev + c.refractory_floor_us {
                    *t = (prev + c.refractory_floor_us).min(window.end_us - 1);
                }
                prev = *t;
            }
        }
        channels.push(spikes);
    }
    Ok(SpikeTrain { channels })
}

/// Which stimulation parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Pulses,
    Amplitude,
    Duration,
    Delay,
}

/// One-parameter sweep protocol: the named parameter takes each value in
/// turn while the others stay at the sweep defaults (single pulse, 4 uA,
/// 100 us). Value 0 means an unstimulated baseline measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub trials: u32,
    pub window: RecordingWindow,
}

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>, trials: u32) -> Self {
        Self {
            param,
            values,
            trials,
            window: RecordingWindow::sweep(),
        }
    }

    /// Stimulus for one electrode at one swept value.
    pub fn electrode_stim(&self, value: f64) -> ElectrodeStim {
        let mut stim = ElectrodeStim {
            num_pulses: 1,
            phase_amplitude_ua: 4.0,
            phase_duration_us: 100,
            trigger_delay_us: 0,
            ..ElectrodeStim::silent()
        };
        match self.param {
            SweepParam::Pulses => stim.num_pulses = libm::round(value) as u8,
            SweepParam::Amplitude => stim.phase_amplitude_ua = value,
            SweepParam::Duration => stim.phase_duration_us = libm::round(value) as u32,
            SweepParam::Delay => stim.trigger_delay_us = libm::round(value) as u32,
        }
        stim
    }
}

/// Sweep results: mean spike counts per (value, stimulated electrode,
/// recording channel), with per-value summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub trials: u32,
    /// mean_counts[v][e][k]: mean spikes on channel k when electrode e is
    /// stimulated at values[v].
    pub mean_counts: Vec<Vec<Vec<f64>>>,
    /// total_std[v][e]: std of per-trial total counts.
    pub total_std: Vec<Vec<f64>>,
    /// Mean total count per value, averaged over stimulated electrodes.
    pub grand_mean: Vec<f64>,
}

impl SweepTable {
    /// Mean total count for one (value, stimulated electrode) pair.
    pub fn total_mean(&self, value_idx: usize, electrode: usize) -> f64 {
        self.mean_counts[value_idx][electrode].iter().sum()
    }

    /// Standard error of `grand_mean[value_idx]` from the pooled per-trial
    /// spread across electrodes.
    pub fn grand_mean_stderr(&self, value_idx: usize) -> f64 {
        let pooled_var = self.total_std[value_idx]
            .iter()
            .map(|s| s * s)
            .sum::<f64>()
            / NUM_ELECTRODES as f64;
        libm::sqrt(pooled_var / (NUM_ELECTRODES as f64 * self.trials as f64))
    }
}

/// Runs a sweep: each electrode is stimulated in turn, all channels are
/// recorded, and counts are averaged over trials. Trial seeds are keyed by
/// (electrode, trial) only, so parameters that do not enter the rate (trigger
/// delay) reproduce identical counts across values.
pub fn run_sweep(model: &OrganoidModel, spec: &SweepSpec, seed: u64) -> Result<SweepTable, StimError> {
    let mut mean_counts = Vec::with_capacity(spec.values.len());
    let mut total_std = Vec::with_capacity(spec.values.len());
    let mut grand_mean = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let mut per_electrode = Vec::with_capacity(NUM_ELECTRODES);
        let mut std_row = Vec::with_capacity(NUM_ELECTRODES);
        let mut total = 0.0;
        for electrode in 0..NUM_ELECTRODES {
            let mut pattern = silent_pattern();
            if value > 0.0 || spec.param == SweepParam::Delay {
                pattern.electrodes[electrode] = spec.electrode_stim(value);
            }
            let mut channel_sums = vec![0.0; NUM_ELECTRODES];
            let mut trial_totals = Vec::with_capacity(spec.trials as usize);
            for trial in 0..spec.trials {
                let trial_seed =
                    rng::derive_seed(seed, &[tag::SWEEP, electrode as u64, trial as u64]);
                let train = stimulate(model, &pattern, spec.window, trial_seed)?;
                trial_totals.push(train.total() as f64);
                for (k, sum) in channel_sums.iter_mut().enumerate() {
                    *sum += train.channels[k].len() as f64;
                }
            }
            for sum in channel_sums.iter_mut() {
                *sum /= spec.trials as f64;
            }
            let mean = trial_totals.iter().sum::<f64>() / trial_totals.len() as f64;
            let var = trial_totals
                .iter()
                .map(|t| (t - mean) * (t - mean))
                .sum::<f64>()
                / trial_totals.len() as f64;
            std_row.push(libm::sqrt(var));
            total += channel_sums.iter().sum::<f64>();
            per_electrode.push(channel_sums);
        }
        grand_mean.push(total / NUM_ELECTRODES as f64);
        mean_counts.push(per_electrode);
        total_std.push(std_row);
    }
    Ok(SweepTable {
        param: spec.param,
        values: spec.values.clone(),
        trials: spec.trials,
        mean_counts,
        total_std,
        grand_mean,
    })
}

/// Peristimulus time histogram: all electrodes stimulated simultaneously with
/// identical parameters, counts summed over channels, binned and averaged
/// over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsthTable {
    pub bin_ms: u32,
    pub window: RecordingWindow,
    pub bin_starts_ms: Vec<i64>,
    pub mean_counts: Vec<f64>,
}

impl PsthTable {
    /// Mean count over the bins that lie fully before stimulus onset.
    pub fn prestimulus_mean(&self) -> f64 {
        let pre: Vec<f64> = self
            .bin_starts_ms
            .iter()
            .zip(&self.mean_counts)
            .filter(|(&start, _)| start < 0)
            .map(|(_, &c)| c)
            .collect();
        if pre.is_empty() {
            0.0
        } else {
            pre.iter().sum::<f64>() / pre.len() as f64
        }
    }

    pub fn bin_at_ms(&self, start_ms: i64) -> Option<f64> {
        self.bin_starts_ms
            .iter()
            .position(|&s| s == start_ms)
            .map(|i| self.mean_counts[i])
    }
}

pub fn psth(
    model: &OrganoidModel,
    stim: &ElectrodeStim,
    trials: u32,
    bin_ms: u32,
    window: RecordingWindow,
    seed: u64,
) -> Result<PsthTable, StimError> {
    let bin_us = bin_ms as i64 * 1000;
    if bin_us <= 0 || window.len_us() % bin_us != 0 {
        return Err(StimError::BadBinning);
    }
    let pattern = StimPattern {
        electrodes: vec![*stim; NUM_ELECTRODES],
    };
    let num_bins = (window.len_us() / bin_us) as usize;
    let mut sums = vec![0.0; num_bins];
    for trial in 0..trials {
        let trial_seed = rng::derive_seed(seed, &[tag::TRIAL, trial as u64]);
        let train = stimulate(model, &pattern, window, trial_seed)?;
        for ch in &train.channels {
            for &t in ch {
                let idx = ((t - window.start_us) / bin_us) as usize;
                sums[idx.min(num_bins - 1)] += 1.0;
            }
        }
    }
    for s in sums.iter_mut() {
        *s /= trials as f64;
    }
    Ok(PsthTable {
        bin_ms,
        window,
        bin_starts_ms: (0..num_bins)
            .map(|i| (window.start_us + i as i64 * bin_us) / 1000)
            .collect(),
        mean_counts: sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::PulseShape;

    fn stim(pulses: u8, amp: f64, dur: u32, delay: u32) -> ElectrodeStim {
        ElectrodeStim {
            num_pulses: pulses,
            phase_amplitude_ua: amp,
            phase_duration_us: dur,
            trigger_delay_us: delay,
            shape: PulseShape::BiphasicPositiveFirst,
        }
    }

    fn uniform_pattern(e: ElectrodeStim) -> StimPattern {
        StimPattern {
            electrodes: vec![e; NUM_ELECTRODES],
        }
    }

    fn default_model(seed: u64) -> OrganoidModel {
        build_organoid(seed, &OrganoidConfig::default()).unwrap()
    }

    #[test]
    fn same_seed_builds_identical_models() {
        assert_eq!(default_model(4), default_model(4));
    }

    #[test]
    fn different_seeds_build_different_couplings() {
        let a = default_model(1);
        let b = default_model(2);
        let dist: f64 = a
            .coupling
            .iter()
            .flatten()
            .zip(b.coupling.iter().flatten())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        assert!(libm::sqrt(dist) > 0.0);
    }

    #[test]
    fn diagonal_dominates_every_row() {
        for seed in 0..8 {
            let m = default_model(seed);
            for k in 0..NUM_ELECTRODES {
                let max_off = (0..NUM_ELECTRODES)
                    .filter(|&j| j != k)
                    .map(|j| m.coupling[k][j])
                    .fold(0.0, f64::max);
                assert!(m.coupling[k][k] > max_off, "seed {seed} row {k}");
            }
        }
    }

    #[test]
    fn stimulate_is_deterministic() {
        let m = default_model(0);
        let p = uniform_pattern(stim(5, 10.0, 150, 0));
        let a = stimulate(&m, &p, RecordingWindow::readout(), 77).unwrap();
        let b = stimulate(&m, &p, RecordingWindow::readout(), 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subthreshold_amplitude_evokes_nothing() {
        let m = default_model(0);
        for j in 0..NUM_ELECTRODES {
            assert_eq!(m.amplitude_gain(j, 2.0), 0.0);
            assert_eq!(m.amplitude_gain(j, 2.9), 0.0);
            // Thresholds stay at or below the 4 uA platform default.
            assert!(m.amplitude_gain(j, 4.0) > 0.0);
        }
        // With amplitude below every threshold only baseline spikes remain.
        let p = uniform_pattern(stim(10, 2.0, 300, 0));
        for k in 0..NUM_ELECTRODES {
            assert_eq!(m.channel_rate(k, &p), 0.0);
        }
    }

    #[test]
    fn amplitude_gain_saturates_per_electrode() {
        let m = default_model(0);
        for j in 0..NUM_ELECTRODES {
            let g_sat = m.amplitude_gain(j, m.amplitude_saturation_ua[j]);
            assert!(g_sat > 0.85 && g_sat < 1.0, "electrode {j} gain {g_sat}");
            assert!(m.amplitude_gain(j, 20.0) < 1.0 + 1e-12);
        }
    }

    #[test]
    fn rate_is_monotone_in_pulses_and_amplitude() {
        let m = default_model(3);
        for k in 0..NUM_ELECTRODES {
            let mut prev = -1.0;
            for n in 0..=10u8 {
                let r = m.channel_rate(k, &uniform_pattern(stim(n, 10.0, 150, 0)));
                assert!(r >= prev);
                prev = r;
            }
            let mut prev = -1.0;
            for a in 4..=20 {
                let r = m.channel_rate(k, &uniform_pattern(stim(5, a as f64, 150, 0)));
                assert!(r >= prev);
                prev = r;
            }
        }
    }

    #[test]
    fn trigger_delay_changes_timing_but_not_counts() {
        let m = default_model(9);
        let w = RecordingWindow::readout();
        let base = stimulate(&m, &uniform_pattern(stim(6, 12.0, 200, 0)), w, 5).unwrap();
        for delay in [500, 1000, 4000] {
            let shifted =
                stimulate(&m, &uniform_pattern(stim(6, 12.0, 200, delay)), w, 5).unwrap();
            for k in 0..NUM_ELECTRODES {
                assert_eq!(base.channels[k].len(), shifted.channels[k].len());
            }
        }
    }

    #[test]
    fn zero_pattern_yields_baseline_scaling_with_window() {
        let m = default_model(2);
        let rate = m.config.baseline_rate_hz * NUM_ELECTRODES as f64;
        let total = |end: i64, seeds: core::ops::Range<u64>| -> f64 {
            let n = seeds.end - seeds.start;
            seeds
                .map(|s| {
                    stimulate(&m, &silent_pattern(), RecordingWindow::new(0, end), s)
                        .unwrap()
                        .total() as f64
                })
                .sum::<f64>()
                / n as f64
        };
        let short = total(500_000, 0..400);
        let long = total(1_000_000, 0..400);
        assert!((short - rate * 0.5).abs() < 0.8, "short {short}");
        assert!((long - rate * 1.0).abs() < 1.2, "long {long}");
    }

    #[test]
    fn out_of_range_patterns_are_rejected() {
        let m = default_model(0);
        let w = RecordingWindow::readout();
        let too_many = uniform_pattern(stim(11, 4.0, 100, 0));
        assert!(matches!(
            stimulate(&m, &too_many, w, 0),
            Err(StimError::PatternOutOfRange { what: "pulse count", .. })
        ));
        let too_strong = uniform_pattern(stim(5, 23.0, 100, 0));
        assert!(matches!(
            stimulate(&m, &too_strong, w, 0),
            Err(StimError::PatternOutOfRange { what: "phase amplitude", .. })
        ));
        let short = StimPattern {
            electrodes: vec![ElectrodeStim::silent(); 3],
        };
        assert!(matches!(
            stimulate(&m, &short, w, 0),
            Err(StimError::WrongElectrodeCount(3))
        ));
    }

    #[test]
    fn spikes_are_sorted_and_inside_window() {
        let m = default_model(5);
        let w = RecordingWindow::peristimulus();
        let train = stimulate(&m, &uniform_pattern(stim(10, 20.0, 300, 4000)), w, 8).unwrap();
        for ch in &train.channels {
            assert!(ch.windows(2).all(|p| p[0] <= p[1]));
            assert!(ch.iter().all(|&t| t >= w.start_us && t < w.end_us));
        }
    }

    #[test]
    fn delay_sweep_counts_are_exactly_flat() {
        let m = default_model(1);
        let spec = SweepSpec::new(SweepParam::Delay, alloc::vec![0.0, 1000.0, 4000.0], 5);
        let table = run_sweep(&m, &spec, 123).unwrap();
        for e in 0..NUM_ELECTRODES {
            let t0 = table.total_mean(0, e);
            for v in 1..table.values.len() {
                assert_eq!(table.total_mean(v, e), t0);
            }
        }
    }

    #[test]
    fn sweep_value_zero_is_baseline() {
        let m = default_model(1);
        let spec = SweepSpec::new(SweepParam::Pulses, alloc::vec![0.0, 10.0], 10);
        let table = run_sweep(&m, &spec, 9).unwrap();
        assert!(table.grand_mean[1] > table.grand_mean[0] * 3.0);
        // Baseline mean near 3 Hz x 8 ch x 0.2 s = 4.8.
        assert!(table.grand_mean[0] < 8.0);
    }

    #[test]
    fn psth_rejects_bad_binning() {
        let m = default_model(0);
        assert!(matches!(
            psth(&m, &stim(1, 4.0, 100, 0), 2, 7, RecordingWindow::peristimulus(), 0),
            Err(StimError::BadBinning)
        ));
    }

    #[test]
    fn unstimulated_psth_is_flat() {
        let m = default_model(6);
        let table = psth(
            &m,
            &ElectrodeStim::silent(),
            200,
            50,
            RecordingWindow::peristimulus(),
            3,
        )
        .unwrap();
        let max = table.mean_counts.iter().cloned().fold(0.0, f64::max);
        let min = table.mean_counts.iter().cloned().fold(f64::INFINITY, f64::min);
        // All bins share the same baseline expectation (1.2 per bin).
        assert!(max - min < 0.6, "spread {}", max - min);
    }
}
