//! End-to-end experiment drivers: the Braille benchmark, the spatial
//! activity-centre protocol, and the noise-robustness harness.
//!
//! Everything here is a pure function of (config, master seed); the std
//! companion crate only adds file formats around these results.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::braille::TrialLabel;
use crate::classify::{
    cross_validate, cross_validate_paired, decode, ClassifierConfig, ClassifierKind, ClassifyError,
    CvReport, ResponseVector,
};
use crate::encoder::{calibrate, encode, ElectrodeStim, EncodeError, EncoderCalibration, StimPattern};
use crate::features::{extract_features, RegionFeatureSet, RegionGrid, DEFAULT_WINDOW_US};
use crate::metrics::{
    center_of_activity, centroid_shift, median, radar_summary, silhouette_scores, CaCluster,
    CenterOfActivity, MetricsError, RadarSummary,
};
use crate::noise::{apply_noise, NoiseError, NoiseKind, NoiseSpec};
use crate::organoid::{
    build_organoid, psth, silent_pattern, stimulate, OrganoidConfig, OrganoidModel, PsthTable,
    RecordingWindow, StimError, SweepParam, NUM_ELECTRODES,
};
use crate::rng::{self, tag};
use crate::synth::{for_each_trial, SynthConfig, SynthError};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PipelineError {
    #[error("synthesis stage failed: {0}")]
    Synth(#[from] SynthError),
    #[error("encoding stage failed: {0}")]
    Encode(#[from] EncodeError),
    #[error("simulation stage failed: {0}")]
    Stim(#[from] StimError),
    #[error("metrics stage failed: {0}")]
    Metrics(#[from] MetricsError),
    #[error("classification stage failed: {0}")]
    Classify(#[from] ClassifyError),
    #[error("noise stage failed: {0}")]
    Noise(#[from] NoiseError),
}

/// Full configuration of the Braille benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub synth: SynthConfig,
    pub grid: RegionGrid,
    pub feature_window_us: u64,
    pub organoid: OrganoidConfig,
    /// Model seeds; when empty, three seeds are derived from the master seed.
    pub organoid_seeds: Vec<u64>,
    /// When true, all organoids share trial noise streams (a redundant-copy
    /// configuration used to sanity-check the ensemble).
    pub shared_trial_noise: bool,
    pub classifier: ClassifierConfig,
    pub folds: usize,
    pub readout: RecordingWindow,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            grid: RegionGrid::default(),
            feature_window_us: DEFAULT_WINDOW_US,
            organoid: OrganoidConfig::default(),
            organoid_seeds: Vec::new(),
            shared_trial_noise: false,
            classifier: ClassifierConfig::default(),
            folds: 5,
            readout: RecordingWindow::readout(),
        }
    }
}

impl BenchmarkConfig {
    pub fn resolved_organoid_seeds(&self, master_seed: u64) -> Vec<u64> {
        if self.organoid_seeds.is_empty() {
            (0..3)
                .map(|i| rng::derive_seed(master_seed, &[tag::ORGANOID, i]))
                .collect()
        } else {
            self.organoid_seeds.clone()
        }
    }
}

/// Generates the synthetic dataset and extracts per-trial region features.
pub fn dataset_features(
    config: &BenchmarkConfig,
    master_seed: u64,
) -> Result<Vec<(TrialLabel, RegionFeatureSet)>, PipelineError> {
    let mut out = Vec::new();
    for_each_trial::<PipelineError, _>(&config.synth, master_seed, |label, stream| {
        out.push((
            label,
            extract_features(&stream, &config.grid, config.feature_window_us),
        ));
        Ok(())
    })?;
    Ok(out)
}

/// Encodes every trial with a dataset-wide calibration.
pub fn encode_dataset(
    features: &[(TrialLabel, RegionFeatureSet)],
    cal: &EncoderCalibration,
) -> Vec<(TrialLabel, StimPattern)> {
    features
        .iter()
        .map(|(label, f)| (*label, encode(f, cal)))
        .collect()
}

/// Simulated per-organoid and ensemble response vectors for a stimulation
/// dataset.
pub struct SimulatedResponses {
    pub singles: Vec<Vec<ResponseVector>>,
    pub ensemble: Vec<ResponseVector>,
}

pub fn simulate_responses(
    patterns: &[(TrialLabel, StimPattern)],
    models: &[OrganoidModel],
    readout: RecordingWindow,
    master_seed: u64,
    shared_trial_noise: bool,
) -> Result<SimulatedResponses, PipelineError> {
    let mut singles: Vec<Vec<ResponseVector>> = vec![Vec::new(); models.len()];
    let mut ensemble: Vec<ResponseVector> = Vec::new();
    for (trial_idx, (label, pattern)) in patterns.iter().enumerate() {
        let mut combined: Vec<f64> = Vec::with_capacity(models.len() * NUM_ELECTRODES);
        for (org_idx, model) in models.iter().enumerate() {
            let noise_key = if shared_trial_noise { 0 } else { org_idx as u64 };
            let sim_seed = rng::derive_seed(master_seed, &[tag::SIM, noise_key, trial_idx as u64]);
            let train = stimulate(model, pattern, readout, sim_seed)?;
            let counts = decode(&[&train], readout);
            combined.extend_from_slice(&counts);
            singles[org_idx].push(ResponseVector {
                label: *label,
                counts,
            });
        }
        ensemble.push(ResponseVector {
            label: *label,
            counts: combined,
        });
    }
    Ok(SimulatedResponses { singles, ensemble })
}

/// Cross-validation reports for single-organoid and ensemble decoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReports {
    /// reports[k] = (classifier, per-organoid single reports, ensemble report)
    pub by_classifier: Vec<(ClassifierKind, Vec<CvReport>, CvReport)>,
}

impl BenchmarkReports {
    pub fn get(&self, kind: ClassifierKind) -> Option<&(ClassifierKind, Vec<CvReport>, CvReport)> {
        self.by_classifier.iter().find(|(k, _, _)| *k == kind)
    }
}

/// Everything the Braille benchmark produces for one master seed.
pub struct BenchmarkOutput {
    pub calibration: EncoderCalibration,
    pub organoid_seeds: Vec<u64>,
    pub features: Vec<(TrialLabel, RegionFeatureSet)>,
    pub responses: SimulatedResponses,
    pub reports: BenchmarkReports,
}

/// Runs the full pipeline: synthesize, featurize, calibrate, encode,
/// stimulate every organoid, decode, and cross-validate both decoding modes
/// with the requested classifiers.
pub fn run_braille_benchmark(
    config: &BenchmarkConfig,
    master_seed: u64,
    kinds: &[ClassifierKind],
) -> Result<BenchmarkOutput, PipelineError> {
    let features = dataset_features(config, master_seed)?;
    let feature_sets: Vec<RegionFeatureSet> = features.iter().map(|(_, f)| f.clone()).collect();
    let calibration = calibrate(&feature_sets)?;
    let patterns = encode_dataset(&features, &calibration);

    let organoid_seeds = config.resolved_organoid_seeds(master_seed);
    let models: Vec<OrganoidModel> = organoid_seeds
        .iter()
        .map(|&s| build_organoid(s, &config.organoid))
        .collect::<Result<_, _>>()?;

    let responses = simulate_responses(
        &patterns,
        &models,
        config.readout,
        master_seed,
        config.shared_trial_noise,
    )?;

    // One CV seed for every mode: identical fold assignments make the
    // single-vs-ensemble comparison a paired one.
    let cv_seed = rng::derive_seed(master_seed, &[tag::CV]);
    let mut by_classifier = Vec::new();
    for &kind in kinds {
        let mut single_reports = Vec::new();
        for single in &responses.singles {
            single_reports.push(cross_validate(
                single,
                kind,
                &config.classifier,
                config.folds,
                cv_seed,
            )?);
        }
        let ensemble_report = cross_validate(
            &responses.ensemble,
            kind,
            &config.classifier,
            config.folds,
            cv_seed,
        )?;
        by_classifier.push((kind, single_reports, ensemble_report));
    }

    Ok(BenchmarkOutput {
        calibration,
        organoid_seeds,
        features,
        responses,
        reports: BenchmarkReports { by_classifier },
    })
}

// ---------------------------------------------------------------------------
// spatial protocol

/// Protocol of the spatial activity-centre experiment: one parameter swept
/// over a value grid, each electrode stimulated alone, `trials` repetitions
/// per condition, plus a spontaneous baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialProtocol {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub trials: u32,
    pub window: RecordingWindow,
    pub baseline_windows: u32,
}

impl SpatialProtocol {
    pub fn new(param: SweepParam, values: Vec<f64>, trials: u32) -> Self {
        Self {
            param,
            values,
            trials,
            window: RecordingWindow::readout(),
            baseline_windows: 100,
        }
    }

    /// Stimulus applied to the probed electrode: swept parameter plus the
    /// spatial-protocol defaults (5 pulses, 10 uA, 150 us).
    pub fn electrode_stim(&self, value: f64) -> ElectrodeStim {
        let mut stim = ElectrodeStim {
            num_pulses: 5,
            phase_amplitude_ua: 10.0,
            phase_duration_us: 150,
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

/// Results of the spatial experiment, indexed `[value][electrode]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialResult {
    pub protocol: SpatialProtocol,
    pub baseline_centroid: CenterOfActivity,
    pub baseline_windows_used: u32,
    pub baseline_windows_excluded: u32,
    pub clusters: Vec<Vec<CaCluster>>,
    /// Per-point silhouette scores, one distribution per cluster.
    pub silhouette_points: Vec<Vec<Vec<f64>>>,
    pub silhouette_medians: Vec<Vec<f64>>,
    pub shifts_um: Vec<Vec<f64>>,
    pub mean_counts: Vec<Vec<f64>>,
    pub radar: RadarSummary,
}

/// Spontaneous-activity baseline centroid over at least `windows` unstimulated
/// readout windows; windows without spikes are excluded and counted.
pub fn spontaneous_baseline(
    model: &OrganoidModel,
    window: RecordingWindow,
    windows: u32,
    seed: u64,
) -> Result<(CenterOfActivity, u32, u32), PipelineError> {
    let pattern = silent_pattern();
    let mut xs = 0.0;
    let mut ys = 0.0;
    let mut used = 0u32;
    let mut excluded = 0u32;
    for w in 0..windows {
        let train = stimulate(
            model,
            &pattern,
            window,
            rng::derive_seed(seed, &[tag::SPONTANEOUS, w as u64]),
        )?;
        let counts: Vec<f64> = train.counts_in(window).into_iter().map(|c| c as f64).collect();
        match center_of_activity(&counts, &model.config.layout) {
            Ok(ca) => {
                xs += ca.x;
                ys += ca.y;
                used += 1;
            }
            Err(MetricsError::UndefinedCenter) => excluded += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if used == 0 {
        return Err(MetricsError::UndefinedCenter.into());
    }
    Ok((
        CenterOfActivity {
            x: xs / used as f64,
            y: ys / used as f64,
        },
        used,
        excluded,
    ))
}

/// Runs the spatial protocol on one model.
pub fn run_spatial(
    model: &OrganoidModel,
    protocol: &SpatialProtocol,
    seed: u64,
) -> Result<SpatialResult, PipelineError> {
    let (baseline_centroid, used, excluded) =
        spontaneous_baseline(model, protocol.window, protocol.baseline_windows, seed)?;

    let mut clusters: Vec<Vec<CaCluster>> = Vec::with_capacity(protocol.values.len());
    let mut mean_counts: Vec<Vec<f64>> = Vec::with_capacity(protocol.values.len());
    for (vi, &value) in protocol.values.iter().enumerate() {
        let mut row = Vec::with_capacity(NUM_ELECTRODES);
        let mut count_row = Vec::with_capacity(NUM_ELECTRODES);
        for electrode in 0..NUM_ELECTRODES {
            let mut pattern = silent_pattern();
            pattern.electrodes[electrode] = protocol.electrode_stim(value);
            let mut points = Vec::with_capacity(protocol.trials as usize);
            let mut zero_spike_trials = 0u32;
            let mut total = 0.0;
            for trial in 0..protocol.trials {
                let train = stimulate(
                    model,
                    &pattern,
                    protocol.window,
                    rng::derive_seed(
                        seed,
                        &[tag::SPATIAL, electrode as u64, vi as u64, trial as u64],
                    ),
                )?;
                let counts: Vec<f64> =
                    train.counts_in(protocol.window).into_iter().map(|c| c as f64).collect();
                total += counts.iter().sum::<f64>();
                match center_of_activity(&counts, &model.config.layout) {
                    Ok(ca) => points.push(ca),
                    Err(MetricsError::UndefinedCenter) => zero_spike_trials += 1,
                    Err(e) => return Err(e.into()),
                }
            }
            count_row.push(total / protocol.trials as f64);
            row.push(CaCluster {
                electrode,
                parameter_value: value,
                points,
                zero_spike_trials,
            });
        }
        clusters.push(row);
        mean_counts.push(count_row);
    }

    let mut silhouette_points = Vec::with_capacity(protocol.values.len());
    let mut silhouette_medians = Vec::with_capacity(protocol.values.len());
    let mut shifts_um = Vec::with_capacity(protocol.values.len());
    for row in &clusters {
        let point_sets: Vec<Vec<CenterOfActivity>> =
            row.iter().map(|c| c.points.clone()).collect();
        let scores = silhouette_scores(&point_sets)?;
        silhouette_medians.push(scores.iter().map(|s| median(s)).collect());
        silhouette_points.push(scores);
        let shifts: Result<Vec<f64>, MetricsError> = row
            .iter()
            .map(|c| centroid_shift(c, &baseline_centroid, &model.config.layout))
            .collect();
        shifts_um.push(shifts?);
    }

    let radar = radar_summary(
        &protocol.values,
        &silhouette_medians,
        &shifts_um,
        &mean_counts,
    );

    Ok(SpatialResult {
        protocol: protocol.clone(),
        baseline_centroid,
        baseline_windows_used: used,
        baseline_windows_excluded: excluded,
        clusters,
        silhouette_points,
        silhouette_medians,
        shifts_um,
        mean_counts,
        radar,
    })
}

// ---------------------------------------------------------------------------
// temporal protocol

/// PSTH lines for a swept parameter: all electrodes stimulated with identical
/// settings, one line per value.
pub fn run_temporal(
    model: &OrganoidModel,
    param: SweepParam,
    values: &[f64],
    trials: u32,
    bin_ms: u32,
    seed: u64,
) -> Result<Vec<(f64, PsthTable)>, PipelineError> {
    let mut out = Vec::with_capacity(values.len());
    for (vi, &value) in values.iter().enumerate() {
        let mut stim = ElectrodeStim {
            num_pulses: 1,
            phase_amplitude_ua: 4.0,
            phase_duration_us: 100,
            trigger_delay_us: 0,
            ..ElectrodeStim::silent()
        };
        match param {
            SweepParam::Pulses => stim.num_pulses = libm::round(value) as u8,
            SweepParam::Amplitude => stim.phase_amplitude_ua = value,
            SweepParam::Duration => stim.phase_duration_us = libm::round(value) as u32,
            SweepParam::Delay => stim.trigger_delay_us = libm::round(value) as u32,
        }
        let table = psth(
            model,
            &stim,
            trials,
            bin_ms,
            RecordingWindow::peristimulus(),
            rng::derive_seed(seed, &[tag::TRIAL, vi as u64]),
        )?;
        out.push((value, table));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// robustness

/// Where noise is injected relative to the train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseApplication {
    /// Noise the whole dataset before splitting (train and test).
    All,
    /// Train on clean data, test on noised data.
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobustnessProtocol {
    pub kinds: Vec<NoiseKind>,
    pub repeats: u32,
    pub fraction: f64,
    pub channel_count: usize,
    pub scale: f64,
    pub outlier_factor: f64,
    pub apply_to: NoiseApplication,
}

impl Default for RobustnessProtocol {
    fn default() -> Self {
        Self {
            kinds: NoiseKind::ALL.to_vec(),
            repeats: 10,
            fraction: 0.4,
            channel_count: 4,
            scale: 0.4,
            outlier_factor: 3.0,
            apply_to: NoiseApplication::All,
        }
    }
}

/// Which decoding mode a robustness row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodingMode {
    Single(usize),
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub mode: DecodingMode,
    pub kind: NoiseKind,
    pub clean_accuracy: f64,
    pub noised_accuracies: Vec<f64>,
    pub mean_noised_accuracy: f64,
    /// clean - mean noised, in accuracy fraction.
    pub degradation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub protocol: RobustnessProtocol,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessReport {
    pub fn row(&self, mode: DecodingMode, kind: NoiseKind) -> Option<&RobustnessRow> {
        self.rows.iter().find(|r| r.mode == mode && r.kind == kind)
    }

    /// Mean degradation of the single-organoid modes for one noise kind.
    pub fn mean_single_degradation(&self, kind: NoiseKind) -> f64 {
        let singles: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.kind == kind && matches!(r.mode, DecodingMode::Single(_)))
            .map(|r| r.degradation)
            .collect();
        singles.iter().sum::<f64>() / singles.len().max(1) as f64
    }

    pub fn ensemble_degradation(&self, kind: NoiseKind) -> f64 {
        self.row(DecodingMode::Ensemble, kind)
            .map(|r| r.degradation)
            .unwrap_or(f64::NAN)
    }
}

/// Evaluates SVM accuracy under every noise kind for single-organoid and
/// ensemble decoding. Noise seeds are shared across modes within one
/// (kind, repeat) cell so single and ensemble see comparable draws.
pub fn run_robustness(
    responses: &SimulatedResponses,
    classifier: &ClassifierConfig,
    folds: usize,
    protocol: &RobustnessProtocol,
    seed: u64,
) -> Result<RobustnessReport, PipelineError> {
    let mut modes: Vec<(DecodingMode, &[ResponseVector])> = Vec::new();
    for (i, single) in responses.singles.iter().enumerate() {
        modes.push((DecodingMode::Single(i), single));
    }
    modes.push((DecodingMode::Ensemble, &responses.ensemble));

    let mut rows = Vec::new();
    for (mode_idx, (mode, dataset)) in modes.iter().enumerate() {
        let cv_seed = rng::derive_seed(seed, &[tag::CV, mode_idx as u64]);
        let clean = cross_validate(dataset, ClassifierKind::Svm, classifier, folds, cv_seed)?;
        for (kind_idx, &kind) in protocol.kinds.iter().enumerate() {
            let mut noised_accuracies = Vec::with_capacity(protocol.repeats as usize);
            for rep in 0..protocol.repeats {
                let spec = NoiseSpec {
                    kind,
                    fraction: protocol.fraction,
                    channel_count: protocol.channel_count,
                    scale: protocol.scale,
                    outlier_factor: protocol.outlier_factor,
                    seed: rng::derive_seed(seed, &[tag::ROBUST, kind_idx as u64, rep as u64]),
                };
                let (noised, _) = apply_noise(dataset, &spec)?;
                let report = match protocol.apply_to {
                    NoiseApplication::All => cross_validate(
                        &noised,
                        ClassifierKind::Svm,
                        classifier,
                        folds,
                        cv_seed,
                    )?,
                    NoiseApplication::Test => cross_validate_paired(
                        dataset,
                        &noised,
                        ClassifierKind::Svm,
                        classifier,
                        folds,
                        cv_seed,
                    )?,
                };
                noised_accuracies.push(report.mean_accuracy);
            }
            let mean_noised =
                noised_accuracies.iter().sum::<f64>() / noised_accuracies.len().max(1) as f64;
            rows.push(RobustnessRow {
                mode: *mode,
                kind,
                clean_accuracy: clean.mean_accuracy,
                noised_accuracies,
                mean_noised_accuracy: mean_noised,
                degradation: clean.mean_accuracy - mean_noised,
            });
        }
    }
    Ok(RobustnessReport {
        protocol: protocol.clone(),
        rows,
    })
}
