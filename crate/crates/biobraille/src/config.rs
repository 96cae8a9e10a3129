//! Experiment configuration: one JSON document that pins every parameter of
//! every stage. Re-running a persisted config reproduces all outputs
//! byte-for-byte.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use biobraille_core::braille::{DEPTHS_MM, LETTERS};
use biobraille_core::organoid::{
    PLATFORM_MAX_AMPLITUDE_UA, PLATFORM_MAX_DELAY_US, PLATFORM_MAX_DURATION_US,
    PLATFORM_MAX_PULSES,
};
use biobraille_core::pipeline::{BenchmarkConfig, RobustnessProtocol};

pub const SCHEMA_VERSION: u32 = 1;

/// Values swept by the three characterization protocols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    /// Single-parameter response sweeps (0 = spontaneous baseline row).
    pub sweep_trials: u32,
    pub sweep_pulses: Vec<f64>,
    pub sweep_amplitudes_ua: Vec<f64>,
    pub sweep_durations_us: Vec<f64>,
    pub sweep_delays_us: Vec<f64>,
    /// Peristimulus histograms.
    pub temporal_trials: u32,
    pub temporal_bin_ms: u32,
    pub temporal_pulses: Vec<f64>,
    pub temporal_amplitudes_ua: Vec<f64>,
    pub temporal_durations_us: Vec<f64>,
    /// Activity-centre protocol.
    pub spatial_trials: u32,
    pub spatial_baseline_windows: u32,
    pub spatial_pulses: Vec<f64>,
    pub spatial_amplitudes_ua: Vec<f64>,
    pub spatial_durations_us: Vec<f64>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            sweep_trials: 10,
            sweep_pulses: (0..=10).map(f64::from).collect(),
            sweep_amplitudes_ua: (0..=10).map(|i| f64::from(i) * 2.0).collect(),
            sweep_durations_us: (0..=8).map(|i| f64::from(i) * 25.0).collect(),
            sweep_delays_us: (0..=8).map(|i| f64::from(i) * 500.0).collect(),
            temporal_trials: 10,
            temporal_bin_ms: 50,
            temporal_pulses: vec![1.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            temporal_amplitudes_ua: vec![2.0, 4.0, 8.0, 12.0, 16.0, 20.0],
            temporal_durations_us: vec![25.0, 50.0, 100.0, 150.0, 200.0],
            spatial_trials: 100,
            spatial_baseline_windows: 100,
            spatial_pulses: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            spatial_amplitudes_ua: vec![4.0, 8.0, 12.0, 16.0, 20.0],
            spatial_durations_us: vec![50.0, 100.0, 150.0, 200.0, 250.0],
        }
    }
}

/// Top-level configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub master_seed: u64,
    pub benchmark: BenchmarkConfig,
    pub protocols: ProtocolConfig,
    pub robustness: RobustnessProtocol,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            master_seed: 1,
            benchmark: BenchmarkConfig::default(),
            protocols: ProtocolConfig::default(),
            robustness: RobustnessProtocol::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("cannot parse config {}: {e}", path.display()))?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        fs::write(path, self.to_canonical_json()?)?;
        Ok(())
    }

    pub fn to_canonical_json(&self) -> anyhow::Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Hex SHA-256 of the canonical JSON form; every archived table is keyed
    /// by this hash.
    pub fn hash(&self) -> String {
        let json = self.to_canonical_json().expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// One validation failure, with the path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigDiagnostic {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn check_values(
    diags: &mut Vec<ConfigDiagnostic>,
    field: &str,
    values: &[f64],
    max: f64,
    unit: &str,
    what: &str,
) {
    if values.is_empty() {
        diags.push(ConfigDiagnostic {
            field: field.into(),
            message: "value list is empty".into(),
        });
    }
    for (i, &v) in values.iter().enumerate() {
        if !(0.0..=max).contains(&v) {
            diags.push(ConfigDiagnostic {
                field: format!("{field}[{i}]"),
                message: format!("{v} {unit} exceeds {max} {unit} {what} range"),
            });
        }
    }
}

/// Range-checks every field against the platform limits. Returns all
/// violations, each naming its field path.
pub fn validate_config(config: &ExperimentConfig) -> Vec<ConfigDiagnostic> {
    let mut diags = Vec::new();

    if config.schema_version != SCHEMA_VERSION {
        diags.push(ConfigDiagnostic {
            field: "schema_version".into(),
            message: format!(
                "unsupported version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            ),
        });
    }

    let synth = &config.benchmark.synth;
    if synth.letters.is_empty() {
        diags.push(ConfigDiagnostic {
            field: "benchmark.synth.letters".into(),
            message: "letters list is empty".into(),
        });
    }
    for (i, l) in synth.letters.iter().enumerate() {
        if !LETTERS.contains(&l.to_ascii_uppercase()) {
            diags.push(ConfigDiagnostic {
                field: format!("benchmark.synth.letters[{i}]"),
                message: format!("{l:?} is not a Braille letter A-Z"),
            });
        }
    }
    for (i, d) in synth.depths_mm.iter().enumerate() {
        if !DEPTHS_MM.contains(d) {
            diags.push(ConfigDiagnostic {
                field: format!("benchmark.synth.depths_mm[{i}]"),
                message: format!("{d} mm is not one of the sampled depths {DEPTHS_MM:?}"),
            });
        }
    }
    if let Err(e) = synth.validate() {
        diags.push(ConfigDiagnostic {
            field: "benchmark.synth".into(),
            message: e.to_string(),
        });
    }

    let grid = &config.benchmark.grid;
    if grid.num_regions() != 8 {
        diags.push(ConfigDiagnostic {
            field: "benchmark.grid".into(),
            message: format!(
                "{}x{} grid has {} regions; the electrode array needs 8",
                grid.rows,
                grid.cols,
                grid.num_regions()
            ),
        });
    }

    if let Err(e) = config.benchmark.organoid.validate() {
        diags.push(ConfigDiagnostic {
            field: "benchmark.organoid".into(),
            message: e.to_string(),
        });
    }
    if config.benchmark.folds < 2 {
        diags.push(ConfigDiagnostic {
            field: "benchmark.folds".into(),
            message: "cross-validation needs at least 2 folds".into(),
        });
    }
    if !config.benchmark.organoid_seeds.is_empty() && config.benchmark.organoid_seeds.len() != 3 {
        diags.push(ConfigDiagnostic {
            field: "benchmark.organoid_seeds".into(),
            message: format!(
                "expected 0 (derive) or 3 seeds, got {}",
                config.benchmark.organoid_seeds.len()
            ),
        });
    }

    let p = &config.protocols;
    let max_pulses = PLATFORM_MAX_PULSES as f64;
    let max_dur = PLATFORM_MAX_DURATION_US as f64;
    let max_delay = PLATFORM_MAX_DELAY_US as f64;
    check_values(&mut diags, "protocols.sweep_pulses", &p.sweep_pulses, max_pulses, "pulses", "pulse-count");
    check_values(&mut diags, "protocols.sweep_amplitudes_ua", &p.sweep_amplitudes_ua, PLATFORM_MAX_AMPLITUDE_UA, "uA", "encoding");
    check_values(&mut diags, "protocols.sweep_durations_us", &p.sweep_durations_us, max_dur, "us", "duration");
    check_values(&mut diags, "protocols.sweep_delays_us", &p.sweep_delays_us, max_delay, "us", "delay");
    check_values(&mut diags, "protocols.temporal_pulses", &p.temporal_pulses, max_pulses, "pulses", "pulse-count");
    check_values(&mut diags, "protocols.temporal_amplitudes_ua", &p.temporal_amplitudes_ua, PLATFORM_MAX_AMPLITUDE_UA, "uA", "encoding");
    check_values(&mut diags, "protocols.temporal_durations_us", &p.temporal_durations_us, max_dur, "us", "duration");
    check_values(&mut diags, "protocols.spatial_pulses", &p.spatial_pulses, max_pulses, "pulses", "pulse-count");
    check_values(&mut diags, "protocols.spatial_amplitudes_ua", &p.spatial_amplitudes_ua, PLATFORM_MAX_AMPLITUDE_UA, "uA", "encoding");
    check_values(&mut diags, "protocols.spatial_durations_us", &p.spatial_durations_us, max_dur, "us", "duration");
    if p.temporal_bin_ms == 0 || 600 % p.temporal_bin_ms != 0 {
        diags.push(ConfigDiagnostic {
            field: "protocols.temporal_bin_ms".into(),
            message: format!("{} ms does not divide the 600 ms window", p.temporal_bin_ms),
        });
    }

    let r = &config.robustness;
    if !(0.0..=1.0).contains(&r.fraction) {
        diags.push(ConfigDiagnostic {
            field: "robustness.fraction".into(),
            message: format!("{} is not a fraction in [0, 1]", r.fraction),
        });
    }
    if r.channel_count > 8 {
        diags.push(ConfigDiagnostic {
            field: "robustness.channel_count".into(),
            message: format!("{} exceeds the 8 channels of one organoid", r.channel_count),
        });
    }
    if r.repeats == 0 {
        diags.push(ConfigDiagnostic {
            field: "robustness.repeats".into(),
            message: "at least one repeat required".into(),
        });
    }

    diags
}
