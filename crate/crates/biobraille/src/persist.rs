//! Table and record formats: CSV for plot-ready tables, JSON lines for
//! per-trial records, plain JSON for models, calibrations and reports.
//!
//! Numbers are written with Rust's shortest-roundtrip float formatting, so
//! reading a table back reproduces the original values exactly and repeated
//! runs of the same config produce byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use biobraille_core::braille::TrialLabel;
use biobraille_core::classify::{ClassifierKind, CvReport, ResponseVector};
use biobraille_core::encoder::{ElectrodeStim, StimPattern};
use biobraille_core::features::{RegionFeatureSet, RegionFeatures};
use biobraille_core::metrics::RadarSummary;
use biobraille_core::organoid::{PsthTable, SpikeTrain, SweepTable};
use biobraille_core::pipeline::{DecodingMode, RobustnessReport, SpatialResult};

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("json error on {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> PersistError {
    PersistError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> PersistError {
    PersistError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, PersistError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PersistError> {
    let mut writer = create(path)?;
    serde_json::to_writer_pretty(&mut writer, value).map_err(|e| PersistError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    writeln!(writer).map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PersistError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| PersistError::Json {
        path: path.display().to_string(),
        source: e,
    })
}

// ---------------------------------------------------------------------------
// region features

pub fn write_features_csv(
    path: &Path,
    rows: &[(TrialLabel, RegionFeatureSet)],
) -> Result<(), PersistError> {
    let mut w = create(path)?;
    writeln!(w, "letter,depth,trial,region,count,duration_us,peak_time_us,deviation")
        .map_err(|e| io_err(path, e))?;
    for (label, set) in rows {
        for (region, f) in set.regions.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                label.letter,
                label.depth_mm,
                label.trial_index,
                region,
                f.event_count,
                f.event_duration_us,
                f.peak_time_us,
                f.event_deviation
            )
            .map_err(|e| io_err(path, e))?;
        }
    }
    Ok(())
}

fn parse_label(
    path: &Path,
    line_no: usize,
    letter: &str,
    depth: &str,
    trial: &str,
) -> Result<TrialLabel, PersistError> {
    let letter: char = letter
        .parse()
        .map_err(|_| parse_err(path, line_no, format!("bad letter {letter:?}")))?;
    let depth: f64 = depth
        .parse()
        .map_err(|_| parse_err(path, line_no, format!("bad depth {depth:?}")))?;
    let trial: u8 = trial
        .parse()
        .map_err(|_| parse_err(path, line_no, format!("bad trial index {trial:?}")))?;
    TrialLabel::new(letter, depth, trial).map_err(|e| parse_err(path, line_no, e.to_string()))
}

pub fn read_features_csv(path: &Path) -> Result<Vec<(TrialLabel, RegionFeatureSet)>, PersistError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<(TrialLabel, RegionFeatureSet)> = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let line_no = idx + 1;
        if idx == 0 || line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(parse_err(path, line_no, format!("expected 8 fields, got {}", f.len())));
        }
        let label = parse_label(path, line_no, f[0], f[1], f[2])?;
        let region: usize = f[3]
            .parse()
            .map_err(|_| parse_err(path, line_no, "bad region index"))?;
        let features = RegionFeatures {
            event_count: f[4].parse().map_err(|_| parse_err(path, line_no, "bad count"))?,
            event_duration_us: f[5]
                .parse()
                .map_err(|_| parse_err(path, line_no, "bad duration"))?,
            peak_time_us: f[6]
                .parse()
                .map_err(|_| parse_err(path, line_no, "bad peak time"))?,
            event_deviation: f[7]
                .parse()
                .map_err(|_| parse_err(path, line_no, "bad deviation"))?,
        };
        let matches_last = rows.last().is_some_and(|(l, _)| {
            (l.letter, l.depth_mm, l.trial_index) == (label.letter, label.depth_mm, label.trial_index)
        });
        if !matches_last {
            rows.push((label, RegionFeatureSet { regions: Vec::new() }));
        }
        let set = &mut rows.last_mut().unwrap().1;
        if set.regions.len() != region {
            return Err(parse_err(
                path,
                line_no,
                format!("region {region} out of order (expected {})", set.regions.len()),
            ));
        }
        set.regions.push(features);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// stimulation patterns and spike trains (JSON lines)

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimRecord {
    pub letter: char,
    pub depth_mm: f64,
    pub trial: u8,
    pub electrodes: Vec<ElectrodeStim>,
}

impl StimRecord {
    pub fn label(&self) -> Result<TrialLabel, biobraille_core::braille::LabelError> {
        TrialLabel::new(self.letter, self.depth_mm, self.trial)
    }

    pub fn pattern(&self) -> StimPattern {
        StimPattern {
            electrodes: self.electrodes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeRecord {
    pub letter: char,
    pub depth_mm: f64,
    pub trial: u8,
    pub organoid: usize,
    pub channels: Vec<Vec<i64>>,
}

impl SpikeRecord {
    pub fn train(&self) -> SpikeTrain {
        SpikeTrain {
            channels: self.channels.clone(),
        }
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), PersistError> {
    let mut w = create(path)?;
    for record in records {
        serde_json::to_writer(&mut w, record).map_err(|e| PersistError::Json {
            path: path.display().to_string(),
            source: e,
        })?;
        writeln!(w).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PersistError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| parse_err(path, idx + 1, e.to_string()))?,
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// response vectors

pub fn write_responses_csv(path: &Path, rows: &[ResponseVector]) -> Result<(), PersistError> {
    let mut w = create(path)?;
    let dim = rows.first().map_or(0, |r| r.counts.len());
    let header: Vec<String> = (0..dim).map(|i| format!("c{i}")).collect();
    writeln!(w, "letter,depth,trial,{}", header.join(",")).map_err(|e| io_err(path, e))?;
    for rv in rows {
        let counts: Vec<String> = rv.counts.iter().map(|c| format!("{c}")).collect();
        writeln!(
            w,
            "{},{},{},{}",
            rv.label.letter,
            rv.label.depth_mm,
            rv.label.trial_index,
            counts.join(",")
        )
        .map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

pub fn read_responses_csv(path: &Path) -> Result<Vec<ResponseVector>, PersistError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    let mut dim = None;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let line_no = idx + 1;
        if idx == 0 || line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() < 4 {
            return Err(parse_err(path, line_no, "expected label plus counts"));
        }
        let label = parse_label(path, line_no, f[0], f[1], f[2])?;
        let counts: Result<Vec<f64>, _> = f[3..].iter().map(|v| v.parse::<f64>()).collect();
        let counts =
            counts.map_err(|_| parse_err(path, line_no, "bad count value"))?;
        if *dim.get_or_insert(counts.len()) != counts.len() {
            return Err(parse_err(path, line_no, "inconsistent vector dimension"));
        }
        out.push(ResponseVector { label, counts });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// classification reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub mode: String,
    pub classifier: ClassifierKind,
    pub folds: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

impl ClassifyReport {
    pub fn from_cv(mode: &str, report: &CvReport) -> Self {
        Self {
            mode: mode.to_string(),
            classifier: report.classifier,
            folds: report.folds,
            fold_accuracies: report.fold_accuracies.clone(),
            mean_accuracy: report.mean_accuracy,
        }
    }
}

/// Confusion matrix in long format: one row per (true, predicted) pair.
pub fn write_confusion_csv(path: &Path, report: &CvReport) -> Result<(), PersistError> {
    let mut w = create(path)?;
    writeln!(w, "true_letter,predicted_letter,count").map_err(|e| io_err(path, e))?;
    for (t, row) in report.confusion.iter().enumerate() {
        for (p, &count) in row.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                biobraille_core::braille::LETTERS[t],
                biobraille_core::braille::LETTERS[p],
                count
            )
            .map_err(|e| io_err(path, e))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// experiment tables

pub fn write_sweep_csv(path: &Path, table: &SweepTable) -> Result<(), PersistError> {
    let param = param_name(table.param);
    let mut w = create(path)?;
    writeln!(w, "param,value,stim_electrode,channel,mean_count").map_err(|e| io_err(path, e))?;
    for (vi, value) in table.values.iter().enumerate() {
        for (e, channels) in table.mean_counts[vi].iter().enumerate() {
            for (k, mean) in channels.iter().enumerate() {
                writeln!(w, "{param},{value},{e},{k},{mean}").map_err(|e| io_err(path, e))?;
            }
        }
    }
    Ok(())
}

pub fn write_sweep_summary_csv(path: &Path, table: &SweepTable) -> Result<(), PersistError> {
    let param = param_name(table.param);
    let mut w = create(path)?;
    writeln!(w, "param,value,grand_mean_total").map_err(|e| io_err(path, e))?;
    for (value, mean) in table.values.iter().zip(&table.grand_mean) {
        writeln!(w, "{param},{value},{mean}").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

pub fn param_name(param: biobraille_core::organoid::SweepParam) -> &'static str {
    use biobraille_core::organoid::SweepParam;
    match param {
        SweepParam::Pulses => "pulses",
        SweepParam::Amplitude => "amplitude",
        SweepParam::Duration => "duration",
        SweepParam::Delay => "delay",
    }
}

/// PSTH lines: one row per (parameter value, bin).
pub fn write_psth_csv(
    path: &Path,
    param: biobraille_core::organoid::SweepParam,
    lines: &[(f64, PsthTable)],
) -> Result<(), PersistError> {
    let mut w = create(path)?;
    writeln!(w, "param,value,bin_start_ms,mean_count").map_err(|e| io_err(path, e))?;
    for (value, table) in lines {
        for (start, mean) in table.bin_starts_ms.iter().zip(&table.mean_counts) {
            writeln!(w, "{},{value},{start},{mean}", param_name(param))
                .map_err(|e| io_err(path, e))?;
        }
    }
    Ok(())
}

pub fn write_spatial_metrics_csv(path: &Path, result: &SpatialResult) -> Result<(), PersistError> {
    let param = param_name(result.protocol.param);
    let mut w = create(path)?;
    writeln!(
        w,
        "param,value,electrode,silhouette_median,centroid_shift_um,mean_spike_count,zero_spike_trials"
    )
    .map_err(|e| io_err(path, e))?;
    for (vi, value) in result.protocol.values.iter().enumerate() {
        for e in 0..result.clusters[vi].len() {
            writeln!(
                w,
                "{param},{value},{e},{},{},{},{}",
                result.silhouette_medians[vi][e],
                result.shifts_um[vi][e],
                result.mean_counts[vi][e],
                result.clusters[vi][e].zero_spike_trials
            )
            .map_err(|err| io_err(path, err))?;
        }
    }
    Ok(())
}

pub fn write_silhouette_points_csv(path: &Path, result: &SpatialResult) -> Result<(), PersistError> {
    let param = param_name(result.protocol.param);
    let mut w = create(path)?;
    writeln!(w, "param,value,electrode,point,score").map_err(|e| io_err(path, e))?;
    for (vi, value) in result.protocol.values.iter().enumerate() {
        for (e, scores) in result.silhouette_points[vi].iter().enumerate() {
            for (i, s) in scores.iter().enumerate() {
                writeln!(w, "{param},{value},{e},{i},{s}").map_err(|err| io_err(path, err))?;
            }
        }
    }
    Ok(())
}

pub fn write_radar_csv(
    path: &Path,
    param: biobraille_core::organoid::SweepParam,
    radar: &RadarSummary,
) -> Result<(), PersistError> {
    const AXES: [&str; 3] = ["silhouette", "centroid_shift", "spike_count"];
    let mut w = create(path)?;
    writeln!(w, "param,value,axis,radius,polygon_area").map_err(|e| io_err(path, e))?;
    for (vi, value) in radar.values.iter().enumerate() {
        for (axis, radius) in AXES.iter().zip(radar.radii[vi]) {
            writeln!(
                w,
                "{},{value},{axis},{radius},{}",
                param_name(param),
                radar.areas[vi]
            )
            .map_err(|e| io_err(path, e))?;
        }
    }
    Ok(())
}

fn mode_name(mode: DecodingMode) -> String {
    match mode {
        DecodingMode::Single(i) => format!("single{i}"),
        DecodingMode::Ensemble => "ensemble".to_string(),
    }
}

/// Aggregated robustness table (Figure-style bar data) plus per-repeat runs.
pub fn write_robustness_csv(path: &Path, report: &RobustnessReport) -> Result<(), PersistError> {
    let mut w = create(path)?;
    writeln!(w, "mode,noise,clean_accuracy,mean_noised_accuracy,degradation")
        .map_err(|e| io_err(path, e))?;
    for row in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            mode_name(row.mode),
            row.kind.name(),
            row.clean_accuracy,
            row.mean_noised_accuracy,
            row.degradation
        )
        .map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

pub fn write_robustness_runs_csv(path: &Path, report: &RobustnessReport) -> Result<(), PersistError> {
    let mut w = create(path)?;
    writeln!(w, "mode,noise,repeat,accuracy").map_err(|e| io_err(path, e))?;
    for row in &report.rows {
        for (i, acc) in row.noised_accuracies.iter().enumerate() {
            writeln!(w, "{},{},{i},{acc}", mode_name(row.mode), row.kind.name())
                .map_err(|e| io_err(path, e))?;
        }
    }
    Ok(())
}

/// Heatmap matrix: one row per trial, one column per channel/region.
pub fn write_heatmap_csv(
    path: &Path,
    column_prefix: &str,
    rows: &[(TrialLabel, Vec<f64>)],
) -> Result<(), PersistError> {
    let mut w = create(path)?;
    let dim = rows.first().map_or(0, |(_, v)| v.len());
    let header: Vec<String> = (0..dim).map(|i| format!("{column_prefix}{i}")).collect();
    writeln!(w, "letter,depth,trial,{}", header.join(",")).map_err(|e| io_err(path, e))?;
    for (label, values) in rows {
        let cells: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
        writeln!(
            w,
            "{},{},{},{}",
            label.letter,
            label.depth_mm,
            label.trial_index,
            cells.join(",")
        )
        .map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use biobraille_core::features::RegionFeatures;

    fn label(letter: char, depth: f64, trial: u8) -> TrialLabel {
        TrialLabel::new(letter, depth, trial).unwrap()
    }

    #[test]
    fn features_csv_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let rows: Vec<(TrialLabel, RegionFeatureSet)> = vec![
            (
                label('A', 0.0, 0),
                RegionFeatureSet {
                    regions: (0..8)
                        .map(|r| RegionFeatures {
                            event_count: r as u64 * 10,
                            event_duration_us: 1000 + r as u64,
                            peak_time_us: 50_000 * r as u64,
                            event_deviation: r as f64 * 0.25 + 0.1,
                        })
                        .collect(),
                },
            ),
            (
                label('Z', 0.4, 9),
                RegionFeatureSet {
                    regions: (0..8)
                        .map(|r| RegionFeatures {
                            event_count: 7 + r as u64,
                            event_duration_us: 2_000_000,
                            peak_time_us: 1_950_000,
                            event_deviation: 13.75,
                        })
                        .collect(),
                },
            ),
        ];
        write_features_csv(&path, &rows).unwrap();
        assert_eq!(read_features_csv(&path).unwrap(), rows);
    }

    #[test]
    fn responses_csv_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("resp.csv");
        let rows = vec![
            ResponseVector {
                label: label('B', 0.1, 3),
                counts: vec![0.0, 1.5, 22.0, 7.25, 3.0, 0.0, 9.0, 4.0],
            },
            ResponseVector {
                label: label('C', 0.2, 4),
                counts: vec![5.0; 8],
            },
        ];
        write_responses_csv(&path, &rows).unwrap();
        assert_eq!(read_responses_csv(&path).unwrap(), rows);
    }

    #[test]
    fn stim_records_roundtrip_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stim.jsonl");
        let records = vec![StimRecord {
            letter: 'Q',
            depth_mm: 0.3,
            trial: 1,
            electrodes: vec![ElectrodeStim::silent(); 8],
        }];
        write_jsonl(&path, &records).unwrap();
        let back: Vec<StimRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn malformed_responses_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("resp.csv");
        std::fs::write(&path, "letter,depth,trial,c0\nA,0,0,abc\n").unwrap();
        match read_responses_csv(&path) {
            Err(PersistError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
