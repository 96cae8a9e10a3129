//! Data-path commands: synthesize recordings, extract features, encode
//! stimulation, simulate spike responses.

use std::path::{Path, PathBuf};

use anyhow::Context;

use biobraille_core::braille::TrialLabel;
use biobraille_core::classify::{decode, ResponseVector};
use biobraille_core::encoder::calibrate;
use biobraille_core::features::{extract_features, RegionGrid};
use biobraille_core::organoid::{build_organoid, stimulate, OrganoidModel, RecordingWindow};
use biobraille_core::rng::{self, tag};
use biobraille_core::synth::for_each_trial;

use super::Workspace;
use crate::aer;
use crate::persist::{self, SpikeRecord, StimRecord};

/// File name for one trial: `<letter>_<depth>_<trial>.aer`.
pub fn trial_file_name(label: &TrialLabel) -> String {
    format!("{}_{}_{:02}.aer", label.letter, label.depth_mm, label.trial_index)
}

fn label_from_file_name(name: &str) -> anyhow::Result<TrialLabel> {
    let stem = name
        .strip_suffix(".aer")
        .with_context(|| format!("{name:?} is not an .aer file"))?;
    let parts: Vec<&str> = stem.split('_').collect();
    anyhow::ensure!(parts.len() == 3, "{name:?} does not match <letter>_<depth>_<trial>.aer");
    let letter: char = parts[0].parse().with_context(|| format!("bad letter in {name:?}"))?;
    let depth: f64 = parts[1].parse().with_context(|| format!("bad depth in {name:?}"))?;
    let trial: u8 = parts[2].parse().with_context(|| format!("bad trial in {name:?}"))?;
    Ok(TrialLabel::new(letter, depth, trial)?)
}

/// Generates the configured dataset as one `.aer` file per trial, plus a
/// manifest table.
pub fn cmd_synth(ws: &Workspace, dir: Option<&Path>) -> anyhow::Result<Vec<PathBuf>> {
    let out_dir = dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ws.path("aer"));
    std::fs::create_dir_all(&out_dir)?;

    let manifest_path = ws.path("synth_manifest.csv");
    let mut manifest = persist::create(&manifest_path)?;
    use std::io::Write;
    writeln!(manifest, "file,letter,depth,trial,events")?;

    let synth = &ws.config.benchmark.synth;
    let master = ws.config.master_seed;
    for_each_trial::<anyhow::Error, _>(synth, master, |label, stream| {
        let name = trial_file_name(&label);
        let file = std::fs::File::create(out_dir.join(&name))?;
        let mut writer = std::io::BufWriter::new(file);
        aer::write_aer(&stream, &mut writer)?;
        writeln!(
            manifest,
            "{name},{},{},{},{}",
            label.letter,
            label.depth_mm,
            label.trial_index,
            stream.len()
        )?;
        Ok(())
    })
    .with_context(|| format!("stage synth failed (config {})", ws.config.hash()))?;
    drop(manifest);
    ws.record("synth", &manifest_path)?;
    Ok(vec![manifest_path, out_dir])
}

/// Reads every `.aer` file in a directory (sorted by name) and writes the
/// per-region feature table.
pub fn cmd_features(
    ws: &Workspace,
    in_dir: &Path,
    grid: RegionGrid,
    window_ms: u32,
    out_file: Option<&Path>,
) -> anyhow::Result<PathBuf> {
    let mut names: Vec<String> = std::fs::read_dir(in_dir)
        .with_context(|| format!("cannot read input directory {}", in_dir.display()))?
        .filter_map(|entry| {
            let name = entry.ok()?.file_name().to_string_lossy().into_owned();
            name.ends_with(".aer").then_some(name)
        })
        .collect();
    names.sort();
    anyhow::ensure!(!names.is_empty(), "no .aer files in {}", in_dir.display());

    let mut rows = Vec::with_capacity(names.len());
    for name in names {
        let label = label_from_file_name(&name)?;
        let file = std::fs::File::open(in_dir.join(&name))?;
        let stream = ws.stage("features", aer::read_aer(std::io::BufReader::new(file)))?;
        rows.push((
            label,
            extract_features(&stream, &grid, window_ms as u64 * 1000),
        ));
    }

    let path = out_file
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ws.path("features.csv"));
    persist::write_features_csv(&path, &rows)?;
    ws.record("features", &path)?;
    Ok(path)
}

/// Encodes a feature table into stimulation patterns. The calibration file is
/// loaded when it exists and computed (and persisted) from the given features
/// otherwise.
pub fn cmd_encode(
    ws: &Workspace,
    features_path: &Path,
    cal_path: &Path,
    out_file: Option<&Path>,
) -> anyhow::Result<PathBuf> {
    let rows = persist::read_features_csv(features_path)?;
    let cal = if cal_path.exists() {
        persist::read_json(cal_path)?
    } else {
        let sets: Vec<_> = rows.iter().map(|(_, f)| f.clone()).collect();
        let cal = ws.stage("encode", calibrate(&sets))?;
        persist::write_json(cal_path, &cal)?;
        ws.record("encode", cal_path)?;
        cal
    };

    let records: Vec<StimRecord> = rows
        .iter()
        .map(|(label, features)| {
            let pattern = biobraille_core::encoder::encode(features, &cal);
            StimRecord {
                letter: label.letter,
                depth_mm: label.depth_mm,
                trial: label.trial_index,
                electrodes: pattern.electrodes,
            }
        })
        .collect();

    let path = out_file
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ws.path("stim.jsonl"));
    persist::write_jsonl(&path, &records)?;
    ws.record("encode", &path)?;
    Ok(path)
}

/// Loads an organoid model, or builds and persists one from a seed when the
/// file does not exist yet.
pub fn load_or_build_model(
    ws: &Workspace,
    model_path: &Path,
    seed: Option<u64>,
) -> anyhow::Result<OrganoidModel> {
    if model_path.exists() {
        Ok(persist::read_json(model_path)?)
    } else {
        let seed = seed.unwrap_or_else(|| {
            ws.config
                .benchmark
                .resolved_organoid_seeds(ws.config.master_seed)[0]
        });
        let model = ws.stage(
            "sim",
            build_organoid(seed, &ws.config.benchmark.organoid),
        )?;
        persist::write_json(model_path, &model)?;
        ws.record("sim", model_path)?;
        Ok(model)
    }
}

/// Applies every stimulation pattern in a JSONL file to one organoid and
/// writes the spike trains plus decoded response vectors.
pub fn cmd_sim(
    ws: &Workspace,
    model_path: &Path,
    model_seed: Option<u64>,
    stim_path: &Path,
    organoid_index: usize,
    window_ms: u32,
    out_spikes: Option<&Path>,
    out_responses: Option<&Path>,
) -> anyhow::Result<Vec<PathBuf>> {
    let model = load_or_build_model(ws, model_path, model_seed)?;
    let records: Vec<StimRecord> = persist::read_jsonl(stim_path)?;
    let window = RecordingWindow::new(0, window_ms as i64 * 1000);

    let mut spikes = Vec::with_capacity(records.len());
    let mut responses = Vec::with_capacity(records.len());
    for (trial_idx, record) in records.iter().enumerate() {
        let label = ws.stage("sim", record.label())?;
        let trial_seed = rng::derive_seed(
            ws.config.master_seed,
            &[tag::SIM, organoid_index as u64, trial_idx as u64],
        );
        let train = ws.stage("sim", stimulate(&model, &record.pattern(), window, trial_seed))?;
        responses.push(ResponseVector {
            label,
            counts: decode(&[&train], window),
        });
        spikes.push(SpikeRecord {
            letter: record.letter,
            depth_mm: record.depth_mm,
            trial: record.trial,
            organoid: organoid_index,
            channels: train.channels,
        });
    }

    let spikes_path = out_spikes
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ws.path("spikes.jsonl"));
    persist::write_jsonl(&spikes_path, &spikes)?;
    ws.record("sim", &spikes_path)?;

    let mut written = vec![spikes_path];
    if let Some(resp) = out_responses {
        persist::write_responses_csv(resp, &responses)?;
        ws.record("sim", resp)?;
        written.push(resp.to_path_buf());
    }
    Ok(written)
}
