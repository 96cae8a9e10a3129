//! The full Braille benchmark: synthesize, featurize, encode, stimulate all
//! three organoids, decode, classify, and emit every table the downstream
//! figures need.

use std::path::PathBuf;

use biobraille_core::classify::ClassifierKind;
use biobraille_core::organoid::build_organoid;
use biobraille_core::pipeline::run_braille_benchmark;

use super::analysis::classifier_file_name;
use super::Workspace;
use crate::persist::{self, ClassifyReport, StimRecord};

/// Runs the complete pipeline for the configured dataset and classifiers.
pub fn cmd_braille(ws: &Workspace) -> anyhow::Result<Vec<PathBuf>> {
    let kinds = [
        ClassifierKind::Knn,
        ClassifierKind::Svm,
        ClassifierKind::Forest,
    ];
    let config = &ws.config.benchmark;
    let master = ws.config.master_seed;
    let output = ws.stage("braille", run_braille_benchmark(config, master, &kinds))?;

    let mut written = Vec::new();
    let mut emit = |path: PathBuf| -> anyhow::Result<PathBuf> {
        ws.record("braille", &path)?;
        written.push(path.clone());
        Ok(path)
    };

    // Inputs and intermediate products.
    persist::write_features_csv(&ws.path("features.csv"), &output.features)?;
    emit(ws.path("features.csv"))?;
    persist::write_json(&ws.path("cal.json"), &output.calibration)?;
    emit(ws.path("cal.json"))?;

    let patterns = biobraille_core::pipeline::encode_dataset(&output.features, &output.calibration);
    let stim_records: Vec<StimRecord> = patterns
        .iter()
        .map(|(label, pattern)| StimRecord {
            letter: label.letter,
            depth_mm: label.depth_mm,
            trial: label.trial_index,
            electrodes: pattern.electrodes.clone(),
        })
        .collect();
    persist::write_jsonl(&ws.path("stim.jsonl"), &stim_records)?;
    emit(ws.path("stim.jsonl"))?;

    for (i, &seed) in output.organoid_seeds.iter().enumerate() {
        let model = ws.stage("braille", build_organoid(seed, &config.organoid))?;
        persist::write_json(&ws.path(&format!("organoid{i}.json")), &model)?;
        emit(ws.path(&format!("organoid{i}.json")))?;
    }

    // Response vectors per decoding mode.
    for (i, single) in output.responses.singles.iter().enumerate() {
        persist::write_responses_csv(&ws.path(&format!("responses_single{i}.csv")), single)?;
        emit(ws.path(&format!("responses_single{i}.csv")))?;
    }
    persist::write_responses_csv(&ws.path("responses_ensemble.csv"), &output.responses.ensemble)?;
    emit(ws.path("responses_ensemble.csv"))?;

    // Input/output heatmap matrices (per-trial region counts and channel
    // counts).
    let input_rows: Vec<_> = output
        .features
        .iter()
        .map(|(label, set)| {
            (
                *label,
                set.regions.iter().map(|r| r.event_count as f64).collect::<Vec<f64>>(),
            )
        })
        .collect();
    persist::write_heatmap_csv(&ws.path("input_heatmap.csv"), "region", &input_rows)?;
    emit(ws.path("input_heatmap.csv"))?;
    let output_rows: Vec<_> = output
        .responses
        .ensemble
        .iter()
        .map(|rv| (rv.label, rv.counts.clone()))
        .collect();
    persist::write_heatmap_csv(&ws.path("output_heatmap.csv"), "channel", &output_rows)?;
    emit(ws.path("output_heatmap.csv"))?;

    // Classification reports: three single modes plus the ensemble, for each
    // classifier.
    for (kind, singles, ensemble) in &output.reports.by_classifier {
        let clf = classifier_file_name(*kind);
        for (i, report) in singles.iter().enumerate() {
            let stem = format!("report_single{i}_{clf}");
            let mode = format!("single{i}");
            persist::write_json(&ws.path(&format!("{stem}.json")), &ClassifyReport::from_cv(&mode, report))?;
            emit(ws.path(&format!("{stem}.json")))?;
            persist::write_confusion_csv(&ws.path(&format!("{stem}_confusion.csv")), report)?;
            emit(ws.path(&format!("{stem}_confusion.csv")))?;
        }
        let stem = format!("report_ensemble_{clf}");
        persist::write_json(
            &ws.path(&format!("{stem}.json")),
            &ClassifyReport::from_cv("ensemble", ensemble),
        )?;
        emit(ws.path(&format!("{stem}.json")))?;
        persist::write_confusion_csv(&ws.path(&format!("{stem}_confusion.csv")), ensemble)?;
        emit(ws.path(&format!("{stem}_confusion.csv")))?;
    }

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn braille_pipeline_emits_the_full_table_set() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ExperimentConfig::default();
        config.benchmark.synth.letters = vec!['A', 'B', 'C'];
        config.benchmark.synth.depths_mm = vec![0.0, 0.4];
        config.benchmark.synth.trials_per_condition = 5;
        let ws = Workspace::new(config, dir.path()).unwrap();
        let written = cmd_braille(&ws).unwrap();
        assert!(written.iter().any(|p| p.ends_with("responses_ensemble.csv")));
        assert!(written.iter().any(|p| p.ends_with("report_ensemble_svm.json")));
        let responses =
            persist::read_responses_csv(&ws.path("responses_ensemble.csv")).unwrap();
        assert_eq!(responses.len(), 3 * 2 * 5);
        assert_eq!(responses[0].counts.len(), 24);
    }
}
