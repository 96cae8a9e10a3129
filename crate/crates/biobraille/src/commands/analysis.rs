//! Classification and robustness commands over persisted response vectors.

use std::path::{Path, PathBuf};

use anyhow::bail;

use biobraille_core::classify::{cross_validate, ClassifierKind, ResponseVector};
use biobraille_core::noise::NoiseKind;
use biobraille_core::organoid::NUM_ELECTRODES;
use biobraille_core::pipeline::{run_robustness, SimulatedResponses};
use biobraille_core::rng::{self, tag};

use super::Workspace;
use crate::persist::{self, ClassifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    Single,
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierChoice {
    One(ClassifierKind),
    All,
}

impl ClassifierChoice {
    fn kinds(self) -> Vec<ClassifierKind> {
        match self {
            ClassifierChoice::One(k) => vec![k],
            ClassifierChoice::All => vec![
                ClassifierKind::Knn,
                ClassifierKind::Svm,
                ClassifierKind::Forest,
            ],
        }
    }
}

pub fn classifier_file_name(kind: ClassifierKind) -> &'static str {
    match kind {
        ClassifierKind::Knn => "knn",
        ClassifierKind::Svm => "svm",
        ClassifierKind::Forest => "forest",
    }
}

/// Cross-validates persisted response vectors and writes the report plus the
/// pooled confusion matrix.
pub fn cmd_classify(
    ws: &Workspace,
    responses_path: &Path,
    mode: ModeChoice,
    choice: ClassifierChoice,
    folds: Option<usize>,
) -> anyhow::Result<Vec<PathBuf>> {
    let responses = persist::read_responses_csv(responses_path)?;
    let dim = responses.first().map_or(0, |r| r.counts.len());
    let expected = match mode {
        ModeChoice::Single => NUM_ELECTRODES,
        ModeChoice::Ensemble => 3 * NUM_ELECTRODES,
    };
    if dim != expected {
        bail!(
            "responses in {} are {dim}-dimensional but {:?} mode expects {expected}",
            responses_path.display(),
            mode
        );
    }
    let folds = folds.unwrap_or(ws.config.benchmark.folds);
    let cv_seed = rng::derive_seed(ws.config.master_seed, &[tag::CV]);

    let mode_name = match mode {
        ModeChoice::Single => "single",
        ModeChoice::Ensemble => "ensemble",
    };
    let mut written = Vec::new();
    for kind in choice.kinds() {
        let report = ws.stage(
            "classify",
            cross_validate(&responses, kind, &ws.config.benchmark.classifier, folds, cv_seed),
        )?;
        let stem = format!("report_{mode_name}_{}", classifier_file_name(kind));
        let report_path = ws.path(&format!("{stem}.json"));
        persist::write_json(&report_path, &ClassifyReport::from_cv(mode_name, &report))?;
        ws.record("classify", &report_path)?;
        let confusion_path = ws.path(&format!("{stem}_confusion.csv"));
        persist::write_confusion_csv(&confusion_path, &report)?;
        ws.record("classify", &confusion_path)?;
        written.push(report_path);
        written.push(confusion_path);
    }
    Ok(written)
}

/// Splits 24-dim ensemble vectors back into the three organoids' 8-dim views.
pub fn split_modes(ensemble: &[ResponseVector]) -> anyhow::Result<SimulatedResponses> {
    let dim = ensemble.first().map_or(0, |r| r.counts.len());
    if dim != 3 * NUM_ELECTRODES {
        bail!("robustness needs 24-dimensional ensemble responses, got {dim}");
    }
    let mut singles: Vec<Vec<ResponseVector>> = vec![Vec::new(); 3];
    for rv in ensemble {
        for (org, single) in singles.iter_mut().enumerate() {
            single.push(ResponseVector {
                label: rv.label,
                counts: rv.counts[org * NUM_ELECTRODES..(org + 1) * NUM_ELECTRODES].to_vec(),
            });
        }
    }
    Ok(SimulatedResponses {
        singles,
        ensemble: ensemble.to_vec(),
    })
}

/// Evaluates SVM accuracy under the configured noise models for single and
/// ensemble decoding.
pub fn cmd_robustness(
    ws: &Workspace,
    responses_path: &Path,
    kinds: Option<Vec<NoiseKind>>,
    repeats: Option<u32>,
) -> anyhow::Result<Vec<PathBuf>> {
    let ensemble = persist::read_responses_csv(responses_path)?;
    let responses = split_modes(&ensemble)?;
    let mut protocol = ws.config.robustness.clone();
    if let Some(kinds) = kinds {
        protocol.kinds = kinds;
    }
    if let Some(repeats) = repeats {
        protocol.repeats = repeats;
    }
    let seed = rng::derive_seed(ws.config.master_seed, &[tag::ROBUST]);
    let report = ws.stage(
        "robustness",
        run_robustness(
            &responses,
            &ws.config.benchmark.classifier,
            ws.config.benchmark.folds,
            &protocol,
            seed,
        ),
    )?;

    let summary = ws.path("robustness.csv");
    persist::write_robustness_csv(&summary, &report)?;
    ws.record("robustness", &summary)?;
    let runs = ws.path("robustness_runs.csv");
    persist::write_robustness_runs_csv(&runs, &report)?;
    ws.record("robustness", &runs)?;
    Ok(vec![summary, runs])
}

#[cfg(test)]
mod tests {
    use super::*;
    use biobraille_core::braille::TrialLabel;

    #[test]
    fn split_modes_slices_channels_in_order() {
        let ensemble = vec![ResponseVector {
            label: TrialLabel::new('A', 0.0, 0).unwrap(),
            counts: (0..24).map(f64::from).collect(),
        }];
        let split = split_modes(&ensemble).unwrap();
        assert_eq!(split.singles[0][0].counts, (0..8).map(f64::from).collect::<Vec<_>>());
        assert_eq!(split.singles[2][0].counts, (16..24).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn split_modes_rejects_wrong_dimension() {
        let bad = vec![ResponseVector {
            label: TrialLabel::new('A', 0.0, 0).unwrap(),
            counts: vec![0.0; 8],
        }];
        assert!(split_modes(&bad).is_err());
    }
}
