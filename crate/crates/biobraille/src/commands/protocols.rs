//! Stimulus-characterization commands: parameter sweeps, peristimulus
//! histograms, and the spatial activity-centre protocol.

use std::path::{Path, PathBuf};

use biobraille_core::organoid::{run_sweep, SweepParam, SweepSpec};
use biobraille_core::pipeline::{run_spatial, run_temporal, SpatialProtocol};
use biobraille_core::rng::{self, tag};

use super::{data::load_or_build_model, Workspace};
use crate::persist;

fn sweep_values(ws: &Workspace, param: SweepParam) -> Vec<f64> {
    let p = &ws.config.protocols;
    match param {
        SweepParam::Pulses => p.sweep_pulses.clone(),
        SweepParam::Amplitude => p.sweep_amplitudes_ua.clone(),
        SweepParam::Duration => p.sweep_durations_us.clone(),
        SweepParam::Delay => p.sweep_delays_us.clone(),
    }
}

fn temporal_values(ws: &Workspace, param: SweepParam) -> Vec<f64> {
    let p = &ws.config.protocols;
    match param {
        SweepParam::Pulses => p.temporal_pulses.clone(),
        SweepParam::Amplitude => p.temporal_amplitudes_ua.clone(),
        SweepParam::Duration => p.temporal_durations_us.clone(),
        SweepParam::Delay => Vec::new(),
    }
}

fn spatial_values(ws: &Workspace, param: SweepParam) -> Vec<f64> {
    let p = &ws.config.protocols;
    match param {
        SweepParam::Pulses => p.spatial_pulses.clone(),
        SweepParam::Amplitude => p.spatial_amplitudes_ua.clone(),
        SweepParam::Duration => p.spatial_durations_us.clone(),
        SweepParam::Delay => Vec::new(),
    }
}

/// Single-parameter spike-count sweep over each electrode in turn.
pub fn cmd_sweep(
    ws: &Workspace,
    param: SweepParam,
    values: Option<Vec<f64>>,
    trials: Option<u32>,
) -> anyhow::Result<Vec<PathBuf>> {
    let model = load_or_build_model(ws, &ws.path("organoid0.json"), None)?;
    let spec = SweepSpec::new(
        param,
        values.unwrap_or_else(|| sweep_values(ws, param)),
        trials.unwrap_or(ws.config.protocols.sweep_trials),
    );
    let seed = rng::derive_seed(ws.config.master_seed, &[tag::SWEEP]);
    let table = ws.stage("sweep", run_sweep(&model, &spec, seed))?;

    let name = persist::param_name(param);
    let detail = ws.path(&format!("sweep_{name}.csv"));
    persist::write_sweep_csv(&detail, &table)?;
    ws.record("sweep", &detail)?;
    let summary = ws.path(&format!("sweep_{name}_summary.csv"));
    persist::write_sweep_summary_csv(&summary, &table)?;
    ws.record("sweep", &summary)?;
    Ok(vec![detail, summary])
}

/// Peristimulus time histograms, one line per parameter value.
pub fn cmd_temporal(
    ws: &Workspace,
    param: SweepParam,
    values: Option<Vec<f64>>,
    trials: Option<u32>,
    bin_ms: Option<u32>,
) -> anyhow::Result<PathBuf> {
    anyhow::ensure!(
        param != SweepParam::Delay,
        "the temporal protocol sweeps pulses, amplitude or duration"
    );
    let model = load_or_build_model(ws, &ws.path("organoid0.json"), None)?;
    let values = values.unwrap_or_else(|| temporal_values(ws, param));
    let seed = rng::derive_seed(ws.config.master_seed, &[tag::TRIAL, 0x7e]);
    let lines = ws.stage(
        "temporal",
        run_temporal(
            &model,
            param,
            &values,
            trials.unwrap_or(ws.config.protocols.temporal_trials),
            bin_ms.unwrap_or(ws.config.protocols.temporal_bin_ms),
            seed,
        ),
    )?;
    let path = ws.path(&format!("psth_{}.csv", persist::param_name(param)));
    persist::write_psth_csv(&path, param, &lines)?;
    ws.record("temporal", &path)?;
    Ok(path)
}

/// Spatial activity-centre protocol: per-electrode CA clusters, the three
/// cluster metrics, and the radar summary.
pub fn cmd_spatial(
    ws: &Workspace,
    model_path: Option<&Path>,
    param: SweepParam,
    values: Option<Vec<f64>>,
    trials: Option<u32>,
) -> anyhow::Result<Vec<PathBuf>> {
    anyhow::ensure!(
        param != SweepParam::Delay,
        "the spatial protocol sweeps pulses, amplitude or duration"
    );
    let default_path = ws.path("organoid0.json");
    let model = load_or_build_model(ws, model_path.unwrap_or(&default_path), None)?;
    let mut protocol = SpatialProtocol::new(
        param,
        values.unwrap_or_else(|| spatial_values(ws, param)),
        trials.unwrap_or(ws.config.protocols.spatial_trials),
    );
    protocol.baseline_windows = ws.config.protocols.spatial_baseline_windows;
    let seed = rng::derive_seed(ws.config.master_seed, &[tag::SPATIAL]);
    let result = ws.stage("spatial", run_spatial(&model, &protocol, seed))?;

    let name = persist::param_name(param);
    let metrics = ws.path(&format!("spatial_{name}_metrics.csv"));
    persist::write_spatial_metrics_csv(&metrics, &result)?;
    ws.record("spatial", &metrics)?;
    let points = ws.path(&format!("spatial_{name}_silhouette_points.csv"));
    persist::write_silhouette_points_csv(&points, &result)?;
    ws.record("spatial", &points)?;
    let radar = ws.path(&format!("spatial_{name}_radar.csv"));
    persist::write_radar_csv(&radar, param, &result.radar)?;
    ws.record("spatial", &radar)?;
    Ok(vec![metrics, points, radar])
}
