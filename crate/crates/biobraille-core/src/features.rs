//! Spatial partitioning and per-region tactile features.
//!
//! The sensor plane is tiled into a rows x cols grid (2x4 by default, eight
//! regions wired one-to-one to the stimulation electrodes, row-major). For
//! each region four statistics summarise the event stream: total count,
//! first-to-last duration, the midpoint of the busiest 100 ms window, and the
//! standard deviation of per-window counts.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::event::{TactileEvent, TactileEventStream};

/// Number of electrodes / regions in the default pipeline.
pub const NUM_REGIONS: usize = 8;

/// Default analysis window (100 ms).
pub const DEFAULT_WINDOW_US: u64 = 100_000;

/// Equal-width tiling of the sensor plane, row-major region indexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub rows: u16,
    pub cols: u16,
}

impl Default for RegionGrid {
    fn default() -> Self {
        Self { rows: 2, cols: 4 }
    }
}

impl RegionGrid {
    pub fn num_regions(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    /// Region index of a pixel. Every in-range pixel maps to exactly one
    /// region; region r is wired to electrode r.
    pub fn region_of(&self, x: u16, y: u16, width: u16, height: u16) -> usize {
        let row = (y as u32 * self.rows as u32 / height as u32).min(self.rows as u32 - 1);
        let col = (x as u32 * self.cols as u32 / width as u32).min(self.cols as u32 - 1);
        (row * self.cols as u32 + col) as usize
    }
}

/// The four per-region statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionFeatures {
    pub event_count: u64,
    pub event_duration_us: u64,
    pub peak_time_us: u64,
    /// Standard deviation of event counts across analysis windows
    /// (events per window).
    pub event_deviation: f64,
}

/// Features for every region of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFeatureSet {
    pub regions: Vec<RegionFeatures>,
}

impl RegionFeatureSet {
    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }
}

/// Splits a stream into per-region event lists. The lists are a disjoint
/// partition of the input and each preserves time order.
pub fn partition(stream: &TactileEventStream, grid: &RegionGrid) -> Vec<Vec<TactileEvent>> {
    let mut out: Vec<Vec<TactileEvent>> = vec![Vec::new(); grid.num_regions()];
    for e in &stream.events {
        out[grid.region_of(e.x, e.y, stream.width, stream.height)].push(*e);
    }
    out
}

/// Extracts the four features for every region.
///
/// Windows tile `[0, duration)` contiguously; a trailing partial window
/// counts as a full window position. The peak window is the earliest one with
/// the maximal count and `peak_time` is its nominal midpoint. Regions without
/// events get all-zero features.
pub fn extract_features(
    stream: &TactileEventStream,
    grid: &RegionGrid,
    window_us: u64,
) -> RegionFeatureSet {
    let window_us = window_us.max(1);
    let num_windows = (stream.duration_us.div_ceil(window_us)).max(1) as usize;
    let regions = partition(stream, grid)
        .iter()
        .map(|events| region_features(events, window_us, num_windows))
        .collect();
    RegionFeatureSet { regions }
}

fn region_features(events: &[TactileEvent], window_us: u64, num_windows: usize) -> RegionFeatures {
    if events.is_empty() {
        return RegionFeatures::default();
    }
    let mut window_counts = vec![0u64; num_windows];
    for e in events {
        let idx = ((e.t_us / window_us) as usize).min(num_windows - 1);
        window_counts[idx] += 1;
    }

    let count = events.len() as u64;
    let first = events.iter().map(|e| e.t_us).min().unwrap();
    let last = events.iter().map(|e| e.t_us).max().unwrap();

    let (peak_idx, _) = window_counts
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
        .unwrap();

    let mean = count as f64 / num_windows as f64;
    let var = window_counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / num_windows as f64;

    RegionFeatures {
        event_count: count,
        event_duration_us: last - first,
        peak_time_us: peak_idx as u64 * window_us + window_us / 2,
        event_deviation: libm::sqrt(var),
    }
}
