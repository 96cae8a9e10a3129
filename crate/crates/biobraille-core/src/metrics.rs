//! Spatial response metrics: centre of activity, cluster quality, and the
//! radar summary that condenses them.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::organoid::{ElectrodeLayout, SpikeTrain};

#[derive(Debug, Clone, Copy, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("centre of activity is undefined for all-zero counts")]
    UndefinedCenter,
    #[error("count vector length {got} does not match the {expected}-electrode layout")]
    WrongChannelCount { got: usize, expected: usize },
    #[error("silhouette needs at least two clusters")]
    TooFewClusters,
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
}

/// Spike-count-weighted centroid of the electrode coordinates, in normalized
/// array coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterOfActivity {
    pub x: f64,
    pub y: f64,
}

impl CenterOfActivity {
    pub fn distance_to(&self, other: &CenterOfActivity) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        libm::sqrt(dx * dx + dy * dy)
    }

    /// Position in micrometres under the layout's physical scale.
    pub fn to_um(&self, layout: &ElectrodeLayout) -> (f64, f64) {
        (self.x * layout.um_per_unit, self.y * layout.um_per_unit)
    }
}

/// Centre of activity for per-channel spike counts. Undefined (error) when
/// every count is zero.
pub fn center_of_activity(
    counts: &[f64],
    layout: &ElectrodeLayout,
) -> Result<CenterOfActivity, MetricsError> {
    if counts.len() != layout.coords.len() {
        return Err(MetricsError::WrongChannelCount {
            got: counts.len(),
            expected: layout.coords.len(),
        });
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(MetricsError::UndefinedCenter);
    }
    let mut x = 0.0;
    let mut y = 0.0;
    for (f, (cx, cy)) in counts.iter().zip(layout.coords.iter()) {
        x += f * cx;
        y += f * cy;
    }
    Ok(CenterOfActivity {
        x: x / total,
        y: y / total,
    })
}

/// The activity-centre cloud of one (electrode, parameter value) condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaCluster {
    pub electrode: usize,
    pub parameter_value: f64,
    pub points: Vec<CenterOfActivity>,
    /// Trials dropped because their window contained no spikes.
    pub zero_spike_trials: u32,
}

/// Per-point silhouette scores for each cluster, Euclidean metric.
///
/// Conventions: a point in a single-point cluster scores 0, and a point with
/// `max(a, b) == 0` (all distances vanish) scores 0. Requires at least two
/// clusters, none empty.
pub fn silhouette_scores(
    clusters: &[Vec<CenterOfActivity>],
) -> Result<Vec<Vec<f64>>, MetricsError> {
    if clusters.len() < 2 {
        return Err(MetricsError::TooFewClusters);
    }
    for (i, c) in clusters.iter().enumerate() {
        if c.is_empty() {
            return Err(MetricsError::EmptyCluster(i));
        }
    }
    let mut scores = Vec::with_capacity(clusters.len());
    for (ci, cluster) in clusters.iter().enumerate() {
        let mut cluster_scores = Vec::with_capacity(cluster.len());
        for (pi, p) in cluster.iter().enumerate() {
            if cluster.len() == 1 {
                cluster_scores.push(0.0);
                continue;
            }
            let mut intra = 0.0;
            for (qi, q) in cluster.iter().enumerate() {
                if qi != pi {
                    intra += p.distance_to(q);
                }
            }
            let a = intra / (cluster.len() - 1) as f64;

            let mut b = f64::INFINITY;
            for (cj, other) in clusters.iter().enumerate() {
                if cj == ci {
                    continue;
                }
                let mut sum = 0.0;
                for q in other {
                    sum += p.distance_to(q);
                }
                let mean = sum / other.len() as f64;
                if mean < b {
                    b = mean;
                }
            }

            let denom = a.max(b);
            cluster_scores.push(if denom == 0.0 { 0.0 } else { (b - a) / denom });
        }
        scores.push(cluster_scores);
    }
    Ok(scores)
}

/// Median of a slice (mean of the two middle elements for even lengths).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Euclidean distance (um) between a cluster's mean position and the
/// spontaneous baseline centroid.
pub fn centroid_shift(
    cluster: &CaCluster,
    baseline: &CenterOfActivity,
    layout: &ElectrodeLayout,
) -> Result<f64, MetricsError> {
    if cluster.points.is_empty() {
        return Err(MetricsError::EmptyCluster(cluster.electrode));
    }
    let n = cluster.points.len() as f64;
    let mean = CenterOfActivity {
        x: cluster.points.iter().map(|p| p.x).sum::<f64>() / n,
        y: cluster.points.iter().map(|p| p.y).sum::<f64>() / n,
    };
    Ok(mean.distance_to(baseline) * layout.um_per_unit)
}

/// Mean total spike count over a set of repeated trials.
pub fn global_spike_count(trains: &[SpikeTrain]) -> f64 {
    if trains.is_empty() {
        return 0.0;
    }
    trains.iter().map(|t| t.total() as f64).sum::<f64>() / trains.len() as f64
}

/// Three-axis radar summary of the spatial metrics.
///
/// Each metric grid (parameter value x electrode) is min-max normalized with
/// the global extrema across the whole grid, then averaged over electrodes,
/// giving one radius per (value, axis). The polygon area is that of the three
/// triangles spanned by consecutive radii at 120 degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSummary {
    pub values: Vec<f64>,
    /// radii[v] = [silhouette, centroid shift, spike count], each in [0, 1].
    pub radii: Vec<[f64; 3]>,
    pub areas: Vec<f64>,
    /// Axes whose extrema were degenerate (max == min); their radii are
    /// pinned at 0.5.
    pub degenerate_axes: [bool; 3],
}

/// Normalizes one metric grid `grid[value][electrode]` by its global extrema
/// and averages over electrodes. Returns the per-value radii and whether the
/// extrema were degenerate.
fn normalize_axis(grid: &[Vec<f64>]) -> (Vec<f64>, bool) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in grid {
        for &v in row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let degenerate = !(hi > lo);
    let radii = grid
        .iter()
        .map(|row| {
            let mean = row
                .iter()
                .map(|&v| if degenerate { 0.5 } else { (v - lo) / (hi - lo) })
                .sum::<f64>()
                / row.len() as f64;
            mean
        })
        .collect();
    (radii, degenerate)
}

/// Area of the 3-axis radar polygon with the given radii.
pub fn radar_polygon_area(radii: &[f64; 3]) -> f64 {
    const SIN_120_HALF: f64 = 0.43301270189221935; // sqrt(3)/4
    SIN_120_HALF * (radii[0] * radii[1] + radii[1] * radii[2] + radii[2] * radii[0])
}

/// Builds the radar summary from the three metric grids, all indexed as
/// `grid[value][electrode]` over a shared (value, electrode) protocol.
pub fn radar_summary(
    values: &[f64],
    silhouette_grid: &[Vec<f64>],
    shift_grid: &[Vec<f64>],
    count_grid: &[Vec<f64>],
) -> RadarSummary {
    let (sil, sil_deg) = normalize_axis(silhouette_grid);
    let (shift, shift_deg) = normalize_axis(shift_grid);
    let (count, count_deg) = normalize_axis(count_grid);
    let radii: Vec<[f64; 3]> = (0..values.len())
        .map(|v| [sil[v], shift[v], count[v]])
        .collect();
    let areas = radii.iter().map(radar_polygon_area).collect();
    RadarSummary {
        values: values.to_vec(),
        radii,
        areas,
        degenerate_axes: [sil_deg, shift_deg, count_deg],
    }
}
