//! Synthetic event-camera recordings of Braille swipes.
//!
//! Each raised dot is modelled as a 2-D Gaussian event-rate profile that
//! travels horizontally across the sensor at constant speed; events are drawn
//! from an inhomogeneous Poisson process on top of a sparse uniform noise
//! floor. Indentation depth scales the dot rate, so deeper presses yield more
//! events while depth 0 (initial shallow contact) still produces a usable
//! stream.
//!
//! The swipe is finite: the cell centre travels `swipe_span_px` (half the
//! field width by default), centred on the field, within the trial window.
//! Each dot therefore paints a horizontal streak that covers only part of the
//! field, so the grid columns see different portions of every dot's passage.
//! That is what keeps the column dimension informative for downstream count
//! statistics: with an unbounded swipe every column would see statistically
//! identical counts and mirror-image letter pairs would collapse, because
//! their timing difference ends up in the trigger delay, which never reaches
//! the spike counts.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::braille::{BrailleCell, LabelError, TrialLabel, DEPTHS_MM, LETTERS};
use crate::event::{TactileEvent, TactileEventStream};
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, thiserror::Error, PartialEq)]
pub enum SynthError {
    #[error("invalid trial label: {0}")]
    InvalidLabel(#[from] LabelError),
    #[error("invalid generator config: {0}")]
    InvalidConfig(&'static str),
}

/// Generator parameters. Defaults cover a DVXplorer-Mini-like 320x240 region
/// of interest and a 2 s swipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub width: u16,
    pub height: u16,
    pub duration_us: u64,
    /// Peak event rate of one dot at full depth (events/s).
    pub dot_peak_rate_hz: f64,
    /// Gaussian footprint of a dot contact (pixels).
    pub footprint_sigma_px: f64,
    /// Nominal contact footprint radius used for fidelity checks (pixels).
    pub footprint_radius_px: f64,
    /// Rate scale at depth 0 (shallow initial contact); scales linearly to 1
    /// at the deepest sampled depth.
    pub depth_floor: f64,
    /// Uniform background event rate over the whole field (events/s).
    pub noise_rate_hz: f64,
    /// Global rate multiplier; 0 silences the generator entirely.
    pub rate_scale: f64,
    /// Horizontal distance the cell centre travels during one trial (pixels).
    pub swipe_span_px: f64,
    /// Horizontal half-gap between the two dot columns (pixels).
    pub col_offset_px: f64,
    /// Vertical spacing between dot rows (pixels).
    pub row_pitch_px: f64,
    /// Uniform per-trial jitter of the swipe path along x (pixels).
    pub start_jitter_px: f64,
    /// Uniform per-trial jitter of the cell height (pixels).
    pub y_jitter_px: f64,
    /// Letters to include when generating a dataset.
    pub letters: Vec<char>,
    /// Depths (mm) to include when generating a dataset.
    pub depths_mm: Vec<f64>,
    /// Trials per (letter, depth) condition.
    pub trials_per_condition: u8,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            duration_us: 2_000_000,
            dot_peak_rate_hz: 3000.0,
            footprint_sigma_px: 6.0,
            footprint_radius_px: 15.0,
            depth_floor: 0.75,
            noise_rate_hz: 0.5,
            rate_scale: 1.0,
            swipe_span_px: 160.0,
            col_offset_px: 24.0,
            row_pitch_px: 60.0,
            start_jitter_px: 4.0,
            y_jitter_px: 3.0,
            letters: LETTERS.to_vec(),
            depths_mm: DEPTHS_MM.to_vec(),
            trials_per_condition: 10,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.width == 0 || self.height == 0 {
            return Err(SynthError::InvalidConfig("sensor resolution must be nonzero"));
        }
        if self.duration_us == 0 {
            return Err(SynthError::InvalidConfig("duration must be positive"));
        }
        if !(self.dot_peak_rate_hz >= 0.0)
            || !(self.noise_rate_hz >= 0.0)
            || !(self.rate_scale >= 0.0)
        {
            return Err(SynthError::InvalidConfig("rates must be nonnegative"));
        }
        if !(self.footprint_sigma_px > 0.0) {
            return Err(SynthError::InvalidConfig("footprint sigma must be positive"));
        }
        if !(self.depth_floor > 0.0) || self.depth_floor > 1.0 {
            return Err(SynthError::InvalidConfig("depth floor must be in (0, 1]"));
        }
        if self.letters.is_empty() || self.depths_mm.is_empty() || self.trials_per_condition == 0 {
            return Err(SynthError::InvalidConfig("dataset spec must be nonempty"));
        }
        Ok(())
    }

    /// Rate multiplier for an indentation depth.
    pub fn depth_scale(&self, depth_mm: f64) -> f64 {
        let deepest = *DEPTHS_MM.last().unwrap();
        self.depth_floor + (1.0 - self.depth_floor) * (depth_mm / deepest)
    }

    /// Swipe speed (px/s): the cell centre covers `swipe_span_px` within the
    /// trial window.
    pub fn swipe_speed_px_s(&self) -> f64 {
        self.swipe_span_px / (self.duration_us as f64 * 1e-6)
    }

    /// Instantaneous cell-centre x position at time `t_us`. The swipe is
    /// centred on the field and moves right to left.
    pub fn cell_center_x(&self, t_us: u64) -> f64 {
        let mid = self.width as f64 / 2.0;
        mid + self.swipe_span_px / 2.0 - self.swipe_speed_px_s() * (t_us as f64 * 1e-6)
    }

    /// Dot centre offset relative to the cell centre, in pixels.
    pub fn dot_offset(&self, dot: u8) -> (f64, f64) {
        let (col, row) = BrailleCell::dot_position(dot);
        let dx = if col == 0 { -self.col_offset_px } else { self.col_offset_px };
        let dy = (row as f64 - 1.0) * self.row_pitch_px;
        (dx, dy)
    }
}

/// Generates one swipe trial. Deterministic for a fixed (label, config, seed).
pub fn generate_trial(
    label: &TrialLabel,
    config: &SynthConfig,
    seed: u64,
) -> Result<TactileEventStream, SynthError> {
    config.validate()?;
    let label = TrialLabel::new(label.letter, label.depth_mm, label.trial_index)?;
    let cell = BrailleCell::for_letter(label.letter)?;

    let mut rng = rng::stream(seed, &[]);
    let jitter_x = sym_jitter(&mut rng, config.start_jitter_px);
    let jitter_y = sym_jitter(&mut rng, config.y_jitter_px);

    let dot_rate = config.dot_peak_rate_hz * config.depth_scale(label.depth_mm) * config.rate_scale;
    let noise_rate = config.noise_rate_hz * config.rate_scale;
    let footprint = Normal::new(0.0, config.footprint_sigma_px).expect("validated sigma");
    let row_center = config.height as f64 / 2.0;
    // Contribution beyond 4 sigma of the field border is negligible; skip it.
    let margin = 4.0 * config.footprint_sigma_px;

    let dots = cell.dots();
    let mut events: Vec<TactileEvent> = Vec::new();
    let mut bucket: Vec<TactileEvent> = Vec::new();

    let mut win_start = 0u64;
    while win_start < config.duration_us {
        let win_len = (config.duration_us - win_start).min(1000);
        let win_s = win_len as f64 * 1e-6;
        let t_mid = win_start + win_len / 2;
        bucket.clear();

        let center_x = config.cell_center_x(t_mid) + jitter_x;
        for &dot in &dots {
            let (dx, dy) = config.dot_offset(dot);
            let cx = center_x + dx;
            let cy = row_center + dy + jitter_y;
            if cx < -margin || cx > config.width as f64 - 1.0 + margin {
                continue;
            }
            let lambda = dot_rate * win_s;
            if lambda <= 0.0 {
                continue;
            }
            let n = Poisson::new(lambda).expect("positive rate").sample(&mut rng) as u64;
            for _ in 0..n {
                let px = cx + footprint.sample(&mut rng);
                let py = cy + footprint.sample(&mut rng);
                let (px, py) = (libm::round(px), libm::round(py));
                if px < 0.0 || px >= config.width as f64 || py < 0.0 || py >= config.height as f64 {
                    continue;
                }
                bucket.push(TactileEvent {
                    t_us: win_start + rng.random_range(0..win_len),
                    x: px as u16,
                    y: py as u16,
                    polarity: if rng.random::<bool>() { 1 } else { -1 },
                });
            }
        }

        if noise_rate > 0.0 {
            let n = Poisson::new(noise_rate * win_s)
                .expect("positive rate")
                .sample(&mut rng) as u64;
            for _ in 0..n {
                bucket.push(TactileEvent {
                    t_us: win_start + rng.random_range(0..win_len),
                    x: rng.random_range(0..config.width),
                    y: rng.random_range(0..config.height),
                    polarity: if rng.random::<bool>() { 1 } else { -1 },
                });
            }
        }

        bucket.sort_by_key(|e| e.t_us);
        events.extend_from_slice(&bucket);
        win_start += win_len;
    }

    Ok(TactileEventStream {
        width: config.width,
        height: config.height,
        duration_us: config.duration_us,
        events,
    })
}

/// Per-trial seed derived from the dataset master seed. Indices are global
/// (letter position in A..Z, depth position in the standard depth list) so a
/// restricted dataset reproduces the corresponding trials of the full one.
pub fn trial_seed(master_seed: u64, label: &TrialLabel) -> u64 {
    rng::derive_seed(
        master_seed,
        &[
            tag::TRIAL,
            label.class_index() as u64,
            label.depth_index() as u64,
            label.trial_index as u64,
        ],
    )
}

/// Generates the full dataset described by the config (letters x depths x
/// trials) with per-trial seeds derived from `master_seed`.
pub fn generate_dataset(
    config: &SynthConfig,
    master_seed: u64,
) -> Result<Vec<(TrialLabel, TactileEventStream)>, SynthError> {
    let mut out = Vec::new();
    for_each_trial::<SynthError, _>(config, master_seed, |label, stream| {
        out.push((label, stream));
        Ok(())
    })?;
    Ok(out)
}

/// Streaming variant of [`generate_dataset`]: trials are handed to `f` one at
/// a time in a fixed order so large datasets never need to be held in memory.
pub fn for_each_trial<E, F>(
    config: &SynthConfig,
    master_seed: u64,
    mut f: F,
) -> Result<(), E>
where
    E: From<SynthError>,
    F: FnMut(TrialLabel, TactileEventStream) -> Result<(), E>,
{
    config.validate()?;
    for &letter in &config.letters {
        for &depth in &config.depths_mm {
            for trial in 0..config.trials_per_condition {
                let label = TrialLabel::new(letter, depth, trial).map_err(SynthError::from)?;
                let stream = generate_trial(&label, config, trial_seed(master_seed, &label))?;
                f(label, stream)?;
            }
        }
    }
    Ok(())
}

fn sym_jitter<R: Rng>(rng: &mut R, magnitude: f64) -> f64 {
    if magnitude > 0.0 {
        rng.random_range(-magnitude..magnitude)
    } else {
        0.0
    }
}
