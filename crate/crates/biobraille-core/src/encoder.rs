//! Feature-to-stimulation encoding.
//!
//! Each region's four tactile features map linearly onto the four pulse-train
//! parameters of its electrode, using one shared calibration range per
//! feature: event count -> number of pulses (4..10), event duration -> phase
//! duration (50..300 us), peak time -> trigger delay (0..4000 us), event
//! deviation -> phase amplitude (4..20 uA). Waveforms are symmetric biphasic,
//! positive phase first. Inputs outside the calibration range clamp to the
//! target interval; a region with no events maps to the minimum of every
//! range.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::features::RegionFeatureSet;

/// Target pulse-count range.
pub const PULSES_RANGE: (f64, f64) = (4.0, 10.0);
/// Target phase amplitude range (uA).
pub const AMPLITUDE_RANGE_UA: (f64, f64) = (4.0, 20.0);
/// Target phase duration range (us).
pub const DURATION_RANGE_US: (f64, f64) = (50.0, 300.0);
/// Target trigger delay range (us).
pub const DELAY_RANGE_US: (f64, f64) = (0.0, 4000.0);
/// Onset-to-onset spacing of pulses within a train (250 Hz).
pub const PULSE_INTERVAL_US: u32 = 4000;

#[derive(Debug, Clone, Copy, thiserror::Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("cannot calibrate on an empty feature dataset")]
    EmptyDataset,
}

/// Fixed waveform shape used throughout: charge-balanced biphasic pulses,
/// positive phase first, with amplitude 1 = amplitude 2 and
/// duration 1 = duration 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PulseShape {
    #[default]
    BiphasicPositiveFirst,
}

/// Pulse-train parameters for one electrode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeStim {
    pub num_pulses: u8,
    pub phase_amplitude_ua: f64,
    pub phase_duration_us: u32,
    pub trigger_delay_us: u32,
    pub shape: PulseShape,
}

impl ElectrodeStim {
    /// An unstimulated electrode (used by sweep baselines).
    pub fn silent() -> Self {
        Self {
            num_pulses: 0,
            phase_amplitude_ua: 0.0,
            phase_duration_us: 0,
            trigger_delay_us: 0,
            shape: PulseShape::BiphasicPositiveFirst,
        }
    }
}

/// Stimulation pattern for the whole eight-electrode array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimPattern {
    pub electrodes: Vec<ElectrodeStim>,
}

/// Source range of one feature, [lo, hi] over the calibration dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub lo: f64,
    pub hi: f64,
}

impl FeatureRange {
    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    fn normalize(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            0.5
        } else {
            ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
        }
    }
}

/// Dataset-derived normalization ranges, one per feature, shared by all
/// electrodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderCalibration {
    pub count: FeatureRange,
    pub duration_us: FeatureRange,
    pub peak_time_us: FeatureRange,
    pub deviation: FeatureRange,
}

/// Scans a dataset of per-trial feature sets and records global min/max per
/// feature. Degenerate features (min == max) later map to the midpoint of
/// their target range.
pub fn calibrate(dataset: &[RegionFeatureSet]) -> Result<EncoderCalibration, EncodeError> {
    let mut any = false;
    let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); 4];
    for set in dataset {
        for r in &set.regions {
            any = true;
            let values = [
                r.event_count as f64,
                r.event_duration_us as f64,
                r.peak_time_us as f64,
                r.event_deviation,
            ];
            for (range, v) in ranges.iter_mut().zip(values) {
                range.0 = range.0.min(v);
                range.1 = range.1.max(v);
            }
        }
    }
    if !any {
        return Err(EncodeError::EmptyDataset);
    }
    let fr = |(lo, hi): (f64, f64)| FeatureRange { lo, hi };
    Ok(EncoderCalibration {
        count: fr(ranges[0]),
        duration_us: fr(ranges[1]),
        peak_time_us: fr(ranges[2]),
        deviation: fr(ranges[3]),
    })
}

fn map_to(norm: f64, target: (f64, f64)) -> f64 {
    target.0 + norm * (target.1 - target.0)
}

/// Rounds to the nearest multiple of `step`, staying inside `target`.
fn quantize(x: f64, step: f64, target: (f64, f64)) -> f64 {
    (libm::round(x / step) * step).clamp(target.0, target.1)
}

/// Encodes one trial's features into a stimulation pattern.
pub fn encode(features: &RegionFeatureSet, cal: &EncoderCalibration) -> StimPattern {
    let electrodes = features
        .regions
        .iter()
        .map(|r| {
            if r.event_count == 0 {
                return ElectrodeStim {
                    num_pulses: PULSES_RANGE.0 as u8,
                    phase_amplitude_ua: AMPLITUDE_RANGE_UA.0,
                    phase_duration_us: DURATION_RANGE_US.0 as u32,
                    trigger_delay_us: DELAY_RANGE_US.0 as u32,
                    shape: PulseShape::BiphasicPositiveFirst,
                };
            }
            let pulses = map_to(cal.count.normalize(r.event_count as f64), PULSES_RANGE);
            let duration = map_to(
                cal.duration_us.normalize(r.event_duration_us as f64),
                DURATION_RANGE_US,
            );
            let delay = map_to(
                cal.peak_time_us.normalize(r.peak_time_us as f64),
                DELAY_RANGE_US,
            );
            let amplitude = map_to(cal.deviation.normalize(r.event_deviation), AMPLITUDE_RANGE_UA);
            ElectrodeStim {
                num_pulses: quantize(pulses, 1.0, PULSES_RANGE) as u8,
                phase_amplitude_ua: quantize(amplitude, 0.1, AMPLITUDE_RANGE_UA),
                phase_duration_us: quantize(duration, 1.0, DURATION_RANGE_US) as u32,
                trigger_delay_us: quantize(delay, 1.0, DELAY_RANGE_US) as u32,
                shape: PulseShape::BiphasicPositiveFirst,
            }
        })
        .collect();
    StimPattern { electrodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::RegionFeatures;

    fn feature_set(values: &[(u64, u64, u64, f64)]) -> RegionFeatureSet {
        RegionFeatureSet {
            regions: values
                .iter()
                .map(|&(c, d, p, dev)| RegionFeatures {
                    event_count: c,
                    event_duration_us: d,
                    peak_time_us: p,
                    event_deviation: dev,
                })
                .collect(),
        }
    }

    #[test]
    fn calibrate_records_global_extrema() {
        let a = feature_set(&[(0, 10, 100, 1.0), (812, 500, 900, 4.0)]);
        let b = feature_set(&[(100, 5, 1500, 2.0)]);
        let cal = calibrate(&[a, b]).unwrap();
        assert_eq!(cal.count.lo, 0.0);
        assert_eq!(cal.count.hi, 812.0);
        assert_eq!(cal.duration_us.lo, 5.0);
        assert_eq!(cal.peak_time_us.hi, 1500.0);
        assert!(!cal.count.is_degenerate());
    }

    #[test]
    fn constant_feature_is_degenerate() {
        let a = feature_set(&[(5, 10, 100, 3.0), (9, 20, 200, 3.0)]);
        let cal = calibrate(&[a]).unwrap();
        assert!(cal.deviation.is_degenerate());
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert_eq!(calibrate(&[]), Err(EncodeError::EmptyDataset));
    }

    #[test]
    fn count_at_calibration_max_maps_to_ten_pulses() {
        let cal = calibrate(&[feature_set(&[(0, 0, 0, 0.0), (812, 1000, 1000, 5.0)])]).unwrap();
        let p = encode(&feature_set(&[(812, 500, 500, 2.0)]), &cal);
        assert_eq!(p.electrodes[0].num_pulses, 10);
    }

    #[test]
    fn zero_event_region_maps_to_all_range_minima() {
        let cal = calibrate(&[feature_set(&[(10, 100, 100, 1.0), (900, 900, 900, 9.0)])]).unwrap();
        let p = encode(&feature_set(&[(0, 0, 0, 0.0)]), &cal);
        let e = &p.electrodes[0];
        assert_eq!(e.num_pulses, 4);
        assert_eq!(e.phase_amplitude_ua, 4.0);
        assert_eq!(e.phase_duration_us, 50);
        assert_eq!(e.trigger_delay_us, 0);
    }

    #[test]
    fn count_at_midpoint_rounds_to_seven_pulses() {
        let cal = calibrate(&[feature_set(&[(0, 0, 0, 0.0), (100, 100, 100, 1.0)])]).unwrap();
        let p = encode(&feature_set(&[(50, 0, 0, 0.0)]), &cal);
        assert_eq!(p.electrodes[0].num_pulses, 7);
    }

    #[test]
    fn out_of_range_inputs_clamp_into_targets() {
        let cal = calibrate(&[feature_set(&[(10, 10, 10, 1.0), (20, 20, 20, 2.0)])]).unwrap();
        let p = encode(&feature_set(&[(10_000, 10_000, 10_000, 100.0)]), &cal);
        let e = &p.electrodes[0];
        assert_eq!(e.num_pulses, 10);
        assert_eq!(e.phase_amplitude_ua, 20.0);
        assert_eq!(e.phase_duration_us, 300);
        assert_eq!(e.trigger_delay_us, 4000);
    }

    #[test]
    fn degenerate_feature_maps_to_target_midpoint() {
        let cal = calibrate(&[feature_set(&[(1, 10, 10, 3.0), (2, 20, 20, 3.0)])]).unwrap();
        assert!(cal.deviation.is_degenerate());
        let p = encode(&feature_set(&[(1, 15, 15, 3.0)]), &cal);
        assert_eq!(p.electrodes[0].phase_amplitude_ua, 12.0);
    }

    #[test]
    fn single_trial_calibration_equals_its_extrema() {
        let set = feature_set(&[(3, 30, 300, 0.5), (9, 90, 900, 1.5)]);
        let cal = calibrate(&[set]).unwrap();
        assert_eq!(cal.count.lo, 3.0);
        assert_eq!(cal.count.hi, 9.0);
    }

    #[test]
    fn mapping_is_monotone_in_each_feature() {
        let cal = calibrate(&[feature_set(&[(0, 0, 0, 0.0), (1000, 1000, 1000, 10.0)])]).unwrap();
        let mut prev = 0u8;
        for c in (1..=1000).step_by(13) {
            let p = encode(&feature_set(&[(c, 0, 0, 0.0)]), &cal);
            assert!(p.electrodes[0].num_pulses >= prev);
            prev = p.electrodes[0].num_pulses;
        }
        let mut prev = 0.0;
        for dev in 0..100 {
            let p = encode(&feature_set(&[(1, 0, 0, dev as f64 * 0.1)]), &cal);
            assert!(p.electrodes[0].phase_amplitude_ua >= prev);
            prev = p.electrodes[0].phase_amplitude_ua;
        }
    }

    #[test]
    fn all_channels_share_one_encoding_map() {
        // Two regions with identical features encode identically, whichever
        // electrodes they sit on.
        let cal = calibrate(&[feature_set(&[(0, 0, 0, 0.0), (900, 900, 900, 9.0)])]).unwrap();
        let p = encode(
            &feature_set(&[(450, 30, 700, 2.0), (450, 30, 700, 2.0), (12, 5, 1, 0.1)]),
            &cal,
        );
        assert_eq!(p.electrodes[0], p.electrodes[1]);
        assert_ne!(p.electrodes[0], p.electrodes[2]);
    }

    #[test]
    fn amplitude_quantizes_to_tenths() {
        let cal = calibrate(&[feature_set(&[(0, 0, 0, 0.0), (3, 3, 3, 3.0)])]).unwrap();
        let p = encode(&feature_set(&[(1, 1, 1, 1.0)]), &cal);
        let a = p.electrodes[0].phase_amplitude_ua;
        assert!((a * 10.0 - libm::round(a * 10.0)).abs() < 1e-9);
    }
}
