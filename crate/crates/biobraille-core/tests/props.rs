//! Property tests for the pure computational kernels.

use biobraille_core::braille::TrialLabel;
use biobraille_core::classify::{decode, stratified_folds, ResponseVector};
use biobraille_core::encoder::{calibrate, encode, EncoderCalibration};
use biobraille_core::event::{TactileEvent, TactileEventStream};
use biobraille_core::features::{extract_features, partition, RegionFeatureSet, RegionFeatures, RegionGrid};
use biobraille_core::metrics::{center_of_activity, silhouette_scores, CenterOfActivity};
use biobraille_core::noise::{apply_noise, NoiseKind, NoiseSpec};
use biobraille_core::organoid::{ElectrodeLayout, RecordingWindow, SpikeTrain};
use proptest::prelude::*;

const WIDTH: u16 = 320;
const HEIGHT: u16 = 240;
const DURATION: u64 = 2_000_000;

fn arb_event() -> impl Strategy<Value = TactileEvent> {
    (0..DURATION, 0..WIDTH, 0..HEIGHT, prop::bool::ANY).prop_map(|(t_us, x, y, pol)| TactileEvent {
        t_us,
        x,
        y,
        polarity: if pol { 1 } else { -1 },
    })
}

fn arb_stream(max_events: usize) -> impl Strategy<Value = TactileEventStream> {
    prop::collection::vec(arb_event(), 0..max_events).prop_map(|mut events| {
        events.sort_by_key(|e| e.t_us);
        TactileEventStream {
            width: WIDTH,
            height: HEIGHT,
            duration_us: DURATION,
            events,
        }
    })
}

fn arb_features() -> impl Strategy<Value = RegionFeatureSet> {
    prop::collection::vec(
        (0u64..100_000, 0u64..2_000_000, 0u64..2_000_000, 0.0f64..500.0),
        8,
    )
    .prop_map(|rows| RegionFeatureSet {
        regions: rows
            .into_iter()
            .map(|(c, d, p, dev)| RegionFeatures {
                event_count: c,
                event_duration_us: d,
                peak_time_us: p,
                event_deviation: dev,
            })
            .collect(),
    })
}

proptest! {
    #[test]
    fn partition_is_a_disjoint_cover(stream in arb_stream(400)) {
        let grid = RegionGrid::default();
        let parts = partition(&stream, &grid);
        let total: usize = parts.iter().map(Vec::len).sum();
        prop_assert_eq!(total, stream.len());
        for (r, part) in parts.iter().enumerate() {
            for e in part {
                prop_assert_eq!(grid.region_of(e.x, e.y, WIDTH, HEIGHT), r);
            }
            prop_assert!(part.windows(2).all(|w| w[0].t_us <= w[1].t_us));
        }
    }

    #[test]
    fn feature_counts_sum_to_stream_total(stream in arb_stream(400)) {
        let f = extract_features(&stream, &RegionGrid::default(), 100_000);
        let sum: u64 = f.regions.iter().map(|r| r.event_count).sum();
        prop_assert_eq!(sum, stream.len() as u64);
    }

    #[test]
    fn features_ignore_event_order(stream in arb_stream(200), seed in 0u64..1000) {
        let grid = RegionGrid::default();
        let a = extract_features(&stream, &grid, 100_000);
        // Shuffle events (breaking time order) and re-extract: features
        // depend only on the multiset of timestamps per region.
        let mut shuffled = stream.clone();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(shuffled.events.as_mut_slice(), &mut rng);
        let b = extract_features(&shuffled, &grid, 100_000);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn translating_timestamps_shifts_only_peak_time(
        early in prop::collection::vec(
            (0..DURATION / 2, 0..WIDTH, 0..HEIGHT),
            0..200,
        ),
        k in 1u64..5,
    ) {
        // Events confined to the first half so a shift by whole windows
        // stays inside the stream duration.
        let mut events: Vec<TactileEvent> = early
            .into_iter()
            .map(|(t_us, x, y)| TactileEvent { t_us, x, y, polarity: 1 })
            .collect();
        events.sort_by_key(|e| e.t_us);
        let stream = TactileEventStream {
            width: WIDTH,
            height: HEIGHT,
            duration_us: DURATION,
            events,
        };
        let delta = k * 100_000;
        let grid = RegionGrid::default();
        let shifted = TactileEventStream {
            events: stream
                .events
                .iter()
                .map(|e| TactileEvent { t_us: e.t_us + delta, ..*e })
                .collect(),
            ..stream.clone()
        };
        let a = extract_features(&stream, &grid, 100_000);
        let b = extract_features(&shifted, &grid, 100_000);
        for (ra, rb) in a.regions.iter().zip(&b.regions) {
            prop_assert_eq!(ra.event_count, rb.event_count);
            prop_assert_eq!(ra.event_duration_us, rb.event_duration_us);
            // Identical multiset of window counts; accumulation order may
            // differ by an ulp.
            prop_assert!((ra.event_deviation - rb.event_deviation).abs() <= 1e-12);
            if ra.event_count > 0 {
                prop_assert_eq!(ra.peak_time_us + delta, rb.peak_time_us);
            }
        }
    }

    #[test]
    fn encoded_parameters_stay_inside_target_ranges(
        cal_features in arb_features(),
        query in arb_features(),
    ) {
        if let Ok(cal) = calibrate(&[cal_features]) {
            let pattern = encode(&query, &cal);
            for e in &pattern.electrodes {
                prop_assert!((4..=10).contains(&e.num_pulses));
                prop_assert!((4.0..=20.0).contains(&e.phase_amplitude_ua));
                prop_assert!((50..=300).contains(&e.phase_duration_us));
                prop_assert!(e.trigger_delay_us <= 4000);
            }
        }
    }

    #[test]
    fn encoding_is_monotone_in_event_count(
        cal_features in arb_features(),
        c1 in 0u64..100_000,
        c2 in 0u64..100_000,
    ) {
        let cal: EncoderCalibration = match calibrate(&[cal_features]) {
            Ok(c) => c,
            Err(_) => return Ok(()),
        };
        let (lo, hi) = (c1.min(c2), c1.max(c2));
        let mk = |count| RegionFeatureSet {
            regions: vec![RegionFeatures {
                event_count: count,
                event_duration_us: 0,
                peak_time_us: 0,
                event_deviation: 0.0,
            }],
        };
        // Zero-count regions are a special case; compare positive counts.
        prop_assume!(lo > 0);
        let p_lo = encode(&mk(lo), &cal);
        let p_hi = encode(&mk(hi), &cal);
        prop_assert!(p_lo.electrodes[0].num_pulses <= p_hi.electrodes[0].num_pulses);
    }

    #[test]
    fn center_of_activity_is_scale_invariant(
        counts in prop::collection::vec(0.0f64..1000.0, 8),
        scale in 0.001f64..1000.0,
    ) {
        let layout = ElectrodeLayout::default();
        let total: f64 = counts.iter().sum();
        prop_assume!(total > 0.0);
        let scaled: Vec<f64> = counts.iter().map(|c| c * scale).collect();
        let a = center_of_activity(&counts, &layout).unwrap();
        let b = center_of_activity(&scaled, &layout).unwrap();
        prop_assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9);
    }

    #[test]
    fn center_of_activity_stays_in_hull_bounds(
        counts in prop::collection::vec(0.0f64..1000.0, 8),
    ) {
        let layout = ElectrodeLayout::default();
        let total: f64 = counts.iter().sum();
        prop_assume!(total > 0.0);
        let c = center_of_activity(&counts, &layout).unwrap();
        let min_x = layout.coords.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let max_x = layout.coords.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let min_y = layout.coords.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let max_y = layout.coords.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(c.x >= min_x - 1e-12 && c.x <= max_x + 1e-12);
        prop_assert!(c.y >= min_y - 1e-12 && c.y <= max_y + 1e-12);
    }

    #[test]
    fn silhouette_is_invariant_under_isometries(
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 6..20),
        dx in -5.0f64..5.0,
        dy in -5.0f64..5.0,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        // Two clusters from alternating points.
        let a: Vec<CenterOfActivity> = pts.iter().step_by(2)
            .map(|&(x, y)| CenterOfActivity { x, y }).collect();
        let b: Vec<CenterOfActivity> = pts.iter().skip(1).step_by(2)
            .map(|&(x, y)| CenterOfActivity { x, y }).collect();
        prop_assume!(a.len() >= 2 && b.len() >= 2);
        let (sin, cos) = angle.sin_cos();
        let iso = |p: &CenterOfActivity| CenterOfActivity {
            x: p.x * cos - p.y * sin + dx,
            y: p.x * sin + p.y * cos + dy,
        };
        let before = silhouette_scores(&[a.clone(), b.clone()]).unwrap();
        let after = silhouette_scores(&[
            a.iter().map(&iso).collect(),
            b.iter().map(&iso).collect(),
        ])
        .unwrap();
        for (ra, rb) in before.iter().zip(&after) {
            for (sa, sb) in ra.iter().zip(rb) {
                prop_assert!((sa - sb).abs() < 1e-9, "{} vs {}", sa, sb);
            }
        }
    }

    #[test]
    fn noised_vectors_remain_nonnegative_and_unselected_channels_identical(
        seed in 0u64..500,
        kind_idx in 0usize..4,
        n in 5usize..40,
    ) {
        let data: Vec<ResponseVector> = (0..n)
            .map(|i| ResponseVector {
                label: TrialLabel::new('A', 0.0, (i % 10) as u8).unwrap(),
                counts: (0..8).map(|d| ((i * 7 + d * 3) % 23) as f64).collect(),
            })
            .collect();
        let spec = NoiseSpec::new(NoiseKind::ALL[kind_idx], seed);
        let (noised, record) = apply_noise(&data, &spec).unwrap();
        prop_assert_eq!(record.channels.len(), 4);
        for (orig, new) in data.iter().zip(&noised) {
            for ch in 0..8 {
                prop_assert!(new.counts[ch] >= 0.0);
                if !record.channels.contains(&ch) {
                    prop_assert_eq!(orig.counts[ch].to_bits(), new.counts[ch].to_bits());
                }
            }
        }
    }

    #[test]
    fn decode_is_additive_over_window_splits(
        times in prop::collection::vec(0i64..500_000, 0..100),
        split in 1i64..499_999,
    ) {
        let mut channels: Vec<Vec<i64>> = vec![Vec::new(); 8];
        for (i, &t) in times.iter().enumerate() {
            channels[i % 8].push(t);
        }
        for ch in channels.iter_mut() {
            ch.sort_unstable();
        }
        let train = SpikeTrain { channels };
        let full = decode(&[&train], RecordingWindow::new(0, 500_000));
        let a = decode(&[&train], RecordingWindow::new(0, split));
        let b = decode(&[&train], RecordingWindow::new(split, 500_000));
        for k in 0..8 {
            prop_assert_eq!(full[k], a[k] + b[k]);
        }
    }

    #[test]
    fn every_trial_lands_in_exactly_one_fold(seed in 0u64..1000) {
        let data: Vec<ResponseVector> = biobraille_core::braille::LETTERS
            .iter()
            .flat_map(|&l| {
                biobraille_core::braille::DEPTHS_MM.iter().flat_map(move |&d| {
                    (0..4u8).map(move |t| ResponseVector {
                        label: TrialLabel::new(l, d, t).unwrap(),
                        counts: vec![0.0; 8],
                    })
                })
            })
            .collect();
        let assignment = stratified_folds(&data, 4, seed).unwrap();
        prop_assert_eq!(assignment.len(), data.len());
        prop_assert!(assignment.iter().all(|&f| f < 4));
        // Strata of 4 trials split one per fold.
        let mut per_fold = [0usize; 4];
        for &f in &assignment {
            per_fold[f] += 1;
        }
        prop_assert!(per_fold.iter().all(|&c| c == data.len() / 4));
    }
}
