//! Core algorithms for an open-loop bio-hybrid tactile classification test bench.
//!
//! The crate models the full signal path of a Braille-reading experiment in
//! software: synthetic event-camera recordings of Braille swipes, per-region
//! tactile features, multiparameter electrical-stimulation encoding, a seeded
//! stochastic spiking-population stand-in for a neural organoid on an
//! eight-electrode array, spike-count decoding, and classification with
//! noise-robustness evaluation.
//!
//! Everything in here is pure computation over owned buffers: no IO, no global
//! state, no wall clock. All randomness flows from explicit 64-bit seeds
//! through counter-derived ChaCha streams, so every pipeline stage is
//! bit-reproducible and trials can be generated or simulated in parallel.
//! The crate is `no_std` (with `alloc`); file formats and the CLI live in the
//! companion `biobraille` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod braille;
pub mod classify;
pub mod encoder;
pub mod event;
pub mod features;
pub mod metrics;
pub mod noise;
pub mod organoid;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use braille::{BrailleCell, TrialLabel, DEPTHS_MM, LETTERS};
pub use classify::{cross_validate, decode, ClassifierConfig, CvReport, ResponseVector};
pub use encoder::{calibrate, encode, ElectrodeStim, EncoderCalibration, StimPattern};
pub use event::{TactileEvent, TactileEventStream};
pub use features::{extract_features, partition, RegionFeatureSet, RegionGrid};
pub use metrics::{center_of_activity, silhouette_scores, CaCluster, CenterOfActivity};
pub use noise::{apply_noise, NoiseKind, NoiseSpec};
pub use organoid::{build_organoid, ElectrodeLayout, OrganoidConfig, OrganoidModel, SpikeTrain};
pub use synth::{generate_dataset, generate_trial, SynthConfig};
