//! Tiled windowed-beamspace MVDR for wideband planar arrays.
//!
//! A tiled planar array is described by [`ArrayLayout`]. [`scene::synthesize`]
//! produces channelized snapshots for a [`Scenario`], the [`beamspace`] module reduces
//! each tile to a small window of DFT bins, [`beamformer`] solves the MVDR
//! problem in that reduced space, and [`detector`] turns the beamformer output
//! into range-Doppler maps and CFAR detections. [`runner`] ties it together.

pub mod array_model;
pub mod beamformer;
pub mod beamspace;
pub mod detector;
pub mod error;
pub mod flatbin;
pub mod runner;
pub mod scene;

/// Propagation speed, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub use array_model::{global_steering, steering_at, ArrayLayout, SourceAngle, SpatialFrequency};
pub use beamformer::{estimate_covariance, mvdr_weights, reduced_mvdr, Correlator, CovarianceEstimate};
pub use beamspace::{plan_window, BeamspaceTransform, BeamspaceWindow};
pub use detector::{CfarConfig, ComparisonTable, DetectionReport, RangeDopplerMap};
pub use error::{Error, Result};
pub use runner::{execute, run, Mode, Profile, ResolvedConfig, RunConfig};
pub use scene::{synthesize, GroundTruth, Scenario, SnapshotMatrix, SubbandSnapshots, Waveform};
