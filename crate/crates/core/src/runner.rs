//! End-to-end scenario runner: configuration, orchestration, reports and manifest.
//!
//! The pipeline is scene synthesis, then per mode × target × subband
//! beamforming, wideband synthesis, range-Doppler processing, CFAR detection
//! and evaluation. Work items are independent and are collected in a fixed
//! order, so outputs do not depend on the number of worker threads.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array_model::{global_steering, reference_spatial_freq, spatial_freq_at, ArrayLayout, SpatialFrequency};
use crate::beamformer::{
    beam_pattern, beamspace_weights, estimate_covariance, lift, mvdr_weights, AngleGrid, BeamPattern, Correlator,
};
use crate::beamspace::{beamspace_stacked, plan_window, windowed_steering, BeamspaceTransform, BeamspaceWindow};
use crate::detector::{
    detect_target, evaluate, range_doppler, synthesize_wideband, CfarConfig, ComparisonTable, DetectionReport,
    RangeDopplerMap,
};
use crate::error::{Error, Result};
use crate::flatbin;
use crate::scene::{scenario_library, synthesize, GroundTruth, Scenario, SnapshotMatrix, SubbandSnapshots};

/// Beamformer variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// Full-dimension element-space MVDR over the whole aperture.
    #[serde(rename = "oracle-full")]
    Oracle,
    /// Windowed beamspace MVDR on one stand-alone subarray.
    #[serde(rename = "single-beamspace")]
    Single,
    /// Coordinated tiled windowed beamspace MVDR over all tiles.
    #[serde(rename = "tiled-beamspace")]
    Tiled,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Oracle, Mode::Single, Mode::Tiled];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Oracle => "oracle-full",
            Mode::Single => "single-beamspace",
            Mode::Tiled => "tiled-beamspace",
        }
    }

    pub fn is_beamspace(&self) -> bool {
        !matches!(self, Mode::Oracle)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "mode",
                name: s.to_string(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 8x32 aperture as 4x2 tiles of 2x16, 4x8 single subarray.
    Desk,
    /// 16x64 aperture as 4x2 tiles of 4x32, one tile as single array, 32 subbands.
    Paper,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(Error::Unknown {
                kind: "profile",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubarrayShape {
    pub elems_z: usize,
    pub elems_x: usize,
}

struct ProfileDefaults {
    layout: ArrayLayout,
    single: SubarrayShape,
    n_subbands: Option<usize>,
}

impl Profile {
    fn defaults(self) -> ProfileDefaults {
        match self {
            Profile::Desk => ProfileDefaults {
                layout: ArrayLayout {
                    tiles_z: 4,
                    tiles_x: 2,
                    elems_z: 2,
                    elems_x: 16,
                    design_freq_hz: 3e9,
                },
                single: SubarrayShape { elems_z: 4, elems_x: 8 },
                n_subbands: None,
            },
            Profile::Paper => ProfileDefaults {
                layout: ArrayLayout {
                    tiles_z: 4,
                    tiles_x: 2,
                    elems_z: 4,
                    elems_x: 32,
                    design_freq_hz: 3e9,
                },
                single: SubarrayShape { elems_z: 4, elems_x: 32 },
                n_subbands: Some(32),
            },
        }
    }
}

fn default_window(mode: Mode) -> Option<[usize; 2]> {
    match mode {
        Mode::Oracle => None,
        Mode::Single => Some([4, 4]),
        Mode::Tiled => Some([2, 2]),
    }
}

/// Default relative diagonal loading (fraction of `trace / d`).
pub const DEFAULT_LOADING_FACTOR: f64 = 1e-3;

/// Default training-set size for a covariance of dimension `dim`.
pub fn default_snapshots(dim: usize) -> usize {
    4 * dim
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<Scenario>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub mode: Mode,
    /// `[W_z, W_x]`; ignored by the oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternRequest {
    pub target_id: usize,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub az_span_deg: f64,
    pub el_span_deg: f64,
    pub step_deg: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            az_span_deg: 60.0,
            el_span_deg: 30.0,
            step_deg: 1.0,
        }
    }
}

fn default_true() -> bool {
    true
}

/// User-facing run configuration, as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub profile: Option<Profile>,
    #[serde(default)]
    pub layout: Option<ArrayLayout>,
    #[serde(default)]
    pub single_array: Option<SubarrayShape>,
    pub scenario: ScenarioSource,
    /// Uniform INR override for every interferer.
    #[serde(default)]
    pub inr_db: Option<f64>,
    #[serde(default)]
    pub n_subbands: Option<usize>,
    /// Omitted: single and tiled beamspace when a profile is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeSpec>>,
    #[serde(default)]
    pub snapshots: Option<usize>,
    #[serde(default)]
    pub loading_factor: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub cfar: Option<CfarConfig>,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub patterns: Vec<PatternRequest>,
    #[serde(default)]
    pub pattern_grid: Option<GridSpec>,
    #[serde(default)]
    pub export_snapshots: bool,
    #[serde(default)]
    pub export_maps: bool,
    #[serde(default)]
    pub export_windows: bool,
    #[serde(default = "default_true")]
    pub dimensionality_benchmark: bool,
}

impl RunConfig {
    /// Minimal config for a profile and a library scenario.
    pub fn for_library(profile: Profile, scenario: &str) -> Self {
        RunConfig {
            profile: Some(profile),
            layout: None,
            single_array: None,
            scenario: ScenarioSource {
                library: Some(scenario.to_string()),
                ..Default::default()
            },
            inr_db: None,
            n_subbands: None,
            modes: None,
            snapshots: None,
            loading_factor: None,
            seed: 0,
            threads: None,
            cfar: None,
            output_dir: None,
            patterns: vec![],
            pattern_grid: None,
            export_snapshots: false,
            export_maps: false,
            export_windows: false,
            dimensionality_benchmark: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn with_modes(mut self, modes: &[(Mode, Option<[usize; 2]>)]) -> Self {
        self.modes = Some(
            modes
                .iter()
                .map(|&(mode, window)| ModeSpec { mode, window })
                .collect(),
        );
        self
    }

    /// Applies defaults and loads the scenario; returns every problem found.
    pub fn resolve_diagnostics(&self, base_dir: &Path) -> std::result::Result<ResolvedConfig, Vec<Diagnostic>> {
        let mut diags = vec![];
        let defaults = self.profile.map(Profile::defaults);
        let layout = match (self.layout, &defaults) {
            (Some(l), _) => l,
            (None, Some(d)) => d.layout,
            (None, None) => {
                diags.push(Diagnostic::new("layout", "required when no profile is given"));
                ArrayLayout {
                    tiles_z: 1,
                    tiles_x: 1,
                    elems_z: 1,
                    elems_x: 1,
                    design_freq_hz: 1.0,
                }
            }
        };
        if let Err(e) = layout.validate() {
            diags.push(Diagnostic::from_error("layout", e));
        }
        let single = self
            .single_array
            .or(defaults.as_ref().map(|d| d.single))
            .unwrap_or(SubarrayShape {
                elems_z: layout.elems_z,
                elems_x: layout.elems_x,
            });

        let scenario = match self.load_scenario(base_dir) {
            Ok(mut s) => {
                if let Some(inr) = self.inr_db {
                    s = s.with_uniform_inr(inr);
                }
                if let Some(l) = self.n_subbands.or(defaults.as_ref().and_then(|d| d.n_subbands)) {
                    s.waveform.n_subbands = l;
                }
                if s.waveform.design_check_carrier(layout.design_freq_hz).is_err() {
                    diags.push(Diagnostic::new(
                        "layout.design_freq_hz",
                        "must equal the waveform carrier so that spacing is half a wavelength at the carrier",
                    ));
                }
                Some(s)
            }
            Err(e) => {
                diags.push(Diagnostic::from_error("scenario", e));
                None
            }
        };

        let modes: Vec<ModeSpec> = match (&self.modes, self.profile) {
            (Some(m), _) => m.clone(),
            (None, Some(_)) => vec![
                ModeSpec {
                    mode: Mode::Single,
                    window: None,
                },
                ModeSpec {
                    mode: Mode::Tiled,
                    window: None,
                },
            ],
            (None, None) => vec![],
        };
        if modes.is_empty() {
            diags.push(Diagnostic::new("modes", "at least one mode is required"));
        }
        let mut resolved_modes = vec![];
        for (i, spec) in modes.iter().enumerate() {
            if modes[..i].iter().any(|m| m.mode == spec.mode) {
                diags.push(Diagnostic::new(format!("modes[{i}].mode"), "listed twice"));
                continue;
            }
            let window = match spec.mode {
                Mode::Oracle => None,
                m => spec.window.or(default_window(m)),
            };
            if let Some([wz, wx]) = window {
                let (nz, nx) = match spec.mode {
                    Mode::Single => (single.elems_z, single.elems_x),
                    _ => (layout.elems_z, layout.elems_x),
                };
                if wz == 0 || wz > nz {
                    diags.push(Diagnostic::new(
                        format!("modes[{i}].window"),
                        format!("W_z = {wz} must lie in 1..={nz} for {}", spec.mode),
                    ));
                }
                if wx == 0 || wx > nx {
                    diags.push(Diagnostic::new(
                        format!("modes[{i}].window"),
                        format!("W_x = {wx} must lie in 1..={nx} for {}", spec.mode),
                    ));
                }
            }
            resolved_modes.push(ModeSpec {
                mode: spec.mode,
                window,
            });
        }
        if modes.iter().any(|m| m.mode == Mode::Single)
            && (single.elems_z == 0
                || single.elems_x == 0
                || single.elems_z > layout.rows()
                || single.elems_x > layout.cols())
        {
            diags.push(Diagnostic::new(
                "single_array",
                format!(
                    "{}x{} subarray does not fit the {}x{} aperture",
                    single.elems_z,
                    single.elems_x,
                    layout.rows(),
                    layout.cols()
                ),
            ));
        }

        let loading_factor = self.loading_factor.unwrap_or(DEFAULT_LOADING_FACTOR);
        if !(loading_factor >= 0.0 && loading_factor.is_finite()) {
            diags.push(Diagnostic::new("loading_factor", "must be finite and non-negative"));
        }
        if self.threads == Some(0) {
            diags.push(Diagnostic::new("threads", "must be at least 1"));
        }
        let cfar = self.cfar.unwrap_or_default();
        if let Err(e) = cfar.validate() {
            diags.push(Diagnostic::from_error("cfar", e));
        }
        if let Some(s) = &scenario {
            match s.validate() {
                Ok(()) => {
                    let available = s.waveform.n_snapshots();
                    if let Some(n) = self.snapshots {
                        if n == 0 || n > available {
                            diags.push(Diagnostic::new(
                                "snapshots",
                                format!("{n} outside 1..={available} available per subband"),
                            ));
                        }
                    }
                    if s.waveform.n_range_bins() < 2 * cfar.half_width() + 1 {
                        diags.push(Diagnostic::new("cfar", "stencil wider than the range window"));
                    }
                }
                Err(e) => {
                    let prefix = self.scenario_prefix();
                    diags.push(match e {
                        Error::Config { path, message } => Diagnostic::new(format!("{prefix}.{path}"), message),
                        other => Diagnostic::new(prefix, other.to_string()),
                    })
                }
            }
            for (i, p) in self.patterns.iter().enumerate() {
                if p.target_id == 0 || p.target_id > s.targets.len() {
                    diags.push(Diagnostic::new(
                        format!("patterns[{i}].target_id"),
                        format!("unknown target (scenario has {})", s.targets.len()),
                    ));
                }
                if !resolved_modes.iter().any(|m| m.mode == p.mode) {
                    diags.push(Diagnostic::new(format!("patterns[{i}].mode"), "mode is not part of this run"));
                }
            }
        }
        let grid = self.pattern_grid.unwrap_or_default();
        if !(grid.step_deg > 0.0 && grid.az_span_deg >= 0.0 && grid.el_span_deg >= 0.0
            && grid.az_span_deg < 90.0 && grid.el_span_deg < 90.0)
        {
            diags.push(Diagnostic::new("pattern_grid", "spans must lie in [0, 90) and step be positive"));
        }

        match (diags.is_empty(), scenario) {
            (true, Some(scenario)) => Ok(ResolvedConfig {
                layout,
                single_array: single,
                scenario,
                modes: resolved_modes,
                snapshots: self.snapshots,
                loading_factor,
                seed: self.seed,
                cfar,
                patterns: self.patterns.clone(),
                pattern_grid: grid,
                export_snapshots: self.export_snapshots,
                export_maps: self.export_maps,
                export_windows: self.export_windows,
                dimensionality_benchmark: self.dimensionality_benchmark,
            }),
            _ => Err(diags),
        }
    }

    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedConfig> {
        self.resolve_diagnostics(base_dir).map_err(|d| {
            let first = &d[0];
            Error::config(first.path.clone(), first.message.clone())
        })
    }

    fn scenario_prefix(&self) -> String {
        let src = &self.scenario;
        match (&src.library, &src.file) {
            (Some(name), _) => format!("scenario.library({name})"),
            (None, Some(file)) => format!("scenario.file({file})"),
            _ => "scenario.inline".into(),
        }
    }

    fn load_scenario(&self, base_dir: &Path) -> Result<Scenario> {
        let src = &self.scenario;
        let given = [src.library.is_some(), src.file.is_some(), src.inline.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if given != 1 {
            return Err(Error::config(
                "scenario",
                "exactly one of `library`, `file` or `inline` is required",
            ));
        }
        if let Some(name) = &src.library {
            return scenario_library(name, src.scale.unwrap_or(1))
                .map_err(|e| Error::config("scenario.library", e.to_string()));
        }
        if let Some(file) = &src.file {
            let path = base_dir.join(file);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            return Scenario::from_json(&text).map_err(|e| match e {
                Error::Config { path: p, message } => Error::config(format!("{}.{p}", self.scenario_prefix()), message),
                other => other,
            });
        }
        Ok(src.inline.clone().expect("checked above"))
    }
}

impl crate::scene::Waveform {
    fn design_check_carrier(&self, design_freq_hz: f64) -> Result<()> {
        if (self.carrier_hz - design_freq_hz).abs() <= 1e-9 * design_freq_hz {
            Ok(())
        } else {
            Err(Error::domain("carrier differs from design frequency"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            path: path.into(),
            message: message.into(),
        }
    }

    fn from_error(default_path: &str, e: Error) -> Self {
        match e {
            Error::Config { path, message } => Diagnostic::new(path, message),
            other => Diagnostic::new(default_path, other.to_string()),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Schema and physics checks of a config file, without running anything.
pub fn validate(path: &Path) -> Result<Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = match RunConfig::from_json(&text) {
        Ok(c) => c,
        Err(Error::Config { path, message }) => return Ok(vec![Diagnostic::new(path, message)]),
        Err(e) => return Err(e),
    };
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Ok(match cfg.resolve_diagnostics(base) {
        Ok(_) => vec![],
        Err(d) => d,
    })
}

/// Fully explicit configuration; its canonical JSON is hashed into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub layout: ArrayLayout,
    pub single_array: SubarrayShape,
    pub scenario: Scenario,
    pub modes: Vec<ModeSpec>,
    pub snapshots: Option<usize>,
    pub loading_factor: f64,
    pub seed: u64,
    pub cfar: CfarConfig,
    pub patterns: Vec<PatternRequest>,
    pub pattern_grid: GridSpec,
    pub export_snapshots: bool,
    pub export_maps: bool,
    pub export_windows: bool,
    pub dimensionality_benchmark: bool,
}

impl ResolvedConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn window_for(&self, mode: Mode) -> Option<[usize; 2]> {
        self.modes.iter().find(|m| m.mode == mode).and_then(|m| m.window)
    }

    /// Geometry the given mode beamforms with.
    pub fn processing_layout(&self, mode: Mode) -> ArrayLayout {
        match mode {
            Mode::Single => ArrayLayout {
                tiles_z: 1,
                tiles_x: 1,
                elems_z: self.single_array.elems_z,
                elems_x: self.single_array.elems_x,
                design_freq_hz: self.layout.design_freq_hz,
            },
            _ => self.layout,
        }
    }

    /// Stacked-snapshot columns feeding the given mode (`None` = all).
    fn column_map(&self, mode: Mode) -> Option<Vec<usize>> {
        match mode {
            Mode::Single => {
                let s = self.single_array;
                Some(
                    (0..s.elems_x)
                        .flat_map(|x| (0..s.elems_z).map(move |z| (z, x)))
                        .map(|(z, x)| self.layout.stacked_index(z, x))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    fn covariance_dim(&self, mode: Mode) -> usize {
        let l = self.processing_layout(mode);
        match self.window_for(mode) {
            Some([wz, wx]) => l.n_tiles() * wz * wx,
            None => l.n_elements(),
        }
    }

    /// Training snapshots per subband for this mode.
    pub fn training_size(&self, mode: Mode) -> usize {
        let available = self.scenario.waveform.n_snapshots();
        self.snapshots
            .unwrap_or_else(|| default_snapshots(self.covariance_dim(mode)))
            .min(available)
    }
}

/// Evenly strided subset of `n` out of `total` rows.
pub fn training_rows(total: usize, n: usize) -> Vec<usize> {
    if n >= total {
        return (0..total).collect();
    }
    (0..n).map(|i| i * total / n).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeResult {
    pub mode: Mode,
    pub report: DetectionReport,
    /// Element-space (lifted where applicable) correlator of each target at the centre subband.
    pub center_correlators: Vec<Vec<Complex64>>,
    /// Geometry of `center_correlators`.
    pub pattern_layout: ArrayLayout,
    pub maps: Vec<RangeDopplerMap>,
    pub windows: Vec<BeamspaceWindow>,
    pub max_distortionless_error: f64,
    pub ill_conditioned: usize,
    pub training_snapshots: usize,
    pub covariance_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionalityLedger {
    pub reduced_mode: Mode,
    pub reduced_dim: usize,
    pub full_dim: usize,
    pub reduced_covariance_s: f64,
    pub full_covariance_s: f64,
    pub reduced_solve_s: f64,
    pub full_solve_s: f64,
    pub covariance_speedup: f64,
    pub solve_speedup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub config: ResolvedConfig,
    pub truth: GroundTruth,
    pub modes: Vec<ModeResult>,
    pub table: ComparisonTable,
    pub dimensionality: Option<DimensionalityLedger>,
    pub timings: Vec<StageTiming>,
}

impl RunResult {
    pub fn mode(&self, mode: Mode) -> Option<&ModeResult> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    pub fn max_distortionless_error(&self) -> f64 {
        self.modes.iter().map(|m| m.max_distortionless_error).fold(0.0, f64::max)
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn target_omega(cfg: &ResolvedConfig, k: usize, f_hz: f64) -> Result<SpatialFrequency> {
    let angle = cfg.scenario.targets[k].angle;
    spatial_freq_at(reference_spatial_freq(angle)?, f_hz, cfg.layout.design_freq_hz)
}

/// Per-subband data prepared once and shared by every target of a mode.
enum Prepared {
    Element {
        data: SnapshotMatrix,
        cov: crate::beamformer::CovarianceEstimate,
    },
    Beamspace {
        cube: SnapshotMatrix,
    },
}

struct UnitOutput {
    series: Vec<Complex64>,
    correlator: Correlator,
    element_weights: Option<Vec<Complex64>>,
    window: Option<BeamspaceWindow>,
}

fn gather(cube: &SnapshotMatrix, tile_len: usize, idx: &[usize], rows: &[usize]) -> SnapshotMatrix {
    let n_tiles = cube.n_cols() / tile_len;
    let w = idx.len();
    let mut out = SnapshotMatrix::zeros(rows.len(), n_tiles * w);
    for (o, &r) in rows.iter().enumerate() {
        let src = cube.row(r);
        let dst = out.row_mut(o);
        for t in 0..n_tiles {
            for (j, &i) in idx.iter().enumerate() {
                dst[t * w + j] = src[t * tile_len + i];
            }
        }
    }
    out
}

struct ModeContext<'a> {
    cfg: &'a ResolvedConfig,
    mode: Mode,
    layout: ArrayLayout,
    transform: BeamspaceTransform,
    training: Vec<usize>,
    prepared: Vec<Prepared>,
    centers: &'a [f64],
}

impl<'a> ModeContext<'a> {
    fn new(cfg: &'a ResolvedConfig, mode: Mode, snaps: &'a SubbandSnapshots) -> Result<Self> {
        let layout = cfg.processing_layout(mode);
        let transform = BeamspaceTransform::for_layout(&layout);
        let training = training_rows(snaps.n_snapshots(), cfg.training_size(mode));
        let cols = cfg.column_map(mode);
        let prepared = snaps
            .subbands
            .par_iter()
            .map(|full| -> Result<Prepared> {
                let data = match &cols {
                    Some(c) => full.select_cols(c),
                    None => full.clone(),
                };
                if mode.is_beamspace() {
                    let rows = data
                        .rows_iter()
                        .map(|y| beamspace_stacked(&transform, y))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Prepared::Beamspace {
                        cube: SnapshotMatrix::from_row_vecs(&rows)?,
                    })
                } else {
                    let cov = estimate_covariance(&data.select_rows(&training), cfg.loading_factor)?;
                    Ok(Prepared::Element { data, cov })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeContext {
            cfg,
            mode,
            layout,
            transform,
            training,
            prepared,
            centers: &snaps.subband_center_hz,
        })
    }

    fn unit(&self, k: usize, l: usize, keep_element_weights: bool) -> Result<UnitOutput> {
        let omega = target_omega(self.cfg, k, self.centers[l])?;
        match &self.prepared[l] {
            Prepared::Element { data, cov } => {
                let a = global_steering(&self.layout, omega);
                let c = mvdr_weights(cov, &a)?;
                let series = data.rows_iter().map(|y| c.apply(y)).collect();
                Ok(UnitOutput {
                    series,
                    element_weights: keep_element_weights.then(|| c.weights.clone()),
                    correlator: c,
                    window: None,
                })
            }
            Prepared::Beamspace { cube } => {
                let [wz, wx] = self.cfg.window_for(self.mode).expect("beamspace mode has a window");
                let window = plan_window(&self.layout, omega, wz, wx)?.labelled(k + 1, l);
                let idx = window.indices();
                let n = self.layout.elems_per_tile();
                let train = gather(cube, n, &idx, &self.training);
                let cov = estimate_covariance(&train, self.cfg.loading_factor)?;
                let a = windowed_steering(&self.layout, &self.transform, &window, omega)?;
                let c = beamspace_weights(&cov, &a)?;
                let all: Vec<usize> = (0..cube.n_rows()).collect();
                let reduced = gather(cube, n, &idx, &all);
                let series = reduced.rows_iter().map(|y| c.apply(y)).collect();
                let element_weights = if keep_element_weights {
                    Some(lift(&c.weights, &window, &self.transform)?.weights)
                } else {
                    None
                };
                Ok(UnitOutput {
                    series,
                    correlator: c,
                    element_weights,
                    window: Some(window),
                })
            }
        }
    }
}

fn beamform_mode(cfg: &ResolvedConfig, mode: Mode, snaps: &SubbandSnapshots, truth: &GroundTruth) -> Result<ModeResult> {
    let ctx = ModeContext::new(cfg, mode, snaps)?;
    let wf = &cfg.scenario.waveform;
    let n_targets = cfg.scenario.targets.len();
    let n_sub = wf.n_subbands;
    let center = wf.center_subband();
    let units: Vec<(usize, usize)> = (0..n_targets).flat_map(|k| (0..n_sub).map(move |l| (k, l))).collect();
    let outputs = units
        .par_iter()
        .map(|&(k, l)| ctx.unit(k, l, l == center))
        .collect::<Result<Vec<_>>>()?;

    let mut max_err: f64 = 0.0;
    let mut ill = 0;
    let mut windows = vec![];
    let mut per_target: Vec<Vec<UnitOutput>> = (0..n_targets).map(|_| Vec::with_capacity(n_sub)).collect();
    for ((k, _), out) in units.iter().zip(outputs) {
        max_err = max_err.max(out.correlator.distortionless_error());
        ill += out.correlator.ill_conditioned as usize;
        if let Some(w) = &out.window {
            windows.push(w.clone());
        }
        per_target[*k].push(out);
    }

    let detections = per_target
        .par_iter()
        .zip(&truth.targets)
        .map(|(outs, t)| -> Result<(RangeDopplerMap, crate::detector::TargetDetection)> {
            let series: Vec<Vec<Complex64>> = outs.iter().map(|o| o.series.clone()).collect();
            let pulses = synthesize_wideband(&series, wf)?;
            let mut map = range_doppler(&pulses, wf)?;
            map.target_id = t.id;
            map.mode = Some(mode);
            let det = detect_target(&map, t, wf, &cfg.cfar)?;
            Ok((map, det))
        })
        .collect::<Result<Vec<_>>>()?;
    let (maps, dets): (Vec<_>, Vec<_>) = detections.into_iter().unzip();
    let center_correlators = per_target
        .iter_mut()
        .map(|outs| outs[center].element_weights.take().expect("centre weights kept"))
        .collect();
    Ok(ModeResult {
        mode,
        report: DetectionReport { mode, targets: dets },
        center_correlators,
        pattern_layout: ctx.layout,
        maps,
        windows,
        max_distortionless_error: max_err,
        ill_conditioned: ill,
        training_snapshots: ctx.training.len(),
        covariance_dim: cfg.covariance_dim(mode),
    })
}

fn min_time<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..reps.max(1) {
        let t0 = Instant::now();
        let v = f()?;
        best = best.min(t0.elapsed().as_secs_f64());
        last = Some(v);
    }
    Ok((best, last.expect("at least one repetition")))
}

/// Wall-clock of covariance estimation and MVDR solve, reduced vs full dimension, on subband 0.
pub fn measure_dimensionality(cfg: &ResolvedConfig, snaps: &SubbandSnapshots) -> Result<Option<DimensionalityLedger>> {
    let Some(mode) = [Mode::Tiled, Mode::Single]
        .into_iter()
        .find(|m| cfg.modes.iter().any(|s| s.mode == *m))
    else {
        return Ok(None);
    };
    if cfg.scenario.targets.is_empty() {
        return Ok(None);
    }
    let l = 0;
    let f = snaps.subband_center_hz[l];
    let omega = target_omega(cfg, 0, f)?;
    let data = &snaps.subbands[l];

    let layout = cfg.processing_layout(mode);
    let transform = BeamspaceTransform::for_layout(&layout);
    let [wz, wx] = cfg.window_for(mode).expect("beamspace window");
    let window = plan_window(&layout, omega, wz, wx)?;
    let local = match cfg.column_map(mode) {
        Some(c) => data.select_cols(&c),
        None => data.clone(),
    };
    let reduced_rows = training_rows(data.n_rows(), cfg.training_size(mode));
    let reduced = crate::beamformer::reduce_snapshots(&transform, &window, &local.select_rows(&reduced_rows))?;
    let a_red = windowed_steering(&layout, &transform, &window, omega)?;
    let (rc, cov_red) = min_time(5, || estimate_covariance(&reduced, cfg.loading_factor))?;
    let (rs, _) = min_time(20, || mvdr_weights(&cov_red, &a_red))?;

    let full_rows = training_rows(data.n_rows(), cfg.training_size(Mode::Oracle));
    let full = data.select_rows(&full_rows);
    let a_full = global_steering(&cfg.layout, omega);
    let (fc, cov_full) = min_time(2, || estimate_covariance(&full, cfg.loading_factor))?;
    let (fs, _) = min_time(5, || mvdr_weights(&cov_full, &a_full))?;
    Ok(Some(DimensionalityLedger {
        reduced_mode: mode,
        reduced_dim: a_red.len(),
        full_dim: a_full.len(),
        reduced_covariance_s: rc,
        full_covariance_s: fc,
        reduced_solve_s: rs,
        full_solve_s: fs,
        covariance_speedup: fc / rc,
        solve_speedup: fs / rs,
    }))
}

/// Runs the whole pipeline in memory.
pub fn execute(cfg: &ResolvedConfig, threads: Option<usize>) -> Result<RunResult> {
    with_pool(threads, || execute_inner(cfg))?
}

fn execute_inner(cfg: &ResolvedConfig) -> Result<RunResult> {
    let mut timings = vec![];
    let t0 = Instant::now();
    let (snaps, truth) = synthesize(&cfg.layout, &cfg.scenario, cfg.seed)?;
    timings.push(StageTiming {
        stage: "synthesize".into(),
        seconds: t0.elapsed().as_secs_f64(),
    });
    let mut modes = vec![];
    for spec in &cfg.modes {
        let t = Instant::now();
        modes.push(beamform_mode(cfg, spec.mode, &snaps, &truth)?);
        timings.push(StageTiming {
            stage: format!("process:{}", spec.mode),
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    let reports: Vec<DetectionReport> = modes.iter().map(|m| m.report.clone()).collect();
    let table = evaluate(&cfg.scenario.name, &truth, &reports)?;
    let dimensionality = if cfg.dimensionality_benchmark {
        let t = Instant::now();
        let d = measure_dimensionality(cfg, &snaps)?;
        timings.push(StageTiming {
            stage: "dimensionality_benchmark".into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        d
    } else {
        None
    };
    Ok(RunResult {
        config: cfg.clone(),
        truth,
        modes,
        table,
        dimensionality,
        timings,
    })
}

/// Beam pattern of one target's centre-subband correlator.
pub fn pattern_for(result: &RunResult, target_id: usize, mode: Mode) -> Result<BeamPattern> {
    let m = result.mode(mode).ok_or_else(|| Error::Unknown {
        kind: "mode",
        name: mode.to_string(),
    })?;
    if target_id == 0 || target_id > m.center_correlators.len() {
        return Err(Error::Unknown {
            kind: "target",
            name: target_id.to_string(),
        });
    }
    let g = result.config.pattern_grid;
    let grid = AngleGrid::symmetric(g.az_span_deg, g.el_span_deg, g.step_deg)?;
    let f = result.config.scenario.waveform.subband_center_hz(result.config.scenario.waveform.center_subband());
    beam_pattern(&m.center_correlators[target_id - 1], &m.pattern_layout, &grid, f)
}

pub const PATTERN_CSV_HEADER: &str = "azimuth_deg,elevation_deg,p,p_db";

pub fn pattern_csv(p: &BeamPattern) -> String {
    use std::fmt::Write as _;
    let mut out = String::from(PATTERN_CSV_HEADER);
    out.push('\n');
    for (i, az) in p.grid.azimuth_deg.iter().enumerate() {
        for (j, el) in p.grid.elevation_deg.iter().enumerate() {
            let v = p.at(i, j);
            let db = 20.0 * v.max(1e-300).log10();
            let _ = writeln!(out, "{az:.3},{el:.3},{v:.9},{db:.6}");
        }
    }
    out
}

/// Computes only what is needed for one pattern and returns its CSV.
pub fn emit_pattern(cfg: &ResolvedConfig, target_id: usize, mode: Mode, threads: Option<usize>) -> Result<String> {
    if !cfg.modes.iter().any(|m| m.mode == mode) {
        return Err(Error::Unknown {
            kind: "mode",
            name: mode.to_string(),
        });
    }
    if target_id == 0 || target_id > cfg.scenario.targets.len() {
        return Err(Error::Unknown {
            kind: "target",
            name: target_id.to_string(),
        });
    }
    with_pool(threads, || -> Result<String> {
        let (snaps, _) = synthesize(&cfg.layout, &cfg.scenario, cfg.seed)?;
        let ctx = ModeContext::new(cfg, mode, &snaps)?;
        let center = cfg.scenario.waveform.center_subband();
        let unit = ctx.unit(target_id - 1, center, true)?;
        let weights = unit.element_weights.expect("weights kept");
        let g = cfg.pattern_grid;
        let grid = AngleGrid::symmetric(g.az_span_deg, g.el_span_deg, g.step_deg)?;
        let pattern = beam_pattern(&weights, &ctx.layout, &grid, snaps.subband_center_hz[center])?;
        Ok(pattern_csv(&pattern))
    })?
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: Mode,
    pub window: Option<[usize; 2]>,
    pub covariance_dim: usize,
    pub training_snapshots: usize,
    pub detected: usize,
    pub max_distortionless_error: f64,
    pub ill_conditioned: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub modes: Vec<ModeSummary>,
    pub timings: Vec<StageTiming>,
    pub dimensionality: Option<DimensionalityLedger>,
    pub outputs: Vec<OutputFile>,
}

fn write_file(dir: &Path, name: &str, contents: &[u8], outputs: &mut Vec<OutputFile>) -> Result<PathBuf> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    outputs.push(OutputFile {
        path: name.to_string(),
        sha256: hex::encode(Sha256::digest(contents)),
        bytes: contents.len() as u64,
    });
    Ok(path)
}

fn record_existing(dir: &Path, path: &Path, outputs: &mut Vec<OutputFile>) -> Result<()> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let rel = path.strip_prefix(dir).unwrap_or(path).display().to_string();
    outputs.push(OutputFile {
        path: rel,
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len() as u64,
    });
    Ok(())
}

/// Executes the run and writes reports, requested patterns and the manifest into `out_dir`.
pub fn run(cfg: &ResolvedConfig, out_dir: &Path, threads: Option<usize>) -> Result<(RunManifest, RunResult)> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let result = execute(cfg, threads)?;
    let mut outputs = vec![];
    let t_write = Instant::now();
    write_file(out_dir, "resolved_config.json", cfg.to_json().as_bytes(), &mut outputs)?;
    write_file(out_dir, "report.csv", result.table.to_csv().as_bytes(), &mut outputs)?;
    write_file(out_dir, "report.json", result.table.to_json().as_bytes(), &mut outputs)?;
    write_file(
        out_dir,
        "truth.json",
        serde_json::to_string_pretty(&result.truth)?.as_bytes(),
        &mut outputs,
    )?;
    for p in &cfg.patterns {
        let pattern = pattern_for(&result, p.target_id, p.mode)?;
        write_file(
            out_dir,
            &format!("pattern_{}_target{}.csv", p.mode, p.target_id),
            pattern_csv(&pattern).as_bytes(),
            &mut outputs,
        )?;
    }
    if cfg.export_windows {
        for m in result.modes.iter().filter(|m| !m.windows.is_empty()) {
            write_file(
                out_dir,
                &format!("windows_{}.json", m.mode),
                serde_json::to_string_pretty(&m.windows)?.as_bytes(),
                &mut outputs,
            )?;
        }
    }
    if cfg.export_maps {
        let dir = out_dir.join("maps");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for m in &result.modes {
            for map in &m.maps {
                let meta = serde_json::json!({
                    "mode": m.mode,
                    "target_id": map.target_id,
                    "range_m": map.range_m,
                    "velocity_mps": map.velocity_mps,
                    "units": "linear power",
                });
                let paths = flatbin::write(
                    &dir,
                    &format!("{}_target{}", m.mode, map.target_id),
                    flatbin::MAGIC_RANGE_DOPPLER,
                    &[map.n_range() as u64, map.n_velocity() as u64],
                    &["range", "velocity"],
                    &flatbin::Payload::Real(map.power.clone()),
                    meta,
                )?;
                for p in &paths {
                    record_existing(out_dir, p, &mut outputs)?;
                }
            }
        }
    }
    if cfg.export_snapshots {
        let (snaps, _) = synthesize(&cfg.layout, &cfg.scenario, cfg.seed)?;
        for p in export_snapshots(out_dir, &snaps, &cfg.layout)? {
            record_existing(out_dir, &p, &mut outputs)?;
        }
    }
    let mut timings = result.timings.clone();
    timings.push(StageTiming {
        stage: "write".into(),
        seconds: t_write.elapsed().as_secs_f64(),
    });
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        threads,
        modes: result
            .modes
            .iter()
            .map(|m| ModeSummary {
                mode: m.mode,
                window: cfg.window_for(m.mode),
                covariance_dim: m.covariance_dim,
                training_snapshots: m.training_snapshots,
                detected: m.report.n_detected(),
                max_distortionless_error: m.max_distortionless_error,
                ill_conditioned: m.ill_conditioned,
            })
            .collect(),
        timings,
        dimensionality: result.dimensionality.clone(),
        outputs,
    };
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok((manifest, result))
}

/// Writes the snapshot cubes as `snapshots.bin` + `snapshots.json`.
pub fn export_snapshots(dir: &Path, snaps: &SubbandSnapshots, layout: &ArrayLayout) -> Result<[PathBuf; 2]> {
    let mut data = Vec::with_capacity(snaps.n_subbands() * snaps.n_snapshots() * snaps.n_elements());
    for s in &snaps.subbands {
        data.extend_from_slice(s.as_slice());
    }
    let meta = serde_json::json!({
        "layout": layout,
        "element_order": "stacked: tile-major, tiles z-fastest, elements z-fastest within tile",
        "subband_center_hz": snaps.subband_center_hz,
        "noise_power": snaps.noise_power,
    });
    flatbin::write(
        dir,
        "snapshots",
        flatbin::MAGIC_SNAPSHOTS,
        &[snaps.n_subbands() as u64, snaps.n_snapshots() as u64, snaps.n_elements() as u64],
        &["subband", "snapshot", "element"],
        &flatbin::Payload::Complex(data),
        meta,
    )
}
