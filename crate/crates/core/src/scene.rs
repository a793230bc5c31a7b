//! Scenario description, wideband scene synthesis and FFT channelization.
//!
//! Each pulse repetition records `samples_per_pulse` complex baseband samples
//! per element at a sample rate equal to the waveform bandwidth. The
//! channelizer splits every pulse into non-overlapping `L`-sample blocks and
//! takes a unitary `L`-point FFT of each block; FFT bin `l` of block `b` of
//! pulse `m` is snapshot `n = m * (samples_per_pulse / L) + b` of subband `l`.
//! Subband `l` is centred at `carrier + off(l) * B / L` with
//! `off(l) = l` for `l < L / 2` and `l - L` otherwise.
//!
//! Synthesis builds subband snapshots directly from the channelized target
//! echoes, each scaled by the target's steering vector at the subband centre.
//! Jammer and noise samples are drawn per subband. Randomness comes from one
//! ChaCha8 stream per `(subband, pulse)` pair: the generator is seeded with the
//! run seed and switched to stream `(subband << 32) | pulse`, then draws, block
//! by block, every jammer symbol in interferer order followed by the noise of
//! every element in stacked order. Results are identical however the work is
//! scheduled.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::array_model::{steering_at, ArrayLayout, SourceAngle};
use crate::error::{check_len, Error, Result};
use crate::SPEED_OF_LIGHT;

/// Row-major complex matrix; each row is one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl SnapshotMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SnapshotMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        check_len("snapshot matrix data", rows * cols, data.len())?;
        Ok(SnapshotMatrix { rows, cols, data })
    }

    pub fn from_row_vecs(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len("snapshot row", cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(SnapshotMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> SnapshotMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        SnapshotMatrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> SnapshotMatrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for row in self.rows_iter() {
            data.extend(cols.iter().map(|&c| row[c]));
        }
        SnapshotMatrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub n_subbands: usize,
    pub pulses_per_cpi: usize,
    pub samples_per_pulse: usize,
    /// Transmit pulse length in samples.
    pub pulse_samples: usize,
    pub prf_hz: f64,
    /// Linear-FM chirp when true, unmodulated rectangular pulse otherwise.
    #[serde(default = "default_true")]
    pub chirp: bool,
}

fn default_true() -> bool {
    true
}

impl Waveform {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("waveform.{name}"), "must be positive"))
            }
        };
        positive("carrier_hz", self.carrier_hz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("prf_hz", self.prf_hz)?;
        if self.n_subbands == 0 {
            return Err(Error::config("waveform.n_subbands", "must be at least 1"));
        }
        if self.pulses_per_cpi == 0 {
            return Err(Error::config("waveform.pulses_per_cpi", "must be at least 1"));
        }
        if self.samples_per_pulse == 0 || self.samples_per_pulse % self.n_subbands != 0 {
            return Err(Error::config(
                "waveform.samples_per_pulse",
                format!(
                    "{} is not a positive multiple of n_subbands = {}",
                    self.samples_per_pulse, self.n_subbands
                ),
            ));
        }
        if self.pulse_samples == 0 || self.pulse_samples > self.samples_per_pulse {
            return Err(Error::config(
                "waveform.pulse_samples",
                "must lie in 1..=samples_per_pulse",
            ));
        }
        if self.bandwidth_hz / 2.0 >= self.carrier_hz {
            return Err(Error::config(
                "waveform.bandwidth_hz",
                "band extends below 0 Hz",
            ));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn range_bin_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)
    }

    pub fn velocity_bin_mps(&self) -> f64 {
        self.wavelength_m() * self.prf_hz / (2.0 * self.pulses_per_cpi as f64)
    }

    /// Number of matched-filter range gates in which a whole echo fits.
    pub fn n_range_bins(&self) -> usize {
        self.samples_per_pulse - self.pulse_samples + 1
    }

    pub fn max_range_m(&self) -> f64 {
        (self.n_range_bins() - 1) as f64 * self.range_bin_m()
    }

    /// Largest unambiguous radial speed, `lambda * PRF / 4`.
    pub fn max_velocity_mps(&self) -> f64 {
        self.wavelength_m() * self.prf_hz / 4.0
    }

    pub fn blocks_per_pulse(&self) -> usize {
        self.samples_per_pulse / self.n_subbands
    }

    pub fn n_snapshots(&self) -> usize {
        self.pulses_per_cpi * self.blocks_per_pulse()
    }

    /// Signed FFT-bin offset of subband `l` from the carrier.
    pub fn subband_offset(&self, l: usize) -> i64 {
        let n = self.n_subbands as i64;
        let l = l as i64;
        if l < n / 2 || n == 1 {
            l
        } else {
            l - n
        }
    }

    pub fn subband_center_hz(&self, l: usize) -> f64 {
        self.carrier_hz
            + self.subband_offset(l) as f64 * self.bandwidth_hz / self.n_subbands as f64
    }

    /// Subband whose centre is the carrier.
    pub fn center_subband(&self) -> usize {
        0
    }

    /// Transmit pulse samples at the baseband sample rate, unit amplitude.
    pub fn pulse_template(&self) -> Vec<Complex64> {
        (0..self.pulse_samples)
            .map(|i| self.pulse_at(i as f64))
            .collect()
    }

    /// Pulse value at continuous sample time `t` (in samples); zero outside the pulse.
    fn pulse_at(&self, t: f64) -> Complex64 {
        let np = self.pulse_samples as f64;
        if t < 0.0 || t >= np {
            return Complex64::new(0.0, 0.0);
        }
        if !self.chirp {
            return Complex64::new(1.0, 0.0);
        }
        // Sweep -B/2 .. B/2 over the pulse; in sample units the chirp rate is 1/np cycles/sample^2.
        let centred = t - np / 2.0;
        Complex64::from_polar(1.0, PI * centred * centred / np)
    }

    /// FFT-order Doppler bin of radial velocity `v`.
    pub fn velocity_bin(&self, v: f64) -> usize {
        let m = self.pulses_per_cpi as f64;
        let bin = (2.0 * v / (self.wavelength_m() * self.prf_hz) * m).round() as i64;
        bin.rem_euclid(self.pulses_per_cpi as i64) as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub angle: SourceAngle,
    pub range_m: f64,
    pub velocity_mps: f64,
    pub gain_db: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interferer {
    pub angle: SourceAngle,
    /// Interference power over the 0 dB target reference.
    pub inr_db: f64,
}

/// Spatial structure of jammer signals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JammerModel {
    /// One symbol stream per jammer through its steering vector (rank one per subband).
    #[default]
    Point,
    /// Independent symbols on every element (full-rank spatial covariance).
    SpatiallyWhite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioFile", into = "ScenarioFile")]
pub struct Scenario {
    pub name: String,
    pub targets: Vec<Target>,
    pub interferers: Vec<Interferer>,
    /// Noise power in dB over the target reference; `None` disables noise.
    pub noise_power_db: Option<f64>,
    /// Optional per-tile noise power override (dB), one entry per tile.
    pub tile_noise_db: Option<Vec<f64>>,
    pub jammer_model: JammerModel,
    pub waveform: Waveform,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.waveform.validate()?;
        let wf = &self.waveform;
        for (i, t) in self.targets.iter().enumerate() {
            let path = |f: &str| format!("targets[{i}].{f}");
            t.angle
                .validate()
                .map_err(|e| Error::config(path("azimuth_deg"), e.to_string()))?;
            if !(t.range_m >= 0.0 && t.range_m <= wf.max_range_m()) {
                return Err(Error::config(
                    path("range_m"),
                    format!(
                        "{} m outside the unambiguous window 0..={:.3} m",
                        t.range_m,
                        wf.max_range_m()
                    ),
                ));
            }
            if !(t.velocity_mps.abs() < wf.max_velocity_mps()) {
                return Err(Error::config(
                    path("velocity_mps"),
                    format!(
                        "{} m/s is Doppler-ambiguous (limit ±{:.3} m/s)",
                        t.velocity_mps,
                        wf.max_velocity_mps()
                    ),
                ));
            }
            if !t.gain_db.is_finite() {
                return Err(Error::config(path("gain_db"), "must be finite"));
            }
        }
        for (i, j) in self.interferers.iter().enumerate() {
            j.angle
                .validate()
                .map_err(|e| Error::config(format!("interferers[{i}].azimuth_deg"), e.to_string()))?;
            if !j.inr_db.is_finite() {
                return Err(Error::config(format!("interferers[{i}].inr_db"), "must be finite"));
            }
        }
        if let Some(n) = self.noise_power_db {
            if !n.is_finite() {
                return Err(Error::config("noise_power_db", "must be finite"));
            }
        }
        if self.targets.is_empty() && self.interferers.is_empty() && !self.has_noise() {
            return Err(Error::DegenerateScene);
        }
        Ok(())
    }

    fn has_noise(&self) -> bool {
        self.noise_power_db.is_some() || self.tile_noise_db.is_some()
    }

    /// Linear noise power of each tile.
    pub fn tile_noise_power(&self, n_tiles: usize) -> Result<Vec<f64>> {
        if let Some(per_tile) = &self.tile_noise_db {
            check_len("tile_noise_db", n_tiles, per_tile.len())?;
            return Ok(per_tile.iter().map(|&db| db_to_power(db)).collect());
        }
        let p = self.noise_power_db.map_or(0.0, db_to_power);
        Ok(vec![p; n_tiles])
    }

    /// Sets every interferer to the same INR.
    pub fn with_uniform_inr(mut self, inr_db: f64) -> Self {
        for j in &mut self.interferers {
            j.inr_db = inr_db;
        }
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

pub(crate) fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

// On-disk representation: angles in degrees.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    targets: Vec<TargetFile>,
    #[serde(default)]
    interferers: Vec<InterfererFile>,
    noise_power_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tile_noise_db: Option<Vec<f64>>,
    #[serde(default)]
    jammer_model: JammerModel,
    waveform: Waveform,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    azimuth_deg: f64,
    elevation_deg: f64,
    range_m: f64,
    velocity_mps: f64,
    gain_db: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterfererFile {
    azimuth_deg: f64,
    elevation_deg: f64,
    inr_db: f64,
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = String;

    fn try_from(f: ScenarioFile) -> std::result::Result<Self, String> {
        let angle = |az: f64, el: f64| SourceAngle::from_degrees(az, el).map_err(|e| e.to_string());
        let targets = f
            .targets
            .into_iter()
            .map(|t| {
                Ok(Target {
                    angle: angle(t.azimuth_deg, t.elevation_deg)?,
                    range_m: t.range_m,
                    velocity_mps: t.velocity_mps,
                    gain_db: t.gain_db,
                })
            })
            .collect::<std::result::Result<_, String>>()?;
        let interferers = f
            .interferers
            .into_iter()
            .map(|j| {
                Ok(Interferer {
                    angle: angle(j.azimuth_deg, j.elevation_deg)?,
                    inr_db: j.inr_db,
                })
            })
            .collect::<std::result::Result<_, String>>()?;
        Ok(Scenario {
            name: f.name,
            targets,
            interferers,
            noise_power_db: f.noise_power_db,
            tile_noise_db: f.tile_noise_db,
            jammer_model: f.jammer_model,
            waveform: f.waveform,
        })
    }
}

impl From<Scenario> for ScenarioFile {
    fn from(s: Scenario) -> Self {
        ScenarioFile {
            name: s.name,
            targets: s
                .targets
                .into_iter()
                .map(|t| TargetFile {
                    azimuth_deg: t.angle.azimuth_rad.to_degrees(),
                    elevation_deg: t.angle.elevation_rad.to_degrees(),
                    range_m: t.range_m,
                    velocity_mps: t.velocity_mps,
                    gain_db: t.gain_db,
                })
                .collect(),
            interferers: s
                .interferers
                .into_iter()
                .map(|j| InterfererFile {
                    azimuth_deg: j.angle.azimuth_rad.to_degrees(),
                    elevation_deg: j.angle.elevation_rad.to_degrees(),
                    inr_db: j.inr_db,
                })
                .collect(),
            noise_power_db: s.noise_power_db,
            tile_noise_db: s.tile_noise_db,
            jammer_model: s.jammer_model,
            waveform: s.waveform,
        }
    }
}

/// Per-subband element-space snapshot cubes.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandSnapshots {
    /// One `[n_snapshots x T*N]` matrix per subband, in FFT-bin order.
    pub subbands: Vec<SnapshotMatrix>,
    pub subband_center_hz: Vec<f64>,
    /// Linear noise power of each tile.
    pub noise_power: Vec<f64>,
}

impl SubbandSnapshots {
    pub fn n_subbands(&self) -> usize {
        self.subbands.len()
    }

    pub fn n_snapshots(&self) -> usize {
        self.subbands.first().map_or(0, SnapshotMatrix::n_rows)
    }

    pub fn n_elements(&self) -> usize {
        self.subbands.first().map_or(0, SnapshotMatrix::n_cols)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetTruth {
    /// 1-based target id.
    pub id: usize,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub range_m: f64,
    pub velocity_mps: f64,
    /// Round-trip delay in samples (fractional).
    pub delay_samples: f64,
    pub range_bin: usize,
    /// FFT-order Doppler bin.
    pub velocity_bin: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundTruth {
    pub targets: Vec<TargetTruth>,
}

impl GroundTruth {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let wf = &scenario.waveform;
        let targets = scenario
            .targets
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let delay = t.range_m / wf.range_bin_m();
                TargetTruth {
                    id: i + 1,
                    azimuth_deg: t.angle.azimuth_rad.to_degrees(),
                    elevation_deg: t.angle.elevation_rad.to_degrees(),
                    range_m: t.range_m,
                    velocity_mps: t.velocity_mps,
                    delay_samples: delay,
                    range_bin: delay.round() as usize,
                    velocity_bin: wf.velocity_bin(t.velocity_mps),
                }
            })
            .collect();
        GroundTruth { targets }
    }
}

/// Unitary block-FFT channelizer of one sample stream: returns `[subband][block]`.
pub fn channelize(samples: &[Complex64], n_subbands: usize) -> Result<Vec<Vec<Complex64>>> {
    if n_subbands == 0 || samples.len() % n_subbands != 0 {
        return Err(Error::domain(format!(
            "stream length {} is not a multiple of {n_subbands} subbands",
            samples.len()
        )));
    }
    let n_blocks = samples.len() / n_subbands;
    let fft = FftPlanner::new().plan_fft_forward(n_subbands);
    let scale = 1.0 / (n_subbands as f64).sqrt();
    let mut buf = samples.to_vec();
    fft.process(&mut buf);
    let mut out = vec![Vec::with_capacity(n_blocks); n_subbands];
    for block in buf.chunks_exact(n_subbands) {
        for (l, v) in block.iter().enumerate() {
            out[l].push(v * scale);
        }
    }
    Ok(out)
}

/// Channelizes one stream per element: returns one `[blocks x elements]` matrix per subband.
pub fn channelize_elements(
    streams: &[Vec<Complex64>],
    n_subbands: usize,
) -> Result<Vec<SnapshotMatrix>> {
    let n_el = streams.len();
    let len = streams.first().map_or(0, Vec::len);
    let mut per_element = Vec::with_capacity(n_el);
    for s in streams {
        check_len("element stream", len, s.len())?;
        per_element.push(channelize(s, n_subbands)?);
    }
    let n_blocks = len / n_subbands.max(1);
    Ok((0..n_subbands)
        .map(|l| {
            let mut m = SnapshotMatrix::zeros(n_blocks, n_el);
            for (e, bands) in per_element.iter().enumerate() {
                for (b, v) in bands[l].iter().enumerate() {
                    m.row_mut(b)[e] = *v;
                }
            }
            m
        })
        .collect())
}

/// Circularly-symmetric complex Gaussian sample of power `power`.
pub(crate) fn complex_gaussian<R: rand::Rng>(rng: &mut R, power: f64) -> Complex64 {
    let s = (power / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Generator for the `(subband, pulse)` stream of a run.
pub fn stream_rng(seed: u64, subband: usize, pulse: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((subband as u64) << 32) | pulse as u64);
    rng
}

/// One target's wideband echo for a single pulse (before Doppler), channelized.
fn target_echo_subbands(t: &Target, wf: &Waveform) -> Result<Vec<Vec<Complex64>>> {
    let tau_s = 2.0 * t.range_m / SPEED_OF_LIGHT;
    let delay = tau_s * wf.bandwidth_hz;
    let amp = db_to_power(t.gain_db).sqrt();
    let carrier_phase = Complex64::from_polar(amp, -2.0 * PI * wf.carrier_hz * tau_s);
    let echo: Vec<Complex64> = (0..wf.samples_per_pulse)
        .map(|i| carrier_phase * wf.pulse_at(i as f64 - delay))
        .collect();
    channelize(&echo, wf.n_subbands)
}

/// Doppler phase of pulse `pulse` for radial velocity `v` (stop-and-hop).
pub fn doppler_phase(wf: &Waveform, v: f64, pulse: usize) -> Complex64 {
    let fd = 2.0 * v / wf.wavelength_m();
    Complex64::from_polar(1.0, 2.0 * PI * fd * pulse as f64 / wf.prf_hz)
}

/// Synthesizes the per-subband snapshot cubes of `scenario` on `layout`.
pub fn synthesize(
    layout: &ArrayLayout,
    scenario: &Scenario,
    seed: u64,
) -> Result<(SubbandSnapshots, GroundTruth)> {
    layout.validate()?;
    scenario.validate()?;
    let wf = &scenario.waveform;
    let n_el = layout.n_elements();
    let n_per_tile = layout.elems_per_tile();
    let noise = scenario.tile_noise_power(layout.n_tiles())?;
    let noise_amp: Vec<f64> = noise.iter().map(|&p| p.sqrt()).collect();
    let echoes = scenario
        .targets
        .iter()
        .map(|t| target_echo_subbands(t, wf))
        .collect::<Result<Vec<_>>>()?;
    let dopplers: Vec<Vec<Complex64>> = scenario
        .targets
        .iter()
        .map(|t| (0..wf.pulses_per_cpi).map(|m| doppler_phase(wf, t.velocity_mps, m)).collect())
        .collect();
    let jammer_amp: Vec<f64> = scenario
        .interferers
        .iter()
        .map(|j| db_to_power(j.inr_db).sqrt())
        .collect();
    let blocks = wf.blocks_per_pulse();
    let centers: Vec<f64> = (0..wf.n_subbands).map(|l| wf.subband_center_hz(l)).collect();

    let subbands = centers
        .par_iter()
        .enumerate()
        .map(|(l, &f)| -> Result<SnapshotMatrix> {
            let target_sv = scenario
                .targets
                .iter()
                .map(|t| steering_at(layout, t.angle, f))
                .collect::<Result<Vec<_>>>()?;
            let jammer_sv = scenario
                .interferers
                .iter()
                .map(|j| steering_at(layout, j.angle, f))
                .collect::<Result<Vec<_>>>()?;
            let mut cube = SnapshotMatrix::zeros(wf.n_snapshots(), n_el);
            for m in 0..wf.pulses_per_cpi {
                let mut rng = stream_rng(seed, l, m);
                for b in 0..blocks {
                    let row = cube.row_mut(m * blocks + b);
                    for (k, sv) in target_sv.iter().enumerate() {
                        let s = echoes[k][l][b] * dopplers[k][m];
                        if s.norm_sqr() == 0.0 {
                            continue;
                        }
                        for (y, a) in row.iter_mut().zip(sv) {
                            *y += s * a;
                        }
                    }
                    for (j, sv) in jammer_sv.iter().enumerate() {
                        match scenario.jammer_model {
                            JammerModel::Point => {
                                let g = complex_gaussian(&mut rng, 1.0) * jammer_amp[j];
                                for (y, a) in row.iter_mut().zip(sv) {
                                    *y += g * a;
                                }
                            }
                            JammerModel::SpatiallyWhite => {
                                for y in row.iter_mut() {
                                    *y += complex_gaussian(&mut rng, 1.0) * jammer_amp[j];
                                }
                            }
                        }
                    }
                    if !noise_amp.iter().all(|&a| a == 0.0) {
                        for (e, y) in row.iter_mut().enumerate() {
                            *y += complex_gaussian(&mut rng, 1.0) * noise_amp[e / n_per_tile];
                        }
                    }
                }
            }
            Ok(cube)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((
        SubbandSnapshots {
            subbands,
            subband_center_hz: centers,
            noise_power: noise,
        },
        GroundTruth::from_scenario(scenario),
    ))
}

const A1_FIXTURE: &str = include_str!("../fixtures/a1_like.json");
const E2_FIXTURE: &str = include_str!("../fixtures/e2_like.json");

/// Names accepted by [`scenario_library`].
pub const LIBRARY_SCENARIOS: [&str; 2] = ["A1-like", "E2-like"];

/// Built-in re-created scenarios. `scale` multiplies the number of pulses per CPI.
pub fn scenario_library(name: &str, scale: usize) -> Result<Scenario> {
    if scale == 0 {
        return Err(Error::domain("scenario scale must be at least 1"));
    }
    let text = match name {
        "A1-like" => A1_FIXTURE,
        "E2-like" => E2_FIXTURE,
        _ => {
            return Err(Error::Unknown {
                kind: "scenario",
                name: name.to_string(),
            })
        }
    };
    let mut s = Scenario::from_json(text)?;
    s.waveform.pulses_per_cpi *= scale;
    Ok(s)
}
