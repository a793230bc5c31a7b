//! Wideband reconstruction, range-Doppler maps, CA-CFAR and detection metrics.

use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::runner::Mode;
use crate::scene::{GroundTruth, Waveform};

/// Inverse of [`crate::scene::channelize`] applied to `L` beamformed streams.
///
/// `subbands[l]` holds snapshot series `n = m * blocks + b`; the result is one
/// `samples_per_pulse` vector per pulse.
pub fn synthesize_wideband(subbands: &[Vec<Complex64>], waveform: &Waveform) -> Result<Vec<Vec<Complex64>>> {
    let l = waveform.n_subbands;
    check_len("synthesize_wideband subband count", l, subbands.len())?;
    let n = waveform.n_snapshots();
    for s in subbands {
        check_len("synthesize_wideband series", n, s.len())?;
    }
    let ifft = FftPlanner::new().plan_fft_inverse(l);
    let scale = 1.0 / (l as f64).sqrt();
    let blocks = waveform.blocks_per_pulse();
    let mut pulses = Vec::with_capacity(waveform.pulses_per_cpi);
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for m in 0..waveform.pulses_per_cpi {
        let mut pulse = Vec::with_capacity(waveform.samples_per_pulse);
        for b in 0..blocks {
            for (k, v) in buf.iter_mut().enumerate() {
                *v = subbands[k][m * blocks + b];
            }
            ifft.process(&mut buf);
            pulse.extend(buf.iter().map(|v| v * scale));
        }
        pulses.push(pulse);
    }
    Ok(pulses)
}

/// Power over `range x velocity`, `power[r * n_velocity + v]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeDopplerMap {
    pub power: Vec<f64>,
    pub range_m: Vec<f64>,
    /// Ascending radial velocity (Doppler bins reordered so zero sits at index `M / 2`).
    pub velocity_mps: Vec<f64>,
    pub target_id: usize,
    pub mode: Option<Mode>,
}

impl RangeDopplerMap {
    pub fn n_range(&self) -> usize {
        self.range_m.len()
    }

    pub fn n_velocity(&self) -> usize {
        self.velocity_mps.len()
    }

    pub fn at(&self, range_bin: usize, vel_bin: usize) -> f64 {
        self.power[range_bin * self.n_velocity() + vel_bin]
    }

    /// Builds a map from raw powers with unit-spaced axes (testing and external data).
    pub fn from_powers(n_range: usize, n_velocity: usize, power: Vec<f64>) -> Result<Self> {
        check_len("map power", n_range * n_velocity, power.len())?;
        Ok(RangeDopplerMap {
            power,
            range_m: (0..n_range).map(|r| r as f64).collect(),
            velocity_mps: (0..n_velocity).map(|v| v as f64).collect(),
            target_id: 0,
            mode: None,
        })
    }

    /// Location of the largest cell.
    pub fn argmax(&self) -> (usize, usize) {
        let (i, _) = self
            .power
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best });
        (i / self.n_velocity(), i % self.n_velocity())
    }
}

/// Map column of FFT-order Doppler bin `k` out of `m`.
pub fn shifted_velocity_bin(k: usize, m: usize) -> usize {
    (k + m / 2) % m
}

/// Matched filter along fast time, FFT across pulses, magnitude squared.
pub fn range_doppler(pulses: &[Vec<Complex64>], waveform: &Waveform) -> Result<RangeDopplerMap> {
    let m = waveform.pulses_per_cpi;
    let s = waveform.samples_per_pulse;
    check_len("range_doppler pulse count", m, pulses.len())?;
    for p in pulses {
        check_len("range_doppler pulse length", s, p.len())?;
    }
    let n_range = waveform.n_range_bins();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(s);
    let inv = planner.plan_fft_inverse(s);
    let mut template = vec![Complex64::new(0.0, 0.0); s];
    template[..waveform.pulse_samples].copy_from_slice(&waveform.pulse_template());
    fwd.process(&mut template);

    // compressed[m][r]
    let compressed: Vec<Vec<Complex64>> = pulses
        .iter()
        .map(|p| {
            let mut x = p.clone();
            fwd.process(&mut x);
            for (xi, ti) in x.iter_mut().zip(&template) {
                *xi *= ti.conj() / s as f64;
            }
            inv.process(&mut x);
            x.truncate(n_range);
            x
        })
        .collect();

    let doppler = planner.plan_fft_forward(m);
    let mut power = vec![0.0; n_range * m];
    let mut slow = vec![Complex64::new(0.0, 0.0); m];
    for r in 0..n_range {
        for (k, v) in slow.iter_mut().enumerate() {
            *v = compressed[k][r];
        }
        doppler.process(&mut slow);
        for (k, v) in slow.iter().enumerate() {
            power[r * m + shifted_velocity_bin(k, m)] = v.norm_sqr();
        }
    }
    let dv = waveform.velocity_bin_mps();
    let half = (m / 2) as f64;
    Ok(RangeDopplerMap {
        power,
        range_m: (0..n_range).map(|r| r as f64 * waveform.range_bin_m()).collect(),
        velocity_mps: (0..m).map(|j| (j as f64 - half) * dv).collect(),
        target_id: 0,
        mode: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfarConfig {
    pub threshold_db: f64,
    pub guard_cells: usize,
    pub training_cells: usize,
}

impl Default for CfarConfig {
    fn default() -> Self {
        CfarConfig {
            threshold_db: 10.0,
            guard_cells: 2,
            training_cells: 8,
        }
    }
}

impl CfarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_db > 0.0 && self.threshold_db.is_finite()) {
            return Err(Error::config("cfar.threshold_db", "must be positive"));
        }
        if self.training_cells == 0 {
            return Err(Error::config("cfar.training_cells", "must be at least 1"));
        }
        Ok(())
    }

    /// Cells on each side of the cell under test.
    pub fn half_width(&self) -> usize {
        self.guard_cells + self.training_cells
    }

    pub fn threshold_factor(&self) -> f64 {
        10f64.powf(self.threshold_db / 10.0)
    }

    /// Analytic false-alarm probability of cell-averaging CFAR in exponential noise.
    pub fn analytic_false_alarm_rate(&self) -> f64 {
        let n = 2.0 * self.training_cells as f64;
        (1.0 + self.threshold_factor() / n).powf(-n)
    }
}

fn check_stencil(map: &RangeDopplerMap, cfg: &CfarConfig) -> Result<()> {
    cfg.validate()?;
    if map.n_range() < 2 * cfg.half_width() + 1 || map.n_velocity() == 0 {
        return Err(Error::domain(format!(
            "map with {} range bins is smaller than the {}-cell CFAR stencil",
            map.n_range(),
            2 * cfg.half_width() + 1
        )));
    }
    Ok(())
}

/// Mean of the training cells around `(r, v)`, excluding guards; `None` near the edges.
pub fn noise_floor(map: &RangeDopplerMap, cfg: &CfarConfig, r: usize, v: usize) -> Option<f64> {
    let hw = cfg.half_width();
    if r < hw || r + hw >= map.n_range() {
        return None;
    }
    let g = cfg.guard_cells;
    let sum: f64 = (r - hw..r - g)
        .chain(r + g + 1..=r + hw)
        .map(|i| map.at(i, v))
        .sum();
    Some(sum / (2 * cfg.training_cells) as f64)
}

/// Cells exceeding the CA-CFAR threshold: `(range, velocity, power, floor)`.
pub fn cfar_crossings(map: &RangeDopplerMap, cfg: &CfarConfig) -> Result<Vec<Peak>> {
    check_stencil(map, cfg)?;
    let k = cfg.threshold_factor();
    let mut out = vec![];
    for r in 0..map.n_range() {
        for v in 0..map.n_velocity() {
            if let Some(floor) = noise_floor(map, cfg, r, v) {
                let p = map.at(r, v);
                if p > floor * k {
                    out.push(Peak {
                        range_bin: r,
                        velocity_bin: v,
                        power: p,
                        floor,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Number of cells the CFAR stencil can test.
pub fn cfar_testable_cells(map: &RangeDopplerMap, cfg: &CfarConfig) -> usize {
    map.n_range().saturating_sub(2 * cfg.half_width()) * map.n_velocity()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub range_bin: usize,
    pub velocity_bin: usize,
    pub power: f64,
    pub floor: f64,
}

impl Peak {
    pub fn sinr_db(&self) -> f64 {
        10.0 * (self.power / self.floor).log10()
    }
}

/// 1D CA-CFAR along range in every velocity bin; returns local maxima of the crossings.
pub fn cfar_detect(map: &RangeDopplerMap, cfg: &CfarConfig) -> Result<Vec<Peak>> {
    let crossings = cfar_crossings(map, cfg)?;
    let nv = map.n_velocity();
    let mut passing = vec![false; map.power.len()];
    for p in &crossings {
        passing[p.range_bin * nv + p.velocity_bin] = true;
    }
    Ok(crossings
        .into_iter()
        .filter(|p| {
            let (r, v) = (p.range_bin as i64, p.velocity_bin as i64);
            for dr in -1i64..=1 {
                for dv in -1i64..=1 {
                    if dr == 0 && dv == 0 {
                        continue;
                    }
                    let rr = r + dr;
                    if rr < 0 || rr >= map.n_range() as i64 {
                        continue;
                    }
                    let vv = (v + dv).rem_euclid(nv as i64);
                    let idx = rr as usize * nv + vv as usize;
                    if passing[idx] && map.power[idx] > p.power {
                        return false;
                    }
                }
            }
            true
        })
        .collect())
}

fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// Nearest CFAR peak within one range and one velocity bin of `(range_bin, vel_bin)`.
pub fn associate(peaks: &[Peak], range_bin: usize, vel_bin: usize, n_velocity: usize) -> Option<&Peak> {
    peaks
        .iter()
        .filter(|p| {
            p.range_bin.abs_diff(range_bin) <= 1
                && circular_distance(p.velocity_bin, vel_bin, n_velocity) <= 1
        })
        .min_by_key(|p| {
            let dr = p.range_bin.abs_diff(range_bin);
            let dv = circular_distance(p.velocity_bin, vel_bin, n_velocity);
            (dr * dr + dv * dv, p.range_bin, p.velocity_bin)
        })
}

/// Detection SINR in dB at the true cell; `0.0` when no CFAR peak is associated.
pub fn detection_sinr(map: &RangeDopplerMap, range_bin: usize, vel_bin: usize, cfg: &CfarConfig) -> Result<f64> {
    if range_bin >= map.n_range() || vel_bin >= map.n_velocity() {
        return Err(Error::domain(format!(
            "bin ({range_bin}, {vel_bin}) outside the {}x{} map",
            map.n_range(),
            map.n_velocity()
        )));
    }
    let peaks = cfar_detect(map, cfg)?;
    Ok(associate(&peaks, range_bin, vel_bin, map.n_velocity()).map_or(0.0, Peak::sinr_db))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetDetection {
    pub target_id: usize,
    pub detected: bool,
    pub range_bin: Option<usize>,
    /// `f64::INFINITY` for a miss.
    pub range_err_m: f64,
    pub velocity_bin: Option<usize>,
    pub vel_err_mps: f64,
    /// `0.0` for a miss.
    pub sinr_db: f64,
}

impl TargetDetection {
    pub fn missed(target_id: usize) -> Self {
        TargetDetection {
            target_id,
            detected: false,
            range_bin: None,
            range_err_m: f64::INFINITY,
            velocity_bin: None,
            vel_err_mps: f64::INFINITY,
            sinr_db: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionReport {
    pub mode: Mode,
    pub targets: Vec<TargetDetection>,
}

impl DetectionReport {
    pub fn n_detected(&self) -> usize {
        self.targets.iter().filter(|t| t.detected).count()
    }
}

/// Detects one target in its own beamformed map.
pub fn detect_target(
    map: &RangeDopplerMap,
    truth: &crate::scene::TargetTruth,
    waveform: &Waveform,
    cfg: &CfarConfig,
) -> Result<TargetDetection> {
    let m = waveform.pulses_per_cpi;
    let vel_bin = shifted_velocity_bin(truth.velocity_bin, m);
    let range_bin = truth.range_bin.min(map.n_range().saturating_sub(1));
    let peaks = cfar_detect(map, cfg)?;
    Ok(match associate(&peaks, range_bin, vel_bin, m) {
        None => TargetDetection::missed(truth.id),
        Some(p) => TargetDetection {
            target_id: truth.id,
            detected: true,
            range_bin: Some(p.range_bin),
            range_err_m: (map.range_m[p.range_bin] - truth.range_m).abs(),
            velocity_bin: Some(p.velocity_bin),
            vel_err_mps: (map.velocity_mps[p.velocity_bin] - truth.velocity_mps).abs(),
            sinr_db: p.sinr_db(),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub scenario: String,
    pub mode: Mode,
    pub target_id: usize,
    pub detected: bool,
    pub range_err_m: f64,
    pub vel_err_mps: f64,
    pub sinr_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// `(mode, detected count)` in input order.
    pub detections: Vec<(Mode, usize)>,
    pub n_targets: usize,
}

pub const REPORT_CSV_HEADER: &str = "scenario,mode,target_id,detected,range_err_m,vel_err_mps,sinr_db";

fn fmt_metric(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.scenario,
                r.mode,
                r.target_id,
                r.detected,
                fmt_metric(r.range_err_m),
                fmt_metric(r.vel_err_mps),
                fmt_metric(r.sinr_db)
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        // serde_json cannot encode infinities; misses become null.
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn rows_for(&self, mode: Mode) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }
}

/// Per-target, per-mode comparison of detection reports on one scenario.
pub fn evaluate(scenario: &str, truth: &GroundTruth, reports: &[DetectionReport]) -> Result<ComparisonTable> {
    if reports.is_empty() {
        return Err(Error::domain("evaluate needs at least one mode"));
    }
    let mut rows = vec![];
    let mut detections = vec![];
    for rep in reports {
        check_len("report target count", truth.targets.len(), rep.targets.len())?;
        for t in &rep.targets {
            rows.push(ComparisonRow {
                scenario: scenario.to_string(),
                mode: rep.mode,
                target_id: t.target_id,
                detected: t.detected,
                range_err_m: t.range_err_m,
                vel_err_mps: t.vel_err_mps,
                sinr_db: t.sinr_db,
            });
        }
        detections.push((rep.mode, rep.n_detected()));
    }
    Ok(ComparisonTable {
        rows,
        detections,
        n_targets: truth.targets.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{channelize, complex_gaussian, stream_rng, TargetTruth};
    use std::f64::consts::PI;

    fn wf(l: usize) -> Waveform {
        Waveform {
            carrier_hz: 3e9,
            bandwidth_hz: 300e6,
            n_subbands: l,
            pulses_per_cpi: 8,
            samples_per_pulse: 128,
            pulse_samples: 32,
            prf_hz: 10e3,
            chirp: true,
        }
    }

    fn split(pulses: &[Vec<Complex64>], w: &Waveform) -> Vec<Vec<Complex64>> {
        let mut per_band = vec![vec![]; w.n_subbands];
        for p in pulses {
            for (l, band) in channelize(p, w.n_subbands).unwrap().into_iter().enumerate() {
                per_band[l].extend(band);
            }
        }
        per_band
    }

    fn random_pulses(w: &Waveform, seed: u64) -> Vec<Vec<Complex64>> {
        let mut rng = stream_rng(seed, 1, 1);
        (0..w.pulses_per_cpi)
            .map(|_| (0..w.samples_per_pulse).map(|_| complex_gaussian(&mut rng, 1.0)).collect())
            .collect()
    }

    #[test]
    fn channelize_synthesize_roundtrip() {
        for l in [1, 4, 8] {
            let w = wf(l);
            let x = random_pulses(&w, l as u64);
            let back = synthesize_wideband(&split(&x, &w), &w).unwrap();
            for (a, b) in back.iter().flatten().zip(x.iter().flatten()) {
                assert!((a - b).norm() <= 1e-10);
            }
        }
        let w = wf(4);
        assert!(synthesize_wideband(&split(&random_pulses(&w, 1), &w)[..3], &w).is_err());
    }

    #[test]
    fn single_subband_tone_comes_back_at_its_frequency() {
        let w = wf(4);
        let n = w.n_snapshots();
        let mut bands = vec![vec![Complex64::new(0.0, 0.0); n]; 4];
        bands[1] = vec![Complex64::new(1.0, 0.0); n];
        let out = synthesize_wideband(&bands, &w).unwrap();
        for (i, v) in out[0].iter().enumerate() {
            let want = Complex64::from_polar(0.5, 2.0 * PI * i as f64 / 4.0);
            assert!((v - want).norm() < 1e-12);
        }
    }

    fn echo(w: &Waveform, delay: usize, vbin: usize) -> Vec<Vec<Complex64>> {
        let p = w.pulse_template();
        (0..w.pulses_per_cpi)
            .map(|m| {
                let ph = Complex64::from_polar(1.0, 2.0 * PI * (vbin * m) as f64 / w.pulses_per_cpi as f64);
                let mut x = vec![Complex64::new(0.0, 0.0); w.samples_per_pulse];
                for (i, pi) in p.iter().enumerate() {
                    x[delay + i] = pi * ph;
                }
                x
            })
            .collect()
    }

    #[test]
    fn noise_free_target_peaks_at_truth() {
        let w = wf(4);
        let map = range_doppler(&echo(&w, 40, 0), &w).unwrap();
        assert_eq!(map.argmax(), (40, shifted_velocity_bin(0, 8)));
        let zero = range_doppler(&vec![vec![Complex64::new(0.0, 0.0); 128]; 8], &w).unwrap();
        assert!(zero.power.iter().all(|&p| p == 0.0));
        assert!(range_doppler(&echo(&w, 40, 0)[..7], &w).is_err());
        assert_eq!(map.n_range(), 97);
        assert!(map.range_m.windows(2).all(|x| x[1] > x[0]));
        assert!(map.velocity_mps.windows(2).all(|x| x[1] > x[0]));
    }

    #[test]
    fn moving_target_velocity_bin() {
        // Oracle: DFT-bin arithmetic round(2 v / (lambda PRF) * M) mod M.
        let w = wf(4);
        for v in [-140.0, -31.25, 62.5, 93.75] {
            let k = w.velocity_bin(v);
            let pulses: Vec<Vec<Complex64>> = echo(&w, 20, 0)
                .into_iter()
                .enumerate()
                .map(|(m, p)| {
                    let d = crate::scene::doppler_phase(&w, v, m);
                    p.into_iter().map(|x| x * d).collect()
                })
                .collect();
            let map = range_doppler(&pulses, &w).unwrap();
            assert_eq!(map.argmax(), (20, shifted_velocity_bin(k, 8)), "v = {v}");
        }
    }

    fn flat(nr: usize, nv: usize) -> RangeDopplerMap {
        RangeDopplerMap::from_powers(nr, nv, vec![1.0; nr * nv]).unwrap()
    }

    #[test]
    fn cfar_examples() {
        let cfg = CfarConfig::default();
        assert!(cfar_detect(&flat(64, 4), &cfg).unwrap().is_empty());
        let mut m = flat(64, 4);
        m.power[30 * 4 + 2] = 100.0;
        let d = cfar_detect(&m, &cfg).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].range_bin, d[0].velocity_bin), (30, 2));
        // Two spikes further apart than the 21-cell stencil.
        let mut m = flat(80, 2);
        m.power[15 * 2] = 100.0;
        m.power[50 * 2 + 1] = 100.0;
        let d = cfar_detect(&m, &cfg).unwrap();
        assert_eq!(d.len(), 2);
        assert!(cfar_detect(&flat(20, 2), &cfg).is_err());
    }

    #[test]
    fn guard_cells_excluded_from_floor() {
        let cfg = CfarConfig::default();
        let mut m = flat(64, 1);
        m.power[30] = 100.0;
        m.power[29] = 50.0;
        m.power[32] = 50.0;
        assert_eq!(noise_floor(&m, &cfg, 30, 0), Some(1.0));
        assert!((detection_sinr(&m, 30, 0, &cfg).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn sinr_sentinel_and_bounds() {
        let cfg = CfarConfig::default();
        let m = flat(64, 2);
        assert_eq!(detection_sinr(&m, 30, 1, &cfg).unwrap(), 0.0);
        assert!(detection_sinr(&m, 64, 0, &cfg).is_err());
        let mut m = flat(64, 2);
        m.power[40 * 2] = 100.0;
        assert_eq!(detection_sinr(&m, 30, 0, &cfg).unwrap(), 0.0);
        assert!((detection_sinr(&m, 41, 1, &cfg).unwrap() - 20.0).abs() < 1e-12);
        let mut scaled = m.clone();
        scaled.power.iter_mut().for_each(|p| *p *= 37.0);
        assert!((detection_sinr(&scaled, 40, 0, &cfg).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn analytic_false_alarm_rate() {
        let cfg = CfarConfig::default();
        let pfa = cfg.analytic_false_alarm_rate();
        assert!((pfa - 1.625f64.powi(-16)).abs() < 1e-15);
    }

    fn truth(id: usize) -> TargetTruth {
        TargetTruth {
            id,
            azimuth_deg: 0.0,
            elevation_deg: 0.0,
            range_m: 10.0,
            velocity_mps: 0.0,
            delay_samples: 20.0,
            range_bin: 20,
            velocity_bin: 0,
        }
    }

    #[test]
    fn evaluate_tables() {
        let gt = GroundTruth {
            targets: vec![truth(1), truth(2)],
        };
        let hit = TargetDetection {
            target_id: 1,
            detected: true,
            range_bin: Some(20),
            range_err_m: 0.0,
            velocity_bin: Some(4),
            vel_err_mps: 0.0,
            sinr_db: 25.0,
        };
        let rep = |mode| DetectionReport {
            mode,
            targets: vec![hit.clone(), TargetDetection::missed(2)],
        };
        let t = evaluate("demo", &gt, &[rep(Mode::Single), rep(Mode::Tiled)]).unwrap();
        let a: Vec<_> = t.rows_for(Mode::Single).map(|r| (r.target_id, r.sinr_db)).collect();
        let b: Vec<_> = t.rows_for(Mode::Tiled).map(|r| (r.target_id, r.sinr_db)).collect();
        assert_eq!(a, b);
        let csv = t.to_csv();
        assert!(csv.starts_with(REPORT_CSV_HEADER));
        assert!(csv.contains("demo,tiled-beamspace,2,false,inf,inf,0.000000"));
        assert!(csv.contains("demo,single-beamspace,1,true,0.000000,0.000000,25.000000"));
        assert!(evaluate("demo", &gt, &[]).is_err());
    }

    #[test]
    fn detection_at_truth_has_zero_error() {
        let w = wf(4);
        let mut x = echo(&w, 40, 0);
        let mut rng = stream_rng(3, 0, 0);
        for p in &mut x {
            for v in p.iter_mut() {
                *v += complex_gaussian(&mut rng, 0.01);
            }
        }
        let map = range_doppler(&x, &w).unwrap();
        let mut t = truth(1);
        t.range_bin = 40;
        t.range_m = 40.0 * w.range_bin_m();
        let d = detect_target(&map, &t, &w, &CfarConfig::default()).unwrap();
        assert!(d.detected);
        assert_eq!(d.range_err_m, 0.0);
        assert_eq!(d.vel_err_mps, 0.0);
        assert!(d.sinr_db > 20.0);
    }
}
