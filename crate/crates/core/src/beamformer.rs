//! Covariance estimation and MVDR correlators in element space and in the
//! reduced tiled beamspace.
//!
//! Weights are obtained from a Cholesky factor-and-solve of the (loaded)
//! covariance; no explicit inverse is ever formed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::array_model::{global_steering, spatial_freq_at, reference_spatial_freq, ArrayLayout, SourceAngle, SpatialFrequency};
use crate::beamspace::{reduce_global, windowed_steering, BeamspaceTransform, BeamspaceWindow};
use crate::error::{check_len, Error, Result};
use crate::scene::{db_to_power, JammerModel, Scenario, SnapshotMatrix};

/// Condition estimate above which a correlator is flagged as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;
/// Condition estimate above which the covariance is treated as singular.
pub const SINGULAR: f64 = 1e15;

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceEstimate {
    pub matrix: DMatrix<Complex64>,
    pub n_snapshots: usize,
    /// Absolute diagonal load `delta` that was added.
    pub loading: f64,
}

impl CovarianceEstimate {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Wraps a known covariance (e.g. an analytic one) and applies relative loading.
    pub fn from_matrix(mut matrix: DMatrix<Complex64>, loading_factor: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension {
                context: "covariance must be square",
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        hermitize(&mut matrix);
        let loading = apply_loading(&mut matrix, loading_factor)?;
        Ok(CovarianceEstimate {
            matrix,
            n_snapshots: 0,
            loading,
        })
    }

    /// True when the unloaded sample covariance cannot be full rank.
    pub fn rank_deficient(&self) -> bool {
        self.n_snapshots > 0 && self.n_snapshots < self.dim() && self.loading == 0.0
    }
}

fn hermitize(m: &mut DMatrix<Complex64>) {
    let d = m.nrows();
    for i in 0..d {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

fn apply_loading(m: &mut DMatrix<Complex64>, loading_factor: f64) -> Result<f64> {
    if !(loading_factor >= 0.0 && loading_factor.is_finite()) {
        return Err(Error::domain(format!(
            "loading factor {loading_factor} must be finite and non-negative"
        )));
    }
    let d = m.nrows();
    let trace: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    let delta = loading_factor * trace / d as f64;
    for i in 0..d {
        m[(i, i)].re += delta;
    }
    Ok(delta)
}

/// Sample covariance `(1/n) sum y y^H + delta I`, `delta = loading_factor * tr / d`.
pub fn estimate_covariance(snapshots: &SnapshotMatrix, loading_factor: f64) -> Result<CovarianceEstimate> {
    let n = snapshots.n_rows();
    if n == 0 {
        return Err(Error::domain("covariance needs at least one snapshot"));
    }
    let d = snapshots.n_cols();
    // Lower triangle, row-major packed.
    let mut acc = vec![Complex64::new(0.0, 0.0); d * (d + 1) / 2];
    for y in snapshots.rows_iter() {
        let mut k = 0;
        for i in 0..d {
            let yi = y[i];
            for yj in &y[..=i] {
                acc[k] += yi * yj.conj();
                k += 1;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in 0..=i {
            let v = acc[k] * inv_n;
            k += 1;
            if i == j {
                m[(i, i)] = Complex64::new(v.re, 0.0);
            } else {
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
    }
    let loading = apply_loading(&mut m, loading_factor)?;
    Ok(CovarianceEstimate {
        matrix: m,
        n_snapshots: n,
        loading,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Element,
    Beamspace,
}

/// MVDR weight vector `c` with `c^H a = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlator {
    pub weights: Vec<Complex64>,
    pub steering: Vec<Complex64>,
    pub domain: Domain,
    /// `(max L_ii / min L_ii)^2` of the Cholesky factor.
    pub condition_estimate: f64,
    pub ill_conditioned: bool,
}

impl Correlator {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `|c^H a - 1|`.
    pub fn distortionless_error(&self) -> f64 {
        (inner(&self.weights, &self.steering) - 1.0).norm()
    }

    /// `c^H y`.
    pub fn apply(&self, y: &[Complex64]) -> Complex64 {
        inner(&self.weights, y)
    }
}

/// `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// MVDR correlator `R^{-1} a / (a^H R^{-1} a)`.
pub fn mvdr_weights(cov: &CovarianceEstimate, steering: &[Complex64]) -> Result<Correlator> {
    let d = cov.dim();
    check_len("mvdr steering", d, steering.len())?;
    if norm(steering) == 0.0 {
        return Err(Error::domain("steering vector is zero"));
    }
    let chol = cov.matrix.clone().cholesky().ok_or_else(|| Error::SingularCovariance {
        dim: d,
        reason: "not positive definite".into(),
    })?;
    let l = chol.l_dirty();
    let (mut lo, mut hi) = (f64::INFINITY, 0f64);
    for i in 0..d {
        let v = l[(i, i)].re;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let condition = (hi / lo).powi(2);
    if !(condition.is_finite() && condition <= SINGULAR) {
        return Err(Error::SingularCovariance {
            dim: d,
            reason: format!("condition estimate {condition:.3e}"),
        });
    }
    let a = nalgebra::DVector::from_column_slice(steering);
    let x = chol.solve(&a);
    let x = x.as_slice();
    let s = inner(steering, x);
    if s.norm() == 0.0 || !s.re.is_finite() {
        return Err(Error::SingularCovariance {
            dim: d,
            reason: "a^H R^-1 a vanished".into(),
        });
    }
    let weights: Vec<Complex64> = x.iter().map(|v| v / s).collect();
    Ok(Correlator {
        weights,
        steering: steering.to_vec(),
        domain: Domain::Element,
        condition_estimate: condition,
        ill_conditioned: condition > ILL_CONDITIONED,
    })
}

/// Beamformer output `c^H y[n]` for every snapshot.
pub fn mvdr_output(correlator: &Correlator, snapshots: &SnapshotMatrix) -> Result<Vec<Complex64>> {
    check_len("mvdr_output snapshot", correlator.dim(), snapshots.n_cols())?;
    Ok(snapshots.rows_iter().map(|y| correlator.apply(y)).collect())
}

/// `(I_T ⊗ B_k) y` for every row.
pub fn reduce_snapshots(
    transform: &BeamspaceTransform,
    window: &BeamspaceWindow,
    snapshots: &SnapshotMatrix,
) -> Result<SnapshotMatrix> {
    let rows = snapshots
        .rows_iter()
        .map(|y| reduce_global(transform, window, y))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Ok(SnapshotMatrix::zeros(0, 0));
    }
    SnapshotMatrix::from_row_vecs(&rows)
}

/// Reduced-dimension MVDR correlator for the target at `omega` (length `T * W`).
pub fn reduced_mvdr(
    layout: &ArrayLayout,
    window: &BeamspaceWindow,
    training: &SnapshotMatrix,
    omega: SpatialFrequency,
    loading_factor: f64,
) -> Result<Correlator> {
    check_len("reduced_mvdr snapshot", layout.n_elements(), training.n_cols())?;
    let transform = BeamspaceTransform::for_layout(layout);
    let reduced = reduce_snapshots(&transform, window, training)?;
    let cov = estimate_covariance(&reduced, loading_factor)?;
    let a = windowed_steering(layout, &transform, window, omega)?;
    beamspace_weights(&cov, &a)
}

/// MVDR weights tagged as living in beamspace.
pub fn beamspace_weights(cov: &CovarianceEstimate, windowed_steering: &[Complex64]) -> Result<Correlator> {
    let mut c = mvdr_weights(cov, windowed_steering)?;
    c.domain = Domain::Beamspace;
    Ok(c)
}

/// Beamspace correlator mapped back to element space, `(I_T ⊗ B_k^H) c̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedCorrelator {
    pub weights: Vec<Complex64>,
    pub target_id: usize,
    pub subband: usize,
}

pub fn lift(
    correlator: &[Complex64],
    window: &BeamspaceWindow,
    transform: &BeamspaceTransform,
) -> Result<LiftedCorrelator> {
    let w = window.len();
    let n = window.tile_len();
    check_len("lift transform", transform.len(), n)?;
    if w == 0 || correlator.len() % w != 0 {
        return Err(Error::Dimension {
            context: "lift correlator",
            expected: w,
            got: correlator.len(),
        });
    }
    let idx = window.indices();
    let mut out = Vec::with_capacity(correlator.len() / w * n);
    for block in correlator.chunks_exact(w) {
        let mut tile = vec![Complex64::new(0.0, 0.0); n];
        for (&i, v) in idx.iter().zip(block) {
            tile[i] = *v;
        }
        transform.inverse_in_place(&mut tile)?;
        out.extend(tile);
    }
    Ok(LiftedCorrelator {
        weights: out,
        target_id: window.target_id,
        subband: window.subband,
    })
}

/// Rectangular azimuth/elevation grid in degrees.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleGrid {
    pub azimuth_deg: Vec<f64>,
    pub elevation_deg: Vec<f64>,
}

impl AngleGrid {
    /// Inclusive grid `-az_span..=az_span`, `-el_span..=el_span` at `step` degrees.
    pub fn symmetric(az_span_deg: f64, el_span_deg: f64, step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0) {
            return Err(Error::domain("grid step must be positive"));
        }
        let axis = |span: f64| {
            let n = (2.0 * span / step_deg).round() as usize;
            (0..=n).map(|i| -span + i as f64 * step_deg).collect::<Vec<_>>()
        };
        Ok(AngleGrid {
            azimuth_deg: axis(az_span_deg),
            elevation_deg: axis(el_span_deg),
        })
    }

    pub fn len(&self) -> usize {
        self.azimuth_deg.len() * self.elevation_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Normalized response `|<c, a>| / (|c| |a|)` on a grid; `values[i_az * n_el + i_el]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeamPattern {
    pub grid: AngleGrid,
    pub values: Vec<f64>,
}

impl BeamPattern {
    pub fn at(&self, i_az: usize, i_el: usize) -> f64 {
        self.values[i_az * self.grid.elevation_deg.len() + i_el]
    }
}

/// Cosine similarity between `weights` and the steering vector at one angle.
pub fn pattern_value(weights: &[Complex64], layout: &ArrayLayout, angle: SourceAngle, f_hz: f64) -> Result<f64> {
    check_len("pattern weights", layout.n_elements(), weights.len())?;
    let cn = norm(weights);
    if cn == 0.0 {
        return Err(Error::domain("beam pattern of a zero-norm correlator"));
    }
    let omega = spatial_freq_at(reference_spatial_freq(angle)?, f_hz, layout.design_freq_hz)?;
    let a = global_steering(layout, omega);
    Ok((inner(weights, &a).norm() / (cn * norm(&a))).min(1.0))
}

pub fn beam_pattern(weights: &[Complex64], layout: &ArrayLayout, grid: &AngleGrid, f_hz: f64) -> Result<BeamPattern> {
    let mut values = Vec::with_capacity(grid.len());
    for &az in &grid.azimuth_deg {
        for &el in &grid.elevation_deg {
            values.push(pattern_value(weights, layout, SourceAngle::from_degrees(az, el)?, f_hz)?);
        }
    }
    Ok(BeamPattern {
        grid: grid.clone(),
        values,
    })
}

/// Half-power (-3 dB) mainlobe width in azimuth through `angle`, in degrees.
///
/// Walks outward from `angle` at `step_deg` until the power pattern falls below
/// half its value at `angle`, interpolating linearly between the last two samples.
/// A side that never falls below half power is cut off at ±89.9° azimuth.
pub fn mainlobe_width_deg(
    weights: &[Complex64],
    layout: &ArrayLayout,
    angle: SourceAngle,
    f_hz: f64,
    step_deg: f64,
) -> Result<f64> {
    if !(step_deg > 0.0) {
        return Err(Error::domain("mainlobe search step must be positive"));
    }
    let az0 = angle.azimuth_rad.to_degrees();
    let el = angle.elevation_rad.to_degrees();
    let power = |az: f64| -> Result<f64> {
        Ok(pattern_value(weights, layout, SourceAngle::from_degrees(az, el)?, f_hz)?.powi(2))
    };
    let half = 0.5 * power(az0)?;
    let limit = 89.9;
    let edge = |dir: f64| -> Result<f64> {
        let (mut prev_az, mut prev_p) = (az0, 2.0 * half);
        loop {
            let az = prev_az + dir * step_deg;
            if az.abs() > limit {
                return Ok(dir * limit);
            }
            let p = power(az)?;
            if p < half {
                let t = (prev_p - half) / (prev_p - p);
                return Ok(prev_az + dir * step_deg * t);
            }
            (prev_az, prev_p) = (az, p);
        }
    };
    let hi = edge(1.0)?;
    let lo = edge(-1.0)?;
    Ok(hi - lo)
}

/// Theoretical element-space covariance of a scenario at frequency `f_hz`.
///
/// Targets contribute `gain * a a^H`, point jammers `J * a a^H`, spatially
/// white jammers `J * I`, and each tile its own noise power on the diagonal.
/// Used only by tests and analysis, not by the processing chain.
pub fn analytic_covariance(layout: &ArrayLayout, scenario: &Scenario, f_hz: f64, include_targets: bool) -> Result<DMatrix<Complex64>> {
    let d = layout.n_elements();
    let mut r = DMatrix::<Complex64>::zeros(d, d);
    let mut add_rank_one = |a: &[Complex64], p: f64| {
        for i in 0..d {
            for j in 0..d {
                r[(i, j)] += a[i] * a[j].conj() * p;
            }
        }
    };
    if include_targets {
        for t in &scenario.targets {
            let a = crate::array_model::steering_at(layout, t.angle, f_hz)?;
            add_rank_one(&a, db_to_power(t.gain_db));
        }
    }
    let mut white = 0.0;
    for j in &scenario.interferers {
        match scenario.jammer_model {
            JammerModel::Point => {
                let a = crate::array_model::steering_at(layout, j.angle, f_hz)?;
                add_rank_one(&a, db_to_power(j.inr_db));
            }
            JammerModel::SpatiallyWhite => white += db_to_power(j.inr_db),
        }
    }
    let noise = scenario.tile_noise_power(layout.n_tiles())?;
    let n = layout.elems_per_tile();
    for i in 0..d {
        r[(i, i)] += noise[i / n] + white;
    }
    Ok(r)
}

/// `(I_T ⊗ B_k) R (I_T ⊗ B_k)^H`.
pub fn reduce_covariance(
    transform: &BeamspaceTransform,
    window: &BeamspaceWindow,
    r: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let d = r.nrows();
    // Rows of M^H where M = (I ⊗ B) R: reduce each column of R^H = R.
    let cols = (0..d)
        .map(|j| {
            let col: Vec<Complex64> = r.column(j).iter().copied().collect();
            reduce_global(transform, window, &col)
        })
        .collect::<Result<Vec<_>>>()?;
    let dw = cols.first().map_or(0, Vec::len);
    // M[i, j] = cols[j][i]; reduced = M (I ⊗ B)^H, i.e. row i of reduced is conj(reduce(conj(M row i))).
    let mut out = DMatrix::zeros(dw, dw);
    for i in 0..dw {
        let row_conj: Vec<Complex64> = (0..d).map(|j| cols[j][i].conj()).collect();
        let red = reduce_global(transform, window, &row_conj)?;
        for (k, v) in red.iter().enumerate() {
            out[(i, k)] = v.conj();
        }
    }
    Ok(out)
}

/// Output SINR `p |c^H a|^2 / (c^H R_in c)` for interference-plus-noise covariance `r_in`.
pub fn output_sinr(weights: &[Complex64], steering: &[Complex64], power: f64, r_in: &DMatrix<Complex64>) -> f64 {
    let c = nalgebra::DVector::from_column_slice(weights);
    let denom = (c.adjoint() * r_in * &c)[(0, 0)].re;
    power * inner(weights, steering).norm_sqr() / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamspace::plan_window;
    use crate::scene::{complex_gaussian, stream_rng};

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = stream_rng(seed, 7, 7);
        (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_snapshot_covariance_is_rank_one_plus_loading() {
        let y = random_vec(4, 1);
        let snaps = SnapshotMatrix::from_row_vecs(std::slice::from_ref(&y)).unwrap();
        let cov = estimate_covariance(&snaps, 0.1).unwrap();
        let tr: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        assert!((cov.loading - 0.1 * tr / 4.0).abs() < 1e-14);
        for i in 0..4 {
            for j in 0..4 {
                let mut want = y[i] * y[j].conj();
                if i == j {
                    want += cov.loading;
                }
                assert!((cov.matrix[(i, j)] - want).norm() < 1e-12);
            }
        }
        assert!(estimate_covariance(&SnapshotMatrix::zeros(0, 4), 0.0).is_err());
        assert!(estimate_covariance(&snaps, -1.0).is_err());
    }

    #[test]
    fn white_noise_covariance_converges() {
        let d = 6;
        let sigma2 = 2.5;
        let mut rng = stream_rng(3, 0, 0);
        let rows: Vec<Vec<Complex64>> = (0..10_000)
            .map(|_| (0..d).map(|_| complex_gaussian(&mut rng, sigma2)).collect())
            .collect();
        let cov = estimate_covariance(&SnapshotMatrix::from_row_vecs(&rows).unwrap(), 0.0).unwrap();
        let diff = &cov.matrix - DMatrix::<Complex64>::identity(d, d) * c(sigma2, 0.0);
        let rel = diff.norm() / (sigma2 * (d as f64).sqrt());
        assert!(rel < 0.05, "{rel}");
    }

    #[test]
    fn rank_deficient_without_loading_is_singular() {
        let rows: Vec<Vec<Complex64>> = (0..3).map(|s| random_vec(8, s)).collect();
        let cov = estimate_covariance(&SnapshotMatrix::from_row_vecs(&rows).unwrap(), 0.0).unwrap();
        assert!(cov.rank_deficient());
        let err = mvdr_weights(&cov, &random_vec(8, 9)).unwrap_err();
        assert!(matches!(err, Error::SingularCovariance { .. }));
        assert_eq!(err.exit_code(), 3);
        let loaded = estimate_covariance(&SnapshotMatrix::from_row_vecs(&rows).unwrap(), 1e-3).unwrap();
        assert!(!loaded.rank_deficient());
        assert!(mvdr_weights(&loaded, &random_vec(8, 9)).is_ok());
    }

    #[test]
    fn identity_covariance_gives_matched_filter() {
        let a = random_vec(5, 2);
        let cov = CovarianceEstimate::from_matrix(DMatrix::identity(5, 5), 0.0).unwrap();
        let w = mvdr_weights(&cov, &a).unwrap();
        let n2 = norm(&a).powi(2);
        for (wi, ai) in w.weights.iter().zip(&a) {
            assert!((wi - ai / n2).norm() < 1e-14);
        }
        assert!(w.distortionless_error() < 1e-12);
    }

    #[test]
    fn two_by_two_hand_case() {
        let mut r = DMatrix::zeros(2, 2);
        r[(0, 0)] = c(1.0, 0.0);
        r[(1, 1)] = c(2.0, 0.0);
        let cov = CovarianceEstimate::from_matrix(r, 0.0).unwrap();
        let w = mvdr_weights(&cov, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((w.weights[0] - c(2.0 / 3.0, 0.0)).norm() < 1e-14);
        assert!((w.weights[1] - c(1.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn strong_rank_one_interferer_is_nulled() {
        // Sherman-Morrison: R^-1 a = a - b (gamma b^H a) / (1 + gamma |b|^2).
        let d = 8;
        let a = random_vec(d, 4);
        let b = random_vec(d, 5);
        let gamma = 1e6;
        let mut r = DMatrix::<Complex64>::identity(d, d);
        for i in 0..d {
            for j in 0..d {
                r[(i, j)] += b[i] * b[j].conj() * gamma;
            }
        }
        let cov = CovarianceEstimate::from_matrix(r, 0.0).unwrap();
        let w = mvdr_weights(&cov, &a).unwrap();
        let bha = inner(&b, &a);
        let k = bha * gamma / (1.0 + gamma * norm(&b).powi(2));
        let x: Vec<Complex64> = a.iter().zip(&b).map(|(ai, bi)| ai - bi * k).collect();
        let s = inner(&a, &x);
        for (wi, xi) in w.weights.iter().zip(&x) {
            assert!((wi - xi / s).norm() < 1e-9);
        }
        let leak = inner(&w.weights, &b).norm() / (norm(&w.weights) * norm(&b));
        assert!(leak <= 1e-3, "{leak}");
        // Output on a + b: 1 plus a small residue.
        let y: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let snaps = SnapshotMatrix::from_row_vecs(&[y, a.clone()]).unwrap();
        let out = mvdr_output(&w, &snaps).unwrap();
        assert!((out[1] - 1.0).norm() < 1e-9);
        assert!((out[0] - 1.0).norm() <= inner(&w.weights, &b).norm() + 1e-9);
    }

    #[test]
    fn output_of_orthogonal_snapshot_is_zero() {
        let a = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let cov = CovarianceEstimate::from_matrix(DMatrix::identity(2, 2), 0.0).unwrap();
        let w = mvdr_weights(&cov, &a).unwrap();
        let snaps = SnapshotMatrix::from_row_vecs(&[vec![c(0.0, 0.0), c(3.0, 1.0)]]).unwrap();
        assert_eq!(mvdr_output(&w, &snaps).unwrap()[0].norm(), 0.0);
        assert!(mvdr_output(&w, &SnapshotMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn lift_examples() {
        let layout = ArrayLayout::new(2, 1, 2, 4, 1e9).unwrap();
        let t = BeamspaceTransform::for_layout(&layout);
        let full = plan_window(&layout, SpatialFrequency::new(0.2, 0.0), 2, 4).unwrap();
        let ct = random_vec(16, 6);
        let l = lift(&ct, &full, &t).unwrap();
        assert!((norm(&l.weights) - norm(&ct)).abs() < 1e-12);
        let z = lift(&vec![c(0.0, 0.0); 16], &full, &t).unwrap();
        assert!(z.weights.iter().all(|v| *v == c(0.0, 0.0)));
        let small = plan_window(&layout, SpatialFrequency::new(0.2, 0.0), 1, 2).unwrap();
        let ct = random_vec(4, 7);
        let l = lift(&ct, &small, &t).unwrap();
        for s in 0..5 {
            let y = random_vec(16, 20 + s);
            let lhs = inner(&l.weights, &y);
            let rhs = inner(&ct, &reduce_global(&t, &small, &y).unwrap());
            assert!((lhs - rhs).norm() < 1e-12);
        }
        assert!(lift(&ct[..3], &small, &t).is_err());
    }

    #[test]
    fn pattern_peaks_at_steered_angle() {
        let layout = ArrayLayout::new(2, 2, 2, 4, 3e9).unwrap();
        let angle = SourceAngle::from_degrees(20.0, 10.0).unwrap();
        let a = crate::array_model::steering_at(&layout, angle, 3e9).unwrap();
        assert!((pattern_value(&a, &layout, angle, 3e9).unwrap() - 1.0).abs() < 1e-12);
        let grid = AngleGrid::symmetric(60.0, 30.0, 5.0).unwrap();
        let p = beam_pattern(&a, &layout, &grid, 3e9).unwrap();
        assert!(p.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(beam_pattern(&vec![c(0.0, 0.0); 16], &layout, &grid, 3e9).is_err());
    }

    #[test]
    fn grid_dimensions() {
        let g = AngleGrid::symmetric(60.0, 30.0, 1.0).unwrap();
        assert_eq!((g.azimuth_deg.len(), g.elevation_deg.len()), (121, 61));
        assert_eq!(g.azimuth_deg[0], -60.0);
        assert_eq!(*g.azimuth_deg.last().unwrap(), 60.0);
    }

    #[test]
    fn uniform_ula_half_power_width() {
        let n = 32;
        let layout = ArrayLayout::monolithic(1, n, 3e9).unwrap();
        let w = global_steering(&layout, SpatialFrequency::new(0.0, 0.0));
        let got = mainlobe_width_deg(&w, &layout, SourceAngle::new(0.0, 0.0).unwrap(), 3e9, 0.01).unwrap();
        // |sin(N u / 2) / (N sin(u / 2))|^2 = 1/2 with u = pi sin(phi), by bisection
        let gain = |phi: f64| {
            let u = std::f64::consts::PI * phi.sin();
            ((n as f64 * u / 2.0).sin() / (n as f64 * (u / 2.0).sin())).powi(2)
        };
        let (mut lo, mut hi) = (1e-6, 2.0 / n as f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if gain(mid) > 0.5 { lo = mid } else { hi = mid }
        }
        let expect = 2.0 * lo.to_degrees();
        assert!((got - expect).abs() < 1e-3, "{got} vs {expect}");
    }
}
