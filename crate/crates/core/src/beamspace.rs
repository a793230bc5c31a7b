//! Per-tile beamspace projection and AoA-dependent windowing.
//!
//! The tile transform is `D = D_{Nx}^T ⊗ D_{Nz}` with unitary DFT factors, so
//! beamspace coefficient `(bx, bz)` lives at index `bx * Nz + bz`, matching the
//! element ordering of [`crate::array_model`]. A window keeps `Wz x Wx`
//! contiguous (circular) bins around the target's DFT location. Windowed
//! coefficients are emitted x-outer, z-inner in bin-list order.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::array_model::{global_steering, ArrayLayout, SpatialFrequency};
use crate::error::{check_len, Error, Result};

/// Unitary 2D DFT of one `Nz x Nx` tile.
#[derive(Clone)]
pub struct BeamspaceTransform {
    n_z: usize,
    n_x: usize,
    fwd_z: Arc<dyn Fft<f64>>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_z: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for BeamspaceTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BeamspaceTransform")
            .field("n_z", &self.n_z)
            .field("n_x", &self.n_x)
            .finish()
    }
}

impl BeamspaceTransform {
    pub fn new(n_z: usize, n_x: usize) -> Self {
        let mut planner = FftPlanner::new();
        BeamspaceTransform {
            n_z,
            n_x,
            fwd_z: planner.plan_fft_forward(n_z),
            fwd_x: planner.plan_fft_forward(n_x),
            inv_z: planner.plan_fft_inverse(n_z),
            inv_x: planner.plan_fft_inverse(n_x),
        }
    }

    pub fn for_layout(layout: &ArrayLayout) -> Self {
        Self::new(layout.elems_z, layout.elems_x)
    }

    pub fn len(&self) -> usize {
        self.n_z * self.n_x
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Always true: both factors are scaled by `1/sqrt(n)`.
    pub fn is_unitary(&self) -> bool {
        true
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (fz, fx) = if inverse {
            (&self.inv_z, &self.inv_x)
        } else {
            (&self.fwd_z, &self.fwd_x)
        };
        for column in data.chunks_exact_mut(self.n_z) {
            fz.process(column);
        }
        let mut line = vec![Complex64::new(0.0, 0.0); self.n_x];
        for z in 0..self.n_z {
            for (x, v) in line.iter_mut().enumerate() {
                *v = data[x * self.n_z + z];
            }
            fx.process(&mut line);
            for (x, v) in line.iter().enumerate() {
                data[x * self.n_z + z] = *v;
            }
        }
        let scale = 1.0 / (self.len() as f64).sqrt();
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Applies `D` in place.
    pub fn forward_in_place(&self, data: &mut [Complex64]) -> Result<()> {
        check_len("dft_2d input", self.len(), data.len())?;
        self.transform(data, false);
        Ok(())
    }

    /// Applies `D^H` in place.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) -> Result<()> {
        check_len("inverse dft_2d input", self.len(), data.len())?;
        self.transform(data, true);
        Ok(())
    }

    pub fn dft_2d(&self, tile: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = tile.to_vec();
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    /// Explicit `D` as a row-major `N x N` matrix.
    pub fn matrix(&self) -> Vec<Complex64> {
        let n = self.len();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for (row, bin) in (0..n).map(|r| (r, self.bin_of(r))) {
            for (col, (x, z)) in (0..n).map(|c| (c, self.bin_of(c))) {
                let phase = -2.0 * PI
                    * ((bin.0 * x) as f64 / self.n_x as f64 + (bin.1 * z) as f64 / self.n_z as f64);
                m[row * n + col] = Complex64::from_polar(1.0 / (n as f64).sqrt(), phase);
            }
        }
        m
    }

    fn bin_of(&self, index: usize) -> (usize, usize) {
        (index / self.n_z, index % self.n_z)
    }
}

/// Applies the unitary 2D DFT of an `n_z x n_x` tile.
pub fn dft_2d(n_z: usize, n_x: usize, tile: &[Complex64]) -> Result<Vec<Complex64>> {
    BeamspaceTransform::new(n_z, n_x).dft_2d(tile)
}

/// Binary selection of `Wz x Wx` beamspace bins for one target in one subband.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamspaceWindow {
    pub target_id: usize,
    pub subband: usize,
    pub n_z: usize,
    pub n_x: usize,
    pub z_bins: Vec<usize>,
    pub x_bins: Vec<usize>,
    pub center_z: usize,
    pub center_x: usize,
}

/// DFT bin nearest to spatial frequency `omega` on an `n`-point axis.
pub fn center_bin(n: usize, omega: f64) -> usize {
    let b = (n as f64 * omega / (2.0 * PI)).round() as i64;
    b.rem_euclid(n as i64) as usize
}

fn axis_bins(n: usize, center: usize, w: usize) -> Vec<usize> {
    if w == n {
        return (0..n).collect();
    }
    // Even widths put the extra bin on the increasing-index side.
    let below = (w - 1) / 2;
    (0..w)
        .map(|i| (center + n + i - below) % n)
        .collect()
}

/// Plans the window of width `w_z x w_x` around `omega` for tiles of `layout`.
pub fn plan_window(
    layout: &ArrayLayout,
    omega: SpatialFrequency,
    w_z: usize,
    w_x: usize,
) -> Result<BeamspaceWindow> {
    let (n_z, n_x) = (layout.elems_z, layout.elems_x);
    if w_z == 0 || w_z > n_z {
        return Err(Error::domain(format!("window height {w_z} outside 1..={n_z}")));
    }
    if w_x == 0 || w_x > n_x {
        return Err(Error::domain(format!("window width {w_x} outside 1..={n_x}")));
    }
    let center_z = center_bin(n_z, omega.omega_z);
    let center_x = center_bin(n_x, omega.omega_x);
    Ok(BeamspaceWindow {
        target_id: 0,
        subband: 0,
        n_z,
        n_x,
        z_bins: axis_bins(n_z, center_z, w_z),
        x_bins: axis_bins(n_x, center_x, w_x),
        center_z,
        center_x,
    })
}

impl BeamspaceWindow {
    pub fn labelled(mut self, target_id: usize, subband: usize) -> Self {
        self.target_id = target_id;
        self.subband = subband;
        self
    }

    /// `W = Wz * Wx`.
    pub fn len(&self) -> usize {
        self.z_bins.len() * self.x_bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tile_len(&self) -> usize {
        self.n_z * self.n_x
    }

    /// Beamspace indices selected, in output order.
    pub fn indices(&self) -> Vec<usize> {
        self.x_bins
            .iter()
            .flat_map(|&bx| self.z_bins.iter().map(move |&bz| bx * self.n_z + bz))
            .collect()
    }

    /// Explicit `S_k` as a row-major `W x N` 0/1 matrix.
    pub fn selector_matrix(&self) -> Vec<f64> {
        let n = self.tile_len();
        let mut s = vec![0.0; self.len() * n];
        for (row, col) in self.indices().into_iter().enumerate() {
            s[row * n + col] = 1.0;
        }
        s
    }
}

/// `S_k x` for one beamspace tile vector.
pub fn apply_window(window: &BeamspaceWindow, beamspace: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len("apply_window input", window.tile_len(), beamspace.len())?;
    Ok(window.indices().into_iter().map(|i| beamspace[i]).collect())
}

/// `S_k D y` for one tile's element snapshot.
pub fn reduce_tile(
    transform: &BeamspaceTransform,
    window: &BeamspaceWindow,
    tile: &[Complex64],
) -> Result<Vec<Complex64>> {
    check_len("reduce_tile window", transform.len(), window.tile_len())?;
    apply_window(window, &transform.dft_2d(tile)?)
}

/// `(I_T ⊗ S_k D) y` for a stacked snapshot of `T` tiles.
pub fn reduce_global(
    transform: &BeamspaceTransform,
    window: &BeamspaceWindow,
    stacked: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = window.tile_len();
    check_len("reduce_global window", transform.len(), n)?;
    if n == 0 || stacked.len() % n != 0 {
        return Err(Error::Dimension {
            context: "reduce_global snapshot",
            expected: n,
            got: stacked.len(),
        });
    }
    let mut out = Vec::with_capacity(stacked.len() / n * window.len());
    for tile in stacked.chunks_exact(n) {
        out.extend(reduce_tile(transform, window, tile)?);
    }
    Ok(out)
}

/// `(I_T ⊗ D) y`: every tile of a stacked snapshot in beamspace.
pub fn beamspace_stacked(transform: &BeamspaceTransform, stacked: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = transform.len();
    if n == 0 || stacked.len() % n != 0 {
        return Err(Error::Dimension {
            context: "beamspace_stacked snapshot",
            expected: n,
            got: stacked.len(),
        });
    }
    let mut out = stacked.to_vec();
    for tile in out.chunks_exact_mut(n) {
        transform.forward_in_place(tile)?;
    }
    Ok(out)
}

/// Windowed beamspace steering vector `ã` of length `T * W`.
pub fn windowed_steering(
    layout: &ArrayLayout,
    transform: &BeamspaceTransform,
    window: &BeamspaceWindow,
    omega: SpatialFrequency,
) -> Result<Vec<Complex64>> {
    reduce_global(transform, window, &global_steering(layout, omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::element_response;

    fn cnorm(v: &[Complex64]) -> f64 {
        v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = crate::scene::stream_rng(seed, 99, 99);
        (0..n)
            .map(|_| crate::scene::complex_gaussian(&mut rng, 1.0))
            .collect()
    }

    #[test]
    fn on_grid_exponential_is_single_bin() {
        let layout = ArrayLayout::monolithic(4, 8, 1e9).unwrap();
        let t = BeamspaceTransform::for_layout(&layout);
        let w = SpatialFrequency::new(2.0 * PI * 3.0 / 8.0, 2.0 * PI * 1.0 / 4.0);
        let out = t.dft_2d(&element_response(&layout, w)).unwrap();
        let hot = 3 * 4 + 1;
        for (i, v) in out.iter().enumerate() {
            let want = if i == hot { (32f64).sqrt() } else { 0.0 };
            assert!((v - Complex64::new(want, 0.0)).norm() < 1e-12, "bin {i}: {v}");
        }
    }

    #[test]
    fn all_ones_goes_to_dc() {
        let t = BeamspaceTransform::new(3, 5);
        let out = t.dft_2d(&vec![Complex64::new(1.0, 0.0); 15]).unwrap();
        assert!((out[0].re - 15f64.sqrt()).abs() < 1e-12);
        assert!(out[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn fft_matches_explicit_matrix_and_inverse() {
        for (nz, nx) in [(1, 1), (2, 16), (4, 8), (3, 7), (32, 32)] {
            let t = BeamspaceTransform::new(nz, nx);
            let n = nz * nx;
            let x = random_vec(n, (nz * 100 + nx) as u64);
            let fast = t.dft_2d(&x).unwrap();
            let d = t.matrix();
            for r in 0..n {
                let slow: Complex64 = (0..n).map(|c| d[r * n + c] * x[c]).sum();
                assert!((slow - fast[r]).norm() <= 1e-12 * cnorm(&x).max(1.0) * 10.0);
            }
            assert!(((cnorm(&fast) - cnorm(&x)) / cnorm(&x)).abs() <= 1e-12);
            let mut back = fast.clone();
            t.inverse_in_place(&mut back).unwrap();
            for (a, b) in back.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        assert!(BeamspaceTransform::new(2, 2).dft_2d(&[Complex64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn window_planning_examples() {
        let layout = ArrayLayout::monolithic(8, 16, 1e9).unwrap();
        let w = plan_window(&layout, SpatialFrequency::new(2.0 * PI * 3.0 / 16.0, 0.0), 1, 1).unwrap();
        assert_eq!(w.x_bins, vec![3]);
        let w = plan_window(&layout, SpatialFrequency::new(0.0, 0.0), 3, 1).unwrap();
        assert_eq!(w.z_bins, vec![7, 0, 1]);
        let w = plan_window(&layout, SpatialFrequency::new(0.7, -0.3), 8, 16).unwrap();
        assert_eq!(w.z_bins, (0..8).collect::<Vec<_>>());
        assert_eq!(w.x_bins, (0..16).collect::<Vec<_>>());
        // Even width: extra bin above the centre.
        let w = plan_window(&layout, SpatialFrequency::new(0.0, 0.0), 4, 2).unwrap();
        assert_eq!(w.z_bins, vec![7, 0, 1, 2]);
        assert_eq!(w.x_bins, vec![0, 1]);
        // Negative frequency wraps.
        let w = plan_window(&layout, SpatialFrequency::new(-2.0 * PI * 2.0 / 16.0, 0.0), 1, 3).unwrap();
        assert_eq!(w.center_x, 14);
        assert_eq!(w.x_bins, vec![13, 14, 15]);
        assert!(plan_window(&layout, SpatialFrequency::new(0.0, 0.0), 9, 1).is_err());
        assert!(plan_window(&layout, SpatialFrequency::new(0.0, 0.0), 1, 0).is_err());
    }

    #[test]
    fn selector_structure() {
        let layout = ArrayLayout::monolithic(4, 8, 1e9).unwrap();
        let w = plan_window(&layout, SpatialFrequency::new(1.1, 2.9), 3, 2).unwrap();
        let s = w.selector_matrix();
        let n = 32;
        for row in s.chunks_exact(n) {
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v != 0.0 && v != 1.0).count(), 0);
        }
        for col in 0..n {
            assert!((0..w.len()).map(|r| s[r * n + col]).sum::<f64>() <= 1.0);
        }
    }

    #[test]
    fn apply_window_examples() {
        let layout = ArrayLayout::monolithic(2, 4, 1e9).unwrap();
        let x = random_vec(8, 3);
        let full = plan_window(&layout, SpatialFrequency::new(0.4, 0.1), 2, 4).unwrap();
        assert_eq!(apply_window(&full, &x).unwrap(), x);
        let mut spike = vec![Complex64::new(0.0, 0.0); 8];
        spike[5] = Complex64::new(8f64.sqrt(), 0.0);
        // bin (bx=2, bz=1) is index 5
        let hit = plan_window(&layout, SpatialFrequency::new(PI, PI), 1, 1).unwrap();
        assert_eq!(hit.indices(), vec![5]);
        assert_eq!(apply_window(&hit, &spike).unwrap(), vec![spike[5]]);
        let miss = plan_window(&layout, SpatialFrequency::new(0.0, 0.0), 1, 1).unwrap();
        assert_eq!(apply_window(&miss, &spike).unwrap(), vec![Complex64::new(0.0, 0.0)]);
        assert!(apply_window(&hit, &spike[..7]).is_err());
    }

    #[test]
    fn reduce_tile_examples() {
        let layout = ArrayLayout::monolithic(2, 4, 1e9).unwrap();
        let t = BeamspaceTransform::for_layout(&layout);
        let dc = plan_window(&layout, SpatialFrequency::new(0.0, 0.0), 1, 3).unwrap();
        let out = reduce_tile(&t, &dc, &[Complex64::new(1.0, 0.0); 8]).unwrap();
        // x bins [3, 0, 1]: DC sits in the second slot.
        assert!((out[1].re - 8f64.sqrt()).abs() < 1e-12);
        assert!(out[0].norm() < 1e-12 && out[2].norm() < 1e-12);
        let zero = reduce_tile(&t, &dc, &[Complex64::new(0.0, 0.0); 8]).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
        let full = plan_window(&layout, SpatialFrequency::new(0.3, 0.0), 2, 4).unwrap();
        let x = random_vec(8, 11);
        assert_eq!(reduce_tile(&t, &full, &x).unwrap(), t.dft_2d(&x).unwrap());
    }

    #[test]
    fn reduce_global_two_tiles_on_grid() {
        // Oracle: explicit (I_T ⊗ S D) matrix product.
        let layout = ArrayLayout::new(1, 2, 2, 4, 1e9).unwrap();
        let t = BeamspaceTransform::for_layout(&layout);
        let omega = SpatialFrequency::new(2.0 * PI / 4.0, 0.0);
        let win = plan_window(&layout, omega, 1, 1).unwrap();
        let y = global_steering(&layout, omega);
        let got = reduce_global(&t, &win, &y).unwrap();
        let d = t.matrix();
        let s = win.selector_matrix();
        let n = 8;
        let mut want = vec![];
        for tile in y.chunks_exact(n) {
            for r in 0..win.len() {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..n {
                    let bd: Complex64 = (0..n).map(|c| d[m * n + c] * tile[c]).sum();
                    acc += s[r * n + m] * bd;
                }
                want.push(acc);
            }
        }
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12);
        }
        let ratio = got[1] / got[0];
        let expect = Complex64::from_polar(1.0, 4.0 * omega.omega_x);
        assert!((ratio - expect).norm() < 1e-12);
        assert!((got[0].norm() - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn windowed_steering_examples() {
        let layout = ArrayLayout::new(2, 2, 2, 4, 1e9).unwrap();
        let t = BeamspaceTransform::for_layout(&layout);
        let on = SpatialFrequency::new(2.0 * PI / 4.0, PI);
        let w1 = plan_window(&layout, on, 1, 1).unwrap();
        let a = windowed_steering(&layout, &t, &w1, on).unwrap();
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|v| (v.norm() - 8f64.sqrt()).abs() < 1e-12));
        let full = plan_window(&layout, on, 2, 4).unwrap();
        let off = SpatialFrequency::new(0.37, -0.81);
        let a = windowed_steering(&layout, &t, &full, off).unwrap();
        assert!((cnorm(&a) - 32f64.sqrt()).abs() < 1e-12);
        assert!(reduce_global(&t, &full, &a[..31]).is_err());
    }

    #[test]
    fn half_bin_offset_captures_dirichlet_fraction() {
        // Oracle: closed-form Dirichlet kernel |sin(N d/2) / (N sin(d/2))|^2 at d = pi/N.
        let n = 16;
        let layout = ArrayLayout::monolithic(1, n, 1e9).unwrap();
        let t = BeamspaceTransform::for_layout(&layout);
        let omega = SpatialFrequency::new(2.0 * PI * 2.5 / n as f64 - 1e-9, 0.0);
        let win = plan_window(&layout, omega, 1, 1).unwrap();
        let a = windowed_steering(&layout, &t, &win, omega).unwrap();
        let frac = a[0].norm_sqr() / n as f64;
        let delta = PI / n as f64;
        let dirichlet = ((n as f64 * delta / 2.0).sin() / (n as f64 * (delta / 2.0).sin())).powi(2);
        assert!((frac - dirichlet).abs() < 1e-6, "{frac} vs {dirichlet}");
        assert!((frac - 4.0 / (PI * PI)).abs() < 0.01);
    }

    #[test]
    fn window_tracks_frequency_scaling() {
        let layout = ArrayLayout::monolithic(8, 32, 3e9).unwrap();
        let r = SpatialFrequency::new(1.3, -0.4);
        for f in [2.85e9, 3e9, 3.1e9, 3.15e9] {
            let w = crate::array_model::spatial_freq_at(r, f, 3e9).unwrap();
            let win = plan_window(&layout, w, 2, 2).unwrap();
            let want = ((32.0 * (f / 3e9) * r.omega_x / (2.0 * PI)).round() as i64).rem_euclid(32) as usize;
            assert_eq!(win.center_x, want);
        }
    }
}
