//! Tiled uniform-planar-array geometry and steering vectors.
//!
//! The aperture is a `(tiles_z * elems_z) x (tiles_x * elems_x)` grid of
//! half-wavelength-spaced elements, cut into `tiles_z x tiles_x` tiles.
//!
//! Element ordering is column-major everywhere: inside a tile the element at
//! row `z`, column `x` sits at index `x * elems_z + z`, and tile `(tz, tx)` is
//! tile number `tx * tiles_z + tz`. A stacked snapshot is the concatenation of
//! the per-tile vectors in tile order. The phase reference of every tile is its
//! corner element (index 0), and the phase reference of the array is the
//! corner element of tile 0.
//!
//! Angles: azimuth is measured from boresight (+y) in the horizontal plane,
//! elevation from the horizontal plane. Spatial frequencies scale with the
//! processing frequency and may exceed `pi` above the design frequency; this is
//! physical aliasing and is not rejected.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element pitch in wavelengths at the design frequency.
pub const ELEMENT_SPACING_WAVELENGTHS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub tiles_z: usize,
    pub tiles_x: usize,
    pub elems_z: usize,
    pub elems_x: usize,
    pub design_freq_hz: f64,
}

impl ArrayLayout {
    pub fn new(
        tiles_z: usize,
        tiles_x: usize,
        elems_z: usize,
        elems_x: usize,
        design_freq_hz: f64,
    ) -> Result<Self> {
        let layout = ArrayLayout {
            tiles_z,
            tiles_x,
            elems_z,
            elems_x,
            design_freq_hz,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// A single-tile (monolithic) array of `elems_z x elems_x` elements.
    pub fn monolithic(elems_z: usize, elems_x: usize, design_freq_hz: f64) -> Result<Self> {
        Self::new(1, 1, elems_z, elems_x, design_freq_hz)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tiles_z", self.tiles_z),
            ("tiles_x", self.tiles_x),
            ("elems_z", self.elems_z),
            ("elems_x", self.elems_x),
        ] {
            if v == 0 {
                return Err(Error::config(name, "must be at least 1"));
            }
        }
        if !(self.design_freq_hz.is_finite() && self.design_freq_hz > 0.0) {
            return Err(Error::config("design_freq_hz", "must be positive"));
        }
        Ok(())
    }

    /// Number of tiles `T`.
    pub fn n_tiles(&self) -> usize {
        self.tiles_z * self.tiles_x
    }

    /// Elements per tile `N`.
    pub fn elems_per_tile(&self) -> usize {
        self.elems_z * self.elems_x
    }

    /// Total element count `T * N`.
    pub fn n_elements(&self) -> usize {
        self.n_tiles() * self.elems_per_tile()
    }

    /// Rows of the full aperture.
    pub fn rows(&self) -> usize {
        self.tiles_z * self.elems_z
    }

    /// Columns of the full aperture.
    pub fn cols(&self) -> usize {
        self.tiles_x * self.elems_x
    }

    pub fn spacing_wavelengths(&self) -> f64 {
        ELEMENT_SPACING_WAVELENGTHS
    }

    pub fn wavelength_m(&self) -> f64 {
        crate::SPEED_OF_LIGHT / self.design_freq_hz
    }

    /// Position in the stacked snapshot of the element at aperture row `row`, column `col`.
    pub fn stacked_index(&self, row: usize, col: usize) -> usize {
        let (tz, z) = (row / self.elems_z, row % self.elems_z);
        let (tx, x) = (col / self.elems_x, col % self.elems_x);
        let tile = tx * self.tiles_z + tz;
        tile * self.elems_per_tile() + x * self.elems_z + z
    }

    /// Inverse of [`ArrayLayout::stacked_index`].
    pub fn aperture_position(&self, index: usize) -> (usize, usize) {
        let n = self.elems_per_tile();
        let (tile, within) = (index / n, index % n);
        let (tx, tz) = (tile / self.tiles_z, tile % self.tiles_z);
        let (x, z) = (within / self.elems_z, within % self.elems_z);
        (tz * self.elems_z + z, tx * self.elems_x + x)
    }
}

/// Direction of arrival in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceAngle {
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
}

impl SourceAngle {
    pub fn new(azimuth_rad: f64, elevation_rad: f64) -> Result<Self> {
        let angle = SourceAngle {
            azimuth_rad,
            elevation_rad,
        };
        angle.validate()?;
        Ok(angle)
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    pub fn validate(&self) -> Result<()> {
        let visible = |a: f64| a.is_finite() && a.abs() < FRAC_PI_2;
        if visible(self.azimuth_rad) && visible(self.elevation_rad) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "angle (az {:.6} rad, el {:.6} rad) outside the front hemisphere",
                self.azimuth_rad, self.elevation_rad
            )))
        }
    }
}

/// Per-element phase increments along the horizontal (`x`) and vertical (`z`) axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialFrequency {
    pub omega_x: f64,
    pub omega_z: f64,
}

impl SpatialFrequency {
    pub fn new(omega_x: f64, omega_z: f64) -> Self {
        SpatialFrequency { omega_x, omega_z }
    }
}

/// Spatial frequency of a plane wave from `angle` at the design frequency.
pub fn reference_spatial_freq(angle: SourceAngle) -> Result<SpatialFrequency> {
    angle.validate()?;
    let (phi, theta) = (angle.azimuth_rad, angle.elevation_rad);
    Ok(SpatialFrequency {
        omega_x: PI * theta.cos() * phi.sin(),
        omega_z: PI * theta.sin(),
    })
}

/// Scales a reference spatial frequency from the design frequency to `f_hz`.
pub fn spatial_freq_at(
    reference: SpatialFrequency,
    f_hz: f64,
    f_d_hz: f64,
) -> Result<SpatialFrequency> {
    if !(f_hz > 0.0 && f_d_hz > 0.0) {
        return Err(Error::domain(format!(
            "frequencies must be positive (f = {f_hz}, f_d = {f_d_hz})"
        )));
    }
    if f_hz == f_d_hz {
        return Ok(reference);
    }
    let scale = f_hz / f_d_hz;
    Ok(SpatialFrequency {
        omega_x: scale * reference.omega_x,
        omega_z: scale * reference.omega_z,
    })
}

/// Uniform-linear-array response `[1, e^{j omega}, ..., e^{j (n-1) omega}]`.
pub fn steering_1d(n: usize, omega: f64) -> Vec<Complex64> {
    (0..n)
        .map(|m| {
            if m == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, m as f64 * omega)
            }
        })
        .collect()
}

/// Kronecker product `a ⊗ b` of two vectors.
pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|&ai| b.iter().map(move |&bj| ai * bj))
        .collect()
}

/// In-tile response `u_{Nx}(omega_x) ⊗ u_{Nz}(omega_z)`.
pub fn element_response(layout: &ArrayLayout, omega: SpatialFrequency) -> Vec<Complex64> {
    kron(
        &steering_1d(layout.elems_x, omega.omega_x),
        &steering_1d(layout.elems_z, omega.omega_z),
    )
}

/// Tile-level phase progression `u_{Tx}(Nx omega_x) ⊗ u_{Tz}(Nz omega_z)`.
pub fn tile_response(layout: &ArrayLayout, omega: SpatialFrequency) -> Vec<Complex64> {
    kron(
        &steering_1d(layout.tiles_x, layout.elems_x as f64 * omega.omega_x),
        &steering_1d(layout.tiles_z, layout.elems_z as f64 * omega.omega_z),
    )
}

/// Steering vector seen by tile `tile` (1-based, as in `1..=T`).
pub fn per_tile_steering(
    layout: &ArrayLayout,
    omega: SpatialFrequency,
    tile: usize,
) -> Result<Vec<Complex64>> {
    if tile == 0 || tile > layout.n_tiles() {
        return Err(Error::domain(format!(
            "tile index {tile} outside 1..={}",
            layout.n_tiles()
        )));
    }
    let phase = tile_response(layout, omega)[tile - 1];
    Ok(element_response(layout, omega)
        .into_iter()
        .map(|v| phase * v)
        .collect())
}

/// Stacked full-array steering vector (length `T * N`).
pub fn global_steering(layout: &ArrayLayout, omega: SpatialFrequency) -> Vec<Complex64> {
    let psi = element_response(layout, omega);
    tile_response(layout, omega)
        .into_iter()
        .flat_map(|phase| psi.iter().map(move |&v| phase * v))
        .collect()
}

/// Steering vector of `angle` evaluated at processing frequency `f_hz`.
pub fn steering_at(layout: &ArrayLayout, angle: SourceAngle, f_hz: f64) -> Result<Vec<Complex64>> {
    let omega = spatial_freq_at(reference_spatial_freq(angle)?, f_hz, layout.design_freq_hz)?;
    Ok(global_steering(layout, omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_vec_close(got: &[Complex64], want: &[Complex64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() <= tol, "{g} vs {w}");
        }
    }

    #[test]
    fn reference_freq_examples() {
        let f = reference_spatial_freq(SourceAngle::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!((f.omega_x, f.omega_z), (0.0, 0.0));
        let f = reference_spatial_freq(SourceAngle::new(PI / 6.0, 0.0).unwrap()).unwrap();
        assert!((f.omega_x - PI / 2.0).abs() < TOL && f.omega_z.abs() < TOL);
        let f = reference_spatial_freq(SourceAngle::new(0.0, PI / 6.0).unwrap()).unwrap();
        assert!(f.omega_x.abs() < TOL && (f.omega_z - PI / 2.0).abs() < TOL);
    }

    #[test]
    fn angle_outside_hemisphere_rejected() {
        assert!(SourceAngle::new(FRAC_PI_2, 0.0).is_err());
        assert!(SourceAngle::new(0.0, -FRAC_PI_2).is_err());
        assert!(SourceAngle::new(f64::NAN, 0.0).is_err());
        let bad = SourceAngle {
            azimuth_rad: 2.0,
            elevation_rad: 0.0,
        };
        assert!(reference_spatial_freq(bad).is_err());
    }

    #[test]
    fn frequency_scaling() {
        let r = SpatialFrequency::new(PI / 2.0, 0.0);
        assert_eq!(spatial_freq_at(r, 3e9, 3e9).unwrap(), r);
        let s = spatial_freq_at(r, 1.1 * 3e9, 3e9).unwrap();
        assert!((s.omega_x - 0.55 * PI).abs() < TOL);
        let z = spatial_freq_at(SpatialFrequency::new(0.0, 0.0), 7e9, 3e9).unwrap();
        assert_eq!((z.omega_x, z.omega_z), (0.0, 0.0));
        assert!(spatial_freq_at(r, 0.0, 3e9).is_err());
        assert!(spatial_freq_at(r, 1.0, -3e9).is_err());
    }

    #[test]
    fn ula_examples() {
        assert_vec_close(&steering_1d(4, 0.0), &[c(1., 0.); 4], TOL);
        assert_vec_close(&steering_1d(2, PI), &[c(1., 0.), c(-1., 0.)], TOL);
        assert_vec_close(
            &steering_1d(3, PI / 2.0),
            &[c(1., 0.), c(0., 1.), c(-1., 0.)],
            TOL,
        );
        assert_eq!(steering_1d(5, 1.234)[0], c(1.0, 0.0));
    }

    #[test]
    fn element_response_examples() {
        let l = ArrayLayout::monolithic(2, 2, 1e9).unwrap();
        let one = c(1., 0.);
        assert_vec_close(
            &element_response(&l, SpatialFrequency::new(PI, 0.0)),
            &[one, one, -one, -one],
            TOL,
        );
        assert_vec_close(
            &element_response(&l, SpatialFrequency::new(PI, PI)),
            &[one, -one, -one, one],
            TOL,
        );
        let l = ArrayLayout::monolithic(3, 5, 1e9).unwrap();
        assert_vec_close(
            &element_response(&l, SpatialFrequency::new(0.0, 0.0)),
            &[one; 15],
            TOL,
        );
    }

    #[test]
    fn element_response_indexing() {
        let l = ArrayLayout::monolithic(3, 4, 1e9).unwrap();
        let w = SpatialFrequency::new(0.37, -1.1);
        let psi = element_response(&l, w);
        for x in 0..4 {
            for z in 0..3 {
                let want = Complex64::from_polar(1.0, x as f64 * w.omega_x + z as f64 * w.omega_z);
                assert!((psi[x * 3 + z] - want).norm() < TOL);
            }
        }
    }

    #[test]
    fn tile_response_examples() {
        let one = c(1., 0.);
        let l = ArrayLayout::new(1, 1, 3, 3, 1e9).unwrap();
        assert_vec_close(&tile_response(&l, SpatialFrequency::new(0.4, 0.2)), &[one], TOL);
        let l = ArrayLayout::new(1, 2, 1, 2, 1e9).unwrap();
        assert_vec_close(
            &tile_response(&l, SpatialFrequency::new(PI / 2.0, 0.0)),
            &[one, -one],
            TOL,
        );
        let l = ArrayLayout::new(2, 3, 2, 2, 1e9).unwrap();
        assert_vec_close(&tile_response(&l, SpatialFrequency::new(0., 0.)), &[one; 6], TOL);
    }

    #[test]
    fn per_tile_examples() {
        let l = ArrayLayout::new(1, 2, 1, 2, 1e9).unwrap();
        let w = SpatialFrequency::new(PI / 2.0, 0.0);
        assert_vec_close(&per_tile_steering(&l, w, 1).unwrap(), &element_response(&l, w), 0.0);
        // Elements 2 and 3 of the monolithic 1x4 ramp.
        assert_vec_close(
            &per_tile_steering(&l, w, 2).unwrap(),
            &[c(-1., 0.), c(0., -1.)],
            TOL,
        );
        let zero = SpatialFrequency::new(0.0, 0.0);
        assert_vec_close(&per_tile_steering(&l, zero, 2).unwrap(), &[c(1., 0.); 2], TOL);
        assert!(per_tile_steering(&l, w, 0).is_err());
        assert!(per_tile_steering(&l, w, 3).is_err());
    }

    #[test]
    fn global_steering_single_tile_and_zero() {
        let l = ArrayLayout::monolithic(3, 4, 1e9).unwrap();
        let w = SpatialFrequency::new(0.3, 0.9);
        assert_eq!(global_steering(&l, w), element_response(&l, w));
        let l = ArrayLayout::new(2, 2, 2, 3, 1e9).unwrap();
        assert_vec_close(
            &global_steering(&l, SpatialFrequency::new(0., 0.)),
            &vec![c(1., 0.); 24],
            TOL,
        );
    }

    #[test]
    fn stacked_index_roundtrip() {
        let l = ArrayLayout::new(3, 2, 2, 5, 1e9).unwrap();
        let mut seen = vec![false; l.n_elements()];
        for r in 0..l.rows() {
            for col in 0..l.cols() {
                let i = l.stacked_index(r, col);
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(l.aperture_position(i), (r, col));
            }
        }
    }

    #[test]
    fn layout_validation() {
        assert!(ArrayLayout::new(0, 1, 1, 1, 1e9).is_err());
        assert!(ArrayLayout::new(1, 1, 1, 1, 0.0).is_err());
        let l = ArrayLayout::new(4, 2, 2, 16, 3e9).unwrap();
        assert_eq!(l.n_elements(), 256);
        assert_eq!(l.spacing_wavelengths(), 0.5);
    }
}
