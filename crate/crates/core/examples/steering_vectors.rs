//! Steering vectors of a tiled planar array and how they change across a
//! wideband channel.
//!
//! cargo run --example steering_vectors

use tilebeam::array_model::{per_tile_steering, reference_spatial_freq, spatial_freq_at, steering_at};
use tilebeam::{ArrayLayout, SourceAngle};

fn main() -> tilebeam::Result<()> {
    // 2x2 tiles of 2x4 elements, half-wavelength spacing at 3 GHz.
    let layout = ArrayLayout::new(2, 2, 2, 4, 3e9)?;
    let angle = SourceAngle::from_degrees(20.0, 5.0)?;
    let omega = reference_spatial_freq(angle)?;
    println!(
        "{} elements in {} tiles; Omega = ({:.4}, {:.4}) rad at the design frequency",
        layout.n_elements(),
        layout.n_tiles(),
        omega.omega_x,
        omega.omega_z
    );

    // Tile t's steering vector is the element response times a tile phase;
    // the global vector stacks them in tile order.
    let a = steering_at(&layout, angle, 3e9)?;
    for t in 1..=layout.n_tiles() {
        let tile = per_tile_steering(&layout, omega, t)?;
        let first = &a[(t - 1) * layout.elems_per_tile()];
        println!("tile {t}: first element phase {:+.4} rad (global {:+.4})", tile[0].arg(), first.arg());
    }

    // The same direction looks like a different spatial frequency off-centre.
    for f in [2.85e9, 3.0e9, 3.15e9] {
        let w = spatial_freq_at(omega, f, layout.design_freq_hz)?;
        println!("{:.2} GHz: Omega_x = {:.4}", f / 1e9, w.omega_x);
    }
    Ok(())
}
