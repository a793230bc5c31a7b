//! Per-tile 2D DFT and AoA-centred windowing: how much of a source's energy
//! a W_z x W_x window keeps, and what the reduced dimension costs.
//!
//! cargo run --example beamspace_window

use tilebeam::array_model::{global_steering, reference_spatial_freq};
use tilebeam::beamspace::{plan_window, reduce_global, BeamspaceTransform};
use tilebeam::{ArrayLayout, SourceAngle};

fn main() -> tilebeam::Result<()> {
    let layout = ArrayLayout::new(4, 2, 2, 16, 3e9)?;
    let transform = BeamspaceTransform::for_layout(&layout);
    let angle = SourceAngle::from_degrees(17.3, 2.0)?;
    let omega = reference_spatial_freq(angle)?;
    let a = global_steering(&layout, omega);
    let total: f64 = a.iter().map(|v| v.norm_sqr()).sum();

    println!("source at 17.3 deg az, 2 deg el on 4x2 tiles of 2x16");
    println!("{:>6} {:>5} {:>12}  bins x", "window", "dim", "energy kept");
    for (wz, wx) in [(1, 1), (1, 2), (2, 2), (2, 4), (2, 8), (2, 16)] {
        let w = plan_window(&layout, omega, wz, wx)?;
        let kept: f64 = reduce_global(&transform, &w, &a)?.iter().map(|v| v.norm_sqr()).sum();
        println!(
            "{:>3}x{:<2} {:>5} {:>11.2}%  {:?}",
            wz,
            wx,
            layout.n_tiles() * w.len(),
            100.0 * kept / total,
            w.x_bins
        );
    }
    Ok(())
}
