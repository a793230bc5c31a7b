//! MVDR against a strong jammer, in element space and in the tiled
//! beamspace, using the theoretical covariance of the scene.
//!
//! cargo run --example mvdr_nulling

use tilebeam::array_model::{global_steering, reference_spatial_freq};
use tilebeam::beamformer::{beamspace_weights, lift, mvdr_weights, pattern_value, reduce_covariance};
use tilebeam::beamspace::windowed_steering;
use tilebeam::{plan_window, ArrayLayout, BeamspaceTransform, CovarianceEstimate, SourceAngle};

fn main() -> tilebeam::Result<()> {
    let layout = ArrayLayout::new(4, 2, 2, 16, 3e9)?;
    let target = SourceAngle::from_degrees(14.5, 0.0)?;
    let jammer = SourceAngle::from_degrees(-20.0, 1.0)?;
    let jnr = 1e6;

    let aj = global_steering(&layout, reference_spatial_freq(jammer)?);
    let d = layout.n_elements();
    let r = nalgebra::DMatrix::from_fn(d, d, |i, k| aj[i] * aj[k].conj() * jnr + if i == k { 1.0 } else { 0.0 });
    let omega = reference_spatial_freq(target)?;

    let full = mvdr_weights(&CovarianceEstimate::from_matrix(r.clone(), 0.0)?, &global_steering(&layout, omega))?;
    report("element space, d = 256", &full.weights, &layout, target, jammer)?;

    let transform = BeamspaceTransform::for_layout(&layout);
    let window = plan_window(&layout, omega, 2, 2)?;
    let reduced = CovarianceEstimate::from_matrix(reduce_covariance(&transform, &window, &r)?, 0.0)?;
    let c = beamspace_weights(&reduced, &windowed_steering(&layout, &transform, &window, omega)?)?;
    println!("beamspace |c^H a - 1| = {:.1e}", c.distortionless_error());
    let lifted = lift(&c.weights, &window, &transform)?;
    report("tiled 2x2 beamspace, d = 32", &lifted.weights, &layout, target, jammer)
}

fn report(name: &str, w: &[num_complex::Complex64], layout: &ArrayLayout, t: SourceAngle, j: SourceAngle) -> tilebeam::Result<()> {
    let main = pattern_value(w, layout, t, 3e9)?;
    let null = pattern_value(w, layout, j, 3e9)?;
    println!("{name}: null {:.1} dB below the mainlobe", 20.0 * (main / null).log10());
    Ok(())
}
