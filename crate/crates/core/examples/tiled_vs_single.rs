//! Tiled 2x2-per-tile beamspace against a single 4x4-window subarray on a
//! library scenario, at desk scale.
//!
//! cargo run --release --example tiled_vs_single -- E2-like 3 1e-9
//!
//! Arguments: scenario name, number of seeds, relative diagonal loading.

use std::path::Path;

use tilebeam::beamformer::mainlobe_width_deg;
use tilebeam::runner::{execute, Mode, Profile, RunConfig};

fn main() -> tilebeam::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenario = args.next().unwrap_or_else(|| "E2-like".into());
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let loading: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1e-9);

    for seed in 0..seeds {
        let mut rc = RunConfig::for_library(Profile::Desk, &scenario)
            .with_modes(&[(Mode::Single, Some([4, 4])), (Mode::Tiled, Some([2, 2]))]);
        rc.seed = seed;
        rc.loading_factor = Some(loading);
        rc.dimensionality_benchmark = false;
        let cfg = rc.resolve(Path::new("."))?;
        let res = execute(&cfg, None)?;
        let f = cfg.scenario.waveform.subband_center_hz(cfg.scenario.waveform.center_subband());

        println!("seed {seed}");
        println!("{:>3} {:>14} {:>14} {:>10} {:>10}", "id", "single SINR", "tiled SINR", "single bw", "tiled bw");
        let single = res.mode(Mode::Single).unwrap();
        let tiled = res.mode(Mode::Tiled).unwrap();
        for (k, t) in cfg.scenario.targets.iter().enumerate() {
            let bw = |m: &tilebeam::runner::ModeResult| {
                mainlobe_width_deg(&m.center_correlators[k], &m.pattern_layout, t.angle, f, 0.02)
            };
            println!(
                "{:>3} {:>14.2} {:>14.2} {:>10.3} {:>10.3}",
                k + 1,
                single.report.targets[k].sinr_db,
                tiled.report.targets[k].sinr_db,
                bw(single)?,
                bw(tiled)?,
            );
        }
        println!(
            "detected: single {}/{}, tiled {}/{}",
            single.report.n_detected(),
            cfg.scenario.targets.len(),
            tiled.report.n_detected(),
            cfg.scenario.targets.len()
        );
    }
    Ok(())
}
