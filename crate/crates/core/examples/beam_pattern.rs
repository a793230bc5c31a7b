//! Writes the centre-subband beam patterns of the single and tiled
//! correlators for one target as CSV grids, and prints their -3 dB widths.
//!
//! cargo run --release --example beam_pattern -- 9 /tmp/patterns

use std::path::{Path, PathBuf};

use tilebeam::beamformer::mainlobe_width_deg;
use tilebeam::runner::{execute, pattern_csv, pattern_for, Mode, Profile, RunConfig};

fn main() -> tilebeam::Result<()> {
    let mut args = std::env::args().skip(1);
    let target: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(9);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "patterns".into()));
    std::fs::create_dir_all(&out).map_err(|e| tilebeam::Error::io(&out, e))?;

    let mut rc = RunConfig::for_library(Profile::Desk, "E2-like");
    rc.loading_factor = Some(1e-9);
    rc.dimensionality_benchmark = false;
    let cfg = rc.resolve(Path::new("."))?;
    let res = execute(&cfg, None)?;
    let wf = &cfg.scenario.waveform;
    let angle = cfg.scenario.targets[target - 1].angle;

    for mode in [Mode::Single, Mode::Tiled] {
        let path = out.join(format!("{mode}_target{target}.csv"));
        let csv = pattern_csv(&pattern_for(&res, target, mode)?);
        std::fs::write(&path, csv).map_err(|e| tilebeam::Error::io(&path, e))?;
        let m = res.mode(mode).unwrap();
        let bw = mainlobe_width_deg(
            &m.center_correlators[target - 1],
            &m.pattern_layout,
            angle,
            wf.subband_center_hz(wf.center_subband()),
            0.02,
        )?;
        println!("{mode}: -3 dB width {bw:.2} deg, grid in {}", path.display());
    }
    Ok(())
}
