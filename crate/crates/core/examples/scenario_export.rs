//! Loads a run configuration from JSON, runs it into a directory, then reads
//! the exported snapshot cube and range-Doppler maps back.
//!
//! cargo run --release --example scenario_export -- configs/tiny_oracle.json /tmp/tiny

use std::path::PathBuf;

use tilebeam::flatbin;
use tilebeam::runner::{run, RunConfig};

fn main() -> tilebeam::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "configs/tiny_oracle.json".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/tiny".into()));

    let rc = RunConfig::load(&config)?;
    let mut cfg = rc.resolve(config.parent().unwrap())?;
    cfg.export_maps = true;
    cfg.export_snapshots = true;
    let (manifest, _) = run(&cfg, &out, None)?;
    println!("config hash {}", manifest.config_hash);
    for o in &manifest.outputs {
        println!("{:>10} B  {}  {}", o.bytes, &o.sha256[..12], o.path);
    }

    let (magic, dims, _) = flatbin::read(&out.join("snapshots.bin"))?;
    println!("snapshots.bin: {} dims {:?}", String::from_utf8_lossy(&magic), dims);
    for o in manifest.outputs.iter().filter(|o| o.path.starts_with("maps/") && o.path.ends_with(".bin")) {
        let (_, dims, payload) = flatbin::read(&out.join(&o.path))?;
        if let flatbin::Payload::Real(p) = payload {
            let peak = p.iter().cloned().fold(0.0, f64::max);
            println!("{}: {:?}, peak power {peak:.3e}", o.path, dims);
        }
    }
    Ok(())
}
