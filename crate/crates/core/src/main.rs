use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tilebeam::runner::{self, ModeSpec, Profile, RunConfig};
use tilebeam::scene::{scenario_library, LIBRARY_SCENARIOS};
use tilebeam::{Error, Mode, Result};

#[derive(Parser)]
#[command(name = "tilebeam", version, about = "Tiled windowed-beamspace MVDR radar simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write reports plus manifest.
    Run {
        #[command(flatten)]
        source: ConfigArgs,
        /// Output directory (default: config `output_dir`, else ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Beam pattern grid of one target's centre-subband correlator as CSV.
    EmitPattern {
        #[command(flatten)]
        source: ConfigArgs,
        #[arg(long)]
        target: usize,
        #[arg(long)]
        mode: String,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in scenarios.
    ScenarioList,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in profile, used when no config is given or to fill layout defaults.
    #[arg(long)]
    profile: Option<String>,
    /// Library scenario when running from a profile alone.
    #[arg(long, default_value = "E2-like")]
    scenario: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated modes: oracle-full, single-beamspace, tiled-beamspace.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<String>>,
    /// Window `ZxX` for all beamspace modes, or `mode=ZxX`; repeatable.
    #[arg(long)]
    window: Vec<String>,
    /// Training snapshots per subband.
    #[arg(long)]
    snapshots: Option<usize>,
    /// Relative diagonal loading factor.
    #[arg(long)]
    loading: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_window(s: &str) -> Result<(Option<Mode>, [usize; 2])> {
    let (mode, dims) = match s.split_once('=') {
        Some((m, d)) => (Some(m.parse::<Mode>()?), d),
        None => (None, s),
    };
    let bad = || Error::config("--window", format!("expected ZxX or mode=ZxX, got `{s}`"));
    let (z, x) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        mode,
        [z.trim().parse().map_err(|_| bad())?, x.trim().parse().map_err(|_| bad())?],
    ))
}

impl ConfigArgs {
    fn load(&self) -> Result<(RunConfig, PathBuf)> {
        let profile = self.profile.as_deref().map(str::parse::<Profile>).transpose()?;
        let (mut cfg, base) = match &self.config {
            Some(path) => {
                let mut cfg = RunConfig::load(path)?;
                if profile.is_some() {
                    cfg.profile = profile;
                }
                (cfg, path.parent().unwrap_or(Path::new(".")).to_path_buf())
            }
            None => (
                RunConfig::for_library(profile.unwrap_or(Profile::Desk), &self.scenario),
                PathBuf::from("."),
            ),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(modes) = &self.modes {
            let previous = cfg.modes.clone().unwrap_or_default();
            cfg.modes = Some(
                modes
                    .iter()
                    .map(|m| {
                        let mode = m.parse::<Mode>()?;
                        let window = previous.iter().find(|s| s.mode == mode).and_then(|s| s.window);
                        Ok(ModeSpec { mode, window })
                    })
                    .collect::<Result<_>>()?,
            );
        }
        for w in &self.window {
            let (only, dims) = parse_window(w)?;
            let specs = cfg.modes.get_or_insert_with(|| {
                vec![
                    ModeSpec { mode: Mode::Single, window: None },
                    ModeSpec { mode: Mode::Tiled, window: None },
                ]
            });
            for spec in specs.iter_mut().filter(|s| s.mode.is_beamspace()) {
                if only.is_none_or(|m| m == spec.mode) {
                    spec.window = Some(dims);
                }
            }
        }
        if self.snapshots.is_some() {
            cfg.snapshots = self.snapshots;
        }
        if self.loading.is_some() {
            cfg.loading_factor = self.loading;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        Ok((cfg, base))
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { source, out } => {
            let (cfg, base) = source.load()?;
            let resolved = cfg.resolve(&base)?;
            let out = out
                .or(cfg.output_dir.as_ref().map(|d| base.join(d)))
                .unwrap_or_else(|| PathBuf::from("out"));
            let (manifest, result) = runner::run(&resolved, &out, cfg.threads)?;
            for m in &result.modes {
                println!(
                    "{:<18} detected {}/{}  max |c^H a - 1| = {:.2e}",
                    m.mode,
                    m.report.n_detected(),
                    result.truth.targets.len(),
                    m.max_distortionless_error
                );
            }
            if let Some(d) = &manifest.dimensionality {
                println!(
                    "solve d={} vs d={}: {:.1}x faster",
                    d.reduced_dim, d.full_dim, d.solve_speedup
                );
            }
            println!("wrote {} files to {}", manifest.outputs.len() + 1, out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let diags = runner::validate(&config)?;
            if diags.is_empty() {
                println!("{}: OK", config.display());
                Ok(ExitCode::SUCCESS)
            } else {
                for d in &diags {
                    eprintln!("{d}");
                }
                Ok(ExitCode::from(2))
            }
        }
        Command::EmitPattern { source, target, mode, out } => {
            let mode: Mode = mode.parse()?;
            let (cfg, base) = source.load()?;
            let mut cfg = cfg;
            if let Some(specs) = cfg.modes.as_mut() {
                if !specs.iter().any(|m| m.mode == mode) {
                    specs.push(ModeSpec { mode, window: None });
                }
            } else if mode == Mode::Oracle {
                cfg.modes = Some(vec![ModeSpec { mode, window: None }]);
            }
            let resolved = cfg.resolve(&base)?;
            let csv = runner::emit_pattern(&resolved, target, mode, cfg.threads)?;
            match out {
                Some(path) => std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?,
                None => {
                    use std::io::Write;
                    let mut out = std::io::stdout().lock();
                    if let Err(e) = out.write_all(csv.as_bytes()).and_then(|_| out.flush()) {
                        if e.kind() != std::io::ErrorKind::BrokenPipe {
                            return Err(Error::io("<stdout>", e));
                        }
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ScenarioList => {
            for name in LIBRARY_SCENARIOS {
                let s = scenario_library(name, 1)?;
                println!(
                    "{name:<10} {} targets, {} interferers, {} subbands x {} pulses",
                    s.targets.len(),
                    s.interferers.len(),
                    s.waveform.n_subbands,
                    s.waveform.pulses_per_cpi
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
