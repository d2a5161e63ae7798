use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use certvo::cesdf::{read_snapshot, write_slice_csv};
use certvo::pipeline::{export_fig3_data, export_fig5_data, run_scenario, FigureConfig, PipelineError, RunConfig};
use certvo::simworld::Scenario;
use clap::{Parser, Subcommand};

const EXIT_USAGE: u8 = 1;
const EXIT_SCENARIO: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

/// Certified visual odometry and mapping on simulated scenes.
#[derive(Parser)]
#[command(name = "certvo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario frame by frame.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Check the map against the analytic scene every frame.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Graph fraction f in (0, 1].
        #[arg(long)]
        fraction: Option<f64>,
        /// Rotation-bound sampling iterations.
        #[arg(long)]
        iterations: Option<usize>,
        /// Read correspondences from files; `{k}` becomes the frame index.
        #[arg(long)]
        correspondence_file: Option<String>,
        #[arg(long)]
        max_frames: Option<usize>,
    },
    /// Bound tightness against sampling iterations, as CSV.
    Fig3 {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Registration time and error against graph fraction, as CSV.
    Fig5 {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        frames: usize,
    },
    /// Export one z-layer of a grid snapshot as CSV.
    Slice {
        snapshot: PathBuf,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn failure(e: &dyn std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_SCENARIO)
}

fn figure_config(path: &PathBuf) -> Result<FigureConfig, PipelineError> {
    Ok(FigureConfig::new(Scenario::load(path)?))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run {
            scenario,
            seed,
            oracle,
            out,
            fraction,
            iterations,
            correspondence_file,
            max_frames,
        } => {
            let mut cfg = match RunConfig::load(&scenario) {
                Ok(c) => c,
                Err(e) => return failure(&e),
            };
            cfg.oracle = oracle;
            cfg.out_dir = out;
            cfg.correspondence_file = correspondence_file;
            cfg.max_frames = max_frames;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(f) = fraction {
                cfg.fraction = f;
            }
            if let Some(k) = iterations {
                cfg.iterations = k;
            }
            let s = match run_scenario(&cfg) {
                Ok(s) => s,
                Err(e @ PipelineError::Config(_)) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_USAGE);
                }
                Err(e) => return failure(&e),
            };
            match serde_json::to_string_pretty(&s) {
                Ok(j) => println!("{j}"),
                Err(e) => return failure(&e),
            }
            if oracle && s.total_violations > 0 {
                eprintln!("certification violated at {} voxel-frames", s.total_violations);
                return ExitCode::from(EXIT_VIOLATION);
            }
            ExitCode::SUCCESS
        }
        Command::Fig3 { scenario, out, trials } => {
            let res = figure_config(&scenario).and_then(|mut cfg| {
                cfg.trials = trials;
                let mut w = sink(&out)?;
                export_fig3_data(&cfg, Some(&mut *w))?;
                Ok(())
            });
            res.map_or_else(|e| failure(&e), |_| ExitCode::SUCCESS)
        }
        Command::Fig5 { scenario, out, frames } => {
            let res = figure_config(&scenario).and_then(|mut cfg| {
                cfg.frames = frames;
                let mut w = sink(&out)?;
                export_fig5_data(&cfg, Some(&mut *w))?;
                Ok(())
            });
            res.map_or_else(|e| failure(&e), |_| ExitCode::SUCCESS)
        }
        Command::Slice { snapshot, z, out } => {
            let res = read_snapshot(&snapshot).and_then(|g| {
                let w = sink(&out)?;
                write_slice_csv(&g, z, w)
            });
            res.map_or_else(|e| failure(&e), |_| ExitCode::SUCCESS)
        }
    }
}
