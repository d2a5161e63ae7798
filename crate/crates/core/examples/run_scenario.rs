//! Runs a scenario end to end with the oracle on and writes the trace,
//! timings, map snapshot and summary to a directory.
//!
//! `cargo run --release --example run_scenario -- scenarios/desk.toml out/`

use certvo::pipeline::{run_scenario, RunConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/zero-noise.toml").into());
    let mut cfg = RunConfig::load(&path).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2);
    });
    cfg.oracle = true;
    cfg.out_dir = args.next().map(Into::into);
    let s = run_scenario(&cfg).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2);
    });
    println!("{}: {} frames in {:.1} s", s.scenario, s.frames, s.wall_s);
    println!("rms rotation error {:.2e}, rms bound {:.2e}", s.rms_rre, s.rms_epsilon_r);
    println!("rms translation error {:.2e} m, rms bound {:.2e} m", s.rms_rte, s.rms_epsilon_t);
    println!(
        "bound failures: rotation {}, translation {}",
        s.rotation_bound_failures, s.translation_bound_failures
    );
    println!(
        "violations: certified {}, undeflated {}",
        s.total_violations, s.baseline_violations
    );
    if let Some(dir) = &cfg.out_dir {
        println!("outputs in {}", dir.display());
    }
}
