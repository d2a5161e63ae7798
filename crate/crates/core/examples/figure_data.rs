//! CSV data for the bound-tightness and graph-fraction studies, with a
//! reduced number of trials.

use certvo::pipeline::{export_fig3_data, export_fig5_data, FigureConfig};
use certvo::simworld::Scenario;

fn main() {
    let sc = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/desk.toml")).unwrap();
    let mut cfg = FigureConfig::new(sc);
    cfg.trials = 20;
    cfg.frames = 3;
    let mut out = std::io::stdout().lock();
    println!("# rotation bound against sampling iterations, {} trials", cfg.trials);
    export_fig3_data(&cfg, Some(&mut out)).unwrap();
    println!("# registration time and error against graph fraction");
    export_fig5_data(&cfg, Some(&mut out)).unwrap();
}
