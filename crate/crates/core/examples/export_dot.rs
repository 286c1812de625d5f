//! Renders an enhanced model to DOT and versioned JSON. Writes the files
//! into the directory given as first argument (default: current directory).
//!
//!     cargo run -p depm --example export_dot -- out/
//!     dot -Tsvg out/model.dot > model.svg

use std::path::PathBuf;

use depm::discovery::discover_model;
use depm::enhancement::{enhance, AggregationRequest};
use depm::export::{from_json, to_dot, to_json, RankDirection, RenderOptions};
use depm::synthlog::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&out)?;
    let (log, _) = generate(&GeneratorConfig::default())?;
    let model = discover_model(&log, 0.0, 0.05)?;
    let request: AggregationRequest = "Perform ECG:rhythm:percentage:atrial_fibrillation".parse()?;
    let dep = enhance(&model, &log, &[request]).dep;

    let options = RenderOptions { rank_direction: RankDirection::LeftRight, show_support: true };
    std::fs::write(out.join("model.dot"), to_dot(&dep, &options))?;
    let json = to_json(&dep);
    assert_eq!(from_json(&json)?, dep);
    std::fs::write(out.join("model.json"), json)?;
    println!("wrote {} and {}", out.join("model.dot").display(), out.join("model.json").display());
    Ok(())
}
