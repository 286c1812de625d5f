//! The heart-failure walkthrough: generate admissions, discover the model,
//! attach the lab and imaging aggregations and print the DOT graph.

use std::time::Instant;

use depm::discovery::discover_model;
use depm::enhancement::{enhance, AggregationRequest};
use depm::export::{to_dot, RenderOptions};
use depm::synthlog::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let started = Instant::now();
    let (log, manifest) = generate(&GeneratorConfig::default())?;
    let model = discover_model(&log, 0.0, 0.0)?;
    let requests: Vec<AggregationRequest> = [
        "Analyse Troponin T Value:flag:percentage:abnormal_high",
        "Perform General X-Ray:flag:percentage:normal",
        "Perform General X-Ray:pleural_effusion:percentage:true",
        "Perform General X-Ray:cardiomegaly:percentage:true",
        "Perform General X-Ray:atelectasis:percentage:true",
    ]
    .iter()
    .map(|s| s.parse())
    .collect::<Result<_, _>>()?;
    let dep = enhance(&model, &log, &requests).dep;
    let dot = to_dot(&dep, &RenderOptions::default());
    eprintln!("{} traces, {} events in {:?}", manifest.trace_count, manifest.event_count, started.elapsed());
    for a in dep.aggregations() {
        eprintln!("{:<26} {:<17} {:<26} {}", a.activity, a.attribute, a.function.to_string(), a.result.display());
    }
    println!("{dot}");
    Ok(())
}
