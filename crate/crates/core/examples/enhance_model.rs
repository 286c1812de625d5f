//! Attaches aggregations to a discovered model, then adds and removes one
//! interactively. Invalid requests are reported without blocking the rest.

use depm::discovery::discover_model;
use depm::enhancement::{add_aggregation, enhance, remove_aggregation, AggregationRequest};
use depm::synthlog::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (log, _) = generate(&GeneratorConfig::default())?;
    let model = discover_model(&log, 0.0, 0.0)?;
    let requests: Vec<AggregationRequest> = [
        "Analyse Troponin T Value:flag:percentage:abnormal_high",
        "Analyse Troponin T Value:value:median",
        "Perform General X-Ray:flag:percentage:normal",
        "Perform General X-Ray:flag:mean",
        "Perform Biopsy:flag:frequency:normal",
    ]
    .iter()
    .map(|s| s.parse())
    .collect::<Result<_, _>>()?;
    let enhanced = enhance(&model, &log, &requests);
    for rejection in &enhanced.rejected {
        println!("rejected {}: {}", rejection.request, rejection.error);
    }
    let mut dep = enhanced.dep;
    let extra: AggregationRequest = "Perform ECG:heart_rate:max".parse()?;
    dep = add_aggregation(&dep, &log, &extra)?;
    for a in dep.aggregations() {
        println!("{:<28} {:<14} {:<28} {}", a.activity, a.attribute, a.function.to_string(), a.result.display());
    }
    let (dep, removed) = remove_aggregation(&dep, &extra);
    println!("removed {extra}: {removed}; {} aggregations left", dep.aggregations().count());
    Ok(())
}
