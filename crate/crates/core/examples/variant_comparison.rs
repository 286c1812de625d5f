//! Splits a two-cohort log into variants, recomputes the same aggregations
//! for each and prints the differences.

use std::collections::BTreeMap;

use depm::discovery::discover_model;
use depm::enhancement::{enhance, recompute_for_variant, AggregationRequest};
use depm::synthlog::{generate, Cohort, FlagDistribution, GeneratorConfig, TROPONIN_ACTIVITY};
use depm::variants::{compare_variants, partition, partition_binned, Bins, Level};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = GeneratorConfig {
        cohorts: vec![
            Cohort { name: "acute".into(), weight: 0.5, flag_overrides: BTreeMap::new() },
            Cohort {
                name: "chronic".into(),
                weight: 0.5,
                flag_overrides: [(TROPONIN_ACTIVITY.to_owned(), FlagDistribution::new(0.7, 0.3, 0.0))].into(),
            },
        ],
        ..Default::default()
    };
    let (log, _) = generate(&config)?;
    let model = discover_model(&log, 0.0, 0.0)?;
    let requests: Vec<AggregationRequest> = [
        "Analyse Troponin T Value:flag:percentage:abnormal_high",
        "Analyse Troponin T Value:value:mean",
        "Perform ECG:heart_rate:median",
    ]
    .iter()
    .map(|s| s.parse())
    .collect::<Result<_, _>>()?;
    let dep = enhance(&model, &log, &requests).dep;

    let cohorts = partition(&log, "cohort", Level::Trace)?;
    let sides: Vec<_> = cohorts
        .keys
        .iter()
        .zip(&cohorts.sublogs)
        .map(|(key, sublog)| recompute_for_variant(&dep, sublog, Some(key.clone())))
        .collect();
    let report = compare_variants(&sides[0], &sides[1]);
    println!("{}  vs  {}", report.a, report.b);
    for row in &report.rows {
        println!(
            "  {} {} {}: {} -> {} (delta {})",
            row.activity,
            row.attribute,
            row.function,
            row.a.as_ref().map_or("-", |o| o.display()),
            row.b.as_ref().map_or("-", |o| o.display()),
            row.absolute_delta.map_or("n/a".into(), |d| format!("{d:+.2}"))
        );
    }

    let ages = partition_binned(&log, "age", Level::Trace, &Bins::new(vec![65.0, 80.0])?)?;
    for (key, size) in ages.sizes() {
        println!("{key}: {size} traces");
    }
    Ok(())
}
