//! Extracts the values of one attribute for one activity and applies every
//! applicable aggregation function to them.

use depm::aggregation::{aggregate, applicable_functions, extract_values, AggregationFunction, FunctionKind};
use depm::eventlog::infer_schema;
use depm::synthlog::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (log, _) = generate(&GeneratorConfig::default())?;
    let schema = infer_schema(&log);
    for (activity, attribute, target) in [
        ("Analyse Troponin T Value", "value", None),
        ("Analyse Troponin T Value", "flag", Some("abnormal_high")),
        ("Perform ECG", "heart_rate", Some("72")),
        ("Perform General X-Ray", "cardiomegaly", Some("true")),
    ] {
        let values = extract_values(&log, activity, attribute);
        let declared = schema.get(attribute).unwrap().declared_type;
        println!(
            "{activity} / {attribute}: {} values from {} events, {} null",
            values.len(),
            values.source_event_count,
            values.null_count
        );
        for kind in applicable_functions(&schema, attribute)? {
            let target = match (kind, target) {
                (FunctionKind::Frequency | FunctionKind::Percentage, Some(t)) => declared.parse_value(t),
                (FunctionKind::Frequency | FunctionKind::Percentage, None) => values.values.keys().next().cloned(),
                _ => None,
            };
            let function = AggregationFunction::new(kind, target)?;
            match aggregate(&values, &function) {
                Ok(result) => println!("  {function:<28} {}", result.display),
                Err(e) => println!("  {function:<28} error: {e}"),
            }
        }
    }
    Ok(())
}
