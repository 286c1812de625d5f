//! Builds an event log from a CSV table with a custom column mapping.
//! Column types are inferred unless declared.

use depm::eventlog::{infer_schema, parse_csv, ColumnMapping, ValueType};

const TABLE: &str = "\
admission;step;at;flag;value;ward
p1;Triage;2024-03-01 08:00:00;;;A
p1;Analyse Troponin T Value;2024-03-01 08:40:00;abnormal_high;0.052;A
p1;Analyse Troponin T Value;2024-03-01 11:40:00;abnormal_high;0.071;A
p2;Triage;2024-03-01 09:10:00;;;B
p2;Analyse Troponin T Value;2024-03-01 09:55:00;normal;0.004;B
p3;Analyse Troponin T Value;2024-03-02T10:00:00Z;normal;n/a;B
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mapping = ColumnMapping {
        case_column: "admission".into(),
        activity_column: "step".into(),
        timestamp_column: "at".into(),
        delimiter: b';',
        column_types: [("ward".to_owned(), ValueType::Text), ("value".to_owned(), ValueType::Real)].into(),
        source_name: "ward-sample".into(),
    };
    let ingested = parse_csv(TABLE.as_bytes(), &mapping)?;
    for warning in &ingested.warnings {
        println!("warning: {warning}");
    }
    for trace in &ingested.log.traces {
        let steps: Vec<&str> = trace.activities().collect();
        println!("{}: {}", trace.case_id, steps.join(" -> "));
    }
    let schema = infer_schema(&ingested.log);
    for attribute in ["flag", "value", "ward"] {
        let info = schema.get(attribute).unwrap();
        println!("{attribute}: {} ({:?}), {} nulls", info.declared_type.name(), info.variable_kind, info.null_count);
    }
    Ok(())
}
