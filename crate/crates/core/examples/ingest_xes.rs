//! Reads an XES file (or a generated one when no path is given) and prints
//! what was found: traces, events, activities and the inferred schema.
//!
//!     cargo run -p depm --example ingest_xes -- path/to/log.xes

use std::fs::File;
use std::io::BufReader;

use depm::eventlog::{infer_schema, parse_xes, serialize_xes};
use depm::synthlog::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ingested = match std::env::args().nth(1) {
        Some(path) => parse_xes(BufReader::new(File::open(path)?))?,
        None => {
            let (log, _) = generate(&GeneratorConfig { trace_count: 50, ..Default::default() })?;
            parse_xes(&serialize_xes(&log)[..])?
        }
    };
    for warning in &ingested.warnings {
        eprintln!("warning: {warning}");
    }
    let log = &ingested.log;
    println!("{}: {} traces, {} events", log.source_name, log.len(), log.event_count());
    for activity in log.activities() {
        println!("  activity {activity}");
    }
    println!("attribute                 type   kind         distinct nulls scope");
    for (name, info) in &infer_schema(log).attributes {
        println!(
            "{name:<25} {:<6} {:<12} {:>8} {:>5} {:?}",
            info.declared_type.name(),
            format!("{:?}", info.variable_kind),
            info.distinct_value_count,
            info.null_count,
            info.scope
        );
    }
    Ok(())
}
