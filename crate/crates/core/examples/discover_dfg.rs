//! Discovers directly-follows models at several filter settings and shows
//! how the edge set shrinks (and gets repaired) as thresholds rise.

use depm::discovery::{discover_model, Node};
use depm::synthlog::{generate, GeneratorConfig};

fn label(node: &Node) -> &str {
    match node {
        Node::Start => "(start)",
        Node::End => "(end)",
        Node::Activity(name) => name,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (log, _) = generate(&GeneratorConfig { trace_count: 300, ..Default::default() })?;
    for (activity_threshold, edge_threshold) in [(0.0, 0.0), (0.7, 0.0), (0.7, 0.3)] {
        let model = discover_model(&log, activity_threshold, edge_threshold)?;
        println!(
            "thresholds {activity_threshold}/{edge_threshold}: {} activities, {} edges",
            model.activities.len(),
            model.edges.len()
        );
        for node in model.activities.values() {
            println!("  {:<28} freq {:>4}  cases {:>4}", node.name, node.absolute_frequency, node.case_coverage);
        }
        for edge in &model.edges {
            let mark = if edge.repaired { " (repaired)" } else { "" };
            println!("  {} -> {}: {}{mark}", label(&edge.source), label(&edge.target), edge.count);
        }
    }
    Ok(())
}
