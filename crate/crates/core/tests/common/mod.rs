//! Shared fixtures for the integration tests: random logs, brute-force
//! oracles and a DOT grammar checker.
#![allow(dead_code)]

pub mod dot_grammar;

use std::collections::BTreeMap;

use depm::aggregation::{AggregationFunction, FunctionKind};
use depm::discovery::Node;
use depm::{AttributeValue, Event, EventLog, Timestamp, Trace};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ACTIVITIES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
pub const EVENT_ATTRIBUTES: [&str; 7] = ["n", "x", "m", "c", "b", "t", "sparse"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_traces: usize,
    pub max_events: usize,
    /// Allow `Null` values (XES cannot carry them).
    pub nulls: bool,
    /// Use awkward text (markup characters, newlines, unicode).
    pub nasty_text: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_traces: 50,
            max_events: 20,
            nulls: true,
            nasty_text: false,
        }
    }
}

const NASTY: [&str; 8] = [
    "plain",
    "a<b>&c",
    "quote\"s 'single'",
    "line\nbreak\ttab",
    "ünïcødé ✓",
    "  padded  ",
    "",
    "colon:and\\slash",
];

fn text(rng: &mut impl Rng, shape: &Shape, pool: &[&str]) -> String {
    if shape.nasty_text && rng.random_bool(0.3) {
        NASTY.choose(rng).unwrap().to_string()
    } else {
        pool.choose(rng).unwrap().to_string()
    }
}

fn maybe(rng: &mut impl Rng, shape: &Shape, value: AttributeValue) -> Option<AttributeValue> {
    match rng.random_range(0..10) {
        0 => None,
        1 if shape.nulls => Some(AttributeValue::Null),
        _ => Some(value),
    }
}

/// A random log over [`ACTIVITIES`] with event attributes of every type:
/// `n` whole, `x` real, `m` mixed whole/real, `c` text, `b` flag,
/// `t` timestamp and `sparse` (rare). Traces carry `group` and `k`.
/// Activities repeat, traces may be empty, and values may be missing.
pub fn random_log(rng: &mut impl Rng, shape: Shape) -> EventLog {
    let traces = (0..rng.random_range(1..=shape.max_traces))
        .map(|i| {
            let base = rng.random_range(0..4_000_000_000_000i64);
            let mut events = Vec::new();
            for _ in 0..rng.random_range(0..=shape.max_events) {
                let activity = if rng.random_bool(0.2) {
                    &ACTIVITIES[..2]
                } else {
                    &ACTIVITIES[..]
                }
                .choose(rng)
                .unwrap();
                let ts = Timestamp::from_millis(base + rng.random_range(0..86_400_000));
                let mut event = Event::new("", activity, ts);
                let real = (rng.random_range(-1e6..1e6f64) * 1000.0).round() / 1000.0;
                let candidates = [
                    ("n", AttributeValue::Whole(rng.random_range(-50..50))),
                    ("x", AttributeValue::Real(real)),
                    (
                        "m",
                        if rng.random_bool(0.5) {
                            AttributeValue::Whole(rng.random_range(0..20))
                        } else {
                            AttributeValue::Real(rng.random_range(0.0..20.0))
                        },
                    ),
                    ("c", AttributeValue::Text(text(rng, &shape, &["p", "q", "r"]))),
                    ("b", AttributeValue::Flag(rng.random_bool(0.4))),
                    (
                        "t",
                        AttributeValue::Stamp(Timestamp::from_millis(
                            rng.random_range(0..5_000_000_000_000),
                        )),
                    ),
                ];
                for (key, value) in candidates {
                    if let Some(v) = maybe(rng, &shape, value) {
                        event = event.with(key, v);
                    }
                }
                if rng.random_bool(0.05) {
                    event = event.with("sparse", rng.random_range(0..3i64));
                }
                events.push(event);
            }
            let mut trace = Trace::new(format!("case-{i}"), events)
                .with_attribute("group", text(rng, &shape, &["g1", "g2", "g3"]).as_str())
                .with_attribute("k", rng.random_range(0..100i64));
            if shape.nulls && rng.random_bool(0.1) {
                trace = trace.with_attribute("group", AttributeValue::Null);
            }
            trace
        })
        .collect();
    EventLog::new("random", traces)
}

/// Non-null values and null count of `attribute` on `activity` events,
/// by nested loops over traces and events.
pub fn brute_values(log: &EventLog, activity: &str, attribute: &str) -> (Vec<AttributeValue>, u64, u64) {
    let mut values = Vec::new();
    let mut nulls = 0;
    let mut events = 0;
    for trace in &log.traces {
        for event in &trace.events {
            if event.attributes.get("concept:name") != Some(&AttributeValue::Text(activity.into())) {
                continue;
            }
            events += 1;
            match event.attributes.get(attribute) {
                None | Some(AttributeValue::Null) => nulls += 1,
                Some(v) => values.push(v.clone()),
            }
        }
    }
    (values, nulls, events)
}

fn as_number(value: &AttributeValue) -> Option<f64> {
    match value {
        AttributeValue::Whole(v) => Some(*v as f64),
        AttributeValue::Real(v) => Some(*v),
        AttributeValue::Stamp(t) => Some(t.millis() as f64),
        _ => None,
    }
}

fn loosely_equal(a: &AttributeValue, b: &AttributeValue) -> bool {
    match (a, b) {
        (AttributeValue::Whole(x), AttributeValue::Real(y))
        | (AttributeValue::Real(y), AttributeValue::Whole(x)) => *x as f64 == *y,
        _ => a == b,
    }
}

/// Textbook aggregation over a plain vector. `None` where the function is
/// undefined (no values, non-numeric or mixed stamp/number data).
pub fn brute_aggregate(values: &[AttributeValue], function: &AggregationFunction) -> Option<f64> {
    match function {
        AggregationFunction::Frequency(target) => {
            Some(values.iter().filter(|v| loosely_equal(v, target)).count() as f64)
        }
        AggregationFunction::Percentage(target) => {
            if values.is_empty() {
                return None;
            }
            let hits = values.iter().filter(|v| loosely_equal(v, target)).count();
            Some(100.0 * hits as f64 / values.len() as f64)
        }
        _ => {
            if values.is_empty() {
                return None;
            }
            let stamps = values.iter().filter(|v| matches!(v, AttributeValue::Stamp(_))).count();
            if stamps != 0 && stamps != values.len() {
                return None;
            }
            let mut numbers = values.iter().map(as_number).collect::<Option<Vec<f64>>>()?;
            numbers.sort_by(f64::total_cmp);
            let n = numbers.len();
            Some(match function.kind() {
                FunctionKind::Min => numbers[0],
                FunctionKind::Max => numbers[n - 1],
                FunctionKind::Mean => numbers.iter().sum::<f64>() / n as f64,
                FunctionKind::Median if n % 2 == 1 => numbers[n / 2],
                FunctionKind::Median => (numbers[n / 2 - 1] + numbers[n / 2]) / 2.0,
                _ => unreachable!(),
            })
        }
    }
}

pub fn close(a: f64, b: f64, tolerance: f64) -> bool {
    (a - b).abs() <= tolerance * a.abs().max(b.abs()).max(1.0)
}

/// Every function, with targets drawn from the observed values plus one
/// value nobody has.
pub fn functions_for(values: &[AttributeValue]) -> Vec<AggregationFunction> {
    let mut out = vec![
        AggregationFunction::Min,
        AggregationFunction::Max,
        AggregationFunction::Mean,
        AggregationFunction::Median,
    ];
    let mut targets: Vec<AttributeValue> = values.to_vec();
    targets.sort();
    targets.dedup();
    targets.truncate(4);
    targets.push(AttributeValue::Text("never-seen".into()));
    for t in targets {
        out.push(AggregationFunction::Frequency(t.clone()));
        out.push(AggregationFunction::Percentage(t));
    }
    out
}

/// Adjacent pairs of `start · trace · end`, counted over all traces.
pub fn brute_dfg(log: &EventLog) -> BTreeMap<(Node, Node), u64> {
    let mut counts = BTreeMap::new();
    for trace in &log.traces {
        let mut sequence = vec![Node::Start];
        for event in &trace.events {
            sequence.push(Node::activity(event.activity().unwrap()));
        }
        sequence.push(Node::End);
        for i in 0..sequence.len() - 1 {
            *counts
                .entry((sequence[i].clone(), sequence[i + 1].clone()))
                .or_insert(0) += 1;
        }
    }
    counts
}
