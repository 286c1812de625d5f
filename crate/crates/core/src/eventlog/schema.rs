use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AttributeValue, EventLog, ValueType};

/// Distinct-value count up to which numeric and timestamp attributes are
/// treated as categorical.
pub const DEFAULT_CATEGORICAL_THRESHOLD: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Categorical,
    Discrete,
    Continuous,
}

/// Where an attribute occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Event,
    Trace,
    Both,
}

impl Scope {
    pub fn includes_event(self) -> bool {
        matches!(self, Scope::Event | Scope::Both)
    }

    pub fn includes_trace(self) -> bool {
        matches!(self, Scope::Trace | Scope::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeInfo {
    pub declared_type: ValueType,
    pub variable_kind: VariableKind,
    pub distinct_value_count: usize,
    pub null_count: usize,
    pub scope: Scope,
    /// Set when values of more than one type were seen and had to be widened.
    pub type_conflict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub categorical_threshold: usize,
    pub attributes: BTreeMap<String, AttributeInfo>,
}

impl AttributeSchema {
    pub fn get(&self, attribute: &str) -> Option<&AttributeInfo> {
        self.attributes.get(attribute)
    }
}

#[derive(Default)]
struct Tally<'a> {
    types: BTreeSet<ValueType>,
    values: Vec<&'a AttributeValue>,
    nulls: usize,
    in_events: bool,
    in_traces: bool,
}

pub fn infer_schema(log: &EventLog) -> AttributeSchema {
    infer_schema_with(log, DEFAULT_CATEGORICAL_THRESHOLD)
}

/// Classifies every attribute appearing on any event or trace.
///
/// Conflicting types widen: `Whole` and `Real` mix to `Real`, every other
/// mixture to `Text`. Text and flags are always categorical; numbers and
/// timestamps are categorical when they take at most `categorical_threshold`
/// distinct values.
pub fn infer_schema_with(log: &EventLog, categorical_threshold: usize) -> AttributeSchema {
    let mut tallies: BTreeMap<&str, Tally<'_>> = BTreeMap::new();
    for trace in &log.traces {
        for (name, value) in &trace.attributes {
            let tally = tallies.entry(name.as_str()).or_default();
            tally.in_traces = true;
            observe(tally, value);
        }
        for event in &trace.events {
            for (name, value) in &event.attributes {
                let tally = tallies.entry(name.as_str()).or_default();
                tally.in_events = true;
                observe(tally, value);
            }
        }
    }

    let attributes = tallies
        .into_iter()
        .map(|(name, tally)| (name.to_owned(), classify(tally, categorical_threshold)))
        .collect();
    AttributeSchema {
        categorical_threshold,
        attributes,
    }
}

fn observe<'a>(tally: &mut Tally<'a>, value: &'a AttributeValue) {
    match value.value_type() {
        Some(ty) => {
            tally.types.insert(ty);
            tally.values.push(value);
        }
        None => tally.nulls += 1,
    }
}

fn classify(tally: Tally<'_>, threshold: usize) -> AttributeInfo {
    let declared_type = match tally.types.len() {
        0 => ValueType::Text,
        1 => *tally.types.first().unwrap(),
        _ if tally.types.iter().all(|t| matches!(t, ValueType::Whole | ValueType::Real)) => {
            ValueType::Real
        }
        _ => ValueType::Text,
    };
    let distinct: BTreeSet<AttributeValue> = tally
        .values
        .iter()
        .map(|v| widen(v, declared_type))
        .collect();
    let distinct_value_count = distinct.len();
    let variable_kind = match declared_type {
        ValueType::Text | ValueType::Flag => VariableKind::Categorical,
        _ if distinct_value_count <= threshold => VariableKind::Categorical,
        ValueType::Whole => VariableKind::Discrete,
        _ => VariableKind::Continuous,
    };
    let scope = match (tally.in_events, tally.in_traces) {
        (true, true) => Scope::Both,
        (false, true) => Scope::Trace,
        _ => Scope::Event,
    };
    AttributeInfo {
        declared_type,
        variable_kind,
        distinct_value_count,
        null_count: tally.nulls,
        scope,
        type_conflict: tally.types.len() > 1,
    }
}

fn widen(value: &AttributeValue, to: ValueType) -> AttributeValue {
    match (to, value) {
        (ValueType::Real, AttributeValue::Whole(v)) => AttributeValue::Real(*v as f64),
        (ValueType::Text, AttributeValue::Text(_)) => value.clone(),
        (ValueType::Text, other) => AttributeValue::Text(other.to_string()),
        _ => value.clone(),
    }
}
