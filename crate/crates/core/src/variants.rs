//! Process variants: sub-logs whose traces share the value of one attribute.
//!
//! With a trace-level attribute every trace carrying a non-null value joins
//! the variant for that value. With an event-level attribute a trace joins
//! variant `v` when every one of its events that carries the attribute has
//! value `v`; traces with conflicting values, or with no value at all, end up
//! unassigned. Either way each trace belongs to at most one variant.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregation::AggregationFunction;
use crate::enhancement::{DataEnhancedProcessModel, Outcome, Provenance};
use crate::eventlog::{AttributeValue, EventLog, Trace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Trace,
    Event,
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "trace" => Ok(Level::Trace),
            "event" => Ok(Level::Event),
            other => Err(format!("unknown level `{other}` (expected trace or event)")),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Trace => "trace",
            Level::Event => "event",
        })
    }
}

/// Caller-supplied bin edges for partitioning numeric or timestamp
/// attributes. Edges `e0 < e1 < … < ek` define the bins `(-inf, e0)`,
/// `[e0, e1)`, …, `[ek, +inf)`; timestamps bin on epoch milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bins {
    pub edges: Vec<f64>,
}

impl Bins {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Bins("at least one edge is required".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::Bins("edges must be finite".into()));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Bins("edges must be strictly increasing".into()));
        }
        Ok(Bins { edges })
    }

    pub fn index_of(&self, value: f64) -> usize {
        self.edges.partition_point(|&e| e <= value)
    }

    pub fn label(&self, index: usize) -> String {
        let n = self.edges.len();
        match index {
            0 => format!("< {}", self.edges[0]),
            i if i >= n => format!(">= {}", self.edges[n - 1]),
            i => format!("[{}, {})", self.edges[i - 1], self.edges[i]),
        }
    }

    fn bin(&self, value: &AttributeValue) -> Option<AttributeValue> {
        let x = match value {
            AttributeValue::Stamp(t) => t.millis() as f64,
            other => other.as_f64()?,
        };
        Some(AttributeValue::Text(self.label(self.index_of(x))))
    }
}

impl Eq for Bins {}

/// Identifies one process variant: the traces whose value of `attribute`
/// (after binning, if `bins` is set) equals `value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantKey {
    pub attribute: String,
    pub level: Level,
    pub value: AttributeValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<Bins>,
}

impl VariantKey {
    pub fn trace(attribute: &str, value: impl Into<AttributeValue>) -> Self {
        VariantKey {
            attribute: attribute.to_owned(),
            level: Level::Trace,
            value: value.into(),
            bins: None,
        }
    }

    pub fn event(attribute: &str, value: impl Into<AttributeValue>) -> Self {
        VariantKey {
            level: Level::Event,
            ..VariantKey::trace(attribute, value)
        }
    }

    /// Key selecting bin `index` of `bins`.
    pub fn binned(attribute: &str, level: Level, bins: Bins, index: usize) -> Self {
        VariantKey {
            attribute: attribute.to_owned(),
            level,
            value: AttributeValue::Text(bins.label(index)),
            bins: Some(bins),
        }
    }

    fn selector(&self) -> Selector<'_> {
        Selector {
            attribute: &self.attribute,
            level: self.level,
            bins: self.bins.as_ref(),
        }
    }
}

impl fmt::Display for VariantKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} = {}", self.level, self.attribute, self.value)
    }
}

#[derive(Clone, Copy)]
struct Selector<'a> {
    attribute: &'a str,
    level: Level,
    bins: Option<&'a Bins>,
}

impl Selector<'_> {
    fn map(&self, value: &AttributeValue) -> Option<AttributeValue> {
        if value.is_null() {
            return None;
        }
        match self.bins {
            Some(bins) => bins.bin(value),
            None => Some(value.clone()),
        }
    }

    /// The variant value of a trace, or `None` when it is unassigned.
    fn value_of(&self, trace: &Trace) -> Option<AttributeValue> {
        match self.level {
            Level::Trace => trace.attributes.get(self.attribute).and_then(|v| self.map(v)),
            Level::Event => {
                let mut found: Option<AttributeValue> = None;
                for event in &trace.events {
                    let Some(raw) = event.get(self.attribute) else { continue };
                    if raw.is_null() {
                        continue;
                    }
                    let value = self.map(raw)?;
                    match &found {
                        Some(previous) if *previous != value => return None,
                        Some(_) => {}
                        None => found = Some(value),
                    }
                }
                found
            }
        }
    }

    fn exists_in(&self, log: &EventLog) -> bool {
        match self.level {
            Level::Trace => log.traces.iter().any(|t| t.attributes.contains_key(self.attribute)),
            Level::Event => log.events().any(|e| e.attributes.contains_key(self.attribute)),
        }
    }
}

/// A log split into variants plus the traces that belong to none.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantPartition {
    /// Sorted by value, or by bin order when binned.
    pub keys: Vec<VariantKey>,
    pub sublogs: Vec<EventLog>,
    /// Trace indices (into the partitioned log) of each sublog.
    pub members: Vec<Vec<usize>>,
    pub unassigned: EventLog,
    pub unassigned_members: Vec<usize>,
}

impl VariantPartition {
    pub fn sublog(&self, key: &VariantKey) -> Option<&EventLog> {
        self.keys.iter().position(|k| k == key).map(|i| &self.sublogs[i])
    }

    pub fn sizes(&self) -> Vec<(&VariantKey, usize)> {
        self.keys.iter().zip(self.sublogs.iter().map(EventLog::len)).collect()
    }
}

pub fn partition(log: &EventLog, attribute: &str, level: Level) -> Result<VariantPartition> {
    partition_by(log, Selector { attribute, level, bins: None })
}

/// Partitions on the bin each trace's value falls into.
pub fn partition_binned(
    log: &EventLog,
    attribute: &str,
    level: Level,
    bins: &Bins,
) -> Result<VariantPartition> {
    partition_by(log, Selector { attribute, level, bins: Some(bins) })
}

fn partition_by(log: &EventLog, selector: Selector<'_>) -> Result<VariantPartition> {
    if !selector.exists_in(log) {
        return Err(Error::UnknownAttribute(selector.attribute.to_owned()));
    }
    let mut groups: BTreeMap<AttributeValue, Vec<usize>> = BTreeMap::new();
    let mut unassigned_members = Vec::new();
    for (index, trace) in log.traces.iter().enumerate() {
        match selector.value_of(trace) {
            Some(value) => groups.entry(value).or_default().push(index),
            None => unassigned_members.push(index),
        }
    }
    let subset = |indices: &[usize]| {
        EventLog::new(
            log.source_name.clone(),
            indices.iter().map(|&i| log.traces[i].clone()).collect(),
        )
    };
    let mut groups: Vec<(AttributeValue, Vec<usize>)> = groups.into_iter().collect();
    if let Some(bins) = selector.bins {
        let rank = |v: &AttributeValue| (0..=bins.edges.len()).position(|i| v.as_text() == Some(&bins.label(i)));
        groups.sort_by_key(|(v, _)| rank(v));
    }
    let mut keys = Vec::with_capacity(groups.len());
    let mut sublogs = Vec::with_capacity(groups.len());
    let mut members = Vec::with_capacity(groups.len());
    for (value, indices) in groups {
        keys.push(VariantKey {
            attribute: selector.attribute.to_owned(),
            level: selector.level,
            value,
            bins: selector.bins.cloned(),
        });
        sublogs.push(subset(&indices));
        members.push(indices);
    }
    Ok(VariantPartition {
        keys,
        sublogs,
        members,
        unassigned: subset(&unassigned_members),
        unassigned_members,
    })
}

/// The sub-log of one variant. A key matching no trace yields an empty log.
pub fn filter_variant(log: &EventLog, key: &VariantKey) -> EventLog {
    let selector = key.selector();
    EventLog::new(
        log.source_name.clone(),
        log.traces
            .iter()
            .filter(|t| selector.value_of(t).as_ref() == Some(&key.value))
            .cloned()
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Presence {
    Both,
    AbsentInA,
    AbsentInB,
    AbsentInBoth,
}

/// One aggregation compared across two enhanced models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub activity: String,
    pub attribute: String,
    pub function: AggregationFunction,
    /// `None` when the aggregation is not attached on that side.
    pub a: Option<Outcome>,
    pub b: Option<Outcome>,
    /// `b - a`, when both sides have a value.
    pub absolute_delta: Option<f64>,
    /// `(b - a) / |a|`, when both sides have a value and `a != 0`.
    pub relative_delta: Option<f64>,
    pub presence: Presence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a: Provenance,
    pub b: Provenance,
    pub rows: Vec<ComparisonRow>,
    pub absent_in_a: Vec<String>,
    pub absent_in_b: Vec<String>,
}

fn absent(dep: &DataEnhancedProcessModel, activity: &str) -> bool {
    dep.is_absent(activity) || !dep.model.contains_activity(activity)
}

/// Compares the aggregations of two enhanced models, typically computed for
/// two variants of one log with the same requests.
pub fn compare_variants(
    a: &DataEnhancedProcessModel,
    b: &DataEnhancedProcessModel,
) -> ComparisonReport {
    let mut requests = a.requests();
    for request in b.requests() {
        if !requests.iter().any(|r| r.matches(&request)) {
            requests.push(request);
        }
    }
    let rows = requests
        .into_iter()
        .map(|request| {
            let left = a.find(&request).map(|x| x.result.clone());
            let right = b.find(&request).map(|x| x.result.clone());
            let values = left
                .as_ref()
                .and_then(Outcome::value)
                .zip(right.as_ref().and_then(Outcome::value));
            let absolute_delta = values.map(|(x, y)| y.numeric - x.numeric);
            let relative_delta = values
                .filter(|(x, _)| x.numeric != 0.0)
                .map(|(x, y)| (y.numeric - x.numeric) / x.numeric.abs());
            let presence = match (absent(a, &request.activity), absent(b, &request.activity)) {
                (false, false) => Presence::Both,
                (true, false) => Presence::AbsentInA,
                (false, true) => Presence::AbsentInB,
                (true, true) => Presence::AbsentInBoth,
            };
            ComparisonRow {
                activity: request.activity,
                attribute: request.attribute,
                function: request.function,
                a: left,
                b: right,
                absolute_delta,
                relative_delta,
                presence,
            }
        })
        .collect();

    let activities: std::collections::BTreeSet<&String> = a
        .model
        .activities
        .keys()
        .chain(b.model.activities.keys())
        .collect();
    ComparisonReport {
        a: a.provenance.clone(),
        b: b.provenance.clone(),
        rows,
        absent_in_a: activities
            .iter()
            .filter(|x| absent(a, x) && !absent(b, x))
            .map(|x| x.to_string())
            .collect(),
        absent_in_b: activities
            .iter()
            .filter(|x| absent(b, x) && !absent(a, x))
            .map(|x| x.to_string())
            .collect(),
    }
}
