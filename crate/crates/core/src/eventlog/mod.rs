//! Event log data model and ingestion.
//!
//! An [`EventLog`] is a multiset of [`Trace`]s, each trace a sequence of
//! [`Event`]s, and each event a mapping from attribute names to typed
//! [`AttributeValue`]s. Case identifier, activity and timestamp are mandatory
//! on every event and are stored under the XES standard keys.

mod csv;
mod schema;
mod xes;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

pub use self::csv::{parse_csv, ColumnMapping};
pub use self::schema::{
    infer_schema, infer_schema_with, AttributeInfo, AttributeSchema, Scope, VariableKind,
    DEFAULT_CATEGORICAL_THRESHOLD,
};
pub use self::xes::{parse_xes, serialize_xes, write_xes};

/// Attribute key holding the activity name of an event.
pub const ACTIVITY_KEY: &str = "concept:name";
/// Attribute key holding the timestamp of an event.
pub const TIMESTAMP_KEY: &str = "time:timestamp";
/// Attribute key holding the case identifier copied onto every event.
pub const CASE_KEY: &str = "case:concept:name";

/// UTC instant with millisecond precision, stored as milliseconds since the
/// Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_millis(millis: i64) -> Self {
        Timestamp(millis)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }

    /// Parses ISO-8601 / `xs:dateTime` text. Inputs without an offset are
    /// taken as UTC; sub-millisecond digits are truncated.
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
            return Some(Timestamp(dt.timestamp_millis()));
        }
        for format in ["%Y-%m-%dT%H:%M:%S%.f%z", "%Y-%m-%d %H:%M:%S%.f%z"] {
            if let Ok(dt) = DateTime::parse_from_str(text, format) {
                return Some(Timestamp(dt.timestamp_millis()));
            }
        }
        for format in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
            if let Ok(dt) = NaiveDateTime::parse_from_str(text, format) {
                return Some(Timestamp(dt.and_utc().timestamp_millis()));
            }
        }
        NaiveDate::parse_from_str(text, "%Y-%m-%d")
            .ok()
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .map(|dt| Timestamp(dt.and_utc().timestamp_millis()))
    }

    pub fn to_datetime(self) -> Option<DateTime<Utc>> {
        DateTime::from_timestamp_millis(self.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_datetime() {
            Some(dt) => write!(f, "{}", dt.format("%Y-%m-%dT%H:%M:%S%.3f+00:00")),
            None => write!(f, "@{}ms", self.0),
        }
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        if let Some(millis) = text.strip_prefix('@').and_then(|t| t.strip_suffix("ms")) {
            return millis.parse().map(Timestamp).map_err(serde::de::Error::custom);
        }
        Timestamp::parse(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid timestamp `{text}`")))
    }
}

/// Elementary attribute types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Text,
    Stamp,
    Whole,
    Real,
    Flag,
}

impl ValueType {
    pub fn name(self) -> &'static str {
        match self {
            ValueType::Text => "text",
            ValueType::Stamp => "stamp",
            ValueType::Whole => "whole",
            ValueType::Real => "real",
            ValueType::Flag => "flag",
        }
    }

    /// Parses `text` as a value of this type.
    pub fn parse_value(self, text: &str) -> Option<AttributeValue> {
        let trimmed = text.trim();
        match self {
            ValueType::Text => Some(AttributeValue::Text(text.to_owned())),
            ValueType::Stamp => Timestamp::parse(trimmed).map(AttributeValue::Stamp),
            ValueType::Whole => trimmed.parse().ok().map(AttributeValue::Whole),
            ValueType::Real => trimmed.parse().ok().and_then(AttributeValue::real),
            ValueType::Flag => parse_flag(trimmed).map(AttributeValue::Flag),
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn parse_flag(text: &str) -> Option<bool> {
    match text {
        "true" | "True" | "TRUE" | "1" => Some(true),
        "false" | "False" | "FALSE" | "0" => Some(false),
        _ => None,
    }
}

/// A typed attribute value.
///
/// `Real` values are always finite. `Null` is an explicit null value and is
/// distinct from the attribute being absent from an event.
///
/// Equality, ordering and hashing are total: reals compare by their IEEE
/// total order, so `-0.0` and `0.0` are different values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase", deny_unknown_fields)]
pub enum AttributeValue {
    Text(String),
    Stamp(Timestamp),
    Whole(i64),
    Real(f64),
    Flag(bool),
    Null,
}

impl AttributeValue {
    /// Builds a `Real`, rejecting NaN and infinities.
    pub fn real(value: f64) -> Option<Self> {
        value.is_finite().then_some(AttributeValue::Real(value))
    }

    pub fn value_type(&self) -> Option<ValueType> {
        Some(match self {
            AttributeValue::Text(_) => ValueType::Text,
            AttributeValue::Stamp(_) => ValueType::Stamp,
            AttributeValue::Whole(_) => ValueType::Whole,
            AttributeValue::Real(_) => ValueType::Real,
            AttributeValue::Flag(_) => ValueType::Flag,
            AttributeValue::Null => return None,
        })
    }

    pub fn type_name(&self) -> &'static str {
        self.value_type().map_or("null", ValueType::name)
    }

    pub fn is_null(&self) -> bool {
        matches!(self, AttributeValue::Null)
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttributeValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_stamp(&self) -> Option<Timestamp> {
        match self {
            AttributeValue::Stamp(t) => Some(*t),
            _ => None,
        }
    }

    /// Numeric view of `Whole` and `Real` values.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttributeValue::Whole(v) => Some(*v as f64),
            AttributeValue::Real(v) => Some(*v),
            _ => None,
        }
    }

    /// Equality that additionally identifies numerically equal `Whole` and
    /// `Real` values.
    pub fn loosely_equals(&self, other: &AttributeValue) -> bool {
        match (self, other) {
            (AttributeValue::Whole(a), AttributeValue::Real(b))
            | (AttributeValue::Real(b), AttributeValue::Whole(a)) => (*a as f64) == *b,
            _ => self == other,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            AttributeValue::Text(_) => 0,
            AttributeValue::Stamp(_) => 1,
            AttributeValue::Whole(_) => 2,
            AttributeValue::Real(_) => 3,
            AttributeValue::Flag(_) => 4,
            AttributeValue::Null => 5,
        }
    }
}

impl PartialEq for AttributeValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AttributeValue {}

impl PartialOrd for AttributeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AttributeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use AttributeValue::*;
        match (self, other) {
            (Text(a), Text(b)) => a.cmp(b),
            (Stamp(a), Stamp(b)) => a.cmp(b),
            (Whole(a), Whole(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.total_cmp(b),
            (Flag(a), Flag(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for AttributeValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            AttributeValue::Text(s) => s.hash(state),
            AttributeValue::Stamp(t) => t.hash(state),
            AttributeValue::Whole(v) => v.hash(state),
            AttributeValue::Real(v) => v.to_bits().hash(state),
            AttributeValue::Flag(b) => b.hash(state),
            AttributeValue::Null => {}
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Text(s) => f.write_str(s),
            AttributeValue::Stamp(t) => t.fmt(f),
            AttributeValue::Whole(v) => v.fmt(f),
            AttributeValue::Real(v) => v.fmt(f),
            AttributeValue::Flag(b) => b.fmt(f),
            AttributeValue::Null => f.write_str("null"),
        }
    }
}

impl From<&str> for AttributeValue {
    fn from(value: &str) -> Self {
        AttributeValue::Text(value.to_owned())
    }
}

impl From<String> for AttributeValue {
    fn from(value: String) -> Self {
        AttributeValue::Text(value)
    }
}

impl From<i64> for AttributeValue {
    fn from(value: i64) -> Self {
        AttributeValue::Whole(value)
    }
}

impl From<bool> for AttributeValue {
    fn from(value: bool) -> Self {
        AttributeValue::Flag(value)
    }
}

impl From<Timestamp> for AttributeValue {
    fn from(value: Timestamp) -> Self {
        AttributeValue::Stamp(value)
    }
}

pub type AttributeMap = BTreeMap<String, AttributeValue>;

/// A single event: a mapping from attribute names to values.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Event {
    pub attributes: AttributeMap,
}

impl Event {
    pub fn new(case_id: &str, activity: &str, timestamp: Timestamp) -> Self {
        let mut attributes = AttributeMap::new();
        attributes.insert(CASE_KEY.to_owned(), case_id.into());
        attributes.insert(ACTIVITY_KEY.to_owned(), activity.into());
        attributes.insert(TIMESTAMP_KEY.to_owned(), timestamp.into());
        Event { attributes }
    }

    pub fn with(mut self, key: &str, value: impl Into<AttributeValue>) -> Self {
        self.attributes.insert(key.to_owned(), value.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&AttributeValue> {
        self.attributes.get(key)
    }

    pub fn activity(&self) -> Option<&str> {
        self.get(ACTIVITY_KEY).and_then(AttributeValue::as_text)
    }

    pub fn timestamp(&self) -> Option<Timestamp> {
        self.get(TIMESTAMP_KEY).and_then(AttributeValue::as_stamp)
    }

    pub fn case_id(&self) -> Option<&str> {
        self.get(CASE_KEY).and_then(AttributeValue::as_text)
    }
}

/// One process execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
    #[serde(default)]
    pub attributes: AttributeMap,
}

impl Trace {
    /// Builds a trace, stamping the case identifier on every event and
    /// stably sorting the events by timestamp.
    pub fn new(case_id: impl Into<String>, events: Vec<Event>) -> Self {
        let mut trace = Trace {
            case_id: case_id.into(),
            events,
            attributes: AttributeMap::new(),
        };
        trace.normalize();
        trace
    }

    pub fn with_attribute(mut self, key: &str, value: impl Into<AttributeValue>) -> Self {
        self.attributes.insert(key.to_owned(), value.into());
        self
    }

    pub(crate) fn normalize(&mut self) {
        for event in &mut self.events {
            event
                .attributes
                .insert(CASE_KEY.to_owned(), self.case_id.as_str().into());
        }
        // sort_by_key is stable: equal timestamps keep document order
        self.events
            .sort_by_key(|e| e.timestamp().map_or(i64::MIN, Timestamp::millis));
    }

    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().filter_map(Event::activity)
    }
}

/// A multiset of traces. Duplicate traces are kept as separate entries; the
/// position of a trace in `traces` is its trace index.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventLog {
    pub source_name: String,
    pub traces: Vec<Trace>,
}

impl EventLog {
    pub fn new(source_name: impl Into<String>, traces: Vec<Trace>) -> Self {
        EventLog {
            source_name: source_name.into(),
            traces,
        }
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(|t| t.events.len()).sum()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.traces.iter().flat_map(|t| t.events.iter())
    }

    /// Distinct activity names, sorted.
    pub fn activities(&self) -> BTreeSet<&str> {
        self.events().filter_map(Event::activity).collect()
    }

    /// Checks the structural invariants: mandatory attributes present and
    /// non-null, case identifiers consistent and timestamps non-decreasing
    /// within each trace.
    pub fn validate(&self) -> Result<()> {
        for (ti, trace) in self.traces.iter().enumerate() {
            let mut previous = None;
            for (ei, event) in trace.events.iter().enumerate() {
                let missing = |attribute: &str| Error::MissingMandatory {
                    trace: ti,
                    event: Some(ei),
                    attribute: attribute.to_owned(),
                };
                if event.case_id() != Some(trace.case_id.as_str()) {
                    return Err(missing(CASE_KEY));
                }
                if event.activity().is_none() {
                    return Err(missing(ACTIVITY_KEY));
                }
                let ts = event.timestamp().ok_or_else(|| missing(TIMESTAMP_KEY))?;
                if previous.is_some_and(|p| p > ts) {
                    return Err(Error::Xes {
                        position: 0,
                        message: format!("trace {ti} event {ei}: timestamps out of order"),
                    });
                }
                previous = Some(ts);
            }
        }
        Ok(())
    }
}

/// Result of ingesting a log: the log plus non-fatal warnings.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub log: EventLog,
    pub warnings: Vec<String>,
}
