//! Event attribute aggregation.
//!
//! [`extract_values`] collects the values an attribute takes on all events of
//! one activity, across every trace and every repetition. [`aggregate`]
//! reduces such a multiset to a single number with one of the catalog
//! functions: minimum, maximum, arithmetic mean and median for numeric and
//! timestamp data; frequency and percentage of a target value for any data.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eventlog::{AttributeSchema, AttributeValue, EventLog, Timestamp, ValueType, VariableKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Min,
    Max,
    Mean,
    Median,
    Frequency,
    Percentage,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 6] = [
        FunctionKind::Min,
        FunctionKind::Max,
        FunctionKind::Mean,
        FunctionKind::Median,
        FunctionKind::Frequency,
        FunctionKind::Percentage,
    ];

    pub const CATEGORICAL: [FunctionKind; 2] = [FunctionKind::Frequency, FunctionKind::Percentage];

    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::Min => "min",
            FunctionKind::Max => "max",
            FunctionKind::Mean => "mean",
            FunctionKind::Median => "median",
            FunctionKind::Frequency => "frequency",
            FunctionKind::Percentage => "percentage",
        }
    }

    pub fn needs_target(self) -> bool {
        matches!(self, FunctionKind::Frequency | FunctionKind::Percentage)
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        FunctionKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown aggregation function `{s}`"))
    }
}

/// An aggregation function. Frequency and percentage count the occurrences of
/// a target value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "target", rename_all = "lowercase", deny_unknown_fields)]
pub enum AggregationFunction {
    Min,
    Max,
    Mean,
    Median,
    Frequency(AttributeValue),
    Percentage(AttributeValue),
}

impl AggregationFunction {
    pub fn new(kind: FunctionKind, target: Option<AttributeValue>) -> Result<Self, String> {
        Ok(match (kind, target) {
            (FunctionKind::Min, None) => AggregationFunction::Min,
            (FunctionKind::Max, None) => AggregationFunction::Max,
            (FunctionKind::Mean, None) => AggregationFunction::Mean,
            (FunctionKind::Median, None) => AggregationFunction::Median,
            (FunctionKind::Frequency, Some(t)) => AggregationFunction::Frequency(t),
            (FunctionKind::Percentage, Some(t)) => AggregationFunction::Percentage(t),
            (kind, Some(_)) => return Err(format!("{kind} takes no target value")),
            (kind, None) => return Err(format!("{kind} needs a target value")),
        })
    }

    pub fn kind(&self) -> FunctionKind {
        match self {
            AggregationFunction::Min => FunctionKind::Min,
            AggregationFunction::Max => FunctionKind::Max,
            AggregationFunction::Mean => FunctionKind::Mean,
            AggregationFunction::Median => FunctionKind::Median,
            AggregationFunction::Frequency(_) => FunctionKind::Frequency,
            AggregationFunction::Percentage(_) => FunctionKind::Percentage,
        }
    }

    pub fn target(&self) -> Option<&AttributeValue> {
        match self {
            AggregationFunction::Frequency(t) | AggregationFunction::Percentage(t) => Some(t),
            _ => None,
        }
    }

    /// Reinterprets a textual target as a value of `ty`, so that `"1"`
    /// targets the integer `1` of a whole-valued attribute.
    pub fn coerce_target(self, ty: ValueType) -> Self {
        let coerce = |t: AttributeValue| match (&t, ty) {
            (AttributeValue::Text(s), ty) if ty != ValueType::Text => ty.parse_value(s).unwrap_or(t),
            _ => t,
        };
        match self {
            AggregationFunction::Frequency(t) => AggregationFunction::Frequency(coerce(t)),
            AggregationFunction::Percentage(t) => AggregationFunction::Percentage(coerce(t)),
            other => other,
        }
    }
}

impl fmt::Display for AggregationFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.target() {
            Some(t) => write!(f, "{}({t})", self.kind()),
            None => write!(f, "{}", self.kind()),
        }
    }
}

/// The values one attribute takes on the events of one activity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValueMultiset {
    /// Non-null values with their multiplicities.
    pub values: BTreeMap<AttributeValue, u64>,
    /// Matching events where the attribute is null or absent.
    pub null_count: u64,
    pub source_event_count: u64,
}

impl ValueMultiset {
    /// Multiset of the given values; `Null`s count towards `null_count`.
    pub fn from_values<I: IntoIterator<Item = AttributeValue>>(values: I) -> Self {
        let mut multiset = ValueMultiset::default();
        for value in values {
            multiset.insert(Some(&value));
        }
        multiset
    }

    pub fn insert(&mut self, value: Option<&AttributeValue>) {
        self.source_event_count += 1;
        match value {
            Some(v) if !v.is_null() => *self.values.entry(v.clone()).or_default() += 1,
            _ => self.null_count += 1,
        }
    }

    /// Number of non-null values.
    pub fn len(&self) -> u64 {
        self.values.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Collects attribute `attribute` from every event named `activity`, in every
/// trace, including repeated executions within one trace.
pub fn extract_values(log: &EventLog, activity: &str, attribute: &str) -> ValueMultiset {
    let mut multiset = ValueMultiset::default();
    for event in log.events().filter(|e| e.activity() == Some(activity)) {
        multiset.insert(event.get(attribute));
    }
    multiset
}

/// Result of applying an aggregation function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregatedValue {
    /// Numeric result; timestamps are milliseconds since the epoch.
    pub numeric: f64,
    pub display: String,
    /// Number of values the result was computed from.
    pub support: u64,
}

enum Numbers {
    Whole(Vec<(i64, u64)>),
    Real(Vec<(f64, u64)>),
    Stamp(Vec<(i64, u64)>),
}

impl Numbers {
    fn of(values: &ValueMultiset, function: FunctionKind) -> Result<Numbers> {
        let mut wholes = Vec::new();
        let mut reals = Vec::new();
        let mut stamps = Vec::new();
        for (value, &count) in &values.values {
            match value {
                AttributeValue::Whole(v) => {
                    wholes.push((*v, count));
                    reals.push((*v as f64, count));
                }
                AttributeValue::Real(v) => reals.push((*v, count)),
                AttributeValue::Stamp(t) => stamps.push((t.millis(), count)),
                other => {
                    return Err(Error::NonNumeric {
                        function,
                        found: other.type_name(),
                    })
                }
            }
        }
        match (stamps.is_empty(), reals.is_empty()) {
            (false, false) => Err(Error::NonNumeric {
                function,
                found: "mixed timestamp and number",
            }),
            (false, true) => Ok(Numbers::Stamp(stamps)),
            _ if wholes.len() == reals.len() => Ok(Numbers::Whole(wholes)),
            _ => {
                reals.sort_by(|a, b| a.0.total_cmp(&b.0));
                Ok(Numbers::Real(reals))
            }
        }
    }
}

/// Element at sorted position `rank` (0-based) of a run-length encoded,
/// sorted sequence.
fn nth<T: Copy>(runs: &[(T, u64)], rank: u64) -> T {
    let mut seen = 0;
    for &(value, count) in runs {
        seen += count;
        if rank < seen {
            return value;
        }
    }
    unreachable!("rank within total count")
}

fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for term in terms {
        let t = sum + term;
        if sum.abs() >= term.abs() {
            compensation += (sum - t) + term;
        } else {
            compensation += (term - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = (a + b) / 2.0;
    if m.is_finite() {
        m
    } else {
        a / 2.0 + b / 2.0
    }
}

/// Two decimals, or three significant digits for magnitudes below one.
fn fixed(value: f64) -> String {
    let magnitude = value.abs();
    if magnitude == 0.0 || magnitude >= 1.0 || !magnitude.is_finite() {
        return format!("{value:.2}");
    }
    let decimals = (2 - magnitude.log10().floor() as i32).clamp(2, 12) as usize;
    format!("{value:.decimals$}")
}

fn stamp_display(millis: f64) -> String {
    Timestamp::from_millis(millis.round() as i64).to_string()
}

/// Applies `function` to the non-null values of `values`.
///
/// Min, max, mean and median need at least one value and numeric or
/// timestamp data; an even count takes the median as the mean of the two
/// middle values. Percentages are relative to the non-null value count.
pub fn aggregate(values: &ValueMultiset, function: &AggregationFunction) -> Result<AggregatedValue> {
    let support = values.len();
    let kind = function.kind();
    if let Some(target) = function.target() {
        let frequency: u64 = values
            .values
            .iter()
            .filter(|(v, _)| v.loosely_equals(target))
            .map(|(_, c)| c)
            .sum();
        return Ok(if kind == FunctionKind::Frequency {
            AggregatedValue {
                numeric: frequency as f64,
                display: frequency.to_string(),
                support,
            }
        } else {
            if support == 0 {
                return Err(Error::EmptyMultiset(kind));
            }
            let percentage = 100.0 * frequency as f64 / support as f64;
            AggregatedValue {
                numeric: percentage,
                display: format!("{}%", fixed(percentage)),
                support,
            }
        });
    }

    if support == 0 {
        return Err(Error::EmptyMultiset(kind));
    }
    let numbers = Numbers::of(values, kind)?;
    let (numeric, display) = match (&numbers, kind) {
        (Numbers::Whole(runs), FunctionKind::Min | FunctionKind::Max) => {
            let v = if kind == FunctionKind::Min { runs[0].0 } else { runs[runs.len() - 1].0 };
            (v as f64, v.to_string())
        }
        (Numbers::Stamp(runs), FunctionKind::Min | FunctionKind::Max) => {
            let v = if kind == FunctionKind::Min { runs[0].0 } else { runs[runs.len() - 1].0 };
            (v as f64, Timestamp::from_millis(v).to_string())
        }
        (Numbers::Real(runs), FunctionKind::Min | FunctionKind::Max) => {
            let v = if kind == FunctionKind::Min { runs[0].0 } else { runs[runs.len() - 1].0 };
            (v, fixed(v))
        }
        (Numbers::Whole(runs) | Numbers::Stamp(runs), FunctionKind::Mean) => {
            let sum: i128 = runs.iter().map(|&(v, c)| v as i128 * c as i128).sum();
            let mean = sum as f64 / support as f64;
            (mean, display_mean(&numbers, mean))
        }
        (Numbers::Real(runs), FunctionKind::Mean) => {
            let mean = neumaier_sum(runs.iter().map(|&(v, c)| v * c as f64)) / support as f64;
            (mean, fixed(mean))
        }
        (Numbers::Whole(runs) | Numbers::Stamp(runs), FunctionKind::Median) => {
            let lo = nth(runs, (support - 1) / 2);
            let hi = nth(runs, support / 2);
            let median = (lo as i128 + hi as i128) as f64 / 2.0;
            (median, display_mean(&numbers, median))
        }
        (Numbers::Real(runs), FunctionKind::Median) => {
            let median = midpoint(nth(runs, (support - 1) / 2), nth(runs, support / 2));
            (median, fixed(median))
        }
        _ => unreachable!("targeted functions handled above"),
    };
    Ok(AggregatedValue {
        numeric,
        display,
        support,
    })
}

fn display_mean(numbers: &Numbers, value: f64) -> String {
    match numbers {
        Numbers::Stamp(_) => stamp_display(value),
        _ => fixed(value),
    }
}

/// Function kinds offered for an attribute: frequency and percentage for
/// categorical variables, the full catalog for discrete and continuous ones.
pub fn applicable_functions(schema: &AttributeSchema, attribute: &str) -> Result<Vec<FunctionKind>> {
    let info = schema
        .get(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_owned()))?;
    Ok(match info.variable_kind {
        VariableKind::Categorical => FunctionKind::CATEGORICAL.to_vec(),
        VariableKind::Discrete | VariableKind::Continuous => FunctionKind::ALL.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::{infer_schema, Event, Trace};

    fn reals(values: &[f64]) -> ValueMultiset {
        ValueMultiset::from_values(values.iter().map(|&v| AttributeValue::Real(v)))
    }

    fn wholes(values: &[i64]) -> ValueMultiset {
        ValueMultiset::from_values(values.iter().map(|&v| AttributeValue::Whole(v)))
    }

    fn run(values: &ValueMultiset, f: AggregationFunction) -> f64 {
        aggregate(values, &f).unwrap().numeric
    }

    #[test]
    fn mean_of_one_two_three() {
        let r = aggregate(&wholes(&[1, 2, 3]), &AggregationFunction::Mean).unwrap();
        assert_eq!(r.numeric, 2.0);
        assert_eq!(r.display, "2.00");
        assert_eq!(r.support, 3);
    }

    #[test]
    fn even_median_averages_middle_pair() {
        assert_eq!(run(&wholes(&[4, 1, 3, 2]), AggregationFunction::Median), 2.5);
        assert_eq!(run(&reals(&[4.0, 1.0, 3.0, 2.0]), AggregationFunction::Median), 2.5);
        assert_eq!(run(&wholes(&[5, 1, 3]), AggregationFunction::Median), 3.0);
    }

    #[test]
    fn percentage_of_flag_value() {
        let values = ValueMultiset::from_values(
            ["abnormal", "abnormal", "abnormal", "normal", "normal"].map(AttributeValue::from),
        );
        let r = aggregate(&values, &AggregationFunction::Percentage("abnormal".into())).unwrap();
        assert_eq!(r.numeric, 60.0);
        assert_eq!(r.display, "60.00%");
        assert_eq!(run(&values, AggregationFunction::Frequency("normal".into())), 2.0);
    }

    #[test]
    fn nulls_are_excluded_from_denominator() {
        let values = ValueMultiset::from_values(vec![true.into(), false.into(), AttributeValue::Null]);
        assert_eq!(values.null_count, 1);
        assert_eq!(values.source_event_count, 3);
        assert_eq!(run(&values, AggregationFunction::Percentage(true.into())), 50.0);
    }

    #[test]
    fn min_max_keep_source_type_in_display() {
        let w = wholes(&[7, -2, 9]);
        assert_eq!(aggregate(&w, &AggregationFunction::Min).unwrap().display, "-2");
        assert_eq!(aggregate(&w, &AggregationFunction::Max).unwrap().display, "9");
        let mixed = ValueMultiset::from_values(vec![AttributeValue::Whole(3), AttributeValue::Real(2.5)]);
        assert_eq!(run(&mixed, AggregationFunction::Min), 2.5);
        assert_eq!(run(&mixed, AggregationFunction::Max), 3.0);
    }

    #[test]
    fn stamps_aggregate_on_epoch_millis() {
        let t = |ms| AttributeValue::Stamp(Timestamp::from_millis(ms));
        let values = ValueMultiset::from_values(vec![t(0), t(1000), t(3000)]);
        let mean = aggregate(&values, &AggregationFunction::Mean).unwrap();
        assert!((mean.numeric - 4000.0 / 3.0).abs() < 1e-9);
        assert_eq!(mean.display, "1970-01-01T00:00:01.333+00:00");
        let median = aggregate(&values, &AggregationFunction::Median).unwrap();
        assert_eq!(median.display, "1970-01-01T00:00:01.000+00:00");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            aggregate(&ValueMultiset::default(), &AggregationFunction::Mean),
            Err(Error::EmptyMultiset(FunctionKind::Mean))
        ));
        assert!(matches!(
            aggregate(&ValueMultiset::default(), &AggregationFunction::Percentage(true.into())),
            Err(Error::EmptyMultiset(FunctionKind::Percentage))
        ));
        assert_eq!(
            run(&ValueMultiset::default(), AggregationFunction::Frequency(true.into())),
            0.0
        );
        let text = ValueMultiset::from_values(vec!["a".into()]);
        assert!(matches!(
            aggregate(&text, &AggregationFunction::Max),
            Err(Error::NonNumeric { found: "text", .. })
        ));
    }

    #[test]
    fn extract_includes_repetitions_and_counts_absence() {
        let t = Timestamp::from_millis;
        let log = EventLog::new(
            "x",
            vec![
                Trace::new(
                    "c1",
                    vec![
                        Event::new("", "A", t(0)).with("x", 1),
                        Event::new("", "A", t(1)).with("x", 2),
                        Event::new("", "B", t(2)).with("x", 9),
                    ],
                ),
                Trace::new("c2", vec![Event::new("", "A", t(0))]),
            ],
        );
        let values = extract_values(&log, "A", "x");
        assert_eq!(values.values, BTreeMap::from([(1.into(), 1), (2.into(), 1)]));
        assert_eq!(values.source_event_count, 3);
        assert_eq!(values.null_count, 1);
        let none = extract_values(&log, "Z", "x");
        assert_eq!(none, ValueMultiset::default());
    }

    #[test]
    fn applicability_follows_variable_kind() {
        let t = Timestamp::from_millis;
        let events: Vec<Event> = (0..40)
            .map(|i| {
                Event::new("", "A", t(i))
                    .with("flag", i % 2 == 0)
                    .with("level", AttributeValue::Real(i as f64 * 0.37))
                    .with("binary", i % 2)
            })
            .collect();
        let schema = infer_schema(&EventLog::new("x", vec![Trace::new("c", events)]));
        assert_eq!(applicable_functions(&schema, "flag").unwrap(), FunctionKind::CATEGORICAL);
        assert_eq!(applicable_functions(&schema, "level").unwrap(), FunctionKind::ALL);
        assert_eq!(applicable_functions(&schema, "binary").unwrap(), FunctionKind::CATEGORICAL);
        assert!(matches!(
            applicable_functions(&schema, "nope"),
            Err(Error::UnknownAttribute(_))
        ));
    }

    #[test]
    fn target_coercion() {
        let f = AggregationFunction::Percentage("1".into()).coerce_target(ValueType::Whole);
        assert_eq!(f, AggregationFunction::Percentage(AttributeValue::Whole(1)));
        let f = AggregationFunction::Frequency("x".into()).coerce_target(ValueType::Whole);
        assert_eq!(f, AggregationFunction::Frequency("x".into()));
    }

    #[test]
    fn function_json_shape() {
        let f = AggregationFunction::Percentage("abnormal_high".into());
        let json = serde_json::to_value(&f).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"kind": "percentage", "target": {"type": "text", "value": "abnormal_high"}})
        );
        assert_eq!(serde_json::to_value(AggregationFunction::Max).unwrap(), serde_json::json!({"kind": "max"}));
    }
}
