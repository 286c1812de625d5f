//! Data-enhanced process models.
//!
//! A [`DataEnhancedProcessModel`] pairs a discovered [`ProcessModel`] with
//! event attribute aggregations attached to its activities. Adding, removing
//! and recomputing aggregations never touches the model's nodes or edges.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregation::{
    aggregate, applicable_functions, extract_values, AggregatedValue, AggregationFunction,
    FunctionKind,
};
use crate::discovery::ProcessModel;
use crate::eventlog::{infer_schema, AttributeSchema, AttributeValue, EventLog};
use crate::variants::VariantKey;
use crate::{Error, Result};

/// Which activity, attribute and function an aggregation is computed for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationRequest {
    pub activity: String,
    pub attribute: String,
    pub function: AggregationFunction,
}

impl AggregationRequest {
    pub fn new(activity: &str, attribute: &str, function: AggregationFunction) -> Self {
        AggregationRequest {
            activity: activity.to_owned(),
            attribute: attribute.to_owned(),
            function,
        }
    }

    /// Same triple, treating targets as equal when they render identically.
    /// Lets textual keys match typed targets.
    pub fn matches(&self, other: &AggregationRequest) -> bool {
        self.activity == other.activity
            && self.attribute == other.attribute
            && self.function.kind() == other.function.kind()
            && match (self.function.target(), other.function.target()) {
                (Some(a), Some(b)) => a.loosely_equals(b) || a.to_string() == b.to_string(),
                (None, None) => true,
                _ => false,
            }
    }
}

/// Colon-delimited form `activity:attribute:function[:target]`. A literal
/// colon or backslash inside a field is written `\:` or `\\`.
impl fmt::Display for AggregationRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}",
            escape_field(&self.activity),
            escape_field(&self.attribute),
            self.function.kind()
        )?;
        if let Some(target) = self.function.target() {
            write!(f, ":{}", escape_field(&target.to_string()))?;
        }
        Ok(())
    }
}

impl FromStr for AggregationRequest {
    type Err = Error;

    /// Targets parse as text; [`normalize_request`] retypes them against the
    /// attribute's schema. Colons after the function name belong to the
    /// target, so timestamps need no escaping.
    fn from_str(spec: &str) -> Result<Self> {
        let invalid = |reason: &str| Error::AggregationSpec {
            spec: spec.to_owned(),
            reason: reason.to_owned(),
        };
        let mut fields = vec![String::new()];
        let mut chars = spec.chars();
        while let Some(c) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some(escaped @ (':' | '\\')) => fields.last_mut().unwrap().push(escaped),
                    _ => return Err(invalid("`\\` must be followed by `:` or `\\`")),
                },
                ':' if fields.len() < 4 => fields.push(String::new()),
                c => fields.last_mut().unwrap().push(c),
            }
        }
        if !(3..=4).contains(&fields.len()) {
            return Err(invalid("expected activity:attribute:function[:target]"));
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(invalid("activity and attribute must be non-empty"));
        }
        let kind: FunctionKind = fields[2].parse().map_err(|e: String| invalid(&e))?;
        let target = fields.get(3).map(|t| AttributeValue::Text(t.clone()));
        let function = AggregationFunction::new(kind, target).map_err(|e| invalid(&e))?;
        Ok(AggregationRequest::new(&fields[0], &fields[1], function))
    }
}

fn escape_field(field: &str) -> String {
    field.replace('\\', "\\\\").replace(':', "\\:")
}

/// The computed part of an aggregation: a value, or an explicit "no data"
/// marker when no event supplied a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", content = "value", rename_all = "snake_case", deny_unknown_fields)]
pub enum Outcome {
    Value(AggregatedValue),
    NoData,
}

impl Outcome {
    pub fn value(&self) -> Option<&AggregatedValue> {
        match self {
            Outcome::Value(v) => Some(v),
            Outcome::NoData => None,
        }
    }

    pub fn display(&self) -> &str {
        match self {
            Outcome::Value(v) => &v.display,
            Outcome::NoData => "no data",
        }
    }
}

/// An aggregation attached to an activity, with its result and the size of
/// the value multiset it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventAttributeAggregation {
    pub activity: String,
    pub attribute: String,
    pub function: AggregationFunction,
    pub result: Outcome,
    pub null_count: u64,
    pub source_event_count: u64,
}

impl EventAttributeAggregation {
    pub fn request(&self) -> AggregationRequest {
        AggregationRequest::new(&self.activity, &self.attribute, self.function.clone())
    }
}

/// Which log, or which variant of it, the aggregation values describe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub log: String,
    #[serde(default)]
    pub variant: Option<VariantKey>,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.log)?;
        if let Some(v) = &self.variant {
            write!(f, " [{v}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataEnhancedProcessModel {
    pub model: ProcessModel,
    /// Aggregations per activity, in insertion order.
    pub enhancements: BTreeMap<String, Vec<EventAttributeAggregation>>,
    /// Model activities without any event in the provenance log.
    #[serde(default)]
    pub absent_activities: BTreeSet<String>,
    pub provenance: Provenance,
}

impl DataEnhancedProcessModel {
    pub fn new(model: ProcessModel, log: &EventLog) -> Self {
        let absent_activities = absent_in(&model, log);
        DataEnhancedProcessModel {
            model,
            enhancements: BTreeMap::new(),
            absent_activities,
            provenance: Provenance {
                log: log.source_name.clone(),
                variant: None,
            },
        }
    }

    pub fn aggregations(&self) -> impl Iterator<Item = &EventAttributeAggregation> {
        self.enhancements.values().flatten()
    }

    pub fn requests(&self) -> Vec<AggregationRequest> {
        self.aggregations().map(EventAttributeAggregation::request).collect()
    }

    pub fn find(&self, request: &AggregationRequest) -> Option<&EventAttributeAggregation> {
        self.enhancements
            .get(&request.activity)?
            .iter()
            .find(|a| a.request().matches(request))
    }

    pub fn is_absent(&self, activity: &str) -> bool {
        self.absent_activities.contains(activity)
    }
}

fn absent_in(model: &ProcessModel, log: &EventLog) -> BTreeSet<String> {
    let present = log.activities();
    model
        .activities
        .keys()
        .filter(|a| !present.contains(a.as_str()))
        .cloned()
        .collect()
}

/// Checks a request against the model and schema and retypes its target to
/// the attribute's declared type.
pub fn normalize_request(
    model: &ProcessModel,
    schema: &AttributeSchema,
    request: &AggregationRequest,
) -> Result<AggregationRequest> {
    if !model.contains_activity(&request.activity) {
        return Err(Error::UnknownActivity(request.activity.clone()));
    }
    let info = schema
        .get(&request.attribute)
        .filter(|info| info.scope.includes_event())
        .ok_or_else(|| Error::UnknownAttribute(request.attribute.clone()))?;
    let applicable = applicable_functions(schema, &request.attribute)?;
    let kind = request.function.kind();
    if !applicable.contains(&kind) {
        return Err(Error::Inapplicable {
            attribute: request.attribute.clone(),
            function: kind,
            applicable,
        });
    }
    Ok(AggregationRequest {
        function: request.function.clone().coerce_target(info.declared_type),
        ..request.clone()
    })
}

fn compute(log: &EventLog, request: &AggregationRequest) -> Result<EventAttributeAggregation> {
    let values = extract_values(log, &request.activity, &request.attribute);
    let result = if values.is_empty() {
        Outcome::NoData
    } else {
        Outcome::Value(aggregate(&values, &request.function)?)
    };
    Ok(EventAttributeAggregation {
        activity: request.activity.clone(),
        attribute: request.attribute.clone(),
        function: request.function.clone(),
        result,
        null_count: values.null_count,
        source_event_count: values.source_event_count,
    })
}

/// A request that could not be attached.
#[derive(Debug)]
pub struct Rejection {
    pub request: AggregationRequest,
    pub error: Error,
}

#[derive(Debug)]
pub struct Enhanced {
    pub dep: DataEnhancedProcessModel,
    pub rejected: Vec<Rejection>,
}

/// Attaches every valid request to `model`, computing values from `log`.
/// Invalid requests are reported in [`Enhanced::rejected`]; the rest still
/// succeed.
pub fn enhance(model: &ProcessModel, log: &EventLog, requests: &[AggregationRequest]) -> Enhanced {
    let schema = infer_schema(log);
    let mut dep = DataEnhancedProcessModel::new(model.clone(), log);
    let mut rejected = Vec::new();
    for request in requests {
        match add_aggregation_with(&dep, log, &schema, request) {
            Ok(next) => dep = next,
            Err(error) => rejected.push(Rejection {
                request: request.clone(),
                error,
            }),
        }
    }
    Enhanced { dep, rejected }
}

pub fn add_aggregation(
    dep: &DataEnhancedProcessModel,
    log: &EventLog,
    request: &AggregationRequest,
) -> Result<DataEnhancedProcessModel> {
    add_aggregation_with(dep, log, &infer_schema(log), request)
}

/// Adds one aggregation. Adding a triple that is already attached returns
/// the model unchanged.
pub fn add_aggregation_with(
    dep: &DataEnhancedProcessModel,
    log: &EventLog,
    schema: &AttributeSchema,
    request: &AggregationRequest,
) -> Result<DataEnhancedProcessModel> {
    let request = normalize_request(&dep.model, schema, request)?;
    if dep.find(&request).is_some() {
        return Ok(dep.clone());
    }
    let aggregation = compute(log, &request)?;
    let mut next = dep.clone();
    next.enhancements
        .entry(request.activity.clone())
        .or_default()
        .push(aggregation);
    Ok(next)
}

/// Removes one aggregation. The flag reports whether anything was removed;
/// removing an absent triple is a no-op.
pub fn remove_aggregation(
    dep: &DataEnhancedProcessModel,
    request: &AggregationRequest,
) -> (DataEnhancedProcessModel, bool) {
    let mut next = dep.clone();
    let Some(list) = next.enhancements.get_mut(&request.activity) else {
        return (next, false);
    };
    let before = list.len();
    list.retain(|a| !a.request().matches(request));
    let removed = list.len() != before;
    if list.is_empty() {
        next.enhancements.remove(&request.activity);
    }
    (next, removed)
}

/// Recomputes every attached aggregation on `variant_log` without touching
/// the model. Activities with no events in the variant are marked absent and
/// their aggregations carry no data. Passing the full log with `variant =
/// None` restores the original values.
pub fn recompute_for_variant(
    dep: &DataEnhancedProcessModel,
    variant_log: &EventLog,
    variant: Option<VariantKey>,
) -> DataEnhancedProcessModel {
    let enhancements = dep
        .enhancements
        .iter()
        .map(|(activity, list)| {
            let recomputed = list
                .iter()
                .map(|a| {
                    compute(variant_log, &a.request()).unwrap_or_else(|_| {
                        let values = extract_values(variant_log, &a.activity, &a.attribute);
                        EventAttributeAggregation {
                            result: Outcome::NoData,
                            null_count: values.null_count,
                            source_event_count: values.source_event_count,
                            ..a.clone()
                        }
                    })
                })
                .collect();
            (activity.clone(), recomputed)
        })
        .collect();
    DataEnhancedProcessModel {
        model: dep.model.clone(),
        enhancements,
        absent_activities: absent_in(&dep.model, variant_log),
        provenance: Provenance {
            log: dep.provenance.log.clone(),
            variant,
        },
    }
}
