//! Canonical JSON document for data-enhanced process models.
//!
//! The document is the model's fields plus a `version` tag (`dep.v1`); its
//! schema is published in `docs/schema/dep.v1.json`. Unknown fields are
//! rejected.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::discovery::ProcessModel;
use crate::enhancement::{DataEnhancedProcessModel, EventAttributeAggregation, Provenance};
use crate::{Error, Result};

pub const SCHEMA_VERSION: &str = "dep.v1";

#[derive(Serialize)]
struct DocumentRef<'a> {
    version: &'static str,
    provenance: &'a Provenance,
    model: &'a ProcessModel,
    enhancements: &'a BTreeMap<String, Vec<EventAttributeAggregation>>,
    absent_activities: &'a BTreeSet<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[allow(dead_code)]
    version: String,
    provenance: Provenance,
    model: ProcessModel,
    enhancements: BTreeMap<String, Vec<EventAttributeAggregation>>,
    #[serde(default)]
    absent_activities: BTreeSet<String>,
}

fn document(dep: &DataEnhancedProcessModel) -> DocumentRef<'_> {
    DocumentRef {
        version: SCHEMA_VERSION,
        provenance: &dep.provenance,
        model: &dep.model,
        enhancements: &dep.enhancements,
        absent_activities: &dep.absent_activities,
    }
}

pub fn to_json_value(dep: &DataEnhancedProcessModel) -> serde_json::Value {
    serde_json::to_value(document(dep)).expect("DEP documents always serialize")
}

/// Pretty-printed JSON document.
pub fn to_json(dep: &DataEnhancedProcessModel) -> String {
    serde_json::to_string_pretty(&document(dep)).expect("DEP documents always serialize")
}

pub fn from_json(text: &str) -> Result<DataEnhancedProcessModel> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value
        .get("version")
        .and_then(serde_json::Value::as_str)
        .unwrap_or_default();
    if found != SCHEMA_VERSION {
        return Err(Error::Version {
            found: found.to_owned(),
            expected: SCHEMA_VERSION.to_owned(),
        });
    }
    let doc: Document = serde_json::from_value(value)?;
    Ok(DataEnhancedProcessModel {
        model: doc.model,
        enhancements: doc.enhancements,
        absent_activities: doc.absent_activities,
        provenance: doc.provenance,
    })
}
