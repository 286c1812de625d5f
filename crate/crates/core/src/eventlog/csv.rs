use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use super::{
    AttributeMap, AttributeValue, Event, EventLog, Ingested, Timestamp, Trace, ValueType,
    ACTIVITY_KEY, CASE_KEY, TIMESTAMP_KEY,
};
use crate::{Error, Result};

/// Maps CSV columns onto the mandatory event attributes. Every other column
/// becomes an event attribute named after its header.
#[derive(Debug, Clone)]
pub struct ColumnMapping {
    pub case_column: String,
    pub activity_column: String,
    pub timestamp_column: String,
    pub delimiter: u8,
    /// Declared types per column; columns not listed are inferred.
    pub column_types: BTreeMap<String, ValueType>,
    pub source_name: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            case_column: "case_id".into(),
            activity_column: "activity".into(),
            timestamp_column: "timestamp".into(),
            delimiter: b',',
            column_types: BTreeMap::new(),
            source_name: "csv".into(),
        }
    }
}

/// Parses a CSV table with a header row into an event log.
///
/// Rows are grouped into traces by case identifier (traces appear in order of
/// first occurrence) and ordered by timestamp within each trace. Empty cells
/// become `Null`; cells that do not parse as their column type become `Null`
/// and add a warning.
pub fn parse_csv<R: Read>(input: R, mapping: &ColumnMapping) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter)
        .has_headers(true)
        .from_reader(input);
    let csv_error = |e: csv::Error| Error::Csv(e.to_string());
    let headers = reader.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let case_col = column(&mapping.case_column)?;
    let activity_col = column(&mapping.activity_column)?;
    let timestamp_col = column(&mapping.timestamp_column)?;

    let rows = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_error)?;
    if rows.is_empty() {
        return Err(Error::NoDataRows);
    }

    let attribute_columns: Vec<(usize, &str, ValueType)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| ![case_col, activity_col, timestamp_col].contains(i))
        .map(|(i, name)| {
            let declared = mapping
                .column_types
                .get(name)
                .copied()
                .unwrap_or_else(|| infer_column(rows.iter().map(|r| r.get(i).unwrap_or(""))));
            (i, name, declared)
        })
        .collect();

    let mut warnings = Vec::new();
    let mut order: Vec<(String, Vec<Event>)> = Vec::new();
    let mut by_case: HashMap<String, usize> = HashMap::new();
    for (row_index, row) in rows.iter().enumerate() {
        let line = row_index + 2;
        let cell = |i: usize| row.get(i).unwrap_or("");
        let case_id = cell(case_col);
        if case_id.is_empty() {
            return Err(Error::Csv(format!("row {line}: empty case identifier")));
        }
        let activity = cell(activity_col);
        if activity.is_empty() {
            return Err(Error::Csv(format!("row {line}: empty activity")));
        }
        let timestamp = Timestamp::parse(cell(timestamp_col)).ok_or_else(|| {
            Error::Csv(format!(
                "row {line}: invalid timestamp `{}`",
                cell(timestamp_col)
            ))
        })?;

        let mut attributes = AttributeMap::new();
        for &(i, name, declared) in &attribute_columns {
            if matches!(name, ACTIVITY_KEY | TIMESTAMP_KEY | CASE_KEY) {
                continue;
            }
            let raw = cell(i);
            let value = if raw.is_empty() {
                AttributeValue::Null
            } else {
                declared.parse_value(raw).unwrap_or_else(|| {
                    warnings.push(format!(
                        "row {line} column `{name}`: `{raw}` is not a valid {declared}; stored as null"
                    ));
                    AttributeValue::Null
                })
            };
            attributes.insert(name.to_owned(), value);
        }
        let mut event = Event::new(case_id, activity, timestamp);
        event.attributes.append(&mut attributes);

        let slot = *by_case.entry(case_id.to_owned()).or_insert_with(|| {
            order.push((case_id.to_owned(), Vec::new()));
            order.len() - 1
        });
        order[slot].1.push(event);
    }

    let traces = order
        .into_iter()
        .map(|(case_id, events)| Trace::new(case_id, events))
        .collect();
    Ok(Ingested {
        log: EventLog::new(mapping.source_name.clone(), traces),
        warnings,
    })
}

/// Narrowest type that parses every non-empty cell.
fn infer_column<'a>(cells: impl Iterator<Item = &'a str> + Clone) -> ValueType {
    let non_empty = cells.filter(|c| !c.is_empty());
    if non_empty.clone().next().is_none() {
        return ValueType::Text;
    }
    [
        ValueType::Whole,
        ValueType::Real,
        ValueType::Flag,
        ValueType::Stamp,
    ]
    .into_iter()
    .find(|ty| non_empty.clone().all(|c| ty.parse_value(c).is_some()))
    .unwrap_or(ValueType::Text)
}
