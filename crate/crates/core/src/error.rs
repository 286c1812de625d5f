use std::fmt;

use crate::aggregation::FunctionKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("XML syntax error at byte {position}: {message}")]
    Xml { position: u64, message: String },

    #[error("invalid XES at byte {position}: {message}")]
    Xes { position: u64, message: String },

    #[error("trace {trace}{}: missing mandatory attribute `{attribute}`", event.map(|e| format!(" event {e}")).unwrap_or_default())]
    MissingMandatory {
        trace: usize,
        event: Option<usize>,
        attribute: String,
    },

    #[error("CSV: {0}")]
    Csv(String),

    #[error("mapped column `{0}` not found in CSV header")]
    MissingColumn(String),

    #[error("CSV input contains no data rows")]
    NoDataRows,

    #[error("event log is empty")]
    EmptyLog,

    #[error("threshold {name} = {value} outside [0, 1]")]
    Threshold { name: &'static str, value: f64 },

    #[error("unknown activity `{0}`")]
    UnknownActivity(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("{function} cannot be applied to attribute `{attribute}`; applicable: {}", KindList(.applicable))]
    Inapplicable {
        attribute: String,
        function: FunctionKind,
        applicable: Vec<FunctionKind>,
    },

    #[error("{0} is undefined on an empty value multiset")]
    EmptyMultiset(FunctionKind),

    #[error("{function} requires numeric or timestamp values, found {found}")]
    NonNumeric {
        function: FunctionKind,
        found: &'static str,
    },

    #[error("invalid aggregation spec `{spec}`: {reason}")]
    AggregationSpec { spec: String, reason: String },

    #[error("invalid bins: {0}")]
    Bins(String),

    #[error("invalid generator config: {0}")]
    Config(String),

    #[error("unsupported document version `{found}`, expected `{expected}`")]
    Version { found: String, expected: String },

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct KindList<'a>(&'a [FunctionKind]);

impl fmt::Display for KindList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, kind) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{kind}")?;
        }
        Ok(())
    }
}
