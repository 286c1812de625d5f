use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use depm::aggregation::FunctionKind;
use depm::Error;
use serde::Serialize;

/// JSON error body: a stable `error` code, a human message and optional
/// details.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub applicable: Option<Vec<FunctionKind>>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error,
                message: message.into(),
                position: None,
                applicable: None,
            },
        }
    }

    pub fn not_found(what: &'static str, id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, what, format!("no such {}: {id}", what.trim_start_matches("unknown_")))
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl From<Error> for ApiError {
    fn from(error: Error) -> Self {
        use StatusCode as S;
        let message = error.to_string();
        let (status, code) = match &error {
            Error::Xml { .. } | Error::Xes { .. } | Error::MissingMandatory { .. } => (S::BAD_REQUEST, "parse_error"),
            Error::Csv(_) | Error::MissingColumn(_) | Error::NoDataRows => (S::BAD_REQUEST, "parse_error"),
            Error::AggregationSpec { .. } | Error::Json(_) | Error::Version { .. } => (S::BAD_REQUEST, "bad_request"),
            Error::UnknownActivity(_) => (S::NOT_FOUND, "unknown_activity"),
            Error::UnknownAttribute(_) => (S::UNPROCESSABLE_ENTITY, "unknown_attribute"),
            Error::Inapplicable { .. } => (S::UNPROCESSABLE_ENTITY, "inapplicable_function"),
            Error::EmptyMultiset(_) | Error::NonNumeric { .. } => (S::UNPROCESSABLE_ENTITY, "aggregation_failed"),
            Error::EmptyLog | Error::Threshold { .. } | Error::Bins(_) | Error::Config(_) => {
                (S::UNPROCESSABLE_ENTITY, "invalid_argument")
            }
            Error::Io(_) => (S::INTERNAL_SERVER_ERROR, "io_error"),
        };
        let mut api = ApiError::new(status, code, message);
        match error {
            Error::Xml { position, .. } | Error::Xes { position, .. } => api.body.position = Some(position),
            Error::Inapplicable { applicable, .. } => api.body.applicable = Some(applicable),
            _ => {}
        }
        api
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
