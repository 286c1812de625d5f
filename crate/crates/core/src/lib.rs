//! Data-enhanced process models.
//!
//! The crate discovers a gateway-free, frequency-annotated process model (a
//! directly-follows graph with artificial start and end nodes) from an event
//! log and attaches event attribute aggregations to its activities. Every
//! activity of the model stands for all events carrying its name, so an
//! aggregation summarizes the attribute values of exactly those events.
//!
//! The typical pipeline:
//!
//! ```
//! use depm::aggregation::AggregationFunction;
//! use depm::discovery::discover_model;
//! use depm::enhancement::{enhance, AggregationRequest};
//! use depm::synthlog::{generate, GeneratorConfig};
//!
//! let config = GeneratorConfig { trace_count: 50, ..GeneratorConfig::default() };
//! let (log, _manifest) = generate(&config).unwrap();
//! let model = discover_model(&log, 0.0, 0.0).unwrap();
//! let request = AggregationRequest::new(
//!     "Analyse Troponin T Value",
//!     "flag",
//!     AggregationFunction::Percentage("abnormal_high".into()),
//! );
//! let enhanced = enhance(&model, &log, &[request]);
//! assert!(enhanced.rejected.is_empty());
//! println!("{}", depm::export::to_dot(&enhanced.dep, &Default::default()));
//! ```
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod aggregation;
pub mod discovery;
pub mod enhancement;
mod error;
pub mod eventlog;
pub mod export;
pub mod synthlog;
pub mod variants;

pub use error::{Error, Result};
pub use eventlog::{AttributeValue, Event, EventLog, Timestamp, Trace};
