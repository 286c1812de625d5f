//! Rendering and serialization of data-enhanced process models.

mod dot;
mod json;

pub use self::dot::{to_dot, RankDirection, RenderOptions};
pub use self::json::{from_json, to_json, to_json_value, SCHEMA_VERSION};
