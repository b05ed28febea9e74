//! JSON/YAML documents with key-path error messages.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::{Error, Result};

/// Parses `text` as JSON or YAML. YAML goes through a JSON value so enums
/// read the same `{variant: ...}` shape in both formats.
pub(crate) fn parse<T: DeserializeOwned>(text: &str, json: bool) -> Result<T> {
    let located = |e: serde_path_to_error::Error<serde_json::Error>| {
        Error::config(format!("{}: {}", e.path(), e.inner()))
    };
    if json {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(located)
    } else {
        let value: serde_json::Value =
            serde_yaml::from_str(text).map_err(|e| Error::config(format!("invalid YAML: {e}")))?;
        serde_path_to_error::deserialize(value).map_err(located)
    }
}

/// Reads a document: `.json` files as JSON, anything else as YAML.
pub(crate) fn load<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {what} {}: {e}", path.display())))?;
    parse(&text, is_json(path))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}
