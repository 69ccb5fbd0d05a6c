use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad config file, value or flag (exit 2).
    Config(String),
    /// Output directory cannot be created or written (exit 3).
    Output(String),
    /// Anything that goes wrong while computing (exit 1).
    Run(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Output(_) => 3,
            Failure::Run(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config: {m}"),
            Failure::Output(m) => write!(f, "output: {m}"),
            Failure::Run(m) => write!(f, "{m}"),
        }
    }
}

impl From<locinfo::Error> for Failure {
    fn from(e: locinfo::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

/// Maps model-construction errors to config errors: constructors only fail
/// on invalid inputs.
pub fn invalid(e: locinfo::Error) -> Failure {
    match e {
        locinfo::Error::InvalidArgument(m) => Failure::Config(m),
        other => Failure::Config(other.to_string()),
    }
}

/// Reads a config file (TOML, or JSON for `.json`), falling back to
/// defaults when no path is given. Errors name the offending key.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let value: serde_json::Value = if is_json {
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
    };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let key = e.path().to_string();
        Failure::Config(format!("key `{key}`: {}", e.inner()))
    })
}

pub fn require(cond: bool, key: &str, msg: &str) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure::Config(format!("{key}: {msg}")))
    }
}
