use std::fs;
use std::path::Path;

use popa_core::{Element, GsSolution, SigmaMatrix};
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::CliError;

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Deserializes with the JSON path of the offending field in the message.
pub fn parse<T: DeserializeOwned>(v: Value, what: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." {
            what.to_string()
        } else {
            format!("{what}: field `{path}`")
        };
        CliError::Input(format!("{at}: {}", e.into_inner()))
    })
}

/// A solution object, or any report carrying one under `solution`.
pub fn solution(v: Value) -> Result<GsSolution, CliError> {
    match v {
        Value::Object(mut m) if m.contains_key("solution") => parse(m.remove("solution").unwrap(), "solution"),
        other => parse(other, "solution"),
    }
}

pub enum ClassifyInput {
    Sigma(SigmaMatrix),
    Solution(GsSolution),
}

pub fn classify_input(v: Value) -> Result<ClassifyInput, CliError> {
    match v {
        Value::Array(_) => Ok(ClassifyInput::Sigma(parse(v, "sigma")?)),
        Value::Object(mut m) if m.contains_key("sigma") => {
            Ok(ClassifyInput::Sigma(parse(m.remove("sigma").unwrap(), "sigma")?))
        }
        other => Ok(ClassifyInput::Solution(solution(other)?)),
    }
}

/// `{"solution": ..., "<key>": [coords], "t_grid": [...]?}`.
pub struct PointInput {
    pub solution: GsSolution,
    pub point: Element,
    pub t_grid: Option<Vec<f64>>,
}

pub fn point_input(v: Value, key: &str) -> Result<PointInput, CliError> {
    let Value::Object(mut m) = v else {
        return Err(CliError::Input(format!(
            "expected an object with `solution` and `{key}`"
        )));
    };
    let sol: GsSolution = parse(
        m.remove("solution")
            .ok_or_else(|| CliError::Input("missing field `solution`".into()))?,
        "solution",
    )?;
    let coords: Vec<f64> = parse(
        m.remove(key)
            .ok_or_else(|| CliError::Input(format!("missing field `{key}`")))?,
        key,
    )?;
    let point =
        Element::new(sol.algebra().clone(), coords).map_err(|e| CliError::Input(format!("field `{key}`: {e}")))?;
    let t_grid = m.remove("t_grid").map(|g| parse(g, "t_grid")).transpose()?;
    Ok(PointInput {
        solution: sol,
        point,
        t_grid,
    })
}
