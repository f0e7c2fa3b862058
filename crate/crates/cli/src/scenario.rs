//! Scenario files: parsing and validation against per-experiment schemas.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::experiments::{Experiment, Kind};
use crate::{CliError, Result};

/// A real number, or a complex one written as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    experiment: String,
    #[serde(default)]
    params: BTreeMap<String, Scalar>,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    outputs: Option<Vec<String>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    dt: Option<f64>,
    t_end: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub experiment: Experiment,
    /// Validated parameters with schema defaults filled in.
    pub params: BTreeMap<String, Scalar>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    /// Series columns to write; `None` writes everything.
    pub outputs: Option<Vec<String>>,
}

impl Scenario {
    /// Real parameter. Panics on names outside the schema, which validation
    /// rules out for loaded scenarios.
    pub fn real(&self, name: &str) -> f64 {
        match self.params.get(name) {
            Some(Scalar::Real(x)) => *x,
            other => panic!("parameter `{name}` is not a validated real: {other:?}"),
        }
    }

    pub fn opt_real(&self, name: &str) -> Option<f64> {
        match self.params.get(name) {
            Some(Scalar::Real(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn complex(&self, name: &str) -> Complex64 {
        match self.params.get(name) {
            Some(Scalar::Complex([re, im])) => Complex64::new(*re, *im),
            Some(Scalar::Real(x)) => Complex64::new(*x, 0.0),
            None => panic!("parameter `{name}` is not validated"),
        }
    }

    /// Non-negative integer parameter.
    pub fn count(&self, name: &str) -> Result<usize> {
        let x = self.real(name);
        if x < 0.0 || x.fract() != 0.0 || x > 1e9 {
            return Err(CliError::schema(
                format!("params.{name}"),
                format!("must be a non-negative integer, got {x}"),
            ));
        }
        Ok(x as usize)
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text, &path.display().to_string())
}

/// Parses and validates scenario text; `origin` labels parse errors.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(raw)
}

fn validate(raw: RawScenario) -> Result<Scenario> {
    let name_ok = !raw.name.is_empty()
        && raw.name != "."
        && raw.name != ".."
        && raw.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
    if !name_ok {
        return Err(CliError::schema("name", "use letters, digits, `-`, `_` or `.`"));
    }
    let experiment = Experiment::from_name(&raw.experiment).ok_or_else(|| {
        let known: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        CliError::schema(
            "experiment",
            format!("unknown experiment `{}`; known: {}", raw.experiment, known.join(", ")),
        )
    })?;
    let schema = experiment.schema();
    for key in raw.params.keys() {
        if !schema.iter().any(|p| p.name == key) {
            return Err(CliError::schema(
                format!("params.{key}"),
                format!("not a parameter of {}", experiment.name()),
            ));
        }
    }
    let mut params = BTreeMap::new();
    for spec in schema {
        let field = format!("params.{}", spec.name);
        let value = match (raw.params.get(spec.name), spec.default) {
            (Some(v), _) => *v,
            (None, Some(d)) => Scalar::Real(d),
            (None, None) if spec.optional => continue,
            (None, None) => return Err(CliError::schema(field, "required")),
        };
        let finite = match value {
            Scalar::Real(x) => x.is_finite(),
            Scalar::Complex([a, b]) => a.is_finite() && b.is_finite(),
        };
        if !finite {
            return Err(CliError::schema(field, "must be finite"));
        }
        if spec.kind == Kind::Real && matches!(value, Scalar::Complex(_)) {
            return Err(CliError::schema(field, "expects a real number"));
        }
        params.insert(spec.name.to_string(), value);
    }
    for (field, v) in [
        ("integrator.dt", raw.integrator.dt),
        ("integrator.t_end", raw.integrator.t_end),
    ] {
        if let Some(x) = v {
            if !(x > 0.0 && x.is_finite()) {
                return Err(CliError::schema(field, format!("must be positive, got {x}")));
            }
        }
    }
    if let Some(outputs) = &raw.outputs {
        let columns = experiment.columns();
        for col in outputs {
            if !columns.contains(&col.as_str()) {
                return Err(CliError::schema(
                    "outputs",
                    format!(
                        "`{col}` is not a series of {}; available: {}",
                        experiment.name(),
                        columns.join(", ")
                    ),
                ));
            }
        }
    }
    Ok(Scenario {
        name: raw.name,
        experiment,
        params,
        dt: raw.integrator.dt,
        t_end: raw.integrator.t_end,
        outputs: raw.outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_and_real_scalars() {
        let s = parse_scenario(
            r#"{"name": "g", "experiment": "gisin-telegraph",
                "params": {"alpha": [0.6, 0.0], "beta": [0.0, 0.8], "eps": 0.2}}"#,
            "inline",
        )
        .unwrap();
        assert_eq!(s.complex("beta"), Complex64::new(0.0, 0.8));
        assert_eq!(s.real("eps"), 0.2);
        // defaults are filled in
        assert_eq!(s.real("e1"), 0.3);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_scenario("{\n  \"name\": \"x\",\n  oops\n}", "cfg.json").unwrap_err();
        match err {
            CliError::Parse { line, column, .. } => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        let cases = [
            (r#"{"name": "x", "experiment": "nope"}"#, "experiment"),
            (
                r#"{"name": "x", "experiment": "gisin-telegraph", "params": {"beta": 0.5}}"#,
                "params.alpha",
            ),
            (
                r#"{"name": "x", "experiment": "eigen-census", "params": {"eps": 1, "zzz": 2}}"#,
                "params.zzz",
            ),
            (
                r#"{"name": "x", "experiment": "eigen-census", "params": {"eps": [1, 0]}}"#,
                "params.eps",
            ),
            (
                r#"{"name": "x", "experiment": "bloch-neoclassical", "integrator": {"dt": -1}}"#,
                "integrator.dt",
            ),
            (
                r#"{"name": "x", "experiment": "bloch-neoclassical", "outputs": ["zz"]}"#,
                "outputs",
            ),
            (r#"{"name": "../up", "experiment": "bloch-neoclassical"}"#, "name"),
        ];
        for (text, want) in cases {
            match parse_scenario(text, "inline").unwrap_err() {
                CliError::Schema { field, .. } => assert_eq!(field, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
