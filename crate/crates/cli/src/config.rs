//! Task configuration: a JSON document with the task name, expression
//! bindings, constants, numeric parameters, the sample grid and output paths.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;
use crate::table::parse_complex;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub task: String,
    #[serde(default)]
    pub expressions: BTreeMap<String, String>,
    #[serde(default)]
    pub constants: BTreeMap<String, Value>,
    #[serde(default)]
    pub params: Map<String, Value>,
    /// Variable name to either a list of values or `{"linspace": [a, b, n]}`,
    /// in declaration order.
    #[serde(default)]
    pub grid: Map<String, Value>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<String>,
    pub report: Option<String>,
}

impl TaskConfig {
    pub fn from_json(text: &str, source_name: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            source_name: source_name.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn constants(&self) -> Result<BTreeMap<String, Complex64>, CliError> {
        self.constants
            .iter()
            .map(|(k, v)| Ok((k.clone(), value_to_complex(v, &format!("constant `{k}`"))?)))
            .collect()
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let mut vars = Vec::new();
        let mut values = Vec::new();
        for (name, spec) in &self.grid {
            let what = format!("grid variable `{name}`");
            let v = match spec {
                Value::Array(items) => items
                    .iter()
                    .map(|x| value_to_complex(x, &what))
                    .collect::<Result<Vec<_>, _>>()?,
                Value::Object(obj) => match obj.get("linspace") {
                    Some(Value::Array(t)) if t.len() == 3 && obj.len() == 1 => {
                        let a = value_to_complex(&t[0], &what)?;
                        let b = value_to_complex(&t[1], &what)?;
                        let n = t[2].as_u64().filter(|&n| n >= 1).ok_or_else(|| {
                            CliError::Config(format!("{what}: linspace count must be a positive integer"))
                        })?;
                        linspace(a, b, n as usize)
                    }
                    _ => {
                        return Err(CliError::Config(format!(
                            "{what}: expected {{\"linspace\": [start, stop, count]}}"
                        )))
                    }
                },
                _ => return Err(CliError::Config(format!("{what}: expected a list or a linspace"))),
            };
            if v.is_empty() {
                return Err(CliError::Config(format!("{what}: no values")));
            }
            vars.push(name.clone());
            values.push(v);
        }
        Ok(Grid { vars, values })
    }

    pub fn params(&self) -> Params<'_> {
        Params(&self.params)
    }
}

fn linspace(a: Complex64, b: Complex64, n: usize) -> Vec<Complex64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * (i as f64 / (n - 1) as f64)).collect()
}

pub fn value_to_complex(v: &Value, what: &str) -> Result<Complex64, CliError> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| Complex64::new(x, 0.0)),
        Value::String(s) => parse_complex(s),
        _ => None,
    }
    .ok_or_else(|| CliError::Config(format!("{what}: expected a number or an \"a+bi\" string, found {v}")))
}

/// Cartesian grid, enumerated lexicographically in declaration order (the last
/// variable varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub vars: Vec<String>,
    pub values: Vec<Vec<Complex64>>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.values.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut index: usize) -> Vec<Complex64> {
        let mut p = vec![Complex64::new(0.0, 0.0); self.vars.len()];
        for (slot, vals) in p.iter_mut().zip(&self.values).rev() {
            *slot = vals[index % vals.len()];
            index /= vals.len();
        }
        p
    }
}

/// Typed access to the free-form `params` map.
#[derive(Debug, Clone, Copy)]
pub struct Params<'a>(&'a Map<String, Value>);

impl Params<'_> {
    fn bad(name: &str, expected: &str) -> CliError {
        CliError::Config(format!("parameter `{name}`: expected {expected}"))
    }

    pub fn usize(&self, name: &str, default: usize) -> Result<usize, CliError> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| Self::bad(name, "a non-negative integer")),
        }
    }

    pub fn opt_usize(&self, name: &str) -> Result<Option<usize>, CliError> {
        self.0.get(name).map(|_| self.usize(name, 0)).transpose()
    }

    pub fn f64(&self, name: &str, default: f64) -> Result<f64, CliError> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| Self::bad(name, "a number")),
        }
    }

    pub fn opt_f64(&self, name: &str) -> Result<Option<f64>, CliError> {
        self.0.get(name).map(|_| self.f64(name, 0.0)).transpose()
    }

    pub fn complex(&self, name: &str, default: Complex64) -> Result<Complex64, CliError> {
        self.opt_complex(name).map(|v| v.unwrap_or(default))
    }

    pub fn opt_complex(&self, name: &str) -> Result<Option<Complex64>, CliError> {
        self.0
            .get(name)
            .map(|v| value_to_complex(v, &format!("parameter `{name}`")))
            .transpose()
    }

    pub fn str(&self, name: &str) -> Result<Option<&str>, CliError> {
        match self.0.get(name) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(Self::bad(name, "a string")),
        }
    }

    pub fn str_list(&self, name: &str) -> Result<Vec<String>, CliError> {
        match self.0.get(name) {
            None => Ok(Vec::new()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(String::from)
                        .ok_or_else(|| Self::bad(name, "a list of strings"))
                })
                .collect(),
            Some(_) => Err(Self::bad(name, "a list of strings")),
        }
    }
}
