use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConvexTable, Knot, TableTail, YoungFunction, YoungKind};
use crate::error::{Error, Result};

/// Document form of a Young function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Power {
        p: f64,
    },
    PowerLog {
        p: f64,
        alpha: f64,
    },
    ExpPoly {
        a: f64,
    },
    PiecewiseTable {
        knots: Vec<[f64; 3]>,
        #[serde(default)]
        finite_domain: bool,
    },
    LinearSplice {
        t1: f64,
        base: Box<FunctionSpec>,
    },
    Scaled {
        inner: Box<FunctionSpec>,
        lambda_arg: f64,
        lambda_val: f64,
    },
}

impl FunctionSpec {
    /// Builds and grid-validates the function; errors name the offending field.
    pub fn build(&self) -> Result<YoungFunction> {
        let y = self.build_at("$")?;
        y.validate_on_grid()?;
        Ok(y)
    }

    fn build_at(&self, path: &str) -> Result<YoungFunction> {
        let field = |name: &str, e: Error| Error::InvalidSpec {
            field: format!("{path}.{name}"),
            message: match e {
                Error::InvalidSpec { field, message } => format!("{field}: {message}"),
                other => other.to_string(),
            },
        };
        match self {
            FunctionSpec::Power { p } => YoungFunction::power(*p).map_err(|e| field("p", e)),
            FunctionSpec::PowerLog { p, alpha } => YoungFunction::power_log(*p, *alpha).map_err(|e| field("p/alpha", e)),
            FunctionSpec::ExpPoly { a } => YoungFunction::exp_poly(*a).map_err(|e| field("a", e)),
            FunctionSpec::PiecewiseTable { knots, finite_domain } => {
                let knots = knots.iter().map(|k| Knot::new(k[0], k[1], k[2])).collect();
                let tail = if *finite_domain { TableTail::Infinite } else { TableTail::Extrapolate };
                let table = ConvexTable::new(knots, tail).map_err(|e| field("knots", e))?;
                Ok(YoungFunction::table(table))
            }
            FunctionSpec::LinearSplice { t1, base } => {
                let base = base.build_at(&format!("{path}.base"))?;
                YoungFunction::linear_splice(*t1, base).map_err(|e| field("t1", e))
            }
            FunctionSpec::Scaled { inner, lambda_arg, lambda_val } => {
                let inner = inner.build_at(&format!("{path}.inner"))?;
                YoungFunction::scaled(inner, *lambda_arg, *lambda_val).map_err(|e| field("lambda_arg/lambda_val", e))
            }
        }
    }

    /// Recovers the document form; glued constructions have none.
    pub fn from_function(y: &YoungFunction) -> Option<FunctionSpec> {
        Some(match y.kind() {
            YoungKind::Power { p } => FunctionSpec::Power { p: *p },
            YoungKind::PowerLog { p, alpha, .. } => FunctionSpec::PowerLog { p: *p, alpha: *alpha },
            YoungKind::ExpPoly { a, .. } => FunctionSpec::ExpPoly { a: *a },
            YoungKind::LinearSplice { t1, base, .. } => {
                FunctionSpec::LinearSplice { t1: *t1, base: Box::new(Self::from_function(base)?) }
            }
            YoungKind::Scaled { inner, lambda_arg, lambda_val } => FunctionSpec::Scaled {
                inner: Box::new(Self::from_function(inner)?),
                lambda_arg: *lambda_arg,
                lambda_val: *lambda_val,
            },
            YoungKind::Table(tab) => FunctionSpec::PiecewiseTable {
                knots: tab.knots().iter().map(|k| [k.t, k.value, k.slope]).collect(),
                finite_domain: tab.tail() == TableTail::Infinite,
            },
            YoungKind::Glued(_) => return None,
        })
    }
}

/// Parses a function argument: shorthand (`power:2.5`, `powerlog:2:1`,
/// `exp:1.5`), an inline JSON document, or a path to a JSON document.
pub fn parse_function(arg: &str) -> Result<YoungFunction> {
    parse_spec(arg)?.build()
}

pub(crate) fn parse_spec(arg: &str) -> Result<FunctionSpec> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return serde_json::from_str(arg).map_err(|e| json_error("", e));
    }
    if let Some(spec) = shorthand(arg)? {
        return Ok(spec);
    }
    let path = Path::new(arg.strip_prefix('@').unwrap_or(arg));
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| json_error(&format!("{}: ", path.display()), e))
}

fn json_error(prefix: &str, e: serde_json::Error) -> Error {
    let field = if e.line() == 0 {
        format!("{prefix}$")
    } else {
        format!("{prefix}line {}, column {}", e.line(), e.column())
    };
    Error::InvalidSpec { field, message: e.to_string() }
}

fn shorthand(arg: &str) -> Result<Option<FunctionSpec>> {
    let mut parts = arg.split(':');
    let head = parts.next().unwrap_or_default();
    let nums: Vec<&str> = parts.collect();
    let num = |i: usize, name: &str| -> Result<f64> {
        let raw = nums.get(i).ok_or_else(|| Error::InvalidSpec {
            field: name.to_string(),
            message: format!("missing in shorthand `{arg}`"),
        })?;
        raw.parse::<f64>().map_err(|_| Error::InvalidSpec {
            field: name.to_string(),
            message: format!("`{raw}` is not a number"),
        })
    };
    let spec = match head {
        "power" => FunctionSpec::Power { p: num(0, "p")? },
        "powerlog" | "power_log" => FunctionSpec::PowerLog { p: num(0, "p")?, alpha: num(1, "alpha")? },
        "exp" | "exp_poly" => FunctionSpec::ExpPoly { a: num(0, "a")? },
        _ => return Ok(None),
    };
    Ok(Some(spec))
}
