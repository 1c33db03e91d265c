use std::path::Path;
use std::sync::Arc;

use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use serde::{Deserialize, Serialize};

use super::{FunctionalSpec, StructureMode};
use crate::error::{Error, Result};
use crate::young::{parse_function, FunctionSpec, YoungFunction};

/// Scalar expression in the coordinates `x1, x2, ...` (also `x, y, z`) and `pi`.
#[derive(Clone, Debug)]
pub struct Expression {
    source: String,
    tree: Node<DefaultNumericTypes>,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| Error::Config(format!("cannot parse expression `{source}`: {e}")))?;
        Ok(Self { source: source.to_string(), tree })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        let mut set = |name: &str, v: f64| {
            ctx.set_value(name.to_string(), Value::Float(v)).map_err(|e| Error::Config(e.to_string()))
        };
        set("pi", std::f64::consts::PI)?;
        for (i, v) in x.iter().enumerate() {
            set(&format!("x{}", i + 1), *v)?;
            if let Some(alias) = ["x", "y", "z"].get(i) {
                set(alias, *v)?;
            }
        }
        let v = self
            .tree
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::Config(format!("cannot evaluate `{}`: {e}", self.source)))?;
        if v.is_finite() { Ok(v) } else { Err(Error::Config(format!("`{}` is not finite at {x:?}", self.source))) }
    }

    /// Closure form; evaluation errors surface as NaN and are caught by `discretize`.
    pub fn to_field(&self) -> Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> {
        let e = self.clone();
        Arc::new(move |x: &[f64]| e.eval(x).unwrap_or(f64::NAN))
    }
}

/// A Young function given either as shorthand text or as a spec document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionArg {
    Text(String),
    Spec(FunctionSpec),
}

impl FunctionArg {
    pub fn build(&self) -> Result<YoungFunction> {
        match self {
            FunctionArg::Text(s) => parse_function(s),
            FunctionArg::Spec(s) => s.build(),
        }
    }
}

fn default_theta() -> String {
    "1".into()
}
fn default_tol() -> f64 {
    1e-12
}
fn default_max_iters() -> usize {
    20_000
}
fn default_cells() -> usize {
    16
}

/// Problem configuration document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub n: usize,
    #[serde(default = "default_cells")]
    pub cells: usize,
    pub boundary: String,
    #[serde(default = "default_theta")]
    pub theta: String,
    pub a: FunctionArg,
    pub b: FunctionArg,
    #[serde(default)]
    pub e: Option<FunctionArg>,
    #[serde(default)]
    pub e_coef: f64,
    #[serde(default)]
    pub structure: StructureMode,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn functional(&self) -> Result<FunctionalSpec> {
        let boundary = Expression::parse(&self.boundary)?;
        let theta = Expression::parse(&self.theta)?;
        let probe = vec![0.5; self.n];
        boundary.eval(&probe)?;
        theta.eval(&probe)?;
        let mut spec = FunctionalSpec::new(self.n, self.a.build()?, self.b.build()?)
            .with_boundary(boundary.to_field())
            .with_theta(theta.to_field())
            .with_structure(self.structure);
        if let Some(e) = &self.e {
            spec = spec.with_e(e.build()?, self.e_coef);
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_sees_coordinates() {
        let e = Expression::parse("x1 + 2 * x2 + math::sin(pi * z)").unwrap();
        assert!((e.eval(&[1.0, 0.5, 0.5]).unwrap() - 3.0).abs() < 1e-15);
        let t = Expression::parse("if(x1 < 0.5, 1.0, 0.0)").unwrap();
        assert_eq!(t.eval(&[0.2, 0.0]).unwrap(), 1.0);
        assert_eq!(t.eval(&[0.7, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn integer_expressions_are_numbers() {
        assert_eq!(Expression::parse("1").unwrap().eval(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn bad_expressions_are_config_errors() {
        assert!(matches!(Expression::parse("(x1 + 1"), Err(Error::Config(_))));
        assert!(matches!(Expression::parse("w").unwrap().eval(&[0.0]), Err(Error::Config(_))));
    }

    #[test]
    fn document_round_trip() {
        let doc = r#"{"n": 2, "boundary": "x1", "a": "power:2", "b": {"kind": "power", "p": 3.0}}"#;
        let c = ProblemConfig::from_json(doc).unwrap();
        assert_eq!(c.cells, 16);
        assert_eq!(c.theta, "1");
        let f = c.functional().unwrap();
        assert_eq!(f.n, 2);
        assert!(ProblemConfig::from_json(r#"{"n": 2, "boundary": "x1", "a": "power:2", "b": "power:2", "bogus": 1}"#).is_err());
    }
}
