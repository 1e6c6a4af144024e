//! Task registry. A task declares the coordinates a grid point binds, the
//! columns it emits and how to evaluate one point.

mod ale;
mod geometry;
mod twistor;

use std::collections::{BTreeMap, BTreeSet};

use hforge_core::analytic::{parse_expr, ContourSpec, Expr};
use num_complex::Complex64;

use crate::config::{Params, TaskConfig};
use crate::error::CliError;
use crate::table::Cell;

pub type C = Complex64;

pub const TASKS: [&str; 13] = [
    "check-heavenly",
    "hierarchy-check",
    "recursion-chain",
    "gh-build",
    "legendre",
    "f-from-g",
    "psi-field",
    "constraints",
    "sigma",
    "ale-degrees",
    "ale-patch",
    "ale-potential",
    "curvature",
];

/// One emitted row: output cells and the residual checked against the
/// tolerance.
#[derive(Debug, Clone)]
pub struct Row {
    pub cells: Vec<Cell>,
    pub residual: f64,
}

impl Row {
    pub fn new(cells: Vec<Cell>, residual: f64) -> Self {
        Self { cells, residual }
    }
}

pub trait Task: Sync {
    fn columns(&self) -> Vec<String>;

    /// `point` holds the values of [`Inputs::coordinates`] in order.
    fn evaluate(&self, point: &[C]) -> hforge_core::Result<Vec<Row>>;
}

/// A grid coordinate. Optional coordinates not referenced by any expression
/// default to zero when unbound.
#[derive(Debug, Clone)]
pub struct Coordinate {
    pub name: String,
    pub required: bool,
}

/// Expression and parameter access for task builders. Constants named after a
/// coordinate fix that coordinate; all others are substituted into every
/// expression.
pub struct Inputs<'a> {
    config: &'a TaskConfig,
    constants: BTreeMap<String, C>,
    coordinates: Vec<Coordinate>,
    referenced: BTreeSet<String>,
}

impl<'a> Inputs<'a> {
    pub fn new(config: &'a TaskConfig) -> Result<Self, CliError> {
        Ok(Self {
            config,
            constants: config.constants()?,
            coordinates: Vec::new(),
            referenced: BTreeSet::new(),
        })
    }

    pub fn params(&self) -> Params<'a> {
        self.config.params()
    }

    pub fn coordinates(&self) -> &[Coordinate] {
        &self.coordinates
    }

    pub fn set_coordinates<S: AsRef<str>>(&mut self, names: &[S], required: bool) {
        self.coordinates = names
            .iter()
            .map(|n| Coordinate {
                name: n.as_ref().to_string(),
                required,
            })
            .collect();
    }

    fn is_coordinate(&self, name: &str) -> bool {
        self.coordinates.iter().any(|c| c.name == name)
    }

    /// Parses `src`, substitutes constants and checks that every remaining
    /// variable is a coordinate or one of `internal`.
    pub fn parse(&mut self, label: &str, src: &str, internal: &[&str]) -> Result<Expr, CliError> {
        let mut e = parse_expr(src).map_err(|err| CliError::expression(label, err))?;
        let subs: Vec<(&str, Expr)> = self
            .constants
            .iter()
            .filter(|(k, _)| !self.is_coordinate(k))
            .map(|(k, v)| (k.as_str(), Expr::constant(*v)))
            .collect();
        if !subs.is_empty() {
            e = e.subs_all(&subs);
        }
        for v in e.vars() {
            if self.is_coordinate(&v) {
                self.referenced.insert(v);
            } else if !internal.contains(&v.as_str()) {
                return Err(CliError::UnboundVariable(v));
            }
        }
        Ok(e)
    }

    pub fn opt_expr(&mut self, name: &str, internal: &[&str]) -> Result<Option<Expr>, CliError> {
        match self.config.expressions.get(name) {
            None => Ok(None),
            Some(src) => self.parse(name, src, internal).map(Some),
        }
    }

    pub fn expr(&mut self, name: &str, internal: &[&str]) -> Result<Expr, CliError> {
        self.opt_expr(name, internal)?
            .ok_or_else(|| CliError::Config(format!("task needs the expression `{name}`")))
    }

    pub fn expr_or(&mut self, name: &str, default: &str, internal: &[&str]) -> Result<Expr, CliError> {
        match self.config.expressions.get(name) {
            Some(src) => self.parse(name, src, internal),
            None => self.parse(name, default, internal),
        }
    }

    /// Parses a list-of-strings parameter as expressions.
    pub fn expr_list(&mut self, name: &str, internal: &[&str]) -> Result<Vec<Expr>, CliError> {
        let srcs = self.params().str_list(name)?;
        srcs.iter()
            .enumerate()
            .map(|(i, s)| self.parse(&format!("{name}[{i}]"), s, internal))
            .collect()
    }

    pub fn contour(&self) -> Result<ContourSpec, CliError> {
        let p = self.params();
        let spec = ContourSpec::circle(p.complex("center", C::new(0.0, 0.0))?, p.f64("radius", 1.0)?)
            .with_nodes(p.usize("nodes", 512)?);
        spec.validate()?;
        Ok(spec)
    }

    /// How each coordinate is obtained: a grid column, a constant, or zero.
    pub fn binding(&self, grid_vars: &[String]) -> Result<Vec<Source>, CliError> {
        for g in grid_vars {
            if !self.is_coordinate(g) {
                let names: Vec<&str> = self.coordinates.iter().map(|c| c.name.as_str()).collect();
                return Err(CliError::Config(format!(
                    "grid variable `{g}` is not a coordinate of this task (coordinates: {names:?})"
                )));
            }
        }
        self.coordinates
            .iter()
            .map(|c| {
                if let Some(j) = grid_vars.iter().position(|g| *g == c.name) {
                    Ok(Source::Grid(j))
                } else if let Some(v) = self.constants.get(&c.name) {
                    Ok(Source::Fixed(*v))
                } else if c.required || self.referenced.contains(&c.name) {
                    Err(CliError::UnboundVariable(c.name.clone()))
                } else {
                    Ok(Source::Fixed(C::new(0.0, 0.0)))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Grid(usize),
    Fixed(C),
}

pub fn build<'a>(config: &'a TaskConfig) -> Result<(Box<dyn Task>, Inputs<'a>), CliError> {
    let mut inputs = Inputs::new(config)?;
    let task: Box<dyn Task> = match config.task.as_str() {
        "check-heavenly" => Box::new(geometry::CheckHeavenly::build(&mut inputs)?),
        "hierarchy-check" => Box::new(geometry::HierarchyCheck::build(&mut inputs)?),
        "recursion-chain" => Box::new(geometry::RecursionChain::build(&mut inputs)?),
        "gh-build" => Box::new(geometry::GhBuild::build(&mut inputs)?),
        "legendre" => Box::new(geometry::Legendre::build(&mut inputs)?),
        "curvature" => Box::new(geometry::Curvature::build(&mut inputs)?),
        "f-from-g" => Box::new(twistor::FFromG::build(&mut inputs)?),
        "psi-field" => Box::new(twistor::PsiField::build(&mut inputs)?),
        "constraints" => Box::new(twistor::Constraints::build(&mut inputs)?),
        "sigma" => Box::new(twistor::Sigma::build(&mut inputs)?),
        "ale-degrees" => Box::new(ale::AleDegrees::build(&mut inputs)?),
        "ale-patch" => Box::new(ale::AlePatch::build(&mut inputs)?),
        "ale-potential" => Box::new(ale::AlePotential::build(&mut inputs)?),
        other => return Err(CliError::UnknownTask(other.to_string())),
    };
    Ok((task, inputs))
}

/// Maximum that propagates NaN, so a failed evaluation cannot pass.
pub(crate) fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

pub(crate) fn norm_max(values: impl IntoIterator<Item = C>) -> f64 {
    values.into_iter().map(|v| v.norm()).fold(0.0, worst)
}
