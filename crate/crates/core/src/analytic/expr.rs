//! Complex-scalar expression trees.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::jet::{Jet, JetShape};
use crate::error::{Error, Result};

/// An expression in named variables over the complex numbers.
///
/// Children are shared, so cloning is cheap. The arithmetic operators and the
/// helper constructors fold constants and drop additive zeros and
/// multiplicative ones; they never reorder terms.
#[derive(Clone, PartialEq)]
pub enum Expr {
    Var(Arc<str>),
    Const(Complex64),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Pow(Arc<Expr>, i32),
    Ln(Arc<Expr>),
    Sqrt(Arc<Expr>),
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Arc::from(name))
    }

    pub fn real(value: f64) -> Expr {
        Expr::Const(Complex64::new(value, 0.0))
    }

    pub fn constant(value: Complex64) -> Expr {
        Expr::Const(value)
    }

    pub fn zero() -> Expr {
        Expr::real(0.0)
    }

    pub fn one() -> Expr {
        Expr::real(1.0)
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(zero())
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(one())
    }

    pub fn powi(&self, n: i32) -> Expr {
        match (self, n) {
            (_, 0) => Expr::one(),
            (_, 1) => self.clone(),
            (Expr::Const(c), n) if n > 0 || c.norm() != 0.0 => Expr::Const(c.powi(n)),
            (Expr::Pow(base, m), n) => Expr::Pow(base.clone(), m * n),
            _ => Expr::Pow(Arc::new(self.clone()), n),
        }
    }

    pub fn ln(&self) -> Expr {
        Expr::Ln(Arc::new(self.clone()))
    }

    pub fn sqrt(&self) -> Expr {
        Expr::Sqrt(Arc::new(self.clone()))
    }

    /// Free variables of the tree.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.to_string());
            }
            Expr::Const(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Ln(a) | Expr::Sqrt(a) => a.collect_vars(out),
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self {
            Expr::Var(v) => &**v == name,
            Expr::Const(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(name) || b.depends_on(name)
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Ln(a) | Expr::Sqrt(a) => a.depends_on(name),
        }
    }

    /// Fails if the tree mentions a variable outside `declared`.
    pub fn check_declared<S: AsRef<str>>(&self, declared: &[S]) -> Result<()> {
        for v in self.vars() {
            if !declared.iter().any(|d| d.as_ref() == v) {
                return Err(Error::UndeclaredVariable {
                    name: v,
                    declared: declared.iter().map(|d| d.as_ref().to_string()).collect(),
                });
            }
        }
        Ok(())
    }

    /// Symbolic partial derivative.
    pub fn diff(&self, name: &str) -> Expr {
        if !self.depends_on(name) {
            return Expr::zero();
        }
        match self {
            Expr::Var(_) => Expr::one(),
            Expr::Const(_) => Expr::zero(),
            Expr::Add(a, b) => a.diff(name) + b.diff(name),
            Expr::Sub(a, b) => a.diff(name) - b.diff(name),
            Expr::Mul(a, b) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                a.diff(name) * b.clone() + a.clone() * b.diff(name)
            }
            Expr::Div(a, b) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                if !b.depends_on(name) {
                    return a.diff(name) / b.clone();
                }
                (a.diff(name) * b.clone() - a.clone() * b.diff(name)) / b.powi(2)
            }
            Expr::Neg(a) => -a.diff(name),
            Expr::Pow(a, n) => Expr::real(f64::from(*n)) * a.powi(n - 1) * a.diff(name),
            Expr::Ln(a) => a.diff(name) / a.as_ref().clone(),
            Expr::Sqrt(a) => a.diff(name) / (Expr::real(2.0) * self.clone()),
        }
    }

    /// Repeated partial derivative, one variable name per order.
    pub fn diff_many(&self, names: &[&str]) -> Expr {
        names.iter().fold(self.clone(), |acc, n| acc.diff(n))
    }

    /// Replaces every occurrence of `name` with `value`.
    pub fn subs(&self, name: &str, value: &Expr) -> Expr {
        if !self.depends_on(name) {
            return self.clone();
        }
        match self {
            Expr::Var(v) if &**v == name => value.clone(),
            Expr::Var(_) | Expr::Const(_) => self.clone(),
            Expr::Add(a, b) => a.subs(name, value) + b.subs(name, value),
            Expr::Sub(a, b) => a.subs(name, value) - b.subs(name, value),
            Expr::Mul(a, b) => a.subs(name, value) * b.subs(name, value),
            Expr::Div(a, b) => a.subs(name, value) / b.subs(name, value),
            Expr::Neg(a) => -a.subs(name, value),
            Expr::Pow(a, n) => a.subs(name, value).powi(*n),
            Expr::Ln(a) => a.subs(name, value).ln(),
            Expr::Sqrt(a) => a.subs(name, value).sqrt(),
        }
    }

    /// Simultaneous substitution.
    pub fn subs_all(&self, map: &[(&str, Expr)]) -> Expr {
        match self {
            Expr::Var(v) => map
                .iter()
                .find(|(n, _)| *n == &**v)
                .map(|(_, e)| e.clone())
                .unwrap_or_else(|| self.clone()),
            Expr::Const(_) => self.clone(),
            Expr::Add(a, b) => a.subs_all(map) + b.subs_all(map),
            Expr::Sub(a, b) => a.subs_all(map) - b.subs_all(map),
            Expr::Mul(a, b) => a.subs_all(map) * b.subs_all(map),
            Expr::Div(a, b) => a.subs_all(map) / b.subs_all(map),
            Expr::Neg(a) => -a.subs_all(map),
            Expr::Pow(a, n) => a.subs_all(map).powi(*n),
            Expr::Ln(a) => a.subs_all(map).ln(),
            Expr::Sqrt(a) => a.subs_all(map).sqrt(),
        }
    }

    /// Evaluates over an arbitrary [`Algebra`].
    pub fn eval_in<A: Algebra>(&self, alg: &A, env: &dyn Fn(&str) -> Option<A::Value>) -> Result<A::Value> {
        let singular = |reason: String| Error::SingularEvaluation {
            node: self.to_string(),
            reason,
        };
        Ok(match self {
            Expr::Var(v) => env(v).ok_or_else(|| Error::UnboundVariable(v.to_string()))?,
            Expr::Const(c) => alg.constant(*c),
            Expr::Add(a, b) => alg.add(&a.eval_in(alg, env)?, &b.eval_in(alg, env)?),
            Expr::Sub(a, b) => alg.sub(&a.eval_in(alg, env)?, &b.eval_in(alg, env)?),
            Expr::Mul(a, b) => alg.mul(&a.eval_in(alg, env)?, &b.eval_in(alg, env)?),
            Expr::Div(a, b) => {
                let (x, y) = (a.eval_in(alg, env)?, b.eval_in(alg, env)?);
                alg.div(&x, &y).map_err(singular)?
            }
            Expr::Neg(a) => alg.neg(&a.eval_in(alg, env)?),
            Expr::Pow(a, n) => alg.powi(&a.eval_in(alg, env)?, *n).map_err(singular)?,
            Expr::Ln(a) => alg.ln(&a.eval_in(alg, env)?).map_err(singular)?,
            Expr::Sqrt(a) => alg.sqrt(&a.eval_in(alg, env)?).map_err(singular)?,
        })
    }

    /// Plain complex evaluation with named bindings.
    pub fn eval(&self, bindings: &[(&str, Complex64)]) -> Result<Complex64> {
        self.eval_in(&ComplexAlgebra, &|n| {
            bindings.iter().find(|(k, _)| *k == n).map(|(_, v)| *v)
        })
    }

    pub fn eval_with(&self, env: &dyn Fn(&str) -> Option<Complex64>) -> Result<Complex64> {
        self.eval_in(&ComplexAlgebra, env)
    }

    /// Jet of the expression; variables in `shape` are expanded about `point`,
    /// remaining variables are looked up in `point` as constants.
    pub fn jet(&self, shape: &Arc<JetShape>, point: &[(&str, Complex64)]) -> Result<Jet> {
        let alg = JetAlgebra::new(shape.clone());
        self.eval_in(&alg, &|n| {
            let value = point.iter().find(|(k, _)| *k == n).map(|(_, v)| *v)?;
            Some(match shape.var_index(n) {
                Some(i) => Jet::variable(shape, i, value),
                None => Jet::constant(shape, value),
            })
        })
    }
}

/// Arithmetic backend for [`Expr::eval_in`].
pub trait Algebra {
    type Value: Clone;
    fn constant(&self, c: Complex64) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn neg(&self, a: &Self::Value) -> Self::Value;
    fn div(&self, a: &Self::Value, b: &Self::Value) -> std::result::Result<Self::Value, String>;
    fn powi(&self, a: &Self::Value, n: i32) -> std::result::Result<Self::Value, String>;
    fn ln(&self, a: &Self::Value) -> std::result::Result<Self::Value, String>;
    fn sqrt(&self, a: &Self::Value) -> std::result::Result<Self::Value, String>;
}

/// Principal-branch complex arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexAlgebra;

impl Algebra for ComplexAlgebra {
    type Value = Complex64;

    fn constant(&self, c: Complex64) -> Complex64 {
        c
    }
    fn add(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a + b
    }
    fn sub(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a - b
    }
    fn mul(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a * b
    }
    fn neg(&self, a: &Complex64) -> Complex64 {
        -a
    }
    fn div(&self, a: &Complex64, b: &Complex64) -> std::result::Result<Complex64, String> {
        if b.norm() == 0.0 {
            return Err("division by zero".into());
        }
        Ok(a / b)
    }
    fn powi(&self, a: &Complex64, n: i32) -> std::result::Result<Complex64, String> {
        if n < 0 && a.norm() == 0.0 {
            return Err("negative power of zero".into());
        }
        Ok(a.powi(n))
    }
    fn ln(&self, a: &Complex64) -> std::result::Result<Complex64, String> {
        if a.norm() == 0.0 {
            return Err("logarithm at zero".into());
        }
        Ok(a.ln())
    }
    fn sqrt(&self, a: &Complex64) -> std::result::Result<Complex64, String> {
        Ok(a.sqrt())
    }
}

/// Truncated Taylor arithmetic on a fixed [`JetShape`].
#[derive(Debug, Clone)]
pub struct JetAlgebra {
    shape: Arc<JetShape>,
}

impl JetAlgebra {
    pub fn new(shape: Arc<JetShape>) -> Self {
        Self { shape }
    }
}

impl Algebra for JetAlgebra {
    type Value = Jet;

    fn constant(&self, c: Complex64) -> Jet {
        Jet::constant(&self.shape, c)
    }
    fn add(&self, a: &Jet, b: &Jet) -> Jet {
        a.add(b)
    }
    fn sub(&self, a: &Jet, b: &Jet) -> Jet {
        a.sub(b)
    }
    fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        a.mul(b)
    }
    fn neg(&self, a: &Jet) -> Jet {
        a.neg()
    }
    fn div(&self, a: &Jet, b: &Jet) -> std::result::Result<Jet, String> {
        a.div(b)
    }
    fn powi(&self, a: &Jet, n: i32) -> std::result::Result<Jet, String> {
        a.powi(n)
    }
    fn ln(&self, a: &Jet) -> std::result::Result<Jet, String> {
        a.ln()
    }
    fn sqrt(&self, a: &Jet) -> std::result::Result<Jet, String> {
        a.sqrt()
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a + b),
            (Some(a), None) if a == zero() => rhs,
            (None, Some(b)) if b == zero() => self,
            _ => Expr::Add(Arc::new(self), Arc::new(rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a - b),
            (Some(a), None) if a == zero() => -rhs,
            (None, Some(b)) if b == zero() => self,
            _ => Expr::Sub(Arc::new(self), Arc::new(rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a * b),
            _ if self.is_one() => rhs,
            _ if rhs.is_one() => self,
            _ => Expr::Mul(Arc::new(self), Arc::new(rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        if self.is_zero() && !rhs.is_zero() {
            return Expr::zero();
        }
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != zero() => Expr::Const(a / b),
            _ if rhs.is_one() => self,
            _ => Expr::Div(Arc::new(self), Arc::new(rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => inner.as_ref().clone(),
            other => Expr::Neg(Arc::new(other)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Const(c) => write!(f, "{}", format_complex_literal(*c)),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, n) if *n < 0 => write!(f, "{a}^({n})"),
            Expr::Pow(a, n) => write!(f, "{a}^{n}"),
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

/// Renders a complex constant so that the expression parser reads it back.
fn format_complex_literal(c: Complex64) -> String {
    if c.im == 0.0 {
        if c.re < 0.0 {
            format!("({:?})", c.re)
        } else {
            format!("{:?}", c.re)
        }
    } else if c.re == 0.0 {
        if c.im < 0.0 {
            format!("(-{:?}i)", -c.im)
        } else {
            format!("{:?}i", c.im)
        }
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        format!("({:?}{sign}{:?}i)", c.re, c.im.abs())
    }
}

/// Canonical Poisson bracket `{f, g} = f_y g_x − f_x g_y`.
pub fn poisson_bracket(f: &Expr, g: &Expr) -> Expr {
    poisson_bracket_in(f, g, "y", "x")
}

/// Poisson bracket with respect to an arbitrary canonical pair, `{f,g} = f_p g_q − f_q g_p`.
pub fn poisson_bracket_in(f: &Expr, g: &Expr, p: &str, q: &str) -> Expr {
    f.diff(p) * g.diff(q) - f.diff(q) * g.diff(p)
}
