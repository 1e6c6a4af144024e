//! Sparse multivariate polynomials with complex coefficients.
//!
//! Used where identities must hold coefficientwise rather than at sample points.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::expr::Expr;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Poly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl Poly {
    pub fn zero<S: AsRef<str>>(vars: &[S]) -> Self {
        Self {
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant<S: AsRef<str>>(vars: &[S], c: Complex64) -> Self {
        let mut p = Self::zero(vars);
        p.push(vec![0; p.vars.len()], c);
        p
    }

    pub fn variable<S: AsRef<str>>(vars: &[S], name: &str) -> Result<Self> {
        let mut p = Self::zero(vars);
        let i = p.index_of(name)?;
        let mut e = vec![0; p.vars.len()];
        e[i] = 1;
        p.push(e, Complex64::new(1.0, 0.0));
        Ok(p)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UndeclaredVariable {
                name: name.to_string(),
                declared: self.vars.clone(),
            })
    }

    fn push(&mut self, exps: Vec<u32>, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        }
    }

    fn check_same_vars(&self, other: &Poly) {
        assert_eq!(self.vars, other.vars, "polynomials over different variables");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check_same_vars(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.push(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (e, c) in &self.terms {
            out.push(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_same_vars(other);
        let mut out = Poly::zero(&self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.push(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(&self.vars, Complex64::new(1.0, 0.0));
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn diff(&self, name: &str) -> Result<Poly> {
        let i = self.index_of(name)?;
        let mut out = Poly::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.push(e2, c * f64::from(e[i]));
        }
        Ok(out)
    }

    /// Coefficient of `name^degree`, as a polynomial in the same variables.
    pub fn coefficient_of(&self, name: &str, degree: u32) -> Result<Poly> {
        let i = self.index_of(name)?;
        let mut out = Poly::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] == degree {
                let mut e2 = e.clone();
                e2[i] = 0;
                out.push(e2, *c);
            }
        }
        Ok(out)
    }

    pub fn degree_in(&self, name: &str) -> Result<u32> {
        let i = self.index_of(name)?;
        Ok(self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.vars.len());
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(point).fold(*c, |acc, (k, x)| acc * x.powu(*k)))
            .sum()
    }

    /// Converts a polynomial expression; division only by nonzero constants.
    pub fn from_expr<S: AsRef<str>>(expr: &Expr, vars: &[S]) -> Result<Poly> {
        let zero = Poly::zero(vars);
        let not_poly = |what: &str| Error::DegreeMismatch(format!("{what} in `{expr}` is not polynomial"));
        Ok(match expr {
            Expr::Var(v) => Poly::variable(vars, v)?,
            Expr::Const(c) => Poly::constant(vars, *c),
            Expr::Add(a, b) => Poly::from_expr(a, vars)?.add(&Poly::from_expr(b, vars)?),
            Expr::Sub(a, b) => Poly::from_expr(a, vars)?.sub(&Poly::from_expr(b, vars)?),
            Expr::Mul(a, b) => Poly::from_expr(a, vars)?.mul(&Poly::from_expr(b, vars)?),
            Expr::Div(a, b) => match b.as_const() {
                Some(c) if c.norm() != 0.0 => Poly::from_expr(a, vars)?.scale(1.0 / c),
                _ => return Err(not_poly("division")),
            },
            Expr::Neg(a) => zero.sub(&Poly::from_expr(a, vars)?),
            Expr::Pow(a, n) if *n >= 0 => Poly::from_expr(a, vars)?.pow(*n as u32),
            Expr::Pow(..) => return Err(not_poly("negative power")),
            Expr::Ln(_) => return Err(not_poly("logarithm")),
            Expr::Sqrt(_) => return Err(not_poly("square root")),
        })
    }

    pub fn to_expr(&self) -> Expr {
        let mut out = Expr::zero();
        for (e, c) in &self.terms {
            let mut term = Expr::constant(*c);
            for (v, k) in self.vars.iter().zip(e) {
                if *k > 0 {
                    term = term * Expr::var(v).powi(*k as i32);
                }
            }
            out = out + term;
        }
        out
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.vars.join(","), self.to_expr())
    }
}
