//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a field at a
//! base point for every multi-index `α` with `α_v ≤ bound_v` and `|α| ≤ total`.
//! Products drop every term outside that box, so the chain and product rules
//! hold exactly up to truncation.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The index set of a jet: variable names, per-variable bounds and a total-degree cap.
#[derive(Debug)]
pub struct JetShape {
    vars: Vec<String>,
    bounds: Vec<u32>,
    total: u32,
    indices: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
    /// `(i, j, k)` with `indices[i] + indices[j] == indices[k]`.
    products: Vec<(u32, u32, u32)>,
}

impl JetShape {
    /// Builds a shape. Bounds above `total` are clipped to `total`.
    ///
    /// Shapes are interned, so equal requests share one product table.
    pub fn new<S: AsRef<str>>(vars: &[S], bounds: &[u32], total: u32) -> Arc<Self> {
        assert_eq!(vars.len(), bounds.len(), "one bound per variable");
        type Key = (Vec<String>, Vec<u32>, u32);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<JetShape>>>> = OnceLock::new();
        let vars: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        let bounds: Vec<u32> = bounds.iter().map(|&b| b.min(total)).collect();
        let key = (vars, bounds, total);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(shape) = cache.lock().expect("jet shape cache").get(&key) {
            return shape.clone();
        }
        let shape = Arc::new(Self::build(key.0.clone(), key.1.clone(), total));
        cache
            .lock()
            .expect("jet shape cache")
            .entry(key)
            .or_insert(shape)
            .clone()
    }

    fn build(vars: Vec<String>, bounds: Vec<u32>, total: u32) -> Self {
        let mut indices = Vec::new();
        let mut current = vec![0u32; bounds.len()];
        enumerate(&bounds, total, 0, 0, &mut current, &mut indices);
        // Graded order keeps the constant term at position 0.
        indices.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        let lookup: HashMap<Vec<u32>, usize> = indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = lookup.get(&sum) {
                    products.push((i as u32, j as u32, k as u32));
                }
            }
        }
        Self {
            vars,
            bounds,
            total,
            indices,
            lookup,
            products,
        }
    }

    /// Shape with the same bound `order` in every variable and total degree `order`.
    pub fn uniform<S: AsRef<str>>(vars: &[S], order: u32) -> Arc<Self> {
        Self::new(vars, &vec![order; vars.len()], order)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn bounds(&self) -> &[u32] {
        &self.bounds
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn position(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    fn same(&self, other: &JetShape) -> bool {
        std::ptr::eq(self, other)
            || (self.vars == other.vars && self.bounds == other.bounds && self.total == other.total)
    }
}

fn enumerate(bounds: &[u32], total: u32, pos: usize, used: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos == bounds.len() {
        out.push(current.clone());
        return;
    }
    for k in 0..=bounds[pos].min(total - used) {
        current[pos] = k;
        enumerate(bounds, total, pos + 1, used + k, current, out);
    }
    current[pos] = 0;
}

/// Truncated Taylor expansion of a complex field.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("vars", &self.shape.vars)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(shape: &Arc<JetShape>, value: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.len()];
        coeffs[0] = value;
        Self {
            shape: shape.clone(),
            coeffs,
        }
    }

    /// The coordinate function `var` expanded about `value`.
    pub fn variable(shape: &Arc<JetShape>, var: usize, value: Complex64) -> Self {
        let mut jet = Self::constant(shape, value);
        let mut alpha = vec![0u32; shape.bounds.len()];
        alpha[var] = 1;
        if let Some(k) = shape.position(&alpha) {
            jet.coeffs[k] = Complex64::new(1.0, 0.0);
        }
        jet
    }

    pub fn from_coeffs(shape: &Arc<JetShape>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), shape.len());
        Self {
            shape: shape.clone(),
            coeffs,
        }
    }

    pub fn shape(&self) -> &Arc<JetShape> {
        &self.shape
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `∂^α f / α!`, zero outside the index set.
    pub fn coeff(&self, alpha: &[u32]) -> Complex64 {
        self.shape.position(alpha).map(|k| self.coeffs[k]).unwrap_or_default()
    }

    /// Mixed partial derivative `∂^α f` at the base point.
    pub fn derivative(&self, alpha: &[u32]) -> Result<Complex64> {
        for (v, (&a, &b)) in alpha.iter().zip(&self.shape.bounds).enumerate() {
            if a > b {
                return Err(Error::TruncationExceeded {
                    var: self.shape.vars[v].clone(),
                    requested: a,
                    bound: b,
                });
            }
        }
        let order: u32 = alpha.iter().sum();
        if order > self.shape.total {
            return Err(Error::TruncationExceeded {
                var: "<total>".into(),
                requested: order,
                bound: self.shape.total,
            });
        }
        let factor: f64 = alpha.iter().map(|&a| factorial(a)).product();
        Ok(self.coeff(alpha) * factor)
    }

    /// `∂f/∂x_v` as a jet one order lower.
    pub fn partial(&self, var: usize) -> Jet {
        let s = &self.shape;
        let mut bounds = s.bounds.clone();
        bounds[var] = bounds[var].saturating_sub(1);
        let total = s.total.saturating_sub(1);
        let shape = JetShape::new(&s.vars, &bounds, total);
        let coeffs = shape
            .indices
            .iter()
            .map(|alpha| {
                let mut up = alpha.clone();
                up[var] += 1;
                self.coeff(&up) * f64::from(up[var])
            })
            .collect();
        Jet { shape, coeffs }
    }

    /// Projects onto a smaller index set over the same variables.
    pub fn restrict(&self, shape: &Arc<JetShape>) -> Jet {
        assert_eq!(shape.vars, self.shape.vars);
        let coeffs = shape.indices.iter().map(|a| self.coeff(a)).collect();
        Jet {
            shape: shape.clone(),
            coeffs,
        }
    }

    fn aligned(&self, other: &Jet) -> (Jet, Jet) {
        if self.shape.same(&other.shape) {
            return (self.clone(), other.clone());
        }
        let bounds: Vec<u32> = self
            .shape
            .bounds
            .iter()
            .zip(&other.shape.bounds)
            .map(|(a, b)| *a.min(b))
            .collect();
        let total = self.shape.total.min(other.shape.total);
        let shape = JetShape::new(&self.shape.vars, &bounds, total);
        (self.restrict(&shape), other.restrict(&shape))
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        Jet { shape: a.shape, coeffs }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
        Jet { shape: a.shape, coeffs }
    }

    pub fn neg(&self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet {
            shape: self.shape.clone(),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add_constant(&self, c: Complex64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); a.coeffs.len()];
        for &(i, j, k) in &a.shape.products {
            let (x, y) = (a.coeffs[i as usize], b.coeffs[j as usize]);
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            coeffs[k as usize] += x * y;
        }
        Jet { shape: a.shape, coeffs }
    }

    /// `f(self)` for a scalar function given by its Taylor coefficients about `self.value()`.
    fn compose(&self, series: &[Complex64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = Complex64::new(0.0, 0.0);
        let mut acc = Jet::constant(&self.shape, series[series.len() - 1]);
        for c in series.iter().rev().skip(1) {
            acc = acc.mul(&h).add_constant(*c);
        }
        acc
    }

    fn order(&self) -> usize {
        self.shape.total as usize
    }

    pub fn recip(&self) -> std::result::Result<Jet, String> {
        let a0 = self.value();
        if a0.norm() == 0.0 {
            return Err("division by zero".into());
        }
        let inv = 1.0 / a0;
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut term = inv;
        for _ in 0..=self.order() {
            series.push(term);
            term *= -inv;
        }
        Ok(self.compose(&series))
    }

    pub fn div(&self, other: &Jet) -> std::result::Result<Jet, String> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn ln(&self) -> std::result::Result<Jet, String> {
        let a0 = self.value();
        if a0.norm() == 0.0 {
            return Err("logarithm at zero".into());
        }
        let inv = 1.0 / a0;
        let mut series = vec![a0.ln()];
        let mut pow = Complex64::new(1.0, 0.0);
        for k in 1..=self.order() {
            pow *= inv;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(pow * (sign / k as f64));
        }
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> std::result::Result<Jet, String> {
        let a0 = self.value();
        if a0.norm() == 0.0 {
            if self.coeffs.iter().skip(1).all(|c| c.norm() == 0.0) || self.order() == 0 {
                return Ok(Jet::constant(&self.shape, Complex64::new(0.0, 0.0)));
            }
            return Err("square root at branch point".into());
        }
        let root = a0.sqrt();
        let inv = 1.0 / a0;
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        let mut pow = root;
        for k in 0..=self.order() {
            series.push(pow * binom);
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
            pow *= inv;
        }
        Ok(self.compose(&series))
    }

    pub fn powi(&self, n: i32) -> std::result::Result<Jet, String> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(&self.shape, Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        let (a, b) = self.aligned(other);
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet::add(self, rhs)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet::sub(self, rhs)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        Jet::mul(self, rhs)
    }
}

impl Mul<Complex64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: Complex64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::neg(self)
    }
}

/// Inverts a square matrix of jets by Gauss-Jordan elimination with pivoting on
/// base-point values. Returns `None` when the base-point matrix is singular.
pub fn invert_jet_matrix(m: &[Vec<Jet>]) -> Option<Vec<Vec<Jet>>> {
    let n = m.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let shape = m[0][0].shape().clone();
    let scale = m.iter().flatten().map(|j| j.value().norm()).fold(0.0, f64::max);
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = if i == j { 1.0 } else { 0.0 };
                    Jet::constant(&shape, Complex64::new(v, 0.0))
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].value().norm().total_cmp(&a[j][col].value().norm()))?;
        if a[pivot][col].value().norm() <= 1e-14 * scale.max(1e-300) {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let r = a[col][col].recip().ok()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col].clone();
            if f.coeffs().iter().all(|c| c.norm() == 0.0) {
                continue;
            }
            for j in 0..n {
                a[i][j] = &a[i][j] - &(&f * &a[col][j]);
                inv[i][j] = &inv[i][j] - &(&f * &inv[col][j]);
            }
        }
    }
    Some(inv)
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}
