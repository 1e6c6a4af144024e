//! Twistor data for ALE spaces of type A, D and E.
//!
//! Each family is a hypersurface `F̃(x, y, z, λ) = 0` in
//! `O(p) ⊕ O(q) ⊕ O(r) → CP¹`, homogeneous of degree `s`. Deformation
//! parameters `a_i(λ)` are polynomials in `lambda` whose degree is fixed by
//! homogeneity.

use std::fmt;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::analytic::{ContourSpec, Expr, Poly};
use crate::error::{Error, Result};
use crate::linalg::polynomial_roots;
use crate::twistor::{self, SectionPoint, TwistorClass, LAMBDA_VAR, Q_VAR};

type C = Complex64;

const ZERO: C = Complex64::new(0.0, 0.0);
const ONE: C = Complex64::new(1.0, 0.0);

/// Distance below which a patching argument counts as sitting on a branch
/// point.
pub const BRANCH_TOLERANCE: f64 = 1e-12;

/// The Kleinian families. `D(k)` is `D_{k−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AleKind {
    A(usize),
    D(usize),
    E6,
    E7,
    E8,
}

impl AleKind {
    /// `name` is one of `A`, `D`, `E6`, `E7`, `E8`; `k` is required for `A`
    /// and `D` and ignored otherwise.
    pub fn parse(name: &str, k: Option<usize>) -> Result<Self> {
        let need_k = || k.ok_or_else(|| Error::InvalidParameter(format!("family {name} needs k")));
        let kind = match name {
            "A" | "A_k" => AleKind::A(need_k()?),
            "D" | "D_k-1" => AleKind::D(need_k()?),
            "E6" => AleKind::E6,
            "E7" => AleKind::E7,
            "E8" => AleKind::E8,
            _ => return Err(Error::InvalidParameter(format!("unknown ALE family `{name}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AleKind::A(k) if k < 1 => Err(Error::InvalidParameter("A_k needs k ≥ 1".into())),
            AleKind::D(k) if k < 4 => Err(Error::InvalidParameter("D_{k−1} needs k ≥ 4".into())),
            _ => Ok(()),
        }
    }

    /// Degrees `(p, q, r, s)` of `x`, `y`, `z` and of the relation.
    pub fn degrees(&self) -> Result<(i64, i64, i64, i64)> {
        self.validate()?;
        Ok(match *self {
            AleKind::A(k) => {
                let k = k as i64;
                (k, k, 2, 2 * k)
            }
            AleKind::D(k) => {
                let k = k as i64;
                (2 * k, 2 * k - 2, 4, 4 * k)
            }
            AleKind::E6 => (12, 8, 6, 24),
            AleKind::E7 => (18, 12, 8, 36),
            AleKind::E8 => (30, 20, 12, 60),
        })
    }

    /// Number of deformation parameters.
    pub fn parameter_count(&self) -> usize {
        match *self {
            AleKind::A(k) => k - 1,
            AleKind::D(k) => k + 1,
            AleKind::E6 => 6,
            AleKind::E7 => 7,
            AleKind::E8 => 8,
        }
    }

    /// Undeformed relation as `(coefficient, [i, j, l])` for `x^i y^j z^l`.
    fn base_terms(&self) -> Vec<(f64, [u32; 3])> {
        match *self {
            AleKind::A(k) => vec![(1.0, [1, 1, 0]), (-1.0, [0, 0, k as u32])],
            AleKind::D(k) => vec![(1.0, [2, 0, 0]), (1.0, [0, 2, 1]), (1.0, [0, 0, k as u32])],
            AleKind::E6 => vec![(1.0, [2, 0, 0]), (1.0, [0, 3, 0]), (1.0, [0, 0, 4])],
            AleKind::E7 => vec![(1.0, [2, 0, 0]), (1.0, [0, 3, 0]), (1.0, [0, 1, 3])],
            AleKind::E8 => vec![(1.0, [2, 0, 0]), (1.0, [0, 3, 0]), (1.0, [0, 0, 5])],
        }
    }

    /// The monomial multiplying each `a_i`, with its sign in the relation.
    fn deformation_terms(&self) -> Vec<(f64, [u32; 3])> {
        let z = |l: u32| [0, 0, l];
        let yz = |j: u32, l: u32| [0, j, l];
        match *self {
            AleKind::A(k) => (1..k).map(|i| (-1.0, z((k - 1 - i) as u32))).collect(),
            AleKind::D(k) => {
                let mut t = vec![(1.0, yz(2, 0)), (1.0, yz(1, 0))];
                t.extend((3..=k + 1).map(|j| (1.0, z((k + 1 - j) as u32))));
                t
            }
            AleKind::E6 => [yz(1, 2), yz(1, 1), yz(1, 0), z(2), z(1), z(0)]
                .map(|m| (1.0, m))
                .to_vec(),
            AleKind::E7 => [yz(2, 1), yz(2, 0), yz(1, 1), yz(1, 0), z(2), z(1), z(0)]
                .map(|m| (1.0, m))
                .to_vec(),
            AleKind::E8 => [yz(1, 3), yz(1, 2), yz(1, 1), yz(1, 0), z(3), z(2), z(1), z(0)]
                .map(|m| (1.0, m))
                .to_vec(),
        }
    }

    /// λ-degree of each deformation parameter.
    pub fn parameter_degrees(&self) -> Result<Vec<u32>> {
        let (p, q, r, s) = self.degrees()?;
        Ok(self
            .deformation_terms()
            .iter()
            .map(|(_, [i, j, l])| (s - p * i64::from(*i) - q * i64::from(*j) - r * i64::from(*l)) as u32)
            .collect())
    }
}

impl fmt::Display for AleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AleKind::A(k) => write!(f, "A_{k}"),
            AleKind::D(k) => write!(f, "D_{}", k - 1),
            AleKind::E6 => write!(f, "E6"),
            AleKind::E7 => write!(f, "E7"),
            AleKind::E8 => write!(f, "E8"),
        }
    }
}

/// Checks that `e` is a polynomial in `lambda` of degree at most `degree`.
pub fn check_section(e: &Expr, degree: u32) -> Result<()> {
    e.check_declared(&[LAMBDA_VAR])?;
    let p = Poly::from_expr(e, &[LAMBDA_VAR])?;
    let d = if p.is_zero() { 0 } else { p.degree_in(LAMBDA_VAR)? };
    if d > degree {
        return Err(Error::DegreeMismatch(format!(
            "`{e}` has degree {d} in λ, at most {degree} allowed"
        )));
    }
    Ok(())
}

/// A family together with its deformation parameters.
#[derive(Debug, Clone)]
pub struct AleFamily {
    kind: AleKind,
    params: Vec<Expr>,
}

impl AleFamily {
    pub fn new(kind: AleKind, params: Vec<Expr>) -> Result<Self> {
        let degrees = kind.parameter_degrees()?;
        if params.len() != degrees.len() {
            return Err(Error::DegreeMismatch(format!(
                "{kind} takes {} parameters, got {}",
                degrees.len(),
                params.len()
            )));
        }
        for (a, d) in params.iter().zip(&degrees) {
            check_section(a, *d)?;
        }
        Ok(Self { kind, params })
    }

    pub fn undeformed(kind: AleKind) -> Result<Self> {
        Self::new(kind, vec![Expr::zero(); kind.parameter_count()])
    }

    pub fn kind(&self) -> AleKind {
        self.kind
    }

    pub fn params(&self) -> &[Expr] {
        &self.params
    }

    /// `F̃` in `x`, `y`, `z` and `lambda`.
    pub fn relation_expr(&self) -> Expr {
        let mono = |[i, j, l]: [u32; 3]| {
            Expr::var("x").powi(i as i32) * Expr::var("y").powi(j as i32) * Expr::var("z").powi(l as i32)
        };
        let mut e = Expr::zero();
        for (c, m) in self.kind.base_terms() {
            e = e + Expr::real(c) * mono(m);
        }
        for ((c, m), a) in self.kind.deformation_terms().into_iter().zip(&self.params) {
            e = e + Expr::real(c) * a.clone() * mono(m);
        }
        e
    }

    pub fn relation_eval(&self, x: C, y: C, z: C, lambda: C) -> Result<C> {
        self.relation_expr()
            .eval(&[("x", x), ("y", y), ("z", z), (LAMBDA_VAR, lambda)])
    }

    /// Values of the `a_i` at `λ`.
    pub fn params_at(&self, lambda: C) -> Result<Vec<C>> {
        self.params.iter().map(|a| a.eval(&[(LAMBDA_VAR, lambda)])).collect()
    }
}

pub fn degrees(kind: AleKind) -> Result<(i64, i64, i64, i64)> {
    kind.degrees()
}

fn eval_sections(roots: &[Expr], degree: u32, lambda: C) -> Result<Vec<C>> {
    roots
        .iter()
        .map(|r| {
            check_section(r, degree)?;
            r.eval(&[(LAMBDA_VAR, lambda)])
        })
        .collect()
}

/// Patching data for `A_k` on the overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AkPatch {
    /// `f = Σ_j ln(z − p_j)`.
    pub f: C,
    /// `G = Σ_j (z − p_j)(ln(z − p_j) − 1)`.
    pub g: C,
}

/// `(f, G)` as expressions in `z` and `lambda`; each logarithm is taken
/// separately so that `f` is additive over centres and `∂G/∂z = f`.
pub fn ak_patching_exprs(roots: &[Expr]) -> Result<(Expr, Expr)> {
    let mut f = Expr::zero();
    let mut g = Expr::zero();
    for r in roots {
        check_section(r, 2)?;
        let d = Expr::var("z") - r.clone();
        f = f + d.ln();
        g = g + d.clone() * (d.ln() - Expr::one());
    }
    Ok((f, g))
}

pub fn ak_patching(roots: &[Expr], z: C, lambda: C) -> Result<AkPatch> {
    let p = eval_sections(roots, 2, lambda)?;
    let mut f = ZERO;
    let mut g = ZERO;
    for pj in p {
        let d = z - pj;
        if d.norm() <= BRANCH_TOLERANCE {
            return Err(Error::BranchPoint(format!("z = p_j(λ) = {pj}")));
        }
        f += d.ln();
        g += d * (d.ln() - 1.0);
    }
    Ok(AkPatch { f, g })
}

/// Coefficients of `Π (z − p_j)` in ascending powers of `z`.
fn product_coefficients(p: &[C]) -> Vec<C> {
    let mut c = vec![ONE];
    for pj in p {
        let mut next = vec![ZERO; c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * pj;
        }
        c = next;
    }
    c
}

/// Largest coefficient mismatch between `Π (z − p_j(λ))` and
/// `z^k + a₁z^{k−2} + … + a_{k−1}` at `λ`.
pub fn ak_factorization_residual(family: &AleFamily, roots: &[Expr], lambda: C) -> Result<f64> {
    let AleKind::A(k) = family.kind else {
        return Err(Error::InvalidParameter("factorisation applies to A_k only".into()));
    };
    if roots.len() != k {
        return Err(Error::InvalidParameter(format!(
            "A_{k} needs {k} roots, got {}",
            roots.len()
        )));
    }
    let product = product_coefficients(&eval_sections(roots, 2, lambda)?);
    let mut expected = vec![ZERO; k + 1];
    expected[k] = ONE;
    for (i, a) in family.params_at(lambda)?.into_iter().enumerate() {
        expected[k - 2 - i] = a;
    }
    Ok(product
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Gauss-Legendre rule on `[0, 1]`, ordered from `s = 1` down to `s = 0`.
fn unit_rule(nodes: usize) -> Result<Vec<(f64, f64)>> {
    let n = NonZeroUsize::new(nodes).ok_or_else(|| Error::InvalidParameter("need at least one node".into()))?;
    let rule = GaussLegendre::new(n);
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(pairs)
}

/// `∫_a^b dy/y` along the straight segment.
fn log_segment(a: C, b: C, nodes: usize) -> Result<C> {
    let mut sum = ZERO;
    for (s, w) in unit_rule(nodes)? {
        sum += w * (b - a) / (a + (b - a) * s);
    }
    Ok(sum)
}

/// The overlap integral `∫ dy/F̃_x` on the `A_k` fibre `xy = Π(z − p_j)`,
/// from `F̃_y = 1` (`y = Π(z − p_j)`) to `F̃_x = 1` (`y = 1`), along a
/// straight path.
pub fn ak_path_integral(roots: &[Expr], z: C, lambda: C, nodes: usize) -> Result<C> {
    let p = eval_sections(roots, 2, lambda)?;
    let prod: C = p.iter().map(|pj| z - pj).product();
    if prod.norm() <= BRANCH_TOLERANCE {
        return Err(Error::BranchPoint("Π(z − p_j) = 0".into()));
    }
    // the path from Π to 1 must avoid the pole at y = 0
    if prod.im.abs() <= BRANCH_TOLERANCE && prod.re < 0.0 {
        return Err(Error::BranchPoint("straight path through y = 0".into()));
    }
    log_segment(prod, ONE, nodes)
}

/// `D_{k−1}` patching function, evaluated with principal branches exactly as
///
/// `f = z^{−1/2} ln[((z − 4zΠ)^{1/2} + z^{1/2}) / ((1 + 4zΠ)^{1/2} − 1)]`,
/// `Π = Π_j (z − q_j(λ))`, `q_j ∈ Γ(O(4))`.
pub fn dk_patching(roots: &[Expr], z: C, lambda: C) -> Result<C> {
    if z.norm() <= BRANCH_TOLERANCE {
        return Err(Error::BranchPoint("z = 0".into()));
    }
    let q = eval_sections(roots, 4, lambda)?;
    let prod: C = q.iter().map(|qj| z - qj).product();
    if prod.norm() <= BRANCH_TOLERANCE {
        return Err(Error::BranchPoint("Π(z − q_j) = 0 makes the denominator vanish".into()));
    }
    let sz = z.sqrt();
    let num = (z - 4.0 * z * prod).sqrt() + sz;
    let den = (1.0 + 4.0 * z * prod).sqrt() - 1.0;
    if num.norm() <= BRANCH_TOLERANCE || den.norm() <= BRANCH_TOLERANCE {
        return Err(Error::BranchPoint("logarithm argument at 0 or ∞".into()));
    }
    Ok((num / den).ln() / sz)
}

/// Square root continued from `prev`.
fn continue_sqrt(v: C, prev: C) -> C {
    let r = v.sqrt();
    if (r - prev).norm() <= (r + prev).norm() {
        r
    } else {
        -r
    }
}

/// The overlap integral on the `D_{k−1}` fibre `x² = y²z + Π`: `∫ dy/(2x)`
/// from `F̃_y = 1` (`y = −1/(2z)`) to `F̃_x = 1` (`x = 1/2`), with `x`
/// continued along the straight path from the upper end.
pub fn dk_path_integral(roots: &[Expr], z: C, lambda: C, nodes: usize) -> Result<C> {
    if z.norm() <= BRANCH_TOLERANCE {
        return Err(Error::BranchPoint("z = 0".into()));
    }
    let q = eval_sections(roots, 4, lambda)?;
    let prod: C = q.iter().map(|qj| z - qj).product();
    let y1 = (z - 4.0 * z * prod).sqrt() / (2.0 * z);
    let y0 = -1.0 / (2.0 * z);
    let mut x = C::new(0.5, 0.0);
    let mut sum = ZERO;
    // s runs from 1 (y = y1) down to 0 (y = y0)
    for (s, w) in unit_rule(nodes)? {
        let y = y0 + (y1 - y0) * s;
        x = continue_sqrt(y * y * z + prod, x);
        if x.norm() <= BRANCH_TOLERANCE {
            return Err(Error::BranchPoint("path crosses x = 0".into()));
        }
        sum += w * (y1 - y0) / (2.0 * x);
    }
    Ok(sum)
}

/// `(g₁, g₂)` in `z` and `lambda` such that `F̃ = 0` reads
/// `x² = 4u³ + g₁u + g₂` after `y = −4^{1/3}u − c₂/3`, where
/// `F̃ = x² + y³ + c₂y² + c₁y + c₀`.
pub fn ek_periods(family: &AleFamily) -> Result<(Expr, Expr)> {
    let a = |i: usize| family.params[i - 1].clone();
    let z = |l: i32| Expr::var("z").powi(l);
    let (c2, c1, c0) = match family.kind {
        AleKind::E6 => (
            Expr::zero(),
            a(1) * z(2) + a(2) * z(1) + a(3),
            z(4) + a(4) * z(2) + a(5) * z(1) + a(6),
        ),
        AleKind::E7 => (
            a(1) * z(1) + a(2),
            z(3) + a(3) * z(1) + a(4),
            a(5) * z(2) + a(6) * z(1) + a(7),
        ),
        AleKind::E8 => (
            Expr::zero(),
            a(1) * z(3) + a(2) * z(2) + a(3) * z(1) + a(4),
            z(5) + a(5) * z(3) + a(6) * z(2) + a(7) * z(1) + a(8),
        ),
        other => return Err(Error::InvalidParameter(format!("{other} is not an E family"))),
    };
    let third = Expr::real(1.0 / 3.0);
    let p = c1.clone() - third.clone() * c2.powi(2);
    let r = c0 - third * c1 * c2.clone() + Expr::real(2.0 / 27.0) * c2.powi(3);
    Ok((Expr::real(4f64.cbrt()) * p, -r))
}

/// Root hints for the limits of the elliptic patching integral.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LimitHints {
    /// Near the wanted root of `12y² + g₁ − 1 = 0`.
    pub y0: Option<C>,
    /// Near the wanted root of `4y³ + g₁y + g₂ − 1/4 = 0`.
    pub y1: Option<C>,
}

/// Relative separation below which two candidate roots count as equally
/// close to a hint.
pub const ROOT_SEPARATION: f64 = 1e-9;

fn select_root(roots: &[C], hint: Option<C>, what: &str) -> Result<C> {
    let spread = roots.iter().map(|r| (r - roots[0]).norm()).fold(0.0, f64::max);
    let Some(h) = hint else {
        if spread <= ROOT_SEPARATION * roots[0].norm().max(1.0) {
            return Ok(roots[0]);
        }
        return Err(Error::AmbiguousLimit(format!(
            "{what}: {} candidate roots and no hint",
            roots.len()
        )));
    };
    let mut by_distance: Vec<(f64, C)> = roots.iter().map(|r| ((r - h).norm(), *r)).collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0));
    if by_distance.len() > 1
        && (by_distance[1].1 - by_distance[0].1).norm() > ROOT_SEPARATION
        && by_distance[1].0 - by_distance[0].0 <= ROOT_SEPARATION * by_distance[0].0.max(1.0)
    {
        return Err(Error::AmbiguousLimit(format!(
            "{what}: hint {h} is equidistant from two roots"
        )));
    }
    Ok(by_distance[0].1)
}

/// Result of the elliptic patching integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPatch {
    pub f: C,
    pub y0: C,
    pub y1: C,
    pub g1: C,
    pub g2: C,
}

/// Default Gauss-Legendre order for the elliptic integrals.
pub const ELLIPTIC_NODES: usize = 96;

/// `f = ½ ∫_{y₀}^{y₁} dy/√(4y³ + g₁y + g₂)` with `y₁` a root of
/// `4y³ + g₁y + g₂ − 1/4` and `y₀` a root of `12y² + g₁ − 1`.
pub fn ek_patching_periods(g1: C, g2: C, hints: &LimitHints, nodes: usize) -> Result<EllipticPatch> {
    let scale = g1.norm().powi(3) + 27.0 * g2.norm_sqr();
    let disc = -g1.powi(3) - 27.0 * g2 * g2;
    if disc.norm() <= 1e-12 * scale.max(1e-300) {
        return Err(Error::DegenerateEllipticCurve(disc.norm()));
    }
    let y0 = select_root(&polynomial_roots(&[g1 - 1.0, ZERO, C::new(12.0, 0.0)])?, hints.y0, "y₀")?;
    let y1 = select_root(
        &polynomial_roots(&[g2 - 0.25, g1, ZERO, C::new(4.0, 0.0)])?,
        hints.y1,
        "y₁",
    )?;
    let f = 0.5 * elliptic_integral(g1, g2, y0, y1, nodes)?;
    Ok(EllipticPatch { f, y0, y1, g1, g2 })
}

/// The elliptic patching function of an E family at `(z, λ)`.
pub fn ek_patching(family: &AleFamily, z: C, lambda: C, hints: &LimitHints, nodes: usize) -> Result<EllipticPatch> {
    let (g1, g2) = ek_periods(family)?;
    let b = [("z", z), (LAMBDA_VAR, lambda)];
    ek_patching_periods(g1.eval(&b)?, g2.eval(&b)?, hints, nodes)
}

/// `∫_a^b dy/√(4y³ + g₁y + g₂)` along the straight segment.
pub fn elliptic_integral(g1: C, g2: C, a: C, b: C, nodes: usize) -> Result<C> {
    inverse_sqrt_integral(|y| 4.0 * y * y * y + g1 * y + g2, a, b, nodes)
}

/// `∫_a^b dy/√R(y)` along the straight segment, with the branch of the root
/// fixed as principal at the midpoint and continued outwards.
///
/// At an endpoint `e` where `R` vanishes the half-segment is mapped by
/// `y = e + (m − e)s²`, which removes the inverse square-root singularity.
pub fn inverse_sqrt_integral<R>(radicand: R, a: C, b: C, nodes: usize) -> Result<C>
where
    R: Fn(C) -> C,
{
    let m = 0.5 * (a + b);
    let rm = radicand(m);
    if rm.norm() == 0.0 {
        return Err(Error::BranchPoint("radicand vanishes at the midpoint".into()));
    }
    let root_m = rm.sqrt();
    let reference = rm.norm().max(radicand(a).norm()).max(radicand(b).norm());
    let rule = unit_rule(nodes)?;
    let half = |e: C| -> Result<C> {
        let singular = radicand(e).norm() <= 1e-13 * reference;
        let d = m - e;
        let mut prev = root_m;
        let mut sum = ZERO;
        for &(s, w) in &rule {
            if singular {
                let q = continue_sqrt(radicand(e + d * s * s) / (s * s), prev);
                prev = q;
                sum += w * 2.0 * d / q;
            } else {
                let r = continue_sqrt(radicand(e + d * s), prev);
                prev = r;
                sum += w * d / r;
            }
        }
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            return Err(Error::BranchPoint("radicand vanishes inside the segment".into()));
        }
        Ok(sum)
    };
    Ok(half(a)? - half(b)?)
}

/// The `ln(Q − p_j(λ))` class for one centre of an `A_k` space on the
/// Gibbons-Hawking section `Q = w + yλ − pλ²`.
pub fn ak_center_class(root: &Expr, contour: ContourSpec) -> Result<TwistorClass> {
    check_section(root, 2)?;
    let e = (Expr::var(Q_VAR) - root.clone()).ln();
    TwistorClass::patching(2, e, contour)
}

/// `ψ = Σ_j ψ_j` at `(p, y, w)`, each `ψ_j` the ψ-field of `ln(z − p_j)`.
pub fn ak_gh_potential(roots: &[Expr], point: [C; 3], contour: ContourSpec) -> Result<C> {
    let [p, y, w] = point;
    let t = SectionPoint::new(vec![-p, y, w])?;
    let mut psi = ZERO;
    for r in roots {
        psi += twistor::psi_field(&ak_center_class(r, contour)?, &t, &[])?;
    }
    Ok(psi)
}
