//! Contour-integral constructions on sections of `O(k)`.
//!
//! Everything is in the affine gauge `π = (λ, 1)`, `ρ·dρ = dλ`, and every
//! integral is normalised by `1/(2πi)`. A section is
//! `Q(λ) = Σ_i λ^i t^{k−i}`; representatives are expressions in `Q` and
//! `lambda`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic::{ContourSpec, Expr, Jet, JetShape, Poly};
use crate::curvature::{wedge2, TwoForm};
use crate::error::{Error, Result};

type C = Complex64;

const ZERO: C = Complex64::new(0.0, 0.0);
const ONE: C = Complex64::new(1.0, 0.0);

pub const Q_VAR: &str = "Q";
pub const LAMBDA_VAR: &str = "lambda";

/// Overall sign applied to `d_hQ ∧ d_hζ`; fixed by the `k = 2`
/// Gibbons-Hawking forms.
pub const SIGMA_CALIBRATION: f64 = -1.0;

pub fn t_vars(k: usize) -> Vec<String> {
    (0..=k).map(|i| format!("t{i}")).collect()
}

/// `Q(λ) = t^k + λ t^{k−1} + … + λ^k t⁰` as an expression.
pub fn section_expr(k: usize) -> Expr {
    let l = Expr::var(LAMBDA_VAR);
    (0..=k).fold(Expr::zero(), |acc, i| {
        acc + l.powi(i as i32) * Expr::var(&format!("t{}", k - i))
    })
}

/// A point `(t⁰, …, t^k)` in the parameter space of sections of `O(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionPoint {
    pub t: Vec<C>,
}

impl SectionPoint {
    pub fn new(t: Vec<C>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidParameter(
                "a section needs at least one coordinate".into(),
            ));
        }
        Ok(Self { t })
    }

    pub fn k(&self) -> usize {
        self.t.len() - 1
    }

    pub fn q(&self, lambda: C) -> C {
        self.t.iter().fold(ZERO, |acc, ti| acc * lambda + ti)
    }
}

/// A Čech representative on the annulus, in `Q` and `lambda`.
#[derive(Debug, Clone)]
pub struct TwistorClass {
    k: usize,
    expr: Expr,
    weight: i32,
    contour: ContourSpec,
}

impl TwistorClass {
    pub fn new(k: usize, expr: Expr, weight: i32, contour: ContourSpec) -> Result<Self> {
        expr.check_declared(&[Q_VAR, LAMBDA_VAR])?;
        contour.validate()?;
        let f_weight = 2 - k as i32;
        if weight != 0 && weight != f_weight {
            return Err(Error::WeightMismatch {
                expected: f_weight,
                found: weight,
            });
        }
        Ok(Self {
            k,
            expr,
            weight,
            contour,
        })
    }

    /// A class `f ∈ H¹(O(k), O(2−k))`.
    pub fn patching(k: usize, expr: Expr, contour: ContourSpec) -> Result<Self> {
        Self::new(k, expr, 2 - k as i32, contour)
    }

    /// A weight-zero class `G`.
    pub fn potential(k: usize, expr: Expr, contour: ContourSpec) -> Result<Self> {
        Self::new(k, expr, 0, contour)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    fn expect_weight(&self, expected: i32) -> Result<()> {
        if self.weight != expected {
            return Err(Error::WeightMismatch {
                expected,
                found: self.weight,
            });
        }
        Ok(())
    }

    fn check_point(&self, t: &SectionPoint) -> Result<()> {
        if t.k() != self.k {
            return Err(Error::InvalidParameter(format!(
                "section has {} coordinates, class expects {}",
                t.t.len(),
                self.k + 1
            )));
        }
        Ok(())
    }

    /// Value of a representative-derived expression on the section at `λ`.
    fn on_section(e: &Expr, t: &SectionPoint, lambda: C) -> Result<C> {
        e.eval(&[(Q_VAR, t.q(lambda)), (LAMBDA_VAR, lambda)])
    }
}

fn integrate<F>(spec: &ContourSpec, f: F) -> Result<C>
where
    F: Fn(C) -> Result<C>,
{
    crate::analytic::contour_integral_try(
        |z| match f(z) {
            Err(Error::SingularEvaluation { .. }) => Ok(C::new(f64::NAN, 0.0)),
            other => other,
        },
        spec,
    )
}

/// Contour integral of a jet-valued integrand with the weights of
/// [`crate::analytic::contour_integral`].
fn integrate_jet<F>(spec: &ContourSpec, shape: &std::sync::Arc<JetShape>, f: F) -> Result<Jet>
where
    F: Fn(C) -> Result<Jet>,
{
    spec.validate()?;
    let mut sum = Jet::constant(shape, ZERO);
    for k in 0..spec.nodes {
        let (z, offset) = spec.node(k);
        let v = f(z).map_err(|e| match e {
            Error::SingularEvaluation { .. } => Error::PoleOnContour {
                node: k,
                at: format!("{z}"),
            },
            other => other,
        })?;
        if !v.is_finite() {
            return Err(Error::PoleOnContour {
                node: k,
                at: format!("{z}"),
            });
        }
        sum = &sum + &(&v * offset);
    }
    let n = spec.nodes as f64;
    let factor = if spec.normalized {
        C::new(1.0 / n, 0.0)
    } else {
        C::new(0.0, 2.0 * std::f64::consts::PI / n)
    };
    Ok(sum.scale(factor))
}

/// Jet over `t⁰…t^k` of `e(Q(λ, t), λ)` integrated against `dλ`.
fn section_jet(e: &Expr, t: &SectionPoint, spec: &ContourSpec, order: u32) -> Result<Jet> {
    let k = t.k();
    let vars = t_vars(k);
    let shape = JetShape::uniform(&vars, order);
    let composed = e.subs(Q_VAR, &section_expr(k));
    integrate_jet(spec, &shape, |z| {
        let mut b: Vec<(&str, C)> = vars.iter().map(String::as_str).zip(t.t.iter().copied()).collect();
        b.push((LAMBDA_VAR, z));
        composed.jet(&shape, &b)
    })
}

fn cauchy(g: &TwistorClass, t: &SectionPoint, lambda: C, spec: &ContourSpec) -> Result<C> {
    integrate(spec, |z| Ok(TwistorClass::on_section(&g.expr, t, z)? / (z - lambda)))
}

/// `(1/2πi) ∮ G(Q(ζ), ζ) dζ/(ζ − λ)` for `λ` inside the contour.
pub fn split_g(g: &TwistorClass, t: &SectionPoint, lambda: C) -> Result<C> {
    g.check_point(t)?;
    if !g.contour.contains(lambda) {
        return Err(Error::InvalidParameter("λ must lie inside the contour".into()));
    }
    cauchy(g, t, lambda, &g.contour)
}

/// The complementary piece `g̃` over an inner contour with `λ` outside it,
/// so that `g − g̃ = G(Q(λ), λ)` on the annulus.
pub fn split_g_outer(g: &TwistorClass, t: &SectionPoint, lambda: C, inner: &ContourSpec) -> Result<C> {
    g.check_point(t)?;
    if inner.contains(lambda) {
        return Err(Error::InvalidParameter("λ must lie outside the inner contour".into()));
    }
    cauchy(g, t, lambda, inner)
}

/// `F(t) = (1/2πi) ∮ G(Q, λ) λ⁻² dλ`.
pub fn f_from_g(g: &TwistorClass, t: &SectionPoint) -> Result<C> {
    g.expect_weight(0)?;
    g.check_point(t)?;
    integrate(&g.contour, |z| Ok(TwistorClass::on_section(&g.expr, t, z)? / (z * z)))
}

/// Jet of `F` over the `t` coordinates, differentiating under the integral.
///
/// Derivatives of order two and higher do not see branch jumps of a
/// logarithmic `G` that are affine in `Q`.
pub fn f_from_g_jet(g: &TwistorClass, t: &SectionPoint, order: u32) -> Result<Jet> {
    g.expect_weight(0)?;
    g.check_point(t)?;
    let integrand = g.expr.clone() / Expr::var(LAMBDA_VAR).powi(2);
    section_jet(&integrand, t, &g.contour, order)
}

/// Exact `F` for `G = P(Q, λ) λ^{−s}` with `P` polynomial: the `λ^{1+s}`
/// coefficient of `P(Q(λ, t), λ)`.
pub fn f_from_g_poly(numerator: &Expr, s: u32, k: usize) -> Result<Poly> {
    let mut vars = vec![LAMBDA_VAR.to_string()];
    vars.extend(t_vars(k));
    let composed = numerator.subs(Q_VAR, &section_expr(k));
    Poly::from_expr(&composed, &vars)?.coefficient_of(LAMBDA_VAR, 1 + s)
}

/// `∂²F/∂t^{i+1}∂t^j − ∂²F/∂t^i∂t^{j+1}` for every pair, as polynomials.
pub fn poly_wave_residuals(f: &Poly, n: usize) -> Result<Vec<Poly>> {
    let name = |i: usize| format!("t{i}");
    let mut out = Vec::new();
    for i in 0..2 * n {
        for j in 0..2 * n {
            let a = f.diff(&name(i + 1))?.diff(&name(j))?;
            let b = f.diff(&name(i))?.diff(&name(j + 1))?;
            out.push(a.sub(&b));
        }
    }
    Ok(out)
}

fn count_primed_zeros(indices: &[u8], expected: usize, what: &str) -> Result<usize> {
    if indices.len() != expected {
        return Err(Error::IndexOutOfRange(format!(
            "{what} takes exactly {expected} primed indices, got {}",
            indices.len()
        )));
    }
    if let Some(bad) = indices.iter().find(|&&a| a > 1) {
        return Err(Error::IndexOutOfRange(format!("primed index {bad} is not 0 or 1")));
    }
    Ok(indices.iter().filter(|&&a| a == 0).count())
}

/// `ψ_{A'₁…A'_{2k−4}} = (1/2πi) ∮ ρ_{A'₁}…ρ_{A'_{2k−4}} ∂f/∂Q dλ`;
/// each `0'` index contributes a factor `λ`.
pub fn psi_field(f: &TwistorClass, t: &SectionPoint, indices: &[u8]) -> Result<C> {
    if f.k < 2 {
        return Err(Error::InvalidParameter("the ψ-field needs k ≥ 2".into()));
    }
    let m = count_primed_zeros(indices, 2 * f.k - 4, "ψ")?;
    psi_component(f, t, m)
}

/// The ψ component with `m` indices equal to `0'`.
pub fn psi_component(f: &TwistorClass, t: &SectionPoint, m: usize) -> Result<C> {
    f.check_point(t)?;
    if f.k < 2 || m > 2 * f.k - 4 {
        return Err(Error::IndexOutOfRange(format!("ψ component {m} for k = {}", f.k)));
    }
    f.expect_weight(2 - f.k as i32)?;
    let fq = f.expr.diff(Q_VAR);
    integrate(&f.contour, |z| {
        Ok(z.powi(m as i32) * TwistorClass::on_section(&fq, t, z)?)
    })
}

/// Jet of a ψ component over the `t` coordinates.
pub fn psi_jet(f: &TwistorClass, t: &SectionPoint, m: usize, order: u32) -> Result<Jet> {
    f.check_point(t)?;
    if f.k < 2 || m > 2 * f.k - 4 {
        return Err(Error::IndexOutOfRange(format!("ψ component {m} for k = {}", f.k)));
    }
    let integrand = Expr::var(LAMBDA_VAR).powi(m as i32) * f.expr.diff(Q_VAR);
    section_jet(&integrand, t, &f.contour, order)
}

/// `(1/2πi) ∮ ρ_{A'₁}…ρ_{A'_{k−4}} f dλ`, for `k ≥ 4`.
pub fn constraint_field(f: &TwistorClass, t: &SectionPoint, indices: &[u8]) -> Result<C> {
    if f.k < 4 {
        return Err(Error::InvalidParameter(format!("no constraints for k = {}", f.k)));
    }
    let m = count_primed_zeros(indices, f.k - 4, "the constraint field")?;
    f.check_point(t)?;
    integrate(&f.contour, |z| {
        Ok(z.powi(m as i32) * TwistorClass::on_section(&f.expr, t, z)?)
    })
}

/// All `k − 3` independent constraints, ordered by the number of `0'`
/// indices; empty for `k ≤ 3`.
pub fn constraints(f: &TwistorClass, t: &SectionPoint) -> Result<Vec<C>> {
    if f.k < 4 {
        return Ok(Vec::new());
    }
    (0..=f.k - 4)
        .map(|m| {
            let idx: Vec<u8> = (0..f.k - 4).map(|i| u8::from(i >= m)).collect();
            constraint_field(f, t, &idx)
        })
        .collect()
}

/// `Σ(λ)` as an antisymmetric matrix on `coords`.
#[derive(Debug, Clone)]
pub struct SigmaForm {
    pub coords: Vec<String>,
    pub form: DMatrix<C>,
}

/// Tolerance for the constraint check in [`sigma_from_psi`].
pub const CONSTRAINT_TOLERANCE: f64 = 1e-8;

/// `Σ(λ) = c · d_hQ ∧ d_hζ` with `c =` [`SIGMA_CALIBRATION`].
///
/// `d_hζ` comes from the split kernels
/// `K_j(λ) = λ^{−a} (1/2πi) ∮ ζ^{a+j} ∂f/∂Q dζ/(ζ − λ)`, `a = max(k − 3, 0)`,
/// as the coefficient of `dt^{k−j}`. For `k = 2` the fibre coordinate `z` is
/// appended and the kernel is shifted so that `ζ(0) = z`.
pub fn sigma_from_psi(f: &TwistorClass, t: &SectionPoint, lambda: C) -> Result<SigmaForm> {
    let (a, kernels) = sigma_kernels(f, t, lambda)?;
    let k = f.k;
    let mut dzeta = vec![ZERO; k + 1];
    for (j, kernel) in kernels.iter().enumerate() {
        let value = integrate(&f.contour, |z| kernel.eval(&[(Q_VAR, t.q(z)), (LAMBDA_VAR, z)]))?;
        dzeta[k - j] = value / lambda.powi(a as i32);
    }
    let (coords, form) = assemble_sigma(k, lambda, &dzeta, ZERO, ONE);
    let form = DMatrix::from_fn(form.len(), form.len(), |r, c| form[r][c]);
    if form.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::DegenerateTwoForm("Σ vanishes identically".into()));
    }
    Ok(SigmaForm { coords, form })
}

/// Components of `Σ(λ)` as jets over `t⁰…t^k`; the `z` direction of the
/// `k = 2` form carries constant jets.
pub fn sigma_jet(f: &TwistorClass, t: &SectionPoint, lambda: C, order: u32) -> Result<Vec<Vec<Jet>>> {
    let (a, kernels) = sigma_kernels(f, t, lambda)?;
    let k = f.k;
    let shape = JetShape::uniform(&t_vars(k), order);
    let mut dzeta = Vec::with_capacity(k + 1);
    for kernel in kernels.iter().rev() {
        dzeta.push(section_jet(kernel, t, &f.contour, order)?.scale(ONE / lambda.powi(a as i32)));
    }
    let zero = Jet::constant(&shape, ZERO);
    let one = Jet::constant(&shape, ONE);
    Ok(assemble_sigma(k, lambda, &dzeta, zero, one).1)
}

/// Shared checks and the integrands of `d_hζ`, indexed by `j`.
fn sigma_kernels(f: &TwistorClass, t: &SectionPoint, lambda: C) -> Result<(usize, Vec<Expr>)> {
    f.check_point(t)?;
    f.expect_weight(2 - f.k as i32)?;
    let k = f.k;
    if k < 2 {
        return Err(Error::InvalidParameter("Σ needs k ≥ 2".into()));
    }
    if !f.contour.contains(lambda) {
        return Err(Error::InvalidParameter("λ must lie inside the contour".into()));
    }
    let a = k.saturating_sub(3);
    if a > 0 && lambda.norm() == 0.0 {
        return Err(Error::InvalidParameter("λ = 0 is excluded for k ≥ 4".into()));
    }
    let worst = constraints(f, t)?.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if worst > CONSTRAINT_TOLERANCE {
        return Err(Error::OffConstraintSurface(worst));
    }
    let z = Expr::var(LAMBDA_VAR);
    let mut cauchy = Expr::one() / (z.clone() - Expr::constant(lambda));
    if k == 2 {
        cauchy = cauchy - Expr::one() / z.clone();
    }
    let fq = f.expr.diff(Q_VAR);
    let kernels = (0..=k)
        .map(|j| z.powi((a + j) as i32) * fq.clone() * cauchy.clone())
        .collect();
    Ok((a, kernels))
}

/// `c · d_hQ ∧ d_hζ` from the `dt` coefficients of `d_hζ`.
fn assemble_sigma<T: Clone>(k: usize, lambda: C, dzeta: &[T], zero: T, one: T) -> (Vec<String>, Vec<Vec<T>>)
where
    for<'a> &'a T: std::ops::Mul<C, Output = T> + std::ops::Sub<&'a T, Output = T>,
{
    let mut coords = t_vars(k);
    let mut zeta = dzeta.to_vec();
    if k == 2 {
        zeta.push(one);
        coords.push("z".into());
    }
    let dim = zeta.len();
    let dq: Vec<C> = (0..dim)
        .map(|i| if i <= k { lambda.powi((k - i) as i32) } else { ZERO })
        .collect();
    let c = C::new(SIGMA_CALIBRATION, 0.0);
    let form = (0..dim)
        .map(|r| {
            (0..dim)
                .map(|s| {
                    if r == s {
                        zero.clone()
                    } else {
                        &(&zeta[s] * (dq[r] * c)) - &(&zeta[r] * (dq[s] * c))
                    }
                })
                .collect()
        })
        .collect();
    (coords, form)
}

/// For `k = 2`: `[Σ^{0'0'}, Σ^{0'1'}, Σ^{1'1'}]` on `(t⁰, t¹, t², z)`, read off
/// from `Σ(λ) = Σ^{1'1'} + λΣ^{0'1'} + λ²Σ^{0'0'}` at three nodes.
///
/// Fails when the wedge Gram matrix of the three forms is singular.
pub fn sigma_basis_k2(f: &TwistorClass, t: &SectionPoint) -> Result<[TwoForm; 3]> {
    if f.k != 2 {
        return Err(Error::InvalidParameter("the basis read-off needs k = 2".into()));
    }
    let r = 0.5 * f.contour.radius;
    let nodes = [f.contour.center, f.contour.center + r, f.contour.center - r];
    let mut samples = Vec::new();
    for &l in &nodes {
        samples.push((l, sigma_from_psi(f, t, l)?.form));
    }
    // Lagrange interpolation of a quadratic in λ
    let mut coeffs = [[[ZERO; 4]; 4]; 3];
    let (l0, l1, l2) = (nodes[0], nodes[1], nodes[2]);
    for (i, (li, s)) in samples.iter().enumerate() {
        let others: Vec<C> = [l0, l1, l2]
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| *v)
            .collect();
        let denom = (li - others[0]) * (li - others[1]);
        // (λ − a)(λ − b) = λ² − (a + b)λ + ab
        let basis = [
            others[0] * others[1] / denom,
            -(others[0] + others[1]) / denom,
            ONE / denom,
        ];
        for (p, b) in basis.iter().enumerate() {
            for r in 0..4 {
                for c in 0..4 {
                    coeffs[p][r][c] += b * s[(r, c)];
                }
            }
        }
    }
    let out = [coeffs[2], coeffs[1], coeffs[0]];
    let gram = DMatrix::from_fn(3, 3, |i, j| wedge2(&out[i], &out[j]));
    let scale = out.iter().flatten().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if gram.determinant().norm() <= 1e-12 * scale.powi(6).max(1e-300) {
        return Err(Error::DegenerateTwoForm(
            "the Σ components do not span a non-degenerate space".into(),
        ));
    }
    Ok(out)
}

/// Consistency report for `f = λ² ∂G/∂Q`.
#[derive(Debug, Clone)]
pub struct BridgeReport {
    /// `f` in the affine gauge; `λ²` is `(π·o)²` with `o_{A'} = (0, 1)`.
    pub f: Expr,
    /// `ψ_m` for `m = 0, …, 2k − 4`.
    pub psi: Vec<C>,
    /// Matching Hessian entries `∂²F/∂t^a∂t^b`, `a + b = 2k − 4 − m`.
    pub hessian: Vec<C>,
    pub max_mismatch: f64,
}

/// The class `f` of a potential `G` and the comparison of `ψ` with the
/// Hessian of `F`.
pub fn bridge_two_methods(g: &TwistorClass, t: &SectionPoint) -> Result<BridgeReport> {
    g.expect_weight(0)?;
    g.check_point(t)?;
    let k = g.k;
    if k < 2 {
        return Err(Error::InvalidParameter("the bridge needs k ≥ 2".into()));
    }
    let f_expr = Expr::var(LAMBDA_VAR).powi(2) * g.expr.diff(Q_VAR);
    let f = TwistorClass::patching(k, f_expr.clone(), g.contour)?;
    let jet = f_from_g_jet(g, t, 2)?;
    let mut psi = Vec::new();
    let mut hessian = Vec::new();
    for m in 0..=2 * k - 4 {
        psi.push(psi_component(&f, t, m)?);
        let s = 2 * k - 4 - m;
        let a = s.min(k);
        hessian.push(jet.partial(a).partial(s - a).value());
    }
    let max_mismatch = psi
        .iter()
        .zip(&hessian)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(BridgeReport {
        f: f_expr,
        psi,
        hessian,
        max_mismatch,
    })
}
