//! Hierarchy flows, the linearised wave operator, the recursion relation, Lax
//! operators and truncated twistor-coordinate expansions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{parse_expr, Expr, Jet, JetShape};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::plebanski::{HeavenlyPotential, Point, COORDS};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Name of the coordinate `x^{Ai}`.
pub fn coord_name(a: usize, i: usize) -> String {
    format!("x{a}{i}")
}

/// `x^{00} = y, x^{10} = −x, x^{01} = w, x^{11} = z` as substitutions from
/// four-dimensional potentials.
pub fn four_to_hierarchy() -> Vec<(&'static str, Expr)> {
    vec![
        ("y", Expr::var("x00")),
        ("x", -Expr::var("x10")),
        ("w", Expr::var("x01")),
        ("z", Expr::var("x11")),
    ]
}

/// Inverse of [`four_to_hierarchy`].
pub fn hierarchy_to_four() -> Vec<(&'static str, Expr)> {
    vec![
        ("x00", Expr::var("y")),
        ("x10", -Expr::var("x")),
        ("x01", Expr::var("w")),
        ("x11", Expr::var("z")),
    ]
}

/// Θ in the `2n + 2` variables `x^{Ai}`.
#[derive(Debug, Clone)]
pub struct HierarchyPotential {
    n: usize,
    theta: Expr,
    vars: Vec<String>,
}

impl HierarchyPotential {
    pub fn new(n: usize, theta: Expr) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("hierarchy level n must be ≥ 1".into()));
        }
        let vars: Vec<String> = (0..2).flat_map(|a| (0..=n).map(move |i| coord_name(a, i))).collect();
        theta.check_declared(&vars)?;
        Ok(Self { n, theta, vars })
    }

    pub fn parse(n: usize, src: &str) -> Result<Self> {
        Self::new(n, parse_expr(src)?)
    }

    /// The level-1 potential of a four-dimensional Θ.
    pub fn from_four(theta: &HeavenlyPotential) -> Result<Self> {
        let map = four_to_hierarchy();
        let refs: Vec<(&str, Expr)> = map.iter().map(|(k, v)| (*k, v.clone())).collect();
        Self::new(1, theta.expr().subs_all(&refs))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn expr(&self) -> &Expr {
        &self.theta
    }

    /// Variable order `x00 … x0n, x10 … x1n`.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn index(&self, a: usize, i: usize) -> usize {
        a * (self.n + 1) + i
    }

    fn check_point(&self, point: &[Complex64]) -> Result<()> {
        if point.len() != self.vars.len() {
            return Err(Error::IndexOutOfRange(format!(
                "expected {} coordinates, got {}",
                self.vars.len(),
                point.len()
            )));
        }
        Ok(())
    }

    pub fn jet(&self, point: &[Complex64], order: u32) -> Result<Jet> {
        self.check_point(point)?;
        let shape = JetShape::uniform(&self.vars, order);
        let bindings: Vec<(&str, Complex64)> = self
            .vars
            .iter()
            .map(String::as_str)
            .zip(point.iter().copied())
            .collect();
        self.theta.jet(&shape, &bindings)
    }

    fn check_flow(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange(format!("flow index {i} outside 1..={}", self.n)));
        }
        Ok(())
    }

    /// `∂_{Ai}∂_{B,j−1}Θ − ∂_{Bj}∂_{A,i−1}Θ + {∂_{A,i−1}Θ, ∂_{B,j−1}Θ}`.
    pub fn residual(&self, a: usize, i: usize, b: usize, j: usize, point: &[Complex64]) -> Result<Complex64> {
        self.check_flow(i)?;
        self.check_flow(j)?;
        if a > 1 || b > 1 {
            return Err(Error::IndexOutOfRange("spinor index must be 0 or 1".into()));
        }
        let t = self.jet(point, 2)?;
        let d2 = |p: usize, q: usize| t.partial(p).partial(q).value();
        let (ai, am, bj, bm) = (
            self.index(a, i),
            self.index(a, i - 1),
            self.index(b, j),
            self.index(b, j - 1),
        );
        let (y, x) = (self.index(0, 0), self.index(1, 0));
        // {f, g} = f_{x10} g_{x00} − f_{x00} g_{x10}
        let bracket = d2(am, x) * d2(bm, y) - d2(am, y) * d2(bm, x);
        Ok(d2(ai, bm) - d2(bj, am) + bracket)
    }

    /// Symbolic form of [`Self::residual`].
    pub fn residual_expr(&self, a: usize, i: usize, b: usize, j: usize) -> Result<Expr> {
        self.check_flow(i)?;
        self.check_flow(j)?;
        let v = |a: usize, i: usize| coord_name(a, i);
        let t = &self.theta;
        let f = t.diff(&v(a, i - 1));
        let g = t.diff(&v(b, j - 1));
        Ok(t.diff(&v(a, i)).diff(&v(b, j - 1)) - t.diff(&v(b, j)).diff(&v(a, i - 1)) + hierarchy_bracket(&f, &g))
    }

    /// `L_{Ai} Φ = ∂_{A,i−1}Φ − λ(∂_{Ai}Φ + {∂_{A,i−1}Θ, Φ})` with `Φ` an
    /// expression in the `x^{Ai}` and `lambda`.
    pub fn lax_apply(
        &self,
        phi: &Expr,
        a: usize,
        i: usize,
        lambda: Complex64,
        point: &[Complex64],
    ) -> Result<Complex64> {
        self.check_flow(i)?;
        self.check_point(point)?;
        let am = coord_name(a, i - 1);
        let ai = coord_name(a, i);
        let f = self.theta.diff(&am);
        let expr = phi.diff(&am) - Expr::var("lambda") * (phi.diff(&ai) + hierarchy_bracket(&f, phi));
        let mut b: Vec<(&str, Complex64)> = self
            .vars
            .iter()
            .map(String::as_str)
            .zip(point.iter().copied())
            .collect();
        b.push(("lambda", lambda));
        expr.eval(&b)
    }

    /// λ-coefficients of `L_{Ai}` applied to `Σ_j λ^j φ_j` (φ_j free of λ).
    pub fn lax_coefficients(&self, phi: &[Expr], a: usize, i: usize, point: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_flow(i)?;
        self.check_point(point)?;
        let am = coord_name(a, i - 1);
        let ai = coord_name(a, i);
        let f = self.theta.diff(&am);
        let b: Vec<(&str, Complex64)> = self
            .vars
            .iter()
            .map(String::as_str)
            .zip(point.iter().copied())
            .collect();
        let mut out = Vec::with_capacity(phi.len() + 1);
        for j in 0..=phi.len() {
            let mut e = Expr::zero();
            if j < phi.len() {
                e = e + phi[j].diff(&am);
            }
            if j >= 1 {
                let p = &phi[j - 1];
                e = e - p.diff(&ai) - hierarchy_bracket(&f, p);
            }
            out.push(e.eval(&b)?);
        }
        Ok(out)
    }

    /// Truncated expansions of `ω⁰, ω¹` through `λ^m`.
    pub fn omega_expansion(&self, m: usize) -> Result<OmegaExpansion> {
        let n = self.n;
        let max = 2 * n + 1;
        if m > max {
            return Err(Error::UndeterminedTail { requested: m, max });
        }
        let series = |a: usize| -> Vec<Expr> {
            (0..=m)
                .map(|j| {
                    if j <= n {
                        Expr::var(&coord_name(a, n - j))
                    } else if a == 0 {
                        self.theta.diff(&coord_name(1, j - n - 1))
                    } else {
                        -self.theta.diff(&coord_name(0, j - n - 1))
                    }
                })
                .collect()
        };
        Ok(OmegaExpansion {
            n,
            order: m,
            omega: [series(0), series(1)],
        })
    }

    /// Largest components of the `λ^{2n+1}` coefficient of `dω⁰ ∧ dω¹`, and of
    /// the `λ^{2n+2}` coefficient on components free of `dx^{0n}, dx^{1n}`.
    pub fn omega_sigma_tail(&self, point: &[Complex64]) -> Result<(f64, f64)> {
        let n = self.n;
        let dim = self.vars.len();
        let exp = self.omega_expansion(2 * n + 1)?;
        let shape = JetShape::uniform(&self.vars, 1);
        let b: Vec<(&str, Complex64)> = self
            .vars
            .iter()
            .map(String::as_str)
            .zip(point.iter().copied())
            .collect();
        let grads = |s: &[Expr]| -> Result<Vec<Vec<Complex64>>> {
            s.iter()
                .map(|e| {
                    let j = e.jet(&shape, &b)?;
                    Ok((0..dim).map(|v| j.partial(v).value()).collect())
                })
                .collect()
        };
        let g0 = grads(&exp.omega[0])?;
        let g1 = grads(&exp.omega[1])?;
        let coefficient = |p: usize| -> Vec<Vec<Complex64>> {
            let mut out = vec![vec![ZERO; dim]; dim];
            for a in 0..=p.min(2 * n + 1) {
                let bi = p - a;
                if bi > 2 * n + 1 {
                    continue;
                }
                for r in 0..dim {
                    for c in 0..dim {
                        out[r][c] += g0[a][r] * g1[bi][c] - g0[a][c] * g1[bi][r];
                    }
                }
            }
            out
        };
        let top = coefficient(2 * n + 1);
        let next = coefficient(2 * n + 2);
        let skip = [self.index(0, n), self.index(1, n)];
        let mut m1: f64 = 0.0;
        let mut m2: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                m1 = m1.max(top[r][c].norm());
                if !skip.contains(&r) && !skip.contains(&c) {
                    m2 = m2.max(next[r][c].norm());
                }
            }
        }
        Ok((m1, m2))
    }
}

/// `{f, g} = f_y g_x − f_x g_y` written in `x^{A0}`: `f_{x10} g_{x00} − f_{x00} g_{x10}`.
pub fn hierarchy_bracket(f: &Expr, g: &Expr) -> Expr {
    f.diff("x10") * g.diff("x00") - f.diff("x00") * g.diff("x10")
}

/// Coefficient lists of `ω⁰, ω¹` in the gauge `π_{1'} = 1`.
#[derive(Debug, Clone)]
pub struct OmegaExpansion {
    pub n: usize,
    pub order: usize,
    pub omega: [Vec<Expr>; 2],
}

/// `φ_xw + φ_yz + Θ_yy φ_xx + Θ_xx φ_yy − 2Θ_xy φ_xy`.
pub fn wave_operator(theta: &HeavenlyPotential, phi: &Expr, point: &Point) -> Result<Complex64> {
    let t = theta.jet(point, 2)?;
    let shape = JetShape::uniform(&COORDS, 2);
    let b: Vec<(&str, Complex64)> = COORDS.iter().copied().zip(point.iter().copied()).collect();
    let f = phi.jet(&shape, &b)?;
    let (w, z, x, y) = (0, 1, 2, 3);
    let d = |j: &Jet, p: usize, q: usize| j.partial(p).partial(q).value();
    Ok(
        d(&f, x, w) + d(&f, y, z) + d(&t, y, y) * d(&f, x, x) + d(&t, x, x) * d(&f, y, y)
            - 2.0 * d(&t, x, y) * d(&f, x, y),
    )
}

/// All monomials in `(w, z, x, y)` of total degree `1..=degree` that are not
/// functions of `(w, z)` alone.
pub fn recursion_ansatz(degree: u32) -> Vec<Expr> {
    let mut out = Vec::new();
    for total in 1..=degree {
        for a in 0..=total {
            for b in 0..=(total - a) {
                for c in 0..=(total - a - b) {
                    let d = total - a - b - c;
                    let exps = [a, b, c, d];
                    let mut m = Expr::one();
                    for (v, e) in COORDS.iter().zip(exps) {
                        if e > 0 {
                            m = m * Expr::var(v).powi(e as i32);
                        }
                    }
                    out.push(m);
                }
            }
        }
    }
    out
}

fn is_gauge(m: &Expr) -> bool {
    !m.depends_on("x") && !m.depends_on("y")
}

/// Sample points used by the recursion solver.
fn sample_points(count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| [0; 4].map(|_| Complex64::new(rng.gen_range(0.3..1.2), rng.gen_range(-0.2..0.2))))
        .collect()
}

/// Tolerances of [`recursion_step`].
#[derive(Debug, Clone, Copy)]
pub struct RecursionOptions {
    pub kernel_tolerance: f64,
    pub residual_tolerance: f64,
    pub seed: u64,
}

impl Default for RecursionOptions {
    fn default() -> Self {
        Self {
            kernel_tolerance: 1e-10,
            residual_tolerance: 1e-10,
            seed: 0x5eed,
        }
    }
}

/// Solves `∂_y δΘ₂ = (∂_w − Θ_xy ∂_y + Θ_yy ∂_x) δΘ₁` and
/// `−∂_x δΘ₂ = (∂_z + Θ_xx ∂_y − Θ_xy ∂_x) δΘ₁` over the span of `ansatz`.
///
/// Monomials in `(w, z)` alone are dropped from the ansatz. Coefficients within
/// `1e−11` of an integer are snapped; coefficients below `1e−12` are removed.
pub fn recursion_step(
    theta: &HeavenlyPotential,
    delta: &Expr,
    ansatz: &[Expr],
    opts: &RecursionOptions,
) -> Result<Expr> {
    delta.check_declared(&COORDS)?;
    let basis: Vec<&Expr> = ansatz.iter().filter(|m| !is_gauge(m)).collect();
    for m in &basis {
        m.check_declared(&COORDS)?;
    }
    let cols = basis.len();
    let points = sample_points((2 * cols).max(12), opts.seed);

    for p in points.iter().take(10) {
        let r = wave_operator(theta, delta, p)?;
        if r.norm() > opts.kernel_tolerance {
            return Err(Error::NotLinearizedSolution {
                residual: r.norm(),
                tolerance: opts.kernel_tolerance,
            });
        }
    }
    if cols == 0 {
        return Err(Error::AnsatzInsufficient("ansatz has no admissible monomials".into()));
    }

    let shape = JetShape::uniform(&COORDS, 1);
    let (w, z, x, y) = (0, 1, 2, 3);
    let mut a = DMatrix::<Complex64>::zeros(2 * points.len(), cols);
    let mut rhs = DVector::<Complex64>::zeros(2 * points.len());
    for (r, p) in points.iter().enumerate() {
        let b: Vec<(&str, Complex64)> = COORDS.iter().copied().zip(p.iter().copied()).collect();
        let t = theta.jet(p, 2)?;
        let d2 = |q: usize, s: usize| t.partial(q).partial(s).value();
        let (txx, tyy, txy) = (d2(x, x), d2(y, y), d2(x, y));
        let f = delta.jet(&shape, &b)?;
        let df = |q: usize| f.partial(q).value();
        rhs[2 * r] = df(w) - txy * df(y) + tyy * df(x);
        rhs[2 * r + 1] = df(z) + txx * df(y) - txy * df(x);
        for (k, m) in basis.iter().enumerate() {
            let mj = m.jet(&shape, &b)?;
            a[(2 * r, k)] = mj.partial(y).value();
            a[(2 * r + 1, k)] = -mj.partial(x).value();
        }
    }
    let ls = least_squares(&a, &rhs)?;
    let scale = rhs.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if ls.residual > opts.residual_tolerance * scale {
        return Err(Error::InconsistentSystem {
            residual: ls.residual,
            tolerance: opts.residual_tolerance * scale,
        });
    }
    if ls.rank < cols {
        return Err(Error::AnsatzInsufficient(format!(
            "normal equations have rank {} for {cols} unknowns",
            ls.rank
        )));
    }
    let mut out = Expr::zero();
    for (k, m) in basis.iter().enumerate() {
        let c = snap(ls.solution[k]);
        if c.norm() == 0.0 {
            continue;
        }
        let term = if c == Complex64::new(-1.0, 0.0) {
            -(*m).clone()
        } else {
            Expr::constant(c) * (*m).clone()
        };
        out = out + term;
    }
    Ok(out)
}

fn snap(c: Complex64) -> Complex64 {
    let part = |v: f64| {
        let r = v.round();
        if (v - r).abs() <= 1e-11 {
            r
        } else if v.abs() < 1e-12 {
            0.0
        } else {
            v
        }
    };
    Complex64::new(part(c.re), part(c.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn wave_operator_examples() {
        let zero = HeavenlyPotential::parse("0").unwrap();
        let p = [c(0.3), c(0.1), c(0.2), c(0.9)];
        assert_eq!(wave_operator(&zero, &parse_expr("w*x").unwrap(), &p).unwrap(), c(1.0));
        assert_eq!(wave_operator(&zero, &Expr::var("w"), &p).unwrap(), c(0.0));
        let xyw = HeavenlyPotential::parse("x*y*w").unwrap();
        let one = [c(1.0); 4];
        assert_eq!(wave_operator(&xyw, &parse_expr("y^2").unwrap(), &one).unwrap(), c(0.0));
    }

    #[test]
    fn flat_recursion_chain() {
        let zero = HeavenlyPotential::parse("0").unwrap();
        let ansatz = recursion_ansatz(3);
        let opts = RecursionOptions::default();
        let step = |src: &str| recursion_step(&zero, &parse_expr(src).unwrap(), &ansatz, &opts).unwrap();
        assert_eq!(step("w"), Expr::var("y"));
        assert_eq!(step("z"), -Expr::var("x"));
        assert!(step("y").is_zero());
    }

    #[test]
    fn recursion_rejects_non_kernel_input() {
        let zero = HeavenlyPotential::parse("0").unwrap();
        let err = recursion_step(
            &zero,
            &parse_expr("w*x").unwrap(),
            &recursion_ansatz(2),
            &RecursionOptions::default(),
        );
        assert!(matches!(err, Err(Error::NotLinearizedSolution { .. })));
    }

    #[test]
    fn recursion_detects_small_ansatz() {
        let theta = HeavenlyPotential::parse("w^2*y^3").unwrap();
        let err = recursion_step(
            &theta,
            &Expr::var("x"),
            &recursion_ansatz(2),
            &RecursionOptions::default(),
        );
        assert!(matches!(err, Err(Error::InconsistentSystem { .. })));
    }

    #[test]
    fn omega_tail_refused() {
        let h = HierarchyPotential::parse(1, "0").unwrap();
        assert!(matches!(
            h.omega_expansion(4),
            Err(Error::UndeterminedTail { requested: 4, max: 3 })
        ));
        let e = h.omega_expansion(1).unwrap();
        assert_eq!(e.omega[1][0], Expr::var("x11"));
        assert_eq!(e.omega[1][1], Expr::var("x10"));
    }

    #[test]
    fn flow_index_checked() {
        let h = HierarchyPotential::parse(2, "x00*x12").unwrap();
        assert!(h.residual(0, 0, 1, 1, &[c(0.0); 6]).is_err());
        assert!(h.residual(0, 1, 1, 3, &[c(0.0); 6]).is_err());
    }
}
