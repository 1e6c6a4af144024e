//! Heavenly potentials in four dimensions: residual, null tetrad, metric,
//! self-dual two-forms, curvature, twistor-equation residuals and symmetry types.
//!
//! Coordinates are ordered `(w, z, x, y)`. Tetrad vectors are indexed
//! `2A + A'`, so the order is `e_00', e_01', e_10', e_11'`.

use num_complex::Complex64;

use crate::analytic::{invert_jet_matrix, parse_expr, Expr, Jet, JetShape};
use crate::curvature::{
    self, add_forms, derivatives_by_differences, derivatives_from_jets, wedge1, CurvatureReport, TwoForm, M4,
};
use crate::error::{Error, Result};

pub const COORDS: [&str; 4] = ["w", "z", "x", "y"];
const W: usize = 0;
const Z: usize = 1;
const X: usize = 2;
const Y: usize = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Point = [Complex64; 4];

/// `ε_AB` with `ε_01 = 1`.
pub fn epsilon(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    }
}

/// Metric components at a point, with the tetrad that produced them if any.
#[derive(Debug, Clone)]
pub struct MetricSample {
    pub coords: Vec<String>,
    pub point: Vec<Complex64>,
    pub g: M4,
    pub tetrad: Option<M4>,
}

impl MetricSample {
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                m = m.max((self.g[a][b] - self.g[b][a]).norm());
            }
        }
        m
    }

    /// `max |g(e_AA', e_BB') − ε_AB ε_A'B'|`.
    pub fn tetrad_residual(&self) -> Option<f64> {
        let e = self.tetrad.as_ref()?;
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            for l in 0..4 {
                let mut s = ZERO;
                for a in 0..4 {
                    for b in 0..4 {
                        s += self.g[a][b] * e[k][a] * e[l][b];
                    }
                }
                let expect = epsilon(k / 2, l / 2) * epsilon(k % 2, l % 2);
                worst = worst.max((s - expect).norm());
            }
        }
        Some(worst)
    }
}

/// Second derivatives of Θ as jets.
struct Second {
    xx: Jet,
    yy: Jet,
    xy: Jet,
    xw: Jet,
    yz: Jet,
}

impl Second {
    fn of(theta: &Jet) -> Self {
        let x = theta.partial(X);
        let y = theta.partial(Y);
        Self {
            xx: x.partial(X),
            yy: y.partial(Y),
            xy: x.partial(Y),
            xw: x.partial(W),
            yz: y.partial(Z),
        }
    }

    fn residual(&self) -> Jet {
        &(&(&self.xw + &self.yz) + &(&self.xx * &self.yy)) - &(&self.xy * &self.xy)
    }

    /// Calibrated null tetrad, rows indexed `2A + A'`.
    fn tetrad(&self) -> Vec<Vec<Jet>> {
        let shape = self.xx.shape().clone();
        let k = |v: f64| Jet::constant(&shape, Complex64::new(v, 0.0));
        vec![
            vec![k(1.0), k(0.0), self.yy.clone(), -&self.xy],
            vec![k(0.0), k(0.0), k(0.0), k(1.0)],
            vec![k(0.0), k(-1.0), self.xy.clone(), -&self.xx],
            vec![k(0.0), k(0.0), k(1.0), k(0.0)],
        ]
    }

    /// Metric components in `(w, z, x, y)`.
    fn metric(&self) -> Vec<Vec<Jet>> {
        let shape = self.xx.shape().clone();
        let zero = Jet::constant(&shape, ZERO);
        let one = Jet::constant(&shape, ONE);
        let mut g = vec![vec![zero; 4]; 4];
        g[W][X] = one.clone();
        g[X][W] = one.clone();
        g[Z][Y] = one.clone();
        g[Y][Z] = one;
        g[Z][Z] = &self.xx * -2.0;
        g[W][W] = &self.yy * -2.0;
        g[W][Z] = &self.xy * 2.0;
        g[Z][W] = &self.xy * 2.0;
        g
    }
}

fn values(m: &[Vec<Jet>]) -> M4 {
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[i][j] = v.value();
        }
    }
    out
}

/// Two-forms (as jet matrices) `Σ^{0'0'}, Σ^{0'1'}, Σ^{1'1'}` from coframe rows.
fn sd_forms_from_coframe(theta: &[Vec<Jet>]) -> [Vec<Vec<Jet>>; 3] {
    let wedge = |a: &[Jet], b: &[Jet]| -> Vec<Vec<Jet>> {
        (0..4)
            .map(|i| (0..4).map(|j| &(&a[i] * &b[j]) - &(&a[j] * &b[i])).collect())
            .collect()
    };
    let sub = |p: Vec<Vec<Jet>>, q: Vec<Vec<Jet>>| -> Vec<Vec<Jet>> {
        p.iter()
            .zip(&q)
            .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
            .collect()
    };
    // coframe rows: θ^{00'}, θ^{01'}, θ^{10'}, θ^{11'}
    let (t00, t01, t10, t11) = (&theta[0], &theta[1], &theta[2], &theta[3]);
    let s00 = wedge(t01, t11);
    let s01 = sub(wedge(t00, t11), wedge(t10, t01));
    let s11 = wedge(t00, t10);
    [s00, s01, s11]
}

/// Coframe rows dual to the tetrad rows.
fn coframe_jets(tetrad: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    // columns of E are the tetrad vectors
    let e: Vec<Vec<Jet>> = (0..4).map(|a| (0..4).map(|k| tetrad[k][a].clone()).collect()).collect();
    invert_jet_matrix(&e).ok_or(Error::DegenerateTetrad)
}

/// `Σ^{1'1'} + λ Σ^{0'1'} + λ² Σ^{0'0'}`.
pub fn sigma_at(forms: &[TwoForm; 3], lambda: Complex64) -> TwoForm {
    let s = add_forms(&forms[2], &forms[1], lambda);
    add_forms(&s, &forms[0], lambda * lambda)
}

/// The metric `Σ ε_AB ε_A'B' θ^{AA'} ⊗ θ^{BB'}` of a tetrad (rows `2A + A'`).
pub fn metric_from_tetrad(tetrad: &M4) -> Result<M4> {
    let shape = JetShape::uniform(&COORDS, 0);
    let rows: Vec<Vec<Jet>> = tetrad
        .iter()
        .map(|r| r.iter().map(|v| Jet::constant(&shape, *v)).collect())
        .collect();
    let theta = values(&coframe_jets(&rows)?);
    let mut g = [[ZERO; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            let f = epsilon(k / 2, l / 2) * epsilon(k % 2, l % 2);
            if f == 0.0 {
                continue;
            }
            for a in 0..4 {
                for b in 0..4 {
                    g[a][b] += f * 0.5 * (theta[k][a] * theta[l][b] + theta[k][b] * theta[l][a]);
                }
            }
        }
    }
    Ok(g)
}

/// A candidate solution of the heavenly equation.
#[derive(Debug, Clone)]
pub struct HeavenlyPotential {
    theta: Expr,
}

impl HeavenlyPotential {
    pub fn new(theta: Expr) -> Result<Self> {
        theta.check_declared(&COORDS)?;
        Ok(Self { theta })
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::new(parse_expr(src)?)
    }

    pub fn expr(&self) -> &Expr {
        &self.theta
    }

    /// `Θ_xw + Θ_yz + Θ_xx Θ_yy − Θ_xy²` as an expression.
    pub fn residual_expr(&self) -> Expr {
        let t = &self.theta;
        let (xx, yy, xy) = (
            t.diff_many(&["x", "x"]),
            t.diff_many(&["y", "y"]),
            t.diff_many(&["x", "y"]),
        );
        t.diff_many(&["x", "w"]) + t.diff_many(&["y", "z"]) + xx * yy - xy.powi(2)
    }

    pub fn jet(&self, point: &Point, order: u32) -> Result<Jet> {
        let shape = JetShape::uniform(&COORDS, order);
        let bindings: Vec<(&str, Complex64)> = COORDS.iter().copied().zip(point.iter().copied()).collect();
        self.theta.jet(&shape, &bindings)
    }

    fn second(&self, point: &Point, order: u32) -> Result<Second> {
        Ok(Second::of(&self.jet(point, order + 2)?))
    }

    pub fn heavenly_residual(&self, point: &Point) -> Result<Complex64> {
        Ok(self.second(point, 0)?.residual().value())
    }

    pub fn tetrad(&self, point: &Point) -> Result<M4> {
        Ok(values(&self.second(point, 0)?.tetrad()))
    }

    pub fn metric(&self, point: &Point) -> Result<MetricSample> {
        let d = self.second(point, 0)?;
        Ok(MetricSample {
            coords: COORDS.iter().map(|s| s.to_string()).collect(),
            point: point.to_vec(),
            g: values(&d.metric()),
            tetrad: Some(values(&d.tetrad())),
        })
    }

    /// `[Σ^{0'0'}, Σ^{0'1'}, Σ^{1'1'}]` at the point.
    pub fn sd_two_forms(&self, point: &Point) -> Result<[TwoForm; 3]> {
        let d = self.second(point, 0)?;
        let forms = sd_forms_from_coframe(&coframe_jets(&d.tetrad())?);
        Ok([values(&forms[0]), values(&forms[1]), values(&forms[2])])
    }

    /// Largest component of `dΣ^{A'B'}` over the three forms.
    pub fn sd_closure_residual(&self, point: &Point) -> Result<f64> {
        let d = self.second(point, 1)?;
        let forms = sd_forms_from_coframe(&coframe_jets(&d.tetrad())?);
        let mut worst: f64 = 0.0;
        for s in &forms {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    for c in (b + 1)..4 {
                        let v = s[b][c].partial(a).value() + s[c][a].partial(b).value() + s[a][b].partial(c).value();
                        worst = worst.max(v.norm());
                    }
                }
            }
        }
        Ok(worst)
    }

    /// `−(dω⁰ ∧ dω¹)` truncated after `λ²`, with `ω⁰ = w + λy − λ²Θ_x` and
    /// `ω¹ = z − λx − λ²Θ_y`. Equals [`sigma_at`] of the tetrad forms iff the
    /// heavenly residual vanishes.
    pub fn omega_sigma(&self, point: &Point, lambda: Complex64) -> Result<TwoForm> {
        let t = self.jet(point, 2)?;
        let grad = |j: Jet| [W, Z, X, Y].map(|v| j.partial(v).value());
        let d_theta_x = grad(t.partial(X));
        let d_theta_y = grad(t.partial(Y));
        let unit = |i: usize| {
            let mut v = [ZERO; 4];
            v[i] = ONE;
            v
        };
        let neg = |v: [Complex64; 4]| v.map(|c| -c);
        let (dw, dz, dx_, dy) = (unit(W), unit(Z), unit(X), unit(Y));
        let c0 = wedge1(&dw, &dz);
        let c1 = add_forms(&wedge1(&dw, &neg(dx_)), &wedge1(&dy, &dz), ONE);
        let c2 = add_forms(
            &add_forms(&wedge1(&dw, &neg(d_theta_y)), &wedge1(&dy, &neg(dx_)), ONE),
            &wedge1(&neg(d_theta_x), &dz),
            ONE,
        );
        let s = add_forms(&add_forms(&c0, &c1, lambda), &c2, lambda * lambda);
        Ok(s.map(|r| r.map(|v| -v)))
    }

    /// Curvature from exact jets of order 4.
    pub fn curvature(&self, point: &Point) -> Result<CurvatureReport> {
        let d = self.second(point, 2)?;
        let md = derivatives_from_jets(&d.metric())?;
        let forms = sd_forms_from_coframe(&coframe_jets(&d.tetrad())?);
        let basis = [values(&forms[0]), values(&forms[1]), values(&forms[2])];
        curvature::curvature(&md, Some(&basis))
    }

    /// Curvature from central differences of the sampled metric.
    pub fn curvature_fd(&self, point: &Point, rel_step: f64) -> Result<CurvatureReport> {
        let md = derivatives_by_differences(|p| Ok(self.metric(p)?.g), point, rel_step)?;
        let basis = self.sd_two_forms(point)?;
        curvature::curvature(&md, Some(&basis))
    }
}

/// A totally symmetric primed spinor field of valence `k`; component `m` has
/// `m` indices equal to `1'`.
#[derive(Debug, Clone)]
pub struct KillingSpinorField {
    components: Vec<Expr>,
}

impl KillingSpinorField {
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidParameter(
                "a valence-k field needs k + 1 ≥ 2 components".into(),
            ));
        }
        for c in &components {
            c.check_declared(&COORDS)?;
        }
        Ok(Self { components })
    }

    pub fn valence(&self) -> usize {
        self.components.len() - 1
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Symmetrised frame derivative `e_{A(A'} L_{B'…)}` in the flat primed frame,
    /// indexed `[A][m]` with `m` the number of `1'` indices among `k + 1`.
    ///
    /// In the affine gauge the two primed legs enter as `e_{A1'}` and `−e_{A0'}`,
    /// i.e. the residual is the coefficient list of `(e_{A1'} − λ e_{A0'}) L(λ)`.
    pub fn residual(&self, theta: &HeavenlyPotential, point: &Point) -> Result<Vec<Vec<Complex64>>> {
        let k = self.valence();
        let tetrad = theta.tetrad(point)?;
        let shape = JetShape::uniform(&COORDS, 1);
        let bindings: Vec<(&str, Complex64)> = COORDS.iter().copied().zip(point.iter().copied()).collect();
        let grads: Vec<[Complex64; 4]> = self
            .components
            .iter()
            .map(|c| {
                let j = c.jet(&shape, &bindings)?;
                let mut g = [ZERO; 4];
                for (a, v) in g.iter_mut().enumerate() {
                    let mut alpha = [0u32; 4];
                    alpha[a] = 1;
                    *v = j.derivative(&alpha)?;
                }
                Ok(g)
            })
            .collect::<Result<_>>()?;
        let apply = |vec: &[Complex64; 4], grad: &[Complex64; 4]| -> Complex64 {
            vec.iter().zip(grad).map(|(a, b)| a * b).sum()
        };
        let kp1 = (k + 1) as f64;
        let mut out = vec![vec![ZERO; k + 2]; 2];
        for (a, row) in out.iter_mut().enumerate() {
            let e0 = &tetrad[2 * a];
            let e1 = &tetrad[2 * a + 1];
            for (m, slot) in row.iter_mut().enumerate() {
                let mut s = ZERO;
                if m >= 1 {
                    s += m as f64 * apply(e1, &grads[m - 1]);
                }
                if m <= k {
                    s -= (k + 1 - m) as f64 * apply(e0, &grads[m]);
                }
                *slot = s / kp1;
            }
        }
        Ok(out)
    }
}

/// Symmetry type of a lifted symmetry from its 2×2 primed matrix `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryKind {
    Triholomorphic,
    Killing,
    Homothety,
    General,
    TypeNNonconstant,
}

/// Primed data of a symmetry: the vector field, its primed matrix, and the
/// optional higher-valence spinor.
#[derive(Debug, Clone)]
pub struct SymmetryData {
    pub field: [Expr; 4],
    pub phi: [[Expr; 2]; 2],
    pub chi: Option<Vec<Expr>>,
}

impl SymmetryData {
    pub fn classify(&self, points: &[Point], tol: f64) -> Result<SymmetryKind> {
        let samples = points
            .iter()
            .map(|p| {
                let b: Vec<(&str, Complex64)> = COORDS.iter().copied().zip(p.iter().copied()).collect();
                let mut m = [[ZERO; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        m[i][j] = self.phi[i][j].eval(&b)?;
                    }
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(classify_symmetry(&samples, tol))
    }
}

fn eigenvalues2(m: &[[Complex64; 2]; 2]) -> (Complex64, Complex64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr / 4.0 - det).sqrt();
    (tr / 2.0 + disc, tr / 2.0 - disc)
}

/// Classifies sampled values of `φ`.
pub fn classify_symmetry(samples: &[[[Complex64; 2]; 2]], tol: f64) -> SymmetryKind {
    if samples.is_empty() {
        return SymmetryKind::General;
    }
    let eig: Vec<(Complex64, Complex64)> = samples.iter().map(eigenvalues2).collect();
    let traces: Vec<Complex64> = samples.iter().map(|m| m[0][0] + m[1][1]).collect();
    let scale = samples.iter().flatten().flatten().map(|v| v.norm()).fold(1.0, f64::max);
    let t = tol * scale;
    if eig.iter().all(|(a, b)| (a - b).norm() <= t) {
        return SymmetryKind::Triholomorphic;
    }
    if traces.iter().all(|tr| tr.norm() <= t) {
        return SymmetryKind::Killing;
    }
    if traces.iter().all(|tr| (tr - traces[0]).norm() <= t) {
        return SymmetryKind::Homothety;
    }
    let sorted = |(a, b): (Complex64, Complex64)| {
        if (a.re, a.im) <= (b.re, b.im) {
            (a, b)
        } else {
            (b, a)
        }
    };
    let first = sorted(eig[0]);
    let constant = eig.iter().all(|e| {
        let e = sorted(*e);
        (e.0 - first.0).norm() <= t && (e.1 - first.1).norm() <= t
    });
    if constant {
        SymmetryKind::General
    } else {
        SymmetryKind::TypeNNonconstant
    }
}
