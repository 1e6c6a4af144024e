//! Legendre transforms to linear data.
//!
//! The Gibbons-Hawking reduction takes a heavenly potential with `Θ_z = 0` to
//! a solution `F(p, y, w)` of `F_pw + F_yy = 0`. The hierarchy reduction takes
//! a hierarchy potential with `∂Θ/∂x^{1n} = 0` to a solution `F(t⁰, …, t^{2n})`
//! of the linear system `F_{i+1, j} = F_{i, j+1}`.
//!
//! For `n = 1` the two agree under `(t⁰, t¹, t²) = (−p, y, w)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic::{parse_expr, Expr, Jet, JetShape};
use crate::curvature::{self, derivatives_from_jets, CurvatureReport, TwoForm, M4};
use crate::error::{Error, Result};
use crate::hierarchy::{coord_name, HierarchyPotential};
use crate::plebanski::{HeavenlyPotential, MetricSample};

type C = Complex64;

const ZERO: C = Complex64::new(0.0, 0.0);
const ONE: C = Complex64::new(1.0, 0.0);

/// Variables of a Gibbons-Hawking `F`.
pub const GH_VARS: [&str; 3] = ["p", "y", "w"];
/// Coordinates of the Gibbons-Hawking metric.
pub const GH_COORDS: [&str; 4] = ["w", "y", "p", "z"];
const GW: usize = 0;
const GY: usize = 1;
const GP: usize = 2;
const GZ: usize = 3;

pub const NEWTON_TOLERANCE: f64 = 1e-12;
pub const NEWTON_MAX_STEPS: usize = 50;
/// Absolute threshold for `|∂F/∂t⁴|` in [`n2_metric`].
pub const SURFACE_TOLERANCE: f64 = 1e-10;

fn mat(n: usize, m: usize, f: impl Fn(usize, usize) -> C) -> DMatrix<C> {
    DMatrix::from_fn(n, m, f)
}

fn max_norm(v: &DMatrix<C>) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Damped Newton iteration for `r(x) = 0` with Jacobian `J(x)`.
///
/// Steps are halved until `‖r‖` decreases. Stops when the relative step is
/// below [`NEWTON_TOLERANCE`].
fn newton<F>(mut x: Vec<C>, eval: F) -> Result<Vec<C>>
where
    F: Fn(&[C]) -> Result<(Vec<C>, DMatrix<C>)>,
{
    let norm = |r: &[C]| r.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let (mut r, mut jac) = eval(&x)?;
    for _ in 0..NEWTON_MAX_STEPS {
        let det = jac.determinant();
        if !det.is_finite() || det.norm() < 1e-300 {
            return Err(Error::DegenerateLegendre(det.norm()));
        }
        let rhs = DMatrix::from_column_slice(r.len(), 1, &r);
        let step = jac
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(Error::DegenerateLegendre(det.norm()))?;
        let r0 = norm(&r);
        let scale = x.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let mut t = 1.0;
        loop {
            let trial: Vec<C> = x.iter().zip(step.iter()).map(|(a, d)| a - d * t).collect();
            match eval(&trial) {
                Ok((rt, jt)) if norm(&rt) <= r0 || t < 1e-3 || r0 == 0.0 => {
                    x = trial;
                    r = rt;
                    jac = jt;
                    break;
                }
                _ if t < 1e-3 => return Err(Error::LegendreInversionFailed("line search left the domain".into())),
                _ => t *= 0.5,
            }
        }
        if max_norm(&step) * t <= NEWTON_TOLERANCE * scale {
            return Ok(x);
        }
    }
    Err(Error::LegendreInversionFailed(format!(
        "no convergence in {NEWTON_MAX_STEPS} steps (residual {:e})",
        norm(&r)
    )))
}

/// Hessian of the Legendre dual.
///
/// For `Φ(u, v)` with blocks `A = Φ_uu`, `B = Φ_uv`, `C = Φ_vv`, the dual
/// `Ψ(p, v) = p·u − Φ` with `p = Φ_u` has `Ψ_pp = A⁻¹`, `Ψ_pv = −A⁻¹B` and
/// `Ψ_vv = −C + BᵀA⁻¹B`. The map is an involution.
pub fn dual_hessian(a: &DMatrix<C>, b: &DMatrix<C>, c: &DMatrix<C>) -> Result<(DMatrix<C>, DMatrix<C>, DMatrix<C>)> {
    let det = a.determinant();
    let ainv = a
        .clone()
        .try_inverse()
        .filter(|_| det.norm() > 1e-14 * max_norm(a).max(1.0).powi(a.nrows() as i32))
        .ok_or(Error::DegenerateLegendre(det.norm()))?;
    let pv = -(&ainv * b);
    let vv = -c + b.transpose() * &ainv * b;
    Ok((ainv, pv, vv))
}

/// One point of the Gibbons-Hawking Legendre transform.
#[derive(Debug, Clone)]
pub struct GhLegendre {
    /// Solution of `p = Θ_x`.
    pub x: C,
    pub f: C,
    /// `(F_p, F_y, F_w)`.
    pub gradient: [C; 3],
    /// Second derivatives of `F` in the order `(p, y, w)`.
    pub hessian: [[C; 3]; 3],
}

impl GhLegendre {
    /// `F_pw + F_yy`.
    pub fn wave_residual(&self) -> C {
        self.hessian[0][2] + self.hessian[1][1]
    }
}

/// Legendre transform of a `z`-independent heavenly potential at `(w, y, p)`.
pub fn legendre_gh(theta: &HeavenlyPotential, point: [C; 3], seed: C) -> Result<GhLegendre> {
    if theta.expr().depends_on("z") {
        return Err(Error::InvalidParameter("Θ must not depend on z".into()));
    }
    let [w, y, p] = point;
    let at = |x: C| [w, ZERO, x, y];
    let roots = newton(vec![seed], |x| {
        let j = theta.jet(&at(x[0]), 2)?;
        let tx = j.partial(2);
        Ok((vec![tx.value() - p], mat(1, 1, |_, _| tx.partial(2).value())))
    })?;
    let x = roots[0];
    let j = theta.jet(&at(x), 2)?;
    // u = x, v = (y, w)
    let d2 = |a: usize, b: usize| j.partial(a).partial(b).value();
    let a = mat(1, 1, |_, _| d2(2, 2));
    let b = mat(1, 2, |_, k| d2(2, [3, 0][k]));
    let c = mat(2, 2, |r, k| d2([3, 0][r], [3, 0][k]));
    let (fpp, fpv, fvv) = dual_hessian(&a, &b, &c)?;
    let mut hessian = [[ZERO; 3]; 3];
    hessian[0][0] = fpp[(0, 0)];
    for k in 0..2 {
        hessian[0][k + 1] = fpv[(0, k)];
        hessian[k + 1][0] = fpv[(0, k)];
        for l in 0..2 {
            hessian[k + 1][l + 1] = fvv[(k, l)];
        }
    }
    Ok(GhLegendre {
        x,
        f: p * x - j.value(),
        gradient: [x, -j.partial(3).value(), -j.partial(0).value()],
        hessian,
    })
}

/// A Gibbons-Hawking potential `F(p, y, w)` with `ψ = F_pp` and
/// `Ω = F_py dw − (F_pp/2) dy`.
#[derive(Debug, Clone)]
pub struct GhData {
    f: Expr,
}

/// Gibbons-Hawking metric at a point with its monopole residual.
#[derive(Debug, Clone)]
pub struct GhMetric {
    pub sample: MetricSample,
    pub psi: C,
    /// `max |∗dψ − dΩ|` over components, Hodge star of `¼dy² + dw dp`.
    pub monopole_residual: f64,
}

struct GhJets {
    psi: Jet,
    omega_w: Jet,
    omega_y: Jet,
}

impl GhData {
    pub fn new(f: Expr) -> Result<Self> {
        f.check_declared(&GH_VARS)?;
        Ok(Self { f })
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::new(parse_expr(src)?)
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    /// Jet of `F` over `(w, y, p, z)` at a metric point.
    fn jet(&self, point: &[C; 4], order: u32) -> Result<Jet> {
        let shape = JetShape::uniform(&GH_COORDS, order);
        let b: Vec<(&str, C)> = GH_COORDS.iter().copied().zip(point.iter().copied()).collect();
        self.f.jet(&shape, &b)
    }

    fn potentials(&self, point: &[C; 4], order: u32) -> Result<GhJets> {
        let f = self.jet(point, order + 2)?;
        let fp = f.partial(GP);
        let psi = fp.partial(GP);
        Ok(GhJets {
            omega_w: fp.partial(GY),
            omega_y: psi.scale(C::new(-0.5, 0.0)),
            psi,
        })
    }

    pub fn psi(&self, point: &[C; 4]) -> Result<C> {
        Ok(self.potentials(point, 0)?.psi.value())
    }

    /// `F_pw + F_yy`.
    pub fn wave_residual(&self, point: &[C; 4]) -> Result<C> {
        let f = self.jet(point, 2)?;
        Ok(f.partial(GP).partial(GW).value() + f.partial(GY).partial(GY).value())
    }

    /// Whether `|F_pw + F_yy|` stays below `tol` at every sample point.
    pub fn is_monopole(&self, points: &[[C; 4]], tol: f64) -> Result<bool> {
        for p in points {
            if self.wave_residual(p)?.norm() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn metric_jets(j: &GhJets) -> Result<Vec<Vec<Jet>>> {
        let inv = j.psi.recip().map_err(|_| Error::DegenerateGhPotential)?;
        let shape = j.psi.shape().clone();
        let zero = Jet::constant(&shape, ZERO);
        let mut g = vec![vec![zero; 4]; 4];
        // −ψ⁻¹ (dz + Ω_w dw + Ω_y dy)²
        let mut one_form = vec![Jet::constant(&shape, ZERO); 4];
        one_form[GW] = j.omega_w.clone();
        one_form[GY] = j.omega_y.clone();
        one_form[GZ] = Jet::constant(&shape, ONE);
        for a in 0..4 {
            for b in 0..4 {
                g[a][b] = -&(&(&one_form[a] * &one_form[b]) * &inv);
            }
        }
        let quarter = j.psi.scale(C::new(0.25, 0.0));
        let half = j.psi.scale(C::new(0.5, 0.0));
        g[GY][GY] = &g[GY][GY] + &quarter;
        g[GW][GP] = &g[GW][GP] + &half;
        g[GP][GW] = &g[GP][GW] + &half;
        Ok(g)
    }

    /// `g = ψ(¼dy² + dw dp) − ψ⁻¹(dz + Ω)²` at `(w, y, p, z)`.
    pub fn metric(&self, point: &[C; 4]) -> Result<GhMetric> {
        let j = self.potentials(point, 1)?;
        let psi = j.psi.value();
        if psi.norm() == 0.0 {
            return Err(Error::DegenerateGhPotential);
        }
        let g = Self::metric_jets(&j)?;
        let mut m = [[ZERO; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                m[a][b] = g[a][b].value();
            }
        }
        // ∗dψ for h = ¼dy² + dw dp, orientation (w, y, p), √|det h| = ¼:
        // ∗dψ = ½ψ_p dy∧dp + ψ_y dp∧dw + ½ψ_w dw∧dy
        let d = |f: &Jet, c: usize| f.partial(c).value();
        let star = [0.5 * d(&j.psi, GP), d(&j.psi, GY), 0.5 * d(&j.psi, GW)];
        let d_omega = [
            -d(&j.omega_y, GP),
            d(&j.omega_w, GP),
            d(&j.omega_y, GW) - d(&j.omega_w, GY),
        ];
        let monopole_residual = star
            .iter()
            .zip(&d_omega)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(GhMetric {
            sample: MetricSample {
                coords: GH_COORDS.iter().map(|s| s.to_string()).collect(),
                point: point.to_vec(),
                g: m,
                tetrad: None,
            },
            psi,
            monopole_residual,
        })
    }

    /// `[Σ^{0'0'}, Σ^{0'1'}, Σ^{1'1'}]` in `(w, y, p, z)`:
    /// `−dz∧dp + dy∧dF_p − dw∧dF_y`, `dz∧dy + dw∧dF_p`, `dz∧dw`.
    pub fn sd_two_forms(&self, point: &[C; 4]) -> Result<[TwoForm; 3]> {
        let f = self.jet(point, 2)?;
        let grad = |j: Jet| [GW, GY, GP, GZ].map(|c| j.partial(c).value());
        let dfp = grad(f.partial(GP));
        let dfy = grad(f.partial(GY));
        Ok(gh_forms(&dfp, &dfy))
    }

    /// Curvature from exact jets, with the three forms above as self-dual basis.
    pub fn curvature(&self, point: &[C; 4]) -> Result<CurvatureReport> {
        let j = self.potentials(point, 2)?;
        if j.psi.value().norm() == 0.0 {
            return Err(Error::DegenerateGhPotential);
        }
        let md = derivatives_from_jets(&Self::metric_jets(&j)?)?;
        let basis = self.sd_two_forms(point)?;
        curvature::curvature(&md, Some(&basis))
    }

    /// Inverse transform at `(w, y, x)`: solves `x = F_p` for `p` and returns
    /// `(Θ, p)` with `Θ = p x − F`.
    pub fn inverse_legendre(&self, point: [C; 3], seed: C) -> Result<(C, C)> {
        let [w, y, x] = point;
        let at = |p: C| [w, y, p, ZERO];
        let roots = newton(vec![seed], |p| {
            let fp = self.jet(&at(p[0]), 2)?.partial(GP);
            Ok((vec![fp.value() - x], mat(1, 1, |_, _| fp.partial(GP).value())))
        })?;
        let p = roots[0];
        let f = self.f.eval(&[("p", p), ("y", y), ("w", w)])?;
        Ok((p * x - f, p))
    }
}

/// `[Σ00, Σ01, Σ11]` on `(w, y, p, z)` from the gradients of `F_p` and `F_y`.
pub fn gh_forms(dfp: &[C; 4], dfy: &[C; 4]) -> [TwoForm; 3] {
    let unit = |i: usize| {
        let mut v = [ZERO; 4];
        v[i] = ONE;
        v
    };
    let w = |a: &[C; 4], b: &[C; 4]| curvature::wedge1(a, b);
    let add = |a: &TwoForm, b: &TwoForm, s: f64| curvature::add_forms(a, b, C::new(s, 0.0));
    let (dw, dy, dp, dz) = (unit(GW), unit(GY), unit(GP), unit(GZ));
    let s00 = add(&add(&w(&dp, &dz), &w(&dy, dfp), 1.0), &w(&dw, dfy), -1.0);
    let s01 = add(&w(&dz, &dy), &w(&dw, dfp), 1.0);
    let s11 = w(&dz, &dw);
    [s00, s01, s11]
}

pub fn t_name(i: usize) -> String {
    format!("t{i}")
}

/// A potential `F(t⁰, …, t^{2n})` for the linear wave system.
#[derive(Debug, Clone)]
pub struct HierarchyF {
    n: usize,
    f: Expr,
    vars: Vec<String>,
}

impl HierarchyF {
    pub fn new(n: usize, f: Expr) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let vars: Vec<String> = (0..=2 * n).map(t_name).collect();
        f.check_declared(&vars)?;
        Ok(Self { n, f, vars })
    }

    pub fn parse(n: usize, src: &str) -> Result<Self> {
        Self::new(n, parse_expr(src)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn jet(&self, point: &[C], order: u32) -> Result<Jet> {
        if point.len() != self.vars.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.vars.len(),
                point.len()
            )));
        }
        let shape = JetShape::uniform(&self.vars, order);
        let b: Vec<(&str, C)> = self
            .vars
            .iter()
            .map(String::as_str)
            .zip(point.iter().copied())
            .collect();
        self.f.jet(&shape, &b)
    }

    /// Hessian of `F` at a point.
    pub fn hessian(&self, point: &[C]) -> Result<DMatrix<C>> {
        let j = self.jet(point, 2)?;
        let m = self.vars.len();
        Ok(mat(m, m, |a, b| j.partial(a).partial(b).value()))
    }

    /// `∂²F/∂t^{i+1}∂t^j − ∂²F/∂t^i∂t^{j+1}`.
    pub fn wave_system_residual(&self, i: usize, j: usize, point: &[C]) -> Result<C> {
        wave_entry(&self.hessian(point)?, self.n, i, j)
    }

    /// Largest wave-system residual over all index pairs.
    pub fn max_wave_residual(&self, point: &[C]) -> Result<f64> {
        max_wave(&self.hessian(point)?, self.n)
    }
}

fn wave_entry(h: &DMatrix<C>, n: usize, i: usize, j: usize) -> Result<C> {
    if i >= 2 * n || j >= 2 * n {
        return Err(Error::IndexOutOfRange(format!(
            "wave-system indices ({i}, {j}) must lie in 0..{}",
            2 * n
        )));
    }
    Ok(h[(i + 1, j)] - h[(i, j + 1)])
}

fn max_wave(h: &DMatrix<C>, n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..2 * n {
        for j in 0..2 * n {
            worst = worst.max(wave_entry(h, n, i, j)?.norm());
        }
    }
    Ok(worst)
}

/// Rank of the wave system as linear conditions on a symmetric Hessian.
pub fn wave_system_rank(n: usize) -> usize {
    let m = 2 * n + 1;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect();
    let col = |a: usize, b: usize| pairs.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
    let rows = 4 * n * n;
    let mut eq = DMatrix::<f64>::zeros(rows, pairs.len());
    for i in 0..2 * n {
        for j in 0..2 * n {
            let r = i * 2 * n + j;
            eq[(r, col(i + 1, j))] += 1.0;
            eq[(r, col(i, j + 1))] -= 1.0;
        }
    }
    eq.rank(1e-10)
}

/// One point of the hierarchy Legendre transform.
#[derive(Debug, Clone)]
pub struct HierarchyLegendre {
    pub n: usize,
    pub t: Vec<C>,
    /// `x^{10}, …, x^{1,n−1}` solving `p^i = ∂Θ/∂x^{1i}`.
    pub x1: Vec<C>,
    pub f: C,
    /// `∂F/∂t^k`.
    pub gradient: Vec<C>,
    /// `∂²F/∂t^k∂t^l`.
    pub hessian: DMatrix<C>,
}

impl HierarchyLegendre {
    pub fn wave_system_residual(&self, i: usize, j: usize) -> Result<C> {
        wave_entry(&self.hessian, self.n, i, j)
    }

    pub fn max_wave_residual(&self) -> f64 {
        max_wave(&self.hessian, self.n).unwrap_or(f64::INFINITY)
    }
}

/// Legendre transform of a hierarchy potential independent of `x^{1n}`.
///
/// `t` holds `t^{n−i−1} = p^i` and `t^{n+i} = x^{0i}`; `seeds` are starting
/// values for `x^{1i}`, `i < n`.
pub fn hierarchy_legendre(h: &HierarchyPotential, t: &[C], seeds: &[C]) -> Result<HierarchyLegendre> {
    let n = h.n();
    if h.expr().depends_on(&coord_name(1, n)) {
        return Err(Error::InvalidParameter(format!(
            "Θ must not depend on {}",
            coord_name(1, n)
        )));
    }
    if t.len() != 2 * n + 1 || seeds.len() != n {
        return Err(Error::InvalidParameter(format!(
            "expected {} t-coordinates and {n} seeds",
            2 * n + 1
        )));
    }
    let p: Vec<C> = (0..n).map(|i| t[n - i - 1]).collect();
    let point = |x1: &[C]| {
        let mut v = vec![ZERO; 2 * n + 2];
        for i in 0..=n {
            v[h.index(0, i)] = t[n + i];
        }
        for i in 0..n {
            v[h.index(1, i)] = x1[i];
        }
        v
    };
    let u: Vec<usize> = (0..n).map(|i| h.index(1, i)).collect();
    let v: Vec<usize> = (0..=n).map(|i| h.index(0, i)).collect();
    let x1 = newton(seeds.to_vec(), |x1| {
        let j = h.jet(&point(x1), 2)?;
        let grad: Vec<Jet> = u.iter().map(|&k| j.partial(k)).collect();
        let r = (0..n).map(|i| grad[i].value() - p[i]).collect();
        Ok((r, mat(n, n, |a, b| grad[a].partial(u[b]).value())))
    })?;
    let j = h.jet(&point(&x1), 2)?;
    let d2 = |a: usize, b: usize| j.partial(a).partial(b).value();
    let a = mat(n, n, |r, c| d2(u[r], u[c]));
    let b = mat(n, n + 1, |r, c| d2(u[r], v[c]));
    let c = mat(n + 1, n + 1, |r, k| d2(v[r], v[k]));
    let (fpp, fpv, fvv) = dual_hessian(&a, &b, &c)?;
    // position in t of p^i and x^{0i}
    let tp = |i: usize| n - i - 1;
    let tv = |i: usize| n + i;
    let m = 2 * n + 1;
    let mut hessian = DMatrix::zeros(m, m);
    let mut gradient = vec![ZERO; m];
    for i in 0..n {
        gradient[tp(i)] = x1[i];
        for k in 0..n {
            hessian[(tp(i), tp(k))] = fpp[(i, k)];
        }
        for k in 0..=n {
            hessian[(tp(i), tv(k))] = fpv[(i, k)];
            hessian[(tv(k), tp(i))] = fpv[(i, k)];
        }
    }
    for i in 0..=n {
        gradient[tv(i)] = -j.partial(v[i]).value();
        for k in 0..=n {
            hessian[(tv(i), tv(k))] = fvv[(i, k)];
        }
    }
    let f = (0..n).map(|i| p[i] * x1[i]).sum::<C>() - j.value();
    Ok(HierarchyLegendre {
        n,
        t: t.to_vec(),
        x1,
        f,
        gradient,
        hessian,
    })
}

/// Leaf coordinates `(x^{00}, x^{01}, x^{10}, x^{11})`.
pub const LEAF_COORDS: [&str; 4] = ["x00", "x01", "x10", "x11"];

fn leaf_metric_jets(h: &HierarchyPotential, point: &[C], order: u32) -> Result<Vec<Vec<Jet>>> {
    if point.len() != h.vars().len() {
        return Err(Error::InvalidParameter(format!(
            "expected {} coordinates, got {}",
            h.vars().len(),
            point.len()
        )));
    }
    let shape = JetShape::uniform(&LEAF_COORDS, order + 2);
    let b: Vec<(&str, C)> = h.vars().iter().map(String::as_str).zip(point.iter().copied()).collect();
    let theta = h.expr().jet(&shape, &b)?;
    let (x00, x01, x10, x11) = (0, 1, 2, 3);
    let k = |v: f64| Jet::constant(&shape, C::new(v, 0.0));
    let d2 = |a: usize, b: usize| theta.partial(a).partial(b);
    let mut g = vec![vec![k(0.0); 4]; 4];
    g[x10][x01] = k(-1.0);
    g[x01][x10] = k(-1.0);
    g[x11][x00] = k(1.0);
    g[x00][x11] = k(1.0);
    g[x11][x11] = d2(x10, x10).scale(C::new(-2.0, 0.0));
    g[x01][x01] = d2(x00, x00).scale(C::new(-2.0, 0.0));
    let cross = d2(x00, x10).scale(C::new(-2.0, 0.0));
    g[x01][x11] = cross.clone();
    g[x11][x01] = cross;
    Ok(g)
}

/// Metric on the leaf through `point` with `x^{Ai}` fixed for `i > 1`:
/// `−2dx^{10}dx^{01} + 2dx^{11}dx^{00} − 2Θ_{10,10}(dx^{11})² − 2Θ_{00,00}(dx^{01})²
///  − 4Θ_{00,10}dx^{01}dx^{11}`.
pub fn leaf_metric(h: &HierarchyPotential, point: &[C]) -> Result<MetricSample> {
    let g = leaf_metric_jets(h, point, 0)?;
    let mut m = [[ZERO; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            m[a][b] = g[a][b].value();
        }
    }
    Ok(MetricSample {
        coords: LEAF_COORDS.iter().map(|s| s.to_string()).collect(),
        point: point.to_vec(),
        g: m,
        tetrad: None,
    })
}

/// Curvature of the leaf metric from exact jets.
pub fn leaf_curvature(h: &HierarchyPotential, point: &[C]) -> Result<CurvatureReport> {
    let md = derivatives_from_jets(&leaf_metric_jets(h, point, 2)?)?;
    curvature::curvature(&md, None)
}

/// The `n = 2` metric in `(t⁰, t¹, t², t³)` on the surface `F₄ = 0`, with
/// `M = F₀₁² − F₀₀F₁₁` and `N = F₀₁² + F₀₀F₁₁`.
pub fn n2_metric(f: &HierarchyF, t: &[C]) -> Result<MetricSample> {
    if f.n() != 2 {
        return Err(Error::InvalidParameter(format!("n2_metric needs n = 2, got {}", f.n())));
    }
    let j = f.jet(t, 2)?;
    let f4 = j.partial(4).value();
    if f4.norm() > SURFACE_TOLERANCE {
        return Err(Error::OffSurface(f4.norm()));
    }
    let d = |a: usize, b: usize| j.partial(a).partial(b).value();
    let (f00, f01, f11, f03) = (d(0, 0), d(0, 1), d(1, 1), d(0, 3));
    let m = f01 * f01 - f00 * f11;
    if m.norm() < 1e-14 {
        return Err(Error::MDegenerate(m.norm()));
    }
    let nn = f01 * f01 + f00 * f11;
    let mut g: M4 = [[ZERO; 4]; 4];
    // coefficient of dt^a dt^b in the symmetric product
    let mut put = |a: usize, b: usize, c: C| {
        if a == b {
            g[a][a] += c / m;
        } else {
            g[a][b] += c / (2.0 * m);
            g[b][a] += c / (2.0 * m);
        }
    };
    put(1, 2, f01 * nn);
    put(0, 2, f00 * nn);
    put(2, 2, f11 * f01 * f01);
    put(3, 3, f11.powi(3));
    put(2, 3, 2.0 * f01 * f11 * f11);
    put(0, 1, 2.0 * f01 * f00 * f00);
    put(0, 0, f00.powi(3));
    put(1, 1, f00 * f01 * f01);
    put(1, 3, f11 * nn + f01 * f00 * f03);
    put(0, 3, 3.0 * f01 * f00 * f11 - f01.powi(3) + f00 * f00 * f03);
    Ok(MetricSample {
        coords: (0..4).map(t_name).collect(),
        point: t.to_vec(),
        g,
        tetrad: None,
    })
}

/// The `n = 2` metric obtained by pulling the leaf metric back along
/// `(x^{00}, x^{01}, x^{10}, x^{11}) = (t², t³, F₁, F₀)` at fixed `t⁴`, halved
/// to the normalisation of [`n2_metric`]. Agrees with [`n2_metric`] except in
/// the `dt⁰dt³` and `dt¹dt³` terms, which here carry no `F₀₃` contribution.
pub fn n2_leaf_metric(f: &HierarchyF, t: &[C]) -> Result<MetricSample> {
    let mut m = n2_metric(f, t)?;
    let j = f.jet(t, 2)?;
    let d = |a: usize, b: usize| j.partial(a).partial(b).value();
    let (f00, f01, f11, f03) = (d(0, 0), d(0, 1), d(1, 1), d(0, 3));
    let mm = f01 * f01 - f00 * f11;
    let d03 = f00 * f00 * f03 / (2.0 * mm);
    let d13 = f01 * f00 * f03 / (2.0 * mm);
    m.g[0][3] -= d03;
    m.g[3][0] -= d03;
    m.g[1][3] -= d13;
    m.g[3][1] -= d13;
    Ok(m)
}
