//! Levi-Civita curvature of a holomorphic 4-metric from its second-order jet.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::analytic::Jet;
use crate::error::{Error, Result};

pub type M4 = [[Complex64; 4]; 4];
pub type TwoForm = M4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Metric components with first and second partials at one point.
///
/// `dg[c][a][b] = ∂_c g_ab`, `ddg[c][d][a][b] = ∂_c ∂_d g_ab`.
#[derive(Debug, Clone)]
pub struct MetricDerivatives {
    pub g: M4,
    pub dg: [M4; 4],
    pub ddg: [[M4; 4]; 4],
}

#[derive(Debug, Clone)]
pub struct CurvatureReport {
    /// `R_abcd` with all indices lowered.
    pub riemann: [[M4; 4]; 4],
    pub ricci: M4,
    pub scalar: Complex64,
    /// `R_abcd Σ_i^ab Σ_j^cd` for the supplied self-dual basis.
    pub sd_block: Option<[[Complex64; 3]; 3]>,
    /// Trace-free part of `sd_block`.
    pub sd_weyl: Option<[[Complex64; 3]; 3]>,
}

impl CurvatureReport {
    pub fn max_ricci(&self) -> f64 {
        self.ricci.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_sd_weyl(&self) -> f64 {
        self.sd_weyl
            .iter()
            .flatten()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_riemann(&self) -> f64 {
        self.riemann
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

fn to_matrix(m: &M4) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

fn from_matrix(m: &Matrix4<Complex64>) -> M4 {
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

pub fn invert_metric(g: &M4) -> Result<M4> {
    let scale = g.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let m = to_matrix(g);
    if m.determinant().norm() <= 1e-14 * scale.powi(4).max(1e-300) {
        return Err(Error::DegenerateMetric);
    }
    m.try_inverse()
        .map(|inv| from_matrix(&inv))
        .ok_or(Error::DegenerateMetric)
}

/// Reads metric derivatives off a 4×4 array of jets of order ≥ 2 in four variables.
pub fn derivatives_from_jets(g: &[Vec<Jet>]) -> Result<MetricDerivatives> {
    let mut out = MetricDerivatives {
        g: [[ZERO; 4]; 4],
        dg: [[[ZERO; 4]; 4]; 4],
        ddg: [[[[ZERO; 4]; 4]; 4]; 4],
    };
    for a in 0..4 {
        for b in 0..4 {
            let jet = &g[a][b];
            out.g[a][b] = jet.value();
            for c in 0..4 {
                let mut alpha = [0u32; 4];
                alpha[c] += 1;
                out.dg[c][a][b] = jet.derivative(&alpha)?;
                for d in 0..4 {
                    let mut beta = alpha;
                    beta[d] += 1;
                    out.ddg[c][d][a][b] = jet.derivative(&beta)?;
                }
            }
        }
    }
    Ok(out)
}

/// Central finite differences of a sampled metric field with relative step `rel_step`.
pub fn derivatives_by_differences<F>(metric: F, point: &[Complex64; 4], rel_step: f64) -> Result<MetricDerivatives>
where
    F: Fn(&[Complex64; 4]) -> Result<M4>,
{
    let h: Vec<f64> = point.iter().map(|x| rel_step * x.norm().max(1.0)).collect();
    let shifted = |moves: &[(usize, f64)]| -> Result<M4> {
        let mut p = *point;
        for &(c, s) in moves {
            p[c] += Complex64::new(s * h[c], 0.0);
        }
        metric(&p)
    };
    let g = metric(point)?;
    let mut dg = [[[ZERO; 4]; 4]; 4];
    let mut ddg = [[[[ZERO; 4]; 4]; 4]; 4];
    for c in 0..4 {
        let plus = shifted(&[(c, 1.0)])?;
        let minus = shifted(&[(c, -1.0)])?;
        for a in 0..4 {
            for b in 0..4 {
                dg[c][a][b] = (plus[a][b] - minus[a][b]) / (2.0 * h[c]);
                ddg[c][c][a][b] = (plus[a][b] - 2.0 * g[a][b] + minus[a][b]) / (h[c] * h[c]);
            }
        }
        for d in (c + 1)..4 {
            let pp = shifted(&[(c, 1.0), (d, 1.0)])?;
            let pm = shifted(&[(c, 1.0), (d, -1.0)])?;
            let mp = shifted(&[(c, -1.0), (d, 1.0)])?;
            let mm = shifted(&[(c, -1.0), (d, -1.0)])?;
            for a in 0..4 {
                for b in 0..4 {
                    let v = (pp[a][b] - pm[a][b] - mp[a][b] + mm[a][b]) / (4.0 * h[c] * h[d]);
                    ddg[c][d][a][b] = v;
                    ddg[d][c][a][b] = v;
                }
            }
        }
    }
    Ok(MetricDerivatives { g, dg, ddg })
}

/// Riemann, Ricci and scalar curvature; the self-dual block when a basis of
/// self-dual two-forms (lower indices) is supplied.
pub fn curvature(md: &MetricDerivatives, sd_basis: Option<&[TwoForm; 3]>) -> Result<CurvatureReport> {
    let g = &md.g;
    let gi = invert_metric(g)?;
    let n = 4;

    // Γ_abc = ½(∂_b g_ac + ∂_c g_ab − ∂_a g_bc)
    let mut gamma_low = [[[ZERO; 4]; 4]; 4];
    // ∂_d Γ_abc
    let mut dgamma_low = [[[[ZERO; 4]; 4]; 4]; 4];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                gamma_low[a][b][c] = 0.5 * (md.dg[b][a][c] + md.dg[c][a][b] - md.dg[a][b][c]);
                for d in 0..n {
                    dgamma_low[d][a][b][c] = 0.5 * (md.ddg[d][b][a][c] + md.ddg[d][c][a][b] - md.ddg[d][a][b][c]);
                }
            }
        }
    }
    // ∂_d g^ae = −g^af ∂_d g_fh g^he
    let mut dgi = [[[ZERO; 4]; 4]; 4];
    for d in 0..n {
        for a in 0..n {
            for e in 0..n {
                let mut s = ZERO;
                for f in 0..n {
                    for h in 0..n {
                        s += gi[a][f] * md.dg[d][f][h] * gi[h][e];
                    }
                }
                dgi[d][a][e] = -s;
            }
        }
    }
    let mut gamma = [[[ZERO; 4]; 4]; 4];
    let mut dgamma = [[[[ZERO; 4]; 4]; 4]; 4];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut s = ZERO;
                for e in 0..n {
                    s += gi[a][e] * gamma_low[e][b][c];
                }
                gamma[a][b][c] = s;
                for d in 0..n {
                    let mut t = ZERO;
                    for e in 0..n {
                        t += dgi[d][a][e] * gamma_low[e][b][c] + gi[a][e] * dgamma_low[d][e][b][c];
                    }
                    dgamma[d][a][b][c] = t;
                }
            }
        }
    }
    // R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
    let mut rup = [[[[ZERO; 4]; 4]; 4]; 4];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                    for e in 0..n {
                        s += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                    }
                    rup[a][b][c][d] = s;
                }
            }
        }
    }
    let mut riemann = [[[[ZERO; 4]; 4]; 4]; 4];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = ZERO;
                    for e in 0..n {
                        s += g[a][e] * rup[e][b][c][d];
                    }
                    riemann[a][b][c][d] = s;
                }
            }
        }
    }
    let mut ricci = [[ZERO; 4]; 4];
    for b in 0..n {
        for d in 0..n {
            let mut s = ZERO;
            for a in 0..n {
                s += rup[a][b][a][d];
            }
            ricci[b][d] = s;
        }
    }
    let mut scalar = ZERO;
    for b in 0..n {
        for d in 0..n {
            scalar += gi[b][d] * ricci[b][d];
        }
    }

    let (sd_block, sd_weyl) = match sd_basis {
        Some(basis) => {
            let (block, weyl) = self_dual_block(&riemann, &gi, basis)?;
            (Some(block), Some(weyl))
        }
        None => (None, None),
    };
    Ok(CurvatureReport {
        riemann,
        ricci,
        scalar,
        sd_block,
        sd_weyl,
    })
}

fn raise(form: &TwoForm, gi: &M4) -> TwoForm {
    let mut out = [[ZERO; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = ZERO;
            for c in 0..4 {
                for d in 0..4 {
                    s += gi[a][c] * gi[b][d] * form[c][d];
                }
            }
            out[a][b] = s;
        }
    }
    out
}

type Block = [[Complex64; 3]; 3];

fn self_dual_block(riemann: &[[M4; 4]; 4], gi: &M4, basis: &[TwoForm; 3]) -> Result<(Block, Block)> {
    let up: Vec<TwoForm> = basis.iter().map(|s| raise(s, gi)).collect();
    let mut w = [[ZERO; 3]; 3];
    let mut h = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = ZERO;
            let mut t = ZERO;
            for a in 0..4 {
                for b in 0..4 {
                    t += up[i][a][b] * basis[j][a][b];
                    for c in 0..4 {
                        for d in 0..4 {
                            s += riemann[a][b][c][d] * up[i][a][b] * up[j][c][d];
                        }
                    }
                }
            }
            w[i][j] = s;
            h[i][j] = t;
        }
    }
    let hm = nalgebra::Matrix3::from_fn(|i, j| h[i][j]);
    let hi = hm
        .try_inverse()
        .ok_or_else(|| Error::DegenerateTwoForm("self-dual basis is not independent".into()))?;
    let mut trace = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            trace += hi[(i, j)] * w[j][i];
        }
    }
    let mut weyl = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            weyl[i][j] = w[i][j] - trace / 3.0 * h[i][j];
        }
    }
    Ok((w, weyl))
}

/// `α ∧ β` for one-forms given by components.
pub fn wedge1(alpha: &[Complex64; 4], beta: &[Complex64; 4]) -> TwoForm {
    let mut out = [[ZERO; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = alpha[a] * beta[b] - alpha[b] * beta[a];
        }
    }
    out
}

/// Coefficient of `dx⁰∧dx¹∧dx²∧dx³` in `A ∧ B`.
pub fn wedge2(a: &TwoForm, b: &TwoForm) -> Complex64 {
    a[0][1] * b[2][3] - a[0][2] * b[1][3] + a[0][3] * b[1][2] + a[1][2] * b[0][3] - a[1][3] * b[0][2]
        + a[2][3] * b[0][1]
}

pub fn add_forms(a: &TwoForm, b: &TwoForm, scale: Complex64) -> TwoForm {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] += scale * b[i][j];
        }
    }
    out
}

pub fn max_abs(m: &M4) -> f64 {
    m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Round 2-sphere × flat plane: Ricci = diag(1, sin²θ, 0, 0), scalar 2.
    fn sphere_metric(p: &[Complex64; 4]) -> Result<M4> {
        let mut g = [[ZERO; 4]; 4];
        g[0][0] = c(1.0);
        g[1][1] = p[0].sin() * p[0].sin();
        g[2][2] = c(1.0);
        g[3][3] = c(1.0);
        Ok(g)
    }

    #[test]
    fn sphere_curvature_by_differences() {
        let p = [c(0.9), c(0.3), c(0.0), c(0.0)];
        let md = derivatives_by_differences(sphere_metric, &p, 1e-4).unwrap();
        let r = curvature(&md, None).unwrap();
        assert!((r.scalar - c(2.0)).norm() < 1e-6);
        assert!((r.ricci[1][1] - c(0.9f64.sin().powi(2))).norm() < 1e-6);
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let mut g = [[ZERO; 4]; 4];
        g[0][2] = c(1.0);
        g[2][0] = c(1.0);
        g[1][3] = c(1.0);
        g[3][1] = c(1.0);
        let md = MetricDerivatives {
            g,
            dg: [[[ZERO; 4]; 4]; 4],
            ddg: [[[[ZERO; 4]; 4]; 4]; 4],
        };
        let r = curvature(&md, None).unwrap();
        assert_eq!(r.max_riemann(), 0.0);
    }

    #[test]
    fn degenerate_metric_rejected() {
        let md = MetricDerivatives {
            g: [[ZERO; 4]; 4],
            dg: [[[ZERO; 4]; 4]; 4],
            ddg: [[[[ZERO; 4]; 4]; 4]; 4],
        };
        assert_eq!(curvature(&md, None).unwrap_err(), Error::DegenerateMetric);
    }

    #[test]
    fn wedge_of_decomposable_form_vanishes() {
        let a = [c(1.0), c(2.0), c(-1.0), c(0.5)];
        let b = [c(0.0), c(1.0), c(3.0), c(-2.0)];
        let s = wedge1(&a, &b);
        assert!(wedge2(&s, &s).norm() < 1e-14);
        let e0 = [c(1.0), ZERO, ZERO, ZERO];
        let e1 = [ZERO, c(1.0), ZERO, ZERO];
        let e2 = [ZERO, ZERO, c(1.0), ZERO];
        let e3 = [ZERO, ZERO, ZERO, c(1.0)];
        let v = wedge2(&wedge1(&e0, &e1), &wedge1(&e2, &e3));
        assert_eq!(v, c(1.0));
    }
}
