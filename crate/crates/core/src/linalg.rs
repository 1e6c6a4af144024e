//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Least-squares solution of `A x = b`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: DVector<Complex64>,
    /// `‖A x − b‖_∞`.
    pub residual: f64,
    /// Numerical rank of `A`.
    pub rank: usize,
    pub columns: usize,
}

pub fn least_squares(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<LeastSquares> {
    let columns = a.ncols();
    if a.nrows() == 0 || columns == 0 {
        return Ok(LeastSquares {
            solution: DVector::zeros(columns),
            residual: b.iter().map(|v| v.norm()).fold(0.0, f64::max),
            rank: 0,
            columns,
        });
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * 1e-11 * (a.nrows().max(columns) as f64);
    let rank = svd.singular_values.iter().filter(|s| **s > eps).count();
    let solution = svd
        .solve(b, eps)
        .map_err(|e| Error::InvalidParameter(format!("least-squares solve: {e}")))?;
    let r = a * &solution - b;
    let residual = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(LeastSquares {
        solution,
        residual,
        rank,
        columns,
    })
}

/// Roots of `Σ c_i z^i` (ascending coefficients), by the companion-matrix
/// eigenvalues followed by Newton polishing.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let degree = c.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = c[degree];
    let mut companion = DMatrix::<Complex64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -c[i] / lead;
    }
    let schur = Schur::try_new(companion, 1e-15, 10_000)
        .ok_or_else(|| Error::RootFinding("companion eigenvalue iteration stalled".into()))?;
    let (_, t) = schur.unpack();
    let mut roots: Vec<Complex64> = (0..degree).map(|i| t[(i, i)]).collect();
    for r in &mut roots {
        *r = newton_polish(&c, *r);
    }
    Ok(roots)
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn newton_polish(c: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp) = horner(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        if horner(c, next).0.norm() > p.norm() {
            break;
        }
        z = next;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Evaluates `Σ c_i z^i`.
pub fn polyval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    horner(coeffs, z).0
}
