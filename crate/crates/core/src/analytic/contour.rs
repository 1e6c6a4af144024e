//! Trapezoidal quadrature on circles in the spectral plane.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A positively oriented circle `|λ − center| = radius` sampled at `nodes` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
    /// Divide by `2πi`, so the result is the sum of enclosed residues.
    pub normalized: bool,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
            nodes: 512,
            normalized: true,
        }
    }
}

impl ContourSpec {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Self {
            center,
            radius,
            ..Self::default()
        }
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::InvalidContour(format!(
                "node count {} is below the minimum of 16",
                self.nodes
            )));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidContour(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(Error::InvalidContour("center is not finite".into()));
        }
        Ok(())
    }

    /// Node `k` and its offset from the center.
    pub fn node(&self, k: usize) -> (Complex64, Complex64) {
        let theta = 2.0 * PI * k as f64 / self.nodes as f64;
        let offset = Complex64::from_polar(self.radius, theta);
        (self.center + offset, offset)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// `∮ f(λ) dλ`, divided by `2πi` when the spec is normalized.
pub fn contour_integral<F>(f: F, spec: &ContourSpec) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    contour_integral_try(|z| Ok(f(z)), spec)
}

/// Fallible-integrand variant; integrand errors propagate unchanged.
pub fn contour_integral_try<F>(f: F, spec: &ContourSpec) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    spec.validate()?;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..spec.nodes {
        let (z, offset) = spec.node(k);
        let v = f(z)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::PoleOnContour {
                node: k,
                at: format!("{z}"),
            });
        }
        sum += v * offset;
    }
    let n = spec.nodes as f64;
    if spec.normalized {
        Ok(sum / n)
    } else {
        Ok(sum * Complex64::new(0.0, 2.0 * PI / n))
    }
}

/// Vector-valued integral sharing the node loop; each component is treated as
/// in [`contour_integral_try`].
pub fn contour_integral_vec<F>(f: F, len: usize, spec: &ContourSpec) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Vec<Complex64>>,
{
    spec.validate()?;
    let mut sum = vec![Complex64::new(0.0, 0.0); len];
    for k in 0..spec.nodes {
        let (z, offset) = spec.node(k);
        let v = f(z)?;
        if v.len() != len {
            return Err(Error::IndexOutOfRange(format!(
                "integrand returned {} components, expected {len}",
                v.len()
            )));
        }
        for (acc, x) in sum.iter_mut().zip(v) {
            if !(x.re.is_finite() && x.im.is_finite()) {
                return Err(Error::PoleOnContour {
                    node: k,
                    at: format!("{z}"),
                });
            }
            *acc += x * offset;
        }
    }
    let n = spec.nodes as f64;
    let factor = if spec.normalized {
        Complex64::new(1.0 / n, 0.0)
    } else {
        Complex64::new(0.0, 2.0 * PI / n)
    };
    Ok(sum.into_iter().map(|s| s * factor).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cauchy_examples() {
        let spec = ContourSpec::default();
        let v = contour_integral(|z| 1.0 / (z - 0.5), &spec).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-13);
        let v = contour_integral(|z| z * z, &spec).unwrap();
        assert!(v.norm() < 1e-13);
        let v = contour_integral(|z| 1.0 / (z * (z - 2.0)), &spec).unwrap();
        assert!((v - c(-0.5, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn unnormalized_carries_two_pi_i() {
        let spec = ContourSpec {
            normalized: false,
            ..ContourSpec::default()
        };
        let v = contour_integral(|z| 1.0 / z, &spec).unwrap();
        assert!((v - c(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn pole_on_contour_detected() {
        let spec = ContourSpec::default().with_nodes(16);
        let err = contour_integral(|z| 1.0 / (z - 1.0), &spec).unwrap_err();
        assert!(matches!(err, Error::PoleOnContour { node: 0, .. }));
    }

    #[test]
    fn rejects_small_node_counts() {
        let spec = ContourSpec::default().with_nodes(8);
        assert!(matches!(contour_integral(|z| z, &spec), Err(Error::InvalidContour(_))));
    }

    #[test]
    fn shifted_circle() {
        let spec = ContourSpec::circle(c(2.0, 0.0), 0.5);
        let v = contour_integral(|z| 1.0 / (z * (z - 2.0)), &spec).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-13);
    }
}
