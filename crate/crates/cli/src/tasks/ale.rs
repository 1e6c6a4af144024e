use hforge_core::ale::{
    ak_center_class, ak_patching_exprs, dk_patching, dk_path_integral, ek_patching, AleFamily, AleKind, LimitHints,
    ELLIPTIC_NODES,
};
use hforge_core::analytic::{ContourSpec, Expr, JetShape};
use hforge_core::twistor::{psi_jet, SectionPoint, TwistorClass, LAMBDA_VAR};
use hforge_core::Result;

use super::{worst, Inputs, Row, Task, C};
use crate::error::CliError;
use crate::table::Cell;

fn kind(inputs: &Inputs) -> Result<AleKind, CliError> {
    let p = inputs.params();
    let name = p
        .str("family")?
        .ok_or_else(|| CliError::Config("task needs the parameter `family`".into()))?;
    Ok(AleKind::parse(name, p.opt_usize("k")?)?)
}

/// Bundle degrees of one family and the Chern identity `p + q + r − s = 2`.
pub struct AleDegrees {
    kind: AleKind,
}

impl AleDegrees {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        inputs.set_coordinates::<&str>(&[], false);
        Ok(Self { kind: kind(inputs)? })
    }
}

impl Task for AleDegrees {
    fn columns(&self) -> Vec<String> {
        ["family", "p", "q", "r", "s", "parameters", "chern"]
            .map(String::from)
            .to_vec()
    }

    fn evaluate(&self, _point: &[C]) -> Result<Vec<Row>> {
        let (p, q, r, s) = self.kind.degrees()?;
        let chern = p + q + r - s;
        let cells = vec![
            Cell::Text(self.kind.to_string()),
            Cell::Int(p),
            Cell::Int(q),
            Cell::Int(r),
            Cell::Int(s),
            Cell::Int(self.kind.parameter_count() as i64),
            Cell::Int(chern),
        ];
        Ok(vec![Row::new(cells, (chern - 2).abs() as f64)])
    }
}

enum Patch {
    /// `f`, `G` and the jet shape for `∂G/∂z`.
    A {
        f: Expr,
        g: Expr,
        shape: std::sync::Arc<JetShape>,
    },
    D {
        roots: Vec<Expr>,
        nodes: usize,
    },
    E {
        family: AleFamily,
        hints: LimitHints,
        nodes: usize,
    },
}

/// Patching function on the overlap at `(z, λ)`.
///
/// The residual is `|∂G/∂z − f|` for `A`, the mismatch between
/// `exp(2√z · overlap integral)` and `exp(√z · f)` for `D`, and the limit
/// equations for `E`.
pub struct AlePatch {
    patch: Patch,
}

impl AlePatch {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        inputs.set_coordinates(&["z", LAMBDA_VAR], true);
        let kind = kind(inputs)?;
        let p = inputs.params();
        let nodes = p.usize("nodes", ELLIPTIC_NODES)?;
        let patch = match kind {
            AleKind::A(k) => {
                let roots = inputs.expr_list("roots", &[])?;
                if roots.len() != k {
                    return Err(CliError::Config(format!("A_{k} needs {k} roots, got {}", roots.len())));
                }
                let (f, g) = ak_patching_exprs(&roots)?;
                Patch::A {
                    f,
                    g,
                    shape: JetShape::uniform(&["z", LAMBDA_VAR], 1),
                }
            }
            AleKind::D(_) => Patch::D {
                roots: inputs.expr_list("roots", &[])?,
                nodes,
            },
            _ => {
                let a = inputs.expr_list("a", &[])?;
                let family = if a.is_empty() {
                    AleFamily::undeformed(kind)?
                } else {
                    AleFamily::new(kind, a)?
                };
                let hints = LimitHints {
                    y0: p.opt_complex("y0")?,
                    y1: p.opt_complex("y1")?,
                };
                Patch::E { family, hints, nodes }
            }
        };
        Ok(Self { patch })
    }
}

impl Task for AlePatch {
    fn columns(&self) -> Vec<String> {
        let c: &[&str] = match self.patch {
            Patch::A { .. } => &["f", "G"],
            Patch::D { .. } => &["f", "overlap_integral"],
            Patch::E { .. } => &["f", "y0", "y1", "g1", "g2"],
        };
        c.iter().map(|s| s.to_string()).collect()
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let (z, lambda) = (point[0], point[1]);
        let b = [("z", z), (LAMBDA_VAR, lambda)];
        let row = match &self.patch {
            Patch::A { f, g, shape } => {
                let f = f.eval(&b)?;
                let gj = g.jet(shape, &b)?;
                Row::new(
                    vec![Cell::Complex(f), Cell::Complex(gj.value())],
                    (gj.partial(0).value() - f).norm(),
                )
            }
            Patch::D { roots, nodes } => {
                let f = dk_patching(roots, z, lambda)?;
                let path = dk_path_integral(roots, z, lambda, *nodes)?;
                let (lhs, rhs) = ((2.0 * z.sqrt() * path).exp(), (z.sqrt() * f).exp());
                Row::new(
                    vec![Cell::Complex(f), Cell::Complex(path)],
                    (lhs - rhs).norm() / rhs.norm(),
                )
            }
            Patch::E { family, hints, nodes } => {
                let e = ek_patching(family, z, lambda, hints, *nodes)?;
                let r0 = 12.0 * e.y0 * e.y0 + e.g1 - 1.0;
                let r1 = 4.0 * e.y1.powi(3) + e.g1 * e.y1 + e.g2 - 0.25;
                Row::new(
                    [e.f, e.y0, e.y1, e.g1, e.g2].into_iter().map(Cell::Complex).collect(),
                    worst(r0.norm(), r1.norm()),
                )
            }
        };
        Ok(vec![row])
    }
}

/// The `A_k` Gibbons-Hawking potential `ψ = Σ_j ψ_j` at `(p, y, w)`.
pub struct AlePotential {
    centres: Vec<TwistorClass>,
    reference: Option<Expr>,
}

impl AlePotential {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        inputs.set_coordinates(&["p", "y", "w"], true);
        let roots = inputs.expr_list("roots", &[LAMBDA_VAR])?;
        if roots.is_empty() {
            return Err(CliError::Config("task needs at least one entry in `roots`".into()));
        }
        let contour: ContourSpec = inputs.contour()?;
        let centres = roots
            .iter()
            .map(|r| ak_center_class(r, contour))
            .collect::<Result<_>>()?;
        let reference = inputs.opt_expr("reference", &[])?;
        Ok(Self { centres, reference })
    }
}

impl Task for AlePotential {
    fn columns(&self) -> Vec<String> {
        let mut c = vec!["psi".to_string()];
        if self.reference.is_some() {
            c.push("reference".into());
        }
        c
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let [p, y, w] = [point[0], point[1], point[2]];
        let t = SectionPoint::new(vec![-p, y, w])?;
        let mut psi = C::new(0.0, 0.0);
        let mut wave = C::new(0.0, 0.0);
        for class in &self.centres {
            let j = psi_jet(class, &t, 0, 2)?;
            psi += j.value();
            // ψ_yy + ψ_pw in section coordinates (t0 = −p)
            wave += j.partial(1).partial(1).value() - j.partial(0).partial(2).value();
        }
        let mut cells = vec![Cell::Complex(psi)];
        let mut residual = wave.norm();
        if let Some(r) = &self.reference {
            let r = r.eval(&[("p", p), ("y", y), ("w", w)])?;
            cells.push(Cell::Complex(r));
            residual = worst(residual, (psi - r).norm());
        }
        Ok(vec![Row::new(cells, residual)])
    }
}
