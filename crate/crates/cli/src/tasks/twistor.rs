use hforge_core::analytic::{Expr, Jet};
use hforge_core::twistor::{
    constraints, f_from_g_jet, psi_jet, sigma_from_psi, sigma_jet, t_vars, SectionPoint, TwistorClass, LAMBDA_VAR,
    Q_VAR,
};
use hforge_core::Result;

use super::{norm_max, worst, Inputs, Row, Task, C};
use crate::error::CliError;
use crate::table::Cell;

const INTERNAL: [&str; 2] = [Q_VAR, LAMBDA_VAR];

/// Grid coordinates of a section of `O(k)`: `(p, y, w)` with
/// `Q = w + yλ − pλ²` for `k = 2` by default, otherwise `t0 … tk`.
#[derive(Debug, Clone, Copy)]
struct Section {
    k: usize,
    gh: bool,
}

impl Section {
    fn configure(inputs: &mut Inputs) -> Result<Self, CliError> {
        let p = inputs.params();
        let k = p.usize("k", 2)?;
        let gh = match p.str("coordinates")? {
            None => k == 2,
            Some("gh") if k == 2 => true,
            Some("gh") => return Err(CliError::Config("`gh` coordinates need k = 2".into())),
            Some("section") => false,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "unknown coordinates `{other}` (gh or section)"
                )))
            }
        };
        let names = if gh {
            ["p", "y", "w"].map(String::from).to_vec()
        } else {
            t_vars(k)
        };
        inputs.set_coordinates(&names, true);
        Ok(Self { k, gh })
    }

    fn point(&self, values: &[C]) -> Result<SectionPoint> {
        if self.gh {
            SectionPoint::new(vec![-values[0], values[1], values[2]])
        } else {
            SectionPoint::new(values.to_vec())
        }
    }

    fn class(&self, inputs: &mut Inputs, name: &str, potential: bool) -> Result<TwistorClass, CliError> {
        let e = inputs.expr(name, &INTERNAL)?;
        if let Some(v) = e.vars().into_iter().find(|v| !INTERNAL.contains(&v.as_str())) {
            return Err(CliError::Config(format!(
                "`{name}` may depend on Q and lambda only, found `{v}`"
            )));
        }
        let contour = inputs.contour()?;
        Ok(if potential {
            TwistorClass::potential(self.k, e, contour)?
        } else {
            TwistorClass::patching(self.k, e, contour)?
        })
    }
}

/// `max |J_{a,b+1} − J_{a+1,b}|` over the `t` coordinates of a second-order jet.
fn wave_system_residual(jet: &Jet, k: usize) -> f64 {
    let d = |a: usize, b: usize| jet.partial(a).partial(b).value();
    let mut r = Vec::new();
    for a in 0..k {
        for b in 0..k {
            r.push(d(a, b + 1) - d(a + 1, b));
        }
    }
    norm_max(r)
}

/// `F(t) = ∮ G/λ²` from a potential `G(Q, λ)`, checked against the wave system.
pub struct FFromG {
    section: Section,
    g: TwistorClass,
}

impl FFromG {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        let section = Section::configure(inputs)?;
        let g = section.class(inputs, "G", true)?;
        Ok(Self { section, g })
    }
}

impl Task for FFromG {
    fn columns(&self) -> Vec<String> {
        vec!["F".into()]
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let jet = f_from_g_jet(&self.g, &self.section.point(point)?, 2)?;
        let r = wave_system_residual(&jet, self.section.k);
        Ok(vec![Row::new(vec![Cell::Complex(jet.value())], r)])
    }
}

/// A ψ component; compared with `reference` when given, otherwise checked
/// against the wave system.
pub struct PsiField {
    section: Section,
    f: TwistorClass,
    m: usize,
    reference: Option<Expr>,
    names: Vec<String>,
}

impl PsiField {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        let section = Section::configure(inputs)?;
        let f = section.class(inputs, "f", false)?;
        let m = inputs.params().usize("m", 0)?;
        let reference = inputs.opt_expr("reference", &[])?;
        let names = inputs.coordinates().iter().map(|c| c.name.clone()).collect();
        Ok(Self {
            section,
            f,
            m,
            reference,
            names,
        })
    }
}

impl Task for PsiField {
    fn columns(&self) -> Vec<String> {
        let mut c = vec!["psi".to_string()];
        if self.reference.is_some() {
            c.push("reference".into());
        }
        c
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let jet = psi_jet(&self.f, &self.section.point(point)?, self.m, 2)?;
        let psi = jet.value();
        let Some(reference) = &self.reference else {
            return Ok(vec![Row::new(
                vec![Cell::Complex(psi)],
                wave_system_residual(&jet, self.section.k),
            )]);
        };
        let bindings: Vec<(&str, C)> = self
            .names
            .iter()
            .map(String::as_str)
            .zip(point.iter().copied())
            .collect();
        let r = reference.eval(&bindings)?;
        Ok(vec![Row::new(
            vec![Cell::Complex(psi), Cell::Complex(r)],
            (psi - r).norm(),
        )])
    }
}

/// The `k − 3` constraints `∮ λ^m f` for `k ≥ 4`.
pub struct Constraints {
    section: Section,
    f: TwistorClass,
}

impl Constraints {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        let section = Section::configure(inputs)?;
        if section.k < 4 {
            return Err(CliError::Config("constraints exist for k ≥ 4 only".into()));
        }
        let f = section.class(inputs, "f", false)?;
        Ok(Self { section, f })
    }
}

impl Task for Constraints {
    fn columns(&self) -> Vec<String> {
        (0..=self.section.k - 4).map(|m| format!("constraint_{m}")).collect()
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let values = constraints(&self.f, &self.section.point(point)?)?;
        let r = norm_max(values.iter().copied());
        Ok(vec![Row::new(values.into_iter().map(Cell::Complex).collect(), r)])
    }
}

/// `Σ(λ)` at one spectral value: decomposability `Σ ∧ Σ` and closure `dΣ`.
pub struct Sigma {
    section: Section,
    f: TwistorClass,
    lambda: C,
}

impl Sigma {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        let section = Section::configure(inputs)?;
        let f = section.class(inputs, "f", false)?;
        let lambda = inputs.params().complex("lambda", C::new(0.3, 0.1))?;
        Ok(Self { section, f, lambda })
    }
}

impl Task for Sigma {
    fn columns(&self) -> Vec<String> {
        ["max_wedge", "max_closure"].map(String::from).to_vec()
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let t = self.section.point(point)?;
        let s = sigma_from_psi(&self.f, &t, self.lambda)?.form;
        let n = s.nrows();
        let mut wedge = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        wedge.push(s[(a, b)] * s[(c, d)] - s[(a, c)] * s[(b, d)] + s[(a, d)] * s[(b, c)]);
                    }
                }
            }
        }
        let jet = sigma_jet(&self.f, &t, self.lambda, 1)?;
        let vars = self.section.k + 1;
        // the k = 2 fibre direction z carries constant components
        let d = |i: usize, j: usize, v: usize| {
            if v < vars {
                jet[i][j].partial(v).value()
            } else {
                C::new(0.0, 0.0)
            }
        };
        let mut closure = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    closure.push(d(b, c, a) + d(c, a, b) + d(a, b, c));
                }
            }
        }
        let (w, cl) = (norm_max(wedge), norm_max(closure));
        Ok(vec![Row::new(vec![Cell::Real(w), Cell::Real(cl)], worst(w, cl))])
    }
}
