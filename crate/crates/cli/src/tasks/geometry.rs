use hforge_core::analytic::{Expr, Poly};
use hforge_core::hierarchy::{recursion_ansatz, recursion_step, HierarchyPotential, RecursionOptions};
use hforge_core::legendre::{legendre_gh, GhData};
use hforge_core::plebanski::{HeavenlyPotential, COORDS};
use hforge_core::Result;

use super::{norm_max, worst, Inputs, Row, Task, C};
use crate::error::CliError;
use crate::table::Cell;

const GH_COORDS: [&str; 4] = ["w", "y", "p", "z"];

fn four(point: &[C]) -> [C; 4] {
    [point[0], point[1], point[2], point[3]]
}

pub struct CheckHeavenly {
    theta: HeavenlyPotential,
}

impl CheckHeavenly {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        inputs.set_coordinates(&COORDS, false);
        let theta = HeavenlyPotential::new(inputs.expr("theta", &[])?)?;
        Ok(Self { theta })
    }
}

impl Task for CheckHeavenly {
    fn columns(&self) -> Vec<String> {
        vec!["heavenly_residual".into()]
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let r = self.theta.heavenly_residual(&four(point))?;
        Ok(vec![Row::new(vec![Cell::Complex(r)], r.norm())])
    }
}

/// Every flow equation `(A, i, B, j)` of the order-`n` hierarchy.
pub struct HierarchyCheck {
    h: HierarchyPotential,
}

impl HierarchyCheck {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        let n = inputs.params().usize("n", 1)?;
        let names = HierarchyPotential::new(n, Expr::zero())?.vars().to_vec();
        inputs.set_coordinates(&names, false);
        let h = HierarchyPotential::new(n, inputs.expr("theta", &[])?)?;
        Ok(Self { h })
    }
}

impl Task for HierarchyCheck {
    fn columns(&self) -> Vec<String> {
        vec!["max_flow_residual".into()]
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let n = self.h.n();
        let mut values = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for i in 1..=n {
                    for j in 1..=n {
                        values.push(self.h.residual(a, i, b, j, point)?);
                    }
                }
            }
        }
        let r = norm_max(values);
        Ok(vec![Row::new(vec![Cell::Real(r)], r)])
    }
}

/// Repeated recursion steps from a seed; `expect_<m>` expressions, when given,
/// are compared with step `m` coefficient by coefficient.
pub struct RecursionChain {
    theta: HeavenlyPotential,
    seed: Expr,
    steps: usize,
    ansatz: Vec<Expr>,
    expected: Vec<Option<Expr>>,
    options: RecursionOptions,
}

impl RecursionChain {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        inputs.set_coordinates::<&str>(&[], false);
        let p = inputs.params();
        let steps = p.usize("steps", 1)?;
        let degree = p.usize("degree", 3)? as u32;
        let mut options = RecursionOptions::default();
        options.residual_tolerance = p.f64("residual_tolerance", options.residual_tolerance)?;
        if let Some(seed) = p.opt_usize("rng_seed")? {
            options.seed = seed as u64;
        }
        let theta = HeavenlyPotential::new(inputs.expr_or("theta", "0", &COORDS)?)?;
        let seed = inputs.expr("phi", &COORDS)?;
        let expected = (1..=steps)
            .map(|m| inputs.opt_expr(&format!("expect_{m}"), &COORDS))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            theta,
            seed,
            steps,
            ansatz: recursion_ansatz(degree),
            expected,
            options,
        })
    }
}

impl Task for RecursionChain {
    fn columns(&self) -> Vec<String> {
        ["step", "input", "output"].map(String::from).to_vec()
    }

    fn evaluate(&self, _point: &[C]) -> Result<Vec<Row>> {
        let mut rows = Vec::new();
        let mut current = self.seed.clone();
        for m in 1..=self.steps {
            let next = recursion_step(&self.theta, &current, &self.ansatz, &self.options)?;
            let residual = match &self.expected[m - 1] {
                Some(e) => Poly::from_expr(&(next.clone() - e.clone()), &COORDS)?.max_abs_coeff(),
                None => 0.0,
            };
            rows.push(Row::new(
                vec![
                    Cell::Int(m as i64),
                    Cell::Text(current.to_string()),
                    Cell::Text(next.to_string()),
                ],
                residual,
            ));
            current = next;
        }
        Ok(rows)
    }
}

pub struct GhBuild {
    gh: GhData,
}

impl GhBuild {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        inputs.set_coordinates(&GH_COORDS, false);
        Ok(Self {
            gh: GhData::new(inputs.expr("F", &[])?)?,
        })
    }
}

impl Task for GhBuild {
    fn columns(&self) -> Vec<String> {
        ["psi", "wave_residual", "monopole_residual", "max_ricci"]
            .map(String::from)
            .to_vec()
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let p = four(point);
        let m = self.gh.metric(&p)?;
        let wave = self.gh.wave_residual(&p)?;
        let ricci = self.gh.curvature(&p)?.max_ricci();
        let residual = [wave.norm(), m.monopole_residual, ricci].into_iter().fold(0.0, worst);
        Ok(vec![Row::new(
            vec![
                Cell::Complex(m.psi),
                Cell::Complex(wave),
                Cell::Real(m.monopole_residual),
                Cell::Real(ricci),
            ],
            residual,
        )])
    }
}

/// Legendre transform of a `z`-independent Θ to a GH potential at `(w, y, p)`.
pub struct Legendre {
    theta: HeavenlyPotential,
    seed: C,
}

impl Legendre {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        inputs.set_coordinates(&["w", "y", "p"], true);
        let seed = inputs.params().complex("seed_x", C::new(1.0, 0.0))?;
        let theta = HeavenlyPotential::new(inputs.expr("theta", &["x", "z"])?)?;
        Ok(Self { theta, seed })
    }
}

impl Task for Legendre {
    fn columns(&self) -> Vec<String> {
        ["x", "F", "psi", "wave_residual"].map(String::from).to_vec()
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let l = legendre_gh(&self.theta, [point[0], point[1], point[2]], self.seed)?;
        let wave = l.wave_residual();
        Ok(vec![Row::new(
            vec![
                Cell::Complex(l.x),
                Cell::Complex(l.f),
                Cell::Complex(l.hessian[0][0]),
                Cell::Complex(wave),
            ],
            wave.norm(),
        )])
    }
}

enum Background {
    Heavenly(HeavenlyPotential),
    Gh(GhData),
}

/// Ricci and self-dual Weyl curvature from jets, optionally cross-checked by
/// finite differences (`fd_step`, heavenly backgrounds only).
pub struct Curvature {
    background: Background,
    fd_step: Option<f64>,
}

impl Curvature {
    pub fn build(inputs: &mut Inputs) -> Result<Self, CliError> {
        let p = inputs.params();
        let fd_step = p.opt_f64("fd_step")?;
        let background = match p.str("source")?.unwrap_or("heavenly") {
            "heavenly" => {
                inputs.set_coordinates(&COORDS, false);
                Background::Heavenly(HeavenlyPotential::new(inputs.expr("theta", &[])?)?)
            }
            "gh" => {
                if fd_step.is_some() {
                    return Err(CliError::Config(
                        "`fd_step` applies to heavenly backgrounds only".into(),
                    ));
                }
                inputs.set_coordinates(&GH_COORDS, false);
                Background::Gh(GhData::new(inputs.expr("F", &[])?)?)
            }
            other => return Err(CliError::Config(format!("unknown source `{other}` (heavenly or gh)"))),
        };
        Ok(Self { background, fd_step })
    }
}

impl Task for Curvature {
    fn columns(&self) -> Vec<String> {
        let mut c = vec!["max_ricci".to_string(), "max_sd_weyl".to_string()];
        if self.fd_step.is_some() {
            c.push("fd_max_ricci".into());
        }
        c
    }

    fn evaluate(&self, point: &[C]) -> Result<Vec<Row>> {
        let p = four(point);
        let (report, fd) = match &self.background {
            Background::Heavenly(t) => {
                let fd = self.fd_step.map(|h| t.curvature_fd(&p, h)).transpose()?;
                (t.curvature(&p)?, fd.map(|r| r.max_ricci()))
            }
            Background::Gh(g) => (g.curvature(&p)?, None),
        };
        let (ricci, weyl) = (report.max_ricci(), report.max_sd_weyl());
        let mut cells = vec![Cell::Real(ricci), Cell::Real(weyl)];
        let mut residual = worst(ricci, weyl);
        if let Some(fd) = fd {
            cells.push(Cell::Real(fd));
            residual = worst(residual, fd);
        }
        Ok(vec![Row::new(cells, residual)])
    }
}
