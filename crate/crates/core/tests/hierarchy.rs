use hforge_core::analytic::{parse_expr, Expr, Poly};
use hforge_core::hierarchy::{
    hierarchy_to_four, recursion_ansatz, recursion_step, wave_operator, HierarchyPotential, RecursionOptions,
};
use hforge_core::plebanski::{HeavenlyPotential, COORDS};
use hforge_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| c(rng.gen_range(0.4..1.4))).collect()
}

/// Quartic in (w, z, x, y) with small integer coefficients on every monomial.
fn generic_quartic(seed: u64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = Expr::zero();
    for m in recursion_ansatz(4).into_iter().chain([Expr::var("w"), Expr::var("z")]) {
        let k: i32 = rng.gen_range(-3..=3);
        if k != 0 {
            e = e + Expr::real(f64::from(k)) * m;
        }
    }
    e
}

#[test]
fn level_one_flow_is_minus_heavenly_as_polynomials() {
    for seed in 0..3 {
        let theta4 = HeavenlyPotential::new(generic_quartic(seed)).unwrap();
        let h = HierarchyPotential::from_four(&theta4).unwrap();
        let back: Vec<(&str, Expr)> = hierarchy_to_four();
        let flow = h.residual_expr(0, 1, 1, 1).unwrap().subs_all(&back);
        let lhs = Poly::from_expr(&flow, &COORDS).unwrap();
        let rhs = Poly::from_expr(&theta4.residual_expr(), &COORDS).unwrap();
        assert!(lhs.add(&rhs).is_zero(), "seed {seed}");
        assert!(!rhs.is_zero());
    }
}

#[test]
fn level_one_flow_is_minus_heavenly_numerically() {
    let theta4 = HeavenlyPotential::new(generic_quartic(7)).unwrap();
    let h = HierarchyPotential::from_four(&theta4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let p = random_vec(&mut rng, 4);
        let (w, z, x, y) = (p[0], p[1], p[2], p[3]);
        let hp = [y, w, -x, z];
        let r = h.residual(0, 1, 1, 1, &hp).unwrap();
        let expect = -theta4.heavenly_residual(&[w, z, x, y]).unwrap();
        assert!((r - expect).norm() < 1e-12 * (1.0 + expect.norm()));
    }
}

#[test]
fn bilinear_level_two_example() {
    let h = HierarchyPotential::parse(2, "x00*x12").unwrap();
    let p: Vec<Complex64> = (0..6).map(|k| c(0.1 * k as f64 + 0.3)).collect();
    let r = h.residual(0, 1, 1, 2, &p).unwrap();
    assert!((r - c(-1.0)).norm() < 1e-14);
    let e = h.residual_expr(0, 1, 1, 2).unwrap();
    let b: Vec<(&str, Complex64)> = h.vars().iter().map(String::as_str).zip(p.iter().copied()).collect();
    assert!((e.eval(&b).unwrap() - r).norm() < 1e-14);
}

#[test]
fn flat_lax_annihilates_coordinate_series() {
    for n in 1..=3 {
        let h = HierarchyPotential::parse(n, "0").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let p = random_vec(&mut rng, 2 * n + 2);
        for a in 0..2 {
            let mut phi = Expr::zero();
            for j in 0..=n {
                phi = phi + Expr::var("lambda").powi(j as i32) * Expr::var(&format!("x{a}{}", n - j));
            }
            for i in 1..=n {
                for b in 0..2 {
                    let l = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let v = h.lax_apply(&phi, b, i, l, &p).unwrap();
                    assert!(v.norm() <= 1e-13);
                    assert_eq!(h.lax_apply(&Expr::var("lambda"), b, i, l, &p).unwrap(), c(0.0));
                }
            }
        }
    }
}

#[test]
fn flat_gibbons_hawking_section_is_annihilated() {
    let h = HierarchyPotential::parse(1, "0").unwrap();
    let phi = parse_expr("x01 + lambda*x00").unwrap();
    let p = [c(0.2), c(0.9), c(-0.3), c(0.5)];
    for a in 0..2 {
        assert_eq!(h.lax_apply(&phi, a, 1, c(0.7), &p).unwrap(), c(0.0));
    }
}

fn solution_backgrounds() -> Vec<HierarchyPotential> {
    let legendre = HeavenlyPotential::parse("(x + y^2)^2/(4*w)").unwrap();
    vec![
        HierarchyPotential::from_four(&legendre).unwrap(),
        HierarchyPotential::from_four(&HeavenlyPotential::parse("w^2*y^3").unwrap()).unwrap(),
        HierarchyPotential::parse(2, "x00^3 + x00^2*x01").unwrap(),
        HierarchyPotential::parse(3, "x00^4 + x00^2*x01 + x00*x02 + x01^2/2").unwrap(),
    ]
}

#[test]
fn backgrounds_solve_all_flows() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for h in solution_backgrounds() {
        let n = h.n();
        for _ in 0..5 {
            let p = random_vec(&mut rng, 2 * n + 2);
            for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                for i in 1..=n {
                    for j in 1..=n {
                        assert!(h.residual(a, i, b, j, &p).unwrap().norm() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn lax_annihilates_truncated_omega_on_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for h in solution_backgrounds() {
        let n = h.n();
        let exp = h.omega_expansion(2 * n + 1).unwrap();
        for _ in 0..3 {
            let p = random_vec(&mut rng, 2 * n + 2);
            for series in &exp.omega {
                for a in 0..2 {
                    for i in 1..=n {
                        let coeffs = h.lax_coefficients(series, a, i, &p).unwrap();
                        for v in &coeffs[..=2 * n + 1] {
                            assert!(v.norm() < 1e-10, "n = {n}: {v}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn omega_expansion_matches_known_forms() {
    let theta4 = HeavenlyPotential::parse("(x + y^2)^2/(4*w)").unwrap();
    let h = HierarchyPotential::from_four(&theta4).unwrap();
    let exp = h.omega_expansion(3).unwrap();
    let back = hierarchy_to_four();
    let p = [("w", c(0.8)), ("z", c(0.1)), ("x", c(0.3)), ("y", c(0.6))];
    let theta_x = theta4.expr().diff("x").eval(&p).unwrap();
    let theta_y = theta4.expr().diff("y").eval(&p).unwrap();
    let theta_w = theta4.expr().diff("w").eval(&p).unwrap();
    let value = |e: &Expr| e.subs_all(&back).eval(&p).unwrap();
    // ω⁰ = w + λy − λ²Θ_x, no λ³ term because Θ_z = 0
    assert_eq!(value(&exp.omega[0][0]), c(0.8));
    assert_eq!(value(&exp.omega[0][1]), c(0.6));
    assert!((value(&exp.omega[0][2]) + theta_x).norm() < 1e-14);
    assert!(value(&exp.omega[0][3]).norm() < 1e-14);
    // ω¹ = z − λx − λ²Θ_y − λ³Θ_w
    assert_eq!(value(&exp.omega[1][1]), c(-0.3));
    assert!((value(&exp.omega[1][2]) + theta_y).norm() < 1e-14);
    assert!((value(&exp.omega[1][3]) + theta_w).norm() < 1e-14);
}

#[test]
fn sigma_series_truncates_on_solutions_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for h in solution_backgrounds() {
        let p = random_vec(&mut rng, 2 * h.n() + 2);
        let (top, next) = h.omega_sigma_tail(&p).unwrap();
        assert!(top < 1e-10 && next < 1e-10, "n = {}: {top} {next}", h.n());
    }
    let bad = HierarchyPotential::from_four(&HeavenlyPotential::parse("x^2*y^2").unwrap()).unwrap();
    let (top, next) = bad.omega_sigma_tail(&[c(0.7), c(0.5), c(0.4), c(0.9)]).unwrap();
    assert!(top.max(next) > 1e-3);
}

#[test]
fn recursion_output_stays_in_kernel() {
    let theta = HeavenlyPotential::parse("w^2*y^3").unwrap();
    let ansatz = recursion_ansatz(5);
    let opts = RecursionOptions::default();
    let mut delta = Expr::var("x");
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..3 {
        delta = recursion_step(&theta, &delta, &ansatz, &opts).unwrap();
        for _ in 0..20 {
            let v = random_vec(&mut rng, 4);
            let r = wave_operator(&theta, &delta, &[v[0], v[1], v[2], v[3]]).unwrap();
            assert!(r.norm() < 1e-10);
        }
    }
    assert!(!delta.is_zero());
}

#[test]
fn flat_chain_on_cubic_ansatz() {
    let zero = HeavenlyPotential::parse("0").unwrap();
    let ansatz = recursion_ansatz(3);
    let opts = RecursionOptions::default();
    let step = |e: Expr| recursion_step(&zero, &e, &ansatz, &opts).unwrap();
    assert_eq!(step(Expr::var("w")), Expr::var("y"));
    assert_eq!(step(Expr::var("z")), -Expr::var("x"));
    assert!(step(Expr::var("y")).is_zero());
    assert!(step(-Expr::var("x")).is_zero());
}

#[test]
fn recursion_errors() {
    let zero = HeavenlyPotential::parse("0").unwrap();
    let err = recursion_step(&zero, &Expr::var("w"), &[Expr::var("w")], &RecursionOptions::default());
    assert!(matches!(err, Err(Error::AnsatzInsufficient(_))));
}

proptest! {
    #[test]
    fn flows_are_antisymmetric(a0 in -2i32..3, a1 in -2i32..3, a2 in -2i32..3, a3 in -2i32..3, seed in 0u64..1000) {
        let src = format!("{a0}*x00^2*x11 + {a1}*x10*x01^2*x12 + {a2}*x02*x10^3 + {a3}*x00*x11*x02");
        let h = HierarchyPotential::parse(2, &src).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_vec(&mut rng, 6);
        for (a, i, b, j) in [(0, 1, 1, 2), (0, 2, 1, 1), (1, 1, 1, 2), (0, 1, 0, 2)] {
            let r1 = h.residual(a, i, b, j, &p).unwrap();
            let r2 = h.residual(b, j, a, i, &p).unwrap();
            prop_assert!((r1 + r2).norm() < 1e-12 * (1.0 + r1.norm()));
        }
    }

    #[test]
    fn level_one_equivalence_at_random_points(w in 0.2f64..2.0, z in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let theta4 = HeavenlyPotential::parse("x^3*y + w*z*x^2 - y^2*z^2 + x*y*w").unwrap();
        let h = HierarchyPotential::from_four(&theta4).unwrap();
        let r = h.residual(0, 1, 1, 1, &[c(y), c(w), c(-x), c(z)]).unwrap();
        let expect = -theta4.heavenly_residual(&[c(w), c(z), c(x), c(y)]).unwrap();
        prop_assert!((r - expect).norm() < 1e-12 * (1.0 + expect.norm()));
    }
}
