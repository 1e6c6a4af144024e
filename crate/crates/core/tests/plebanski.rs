use hforge_core::analytic::parse_expr;
use hforge_core::curvature::{max_abs, wedge2};
use hforge_core::plebanski::{classify_symmetry, metric_from_tetrad, sigma_at, HeavenlyPotential, Point, SymmetryKind};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn random_points(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [0; 4].map(|_| c(rng.gen_range(lo..hi)))).collect()
}

#[test]
fn xyw_metric_matches_tetrad_assembly() {
    let theta = HeavenlyPotential::parse("x*y*w").unwrap();
    for p in random_points(1, 5, -1.5, 1.5) {
        let m = theta.metric(&p).unwrap();
        let g = metric_from_tetrad(m.tetrad.as_ref().unwrap()).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((g[a][b] - m.g[a][b]).norm() < 1e-12);
            }
        }
        assert!(m.tetrad_residual().unwrap() < 1e-12);
        assert_eq!(m.asymmetry(), 0.0);
    }
}

#[test]
fn wy_potential_is_asd_vacuum_by_jets_and_differences() {
    let theta = HeavenlyPotential::parse("w^2*y^3").unwrap();
    for p in random_points(2, 10, 0.3, 1.3) {
        let r = theta.curvature(&p).unwrap();
        assert!(r.max_ricci() < 1e-8);
        assert!(r.max_sd_weyl() < 1e-8);
        let fd = theta.curvature_fd(&p, 1e-5).unwrap();
        assert!(fd.max_ricci() < 1e-5, "{}", fd.max_ricci());
    }
}

#[test]
fn legendre_type_potential_is_asd_vacuum() {
    let theta = HeavenlyPotential::parse("(x + y^2)^2/(4*w)").unwrap();
    for p in random_points(3, 10, 0.5, 1.5) {
        assert!(theta.heavenly_residual(&p).unwrap().norm() < 1e-12);
        let r = theta.curvature(&p).unwrap();
        assert!(r.max_ricci() < 1e-8);
        assert!(r.max_sd_weyl() < 1e-8);
        assert!(r.max_riemann() > 1e-3, "potential should not be flat");
    }
}

#[test]
fn non_solution_is_curved_and_sd_forms_not_closed() {
    let theta = HeavenlyPotential::parse("x^2*y^2").unwrap();
    let p = [c(0.7), c(0.3), c(0.5), c(1.1)];
    let r = theta.curvature(&p).unwrap();
    assert!(r.max_sd_weyl() > 1e-3);
    assert!(r.max_ricci() > 1e-3);
    assert!(theta.sd_closure_residual(&p).unwrap() > 1e-3);
}

#[test]
fn sd_forms_closed_on_solutions() {
    for src in ["w^2*y^3", "(x + y^2)^2/(4*w)", "0"] {
        let theta = HeavenlyPotential::parse(src).unwrap();
        for p in random_points(4, 10, 0.5, 1.5) {
            assert!(theta.sd_closure_residual(&p).unwrap() < 1e-9, "{src}");
        }
    }
}

#[test]
fn omega_route_sigma_is_decomposable_iff_heavenly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let solution = HeavenlyPotential::parse("(x + y^2)^2/(4*w)").unwrap();
    let other = HeavenlyPotential::parse("x*y*w + x^2").unwrap();
    let p = [c(0.7), c(0.2), c(-0.4), c(1.1)];
    for _ in 0..10 {
        let l = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let s = solution.omega_sigma(&p, l).unwrap();
        assert!(wedge2(&s, &s).norm() < 1e-10);
        let t = sigma_at(&solution.sd_two_forms(&p).unwrap(), l);
        let diff: f64 = (0..4)
            .flat_map(|a| (0..4).map(move |b| (a, b)))
            .map(|(a, b)| (s[a][b] - t[a][b]).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
        let s = other.omega_sigma(&p, l).unwrap();
        let h = other.heavenly_residual(&p).unwrap();
        // Σ∧Σ = −2 λ⁴ H vol for the truncated series
        let expect = -2.0 * l.powi(4) * h;
        assert!((wedge2(&s, &s) - expect).norm() < 1e-12);
        assert!(wedge2(&s, &s).norm() > 1e-8);
    }
}

#[test]
fn flat_potential_is_exactly_flat() {
    let theta = HeavenlyPotential::parse("0").unwrap();
    let p = [c(0.3), c(-0.2), c(1.4), c(0.6)];
    let r = theta.curvature(&p).unwrap();
    assert_eq!(r.max_riemann(), 0.0);
    let s = theta.sd_two_forms(&p).unwrap();
    assert_eq!(wedge2(&s[0], &s[0]), c(0.0));
    assert!(max_abs(&s[1]) > 0.0);
}

proptest! {
    #[test]
    fn residual_expression_matches_jets(a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.2f64..2.0, z in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let src = format!("{a}*x^2*y*w + {b}*z*y^3 - x*z^2*w");
        let theta = HeavenlyPotential::new(parse_expr(&src).unwrap()).unwrap();
        let p = [c(w), c(z), c(x), c(y)];
        let jet = theta.heavenly_residual(&p).unwrap();
        let sym = theta.residual_expr().eval(&[("w", p[0]), ("z", p[1]), ("x", p[2]), ("y", p[3])]).unwrap();
        prop_assert!((jet - sym).norm() < 1e-10 * (1.0 + jet.norm()));
    }

    #[test]
    fn sd_top_form_is_decomposable(a in -2.0f64..2.0, w in 0.2f64..2.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let theta = HeavenlyPotential::new(parse_expr(&format!("{a}*x^3*y + w*x*y^2")).unwrap()).unwrap();
        let s = theta.sd_two_forms(&[c(w), c(0.1), c(x), c(y)]).unwrap();
        prop_assert!(wedge2(&s[0], &s[0]).norm() < 1e-10);
    }

    #[test]
    fn classification_is_similarity_invariant(a in -3.0f64..3.0, b in -3.0f64..3.0, s01 in -1.0f64..1.0, s10 in -1.0f64..1.0) {
        let phi = [[c(a), c(0.0)], [c(0.0), c(b)]];
        let s = [[c(2.0), c(s01)], [c(s10), c(1.0)]];
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        prop_assume!(det.norm() > 0.1);
        let si = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
        let mul = |p: [[Complex64; 2]; 2], q: [[Complex64; 2]; 2]| {
            let mut r = [[c(0.0); 2]; 2];
            for i in 0..2 { for j in 0..2 { for k in 0..2 { r[i][j] += p[i][k] * q[k][j]; } } }
            r
        };
        let conj = mul(mul(s, phi), si);
        prop_assert_eq!(classify_symmetry(&[phi], 1e-9), classify_symmetry(&[conj], 1e-9));
    }
}

#[test]
fn classification_examples() {
    let mu = [[c(2.5), c(0.0)], [c(0.0), c(2.5)]];
    assert_eq!(classify_symmetry(&[mu], 1e-12), SymmetryKind::Triholomorphic);
}
