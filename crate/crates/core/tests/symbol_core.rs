use approx::assert_relative_eq;
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermoplate::symbol::{
    characteristic_roots, determinant, determinant_factorizations_sq, in_shifted_sector,
    resolvent_matrix, resolvent_matrix_sq, roots, scaled_resolvent_symbol, scaling_matrix,
    symbol_matrix, symbol_matrix_sq, SymbolMatrix,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Eigenvalues of the companion matrix of `t^3 + t^2 + 2t + 1` through
/// nalgebra's real Schur solver, sorted by imaginary part.
fn companion_roots() -> Vec<Complex64> {
    let m = Matrix3::new(-1.0, -2.0, -1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let mut ev: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.im.total_cmp(&b.im));
    ev
}

fn sector_samples(n: usize, seed: u64) -> Vec<(f64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = 0.95 * roots().theta0;
    (0..n)
        .map(|_| {
            let rho = 10f64.powf(rng.gen_range(-3.0..3.0));
            let r = 10f64.powf(rng.gen_range(-3.0..3.0));
            let arg = rng.gen_range(-0.99..0.99) * theta;
            (rho * rho, 1.0 + Complex64::from_polar(r, arg))
        })
        .collect()
}

fn generic_inverse(s: f64, lambda: Complex64) -> Option<Matrix3<Complex64>> {
    let a = symbol_matrix_sq(s).0;
    (Matrix3::identity() * lambda - a).try_inverse()
}

#[test]
fn roots_match_an_independent_eigensolver() {
    let r = characteristic_roots().unwrap();
    let ev = companion_roots();
    // Roots of p are -gamma_j.
    assert_relative_eq!((-ev[1]).re, r.gamma1, epsilon = 1e-12);
    assert!((-ev[0] - r.gamma2).norm() < 1e-12 || (-ev[2] - r.gamma2).norm() < 1e-12);
    assert!((r.gamma2 - r.gamma3.conj()).norm() < 1e-15);
    assert_relative_eq!(r.gamma1, 0.569840, epsilon = 1e-6);
    assert_relative_eq!(r.gamma2.re, 0.215080, epsilon = 1e-6);
    assert_relative_eq!(r.gamma2.im, 1.307141, epsilon = 1e-6);
    let theta0 = (-r.gamma3).arg();
    assert_relative_eq!(r.theta0, theta0, epsilon = 1e-15);
    assert_relative_eq!(r.theta0, 1.7338772, epsilon = 1e-6);
}

#[test]
fn root_invariants() {
    let r = characteristic_roots().unwrap();
    assert!(r.all_checks_pass());
    let p = |t: Complex64| t * t * t + t * t + 2.0 * t + 1.0;
    for g in r.gammas() {
        assert!(p(-g).norm() <= 1e-12);
    }
    assert!(r.gamma1 > 0.0 && r.gamma1 < 1.0);
    assert_eq!(r.gammas()[0].im, 0.0);
    assert!(r.gamma2.im > 0.0);
    assert!(r.gamma2.re > 0.0 && r.gamma2.re < 0.5);
    let [g1, g2, g3] = r.gammas();
    assert!((g1 * g2 * g3 - 1.0).norm() <= 1e-12);
    assert!((g1 + g2 + g3 - 1.0).norm() <= 1e-12);
    assert!(r.theta0 > std::f64::consts::FRAC_PI_2 && r.theta0 < std::f64::consts::PI);
    // Repeated calls are bitwise stable.
    assert_eq!(characteristic_roots().unwrap(), r);
}

#[test]
fn symbol_matrix_display() {
    let a = symbol_matrix(&[1.0, 0.0]);
    let expect = SymbolMatrix::from_real([[0.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, -1.0]]);
    assert_eq!(a, expect);
    let s = 2.5f64;
    let a = symbol_matrix_sq(s);
    assert_eq!(a.entry(2, 1), c(-s * s, 0.0));
    assert_eq!(a.entry(2, 3), c(s, 0.0));
    assert_eq!(a.entry(3, 2), c(-s, 0.0));
    assert_eq!(a.entry(3, 3), c(-s, 0.0));
    assert_eq!(
        symbol_matrix(&[0.0, 0.0, 0.0]),
        SymbolMatrix::from_real([[0.0, 1.0, 0.0], [0.0; 3], [0.0; 3]])
    );
}

#[test]
fn eigenvalues_of_symbol_are_scaled_roots() {
    let r = roots();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let rho: f64 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let s = rho * rho;
        let a = symbol_matrix_sq(s).0.map(|z| z.re);
        // Balance with diag(1, s, s) before the Schur solve, as LAPACK's driver would.
        let t = Matrix3::from_diagonal(&Vector3::new(1.0, s, s));
        let t_inv = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0 / s, 1.0 / s));
        let ev = (t_inv * a * t).complex_eigenvalues();
        for g in r.gammas() {
            let target = -g * s;
            let best = ev
                .iter()
                .map(|e| (e - target).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-10 * target.norm(), "s = {s}: {best}");
        }
    }
}

#[test]
fn determinant_examples() {
    assert_relative_eq!(determinant(&[1.0], c(1.0, 0.0)).re, 5.0, epsilon = 1e-12);
    assert_relative_eq!(
        determinant(&[0.0, 1.0], c(0.0, 0.0)).re,
        1.0,
        epsilon = 1e-12
    );
    assert_relative_eq!(determinant(&[0.0], c(1.0, 0.0)).re, 1.0, epsilon = 1e-15);
}

fn inverse_residual(s: f64, lambda: Complex64) -> f64 {
    let r = resolvent_matrix_sq(s, lambda).unwrap();
    let a = symbol_matrix_sq(s).0;
    let prod = (Matrix3::identity() * lambda - a) * r.0;
    (prod - Matrix3::identity()).amax_complex()
}

#[test]
fn determinant_factorizations_agree_on_ten_thousand_points() {
    let worst = sector_samples(10_000, 7)
        .into_iter()
        .map(|(s, lambda)| {
            let (d1, d2) = determinant_factorizations_sq(s, lambda);
            (d1 - d2).norm() / d1.norm()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst}");
}

/// Up to `|xi| = 100` the absolute bound 1e-10 holds.
#[test]
fn inverse_identity_on_moderate_frequencies() {
    let worst = sector_samples(10_000, 7)
        .into_iter()
        .filter(|(s, _)| *s <= 1e4)
        .map(|(s, lambda)| inverse_residual(s, lambda))
        .fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst}");
}

/// Entry (3,1) of the product is `s R_21 + (lambda + s) R_31` with both terms
/// of size `s`, so rounding the entries of `R` alone leaves a residual of
/// order `eps s`. Over the full range the residual stays at that level.
#[test]
fn inverse_identity_at_rounding_level() {
    for (s, lambda) in sector_samples(10_000, 7) {
        let res = inverse_residual(s, lambda);
        assert!(res <= 16.0 * f64::EPSILON * (1.0 + s), "s = {s}: {res}");
    }
}

trait CAmax {
    fn amax_complex(&self) -> f64;
}

impl CAmax for Matrix3<Complex64> {
    fn amax_complex(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[test]
fn adjugate_agrees_with_generic_inverse() {
    let mut checked = 0;
    for (s, lambda) in sector_samples(2_000, 8) {
        let a = symbol_matrix_sq(s).0;
        let m = Matrix3::identity() * lambda - a;
        let Some(inv) = generic_inverse(s, lambda) else {
            continue;
        };
        let cond = m.amax_complex() * inv.amax_complex();
        if cond > 1e8 {
            continue;
        }
        let r = resolvent_matrix_sq(s, lambda).unwrap().0;
        assert!((r - inv).amax_complex() <= 1e-8 * inv.amax_complex());
        checked += 1;
    }
    assert!(checked > 1000);
}

#[test]
fn resolvent_examples() {
    let r = resolvent_matrix(&[0.0], c(1.0, 0.0)).unwrap();
    assert_eq!(
        r,
        SymbolMatrix::from_real([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    );
    let r = resolvent_matrix(&[1.0], c(1.0, 0.0)).unwrap();
    assert_relative_eq!(r.entry(1, 3).re, 0.2, epsilon = 1e-14);
    let g1 = roots().gamma1;
    assert!(resolvent_matrix(&[1.0], c(-g1, 0.0)).is_err());
}

#[test]
fn scaling_and_scaled_resolvent_examples() {
    assert_eq!(scaling_matrix(0, &[0.0]).unwrap(), SymbolMatrix::identity());
    assert_eq!(
        scaling_matrix(2, &[1.0]).unwrap(),
        SymbolMatrix::diag([4.0, 2.0, 2.0])
    );
    assert_eq!(scaling_matrix(1, &[0.0]).unwrap(), SymbolMatrix::identity());
    assert!(scaling_matrix(3, &[0.0]).is_err());
    assert!(scaling_matrix(-1, &[0.0]).is_err());
    let m = scaled_resolvent_symbol(0, &[1.0], c(1.0, 0.0)).unwrap();
    assert_relative_eq!(m.entry(1, 1).re, 1.2, epsilon = 1e-14);
    assert_relative_eq!(m.entry(2, 1).re, -0.4, epsilon = 1e-14);
    let m = scaled_resolvent_symbol(1, &[1.0], c(1.0, 0.0)).unwrap();
    assert_relative_eq!(m.entry(2, 1).re, -0.2 * 2f64.sqrt(), epsilon = 1e-14);
    let m = scaled_resolvent_symbol(2, &[0.0], c(1.0, 0.0)).unwrap();
    assert!(
        m.max_abs_diff(&SymbolMatrix::from_real([
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0]
        ])) < 1e-15
    );
}

/// `M^(j)` from its definition with generic matrix products and inverse.
#[test]
fn scaled_resolvent_matches_definition() {
    for (s, lambda) in sector_samples(500, 9) {
        let xi = [s.sqrt()];
        let Some(inv) = generic_inverse(s, lambda) else {
            continue;
        };
        for j in 0..=2i64 {
            let b = 1.0 + s;
            let left =
                Matrix3::from_diagonal(&Vector3::new(b, 1.0, 1.0)) * b.powf((2 - j) as f64 / 2.0);
            let right = Matrix3::from_diagonal(&Vector3::new(1.0 / b, 1.0, 1.0));
            let oracle = left.map(|x| c(x, 0.0))
                * inv
                * right.map(|x| c(x, 0.0))
                * lambda.powf(j as f64 / 2.0);
            let got = scaled_resolvent_symbol(j, &xi, lambda).unwrap().0;
            assert!((got - oracle).amax_complex() <= 1e-8 * oracle.amax_complex().max(1.0));
        }
    }
}

#[test]
fn rotational_invariance_is_exact() {
    let a = [3.0, 4.0];
    let b = [0.0, 5.0];
    let lambda = c(0.7, 1.3);
    assert_eq!(symbol_matrix(&a), symbol_matrix(&b));
    assert_eq!(determinant(&a, lambda), determinant(&b, lambda));
    assert_eq!(
        resolvent_matrix(&a, lambda).unwrap(),
        resolvent_matrix(&b, lambda).unwrap()
    );
    assert_eq!(
        scaled_resolvent_symbol(2, &[2.0, 3.0, 6.0], lambda).unwrap(),
        scaled_resolvent_symbol(2, &[7.0, 0.0, 0.0], lambda).unwrap()
    );
    let d = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
    assert!(symbol_matrix(&d).max_abs_diff(&symbol_matrix(&[1.0, 0.0])) < 1e-15);
}

proptest! {
    #[test]
    fn resolvent_inverse_identity(log_rho in -3.0f64..2.0, log_r in -3.0f64..3.0, frac in -0.99f64..0.99) {
        let s = 10f64.powf(2.0 * log_rho);
        let lambda = 1.0 + Complex64::from_polar(10f64.powf(log_r), frac * 0.95 * roots().theta0);
        prop_assert!(in_shifted_sector(lambda, 1.0, roots().theta0));
        let r = resolvent_matrix_sq(s, lambda).unwrap();
        let prod = (Matrix3::identity() * lambda - symbol_matrix_sq(s).0) * r.0;
        prop_assert!((prod - Matrix3::identity()).amax_complex() <= 1e-10);
        let (d1, d2) = determinant_factorizations_sq(s, lambda);
        prop_assert!((d1 - d2).norm() <= 1e-10 * d1.norm());
    }

    #[test]
    fn resolvent_identity_between_two_points(log_rho in -2.0f64..2.0, a in 0.1f64..5.0, b in -5.0f64..5.0) {
        let s = 10f64.powf(2.0 * log_rho);
        let l = c(a, b);
        let m = c(a + 1.0, -b);
        let rl = resolvent_matrix_sq(s, l).unwrap().0;
        let rm = resolvent_matrix_sq(s, m).unwrap().0;
        let lhs = rl - rm;
        let rhs = rl * rm * (m - l);
        prop_assert!((lhs - rhs).amax_complex() <= 1e-9 * rl.amax_complex().max(rm.amax_complex()));
    }
}
