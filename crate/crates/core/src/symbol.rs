//! Closed-form whole-space symbols of the thermoelastic plate system.
//!
//! With `s = |xi|^2` the Fourier symbol of the generator is
//!
//! ```text
//!          |  0    1    0 |
//! A(xi) =  | -s^2  0    s |
//!          |  0   -s   -s |
//! ```
//!
//! and `det(lambda - A(xi)) = prod_j (lambda + gamma_j s)` where `-gamma_j` are
//! the roots of `p(t) = t^3 + t^2 + 2t + 1`. Every public function that takes a
//! frequency vector reduces it to `s` first, so results depend on `xi` only
//! through its Euclidean norm.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients `(c2, c1, c0)` of the monic cubic `t^3 + c2 t^2 + c1 t + c0`.
pub const PLATE_CUBIC: [f64; 3] = [1.0, 2.0, 1.0];

/// Residual ceiling for the polished roots.
pub const ROOT_RESIDUAL_LIMIT: f64 = 1e-12;

/// Determinants below this modulus are treated as singular.
pub const SINGULAR_DET: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Squared Euclidean norm of a frequency vector.
pub fn xi_sq(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum()
}

fn eval_cubic(coeffs: [f64; 3], t: Complex64) -> Complex64 {
    ((t + coeffs[0]) * t + coeffs[1]) * t + coeffs[2]
}

fn eval_cubic_derivative(coeffs: [f64; 3], t: Complex64) -> Complex64 {
    (t * 3.0 + 2.0 * coeffs[0]) * t + coeffs[1]
}

/// Value of `p(t) = t^3 + t^2 + 2t + 1`.
pub fn plate_polynomial(t: Complex64) -> Complex64 {
    eval_cubic(PLATE_CUBIC, t)
}

/// Roots of a monic cubic from the eigenvalues of its companion matrix, each
/// refined by one Newton step.
pub fn cubic_roots(coeffs: [f64; 3]) -> [Complex64; 3] {
    let [c2, c1, c0] = coeffs;
    let companion = Matrix3::new(0.0, 0.0, -c0, 1.0, 0.0, -c1, 0.0, 1.0, -c2);
    let eig = companion.complex_eigenvalues();
    let mut roots = [eig[0], eig[1], eig[2]];
    for r in roots.iter_mut() {
        let d = eval_cubic_derivative(coeffs, *r);
        if d.norm() > 0.0 {
            let step = eval_cubic(coeffs, *r) / d;
            if step.is_finite() {
                *r -= step;
            }
        }
    }
    roots
}

/// The roots `gamma_1, gamma_2, gamma_3` of `p(t) = (t + gamma_1)(t + gamma_2)(t + gamma_3)`
/// and the sector angle `theta0 = arg(-gamma_3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicRoots {
    pub gamma1: f64,
    pub gamma2: Complex64,
    pub gamma3: Complex64,
    pub theta0: f64,
}

/// One named invariant of [`CharacteristicRoots`] together with the observed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCheck {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

impl CharacteristicRoots {
    /// Classify the roots of an arbitrary monic cubic with one real root and a
    /// complex-conjugate pair using the sign convention `p(t) = prod (t + gamma_j)`.
    /// Used with perturbed coefficients to exercise the invariant checks.
    pub fn from_cubic(coeffs: [f64; 3]) -> Result<Self> {
        let mut roots = cubic_roots(coeffs);
        roots.sort_by(|a, b| a.im.abs().total_cmp(&b.im.abs()));
        let real_root = roots[0];
        let lower = if roots[1].im < roots[2].im {
            roots[1]
        } else {
            roots[2]
        };
        // Re-polish the real root on the real line so its imaginary part is exactly zero.
        let mut t = real_root.re;
        for _ in 0..2 {
            let z = Complex64::new(t, 0.0);
            let d = eval_cubic_derivative(coeffs, z).re;
            if d != 0.0 {
                t -= eval_cubic(coeffs, z).re / d;
            }
        }
        // gamma = -root; gamma2 has positive imaginary part, hence comes from the lower root.
        let gamma2 = -lower;
        let gamma2 = Complex64::new(gamma2.re, gamma2.im.abs());
        let gamma3 = gamma2.conj();
        let residual = [Complex64::new(t, 0.0), -gamma2, -gamma3]
            .iter()
            .map(|r| eval_cubic(coeffs, *r).norm())
            .fold(0.0, f64::max);
        if !(residual <= ROOT_RESIDUAL_LIMIT) {
            return Err(Error::RootSolver {
                residual,
                limit: ROOT_RESIDUAL_LIMIT,
            });
        }
        Ok(Self {
            gamma1: -t,
            gamma2,
            gamma3,
            theta0: (-gamma3).arg(),
        })
    }

    pub fn gammas(&self) -> [Complex64; 3] {
        [Complex64::new(self.gamma1, 0.0), self.gamma2, self.gamma3]
    }

    /// `|p(-gamma_j)|` for the plate polynomial.
    pub fn residuals(&self) -> [f64; 3] {
        self.gammas().map(|g| plate_polynomial(-g).norm())
    }

    /// Evaluate every invariant against the plate polynomial.
    pub fn checks(&self) -> Vec<RootCheck> {
        let g = self.gammas();
        let max_res = self.residuals().into_iter().fold(0.0, f64::max);
        let product = g[0] * g[1] * g[2];
        let sum = g[0] + g[1] + g[2];
        let pi = std::f64::consts::PI;
        let check = |name: &str, value: f64, pass: bool| RootCheck {
            name: name.to_string(),
            value,
            pass,
        };
        vec![
            check("residual", max_res, max_res <= ROOT_RESIDUAL_LIMIT),
            check(
                "gamma1_in_unit_interval",
                self.gamma1,
                self.gamma1 > 0.0 && self.gamma1 < 1.0,
            ),
            check(
                "conjugate_pair",
                (self.gamma2 - self.gamma3.conj()).norm(),
                self.gamma2 == self.gamma3.conj() && self.gamma2.im > 0.0,
            ),
            check(
                "re_gamma2_in_half_interval",
                self.gamma2.re,
                self.gamma2.re > 0.0 && self.gamma2.re < 0.5,
            ),
            check(
                "vieta_product",
                (product - ONE).norm(),
                (product - ONE).norm() <= 1e-12,
            ),
            check("vieta_sum", (sum - ONE).norm(), (sum - ONE).norm() <= 1e-12),
            check(
                "theta0_in_sector",
                self.theta0,
                self.theta0 > pi / 2.0 && self.theta0 < pi,
            ),
        ]
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }
}

/// Characteristic roots of `t^3 + t^2 + 2t + 1`.
pub fn characteristic_roots() -> Result<CharacteristicRoots> {
    CharacteristicRoots::from_cubic(PLATE_CUBIC)
}

/// Shared, lazily computed roots. Panics only if the root solver is broken,
/// which the unit tests rule out.
pub fn roots() -> &'static CharacteristicRoots {
    static ROOTS: OnceLock<CharacteristicRoots> = OnceLock::new();
    ROOTS.get_or_init(|| characteristic_roots().expect("plate cubic roots"))
}

/// A frequency vector and spectral parameter, with the sector it is tested against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub xi: Vec<f64>,
    pub lambda: Complex64,
    pub lambda0: f64,
    pub theta: f64,
}

impl SpectralPoint {
    pub fn new(xi: Vec<f64>, lambda: Complex64, lambda0: f64, theta: f64) -> Self {
        Self {
            xi,
            lambda,
            lambda0,
            theta,
        }
    }

    /// Membership in `lambda0 + Sigma_theta`.
    pub fn in_sector(&self) -> bool {
        in_shifted_sector(self.lambda, self.lambda0, self.theta)
    }

    pub fn xi_sq(&self) -> f64 {
        xi_sq(&self.xi)
    }
}

pub fn in_shifted_sector(lambda: Complex64, lambda0: f64, theta: f64) -> bool {
    let z = lambda - lambda0;
    z != ZERO && z.arg().abs() < theta
}

/// A 3x3 complex matrix produced by the symbol calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolMatrix(pub Matrix3<Complex64>);

impl SymbolMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn from_real(rows: [[f64; 3]; 3]) -> Self {
        Self(Matrix3::from_fn(|i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn diag(d: [f64; 3]) -> Self {
        Self(Matrix3::from_diagonal(&Vector3::new(
            Complex64::new(d[0], 0.0),
            Complex64::new(d[1], 0.0),
            Complex64::new(d[2], 0.0),
        )))
    }

    /// Entry with 1-based indices, matching the `m_kl` notation.
    pub fn entry(&self, k: usize, l: usize) -> Complex64 {
        self.0[(k - 1, l - 1)]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.0.singular_values().iter().copied().fold(0.0, f64::max)
    }

    pub fn apply(&self, x: [Complex64; 3]) -> [Complex64; 3] {
        let y = self.0 * Vector3::new(x[0], x[1], x[2]);
        [y[0], y[1], y[2]]
    }
}

impl std::ops::Mul for SymbolMatrix {
    type Output = SymbolMatrix;
    fn mul(self, rhs: SymbolMatrix) -> SymbolMatrix {
        SymbolMatrix(self.0 * rhs.0)
    }
}

impl fmt::Display for SymbolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..3 {
            let row: Vec<String> = (0..3).map(|j| format!("{}", self.0[(i, j)])).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `A(xi)` from the squared frequency.
pub fn symbol_matrix_sq(s: f64) -> SymbolMatrix {
    SymbolMatrix::from_real([[0.0, 1.0, 0.0], [-s * s, 0.0, s], [0.0, -s, -s]])
}

pub fn symbol_matrix(xi: &[f64]) -> SymbolMatrix {
    symbol_matrix_sq(xi_sq(xi))
}

/// `det(lambda - A(xi))` evaluated through both factorizations:
/// `prod (lambda/gamma_i + s)` and `prod (lambda + gamma_j s)`.
pub fn determinant_factorizations_sq(s: f64, lambda: Complex64) -> (Complex64, Complex64) {
    let g = roots().gammas();
    let by_quotient = g.iter().map(|gi| lambda / gi + s).product();
    let by_product = g.iter().map(|gj| lambda + gj * s).product();
    (by_quotient, by_product)
}

pub fn determinant_sq(s: f64, lambda: Complex64) -> Complex64 {
    determinant_factorizations_sq(s, lambda).1
}

pub fn determinant(xi: &[f64], lambda: Complex64) -> Complex64 {
    determinant_sq(xi_sq(xi), lambda)
}

/// Explicit adjugate formula for `(lambda - A(xi))^{-1}`.
pub fn resolvent_matrix_sq(s: f64, lambda: Complex64) -> Result<SymbolMatrix> {
    let det = determinant_sq(s, lambda);
    if !(det.norm() >= SINGULAR_DET) {
        return Err(Error::SingularParameter {
            xi_sq: s,
            lambda,
            det_abs: det.norm(),
        });
    }
    let l = lambda;
    let ls = l + s;
    let s2 = s * s;
    let adj = Matrix3::new(
        l * ls + s2,
        ls,
        Complex64::new(s, 0.0),
        -ls * s2,
        l * ls,
        l * s,
        Complex64::new(s2 * s, 0.0),
        -l * s,
        l * l + s2,
    );
    Ok(SymbolMatrix(adj / det))
}

pub fn resolvent_matrix(xi: &[f64], lambda: Complex64) -> Result<SymbolMatrix> {
    resolvent_matrix_sq(xi_sq(xi), lambda)
}

fn check_index(j: i64) -> Result<u32> {
    match j {
        0..=2 => Ok(j as u32),
        _ => Err(Error::InvalidIndex(j)),
    }
}

fn scaling_diag(j: u32, s: f64) -> [f64; 3] {
    let w = 1.0 + s;
    let f = w.powf(j as f64 / 2.0);
    [f * w, f, f]
}

/// `S_j(xi) = (1 + s)^{j/2} diag(1 + s, 1, 1)`.
pub fn scaling_matrix_sq(j: i64, s: f64) -> Result<SymbolMatrix> {
    Ok(SymbolMatrix::diag(scaling_diag(check_index(j)?, s)))
}

pub fn scaling_matrix(j: i64, xi: &[f64]) -> Result<SymbolMatrix> {
    scaling_matrix_sq(j, xi_sq(xi))
}

/// Principal branch of `lambda^{j/2}`.
pub fn lambda_half_power(lambda: Complex64, j: u32) -> Complex64 {
    match j {
        0 => ONE,
        1 => lambda.sqrt(),
        2 => lambda,
        _ => lambda.powf(j as f64 / 2.0),
    }
}

/// `M^(j)(xi, lambda) = lambda^{j/2} S_{2-j}(xi) (lambda - A(xi))^{-1} S_0(xi)^{-1}`.
pub fn scaled_resolvent_symbol_sq(j: i64, s: f64, lambda: Complex64) -> Result<SymbolMatrix> {
    let j = check_index(j)?;
    let r = resolvent_matrix_sq(s, lambda)?;
    let left = scaling_diag(2 - j, s);
    let right = scaling_diag(0, s);
    let pre = lambda_half_power(lambda, j);
    Ok(SymbolMatrix(Matrix3::from_fn(|k, l| {
        pre * r.0[(k, l)] * (left[k] / right[l])
    })))
}

pub fn scaled_resolvent_symbol(j: i64, xi: &[f64], lambda: Complex64) -> Result<SymbolMatrix> {
    scaled_resolvent_symbol_sq(j, xi_sq(xi), lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_match_frozen_values() {
        // Frozen from a 40-digit polynomial root finder, independent of the companion path.
        let r = characteristic_roots().unwrap();
        assert_relative_eq!(r.gamma1, 0.569_840_290_998_053_3, epsilon = 1e-14);
        assert_relative_eq!(r.gamma2.re, 0.215_079_854_500_973_4, epsilon = 1e-14);
        assert_relative_eq!(r.gamma2.im, 1.307_141_278_682_045_5, epsilon = 1e-14);
        assert_relative_eq!(r.theta0, 1.733_877_210_986_840_2, epsilon = 1e-14);
        assert!(r.all_checks_pass(), "{:?}", r.checks());
    }

    #[test]
    fn roots_agree_with_cardano() {
        // Depressed cubic for t^3 + t^2 + 2t + 1: t = y - 1/3.
        let p: f64 = 2.0 - 1.0 / 3.0;
        let q: f64 = 2.0 / 27.0 - 2.0 / 3.0 + 1.0;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        let u = (-q / 2.0 + disc.sqrt()).cbrt();
        let v = (-q / 2.0 - disc.sqrt()).cbrt();
        let real_root = u + v - 1.0 / 3.0;
        let r = roots();
        assert_relative_eq!(r.gamma1, -real_root, epsilon = 1e-13);
        let im = (u - v) * 3f64.sqrt() / 2.0;
        assert_relative_eq!(r.gamma2.im, im.abs(), epsilon = 1e-13);
        assert_relative_eq!(r.gamma2.re, (u + v) / 2.0 + 1.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn perturbed_cubic_fails_checks() {
        let r = CharacteristicRoots::from_cubic([1.0, 2.0, 1.0 + 1e-6]).unwrap();
        let failed: Vec<_> = r.checks().into_iter().filter(|c| !c.pass).collect();
        assert!(failed.iter().any(|c| c.name == "residual"));
        assert!(failed.iter().any(|c| c.name == "vieta_product"));
    }

    #[test]
    fn symbol_matrix_examples() {
        assert_eq!(
            symbol_matrix(&[0.0, 0.0]),
            SymbolMatrix::from_real([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        );
        assert_eq!(
            symbol_matrix(&[1.0]),
            SymbolMatrix::from_real([[0.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, -1.0]])
        );
        let d = std::f64::consts::FRAC_1_SQRT_2;
        let a = symbol_matrix(&[d, d]);
        let b = symbol_matrix(&[1.0, 0.0]);
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn determinant_examples() {
        assert_relative_eq!(determinant(&[1.0], ONE).re, 5.0, epsilon = 1e-13);
        assert!(determinant(&[1.0], ONE).im.abs() < 1e-13);
        assert_relative_eq!(determinant(&[0.0, 1.0], ZERO).re, 1.0, epsilon = 1e-13);
        assert_relative_eq!(determinant(&[0.0], ONE).re, 1.0, epsilon = 1e-15);
        let (a, b) = determinant_factorizations_sq(3.7, c(-0.4, 2.2));
        assert!((a - b).norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn resolvent_examples() {
        let r0 = resolvent_matrix(&[0.0], ONE).unwrap();
        let expect = SymbolMatrix::from_real([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(r0.max_abs_diff(&expect) < 1e-15);
        let r1 = resolvent_matrix(&[1.0], ONE).unwrap();
        assert_relative_eq!(r1.entry(1, 3).re, 0.2, epsilon = 1e-14);
    }

    #[test]
    fn resolvent_rejects_spectrum() {
        let g = roots().gamma1;
        let err = resolvent_matrix_sq(2.0, c(-2.0 * g, 0.0)).unwrap_err();
        assert!(matches!(err, Error::SingularParameter { .. }));
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(scaling_matrix(0, &[0.0]).unwrap(), SymbolMatrix::identity());
        assert_eq!(
            scaling_matrix(2, &[1.0, 0.0]).unwrap(),
            SymbolMatrix::diag([4.0, 2.0, 2.0])
        );
        assert_eq!(scaling_matrix(1, &[0.0]).unwrap(), SymbolMatrix::identity());
        assert!(matches!(
            scaling_matrix(3, &[0.0]),
            Err(Error::InvalidIndex(3))
        ));
        assert!(matches!(
            scaling_matrix(-1, &[0.0]),
            Err(Error::InvalidIndex(-1))
        ));
    }

    #[test]
    fn scaled_resolvent_examples() {
        let m0 = scaled_resolvent_symbol(0, &[1.0], ONE).unwrap();
        assert_relative_eq!(m0.entry(1, 1).re, 1.2, epsilon = 1e-14);
        assert_relative_eq!(m0.entry(2, 1).re, -0.4, epsilon = 1e-14);
        let m1 = scaled_resolvent_symbol(1, &[1.0], ONE).unwrap();
        assert_relative_eq!(m1.entry(2, 1).re, -0.2 * 2f64.sqrt(), epsilon = 1e-14);
        let m2 = scaled_resolvent_symbol(2, &[0.0, 0.0], ONE).unwrap();
        let expect = SymbolMatrix::from_real([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(m2.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn m21_matches_entry_formula() {
        // m21^(j) = -det^{-1} lambda^{j/2} (1+s)^{(2-j)/2} (lambda+s) s^2/(1+s)
        let s = 2.3;
        let l = c(0.7, 1.9);
        for j in 0..3 {
            let m = scaled_resolvent_symbol_sq(j, s, l).unwrap();
            let expect = -lambda_half_power(l, j as u32)
                * (1.0 + s).powf((2 - j) as f64 / 2.0)
                * (l + s)
                * (s * s / (1.0 + s))
                / determinant_sq(s, l);
            assert!((m.entry(2, 1) - expect).norm() < 1e-13 * expect.norm());
        }
    }

    #[test]
    fn sector_membership() {
        let p = SpectralPoint::new(vec![1.0], c(2.0, 0.5), 1.0, 0.5);
        assert!(p.in_sector());
        let on_vertex = SpectralPoint::new(vec![1.0], c(1.0, 0.0), 1.0, 0.5);
        assert!(!on_vertex.in_sector());
        let outside = SpectralPoint::new(vec![1.0], c(1.0, 1.0), 1.0, 0.5);
        assert!(!outside.in_sector());
    }
}
