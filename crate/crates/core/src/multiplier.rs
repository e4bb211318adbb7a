//! Empirical multiplier-class scans.
//!
//! A symbol `m(xi, lambda)` is a multiplier of order `s` on a sector when
//!
//! ```text
//! |d_xi^alpha m(xi, lambda)| <= C_alpha (|lambda|^{1/2} + |xi|)^s |xi|^{-|alpha|}
//! ```
//!
//! for every multi-index. The scan samples the sector and the frequency space,
//! differentiates by iterated central differences and reports the observed
//! suprema. A passing report certifies boundedness over the sample only.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::{self, xi_sq};

/// Default pass ceiling on every `C_alpha`.
pub const DEFAULT_CEILING: f64 = 1e6;

/// Largest supported derivative order.
pub const MAX_ALPHA_LIMIT: u32 = 4;

/// Vector-valued symbol used by the scans.
pub type VectorFn = dyn Fn(&[f64], Complex64) -> Result<Vec<Complex64>> + Send + Sync;

/// A named scalar symbol. Built-ins and their products are the only symbols
/// the tools construct, but any pure closure can be wrapped.
#[derive(Clone)]
pub struct Symbol {
    id: String,
    f: Arc<dyn Fn(&[f64], Complex64) -> Complex64 + Send + Sync>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol").field("id", &self.id).finish()
    }
}

impl Symbol {
    pub fn new<F>(id: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            f: Arc::new(f),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn eval(&self, xi: &[f64], lambda: Complex64) -> Complex64 {
        (self.f)(xi, lambda)
    }

    /// Pointwise product `m1 * m2`.
    pub fn product(&self, other: &Symbol) -> Symbol {
        let (a, b) = (self.f.clone(), other.f.clone());
        Symbol::new(format!("({})*({})", self.id, other.id), move |xi, l| {
            a(xi, l) * b(xi, l)
        })
    }

    /// `lambda`, order 2.
    pub fn lambda() -> Symbol {
        Symbol::new("lambda", |_, l| l)
    }

    /// `|xi|^{2k}`, order `2k`.
    pub fn xi_power(k: u32) -> Symbol {
        Symbol::new(format!("|xi|^{}", 2 * k), move |xi, _| {
            Complex64::new(xi_sq(xi).powi(k as i32), 0.0)
        })
    }

    /// `(lambda + |xi|^2)^{sign/2}`, order `sign` with `sign` = +1 or -1.
    pub fn sqrt_lambda_plus_xi(sign: i32) -> Symbol {
        let id = if sign >= 0 {
            "(lambda+|xi|^2)^(1/2)"
        } else {
            "(lambda+|xi|^2)^(-1/2)"
        };
        Symbol::new(id, move |xi, l| {
            let r = (l + xi_sq(xi)).sqrt();
            if sign >= 0 {
                r
            } else {
                r.inv()
            }
        })
    }

    /// `|xi| / (1 + |xi|^2)^{1/2}`, order 0.
    pub fn xi_over_bracket() -> Symbol {
        Symbol::new("|xi|/(1+|xi|^2)^(1/2)", |xi, _| {
            let s = xi_sq(xi);
            Complex64::new((s / (1.0 + s)).sqrt(), 0.0)
        })
    }

    pub fn constant(c: f64) -> Symbol {
        Symbol::new(format!("{c}"), move |_, _| Complex64::new(c, 0.0))
    }

    /// Entry `(k, l)` (1-based) of the scaled resolvent symbol `M^(j)`.
    /// Points on the spectrum evaluate to NaN so the scan reports them.
    pub fn scaled_resolvent_entry(j: i64, k: usize, l: usize) -> Symbol {
        Symbol::new(format!("M{j}_{k}{l}"), move |xi, lambda| {
            symbol::scaled_resolvent_symbol(j, xi, lambda)
                .map(|m| m.entry(k, l))
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        })
    }
}

/// `n` logarithmically spaced points between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// The sampled subset of `(R^N \ {0}) x (lambda0 + Sigma_theta)`.
///
/// Points are `lambda = lambda0 + r e^{i f theta}` for `r` in `lambda_moduli`,
/// `f` in `arg_fractions`, and `xi = rho d` for `rho` in `xi_moduli` and unit
/// vectors `d` in `directions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSample {
    pub dim: usize,
    pub lambda0: f64,
    pub theta: f64,
    pub lambda_moduli: Vec<f64>,
    pub arg_fractions: Vec<f64>,
    pub xi_moduli: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl SectorSample {
    /// Defaults: 32 log-spaced moduli in `[1e-3, 1e3]` for both `|xi|` and
    /// `|lambda - lambda0|`, arg fractions `{0, +-0.5, +-0.99}`, directions the
    /// coordinate axes plus the normalized diagonal.
    pub fn new(dim: usize, lambda0: f64, theta: f64) -> Self {
        Self {
            dim,
            lambda0,
            theta,
            lambda_moduli: log_space(1e-3, 1e3, 32),
            arg_fractions: vec![-0.99, -0.5, 0.0, 0.5, 0.99],
            xi_moduli: log_space(1e-3, 1e3, 32),
            directions: default_directions(dim),
        }
    }

    /// Default sample on `1 + Sigma_{0.95 theta0}` in two dimensions.
    pub fn default_shifted() -> Self {
        Self::new(2, 1.0, 0.95 * symbol::roots().theta0)
    }

    pub fn with_lambda_range(mut self, lo: f64, hi: f64, n: usize) -> Self {
        self.lambda_moduli = log_space(lo, hi, n);
        self
    }

    pub fn with_xi_range(mut self, lo: f64, hi: f64, n: usize) -> Self {
        self.xi_moduli = log_space(lo, hi, n);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("sector sample: {m}")));
        if self.dim == 0 {
            return bad("dimension must be positive");
        }
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return bad("lambda0 must be a nonnegative finite number");
        }
        if !(self.theta > 0.0 && self.theta < std::f64::consts::PI) {
            return bad("theta must lie in (0, pi)");
        }
        if self.lambda_moduli.is_empty()
            || self.xi_moduli.is_empty()
            || self.arg_fractions.is_empty()
            || self.directions.is_empty()
        {
            return bad("lists must be non-empty");
        }
        if self
            .lambda_moduli
            .iter()
            .chain(&self.xi_moduli)
            .any(|r| !(*r > 0.0 && r.is_finite()))
        {
            return bad("moduli must be positive and finite");
        }
        if self.arg_fractions.iter().any(|f| !(*f > -1.0 && *f < 1.0)) {
            return bad("arg fractions must lie in (-1, 1)");
        }
        for d in &self.directions {
            if d.len() != self.dim || (xi_sq(d).sqrt() - 1.0).abs() > 1e-12 {
                return bad("directions must be unit vectors of the sample dimension");
            }
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.lambda_moduli.len() * self.arg_fractions.len());
        for &r in &self.lambda_moduli {
            for &f in &self.arg_fractions {
                out.push(self.lambda0 + Complex64::from_polar(r, f * self.theta));
            }
        }
        out
    }

    pub fn xis(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.xi_moduli.len() * self.directions.len());
        for &rho in &self.xi_moduli {
            for d in &self.directions {
                out.push(d.iter().map(|x| rho * x).collect());
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.lambda_moduli.len()
            * self.arg_fractions.len()
            * self.xi_moduli.len()
            * self.directions.len()
    }
}

fn default_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = (0..dim)
        .map(|k| (0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    if dim > 1 {
        let c = 1.0 / (dim as f64).sqrt();
        dirs.push(vec![c; dim]);
    }
    dirs
}

/// All multi-indices of length `dim` with `|alpha| <= max_order`, ordered by
/// total order and then lexicographically descending.
pub fn multi_indices(dim: usize, max_order: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim - 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=remaining).rev() {
            prefix.push(a);
            rec(dim, remaining - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for order in 0..=max_order {
        rec(dim, order, &mut Vec::new(), &mut out);
    }
    out
}

/// Relative step used for a derivative of total order `order`: it balances
/// the `h^2` truncation error against the `eps / h^order` rounding error.
pub fn step_factor(order: u32) -> f64 {
    if order == 0 {
        0.0
    } else {
        f64::EPSILON.powf(1.0 / (order as f64 + 2.0))
    }
}

/// Central-difference approximation of `d^alpha` of every component of `f`,
/// built as iterated first differences `(g(x + h) - g(x - h)) / 2h`, one
/// differentiation order at a time. Iterating, rather than using the
/// collapsed binomial stencil, makes every level annihilate constants exactly.
pub fn fd_derivative(
    f: &VectorFn,
    xi: &[f64],
    lambda: Complex64,
    alpha: &[u32],
) -> Result<Vec<Complex64>> {
    let order: u32 = alpha.iter().sum();
    let h = step_factor(order) * xi_sq(xi).sqrt();
    let mut remaining = alpha.to_vec();
    let mut point = xi.to_vec();
    let raw = iterated_difference(f, &mut point, lambda, &mut remaining, h)?;
    let divisor = (2.0 * h).powi(order as i32);
    Ok(raw.into_iter().map(|v| v / divisor).collect())
}

fn iterated_difference(
    f: &VectorFn,
    point: &mut [f64],
    lambda: Complex64,
    remaining: &mut [u32],
    h: f64,
) -> Result<Vec<Complex64>> {
    let Some(k) = remaining.iter().position(|&a| a > 0) else {
        return f(point, lambda);
    };
    remaining[k] -= 1;
    let x = point[k];
    point[k] = x + h;
    let plus = iterated_difference(f, point, lambda, remaining, h)?;
    point[k] = x - h;
    let minus = iterated_difference(f, point, lambda, remaining, h)?;
    point[k] = x;
    remaining[k] += 1;
    Ok(plus.into_iter().zip(minus).map(|(p, m)| p - m).collect())
}

/// Location of the observed supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxPoint {
    pub xi: Vec<f64>,
    pub lambda: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRecord {
    pub alpha: Vec<u32>,
    #[serde(rename = "C_alpha")]
    pub c_alpha: f64,
    pub argmax_point: Option<ArgmaxPoint>,
    /// Step divided by `|xi|`.
    pub relative_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub symbol_id: String,
    pub s: f64,
    pub dim: usize,
    pub max_alpha: u32,
    pub lambda0: f64,
    pub theta: f64,
    pub sample_size: usize,
    pub ceiling: f64,
    pub pass: bool,
    pub note: String,
    pub records: Vec<AlphaRecord>,
}

const EMPIRICAL_NOTE: &str = "empirical bound over the sampled points only";

impl MultiplierReport {
    pub fn c_alpha(&self, alpha: &[u32]) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.alpha == alpha)
            .map(|r| r.c_alpha)
    }

    pub fn c0(&self) -> f64 {
        self.records[0].c_alpha
    }

    pub fn max_c(&self) -> f64 {
        self.records.iter().map(|r| r.c_alpha).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per multi-index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "symbol_id,s,alpha,C_alpha,argmax_xi_norm,argmax_lambda_re,argmax_lambda_im\n",
        );
        for r in &self.records {
            let alpha: Vec<String> = r.alpha.iter().map(|a| a.to_string()).collect();
            let (xn, lre, lim) = match &r.argmax_point {
                Some(p) => (xi_sq(&p.xi).sqrt(), p.lambda.re, p.lambda.im),
                None => (f64::NAN, f64::NAN, f64::NAN),
            };
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:e},{:e}\n",
                csv_field(&self.symbol_id),
                self.s,
                alpha.join(" "),
                r.c_alpha,
                xn,
                lre,
                lim
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Scan a vector-valued symbol; one report per component. Components share
/// every evaluation, which is what makes full-matrix scans affordable.
pub fn scan_components(
    ids: &[String],
    f: &VectorFn,
    s: f64,
    sample: &SectorSample,
    max_alpha: u32,
    ceiling: f64,
) -> Result<Vec<MultiplierReport>> {
    sample.validate()?;
    if max_alpha > MAX_ALPHA_LIMIT {
        return Err(Error::InvalidInput(format!(
            "max_alpha {max_alpha} exceeds {MAX_ALPHA_LIMIT}"
        )));
    }
    let alphas = multi_indices(sample.dim, max_alpha);
    let xis = sample.xis();
    let lambdas = sample.lambdas();
    let points: Vec<(usize, usize)> = (0..xis.len())
        .flat_map(|a| (0..lambdas.len()).map(move |b| (a, b)))
        .collect();
    let ncomp = ids.len();

    // ratios[point][alpha][component]
    let ratios: Vec<Vec<Vec<f64>>> = points
        .par_iter()
        .map(|&(a, b)| {
            let xi = &xis[a];
            let lambda = lambdas[b];
            let rho = xi_sq(xi).sqrt();
            let weight = (lambda.norm().sqrt() + rho).powf(s);
            alphas
                .iter()
                .map(|alpha| {
                    let order: u32 = alpha.iter().sum();
                    let d = fd_derivative(f, xi, lambda, alpha)?;
                    if d.len() != ncomp {
                        return Err(Error::InvalidInput(format!(
                            "symbol returned {} components, expected {ncomp}",
                            d.len()
                        )));
                    }
                    let scale = rho.powi(order as i32) / weight;
                    d.iter()
                        .enumerate()
                        .map(|(c, v)| {
                            let r = v.norm() * scale;
                            if r.is_finite() {
                                Ok(r)
                            } else {
                                Err(Error::Evaluation {
                                    symbol: ids[c].clone(),
                                    xi: xi.clone(),
                                    lambda,
                                })
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let reports = (0..ncomp)
        .map(|c| {
            let records: Vec<AlphaRecord> = alphas
                .iter()
                .enumerate()
                .map(|(ai, alpha)| {
                    let mut best = 0.0;
                    let mut arg = None;
                    for (pi, r) in ratios.iter().enumerate() {
                        if r[ai][c] > best || arg.is_none() {
                            best = r[ai][c];
                            arg = Some(pi);
                        }
                    }
                    AlphaRecord {
                        alpha: alpha.clone(),
                        c_alpha: best,
                        argmax_point: arg.map(|pi| {
                            let (a, b) = points[pi];
                            ArgmaxPoint {
                                xi: xis[a].clone(),
                                lambda: lambdas[b],
                            }
                        }),
                        relative_step: step_factor(alpha.iter().sum()),
                    }
                })
                .collect();
            let pass = records
                .iter()
                .all(|r| r.c_alpha.is_finite() && r.c_alpha < ceiling);
            MultiplierReport {
                symbol_id: ids[c].clone(),
                s,
                dim: sample.dim,
                max_alpha,
                lambda0: sample.lambda0,
                theta: sample.theta,
                sample_size: points.len(),
                ceiling,
                pass,
                note: EMPIRICAL_NOTE.to_string(),
                records,
            }
        })
        .collect();
    Ok(reports)
}

/// Empirical suprema `C_alpha` of a scalar symbol for `|alpha| <= max_alpha`.
pub fn multiplier_order_scan(
    symbol: &Symbol,
    s: f64,
    sample: &SectorSample,
    max_alpha: u32,
) -> Result<MultiplierReport> {
    let sym = symbol.clone();
    let f = move |xi: &[f64], l: Complex64| Ok(vec![sym.eval(xi, l)]);
    let mut reports = scan_components(
        &[symbol.id().to_string()],
        &f,
        s,
        sample,
        max_alpha,
        DEFAULT_CEILING,
    )?;
    Ok(reports.remove(0))
}

/// The positive multiplier examples with their orders.
pub fn example_symbols() -> Vec<(Symbol, f64)> {
    vec![
        (Symbol::lambda(), 2.0),
        (Symbol::xi_power(1), 2.0),
        (Symbol::xi_power(2), 4.0),
        (Symbol::sqrt_lambda_plus_xi(1), 1.0),
        (Symbol::sqrt_lambda_plus_xi(-1), -1.0),
        (Symbol::xi_over_bracket(), 0.0),
        (Symbol::constant(1.0), 2.0),
    ]
}

/// Scan every positive example. The constant symbol is only a multiplier on a
/// shifted sector, so it is scanned with `lambda0 >= 1`.
pub fn example_suite(sample: &SectorSample, max_alpha: u32) -> Result<Vec<MultiplierReport>> {
    example_symbols()
        .into_iter()
        .map(|(sym, s)| {
            if sym.id() == "1" && sample.lambda0 < 1.0 {
                let mut shifted = sample.clone();
                shifted.lambda0 = 1.0;
                multiplier_order_scan(&sym, s, &shifted, max_alpha)
            } else {
                multiplier_order_scan(&sym, s, sample, max_alpha)
            }
        })
        .collect()
}

/// Scan all nine entries of `M^(j)` as order-0 multipliers.
pub fn lemma24_matrix_scan(
    j: i64,
    sample: &SectorSample,
    max_alpha: u32,
) -> Result<Vec<MultiplierReport>> {
    if !(0..=2).contains(&j) {
        return Err(Error::InvalidIndex(j));
    }
    let theta0 = symbol::roots().theta0;
    if !(sample.lambda0 > 0.0 && sample.theta < theta0) {
        return Err(Error::InvalidInput(format!(
            "scaled resolvent scan needs lambda0 > 0 and theta < {theta0}"
        )));
    }
    let ids: Vec<String> = (1..=3)
        .flat_map(|k| (1..=3).map(move |l| format!("M{j}_{k}{l}")))
        .collect();
    let f = move |xi: &[f64], lambda: Complex64| {
        let m = symbol::scaled_resolvent_symbol(j, xi, lambda)?;
        Ok((1..=3)
            .flat_map(|k| (1..=3).map(move |l| (k, l)))
            .map(|(k, l)| m.entry(k, l))
            .collect())
    };
    scan_components(&ids, &f, 0.0, sample, max_alpha, DEFAULT_CEILING)
}

/// `|lambda (1 + |xi|^2) |xi|^2 / prod_j (lambda + gamma_j |xi|^2)|` at
/// `lambda = k^{-2}`, `|xi| = k^{-1}`. Equals `(k^2 + 1) / 5`.
pub fn nonsectoriality_witness(k: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!("witness needs k > 0, got {k}")));
    }
    let s = 1.0 / (k * k);
    let lambda = Complex64::new(s, 0.0);
    let num = lambda * (1.0 + s) * s;
    Ok((num / symbol::determinant_sq(s, lambda)).norm())
}

/// `sup_xi |m(xi, lambda)|` over a finite frequency set: the operator norm of
/// the mode multiplier on `L^2` of the discrete torus.
pub fn operator_norm_probe(
    symbol: &Symbol,
    lambda: Complex64,
    xi_grid: &[Vec<f64>],
) -> Result<f64> {
    if xi_grid.is_empty() {
        return Err(Error::InvalidInput("empty frequency grid".into()));
    }
    let mut sup: f64 = 0.0;
    for xi in xi_grid {
        let v = symbol.eval(xi, lambda).norm();
        if !v.is_finite() {
            return Err(Error::Evaluation {
                symbol: symbol.id().to_string(),
                xi: xi.clone(),
                lambda,
            });
        }
        sup = sup.max(v);
    }
    Ok(sup)
}
