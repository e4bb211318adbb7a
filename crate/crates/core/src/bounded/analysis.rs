//! Spectra, spectral projection onto the zero eigenvalue, evolution and
//! decay measurements for dense bounded-domain generators.
//!
//! Everything is derived from one real Schur form `A = Z T Z^T`, reordered so
//! that the eigenvalues with `|lambda| <= zero_tol` lead. With `X` solving
//! `T11 X - X T22 = -T12` the block similarity `S = [[I, X], [0, I]]`
//! decouples the two parts, which gives the projection and the propagator.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dense::{self, ComplexLu, RealSchur};
use super::{assemble_generator, BCVariant, DiscreteGenerator, DomainSpec};
use crate::error::{Error, Result};

/// `zero_tol = ZERO_TOL_FACTOR * max |lambda|`.
pub const ZERO_TOL_FACTOR: f64 = 1e-6;
pub const MAX_DENSE_SIZE: usize = 20000;
/// Largest accepted condition number of the spectral projection.
pub const MAX_PROJECTION_CONDITION: f64 = 1e10;
/// Eigenvalues tracked by the convergence study.
pub const TRACKED_EIGENVALUES: usize = 5;

fn descending(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

/// Default tolerance separating the zero cluster from the rest.
pub fn default_zero_tol(eigenvalues: &[Complex64]) -> f64 {
    ZERO_TOL_FACTOR * eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max)
}

fn check_matrix(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidInput("generator must be square".into()));
    }
    if a.nrows() > MAX_DENSE_SIZE {
        return Err(Error::InvalidInput(format!(
            "dense eigensolve limited to size {MAX_DENSE_SIZE}, got {}",
            a.nrows()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("generator matrix"));
    }
    Ok(())
}

/// Exponential of the decoupled Schur form, prepared once per generator.
#[derive(Debug, Clone)]
pub struct Propagator {
    z: DMatrix<f64>,
    t11: DMatrix<f64>,
    x: DMatrix<f64>,
    w: DMatrix<Complex64>,
    lu: ComplexLu,
    lambdas: Vec<Complex64>,
}

/// Initial data split into the zero cluster part and eigen-coordinates of the rest.
#[derive(Debug, Clone)]
pub struct PreparedState {
    z1: DVector<f64>,
    coefficients: Vec<Complex64>,
}

impl Propagator {
    pub fn cluster_size(&self) -> usize {
        self.t11.nrows()
    }

    pub fn size(&self) -> usize {
        self.z.nrows()
    }

    pub fn prepare(&self, u0: &[f64], project_off_kernel: bool) -> Result<PreparedState> {
        let n = self.size();
        if u0.len() != n {
            return Err(Error::InvalidInput(format!(
                "initial state has length {}, generator size {n}",
                u0.len()
            )));
        }
        if u0.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("initial state"));
        }
        let m = self.cluster_size();
        let y = self.z.tr_mul(&DVector::from_column_slice(u0));
        let y1 = y.rows(0, m).into_owned();
        let y2 = y.rows(m, n - m).into_owned();
        let z1 = if project_off_kernel {
            DVector::zeros(m)
        } else {
            y1 - &self.x * &y2
        };
        let z2: Vec<Complex64> = y2.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let coefficients = self.lu.solve(&z2)?;
        Ok(PreparedState { z1, coefficients })
    }

    pub fn state_at(&self, prepared: &PreparedState, t: f64) -> Result<DVector<f64>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput(format!(
                "time must be finite and >= 0, got {t}"
            )));
        }
        let n = self.size();
        let m = self.cluster_size();
        let w1 = if m > 0 {
            (&self.t11 * t).exp() * &prepared.z1
        } else {
            DVector::zeros(0)
        };
        let scaled: DVector<Complex64> = DVector::from_iterator(
            n - m,
            prepared
                .coefficients
                .iter()
                .zip(&self.lambdas)
                .map(|(c, l)| c * (l * t).exp()),
        );
        let w2 = (&self.w * scaled).map(|c| c.re);
        let mut y = DVector::zeros(n);
        y.rows_mut(0, m).copy_from(&(w1 + &self.x * &w2));
        y.rows_mut(m, n - m).copy_from(&w2);
        let out = &self.z * y;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("evolved state"));
        }
        Ok(out)
    }

    pub fn evolve(&self, u0: &[f64], t: f64, project_off_kernel: bool) -> Result<DVector<f64>> {
        let prepared = self.prepare(u0, project_off_kernel)?;
        self.state_at(&prepared, t)
    }
}

/// Schur-based analysis of one generator matrix.
#[derive(Debug, Clone)]
pub struct BoundedAnalysis {
    /// Sorted by real part, then imaginary part, both descending.
    pub eigenvalues: Vec<Complex64>,
    pub zero_tol: f64,
    /// Singular values in the state inner product, decreasing.
    pub singular_values: Vec<f64>,
    /// Singular values in the Euclidean inner product of the unknowns, decreasing.
    pub euclidean_singular_values: Vec<f64>,
    /// Orthonormal columns spanning the singular vectors with `sigma <= zero_tol`.
    pub kernel_basis: DMatrix<f64>,
    pub generalized_kernel_dimension: usize,
    /// Condition number of the projection (reciprocal of the LAPACK estimate).
    pub projection_condition: f64,
    schur: RealSchur,
    x: DMatrix<f64>,
}

impl BoundedAnalysis {
    /// Analysis with singular values taken in the Euclidean inner product.
    pub fn new(a: &DMatrix<f64>, zero_tol: Option<f64>) -> Result<Self> {
        Self::with_gram(a, zero_tol, None)
    }

    /// Singular values are measured in the inner product with Gram matrix
    /// `gram` when given. In the plain Euclidean product of nodal values the
    /// row `u' = v` is cheap, so boundary layers in `v` produce a spurious
    /// small singular value that shrinks under refinement; the state norm
    /// measures `u` through the bending energy and removes it.
    pub fn with_gram(
        a: &DMatrix<f64>,
        zero_tol: Option<f64>,
        gram: Option<&DMatrix<f64>>,
    ) -> Result<Self> {
        check_matrix(a)?;
        let n = a.nrows();
        let mut schur = RealSchur::new(a)?;
        let raw = schur.eigenvalues();
        let zero_tol = match zero_tol {
            Some(z) if z >= 0.0 && z.is_finite() => z,
            Some(z) => return Err(Error::InvalidInput(format!("zero_tol = {z}"))),
            None => default_zero_tol(&raw),
        };
        let select: Vec<bool> = raw.iter().map(|l| l.norm() <= zero_tol).collect();
        let count = select.iter().filter(|&&b| b).count();
        let (m, s) = if count == 0 || count == n {
            (count, 1.0)
        } else {
            schur.reorder(&select)?
        };
        let x = if m > 0 && m < n {
            let t11 = schur.t.view((0, 0), (m, m)).into_owned();
            let t12 = schur.t.view((0, m), (m, n - m)).into_owned();
            let t22 = schur.t.view((m, m), (n - m, n - m)).into_owned();
            dense::sylvester(&t11, &t22, &(-t12))?
        } else {
            DMatrix::zeros(m, n - m)
        };
        let euclidean_singular_values = dense::singular_values(a)?;
        let (singular_values, kernel_basis) = match gram {
            None => {
                let (sv, vt) = dense::singular_decomposition(a)?;
                let k = sv.iter().filter(|&&s| s <= zero_tol).count();
                (sv, vt.rows(n - k, k).transpose())
            }
            Some(g) => {
                if g.shape() != a.shape() {
                    return Err(Error::InvalidInput(
                        "Gram matrix shape differs from generator".into(),
                    ));
                }
                // |U|_G = |L^T U|, so the operator in y = L^T U is L^T A L^{-T}.
                let chol = g.clone().cholesky().ok_or_else(|| {
                    Error::InvalidInput("Gram matrix is not positive definite".into())
                })?;
                let lt = chol.l().transpose();
                let lt_inv = lt
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidInput("singular Gram factor".into()))?;
                let weighted = &lt * a * &lt_inv;
                let (sv, vt) = dense::singular_decomposition(&weighted)?;
                let k = sv.iter().filter(|&&s| s <= zero_tol).count();
                let raw = &lt_inv * vt.rows(n - k, k).transpose();
                let basis = if k == 0 { raw } else { raw.qr().q() };
                (sv, basis)
            }
        };
        let mut eigenvalues = raw;
        eigenvalues.sort_by(descending);
        Ok(Self {
            eigenvalues,
            zero_tol,
            singular_values,
            euclidean_singular_values,
            kernel_basis,
            generalized_kernel_dimension: m,
            projection_condition: if s > 0.0 { 1.0 / s } else { f64::INFINITY },
            schur,
            x,
        })
    }

    /// Analysis in the state inner product of `gen`.
    pub fn for_generator(gen: &DiscreteGenerator) -> Result<Self> {
        Self::for_generator_with_tol(gen, None)
    }

    pub fn for_generator_with_tol(gen: &DiscreteGenerator, zero_tol: Option<f64>) -> Result<Self> {
        Self::with_gram(&gen.matrix, zero_tol, Some(&gen.energy.state_gram()))
    }

    pub fn size(&self) -> usize {
        self.schur.dim()
    }

    pub fn kernel_dimension(&self) -> usize {
        self.kernel_basis.ncols()
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.first().map_or(f64::NEG_INFINITY, |l| l.re)
    }

    /// `-max Re lambda` over eigenvalues outside the zero cluster.
    pub fn decay_margin(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .find(|l| l.norm() > self.zero_tol)
            .map(|l| -l.re)
    }

    /// Eigenvalues with `|Re lambda| <= zero_tol`.
    pub fn near_imaginary_axis(&self) -> usize {
        self.eigenvalues
            .iter()
            .filter(|l| l.re.abs() <= self.zero_tol)
            .count()
    }

    /// Spectral projection onto the invariant subspace of the zero cluster.
    pub fn projection(&self) -> DMatrix<f64> {
        let n = self.size();
        let m = self.generalized_kernel_dimension;
        let mut core = DMatrix::<f64>::zeros(n, n);
        for i in 0..m {
            core[(i, i)] = 1.0;
        }
        core.view_mut((0, m), (m, n - m)).copy_from(&(-&self.x));
        let z = &self.schur.z;
        z * core * z.transpose()
    }

    pub fn propagator(&self) -> Result<Propagator> {
        let max_re = self.max_real_part();
        if max_re > 10.0 * self.zero_tol {
            return Err(Error::Unstable(max_re));
        }
        self.check_projection()?;
        let n = self.size();
        let m = self.generalized_kernel_dimension;
        let t22 = self.schur.t.view((m, m), (n - m, n - m)).into_owned();
        let w = dense::quasi_triangular_eigenvectors(&t22)?;
        let lu = ComplexLu::new(&w)?;
        Ok(Propagator {
            z: self.schur.z.clone(),
            t11: self.schur.t.view((0, 0), (m, m)).into_owned(),
            x: self.x.clone(),
            lambdas: dense::quasi_triangular_eigenvalues(&t22),
            w,
            lu,
        })
    }

    fn check_projection(&self) -> Result<()> {
        if self.projection_condition > MAX_PROJECTION_CONDITION {
            Err(Error::IllConditioned(self.projection_condition))
        } else {
            Ok(())
        }
    }

    pub fn spectrum_report(&self, gen: Option<&DiscreteGenerator>) -> SpectrumReport {
        SpectrumReport {
            description: gen.map(|g| g.description()).unwrap_or_default(),
            grid: gen.map(|g| g.grid.clone()).unwrap_or_default(),
            size: self.size(),
            zero_tol: self.zero_tol,
            max_real_part: self.max_real_part(),
            kernel_dimension: self.kernel_dimension(),
            euclidean_kernel_dimension: self
                .euclidean_singular_values
                .iter()
                .filter(|&&s| s <= self.zero_tol)
                .count(),
            generalized_kernel_dimension: self.generalized_kernel_dimension,
            decay_margin: self.decay_margin(),
            near_imaginary_axis: self.near_imaginary_axis(),
            smallest_singular_values: self.singular_values.iter().rev().take(8).copied().collect(),
            eigenvalues: self.eigenvalues.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub description: String,
    pub grid: Vec<usize>,
    pub size: usize,
    pub zero_tol: f64,
    pub max_real_part: f64,
    /// Singular values at or below `zero_tol`, state inner product.
    pub kernel_dimension: usize,
    /// Eigenvalues with `|lambda| <= zero_tol`, counted with multiplicity.
    pub generalized_kernel_dimension: usize,
    /// `-max Re lambda` over `|lambda| > zero_tol`.
    pub decay_margin: Option<f64>,
    pub near_imaginary_axis: usize,
    /// Singular values at or below `zero_tol` in the Euclidean product of
    /// nodal values; see [`BoundedAnalysis::with_gram`].
    pub euclidean_kernel_dimension: usize,
    /// State inner product, increasing.
    pub smallest_singular_values: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
}

impl SpectrumReport {
    /// Spectral enclosure `max Re lambda <= zero_tol`.
    pub fn enclosure_holds(&self) -> bool {
        self.max_real_part <= self.zero_tol
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for l in &self.eigenvalues {
            out.push_str(&format!("{},{}\n", l.re, l.im));
        }
        out
    }
}

pub fn spectrum(gen: &DiscreteGenerator) -> Result<SpectrumReport> {
    Ok(BoundedAnalysis::for_generator(gen)?.spectrum_report(Some(gen)))
}

#[derive(Debug, Clone)]
pub struct KernelProjection {
    pub basis: DMatrix<f64>,
    pub generalized_dimension: usize,
    pub projection: DMatrix<f64>,
    pub condition: f64,
}

impl KernelProjection {
    /// `max |P^2 - P|`.
    pub fn idempotence_residual(&self) -> f64 {
        (&self.projection * &self.projection - &self.projection).amax()
    }

    /// `max |A P - P A| / max |A|`.
    pub fn commutation_residual(&self, a: &DMatrix<f64>) -> f64 {
        let d = a * &self.projection - &self.projection * a;
        d.amax() / a.amax().max(f64::MIN_POSITIVE)
    }
}

pub fn kernel_and_projection(
    gen: &DiscreteGenerator,
    zero_tol: Option<f64>,
) -> Result<KernelProjection> {
    let analysis = BoundedAnalysis::for_generator_with_tol(gen, zero_tol)?;
    analysis.check_projection()?;
    Ok(KernelProjection {
        basis: analysis.kernel_basis.clone(),
        generalized_dimension: analysis.generalized_kernel_dimension,
        projection: analysis.projection(),
        condition: analysis.projection_condition,
    })
}

/// `exp(t A) U0`, optionally with `U0` replaced by `(I - P) U0`.
pub fn evolve_bounded(
    gen: &DiscreteGenerator,
    u0: &[f64],
    t: f64,
    project_off_kernel: bool,
) -> Result<DVector<f64>> {
    BoundedAnalysis::for_generator(gen)?
        .propagator()?
        .evolve(u0, t, project_off_kernel)
}

/// Smooth random initial data: a few low cosine modes per component with
/// decaying random amplitudes.
pub fn random_initial_state(gen: &DiscreteGenerator, seed: u64) -> DVector<f64> {
    const MODES: usize = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..3 * MODES * MODES)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let (origin, lengths) = match gen.domain {
        DomainSpec::Interval { a, b } => ([a, 0.0], [b - a, 1.0]),
        DomainSpec::Rectangle { a, b, c, d } => ([a, c], [b - a, d - c]),
    };
    let dim = gen.domain.dim();
    gen.sample(|x| {
        let mut out = [0.0; 3];
        for (comp, slot) in out.iter_mut().enumerate() {
            for p in 0..MODES {
                for q in 0..if dim == 1 { 1 } else { MODES } {
                    let c = coeffs[(comp * MODES + p) * MODES + q];
                    let cx =
                        (p as f64 * std::f64::consts::PI * (x[0] - origin[0]) / lengths[0]).cos();
                    let cy = if dim == 1 {
                        1.0
                    } else {
                        (q as f64 * std::f64::consts::PI * (x[1] - origin[1]) / lengths[1]).cos()
                    };
                    *slot += c * cx * cy / (1.0 + (p + q) as f64).powi(2);
                }
            }
        }
        out
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayResult {
    pub eps_fit: f64,
    pub eps_spec: Option<f64>,
    /// `|eps_fit - eps_spec| / eps_spec`.
    pub relative_error: Option<f64>,
    pub horizon: f64,
    pub projected: bool,
    /// False when the fitted rate is negligible against the spectral margin,
    /// e.g. for data in the kernel.
    pub decaying: bool,
    pub intercept: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
}

impl DecayResult {
    /// Agreement with the spectral prediction within `tol` relative.
    pub fn matches(&self, tol: f64) -> bool {
        self.relative_error.is_some_and(|e| e <= tol)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,norm,log_norm\n");
        for (t, n) in self.times.iter().zip(&self.norms) {
            out.push_str(&format!("{t},{n},{}\n", n.ln()));
        }
        out
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit("need at least two samples".into()));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("sample times coincide".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Fit `||U(t)|| ~ C exp(-eps t)` on `[horizon / 2, horizon]` for given data.
pub fn decay_fit(
    gen: &DiscreteGenerator,
    analysis: &BoundedAnalysis,
    u0: &[f64],
    samples: usize,
    horizon: Option<f64>,
    project_off_kernel: bool,
) -> Result<DecayResult> {
    if samples < 2 {
        return Err(Error::InvalidInput(
            "decay fit needs at least two samples".into(),
        ));
    }
    let eps_spec = analysis.decay_margin();
    let horizon = match (horizon, eps_spec) {
        (Some(h), _) if h > 0.0 && h.is_finite() => h,
        (Some(h), _) => return Err(Error::InvalidInput(format!("horizon = {h}"))),
        (None, Some(e)) if e > 0.0 => 20.0 / e,
        (None, _) => {
            return Err(Error::Fit(
                "no positive spectral margin; pass an explicit horizon".into(),
            ))
        }
    };
    let propagator = analysis.propagator()?;
    let prepared = propagator.prepare(u0, project_off_kernel)?;
    let times: Vec<f64> = (0..samples)
        .map(|k| horizon * (0.5 + 0.5 * k as f64 / (samples - 1) as f64))
        .collect();
    let mut norms = Vec::with_capacity(samples);
    for &t in &times {
        let state = propagator.state_at(&prepared, t)?;
        let norm = gen.state_norm(state.as_slice());
        if !(norm > 1e-280) || !norm.is_finite() {
            return Err(Error::Fit(format!(
                "norm underflow at t = {t}; shorten the horizon"
            )));
        }
        norms.push(norm);
    }
    let logs: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let (slope, intercept) = linear_fit(&times, &logs)?;
    let eps_fit = -slope;
    let relative_error = eps_spec
        .filter(|&e| e > 0.0)
        .map(|e| (eps_fit - e).abs() / e);
    let decaying = eps_spec.is_some_and(|e| eps_fit > 1e-2 * e);
    Ok(DecayResult {
        eps_fit,
        eps_spec,
        relative_error,
        horizon,
        projected: project_off_kernel,
        decaying,
        intercept,
        times,
        norms,
    })
}

/// Decay of smooth random data seeded by `seed`.
pub fn decay_rate_experiment(
    gen: &DiscreteGenerator,
    samples: usize,
    horizon: Option<f64>,
    seed: u64,
    project_off_kernel: bool,
) -> Result<DecayResult> {
    let analysis = BoundedAnalysis::for_generator(gen)?;
    let u0 = random_initial_state(gen, seed);
    decay_fit(
        gen,
        &analysis,
        u0.as_slice(),
        samples,
        horizon,
        project_off_kernel,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub rank: usize,
    /// One per grid.
    pub eigenvalues: Vec<Complex64>,
    /// `|lambda_k - lambda_{k+1}|` between consecutive grids.
    pub differences: Vec<f64>,
    /// Order from each consecutive triple of doubling grids.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub domain: DomainSpec,
    pub bc: BCVariant,
    pub grids: Vec<Vec<usize>>,
    pub rows: Vec<ConvergenceRow>,
    /// Median of all finite orders.
    pub observed_order: Option<f64>,
}

impl ConvergenceTable {
    pub fn orders(&self) -> Vec<f64> {
        self.rows
            .iter()
            .flat_map(|r| r.orders.iter().flatten().copied())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,grid,re,im,difference,order\n");
        for row in &self.rows {
            for (k, l) in row.eigenvalues.iter().enumerate() {
                let grid: Vec<String> = self.grids[k].iter().map(|g| g.to_string()).collect();
                let diff = if k == 0 {
                    String::new()
                } else {
                    row.differences[k - 1].to_string()
                };
                let order = if k < 2 {
                    String::new()
                } else {
                    row.orders[k - 2].map_or(String::new(), |p| p.to_string())
                };
                out.push_str(&format!(
                    "{},{},{},{},{diff},{order}\n",
                    row.rank,
                    grid.join("x"),
                    l.re,
                    l.im
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Refinement factor between two grids: 1 or 2 on every axis.
fn refinement(coarse: &[usize], fine: &[usize]) -> Option<usize> {
    let r: Vec<usize> = coarse
        .iter()
        .zip(fine)
        .map(|(&c, &f)| {
            if f == c {
                1
            } else if f == 2 * c {
                2
            } else {
                0
            }
        })
        .collect();
    (r.len() == coarse.len() && r.iter().all(|&x| x == r[0] && x > 0)).then(|| r[0])
}

fn tracked_candidates(eigenvalues: &[Complex64], zero_tol: f64) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = eigenvalues
        .iter()
        .filter(|l| l.norm() > zero_tol && l.im >= 0.0)
        .copied()
        .collect();
    c.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(descending(a, b)));
    c
}

/// Track the smallest nonzero eigenvalues across nested grids and estimate
/// the order `log2(|l_c - l_m| / |l_m - l_f|)`.
pub fn convergence_study(
    domain: DomainSpec,
    bc: BCVariant,
    grids: &[Vec<usize>],
) -> Result<ConvergenceTable> {
    if grids.len() < 3 {
        return Err(Error::InvalidInput(
            "convergence study needs at least three grids".into(),
        ));
    }
    let ratios: Vec<usize> = grids
        .windows(2)
        .map(|w| {
            refinement(&w[0], &w[1]).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "grids must be nested by a factor 2 (or repeated): {:?} -> {:?}",
                    w[0], w[1]
                ))
            })
        })
        .collect::<Result<_>>()?;
    let mut spectra = Vec::with_capacity(grids.len());
    for g in grids {
        let gen = assemble_generator(domain, g, bc)?;
        let a = &gen.matrix;
        check_matrix(a)?;
        let ev = RealSchur::new(a)?.eigenvalues();
        let tol = default_zero_tol(&ev);
        spectra.push(tracked_candidates(&ev, tol));
    }
    let start: Vec<Complex64> = spectra[0]
        .iter()
        .take(TRACKED_EIGENVALUES)
        .copied()
        .collect();
    if start.len() < TRACKED_EIGENVALUES {
        return Err(Error::Matching {
            coarse: format!("{:?}", grids[0]),
            fine: String::new(),
            detail: format!(
                "only {} nonzero eigenvalues on the coarsest grid",
                start.len()
            ),
        });
    }
    let mut tracks: Vec<Vec<Complex64>> = start.iter().map(|&l| vec![l]).collect();
    for k in 1..grids.len() {
        let mut used = vec![false; spectra[k].len()];
        for track in tracks.iter_mut() {
            let prev = *track.last().expect("track is non-empty");
            let (idx, dist) = spectra[k]
                .iter()
                .enumerate()
                .map(|(i, l)| (i, (l - prev).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or_else(|| Error::Matching {
                    coarse: format!("{:?}", grids[k - 1]),
                    fine: format!("{:?}", grids[k]),
                    detail: "no candidates".into(),
                })?;
            if used[idx] || dist > 0.25 * prev.norm() {
                return Err(Error::Matching {
                    coarse: format!("{:?}", grids[k - 1]),
                    fine: format!("{:?}", grids[k]),
                    detail: format!(
                        "eigenvalue {prev} paired with {} at distance {dist:.3e}{}",
                        spectra[k][idx],
                        if used[idx] { " (already paired)" } else { "" }
                    ),
                });
            }
            used[idx] = true;
            track.push(spectra[k][idx]);
        }
    }
    let rows: Vec<ConvergenceRow> = tracks
        .into_iter()
        .enumerate()
        .map(|(rank, eigenvalues)| {
            let differences: Vec<f64> = eigenvalues
                .windows(2)
                .map(|w| (w[0] - w[1]).norm())
                .collect();
            let orders = (0..grids.len() - 2)
                .map(|k| {
                    let (d1, d2) = (differences[k], differences[k + 1]);
                    (ratios[k] == 2 && ratios[k + 1] == 2 && d1 > 0.0 && d2 > 0.0)
                        .then(|| (d1 / d2).log2())
                })
                .collect();
            ConvergenceRow {
                rank,
                eigenvalues,
                differences,
                orders,
            }
        })
        .collect();
    let mut table = ConvergenceTable {
        domain,
        bc,
        grids: grids.to_vec(),
        rows,
        observed_order: None,
    };
    table.observed_order = median(table.orders());
    Ok(table)
}
