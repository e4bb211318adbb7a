//! Periodic-torus realization of the whole-space semigroup and resolvent.
//!
//! Fields are stored row-major (last axis fastest). Transforms use the unitary
//! DFT normalization, so the discrete `l^2` norm is preserved:
//! `sum_x |f(x)|^2 = sum_k |f^(k)|^2`. Mode `k` along an axis of `M` points and
//! period `L` has frequency `2 pi k / L` with `k` in fftfreq order
//! `0, 1, .., M/2 - 1, -M/2, .., -1`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::{self, SymbolMatrix};

/// Relative imaginary residue above which an evolved real field is rejected.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    /// Points per axis; each a power of two, at least 4.
    pub points: Vec<usize>,
    /// Period per axis.
    pub periods: Vec<f64>,
}

impl TorusGrid {
    pub fn new(points: Vec<usize>, periods: Vec<f64>) -> Result<Self> {
        let g = Self { points, periods };
        g.validate()?;
        Ok(g)
    }

    /// `dim` axes with `m` points and period `l` each.
    pub fn uniform(dim: usize, m: usize, l: f64) -> Result<Self> {
        Self::new(vec![m; dim], vec![l; dim])
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.points.len();
        if !(1..=3).contains(&dim) || self.periods.len() != dim {
            return Err(Error::InvalidInput(format!(
                "torus grid needs 1 to 3 axes with one period each, got {} and {}",
                dim,
                self.periods.len()
            )));
        }
        for &m in &self.points {
            if m < 4 || !m.is_power_of_two() {
                return Err(Error::InvalidInput(format!(
                    "points per axis must be a power of two >= 4, got {m}"
                )));
            }
        }
        for &l in &self.periods {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "period must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Signed integer mode numbers of a flat index.
    pub fn mode_of(&self, mut flat: usize) -> Vec<i64> {
        let mut mode = vec![0i64; self.dim()];
        for a in (0..self.dim()).rev() {
            let m = self.points[a];
            let k = flat % m;
            flat /= m;
            mode[a] = if k < m / 2 {
                k as i64
            } else {
                k as i64 - m as i64
            };
        }
        mode
    }

    pub fn frequency_of(&self, flat: usize) -> Vec<f64> {
        self.mode_of(flat)
            .iter()
            .zip(&self.periods)
            .map(|(&k, &l)| 2.0 * PI * k as f64 / l)
            .collect()
    }

    /// `|xi|^2` of every flat mode index.
    pub fn xi_sq_modes(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| symbol::xi_sq(&self.frequency_of(i)))
            .collect()
    }

    /// Distinct `|xi|^2` values in increasing order, and the position of each
    /// flat mode in that list.
    pub fn distinct_xi_sq(&self) -> (Vec<f64>, Vec<usize>) {
        let all = self.xi_sq_modes();
        let mut uniq = all.clone();
        uniq.sort_by(f64::total_cmp);
        uniq.dedup();
        let pos: HashMap<u64, usize> = uniq
            .iter()
            .enumerate()
            .map(|(i, s)| (s.to_bits(), i))
            .collect();
        let index = all.iter().map(|s| pos[&s.to_bits()]).collect();
        (uniq, index)
    }

    /// Physical coordinates of a flat node index.
    pub fn coordinates_of(&self, mut flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for a in (0..self.dim()).rev() {
            let m = self.points[a];
            x[a] = (flat % m) as f64 * self.periods[a] / m as f64;
            flat /= m;
        }
        x
    }
}

/// Real state `U = (u, v, theta)` on a torus grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateField {
    pub grid: TorusGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Complex state, used for Fourier coefficients and complex resolvent values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStateField {
    pub grid: TorusGrid,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub theta: Vec<Complex64>,
}

impl StateField {
    pub fn new(grid: TorusGrid, u: Vec<f64>, v: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let f = Self { grid, u, v, theta };
        f.validate()?;
        Ok(f)
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            u: vec![0.0; n],
            v: vec![0.0; n],
            theta: vec![0.0; n],
        }
    }

    /// Fill each component from a function of the node coordinates.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..out.grid.len() {
            let [a, b, c] = f(&out.grid.coordinates_of(i));
            out.u[i] = a;
            out.v[i] = b;
            out.theta[i] = c;
        }
        out
    }

    /// Smooth random data: a few low Fourier modes with seeded coefficients.
    pub fn random_smooth(grid: TorusGrid, seed: u64, max_mode: i64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = grid.dim();
        let mut terms = Vec::new();
        let mut mode = vec![-max_mode; dim];
        loop {
            let coeffs: [(f64, f64); 3] =
                std::array::from_fn(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            terms.push((mode.clone(), coeffs));
            let mut a = 0;
            while a < dim {
                mode[a] += 1;
                if mode[a] <= max_mode {
                    break;
                }
                mode[a] = -max_mode;
                a += 1;
            }
            if a == dim {
                break;
            }
        }
        let periods = grid.periods.clone();
        Self::from_fn(grid, |x| {
            let mut out = [0.0; 3];
            for (mode, coeffs) in &terms {
                let phase: f64 = mode
                    .iter()
                    .zip(x)
                    .zip(&periods)
                    .map(|((&k, &xi), &l)| 2.0 * PI * k as f64 * xi / l)
                    .sum();
                for c in 0..3 {
                    out[c] += coeffs[c].0 * phase.cos() + coeffs[c].1 * phase.sin();
                }
            }
            out
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.grid.len();
        if self.u.len() != n || self.v.len() != n || self.theta.len() != n {
            return Err(Error::InvalidInput(format!(
                "field lengths ({}, {}, {}) do not match grid size {n}",
                self.u.len(),
                self.v.len(),
                self.theta.len()
            )));
        }
        for (name, c) in [("u", &self.u), ("v", &self.v), ("theta", &self.theta)] {
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(())
    }

    pub fn to_complex(&self) -> ComplexStateField {
        let c = |x: &Vec<f64>| x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        ComplexStateField {
            grid: self.grid.clone(),
            u: c(&self.u),
            v: c(&self.v),
            theta: c(&self.theta),
        }
    }

    /// Plain `l^2` norm of all three components.
    pub fn l2_norm(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.theta)
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &StateField) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.theta)
            .zip(other.u.iter().chain(&other.v).chain(&other.theta))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.theta)
            .map(|a| a.abs())
            .fold(0.0, f64::max)
    }

    /// Flat binary encoding: `TPLT`, version, dimension, points and periods
    /// per axis, then `u`, `v`, `theta`, all little endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.grid.len();
        let dim = self.grid.dim();
        let mut out = Vec::with_capacity(12 + 12 * dim + 24 * n);
        out.extend_from_slice(TPLT_MAGIC);
        out.extend_from_slice(&TPLT_VERSION.to_le_bytes());
        out.extend_from_slice(&(dim as u32).to_le_bytes());
        for &m in &self.grid.points {
            out.extend_from_slice(&(m as u32).to_le_bytes());
        }
        for &l in &self.grid.periods {
            out.extend_from_slice(&l.to_le_bytes());
        }
        for c in [&self.u, &self.v, &self.theta] {
            for x in c {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(4)? != TPLT_MAGIC {
            return Err(Error::Parse("state file: bad magic".into()));
        }
        let version = r.u32()?;
        if version != TPLT_VERSION {
            return Err(Error::Parse(format!(
                "state file: unsupported version {version}"
            )));
        }
        let dim = r.u32()? as usize;
        if !(1..=3).contains(&dim) {
            return Err(Error::Parse(format!(
                "state file: dimension {dim} out of range"
            )));
        }
        let points = (0..dim)
            .map(|_| r.u32().map(|m| m as usize))
            .collect::<Result<Vec<_>>>()?;
        let periods = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let grid = TorusGrid::new(points, periods)
            .map_err(|e| Error::Parse(format!("state file: {e}")))?;
        let n = grid.len();
        let expected = n
            .checked_mul(24)
            .ok_or_else(|| Error::Parse("state file: grid too large".into()))?;
        if r.remaining() != expected {
            return Err(Error::Parse(format!(
                "state file: expected {expected} payload bytes, found {}",
                r.remaining()
            )));
        }
        let mut read = || (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>();
        let u = read()?;
        let v = read()?;
        let theta = read()?;
        Self::new(grid, u, v, theta).map_err(|e| Error::Parse(format!("state file: {e}")))
    }
}

const TPLT_MAGIC: &[u8; 4] = b"TPLT";
const TPLT_VERSION: u32 = 1;

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Parse("state file: truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

impl ComplexStateField {
    pub fn zeros(grid: TorusGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            u: vec![ZERO; n],
            v: vec![ZERO; n],
            theta: vec![ZERO; n],
        }
    }

    fn components(&self) -> [&Vec<Complex64>; 3] {
        [&self.u, &self.v, &self.theta]
    }

    pub fn l2_norm(&self) -> f64 {
        self.components()
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `max |Im| / max |Re|` over all components.
    pub fn imaginary_residue(&self) -> f64 {
        let mut re: f64 = 0.0;
        let mut im: f64 = 0.0;
        for z in self.components().iter().flat_map(|c| c.iter()) {
            re = re.max(z.re.abs());
            im = im.max(z.im.abs());
        }
        if im == 0.0 {
            0.0
        } else {
            im / re
        }
    }

    pub fn real_part(&self) -> StateField {
        let r = |c: &Vec<Complex64>| c.iter().map(|z| z.re).collect();
        StateField {
            grid: self.grid.clone(),
            u: r(&self.u),
            v: r(&self.v),
            theta: r(&self.theta),
        }
    }

    /// Real part after checking the imaginary residue.
    pub fn into_real(self) -> Result<StateField> {
        let res = self.imaginary_residue();
        if res > IMAGINARY_RESIDUE_LIMIT {
            return Err(Error::ImaginaryResidue(res));
        }
        Ok(self.real_part())
    }

    pub fn scale(&mut self, a: Complex64) {
        for c in [&mut self.u, &mut self.v, &mut self.theta] {
            c.iter_mut().for_each(|z| *z *= a);
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: Complex64, other: &ComplexStateField) -> ComplexStateField {
        let f = |x: &Vec<Complex64>, y: &Vec<Complex64>| {
            x.iter().zip(y).map(|(p, q)| p + a * q).collect()
        };
        ComplexStateField {
            grid: self.grid.clone(),
            u: f(&self.u, &other.u),
            v: f(&self.v, &other.v),
            theta: f(&self.theta, &other.theta),
        }
    }

    pub fn max_abs_diff(&self, other: &ComplexStateField) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.components()
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// In-place unitary N-D DFT of a row-major array.
pub fn fft_nd(data: &mut [Complex64], points: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let n: usize = points.iter().product();
    assert_eq!(data.len(), n, "array length must match the grid");
    let mut stride = n;
    for &m in points {
        stride /= m;
        let fft = if inverse {
            planner.plan_fft_inverse(m)
        } else {
            planner.plan_fft_forward(m)
        };
        let norm = 1.0 / (m as f64).sqrt();
        let mut line = vec![ZERO; m];
        let block = m * stride;
        for start in (0..n).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, z) in line.iter_mut().enumerate() {
                    *z = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, z) in line.iter().enumerate() {
                    data[base + k * stride] = z * norm;
                }
            }
        }
    }
}

fn transform(field: &ComplexStateField, inverse: bool) -> ComplexStateField {
    let mut out = field.clone();
    for c in [&mut out.u, &mut out.v, &mut out.theta] {
        fft_nd(c, &field.grid.points, inverse);
    }
    out
}

/// Unitary Fourier coefficients of a field.
pub fn forward(field: &ComplexStateField) -> ComplexStateField {
    transform(field, false)
}

pub fn inverse(field: &ComplexStateField) -> ComplexStateField {
    transform(field, true)
}

/// Multiply each modal triple by a matrix depending on the mode's `|xi|^2`.
/// The matrix is computed once per distinct `|xi|^2`.
fn apply_per_mode(
    hat: &ComplexStateField,
    mut matrix: impl FnMut(f64, usize) -> Result<SymbolMatrix>,
) -> Result<ComplexStateField> {
    let (uniq, index) = hat.grid.distinct_xi_sq();
    let mut first_mode = vec![usize::MAX; uniq.len()];
    for (i, &k) in index.iter().enumerate() {
        if first_mode[k] == usize::MAX {
            first_mode[k] = i;
        }
    }
    let mats = uniq
        .iter()
        .zip(&first_mode)
        .map(|(&s, &i)| matrix(s, i))
        .collect::<Result<Vec<_>>>()?;
    let mut out = ComplexStateField::zeros(hat.grid.clone());
    for (i, &k) in index.iter().enumerate() {
        let y = mats[k].apply([hat.u[i], hat.v[i], hat.theta[i]]);
        out.u[i] = y[0];
        out.v[i] = y[1];
        out.theta[i] = y[2];
    }
    Ok(out)
}

/// `exp(tau A_1)` for `A_1 = A(xi)` at `|xi| = 1`.
fn unit_exponential(tau: f64) -> Matrix3<Complex64> {
    let a1 = symbol::symbol_matrix_sq(1.0).0;
    if tau <= 0.5 {
        // Taylor series; 30 terms reach machine precision for tau ||A_1|| <= 1.
        let mut term = Matrix3::<Complex64>::identity();
        let mut sum = term;
        for n in 1..30 {
            term = term * a1 * Complex64::new(tau / n as f64, 0.0);
            sum += term;
        }
        return sum;
    }
    let (v, v_inv) = unit_eigenvectors();
    let d = Matrix3::from_diagonal(&Vector3::from_iterator(
        symbol::roots().gammas().iter().map(|g| (-g * tau).exp()),
    ));
    v * d * v_inv
}

/// Eigenvectors `(1, mu, mu^2 + 1)` of `A_1` for `mu = -gamma_j`, and the inverse.
fn unit_eigenvectors() -> (Matrix3<Complex64>, Matrix3<Complex64>) {
    use std::sync::OnceLock;
    static V: OnceLock<(Matrix3<Complex64>, Matrix3<Complex64>)> = OnceLock::new();
    *V.get_or_init(|| {
        let g = symbol::roots().gammas();
        let v = Matrix3::from_fn(|r, c| {
            let mu = -g[c];
            match r {
                0 => Complex64::new(1.0, 0.0),
                1 => mu,
                _ => mu * mu + 1.0,
            }
        });
        let inv = v
            .try_inverse()
            .expect("distinct eigenvalues give an invertible basis");
        (v, inv)
    })
}

/// `exp(t A(xi))` from the squared frequency. Uses `A(xi) = s T A_1 T^{-1}`
/// with `T = diag(1, s, s)`; at `s = 0` the exact nilpotent formula `I + t A(0)`.
pub fn mode_exponential_sq(s: f64, t: f64) -> Result<SymbolMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "evolution time must be finite and nonnegative, got {t}"
        )));
    }
    if s == 0.0 {
        return Ok(SymbolMatrix::from_real([
            [1.0, t, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]));
    }
    let e = unit_exponential(s * t);
    let scale = [1.0, s, s];
    Ok(SymbolMatrix(Matrix3::from_fn(|k, l| {
        let z = e[(k, l)] * (scale[k] / scale[l]);
        // The exact exponential of a real matrix is real.
        Complex64::new(z.re, 0.0)
    })))
}

pub fn mode_exponential(xi: &[f64], t: f64) -> Result<SymbolMatrix> {
    mode_exponential_sq(symbol::xi_sq(xi), t)
}

/// `exp(t A(D)) U0`, exact per Fourier mode.
pub fn evolve(state: &StateField, t: f64) -> Result<StateField> {
    state.validate()?;
    evolve_complex(&state.to_complex(), t)?.into_real()
}

pub fn evolve_complex(state: &ComplexStateField, t: f64) -> Result<ComplexStateField> {
    let hat = forward(state);
    let out = apply_per_mode(&hat, |s, _| mode_exponential_sq(s, t))?;
    Ok(inverse(&out))
}

/// Solve `(lambda - A(D)) U = F` mode by mode.
pub fn apply_resolvent(f: &ComplexStateField, lambda: Complex64) -> Result<ComplexStateField> {
    let hat = forward(f);
    let grid = f.grid.clone();
    let out = apply_per_mode(&hat, |s, i| {
        symbol::resolvent_matrix_sq(s, lambda).map_err(|_| Error::SingularMode {
            mode: grid.mode_of(i),
            lambda,
        })
    })?;
    Ok(inverse(&out))
}

/// `A(D) U`, applied spectrally.
pub fn apply_generator(state: &ComplexStateField) -> Result<ComplexStateField> {
    let hat = forward(state);
    let out = apply_per_mode(&hat, |s, _| Ok(symbol::symbol_matrix_sq(s)))?;
    Ok(inverse(&out))
}

/// Fourier-weighted norm in `H^{2+j} x H^j x H^j`.
pub fn e_norm(state: &StateField, j: i64) -> Result<f64> {
    e_norm_complex(&state.to_complex(), j)
}

pub fn e_norm_complex(state: &ComplexStateField, j: i64) -> Result<f64> {
    if !(0..=2).contains(&j) {
        return Err(Error::InvalidIndex(j));
    }
    let hat = forward(state);
    let s = state.grid.xi_sq_modes();
    let j = j as f64;
    let total: f64 = (0..s.len())
        .map(|i| {
            let w = 1.0 + s[i];
            w.powf(2.0 + j) * hat.u[i].norm_sqr()
                + w.powf(j) * (hat.v[i].norm_sqr() + hat.theta[i].norm_sqr())
        })
        .sum();
    Ok(total.sqrt())
}

/// `(t, e_norm(U(t), j))` along the exact evolution.
pub fn norm_history(state: &StateField, times: &[f64], j: i64) -> Result<Vec<(f64, f64)>> {
    times
        .iter()
        .map(|&t| Ok((t, e_norm(&evolve(state, t)?, j)?)))
        .collect()
}

/// Coordinates of a modal triple in the eigenbasis of `A(xi)`; entry `j`
/// evolves as `exp(-gamma_j s t)`.
pub fn modal_coordinates(s: f64, triple: [Complex64; 3]) -> [Complex64; 3] {
    let (_, v_inv) = unit_eigenvectors();
    // A(xi) = s T A_1 T^{-1}, so the eigenbasis is T V and its inverse V^{-1} T^{-1}.
    let y = Vector3::new(triple[0], triple[1] / s, triple[2] / s);
    let c = v_inv * y;
    [c[0], c[1], c[2]]
}

/// Sweep row: `B(lambda) = sup_modes ||M^(j)(xi, lambda)||_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub modulus: f64,
    pub lambda: Complex64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub j: i64,
    pub lambda0: f64,
    pub theta: f64,
    pub rows: Vec<SweepRow>,
    pub max_bound: f64,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,modulus,lambda_re,lambda_im,bound\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.fraction, r.modulus, r.lambda.re, r.lambda.im, r.bound
            ));
        }
        out
    }
}

/// `sup` over the distinct grid frequencies of the spectral norm of `M^(j)`.
pub fn resolvent_bound(j: i64, lambda: Complex64, grid: &TorusGrid) -> Result<f64> {
    let (uniq, _) = grid.distinct_xi_sq();
    let mut sup: f64 = 0.0;
    for s in uniq {
        let m = symbol::scaled_resolvent_symbol_sq(j, s, lambda)?;
        sup = sup.max(m.spectral_norm());
    }
    Ok(sup)
}

/// Resolvent bounds on the rays `lambda0 + r e^{i f theta}`.
pub fn resolvent_bound_sweep(
    j: i64,
    lambda0: f64,
    theta: f64,
    ray_fractions: &[f64],
    lambda_moduli: &[f64],
    grid: &TorusGrid,
) -> Result<SweepTable> {
    if !(0..=2).contains(&j) {
        return Err(Error::InvalidIndex(j));
    }
    let theta0 = symbol::roots().theta0;
    if !(theta > 0.0 && theta < theta0) {
        return Err(Error::InvalidInput(format!(
            "sweep angle must lie in (0, {theta0}), got {theta}"
        )));
    }
    let mut rows = Vec::with_capacity(ray_fractions.len() * lambda_moduli.len());
    for &f in ray_fractions {
        for &r in lambda_moduli {
            let lambda = lambda0 + Complex64::from_polar(r, f * theta);
            rows.push(SweepRow {
                fraction: f,
                modulus: r,
                lambda,
                bound: resolvent_bound(j, lambda, grid)?,
            });
        }
    }
    let max_bound = rows.iter().map(|r| r.bound).fold(0.0, f64::max);
    Ok(SweepTable {
        j,
        lambda0,
        theta,
        rows,
        max_bound,
    })
}

/// Torus whose first mode has `|xi| = 1/k`, so `lambda = k^{-2}` meets the
/// non-sectoriality witness on the grid.
pub fn witness_grid(k: f64, points: usize) -> Result<TorusGrid> {
    TorusGrid::uniform(1, points, 2.0 * PI * k)
}

/// CSV with a `t` column and one value column.
pub fn history_csv(header: &str, rows: &[(f64, f64)]) -> String {
    let mut out = format!("t,{header}\n");
    for (t, y) in rows {
        out.push_str(&format!("{t},{y}\n"));
    }
    out
}
