//! Thin safe wrappers over the LAPACK routines used for dense generators.
//! All matrices are nalgebra `DMatrix` values, which are column-major like LAPACK.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn check(routine: &'static str, info: i32) -> Result<()> {
    if info == 0 {
        Ok(())
    } else {
        Err(Error::Lapack { routine, info })
    }
}

fn dim_i32(n: usize) -> i32 {
    i32::try_from(n).expect("matrix dimension fits in i32")
}

/// Real Schur form `A = Z T Z^T` with `T` upper quasi-triangular in standard
/// form (2x2 blocks have equal diagonals and off-diagonals of opposite sign).
#[derive(Debug, Clone)]
pub struct RealSchur {
    pub t: DMatrix<f64>,
    pub z: DMatrix<f64>,
}

impl RealSchur {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        assert!(a.is_square(), "Schur decomposition needs a square matrix");
        let n = a.nrows();
        let ni = dim_i32(n);
        let mut t = a.clone();
        let mut z = DMatrix::<f64>::zeros(n, n);
        let mut wr = vec![0.0; n];
        let mut wi = vec![0.0; n];
        let mut sdim = 0;
        let mut bwork = vec![0i32; n];
        let mut info = 0;
        let lwork = (3 * n).max(1) * 8;
        let mut work = vec![0.0; lwork];
        unsafe {
            lapack::dgees(
                b'V',
                b'N',
                None,
                ni,
                t.as_mut_slice(),
                ni.max(1),
                &mut sdim,
                &mut wr,
                &mut wi,
                z.as_mut_slice(),
                ni.max(1),
                &mut work,
                dim_i32(lwork),
                &mut bwork,
                &mut info,
            );
        }
        check("dgees", info)?;
        Ok(Self { t, z })
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Eigenvalues in the order of the diagonal blocks.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        quasi_triangular_eigenvalues(&self.t)
    }

    /// Move the eigenvalues flagged by `select` to the leading block. Returns
    /// the size of that block and the reciprocal condition number of the
    /// associated spectral projection.
    pub fn reorder(&mut self, select: &[bool]) -> Result<(usize, f64)> {
        let n = self.dim();
        assert_eq!(select.len(), n);
        let ni = dim_i32(n);
        let sel: Vec<i32> = select.iter().map(|&b| b as i32).collect();
        let mut wr = vec![0.0; n];
        let mut wi = vec![0.0; n];
        let mut m = 0;
        let mut s = [0.0];
        let mut sep = [0.0];
        // job = 'B' needs lwork >= 2 m (n - m) and liwork >= m (n - m).
        let lwork = (n * n / 2 + 1).max(n);
        let mut work = vec![0.0; lwork];
        let liwork = (n * n / 4 + 1).max(1);
        let mut iwork = vec![0i32; liwork];
        let mut info = 0;
        unsafe {
            lapack::dtrsen(
                b'B',
                b'V',
                &sel,
                ni,
                self.t.as_mut_slice(),
                ni.max(1),
                self.z.as_mut_slice(),
                ni.max(1),
                &mut wr,
                &mut wi,
                &mut m,
                &mut s,
                &mut sep,
                &mut work,
                dim_i32(lwork),
                &mut iwork,
                dim_i32(liwork),
                &mut info,
            );
        }
        check("dtrsen", info)?;
        Ok((m as usize, s[0]))
    }
}

/// Eigenvalues of an upper quasi-triangular matrix in standard Schur form.
pub fn quasi_triangular_eigenvalues(t: &DMatrix<f64>) -> Vec<Complex64> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let a = t[(i, i)];
            let im = (t[(i, i + 1)] * t[(i + 1, i)]).abs().sqrt();
            out.push(Complex64::new(a, im));
            out.push(Complex64::new(a, -im));
            i += 2;
        } else {
            out.push(Complex64::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// Solve `A X - X B = C` for upper quasi-triangular `A`, `B`.
pub fn sylvester(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (m, n) = (a.nrows(), b.nrows());
    assert_eq!((c.nrows(), c.ncols()), (m, n));
    if m == 0 || n == 0 {
        return Ok(c.clone());
    }
    let mut x = c.clone();
    let mut scale = [1.0];
    let mut info = 0;
    unsafe {
        lapack::dtrsyl(
            b'N',
            b'N',
            &[-1],
            dim_i32(m),
            dim_i32(n),
            a.as_slice(),
            dim_i32(m),
            b.as_slice(),
            dim_i32(n),
            x.as_mut_slice(),
            dim_i32(m),
            &mut scale,
            &mut info,
        );
    }
    // info = 1 flags close eigenvalues that were perturbed; the solution is still usable.
    if info < 0 {
        return Err(Error::Lapack {
            routine: "dtrsyl",
            info,
        });
    }
    Ok(x / scale[0])
}

/// Singular values in decreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (m, n) = (a.nrows(), a.ncols());
    let k = m.min(n);
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut work_a = a.clone();
    let mut s = vec![0.0; k];
    let mut u = [0.0];
    let mut vt = [0.0];
    let lwork = 3 * k + (m.max(n)).max(7 * k) + 16;
    let mut work = vec![0.0; lwork];
    let mut iwork = vec![0i32; 8 * k];
    let mut info = 0;
    unsafe {
        lapack::dgesdd(
            b'N',
            dim_i32(m),
            dim_i32(n),
            work_a.as_mut_slice(),
            dim_i32(m),
            &mut s,
            &mut u,
            1,
            &mut vt,
            1,
            &mut work,
            dim_i32(lwork),
            &mut iwork,
            &mut info,
        );
    }
    check("dgesdd", info)?;
    Ok(s)
}

/// Singular values in decreasing order together with `V^T`, so the rows of
/// `V^T` belonging to the trailing singular values span the numerical kernel.
pub fn singular_decomposition(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (m, n) = (a.nrows(), a.ncols());
    let k = m.min(n);
    if k == 0 {
        return Ok((Vec::new(), DMatrix::zeros(n, n)));
    }
    let mut work_a = a.clone();
    let mut s = vec![0.0; k];
    let mut u = DMatrix::<f64>::zeros(m, m);
    let mut vt = DMatrix::<f64>::zeros(n, n);
    let mut iwork = vec![0i32; 8 * k];
    let mut info = 0;
    let mut query = [0.0];
    for pass in 0..2 {
        let mut work = if pass == 0 {
            Vec::new()
        } else {
            vec![0.0; query[0] as usize + 1]
        };
        let (work_slice, lwork) = if pass == 0 {
            (&mut query[..], -1)
        } else {
            let len = work.len();
            (&mut work[..], dim_i32(len))
        };
        unsafe {
            lapack::dgesdd(
                b'A',
                dim_i32(m),
                dim_i32(n),
                work_a.as_mut_slice(),
                dim_i32(m),
                &mut s,
                u.as_mut_slice(),
                dim_i32(m),
                vt.as_mut_slice(),
                dim_i32(n),
                work_slice,
                lwork,
                &mut iwork,
                &mut info,
            );
        }
        check("dgesdd", info)?;
    }
    Ok((s, vt))
}

/// Right eigenvectors of an upper quasi-triangular matrix, as complex columns
/// in the order of [`quasi_triangular_eigenvalues`].
pub fn quasi_triangular_eigenvectors(t: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let n = t.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let ni = dim_i32(n);
    let mut select = vec![0i32; n];
    let mut vl = [0.0];
    let mut vr = DMatrix::<f64>::zeros(n, n);
    let mut m = 0;
    let mut work = vec![0.0; 3 * n];
    let mut info = 0;
    unsafe {
        lapack::dtrevc(
            b'R',
            b'A',
            &mut select,
            ni,
            t.as_slice(),
            ni,
            &mut vl,
            1,
            vr.as_mut_slice(),
            ni,
            ni,
            &mut m,
            &mut work,
            &mut info,
        );
    }
    check("dtrevc", info)?;
    let mut w = DMatrix::<Complex64>::zeros(n, n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            for r in 0..n {
                let re = vr[(r, i)];
                let im = vr[(r, i + 1)];
                w[(r, i)] = Complex64::new(re, im);
                w[(r, i + 1)] = Complex64::new(re, -im);
            }
            i += 2;
        } else {
            for r in 0..n {
                w[(r, i)] = Complex64::new(vr[(r, i)], 0.0);
            }
            i += 1;
        }
    }
    Ok(w)
}

/// LU factorization of a complex matrix, kept for repeated solves.
#[derive(Debug, Clone)]
pub struct ComplexLu {
    lu: DMatrix<Complex64>,
    ipiv: Vec<i32>,
}

impl ComplexLu {
    pub fn new(a: &DMatrix<Complex64>) -> Result<Self> {
        let n = a.nrows();
        let mut lu = a.clone();
        let mut ipiv = vec![0i32; n];
        if n == 0 {
            return Ok(Self { lu, ipiv });
        }
        let mut info = 0;
        unsafe {
            lapack::zgetrf(
                dim_i32(n),
                dim_i32(n),
                lu.as_mut_slice(),
                dim_i32(n),
                &mut ipiv,
                &mut info,
            );
        }
        check("zgetrf", info)?;
        Ok(Self { lu, ipiv })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.lu.nrows();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        if n == 0 {
            return Ok(x);
        }
        let mut info = 0;
        unsafe {
            lapack::zgetrs(
                b'N',
                dim_i32(n),
                1,
                self.lu.as_slice(),
                dim_i32(n),
                &self.ipiv,
                &mut x,
                dim_i32(n),
                &mut info,
            );
        }
        check("zgetrs", info)?;
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.2, //
                -4.0, 0.0, 1.0, 0.0, //
                0.0, -1.0, -1.0, 0.3, //
                0.1, 0.0, 0.0, -2.0,
            ],
        )
    }

    #[test]
    fn schur_reconstructs() {
        let a = sample();
        let s = RealSchur::new(&a).unwrap();
        let back = &s.z * &s.t * s.z.transpose();
        assert!((back - &a).amax() < 1e-12);
        let trace: Complex64 = s.eigenvalues().iter().sum();
        assert!((trace.re - a.trace()).abs() < 1e-12 && trace.im.abs() < 1e-12);
    }

    #[test]
    fn reorder_moves_selected_block() {
        let a = sample();
        let mut s = RealSchur::new(&a).unwrap();
        let ev = s.eigenvalues();
        let select: Vec<bool> = ev.iter().map(|l| l.re < -1.5).collect();
        let (m, cond) = s.reorder(&select).unwrap();
        assert_eq!(m, select.iter().filter(|&&b| b).count());
        assert!(cond > 0.0);
        assert!(s.eigenvalues()[..m].iter().all(|l| l.re < -1.5));
        let back = &s.z * &s.t * s.z.transpose();
        assert!((back - &a).amax() < 1e-12);
    }

    #[test]
    fn sylvester_solves() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        let b = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let c = DMatrix::from_row_slice(2, 1, &[1.0, 4.0]);
        let x = sylvester(&a, &b, &c).unwrap();
        assert!((&a * &x - &x * &b - &c).amax() < 1e-14);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -5.0, 0.0]));
        assert_eq!(singular_values(&a).unwrap(), vec![5.0, 3.0, 0.0]);
    }

    #[test]
    fn singular_vectors_span_kernel() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        let (s, vt) = singular_decomposition(&a).unwrap();
        assert!(s[2] < 1e-14);
        let v = vt.row(2).transpose();
        assert!((&a * &v).amax() < 1e-14);
        let (s2, _) = (singular_values(&a).unwrap(), ());
        for (x, y) in s.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let s = RealSchur::new(&sample()).unwrap();
        let w = quasi_triangular_eigenvectors(&s.t).unwrap();
        let t = s.t.map(|x| Complex64::new(x, 0.0));
        for (k, l) in s.eigenvalues().into_iter().enumerate() {
            let col = w.column(k);
            let r = &t * col - col * l;
            assert!(r.camax() < 1e-12 * col.camax());
        }
        let lu = ComplexLu::new(&w).unwrap();
        let b: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let x = lu.solve(&b).unwrap();
        let back = &w * nalgebra::DVector::from_vec(x);
        for i in 0..4 {
            assert!((back[i] - b[i]).norm() < 1e-12);
        }
    }
}
