//! Finite-difference assembly of the generator with free boundary conditions.
//!
//! Unknowns are ordered in blocks `[u; v; theta]`; inside each block node
//! `(i, j)` has index `i + (nx + 1) j`. Boundary nodes carry unknowns, ghost
//! values do not.
//!
//! Two routes are provided. On an interval the conditions are imposed through
//! ghost points, eliminated by local solves. Both on the interval and on the
//! rectangle an energy form `(K_a, H_v, H_theta, K_theta, G)` defines
//!
//! ```text
//! u' = v,   H_v v' = -K_a u - G^T theta,   H_theta theta' = -K_theta theta + G v,
//! ```
//!
//! which dissipates `E = u^T K_a u + v^T H_v v + theta^T H_theta theta` exactly:
//! `dE/dt = -2 theta^T K_theta theta`. On the interval both routes produce
//! the same matrix.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::error::{Error, Result};

/// Sparse row: `(column, coefficient)`.
type Row = Vec<(usize, f64)>;

/// Quadratic-form data of a dissipative discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyForm {
    /// Bending stiffness (plus boundary spring for the variant).
    pub k_a: DMatrix<f64>,
    /// Velocity mass, diagonal.
    pub h_v: DVector<f64>,
    /// Temperature mass, diagonal.
    pub h_theta: DVector<f64>,
    /// Heat conduction (plus Robin term for the variant).
    pub k_theta: DMatrix<f64>,
    /// Coupling, rows indexed by temperature nodes, columns by displacement nodes.
    pub g: DMatrix<f64>,
}

impl EnergyForm {
    pub fn nodes(&self) -> usize {
        self.h_v.len()
    }

    pub fn generator(&self) -> DMatrix<f64> {
        let n = self.nodes();
        let mut a = DMatrix::<f64>::zeros(3 * n, 3 * n);
        for i in 0..n {
            a[(i, n + i)] = 1.0;
        }
        for r in 0..n {
            let hv = self.h_v[r];
            let ht = self.h_theta[r];
            for c in 0..n {
                a[(n + r, c)] = -self.k_a[(r, c)] / hv;
                a[(n + r, 2 * n + c)] = -self.g[(c, r)] / hv;
                a[(2 * n + r, n + c)] = self.g[(r, c)] / ht;
                a[(2 * n + r, 2 * n + c)] = -self.k_theta[(r, c)] / ht;
            }
        }
        a
    }

    /// `diag(K_a, H_v, H_theta)`.
    pub fn energy_matrix(&self) -> DMatrix<f64> {
        let n = self.nodes();
        let mut e = DMatrix::<f64>::zeros(3 * n, 3 * n);
        e.view_mut((0, 0), (n, n)).copy_from(&self.k_a);
        for i in 0..n {
            e[(n + i, n + i)] = self.h_v[i];
            e[(2 * n + i, 2 * n + i)] = self.h_theta[i];
        }
        e
    }

    /// Gram matrix of [`EnergyForm::state_norm`]: `diag(K_a + H_v, H_v, H_theta)`.
    pub fn state_gram(&self) -> DMatrix<f64> {
        let n = self.nodes();
        let mut e = self.energy_matrix();
        for i in 0..n {
            e[(i, i)] += self.h_v[i];
        }
        e
    }

    /// Norm used for decay measurements: the energy plus the mass of `u`,
    /// so rigid displacements are measured too.
    pub fn state_norm(&self, x: &[f64]) -> f64 {
        let n = self.nodes();
        let (u, rest) = x.split_at(n);
        let (v, th) = rest.split_at(n);
        let u_vec = DVector::from_column_slice(u);
        let bend = u_vec.dot(&(&self.k_a * &u_vec));
        let mass: f64 = (0..n)
            .map(|i| self.h_v[i] * (u[i] * u[i] + v[i] * v[i]) + self.h_theta[i] * th[i] * th[i])
            .sum();
        (bend.max(0.0) + mass).sqrt()
    }
}

fn add_outer(k: &mut DMatrix<f64>, a: &Row, b: &Row, w: f64) {
    for &(i, x) in a {
        for &(j, y) in b {
            k[(i, j)] += w * x * y;
        }
    }
}

fn add_row(m: &mut DMatrix<f64>, r: usize, a: &Row, w: f64) {
    for &(j, x) in a {
        m[(r, j)] += w * x;
    }
}

fn trapezoid(n: usize, h: f64, i: usize) -> f64 {
    if i == 0 || i == n {
        h / 2.0
    } else {
        h
    }
}

/// Energy form on an interval of length `len` with `n` intervals.
pub fn energy_form_interval(len: f64, n: usize) -> EnergyForm {
    let h = len / n as f64;
    let nodes = n + 1;
    let mut k_a = DMatrix::zeros(nodes, nodes);
    let mut g = DMatrix::zeros(nodes, nodes);
    let mut k_theta = DMatrix::zeros(nodes, nodes);
    for i in 1..n {
        let k: Row = vec![
            (i - 1, 1.0 / (h * h)),
            (i, -2.0 / (h * h)),
            (i + 1, 1.0 / (h * h)),
        ];
        add_outer(&mut k_a, &k, &k, h);
        add_row(&mut g, i, &k, h);
    }
    for i in 0..n {
        let d: Row = vec![(i, -1.0 / h), (i + 1, 1.0 / h)];
        add_outer(&mut k_theta, &d, &d, h);
    }
    let h_v = DVector::from_fn(nodes, |i, _| trapezoid(n, h, i));
    // Boundary temperature rows carry twice the trapezoid weight: there the
    // moment condition turns v_xx into -theta_t.
    let h_theta = DVector::from_element(nodes, h);
    EnergyForm {
        k_a,
        h_v,
        h_theta,
        k_theta,
        g,
    }
}

/// Ghost-point assembly on an interval with free ends:
/// `u_xx + theta = 0`, `u_xxx = 0`, `theta_x = 0` at both ends. For every end the
/// ghosts `u_{-1}, u_{-2}, theta_{-1}` solve a local 3x3 system; the velocity
/// ghost follows by differentiating the displacement ghost relation in time.
pub fn ghost_route_interval(len: f64, n: usize) -> Result<DMatrix<f64>> {
    let h = len / n as f64;
    let nodes = n + 1;
    let size = 3 * nodes;
    let (iu, iv, it) = (0, nodes, 2 * nodes);
    let unit = |k: usize| {
        let mut r = DVector::<f64>::zeros(size);
        r[k] = 1.0;
        r
    };
    // Extended node values as linear combinations of unknowns; position p holds node p - 2.
    let mut u_ext: Vec<DVector<f64>> = vec![DVector::zeros(size); nodes + 4];
    let mut th_ext: Vec<DVector<f64>> = vec![DVector::zeros(size); nodes + 4];
    for i in 0..nodes {
        u_ext[i + 2] = unit(iu + i);
        th_ext[i + 2] = unit(it + i);
    }
    // Ghost coefficient on theta at the boundary node, per end, for the velocity ghost.
    let mut theta_coeff = [0.0; 2];
    let mut u_ghost1_of_u: [DVector<f64>; 2] = [DVector::zeros(size), DVector::zeros(size)];
    for (end, (b, dir)) in [(0usize, 1i64), (n, -1i64)].into_iter().enumerate() {
        // Neighbours inward: b + dir * k.
        let at = |k: i64| (b as i64 + dir * k + 2) as usize;
        // Equations in the ghost vector g = (u_{-1}, u_{-2}, theta_{-1}) (outward = -dir):
        //   (u_{-1} - 2 u_0 + u_1) / h^2 + theta_0 = 0
        //   (u_2 - 2 u_1 + 2 u_{-1} - u_{-2}) / (2 h^3) = 0
        //   (theta_1 - theta_{-1}) / (2 h) = 0
        let m = Matrix3::new(
            1.0 / (h * h),
            0.0,
            0.0,
            2.0 / (2.0 * h * h * h),
            -1.0 / (2.0 * h * h * h),
            0.0,
            0.0,
            0.0,
            -1.0 / (2.0 * h),
        );
        let rhs = [
            (&u_ext[at(1)] - &u_ext[at(0)] * 2.0) / (h * h) + &th_ext[at(0)],
            (&u_ext[at(2)] - &u_ext[at(1)] * 2.0) / (2.0 * h * h * h),
            &th_ext[at(1)] / (2.0 * h),
        ];
        let lu = m.lu();
        let inv = lu.try_inverse().ok_or(Error::GhostElimination(b))?;
        let mut ghosts = [
            DVector::zeros(size),
            DVector::zeros(size),
            DVector::zeros(size),
        ];
        for (r, g) in ghosts.iter_mut().enumerate() {
            for c in 0..3 {
                *g -= &rhs[c] * inv[(r, c)];
            }
        }
        let [g1, g2, gt] = ghosts;
        // The displacement ghost may reference temperature only at the boundary node.
        let tb = it + b;
        for k in it..it + nodes {
            if k != tb && g1[k] != 0.0 {
                return Err(Error::GhostElimination(b));
            }
        }
        theta_coeff[end] = g1[tb];
        u_ghost1_of_u[end] = g1.clone();
        u_ext[at(-1)] = g1;
        u_ext[at(-2)] = g2;
        th_ext[at(-1)] = gt;
    }

    let mut a = DMatrix::<f64>::zeros(size, size);
    for i in 0..nodes {
        a[(iu + i, iv + i)] = 1.0;
        let p = i + 2;
        let d4 = (&u_ext[p - 2] - &u_ext[p - 1] * 4.0 + &u_ext[p] * 6.0 - &u_ext[p + 1] * 4.0
            + &u_ext[p + 2])
            / (h * h * h * h);
        let d2t = (&th_ext[p - 1] - &th_ext[p] * 2.0 + &th_ext[p + 1]) / (h * h);
        a.row_mut(iv + i).copy_from(&(-(d4 + &d2t)).transpose());
        // v values at nodes p - 1, p, p + 1: interior ones are unknowns; the ghost
        // v_{-1} = (ghost u relation with u -> v) + c theta_t(boundary).
        let end = if i == 0 {
            Some(0)
        } else if i == n {
            Some(1)
        } else {
            None
        };
        let mut d2v = DVector::<f64>::zeros(size);
        d2v[iv + i] -= 2.0 / (h * h);
        let mut implicit = 0.0;
        for q in [i as i64 - 1, i as i64 + 1] {
            if (0..=n as i64).contains(&q) {
                d2v[iv + q as usize] += 1.0 / (h * h);
            } else {
                let e = end.expect("ghost only at ends");
                let g1 = &u_ghost1_of_u[e];
                for k in 0..nodes {
                    d2v[iv + k] += g1[iu + k] / (h * h);
                }
                implicit += theta_coeff[e] / (h * h);
            }
        }
        // theta_t = D2 theta + D2 v, where D2 v may contain implicit * theta_t.
        let factor = 1.0 - implicit;
        if factor.abs() < 1e-12 {
            return Err(Error::GhostElimination(i));
        }
        a.row_mut(it + i)
            .copy_from(&((d2t + d2v) / factor).transpose());
    }
    Ok(a)
}

/// Node bookkeeping on a rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectGrid {
    pub x0: f64,
    pub y0: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl RectGrid {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Self {
        Self {
            x0,
            y0,
            nx,
            ny,
            hx: (x1 - x0) / nx as f64,
            hy: (y1 - y0) / ny as f64,
        }
    }

    pub fn nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + (self.nx + 1) * j
    }

    pub fn coordinates(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.hx, self.y0 + j as f64 * self.hy)
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        trapezoid(self.nx, self.hx, i) * trapezoid(self.ny, self.hy, j)
    }

    fn interior_x(&self, i: usize) -> bool {
        i > 0 && i < self.nx
    }

    fn interior_y(&self, j: usize) -> bool {
        j > 0 && j < self.ny
    }

    /// Trapezoid weight of a boundary node along the boundary curve.
    fn boundary_weight(&self, i: usize, j: usize) -> f64 {
        let mut w = 0.0;
        if j == 0 || j == self.ny {
            w += trapezoid(self.nx, self.hx, i);
        }
        if i == 0 || i == self.nx {
            w += trapezoid(self.ny, self.hy, j);
        }
        w
    }

    fn kxx(&self, i: usize, j: usize) -> Row {
        let c = 1.0 / (self.hx * self.hx);
        vec![
            (self.index(i - 1, j), c),
            (self.index(i, j), -2.0 * c),
            (self.index(i + 1, j), c),
        ]
    }

    fn kyy(&self, i: usize, j: usize) -> Row {
        let c = 1.0 / (self.hy * self.hy);
        vec![
            (self.index(i, j - 1), c),
            (self.index(i, j), -2.0 * c),
            (self.index(i, j + 1), c),
        ]
    }

    /// Cell twist `u_xy` on the cell with lower-left node `(i, j)`.
    fn kxy(&self, i: usize, j: usize) -> Row {
        let c = 1.0 / (self.hx * self.hy);
        vec![
            (self.index(i + 1, j + 1), c),
            (self.index(i + 1, j), -c),
            (self.index(i, j + 1), -c),
            (self.index(i, j), c),
        ]
    }
}

/// Energy form on a rectangle with Poisson ratio `mu`. With `robin = Some(b)`
/// the variant adds the boundary spring `int_Gamma u^2` to the bending form
/// and `b int_Gamma theta^2` to the heat form.
///
/// Per node with weight `w` (trapezoid rule):
/// * interior: `w (k_xx^2 + k_yy^2 + 2 mu k_xx k_yy)`, coupling `w theta (k_xx + k_yy)`;
/// * edge where only `k_tt` (tangential) is available: the moment condition
///   `k_nn = -mu k_tt - theta` condenses the density to `w (1 - mu^2) k_tt^2`
///   and the coupling to `w (1 - mu) theta k_tt`;
/// * corner: no bending term, no coupling.
///
/// Every cell adds the twist `2 (1 - mu) hx hy k_xy^2`. The temperature mass
/// is `w`, `2 w` on edges and `(3 + mu) / (1 + mu) w` at corners, again from
/// eliminating the moment condition.
pub fn energy_form_rectangle(grid: &RectGrid, mu: f64, robin: Option<f64>) -> EnergyForm {
    let n = grid.nodes();
    let mut k_a = DMatrix::zeros(n, n);
    let mut g = DMatrix::zeros(n, n);
    let mut k_theta = DMatrix::zeros(n, n);
    let mut h_v = DVector::zeros(n);
    let mut h_theta = DVector::zeros(n);
    for j in 0..=grid.ny {
        for i in 0..=grid.nx {
            let k = grid.index(i, j);
            let w = grid.weight(i, j);
            h_v[k] = w;
            match (grid.interior_x(i), grid.interior_y(j)) {
                (true, true) => {
                    let (xx, yy) = (grid.kxx(i, j), grid.kyy(i, j));
                    add_outer(&mut k_a, &xx, &xx, w);
                    add_outer(&mut k_a, &yy, &yy, w);
                    add_outer(&mut k_a, &xx, &yy, w * mu);
                    add_outer(&mut k_a, &yy, &xx, w * mu);
                    add_row(&mut g, k, &xx, w);
                    add_row(&mut g, k, &yy, w);
                    h_theta[k] = w;
                }
                (true, false) => {
                    let xx = grid.kxx(i, j);
                    add_outer(&mut k_a, &xx, &xx, w * (1.0 - mu * mu));
                    add_row(&mut g, k, &xx, w * (1.0 - mu));
                    h_theta[k] = 2.0 * w;
                }
                (false, true) => {
                    let yy = grid.kyy(i, j);
                    add_outer(&mut k_a, &yy, &yy, w * (1.0 - mu * mu));
                    add_row(&mut g, k, &yy, w * (1.0 - mu));
                    h_theta[k] = 2.0 * w;
                }
                (false, false) => {
                    h_theta[k] = (3.0 + mu) / (1.0 + mu) * w;
                }
            }
            if let Some(b) = robin {
                let wb = grid.boundary_weight(i, j);
                if wb > 0.0 {
                    k_a[(k, k)] += wb;
                    k_theta[(k, k)] += b * wb;
                }
            }
        }
    }
    let twist = 2.0 * (1.0 - mu) * grid.hx * grid.hy;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let xy = grid.kxy(i, j);
            add_outer(&mut k_a, &xy, &xy, twist);
        }
    }
    // Heat conduction from link gradients.
    for j in 0..=grid.ny {
        for i in 0..grid.nx {
            let d: Row = vec![
                (grid.index(i, j), -1.0 / grid.hx),
                (grid.index(i + 1, j), 1.0 / grid.hx),
            ];
            add_outer(
                &mut k_theta,
                &d,
                &d,
                grid.hx * trapezoid(grid.ny, grid.hy, j),
            );
        }
    }
    for j in 0..grid.ny {
        for i in 0..=grid.nx {
            let d: Row = vec![
                (grid.index(i, j), -1.0 / grid.hy),
                (grid.index(i, j + 1), 1.0 / grid.hy),
            ];
            add_outer(
                &mut k_theta,
                &d,
                &d,
                grid.hy * trapezoid(grid.nx, grid.hx, i),
            );
        }
    }
    EnergyForm {
        k_a,
        h_v,
        h_theta,
        k_theta,
        g,
    }
}

/// Outward normal at a boundary node that is not a corner.
pub fn edge_normal(grid: &RectGrid, i: usize, j: usize) -> Option<(f64, f64)> {
    match (grid.interior_x(i), grid.interior_y(j)) {
        (true, false) => Some(if j == 0 { (0.0, -1.0) } else { (0.0, 1.0) }),
        (false, true) => Some(if i == 0 { (-1.0, 0.0) } else { (1.0, 0.0) }),
        _ => None,
    }
}

/// Second-order first and second differences along one axis at position `i`
/// of `0..=n`, one-sided at the ends.
fn diff1(f: impl Fn(usize) -> f64, i: usize, n: usize, h: f64) -> f64 {
    if i == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if i == n {
        (3.0 * f(n) - 4.0 * f(n - 1) + f(n - 2)) / (2.0 * h)
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * h)
    }
}

fn diff2(f: impl Fn(usize) -> f64, i: usize, n: usize, h: f64) -> f64 {
    if i == 0 {
        (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / (h * h)
    } else if i == n {
        (2.0 * f(n) - 5.0 * f(n - 1) + 4.0 * f(n - 2) - f(n - 3)) / (h * h)
    } else {
        (f(i - 1) - 2.0 * f(i) + f(i + 1)) / (h * h)
    }
}

/// Second derivatives `(u_xx, u_yy, u_xy)` of a nodal field.
pub fn hessian_at(grid: &RectGrid, u: &[f64], i: usize, j: usize) -> (f64, f64, f64) {
    let at = |i: usize, j: usize| u[grid.index(i, j)];
    let uxx = diff2(|p| at(p, j), i, grid.nx, grid.hx);
    let uyy = diff2(|q| at(i, q), j, grid.ny, grid.hy);
    let uxy = diff1(
        |p| diff1(|q| at(p, q), j, grid.ny, grid.hy),
        i,
        grid.nx,
        grid.hx,
    );
    (uxx, uyy, uxy)
}

/// `B_1 u = 2 nu_1 nu_2 u_xy - nu_1^2 u_yy - nu_2^2 u_xx` at an edge node.
pub fn b1_operator(grid: &RectGrid, u: &[f64], i: usize, j: usize) -> Result<f64> {
    let (n1, n2) = edge_normal(grid, i, j)
        .ok_or_else(|| Error::InvalidInput(format!("node ({i}, {j}) is not an edge node")))?;
    let (uxx, uyy, uxy) = hessian_at(grid, u, i, j);
    Ok(2.0 * n1 * n2 * uxy - n1 * n1 * uyy - n2 * n2 * uxx)
}

/// `B_2 u = d_tau [(nu_1^2 - nu_2^2) u_xy + nu_1 nu_2 (u_yy - u_xx)]` at an edge
/// node, with `tau = (-nu_2, nu_1)` and a centered difference along the edge.
pub fn b2_operator(grid: &RectGrid, u: &[f64], i: usize, j: usize) -> Result<f64> {
    let (n1, n2) = edge_normal(grid, i, j)
        .ok_or_else(|| Error::InvalidInput(format!("node ({i}, {j}) is not an edge node")))?;
    let bracket = |i: usize, j: usize| {
        let (uxx, uyy, uxy) = hessian_at(grid, u, i, j);
        (n1 * n1 - n2 * n2) * uxy + n1 * n2 * (uyy - uxx)
    };
    let (t1, t2) = (-n2, n1);
    Ok(if t1 != 0.0 {
        t1 * (bracket(i + 1, j) - bracket(i - 1, j)) / (2.0 * grid.hx)
    } else {
        t2 * (bracket(i, j + 1) - bracket(i, j - 1)) / (2.0 * grid.hy)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghost_route_matches_energy_form() {
        for n in [8, 13, 40] {
            let ghost = ghost_route_interval(1.7, n).unwrap();
            let energy = energy_form_interval(1.7, n).generator();
            let scale = energy.amax();
            assert!((ghost - energy).amax() <= 1e-12 * scale, "n = {n}");
        }
    }

    #[test]
    fn energy_identity_holds() {
        let grid = RectGrid::new(0.0, 1.0, 0.0, 1.5, 6, 8);
        for robin in [None, Some(1.0)] {
            let f = energy_form_rectangle(&grid, 0.3, robin);
            let a = f.generator();
            let e = f.energy_matrix();
            let sym = &e * &a + a.transpose() * &e;
            let n = grid.nodes();
            let mut expect = DMatrix::zeros(3 * n, 3 * n);
            expect
                .view_mut((2 * n, 2 * n), (n, n))
                .copy_from(&(&f.k_theta * -2.0));
            assert!((sym - expect).amax() < 1e-9 * e.amax());
        }
    }

    #[test]
    fn bending_form_kernel_is_affine() {
        let grid = RectGrid::new(0.0, 1.0, 0.0, 1.0, 6, 6);
        let f = energy_form_rectangle(&grid, 0.3, None);
        for poly in [|_: f64, _: f64| 1.0, |x: f64, _: f64| x, |_: f64, y: f64| y] {
            let u = DVector::from_fn(grid.nodes(), |k, _| {
                let (x, y) = grid.coordinates(k % 7, k / 7);
                poly(x, y)
            });
            assert!((&f.k_a * &u).amax() < 1e-9);
        }
        let xy = DVector::from_fn(grid.nodes(), |k, _| {
            let (x, y) = grid.coordinates(k % 7, k / 7);
            x * y
        });
        assert!(xy.dot(&(&f.k_a * &xy)) > 1e-3);
    }

    #[test]
    fn boundary_operators_on_flat_edges() {
        // u = x^3 y^2 + x^2 y^3: check B_1 u = -u_tt and B_2 u = d_nu u_tt.
        let grid = RectGrid::new(0.0, 1.0, 0.0, 1.0, 40, 40);
        let f = |x: f64, y: f64| x.powi(3) * y.powi(2) + x.powi(2) * y.powi(3);
        let u: Vec<f64> = (0..grid.nodes())
            .map(|k| {
                let (x, y) = grid.coordinates(k % 41, k / 41);
                f(x, y)
            })
            .collect();
        let uxx = |x: f64, y: f64| 6.0 * x * y * y + 2.0 * y.powi(3);
        let uyy = |x: f64, y: f64| 2.0 * x.powi(3) + 6.0 * x * x * y;
        let uxxy = |x: f64, y: f64| 12.0 * x * y + 6.0 * y * y;
        let uxyy = |x: f64, y: f64| 6.0 * x * x + 12.0 * x * y;
        // Bottom edge: tau = (1, 0), nu = (0, -1).
        let (i, j) = (20, 0);
        let (x, y) = grid.coordinates(i, j);
        assert!((b1_operator(&grid, &u, i, j).unwrap() + uxx(x, y)).abs() < 1e-2);
        assert!((b2_operator(&grid, &u, i, j).unwrap() + uxxy(x, y)).abs() < 1e-2);
        // Right edge: tau = (0, 1), nu = (1, 0).
        let (i, j) = (40, 17);
        let (x, y) = grid.coordinates(i, j);
        assert!((b1_operator(&grid, &u, i, j).unwrap() + uyy(x, y)).abs() < 1e-2);
        assert!((b2_operator(&grid, &u, i, j).unwrap() - uxyy(x, y)).abs() < 1e-2);
        assert!(b1_operator(&grid, &u, 0, 0).is_err());
    }
}
