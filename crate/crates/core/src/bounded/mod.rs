//! Bounded-domain generators with free boundary conditions: assembly,
//! spectra, spectral projection onto the zero eigenvalue, evolution and
//! measured exponential decay.

pub mod analysis;
pub mod assemble;
pub mod dense;
pub mod triplet;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analysis::{
    convergence_study, decay_fit, decay_rate_experiment, evolve_bounded, kernel_and_projection,
    random_initial_state, spectrum, BoundedAnalysis, ConvergenceRow, ConvergenceTable, DecayResult,
    KernelProjection, Propagator, SpectrumReport,
};
pub use assemble::{EnergyForm, RectGrid};
pub use triplet::{export_generator, TripletMatrix};

/// Smallest number of intervals per axis.
pub const MIN_GRID: usize = 8;

pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_MU: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Rectangle { a: f64, b: f64, c: f64, d: f64 },
}

impl DomainSpec {
    pub fn unit_interval() -> Self {
        DomainSpec::Interval { a: 0.0, b: 1.0 }
    }

    pub fn unit_square() -> Self {
        DomainSpec::Rectangle {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Rectangle { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && hi > lo;
        let valid = match *self {
            DomainSpec::Interval { a, b } => ok(a, b),
            DomainSpec::Rectangle { a, b, c, d } => ok(a, b) && ok(c, d),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate domain {self}")))
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Interval { a, b } => write!(f, "interval({a},{b})"),
            DomainSpec::Rectangle { a, b, c, d } => write!(f, "rectangle({a},{b})x({c},{d})"),
        }
    }
}

/// Boundary-condition family.
///
/// * `FreeBeta`: `Delta u - (1 - beta) Delta' u + theta = 0`,
///   `d_nu (Delta u + (1 - beta) Delta' u) = 0`, `d_nu theta = 0`.
/// * `Free2d`: the same with `B_1`, `B_2` in place of `-Delta'`, `d_nu Delta'`;
///   on straight edges the two coincide with `beta = mu`.
/// * `LtVariant`: `Free2d` plus the boundary term `-u` in the shear condition
///   and the Robin condition `d_nu theta + b theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum BCVariant {
    FreeBeta { beta: f64 },
    Free2d { mu: f64 },
    LtVariant { mu: f64, b: f64 },
}

impl BCVariant {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        match *self {
            BCVariant::FreeBeta { beta } if !beta.is_finite() => bad(format!("beta = {beta}")),
            BCVariant::Free2d { mu } if !(mu > -1.0 && mu < 1.0) => {
                bad(format!("Poisson ratio must lie in (-1, 1), got {mu}"))
            }
            BCVariant::LtVariant { mu, .. } if !(mu > -1.0 && mu < 1.0) => {
                bad(format!("Poisson ratio must lie in (-1, 1), got {mu}"))
            }
            BCVariant::LtVariant { b, .. } if !(b > 0.0 && b.is_finite()) => {
                bad(format!("Robin coefficient must be positive, got {b}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BCVariant::FreeBeta { .. } => "free_beta",
            BCVariant::Free2d { .. } => "free_2d",
            BCVariant::LtVariant { .. } => "lt_variant",
        }
    }
}

impl fmt::Display for BCVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BCVariant::FreeBeta { beta } => write!(f, "free_beta(beta={beta})"),
            BCVariant::Free2d { mu } => write!(f, "free_2d(mu={mu})"),
            BCVariant::LtVariant { mu, b } => write!(f, "lt_variant(mu={mu},b={b})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyRoute {
    GhostPoints,
    Variational,
}

/// Dense matrix realization of the boundary-value problem.
#[derive(Debug, Clone)]
pub struct DiscreteGenerator {
    pub matrix: DMatrix<f64>,
    pub domain: DomainSpec,
    pub bc: BCVariant,
    /// Intervals per axis.
    pub grid: Vec<usize>,
    pub route: AssemblyRoute,
    pub energy: EnergyForm,
}

impl DiscreteGenerator {
    /// Nodes per field component.
    pub fn nodes(&self) -> usize {
        self.energy.nodes()
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Coordinates of node `k`.
    pub fn node_coordinates(&self, k: usize) -> Vec<f64> {
        match self.domain {
            DomainSpec::Interval { a, b } => {
                let h = (b - a) / self.grid[0] as f64;
                vec![a + k as f64 * h]
            }
            DomainSpec::Rectangle { a, b, c, d } => {
                let (nx, ny) = (self.grid[0], self.grid[1]);
                let (i, j) = (k % (nx + 1), k / (nx + 1));
                vec![
                    a + i as f64 * (b - a) / nx as f64,
                    c + j as f64 * (d - c) / ny as f64,
                ]
            }
        }
    }

    /// Sample a state `(u, v, theta)` given as a function of position.
    pub fn sample(&self, f: impl Fn(&[f64]) -> [f64; 3]) -> DVector<f64> {
        let n = self.nodes();
        let mut x = DVector::zeros(3 * n);
        for k in 0..n {
            let [u, v, t] = f(&self.node_coordinates(k));
            x[k] = u;
            x[n + k] = v;
            x[2 * n + k] = t;
        }
        x
    }

    /// Grid spacing per axis.
    pub fn spacing(&self) -> Vec<f64> {
        match self.domain {
            DomainSpec::Interval { a, b } => vec![(b - a) / self.grid[0] as f64],
            DomainSpec::Rectangle { a, b, c, d } => {
                vec![(b - a) / self.grid[0] as f64, (d - c) / self.grid[1] as f64]
            }
        }
    }

    pub fn state_norm(&self, x: &[f64]) -> f64 {
        self.energy.state_norm(x)
    }

    pub fn description(&self) -> String {
        let grid: Vec<String> = self.grid.iter().map(|g| g.to_string()).collect();
        format!(
            "domain={} bc={} grid={} route={:?} order=[u;v;theta] node=i+(nx+1)*j",
            self.domain,
            self.bc,
            grid.join("x"),
            self.route
        )
    }
}

/// Assemble the generator on `domain` with `grid` intervals per axis.
///
/// Intervals use ghost points (only `FreeBeta` applies, and `beta` drops out
/// since the tangential Laplacian vanishes). Rectangles use the variational
/// assembly; `FreeBeta { beta }` is `Free2d { mu: beta }` there.
pub fn assemble_generator(
    domain: DomainSpec,
    grid: &[usize],
    bc: BCVariant,
) -> Result<DiscreteGenerator> {
    domain.validate()?;
    bc.validate()?;
    if grid.len() != domain.dim() {
        return Err(Error::InvalidInput(format!(
            "{} needs {} grid sizes, got {}",
            domain,
            domain.dim(),
            grid.len()
        )));
    }
    if let Some(&g) = grid.iter().find(|&&g| g < MIN_GRID) {
        return Err(Error::InvalidInput(format!(
            "grid needs at least {MIN_GRID} intervals per axis, got {g}"
        )));
    }
    match (domain, bc) {
        (DomainSpec::Interval { a, b }, BCVariant::FreeBeta { .. }) => {
            let matrix = assemble::ghost_route_interval(b - a, grid[0])?;
            Ok(DiscreteGenerator {
                matrix,
                domain,
                bc,
                grid: grid.to_vec(),
                route: AssemblyRoute::GhostPoints,
                energy: assemble::energy_form_interval(b - a, grid[0]),
            })
        }
        (DomainSpec::Interval { .. }, _) => Err(Error::InconsistentBoundary {
            bc: bc.to_string(),
            domain: domain.to_string(),
        }),
        (DomainSpec::Rectangle { a, b, c, d }, _) => {
            let rect = RectGrid::new(a, b, c, d, grid[0], grid[1]);
            let energy = match bc {
                BCVariant::FreeBeta { beta } => {
                    if !(beta > -1.0 && beta < 1.0) {
                        return Err(Error::InvalidInput(format!(
                            "on a rectangle beta acts as a Poisson ratio in (-1, 1), got {beta}"
                        )));
                    }
                    assemble::energy_form_rectangle(&rect, beta, None)
                }
                BCVariant::Free2d { mu } => assemble::energy_form_rectangle(&rect, mu, None),
                BCVariant::LtVariant { mu, b } => {
                    assemble::energy_form_rectangle(&rect, mu, Some(b))
                }
            };
            Ok(DiscreteGenerator {
                matrix: energy.generator(),
                domain,
                bc,
                grid: grid.to_vec(),
                route: AssemblyRoute::Variational,
                energy,
            })
        }
    }
}
