//! One function per command. Each returns its data files and checks; the
//! runner writes everything at the end.

use num_complex::Complex64;
use serde::Serialize;
use thermoplate::bounded::{
    assemble_generator, convergence_study, decay_rate_experiment, export_generator,
    BoundedAnalysis, DiscreteGenerator,
};
use thermoplate::multiplier::{
    example_suite, lemma24_matrix_scan, log_space, nonsectoriality_witness, MultiplierReport,
    SectorSample,
};
use thermoplate::spectral::{
    e_norm, evolve, history_csv, resolvent_bound, resolvent_bound_sweep, witness_grid, StateField,
    TorusGrid,
};
use thermoplate::symbol::{characteristic_roots, CharacteristicRoots, RootCheck, PLATE_CUBIC};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::manifest::Check;

/// Relative tolerance of the witness closed form.
pub const WITNESS_TOL: f64 = 1e-12;
/// Relative change allowed in the shifted sweep when the torus is refined.
pub const GRID_STABILITY_TOL: f64 = 1e-6;
/// Tolerance of the semigroup check in `evolve`.
pub const SEMIGROUP_TOL: f64 = 1e-9;
/// Relative agreement of fitted and spectral decay rates.
pub const DECAY_TOL: f64 = 0.1;
/// Accepted band for the observed eigenvalue convergence order.
pub const ORDER_BAND: (f64, f64) = (1.5, 2.5);

const RAY_FRACTIONS: [f64; 5] = [-0.99, -0.5, 0.0, 0.5, 0.99];

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
    /// Human-readable summary for the console.
    pub console: String,
}

impl Outcome {
    fn file(&mut self, name: &str, data: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), data.into()));
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, pass, detail));
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.console.push_str(s.as_ref());
        self.console.push('\n');
    }
}

/// Test hooks that are not part of the configuration.
#[derive(Debug, Default, Clone, Copy)]
pub struct Hooks {
    /// Added to the `t^2` coefficient before the roots are computed.
    pub perturb: Option<f64>,
}

pub fn execute(cfg: &RunConfig, hooks: Hooks) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match cfg.command {
        Command::Roots => roots(hooks),
        Command::Witness => witness(cfg),
        Command::Multscan => multscan(cfg),
        Command::Lemma24 => lemma24(cfg),
        Command::Sweep => sweep(cfg),
        Command::Evolve => evolve_cmd(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Decay => decay(cfg),
        Command::Converge => converge(cfg),
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s.into_bytes()
}

#[derive(Serialize)]
struct RootsRecord {
    polynomial: [f64; 4],
    roots: CharacteristicRoots,
    residuals: [f64; 3],
    checks: Vec<RootCheck>,
}

fn roots(hooks: Hooks) -> Result<Outcome, CliError> {
    let roots = match hooks.perturb {
        None => characteristic_roots()?,
        Some(eps) => {
            let mut c = PLATE_CUBIC;
            c[0] += eps;
            CharacteristicRoots::from_cubic(c)?
        }
    };
    let checks = roots.checks();
    let record = RootsRecord {
        polynomial: [1.0, 1.0, 2.0, 1.0],
        roots,
        residuals: roots.residuals(),
        checks: checks.clone(),
    };
    let mut out = Outcome::default();
    out.line(format!("gamma1 = {}", roots.gamma1));
    out.line(format!(
        "gamma2 = {} + {}i",
        roots.gamma2.re, roots.gamma2.im
    ));
    out.line(format!("gamma3 = {} {}i", roots.gamma3.re, roots.gamma3.im));
    out.line(format!("theta0 = {}", roots.theta0));
    let r = roots.residuals();
    out.line(format!("residuals = {:e}, {:e}, {:e}", r[0], r[1], r[2]));
    for c in checks {
        out.check(&c.name, c.pass, format!("{:e}", c.value));
    }
    out.file("roots.json", json(&record));
    Ok(out)
}

fn witness(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let mut csv = String::from("k,witness,closed_form,relative_difference\n");
    let mut worst: f64 = 0.0;
    for &k in &cfg.k {
        let w = nonsectoriality_witness(k)?;
        let closed = (k * k + 1.0) / 5.0;
        let rel = (w - closed).abs() / closed;
        worst = worst.max(rel);
        csv.push_str(&format!("{k},{w},{closed},{rel:e}\n"));
        out.line(format!("k = {k}: witness {w}, closed form {closed}"));
    }
    out.check(
        "closed_form",
        worst <= WITNESS_TOL,
        format!("max relative difference {worst:e}"),
    );
    out.file("witness.csv", csv);
    Ok(out)
}

fn sector_sample(cfg: &RunConfig) -> SectorSample {
    SectorSample::new(cfg.dim, cfg.lambda0, cfg.theta)
        .with_lambda_range(1e-3, 1e3, cfg.lambda_points)
        .with_xi_range(1e-3, 1e3, cfg.xi_points)
}

fn report_files(out: &mut Outcome, stem: &str, reports: &[MultiplierReport]) {
    let mut csv = String::new();
    for (i, r) in reports.iter().enumerate() {
        let body = r.to_csv();
        let mut lines = body.lines();
        let header = lines.next().unwrap_or_default();
        if i == 0 {
            csv.push_str(header);
            csv.push('\n');
        }
        for l in lines {
            csv.push_str(l);
            csv.push('\n');
        }
        out.line(format!(
            "{}: order {}, max C = {:e}, {}",
            r.symbol_id,
            r.s,
            r.max_c(),
            if r.pass { "pass" } else { "FAIL" }
        ));
        out.check(&r.symbol_id, r.pass, format!("max C = {:e}", r.max_c()));
    }
    out.file(&format!("{stem}.json"), json(&reports));
    out.file(&format!("{stem}.csv"), csv);
}

fn multscan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let reports = example_suite(&sector_sample(cfg), cfg.max_alpha)?;
    report_files(&mut out, "multscan", &reports);
    Ok(out)
}

fn lemma24(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let reports = lemma24_matrix_scan(cfg.j, &sector_sample(cfg), cfg.max_alpha)?;
    report_files(&mut out, &format!("lemma24_j{}", cfg.j), &reports);
    Ok(out)
}

fn torus(cfg: &RunConfig, points: usize) -> Result<TorusGrid, CliError> {
    Ok(TorusGrid::uniform(cfg.dim, points, cfg.period)?)
}

fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let moduli = log_space(1e-3, 1e3, cfg.lambda_points);
    let coarse = resolvent_bound_sweep(
        cfg.j,
        cfg.lambda0,
        cfg.theta,
        &RAY_FRACTIONS,
        &moduli,
        &torus(cfg, cfg.points)?,
    )?;
    let fine = resolvent_bound_sweep(
        cfg.j,
        cfg.lambda0,
        cfg.theta,
        &RAY_FRACTIONS,
        &moduli,
        &torus(cfg, 2 * cfg.points)?,
    )?;
    let drift = (fine.max_bound - coarse.max_bound).abs() / coarse.max_bound;
    out.line(format!(
        "shifted sweep: sup bound {:e} (refined {:e})",
        coarse.max_bound, fine.max_bound
    ));
    out.check(
        "shifted_bounded",
        coarse.max_bound.is_finite(),
        format!("{:e}", coarse.max_bound),
    );
    out.check(
        "grid_stable",
        drift <= GRID_STABILITY_TOL,
        format!("relative change {drift:e}"),
    );

    // Along lambda = k^{-2} on tori that carry the matching mode |xi| = 1/k.
    let mut csv = String::from("k,lambda,bound,witness_closed_form\n");
    let mut prev = 0.0;
    let mut growing = true;
    for &k in &cfg.k {
        let lambda = Complex64::new(k.powi(-2), 0.0);
        let b = resolvent_bound(0, lambda, &witness_grid(k, cfg.points)?)?;
        let closed = (k * k + 1.0) / 5.0;
        growing &= b > prev && b >= closed * (1.0 - WITNESS_TOL);
        prev = b;
        csv.push_str(&format!("{k},{},{b},{closed}\n", lambda.re));
        out.line(format!("k = {k}: unshifted bound {b:e}"));
    }
    out.check(
        "unshifted_growth",
        growing,
        format!("largest bound {prev:e}"),
    );
    out.file("sweep.csv", coarse.to_csv());
    out.file("sweep.json", json(&coarse));
    out.file("sweep_unshifted.csv", csv);
    Ok(out)
}

fn evolve_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    if !(cfg.t_final > 0.0) {
        return Err(CliError::Config(format!(
            "t_final must be positive, got {}",
            cfg.t_final
        )));
    }
    let u0 = StateField::random_smooth(torus(cfg, cfg.points)?, cfg.seed, 3);
    let mut rows = Vec::with_capacity(cfg.steps + 1);
    for k in 0..=cfg.steps {
        let t = cfg.t_final * k as f64 / cfg.steps as f64;
        rows.push((t, e_norm(&evolve(&u0, t)?, cfg.j)?));
    }
    let end = evolve(&u0, cfg.t_final)?;
    let half = evolve(&evolve(&u0, 0.5 * cfg.t_final)?, 0.5 * cfg.t_final)?;
    let gap = end.max_abs_diff(&half) / end.max_abs().max(1.0);
    out.check("semigroup", gap <= SEMIGROUP_TOL, format!("{gap:e}"));
    let finite = rows.iter().all(|(_, n)| n.is_finite());
    out.check(
        "finite_norms",
        finite,
        format!("final norm {:e}", rows[cfg.steps].1),
    );
    out.line(format!(
        "E_{} norm: {:e} at t = 0, {:e} at t = {}",
        cfg.j, rows[0].1, rows[cfg.steps].1, cfg.t_final
    ));
    out.file(
        "evolve_norms.csv",
        history_csv(&format!("e_norm_{}", cfg.j), &rows),
    );
    out.file("evolve_initial.tplt", u0.to_bytes());
    out.file("evolve_final.tplt", end.to_bytes());
    Ok(out)
}

fn generator(cfg: &RunConfig) -> Result<DiscreteGenerator, CliError> {
    Ok(assemble_generator(
        cfg.domain_spec(),
        &cfg.grid_sizes(),
        cfg.bc_variant(),
    )?)
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let gen = generator(cfg)?;
    let analysis = BoundedAnalysis::for_generator_with_tol(&gen, cfg.zero_tol)?;
    let report = analysis.spectrum_report(Some(&gen));
    out.line(gen.description());
    out.line(format!(
        "size {}, max Re = {:e}, zero_tol = {:e}, kernel {}, generalized kernel {}",
        report.size,
        report.max_real_part,
        report.zero_tol,
        report.kernel_dimension,
        report.generalized_kernel_dimension
    ));
    out.check(
        "left_half_plane",
        report.enclosure_holds(),
        format!("max Re = {:e}", report.max_real_part),
    );
    out.file("spectrum.json", format!("{}\n", report.to_json()));
    out.file("spectrum.csv", report.to_csv());
    out.file("generator.triplet", export_generator(&gen));
    Ok(out)
}

fn decay(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let gen = generator(cfg)?;
    let r = decay_rate_experiment(&gen, cfg.samples, cfg.horizon, cfg.seed, cfg.project)?;
    out.line(gen.description());
    out.line(format!(
        "fitted rate {:e}, spectral margin {}, horizon {}",
        r.eps_fit,
        r.eps_spec.map_or("none".into(), |e| format!("{e:e}")),
        r.horizon
    ));
    out.check("decaying", r.decaying, format!("eps_fit = {:e}", r.eps_fit));
    out.check(
        "rate_matches_spectrum",
        r.matches(DECAY_TOL),
        r.relative_error.map_or("no spectral margin".into(), |e| {
            format!("relative error {e:e}")
        }),
    );
    out.file("decay.csv", r.to_csv());
    out.file("decay.json", json(&r));
    Ok(out)
}

fn converge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let table = convergence_study(cfg.domain_spec(), cfg.bc_variant(), &cfg.grid_sequence())?;
    let p = table.observed_order;
    out.line(format!(
        "observed order {}",
        p.map_or("none".into(), |p| format!("{p:.3}"))
    ));
    out.check(
        "order_in_band",
        p.is_some_and(|p| p >= ORDER_BAND.0 && p <= ORDER_BAND.1),
        format!("{p:?}"),
    );
    out.file("converge.csv", table.to_csv());
    out.file("converge.json", format!("{}\n", table.to_json()));
    Ok(out)
}
