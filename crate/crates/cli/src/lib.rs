//! Batch runner: resolves a [`RunConfig`] from flags and config files, runs
//! one analysis, and writes its data files, the resolved config and a
//! [`RunManifest`] into the output directory.
//!
//! Exit codes: 0 success, 1 usage error, 2 failed check, 3 numerical failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, Hooks, Outcome};
pub use config::{BcKind, Command, DomainKind, RunConfig};
pub use error::{CliError, EXIT_CHECK, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
pub use manifest::{sha256_hex, Artifact, Check, RunManifest, MANIFEST_FILE};

/// Output root used when no `--out` or `out` key is given.
pub const OUT_ENV: &str = "THERMOPLATE_OUT";
pub const CONFIG_FILE: &str = "config.txt";

#[derive(Debug, Parser)]
#[command(
    name = "thermoplate",
    version,
    about = "Numerical experiments for the linear thermoelastic plate"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Characteristic roots and their invariants.
    Roots {
        #[command(flatten)]
        common: Common,
        /// Print the JSON record instead of the summary.
        #[arg(long)]
        json: bool,
        #[arg(long, hide = true, allow_negative_numbers = true)]
        perturb: Option<f64>,
    },
    /// Non-sectoriality witness against its closed form.
    Witness {
        #[command(flatten)]
        common: Common,
        /// Values of k (default 1 10 100).
        #[arg(allow_negative_numbers = true)]
        k: Vec<f64>,
    },
    /// Multiplier order scans of the example symbols.
    Multscan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sector: SectorArgs,
    },
    /// Order-0 scans of the nine entries of the scaled resolvent.
    Lemma24 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sector: SectorArgs,
        #[arg(long)]
        j: Option<i64>,
    },
    /// Resolvent bounds on the shifted sector and along the witness line.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sector: SectorArgs,
        #[command(flatten)]
        torus: TorusArgs,
        #[arg(long)]
        j: Option<i64>,
        /// Witness parameters for the unshifted line.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        k: Option<Vec<f64>>,
    },
    /// Evolve smooth random data on the torus.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        torus: TorusArgs,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Sobolev index of the recorded norm.
        #[arg(long)]
        j: Option<i64>,
    },
    /// Spectrum of a bounded-domain generator.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bounded: BoundedArgs,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long)]
        zero_tol: Option<f64>,
    },
    /// Measured exponential decay against the spectral margin.
    Decay {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bounded: BoundedArgs,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Keep the component in the zero eigenspace.
        #[arg(long)]
        no_project: bool,
    },
    /// Eigenvalue convergence under grid refinement.
    Converge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bounded: BoundedArgs,
        /// Grid sequence, e.g. 50,100,200.
        #[arg(long, value_delimiter = ',')]
        grids: Option<Vec<usize>>,
    },
    /// Run the command named in a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the artifact hashes recorded in a run directory.
    Verify { dir: PathBuf },
}

#[derive(Debug, Args)]
struct Common {
    /// Config file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $THERMOPLATE_OUT/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SectorArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    lambda0: Option<f64>,
    /// Sector half-angle (default 0.95 theta0).
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    max_alpha: Option<u32>,
    #[arg(long)]
    lambda_points: Option<usize>,
    #[arg(long)]
    xi_points: Option<usize>,
}

#[derive(Debug, Args)]
struct TorusArgs {
    /// Points per axis, a power of two.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    period: Option<f64>,
    #[arg(long = "torus-dim")]
    torus_dim: Option<usize>,
}

#[derive(Debug, Args)]
struct BoundedArgs {
    #[arg(long)]
    domain: Option<DomainKind>,
    /// a,b or a,b,c,d.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    bounds: Option<Vec<f64>>,
    #[arg(long)]
    bc: Option<BcKind>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn path_string(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

impl Common {
    fn base(self, command: Command) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::new(command);
        if let Some(path) = &self.config {
            let text = read_config(path)?;
            cfg.apply_text(&text)?;
        }
        if let Some(o) = self.out {
            cfg.out = Some(path_string(o));
        }
        set(&mut cfg.seed, self.seed);
        Ok(cfg)
    }
}

impl SectorArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.dim, self.dim);
        set(&mut cfg.lambda0, self.lambda0);
        set(&mut cfg.theta, self.theta);
        set(&mut cfg.max_alpha, self.max_alpha);
        set(&mut cfg.lambda_points, self.lambda_points);
        set(&mut cfg.xi_points, self.xi_points);
    }
}

impl TorusArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.points, self.points);
        set(&mut cfg.period, self.period);
        set(&mut cfg.dim, self.torus_dim);
    }
}

impl BoundedArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.domain, self.domain);
        if self.bounds.is_some() {
            cfg.bounds = self.bounds;
        }
        set(&mut cfg.bc, self.bc);
        set(&mut cfg.beta, self.beta);
        set(&mut cfg.mu, self.mu);
        set(&mut cfg.b, self.b);
    }
}

enum Plan {
    Run {
        cfg: RunConfig,
        hooks: Hooks,
        json: bool,
    },
    Verify(PathBuf),
}

fn plan(cmd: Cmd) -> Result<Plan, CliError> {
    let mut hooks = Hooks::default();
    let mut json = false;
    let cfg = match cmd {
        Cmd::Roots {
            common,
            json: j,
            perturb,
        } => {
            json = j;
            hooks.perturb = perturb;
            common.base(Command::Roots)?
        }
        Cmd::Witness { common, k } => {
            let mut cfg = common.base(Command::Witness)?;
            if !k.is_empty() {
                cfg.k = k;
            }
            cfg
        }
        Cmd::Multscan { common, sector } => {
            let mut cfg = common.base(Command::Multscan)?;
            sector.apply(&mut cfg);
            cfg
        }
        Cmd::Lemma24 { common, sector, j } => {
            let mut cfg = common.base(Command::Lemma24)?;
            sector.apply(&mut cfg);
            set(&mut cfg.j, j);
            cfg
        }
        Cmd::Sweep {
            common,
            sector,
            torus,
            j,
            k,
        } => {
            let mut cfg = common.base(Command::Sweep)?;
            sector.apply(&mut cfg);
            torus.apply(&mut cfg);
            set(&mut cfg.j, j);
            set(&mut cfg.k, k);
            cfg
        }
        Cmd::Evolve {
            common,
            torus,
            t_final,
            steps,
            j,
        } => {
            let mut cfg = common.base(Command::Evolve)?;
            torus.apply(&mut cfg);
            set(&mut cfg.t_final, t_final);
            set(&mut cfg.steps, steps);
            set(&mut cfg.j, j);
            cfg
        }
        Cmd::Spectrum {
            common,
            bounded,
            grid,
            zero_tol,
        } => {
            let mut cfg = common.base(Command::Spectrum)?;
            bounded.apply(&mut cfg);
            if grid.is_some() {
                cfg.grid = grid;
            }
            if zero_tol.is_some() {
                cfg.zero_tol = zero_tol;
            }
            cfg
        }
        Cmd::Decay {
            common,
            bounded,
            grid,
            samples,
            horizon,
            no_project,
        } => {
            let mut cfg = common.base(Command::Decay)?;
            bounded.apply(&mut cfg);
            if grid.is_some() {
                cfg.grid = grid;
            }
            set(&mut cfg.samples, samples);
            if horizon.is_some() {
                cfg.horizon = horizon;
            }
            if no_project {
                cfg.project = false;
            }
            cfg
        }
        Cmd::Converge {
            common,
            bounded,
            grids,
        } => {
            let mut cfg = common.base(Command::Converge)?;
            bounded.apply(&mut cfg);
            set(&mut cfg.grids, grids);
            cfg
        }
        Cmd::Run { config, out, seed } => {
            let text = read_config(&config)?;
            let mut cfg = RunConfig::from_text(&text)?;
            if let Some(o) = out {
                cfg.out = Some(path_string(o));
            }
            set(&mut cfg.seed, seed);
            cfg
        }
        Cmd::Verify { dir } => return Ok(Plan::Verify(dir)),
    };
    cfg.validate()?;
    Ok(Plan::Run { cfg, hooks, json })
}

/// Directory a run writes to.
fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    match &cfg.out {
        Some(o) => PathBuf::from(o),
        None => std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("thermoplate-out"))
            .join(cfg.command.name()),
    }
}

/// Write the data files, the config and the manifest. Only this function
/// touches the file system.
fn persist(
    dir: &Path,
    cfg: &RunConfig,
    outcome: &Outcome,
    started: SystemTime,
    wall: f64,
) -> Result<RunManifest, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let config_text = cfg.to_text();
    let mut artifacts = Vec::new();
    let files = outcome
        .files
        .iter()
        .map(|(n, d)| (n.as_str(), d.as_slice()))
        .chain(std::iter::once((CONFIG_FILE, config_text.as_bytes())));
    for (name, data) in files {
        let path = dir.join(name);
        std::fs::write(&path, data).map_err(|e| CliError::io(&path, e))?;
        artifacts.push(Artifact {
            file: name.to_string(),
            bytes: data.len(),
            sha256: sha256_hex(data),
        });
    }
    let manifest = RunManifest {
        tool: "thermoplate".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command.name().into(),
        config: config_text,
        started_unix: started
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        wall_time_seconds: wall,
        checks: outcome.checks.clone(),
        artifacts,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

fn run_plan(plan: Plan) -> Result<i32, CliError> {
    match plan {
        Plan::Verify(dir) => {
            let manifest = RunManifest::read(&dir)?;
            let bad = manifest.verify(&dir);
            if bad.is_empty() {
                println!("{} artifacts verified", manifest.artifacts.len());
                Ok(EXIT_OK)
            } else {
                for f in &bad {
                    println!("hash mismatch: {f}");
                }
                Ok(EXIT_CHECK)
            }
        }
        Plan::Run { cfg, hooks, json } => {
            let started = SystemTime::now();
            let clock = Instant::now();
            let outcome = execute(&cfg, hooks)?;
            let dir = output_dir(&cfg);
            let manifest = persist(&dir, &cfg, &outcome, started, clock.elapsed().as_secs_f64())?;
            if json {
                let record = outcome
                    .files
                    .iter()
                    .find(|(n, _)| n.ends_with(".json"))
                    .map(|(_, d)| String::from_utf8_lossy(d).into_owned())
                    .unwrap_or_default();
                print!("{record}");
            } else {
                print!("{}", outcome.console);
                for c in &manifest.checks {
                    println!(
                        "check {}: {} ({})",
                        c.name,
                        if c.pass { "pass" } else { "FAIL" },
                        c.detail
                    );
                }
                println!(
                    "wrote {} files to {}",
                    manifest.artifacts.len() + 1,
                    dir.display()
                );
            }
            Ok(if manifest.all_pass() {
                EXIT_OK
            } else {
                EXIT_CHECK
            })
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match plan(cli.cmd).and_then(run_plan) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == EXIT_USAGE {
                eprintln!("run `thermoplate --help` for usage");
            }
            e.exit_code()
        }
    }
}
