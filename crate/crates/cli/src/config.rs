//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! command = spectrum
//! domain = interval
//! grid = 100
//! ```
//!
//! Lists are comma separated. Optional keys are omitted when unset. Every
//! run writes the resolved configuration back out in this format, so a run
//! can be repeated with `thermoplate run <dir>/config.txt`.

use std::fmt;
use std::str::FromStr;

use thermoplate::bounded::{BCVariant, DomainSpec};
use thermoplate::symbol::roots;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Roots,
    Witness,
    Multscan,
    Lemma24,
    Sweep,
    Evolve,
    Spectrum,
    Decay,
    Converge,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Roots,
        Command::Witness,
        Command::Multscan,
        Command::Lemma24,
        Command::Sweep,
        Command::Evolve,
        Command::Spectrum,
        Command::Decay,
        Command::Converge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Roots => "roots",
            Command::Witness => "witness",
            Command::Multscan => "multscan",
            Command::Lemma24 => "lemma24",
            Command::Sweep => "sweep",
            Command::Evolve => "evolve",
            Command::Spectrum => "spectrum",
            Command::Decay => "decay",
            Command::Converge => "converge",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Interval,
    Rectangle,
}

impl DomainKind {
    pub fn dim(self) -> usize {
        match self {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::Interval => "interval",
            DomainKind::Rectangle => "rectangle",
        })
    }
}

impl FromStr for DomainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "interval" => Ok(DomainKind::Interval),
            "rectangle" => Ok(DomainKind::Rectangle),
            _ => Err(format!(
                "unknown domain `{s}` (expected interval or rectangle)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// Free edge with the tangential parameter `beta`.
    Free,
    /// Free edge of a rectangle with Poisson ratio `mu`.
    Free2d,
    /// Free edge with a boundary spring and Robin heat exchange.
    Lt,
}

impl fmt::Display for BcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BcKind::Free => "free",
            BcKind::Free2d => "free2d",
            BcKind::Lt => "lt",
        })
    }
}

impl FromStr for BcKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "free" => Ok(BcKind::Free),
            "free2d" => Ok(BcKind::Free2d),
            "lt" => Ok(BcKind::Lt),
            _ => Err(format!(
                "unknown boundary condition `{s}` (expected free, free2d or lt)"
            )),
        }
    }
}

/// Every parameter of a run. Fields unused by a command are carried along
/// unchanged so the file round-trips.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Output directory; defaults to `$THERMOPLATE_OUT/<command>`.
    pub out: Option<String>,
    pub seed: u64,
    /// Witness parameters `k`.
    pub k: Vec<f64>,
    pub dim: usize,
    pub lambda0: f64,
    pub theta: f64,
    pub max_alpha: u32,
    pub lambda_points: usize,
    pub xi_points: usize,
    /// Scaling index for `lemma24` and `sweep`; Sobolev index for `evolve`.
    pub j: i64,
    /// Torus points per axis.
    pub points: usize,
    /// Torus period per axis.
    pub period: f64,
    pub t_final: f64,
    pub steps: usize,
    pub domain: DomainKind,
    /// `a,b` or `a,b,c,d`; defaults to the unit interval or square.
    pub bounds: Option<Vec<f64>>,
    pub bc: BcKind,
    pub beta: f64,
    pub mu: f64,
    pub b: f64,
    /// Intervals per axis; one value applies to every axis.
    pub grid: Option<Vec<usize>>,
    /// Grid sequence for `converge`, each entry applied to every axis.
    pub grids: Vec<usize>,
    pub samples: usize,
    pub horizon: Option<f64>,
    pub zero_tol: Option<f64>,
    pub project: bool,
}

/// Documented keys, in serialization order.
pub const KEYS: [&str; 27] = [
    "command",
    "out",
    "seed",
    "k",
    "dim",
    "lambda0",
    "theta",
    "max_alpha",
    "lambda_points",
    "xi_points",
    "j",
    "points",
    "period",
    "t_final",
    "steps",
    "domain",
    "bounds",
    "bc",
    "beta",
    "mu",
    "b",
    "grid",
    "grids",
    "samples",
    "horizon",
    "zero_tol",
    "project",
];

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            out: None,
            seed: 0,
            k: vec![1.0, 10.0, 100.0],
            dim: 2,
            lambda0: 1.0,
            theta: 0.95 * roots().theta0,
            max_alpha: 3,
            lambda_points: 32,
            xi_points: 32,
            j: 0,
            points: 64,
            period: 2.0 * std::f64::consts::PI,
            t_final: 10.0,
            steps: 50,
            domain: DomainKind::Interval,
            bounds: None,
            bc: BcKind::Free,
            beta: thermoplate::bounded::DEFAULT_BETA,
            mu: thermoplate::bounded::DEFAULT_MU,
            b: 1.0,
            grid: None,
            grids: vec![50, 100, 200],
            samples: 40,
            horizon: None,
            zero_tol: None,
            project: true,
        }
    }

    /// Parse a complete file; `command` is required.
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let pairs = parse_pairs(text)?;
        let command = pairs
            .iter()
            .find(|(k, _)| k == "command")
            .ok_or_else(|| CliError::Config("missing `command`".into()))?;
        let command = command.1.parse().map_err(CliError::Config)?;
        let mut cfg = Self::new(command);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply a file on top of `self`. A `command` key must name this command.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (k, v) in parse_pairs(text)? {
            if k == "command" && v != self.command.name() {
                return Err(CliError::Config(format!(
                    "config is for `{v}`, not `{}`",
                    self.command
                )));
            }
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let err = |m: String| CliError::Config(format!("`{key}`: {m}"));
        match key {
            "command" => self.command = value.parse().map_err(err)?,
            "out" => {
                if value.is_empty() {
                    return Err(err("empty path".into()));
                }
                self.out = Some(value.to_string());
            }
            "seed" => self.seed = num(value).map_err(err)?,
            "k" => self.k = list(value).map_err(err)?,
            "dim" => self.dim = num(value).map_err(err)?,
            "lambda0" => self.lambda0 = float(value).map_err(err)?,
            "theta" => self.theta = float(value).map_err(err)?,
            "max_alpha" => self.max_alpha = num(value).map_err(err)?,
            "lambda_points" => self.lambda_points = num(value).map_err(err)?,
            "xi_points" => self.xi_points = num(value).map_err(err)?,
            "j" => self.j = num(value).map_err(err)?,
            "points" => self.points = num(value).map_err(err)?,
            "period" => self.period = float(value).map_err(err)?,
            "t_final" => self.t_final = float(value).map_err(err)?,
            "steps" => self.steps = num(value).map_err(err)?,
            "domain" => self.domain = value.parse().map_err(err)?,
            "bounds" => self.bounds = Some(list(value).map_err(err)?),
            "bc" => self.bc = value.parse().map_err(err)?,
            "beta" => self.beta = float(value).map_err(err)?,
            "mu" => self.mu = float(value).map_err(err)?,
            "b" => self.b = float(value).map_err(err)?,
            "grid" => self.grid = Some(list(value).map_err(err)?),
            "grids" => self.grids = list(value).map_err(err)?,
            "samples" => self.samples = num(value).map_err(err)?,
            "horizon" => self.horizon = Some(float(value).map_err(err)?),
            "zero_tol" => self.zero_tol = Some(float(value).map_err(err)?),
            "project" => self.project = num(value).map_err(err)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Range checks that do not depend on the command.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.k.iter().any(|k| !(*k > 0.0)) {
            return bad("witness parameters k must be positive".into());
        }
        if !(1..=3).contains(&self.dim) {
            return bad(format!("dim must be 1, 2 or 3, got {}", self.dim));
        }
        if self.lambda_points == 0 || self.xi_points == 0 {
            return bad("sample sizes must be positive".into());
        }
        if !(0..=2).contains(&self.j) {
            return bad(format!("j must be 0, 1 or 2, got {}", self.j));
        }
        if self.steps == 0 || self.samples < 2 {
            return bad("steps must be positive and samples at least 2".into());
        }
        if let Some(b) = &self.bounds {
            if b.len() != 2 * self.domain.dim() {
                return bad(format!(
                    "a {} needs {} bounds, got {}",
                    self.domain,
                    2 * self.domain.dim(),
                    b.len()
                ));
            }
        }
        if let Some(g) = &self.grid {
            if g.is_empty() || g.len() > self.domain.dim() {
                return bad(format!("grid needs 1 or {} sizes", self.domain.dim()));
            }
        }
        if self.grids.is_empty() {
            return bad("grids must be non-empty".into());
        }
        Ok(())
    }

    pub fn domain_spec(&self) -> DomainSpec {
        match (self.domain, self.bounds.as_deref()) {
            (DomainKind::Interval, Some(&[a, b])) => DomainSpec::Interval { a, b },
            (DomainKind::Rectangle, Some(&[a, b, c, d])) => DomainSpec::Rectangle { a, b, c, d },
            (DomainKind::Interval, _) => DomainSpec::unit_interval(),
            (DomainKind::Rectangle, _) => DomainSpec::unit_square(),
        }
    }

    pub fn bc_variant(&self) -> BCVariant {
        match self.bc {
            BcKind::Free => BCVariant::FreeBeta { beta: self.beta },
            BcKind::Free2d => BCVariant::Free2d { mu: self.mu },
            BcKind::Lt => BCVariant::LtVariant {
                mu: self.mu,
                b: self.b,
            },
        }
    }

    /// Grid sizes per axis; the default is 50 intervals on an interval and
    /// 16 per axis on a rectangle.
    pub fn grid_sizes(&self) -> Vec<usize> {
        let dim = self.domain.dim();
        match self.grid.as_deref() {
            Some([g]) => vec![*g; dim],
            Some(g) => g.to_vec(),
            None if dim == 1 => vec![50],
            None => vec![16; dim],
        }
    }

    pub fn grid_sequence(&self) -> Vec<Vec<usize>> {
        let dim = self.domain.dim();
        self.grids.iter().map(|&g| vec![g; dim]).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("command", self.command.to_string());
        if let Some(o) = &self.out {
            put("out", o.clone());
        }
        put("seed", self.seed.to_string());
        put("k", join(&self.k));
        put("dim", self.dim.to_string());
        put("lambda0", self.lambda0.to_string());
        put("theta", self.theta.to_string());
        put("max_alpha", self.max_alpha.to_string());
        put("lambda_points", self.lambda_points.to_string());
        put("xi_points", self.xi_points.to_string());
        put("j", self.j.to_string());
        put("points", self.points.to_string());
        put("period", self.period.to_string());
        put("t_final", self.t_final.to_string());
        put("steps", self.steps.to_string());
        put("domain", self.domain.to_string());
        if let Some(b) = &self.bounds {
            put("bounds", join(b));
        }
        put("bc", self.bc.to_string());
        put("beta", self.beta.to_string());
        put("mu", self.mu.to_string());
        put("b", self.b.to_string());
        if let Some(g) = &self.grid {
            put("grid", join(g));
        }
        put("grids", join(&self.grids));
        put("samples", self.samples.to_string());
        if let Some(h) = self.horizon {
            put("horizon", h.to_string());
        }
        if let Some(z) = self.zero_tol {
            put("zero_tol", z.to_string());
        }
        put("project", self.project.to_string());
        out
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!(
                "line {}: unknown key `{k}`",
                n + 1
            )));
        }
        if pairs.iter().any(|(p, _)| p == k) {
            return Err(CliError::Config(format!(
                "line {}: duplicate key `{k}`",
                n + 1
            )));
        }
        pairs.push((k.to_string(), v.to_string()));
    }
    Ok(pairs)
}

fn num<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse {s:?}"))
}

fn float(s: &str) -> Result<f64, String> {
    let x: f64 = num(s)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

trait ListItem: Sized {
    fn item(s: &str) -> Result<Self, String>;
}

impl ListItem for f64 {
    fn item(s: &str) -> Result<Self, String> {
        float(s)
    }
}

impl ListItem for usize {
    fn item(s: &str) -> Result<Self, String> {
        num(s)
    }
}

fn list<T: ListItem>(s: &str) -> Result<Vec<T>, String> {
    if s.is_empty() {
        return Err("empty list".into());
    }
    s.split(',').map(|p| T::item(p.trim())).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
