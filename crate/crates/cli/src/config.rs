//! Run configuration: TOML sections, `--set` overrides and validation.

use std::path::{Path, PathBuf};

use fpshock::profiles::{ProfileOptions, ReducedParams};
use fpshock::PressureLaw;
use serde::Deserialize;
use thiserror::Error;

pub const OUTPUT_DIR_ENV: &str = "FPSHOCK_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("bad override `{0}`: expected section.key=value")]
    Override(String),

    #[error("{0}")]
    Invalid(String),

    #[error("contradictory inputs: {0}")]
    Contradiction(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Burgers,
    Euler,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelChoice,
    /// Pressure law p(n) = C n^γ.
    pub c: f64,
    pub gamma: f64,
    pub theta: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { kind: ModelChoice::Euler, c: 1.0, gamma: 2.0, theta: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchChoice {
    Plus,
    Minus,
    Both,
}

/// Base state in primitive variables. `n` is ignored for Burgers.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateSection {
    pub n: Option<f64>,
    pub rho: Option<f64>,
    pub u: Option<f64>,
    pub branch: BranchChoice,
    /// Branch parameter (ρ for Burgers) of the far state of a Burgers profile.
    pub param: Option<f64>,
}

impl Default for StateSection {
    fn default() -> Self {
        Self { n: None, rho: None, u: None, branch: BranchChoice::Both, param: None }
    }
}

impl StateSection {
    fn any(&self) -> bool {
        self.n.is_some() || self.rho.is_some() || self.u.is_some()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReducedSection {
    pub tau: Option<f64>,
    /// τ as a multiple of τ_#(κ).
    pub tau_over_sharp: Option<f64>,
    pub kappa: Option<f64>,
    pub n_star: f64,
    pub u_sign: f64,
}

impl Default for ReducedSection {
    fn default() -> Self {
        Self { tau: None, tau_over_sharp: None, kappa: None, n_star: 1.0, u_sign: 1.0 }
    }
}

impl ReducedSection {
    fn any(&self) -> bool {
        self.tau.is_some() || self.tau_over_sharp.is_some() || self.kappa.is_some()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub n_kappa: usize,
    /// κ values of the g_κ tables.
    pub kappas: Vec<f64>,
    pub n_min: f64,
    pub n_max: f64,
    pub n_points: usize,
    /// Hugoniot parameter range; defaults to [0.2, 5] times the base value.
    pub param_min: Option<f64>,
    pub param_max: Option<f64>,
    pub n_samples: usize,
    /// Frequency grid of the Majda–Pego and det M scans.
    pub xi_max: f64,
    pub n_xi: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            kappa_min: 0.05,
            kappa_max: 12.0,
            n_kappa: 240,
            kappas: vec![0.5, 1.0, 2.0, 3.0, 5.0],
            n_min: 0.05,
            n_max: 4.0,
            n_points: 200,
            param_min: None,
            param_max: None,
            n_samples: 101,
            xi_max: 50.0,
            n_xi: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolveMode {
    /// Step initial data between `left` and `right`.
    Riemann,
    /// Perturbed viscous profile.
    Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionChoice {
    FirstOrder,
    Muscl,
    VanLeer,
    Central,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub mode: EvolveMode,
    pub eps: f64,
    pub cfl_hyp: f64,
    pub cfl_visc: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub reconstruction: ReconstructionChoice,
    pub max_steps: usize,
    pub n_cells: usize,
    pub x_left: Option<f64>,
    pub x_right: Option<f64>,
    pub x_split: f64,
    /// Primitive states of the Riemann data.
    pub left: Option<Vec<f64>>,
    pub right: Option<Vec<f64>>,
    pub amplitude: f64,
    pub width: f64,
    pub component: usize,
    pub offset: f64,
    /// Crossing level used to track the front; midpoint of component 0 by default.
    pub level: Option<f64>,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            mode: EvolveMode::Riemann,
            eps: 0.01,
            cfl_hyp: 0.5,
            cfl_visc: 0.4,
            t_end: 1.0,
            snapshot_every: 50,
            reconstruction: ReconstructionChoice::Muscl,
            max_steps: 10_000_000,
            n_cells: 400,
            x_left: None,
            x_right: None,
            x_split: 1.0,
            left: None,
            right: None,
            amplitude: 0.0,
            width: 0.1,
            component: 0,
            offset: 0.0,
            level: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { rtol: None, atol: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// Significant digits of every number written.
    pub precision: usize,
    /// File stem; `{command}` expands to the subcommand name.
    pub name: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: None, precision: 15, name: "{command}".into() }
    }
}

impl OutputSection {
    pub fn stem(&self, command: &str) -> String {
        self.name.replace("{command}", &command.replace('-', "_"))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub state: StateSection,
    pub reduced: ReducedSection,
    pub sweep: SweepSection,
    pub evolve: EvolveSection,
    pub solver: SolverSection,
    pub output: OutputSection,
}

/// Reads `path` (if any), applies `section.key=value` overrides and validates.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.into(), source })?;
            text.parse::<toml::Table>().map_err(|e| ConfigError::Parse(e.to_string()))?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let bad = || ConfigError::Override(item.to_string());
    let (key, raw) = item.split_once('=').ok_or_else(bad)?;
    let (section, field) = key.trim().split_once('.').ok_or_else(bad)?;
    if section.is_empty() || field.is_empty() {
        return Err(bad());
    }
    // bare words that are not valid TOML values are taken as strings
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), value);
            Ok(())
        }
        _ => Err(bad()),
    }
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        positive("model.c", m.c)?;
        if !(m.gamma > 1.0) {
            return Err(invalid(format!("model.gamma must exceed 1, got {}", m.gamma)));
        }
        if !(m.theta >= 0.0 && m.theta.is_finite()) {
            return Err(invalid(format!("model.theta must be non-negative, got {}", m.theta)));
        }
        let r = &self.reduced;
        if let Some(tau) = r.tau {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(invalid(format!("τ must lie in (0,1), got {tau}")));
            }
        }
        if let Some(q) = r.tau_over_sharp {
            positive("reduced.tau_over_sharp", q)?;
        }
        if r.tau.is_some() && r.tau_over_sharp.is_some() {
            return Err(ConfigError::Contradiction("give either reduced.tau or reduced.tau_over_sharp".into()));
        }
        if let Some(k) = r.kappa {
            positive("reduced.kappa", k)?;
        }
        positive("reduced.n_star", r.n_star)?;
        if r.u_sign != 1.0 && r.u_sign != -1.0 {
            return Err(invalid("reduced.u_sign must be 1 or -1"));
        }
        for (name, v) in [("state.n", self.state.n), ("state.rho", self.state.rho)] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        let s = &self.sweep;
        positive("sweep.kappa_min", s.kappa_min)?;
        positive("sweep.n_min", s.n_min)?;
        positive("sweep.xi_max", s.xi_max)?;
        if !(s.kappa_max > s.kappa_min) || !(s.n_max > s.n_min) {
            return Err(invalid("sweep ranges must have max > min"));
        }
        if s.n_kappa < 2 || s.n_points < 2 || s.n_samples < 2 || s.n_xi < 2 {
            return Err(invalid("sweep sample counts must be at least 2"));
        }
        for k in &s.kappas {
            positive("sweep.kappas", *k)?;
        }
        let e = &self.evolve;
        positive("evolve.eps", e.eps)?;
        positive("evolve.t_end", e.t_end)?;
        positive("evolve.width", e.width)?;
        if e.n_cells < 16 {
            return Err(invalid("evolve.n_cells must be at least 16"));
        }
        if let Some(v) = self.solver.rtol {
            positive("solver.rtol", v)?;
        }
        if let Some(v) = self.solver.atol {
            positive("solver.atol", v)?;
        }
        if !(6..=17).contains(&self.output.precision) {
            return Err(invalid(format!("output.precision must lie in [6, 17], got {}", self.output.precision)));
        }
        Ok(())
    }

    pub fn law(&self) -> fpshock::Result<PressureLaw> {
        PressureLaw::gamma_law(self.model.c, self.model.gamma)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn profile_options(&self, base: ProfileOptions) -> ProfileOptions {
        ProfileOptions {
            rtol: self.solver.rtol.unwrap_or(base.rtol),
            atol: self.solver.atol.unwrap_or(base.atol),
            ..base
        }
    }

    /// Primitive base state, all of (n, ρ, u) for Euler and (ρ, u) for Burgers.
    pub fn base_state(&self) -> Result<Vec<f64>, ConfigError> {
        let s = &self.state;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| invalid(format!("state.{name} is required")));
        match self.model.kind {
            ModelChoice::Burgers => Ok(vec![need(s.rho, "rho")?, need(s.u, "u")?]),
            ModelChoice::Euler => Ok(vec![need(s.n, "n")?, need(s.rho, "rho")?, need(s.u, "u")?]),
        }
    }

    /// Reduced parameters for Euler profile runs, from either the raw base
    /// state or (τ, κ, n*). When both are given they must agree.
    pub fn reduced_params(&self) -> Result<ReducedParams, CliError> {
        let law = self.law()?;
        let theta = self.model.theta;
        let r = &self.reduced;
        let from_state = if self.state.any() {
            let b = self.base_state()?;
            Some(ReducedParams::new(b[0], b[0] + b[1], b[2], &law, theta)?)
        } else {
            None
        };
        if !r.any() {
            return from_state.ok_or_else(|| invalid("profile runs need [state] or [reduced] parameters").into());
        }
        let kappa = r.kappa.ok_or_else(|| invalid("reduced.kappa is required"))?;
        let reduced = match (r.tau, r.tau_over_sharp) {
            (Some(tau), None) => ReducedParams::from_reduced(tau, kappa, r.n_star, r.u_sign, &law, theta)?,
            (None, Some(q)) => ReducedParams::from_tau_ratio(q, kappa, r.n_star, r.u_sign, &law, theta)?,
            _ => return Err(invalid("reduced needs one of tau, tau_over_sharp").into()),
        };
        match from_state {
            None => Ok(reduced),
            Some(p) => {
                let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
                if close(p.tau, reduced.tau)
                    && close(p.kappa, reduced.kappa)
                    && close(p.n_star, reduced.n_star)
                    && p.u_sign == reduced.u_sign
                {
                    Ok(p)
                } else {
                    Err(ConfigError::Contradiction(format!(
                        "base state gives (tau, kappa, n_star, u_sign) = ({}, {}, {}, {}), [reduced] gives ({}, {}, {}, {})",
                        p.tau, p.kappa, p.n_star, p.u_sign, reduced.tau, reduced.kappa, reduced.n_star, reduced.u_sign
                    ))
                    .into())
                }
            }
        }
    }
}

/// Everything a run can fail with.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] fpshock::Error),

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            _ => 1,
        }
    }
}
