//! TOML run configuration.
//!
//! ```toml
//! [problem.delay]
//! a1 = 1.0
//! a2 = 1.0
//! tau = 1.0
//! l = "pi"
//! t_end = 3.0
//! psi = "sin(x)"
//!
//! [basis]
//! modes = 32
//!
//! [grid]
//! nx = 64
//! nt_per_tau = 16
//! ```
//!
//! Numeric fields accept either a number or a constant expression such as
//! `"pi"` or `"2*pi/3"`. Omitted data functions default to `"0"`.

use std::path::{Path, PathBuf};

use retard_heat::compat::DEFAULT_DELTA;
use retard_heat::field::{DelayGridSpec, GridSpec};
use retard_heat::funcspec::{FunctionSpec, Var};
use retard_heat::heat_delay::{DelayCoefficients, DelayHeatProblem, DEFAULT_PROP_TOL};
use retard_heat::heat_nodelay::{Conventions, HeatProblem, DEFAULT_COMP_TOL};
use retard_heat::oracle_fd::FdConfig;
use retard_heat::quadrature::QuadratureConfig;
use retard_heat::spectral::{EigenBasis, DEFAULT_FIT_SLACK};
use serde::Deserialize;

use crate::CliError;

/// A number, or a string holding a constant expression.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    pub fn value(&self, name: &str) -> Result<f64, CliError> {
        match self {
            Scalar::Number(v) => Ok(*v),
            Scalar::Expr(src) => {
                let f = FunctionSpec::parse(src).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
                if f.depends_on(Var::X) || f.depends_on(Var::T) {
                    return Err(CliError::Config(format!("{name} must be constant, got `{src}`")));
                }
                f.eval(0.0, 0.0).map_err(|e| CliError::Config(format!("{name}: {e}")))
            }
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::Number(0.0)
    }
}

fn zero_fn() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatSpec {
    pub a: Scalar,
    #[serde(default)]
    pub b: Scalar,
    #[serde(default)]
    pub c: Scalar,
    pub l: Scalar,
    pub t_end: Scalar,
    #[serde(default = "zero_fn")]
    pub g: String,
    #[serde(default = "zero_fn")]
    pub psi: String,
    #[serde(default = "zero_fn")]
    pub theta1: String,
    #[serde(default = "zero_fn")]
    pub theta2: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySpec {
    pub a1: Scalar,
    pub a2: Scalar,
    #[serde(default)]
    pub b1: Scalar,
    #[serde(default)]
    pub b2: Scalar,
    #[serde(default)]
    pub d1: Scalar,
    #[serde(default)]
    pub d2: Scalar,
    pub tau: Scalar,
    pub l: Scalar,
    pub t_end: Scalar,
    #[serde(default = "zero_fn")]
    pub g: String,
    #[serde(default = "zero_fn")]
    pub psi: String,
    #[serde(default = "zero_fn")]
    pub theta1: String,
    #[serde(default = "zero_fn")]
    pub theta2: String,
}

/// Exactly one of `[problem.heat]` or `[problem.delay]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemSpec {
    Heat(HeatSpec),
    Delay(DelaySpec),
}

/// A validated problem.
#[derive(Debug, Clone)]
pub enum Problem {
    Heat(HeatProblem),
    Delay(DelayHeatProblem),
}

impl Problem {
    pub fn l(&self) -> f64 {
        match self {
            Problem::Heat(p) => p.l,
            Problem::Delay(p) => p.l,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Heat(_) => "heat",
            Problem::Delay(_) => "delay",
        }
    }
}

fn parse_fn(name: &str, src: &str) -> Result<FunctionSpec, CliError> {
    FunctionSpec::parse(src).map_err(|e| CliError::Config(format!("{name}: {e}")))
}

/// `g`, `psi`, `theta1`, `theta2`.
fn data_fns(srcs: [&str; 4]) -> Result<[FunctionSpec; 4], CliError> {
    let [g, psi, th1, th2] = srcs;
    Ok([parse_fn("g", g)?, parse_fn("psi", psi)?, parse_fn("theta1", th1)?, parse_fn("theta2", th2)?])
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem, CliError> {
        match self {
            ProblemSpec::Heat(h) => {
                let [g, psi, theta1, theta2] = data_fns([&h.g, &h.psi, &h.theta1, &h.theta2])?;
                let (l, t_end) = (h.l.value("l")?, h.t_end.value("t_end")?);
                let p = HeatProblem::new(h.a.value("a")?, h.b.value("b")?, h.c.value("c")?, l, t_end, g, psi, theta1, theta2)?;
                Ok(Problem::Heat(p))
            }
            ProblemSpec::Delay(d) => {
                let [g, psi, theta1, theta2] = data_fns([&d.g, &d.psi, &d.theta1, &d.theta2])?;
                let (l, t_end) = (d.l.value("l")?, d.t_end.value("t_end")?);
                let k = DelayCoefficients {
                    a1: d.a1.value("a1")?,
                    a2: d.a2.value("a2")?,
                    b1: d.b1.value("b1")?,
                    b2: d.b2.value("b2")?,
                    d1: d.d1.value("d1")?,
                    d2: d.d2.value("d2")?,
                };
                let p = DelayHeatProblem::new(k, d.tau.value("tau")?, l, t_end, g, psi, theta1, theta2)?;
                Ok(Problem::Delay(p))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSpec {
    pub modes: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self { modes: 32 }
    }
}

/// Output grid. `nt` applies without delay, `nt_per_tau` with delay.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub nt: usize,
    pub nt_per_tau: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nx: 64, nt: 64, nt_per_tau: 16 }
    }
}

impl GridConfig {
    pub fn plain(&self) -> GridSpec {
        GridSpec { nx: self.nx, nt: self.nt }
    }

    pub fn delay(&self) -> DelayGridSpec {
        DelayGridSpec { nx: self.nx, nt_per_tau: self.nt_per_tau }
    }
}

/// Tolerances and thresholds for the compatibility checker.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSpec {
    /// Smoothness order `m` of the decay conditions.
    pub m: u32,
    pub delta: f64,
    pub fit_slack: f64,
    pub comp_tol: f64,
    pub prop_tol: f64,
    /// Sample times per residual check.
    pub samples: usize,
}

impl Default for CheckSpec {
    fn default() -> Self {
        Self {
            m: 1,
            delta: DEFAULT_DELTA,
            fit_slack: DEFAULT_FIT_SLACK,
            comp_tol: DEFAULT_COMP_TOL,
            prop_tol: DEFAULT_PROP_TOL,
            samples: 32,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub field_csv: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
}

/// Spectral resolutions of a sweep; FD references are refined `fd_levels`
/// times from `[fd]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub modes: Vec<usize>,
    pub fd_levels: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { modes: vec![8, 16, 32, 64], fd_levels: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub basis: BasisSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub conventions: Conventions,
    #[serde(default)]
    pub fd: FdConfig,
    #[serde(default)]
    pub check: CheckSpec,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub sweep: SweepSpec,
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.quadrature.validate()?;
        self.fd.validate()?;
        if self.basis.modes == 0 {
            return Err(CliError::Config("basis.modes must be positive".into()));
        }
        if self.grid.nx == 0 || self.grid.nt == 0 || self.grid.nt_per_tau == 0 {
            return Err(CliError::Config("grid sizes must be positive".into()));
        }
        if self.sweep.modes.is_empty() || self.sweep.modes.contains(&0) {
            return Err(CliError::Config("sweep.modes must be nonempty and positive".into()));
        }
        Ok(())
    }

    pub fn basis(&self, l: f64) -> Result<EigenBasis, CliError> {
        Ok(EigenBasis::new(l, self.basis.modes)?)
    }
}
