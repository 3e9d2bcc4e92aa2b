//! The `check`, `solve`, `compare` and `sweep` subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use retard_heat::compat::{
    check_compatibility_delay, check_corollary_conditions, check_decay_conditions, check_nodelay_conditions, CompatReport,
    MIN_MODES,
};
use retard_heat::field::{compare_fields, FieldMeta, OracleDiffReport, SolutionField};
use retard_heat::heat_delay::{reduce_delay, solve_delay, ModeSystem};
use retard_heat::heat_nodelay::solve as solve_nodelay;
use retard_heat::oracle_fd::{fd_solve_delay, fd_solve_nodelay, richardson_estimate, richardson_extrapolate, FdConfig};
use retard_heat::spectral::EigenBasis;
use serde::Serialize;

use crate::config::{Problem, RunConfig};
use crate::CliError;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub modes: Option<usize>,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub nt_per_tau: Option<usize>,
    pub out_field: Option<PathBuf>,
    pub out_report: Option<PathBuf>,
    pub override_advisory: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(n) = self.modes {
            cfg.basis.modes = n;
        }
        if let Some(n) = self.nx {
            cfg.grid.nx = n;
        }
        if let Some(n) = self.nt {
            cfg.grid.nt = n;
        }
        if let Some(n) = self.nt_per_tau {
            cfg.grid.nt_per_tau = n;
        }
        if self.out_field.is_some() {
            cfg.outputs.field_csv = self.out_field.clone();
        }
        if self.out_report.is_some() {
            cfg.outputs.report_json = self.out_report.clone();
        }
        cfg.validate()
    }
}

/// An output file opened before any computation, so an unwritable path
/// fails fast.
struct Sink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Sink {
    fn open(path: Option<&Path>) -> Result<Option<Self>, CliError> {
        path.map(|p| {
            let file = File::create(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            Ok(Sink {
                path: p.to_path_buf(),
                out: BufWriter::new(file),
            })
        })
        .transpose()
    }

    fn finish(mut self, bytes: &[u8]) -> Result<(), CliError> {
        let io = |source| CliError::Io {
            path: self.path.display().to_string(),
            source,
        };
        self.out.write_all(bytes).map_err(io)?;
        self.out.flush().map_err(io)
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s.into_bytes()
}

#[derive(Debug, Serialize)]
pub struct CheckOutput {
    pub mode: &'static str,
    pub problem: &'static str,
    pub modes: usize,
    pub compat: CompatReport,
    pub hard_failure: bool,
    pub advisory_failure: bool,
    /// Why decay proxies were not evaluated, if they were not.
    pub decay_skipped: Option<String>,
}

fn run_checks(cfg: &RunConfig, problem: &Problem) -> Result<CheckOutput, CliError> {
    let basis = cfg.basis(problem.l())?;
    let chk = cfg.check;
    let mut skipped = None;
    let compat = match problem {
        Problem::Heat(p) => {
            if basis.n < MIN_MODES {
                skipped = Some(format!("need at least {MIN_MODES} modes, got {}", basis.n));
            }
            check_nodelay_conditions(p, basis, &cfg.quadrature, cfg.conventions, chk.comp_tol, chk.samples)?
        }
        Problem::Delay(p) => {
            let mut r = check_compatibility_delay(p, chk.comp_tol)?;
            if basis.n < MIN_MODES {
                skipped = Some(format!("need at least {MIN_MODES} modes, got {}", basis.n));
            } else {
                // Decay proxies are reported even when the corners mismatch.
                let rp = reduce_delay(p, chk.prop_tol, f64::INFINITY)?;
                let ms = ModeSystem::build(&rp, basis, &cfg.quadrature)?;
                r = r.merge(check_decay_conditions(&ms, chk.m, chk.delta, chk.fit_slack)?);
            }
            r.merge(check_corollary_conditions(p, chk.m, chk.comp_tol, chk.samples)?)
        }
    };
    Ok(CheckOutput {
        mode: "check",
        problem: problem.kind(),
        modes: basis.n,
        hard_failure: compat.hard_failure(),
        advisory_failure: compat.advisory_failure(),
        compat,
        decay_skipped: skipped,
    })
}

/// Runs the compatibility checker and writes its report. Hard failures are
/// returned as errors; advisory ones are only reported.
pub fn check(cfg: &RunConfig) -> Result<CheckOutput, CliError> {
    let report = Sink::open(cfg.outputs.report_json.as_deref())?;
    let problem = cfg.problem.build()?;
    let out = run_checks(cfg, &problem)?;
    if let Some(s) = report {
        s.finish(&to_json(&out))?;
    }
    if out.hard_failure {
        return Err(CliError::Compatibility(failed_names(&out.compat)));
    }
    Ok(out)
}

fn failed_names(r: &CompatReport) -> String {
    use retard_heat::compat::CheckStatus::Fail;
    let mut names: Vec<&str> = r.boundary_checks.iter().filter(|c| c.status == Fail).map(|c| c.name.as_str()).collect();
    names.extend(r.decay_results.iter().filter(|c| c.status == Fail).map(|c| c.name.as_str()));
    names.extend(r.corollary_checks.iter().filter(|c| c.status == Fail).map(|c| c.name.as_str()));
    names.join("; ")
}

fn spectral(cfg: &RunConfig, problem: &Problem, modes: usize) -> Result<SolutionField, CliError> {
    let basis = EigenBasis::new(problem.l(), modes)?;
    let chk = cfg.check;
    Ok(match problem {
        Problem::Heat(p) => solve_nodelay(p, basis, cfg.grid.plain(), &cfg.quadrature, cfg.conventions, chk.comp_tol)?,
        Problem::Delay(p) => solve_delay(p, basis, cfg.grid.delay(), &cfg.quadrature, chk.prop_tol, chk.comp_tol)?,
    })
}

fn finite_difference(problem: &Problem, fd: &FdConfig) -> Result<SolutionField, CliError> {
    Ok(match problem {
        Problem::Heat(p) => fd_solve_nodelay(p, fd)?,
        Problem::Delay(p) => fd_solve_delay(p, fd)?,
    })
}

#[derive(Debug, Serialize)]
pub struct SolveOutput {
    pub mode: &'static str,
    pub problem: &'static str,
    pub field: FieldMeta,
    pub sup_norm: f64,
    pub compat: CompatReport,
    pub advisory_overridden: bool,
}

/// Checks, then solves with the spectral method and writes the field as CSV.
pub fn solve(cfg: &RunConfig, override_advisory: bool) -> Result<SolveOutput, CliError> {
    let field_sink = Sink::open(cfg.outputs.field_csv.as_deref())?;
    let report = Sink::open(cfg.outputs.report_json.as_deref())?;
    let problem = cfg.problem.build()?;
    let checks = run_checks(cfg, &problem)?;
    let gate = if checks.hard_failure {
        Some(CliError::Compatibility(failed_names(&checks.compat)))
    } else if checks.advisory_failure && !override_advisory {
        Some(CliError::Advisory(failed_names(&checks.compat)))
    } else {
        None
    };
    if let Some(err) = gate {
        if let Some(s) = report {
            s.finish(&to_json(&checks))?;
        }
        return Err(err);
    }
    let field = spectral(cfg, &problem, cfg.basis.modes)?;
    let out = SolveOutput {
        mode: "solve",
        problem: problem.kind(),
        field: field.meta.clone(),
        sup_norm: field.sup_norm(),
        advisory_overridden: checks.advisory_failure,
        compat: checks.compat,
    };
    if let Some(s) = field_sink {
        s.finish(field.to_csv_string().as_bytes())?;
    }
    if let Some(s) = report {
        s.finish(&to_json(&out))?;
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct CompareOutput {
    pub mode: &'static str,
    pub problem: &'static str,
    pub spectral: FieldMeta,
    pub oracle: FieldMeta,
    pub diff: OracleDiffReport,
    /// Richardson estimate of the oracle's own error, from a run on a grid
    /// coarser by two.
    pub oracle_error_estimate: f64,
    /// `diff.sup / oracle_error_estimate`.
    pub ratio: f64,
}

fn halved(fd: &FdConfig) -> Result<FdConfig, CliError> {
    let even = |n: usize| n.is_multiple_of(2);
    if !even(fd.nx) || !even(fd.nt) || !even(fd.nt_per_tau) {
        return Err(CliError::Config("compare needs even fd.nx, fd.nt and fd.nt_per_tau".into()));
    }
    Ok(FdConfig {
        nx: fd.nx / 2,
        nt: fd.nt / 2,
        nt_per_tau: fd.nt_per_tau / 2,
        scheme: fd.scheme,
    })
}

/// Spectral and finite-difference solves on nested grids. The CSV lists
/// `x,t,spectral,fd,diff` on the spectral grid.
pub fn compare(cfg: &RunConfig) -> Result<CompareOutput, CliError> {
    let field_sink = Sink::open(cfg.outputs.field_csv.as_deref())?;
    let report = Sink::open(cfg.outputs.report_json.as_deref())?;
    let coarse_cfg = halved(&cfg.fd)?;
    let problem = cfg.problem.build()?;
    let sp = spectral(cfg, &problem, cfg.basis.modes)?;
    let fd = finite_difference(&problem, &cfg.fd)?;
    let diff = compare_fields(&sp, &fd)?;
    let coarse = finite_difference(&problem, &coarse_cfg)?;
    let est = richardson_estimate(&coarse, &fd, cfg.fd.scheme.order())?;
    if let Some(s) = field_sink {
        s.finish(&comparison_csv(&sp, &fd)?)?;
    }
    let out = CompareOutput {
        mode: "compare",
        problem: problem.kind(),
        spectral: sp.meta.clone(),
        oracle: fd.meta.clone(),
        ratio: diff.sup / est,
        diff,
        oracle_error_estimate: est,
    };
    if let Some(s) = report {
        s.finish(&to_json(&out))?;
    }
    Ok(out)
}

fn comparison_csv(sp: &SolutionField, fd: &SolutionField) -> Result<Vec<u8>, CliError> {
    let fx = (fd.nx() - 1) / (sp.nx() - 1).max(1);
    let ft = (fd.nt() - 1) / (sp.nt() - 1).max(1);
    let mut out = String::from("x,t,spectral,fd,diff\n");
    for (it, t) in sp.ts.iter().enumerate() {
        for (ix, x) in sp.xs.iter().enumerate() {
            let (a, b) = (sp.at(it, ix), fd.at(it * ft, ix * fx));
            out.push_str(&format!("{x:.16e},{t:.16e},{a:.16e},{b:.16e},{:.16e}\n", a - b));
        }
    }
    Ok(out.into_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// `"spectral"` or `"fd"`.
    pub kind: &'static str,
    pub modes: Option<usize>,
    pub nx: usize,
    pub nt: usize,
    pub sup: f64,
    pub l2: f64,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct SweepOutput {
    pub mode: &'static str,
    pub problem: &'static str,
    pub reference: FieldMeta,
    pub rows: Vec<SweepRow>,
}

/// Errors of spectral solves over `sweep.modes` and of finite-difference
/// solves over `sweep.fd_levels` refinements, all measured against a
/// Richardson-extrapolated finite-difference reference.
pub fn sweep(cfg: &RunConfig) -> Result<SweepOutput, CliError> {
    let table = Sink::open(cfg.outputs.field_csv.as_deref())?;
    let report = Sink::open(cfg.outputs.report_json.as_deref())?;
    if cfg.sweep.fd_levels == 0 {
        return Err(CliError::Config("sweep.fd_levels must be at least 1".into()));
    }
    let problem = cfg.problem.build()?;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    let mut fd_cfg = cfg.fd;
    for _ in 0..=cfg.sweep.fd_levels {
        let start = Instant::now();
        let f = finite_difference(&problem, &fd_cfg)?;
        levels.push((f, fd_cfg, start.elapsed().as_secs_f64()));
        fd_cfg = fd_cfg.refined();
    }
    let last = levels.len() - 1;
    let reference = richardson_extrapolate(&levels[last - 1].0, &levels[last].0, cfg.fd.scheme.order())?;
    for (f, c, seconds) in &levels[..last] {
        let d = compare_fields(f, &reference)?;
        rows.push(SweepRow {
            kind: "fd",
            modes: None,
            nx: c.nx,
            nt: f.nt() - 1,
            sup: d.sup,
            l2: d.l2,
            seconds: *seconds,
        });
    }
    for &n in &cfg.sweep.modes {
        let start = Instant::now();
        let sp = spectral(cfg, &problem, n)?;
        let seconds = start.elapsed().as_secs_f64();
        let d = compare_fields(&sp, &reference)?;
        rows.push(SweepRow {
            kind: "spectral",
            modes: Some(n),
            nx: sp.nx() - 1,
            nt: sp.nt() - 1,
            sup: d.sup,
            l2: d.l2,
            seconds,
        });
    }
    if let Some(s) = table {
        let mut csv = String::from("kind,modes,nx,nt,sup,l2,seconds\n");
        for r in &rows {
            let modes = r.modes.map(|n| n.to_string()).unwrap_or_default();
            csv.push_str(&format!("{},{modes},{},{},{:.6e},{:.6e},{:.3}\n", r.kind, r.nx, r.nt, r.sup, r.l2, r.seconds));
        }
        s.finish(csv.as_bytes())?;
    }
    let out = SweepOutput {
        mode: "sweep",
        problem: problem.kind(),
        reference: reference.meta,
        rows,
    };
    if let Some(s) = report {
        s.finish(&to_json(&out))?;
    }
    Ok(out)
}
