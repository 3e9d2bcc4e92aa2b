//! Finite-difference reference solver for both problems.
//!
//! Central differences in space, a theta scheme in time (Crank-Nicolson or
//! backward Euler), Dirichlet rows pinned to the boundary data. The delay
//! problem is marched by the method of steps: with `dt = tau / M` the delayed
//! terms at every step read rows that are already stored.
//!
//! This module deliberately shares no code with the series solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{compare_fields, delay_times, uniform, FieldMeta, SolutionField};
use crate::funcspec::FunctionSpec;
use crate::problem::{DelayHeatProblem, HeatProblem};
use crate::tridiag::solve_in_place;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    CrankNicolson,
    BackwardEuler,
}

impl Scheme {
    /// Implicit weight.
    fn theta(self) -> f64 {
        match self {
            Scheme::CrankNicolson => 0.5,
            Scheme::BackwardEuler => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::CrankNicolson => "crank_nicolson",
            Scheme::BackwardEuler => "backward_euler",
        }
    }

    /// Formal order in time.
    pub fn order(self) -> f64 {
        match self {
            Scheme::CrankNicolson => 2.0,
            Scheme::BackwardEuler => 1.0,
        }
    }
}

/// `nx` spatial intervals; `nt` steps on `[0, T]` without delay, or
/// `nt_per_tau` steps per delay interval with delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FdConfig {
    pub nx: usize,
    pub nt: usize,
    pub nt_per_tau: usize,
    pub scheme: Scheme,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            nx: 200,
            nt: 400,
            nt_per_tau: 200,
            scheme: Scheme::CrankNicolson,
        }
    }
}

impl FdConfig {
    pub fn new(nx: usize, nt: usize, scheme: Scheme) -> Self {
        Self {
            nx,
            nt,
            nt_per_tau: nt,
            scheme,
        }
    }

    pub fn per_tau(nx: usize, nt_per_tau: usize, scheme: Scheme) -> Self {
        Self {
            nx,
            nt: nt_per_tau,
            nt_per_tau,
            scheme,
        }
    }

    /// Both resolutions doubled.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx,
            nt: 2 * self.nt,
            nt_per_tau: 2 * self.nt_per_tau,
            scheme: self.scheme,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 16 {
            return Err(Error::Input(format!("fd grid needs nx >= 16, got {}", self.nx)));
        }
        if self.nt == 0 || self.nt_per_tau == 0 {
            return Err(Error::Input("fd time steps must be positive".into()));
        }
        Ok(())
    }
}

/// `k2 u_xx + k1 u_x + k0 u` on interior nodes.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    lower: f64,
    diag: f64,
    upper: f64,
}

impl Stencil {
    fn new(k2: f64, k1: f64, k0: f64, dx: f64) -> Self {
        let d2 = k2 / (dx * dx);
        let d1 = k1 / (2.0 * dx);
        Self {
            lower: d2 - d1,
            diag: -2.0 * d2 + k0,
            upper: d2 + d1,
        }
    }

    fn apply(&self, row: &[f64], i: usize) -> f64 {
        self.lower * row[i - 1] + self.diag * row[i] + self.upper * row[i + 1]
    }
}

/// The tridiagonal system `(I - theta dt A) v_new = rhs` with pinned ends.
struct Stepper {
    theta: f64,
    dt: f64,
    op: Stencil,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    fn new(op: Stencil, nodes: usize, dt: f64, scheme: Scheme) -> Self {
        Self {
            theta: scheme.theta(),
            dt,
            op,
            lower: vec![0.0; nodes],
            diag: vec![0.0; nodes],
            upper: vec![0.0; nodes],
            scratch: vec![0.0; nodes],
        }
    }

    /// Advances `old` to `new`; `extra[i]` is the time-averaged source.
    fn step(&mut self, old: &[f64], extra: &[f64], left: f64, right: f64, new: &mut [f64]) -> Result<()> {
        let n = old.len();
        let (th, dt) = (self.theta, self.dt);
        for i in 1..n - 1 {
            self.lower[i] = -th * dt * self.op.lower;
            self.diag[i] = 1.0 - th * dt * self.op.diag;
            self.upper[i] = -th * dt * self.op.upper;
            new[i] = old[i] + (1.0 - th) * dt * self.op.apply(old, i) + dt * extra[i];
        }
        self.diag[0] = 1.0;
        self.upper[0] = 0.0;
        self.lower[n - 1] = 0.0;
        self.diag[n - 1] = 1.0;
        new[0] = left;
        new[n - 1] = right;
        solve_in_place(&self.lower, &self.diag, &self.upper, new, &mut self.scratch)
    }
}

fn sample_row(f: &FunctionSpec, xs: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
    for (o, &x) in out.iter_mut().zip(xs) {
        *o = f.eval(x, t)?;
    }
    Ok(())
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().find(|v| !v.is_finite()) {
        Some(bad) => Err(Error::Numeric(format!("fd solution produced {bad}"))),
        None => Ok(()),
    }
}

/// Reference solution of the problem without delay on `(nx + 1) x (nt + 1)`
/// nodes.
pub fn fd_solve_nodelay(p: &HeatProblem, cfg: &FdConfig) -> Result<SolutionField> {
    p.validate()?;
    cfg.validate()?;
    let xs = uniform(0.0, p.l, cfg.nx);
    let ts = uniform(0.0, p.t_end, cfg.nt);
    let (dx, dt) = (p.l / cfg.nx as f64, p.t_end / cfg.nt as f64);
    let nodes = xs.len();
    let th = cfg.scheme.theta();
    let mut stepper = Stepper::new(Stencil::new(p.a * p.a, p.b, p.c, dx), nodes, dt, cfg.scheme);

    let mut v = vec![0.0; nodes * ts.len()];
    sample_row(&p.psi, &xs, 0.0, &mut v[..nodes])?;
    let mut g_old = vec![0.0; nodes];
    let mut g_new = vec![0.0; nodes];
    let mut extra = vec![0.0; nodes];
    let mut next = vec![0.0; nodes];
    sample_row(&p.g, &xs, 0.0, &mut g_old)?;
    for k in 0..cfg.nt {
        let t1 = ts[k + 1];
        sample_row(&p.g, &xs, t1, &mut g_new)?;
        for i in 0..nodes {
            extra[i] = th * g_new[i] + (1.0 - th) * g_old[i];
        }
        let left = p.theta1.eval(0.0, t1)?;
        let right = p.theta2.eval(p.l, t1)?;
        stepper.step(&v[k * nodes..(k + 1) * nodes], &extra, left, right, &mut next)?;
        v[(k + 1) * nodes..(k + 2) * nodes].copy_from_slice(&next);
        std::mem::swap(&mut g_old, &mut g_new);
    }
    check_finite(&v)?;
    Ok(SolutionField {
        xs,
        ts,
        v,
        u: None,
        meta: FieldMeta {
            source: "fd".into(),
            modes: None,
            quadrature: None,
            scheme: Some(cfg.scheme.name().into()),
            l: p.l,
            t_end: p.t_end,
            tau: None,
            dx,
            dt,
        },
    })
}

/// Reference solution of the delay problem on `[0, l] x [-tau, T]`, with
/// `dt = tau / nt_per_tau`. Rows on `[-tau, 0]` are the history.
pub fn fd_solve_delay(p: &DelayHeatProblem, cfg: &FdConfig) -> Result<SolutionField> {
    p.validate()?;
    cfg.validate()?;
    let m = cfg.nt_per_tau;
    let ts = delay_times(p.tau, p.t_end, m)?;
    let xs = uniform(0.0, p.l, cfg.nx);
    let (dx, dt) = (p.l / cfg.nx as f64, p.tau / m as f64);
    let nodes = xs.len();
    let th = cfg.scheme.theta();
    let mut stepper = Stepper::new(Stencil::new(p.a1 * p.a1, p.b1, p.d1, dx), nodes, dt, cfg.scheme);
    let delayed = Stencil::new(p.a2 * p.a2, p.b2, p.d2, dx);

    let mut v = vec![0.0; nodes * ts.len()];
    for (k, &t) in ts.iter().enumerate().take(m + 1) {
        sample_row(&p.psi, &xs, t, &mut v[k * nodes..(k + 1) * nodes])?;
    }
    let mut g_old = vec![0.0; nodes];
    let mut g_new = vec![0.0; nodes];
    let mut extra = vec![0.0; nodes];
    let mut next = vec![0.0; nodes];
    sample_row(&p.g, &xs, 0.0, &mut g_old)?;
    for k in m..ts.len() - 1 {
        let t1 = ts[k + 1];
        sample_row(&p.g, &xs, t1, &mut g_new)?;
        let lag_old = &v[(k - m) * nodes..(k - m + 1) * nodes];
        let lag_new = &v[(k + 1 - m) * nodes..(k + 2 - m) * nodes];
        for i in 1..nodes - 1 {
            extra[i] = th * (g_new[i] + delayed.apply(lag_new, i))
                + (1.0 - th) * (g_old[i] + delayed.apply(lag_old, i));
        }
        let left = p.theta1.eval(0.0, t1)?;
        let right = p.theta2.eval(p.l, t1)?;
        stepper.step(&v[k * nodes..(k + 1) * nodes], &extra, left, right, &mut next)?;
        v[(k + 1) * nodes..(k + 2) * nodes].copy_from_slice(&next);
        std::mem::swap(&mut g_old, &mut g_new);
    }
    check_finite(&v)?;
    Ok(SolutionField {
        xs,
        ts,
        v,
        u: None,
        meta: FieldMeta {
            source: "fd".into(),
            modes: None,
            quadrature: None,
            scheme: Some(cfg.scheme.name().into()),
            l: p.l,
            t_end: p.t_end,
            tau: Some(p.tau),
            dx,
            dt,
        },
    })
}

/// Richardson estimate of the error of `fine`, given a run on a grid
/// coarser by a factor of two in every direction: `sup|fine - coarse| /
/// (2^order - 1)`.
pub fn richardson_estimate(coarse: &SolutionField, fine: &SolutionField, order: f64) -> Result<f64> {
    let diff = compare_fields(coarse, fine)?;
    Ok(diff.sup / (2f64.powf(order) - 1.0))
}

/// `(2^order fine - coarse) / (2^order - 1)` on the points of `coarse`,
/// which `fine` must refine by a factor of two in both directions.
pub fn richardson_extrapolate(coarse: &SolutionField, fine: &SolutionField, order: f64) -> Result<SolutionField> {
    let (fx, ft) = (
        (fine.nx() - 1) / (coarse.nx() - 1).max(1),
        (fine.nt() - 1) / (coarse.nt() - 1).max(1),
    );
    if fx != 2 || ft != 2 || !(fine.nx() - 1).is_multiple_of(2) || !(fine.nt() - 1).is_multiple_of(2) {
        return Err(Error::Input("extrapolation needs a grid refined by two".into()));
    }
    // Validates that the grids are nested.
    compare_fields(coarse, fine)?;
    let w = 2f64.powf(order);
    let mut v = Vec::with_capacity(coarse.v.len());
    for it in 0..coarse.nt() {
        for ix in 0..coarse.nx() {
            v.push((w * fine.at(2 * it, 2 * ix) - coarse.at(it, ix)) / (w - 1.0));
        }
    }
    let mut meta = coarse.meta.clone();
    meta.source = "fd-extrapolated".into();
    Ok(SolutionField {
        xs: coarse.xs.clone(),
        ts: coarse.ts.clone(),
        v,
        u: None,
        meta,
    })
}

/// `log2(e_coarse / e_fine)`.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}
