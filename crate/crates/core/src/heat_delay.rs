//! The heat equation with one constant delay,
//!
//! ```text
//! v_t = a1^2 v_xx + a2^2 v_xx(t-tau) + b1 v_x + b2 v_x(t-tau)
//!     + d1 v + d2 v(t-tau) + g,
//! ```
//!
//! with history `psi` on `[-tau, 0]` and Dirichlet data `theta1`, `theta2`.
//!
//! When `-b1/(2 a1^2) = -b2/(2 a2^2) = mu`, the substitution `v = e^{mu x} u`
//! removes both drift terms and leaves
//!
//! ```text
//! u_t = a1^2 u_xx + a2^2 u_xx(t-tau) + c1 u + c2 u(t-tau) + f.
//! ```
//!
//! After subtracting the boundary lift, each sine mode obeys the scalar delay
//! equation `T' = L_n T + B_n T(t-tau) + F_n` with
//! `L_n = c1 - (pi n a1 / l)^2` and `B_n = c2 - (pi n a2 / l)^2`.

use serde::Serialize;

use crate::delay_ode::{superpose, DelayOdeParams, Forcing, History};
use crate::delayed_exp::knots_between;
use crate::error::{Error, Result};
use crate::field::{check_grid, delay_times, uniform, DelayGridSpec, FieldMeta, SolutionField};
use crate::funcspec::{Expr, FunctionSpec, Var};
use crate::heat_nodelay::{exp_of, lift_expr};
use crate::paths::{ChebGrid, ModePaths, POINTS_PER_SEGMENT};
use crate::quadrature::QuadratureConfig;
use crate::spectral::{par_modes, tail_sum, EigenBasis, SpatialProjector};

pub use crate::problem::{DelayCoefficients, DelayHeatProblem};

pub const DEFAULT_PROP_TOL: f64 = 1e-12;
pub const DEFAULT_COMP_TOL: f64 = 1e-9;
/// Points of `[-tau, 0]` at which history and boundary data are compared.
pub const COMPAT_SAMPLES: usize = 64;

const PATH_SEGMENT: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDelayProblem {
    pub mu: f64,
    pub c1: f64,
    pub c2: f64,
    pub a1: f64,
    pub a2: f64,
    pub tau: f64,
    pub l: f64,
    pub t_end: f64,
    pub f: FunctionSpec,
    pub varphi: FunctionSpec,
    pub mu1: FunctionSpec,
    pub mu2: FunctionSpec,
    /// History of the lifted unknown: `varphi - lift` on `[-tau, 0]`.
    pub phi: FunctionSpec,
    /// `f - lift' + c1 lift + c2 lift(t - tau)`.
    pub forcing: FunctionSpec,
}

impl ReducedDelayProblem {
    pub fn lift(&self, x: f64, t: f64) -> Result<f64> {
        let m1 = self.mu1.eval(x, t)?;
        Ok(m1 + x / self.l * (self.mu2.eval(x, t)? - m1))
    }

    /// `e^{mu x}`.
    pub fn weight(&self, x: f64) -> f64 {
        (self.mu * x).exp()
    }

    /// `c1 - (pi n a1 / l)^2`.
    pub fn l_n(&self, basis: &EigenBasis, n: usize) -> f64 {
        self.c1 - self.a1 * self.a1 * basis.eigenvalue(n)
    }

    /// `c2 - (pi n a2 / l)^2`.
    pub fn b_n(&self, basis: &EigenBasis, n: usize) -> f64 {
        self.c2 - self.a2 * self.a2 * basis.eigenvalue(n)
    }
}

/// Checks proportionality of the drifts and compatibility of history and
/// boundary data, then transforms.
pub fn reduce_delay(p: &DelayHeatProblem, prop_tol: f64, comp_tol: f64) -> Result<ReducedDelayProblem> {
    p.validate()?;
    let (left, right) = p.drift_ratios();
    if (left - right).abs() > prop_tol * left.abs().max(right.abs()).max(1.0) {
        return Err(Error::Proportionality { left, right });
    }
    let (m0, ml) = p.boundary_mismatch(COMPAT_SAMPLES)?;
    if m0.max(ml) > comp_tol {
        return Err(Error::Compatibility {
            what: if m0 >= ml { "psi(0, t) = theta1(t)" } else { "psi(l, t) = theta2(t)" }.into(),
            mismatch: m0.max(ml),
            tol: comp_tol,
        });
    }
    let mu = left;
    let c1 = p.d1 - (p.b1 / (2.0 * p.a1)).powi(2);
    let c2 = p.d2 - (p.b2 / (2.0 * p.a2)).powi(2);
    let damp = exp_of(-mu, Var::X);
    let f = Expr::mul(damp.clone(), p.g.expr().clone());
    let varphi = Expr::mul(damp, p.psi.expr().clone());
    let mu1 = p.theta1.expr().clone();
    let mu2 = Expr::mul(Expr::num((-mu * p.l).exp()), p.theta2.expr().clone());
    let lift = lift_expr(&mu1, &mu2, p.l);
    let phi = Expr::sub(varphi.clone(), lift.clone());
    let forcing = Expr::add(
        Expr::add(
            Expr::sub(f.clone(), lift.derivative(Var::T)?),
            Expr::mul(Expr::num(c1), lift.clone()),
        ),
        Expr::mul(Expr::num(c2), lift.map_time(1.0, -p.tau)),
    );
    let spec = |e: Expr| FunctionSpec::from_expr(e).bind(Some(p.l), Some(p.tau));
    Ok(ReducedDelayProblem {
        mu,
        c1,
        c2,
        a1: p.a1,
        a2: p.a2,
        tau: p.tau,
        l: p.l,
        t_end: p.t_end,
        f: spec(f),
        varphi: spec(varphi),
        mu1: spec(mu1),
        mu2: spec(mu2),
        phi: spec(phi),
        forcing: spec(forcing),
    })
}

/// `ceil(T / tau)`, at least 1.
pub fn delay_intervals(t_end: f64, tau: f64) -> u32 {
    let r = t_end / tau;
    // Guard against T = k tau landing a hair above k.
    let k = (r - 1e-12 * r.max(1.0)).ceil();
    k.max(1.0) as u32
}

/// Per-mode coefficients and projected data paths.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    pub basis: EigenBasis,
    pub tau: f64,
    pub t_end: f64,
    /// `L_n`, indexed from zero.
    pub l_n: Vec<f64>,
    /// `B_n = c2 - (pi n a2 / l)^2`.
    pub b_n: Vec<f64>,
    /// `ln|B_n| - L_n tau`, the logarithm of `|B_n e^{-L_n tau}|`.
    pub log_abs_d: Vec<f64>,
    /// `Phi_n(t)` on `[-tau, 0]`.
    pub phi: ModePaths,
    /// `Phi_n'(t)` on `[-tau, 0]`.
    pub phi_prime: ModePaths,
    /// `Phi_n''(t)` on `[-tau, 0]`, when the history is smooth enough.
    pub phi_second: Option<ModePaths>,
    /// `F_n(t)` on `[0, T]`.
    pub forcing: ModePaths,
    /// `F_n'(t)` on `[0, T]`, when the forcing is differentiable in time.
    pub forcing_prime: Option<ModePaths>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeDiagnostic {
    pub n: usize,
    pub l_n: f64,
    pub log_abs_d: f64,
    pub phi_sup: f64,
    pub forcing_sup: f64,
}

fn sample_projection(
    proj: &SpatialProjector,
    grid: ChebGrid,
    spec: &FunctionSpec,
) -> Result<ModePaths> {
    let width = proj.basis().n;
    if spec.is_zero() {
        return ModePaths::sample(grid, width, |_| Ok(vec![0.0; width]));
    }
    ModePaths::sample(grid, width, |t| proj.project_fn(|x| spec.eval(x, t)))
}

impl ModeSystem {
    pub fn build(rp: &ReducedDelayProblem, basis: EigenBasis, quad: &QuadratureConfig) -> Result<Self> {
        let tau = rp.tau;
        let probes: [&(dyn Fn(f64) -> Result<f64> + Sync); 3] = [
            &|x| rp.phi.eval(x, -tau),
            &|x| rp.phi.eval(x, 0.0),
            &|x| rp.forcing.eval(x, 0.5 * rp.t_end),
        ];
        let proj = SpatialProjector::resolve(basis, quad, &probes)?;
        let hist_grid = ChebGrid::new(-tau, 0.0, PATH_SEGMENT, &[], POINTS_PER_SEGMENT)?;
        let knots = knots_between(tau, 0.0, rp.t_end);
        let fwd_grid = ChebGrid::new(0.0, rp.t_end, PATH_SEGMENT, &knots, POINTS_PER_SEGMENT)?;

        let phi = sample_projection(&proj, hist_grid.clone(), &rp.phi)?;
        let phi_t = rp.phi.differentiate(Var::T, 1)?;
        let phi_prime = sample_projection(&proj, hist_grid.clone(), &phi_t)?;
        let phi_second = match rp.phi.differentiate(Var::T, 2) {
            Ok(spec) => Some(sample_projection(&proj, hist_grid, &spec)?),
            Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(e),
        };
        let forcing = sample_projection(&proj, fwd_grid.clone(), &rp.forcing)?;
        let forcing_prime = match rp.forcing.differentiate(Var::T, 1) {
            Ok(spec) => Some(sample_projection(&proj, fwd_grid, &spec)?),
            Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(e),
        };

        let l_n: Vec<f64> = (1..=basis.n).map(|n| rp.l_n(&basis, n)).collect();
        let b_n: Vec<f64> = (1..=basis.n).map(|n| rp.b_n(&basis, n)).collect();
        let log_abs_d = l_n.iter().zip(&b_n).map(|(l, b)| b.abs().ln() - l * tau).collect();
        Ok(Self {
            basis,
            tau,
            t_end: rp.t_end,
            l_n,
            b_n,
            log_abs_d,
            phi,
            phi_prime,
            phi_second,
            forcing,
            forcing_prime,
        })
    }

    /// Scalar delay equation of mode `n`.
    pub fn params(&self, n: usize) -> Result<DelayOdeParams> {
        DelayOdeParams::new(self.l_n[n - 1], self.b_n[n - 1], self.tau)
    }

    pub fn diagnostics(&self) -> Vec<ModeDiagnostic> {
        (1..=self.basis.n)
            .map(|n| ModeDiagnostic {
                n,
                l_n: self.l_n[n - 1],
                log_abs_d: self.log_abs_d[n - 1],
                phi_sup: self.phi.max_abs(n - 1),
                forcing_sup: self.forcing.max_abs(n - 1),
            })
            .collect()
    }

    fn history(&self, n: usize) -> ModeHistory<'_> {
        ModeHistory { ms: self, k: n - 1 }
    }

    fn forcing_of(&self, n: usize) -> ModeForcing<'_> {
        ModeForcing { ms: self, k: n - 1 }
    }
}

struct ModeHistory<'a> {
    ms: &'a ModeSystem,
    k: usize,
}

impl History for ModeHistory<'_> {
    fn value(&self, s: f64) -> Result<f64> {
        self.ms.phi.eval(self.k, s)
    }

    fn derivative(&self, s: f64) -> Result<f64> {
        self.ms.phi_prime.eval(self.k, s)
    }
}

struct ModeForcing<'a> {
    ms: &'a ModeSystem,
    k: usize,
}

impl Forcing for ModeForcing<'_> {
    fn value(&self, s: f64) -> Result<f64> {
        self.ms.forcing.eval(self.k, s)
    }
}

/// Coefficient of `sin(pi n x / l)` in the lifted unknown at time `t`.
pub fn mode_solution(ms: &ModeSystem, n: usize, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    if n == 0 || n > ms.basis.n {
        return Err(Error::Input(format!("mode {n} outside 1..={}", ms.basis.n)));
    }
    if t <= 0.0 {
        return ms.phi.eval(n - 1, t);
    }
    let p = ms.params(n)?;
    let h = ms.history(n);
    if ms.forcing.max_abs(n - 1) == 0.0 {
        return superpose(&p, &h, &crate::delay_ode::NoForcing, t, quad);
    }
    superpose(&p, &h, &ms.forcing_of(n), t, quad)
}

/// Series solution on `[0, l] x [-tau, T]`; rows with `t <= 0` are `psi`.
pub fn solve_delay(
    p: &DelayHeatProblem,
    basis: EigenBasis,
    grid: DelayGridSpec,
    quad: &QuadratureConfig,
    prop_tol: f64,
    comp_tol: f64,
) -> Result<SolutionField> {
    check_grid(grid.nx, grid.nt_per_tau)?;
    let rp = reduce_delay(p, prop_tol, comp_tol)?;
    let ms = ModeSystem::build(&rp, basis, quad)?;
    let ts = delay_times(p.tau, p.t_end, grid.nt_per_tau)?;
    let xs = uniform(0.0, p.l, grid.nx);
    solve_on(&rp, &ms, p, &xs, &ts, quad, grid)
}

fn solve_on(
    rp: &ReducedDelayProblem,
    ms: &ModeSystem,
    p: &DelayHeatProblem,
    xs: &[f64],
    ts: &[f64],
    quad: &QuadratureConfig,
    grid: DelayGridSpec,
) -> Result<SolutionField> {
    let basis = ms.basis;
    let future: Vec<f64> = ts.iter().copied().filter(|t| *t > 0.0).collect();
    let per_mode = par_modes(basis.n, |n| {
        future.iter().map(|&t| mode_solution(ms, n, t, quad)).collect::<Result<Vec<_>>>()
    })?;
    let sines: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| (1..=basis.n).map(|n| basis.eigenfunction(n, x)).collect())
        .collect();
    let mut u = Vec::with_capacity(xs.len() * ts.len());
    let mut v = Vec::with_capacity(xs.len() * ts.len());
    let first_future = ts.len() - future.len();
    for (j, &t) in ts.iter().enumerate() {
        if j < first_future {
            for &x in xs {
                let vi = p.psi.eval(x, t)?;
                v.push(vi);
                u.push(vi / rp.weight(x));
            }
            continue;
        }
        let coeffs: Vec<f64> = per_mode.iter().map(|m| m[j - first_future]).collect();
        for (i, &x) in xs.iter().enumerate() {
            let series = tail_sum(&coeffs, |k| sines[i][k]);
            let ui = series + rp.lift(x, t)?;
            u.push(ui);
            v.push(rp.weight(x) * ui);
        }
    }
    if let Some(bad) = v.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite solution value {bad}")));
    }
    Ok(SolutionField {
        xs: xs.to_vec(),
        ts: ts.to_vec(),
        v,
        u: Some(u),
        meta: FieldMeta {
            source: "spectral".into(),
            modes: Some(basis.n),
            quadrature: Some(*quad),
            scheme: None,
            l: p.l,
            t_end: p.t_end,
            tau: Some(p.tau),
            dx: p.l / grid.nx as f64,
            dt: p.tau / grid.nt_per_tau as f64,
        },
    })
}

/// Series solution at a single point.
pub fn solve_delay_at(
    rp: &ReducedDelayProblem,
    ms: &ModeSystem,
    x: f64,
    t: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let x = ms.basis.check_x(x)?;
    let coeffs = (1..=ms.basis.n)
        .map(|n| mode_solution(ms, n, t, quad))
        .collect::<Result<Vec<_>>>()?;
    let series = tail_sum(&coeffs, |k| ms.basis.eigenfunction(k + 1, x));
    Ok(rp.weight(x) * (series + rp.lift(x, t)?))
}
