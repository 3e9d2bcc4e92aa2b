//! `v_t = a^2 v_xx + b v_x + c v + g` on `(0, l) x (0, T]` with
//! `v(x, 0) = psi(x)`, `v(0, t) = theta1(t)`, `v(l, t) = theta2(t)`.
//!
//! The substitution `v = e^{mu x + gamma t} u` with `mu = -b/(2a^2)` and
//! `gamma = c - (b/(2a))^2` removes drift and reaction. The reduced unknown
//! splits into a free decay `u1`, a Duhamel part `u2` driven by `F`, and the
//! linear boundary lift `u3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{check_grid, uniform, FieldMeta, GridSpec, SolutionField};
use crate::funcspec::{Expr, Func, FunctionSpec, Var};
use crate::paths::{ChebGrid, ModePaths, POINTS_PER_SEGMENT};
use crate::quadrature::{integrate_piecewise, Grading, QuadratureConfig};
use crate::spectral::{tail_sum, EigenBasis, SpatialProjector};

pub use crate::problem::HeatProblem;

/// Which decay rate multiplies `(pi n / l)^2` in the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentConvention {
    /// `a^2 (pi n / l)^2` in every term.
    #[default]
    Scaled,
    /// `(pi n / l)^2` without the diffusion coefficient.
    Unscaled,
}

/// Forcing contributed by the boundary lift to the reduced equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftForcing {
    /// `F = f - d/dt lift`.
    #[default]
    TimeDerivative,
    /// `F = f - d/dt lift + c lift`.
    WithReaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Conventions {
    pub exponent: ExponentConvention,
    pub lift_forcing: LiftForcing,
}

pub const DEFAULT_COMP_TOL: f64 = 1e-9;

/// `exp(k * var)` as an expression.
pub(crate) fn exp_of(k: f64, var: Var) -> Expr {
    Expr::call(Func::Exp, Expr::mul(Expr::num(k), Expr::var(var)))
}

/// `m1 + (x/l)(m2 - m1)`.
pub(crate) fn lift_expr(m1: &Expr, m2: &Expr, l: f64) -> Expr {
    Expr::add(
        m1.clone(),
        Expr::mul(
            Expr::mul(Expr::num(1.0 / l), Expr::var(Var::X)),
            Expr::sub(m2.clone(), m1.clone()),
        ),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedProblem {
    pub mu: f64,
    pub gamma: f64,
    pub a: f64,
    pub c: f64,
    pub l: f64,
    pub t_end: f64,
    pub f: FunctionSpec,
    pub varphi: FunctionSpec,
    pub mu1: FunctionSpec,
    pub mu2: FunctionSpec,
    /// Initial data of `u1`: `varphi - lift(., 0)`.
    pub phi: FunctionSpec,
    /// Forcing of `u2`.
    pub forcing: FunctionSpec,
    pub conventions: Conventions,
}

impl ReducedProblem {
    /// `u3(x, t) = mu1(t) + (x/l)(mu2(t) - mu1(t))`.
    pub fn lift(&self, x: f64, t: f64) -> Result<f64> {
        let m1 = self.mu1.eval(x, t)?;
        Ok(m1 + x / self.l * (self.mu2.eval(x, t)? - m1))
    }

    /// `e^{mu x + gamma t}`.
    pub fn weight(&self, x: f64, t: f64) -> f64 {
        (self.mu * x + self.gamma * t).exp()
    }

    /// Decay rate of mode `n`.
    pub fn rate(&self, basis: &EigenBasis, n: usize) -> f64 {
        match self.conventions.exponent {
            ExponentConvention::Scaled => self.a * self.a * basis.eigenvalue(n),
            ExponentConvention::Unscaled => basis.eigenvalue(n),
        }
    }
}

/// Transforms the problem; rejects data whose corners disagree by more than
/// `comp_tol`.
pub fn reduce(p: &HeatProblem, conventions: Conventions, comp_tol: f64) -> Result<ReducedProblem> {
    p.validate()?;
    let (m0, ml) = p.corner_mismatch()?;
    let worst = m0.max(ml);
    if worst > comp_tol {
        return Err(Error::Compatibility {
            what: if m0 >= ml { "psi(0) = theta1(0)" } else { "psi(l) = theta2(0)" }.into(),
            mismatch: worst,
            tol: comp_tol,
        });
    }
    let (mu, gamma) = (p.mu(), p.gamma());
    let g = p.g.expr().clone();
    let f = Expr::mul(Expr::mul(exp_of(-mu, Var::X), exp_of(-gamma, Var::T)), g);
    let varphi = Expr::mul(exp_of(-mu, Var::X), p.psi.expr().clone());
    let mu1 = Expr::mul(exp_of(-gamma, Var::T), p.theta1.expr().clone());
    let mu2 = Expr::mul(
        Expr::mul(Expr::num((-mu * p.l).exp()), exp_of(-gamma, Var::T)),
        p.theta2.expr().clone(),
    );
    let lift = lift_expr(&mu1, &mu2, p.l);
    let lift0 = lift.map_time(0.0, 0.0);
    let phi = Expr::sub(varphi.clone(), lift0);
    let mut forcing = Expr::sub(f.clone(), lift.derivative(Var::T)?);
    if conventions.lift_forcing == LiftForcing::WithReaction {
        forcing = Expr::add(forcing, Expr::mul(Expr::num(p.c), lift));
    }
    let spec = |e: Expr| FunctionSpec::from_expr(e).bind(Some(p.l), None);
    Ok(ReducedProblem {
        mu,
        gamma,
        a: p.a,
        c: p.c,
        l: p.l,
        t_end: p.t_end,
        f: spec(f),
        varphi: spec(varphi),
        mu1: spec(mu1),
        mu2: spec(mu2),
        phi: spec(phi),
        forcing: spec(forcing),
        conventions,
    })
}

/// Projected data of a reduced problem: `Phi_n` and the paths `F_n(t)`.
#[derive(Debug, Clone)]
pub struct NoDelayModes {
    pub basis: EigenBasis,
    pub phi: Vec<f64>,
    pub forcing: ModePaths,
    rates: Vec<f64>,
    quad: QuadratureConfig,
}

/// Length of the Chebyshev segments used for forcing paths.
const PATH_SEGMENT: f64 = 0.25;

impl NoDelayModes {
    pub fn build(rp: &ReducedProblem, basis: EigenBasis, quad: &QuadratureConfig) -> Result<Self> {
        let phi_probe = |x: f64| rp.phi.eval(x, 0.0);
        let mid = 0.5 * rp.t_end;
        let f_probe = |x: f64| rp.forcing.eval(x, mid);
        let proj = SpatialProjector::resolve(basis, quad, &[&phi_probe, &f_probe])?;
        let phi = proj.project_fn(phi_probe)?;
        let grid = ChebGrid::new(0.0, rp.t_end, PATH_SEGMENT, &[], POINTS_PER_SEGMENT)?;
        let forcing = if rp.forcing.is_zero() {
            ModePaths::sample(grid, basis.n, |_| Ok(vec![0.0; basis.n]))?
        } else {
            ModePaths::sample(grid, basis.n, |t| proj.project_fn(|x| rp.forcing.eval(x, t)))?
        };
        let rates = (1..=basis.n).map(|n| rp.rate(&basis, n)).collect();
        Ok(Self {
            basis,
            phi,
            forcing,
            rates,
            quad: *quad,
        })
    }

    pub fn rate(&self, n: usize) -> f64 {
        self.rates[n - 1]
    }

    /// `Phi_n e^{-k_n t}`.
    pub fn u1_coefficient(&self, n: usize, t: f64) -> f64 {
        self.phi[n - 1] * (-self.rate(n) * t).exp()
    }

    /// `int_s0^t e^{-k_n (t - s)} F_n(s) ds`.
    pub fn duhamel(&self, n: usize, s0: f64, t: f64) -> Result<f64> {
        if t <= s0 {
            return Ok(0.0);
        }
        let k = self.rate(n);
        if self.forcing.max_abs(n - 1) == 0.0 {
            return Ok(0.0);
        }
        integrate_piecewise(&self.quad, &[s0, t], Grading::for_exponent(k), |s| {
            Ok((-k * (t - s)).exp() * self.forcing.eval(n - 1, s)?)
        })
    }

    /// Duhamel coefficients of every mode on the time grid `ts`, marched
    /// interval by interval.
    pub fn u2_on_grid(&self, ts: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.basis.n;
        let per_mode = crate::spectral::par_modes(n, |m| {
            let k = self.rate(m);
            let mut acc = vec![0.0; ts.len()];
            for j in 1..ts.len() {
                let decay = (-k * (ts[j] - ts[j - 1])).exp();
                acc[j] = decay * acc[j - 1] + self.duhamel(m, ts[j - 1], ts[j])?;
            }
            Ok(acc)
        })?;
        // Transpose to time-major.
        Ok((0..ts.len())
            .map(|j| per_mode.iter().map(|mode| mode[j]).collect())
            .collect())
    }
}

pub fn solve_u1(rp: &ReducedProblem, basis: EigenBasis, quad: &QuadratureConfig, x: f64, t: f64) -> Result<f64> {
    let modes = NoDelayModes::build(rp, basis, quad)?;
    let x = basis.check_x(x)?;
    let coeffs: Vec<f64> = (1..=basis.n).map(|n| modes.u1_coefficient(n, t)).collect();
    Ok(tail_sum(&coeffs, |k| basis.eigenfunction(k + 1, x)))
}

pub fn solve_u2(rp: &ReducedProblem, basis: EigenBasis, quad: &QuadratureConfig, x: f64, t: f64) -> Result<f64> {
    let modes = NoDelayModes::build(rp, basis, quad)?;
    let x = basis.check_x(x)?;
    let coeffs = (1..=basis.n)
        .map(|n| modes.duhamel(n, 0.0, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(tail_sum(&coeffs, |k| basis.eigenfunction(k + 1, x)))
}

pub fn solve_u3(rp: &ReducedProblem, x: f64, t: f64) -> Result<f64> {
    rp.lift(x, t)
}

/// Spectral solution on `grid`.
pub fn solve(
    p: &HeatProblem,
    basis: EigenBasis,
    grid: GridSpec,
    quad: &QuadratureConfig,
    conventions: Conventions,
    comp_tol: f64,
) -> Result<SolutionField> {
    check_grid(grid.nx, grid.nt)?;
    let rp = reduce(p, conventions, comp_tol)?;
    let modes = NoDelayModes::build(&rp, basis, quad)?;
    let xs = uniform(0.0, p.l, grid.nx);
    let ts = uniform(0.0, p.t_end, grid.nt);
    let u2 = modes.u2_on_grid(&ts)?;
    let sines: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| (1..=basis.n).map(|n| basis.eigenfunction(n, x)).collect())
        .collect();
    let mut u = Vec::with_capacity(xs.len() * ts.len());
    let mut v = Vec::with_capacity(xs.len() * ts.len());
    for (j, &t) in ts.iter().enumerate() {
        let coeffs: Vec<f64> = (1..=basis.n)
            .map(|n| modes.u1_coefficient(n, t) + u2[j][n - 1])
            .collect();
        for (i, &x) in xs.iter().enumerate() {
            let series = tail_sum(&coeffs, |k| sines[i][k]);
            let ui = series + rp.lift(x, t)?;
            u.push(ui);
            v.push(rp.weight(x, t) * ui);
        }
    }
    if let Some(bad) = v.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite solution value {bad}")));
    }
    Ok(SolutionField {
        xs,
        ts,
        v,
        u: Some(u),
        meta: FieldMeta {
            source: "spectral".into(),
            modes: Some(basis.n),
            quadrature: Some(*quad),
            scheme: None,
            l: p.l,
            t_end: p.t_end,
            tau: None,
            dx: p.l / grid.nx as f64,
            dt: p.t_end / grid.nt as f64,
        },
    })
}
