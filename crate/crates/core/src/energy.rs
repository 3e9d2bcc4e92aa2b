//! Energy functionals of solution fields and Gronwall-type bounds.
//!
//! Without delay the energy is `E(t) = int_0^l w^2 dx`. With delay it is
//!
//! ```text
//! E(t) = int_0^l w^2(x, t) dx + omega int_0^1 int_0^l w_x^2(x, t - tau s) dx ds.
//! ```
//!
//! For the difference `w` of two solutions with the same forcing and
//! boundary data, `E(t) <= e^{C t} E(0)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::funcspec::Var;
use crate::problem::{DelayCoefficients, DelayHeatProblem, HeatProblem};

/// Smallest spatial grid accepted by [`energy_trace`].
pub const MIN_POINTS: usize = 16;

/// `epsilon`, `omega` and the growth constant `C` of an energy estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyParams {
    pub epsilon: f64,
    pub omega: f64,
    pub c_theory: f64,
}

/// `epsilon = a^2/(|b| + 1)`, `C = 2(c + |b|/(2 epsilon))`.
pub fn nodelay_params(a: f64, b: f64, c: f64) -> Result<EnergyParams> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::Input("no admissible epsilon for a = 0".into()));
    }
    let epsilon = a * a / (b.abs() + 1.0);
    if epsilon * b.abs() / 2.0 >= a * a {
        return Err(Error::Numeric("epsilon violates epsilon |b| / 2 < a^2".into()));
    }
    Ok(EnergyParams {
        epsilon,
        omega: 0.0,
        c_theory: 2.0 * (c + b.abs() / (2.0 * epsilon)),
    })
}

pub fn nodelay_params_for(p: &HeatProblem) -> Result<EnergyParams> {
    nodelay_params(p.a, p.b, p.c)
}

/// `epsilon = a1^2/(|b1| + a2^2 + 1)`, `omega = (a2^2/epsilon + |b2| + 1)/tau`,
/// `C = 2 d1 + |b2| + |d2| + |b1|/epsilon`.
pub fn delay_params(k: &DelayCoefficients, tau: f64) -> Result<EnergyParams> {
    if k.a1 == 0.0 || !(tau > 0.0) {
        return Err(Error::Input("no admissible epsilon for a1 = 0 or tau <= 0".into()));
    }
    let (a1s, a2s) = (k.a1 * k.a1, k.a2 * k.a2);
    let epsilon = a1s / (k.b1.abs() + a2s + 1.0);
    let omega = (a2s / epsilon + k.b2.abs() + 1.0) / tau;
    if 2.0 * a1s - k.b1.abs() * epsilon - a2s * epsilon <= 0.0
        || omega * tau - a2s / epsilon - k.b2.abs() < 0.0
    {
        return Err(Error::Numeric("energy parameters violate the sign conditions".into()));
    }
    Ok(EnergyParams {
        epsilon,
        omega,
        c_theory: 2.0 * k.d1 + k.b2.abs() + k.d2.abs() + k.b1.abs() / epsilon,
    })
}

pub fn delay_params_for(p: &DelayHeatProblem) -> Result<EnergyParams> {
    delay_params(&p.coefficients(), p.tau)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// Smallest `C` with `E(t) <= e^{C t} E(0)` on the grid.
    pub c_fit: f64,
    pub omega: f64,
    pub epsilon: Option<f64>,
    /// Trapezoid error estimate from a grid coarsened by two.
    pub quadrature_error: f64,
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// `int w^2 dx` of a row, using every `stride`-th node.
fn mass(row: &[f64], dx: f64, stride: usize) -> f64 {
    let sq: Vec<f64> = row.iter().step_by(stride).map(|w| w * w).collect();
    trapezoid(&sq, dx * stride as f64)
}

/// `int w_x^2 dx` with second-order differences, using every `stride`-th node.
fn gradient_mass(row: &[f64], dx: f64, stride: usize) -> f64 {
    let w: Vec<f64> = row.iter().step_by(stride).copied().collect();
    let h = dx * stride as f64;
    let n = w.len();
    let mut g = vec![0.0; n];
    for i in 1..n - 1 {
        g[i] = (w[i + 1] - w[i - 1]) / (2.0 * h);
    }
    g[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
    g[n - 1] = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * h);
    let sq: Vec<f64> = g.iter().map(|v| v * v).collect();
    trapezoid(&sq, h)
}

fn uniform_step(values: &[f64], what: &str) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: values.len() });
    }
    let h = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
    let uneven = values
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300));
    if uneven {
        return Err(Error::Input(format!("{what} grid is not uniform")));
    }
    Ok(h)
}

/// Energy of `field` at every grid time `t >= 0`. With `tau`, the field must
/// start at `-tau` with a time step dividing `tau`.
pub fn energy_trace(field: &SolutionField, tau: Option<f64>, omega: f64) -> Result<EnergyReport> {
    let nx = field.nx();
    if nx < MIN_POINTS {
        return Err(Error::InsufficientData { needed: MIN_POINTS, got: nx });
    }
    let dx = uniform_step(&field.xs, "spatial")?;
    let (start, lag) = match tau {
        None => (0, 0),
        Some(tau) => {
            let dt = uniform_step(&field.ts, "time")?;
            let m = (tau / dt).round() as usize;
            if m == 0 || ((m as f64) * dt - tau).abs() > 1e-9 * tau || (field.ts[0] + tau).abs() > 1e-9 * tau {
                return Err(Error::Input("field must cover [-tau, T] with a step dividing tau".into()));
            }
            (m, m)
        }
    };
    // Coarse x only when the node count allows an exact halving.
    let x_stride = if (nx - 1).is_multiple_of(2) && nx >= 2 * MIN_POINTS - 1 { 2 } else { 1 };
    let s_stride = if lag % 2 == 0 && lag >= 2 { 2 } else { 1 };

    let energy_at = |it: usize, xs: usize, ss: usize| -> f64 {
        let mut e = mass(field.row(it), dx, xs);
        if lag > 0 && omega != 0.0 {
            let hist: Vec<f64> = (0..=lag)
                .step_by(ss)
                .map(|j| gradient_mass(field.row(it - j), dx, xs))
                .collect();
            e += omega * trapezoid(&hist, ss as f64 / lag as f64);
        }
        e
    };
    let mut times = Vec::with_capacity(field.nt() - start);
    let mut energy = Vec::with_capacity(field.nt() - start);
    let mut quadrature_error = 0.0f64;
    for it in start..field.nt() {
        let e = energy_at(it, 1, 1);
        if x_stride > 1 || s_stride > 1 {
            let coarse = energy_at(it, x_stride, s_stride);
            quadrature_error = quadrature_error.max((e - coarse).abs() / 3.0);
        }
        times.push(field.ts[it]);
        energy.push(e);
    }
    let c_fit = fit_growth(&times, &energy);
    Ok(EnergyReport {
        times,
        energy,
        c_fit,
        omega,
        epsilon: None,
        quadrature_error,
    })
}

fn fit_growth(times: &[f64], energy: &[f64]) -> f64 {
    let (t0, e0) = (times[0], energy[0]);
    let mut c = f64::NEG_INFINITY;
    for (&t, &e) in times.iter().zip(energy).skip(1) {
        let dt = t - t0;
        if e == 0.0 {
            continue;
        }
        if e0 == 0.0 {
            return f64::INFINITY;
        }
        c = c.max((e / e0).ln() / dt);
    }
    if c == f64::NEG_INFINITY {
        0.0
    } else {
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GronwallCheck {
    pub pass: bool,
    pub c_theory: f64,
    pub slack: f64,
    /// `min_t [e^{C t}(E(0) + slack) - E(t)]`.
    pub worst_margin: f64,
    pub worst_time: f64,
}

/// Checks `E(t) <= e^{C t}(E(0) + slack)` at every reported time, with
/// `slack = 10 (quadrature error + solver_tol)`.
pub fn gronwall_check(report: &EnergyReport, c_theory: f64, solver_tol: f64) -> Result<GronwallCheck> {
    if report.energy.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if !c_theory.is_finite() {
        return Err(Error::Input(format!("growth constant must be finite, got {c_theory}")));
    }
    let slack = 10.0 * (report.quadrature_error + solver_tol);
    let (t0, e0) = (report.times[0], report.energy[0]);
    let mut worst_margin = f64::INFINITY;
    let mut worst_time = t0;
    for (&t, &e) in report.times.iter().zip(&report.energy) {
        let margin = (c_theory * (t - t0)).exp() * (e0 + slack) - e;
        if margin < worst_margin {
            worst_margin = margin;
            worst_time = t;
        }
    }
    Ok(GronwallCheck {
        pass: worst_margin >= 0.0,
        c_theory,
        slack,
        worst_margin,
        worst_time,
    })
}

/// Both sides of a continuous-dependence estimate and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DependenceReport {
    pub solution_norm: f64,
    pub data_norm: f64,
    pub ratio: f64,
}

impl DependenceReport {
    fn new(solution_norm: f64, data_norm: f64) -> Self {
        let ratio = if data_norm > 0.0 {
            solution_norm / data_norm
        } else if solution_norm > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Self {
            solution_norm,
            data_norm,
            ratio,
        }
    }
}

fn time_integral(field: &SolutionField, from: usize, per_row: impl Fn(usize) -> Result<f64>) -> Result<f64> {
    let ts = &field.ts[from..];
    let dt = uniform_step(ts, "time")?;
    let vals = (from..field.nt()).map(per_row).collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&vals, dt))
}

fn data_mass(f: &crate::funcspec::FunctionSpec, xs: &[f64], dx: f64, t: f64) -> Result<f64> {
    let sq = xs.iter().map(|&x| f.eval(x, t).map(|v| v * v)).collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&sq, dx))
}

/// Squared norms `||v||^2` in `L2(0,T; L2)` against
/// `||g||^2 + ||psi||^2 + ||theta1||^2_{W12} + ||theta2||^2_{W12}`.
pub fn nodelay_dependence(field: &SolutionField, p: &HeatProblem) -> Result<DependenceReport> {
    let dx = uniform_step(&field.xs, "spatial")?;
    let lhs = time_integral(field, 0, |it| Ok(mass(field.row(it), dx, 1)))?;
    let d1 = p.theta1.differentiate(Var::T, 1)?;
    let d2 = p.theta2.differentiate(Var::T, 1)?;
    let g = time_integral(field, 0, |it| data_mass(&p.g, &field.xs, dx, field.ts[it]))?;
    let theta = time_integral(field, 0, |it| {
        let t = field.ts[it];
        let vals = [p.theta1.eval(0.0, t)?, d1.eval(0.0, t)?, p.theta2.eval(0.0, t)?, d2.eval(0.0, t)?];
        Ok(vals.iter().map(|v| v * v).sum())
    })?;
    let psi = data_mass(&p.psi, &field.xs, dx, 0.0)?;
    Ok(DependenceReport::new(lhs, g + theta + psi))
}

/// Left- and right-hand sides of the delay estimate
///
/// ```text
/// int_0^T int_0^l (v^2 + int_0^1 v_x^2(x, t - tau s) ds) dx dt
///   <= C [ int_0^T (int g^2 dx + theta1'^2 + theta2'^2) dt
///          + int psi^2(x, 0) dx + int_0^1 int psi_x^2(x, -tau s) dx ds ].
/// ```
pub fn delay_dependence(field: &SolutionField, p: &DelayHeatProblem) -> Result<DependenceReport> {
    let dx = uniform_step(&field.xs, "spatial")?;
    let trace = energy_trace(field, Some(p.tau), 1.0)?;
    let m = field.nt() - trace.times.len();
    let lhs = time_integral(field, m, |it| Ok(trace.energy[it - m]))?;
    let d1 = p.theta1.differentiate(Var::T, 1)?;
    let d2 = p.theta2.differentiate(Var::T, 1)?;
    let forcing = time_integral(field, m, |it| {
        let t = field.ts[it];
        Ok(data_mass(&p.g, &field.xs, dx, t)? + d1.eval(0.0, t)?.powi(2) + d2.eval(0.0, t)?.powi(2))
    })?;
    let psi_x = p.psi.differentiate(Var::X, 1)?;
    let hist: Vec<f64> = (0..=m)
        .map(|it| data_mass(&psi_x, &field.xs, dx, field.ts[it]))
        .collect::<Result<_>>()?;
    let history = trapezoid(&hist, 1.0 / m as f64);
    let initial = data_mass(&p.psi, &field.xs, dx, 0.0)?;
    Ok(DependenceReport::new(lhs, forcing + initial + history))
}
