//! Closed-form solutions of `x'(t) = a x(t) + b x(t - tau) + rho(t)`.
//!
//! With history `x = beta` on `[-tau, 0]` and no forcing,
//!
//! ```text
//! x(t) = e^{a(t+tau)} exp_tau{b1, t} beta(-tau)
//!      + int_{-tau}^{0} e^{a(t-s)} exp_tau{b1, t-tau-s} [beta'(s) - a beta(s)] ds
//! ```
//!
//! and with zero history and forcing `rho`,
//!
//! ```text
//! x(t) = int_0^t e^{a(t-s)} exp_tau{b1, t-tau-s} rho(s) ds,
//! ```
//!
//! where `b1 = e^{-a tau} b`. Both are evaluated through
//! [`scaled_kernel`](crate::delayed_exp::scaled_kernel), so `e^{-a tau}` is
//! never formed and strongly damped modes stay finite.

use crate::delayed_exp::{knots_between, scaled_kernel};
use crate::error::{ensure_finite, Error, Result};
use crate::funcspec::{FunctionSpec, Var};
use crate::quadrature::{integrate_piecewise, Grading, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayOdeParams {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
}

impl DelayOdeParams {
    pub fn new(a: f64, b: f64, tau: f64) -> Result<Self> {
        let p = Self { a, b, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("a", self.a)?;
        ensure_finite("b", self.b)?;
        ensure_finite("tau", self.tau)?;
        if self.tau <= 0.0 {
            return Err(Error::Input(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }

    /// `e^{-a tau} b`; may overflow to infinity for strongly damped `a`.
    pub fn b1(&self) -> f64 {
        (-self.a * self.tau).exp() * self.b
    }

    /// `e^{a(r+tau)} exp_tau{b1, r}`.
    pub fn kernel(&self, r: f64) -> f64 {
        scaled_kernel(self.a, self.b, self.tau, r)
    }

    fn grading(&self) -> Option<Grading> {
        Grading::for_exponent(self.a)
    }
}

/// History data on `[-tau, 0]`.
pub trait History: Sync {
    fn value(&self, s: f64) -> Result<f64>;
    fn derivative(&self, s: f64) -> Result<f64>;
}

/// Forcing on `[0, T]`.
pub trait Forcing: Sync {
    fn value(&self, s: f64) -> Result<f64>;
}

impl<F: Fn(f64) -> f64 + Sync> Forcing for F {
    fn value(&self, s: f64) -> Result<f64> {
        Ok(self(s))
    }
}

/// Zero forcing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoForcing;

impl Forcing for NoForcing {
    fn value(&self, _s: f64) -> Result<f64> {
        Ok(0.0)
    }
}

impl Forcing for FunctionSpec {
    fn value(&self, s: f64) -> Result<f64> {
        self.eval(0.0, s)
    }
}

/// A history `beta(t)` and its derivative, as functions of `t` only.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFunction {
    beta: FunctionSpec,
    beta_prime: FunctionSpec,
}

impl HistoryFunction {
    /// Derivative taken symbolically, or from the spline for sampled data.
    pub fn new(beta: FunctionSpec) -> Result<Self> {
        let beta_prime = beta.differentiate(Var::T, 1)?;
        Ok(Self { beta, beta_prime })
    }

    pub fn with_derivative(beta: FunctionSpec, beta_prime: FunctionSpec) -> Self {
        Self { beta, beta_prime }
    }

    pub fn zero() -> Self {
        Self::with_derivative(FunctionSpec::zero(), FunctionSpec::zero())
    }

    pub fn beta(&self) -> &FunctionSpec {
        &self.beta
    }

    pub fn beta_prime(&self) -> &FunctionSpec {
        &self.beta_prime
    }

    /// `|int_{-tau}^0 beta' - (beta(0) - beta(-tau))|`.
    pub fn consistency_residual(&self, tau: f64, quad: &QuadratureConfig) -> Result<f64> {
        let integral = integrate_piecewise(quad, &[-tau, 0.0], None, |s| self.derivative(s))?;
        Ok((integral - (self.value(0.0)? - self.value(-tau)?)).abs())
    }
}

impl History for HistoryFunction {
    fn value(&self, s: f64) -> Result<f64> {
        self.beta.eval(0.0, s)
    }

    fn derivative(&self, s: f64) -> Result<f64> {
        self.beta_prime.eval(0.0, s)
    }
}

fn panel_points(tau: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    pts.extend(knots_between(tau, lo, hi));
    pts.push(hi);
    pts
}

/// Solution with history `h` and no forcing.
pub fn solve_homogeneous<H: History + ?Sized>(
    p: &DelayOdeParams,
    h: &H,
    t: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    p.validate()?;
    ensure_finite("t", t)?;
    if t < -p.tau {
        return Err(Error::Domain(format!("t = {t} precedes the history interval")));
    }
    if t <= 0.0 {
        return h.value(t);
    }
    let tau = p.tau;
    let head = p.kernel(t) * h.value(-tau)?;
    // r = t - tau - s runs over [t - tau, t].
    let pts = panel_points(tau, t - tau, t);
    let tail = integrate_piecewise(quad, &pts, p.grading(), |r| {
        let s = t - tau - r;
        let k = p.kernel(r);
        if k == 0.0 {
            return Ok(0.0);
        }
        Ok(k * (h.derivative(s)? - p.a * h.value(s)?))
    })?;
    Ok(head + tail)
}

/// Solution with zero history and forcing `rho`.
pub fn solve_forced<F: Forcing + ?Sized>(
    p: &DelayOdeParams,
    rho: &F,
    t: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    p.validate()?;
    ensure_finite("t", t)?;
    if t < -p.tau {
        return Err(Error::Domain(format!("t = {t} precedes the history interval")));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let tau = p.tau;
    // r = t - tau - s runs over [-tau, t - tau].
    let pts = panel_points(tau, -tau, t - tau);
    integrate_piecewise(quad, &pts, p.grading(), |r| {
        let k = p.kernel(r);
        if k == 0.0 {
            return Ok(0.0);
        }
        Ok(k * rho.value(t - tau - r)?)
    })
}

/// `solve_homogeneous + solve_forced`.
pub fn superpose<H: History + ?Sized, F: Forcing + ?Sized>(
    p: &DelayOdeParams,
    h: &H,
    rho: &F,
    t: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    Ok(solve_homogeneous(p, h, t, quad)? + solve_forced(p, rho, t, quad)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delayed_exp::{delayed_exp_eval, DelayedExpParams};

    fn hist(src: &str) -> HistoryFunction {
        HistoryFunction::new(FunctionSpec::parse(src).unwrap()).unwrap()
    }

    #[test]
    fn no_delay_coupling_is_pure_exponential() {
        let p = DelayOdeParams::new(1.0, 0.0, 1.0).unwrap();
        let x = solve_homogeneous(&p, &hist("exp(t)"), 2.0, &Default::default()).unwrap();
        assert!((x - 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn unit_history_gives_delayed_exponential() {
        let p = DelayOdeParams::new(0.0, 1.0, 1.0).unwrap();
        let x = solve_homogeneous(&p, &hist("1"), 1.5, &Default::default()).unwrap();
        assert!((x - 2.625).abs() < 1e-13);
    }

    #[test]
    fn exponential_history_gives_fundamental_solution() {
        let (a, b, tau): (f64, f64, f64) = (-0.4, 0.9, 0.75);
        let p = DelayOdeParams::new(a, b, tau).unwrap();
        let h = HistoryFunction::new(FunctionSpec::parse(&format!("exp({a}*t)")).unwrap()).unwrap();
        let q = DelayedExpParams::new(p.b1(), tau).unwrap();
        for &t in &[0.3, 1.0, 2.2, 3.9] {
            let x = solve_homogeneous(&p, &h, t, &Default::default()).unwrap();
            let exact = (a * t).exp() * delayed_exp_eval(&q, t).unwrap();
            assert!((x - exact).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn forced_trivial_cases() {
        let p = DelayOdeParams::new(0.0, 0.0, 1.0).unwrap();
        let q = Default::default();
        assert!((solve_forced(&p, &|_s: f64| 1.0, 2.0, &q).unwrap() - 2.0).abs() < 1e-14);
        let p = DelayOdeParams::new(-1.0, 0.5, 1.0).unwrap();
        assert_eq!(solve_forced(&p, &NoForcing, 2.0, &q).unwrap(), 0.0);
        assert_eq!(solve_forced(&p, &|_s: f64| 1.0, -0.5, &q).unwrap(), 0.0);
    }

    #[test]
    fn history_interval_returns_beta() {
        let p = DelayOdeParams::new(0.3, 0.2, 1.0).unwrap();
        let x = solve_homogeneous(&p, &hist("1 + t"), -0.25, &Default::default()).unwrap();
        assert_eq!(x, 0.75);
        assert!(solve_homogeneous(&p, &hist("1"), -1.5, &Default::default()).is_err());
    }

    #[test]
    fn history_consistency() {
        let h = hist("cos(3*t)");
        assert!(h.consistency_residual(1.0, &Default::default()).unwrap() < 1e-13);
        let bad = HistoryFunction::with_derivative(
            FunctionSpec::parse("t").unwrap(),
            FunctionSpec::parse("2").unwrap(),
        );
        assert!((bad.consistency_residual(1.0, &Default::default()).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn stiff_mode_stays_finite() {
        let p = DelayOdeParams::new(-2.0e4, -1.0e4, 1.0).unwrap();
        assert!(p.b1().is_infinite());
        let x = solve_homogeneous(&p, &hist("1"), 2.5, &Default::default()).unwrap();
        // Quasi-steady balance a x(t) + b x(t - tau) = 0 away from knots.
        assert!((x + 0.125).abs() < 1e-3, "{x}");
    }
}
