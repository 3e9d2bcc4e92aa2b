//! The delayed exponential `exp_tau{b, t}`.
//!
//! It is `0` for `t < -tau`, `1` on `[-tau, 0)`, and on `[(k-1)tau, k tau)`
//! the polynomial
//!
//! ```text
//! sum_{j=0}^{k} b^j (t - (j-1) tau)^j / j!
//! ```
//!
//! It solves `x'(t) = b x(t - tau)` with unit history.

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayedExpParams {
    pub b: f64,
    pub tau: f64,
}

impl DelayedExpParams {
    pub fn new(b: f64, tau: f64) -> Result<Self> {
        let p = Self { b, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("b", self.b)?;
        ensure_finite("tau", self.tau)?;
        if self.tau <= 0.0 {
            return Err(Error::Input(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

/// Branch index `k` with `(k-1) tau <= t < k tau`; `0` on `[-tau, 0)`.
pub fn delayed_exp_segment_index(p: &DelayedExpParams, t: f64) -> Result<usize> {
    p.validate()?;
    ensure_finite("t", t)?;
    segment(p.tau, t)
}

fn segment(tau: f64, t: f64) -> Result<usize> {
    if t < -tau {
        return Err(Error::Domain(format!("t = {t} lies before -tau = {}", -tau)));
    }
    if t < 0.0 {
        return Ok(0);
    }
    Ok((t / tau).floor() as usize + 1)
}

/// Evaluates `exp_tau{b, t}`.
///
/// ```
/// use retard_heat::delayed_exp::{delayed_exp_eval, DelayedExpParams};
///
/// let p = DelayedExpParams::new(1.0, 1.0).unwrap();
/// assert_eq!(delayed_exp_eval(&p, 0.5).unwrap(), 1.5);
/// assert!((delayed_exp_eval(&p, 1.5).unwrap() - 2.625).abs() < 1e-15);
/// ```
pub fn delayed_exp_eval(p: &DelayedExpParams, t: f64) -> Result<f64> {
    p.validate()?;
    ensure_finite("t", t)?;
    if t < -p.tau {
        return Ok(0.0);
    }
    let k = segment(p.tau, t)?;
    let mut sum = 0.0;
    let mut carry = 0.0;
    for j in 0..=k {
        let s = t - (j as f64 - 1.0) * p.tau;
        // b^j s^j / j! as a running product keeps the factorial in range.
        let mut term = 1.0;
        for i in 1..=j {
            term *= p.b * s / i as f64;
        }
        let next = sum + term;
        carry += if sum.abs() >= term.abs() {
            (sum - next) + term
        } else {
            (term - next) + sum
        };
        sum = next;
    }
    let v = sum + carry;
    if !v.is_finite() {
        return Err(Error::Numeric(format!(
            "delayed exponential overflows at b = {}, t = {t}",
            p.b
        )));
    }
    Ok(v)
}

/// `e^{a (r + tau)} exp_tau{b e^{-a tau}, r}` for `r >= -tau`, evaluated term
/// by term in log space so that neither factor needs to be representable.
///
/// Equal to `sum_{j=0}^{k} b^j s_j^j e^{a s_j} / j!` with `s_j = r - (j-1) tau`.
pub fn scaled_kernel(a: f64, b: f64, tau: f64, r: f64) -> f64 {
    if r < -tau {
        return 0.0;
    }
    let k = if r < 0.0 { 0 } else { (r / tau).floor() as usize + 1 };
    let ln_b = b.abs().ln();
    let mut sum = 0.0;
    let mut ln_fact = 0.0;
    for j in 0..=k {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        let s = r - (j as f64 - 1.0) * tau;
        let term = if j == 0 {
            (a * s).exp()
        } else if b == 0.0 || s <= 0.0 {
            0.0
        } else {
            let mag = (j as f64 * (ln_b + s.ln()) + a * s - ln_fact).exp();
            if b < 0.0 && j % 2 == 1 {
                -mag
            } else {
                mag
            }
        };
        sum += term;
    }
    sum
}

/// Knots `k tau` strictly inside `(lo, hi)`, for `k >= -1`.
pub fn knots_between(tau: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = (lo / tau).floor().max(-1.0) as i64;
    loop {
        let knot = k as f64 * tau;
        if knot >= hi {
            break;
        }
        if knot > lo {
            out.push(knot);
        }
        k += 1;
    }
    out
}
