//! Problem statements shared by the spectral solvers and the
//! finite-difference oracle.

use crate::error::{ensure_finite, Error, Result};
use crate::funcspec::{FunctionSpec, Var};

/// `v_t = a^2 v_xx + b v_x + c v + g` with initial data `psi` and Dirichlet
/// data `theta1`, `theta2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatProblem {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub l: f64,
    pub t_end: f64,
    pub g: FunctionSpec,
    pub psi: FunctionSpec,
    pub theta1: FunctionSpec,
    pub theta2: FunctionSpec,
}

impl HeatProblem {
    /// Binds the named constant `l` in every data function and validates.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        b: f64,
        c: f64,
        l: f64,
        t_end: f64,
        g: FunctionSpec,
        psi: FunctionSpec,
        theta1: FunctionSpec,
        theta2: FunctionSpec,
    ) -> Result<Self> {
        let bind = |f: FunctionSpec| f.bind(Some(l), None);
        let p = Self {
            a,
            b,
            c,
            l,
            t_end,
            g: bind(g),
            psi: bind(psi),
            theta1: bind(theta1),
            theta2: bind(theta2),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("l", self.l), ("T", self.t_end)] {
            ensure_finite(name, v)?;
        }
        if self.a == 0.0 {
            return Err(Error::Input("diffusion coefficient a must be nonzero".into()));
        }
        if self.l <= 0.0 || self.t_end <= 0.0 {
            return Err(Error::Input("l and T must be positive".into()));
        }
        if self.psi.depends_on(Var::T) {
            return Err(Error::Input("initial data psi must not depend on t".into()));
        }
        for (name, f) in [("theta1", &self.theta1), ("theta2", &self.theta2)] {
            if f.depends_on(Var::X) {
                return Err(Error::Input(format!("boundary data {name} must not depend on x")));
            }
        }
        Ok(())
    }

    /// `(|psi(0) - theta1(0)|, |psi(l) - theta2(0)|)`.
    pub fn corner_mismatch(&self) -> Result<(f64, f64)> {
        Ok((
            (self.psi.eval(0.0, 0.0)? - self.theta1.eval(0.0, 0.0)?).abs(),
            (self.psi.eval(self.l, 0.0)? - self.theta2.eval(0.0, 0.0)?).abs(),
        ))
    }

    pub fn mu(&self) -> f64 {
        -self.b / (2.0 * self.a * self.a)
    }

    pub fn gamma(&self) -> f64 {
        self.c - (self.b / (2.0 * self.a)).powi(2)
    }
}

/// `v_t = a1^2 v_xx + a2^2 v_xx(t-tau) + b1 v_x + b2 v_x(t-tau)
///      + d1 v + d2 v(t-tau) + g` with history `psi` on `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayHeatProblem {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub d1: f64,
    pub d2: f64,
    pub tau: f64,
    pub l: f64,
    pub t_end: f64,
    pub g: FunctionSpec,
    pub psi: FunctionSpec,
    pub theta1: FunctionSpec,
    pub theta2: FunctionSpec,
}

/// Coefficients of a delay problem, in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DelayCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub d1: f64,
    pub d2: f64,
}

impl DelayHeatProblem {
    /// Binds `l` and `tau` in every data function and validates.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: DelayCoefficients,
        tau: f64,
        l: f64,
        t_end: f64,
        g: FunctionSpec,
        psi: FunctionSpec,
        theta1: FunctionSpec,
        theta2: FunctionSpec,
    ) -> Result<Self> {
        let bind = |f: FunctionSpec| f.bind(Some(l), Some(tau));
        let p = Self {
            a1: k.a1,
            a2: k.a2,
            b1: k.b1,
            b2: k.b2,
            d1: k.d1,
            d2: k.d2,
            tau,
            l,
            t_end,
            g: bind(g),
            psi: bind(psi),
            theta1: bind(theta1),
            theta2: bind(theta2),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn coefficients(&self) -> DelayCoefficients {
        DelayCoefficients {
            a1: self.a1,
            a2: self.a2,
            b1: self.b1,
            b2: self.b2,
            d1: self.d1,
            d2: self.d2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.coefficients();
        for (name, v) in [
            ("a1", k.a1),
            ("a2", k.a2),
            ("b1", k.b1),
            ("b2", k.b2),
            ("d1", k.d1),
            ("d2", k.d2),
            ("tau", self.tau),
            ("l", self.l),
            ("T", self.t_end),
        ] {
            ensure_finite(name, v)?;
        }
        if k.a1 == 0.0 || k.a2 == 0.0 {
            return Err(Error::Input("a1 and a2 must be nonzero".into()));
        }
        if self.tau <= 0.0 || self.l <= 0.0 || self.t_end <= 0.0 {
            return Err(Error::Input("tau, l and T must be positive".into()));
        }
        for (name, f) in [("theta1", &self.theta1), ("theta2", &self.theta2)] {
            if f.depends_on(Var::X) {
                return Err(Error::Input(format!("boundary data {name} must not depend on x")));
            }
        }
        Ok(())
    }

    /// `(-b1/(2 a1^2), -b2/(2 a2^2))`.
    pub fn drift_ratios(&self) -> (f64, f64) {
        (
            -self.b1 / (2.0 * self.a1 * self.a1),
            -self.b2 / (2.0 * self.a2 * self.a2),
        )
    }

    /// Largest `|psi(0,t) - theta1(t)|` and `|psi(l,t) - theta2(t)|` over
    /// `samples + 1` equispaced points of `[-tau, 0]`.
    pub fn boundary_mismatch(&self, samples: usize) -> Result<(f64, f64)> {
        let (mut left, mut right) = (0.0f64, 0.0f64);
        for i in 0..=samples.max(1) {
            let t = -self.tau + self.tau * i as f64 / samples.max(1) as f64;
            left = left.max((self.psi.eval(0.0, t)? - self.theta1.eval(0.0, t)?).abs());
            right = right.max((self.psi.eval(self.l, t)? - self.theta2.eval(0.0, t)?).abs());
        }
        Ok((left, right))
    }
}
