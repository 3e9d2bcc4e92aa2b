//! Data functions of `(x, t)`: closed-form expressions or sampled grids.
//!
//! ```
//! use retard_heat::funcspec::{FunctionSpec, Var};
//!
//! let f = FunctionSpec::parse("t^2").unwrap();
//! assert_eq!(f.differentiate(Var::T, 1).unwrap().to_string(), "2*t");
//! ```

mod expr;
mod parse;
mod sampled;

use std::fmt;
use std::sync::Arc;

pub use expr::{BinOp, Env, Expr, Func, Named, Node, SampledLeaf, Var};
pub use parse::parse_expr;
pub use sampled::{Interp, Interp1d, SampledFn};

use crate::error::{Error, Result};

/// Values bound to the named constants `l` and `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Consts {
    pub l: Option<f64>,
    pub tau: Option<f64>,
}

/// A data function together with its constant bindings.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    expr: Expr,
    consts: Consts,
}

impl FunctionSpec {
    pub fn parse(src: &str) -> Result<Self> {
        if src.trim().is_empty() {
            return Err(Error::Syntax {
                offset: 0,
                message: "empty expression".into(),
                expected: vec!["expression".into()],
            });
        }
        Ok(Self::from_expr(parse_expr(src)?))
    }

    pub fn from_expr(expr: Expr) -> Self {
        Self {
            expr,
            consts: Consts::default(),
        }
    }

    pub fn sampled(data: SampledFn) -> Self {
        Self::from_expr(Expr::sampled(Arc::new(data)))
    }

    pub fn constant(v: f64) -> Self {
        Self::from_expr(Expr::num(v))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Binds `l` and `tau`; `None` leaves a constant unbound.
    pub fn bind(mut self, l: Option<f64>, tau: Option<f64>) -> Self {
        self.consts = Consts { l, tau };
        self
    }

    pub fn consts(&self) -> Consts {
        self.consts
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        self.expr.eval(&Env {
            x,
            t,
            l: self.consts.l,
            tau: self.consts.tau,
        })
    }

    pub fn differentiate(&self, var: Var, order: u8) -> Result<Self> {
        let mut e = self.expr.clone();
        for _ in 0..order {
            e = e.derivative(var)?;
        }
        Ok(self.with_expr(e))
    }

    pub fn depends_on(&self, var: Var) -> bool {
        self.expr.depends_on(var)
    }

    /// True when the function is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    /// Greatest derivative order per axis this function supports; `None`
    /// for closed-form expressions.
    pub fn smoothness(&self) -> Option<u8> {
        self.expr
            .sampled_leaves()
            .iter()
            .map(|leaf| leaf.data.interp().max_order().saturating_sub(leaf.dx.max(leaf.dt)))
            .min()
    }

    /// `t -> scale * t + offset`.
    pub fn map_time(&self, scale: f64, offset: f64) -> Self {
        self.with_expr(self.expr.map_time(scale, offset))
    }

    /// Applies a binary combinator, keeping this function's constants.
    pub fn combine(&self, other: &Self, op: impl FnOnce(Expr, Expr) -> Expr) -> Self {
        self.with_expr(op(self.expr.clone(), other.expr.clone()))
    }

    pub fn map(&self, op: impl FnOnce(Expr) -> Expr) -> Self {
        self.with_expr(op(self.expr.clone()))
    }

    fn with_expr(&self, expr: Expr) -> Self {
        Self {
            expr,
            consts: self.consts,
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(src: &str) -> FunctionSpec {
        FunctionSpec::parse(src).unwrap().bind(Some(2.0), Some(0.5))
    }

    #[test]
    fn eigenfunction_evaluates_to_one_at_midpoint() {
        assert!((spec("sin(pi*x/l)").eval(1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn time_derivative_of_product() {
        let d = spec("x*(l−x)*exp(−t)").differentiate(Var::T, 1).unwrap();
        assert!((d.eval(1.0, 0.0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_space_derivative_of_eigenfunction() {
        let d = spec("sin(pi*x/l)").differentiate(Var::X, 2).unwrap();
        for &x in &[0.1, 0.7, 1.3] {
            let exact = -(PI / 2.0).powi(2) * (PI * x / 2.0).sin();
            assert!((d.eval(x, 0.0).unwrap() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn unbound_constant() {
        let f = FunctionSpec::parse("x/l").unwrap();
        assert_eq!(f.eval(1.0, 0.0).unwrap_err(), Error::Unbound("l"));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(spec("log(x)").eval(0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(spec("sqrt(x - 1)").eval(0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(spec("1/x").eval(0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn time_map_shifts_samples_and_expressions() {
        let ts: Vec<f64> = (0..=20).map(|i| -1.0 + i as f64 * 0.1).collect();
        let ys = ts.iter().map(|t| t * t).collect();
        let s = FunctionSpec::sampled(SampledFn::along_t(ts, ys, Interp::Cubic).unwrap());
        let shifted = s.map_time(1.0, -0.5);
        assert!((shifted.eval(0.0, 0.2).unwrap() - 0.09).abs() < 1e-13);
        let d = shifted.differentiate(Var::T, 1).unwrap();
        assert!((d.eval(0.0, 0.2).unwrap() + 0.6).abs() < 1e-12);
        let e = spec("t^2").map_time(2.0, 1.0);
        assert_eq!(e.eval(0.0, 1.0).unwrap(), 9.0);
    }

    #[test]
    fn linear_samples_reject_second_derivative() {
        let s = FunctionSpec::sampled(
            SampledFn::along_x(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0], Interp::Linear).unwrap(),
        );
        assert!(matches!(s.differentiate(Var::X, 2), Err(Error::Unsupported(_))));
        assert_eq!(s.smoothness(), Some(1));
    }
}
