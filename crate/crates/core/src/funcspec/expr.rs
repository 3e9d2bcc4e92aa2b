// Float literal guards read better than float patterns, and the
// constructor names mirror the operators on purpose.
#![allow(clippy::redundant_guards, clippy::should_implement_trait)]

use std::fmt;
use std::sync::Arc;

use super::sampled::SampledFn;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Named {
    Pi,
    L,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// A sampled-data leaf: derivative orders and an affine time map
/// `t -> t_scale * t + t_offset` applied before lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLeaf {
    pub data: Arc<SampledFn>,
    pub dx: u8,
    pub dt: u8,
    pub t_scale: f64,
    pub t_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Named(Named),
    Neg(Expr),
    Binary(BinOp, Expr, Expr),
    Call(Func, Expr),
    Sampled(SampledLeaf),
}

/// Immutable expression tree with cheap clones.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

/// Variable and constant values for evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Env {
    pub x: f64,
    pub t: f64,
    pub l: Option<f64>,
    pub tau: Option<f64>,
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn num(v: f64) -> Self {
        Self::wrap(Node::Num(v))
    }

    pub fn var(v: Var) -> Self {
        Self::wrap(Node::Var(v))
    }

    pub fn named(n: Named) -> Self {
        Self::wrap(Node::Named(n))
    }

    pub fn sampled(data: Arc<SampledFn>) -> Self {
        Self::wrap(Node::Sampled(SampledLeaf {
            data,
            dx: 0,
            dt: 0,
            t_scale: 1.0,
            t_offset: 0.0,
        }))
    }

    /// Raw constructors keep the tree exactly as parsed.
    pub fn raw_neg(e: Expr) -> Self {
        Self::wrap(Node::Neg(e))
    }

    pub fn raw_binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Self::wrap(Node::Binary(op, l, r))
    }

    pub fn raw_call(f: Func, e: Expr) -> Self {
        Self::wrap(Node::Call(f, e))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self.node() {
            Node::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    // Simplifying constructors used by differentiation and reductions.

    pub fn neg(e: Expr) -> Self {
        match e.node() {
            Node::Num(v) => Expr::num(-v),
            Node::Neg(inner) => inner.clone(),
            _ => Self::raw_neg(e),
        }
    }

    pub fn add(l: Expr, r: Expr) -> Self {
        match (l.as_num(), r.as_num()) {
            (Some(a), Some(b)) => Expr::num(a + b),
            (Some(a), _) if a == 0.0 => r,
            (_, Some(b)) if b == 0.0 => l,
            _ => match r.node() {
                Node::Neg(inner) => Self::raw_binary(BinOp::Sub, l, inner.clone()),
                _ => Self::raw_binary(BinOp::Add, l, r),
            },
        }
    }

    pub fn sub(l: Expr, r: Expr) -> Self {
        match (l.as_num(), r.as_num()) {
            (Some(a), Some(b)) => Expr::num(a - b),
            (Some(a), _) if a == 0.0 => Expr::neg(r),
            (_, Some(b)) if b == 0.0 => l,
            _ => Self::raw_binary(BinOp::Sub, l, r),
        }
    }

    pub fn mul(l: Expr, r: Expr) -> Self {
        match (l.as_num(), r.as_num()) {
            (Some(a), Some(b)) => Expr::num(a * b),
            (Some(a), _) if a == 0.0 => Expr::num(0.0),
            (_, Some(b)) if b == 0.0 => Expr::num(0.0),
            (Some(a), _) if a == 1.0 => r,
            (_, Some(b)) if b == 1.0 => l,
            (Some(a), _) if a == -1.0 => Expr::neg(r),
            (_, Some(b)) if b == -1.0 => Expr::neg(l),
            _ => Self::raw_binary(BinOp::Mul, l, r),
        }
    }

    pub fn div(l: Expr, r: Expr) -> Self {
        match (l.as_num(), r.as_num()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::num(a / b),
            (Some(a), _) if a == 0.0 => Expr::num(0.0),
            (_, Some(b)) if b == 1.0 => l,
            _ => Self::raw_binary(BinOp::Div, l, r),
        }
    }

    pub fn pow(l: Expr, r: Expr) -> Self {
        match (l.as_num(), r.as_num()) {
            (Some(a), Some(b)) => Expr::num(a.powf(b)),
            (_, Some(b)) if b == 0.0 => Expr::num(1.0),
            (_, Some(b)) if b == 1.0 => l,
            _ => Self::raw_binary(BinOp::Pow, l, r),
        }
    }

    pub fn call(f: Func, e: Expr) -> Self {
        match (f, e.as_num()) {
            (Func::Sin, Some(v)) if v == 0.0 => Expr::num(0.0),
            (Func::Cos, Some(v)) if v == 0.0 => Expr::num(1.0),
            (Func::Exp, Some(v)) if v == 0.0 => Expr::num(1.0),
            _ => Self::raw_call(f, e),
        }
    }

    pub fn eval(&self, env: &Env) -> Result<f64> {
        let v = match self.node() {
            Node::Num(v) => *v,
            Node::Var(Var::X) => env.x,
            Node::Var(Var::T) => env.t,
            Node::Named(Named::Pi) => std::f64::consts::PI,
            Node::Named(Named::L) => env.l.ok_or(Error::Unbound("l"))?,
            Node::Named(Named::Tau) => env.tau.ok_or(Error::Unbound("tau"))?,
            Node::Neg(e) => -e.eval(env)?,
            Node::Binary(op, l, r) => {
                let a = l.eval(env)?;
                let b = r.eval(env)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::Domain(format!("division by zero in `{self}`")));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Node::Call(f, e) => {
                let a = e.eval(env)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(Error::Domain(format!("log of non-positive value {a}")));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(Error::Domain(format!("sqrt of negative value {a}")));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                }
            }
            Node::Sampled(leaf) => {
                let t = leaf.t_scale * env.t + leaf.t_offset;
                leaf.data.eval(env.x, t, leaf.dx, leaf.dt)?
            }
        };
        if v.is_nan() {
            return Err(Error::Domain(format!("`{self}` is undefined at x={}, t={}", env.x, env.t)));
        }
        Ok(v)
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self.node() {
            Node::Num(_) | Node::Named(_) => false,
            Node::Var(v) => *v == var,
            Node::Neg(e) | Node::Call(_, e) => e.depends_on(var),
            Node::Binary(_, l, r) => l.depends_on(var) || r.depends_on(var),
            Node::Sampled(leaf) => match var {
                Var::X => leaf.data.has_x(),
                Var::T => leaf.data.has_t() && leaf.t_scale != 0.0,
            },
        }
    }

    /// Number of nodes counted as a tree, saturating at `cap`.
    pub fn size_up_to(&self, cap: usize) -> usize {
        let mut count = 0;
        self.count_nodes(cap, &mut count);
        count
    }

    fn count_nodes(&self, cap: usize, count: &mut usize) {
        if *count >= cap {
            return;
        }
        *count += 1;
        match self.node() {
            Node::Neg(e) | Node::Call(_, e) => e.count_nodes(cap, count),
            Node::Binary(_, l, r) => {
                l.count_nodes(cap, count);
                r.count_nodes(cap, count);
            }
            _ => {}
        }
    }

    /// Symbolic first derivative with respect to `var`.
    pub fn derivative(&self, var: Var) -> Result<Expr> {
        if !self.depends_on(var) {
            return Ok(Expr::num(0.0));
        }
        Ok(match self.node() {
            Node::Num(_) | Node::Named(_) => Expr::num(0.0),
            Node::Var(v) => Expr::num(if *v == var { 1.0 } else { 0.0 }),
            Node::Neg(e) => Expr::neg(e.derivative(var)?),
            Node::Binary(op, u, v) => {
                let du = u.derivative(var)?;
                let dv = v.derivative(var)?;
                match op {
                    BinOp::Add => Expr::add(du, dv),
                    BinOp::Sub => Expr::sub(du, dv),
                    BinOp::Mul => Expr::add(Expr::mul(du, v.clone()), Expr::mul(u.clone(), dv)),
                    BinOp::Div => Expr::div(
                        Expr::sub(Expr::mul(du, v.clone()), Expr::mul(u.clone(), dv)),
                        Expr::pow(v.clone(), Expr::num(2.0)),
                    ),
                    BinOp::Pow => {
                        if v.depends_on(var) {
                            // d(u^v) = u^v * (v' ln u + v u'/u)
                            Expr::mul(
                                self.clone(),
                                Expr::add(
                                    Expr::mul(dv, Expr::call(Func::Log, u.clone())),
                                    Expr::div(Expr::mul(v.clone(), du), u.clone()),
                                ),
                            )
                        } else {
                            let lowered = match v.as_num() {
                                Some(p) => Expr::num(p - 1.0),
                                None => Expr::sub(v.clone(), Expr::num(1.0)),
                            };
                            Expr::mul(Expr::mul(v.clone(), Expr::pow(u.clone(), lowered)), du)
                        }
                    }
                }
            }
            Node::Call(f, u) => {
                let du = u.derivative(var)?;
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, u.clone()),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, u.clone())),
                    Func::Exp => self.clone(),
                    Func::Log => Expr::div(Expr::num(1.0), u.clone()),
                    Func::Sqrt => Expr::div(Expr::num(1.0), Expr::mul(Expr::num(2.0), self.clone())),
                    Func::Abs => Expr::div(u.clone(), self.clone()),
                };
                Expr::mul(outer, du)
            }
            Node::Sampled(leaf) => {
                let mut next = leaf.clone();
                let factor = match var {
                    Var::X => {
                        next.dx += 1;
                        1.0
                    }
                    Var::T => {
                        next.dt += 1;
                        leaf.t_scale
                    }
                };
                leaf.data.check_order(next.dx, next.dt)?;
                Expr::mul(Expr::num(factor), Expr::wrap(Node::Sampled(next)))
            }
        })
    }

    /// Replaces `t` by `scale * t + offset` throughout.
    pub fn map_time(&self, scale: f64, offset: f64) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Named(_) | Node::Var(Var::X) => self.clone(),
            Node::Var(Var::T) => Expr::add(
                Expr::mul(Expr::num(scale), Expr::var(Var::T)),
                Expr::num(offset),
            ),
            Node::Neg(e) => Expr::neg(e.map_time(scale, offset)),
            Node::Binary(op, l, r) => {
                let (l, r) = (l.map_time(scale, offset), r.map_time(scale, offset));
                match op {
                    BinOp::Add => Expr::add(l, r),
                    BinOp::Sub => Expr::sub(l, r),
                    BinOp::Mul => Expr::mul(l, r),
                    BinOp::Div => Expr::div(l, r),
                    BinOp::Pow => Expr::pow(l, r),
                }
            }
            Node::Call(f, e) => Expr::call(*f, e.map_time(scale, offset)),
            Node::Sampled(leaf) => {
                let mut next = leaf.clone();
                next.t_offset = leaf.t_scale * offset + leaf.t_offset;
                next.t_scale = leaf.t_scale * scale;
                Expr::wrap(Node::Sampled(next))
            }
        }
    }

    /// Highest derivative order reachable on sampled leaves, if any.
    pub fn sampled_leaves(&self) -> Vec<&SampledLeaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a SampledLeaf>) {
        match self.node() {
            Node::Sampled(leaf) => out.push(leaf),
            Node::Neg(e) | Node::Call(_, e) => e.collect_leaves(out),
            Node::Binary(_, l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
            _ => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Binary(op, _, _) => op.precedence(),
            Node::Neg(_) => 3,
            Node::Num(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(v) => {
                if *v < 0.0 {
                    write!(f, "-{}", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Node::Var(Var::X) => f.write_str("x"),
            Node::Var(Var::T) => f.write_str("t"),
            Node::Named(Named::Pi) => f.write_str("pi"),
            Node::Named(Named::L) => f.write_str("l"),
            Node::Named(Named::Tau) => f.write_str("tau"),
            Node::Neg(e) => {
                if e.precedence() < 3 {
                    write!(f, "-({e})")
                } else {
                    write!(f, "-{e}")
                }
            }
            Node::Binary(op, l, r) => {
                let p = op.precedence();
                let left_parens = if *op == BinOp::Pow {
                    l.precedence() <= p
                } else {
                    l.precedence() < p
                };
                let right_parens = if *op == BinOp::Pow {
                    r.precedence() < 3
                } else {
                    r.precedence() <= p
                };
                if left_parens {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                f.write_str(op.symbol())?;
                if right_parens {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
            Node::Call(func, e) => write!(f, "{}({e})", func.name()),
            Node::Sampled(leaf) => {
                write!(f, "sampled")?;
                if leaf.dx > 0 || leaf.dt > 0 {
                    write!(f, "[dx{} dt{}]", leaf.dx, leaf.dt)?;
                }
                Ok(())
            }
        }
    }
}
