//! Composite Gauss–Legendre quadrature on piecewise-smooth integrands.
//!
//! Integrals are split at caller-supplied breakpoints (knots where the
//! integrand loses smoothness), optionally graded toward an exponential
//! boundary layer, and each resulting panel is refined by bisection until
//! the two-level difference drops below the configured tolerance.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings shared by every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel.
    pub nodes_per_panel: usize,
    /// Maximum bisection depth per panel.
    pub max_panel_splits: usize,
    /// Absolute tolerance on the two-level difference of a panel.
    pub abs_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes_per_panel: 16,
            max_panel_splits: 8,
            abs_tol: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 2 {
            return Err(Error::Input("nodes_per_panel must be at least 2".into()));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Input("abs_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn rule(&self) -> Result<Arc<GaussLegendre>> {
        self.validate()?;
        Ok(GaussLegendre::cached(self.nodes_per_panel))
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on the Legendre
    /// polynomial, starting from the Tricomi approximation of each root.
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Input("Gauss-Legendre rule needs at least one node".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    /// Shared, lazily built rule for `n` nodes.
    pub fn cached(n: usize) -> Arc<Self> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(rule) = cache.read().expect("quadrature cache poisoned").get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(Self::new(n.max(1)).expect("n >= 1"));
        cache
            .write()
            .expect("quadrature cache poisoned")
            .entry(n)
            .or_insert(rule)
            .clone()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn try_integrate(
        &self,
        a: f64,
        b: f64,
        mut f: impl FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in self.mapped(a, b) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Side of a panel carrying an exponential boundary layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSide {
    Left,
    Right,
}

/// Geometric grading of each panel toward a boundary layer of width `1/rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub rate: f64,
    pub side: LayerSide,
}

impl Grading {
    /// Grading for an integrand dominated by `exp(exponent * r)`.
    pub fn for_exponent(exponent: f64) -> Option<Self> {
        if exponent < 0.0 {
            Some(Self {
                rate: -exponent,
                side: LayerSide::Left,
            })
        } else if exponent > 0.0 {
            Some(Self {
                rate: exponent,
                side: LayerSide::Right,
            })
        } else {
            None
        }
    }

    fn split(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        let width = b - a;
        if self.rate * width <= 2.0 {
            return;
        }
        let mut d = 1.0 / self.rate;
        while d < width {
            let p = match self.side {
                LayerSide::Left => a + d,
                LayerSide::Right => b - d,
            };
            out.push(p);
            d *= 2.0;
        }
    }
}

/// Integrates `f` over `[breakpoints[0], breakpoints.last()]`, treating every
/// interior breakpoint as a panel boundary.
pub fn integrate_piecewise(
    cfg: &QuadratureConfig,
    breakpoints: &[f64],
    grading: Option<Grading>,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let rule = cfg.rule()?;
    let mut total = 0.0;
    let mut points = Vec::new();
    for pair in breakpoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        points.clear();
        points.push(a);
        if let Some(g) = grading {
            g.split(a, b, &mut points);
        }
        points.push(b);
        points.sort_by(|p, q| p.total_cmp(q));
        for sub in points.windows(2) {
            total += adaptive_panel(&rule, cfg, sub[0], sub[1], &mut f)?;
        }
    }
    Ok(total)
}

fn adaptive_panel(
    rule: &GaussLegendre,
    cfg: &QuadratureConfig,
    a: f64,
    b: f64,
    f: &mut impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let whole = rule.try_integrate(a, b, &mut *f)?;
    refine(rule, cfg, a, b, whole, cfg.max_panel_splits, f)
}

fn refine(
    rule: &GaussLegendre,
    cfg: &QuadratureConfig,
    a: f64,
    b: f64,
    whole: f64,
    depth: usize,
    f: &mut impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = rule.try_integrate(a, mid, &mut *f)?;
    let right = rule.try_integrate(mid, b, &mut *f)?;
    let refined = left + right;
    let residual = (refined - whole).abs();
    if !residual.is_finite() {
        return Err(Error::Quadrature { residual });
    }
    if residual <= cfg.abs_tol.max(1e-13 * refined.abs()) {
        return Ok(refined);
    }
    if depth == 0 {
        return Err(Error::Quadrature { residual });
    }
    Ok(refine(rule, cfg, a, mid, left, depth - 1, f)?
        + refine(rule, cfg, mid, b, right, depth - 1, f)?)
}
