//! Dirichlet sine basis on `(0, l)`: projection, synthesis, and decay fits.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::funcspec::FunctionSpec;
use crate::quadrature::{GaussLegendre, QuadratureConfig};

/// Eigenpairs `X_n(x) = sin(pi n x / l)`, `lambda_n = (pi n / l)^2`, `n = 1..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenBasis {
    pub l: f64,
    pub n: usize,
}

impl EigenBasis {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        ensure_finite("l", l)?;
        if l <= 0.0 {
            return Err(Error::Input(format!("domain length must be positive, got {l}")));
        }
        if n == 0 {
            return Err(Error::Input("at least one mode is required".into()));
        }
        Ok(Self { l, n })
    }

    /// `pi n / l`.
    pub fn frequency(&self, n: usize) -> f64 {
        PI * n as f64 / self.l
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.frequency(n).powi(2)
    }

    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        (self.frequency(n) * x).sin()
    }

    pub(crate) fn check_x(&self, x: f64) -> Result<f64> {
        let slack = 1e-12 * self.l;
        if !(x >= -slack && x <= self.l + slack) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.l)));
        }
        Ok(x.clamp(0.0, self.l))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientKind {
    Initial,
    Forcing,
    Generic,
}

/// Coefficients `c_1..c_N`; `values[0]` is `c_1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSequence {
    pub values: Vec<f64>,
    pub kind: CoefficientKind,
}

impl CoefficientSequence {
    pub fn new(values: Vec<f64>, kind: CoefficientKind) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite coefficient {v}")));
        }
        Ok(Self { values, kind })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `c_n` for `n >= 1`.
    pub fn get(&self, n: usize) -> f64 {
        self.values[n - 1]
    }
}

/// Precomputed quadrature for `(2/l) int_0^l f(x) sin(pi n x / l) dx`,
/// `n = 1..=N`, on a common composite Gauss grid.
#[derive(Debug, Clone)]
pub struct SpatialProjector {
    basis: EigenBasis,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `sines[(n - 1) * nodes.len() + i] = sin(pi n x_i / l)`.
    sines: Vec<f64>,
}

impl SpatialProjector {
    /// Uses `max(4, 2N) * refine` panels, so every panel spans at most half
    /// a period of the highest mode.
    pub fn new(basis: EigenBasis, quad: &QuadratureConfig, refine: usize) -> Result<Self> {
        let rule = quad.rule()?;
        let panels = (2 * basis.n).max(4) * refine.max(1);
        Ok(Self::with_rule(basis, &rule, panels))
    }

    fn with_rule(basis: EigenBasis, rule: &GaussLegendre, panels: usize) -> Self {
        let h = basis.l / panels as f64;
        let mut nodes = Vec::with_capacity(panels * rule.len());
        let mut weights = Vec::with_capacity(panels * rule.len());
        for p in 0..panels {
            let a = p as f64 * h;
            for (x, w) in rule.mapped(a, a + h) {
                nodes.push(x);
                weights.push(2.0 / basis.l * w);
            }
        }
        let mut sines = Vec::with_capacity(basis.n * nodes.len());
        for n in 1..=basis.n {
            let k = basis.frequency(n);
            sines.extend(nodes.iter().map(|x| (k * x).sin()));
        }
        Self {
            basis,
            nodes,
            weights,
            sines,
        }
    }

    /// Picks the coarsest refinement whose coefficients of `probe` agree with
    /// the next refinement to `quad.abs_tol`.
    pub fn resolve(
        basis: EigenBasis,
        quad: &QuadratureConfig,
        probes: &[&(dyn Fn(f64) -> Result<f64> + Sync)],
    ) -> Result<Self> {
        let mut current = Self::new(basis, quad, 1)?;
        let mut residual = f64::INFINITY;
        for level in 1..=quad.max_panel_splits.max(1) {
            let finer = Self::new(basis, quad, 2 << (level - 1))?;
            residual = 0.0;
            for probe in probes {
                let coarse = current.project_fn(probe)?;
                let fine = finer.project_fn(probe)?;
                let scale = fine.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                let diff = coarse
                    .iter()
                    .zip(&fine)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                residual = residual.max(diff / scale.max(1.0));
            }
            if residual <= quad.abs_tol {
                return Ok(current);
            }
            current = finer;
        }
        Err(Error::Quadrature { residual })
    }

    pub fn basis(&self) -> EigenBasis {
        self.basis
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Coefficients from samples at [`nodes`](Self::nodes).
    pub fn project(&self, samples: &[f64]) -> Vec<f64> {
        let m = self.nodes.len();
        debug_assert_eq!(samples.len(), m);
        let weighted: Vec<f64> = samples.iter().zip(&self.weights).map(|(f, w)| f * w).collect();
        (0..self.basis.n)
            .map(|k| {
                self.sines[k * m..(k + 1) * m]
                    .iter()
                    .zip(&weighted)
                    .map(|(s, fw)| s * fw)
                    .sum()
            })
            .collect()
    }

    pub fn project_fn(&self, f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
        let samples = self.nodes.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        if let Some(v) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite sample {v} during projection")));
        }
        Ok(self.project(&samples))
    }
}

/// Sine coefficients of `f(., 0)` on `[0, l]`.
pub fn sine_coefficients(
    f: &FunctionSpec,
    basis: &EigenBasis,
    quad: &QuadratureConfig,
) -> Result<CoefficientSequence> {
    let probe = |x: f64| f.eval(x, 0.0);
    let proj = SpatialProjector::resolve(*basis, quad, &[&probe])?;
    CoefficientSequence::new(proj.project_fn(probe)?, CoefficientKind::Generic)
}

/// `sum_n c_n sin(pi n x / l)`.
pub fn sine_synthesis(c: &CoefficientSequence, basis: &EigenBasis, x: f64) -> Result<f64> {
    let x = basis.check_x(x)?;
    Ok(c
        .values
        .iter()
        .enumerate()
        .map(|(i, cn)| cn * basis.eigenfunction(i + 1, x))
        .sum())
}

/// `sum_i c_i phi(i)` for eigenfunction values `|phi(i)| <= 1`, stopping once
/// the remaining coefficients, summed in absolute value, fall below `1e-14`
/// relative to the running sum. The bound uses coefficients rather than
/// terms because a term can vanish at a node of its eigenfunction while
/// later terms do not.
pub fn tail_sum(coeffs: &[f64], mut phi: impl FnMut(usize) -> f64) -> f64 {
    let mut rest: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let mut sum = 0.0f64;
    for (i, c) in coeffs.iter().enumerate() {
        if rest <= 1e-14 * sum.abs() {
            break;
        }
        sum += c * phi(i);
        rest -= c.abs();
    }
    sum
}

/// Least-squares fit `log|c_n| ~ log C - p log n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// Fitted decay exponent `p`.
    pub slope: f64,
    pub constant: f64,
    /// First and last `n` in the fitting window.
    pub window: (usize, usize),
    pub points: usize,
    /// Later half of the window decays markedly faster than the earlier half.
    pub super_polynomial: bool,
    pub threshold: Option<f64>,
    pub pass: Option<bool>,
}

impl DecayReport {
    /// Compares against `2m + 1/2 - fit_slack`.
    pub fn assess(mut self, m: u32, fit_slack: f64) -> Self {
        let threshold = 2.0 * m as f64 + 0.5;
        self.threshold = Some(threshold);
        self.pass = Some(self.super_polynomial || self.slope >= threshold - fit_slack);
        self
    }
}

pub const DEFAULT_FIT_SLACK: f64 = 0.25;
const MIN_FIT_POINTS: usize = 8;
/// Entries below this fraction of the largest one count as zero.
pub const ZERO_FRACTION: f64 = 1e-13;

/// Nonzero `(n, |c_n|)` pairs of the tail, as used by the fit.
pub fn usable_tail(values: &[f64]) -> Vec<(usize, f64)> {
    let max = values.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let usable: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_finite() && c.abs() > ZERO_FRACTION * max && **c != 0.0)
        .map(|(i, c)| (i + 1, c.abs()))
        .collect();
    if usable.len() >= 2 * MIN_FIT_POINTS {
        usable[usable.len() / 2..].to_vec()
    } else {
        usable
    }
}

fn fit_line(pts: &[(usize, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (n, c)| (sx + (*n as f64).ln(), sy + c.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(sxx, sxy), (n, c)| {
        let dx = (*n as f64).ln() - mx;
        (sxx + dx * dx, sxy + dx * (c.ln() - my))
    });
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn decay_fit(c: &CoefficientSequence) -> Result<DecayReport> {
    decay_fit_values(&c.values)
}

pub fn decay_fit_values(values: &[f64]) -> Result<DecayReport> {
    let tail = usable_tail(values);
    if tail.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: tail.len(),
        });
    }
    let (slope, intercept) = fit_line(&tail);
    let half = tail.len() / 2;
    let (early, _) = fit_line(&tail[..half]);
    let (late, _) = fit_line(&tail[half..]);
    let (p_early, p_late) = (-early, -late);
    Ok(DecayReport {
        slope: -slope,
        constant: intercept.exp(),
        window: (tail[0].0, tail[tail.len() - 1].0),
        points: tail.len(),
        super_polynomial: p_late > 1.25 * p_early.max(0.0) + 0.5,
        threshold: None,
        pass: None,
    })
}

/// Finite-N view of `sum n^{4m} |w_n|^2 < inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipDiagnostic {
    pub m: u32,
    pub partial_sums: Vec<f64>,
    /// Share of the final partial sum contributed by the upper half of modes.
    pub tail_fraction: f64,
    pub likely_member: bool,
}

pub fn membership_diagnostic(c: &CoefficientSequence, m: u32) -> MembershipDiagnostic {
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = c
        .values
        .iter()
        .enumerate()
        .map(|(i, w)| {
            acc += ((i + 1) as f64).powi(4 * m as i32) * w * w;
            acc
        })
        .collect();
    let total = partial_sums.last().copied().unwrap_or(0.0);
    let mid = partial_sums.get(partial_sums.len() / 2).copied().unwrap_or(0.0);
    let tail_fraction = if total > 0.0 { (total - mid) / total } else { 0.0 };
    MembershipDiagnostic {
        m,
        partial_sums,
        tail_fraction,
        likely_member: tail_fraction < 0.05,
    }
}

/// Per-mode parallel map with results kept in mode order.
pub(crate) fn par_modes<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    (1..=n).into_par_iter().map(&f).collect()
}
