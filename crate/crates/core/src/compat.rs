//! Compatibility, decay and regularity checks run before a series solve.
//!
//! Corner and boundary mismatches are hard requirements. The decay checks are
//! sufficient conditions for uniform convergence of the series; from finitely
//! many modes they can only be judged through a fitted log-log slope, so they
//! are advisory.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspec::{Expr, FunctionSpec, Var};
use crate::heat_delay::{reduce_delay, ModeSystem, COMPAT_SAMPLES};
use crate::heat_nodelay::{reduce, Conventions, NoDelayModes};
use crate::paths::ModePaths;
use crate::problem::{DelayHeatProblem, HeatProblem};
use crate::quadrature::QuadratureConfig;
use crate::spectral::{decay_fit_values, usable_tail, DecayReport, EigenBasis, DEFAULT_FIT_SLACK, ZERO_FRACTION};

pub const DEFAULT_DELTA: f64 = 0.5;
/// Fewest modes for which decay slopes are fitted.
pub const MIN_MODES: usize = 16;
/// Expressions larger than this are not differentiated further.
const MAX_EXPR_NODES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Unverifiable,
}

/// One identity evaluated on sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualCheck {
    pub name: String,
    /// Largest absolute residual; absent when unverifiable.
    pub residual: Option<f64>,
    pub tol: f64,
    pub status: CheckStatus,
    pub note: Option<String>,
}

impl ResidualCheck {
    fn measured(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            residual: Some(residual),
            tol,
            status: if residual <= tol { CheckStatus::Pass } else { CheckStatus::Fail },
            note: None,
        }
    }

    fn unverifiable(name: impl Into<String>, tol: f64, why: String) -> Self {
        Self {
            name: name.into(),
            residual: None,
            tol,
            status: CheckStatus::Unverifiable,
            note: Some(why),
        }
    }
}

/// `n^power q_n -> 0`, judged by the fitted slope of `log(n^power q_n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCondition {
    pub name: String,
    pub power: f64,
    /// `power - p`, where `p` is the fitted decay exponent of `q_n`.
    pub slope: Option<f64>,
    pub fit: Option<DecayReport>,
    pub fit_slack: f64,
    pub status: CheckStatus,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatReport {
    /// Largest `|psi - theta1|` at `x = 0` and `|psi - theta2|` at `x = l`.
    pub boundary_mismatches: Option<(f64, f64)>,
    pub boundary_checks: Vec<ResidualCheck>,
    pub decay_results: Vec<DecayCondition>,
    pub corollary_checks: Vec<ResidualCheck>,
    pub m: u32,
    pub delta: f64,
}

impl CompatReport {
    fn empty(m: u32, delta: f64) -> Self {
        Self {
            boundary_mismatches: None,
            boundary_checks: Vec::new(),
            decay_results: Vec::new(),
            corollary_checks: Vec::new(),
            m,
            delta,
        }
    }

    /// Appends the findings of `other`.
    pub fn merge(mut self, other: CompatReport) -> Self {
        if self.boundary_mismatches.is_none() {
            self.boundary_mismatches = other.boundary_mismatches;
        }
        self.boundary_checks.extend(other.boundary_checks);
        self.decay_results.extend(other.decay_results);
        self.corollary_checks.extend(other.corollary_checks);
        self
    }

    /// A boundary check failed; the series solution would be discontinuous.
    pub fn hard_failure(&self) -> bool {
        self.boundary_checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    /// A sufficient condition failed; the solve may still be attempted.
    pub fn advisory_failure(&self) -> bool {
        self.decay_results.iter().any(|c| c.status == CheckStatus::Fail)
            || self.corollary_checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    pub fn all_pass(&self) -> bool {
        !self.hard_failure() && !self.advisory_failure()
    }
}

fn sample_times(a: f64, b: f64, samples: usize) -> Vec<f64> {
    (0..=samples)
        .map(|i| if i == samples { b } else { a + (b - a) * i as f64 / samples as f64 })
        .collect()
}

fn max_abs_over(times: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in times {
        worst = worst.max(f(t)?.abs());
    }
    Ok(worst)
}

/// History and boundary data of the delay problem compared on
/// `COMPAT_SAMPLES + 1` points of `[-tau, 0]`.
pub fn check_compatibility_delay(p: &DelayHeatProblem, comp_tol: f64) -> Result<CompatReport> {
    let (m0, ml) = p.boundary_mismatch(COMPAT_SAMPLES)?;
    let mut r = CompatReport::empty(0, DEFAULT_DELTA);
    r.boundary_mismatches = Some((m0, ml));
    r.boundary_checks.push(ResidualCheck::measured("psi(0, t) = theta1(t)", m0, comp_tol));
    r.boundary_checks.push(ResidualCheck::measured("psi(l, t) = theta2(t)", ml, comp_tol));
    Ok(r)
}

/// Corner conditions `psi(0) = theta1(0)` and `psi(l) = theta2(0)`.
pub fn check_compatibility_nodelay(p: &HeatProblem, comp_tol: f64) -> Result<CompatReport> {
    let (m0, ml) = p.corner_mismatch()?;
    let mut r = CompatReport::empty(0, DEFAULT_DELTA);
    r.boundary_mismatches = Some((m0, ml));
    r.boundary_checks.push(ResidualCheck::measured("psi(0) = theta1(0)", m0, comp_tol));
    r.boundary_checks.push(ResidualCheck::measured("psi(l) = theta2(0)", ml, comp_tol));
    Ok(r)
}

/// Judges `n^power q_n -> 0` from the finite sequence `q`.
pub fn decay_condition(name: &str, q: &[f64], power: f64, fit_slack: f64) -> DecayCondition {
    let mut out = DecayCondition {
        name: name.into(),
        power,
        slope: None,
        fit: None,
        fit_slack,
        status: CheckStatus::Unverifiable,
        note: None,
    };
    let tail = usable_tail(q);
    let last_nonzero = tail.last().map_or(0, |(n, _)| *n);
    match decay_fit_values(q) {
        Ok(fit) => {
            let slope = power - fit.slope;
            out.status = if fit.super_polynomial || slope < -fit_slack {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            if fit.super_polynomial {
                out.note = Some("faster than any power over the fitted window".into());
            }
            out.slope = Some(slope);
            out.fit = Some(fit);
        }
        Err(_) if last_nonzero <= q.len() / 2 => {
            out.status = CheckStatus::Pass;
            out.note = Some(if last_nonzero == 0 {
                "sequence vanishes".into()
            } else {
                format!("coefficients vanish beyond n = {last_nonzero}")
            });
        }
        Err(e) => out.note = Some(e.to_string()),
    }
    out
}

/// `max_node sum_i w_i |P_i(n)|`. Entries of each path below
/// `ZERO_FRACTION` of its largest entry are treated as zero, so the weights
/// do not promote rounding noise into a spurious growing tail.
fn weighted_path_max(terms: &[(&ModePaths, f64)], n: usize) -> f64 {
    let k = n - 1;
    let floors: Vec<f64> = terms
        .iter()
        .map(|(p, _)| ZERO_FRACTION * (0..p.width()).map(|j| p.max_abs(j)).fold(0.0, f64::max))
        .collect();
    let cols: Vec<Vec<f64>> = terms.iter().map(|(p, _)| p.component(k).collect()).collect();
    let mut worst = 0.0f64;
    for node in 0..cols[0].len() {
        let mut s = 0.0;
        for ((col, (_, w)), floor) in cols.iter().zip(terms).zip(&floors) {
            let v = col[node].abs();
            if v > *floor {
                s += w * v;
            }
        }
        worst = worst.max(s);
    }
    worst
}

/// Finite-mode proxies for the three decay conditions that guarantee uniform
/// convergence of the delay series and its derivatives on `[0, T]`:
///
/// ```text
/// n^{2m+3+delta} |Phi_n(-tau)|                                   -> 0
/// n^{2m+1+delta} max_s [|Phi_n''| + n^2 |Phi_n'| + n^4 |Phi_n|]  -> 0
/// n^{2m-1+delta} max_s [|F_n'| + n^2 |F_n|]                      -> 0
/// ```
pub fn check_decay_conditions(ms: &ModeSystem, m: u32, delta: f64, fit_slack: f64) -> Result<CompatReport> {
    let n_modes = ms.basis.n;
    if n_modes < MIN_MODES {
        return Err(Error::InsufficientData { needed: MIN_MODES, got: n_modes });
    }
    if m == 0 || !(delta > 0.0) {
        return Err(Error::Input(format!("need m >= 1 and delta > 0, got m = {m}, delta = {delta}")));
    }
    let mf = m as f64;
    let mut r = CompatReport::empty(m, delta);

    let q1 = (1..=n_modes)
        .map(|n| ms.phi.eval(n - 1, -ms.tau).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    r.decay_results.push(decay_condition("n^(2m+3+delta) |Phi_n(-tau)|", &q1, 2.0 * mf + 3.0 + delta, fit_slack));

    let name2 = "n^(2m+1+delta) max [|Phi_n''| + n^2 |Phi_n'| + n^4 |Phi_n|]";
    let power2 = 2.0 * mf + 1.0 + delta;
    match &ms.phi_second {
        Some(second) => {
            let q2: Vec<f64> = (1..=n_modes)
                .map(|n| {
                    let nf = n as f64;
                    weighted_path_max(&[(second, 1.0), (&ms.phi_prime, nf * nf), (&ms.phi, nf.powi(4))], n)
                })
                .collect();
            r.decay_results.push(decay_condition(name2, &q2, power2, fit_slack));
        }
        None => r.decay_results.push(DecayCondition {
            name: name2.into(),
            power: power2,
            slope: None,
            fit: None,
            fit_slack,
            status: CheckStatus::Unverifiable,
            note: Some("history data has no second time derivative".into()),
        }),
    }

    let name3 = "n^(2m-1+delta) max [|F_n'| + n^2 |F_n|]";
    let power3 = 2.0 * mf - 1.0 + delta;
    match &ms.forcing_prime {
        Some(prime) => {
            let q3: Vec<f64> = (1..=n_modes)
                .map(|n| {
                    let nf = n as f64;
                    weighted_path_max(&[(prime, 1.0), (&ms.forcing, nf * nf)], n)
                })
                .collect();
            r.decay_results.push(decay_condition(name3, &q3, power3, fit_slack));
        }
        None => r.decay_results.push(DecayCondition {
            name: name3.into(),
            power: power3,
            slope: None,
            fit: None,
            fit_slack,
            status: CheckStatus::Unverifiable,
            note: Some("forcing has no time derivative".into()),
        }),
    }
    Ok(r)
}

/// Repeated symbolic derivative, or the reason it is unavailable.
fn derivative(f: &FunctionSpec, dx: u8, dt: u8) -> std::result::Result<FunctionSpec, String> {
    let mut g = f.clone();
    for (var, order) in [(Var::X, dx), (Var::T, dt)] {
        for _ in 0..order {
            g = g.differentiate(var, 1).map_err(|e| e.to_string())?;
            if g.expr().size_up_to(MAX_EXPR_NODES) >= MAX_EXPR_NODES {
                return Err("derivative expression too large".into());
            }
        }
    }
    Ok(g)
}

fn residual_check(
    name: String,
    built: std::result::Result<FunctionSpec, String>,
    xs: &[f64],
    times: &[f64],
    tol: f64,
) -> Result<ResidualCheck> {
    match built {
        Err(why) => Ok(ResidualCheck::unverifiable(name, tol, why)),
        Ok(f) => {
            let mut worst = 0.0f64;
            for &x in xs {
                worst = worst.max(max_abs_over(times, |t| f.eval(x, t))?);
            }
            Ok(ResidualCheck::measured(name, worst, tol))
        }
    }
}

/// `h'(t) ... ` style boundary identity `F^{(k)}(x0, t) = 0` for the lifted
/// forcing, written in terms of `f` and `mu`.
fn boundary_identity(
    f: &FunctionSpec,
    mu: &FunctionSpec,
    c1: f64,
    c2: f64,
    tau: f64,
    k: u8,
) -> std::result::Result<FunctionSpec, String> {
    let fk = derivative(f, 0, k)?;
    let mk = derivative(mu, 0, k)?;
    let mk1 = derivative(mu, 0, k + 1)?;
    let expr = Expr::add(
        Expr::add(
            Expr::sub(fk.expr().clone(), mk1.expr().clone()),
            Expr::mul(Expr::num(c1), mk.expr().clone()),
        ),
        Expr::mul(Expr::num(c2), mk.expr().map_time(1.0, -tau)),
    );
    Ok(fk.map(|_| expr))
}

/// Endpoint identities that make the transformed data regular enough for
/// the decay conditions at level `m`: boundary traces of `varphi` and its
/// even x-derivatives on `[-tau, 0]`, and of `f` against the boundary data
/// on `[0, T]`. Derivatives the data cannot supply are reported as
/// unverifiable.
pub fn check_corollary_conditions(p: &DelayHeatProblem, m: u32, comp_tol: f64, samples: usize) -> Result<CompatReport> {
    let rp = reduce_delay(p, f64::INFINITY, f64::INFINITY)?;
    let mut r = CompatReport::empty(m, DEFAULT_DELTA);
    let hist = sample_times(-p.tau, 0.0, samples.max(1));
    let fwd = sample_times(0.0, p.t_end, samples.max(1));
    let (x0, xl) = ([0.0], [p.l]);
    let checks = &mut r.corollary_checks;

    for (x, mu, label) in [(&x0, &rp.mu1, "0"), (&xl, &rp.mu2, "l")] {
        let diff = rp.varphi.combine(mu, Expr::sub);
        checks.push(residual_check(format!("varphi({label}, t) = mu(t)"), Ok(diff), x, &hist, comp_tol)?);
    }
    for k in 0..=2u8 {
        for j in 1..=(m as u8 + 2).saturating_sub(k) {
            for (x, label) in [(&x0, "0"), (&xl, "l")] {
                let name = format!("d_x^{} d_t^{k} varphi({label}, t) = 0", 2 * j);
                checks.push(residual_check(name, derivative(&rp.varphi, 2 * j, k), x, &hist, comp_tol)?);
            }
        }
    }
    for k in 0..=1u8 {
        for (x, mu, label) in [(&x0, &rp.mu1, "0"), (&xl, &rp.mu2, "l")] {
            let name = format!("d_t^{k} [f({label}, t) - mu' + c1 mu + c2 mu(t - tau)] = 0");
            let built = boundary_identity(&rp.f, mu, rp.c1, rp.c2, p.tau, k);
            checks.push(residual_check(name, built, x, &fwd, comp_tol)?);
        }
    }
    for (k, top) in [(0u8, m), (1u8, m.saturating_sub(1))] {
        for j in 1..=top as u8 {
            for (x, label) in [(&x0, "0"), (&xl, "l")] {
                let name = format!("d_x^{} d_t^{k} f({label}, t) = 0", 2 * j);
                checks.push(residual_check(name, derivative(&rp.f, 2 * j, k), x, &fwd, comp_tol)?);
            }
        }
    }
    Ok(r)
}

/// Conditions for the problem without delay: corner compatibility, the
/// boundary identities `f(0, t) = mu1'(t)`, `f(l, t) = mu2'(t)`,
/// `f_xx(0, t) = f_xx(l, t) = 0`, and decay proxies for `Phi_n` (level 1)
/// and `sup_t |F_n(t)|` (level 2).
pub fn check_nodelay_conditions(
    p: &HeatProblem,
    basis: EigenBasis,
    quad: &QuadratureConfig,
    conventions: Conventions,
    comp_tol: f64,
    samples: usize,
) -> Result<CompatReport> {
    let mut r = check_compatibility_nodelay(p, comp_tol)?;
    r.m = 1;
    let rp = reduce(p, conventions, f64::INFINITY)?;
    let fwd = sample_times(0.0, p.t_end, samples.max(1));
    let (x0, xl) = ([0.0], [p.l]);
    for (x, mu, label) in [(&x0, &rp.mu1, "0"), (&xl, &rp.mu2, "l")] {
        let built = derivative(mu, 0, 1).map(|d| rp.f.combine(&d, Expr::sub));
        r.corollary_checks.push(residual_check(format!("f({label}, t) = mu'(t)"), built, x, &fwd, comp_tol)?);
        let name = format!("f_xx({label}, t) = 0");
        r.corollary_checks.push(residual_check(name, derivative(&rp.f, 2, 0), x, &fwd, comp_tol)?);
    }
    if basis.n >= MIN_MODES {
        let modes = NoDelayModes::build(&rp, basis, quad)?;
        let q_phi: Vec<f64> = modes.phi.iter().map(|c| c.abs()).collect();
        r.decay_results.push(level_condition("Phi_n", &q_phi, 1));
        let q_f: Vec<f64> = (0..basis.n).map(|k| modes.forcing.max_abs(k)).collect();
        r.decay_results.push(level_condition("sup_t |F_n(t)|", &q_f, 2));
    }
    Ok(r)
}

/// `|q_n| <= C n^{-(2m + 1/2)}` judged with the default slack.
fn level_condition(name: &str, q: &[f64], m: u32) -> DecayCondition {
    let power = 2.0 * m as f64 + 0.5;
    // n^{power} q_n bounded: the fitted slope may not exceed the slack.
    let mut c = decay_condition(&format!("n^{power} {name} bounded"), q, power, DEFAULT_FIT_SLACK);
    if let Some(slope) = c.slope {
        let superp = c.fit.as_ref().is_some_and(|f| f.super_polynomial);
        c.status = if superp || slope <= DEFAULT_FIT_SLACK { CheckStatus::Pass } else { CheckStatus::Fail };
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat_delay::{reduce_delay, DelayCoefficients, DEFAULT_COMP_TOL, DEFAULT_PROP_TOL};
    use std::f64::consts::PI;

    fn spec(s: &str) -> FunctionSpec {
        FunctionSpec::parse(s).unwrap()
    }

    fn unit() -> DelayCoefficients {
        DelayCoefficients { a1: 1.0, a2: 1.0, b1: 0.0, b2: 0.0, d1: 0.0, d2: 0.0 }
    }

    fn delay_problem(g: &str, psi: &str, th1: &str, th2: &str) -> DelayHeatProblem {
        DelayHeatProblem::new(unit(), 1.0, PI, 2.0, spec(g), spec(psi), spec(th1), spec(th2)).unwrap()
    }

    #[test]
    fn mismatch_is_reported() {
        let r = check_compatibility_delay(&delay_problem("0", "1", "0", "1"), 1e-12).unwrap();
        assert_eq!(r.boundary_mismatches, Some((1.0, 0.0)));
        assert!(r.hard_failure());
        let ok = check_compatibility_delay(&delay_problem("0", "sin(x)*exp(t)", "0", "0"), 1e-12).unwrap();
        assert!(!ok.hard_failure());
    }

    #[test]
    fn decay_of_power_sequences() {
        let q: Vec<f64> = (1..=64).map(|n| (n as f64).powi(-3)).collect();
        assert_eq!(decay_condition("q", &q, 2.5, 0.25).status, CheckStatus::Pass);
        assert_eq!(decay_condition("q", &q, 3.5, 0.25).status, CheckStatus::Fail);
        let mut single = vec![0.0; 64];
        single[0] = 1.0;
        assert_eq!(decay_condition("q", &single, 10.0, 0.25).status, CheckStatus::Pass);
    }

    fn modes(psi: &str, n: usize) -> ModeSystem {
        let p = delay_problem("0", psi, "0", "0");
        let rp = reduce_delay(&p, DEFAULT_PROP_TOL, DEFAULT_COMP_TOL).unwrap();
        ModeSystem::build(&rp, EigenBasis::new(PI, n).unwrap(), &Default::default()).unwrap()
    }

    #[test]
    fn single_mode_history_passes() {
        let r = check_decay_conditions(&modes("(1 + t^2)*sin(x)", 32), 2, DEFAULT_DELTA, DEFAULT_FIT_SLACK).unwrap();
        assert!(r.decay_results.iter().all(|d| d.status == CheckStatus::Pass), "{r:?}");
    }

    #[test]
    fn parabolic_history_fails() {
        let r = check_decay_conditions(&modes("x*(pi - x)*(2 + t)", 32), 1, DEFAULT_DELTA, DEFAULT_FIT_SLACK).unwrap();
        assert_eq!(r.decay_results[0].status, CheckStatus::Fail);
        assert_eq!(r.decay_results[1].status, CheckStatus::Fail);
        // No forcing.
        assert_eq!(r.decay_results[2].status, CheckStatus::Pass);
        assert!(r.advisory_failure() && !r.hard_failure());
    }

    #[test]
    fn too_few_modes() {
        assert!(matches!(
            check_decay_conditions(&modes("sin(x)", 8), 1, DEFAULT_DELTA, DEFAULT_FIT_SLACK),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn corollary_on_zero_data() {
        let r = check_corollary_conditions(&delay_problem("0", "0", "0", "0"), 2, 1e-12, 16).unwrap();
        assert!(!r.corollary_checks.is_empty());
        assert!(r.corollary_checks.iter().all(|c| c.residual == Some(0.0)));
    }

    #[test]
    fn corollary_detects_boundary_forcing() {
        let r = check_corollary_conditions(&delay_problem("1", "0", "0", "0"), 1, 1e-12, 16).unwrap();
        let first = r.corollary_checks.iter().find(|c| c.name.starts_with("d_t^0 [f(0")).unwrap();
        assert_eq!(first.residual, Some(1.0));
        assert_eq!(first.status, CheckStatus::Fail);
    }

    #[test]
    fn corollary_on_trigonometric_data() {
        let r = check_corollary_conditions(&delay_problem("0", "sin(x)*cos(t)", "0", "0"), 2, 1e-12, 16).unwrap();
        assert!(r.corollary_checks.iter().all(|c| c.status == CheckStatus::Pass), "{r:?}");
    }
}
