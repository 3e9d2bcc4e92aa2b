//! `dde solve`: the scalar equation `x' = a x + b x(t - tau) + rho(t)` with
//! history `x = beta` on `[-tau, 0]`.

use std::path::Path;

use retard_heat::delay_ode::{superpose, DelayOdeParams, HistoryFunction};
use retard_heat::funcspec::{FunctionSpec, Var};
use retard_heat::quadrature::QuadratureConfig;

use crate::CliError;

#[derive(Debug, Clone)]
pub struct DdeArgs {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    pub history: String,
    pub forcing: String,
    pub t_end: f64,
    pub points: usize,
}

fn time_only(name: &str, src: &str) -> Result<FunctionSpec, CliError> {
    let f = FunctionSpec::parse(src).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
    if f.depends_on(Var::X) {
        return Err(CliError::Config(format!("{name} may depend on t only")));
    }
    Ok(f)
}

/// `(t, x(t))` at `points + 1` equally spaced times on `[0, t_end]`.
pub fn solve(args: &DdeArgs, quad: &QuadratureConfig) -> Result<Vec<(f64, f64)>, CliError> {
    if args.points == 0 || !args.t_end.is_finite() || args.t_end <= 0.0 {
        return Err(CliError::Config("need points > 0 and a finite t_end > 0".into()));
    }
    let p = DelayOdeParams::new(args.a, args.b, args.tau)?;
    let beta = time_only("history", &args.history)?.bind(None, Some(args.tau));
    let rho = time_only("forcing", &args.forcing)?.bind(None, Some(args.tau));
    let h = HistoryFunction::new(beta)?;
    (0..=args.points)
        .map(|i| {
            let t = args.t_end * i as f64 / args.points as f64;
            Ok((t, superpose(&p, &h, &rho, t, quad)?))
        })
        .collect()
}

pub fn to_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("t,x\n");
    for (t, x) in rows {
        s.push_str(&format!("{t:.16e},{x:.16e}\n"));
    }
    s
}

pub fn write_csv(rows: &[(f64, f64)], path: Option<&Path>) -> Result<(), CliError> {
    let csv = to_csv(rows);
    match path {
        Some(p) => std::fs::write(p, csv).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_history_without_decay() {
        let args = DdeArgs {
            a: 0.0,
            b: 1.0,
            tau: 1.0,
            history: "1".into(),
            forcing: "0".into(),
            t_end: 1.5,
            points: 3,
        };
        let rows = solve(&args, &QuadratureConfig::default()).unwrap();
        // 1 + t on [0, 1], then 1 + t + (t - 1)^2 / 2.
        assert!((rows[3].1 - 2.625).abs() < 1e-12);
        assert!((rows[1].1 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn spatial_history_is_rejected() {
        let args = DdeArgs {
            a: 0.0,
            b: 1.0,
            tau: 1.0,
            history: "x".into(),
            forcing: "0".into(),
            t_end: 1.0,
            points: 1,
        };
        assert!(matches!(solve(&args, &QuadratureConfig::default()), Err(CliError::Config(_))));
    }
}
