//! Space-time solution grids and their CSV/JSON serialization.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;

/// Output grid for problems without delay: `nx` intervals on `[0, l]` and
/// `nt` intervals on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub nx: usize,
    pub nt: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nx: 200, nt: 200 }
    }
}

/// Output grid for delay problems: `nx` intervals on `[0, l]` and steps of
/// `tau / nt_per_tau` from `-tau` up to `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DelayGridSpec {
    pub nx: usize,
    pub nt_per_tau: usize,
}

impl Default for DelayGridSpec {
    fn default() -> Self {
        Self {
            nx: 200,
            nt_per_tau: 64,
        }
    }
}

pub fn uniform(a: f64, b: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|i| {
            if i == intervals {
                b
            } else {
                a + (b - a) * i as f64 / intervals as f64
            }
        })
        .collect()
}

/// Times `-tau + j tau / nt_per_tau` up to `t_end`, which must be a whole
/// number of steps.
pub fn delay_times(tau: f64, t_end: f64, nt_per_tau: usize) -> Result<Vec<f64>> {
    if nt_per_tau == 0 {
        return Err(Error::Input("nt_per_tau must be positive".into()));
    }
    let dt = tau / nt_per_tau as f64;
    let steps_f = t_end / dt;
    let steps = steps_f.round();
    if steps < 1.0 || (steps_f - steps).abs() > 1e-9 * steps.max(1.0) {
        return Err(Error::Input(format!(
            "horizon T = {t_end} is not a whole number of time steps tau/{nt_per_tau}"
        )));
    }
    let total = steps as usize + nt_per_tau;
    Ok((0..=total)
        .map(|j| {
            let k = j as i64 - nt_per_tau as i64;
            k as f64 * tau / nt_per_tau as f64
        })
        .collect())
}

pub(crate) fn check_grid(nx: usize, nt: usize) -> Result<()> {
    if nx < 2 || nt < 1 {
        return Err(Error::Input(format!("grid too small: nx = {nx}, nt = {nt}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldMeta {
    /// `"spectral"` or `"fd"`.
    pub source: String,
    pub modes: Option<usize>,
    pub quadrature: Option<QuadratureConfig>,
    pub scheme: Option<String>,
    pub l: f64,
    pub t_end: f64,
    pub tau: Option<f64>,
    pub dx: f64,
    pub dt: f64,
}

/// Values on a tensor grid, stored time-major: `v[it * xs.len() + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionField {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub v: Vec<f64>,
    /// Reduced unknown before the exponential back-substitution.
    pub u: Option<Vec<f64>>,
    pub meta: FieldMeta,
}

impl SolutionField {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn nt(&self) -> usize {
        self.ts.len()
    }

    pub fn at(&self, it: usize, ix: usize) -> f64 {
        self.v[it * self.xs.len() + ix]
    }

    pub fn row(&self, it: usize) -> &[f64] {
        let n = self.xs.len();
        &self.v[it * n..(it + 1) * n]
    }

    /// Index of the time closest to `t`, if within `1e-9` relative.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        let scale = self.ts.iter().fold(1.0f64, |m, s| m.max(s.abs()));
        let i = self.ts.partition_point(|s| *s < t);
        [i.saturating_sub(1), i]
            .into_iter()
            .filter(|&j| j < self.ts.len())
            .min_by(|&a, &b| (self.ts[a] - t).abs().total_cmp(&(self.ts[b] - t).abs()))
            .filter(|&j| (self.ts[j] - t).abs() <= 1e-9 * scale)
    }

    /// Pointwise `self - other` on an identical grid.
    pub fn difference(&self, other: &SolutionField) -> Result<SolutionField> {
        if self.xs.len() != other.xs.len() || self.ts.len() != other.ts.len() {
            return Err(Error::Input("fields live on different grids".into()));
        }
        let v = self.v.iter().zip(&other.v).map(|(a, b)| a - b).collect();
        Ok(SolutionField {
            xs: self.xs.clone(),
            ts: self.ts.clone(),
            v,
            u: None,
            meta: FieldMeta {
                source: format!("{}-{}", self.meta.source, other.meta.source),
                ..self.meta.clone()
            },
        })
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let with_u = self.u.is_some();
        writeln!(w, "{}", if with_u { "x,t,v,u" } else { "x,t,v" })?;
        let nx = self.xs.len();
        for (it, t) in self.ts.iter().enumerate() {
            for (ix, x) in self.xs.iter().enumerate() {
                let k = it * nx + ix;
                write!(w, "{x:.16e},{t:.16e},{:.16e}", self.v[k])?;
                if let Some(u) = &self.u {
                    write!(w, ",{:.16e}", u[k])?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn sup_norm(&self) -> f64 {
        self.v.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Spectral-versus-oracle comparison on common grid points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleDiffReport {
    pub sup: f64,
    /// Largest spatial L2 norm over the compared times.
    pub l2: f64,
    pub per_time: Vec<TimeSlice>,
    pub compared_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSlice {
    pub t: f64,
    pub sup: f64,
    pub l2: f64,
}

/// Compares `a` and `b` wherever their grid points coincide. `b` may be a
/// refinement of `a` by integer factors in `x` and `t`.
pub fn compare_fields(a: &SolutionField, b: &SolutionField) -> Result<OracleDiffReport> {
    let fx = refinement_factor(&a.xs, &b.xs)?;
    let ft = refinement_factor(&a.ts, &b.ts)?;
    let dx = a.xs.get(1).map_or(0.0, |x1| x1 - a.xs[0]);
    let mut per_time = Vec::with_capacity(a.ts.len());
    let (mut sup, mut sum_sq) = (0.0f64, 0.0f64);
    let mut count = 0;
    for (it, &t) in a.ts.iter().enumerate() {
        let jt = it * ft;
        let (mut s, mut q) = (0.0f64, 0.0f64);
        for ix in 0..a.xs.len() {
            let d = a.at(it, ix) - b.at(jt, ix * fx);
            s = s.max(d.abs());
            // Trapezoid weights in x.
            let w = if ix == 0 || ix + 1 == a.xs.len() { 0.5 } else { 1.0 };
            q += w * d * d * dx;
            count += 1;
        }
        sup = sup.max(s);
        sum_sq = sum_sq.max(q);
        per_time.push(TimeSlice { t, sup: s, l2: q.sqrt() });
    }
    Ok(OracleDiffReport {
        sup,
        l2: sum_sq.sqrt(),
        per_time,
        compared_points: count,
    })
}

fn refinement_factor(coarse: &[f64], fine: &[f64]) -> Result<usize> {
    let (n, m) = (coarse.len() - 1, fine.len() - 1);
    let ends_match = |p: f64, q: f64| (p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1.0);
    if n == 0 || m % n != 0 || !ends_match(coarse[0], fine[0]) || !ends_match(coarse[n], fine[m]) {
        return Err(Error::Input(format!(
            "grids are not nested: {} and {} points",
            coarse.len(),
            fine.len()
        )));
    }
    Ok(m / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(nx: usize, nt: usize, f: impl Fn(f64, f64) -> f64) -> SolutionField {
        let xs = uniform(0.0, 1.0, nx);
        let ts = uniform(0.0, 2.0, nt);
        let v = ts.iter().flat_map(|t| xs.iter().map(|x| f(*x, *t)).collect::<Vec<_>>()).collect();
        SolutionField {
            xs,
            ts,
            v,
            u: None,
            meta: FieldMeta {
                source: "test".into(),
                modes: None,
                quadrature: None,
                scheme: None,
                l: 1.0,
                t_end: 2.0,
                tau: None,
                dx: 1.0 / nx as f64,
                dt: 2.0 / nt as f64,
            },
        }
    }

    #[test]
    fn delay_time_grid() {
        let ts = delay_times(0.5, 1.0, 4).unwrap();
        assert_eq!(ts.len(), 13);
        assert_eq!(ts[0], -0.5);
        assert_eq!(ts[4], 0.0);
        assert_eq!(*ts.last().unwrap(), 1.0);
        assert!(delay_times(1.0, 1.1, 4).is_err());
    }

    #[test]
    fn csv_layout() {
        let f = field(2, 1, |x, t| x + t);
        let csv = f.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,t,v");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[2], "5.0000000000000000e-1,0.0000000000000000e0,5.0000000000000000e-1");
    }

    #[test]
    fn nested_comparison() {
        let coarse = field(4, 4, |x, t| x * t);
        let fine = field(8, 16, |x, t| x * t + 1e-3);
        let r = compare_fields(&coarse, &fine).unwrap();
        assert!((r.sup - 1e-3).abs() < 1e-15);
        assert!((r.l2 - 1e-3).abs() < 1e-12);
        assert_eq!(r.compared_points, 25);
        assert!(compare_fields(&coarse, &field(6, 4, |_, _| 0.0)).is_err());
    }

    #[test]
    fn time_lookup() {
        let f = field(2, 4, |_, _| 0.0);
        assert_eq!(f.time_index(1.0), Some(2));
        assert_eq!(f.time_index(1.1), None);
    }
}
