//! Vector-valued functions of time stored as piecewise Chebyshev
//! interpolants, used for per-mode coefficient paths.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const POINTS_PER_SEGMENT: usize = 33;

/// Segment breaks and Chebyshev points of the second kind on each segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebGrid {
    breaks: Vec<f64>,
    points: usize,
}

impl ChebGrid {
    /// Segments of length at most `max_len`, aligned with any `knots` that
    /// fall inside `[a, b]`.
    pub fn new(a: f64, b: f64, max_len: f64, knots: &[f64], points: usize) -> Result<Self> {
        if !(b > a) || !(max_len > 0.0) || points < 2 {
            return Err(Error::Input(format!(
                "invalid coefficient-path grid on [{a}, {b}]"
            )));
        }
        let mut anchors = vec![a];
        anchors.extend(knots.iter().copied().filter(|k| *k > a && *k < b));
        anchors.push(b);
        anchors.sort_by(f64::total_cmp);
        anchors.dedup();
        let mut breaks = vec![a];
        for w in anchors.windows(2) {
            let pieces = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
            for i in 1..=pieces {
                breaks.push(w[0] + (w[1] - w[0]) * i as f64 / pieces as f64);
            }
        }
        Ok(Self { breaks, points })
    }

    pub fn segments(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn range(&self) -> (f64, f64) {
        (self.breaks[0], self.breaks[self.breaks.len() - 1])
    }

    /// All sample times, segment by segment; shared endpoints appear twice.
    pub fn times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments() * self.points);
        for s in 0..self.segments() {
            let (a, b) = (self.breaks[s], self.breaks[s + 1]);
            for j in 0..self.points {
                out.push(self.node(a, b, j));
            }
        }
        out
    }

    fn node(&self, a: f64, b: f64, j: usize) -> f64 {
        if j == 0 {
            return a;
        }
        if j == self.points - 1 {
            return b;
        }
        let c = -(PI * j as f64 / (self.points - 1) as f64).cos();
        0.5 * (a + b) + 0.5 * (b - a) * c
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.range();
        let slack = 1e-12 * (hi - lo).max(1.0);
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Domain(format!("t = {t} outside path range [{lo}, {hi}]")));
        }
        Ok(self
            .breaks
            .partition_point(|b| *b <= t)
            .clamp(1, self.segments())
            - 1)
    }
}

/// `width` functions sampled on a [`ChebGrid`]; `values[node * width + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePaths {
    grid: ChebGrid,
    width: usize,
    values: Vec<f64>,
}

impl ModePaths {
    /// Samples `f(t)`, which returns all `width` components at once.
    pub fn sample(
        grid: ChebGrid,
        width: usize,
        f: impl Fn(f64) -> Result<Vec<f64>> + Sync,
    ) -> Result<Self> {
        let rows: Vec<Vec<f64>> = grid.times().into_par_iter().map(&f).collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(rows.len() * width);
        for row in rows {
            if row.len() != width {
                return Err(Error::Numeric("coefficient row has the wrong width".into()));
            }
            values.extend(row);
        }
        Ok(Self {
            grid,
            width,
            values,
        })
    }

    pub fn grid(&self) -> &ChebGrid {
        &self.grid
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Component `k` (zero-based) at time `t`, by barycentric interpolation.
    pub fn eval(&self, k: usize, t: f64) -> Result<f64> {
        let s = self.grid.locate(t)?;
        let (a, b) = (self.grid.breaks[s], self.grid.breaks[s + 1]);
        let p = self.grid.points;
        let base = s * p;
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..p {
            let tj = self.grid.node(a, b, j);
            let v = self.values[(base + j) * self.width + k];
            let d = t - tj;
            if d == 0.0 {
                return Ok(v);
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == p - 1 {
                w *= 0.5;
            }
            num += w / d * v;
            den += w / d;
        }
        Ok(num / den)
    }

    /// Largest absolute value of component `k` over the sample nodes.
    pub fn max_abs(&self, k: usize) -> f64 {
        self.values
            .iter()
            .skip(k)
            .step_by(self.width)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Component `k` at every sample node.
    pub fn component(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(k).step_by(self.width).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_smooth_functions() {
        let grid = ChebGrid::new(-1.0, 2.0, 1.0, &[0.0], POINTS_PER_SEGMENT).unwrap();
        assert_eq!(grid.segments(), 3);
        let paths = ModePaths::sample(grid, 2, |t| Ok(vec![t.sin(), (3.0 * t).exp()])).unwrap();
        for i in 0..100 {
            let t = -1.0 + 3.0 * i as f64 / 99.0;
            assert!((paths.eval(0, t).unwrap() - t.sin()).abs() < 1e-14);
            assert!((paths.eval(1, t).unwrap() - (3.0 * t).exp()).abs() < 1e-11 * (3.0 * t).exp());
        }
        assert!(paths.eval(0, 2.5).is_err());
        assert!((paths.max_abs(1) - 6f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn kinks_on_knots_are_exact() {
        let grid = ChebGrid::new(-1.0, 1.0, 5.0, &[0.0], 9).unwrap();
        let paths = ModePaths::sample(grid, 1, |t| Ok(vec![t.abs()])).unwrap();
        assert!((paths.eval(0, -0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!((paths.eval(0, 0.77).unwrap() - 0.77).abs() < 1e-15);
    }
}
