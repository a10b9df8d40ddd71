use super::DataError;
use serde::{Deserialize, Serialize};

/// Piecewise-linear tempo factor over score time. A factor of 2 means the
/// performance spends two seconds per score second. The first and last
/// factors extend to either side of the knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempoCurve {
    knots: Vec<(f64, f64)>,
}

impl TempoCurve {
    pub const MIN_FACTOR: f64 = 0.5;
    pub const MAX_FACTOR: f64 = 2.0;

    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, DataError> {
        if knots.is_empty() {
            return Err(DataError::TempoCurve("needs at least one knot"));
        }
        if knots
            .windows(2)
            .any(|w| w[0].0.partial_cmp(&w[1].0) != Some(std::cmp::Ordering::Less))
        {
            return Err(DataError::TempoCurve("knot times must be strictly increasing"));
        }
        if knots
            .iter()
            .any(|&(t, f)| !t.is_finite() || t < 0.0 || !(Self::MIN_FACTOR..=Self::MAX_FACTOR).contains(&f))
        {
            return Err(DataError::TempoCurve("knot time negative or factor outside [0.5, 2]"));
        }
        Ok(TempoCurve { knots })
    }

    pub fn constant(factor: f64) -> Result<Self, DataError> {
        Self::new(vec![(0.0, factor)])
    }

    pub fn identity() -> Self {
        TempoCurve {
            knots: vec![(0.0, 1.0)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Performance time of score time `t`: the integral of the factor over
    /// `[0, t]`, exact per linear segment (trapezoid rule).
    pub fn warp_time(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        let (t0, f0) = self.knots[0];
        if t <= t0 {
            return f0 * t;
        }
        let mut acc = f0 * t0;
        for w in self.knots.windows(2) {
            let ((ta, fa), (tb, fb)) = (w[0], w[1]);
            if t <= tb {
                let ft = fa + (fb - fa) * (t - ta) / (tb - ta);
                return acc + 0.5 * (fa + ft) * (t - ta);
            }
            acc += 0.5 * (fa + fb) * (tb - ta);
        }
        let (tl, fl) = *self.knots.last().unwrap();
        acc + fl * (t - tl)
    }

    /// Inverse of [`warp_time`](Self::warp_time) by bisection to `tol` seconds.
    pub fn unwarp_time(&self, perf: f64, tol: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, perf / Self::MIN_FACTOR + 1.0);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.warp_time(mid) < perf {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `(score time, performance time)` samples at every score frame boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub pairs: Vec<(f64, f64)>,
}

impl GroundTruth {
    /// Samples `curve` at `i · period` for `i = 0..=floor(duration / period)`.
    pub fn sample(curve: &TempoCurve, duration: f64, period: f64) -> Self {
        let n = (duration / period).floor() as usize + 1;
        GroundTruth {
            pairs: (0..n)
                .map(|i| {
                    let s = i as f64 * period;
                    (s, curve.warp_time(s))
                })
                .collect(),
        }
    }

    pub fn score_end(&self) -> f64 {
        self.pairs.last().map_or(0.0, |p| p.0)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
    }

    /// Linear interpolation, extended linearly past the last sample.
    pub fn perf_time_at(&self, score_time: f64) -> f64 {
        let p = &self.pairs;
        match p.len() {
            0 => score_time,
            1 => p[0].1 + (score_time - p[0].0),
            _ => {
                let k = p.partition_point(|&(s, _)| s <= score_time).clamp(1, p.len() - 1);
                let ((s0, t0), (s1, t1)) = (p[k - 1], p[k]);
                t0 + (t1 - t0) * (score_time - s0) / (s1 - s0)
            }
        }
    }
}
