use super::{DataError, GroundTruth};
use crate::dtw::{path_to_timemap, TimeMap, WarpPath};

/// Default tolerance window in seconds.
pub const DEFAULT_TOLERANCE: f64 = 0.1;

/// Percentage of score frames whose mapped performance time lies within
/// `tolerance` seconds of the ground truth.
pub fn accuracy(
    path: &WarpPath,
    gt: &GroundTruth,
    hop: usize,
    sample_rate: u32,
    tolerance: f64,
) -> Result<f64, DataError> {
    accuracy_timemap(
        &path_to_timemap(path, hop, sample_rate),
        gt,
        hop as f64 / f64::from(sample_rate),
        tolerance,
    )
}

/// As [`accuracy`], for a time map whose frame `i` sits at `i · period`.
/// Ground-truth samples past the last mapped frame are not counted.
pub fn accuracy_timemap(tm: &TimeMap, gt: &GroundTruth, period: f64, tolerance: f64) -> Result<f64, DataError> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(DataError::Tolerance(tolerance));
    }
    let mut total = 0usize;
    let mut hits = 0usize;
    for &(score_time, perf_time) in &gt.pairs {
        let i = (score_time / period).round() as usize;
        let Some(&mapped) = tm.perf_times.get(i) else {
            continue;
        };
        total += 1;
        if (mapped - perf_time).abs() <= tolerance {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(DataError::EmptyGroundTruth);
    }
    Ok(100.0 * hits as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataeval::TempoCurve;

    fn identity_gt(frames: usize, period: f64) -> GroundTruth {
        GroundTruth::sample(&TempoCurve::identity(), (frames - 1) as f64 * period, period)
    }

    #[test]
    fn perfect_path_scores_100() {
        let path = WarpPath {
            steps: (0..50).map(|i| (i, i)).collect(),
            cost: 0.0,
        };
        let gt = identity_gt(50, 512.0 / 22_050.0);
        assert_eq!(accuracy(&path, &gt, 512, 22_050, 0.1).unwrap(), 100.0);
    }

    #[test]
    fn shift_by_twice_tolerance_scores_zero() {
        let period = 0.01;
        let gt = identity_gt(100, period);
        let tm = TimeMap {
            score_times: (0..100).map(|i| i as f64 * period).collect(),
            perf_times: (0..100).map(|i| i as f64 * period + 0.2).collect(),
        };
        assert_eq!(accuracy_timemap(&tm, &gt, period, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn half_within_tolerance_scores_50() {
        let period = 0.01;
        let gt = identity_gt(100, period);
        let tm = TimeMap {
            score_times: (0..100).map(|i| i as f64 * period).collect(),
            perf_times: (0..100)
                .map(|i| i as f64 * period + if i % 2 == 0 { 0.05 } else { 0.5 })
                .collect(),
        };
        assert_eq!(accuracy_timemap(&tm, &gt, period, 0.1).unwrap(), 50.0);
    }

    #[test]
    fn errors() {
        let tm = TimeMap {
            score_times: vec![],
            perf_times: vec![],
        };
        let gt = identity_gt(3, 0.1);
        assert!(matches!(
            accuracy_timemap(&tm, &gt, 0.1, 0.1),
            Err(DataError::EmptyGroundTruth)
        ));
        assert!(matches!(
            accuracy_timemap(&tm, &gt, 0.1, 0.0),
            Err(DataError::Tolerance(_))
        ));
    }
}
