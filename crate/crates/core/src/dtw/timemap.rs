use super::WarpPath;

/// Performance time for each score frame, derived from a warping path.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMap {
    /// Time of score frame `i` (`i · hop / sample_rate`).
    pub score_times: Vec<f64>,
    /// Mapped performance time of score frame `i`.
    pub perf_times: Vec<f64>,
}

impl TimeMap {
    pub fn len(&self) -> usize {
        self.score_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.score_times.is_empty()
    }

    /// Two columns `score_time_s,perf_time_s` with 6 decimals and a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("score_time_s,perf_time_s\n");
        for (s, p) in self.score_times.iter().zip(&self.perf_times) {
            out.push_str(&format!("{s:.6},{p:.6}\n"));
        }
        out
    }
}

/// For each score frame `i`, the median performance frame among the path
/// cells in row `i` (mean of the two middle cells for even counts),
/// converted to seconds.
pub fn path_to_timemap(path: &WarpPath, hop: usize, sample_rate: u32) -> TimeMap {
    let period = hop as f64 / f64::from(sample_rate);
    let rows = path.steps.last().map_or(0, |&(i, _)| i + 1);
    let mut score_times = Vec::with_capacity(rows);
    let mut perf_times = Vec::with_capacity(rows);
    let mut start = 0;
    while start < path.steps.len() {
        let i = path.steps[start].0;
        let end = start + path.steps[start..].iter().take_while(|s| s.0 == i).count();
        // columns within one row of a monotone path are already sorted
        let cols: Vec<usize> = path.steps[start..end].iter().map(|s| s.1).collect();
        let k = cols.len();
        let median = if k % 2 == 1 {
            cols[k / 2] as f64
        } else {
            (cols[k / 2 - 1] + cols[k / 2]) as f64 / 2.0
        };
        score_times.push(i as f64 * period);
        perf_times.push(median * period);
        start = end;
    }
    TimeMap {
        score_times,
        perf_times,
    }
}
