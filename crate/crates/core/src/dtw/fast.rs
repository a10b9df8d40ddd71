use super::exact::{dtw_exact, dtw_windowed, Window};
use super::{check_nonempty, CostGrid, CostOracle, DtwError, WarpPath};

pub const DEFAULT_RADIUS: usize = 10;

/// Half-resolution grid; each cell is the mean of the (up to 2×2) fine
/// cells it covers.
fn coarsen(cost: &impl CostOracle) -> CostGrid {
    let (n, m) = (cost.rows(), cost.cols());
    let (cn, cm) = (n.div_ceil(2), m.div_ceil(2));
    CostGrid::from_fn(cn, cm, |ci, cj| {
        let mut sum = 0.0;
        let mut count = 0;
        for i in 2 * ci..(2 * ci + 2).min(n) {
            for j in 2 * cj..(2 * cj + 2).min(m) {
                sum += cost.cost(i, j);
                count += 1;
            }
        }
        sum / count as f64
    })
}

/// Expands each coarse path cell to its 2×2 block, then dilates the
/// resulting per-row column ranges by `radius` in both directions.
fn project(coarse: &WarpPath, rows: usize, cols: usize, radius: usize) -> Window {
    let mut lo = vec![usize::MAX; rows];
    let mut hi = vec![0usize; rows];
    for &(ci, cj) in &coarse.steps {
        for r in 2 * ci..(2 * ci + 2).min(rows) {
            lo[r] = lo[r].min(2 * cj);
            hi[r] = hi[r].max((2 * cj + 1).min(cols - 1));
        }
    }
    let mut window = Window {
        lo: vec![0; rows],
        hi: vec![0; rows],
    };
    for r in 0..rows {
        let a = r.saturating_sub(radius);
        let b = (r + radius).min(rows - 1);
        let l = lo[a..=b].iter().copied().min().unwrap();
        let h = hi[a..=b].iter().copied().max().unwrap();
        window.lo[r] = l.saturating_sub(radius);
        window.hi[r] = (h + radius).min(cols - 1);
    }
    window
}

/// FastDTW: solve a 2×2-mean-pooled copy of the matrix recursively, project
/// the coarse path back, widen it by `radius` cells and run the DP inside
/// that window. Falls back to exact DTW once `min(rows, cols) ≤
/// max(radius + 2, 4)`.
pub fn fastdtw(cost: &impl CostOracle, radius: usize) -> Result<WarpPath, DtwError> {
    check_nonempty(cost)?;
    Ok(fastdtw_inner(cost, radius))
}

fn fastdtw_inner(cost: &impl CostOracle, radius: usize) -> WarpPath {
    let (n, m) = (cost.rows(), cost.cols());
    if n.min(m) <= (radius + 2).max(4) {
        return dtw_exact(cost).expect("non-empty");
    }
    let coarse = coarsen(cost);
    let coarse_path = fastdtw_inner(&coarse, radius);
    let window = project(&coarse_path, n, m, radius);
    dtw_windowed(cost, &window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn coarsen_averages_edge_cells() {
        let c = CostGrid::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        let k = coarsen(&c);
        assert_eq!((k.rows, k.cols), (2, 2));
        assert_eq!(k.data, vec![2.0, 3.5, 6.5, 8.0]);
    }

    #[test]
    fn zero_diagonal_gives_diagonal_path() {
        let c = CostGrid::from_fn(100, 100, |i, j| if i == j { 0.0 } else { 1.0 });
        for radius in [0, 1, 5, 10] {
            let p = fastdtw(&c, radius).unwrap();
            assert_eq!(p.cost, 0.0);
            assert!(p.steps.iter().all(|(i, j)| i == j));
        }
    }

    #[test]
    fn wide_radius_matches_exact() {
        let mut rng = Rng::new(2);
        let data = (0..40 * 57).map(|_| rng.uniform(0.0, 2.0)).collect();
        let c = CostGrid::new(40, 57, data);
        let exact = dtw_exact(&c).unwrap();
        let fast = fastdtw(&c, 57).unwrap();
        assert_eq!(fast, exact);
    }

    #[test]
    fn window_always_contains_a_valid_path() {
        let mut rng = Rng::new(3);
        for _ in 0..50 {
            let n = 8 + rng.below(60) as usize;
            let m = 8 + rng.below(60) as usize;
            let data = (0..n * m).map(|_| rng.uniform(0.0, 1.0)).collect();
            let c = CostGrid::new(n, m, data);
            for radius in [0, 1, 3] {
                let p = fastdtw(&c, radius).unwrap();
                assert!(p.is_valid(n, m));
                assert!(p.cost.is_finite());
                assert!((p.cost - p.cost_on(&c)).abs() < 1e-9);
                assert!(p.cost >= dtw_exact(&c).unwrap().cost);
            }
        }
    }
}
