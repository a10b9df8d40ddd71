use super::{check_nonempty, CostOracle, DtwError, WarpPath};

/// Per-row column windows `[lo, hi]` (inclusive) of a DP lattice.
pub(crate) struct Window {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl Window {
    pub fn full(rows: usize, cols: usize) -> Self {
        Window {
            lo: vec![0; rows],
            hi: vec![cols - 1; rows],
        }
    }
}

/// DP restricted to `window`: `D(i,j) = c(i,j) + min(D(i-1,j), D(i,j-1),
/// D(i-1,j-1))`, cells outside the window being `+∞`. Backtracking prefers
/// diagonal, then up `(i-1,j)`, then left `(i,j-1)` on ties.
pub(crate) fn dtw_windowed(cost: &impl CostOracle, window: &Window) -> WarpPath {
    let rows = cost.rows();
    let mut offsets = Vec::with_capacity(rows + 1);
    offsets.push(0usize);
    for i in 0..rows {
        offsets.push(offsets[i] + window.hi[i] + 1 - window.lo[i]);
    }
    let mut acc = vec![f64::INFINITY; offsets[rows]];
    let at = |acc: &[f64], i: usize, j: usize| -> f64 {
        if j < window.lo[i] || j > window.hi[i] {
            f64::INFINITY
        } else {
            acc[offsets[i] + j - window.lo[i]]
        }
    };

    for i in 0..rows {
        for j in window.lo[i]..=window.hi[i] {
            let c = cost.cost(i, j);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 {
                    at(&acc, i - 1, j - 1)
                } else {
                    f64::INFINITY
                };
                let up = if i > 0 { at(&acc, i - 1, j) } else { f64::INFINITY };
                let left = if j > 0 { at(&acc, i, j - 1) } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[offsets[i] + j - window.lo[i]] = best + c;
        }
    }

    let (mut i, mut j) = (rows - 1, cost.cols() - 1);
    let total = at(&acc, i, j);
    let mut steps = vec![(i, j)];
    while (i, j) != (0, 0) {
        let diag = if i > 0 && j > 0 {
            at(&acc, i - 1, j - 1)
        } else {
            f64::INFINITY
        };
        let up = if i > 0 { at(&acc, i - 1, j) } else { f64::INFINITY };
        let left = if j > 0 { at(&acc, i, j - 1) } else { f64::INFINITY };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        steps.push((i, j));
    }
    steps.reverse();
    WarpPath { steps, cost: total }
}

/// Optimal warping path over the full matrix.
pub fn dtw_exact(cost: &impl CostOracle) -> Result<WarpPath, DtwError> {
    check_nonempty(cost)?;
    Ok(dtw_windowed(cost, &Window::full(cost.rows(), cost.cols())))
}

/// Largest `rows × cols` accepted by [`enumerate_paths`].
pub const MAX_ENUMERATION_CELLS: usize = 36;

/// Every monotone path from `(0,0)` to `(rows-1, cols-1)`; a brute-force
/// reference for the DP.
pub fn enumerate_paths(rows: usize, cols: usize) -> Result<Vec<Vec<(usize, usize)>>, DtwError> {
    if rows == 0 || cols == 0 {
        return Err(DtwError::Empty(rows, cols));
    }
    if rows * cols > MAX_ENUMERATION_CELLS {
        return Err(DtwError::TooLarge {
            rows,
            cols,
            max: MAX_ENUMERATION_CELLS,
        });
    }
    fn walk(
        i: usize,
        j: usize,
        rows: usize,
        cols: usize,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        cur.push((i, j));
        if (i, j) == (rows - 1, cols - 1) {
            out.push(cur.clone());
        } else {
            for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
                if i + di < rows && j + dj < cols {
                    walk(i + di, j + dj, rows, cols, cur, out);
                }
            }
        }
        cur.pop();
    }
    let mut out = Vec::new();
    walk(0, 0, rows, cols, &mut Vec::new(), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtw::CostGrid;

    #[test]
    fn identity_matrix_gives_diagonal() {
        let c = CostGrid::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
        let p = dtw_exact(&c).unwrap();
        assert_eq!(p.steps, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(p.cost, 0.0);
    }

    #[test]
    fn single_row_is_forced() {
        let c = CostGrid::new(1, 5, vec![1.0, 2.0, 0.5, 4.0, 0.25]);
        let p = dtw_exact(&c).unwrap();
        assert_eq!(p.steps, (0..5).map(|j| (0, j)).collect::<Vec<_>>());
        assert_eq!(p.cost, 7.75);
        assert!(p.is_valid(1, 5));
    }

    #[test]
    fn single_cell() {
        let p = dtw_exact(&CostGrid::new(1, 1, vec![2.5])).unwrap();
        assert_eq!((p.steps, p.cost), (vec![(0, 0)], 2.5));
    }

    #[test]
    fn empty_matrix_rejected() {
        assert_eq!(dtw_exact(&CostGrid::new(0, 3, vec![])), Err(DtwError::Empty(0, 3)));
    }

    #[test]
    fn ties_prefer_diagonal_then_up() {
        let zeros = CostGrid::new(3, 3, vec![0.0; 9]);
        assert_eq!(dtw_exact(&zeros).unwrap().steps, vec![(0, 0), (1, 1), (2, 2)]);
        let tall = CostGrid::new(3, 2, vec![0.0; 6]);
        assert_eq!(dtw_exact(&tall).unwrap().steps, vec![(0, 0), (1, 0), (2, 1)]);
    }

    #[test]
    fn enumeration_counts_follow_delannoy() {
        assert_eq!(enumerate_paths(1, 1).unwrap().len(), 1);
        assert_eq!(enumerate_paths(2, 2).unwrap().len(), 3);
        // Delannoy numbers d(i,j) = d(i-1,j) + d(i,j-1) + d(i-1,j-1)
        let mut d = [[0usize; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                d[i][j] = if i == 0 || j == 0 {
                    1
                } else {
                    d[i - 1][j] + d[i][j - 1] + d[i - 1][j - 1]
                };
            }
        }
        assert_eq!(d[2][2], 13);
        for (r, c) in [(3, 3), (4, 5), (6, 6), (1, 6)] {
            assert_eq!(enumerate_paths(r, c).unwrap().len(), d[r - 1][c - 1]);
        }
        assert!(matches!(enumerate_paths(7, 6), Err(DtwError::TooLarge { .. })));
    }
}
