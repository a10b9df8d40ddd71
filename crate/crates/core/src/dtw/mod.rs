//! Warping paths through a cost matrix: exact DTW, FastDTW and the mapping
//! from a path to performance times.

mod exact;
mod fast;
mod timemap;

pub use exact::{dtw_exact, enumerate_paths, MAX_ENUMERATION_CELLS};
pub use fast::{fastdtw, DEFAULT_RADIUS};
pub use timemap::{path_to_timemap, TimeMap};

use crate::simmatrix::SimilarityMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DtwError {
    #[error("cost matrix is empty ({0}×{1})")]
    Empty(usize, usize),
    #[error("path enumeration limited to {max} cells, got {rows}×{cols}")]
    TooLarge { rows: usize, cols: usize, max: usize },
}

/// Read-only access to an `rows × cols` grid of non-negative costs.
pub trait CostOracle: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn cost(&self, i: usize, j: usize) -> f64;
}

impl CostOracle for SimilarityMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn cost(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

/// Plain row-major cost grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CostGrid {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl CostGrid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len());
        CostGrid { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        CostGrid { rows, cols, data }
    }
}

impl CostOracle for CostGrid {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn cost(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Monotone path of `(score frame, performance frame)` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpPath {
    pub steps: Vec<(usize, usize)>,
    /// Sum of the costs of the visited cells.
    pub cost: f64,
}

impl WarpPath {
    /// Checks boundary cells and the `{(1,0),(0,1),(1,1)}` step set.
    pub fn is_valid(&self, rows: usize, cols: usize) -> bool {
        let (Some(&first), Some(&last)) = (self.steps.first(), self.steps.last()) else {
            return false;
        };
        first == (0, 0)
            && rows > 0
            && cols > 0
            && last == (rows - 1, cols - 1)
            && self.steps.windows(2).all(|w| {
                let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
                matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
            })
    }

    /// Sums `cost` over the path cells in path order.
    pub fn cost_on(&self, cost: &impl CostOracle) -> f64 {
        self.steps.iter().fold(0.0, |acc, &(i, j)| acc + cost.cost(i, j))
    }

    /// Two-column `i,j` CSV with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j\n");
        for (i, j) in &self.steps {
            out.push_str(&format!("{i},{j}\n"));
        }
        out
    }
}

fn check_nonempty(cost: &impl CostOracle) -> Result<(), DtwError> {
    if cost.rows() == 0 || cost.cols() == 0 {
        return Err(DtwError::Empty(cost.rows(), cost.cols()));
    }
    Ok(())
}
