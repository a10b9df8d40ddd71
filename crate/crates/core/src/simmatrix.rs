//! Score × performance frame dissimilarity matrices.

use crate::net::{euclidean, forward, NetError, NetworkParams, DEFAULT_MARGIN};
use crate::signal::{extract_patch, Spectrogram};
use crate::Exec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("spectrograms are not comparable (kind, hop, sample rate or bins differ)")]
    Incompatible,
    #[error("binarize expects a distance-mode matrix")]
    WrongMode,
    #[error("threshold must be positive, got {0}")]
    Threshold(f64),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixMode {
    Distance,
    Binary,
}

impl MatrixMode {
    pub const ALL: [MatrixMode; 2] = [MatrixMode::Binary, MatrixMode::Distance];

    pub fn name(self) -> &'static str {
        match self {
            MatrixMode::Distance => "distance",
            MatrixMode::Binary => "binary",
        }
    }
}

impl std::fmt::Display for MatrixMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MatrixMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "distance" => Ok(MatrixMode::Distance),
            "binary" => Ok(MatrixMode::Binary),
            other => Err(format!("unknown mode '{other}' (expected distance or binary)")),
        }
    }
}

/// Default binary threshold: half the contrastive margin.
pub const DEFAULT_THRESHOLD: f64 = DEFAULT_MARGIN / 2.0;

/// `rows × cols` non-negative matrix, row-major; rows are score frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub data: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub mode: MatrixMode,
    /// Set for binary matrices.
    pub threshold: Option<f64>,
}

impl SimilarityMatrix {
    pub fn from_distances(data: Vec<f64>, rows: usize, cols: usize) -> Self {
        assert_eq!(data.len(), rows * cols);
        SimilarityMatrix {
            data,
            rows,
            cols,
            mode: MatrixMode::Distance,
            threshold: None,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> SimilarityMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        SimilarityMatrix {
            data,
            rows: self.cols,
            cols: self.rows,
            ..*self
        }
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Row-major CSV with 6 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.data.len() * 10);
        for row in self.data.chunks(self.cols.max(1)) {
            let cells: Vec<String> = row.iter().map(|v| format_sig6(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.5e}")
    }
}

/// Embeds every frame patch of `spec` once.
pub fn embed_frames(
    params: &NetworkParams,
    spec: &Spectrogram,
    context: usize,
    exec: Exec,
) -> Result<Vec<Vec<f64>>, NetError> {
    exec.try_map(spec.frames, |t| forward(params, &extract_patch(spec, t, context)))
}

/// Entry `(i, j)` is the embedding distance `D_w` between score frame `i`
/// and performance frame `j`.
pub fn distance_matrix(
    params: &NetworkParams,
    score: &Spectrogram,
    perf: &Spectrogram,
    context: usize,
) -> Result<SimilarityMatrix, SimError> {
    distance_matrix_with(params, score, perf, context, Exec::default())
}

pub fn distance_matrix_with(
    params: &NetworkParams,
    score: &Spectrogram,
    perf: &Spectrogram,
    context: usize,
    exec: Exec,
) -> Result<SimilarityMatrix, SimError> {
    if !score.compatible(perf) {
        return Err(SimError::Incompatible);
    }
    let a = embed_frames(params, score, context, exec)?;
    let b = embed_frames(params, perf, context, exec)?;
    Ok(distances_from_embeddings(&a, &b, exec))
}

pub fn distances_from_embeddings(a: &[Vec<f64>], b: &[Vec<f64>], exec: Exec) -> SimilarityMatrix {
    let (rows, cols) = (a.len(), b.len());
    let mut data = vec![0.0; rows * cols];
    exec.fill_chunks(&mut data, cols, |i, row| {
        for (dst, e) in row.iter_mut().zip(b) {
            *dst = euclidean(&a[i], e).expect("embeddings share one network");
        }
    });
    SimilarityMatrix::from_distances(data, rows, cols)
}

/// 0 where `D_w < threshold` (similar), 1 otherwise.
pub fn binarize(dist: &SimilarityMatrix, threshold: f64) -> Result<SimilarityMatrix, SimError> {
    if dist.mode != MatrixMode::Distance {
        return Err(SimError::WrongMode);
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(SimError::Threshold(threshold));
    }
    Ok(SimilarityMatrix {
        data: dist
            .data
            .iter()
            .map(|&d| if d < threshold { 0.0 } else { 1.0 })
            .collect(),
        rows: dist.rows,
        cols: dist.cols,
        mode: MatrixMode::Binary,
        threshold: Some(threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_examples() {
        let m = SimilarityMatrix::from_distances(vec![0.1, 0.9, 0.6, 0.2], 2, 2);
        let b = binarize(&m, 0.5).unwrap();
        assert_eq!(b.data, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(b.mode, MatrixMode::Binary);
        assert_eq!(binarize(&b, 0.5), Err(SimError::WrongMode));
        assert_eq!(binarize(&m, 0.0), Err(SimError::Threshold(0.0)));

        let zeros = SimilarityMatrix::from_distances(vec![0.0; 6], 2, 3);
        assert!(binarize(&zeros, 0.5).unwrap().data.iter().all(|&v| v == 0.0));
        assert!(binarize(&m, m.max() + 1.0).unwrap().data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn csv_six_significant_digits() {
        let m = SimilarityMatrix::from_distances(vec![0.0, 1.23456789, 123456.7, 1e-7, 0.5, 2.0], 2, 3);
        assert_eq!(m.to_csv(), "0,1.23457,123457\n1.00000e-7,0.5,2\n");
    }

    #[test]
    fn transpose_swaps_indices() {
        let m = SimilarityMatrix::from_distances((0..6).map(f64::from).collect(), 2, 3);
        let t = m.transpose();
        assert_eq!((t.rows, t.cols), (3, 2));
        assert_eq!(t.get(2, 1), m.get(1, 2));
    }
}
