//! 8-bit binary PGM (P5) export of spectrograms and matrices.

use crate::dtw::WarpPath;
use crate::signal::Spectrogram;
use crate::simmatrix::SimilarityMatrix;

/// Encodes `height` rows of `width` gray values.
pub fn encode(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Affine map of `[min, max]` onto `0..=255`; constant input maps to 0.
fn rescale(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> u8 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    move |v| {
        if span > 0.0 && span.is_finite() {
            ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }
}

/// One column per frame, one row per frequency bin, highest bin on top.
pub fn spectrogram_pgm(spec: &Spectrogram) -> Vec<u8> {
    let map = rescale(spec.data.iter().copied());
    let (w, h) = (spec.frames, spec.bins);
    let mut pixels = vec![0u8; w * h];
    for t in 0..w {
        for k in 0..h {
            pixels[(h - 1 - k) * w + t] = map(spec.at(t, k));
        }
    }
    encode(w, h, &pixels)
}

/// Rows are score frames, columns performance frames. Cells on `path`
/// are drawn at full intensity.
pub fn matrix_pgm(matrix: &SimilarityMatrix, path: Option<&WarpPath>) -> Vec<u8> {
    let map = rescale(matrix.data.iter().copied());
    let mut pixels: Vec<u8> = matrix.data.iter().map(|&v| map(v)).collect();
    if let Some(path) = path {
        for &(i, j) in &path.steps {
            if i < matrix.rows && j < matrix.cols {
                pixels[i * matrix.cols + j] = 255;
            }
        }
    }
    encode(matrix.cols, matrix.rows, &pixels)
}
