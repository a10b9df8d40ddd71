use super::Spectrogram;

/// Frames of context per patch.
pub const DEFAULT_CONTEXT: usize = 15;

/// `context × bins` window of a spectrogram, normalized to zero mean and
/// unit population variance (all zeros when the raw window is constant).
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub data: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub center_frame: usize,
}

impl Patch {
    pub fn from_raw(mut data: Vec<f64>, rows: usize, cols: usize, center_frame: usize) -> Self {
        assert_eq!(data.len(), rows * cols, "patch data length");
        normalize(&mut data);
        Patch {
            data,
            rows,
            cols,
            center_frame,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Patch {
            data: vec![0.0; rows * cols],
            rows,
            cols,
            center_frame: 0,
        }
    }
}

fn normalize(data: &mut [f64]) {
    if data.is_empty() {
        return;
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std <= 1e-12 * (1.0 + mean.abs()) {
        data.iter_mut().for_each(|v| *v = 0.0);
    } else {
        data.iter_mut().for_each(|v| *v = (*v - mean) / std);
    }
}

/// Cuts `context` frames centred on `center` (edge frames replicated beyond
/// the spectrogram) and normalizes them.
///
/// # Panics
///
/// If `context` is even or `center` is out of range.
pub fn extract_patch(spec: &Spectrogram, center: usize, context: usize) -> Patch {
    assert!(context % 2 == 1, "patch context must be odd, got {context}");
    assert!(center < spec.frames, "center frame {center} out of range");
    let half = (context / 2) as isize;
    let last = spec.frames as isize - 1;
    let mut data = Vec::with_capacity(context * spec.bins);
    for r in -half..=half {
        let t = (center as isize + r).clamp(0, last) as usize;
        data.extend_from_slice(spec.frame(t));
    }
    Patch::from_raw(data, context, spec.bins, center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Transform;

    fn spec_from(rows: Vec<Vec<f64>>) -> Spectrogram {
        let bins = rows[0].len();
        Spectrogram {
            frames: rows.len(),
            bins,
            data: rows.concat(),
            hop: 512,
            sample_rate: 22_050,
            kind: Transform::Stft,
            bin_freqs: (0..bins).map(|k| k as f64).collect(),
        }
    }

    fn ramp(frames: usize, bins: usize) -> Spectrogram {
        spec_from(
            (0..frames)
                .map(|t| (0..bins).map(|k| ((t * 31 + k * 7) % 11) as f64).collect())
                .collect(),
        )
    }

    #[test]
    fn constant_gives_zero_patch() {
        let spec = spec_from(vec![vec![3.25; 4]; 6]);
        let p = extract_patch(&spec, 2, 5);
        assert!(p.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_frame_context() {
        let spec = ramp(10, 6);
        let p = extract_patch(&spec, 4, 1);
        let mut expected = spec.frame(4).to_vec();
        normalize(&mut expected);
        assert_eq!(p.data, expected);
        assert_eq!((p.rows, p.cols), (1, 6));
    }

    #[test]
    fn left_edge_is_replicated() {
        let spec = ramp(20, 5);
        let p = extract_patch(&spec, 0, 15);
        let first = &p.data[..5];
        for r in 1..8 {
            assert_eq!(&p.data[r * 5..(r + 1) * 5], first);
        }
        assert_ne!(&p.data[8 * 5..9 * 5], first);
    }

    #[test]
    fn normalized_moments() {
        let spec = ramp(30, 12);
        for c in [0, 7, 29] {
            let p = extract_patch(&spec, c, 15);
            let n = p.data.len() as f64;
            let mean = p.data.iter().sum::<f64>() / n;
            let var = p.data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-6 && (var.sqrt() - 1.0).abs() < 1e-6);
        }
    }
}
