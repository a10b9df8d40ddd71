use super::NetError;
use crate::dataeval::GroundTruth;
use crate::rng::Rng;
use crate::signal::{extract_patch, Patch, Spectrogram};

/// Negatives are at least this far (seconds) from the true alignment.
pub const NEGATIVE_MIN_OFFSET: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairLabel {
    Similar,
    Dissimilar,
}

impl PairLabel {
    /// `y` in the contrastive loss: 0 similar, 1 dissimilar.
    pub fn value(self) -> f64 {
        match self {
            PairLabel::Similar => 0.0,
            PairLabel::Dissimilar => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub score: Patch,
    pub perf: Patch,
    pub label: PairLabel,
}

/// Score and performance spectrograms of one piece plus the true time map.
#[derive(Debug, Clone)]
pub struct AlignedSpectrograms {
    pub score: Spectrogram,
    pub perf: Spectrogram,
    pub gt: GroundTruth,
}

/// Draws `n` labelled patch pairs, alternating positive and negative
/// (`ceil(n/2)` positives).
///
/// A positive pairs score frame `i` with the performance frame nearest to
/// its ground-truth time; a negative pairs the same score frame with a
/// uniformly chosen performance frame more than [`NEGATIVE_MIN_OFFSET`]
/// seconds away from it.
pub fn sample_pairs(
    dataset: &[AlignedSpectrograms],
    n: usize,
    context: usize,
    seed: u64,
) -> Result<Vec<TrainingPair>, NetError> {
    if dataset.is_empty() {
        return Err(NetError::Sampling("empty dataset".into()));
    }
    for piece in dataset {
        if !piece.score.compatible(&piece.perf) {
            return Err(NetError::Sampling(
                "score/performance spectrograms differ in kind or shape".into(),
            ));
        }
    }
    let mut rng = Rng::new(seed);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let piece = &dataset[rng.below(dataset.len() as u64) as usize];
        let period = piece.score.frame_period();
        let last_gt_frame = ((piece.gt.score_end() / period).floor() as usize).min(piece.score.frames - 1);
        let i = rng.below(last_gt_frame as u64 + 1) as usize;
        let t = piece.gt.perf_time_at(i as f64 * period);
        let perf_frames = piece.perf.frames;
        let perf_period = piece.perf.frame_period();

        let (j, label) = if k % 2 == 0 {
            let j = ((t / perf_period).round().max(0.0) as usize).min(perf_frames - 1);
            (j, PairLabel::Similar)
        } else {
            // frames strictly before `lo` or strictly after `hi` are far enough
            let lo_time = t - NEGATIVE_MIN_OFFSET;
            let hi_time = t + NEGATIVE_MIN_OFFSET;
            let below = if lo_time > 0.0 {
                (((lo_time / perf_period).ceil()) as usize).min(perf_frames)
            } else {
                0
            };
            let above_start = ((hi_time / perf_period).floor() as usize + 1).min(perf_frames);
            let above = perf_frames - above_start;
            if below + above == 0 {
                return Err(NetError::Sampling(format!(
                    "piece too short for a negative more than {NEGATIVE_MIN_OFFSET} s from {t:.3} s"
                )));
            }
            let r = rng.below((below + above) as u64) as usize;
            let j = if r < below { r } else { above_start + (r - below) };
            (j, PairLabel::Dissimilar)
        };
        out.push(TrainingPair {
            score: extract_patch(&piece.score, i, context),
            perf: extract_patch(&piece.perf, j, context),
            label,
        });
    }
    Ok(out)
}
