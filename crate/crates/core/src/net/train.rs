use super::model::accumulate_pair_gradient;
use super::{Architecture, NetError, NetworkParams, TrainingPair, DEFAULT_MARGIN};
use crate::rng::{derive_seed, Rng};
use crate::Exec;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub margin: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub rng_seed: u64,
    pub architecture: Architecture,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            margin: DEFAULT_MARGIN,
            learning_rate: 1e-3,
            momentum: 0.9,
            batch_size: 32,
            epochs: 10,
            rng_seed: 0,
            architecture: Architecture::default(),
        }
    }
}

/// Mean training loss of each epoch, in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub epoch_losses: Vec<f64>,
}

pub fn train(config: &TrainConfig, pairs: &[TrainingPair]) -> Result<(NetworkParams, TrainLog), NetError> {
    train_with(config, pairs, Exec::default())
}

/// Minibatch SGD with momentum on the contrastive loss.
///
/// Initial weights come from [`NetworkParams::init`] with `config.rng_seed`;
/// batch order is reshuffled every epoch from a seed derived from it. Batch
/// gradients are the mean of per-pair gradients, summed in pair order.
/// Training runs in f64; the returned parameters are rounded to f32.
pub fn train_with(
    config: &TrainConfig,
    pairs: &[TrainingPair],
    exec: Exec,
) -> Result<(NetworkParams, TrainLog), NetError> {
    let first = pairs.first().ok_or(NetError::NoPairs)?;
    if config.margin.is_nan() || config.margin <= 0.0 {
        return Err(NetError::Config("margin must be positive"));
    }
    if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite()) {
        return Err(NetError::Config("learning rate must be finite and non-negative"));
    }
    if !(0.0..1.0).contains(&config.momentum) {
        return Err(NetError::Config("momentum must be in [0, 1)"));
    }
    if config.batch_size == 0 {
        return Err(NetError::Config("batch size must be positive"));
    }
    let (rows, cols) = (first.score.rows, first.score.cols);
    let mut params = NetworkParams::init(config.architecture, rows, cols, config.rng_seed)?;
    let mut velocity = params.zeros_like();
    let mut log = TrainLog::default();
    let mut order: Vec<usize> = (0..pairs.len()).collect();

    for epoch in 0..config.epochs {
        Rng::new(derive_seed(config.rng_seed, epoch as u64 + 1)).shuffle(&mut order);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let per_pair = exec.try_map(batch.len(), |k| {
                let pair = &pairs[batch[k]];
                let mut g = params.zeros_like();
                let loss = accumulate_pair_gradient(
                    &params,
                    &pair.score,
                    &pair.perf,
                    pair.label.value(),
                    config.margin,
                    &mut g,
                )?;
                Ok::<_, NetError>((loss, g))
            })?;
            let mut grad = params.zeros_like();
            for (loss, g) in &per_pair {
                loss_sum += loss;
                grad.add_scaled(g, 1.0);
            }
            let scale = -config.learning_rate / batch.len() as f64;
            for (v, g) in velocity.slices_mut().into_iter().zip(grad.slices()) {
                for (vi, gi) in v.iter_mut().zip(g) {
                    *vi = config.momentum * *vi + scale * gi;
                }
            }
            params.add_scaled(&velocity, 1.0);
        }
        let mean = loss_sum / pairs.len() as f64;
        if !mean.is_finite() || !params.is_finite() {
            return Err(NetError::Diverged { epoch, loss: mean });
        }
        log.epoch_losses.push(mean);
    }
    // the model file holds f32; hand back exactly what a save/load yields
    Ok((params.round_to_f32(), log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{backward, PairLabel};
    use crate::signal::Patch;

    fn level_patch(level: f64, jitter: u64) -> Patch {
        let mut rng = Rng::new(jitter);
        // two-level patch: rows above/below the midline, so normalization keeps a pattern
        let data = (0..9 * 12)
            .map(|i| if (i / 12) < 4 { level } else { -level } + 0.05 * rng.uniform(-1.0, 1.0))
            .collect();
        Patch::from_raw(data, 9, 12, 0)
    }

    fn toy_pairs(n: usize, seed: u64) -> Vec<TrainingPair> {
        let mut rng = Rng::new(seed);
        (0..n)
            .map(|k| {
                let a = rng.chance(0.5);
                let similar = k % 2 == 0;
                let b = if similar { a } else { !a };
                let lv = |up: bool| if up { 1.0 } else { -1.0 };
                TrainingPair {
                    score: level_patch(lv(a), rng.next_u64()),
                    perf: level_patch(lv(b), rng.next_u64()),
                    label: if similar {
                        PairLabel::Similar
                    } else {
                        PairLabel::Dissimilar
                    },
                }
            })
            .collect()
    }

    fn mean_loss(params: &NetworkParams, pairs: &[TrainingPair], margin: f64) -> f64 {
        pairs
            .iter()
            .map(|p| backward(params, &p.score, &p.perf, p.label.value(), margin).unwrap().0)
            .sum::<f64>()
            / pairs.len() as f64
    }

    #[test]
    fn zero_learning_rate_keeps_initial_params() {
        let pairs = toy_pairs(40, 1);
        let config = TrainConfig {
            learning_rate: 0.0,
            epochs: 2,
            rng_seed: 9,
            ..TrainConfig::default()
        };
        let (params, log) = train(&config, &pairs).unwrap();
        assert_eq!(params, NetworkParams::init(config.architecture, 9, 12, 9).unwrap());
        assert_eq!(log.epoch_losses.len(), 2);
    }

    #[test]
    fn separable_toy_set_loss_decreases() {
        let train_set = toy_pairs(128, 2);
        let held_out = toy_pairs(64, 3);
        let config = TrainConfig {
            epochs: 8,
            learning_rate: 0.01,
            batch_size: 16,
            rng_seed: 4,
            ..TrainConfig::default()
        };
        let init = NetworkParams::init(config.architecture, 9, 12, config.rng_seed).unwrap();
        let before = mean_loss(&init, &held_out, config.margin);
        let (params, log) = train(&config, &train_set).unwrap();
        let after = mean_loss(&params, &held_out, config.margin);
        assert!(
            after < before,
            "held-out loss {before} -> {after}, log {:?}",
            log.epoch_losses
        );
    }

    #[test]
    fn same_seed_is_bit_identical_across_exec_modes() {
        let pairs = toy_pairs(50, 5);
        let config = TrainConfig {
            epochs: 2,
            rng_seed: 11,
            batch_size: 8,
            ..TrainConfig::default()
        };
        let (a, la) = train_with(&config, &pairs, Exec::Sequential).unwrap();
        let (b, lb) = train_with(&config, &pairs, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
    }

    #[test]
    fn divergence_is_reported() {
        let mut pairs = toy_pairs(32, 6);
        pairs[3].perf.data[0] = f64::NAN;
        let config = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        let r = train(&config, &pairs);
        assert!(matches!(r, Err(NetError::Diverged { .. })), "{r:?}");
    }

    #[test]
    fn config_errors() {
        assert_eq!(train(&TrainConfig::default(), &[]).unwrap_err(), NetError::NoPairs);
        let pairs = toy_pairs(4, 7);
        let bad = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&bad, &pairs), Err(NetError::Config(_))));
    }
}
