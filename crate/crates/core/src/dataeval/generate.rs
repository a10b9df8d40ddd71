use super::{DataError, GroundTruth, TempoCurve};
use crate::rng::{derive_seed, Rng};
use crate::score::{parse_smf, write_smf, NoteEvent, Score};
use crate::synth::{render, AudioBuffer, Timbre, DEFAULT_SAMPLE_RATE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub fn snr_db(self) -> f64 {
        match self {
            Difficulty::Easy => 40.0,
            Difficulty::Medium => 25.0,
            Difficulty::Hard => 15.0,
        }
    }

    /// Range of tempo factors drawn at each knot.
    pub fn tempo_range(self) -> (f64, f64) {
        match self {
            Difficulty::Easy => (0.9, 1.1),
            Difficulty::Medium => (0.8, 1.25),
            Difficulty::Hard => (0.7, 1.4),
        }
    }

    /// Relative spread of harmonic amplitudes in the performance timbre.
    fn timbre_spread(self) -> f64 {
        match self {
            Difficulty::Easy => 0.2,
            Difficulty::Medium => 0.4,
            Difficulty::Hard => 0.6,
        }
    }

    fn velocity_jitter(self) -> i64 {
        match self {
            Difficulty::Easy => 5,
            Difficulty::Medium => 15,
            Difficulty::Hard => 25,
        }
    }
}

impl std::str::FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty '{other}'")),
        }
    }
}

impl std::fmt::Display for Difficulty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        })
    }
}

pub const CHORD_PROBABILITY: f64 = 0.3;

/// Random monophonic line with occasional two-note chords.
///
/// Inter-onset intervals are uniform in [0.15, 0.6] s, durations in
/// [0.2, 0.8] s, velocities in 60..=110.
pub fn random_score(seed: u64, n_notes: usize, pitch_lo: u8, pitch_hi: u8) -> Result<Score, DataError> {
    if !(21..=108).contains(&pitch_lo) || !(21..=108).contains(&pitch_hi) || pitch_lo > pitch_hi {
        return Err(DataError::Options(format!(
            "pitch range {pitch_lo}..={pitch_hi} not within 21..=108"
        )));
    }
    if n_notes == 0 {
        return Err(DataError::Options("n_notes must be at least 1".into()));
    }
    let mut rng = Rng::new(seed);
    let mut events = Vec::with_capacity(n_notes * 2);
    let mut onset = 0.0;
    let pitch = |rng: &mut Rng| rng.range_inclusive(i64::from(pitch_lo), i64::from(pitch_hi)) as u8;
    for k in 0..n_notes {
        if k > 0 {
            onset += rng.uniform(0.15, 0.6);
        }
        let p = pitch(&mut rng);
        let duration = rng.uniform(0.2, 0.8);
        let velocity = rng.range_inclusive(60, 110) as u8;
        events.push(NoteEvent {
            onset,
            duration,
            pitch: p,
            velocity,
        });
        if pitch_hi > pitch_lo && rng.chance(CHORD_PROBABILITY) {
            let mut q = pitch(&mut rng);
            while q == p {
                q = pitch(&mut rng);
            }
            events.push(NoteEvent {
                onset,
                duration,
                pitch: q,
                velocity,
            });
        }
    }
    Ok(Score::new(events))
}

/// Default timbre with harmonic amplitudes, envelope and sustain randomized
/// according to `difficulty`.
pub fn perturbed_timbre(difficulty: Difficulty, rng: &mut Rng) -> Timbre {
    let base = Timbre::default();
    let spread = difficulty.timbre_spread();
    Timbre {
        harmonic_amplitudes: base
            .harmonic_amplitudes
            .iter()
            .map(|a| a * rng.uniform(1.0 - spread, 1.0 + spread))
            .collect(),
        attack: base.attack * rng.uniform(0.7, 1.5),
        decay: base.decay * rng.uniform(0.7, 1.5),
        sustain_level: rng.uniform(0.5, 0.9),
        release: base.release * rng.uniform(0.7, 1.5),
    }
}

/// Adds uniform white noise scaled so that `10·log10(P_signal / P_noise)`
/// equals `snr_db`, then clamps to `[-1, 1]`.
pub fn add_white_noise(audio: &AudioBuffer, snr_db: f64, rng: &mut Rng) -> AudioBuffer {
    let n = audio.samples.len();
    let mut noise: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let noise_power = if n == 0 {
        0.0
    } else {
        noise.iter().map(|v| v * v).sum::<f64>() / n as f64
    };
    let target = audio.power() / 10f64.powf(snr_db / 10.0);
    let scale = if noise_power > 0.0 {
        (target / noise_power).sqrt()
    } else {
        0.0
    };
    for (v, s) in noise.iter_mut().zip(&audio.samples) {
        *v = (s + scale * *v).clamp(-1.0, 1.0);
    }
    AudioBuffer::new(noise, audio.sample_rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairOptions {
    pub difficulty: Difficulty,
    pub n_notes: usize,
    pub pitch_lo: u8,
    pub pitch_hi: u8,
    /// Overrides the difficulty's SNR; `Some(f64::INFINITY)` disables noise.
    pub snr_db: Option<f64>,
    /// Use the identity tempo curve instead of a random one.
    pub identity_tempo: bool,
    /// Keep the score timbre and velocities for the performance.
    pub same_timbre: bool,
    pub sample_rate: u32,
    /// Ground truth sample spacing in samples.
    pub hop: usize,
}

impl PairOptions {
    /// ~30 s pieces at the given difficulty.
    pub fn new(difficulty: Difficulty) -> Self {
        PairOptions {
            difficulty,
            n_notes: 80,
            pitch_lo: 40,
            pitch_hi: 84,
            snr_db: None,
            identity_tempo: false,
            same_timbre: false,
            sample_rate: DEFAULT_SAMPLE_RATE,
            hop: 512,
        }
    }
}

/// What was drawn for one generated pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub seed: u64,
    pub difficulty: Difficulty,
    pub tempo_knots: Vec<(f64, f64)>,
    /// `None` when no noise was added.
    pub snr_db: Option<f64>,
    pub n_notes: usize,
    pub sample_rate: u32,
    pub hop: usize,
    pub perf_timbre: Timbre,
}

#[derive(Debug, Clone)]
pub struct SyntheticPair {
    pub score: Score,
    /// The score as performed: warped timing, jittered velocities.
    pub perf_score: Score,
    pub score_audio: AudioBuffer,
    pub perf_audio: AudioBuffer,
    pub gt: GroundTruth,
    pub curve: TempoCurve,
    pub meta: PairMeta,
}

pub const TEMPO_KNOT_SPACING: f64 = 4.0;

pub fn make_pair(seed: u64, difficulty: Difficulty) -> Result<SyntheticPair, DataError> {
    make_pair_with(seed, &PairOptions::new(difficulty))
}

/// Generates a score, its rendering, and a time-warped, re-timbred, noisy
/// "performance" with exact ground truth.
pub fn make_pair_with(seed: u64, opts: &PairOptions) -> Result<SyntheticPair, DataError> {
    if opts.hop == 0 || opts.sample_rate == 0 {
        return Err(DataError::Options("hop and sample rate must be positive".into()));
    }
    let raw = random_score(derive_seed(seed, 1), opts.n_notes, opts.pitch_lo, opts.pitch_hi)?;
    // pass through the MIDI writer so score.mid reproduces the score exactly
    let midi = write_smf(&raw, 480).map_err(|e| DataError::Options(e.to_string()))?;
    let score = parse_smf(&midi).map_err(|e| DataError::Options(e.to_string()))?;

    let mut rng = Rng::new(derive_seed(seed, 2));
    let curve = if opts.identity_tempo {
        TempoCurve::identity()
    } else {
        let (lo, hi) = opts.difficulty.tempo_range();
        let n_knots = (score.length() / TEMPO_KNOT_SPACING).ceil() as usize + 2;
        TempoCurve::new(
            (0..n_knots)
                .map(|k| (k as f64 * TEMPO_KNOT_SPACING, rng.uniform(lo, hi)))
                .collect(),
        )?
    };

    let default_timbre = Timbre::default();
    let (perf_timbre, jitter) = if opts.same_timbre {
        (default_timbre.clone(), 0)
    } else {
        (
            perturbed_timbre(opts.difficulty, &mut rng),
            opts.difficulty.velocity_jitter(),
        )
    };
    let warped = score.map_time(|t| curve.warp_time(t));
    let perf_score = Score::new(
        warped
            .events()
            .iter()
            .map(|e| NoteEvent {
                velocity: (i64::from(e.velocity) + rng.range_inclusive(-jitter, jitter)).clamp(1, 127) as u8,
                ..*e
            })
            .collect(),
    );

    let score_audio = render(&score, &default_timbre, opts.sample_rate);
    let clean = render(&perf_score, &perf_timbre, opts.sample_rate);
    let snr_db = opts.snr_db.unwrap_or(opts.difficulty.snr_db());
    let (perf_audio, snr_db) = if snr_db.is_finite() {
        let mut noise_rng = Rng::new(derive_seed(seed, 3));
        (add_white_noise(&clean, snr_db, &mut noise_rng), Some(snr_db))
    } else {
        (clean, None)
    };

    let period = opts.hop as f64 / f64::from(opts.sample_rate);
    let gt = GroundTruth::sample(&curve, score_audio.duration(), period);
    let meta = PairMeta {
        seed,
        difficulty: opts.difficulty,
        tempo_knots: curve.knots().to_vec(),
        snr_db,
        n_notes: opts.n_notes,
        sample_rate: opts.sample_rate,
        hop: opts.hop,
        perf_timbre,
    };
    Ok(SyntheticPair {
        score,
        perf_score,
        score_audio,
        perf_audio,
        gt,
        curve,
        meta,
    })
}
