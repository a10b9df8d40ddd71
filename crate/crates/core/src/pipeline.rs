//! End-to-end alignment and the evaluation grid used by the CLI.

use crate::dataeval::{accuracy, GroundTruth, DEFAULT_TOLERANCE};
use crate::dtw::{dtw_exact, fastdtw, path_to_timemap, TimeMap, WarpPath, DEFAULT_RADIUS};
use crate::net::{sample_pairs, train_with, AlignedSpectrograms, NetworkParams, TrainConfig, TrainLog};
use crate::signal::{analyze, Spectrogram, Transform, DEFAULT_CONTEXT};
use crate::simmatrix::{binarize, distance_matrix_with, MatrixMode, SimilarityMatrix, DEFAULT_THRESHOLD};
use crate::synth::AudioBuffer;
use crate::{Error, Exec, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DtwKind {
    Exact,
    Fast,
}

impl std::str::FromStr for DtwKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(DtwKind::Exact),
            "fast" => Ok(DtwKind::Fast),
            other => Err(format!("unknown DTW variant '{other}' (expected exact or fast)")),
        }
    }
}

impl std::fmt::Display for DtwKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DtwKind::Exact => "exact",
            DtwKind::Fast => "fast",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignOptions {
    pub transform: Transform,
    pub mode: MatrixMode,
    pub dtw: DtwKind,
    pub radius: usize,
    pub threshold: f64,
    pub context: usize,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            transform: Transform::Cqt,
            mode: MatrixMode::Distance,
            dtw: DtwKind::Fast,
            radius: DEFAULT_RADIUS,
            threshold: DEFAULT_THRESHOLD,
            context: DEFAULT_CONTEXT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Alignment {
    /// Matrix the path was computed on (distance or binary).
    pub matrix: SimilarityMatrix,
    pub path: WarpPath,
    pub timemap: TimeMap,
}

pub fn solve_path(matrix: &SimilarityMatrix, dtw: DtwKind, radius: usize) -> Result<WarpPath> {
    Ok(match dtw {
        DtwKind::Exact => dtw_exact(matrix)?,
        DtwKind::Fast => fastdtw(matrix, radius)?,
    })
}

pub fn apply_mode(dist: SimilarityMatrix, mode: MatrixMode, threshold: f64) -> Result<SimilarityMatrix> {
    Ok(match mode {
        MatrixMode::Distance => dist,
        MatrixMode::Binary => binarize(&dist, threshold)?,
    })
}

pub fn align_spectrograms(
    params: &NetworkParams,
    score: &Spectrogram,
    perf: &Spectrogram,
    opts: &AlignOptions,
) -> Result<Alignment> {
    let dist = distance_matrix_with(params, score, perf, opts.context, Exec::default())?;
    let matrix = apply_mode(dist, opts.mode, opts.threshold)?;
    let path = solve_path(&matrix, opts.dtw, opts.radius)?;
    let timemap = path_to_timemap(&path, score.hop, score.sample_rate);
    Ok(Alignment { matrix, path, timemap })
}

pub fn align_audio(
    params: &NetworkParams,
    score_audio: &AudioBuffer,
    perf_audio: &AudioBuffer,
    opts: &AlignOptions,
) -> Result<Alignment> {
    let score = analyze(score_audio, opts.transform)?;
    let perf = analyze(perf_audio, opts.transform)?;
    align_spectrograms(params, &score, &perf, opts)
}

pub fn aligned_spectrograms(
    score_audio: &AudioBuffer,
    perf_audio: &AudioBuffer,
    gt: &GroundTruth,
    transform: Transform,
) -> Result<AlignedSpectrograms> {
    Ok(AlignedSpectrograms {
        score: analyze(score_audio, transform)?,
        perf: analyze(perf_audio, transform)?,
        gt: gt.clone(),
    })
}

/// Samples `n_pairs` patch pairs (seeded by `config.rng_seed`) and trains.
pub fn train_model(
    pieces: &[AlignedSpectrograms],
    n_pairs: usize,
    context: usize,
    config: &TrainConfig,
) -> Result<(NetworkParams, TrainLog)> {
    let pairs = sample_pairs(pieces, n_pairs, context, config.rng_seed)?;
    Ok(train_with(config, &pairs, Exec::default())?)
}

/// One trained network per transform.
#[derive(Debug, Clone, Default)]
pub struct Models {
    pub stft: Option<NetworkParams>,
    pub cqt: Option<NetworkParams>,
}

impl Models {
    pub fn get(&self, transform: Transform) -> Option<&NetworkParams> {
        match transform {
            Transform::Stft => self.stft.as_ref(),
            Transform::Cqt => self.cqt.as_ref(),
        }
    }

    pub fn set(&mut self, transform: Transform, params: NetworkParams) {
        match transform {
            Transform::Stft => self.stft = Some(params),
            Transform::Cqt => self.cqt = Some(params),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSettings {
    pub dtw: DtwKind,
    pub radius: usize,
    pub threshold: f64,
    pub tolerance: f64,
    pub context: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            dtw: DtwKind::Fast,
            radius: DEFAULT_RADIUS,
            threshold: DEFAULT_THRESHOLD,
            tolerance: DEFAULT_TOLERANCE,
            context: DEFAULT_CONTEXT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mode: MatrixMode,
    pub transform: Transform,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceScores {
    pub id: String,
    pub cells: Vec<Cell>,
}

impl PieceScores {
    pub fn get(&self, mode: MatrixMode, transform: Transform) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.mode == mode && c.transform == transform)
            .map(|c| c.accuracy)
    }
}

/// Scores one piece for every transform in `transforms` and both matrix
/// modes. The distance matrix is computed once per transform.
pub fn evaluate_piece(
    id: &str,
    models: &Models,
    transforms: &[Transform],
    score_audio: &AudioBuffer,
    perf_audio: &AudioBuffer,
    gt: &GroundTruth,
    settings: &EvalSettings,
) -> Result<PieceScores> {
    let mut cells = Vec::with_capacity(transforms.len() * 2);
    for &transform in transforms {
        let params = models.get(transform).ok_or(Error::MissingModel(transform))?;
        let score = analyze(score_audio, transform)?;
        let perf = analyze(perf_audio, transform)?;
        let dist = distance_matrix_with(params, &score, &perf, settings.context, Exec::default())?;
        for mode in MatrixMode::ALL {
            let matrix = apply_mode(dist.clone(), mode, settings.threshold)?;
            let path = solve_path(&matrix, settings.dtw, settings.radius)?;
            let acc = accuracy(&path, gt, score.hop, score.sample_rate, settings.tolerance)?;
            cells.push(Cell {
                mode,
                transform,
                accuracy: acc,
            });
        }
    }
    Ok(PieceScores {
        id: id.to_string(),
        cells,
    })
}

/// Per-piece scores plus means over pieces, laid out as a
/// {binary, distance} × {stft, cqt} grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub pieces: Vec<PieceScores>,
}

impl GridReport {
    pub fn mean(&self, mode: MatrixMode, transform: Transform) -> Option<f64> {
        let vals: Vec<f64> = self.pieces.iter().filter_map(|p| p.get(mode, transform)).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    /// `piece_id,mode,transform,accuracy` rows, then `mean` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("piece_id,mode,transform,accuracy\n");
        for p in &self.pieces {
            for c in &p.cells {
                out.push_str(&format!("{},{},{},{:.4}\n", p.id, c.mode, c.transform, c.accuracy));
            }
        }
        for mode in MatrixMode::ALL {
            for transform in Transform::ALL {
                if let Some(m) = self.mean(mode, transform) {
                    out.push_str(&format!("mean,{mode},{transform},{m:.4}\n"));
                }
            }
        }
        out
    }

    /// Human-readable grid of mean accuracies.
    pub fn to_table(&self, tolerance: f64) -> String {
        let cell = |mode, transform| {
            self.mean(mode, transform)
                .map_or("n/a".to_string(), |v| format!("{v:.1}"))
        };
        let mut out = format!(
            "Alignment accuracy (%), {} pieces, tolerance {:.0} ms\n",
            self.pieces.len(),
            tolerance * 1000.0
        );
        out.push_str(&format!("{:<16}{:>8}{:>8}\n", "Type of matrix", "STFT", "CQT"));
        for (label, mode) in [("Binary", MatrixMode::Binary), ("Distance", MatrixMode::Distance)] {
            out.push_str(&format!(
                "{:<16}{:>8}{:>8}\n",
                label,
                cell(mode, Transform::Stft),
                cell(mode, Transform::Cqt)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataeval::{random_score, TempoCurve};
    use crate::net::Architecture;
    use crate::synth::{render, Timbre, DEFAULT_SAMPLE_RATE};

    #[test]
    fn dtw_kind_parses() {
        assert_eq!("exact".parse::<DtwKind>().unwrap(), DtwKind::Exact);
        assert_eq!("fast".parse::<DtwKind>().unwrap(), DtwKind::Fast);
        assert!("slow".parse::<DtwKind>().is_err());
        assert_eq!(DtwKind::Fast.to_string(), "fast");
    }

    #[test]
    fn self_alignment_is_diagonal_in_every_mode() {
        let score = random_score(3, 8, 50, 70).unwrap();
        let audio = render(&score, &Timbre::default(), DEFAULT_SAMPLE_RATE);
        let params = NetworkParams::init(Architecture::default(), DEFAULT_CONTEXT, 84, 1).unwrap();
        for mode in MatrixMode::ALL {
            for dtw in [DtwKind::Exact, DtwKind::Fast] {
                let opts = AlignOptions {
                    mode,
                    dtw,
                    ..AlignOptions::default()
                };
                let a = align_audio(&params, &audio, &audio, &opts).unwrap();
                assert!(a.path.steps.iter().all(|&(i, j)| i == j), "{mode} {dtw}");
                assert_eq!(a.timemap.score_times, a.timemap.perf_times);
            }
        }
    }

    #[test]
    fn evaluate_piece_requires_models_and_fills_grid() {
        let score = random_score(4, 8, 50, 70).unwrap();
        let audio = render(&score, &Timbre::default(), DEFAULT_SAMPLE_RATE);
        let gt = GroundTruth::sample(&TempoCurve::identity(), audio.duration(), 512.0 / 22050.0);
        let settings = EvalSettings {
            dtw: DtwKind::Exact,
            ..EvalSettings::default()
        };
        let empty = Models::default();
        assert!(matches!(
            evaluate_piece("p", &empty, &[Transform::Cqt], &audio, &audio, &gt, &settings),
            Err(Error::MissingModel(Transform::Cqt))
        ));
        let mut models = Models::default();
        models.set(
            Transform::Cqt,
            NetworkParams::init(Architecture::default(), DEFAULT_CONTEXT, 84, 2).unwrap(),
        );
        let scores = evaluate_piece("p", &models, &[Transform::Cqt], &audio, &audio, &gt, &settings).unwrap();
        assert_eq!(scores.cells.len(), 2);
        assert_eq!(scores.get(MatrixMode::Distance, Transform::Cqt), Some(100.0));
        assert_eq!(scores.get(MatrixMode::Distance, Transform::Stft), None);
    }

    #[test]
    fn report_means_csv_and_table() {
        let cell = |mode, transform, accuracy| Cell {
            mode,
            transform,
            accuracy,
        };
        let report = GridReport {
            pieces: vec![
                PieceScores {
                    id: "a".into(),
                    cells: vec![
                        cell(MatrixMode::Binary, Transform::Cqt, 80.0),
                        cell(MatrixMode::Distance, Transform::Cqt, 90.0),
                    ],
                },
                PieceScores {
                    id: "b".into(),
                    cells: vec![
                        cell(MatrixMode::Binary, Transform::Cqt, 60.0),
                        cell(MatrixMode::Distance, Transform::Cqt, 100.0),
                    ],
                },
            ],
        };
        assert_eq!(report.mean(MatrixMode::Binary, Transform::Cqt), Some(70.0));
        assert_eq!(report.mean(MatrixMode::Distance, Transform::Stft), None);
        let csv = report.to_csv();
        assert!(csv.starts_with("piece_id,mode,transform,accuracy\na,binary,cqt,80.0000\n"));
        assert!(csv.ends_with("mean,binary,cqt,70.0000\nmean,distance,cqt,95.0000\n"));
        let table = report.to_table(0.1);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].contains("STFT") && lines[1].contains("CQT"));
        assert!(lines[2].starts_with("Binary") && lines[2].ends_with("n/a    70.0"));
        assert!(lines[3].starts_with("Distance") && lines[3].ends_with("n/a    95.0"));
    }
}
