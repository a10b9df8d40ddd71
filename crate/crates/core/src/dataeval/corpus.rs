//! On-disk dataset layout: `<root>/<piece_id>/{score.mid, score.wav,
//! perf.wav, gt.csv, meta.json}`.

use super::{DataError, GroundTruth, PairMeta, SyntheticPair};
use crate::score::{parse_smf, write_smf, Score};
use crate::synth::{wav_read, wav_write, AudioBuffer};
use std::fs;
use std::path::{Path, PathBuf};

pub const GT_HEADER: &str = "score_time_s,perf_time_s";

/// One piece loaded back from disk.
#[derive(Debug, Clone)]
pub struct Piece {
    pub id: String,
    pub score: Score,
    pub score_audio: AudioBuffer,
    pub perf_audio: AudioBuffer,
    pub gt: GroundTruth,
    pub meta: PairMeta,
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), DataError> {
    fs::write(path, bytes).map_err(|e| DataError::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>, DataError> {
    fs::read(path).map_err(|e| DataError::io(path, e))
}

pub fn gt_to_csv(gt: &GroundTruth) -> String {
    let mut out = format!("{GT_HEADER}\n");
    for (s, p) in &gt.pairs {
        out.push_str(&format!("{s:.6},{p:.6}\n"));
    }
    out
}

pub fn gt_from_csv(text: &str, file: &str) -> Result<GroundTruth, DataError> {
    let malformed = |reason: String| DataError::Malformed {
        file: file.to_string(),
        reason,
    };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(GT_HEADER) {
        return Err(malformed(format!("expected header '{GT_HEADER}'")));
    }
    let pairs = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, line)| {
            let mut cols = line.split(',').map(|c| c.trim().parse::<f64>());
            match (cols.next(), cols.next(), cols.next()) {
                (Some(Ok(s)), Some(Ok(p)), None) => Ok((s, p)),
                _ => Err(malformed(format!("line {}: '{line}'", n + 2))),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GroundTruth { pairs })
}

/// Writes one piece directory (created if missing).
pub fn write_pair(dir: &Path, pair: &SyntheticPair) -> Result<(), DataError> {
    fs::create_dir_all(dir).map_err(|e| DataError::io(dir, e))?;
    let midi = write_smf(&pair.score, 480).map_err(|e| DataError::Options(e.to_string()))?;
    write(&dir.join("score.mid"), &midi)?;
    write(&dir.join("score.wav"), &wav_write(&pair.score_audio))?;
    write(&dir.join("perf.wav"), &wav_write(&pair.perf_audio))?;
    write(&dir.join("gt.csv"), gt_to_csv(&pair.gt).as_bytes())?;
    let mut meta = serde_json::to_string_pretty(&pair.meta).expect("meta serializes");
    meta.push('\n');
    write(&dir.join("meta.json"), meta.as_bytes())
}

pub fn read_piece(dir: &Path) -> Result<Piece, DataError> {
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let path_str = |name: &str| dir.join(name).display().to_string();
    let score = parse_smf(&read(&dir.join("score.mid"))?).map_err(|source| DataError::Smf {
        path: path_str("score.mid"),
        source,
    })?;
    let wav = |name: &str| {
        wav_read(&read(&dir.join(name))?).map_err(|source| DataError::Wav {
            path: path_str(name),
            source,
        })
    };
    let score_audio = wav("score.wav")?;
    let perf_audio = wav("perf.wav")?;
    let gt_text = String::from_utf8_lossy(&read(&dir.join("gt.csv"))?).into_owned();
    let gt = gt_from_csv(&gt_text, &path_str("gt.csv"))?;
    let meta: PairMeta = serde_json::from_slice(&read(&dir.join("meta.json"))?).map_err(|e| DataError::Malformed {
        file: path_str("meta.json"),
        reason: e.to_string(),
    })?;
    Ok(Piece {
        id,
        score,
        score_audio,
        perf_audio,
        gt,
        meta,
    })
}

/// Piece directories (those containing `meta.json`) under `root`, sorted.
pub fn list_pieces(root: &Path) -> Result<Vec<PathBuf>, DataError> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| DataError::io(root, e))? {
        let path = entry.map_err(|e| DataError::io(root, e))?.path();
        if path.join("meta.json").is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}
