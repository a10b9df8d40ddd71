use crate::args::{AlignFlags, Cli, Command, EvalArgs, GenDataArgs, TrainArgs};
use anyhow::{bail, Context, Result};
use serde::Serialize;
use siamalign::dataeval::{list_pieces, make_pair_with, read_piece, write_pair, PairOptions};
use siamalign::dtw::WarpPath;
use siamalign::net::{load_params, save_params, NetworkParams, TrainConfig};
use siamalign::pipeline::{
    align_spectrograms, aligned_spectrograms, evaluate_piece, train_model, AlignOptions, Alignment, EvalSettings,
    GridReport, Models,
};
use siamalign::rng::derive_seed;
use siamalign::score::parse_smf;
use siamalign::signal::{analyze, Spectrogram, Transform};
use siamalign::synth::{render, wav_read, AudioBuffer, Timbre, DEFAULT_SAMPLE_RATE};
use siamalign::{pgm, Exec};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const RUNS_FILE: &str = "runs.jsonl";

/// Default number of training pairs; the STFT network is about three times
/// as expensive per pair.
pub fn default_pairs(transform: Transform) -> usize {
    match transform {
        Transform::Stft => 800,
        Transform::Cqt => 2400,
    }
}

pub fn model_file(dir: &Path, transform: Transform) -> PathBuf {
    dir.join(format!("model-{transform}.siam"))
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let result = match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train(a),
        Command::Align(a) => align(&a.flags),
        Command::Plot(a) => plot(&a.flags),
        Command::Eval(a) => eval(a),
    };
    record_run(cli, result.is_ok())?;
    result
}

#[derive(Serialize)]
struct RunRecord<'a> {
    tool: &'static str,
    version: &'static str,
    parallel: bool,
    seed: Option<u64>,
    status: &'static str,
    command: &'a Command,
}

/// Appends the full flag set to `<out>/runs.jsonl`. No timestamps, so
/// identical invocations leave identical records.
fn record_run(cli: &Cli, ok: bool) -> Result<()> {
    let out = cli.out_dir();
    create_dir(out)?;
    let record = RunRecord {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        parallel: Exec::default().is_parallel(),
        seed: cli.seed(),
        status: if ok { "ok" } else { "error" },
        command: &cli.command,
    };
    let path = out.join(RUNS_FILE);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let line = serde_json::to_string(&record)?;
    writeln!(f, "{line}").with_context(|| format!("cannot write {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create directory {}", dir.display()))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn read_file(path: &Path, what: &str) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {what} {}", path.display()))
}

fn gen_data(a: &GenDataArgs) -> Result<()> {
    create_dir(&a.out)?;
    let opts = PairOptions {
        n_notes: a.notes,
        ..PairOptions::new(a.difficulty)
    };
    for i in 0..a.count {
        let pair = make_pair_with(derive_seed(a.seed, i as u64), &opts)?;
        let dir = a.out.join(format!("piece_{i:03}"));
        write_pair(&dir, &pair)?;
    }
    println!("wrote {} {} pieces to {}", a.count, a.difficulty, a.out.display());
    Ok(())
}

fn load_corpus(root: &Path) -> Result<Vec<PathBuf>> {
    let dirs = list_pieces(root)?;
    if dirs.is_empty() {
        bail!("no pieces (directories with meta.json) under {}", root.display());
    }
    Ok(dirs)
}

fn train(a: &TrainArgs) -> Result<()> {
    let dirs = load_corpus(&a.data)?;
    // keep only spectrograms; the audio is dropped piece by piece
    let data = dirs
        .iter()
        .map(|d| {
            let p = read_piece(d)?;
            Ok(aligned_spectrograms(&p.score_audio, &p.perf_audio, &p.gt, a.transform)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let config = TrainConfig {
        margin: a.margin,
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
        epochs: a.epochs,
        rng_seed: a.seed,
        ..TrainConfig::default()
    };
    let n_pairs = a.pairs.unwrap_or_else(|| default_pairs(a.transform));
    let (params, log) = train_model(&data, n_pairs, a.context, &config)?;

    create_dir(&a.out)?;
    let model_path = model_file(&a.out, a.transform);
    write_file(&model_path, save_params(&params))?;
    let mut csv = String::from("epoch,loss\n");
    for (e, l) in log.epoch_losses.iter().enumerate() {
        csv.push_str(&format!("{},{l:.9}\n", e + 1));
    }
    write_file(&a.out.join(format!("loss-{}.csv", a.transform)), csv)?;
    println!(
        "trained {} model on {} pairs from {} pieces; final loss {:.6}; wrote {}",
        a.transform,
        n_pairs,
        data.len(),
        log.epoch_losses.last().copied().unwrap_or(f64::NAN),
        model_path.display()
    );
    Ok(())
}

/// Resolves `--model` to a file: directories hold `model-<transform>.siam`.
fn load_model(path: &Path, transform: Transform) -> Result<NetworkParams> {
    let file = if path.is_dir() {
        model_file(path, transform)
    } else {
        path.to_path_buf()
    };
    let bytes = read_file(&file, "model file")?;
    load_params(&bytes).with_context(|| format!("invalid model file {}", file.display()))
}

fn load_wav(path: &Path) -> Result<AudioBuffer> {
    wav_read(&read_file(path, "WAV file")?).with_context(|| format!("invalid WAV file {}", path.display()))
}

/// MIDI scores are rendered with the default timbre; anything else is read as WAV.
fn load_score_audio(path: &Path) -> Result<AudioBuffer> {
    let is_midi = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("mid") || e.eq_ignore_ascii_case("midi"));
    if is_midi {
        let score = parse_smf(&read_file(path, "MIDI file")?)
            .with_context(|| format!("invalid MIDI file {}", path.display()))?;
        Ok(render(&score, &Timbre::default(), DEFAULT_SAMPLE_RATE))
    } else {
        load_wav(path)
    }
}

struct Aligned {
    score: Spectrogram,
    perf: Spectrogram,
    alignment: Alignment,
}

fn run_alignment(f: &AlignFlags) -> Result<Aligned> {
    let params = load_model(&f.model, f.transform)?;
    let score_audio = load_score_audio(&f.score)?;
    let perf_audio = load_wav(&f.perf)?;
    if score_audio.sample_rate != perf_audio.sample_rate {
        bail!(
            "sample rates differ: score {} Hz, performance {} Hz",
            score_audio.sample_rate,
            perf_audio.sample_rate
        );
    }
    let opts = AlignOptions {
        transform: f.transform,
        mode: f.mode,
        dtw: f.dtw,
        radius: f.radius,
        threshold: f.threshold,
        context: f.context,
    };
    let score = analyze(&score_audio, f.transform)?;
    let perf = analyze(&perf_audio, f.transform)?;
    let alignment = align_spectrograms(&params, &score, &perf, &opts)
        .with_context(|| format!("alignment with model {} failed", f.model.display()))?;
    Ok(Aligned { score, perf, alignment })
}

fn align(f: &AlignFlags) -> Result<()> {
    let a = run_alignment(f)?;
    create_dir(&f.out)?;
    write_file(&f.out.join("path.csv"), a.alignment.path.to_csv())?;
    write_file(&f.out.join("timemap.csv"), a.alignment.timemap.to_csv())?;
    println!(
        "aligned {}×{} frames, path length {}, cost {:.6}; wrote {}",
        a.score.frames,
        a.perf.frames,
        a.alignment.path.steps.len(),
        a.alignment.path.cost,
        f.out.display()
    );
    Ok(())
}

fn plot(f: &AlignFlags) -> Result<()> {
    let a = run_alignment(f)?;
    create_dir(&f.out)?;
    let path: &WarpPath = &a.alignment.path;
    write_file(&f.out.join("spec-score.pgm"), pgm::spectrogram_pgm(&a.score))?;
    write_file(&f.out.join("spec-perf.pgm"), pgm::spectrogram_pgm(&a.perf))?;
    write_file(&f.out.join("matrix.pgm"), pgm::matrix_pgm(&a.alignment.matrix, None))?;
    write_file(
        &f.out.join("matrix-path.pgm"),
        pgm::matrix_pgm(&a.alignment.matrix, Some(path)),
    )?;
    write_file(&f.out.join("matrix.csv"), a.alignment.matrix.to_csv())?;
    write_file(&f.out.join("path.csv"), path.to_csv())?;
    println!("wrote plots to {}", f.out.display());
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let transforms: Vec<Transform> = match a.transform {
        Some(t) => vec![t],
        None => Transform::ALL.to_vec(),
    };
    let mut models = Models::default();
    for &t in &transforms {
        models.set(t, load_model(&a.model, t)?);
    }
    let settings = EvalSettings {
        dtw: a.dtw,
        radius: a.radius,
        threshold: a.threshold,
        tolerance: a.tolerance,
        context: a.context,
    };
    let mut report = GridReport { pieces: Vec::new() };
    // list_pieces is sorted, so rows come out ordered by piece id
    for dir in load_corpus(&a.data)? {
        let p = read_piece(&dir)?;
        let scores = evaluate_piece(
            &p.id,
            &models,
            &transforms,
            &p.score_audio,
            &p.perf_audio,
            &p.gt,
            &settings,
        )
        .with_context(|| format!("evaluating {}", dir.display()))?;
        report.pieces.push(scores);
    }
    create_dir(&a.out)?;
    write_file(&a.out.join("eval.csv"), report.to_csv())?;
    let table = report.to_table(a.tolerance);
    write_file(&a.out.join("eval.txt"), &table)?;
    print!("{table}");
    Ok(())
}
