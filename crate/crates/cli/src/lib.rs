//! `siamalign` command line: dataset generation, training, alignment,
//! evaluation and plot export.
//!
//! [`run`] returns the process exit code: 0 on success, 2 on bad flags
//! (usage on stderr), 1 on runtime failure with a one-line cause.

mod args;
mod commands;

use clap::Parser;
use std::ffi::OsString;
use std::io::Write;

pub use args::Cli;

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stderr())
}

/// As [`run`], with diagnostics written to `err` instead of stderr.
pub fn run_with<I, T>(argv: I, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    if let Err(msg) = cli.validate() {
        let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
        return 2;
    }
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", one_line(&e));
            1
        }
    }
}

fn one_line(e: &anyhow::Error) -> String {
    format!("{e:#}").replace('\n', " ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use siamalign::dataeval::{make_pair_with, write_pair, Difficulty, PairOptions};

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut err = Vec::new();
        let code = run_with(std::iter::once("siamalign").chain(args.iter().copied()), &mut err);
        (code, String::from_utf8(err).unwrap())
    }

    #[test]
    fn bad_flags_exit_2_with_usage() {
        let (code, err) = run_capture(&["align", "--nope"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"), "{err}");
        let (code, err) = run_capture(&["eval", "--data", "d", "--model", "m", "--out", "o", "--radius", "-3"]);
        assert_eq!(code, 2, "{err}");
    }

    #[test]
    fn failed_validation_writes_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("never");
        let (code, err) = run_capture(&["gen-data", "--out", out.to_str().unwrap(), "--count", "0"]);
        assert_eq!(code, 2);
        assert!(err.contains("--count"), "{err}");
        assert!(!out.exists());
    }

    #[test]
    fn runtime_failure_is_one_line_naming_the_path() {
        let tmp = tempfile::tempdir().unwrap();
        let missing = tmp.path().join("no-such-corpus");
        let out = tmp.path().join("out");
        let (code, err) = run_capture(&[
            "train",
            "--data",
            missing.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 1);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.contains(missing.to_str().unwrap()), "{err}");
        // the failed run is still recorded
        let record = std::fs::read_to_string(out.join("runs.jsonl")).unwrap();
        assert!(record.contains("\"status\":\"error\""), "{record}");
    }

    #[test]
    fn self_alignment_eval_scores_100_percent() {
        let tmp = tempfile::tempdir().unwrap();
        let opts = PairOptions {
            n_notes: 10,
            snr_db: Some(f64::INFINITY),
            identity_tempo: true,
            same_timbre: true,
            ..PairOptions::new(Difficulty::Easy)
        };
        for k in 0..2u64 {
            let pair = make_pair_with(k, &opts).unwrap();
            assert_eq!(pair.score_audio, pair.perf_audio);
            write_pair(&tmp.path().join(format!("data/piece_{k:03}")), &pair).unwrap();
        }
        let p = |name: &str| tmp.path().join(name).display().to_string();
        let (data, models, report) = (p("data"), p("models"), p("report"));
        let (code, err) = run_capture(&[
            "train",
            "--data",
            &data,
            "--out",
            &models,
            "--transform",
            "cqt",
            "--pairs",
            "32",
            "--epochs",
            "2",
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(tmp.path().join("models/loss-cqt.csv").is_file());
        let (code, err) = run_capture(&[
            "eval",
            "--data",
            &data,
            "--model",
            &models,
            "--transform",
            "cqt",
            "--dtw",
            "exact",
            "--tolerance",
            "0.1",
            "--out",
            &report,
        ]);
        assert_eq!(code, 0, "{err}");
        let csv = std::fs::read_to_string(tmp.path().join("report/eval.csv")).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 2 * 2 + 2, "{csv}");
        for row in rows {
            assert!(row.ends_with(",100.0000"), "{row}");
        }
        let table = std::fs::read_to_string(tmp.path().join("report/eval.txt")).unwrap();
        assert!(
            table.contains("Binary") && table.contains("Distance") && table.contains("STFT") && table.contains("CQT")
        );
    }
}
