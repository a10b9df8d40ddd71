//! Numeric kernels checked against slow, obviously-correct references.

use num_complex::Complex64;
use siamalign::dtw::{dtw_exact, enumerate_paths, fastdtw, CostGrid, CostOracle};
use siamalign::net::{backward, contrastive_loss, euclidean, forward, Architecture, NetworkParams};
use siamalign::rng::Rng;
use siamalign::score::{NoteEvent, Score};
use siamalign::signal::{analyze, dft_naive, fft, Patch, Transform};
use siamalign::synth::{render, Timbre, DEFAULT_SAMPLE_RATE};

fn random_grid(rng: &mut Rng, rows: usize, cols: usize) -> CostGrid {
    CostGrid::new(rows, cols, (0..rows * cols).map(|_| rng.uniform(0.0, 2.0)).collect())
}

fn brute_force_min(cost: &CostGrid) -> f64 {
    enumerate_paths(cost.rows(), cost.cols())
        .unwrap()
        .iter()
        .map(|p| p.iter().map(|&(i, j)| cost.cost(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn exact_dtw_matches_enumeration_on_rectangles() {
    let mut rng = Rng::new(10);
    for (rows, cols) in [(1, 1), (1, 5), (5, 1), (2, 3), (3, 4), (4, 6), (6, 5)] {
        for _ in 0..40 {
            let grid = random_grid(&mut rng, rows, cols);
            let path = dtw_exact(&grid).unwrap();
            assert!(path.is_valid(rows, cols));
            assert!((path.cost - brute_force_min(&grid)).abs() <= 1e-12);
            assert!((path.cost - path.cost_on(&grid)).abs() <= 1e-12);
        }
    }
}

#[test]
fn fastdtw_is_an_upper_bound_and_exact_with_large_radius() {
    let mut rng = Rng::new(11);
    for (rows, cols) in [(40, 40), (37, 53), (64, 20)] {
        let grid = random_grid(&mut rng, rows, cols);
        let exact = dtw_exact(&grid).unwrap();
        for radius in [0, 1, 3, 10] {
            let approx = fastdtw(&grid, radius).unwrap();
            assert!(approx.is_valid(rows, cols));
            assert!(approx.cost >= exact.cost - 1e-9);
        }
        let full = fastdtw(&grid, rows.max(cols)).unwrap();
        assert!((full.cost - exact.cost).abs() <= 1e-9);
    }
}

#[test]
fn fft_agrees_with_direct_dft() {
    let mut rng = Rng::new(12);
    for n in [1usize, 2, 4, 8, 64, 256, 512] {
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
            .collect();
        for inverse in [false, true] {
            let fast = fft(&x, inverse).unwrap();
            let slow = dft_naive(&x, inverse);
            let scale = slow.iter().map(|v| v.norm()).fold(1e-300, f64::max);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() / scale <= 1e-9, "n={n}");
            }
        }
        // Parseval: sum |x|^2 = sum |X|^2 / N
        let spec = fft(&x, false).unwrap();
        let time: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let freq: f64 = spec.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        assert!((time - freq).abs() <= 1e-9 * time.max(1.0));
    }
}

#[test]
fn rendered_a4_peaks_in_expected_bins() {
    let score = Score::new(vec![NoteEvent::new(0.0, 2.0, 69, 100).unwrap()]);
    let audio = render(&score, &Timbre::single_harmonic(), DEFAULT_SAMPLE_RATE);
    let stft = analyze(&audio, Transform::Stft).unwrap();
    let cqt = analyze(&audio, Transform::Cqt).unwrap();
    let mid = stft.frames / 4;
    assert_eq!(stft.argmax_bin(mid), (440.0f64 * 1024.0 / 22050.0).round() as usize);
    // C1 + 45 semitones = A4
    assert_eq!(cqt.argmax_bin(mid), 45);
    assert!((cqt.bin_freqs[45] - 440.0).abs() < 1e-6);
}

fn loss_at(params: &NetworkParams, a: &Patch, b: &Patch, y: f64, m: f64) -> f64 {
    let d = euclidean(&forward(params, a).unwrap(), &forward(params, b).unwrap()).unwrap();
    contrastive_loss(d, y, m)
}

fn pattern(params: &NetworkParams, a: &Patch, b: &Patch) -> (Vec<u64>, Vec<u64>) {
    (
        params.forward_trace(a).unwrap().activation_pattern(),
        params.forward_trace(b).unwrap().activation_pattern(),
    )
}

fn random_patch(rng: &mut Rng, rows: usize, cols: usize) -> Patch {
    Patch::from_raw(
        (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        rows,
        cols,
        0,
    )
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let arch = Architecture {
        filters1: 3,
        filters2: 2,
        embedding: 5,
    };
    let (rows, cols, margin, eps) = (7, 10, 1.0, 1e-4);
    let mut rng = Rng::new(13);
    for y in [0.0, 1.0] {
        // find a pair with 0 < D < m so both loss branches are smooth
        let (params, a, b) = loop {
            let params = NetworkParams::init(arch, rows, cols, rng.next_u64()).unwrap();
            let a = random_patch(&mut rng, rows, cols);
            let b = random_patch(&mut rng, rows, cols);
            let d = euclidean(&forward(&params, &a).unwrap(), &forward(&params, &b).unwrap()).unwrap();
            if d > 0.05 && d < margin - 0.05 {
                break (params, a, b);
            }
        };
        let (_, grads) = backward(&params, &a, &b, y, margin).unwrap();
        let base = pattern(&params, &a, &b);
        let mut checked = 0;
        for k in 0..params.len() {
            let mut plus = params.clone();
            plus.set_flat(k, params.get_flat(k) + eps);
            let mut minus = params.clone();
            minus.set_flat(k, params.get_flat(k) - eps);
            if pattern(&plus, &a, &b) != base || pattern(&minus, &a, &b) != base {
                continue;
            }
            let numeric = (loss_at(&plus, &a, &b, y, margin) - loss_at(&minus, &a, &b, y, margin)) / (2.0 * eps);
            let analytic = grads.get_flat(k);
            let scale = analytic.abs().max(numeric.abs());
            if scale > 1e-6 {
                assert!(
                    (analytic - numeric).abs() / scale <= 1e-4,
                    "param {k}: {analytic} vs {numeric}"
                );
            } else {
                assert!((analytic - numeric).abs() <= 1e-9);
            }
            checked += 1;
        }
        assert!(
            checked * 10 >= params.len() * 9,
            "only {checked}/{} parameters away from kinks",
            params.len()
        );
    }
}
