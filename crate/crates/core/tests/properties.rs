use proptest::prelude::*;
use siamalign::dataeval::{accuracy_timemap, GroundTruth, TempoCurve};
use siamalign::dtw::{dtw_exact, fastdtw, path_to_timemap, CostGrid, WarpPath};
use siamalign::score::{decode_vlq, encode_vlq, parse_smf, write_smf, NoteEvent, Score};
use siamalign::simmatrix::{binarize, distances_from_embeddings, SimilarityMatrix};
use siamalign::synth::{wav_read, wav_write, AudioBuffer};
use siamalign::Exec;

fn note() -> impl Strategy<Value = NoteEvent> {
    (0u32..4000, 1u32..800, 21u8..=108, 1u8..=127)
        .prop_map(|(on, dur, p, v)| NoteEvent::new(on as f64 * 0.005, dur as f64 * 0.005, p, v).unwrap())
}

fn grid(max: usize) -> impl Strategy<Value = CostGrid> {
    (1..=max, 1..=max)
        .prop_flat_map(|(r, c)| prop::collection::vec(0.0f64..2.0, r * c).prop_map(move |d| CostGrid::new(r, c, d)))
}

proptest! {
    #[test]
    fn vlq_round_trips(v in 0u32..=0x0FFF_FFFF) {
        let mut buf = Vec::new();
        encode_vlq(v, &mut buf);
        prop_assert!(buf.len() <= 4);
        prop_assert_eq!(decode_vlq(&buf).unwrap(), (v, buf.len()));
    }

    #[test]
    fn smf_round_trip_keeps_notes(notes in prop::collection::vec(note(), 0..40)) {
        let score = Score::new(notes);
        let tpq = 480u16;
        let back = parse_smf(&write_smf(&score, tpq).unwrap()).unwrap();
        prop_assert_eq!(back.len(), score.len());
        // default tempo: one tick is 0.5 s / tpq
        let half_tick = 0.5 / tpq as f64 / 2.0 + 1e-12;
        for (a, b) in score.events().iter().zip(back.events()) {
            prop_assert_eq!((a.pitch, a.velocity), (b.pitch, b.velocity));
            prop_assert!((a.onset - b.onset).abs() <= half_tick);
            prop_assert!((a.end() - b.end()).abs() <= 2.0 * half_tick);
        }
    }

    #[test]
    fn wav_round_trip_error_is_within_one_lsb(samples in prop::collection::vec(-1.0f64..1.0, 0..500)) {
        let audio = AudioBuffer::new(samples, 22050);
        let back = wav_read(&wav_write(&audio)).unwrap();
        prop_assert_eq!(back.len(), audio.len());
        for (a, b) in audio.samples.iter().zip(&back.samples) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn exact_dtw_path_is_valid_and_scale_invariant(g in grid(12), k in 0.1f64..10.0) {
        let p = dtw_exact(&g).unwrap();
        prop_assert!(p.is_valid(g.rows, g.cols));
        let scaled = CostGrid::from_fn(g.rows, g.cols, |i, j| k * g.data[i * g.cols + j]);
        let q = dtw_exact(&scaled).unwrap();
        prop_assert!((q.cost - k * p.cost).abs() <= 1e-9 * (1.0 + q.cost));
    }

    #[test]
    fn fastdtw_never_beats_exact(g in grid(30), radius in 0usize..6) {
        let exact = dtw_exact(&g).unwrap();
        let fast = fastdtw(&g, radius).unwrap();
        prop_assert!(fast.is_valid(g.rows, g.cols));
        prop_assert!(fast.cost >= exact.cost - 1e-9);
    }

    #[test]
    fn distance_matrix_of_shared_embeddings_is_symmetric(
        emb in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 1..12)
    ) {
        let m = distances_from_embeddings(&emb, &emb, Exec::Sequential);
        for i in 0..m.rows {
            prop_assert_eq!(m.get(i, i), 0.0);
            for j in 0..m.cols {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                let direct = emb[i].iter().zip(&emb[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                prop_assert!((m.get(i, j) - direct).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn binarize_is_monotone_in_threshold(
        data in prop::collection::vec(0.0f64..3.0, 20),
        t1 in 0.01f64..3.0,
        t2 in 0.01f64..3.0,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let m = SimilarityMatrix::from_distances(data, 4, 5);
        let a = binarize(&m, lo).unwrap();
        let b = binarize(&m, hi).unwrap();
        for (x, y) in a.data.iter().zip(&b.data) {
            prop_assert!(*x == 0.0 || *x == 1.0);
            prop_assert!(x >= y);
        }
    }

    #[test]
    fn warp_is_increasing_and_invertible(
        factors in prop::collection::vec(0.5f64..2.0, 1..6),
        t in 0.0f64..30.0,
    ) {
        let knots = factors.iter().enumerate().map(|(k, &f)| (4.0 * k as f64, f)).collect();
        let curve = TempoCurve::new(knots).unwrap();
        let w = curve.warp_time(t);
        prop_assert!(curve.warp_time(t + 0.01) > w);
        prop_assert!((curve.unwarp_time(w, 1e-6) - t).abs() <= 1e-5);
    }

    #[test]
    fn accuracy_is_bounded_and_monotone_in_tolerance(
        shifts in prop::collection::vec(-5i64..5, 30),
        tau in 0.01f64..0.3,
    ) {
        let period = 512.0 / 22050.0;
        let gt = GroundTruth::sample(&TempoCurve::identity(), 29.0 * period, period);
        // a valid monotone path: diagonal with jitter on the performance side
        let mut steps = vec![(0, 0)];
        let mut j = 0usize;
        for (i, s) in shifts.iter().enumerate() {
            let target = ((i as i64 + s).clamp(0, 29) as usize).max(j);
            if i > 0 {
                if target > j {
                    j += 1;
                }
                steps.push((i, j));
            }
            while j < target {
                j += 1;
                steps.push((i, j));
            }
        }
        while j < 29 {
            j += 1;
            steps.push((29, j));
        }
        let path = WarpPath { steps, cost: 0.0 };
        prop_assert!(path.is_valid(30, 30));
        let tm = path_to_timemap(&path, 512, 22050);
        let a = accuracy_timemap(&tm, &gt, period, tau).unwrap();
        let b = accuracy_timemap(&tm, &gt, period, tau * 2.0).unwrap();
        prop_assert!((0.0..=100.0).contains(&a));
        prop_assert!(a <= b);
    }
}
