use super::{log_compress, SignalError, Spectrogram, Transform};
use crate::synth::AudioBuffer;
use crate::Exec;

/// C1 in equal temperament with A4 = 440 Hz (≈ 32.703 Hz); A4 sits at bin 45.
pub const CQT_FMIN_C1: f64 = 32.703_195_662_574_83;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqtParams {
    pub f_min: f64,
    pub bins_per_octave: usize,
    pub n_bins: usize,
    pub hop: usize,
}

impl Default for CqtParams {
    fn default() -> Self {
        CqtParams {
            f_min: CQT_FMIN_C1,
            bins_per_octave: 12,
            n_bins: 84,
            hop: 512,
        }
    }
}

impl CqtParams {
    /// Quality factor `1 / (2^(1/B) - 1)`.
    pub fn q(&self) -> f64 {
        1.0 / (2f64.powf(1.0 / self.bins_per_octave as f64) - 1.0)
    }
}

/// `f_k = f_min · 2^(k/B)` for `k in 0..n_bins`.
pub fn cqt_center_frequencies(f_min: f64, bins_per_octave: usize, n_bins: usize) -> Vec<f64> {
    (0..n_bins)
        .map(|k| f_min * 2f64.powf(k as f64 / bins_per_octave as f64))
        .collect()
}

struct Kernel {
    len: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn kernel(freq: f64, len: usize, sr: f64) -> Kernel {
    let window = super::stft::hann(len);
    let norm: f64 = window.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let half = (len / 2) as f64;
    let mut re = Vec::with_capacity(len);
    let mut im = Vec::with_capacity(len);
    for (n, w) in window.iter().enumerate() {
        let phase = -std::f64::consts::TAU * freq * (n as f64 - half) / sr;
        let (s, c) = phase.sin_cos();
        re.push(w * c / norm);
        im.push(w * s / norm);
    }
    Kernel { len, re, im }
}

/// Direct constant-Q transform with default hop (512 samples).
pub fn cqt(audio: &AudioBuffer, f_min: f64, bins_per_octave: usize, n_bins: usize) -> Result<Spectrogram, SignalError> {
    let params = CqtParams {
        f_min,
        bins_per_octave,
        n_bins,
        ..CqtParams::default()
    };
    cqt_with(audio, &params, Exec::default())
}

/// Direct constant-Q transform: each coefficient is the inner product of
/// the audio with a Hann-windowed complex exponential of length
/// `N_k = min(ceil(Q·fs/f_k), len)` centred on sample `t·hop`, normalized
/// by the window sum. Frames are `0..=len/hop`; audio outside the buffer
/// counts as zero.
pub fn cqt_with(audio: &AudioBuffer, params: &CqtParams, exec: Exec) -> Result<Spectrogram, SignalError> {
    if params.bins_per_octave == 0 || params.n_bins == 0 {
        return Err(SignalError::CqtParams("bins_per_octave and n_bins must be positive"));
    }
    if !(params.f_min.is_finite() && params.f_min > 0.0) {
        return Err(SignalError::CqtParams("f_min must be positive"));
    }
    if params.hop == 0 {
        return Err(SignalError::Hop(0));
    }
    let sr = f64::from(audio.sample_rate);
    let nyquist = sr / 2.0;
    let freqs = cqt_center_frequencies(params.f_min, params.bins_per_octave, params.n_bins);
    if let Some((bin, &freq)) = freqs.iter().enumerate().find(|(_, &f)| f >= nyquist) {
        return Err(SignalError::AboveNyquist { bin, freq, nyquist });
    }

    let len = audio.samples.len();
    let q = params.q();
    let kernels: Vec<Kernel> = freqs
        .iter()
        .map(|&f| {
            let n_k = ((q * sr / f).ceil() as usize).min(len).max(1);
            kernel(f, n_k, sr)
        })
        .collect();

    let bins = params.n_bins;
    let frames = 1 + len / params.hop;
    let mut data = vec![0.0; frames * bins];
    let x = &audio.samples;
    exec.fill_chunks(&mut data, bins, |t, row| {
        let center = (t * params.hop) as isize;
        for (dst, k) in row.iter_mut().zip(&kernels) {
            let start = center - (k.len / 2) as isize;
            // clip the kernel to the part that overlaps the audio
            let n_lo = (-start).max(0) as usize;
            let n_hi = ((len as isize - start).max(0) as usize).min(k.len);
            let (mut acc_re, mut acc_im) = (0.0, 0.0);
            if n_lo < n_hi {
                let seg = &x[(start + n_lo as isize) as usize..(start + n_hi as isize) as usize];
                for ((s, r), i) in seg.iter().zip(&k.re[n_lo..n_hi]).zip(&k.im[n_lo..n_hi]) {
                    acc_re += s * r;
                    acc_im += s * i;
                }
            }
            *dst = log_compress(acc_re.hypot(acc_im));
        }
    });
    Ok(Spectrogram {
        data,
        frames,
        bins,
        hop: params.hop,
        sample_rate: audio.sample_rate,
        kind: Transform::Cqt,
        bin_freqs: freqs,
    })
}
