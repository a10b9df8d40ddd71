use super::{fft_in_place, log_compress, SignalError, Spectrogram, Transform};
use crate::synth::AudioBuffer;
use crate::Exec;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftParams {
    pub frame_len: usize,
    pub hop: usize,
}

impl Default for StftParams {
    fn default() -> Self {
        StftParams {
            frame_len: 1024,
            hop: 512,
        }
    }
}

pub(crate) fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect()
}

/// Hann-windowed STFT magnitudes (bins `0..=frame_len/2`), log-compressed.
/// Audio shorter than one frame is zero-padded to a single frame.
pub fn stft(audio: &AudioBuffer, frame_len: usize, hop: usize) -> Result<Spectrogram, SignalError> {
    stft_with(audio, StftParams { frame_len, hop }, Exec::default())
}

pub fn stft_with(audio: &AudioBuffer, params: StftParams, exec: Exec) -> Result<Spectrogram, SignalError> {
    let StftParams { frame_len, hop } = params;
    if frame_len == 0 || !frame_len.is_power_of_two() {
        return Err(SignalError::NotPowerOfTwo(frame_len));
    }
    if hop == 0 {
        return Err(SignalError::Hop(hop));
    }
    let len = audio.samples.len();
    let frames = if len >= frame_len {
        1 + (len - frame_len) / hop
    } else {
        1
    };
    let bins = frame_len / 2 + 1;
    let window = hann(frame_len);
    let mut data = vec![0.0; frames * bins];
    exec.fill_chunks(&mut data, bins, |t, row| {
        let start = t * hop;
        let mut buf: Vec<Complex64> = (0..frame_len)
            .map(|i| {
                let x = audio.samples.get(start + i).copied().unwrap_or(0.0);
                Complex64::new(x * window[i], 0.0)
            })
            .collect();
        fft_in_place(&mut buf, false).expect("power-of-two length checked above");
        for (dst, z) in row.iter_mut().zip(&buf) {
            *dst = log_compress(z.norm());
        }
    });
    let sr = f64::from(audio.sample_rate);
    Ok(Spectrogram {
        data,
        frames,
        bins,
        hop,
        sample_rate: audio.sample_rate,
        kind: Transform::Stft,
        bin_freqs: (0..bins).map(|k| k as f64 * sr / frame_len as f64).collect(),
    })
}
