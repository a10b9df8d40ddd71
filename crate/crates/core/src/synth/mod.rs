//! Deterministic additive synthesis of a [`Score`] and PCM16 WAV I/O.

mod wav;

pub use wav::{wav_read, wav_write, WavError};

use crate::score::Score;
use crate::Exec;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SAMPLE_RATE: u32 = 22_050;
/// Silence appended after the last note.
pub const TAIL_SECONDS: f64 = 0.5;
/// Peak level that rendering normalizes down to.
pub const PEAK_LEVEL: f64 = 0.9;

/// Mono audio with samples nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        AudioBuffer { samples, sample_rate }
    }

    pub fn silence(seconds: f64, sample_rate: u32) -> Self {
        let n = (seconds * f64::from(sample_rate)).round() as usize;
        AudioBuffer::new(vec![0.0; n], sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Mean squared sample value.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }
}

/// Harmonic amplitudes plus a linear ADSR envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timbre {
    pub harmonic_amplitudes: Vec<f64>,
    pub attack: f64,
    pub decay: f64,
    pub sustain_level: f64,
    pub release: f64,
}

impl Default for Timbre {
    fn default() -> Self {
        Timbre {
            harmonic_amplitudes: (1..=8).map(|h| 1.0 / h as f64).collect(),
            attack: 0.01,
            decay: 0.05,
            sustain_level: 0.7,
            release: 0.05,
        }
    }
}

impl Timbre {
    pub const MAX_HARMONICS: usize = 16;

    pub fn single_harmonic() -> Self {
        Timbre {
            harmonic_amplitudes: vec![1.0],
            ..Timbre::default()
        }
    }

    pub fn is_valid(&self) -> bool {
        let amps = &self.harmonic_amplitudes;
        !amps.is_empty()
            && amps.len() <= Self::MAX_HARMONICS
            && amps.iter().all(|a| a.is_finite() && *a >= 0.0)
            && amps.iter().any(|a| *a > 0.0)
            && [self.attack, self.decay, self.release]
                .iter()
                .all(|t| t.is_finite() && *t >= 0.0)
            && (0.0..=1.0).contains(&self.sustain_level)
    }
}

/// Equal-tempered frequency of a MIDI note number, A4 = 440 Hz.
pub fn pitch_to_hz(pitch: u8) -> f64 {
    440.0 * 2f64.powf((f64::from(pitch) - 69.0) / 12.0)
}

/// Envelope segment lengths in samples for one note.
struct Envelope {
    attack: f64,
    decay: f64,
    sustain: f64,
    release: f64,
    gate: f64,
}

impl Envelope {
    fn new(timbre: &Timbre, duration: f64, sr: f64) -> Self {
        let (mut a, mut d, mut r) = (timbre.attack, timbre.decay, timbre.release);
        let mut gate = duration;
        if duration < a + r {
            // squeeze attack/decay/release so attack + release fit the note
            let k = duration / (a + r);
            a *= k;
            d *= k;
            r *= k;
            gate = duration - r;
        }
        Envelope {
            attack: a * sr,
            decay: d * sr,
            sustain: timbre.sustain_level,
            release: r * sr,
            gate: gate * sr,
        }
    }

    fn len(&self) -> usize {
        (self.gate + self.release).ceil() as usize
    }

    fn held_level(&self, n: f64) -> f64 {
        if n < self.attack {
            n / self.attack
        } else if n < self.attack + self.decay {
            1.0 - (1.0 - self.sustain) * (n - self.attack) / self.decay
        } else {
            self.sustain
        }
    }

    fn level(&self, n: f64) -> f64 {
        if n < self.gate {
            self.held_level(n)
        } else if self.release > 0.0 {
            let at_gate = self.held_level(self.gate);
            (at_gate * (1.0 - (n - self.gate) / self.release)).max(0.0)
        } else {
            0.0
        }
    }
}

fn render_note(pitch: u8, velocity: u8, duration: f64, timbre: &Timbre, sample_rate: u32) -> Vec<f64> {
    let sr = f64::from(sample_rate);
    let env = Envelope::new(timbre, duration, sr);
    let len = env.len();
    let f0 = pitch_to_hz(pitch);
    let gain = f64::from(velocity) / 127.0;
    let nyquist = sr / 2.0;

    let mut out = vec![0.0; len];
    for (h, &amp) in timbre.harmonic_amplitudes.iter().enumerate() {
        let freq = f0 * (h + 1) as f64;
        if freq >= nyquist || amp == 0.0 {
            continue;
        }
        let omega = std::f64::consts::TAU * freq / sr;
        let (step_im, step_re) = omega.sin_cos();
        let scale = amp * gain;
        // phasor recurrence, re-anchored to an exact sin/cos every block
        for (block, chunk) in out.chunks_mut(4096).enumerate() {
            let start = (block * 4096) as f64 * omega;
            let (mut im, mut re) = start.sin_cos();
            for s in chunk {
                *s += scale * im;
                let next_re = re * step_re - im * step_im;
                im = re * step_im + im * step_re;
                re = next_re;
            }
        }
    }
    for (n, s) in out.iter_mut().enumerate() {
        *s *= env.level(n as f64);
    }
    out
}

/// Renders a score with additive synthesis.
///
/// The buffer spans the score length plus [`TAIL_SECONDS`] of silence and is
/// scaled down to a peak of [`PEAK_LEVEL`] when it would exceed it.
pub fn render(score: &Score, timbre: &Timbre, sample_rate: u32) -> AudioBuffer {
    render_with(score, timbre, sample_rate, Exec::default())
}

pub fn render_with(score: &Score, timbre: &Timbre, sample_rate: u32, exec: Exec) -> AudioBuffer {
    let sr = f64::from(sample_rate);
    let events = score.events();
    let notes = exec.map(events.len(), |k| {
        let e = &events[k];
        let start = (e.onset * sr).round() as usize;
        (start, render_note(e.pitch, e.velocity, e.duration, timbre, sample_rate))
    });
    let note_end = notes.iter().map(|(s, v)| s + v.len()).max().unwrap_or(0);
    let total = ((score.length() + TAIL_SECONDS) * sr).ceil() as usize;
    let mut samples = vec![0.0; total.max(note_end)];
    for (start, note) in &notes {
        for (dst, v) in samples[*start..].iter_mut().zip(note) {
            *dst += v;
        }
    }
    let mut buf = AudioBuffer::new(samples, sample_rate);
    let peak = buf.peak();
    if peak > PEAK_LEVEL {
        let k = PEAK_LEVEL / peak;
        buf.samples.iter_mut().for_each(|s| *s *= k);
    }
    buf
}
