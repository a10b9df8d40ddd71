use super::AudioBuffer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WavError {
    #[error("not a RIFF/WAVE file")]
    NotWave,
    #[error("unsupported WAV encoding: format tag {format}, {bits} bits per sample (only PCM16 is supported)")]
    Unsupported { format: u16, bits: u16 },
    #[error("unsupported channel count {0}")]
    Channels(u16),
    #[error("WAV file has no {0} chunk")]
    MissingChunk(&'static str),
    #[error("truncated WAV data")]
    Truncated,
}

const PCM: u16 = 1;

/// Encodes mono PCM16. Samples are scaled by 32768, rounded and clamped.
pub fn wav_write(audio: &AudioBuffer) -> Vec<u8> {
    let data_len = audio.samples.len() as u32 * 2;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&audio.sample_rate.to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &audio.samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

/// Decodes PCM16 WAV; multi-channel input is down-mixed by averaging.
pub fn wav_read(bytes: &[u8]) -> Result<AudioBuffer, WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::NotWave);
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let len = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(len).ok_or(WavError::Truncated)?;
        if body_end > bytes.len() {
            // tolerate a data chunk whose declared length overruns the file
            if id == b"data" {
                data = Some(&bytes[body_start..]);
                break;
            }
            return Err(WavError::Truncated);
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(WavError::Truncated);
                }
                let format = u16::from_le_bytes([body[0], body[1]]);
                let channels = u16::from_le_bytes([body[2], body[3]]);
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes([body[14], body[15]]);
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        pos = body_end + (len & 1);
    }
    let (format, channels, sample_rate, bits) = fmt.ok_or(WavError::MissingChunk("fmt"))?;
    if format != PCM || bits != 16 {
        return Err(WavError::Unsupported { format, bits });
    }
    if channels == 0 {
        return Err(WavError::Channels(channels));
    }
    let data = data.ok_or(WavError::MissingChunk("data"))?;
    let ch = channels as usize;
    let frame_bytes = 2 * ch;
    let samples = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f64 = frame
                .chunks_exact(2)
                .map(|b| f64::from(i16::from_le_bytes([b[0], b[1]])) / 32768.0)
                .sum();
            sum / ch as f64
        })
        .collect();
    Ok(AudioBuffer::new(samples, sample_rate))
}
