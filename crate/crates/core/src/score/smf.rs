use super::{NoteEvent, Score, TempoMap, DEFAULT_TEMPO};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmfError {
    #[error("not a Standard MIDI File (missing MThd header)")]
    BadMagic,
    #[error("unsupported SMF format {0} (only 0 and 1)")]
    UnsupportedFormat(u16),
    #[error("SMPTE time division is not supported")]
    SmpteDivision,
    #[error("ticks per quarter must be non-zero")]
    ZeroDivision,
    #[error("truncated data in {0}")]
    Truncated(&'static str),
    #[error("variable-length quantity longer than 4 bytes")]
    VlqTooLong,
    #[error("data byte 0x{0:02x} with no running status")]
    NoRunningStatus(u8),
    #[error("unexpected status byte 0x{0:02x}")]
    UnexpectedStatus(u8),
    #[error("ticks per quarter {0} outside 24..=960")]
    TicksPerQuarter(u16),
}

/// Recoverable oddities found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmfWarning {
    /// A note-on never released; closed at the end-of-track tick.
    DanglingNote {
        track: usize,
        channel: u8,
        pitch: u8,
        tick: u64,
    },
    /// A note released on the tick it started; dropped.
    ZeroLengthNote {
        track: usize,
        channel: u8,
        pitch: u8,
        tick: u64,
    },
    /// The track chunk ended without an end-of-track meta event.
    MissingEndOfTrack { track: usize },
}

/// Decodes one VLQ from the front of `bytes`, returning `(value, consumed)`.
pub fn decode_vlq(bytes: &[u8]) -> Result<(u32, usize), SmfError> {
    let mut value: u32 = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if i == 4 {
            return Err(SmfError::VlqTooLong);
        }
        value = (value << 7) | u32::from(b & 0x7f);
        if b & 0x80 == 0 {
            return Ok((value, i + 1));
        }
    }
    if bytes.len() >= 4 {
        Err(SmfError::VlqTooLong)
    } else {
        Err(SmfError::Truncated("variable-length quantity"))
    }
}

/// Appends the VLQ encoding of `value` (must fit in 28 bits).
pub fn encode_vlq(mut value: u32, out: &mut Vec<u8>) {
    assert!(value < 1 << 28, "VLQ value {value} exceeds 28 bits");
    let mut buf = [0u8; 4];
    let mut n = 0;
    loop {
        buf[n] = (value & 0x7f) as u8;
        n += 1;
        value >>= 7;
        if value == 0 {
            break;
        }
    }
    for k in (0..n).rev() {
        out.push(if k > 0 { buf[k] | 0x80 } else { buf[k] });
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.data.len()
    }

    fn take(&mut self, n: usize, ctx: &'static str) -> Result<&'a [u8], SmfError> {
        let end = self.pos.checked_add(n).ok_or(SmfError::Truncated(ctx))?;
        let s = self.data.get(self.pos..end).ok_or(SmfError::Truncated(ctx))?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, ctx: &'static str) -> Result<u8, SmfError> {
        Ok(self.take(1, ctx)?[0])
    }

    fn u32(&mut self, ctx: &'static str) -> Result<u32, SmfError> {
        let b = self.take(4, ctx)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn vlq(&mut self) -> Result<u32, SmfError> {
        let (v, n) = decode_vlq(&self.data[self.pos..])?;
        self.pos += n;
        Ok(v)
    }
}

struct RawNote {
    start: u64,
    end: u64,
    pitch: u8,
    velocity: u8,
}

/// Parses an SMF (format 0 or 1, ticks-per-quarter timing) into a [`Score`].
/// Warnings are discarded; see [`parse_smf_verbose`].
pub fn parse_smf(bytes: &[u8]) -> Result<Score, SmfError> {
    parse_smf_verbose(bytes).map(|(score, _)| score)
}

pub fn parse_smf_verbose(bytes: &[u8]) -> Result<(Score, Vec<SmfWarning>), SmfError> {
    let mut r = Reader::new(bytes);
    if bytes.len() < 4 || &bytes[..4] != b"MThd" {
        return Err(SmfError::BadMagic);
    }
    r.pos = 4;
    let header_len = r.u32("header")? as usize;
    let header = r.take(header_len, "header")?;
    if header_len < 6 {
        return Err(SmfError::Truncated("header"));
    }
    let format = u16::from_be_bytes([header[0], header[1]]);
    let division = u16::from_be_bytes([header[4], header[5]]);
    if format > 1 {
        return Err(SmfError::UnsupportedFormat(format));
    }
    if division & 0x8000 != 0 {
        return Err(SmfError::SmpteDivision);
    }
    if division == 0 {
        return Err(SmfError::ZeroDivision);
    }

    let mut notes = Vec::new();
    let mut tempos = Vec::new();
    let mut warnings = Vec::new();
    let mut track = 0;
    while !r.at_end() {
        let id = r.take(4, "chunk header")?;
        let len = r.u32("chunk header")? as usize;
        let body = r.take(len, "chunk body")?;
        if id == b"MTrk" {
            parse_track(body, track, &mut notes, &mut tempos, &mut warnings)?;
            track += 1;
        }
    }

    let tempo_map = TempoMap::from_changes(tempos);
    let events = notes
        .into_iter()
        .map(|n| {
            let on = tempo_map.tick_to_seconds(n.start, division);
            let off = tempo_map.tick_to_seconds(n.end, division);
            NoteEvent {
                onset: on,
                duration: off - on,
                pitch: n.pitch,
                velocity: n.velocity,
            }
        })
        .collect();
    Ok((Score::new(events), warnings))
}

fn parse_track(
    body: &[u8],
    track: usize,
    notes: &mut Vec<RawNote>,
    tempos: &mut Vec<(u64, u32)>,
    warnings: &mut Vec<SmfWarning>,
) -> Result<(), SmfError> {
    // pending note-ons per (channel, pitch), released first-in first-out
    let mut active: Vec<std::collections::VecDeque<(u64, u8)>> = vec![Default::default(); 16 * 128];
    let mut r = Reader::new(body);
    let mut tick: u64 = 0;
    let mut running: Option<u8> = None;
    let mut ended = false;

    while !r.at_end() {
        tick += u64::from(r.vlq()?);
        let first = r.u8("track event")?;
        let status = if first & 0x80 != 0 {
            first
        } else {
            let s = running.ok_or(SmfError::NoRunningStatus(first))?;
            r.pos -= 1;
            s
        };
        match status {
            0xFF => {
                running = None;
                let kind = r.u8("meta event")?;
                let len = r.vlq()? as usize;
                let data = r.take(len, "meta event")?;
                match kind {
                    0x51 if len == 3 => {
                        let t = u32::from_be_bytes([0, data[0], data[1], data[2]]);
                        tempos.push((tick, t));
                    }
                    0x2F => {
                        ended = true;
                        break;
                    }
                    _ => {}
                }
            }
            0xF0 | 0xF7 => {
                running = None;
                let len = r.vlq()? as usize;
                r.take(len, "sysex event")?;
            }
            0x80..=0xEF => {
                running = Some(status);
                let channel = status & 0x0f;
                match status & 0xf0 {
                    0xC0 | 0xD0 => {
                        r.take(1, "channel event")?;
                    }
                    kind => {
                        let d = r.take(2, "channel event")?;
                        let (pitch, vel) = (d[0] & 0x7f, d[1] & 0x7f);
                        let slot = &mut active[channel as usize * 128 + pitch as usize];
                        if kind == 0x90 && vel > 0 {
                            slot.push_back((tick, vel));
                        } else if kind == 0x80 || kind == 0x90 {
                            if let Some((start, velocity)) = slot.pop_front() {
                                if tick > start {
                                    notes.push(RawNote {
                                        start,
                                        end: tick,
                                        pitch,
                                        velocity,
                                    });
                                } else {
                                    warnings.push(SmfWarning::ZeroLengthNote {
                                        track,
                                        channel,
                                        pitch,
                                        tick,
                                    });
                                }
                            }
                        }
                    }
                }
            }
            other => return Err(SmfError::UnexpectedStatus(other)),
        }
    }
    if !ended {
        warnings.push(SmfWarning::MissingEndOfTrack { track });
    }

    for (slot_index, slot) in active.iter_mut().enumerate() {
        let channel = (slot_index / 128) as u8;
        let pitch = (slot_index % 128) as u8;
        for (start, velocity) in slot.drain(..) {
            warnings.push(SmfWarning::DanglingNote {
                track,
                channel,
                pitch,
                tick: start,
            });
            if tick > start {
                notes.push(RawNote {
                    start,
                    end: tick,
                    pitch,
                    velocity,
                });
            } else {
                warnings.push(SmfWarning::ZeroLengthNote {
                    track,
                    channel,
                    pitch,
                    tick,
                });
            }
        }
    }
    Ok(())
}

/// Writes a format-0 SMF with a single 500000 µs/quarter tempo.
///
/// Times are rounded to the nearest tick (a note keeps at least one tick).
/// Overlapping notes of the same pitch are spread over channels so that
/// first-in first-out note pairing reads them back unchanged.
pub fn write_smf(score: &Score, ticks_per_quarter: u16) -> Result<Vec<u8>, SmfError> {
    if !(24..=960).contains(&ticks_per_quarter) {
        return Err(SmfError::TicksPerQuarter(ticks_per_quarter));
    }
    let ticks_per_second = f64::from(ticks_per_quarter) * 1e6 / f64::from(DEFAULT_TEMPO);
    let to_tick = |s: f64| (s * ticks_per_second).round().max(0.0) as u64;

    // (tick, off-before-on, sequence, status, pitch, velocity)
    let mut events: Vec<(u64, u8, usize, u8, u8, u8)> = Vec::with_capacity(score.len() * 2);
    let mut busy_until = vec![[0u64; 16]; 128];
    for (seq, note) in score.events().iter().enumerate() {
        let start = to_tick(note.onset);
        let end = to_tick(note.end()).max(start + 1);
        let lanes = &mut busy_until[note.pitch as usize];
        let channel = lanes.iter().position(|&b| b <= start).unwrap_or(0);
        lanes[channel] = lanes[channel].max(end);
        let ch = channel as u8;
        events.push((start, 1, seq, 0x90 | ch, note.pitch, note.velocity));
        events.push((end, 0, seq, 0x80 | ch, note.pitch, 0));
    }
    events.sort_unstable_by_key(|e| (e.0, e.1, e.2));

    let mut track = Vec::with_capacity(events.len() * 4 + 16);
    track.extend_from_slice(&[0x00, 0xFF, 0x51, 0x03]);
    track.extend_from_slice(&DEFAULT_TEMPO.to_be_bytes()[1..]);
    let mut last = 0u64;
    for (tick, _, _, status, pitch, vel) in events {
        encode_vlq((tick - last) as u32, &mut track);
        track.extend_from_slice(&[status, pitch, vel]);
        last = tick;
    }
    track.extend_from_slice(&[0x00, 0xFF, 0x2F, 0x00]);

    let mut out = Vec::with_capacity(track.len() + 22);
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&ticks_per_quarter.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    Ok(out)
}
