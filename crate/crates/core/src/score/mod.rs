//! Symbolic score model and Standard MIDI File support.

mod smf;

pub use smf::{decode_vlq, encode_vlq, parse_smf, parse_smf_verbose, write_smf, SmfError, SmfWarning};

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoteError {
    #[error("note duration must be positive, got {0}")]
    Duration(f64),
    #[error("note onset must be finite and non-negative, got {0}")]
    Onset(f64),
    #[error("pitch {0} outside 0..=127")]
    Pitch(u8),
    #[error("velocity {0} outside 1..=127")]
    Velocity(u8),
}

/// One sounding note, in absolute seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub onset: f64,
    pub duration: f64,
    pub pitch: u8,
    pub velocity: u8,
}

impl NoteEvent {
    pub fn new(onset: f64, duration: f64, pitch: u8, velocity: u8) -> Result<Self, NoteError> {
        if !(onset.is_finite() && onset >= 0.0) {
            return Err(NoteError::Onset(onset));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(NoteError::Duration(duration));
        }
        if pitch > 127 {
            return Err(NoteError::Pitch(pitch));
        }
        if !(1..=127).contains(&velocity) {
            return Err(NoteError::Velocity(velocity));
        }
        Ok(NoteEvent {
            onset,
            duration,
            pitch,
            velocity,
        })
    }

    pub fn end(&self) -> f64 {
        self.onset + self.duration
    }

    fn order(&self, other: &Self) -> Ordering {
        self.onset
            .total_cmp(&other.onset)
            .then(self.pitch.cmp(&other.pitch))
            .then(self.duration.total_cmp(&other.duration))
            .then(self.velocity.cmp(&other.velocity))
    }
}

/// Note events sorted by onset (ties broken by pitch, duration, velocity).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Score {
    events: Vec<NoteEvent>,
}

impl Score {
    pub fn new(mut events: Vec<NoteEvent>) -> Self {
        events.sort_by(NoteEvent::order);
        Score { events }
    }

    pub fn empty() -> Self {
        Score::default()
    }

    pub fn events(&self) -> &[NoteEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// End time of the last sounding note, 0 for an empty score.
    pub fn length(&self) -> f64 {
        self.events.iter().map(NoteEvent::end).fold(0.0, f64::max)
    }

    /// Applies a monotone time map to every onset and note end.
    pub fn map_time(&self, f: impl Fn(f64) -> f64) -> Score {
        let events = self
            .events
            .iter()
            .map(|e| {
                let on = f(e.onset);
                let off = f(e.end());
                NoteEvent {
                    onset: on,
                    duration: (off - on).max(f64::MIN_POSITIVE),
                    ..*e
                }
            })
            .collect();
        Score::new(events)
    }
}

/// Tempo changes in ticks, first entry at tick 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TempoMap {
    changes: Vec<(u64, u32)>,
}

pub const DEFAULT_TEMPO: u32 = 500_000;

impl Default for TempoMap {
    fn default() -> Self {
        TempoMap {
            changes: vec![(0, DEFAULT_TEMPO)],
        }
    }
}

impl TempoMap {
    /// Builds a map from unordered `(tick, µs per quarter)` entries. Later
    /// entries at the same tick win; a tick-0 default is inserted if missing.
    pub fn from_changes(mut raw: Vec<(u64, u32)>) -> Self {
        raw.sort_by_key(|&(t, _)| t);
        let mut changes: Vec<(u64, u32)> = Vec::with_capacity(raw.len() + 1);
        for (tick, tempo) in raw {
            if tempo == 0 {
                continue;
            }
            match changes.last_mut() {
                Some(last) if last.0 == tick => last.1 = tempo,
                _ => changes.push((tick, tempo)),
            }
        }
        if changes.first().is_none_or(|c| c.0 != 0) {
            changes.insert(0, (0, DEFAULT_TEMPO));
        }
        TempoMap { changes }
    }

    pub fn changes(&self) -> &[(u64, u32)] {
        &self.changes
    }

    pub fn tick_to_seconds(&self, tick: u64, ticks_per_quarter: u16) -> f64 {
        let tpq = ticks_per_quarter as f64;
        let mut seconds = 0.0;
        for (k, &(start, tempo)) in self.changes.iter().enumerate() {
            if tick <= start {
                break;
            }
            let end = self.changes.get(k + 1).map_or(tick, |&(next, _)| next.min(tick));
            seconds += (end - start) as f64 * tempo as f64 * 1e-6 / tpq;
        }
        seconds
    }
}
