//! Parsing external sources into validated phrases, plus chord membership.

mod leadsheet;
mod midi;
mod sidecar;
pub mod symbol;

pub(crate) use leadsheet::{chord_to_doc, json_error};
pub use leadsheet::{
    document_to_phrases, parse_leadsheet, phrase_to_document, serialize_phrase, ChordDoc,
    LeadSheetDocument, MetaDoc, NoteDoc, RationalRepr,
};
pub use midi::{import_midi, MidiImportConfig};
pub use sidecar::{parse_chord_sidecar, write_chord_sidecar};
pub use symbol::{chord_name, parse_chord_symbol, pitch_name};

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::model::{beats, snap, Beats, ChordMembership, Note, Phrase, DEFAULT_GRID};

/// Snapping grid in subdivisions of a quarter note.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizationConfig {
    grid: i64,
}

impl QuantizationConfig {
    pub fn new(grid: i64) -> Result<Self> {
        if matches!(grid, 1 | 2 | 4) {
            Ok(QuantizationConfig { grid })
        } else {
            Err(Error::Config(format!("grid must be 1, 2 or 4, got {grid}")))
        }
    }

    pub fn grid(&self) -> i64 {
        self.grid
    }

    /// Snap onset and end to the grid; the result is at least one grid unit long.
    pub fn snap_note(&self, onset: Beats, duration: Beats, pitch: u8) -> Note {
        let start = snap(onset, self.grid);
        let end = snap(onset + duration, self.grid);
        let min = beats(1, self.grid);
        Note::new(start, pitch, (end - start).max(min))
    }
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        QuantizationConfig { grid: DEFAULT_GRID }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnticipationConfig {
    /// How far before a chord change a note may start and still anticipate it.
    pub window: Beats,
}

impl AnticipationConfig {
    pub fn new(window: Beats) -> Result<Self> {
        if window.is_negative() {
            return Err(Error::Config("anticipation window must be >= 0".into()));
        }
        Ok(AnticipationConfig { window })
    }
}

impl Default for AnticipationConfig {
    fn default() -> Self {
        AnticipationConfig {
            window: beats(1, 2),
        }
    }
}

/// Assign each note to a chord, moving anticipations to the chord they anticipate.
///
/// A note anticipates chord `k + 1` when all of these hold:
/// it starts within `cfg.window` before that chord's onset, its pitch class is
/// outside chord `k` (the one sounding at its onset), its pitch class is inside
/// chord `k + 1`, and it is still sounding when chord `k + 1` begins (or ends
/// exactly there).
pub fn detect_anticipations(p: &Phrase, cfg: &AnticipationConfig) -> ChordMembership {
    let mut chord_of = Vec::with_capacity(p.len());
    let mut flags = Vec::with_capacity(p.len());
    for n in &p.notes {
        let current = p
            .chord_at(n.onset)
            .or_else(|| p.chords.iter().rposition(|c| c.onset <= n.onset))
            .unwrap_or(0);
        let anticipates = p.chords.get(current + 1).is_some_and(|next| {
            let pc = n.pitch_class();
            n.onset < next.onset
                && next.onset - n.onset <= cfg.window
                && !p.chords[current].chroma.contains(pc)
                && next.chroma.contains(pc)
                && n.end() >= next.onset
        });
        chord_of.push(if anticipates { current + 1 } else { current });
        flags.push(anticipates);
    }
    ChordMembership::new(chord_of, flags)
}

/// `Chord(x_i)` honoring anticipation flags.
pub fn chord_of(note_index: usize, membership: &ChordMembership) -> Result<usize> {
    membership.chord_of(note_index)
}

/// Parse `3`, `3.5`, `-0.25` or `7/2` exactly.
pub fn parse_beats(s: &str) -> Option<Beats> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(beats(n.trim().parse().ok()?, d));
    }
    let Some((int, frac)) = s.split_once('.') else {
        return s.parse().ok().map(Beats::from_integer);
    };
    if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let (negative, digits) = match int.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, int),
    };
    let whole: i64 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let v = Beats::from_integer(whole) + beats(frac.parse().ok()?, 10i64.pow(frac.len() as u32));
    Some(if negative { -v } else { v })
}
