//! Quantized symbolic-music data model shared by every stage of the pipeline.
//!
//! Onsets and durations are exact rationals counted in quarter-note beats.
//! Costs computed from these values are floating point, but every grid
//! comparison (downbeats, chord spans, bin lengths) stays exact.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// A time value in quarter-note beats.
pub type Beats = Rational64;

/// Shorthand constructor for a rational beat value.
pub fn beats(numer: i64, denom: i64) -> Beats {
    Beats::new(numer, denom)
}

/// Default quantization grid: four subdivisions per quarter (sixteenth notes).
pub const DEFAULT_GRID: i64 = 4;

/// `Pitch mod 12`.
pub fn pitch_class(pitch: u8) -> u8 {
    pitch % 12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeSignature {
    pub numerator: u32,
    pub denominator: u32,
}

impl TimeSignature {
    pub const COMMON: TimeSignature = TimeSignature {
        numerator: 4,
        denominator: 4,
    };

    pub fn new(numerator: u32, denominator: u32) -> Result<Self> {
        if numerator == 0 || denominator == 0 || !denominator.is_power_of_two() {
            return Err(Error::InvalidTimeSignature {
                numerator,
                denominator,
            });
        }
        Ok(TimeSignature {
            numerator,
            denominator,
        })
    }

    /// Measure length in quarter beats: `numerator * 4 / denominator`.
    pub fn measure_length(&self) -> Beats {
        beats(4 * self.numerator as i64, self.denominator as i64)
    }
}

impl Default for TimeSignature {
    fn default() -> Self {
        TimeSignature::COMMON
    }
}

impl fmt::Display for TimeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Twelve-bit pitch-class set. Bit `k` is pitch class `k` (C = 0).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Chroma(u16);

impl Chroma {
    pub const EMPTY: Chroma = Chroma(0);

    pub fn from_bits(bits: u16) -> Self {
        Chroma(bits & 0x0fff)
    }

    pub fn from_pitch_classes(pcs: &[u8]) -> Self {
        pcs.iter().fold(Chroma(0), |c, &pc| c.with(pc))
    }

    /// Build from a 12-element 0/1 vector. Any other length or value is rejected.
    pub fn from_vector(v: &[u8]) -> Option<Self> {
        if v.len() != 12 || v.iter().any(|&b| b > 1) {
            return None;
        }
        Some(
            v.iter()
                .enumerate()
                .filter(|(_, &b)| b == 1)
                .fold(Chroma(0), |c, (pc, _)| c.with(pc as u8)),
        )
    }

    pub fn with(self, pc: u8) -> Self {
        Chroma(self.0 | (1 << (pc % 12)))
    }

    pub fn contains(&self, pc: u8) -> bool {
        pc < 12 && self.0 & (1 << pc) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn bits(&self) -> u16 {
        self.0
    }

    pub fn to_vector(&self) -> [u8; 12] {
        let mut out = [0u8; 12];
        for (pc, slot) in out.iter_mut().enumerate() {
            *slot = self.contains(pc as u8) as u8;
        }
        out
    }

    pub fn pitch_classes(&self) -> impl Iterator<Item = u8> + '_ {
        (0..12u8).filter(move |&pc| self.contains(pc))
    }

    /// Rotate the set upward by `semitones` (mod 12).
    pub fn transpose(&self, semitones: i32) -> Self {
        Chroma::from_pitch_classes(
            &self
                .pitch_classes()
                .map(|pc| (pc as i32 + semitones).rem_euclid(12) as u8)
                .collect::<Vec<_>>(),
        )
    }
}

impl fmt::Debug for Chroma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chroma({:012b})", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Note {
    pub onset: Beats,
    pub pitch: u8,
    pub duration: Beats,
}

impl Note {
    pub fn new(onset: Beats, pitch: u8, duration: Beats) -> Self {
        Note {
            onset,
            pitch,
            duration,
        }
    }

    pub fn end(&self) -> Beats {
        self.onset + self.duration
    }

    pub fn pitch_class(&self) -> u8 {
        pitch_class(self.pitch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChordEvent {
    pub onset: Beats,
    pub duration: Beats,
    pub chroma: Chroma,
    /// Symbol the chord was written with, if any. Display only.
    pub label: Option<String>,
}

impl ChordEvent {
    pub fn new(onset: Beats, duration: Beats, chroma: Chroma) -> Self {
        ChordEvent {
            onset,
            duration,
            chroma,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn end(&self) -> Beats {
        self.onset + self.duration
    }

    pub fn sounds_at(&self, t: Beats) -> bool {
        self.onset <= t && t < self.end()
    }
}

/// A monophonic melody phrase over a chord timeline: the unit of reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    pub notes: Vec<Note>,
    pub chords: Vec<ChordEvent>,
    pub time_signature: TimeSignature,
    /// Length of the pickup before the first full measure.
    pub anacrusis: Beats,
}

impl Phrase {
    pub fn new(notes: Vec<Note>, chords: Vec<ChordEvent>, time_signature: TimeSignature) -> Self {
        Phrase {
            notes,
            chords,
            time_signature,
            anacrusis: Beats::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    /// Index of the chord sounding at `t`.
    pub fn chord_at(&self, t: Beats) -> Option<usize> {
        self.chords.iter().position(|c| c.sounds_at(t))
    }

    /// `(min, max)` pitch over the phrase.
    pub fn pitch_range(&self) -> Option<(u8, u8)> {
        let min = self.notes.iter().map(|n| n.pitch).min()?;
        let max = self.notes.iter().map(|n| n.pitch).max()?;
        Some((min, max))
    }

    /// Time span covered by the chord timeline and the notes together.
    pub fn span(&self) -> (Beats, Beats) {
        let starts = self
            .chords
            .iter()
            .map(|c| c.onset)
            .chain(self.notes.iter().map(|n| n.onset));
        let ends = self
            .chords
            .iter()
            .map(|c| c.end())
            .chain(self.notes.iter().map(|n| n.end()));
        let start = starts.min().unwrap_or_else(Beats::zero);
        let end = ends.max().unwrap_or(start);
        (start, end)
    }

    /// Sum of chord durations.
    pub fn chord_timeline_length(&self) -> Beats {
        self.chords.iter().map(|c| c.duration).sum()
    }

    pub fn measure_position(&self, onset: Beats) -> MeasurePosition {
        measure_position(onset, self.time_signature, self.anacrusis)
    }

    /// Shift every pitch and chord by `semitones`. Returns `None` if a pitch leaves 0..=127.
    pub fn transpose(&self, semitones: i32) -> Option<Phrase> {
        let notes = self
            .notes
            .iter()
            .map(|n| {
                let p = n.pitch as i32 + semitones;
                (0..=127)
                    .contains(&p)
                    .then(|| Note::new(n.onset, p as u8, n.duration))
            })
            .collect::<Option<Vec<_>>>()?;
        let chords = self
            .chords
            .iter()
            .map(|c| ChordEvent {
                chroma: c.chroma.transpose(semitones),
                label: None,
                ..c.clone()
            })
            .collect();
        Some(Phrase {
            notes,
            chords,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurePosition {
    /// −1 for the pickup region before the first full measure.
    pub measure_index: i64,
    pub beat_in_measure: Beats,
}

/// Locate `onset` within its measure, counting measures from the end of the anacrusis.
pub fn measure_position(onset: Beats, ts: TimeSignature, anacrusis: Beats) -> MeasurePosition {
    let len = ts.measure_length();
    let rel = onset - anacrusis;
    let measure_index = (rel / len).floor().to_integer();
    let beat_in_measure = rel - len * Beats::from_integer(measure_index);
    MeasurePosition {
        measure_index,
        beat_in_measure,
    }
}

/// Per-note chord assignment, with anticipations mapped to the following chord.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChordMembership {
    chord_of: Vec<usize>,
    anticipation: Vec<bool>,
}

impl ChordMembership {
    pub fn new(chord_of: Vec<usize>, anticipation: Vec<bool>) -> Self {
        assert_eq!(chord_of.len(), anticipation.len());
        ChordMembership {
            chord_of,
            anticipation,
        }
    }

    pub fn chord_of(&self, note_index: usize) -> Result<usize> {
        self.chord_of
            .get(note_index)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: note_index,
                len: self.chord_of.len(),
            })
    }

    pub fn is_anticipation(&self, note_index: usize) -> bool {
        self.anticipation.get(note_index).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.chord_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chord_of.is_empty()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.chord_of
    }

    pub fn anticipation_flags(&self) -> &[bool] {
        &self.anticipation
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedNote {
    pub onset: Beats,
    pub pitch: u8,
    pub duration: Beats,
    /// The pitch is held into the next note (suspension across a chord change).
    pub tie_to_next: bool,
    /// Indices of the original notes this note stands for, strictly increasing.
    pub source_indices: Vec<usize>,
}

impl ReducedNote {
    pub fn end(&self) -> Beats {
        self.onset + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedMelody {
    pub notes: Vec<ReducedNote>,
    pub phrase_ref: String,
}

impl ReducedMelody {
    /// The melody with every note kept, one reduced note per source note.
    pub fn identity(phrase: &Phrase, phrase_ref: impl Into<String>) -> Self {
        ReducedMelody {
            notes: phrase
                .notes
                .iter()
                .enumerate()
                .map(|(i, n)| ReducedNote {
                    onset: n.onset,
                    pitch: n.pitch,
                    duration: n.duration,
                    tie_to_next: false,
                    source_indices: vec![i],
                })
                .collect(),
            phrase_ref: phrase_ref.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    /// Merge tied same-pitch neighbours into single sounding notes.
    pub fn coalesce_ties(&self) -> Vec<Note> {
        let mut out: Vec<Note> = Vec::with_capacity(self.notes.len());
        let mut held = false;
        for n in &self.notes {
            match out.last_mut() {
                Some(prev) if held && prev.pitch == n.pitch && prev.end() == n.onset => {
                    prev.duration += n.duration;
                }
                _ => out.push(Note::new(n.onset, n.pitch, n.duration)),
            }
            held = n.tie_to_next;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    EmptyPhrase,
    PitchRange,
    NonPositiveDuration,
    NegativeOnset,
    OffGrid,
    Unsorted,
    Overlap,
    EmptyChroma,
    ChordOrder,
    UncoveredOnset,
    NegativeAnacrusis,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::EmptyPhrase => "empty-phrase",
            Rule::PitchRange => "pitch-range",
            Rule::NonPositiveDuration => "non-positive-duration",
            Rule::NegativeOnset => "negative-onset",
            Rule::OffGrid => "off-grid",
            Rule::Unsorted => "unsorted",
            Rule::Overlap => "overlap",
            Rule::EmptyChroma => "empty-chroma",
            Rule::ChordOrder => "chord-order",
            Rule::UncoveredOnset => "uncovered-onset",
            Rule::NegativeAnacrusis => "negative-anacrusis",
        };
        f.write_str(s)
    }
}

/// Where a violation was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    Phrase,
    Note(usize),
    Chord(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Violation {
    pub site: Site,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.site {
            Site::Phrase => write!(f, "{}", self.rule),
            Site::Note(i) => write!(f, "{} at note {}", self.rule, i),
            Site::Chord(i) => write!(f, "{} at chord {}", self.rule, i),
        }
    }
}

fn on_grid(t: Beats, grid: i64) -> bool {
    (grid % t.denom()).is_zero()
}

/// Check every phrase invariant on the default sixteenth grid.
pub fn validate_phrase(p: &Phrase) -> Vec<Violation> {
    validate_phrase_on_grid(p, DEFAULT_GRID)
}

pub fn validate_phrase_on_grid(p: &Phrase, grid: i64) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |site, rule| out.push(Violation { site, rule });

    if p.notes.is_empty() {
        push(Site::Phrase, Rule::EmptyPhrase);
    }
    if p.anacrusis.is_negative() {
        push(Site::Phrase, Rule::NegativeAnacrusis);
    }

    for (i, n) in p.notes.iter().enumerate() {
        if n.pitch > 127 {
            push(Site::Note(i), Rule::PitchRange);
        }
        if !n.duration.is_positive() {
            push(Site::Note(i), Rule::NonPositiveDuration);
        }
        if n.onset.is_negative() {
            push(Site::Note(i), Rule::NegativeOnset);
        }
        if !on_grid(n.onset, grid) || !on_grid(n.duration, grid) {
            push(Site::Note(i), Rule::OffGrid);
        }
        if i > 0 {
            let prev = &p.notes[i - 1];
            if (prev.onset, prev.pitch) > (n.onset, n.pitch) {
                push(Site::Note(i), Rule::Unsorted);
            }
            if prev.end() > n.onset {
                push(Site::Note(i), Rule::Overlap);
            }
        }
        if p.chord_at(n.onset).is_none() {
            push(Site::Note(i), Rule::UncoveredOnset);
        }
    }

    for (k, c) in p.chords.iter().enumerate() {
        if !c.duration.is_positive() {
            push(Site::Chord(k), Rule::NonPositiveDuration);
        }
        if c.onset.is_negative() {
            push(Site::Chord(k), Rule::NegativeOnset);
        }
        if c.chroma.is_empty() {
            push(Site::Chord(k), Rule::EmptyChroma);
        }
        if k > 0 && p.chords[k - 1].end() > c.onset {
            push(Site::Chord(k), Rule::ChordOrder);
        }
    }
    out
}

/// Fails with [`Error::Invalid`] if the phrase breaks any invariant.
pub fn ensure_valid(p: &Phrase) -> Result<()> {
    let v = validate_phrase(p);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(v))
    }
}

/// Snap `t` to the nearest multiple of `1/grid`; exact halves go to the earlier point.
pub fn snap(t: Beats, grid: i64) -> Beats {
    let scaled = t * grid;
    let (q, r) = scaled.numer().div_mod_floor(scaled.denom());
    // r / denom is the fractional part in [0, 1)
    let up = 2 * r > *scaled.denom();
    beats(if up { q + 1 } else { q }, grid)
}
