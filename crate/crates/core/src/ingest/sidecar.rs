//! Chord sidecar CSV: `onset_beat,duration_beats,symbol_or_chroma`.
//!
//! One chord per row. A header row is optional, `#` starts a comment line.
//! Beat values may be integers, decimals or `n/d` fractions. The chord column is
//! either a symbol or twelve 0/1 digits (contiguous or whitespace separated).

use num_traits::{Signed, Zero};

use super::leadsheet::resolve_chroma;
use super::parse_beats;
use crate::error::{Error, Result};
use crate::model::{ChordEvent, Chroma};

pub fn parse_chord_sidecar(input: &[u8]) -> Result<Vec<ChordEvent>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut chords = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Sidecar {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(row + 1);
        let fail = |message: &str| Error::Sidecar {
            line,
            message: message.to_string(),
        };
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 3 {
            return Err(fail("expected 3 columns"));
        }
        let onset = parse_beats(&record[0]);
        if row == 0 && chords.is_empty() && onset.is_none() {
            // header
            continue;
        }
        let onset = onset.ok_or_else(|| fail("unparseable onset"))?;
        let duration = parse_beats(&record[1]).ok_or_else(|| fail("unparseable duration"))?;
        if onset.is_negative() {
            return Err(fail("negative onset"));
        }
        if duration <= Zero::zero() {
            return Err(fail("duration must be > 0"));
        }
        let field = &record[2];
        let (chroma, label) = match chroma_digits(field) {
            Some(c) if c.is_empty() => return Err(fail("empty chroma")),
            Some(c) => (c, None),
            None => {
                resolve_chroma(Some(field), None, "sidecar").map_err(|e| fail(&e.to_string()))?
            }
        };
        chords.push(ChordEvent {
            onset,
            duration,
            chroma,
            label,
        });
    }
    chords.sort_by_key(|c| c.onset);
    for k in 1..chords.len() {
        if chords[k - 1].end() > chords[k].onset {
            return Err(Error::Sidecar {
                line: 0,
                message: format!("chord {k} overlaps its predecessor"),
            });
        }
    }
    Ok(chords)
}

fn chroma_digits(field: &str) -> Option<Chroma> {
    let digits: Vec<u8> = field
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',' && *c != ';')
        .map(|c| c.to_digit(10).map(|d| d as u8))
        .collect::<Option<_>>()?;
    Chroma::from_vector(&digits)
}

/// Inverse of [`parse_chord_sidecar`].
pub fn write_chord_sidecar(chords: &[ChordEvent]) -> String {
    let mut out = String::from("onset_beat,duration_beats,symbol_or_chroma\n");
    for c in chords {
        let chord = match &c.label {
            Some(l) => l.clone(),
            None => c.chroma.to_vector().iter().map(|b| b.to_string()).collect(),
        };
        out.push_str(&format!("{},{},{}\n", c.onset, c.duration, chord));
    }
    out
}
