//! Canonical lead-sheet JSON.
//!
//! ```json
//! {
//!   "meta": {"title": "...", "time_signature": [4, 4], "anacrusis_beats": [0, 1], "grid": 4},
//!   "notes": [{"onset": [0, 1], "pitch": 60, "duration": [1, 1]}],
//!   "chords": [{"onset": [0, 1], "duration": [4, 1], "symbol": "C"}],
//!   "phrases": [[0, 8], [8, 16]]
//! }
//! ```
//!
//! Rationals are written as `[numerator, denominator]`; plain JSON numbers are
//! accepted on input. A chord carries either `symbol` or a 12-element `chroma`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::symbol::parse_chord_symbol;
use super::QuantizationConfig;
use crate::error::{Error, Result};
use crate::model::{beats, ensure_valid, Beats, ChordEvent, Chroma, Note, Phrase, TimeSignature};

/// Rational in document form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalRepr {
    Pair([i64; 2]),
    Int(i64),
    Float(f64),
}

impl RationalRepr {
    pub fn to_beats(self) -> Option<Beats> {
        match self {
            RationalRepr::Pair([_, 0]) => None,
            RationalRepr::Pair([n, d]) => Some(beats(n, d)),
            RationalRepr::Int(n) => Some(Beats::from_integer(n)),
            RationalRepr::Float(f) => Beats::approximate_float(f),
        }
    }
}

impl From<Beats> for RationalRepr {
    fn from(b: Beats) -> Self {
        RationalRepr::Pair([*b.numer(), *b.denom()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default = "default_ts")]
    pub time_signature: [u32; 2],
    #[serde(default = "default_anacrusis")]
    pub anacrusis_beats: RationalRepr,
    #[serde(default = "default_grid")]
    pub grid: i64,
}

fn default_ts() -> [u32; 2] {
    [4, 4]
}

fn default_anacrusis() -> RationalRepr {
    RationalRepr::Pair([0, 1])
}

fn default_grid() -> i64 {
    4
}

impl Default for MetaDoc {
    fn default() -> Self {
        MetaDoc {
            title: None,
            time_signature: default_ts(),
            anacrusis_beats: default_anacrusis(),
            grid: default_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteDoc {
    pub onset: RationalRepr,
    pub pitch: i64,
    pub duration: RationalRepr,
    /// Only present on reduction output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_to_next: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_indices: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordDoc {
    pub onset: RationalRepr,
    pub duration: RationalRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chroma: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadSheetDocument {
    #[serde(default)]
    pub meta: MetaDoc,
    pub notes: Vec<NoteDoc>,
    #[serde(default)]
    pub chords: Vec<ChordDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phrases: Option<Vec<[RationalRepr; 2]>>,
}

/// Translate a serde_json error into a located crate error.
pub(crate) fn json_error(input: &[u8], e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    let (line, column) = (e.line(), e.column());
    match e.classify() {
        Category::Data => Error::schema(
            format!("line {line}, column {column}"),
            strip_position(&e.to_string()),
        ),
        _ => Error::Json {
            offset: byte_offset(input, line, column),
            line,
            column,
            message: strip_position(&e.to_string()),
        },
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn byte_offset(input: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = input
        .split(|&b| b == b'\n')
        .take(line - 1)
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(input.len())
}

/// Parse a lead-sheet document into validated phrases.
pub fn parse_leadsheet(input: &[u8]) -> Result<Vec<Phrase>> {
    let doc: LeadSheetDocument = serde_json::from_slice(input).map_err(|e| json_error(input, e))?;
    document_to_phrases(&doc)
}

fn rational(r: RationalRepr, location: impl Into<String>) -> Result<Beats> {
    r.to_beats()
        .ok_or_else(|| Error::schema(location, "not a finite rational"))
}

pub(crate) fn resolve_chroma(
    symbol: Option<&str>,
    chroma: Option<&[u8]>,
    location: &str,
) -> Result<(Chroma, Option<String>)> {
    match (symbol, chroma) {
        (Some(s), _) => Ok((parse_chord_symbol(s)?, Some(s.to_string()))),
        (None, Some(v)) => {
            let c = Chroma::from_vector(v).ok_or_else(|| {
                Error::schema(
                    format!("{location}.chroma"),
                    "expected 12 entries of 0 or 1",
                )
            })?;
            if c.is_empty() {
                return Err(Error::schema(
                    format!("{location}.chroma"),
                    "chroma has no pitch class set",
                ));
            }
            Ok((c, None))
        }
        (None, None) => Err(Error::schema(
            location.to_string(),
            "chord needs `symbol` or `chroma`",
        )),
    }
}

pub fn document_to_phrases(doc: &LeadSheetDocument) -> Result<Vec<Phrase>> {
    let [tsn, tsd] = doc.meta.time_signature;
    let ts = TimeSignature::new(tsn, tsd)?;
    let quant = QuantizationConfig::new(doc.meta.grid)
        .map_err(|_| Error::schema("meta.grid", "grid must be 1, 2 or 4"))?;
    let anacrusis = rational(doc.meta.anacrusis_beats, "meta.anacrusis_beats")?;
    if anacrusis.is_negative() {
        return Err(Error::schema("meta.anacrusis_beats", "must be >= 0"));
    }

    let mut notes = Vec::with_capacity(doc.notes.len());
    for (i, n) in doc.notes.iter().enumerate() {
        let loc = format!("notes[{i}]");
        if !(0..=127).contains(&n.pitch) {
            return Err(Error::schema(format!("{loc}.pitch"), "must be in 0..=127"));
        }
        let onset = rational(n.onset, format!("{loc}.onset"))?;
        let duration = rational(n.duration, format!("{loc}.duration"))?;
        if onset.is_negative() {
            return Err(Error::schema(format!("{loc}.onset"), "must be >= 0"));
        }
        if !duration.is_positive() {
            return Err(Error::schema(format!("{loc}.duration"), "must be > 0"));
        }
        notes.push((i, quant.snap_note(onset, duration, n.pitch as u8)));
    }
    let notes = order_monophonic(notes, false)?;

    let mut chords = Vec::with_capacity(doc.chords.len());
    for (k, c) in doc.chords.iter().enumerate() {
        let loc = format!("chords[{k}]");
        let onset = rational(c.onset, format!("{loc}.onset"))?;
        let duration = rational(c.duration, format!("{loc}.duration"))?;
        if onset.is_negative() {
            return Err(Error::schema(format!("{loc}.onset"), "must be >= 0"));
        }
        if !duration.is_positive() {
            return Err(Error::schema(format!("{loc}.duration"), "must be > 0"));
        }
        let (chroma, label) = resolve_chroma(c.symbol.as_deref(), c.chroma.as_deref(), &loc)?;
        chords.push(ChordEvent {
            onset,
            duration,
            chroma,
            label,
        });
    }
    check_chord_timeline(&chords)?;

    let spans = match &doc.phrases {
        None => None,
        Some(list) => Some(
            list.iter()
                .enumerate()
                .map(|(i, [s, e])| {
                    let start = rational(*s, format!("phrases[{i}][0]"))?;
                    let end = rational(*e, format!("phrases[{i}][1]"))?;
                    if end <= start {
                        return Err(Error::schema(
                            format!("phrases[{i}]"),
                            "end must exceed start",
                        ));
                    }
                    Ok((start, end))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    assemble_phrases(notes, chords, ts, anacrusis, spans)
}

/// Sort notes by (onset, pitch) and enforce monophony.
///
/// Each entry carries its index in the source so errors can name it. With
/// `trim_legato`, a note running into a later onset is cut at that onset; two
/// notes sharing an onset are always an error.
pub(crate) fn order_monophonic(
    mut notes: Vec<(usize, Note)>,
    trim_legato: bool,
) -> Result<Vec<(usize, Note)>> {
    notes.sort_by(|(ia, a), (ib, b)| (a.onset, a.pitch, ia).cmp(&(b.onset, b.pitch, ib)));
    for w in 1..notes.len() {
        let (ia, next_onset) = (notes[w - 1].0, notes[w].1.onset);
        let prev = &mut notes[w - 1].1;
        if prev.end() > next_onset {
            if trim_legato && prev.onset < next_onset {
                prev.duration = next_onset - prev.onset;
            } else {
                return Err(Error::Polyphony {
                    first: ia.min(notes[w].0),
                    second: ia.max(notes[w].0),
                });
            }
        }
    }
    Ok(notes)
}

pub(crate) fn check_chord_timeline(chords: &[ChordEvent]) -> Result<()> {
    for k in 1..chords.len() {
        if chords[k - 1].end() > chords[k].onset {
            return Err(Error::schema(
                format!("chords[{k}]"),
                "chords must be sorted by onset and non-overlapping",
            ));
        }
    }
    Ok(())
}

/// Cut notes and chords into phrases and validate each one.
pub(crate) fn assemble_phrases(
    notes: Vec<(usize, Note)>,
    chords: Vec<ChordEvent>,
    ts: TimeSignature,
    anacrusis: Beats,
    spans: Option<Vec<(Beats, Beats)>>,
) -> Result<Vec<Phrase>> {
    let mut phrases = Vec::new();
    let build = |members: Vec<(usize, Note)>, chords: Vec<ChordEvent>| -> Result<Phrase> {
        for (orig, n) in &members {
            if !chords.iter().any(|c| c.sounds_at(n.onset)) {
                return Err(Error::UncoveredOnset {
                    index: *orig,
                    onset: n.onset,
                });
            }
        }
        let phrase = Phrase {
            notes: members.into_iter().map(|(_, n)| n).collect(),
            chords,
            time_signature: ts,
            anacrusis,
        };
        ensure_valid(&phrase)?;
        Ok(phrase)
    };

    match spans {
        None => {
            if notes.is_empty() {
                return Err(Error::EmptyPhrase {
                    start: Beats::zero(),
                    end: Beats::zero(),
                });
            }
            phrases.push(build(notes, chords)?);
        }
        Some(spans) => {
            for (start, end) in spans {
                let members: Vec<(usize, Note)> = notes
                    .iter()
                    .filter(|(_, n)| start <= n.onset && n.onset < end)
                    .map(|(i, n)| {
                        let mut n = *n;
                        if n.end() > end {
                            n.duration = end - n.onset;
                        }
                        (*i, n)
                    })
                    .collect();
                if members.is_empty() {
                    return Err(Error::EmptyPhrase { start, end });
                }
                let clipped = chords
                    .iter()
                    .filter_map(|c| {
                        let s = c.onset.max(start);
                        let e = c.end().min(end);
                        (s < e).then(|| ChordEvent {
                            onset: s,
                            duration: e - s,
                            ..c.clone()
                        })
                    })
                    .collect();
                phrases.push(build(members, clipped)?);
            }
        }
    }
    Ok(phrases)
}

/// Canonical document for a single phrase (no phrase list).
pub fn phrase_to_document(p: &Phrase, title: Option<&str>) -> LeadSheetDocument {
    LeadSheetDocument {
        meta: MetaDoc {
            title: title.map(str::to_string),
            time_signature: [p.time_signature.numerator, p.time_signature.denominator],
            anacrusis_beats: p.anacrusis.into(),
            grid: 4,
        },
        notes: p
            .notes
            .iter()
            .map(|n| NoteDoc {
                onset: n.onset.into(),
                pitch: n.pitch as i64,
                duration: n.duration.into(),
                tie_to_next: None,
                source_indices: None,
            })
            .collect(),
        chords: p.chords.iter().map(chord_to_doc).collect(),
        phrases: None,
    }
}

pub(crate) fn chord_to_doc(c: &ChordEvent) -> ChordDoc {
    ChordDoc {
        onset: c.onset.into(),
        duration: c.duration.into(),
        symbol: c.label.clone(),
        chroma: match c.label {
            Some(_) => None,
            None => Some(c.chroma.to_vector().to_vec()),
        },
    }
}

pub fn serialize_phrase(p: &Phrase) -> String {
    serde_json::to_string_pretty(&phrase_to_document(p, None)).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let doc = br#"{"notes":[{"onset":[0,1],"pitch":60,"duration":[1,1]}],
                       "chords":[{"onset":0,"duration":4,"symbol":"C"}]}"#;
        let phrases = parse_leadsheet(doc).unwrap();
        assert_eq!(phrases.len(), 1);
        assert_eq!(phrases[0].len(), 1);
        assert_eq!(phrases[0].time_signature, TimeSignature::COMMON);
    }

    #[test]
    fn overlapping_notes_name_both_indices() {
        let doc = br#"{"notes":[{"onset":[0,1],"pitch":60,"duration":[2,1]},
                                {"onset":[1,1],"pitch":62,"duration":[1,1]}],
                       "chords":[{"onset":0,"duration":4,"symbol":"C"}]}"#;
        match parse_leadsheet(doc) {
            Err(Error::Polyphony { first, second }) => assert_eq!((first, second), (0, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn phrase_list_partitions() {
        let doc = br#"{"notes":[{"onset":0,"pitch":60,"duration":4},
                                {"onset":4,"pitch":62,"duration":4},
                                {"onset":8,"pitch":64,"duration":4},
                                {"onset":12,"pitch":65,"duration":4}],
                       "chords":[{"onset":0,"duration":16,"symbol":"C"}],
                       "phrases":[[0,8],[8,16]]}"#;
        let phrases = parse_leadsheet(doc).unwrap();
        assert_eq!(phrases.len(), 2);
        assert_eq!(phrases[0].len(), 2);
        assert_eq!(phrases[1].notes[0].onset, beats(8, 1));
        assert_eq!(phrases[1].chords[0].onset, beats(8, 1));
        assert_eq!(phrases[1].chords[0].duration, beats(8, 1));
    }

    #[test]
    fn schema_errors_name_the_field() {
        let doc = br#"{"notes":[{"onset":0,"duration":1}],"chords":[]}"#;
        let err = parse_leadsheet(doc).unwrap_err().to_string();
        assert!(err.contains("pitch"), "{err}");
        let doc = br#"{"notes":[{"onset":0,"pitch":200,"duration":1}],"chords":[]}"#;
        let err = parse_leadsheet(doc).unwrap_err().to_string();
        assert!(err.contains("notes[0].pitch"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_byte_offset() {
        let doc = b"{\"notes\": [\n  {\"onset\": 0,, }]}";
        match parse_leadsheet(doc) {
            Err(Error::Json { offset, line, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(doc[offset], b',');
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unresolvable_symbol_and_uncovered_onset() {
        let doc = br#"{"notes":[{"onset":0,"pitch":60,"duration":1}],
                       "chords":[{"onset":0,"duration":4,"symbol":"Xq"}]}"#;
        assert!(matches!(parse_leadsheet(doc), Err(Error::ChordSymbol(_))));
        let doc =
            br#"{"notes":[{"onset":0,"pitch":60,"duration":1},{"onset":5,"pitch":60,"duration":1}],
                       "chords":[{"onset":0,"duration":4,"chroma":[1,0,0,0,1,0,0,1,0,0,0,0]}]}"#;
        assert!(matches!(
            parse_leadsheet(doc),
            Err(Error::UncoveredOnset { index: 1, .. })
        ));
    }

    #[test]
    fn fine_input_is_snapped() {
        let doc = br#"{"notes":[{"onset":[1,3],"pitch":60,"duration":[1,24]}],
                       "chords":[{"onset":0,"duration":4,"symbol":"C"}]}"#;
        let p = &parse_leadsheet(doc).unwrap()[0];
        assert_eq!(p.notes[0].onset, beats(1, 4));
        assert_eq!(p.notes[0].duration, beats(1, 4));
    }
}
