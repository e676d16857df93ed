//! Output formats: reduction JSON, MIDI, ASCII piano roll, debug dumps.

use midly::num::{u15, u24, u28, u4, u7};
use midly::{Format, Header, MetaMessage, MidiMessage, Smf, Timing, TrackEvent, TrackEventKind};
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::graph::ReductionGraph;
use crate::ingest::{
    chord_name, chord_to_doc, pitch_name, LeadSheetDocument, MetaDoc, NoteDoc, RationalRepr,
};
use crate::model::{
    measure_position, Beats, ChordEvent, Note, Phrase, ReducedMelody, TimeSignature,
};
use crate::postprocess::ChordBin;
use crate::solver::ReductionPath;

pub const TICKS_PER_QUARTER: u16 = 480;
const MICROS_PER_QUARTER: u32 = 500_000;

/// Lead-sheet document for a reduction: the phrase's meta and chords, the reduced notes
/// with their tie flags and source indices.
pub fn reduction_document(p: &Phrase, m: &ReducedMelody) -> LeadSheetDocument {
    LeadSheetDocument {
        meta: MetaDoc {
            title: (!m.phrase_ref.is_empty()).then(|| m.phrase_ref.clone()),
            time_signature: [p.time_signature.numerator, p.time_signature.denominator],
            anacrusis_beats: p.anacrusis.into(),
            grid: 4,
        },
        notes: m
            .notes
            .iter()
            .map(|n| NoteDoc {
                onset: n.onset.into(),
                pitch: n.pitch as i64,
                duration: n.duration.into(),
                tie_to_next: Some(n.tie_to_next),
                source_indices: Some(n.source_indices.clone()),
            })
            .collect(),
        chords: p.chords.iter().map(chord_to_doc).collect(),
        phrases: None,
    }
}

fn ticks(b: Beats) -> u32 {
    (b * TICKS_PER_QUARTER as i64)
        .round()
        .to_integer()
        .to_u32()
        .unwrap_or(0)
}

fn note_track(notes: &[Note], channel: u8, name: &'static str) -> Vec<TrackEvent<'static>> {
    // (tick, is_on, key); offs sort before ons at the same tick
    let mut events: Vec<(u32, bool, u8)> = Vec::with_capacity(notes.len() * 2);
    for n in notes {
        events.push((ticks(n.onset), true, n.pitch));
        events.push((ticks(n.end()), false, n.pitch));
    }
    events.sort();
    let mut track = vec![TrackEvent {
        delta: u28::new(0),
        kind: TrackEventKind::Meta(MetaMessage::TrackName(name.as_bytes())),
    }];
    let mut last = 0;
    let channel = u4::new(channel);
    for (tick, on, key) in events {
        let key = u7::new(key);
        let message = if on {
            MidiMessage::NoteOn {
                key,
                vel: u7::new(80),
            }
        } else {
            MidiMessage::NoteOff {
                key,
                vel: u7::new(0),
            }
        };
        track.push(TrackEvent {
            delta: u28::new(tick - last),
            kind: TrackEventKind::Midi { channel, message },
        });
        last = tick;
    }
    track.push(end_of_track());
    track
}

fn end_of_track() -> TrackEvent<'static> {
    TrackEvent {
        delta: u28::new(0),
        kind: TrackEventKind::Meta(MetaMessage::EndOfTrack),
    }
}

/// Format 1 file: tempo and meter, the original melody, then the reduction
/// with tied notes sounding as one.
pub fn write_midi(phrases: &[Phrase], reductions: &[ReducedMelody]) -> Vec<u8> {
    let ts = phrases
        .first()
        .map(|p| p.time_signature)
        .unwrap_or_default();
    let meta = vec![
        TrackEvent {
            delta: u28::new(0),
            kind: TrackEventKind::Meta(MetaMessage::Tempo(u24::new(MICROS_PER_QUARTER))),
        },
        TrackEvent {
            delta: u28::new(0),
            kind: TrackEventKind::Meta(MetaMessage::TimeSignature(
                ts.numerator as u8,
                ts.denominator.trailing_zeros() as u8,
                24,
                8,
            )),
        },
        end_of_track(),
    ];
    let original: Vec<Note> = phrases
        .iter()
        .flat_map(|p| p.notes.iter().copied())
        .collect();
    let reduced: Vec<Note> = reductions.iter().flat_map(|m| m.coalesce_ties()).collect();
    let smf = Smf {
        header: Header::new(
            Format::Parallel,
            Timing::Metrical(u15::new(TICKS_PER_QUARTER)),
        ),
        tracks: vec![
            meta,
            note_track(&original, 0, "original"),
            note_track(&reduced, 1, "reduction"),
        ],
    };
    let mut out = Vec::new();
    smf.write_std(&mut out)
        .expect("writing to memory cannot fail");
    out
}

/// Track index of the reduction in files from [`write_midi`].
pub const REDUCTION_TRACK: usize = 2;
pub const ORIGINAL_TRACK: usize = 1;

const COLUMNS_PER_BEAT: i64 = 4;

fn column(t: Beats, start: Beats) -> usize {
    ((t - start) * COLUMNS_PER_BEAT).floor().to_integer().max(0) as usize
}

/// Piano roll with one row per pitch (highest first), one column per sixteenth,
/// and the chord names underneath. A note that follows the same pitch without a
/// tie starts with `+`. The ruler assumes 4/4 with no pickup.
pub fn render_ascii_roll(melody: &ReducedMelody, chords: &[ChordEvent]) -> String {
    render_roll(melody, chords, TimeSignature::COMMON, Beats::zero())
}

/// [`render_ascii_roll`] with the ruler following the phrase's meter and pickup.
pub fn render_phrase_roll(p: &Phrase, melody: &ReducedMelody) -> String {
    render_roll(melody, &p.chords, p.time_signature, p.anacrusis)
}

fn render_roll(
    melody: &ReducedMelody,
    chords: &[ChordEvent],
    ts: TimeSignature,
    anacrusis: Beats,
) -> String {
    let onsets = melody
        .notes
        .iter()
        .map(|n| n.onset)
        .chain(chords.iter().map(|c| c.onset));
    let ends = melody
        .notes
        .iter()
        .map(|n| n.end())
        .chain(chords.iter().map(|c| c.end()));
    let start = onsets.min().map(|t| t.floor()).unwrap_or_default();
    let end = ends.max().unwrap_or(start);
    let measure = (ts.measure_length() * COLUMNS_PER_BEAT)
        .ceil()
        .to_integer()
        .max(1) as usize;
    let width = column(end.ceil(), start).div_ceil(measure).max(1) * measure;

    let mut pitches: Vec<u8> = melody.notes.iter().map(|n| n.pitch).collect();
    pitches.sort_unstable_by(|a, b| b.cmp(a));
    pitches.dedup();
    let label = pitches
        .iter()
        .map(|&p| pitch_name(p).len())
        .max()
        .unwrap_or(0)
        .max(3);

    let mut out = String::new();
    let mut ruler = vec![' '; width];
    for (beat, cell) in ruler
        .iter_mut()
        .step_by(COLUMNS_PER_BEAT as usize)
        .enumerate()
    {
        let pos = measure_position(start + Beats::from_integer(beat as i64), ts, anacrusis);
        let number = pos.beat_in_measure.floor().to_integer() + 1;
        *cell = char::from_digit((number % 10) as u32, 10).unwrap_or(' ');
    }
    out.push_str(&format!(
        "{:label$} |{}|\n",
        "",
        ruler.iter().collect::<String>()
    ));

    for &pitch in &pitches {
        let mut row = vec!['-'; width];
        let mut prev: Option<(usize, bool)> = None;
        for n in melody.notes.iter().filter(|n| n.pitch == pitch) {
            let (a, b) = (column(n.onset, start), column(n.end(), start).min(width));
            let reattack = matches!(prev, Some((end, tied)) if end == a && !tied);
            for (c, cell) in row.iter_mut().enumerate().take(b).skip(a) {
                *cell = if c == a && reattack { '+' } else { '#' };
            }
            prev = Some((b, n.tie_to_next));
        }
        out.push_str(&format!(
            "{:label$} |{}|\n",
            pitch_name(pitch),
            row.iter().collect::<String>()
        ));
    }

    let mut footer = vec![' '; width];
    for (i, c) in chords.iter().enumerate() {
        let a = column(c.onset, start);
        let limit = chords
            .get(i + 1)
            .map(|next| column(next.onset, start))
            .unwrap_or(width)
            .min(width);
        let name = c.label.clone().unwrap_or_else(|| chord_name(c.chroma));
        for (cell, ch) in footer.iter_mut().take(limit).skip(a).zip(name.chars()) {
            *cell = ch;
        }
    }
    out.push_str(&format!(
        "{:label$} |{}|\n",
        "",
        footer.iter().collect::<String>()
    ));
    out
}

pub fn graph_dump(g: &ReductionGraph) -> Value {
    json!({
        "nodes": (0..g.node_count()).map(|i| {
            let imp = g.importance(i);
            json!({ "index": i, "importance": imp, "alpha": imp.alpha() })
        }).collect::<Vec<_>>(),
        "edges": g.edges().collect::<Vec<_>>(),
    })
}

pub fn path_dump(g: &ReductionGraph, path: &ReductionPath) -> Value {
    json!({
        "nodes": path.nodes,
        "categories": path.categories,
        "edge_costs": path.edge_costs(g),
        "total_cost": path.total_cost,
    })
}

pub fn bins_dump(bins: &[ChordBin]) -> Value {
    Value::Array(
        bins.iter()
            .map(|b| {
                json!({
                    "chord_index": b.chord_index,
                    "onset": RationalRepr::from(b.onset),
                    "length": b.length,
                    "groups": b.members.iter().map(|g| json!({
                        "sources": g.sources,
                        "pitch": g.pitch,
                    })).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}
