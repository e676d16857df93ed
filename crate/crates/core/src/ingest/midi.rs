//! Standard MIDI file import (format 0 or 1) with a chord sidecar.

use std::collections::{HashMap, VecDeque};

use midly::{MetaMessage, MidiMessage, Smf, Timing, TrackEventKind};
use num_traits::Zero;

use super::leadsheet::{assemble_phrases, order_monophonic};
use super::sidecar::parse_chord_sidecar;
use super::QuantizationConfig;
use crate::error::{Error, Result};
use crate::model::{beats, Note, Phrase, TimeSignature};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MidiImportConfig {
    pub quant: QuantizationConfig,
    /// Track index to read the melody from; `None` picks the first track with notes.
    pub track: Option<usize>,
}

/// A note as found in the file, in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RawNote {
    start: u64,
    end: u64,
    key: u8,
}

fn track_notes(track: &[midly::TrackEvent<'_>]) -> Vec<RawNote> {
    let mut open: HashMap<u8, VecDeque<u64>> = HashMap::new();
    let mut out = Vec::new();
    let mut tick = 0u64;
    for ev in track {
        tick += u32::from(ev.delta) as u64;
        if let TrackEventKind::Midi { message, .. } = ev.kind {
            match message {
                MidiMessage::NoteOn { key, vel } if u8::from(vel) > 0 => {
                    open.entry(key.into()).or_default().push_back(tick);
                }
                MidiMessage::NoteOn { key, .. } | MidiMessage::NoteOff { key, .. } => {
                    let key: u8 = key.into();
                    if let Some(start) = open.get_mut(&key).and_then(VecDeque::pop_front) {
                        out.push(RawNote {
                            start,
                            end: tick,
                            key,
                        });
                    }
                }
                _ => {}
            }
        }
    }
    // hanging notes run to the end of the track
    for (key, starts) in open {
        out.extend(starts.into_iter().map(|start| RawNote {
            start,
            end: tick,
            key,
        }));
    }
    out.sort_by_key(|n| (n.start, n.key));
    out
}

/// Import the melody track of `midi`, pairing it with the chords in `sidecar`.
pub fn import_midi(midi: &[u8], sidecar: &[u8], cfg: &MidiImportConfig) -> Result<Vec<Phrase>> {
    let smf = Smf::parse(midi).map_err(|e| Error::Midi(e.to_string()))?;
    let tpq = match smf.header.timing {
        Timing::Metrical(t) if u16::from(t) > 0 => u16::from(t) as i64,
        Timing::Metrical(_) => return Err(Error::Midi("zero ticks per quarter".into())),
        Timing::Timecode(..) => {
            return Err(Error::Midi("SMPTE timecode timing is not supported".into()))
        }
    };

    let ts = smf
        .tracks
        .iter()
        .flatten()
        .find_map(|ev| match ev.kind {
            TrackEventKind::Meta(MetaMessage::TimeSignature(num, pow, _, _)) if pow < 8 => {
                TimeSignature::new(num as u32, 1 << pow).ok()
            }
            _ => None,
        })
        .unwrap_or_default();

    let raw = match cfg.track {
        Some(t) => {
            let track = smf.tracks.get(t).ok_or_else(|| {
                Error::Midi(format!(
                    "track {t} requested, file has {}",
                    smf.tracks.len()
                ))
            })?;
            track_notes(track)
        }
        None => smf
            .tracks
            .iter()
            .map(|t| track_notes(t))
            .find(|notes| !notes.is_empty())
            .unwrap_or_default(),
    };
    if raw.is_empty() {
        return Err(Error::NoNotes);
    }

    let notes: Vec<(usize, Note)> = raw
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let onset = beats(n.start as i64, tpq);
            let duration = beats(n.end as i64 - n.start as i64, tpq);
            (i, cfg.quant.snap_note(onset, duration, n.key))
        })
        .collect();
    let notes = order_monophonic(notes, true)?;

    let chords = parse_chord_sidecar(sidecar)?;
    assemble_phrases(notes, chords, ts, Zero::zero(), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Beats;
    use midly::num::{u15, u28, u4, u7};
    use midly::{Format, Header, TrackEvent};

    fn smf_bytes(notes: &[(u32, u32, u8)], tpq: u16) -> Vec<u8> {
        let mut events: Vec<(u32, MidiMessage)> = Vec::new();
        for &(start, end, key) in notes {
            events.push((
                start,
                MidiMessage::NoteOn {
                    key: u7::new(key),
                    vel: u7::new(90),
                },
            ));
            events.push((
                end,
                MidiMessage::NoteOff {
                    key: u7::new(key),
                    vel: u7::new(0),
                },
            ));
        }
        events.sort_by_key(|(t, m)| (*t, matches!(m, MidiMessage::NoteOn { .. })));
        let mut track = Vec::new();
        let mut last = 0;
        for (t, message) in events {
            track.push(TrackEvent {
                delta: u28::new(t - last),
                kind: TrackEventKind::Midi {
                    channel: u4::new(0),
                    message,
                },
            });
            last = t;
        }
        track.push(TrackEvent {
            delta: u28::new(0),
            kind: TrackEventKind::Meta(MetaMessage::EndOfTrack),
        });
        let mut smf = Smf::new(Header::new(
            Format::SingleTrack,
            Timing::Metrical(u15::new(tpq)),
        ));
        smf.tracks.push(track);
        let mut out = Vec::new();
        smf.write_std(&mut out).unwrap();
        out
    }

    const CHORDS: &[u8] = b"0,8,C\n";

    #[test]
    fn ticks_become_beats() {
        let midi = smf_bytes(&[(0, 240, 60), (240, 960, 62)], 480);
        let p = &import_midi(&midi, CHORDS, &Default::default()).unwrap()[0];
        assert_eq!(p.notes[1].onset, beats(1, 2));
        assert_eq!(p.notes[1].duration, beats(3, 2));
    }

    #[test]
    fn near_grid_ticks_snap() {
        let midi = smf_bytes(&[(0, 250, 60), (250, 960, 62)], 480);
        let p = &import_midi(&midi, CHORDS, &Default::default()).unwrap()[0];
        assert_eq!(p.notes[1].onset, beats(1, 2));
    }

    #[test]
    fn zero_length_after_snap_is_clamped() {
        let midi = smf_bytes(&[(0, 20, 60)], 480);
        let p = &import_midi(&midi, CHORDS, &Default::default()).unwrap()[0];
        assert_eq!(p.notes[0].duration, beats(1, 4));
    }

    #[test]
    fn legato_overlap_is_trimmed() {
        let midi = smf_bytes(&[(0, 600, 60), (480, 960, 62)], 480);
        let p = &import_midi(&midi, CHORDS, &Default::default()).unwrap()[0];
        assert_eq!(p.notes[0].duration, Beats::from_integer(1));
    }

    #[test]
    fn error_paths() {
        let empty = smf_bytes(&[], 480);
        assert!(matches!(
            import_midi(&empty, CHORDS, &Default::default()),
            Err(Error::NoNotes)
        ));
        let midi = smf_bytes(&[(0, 480, 60), (4800, 5280, 62)], 480);
        assert!(matches!(
            import_midi(&midi, CHORDS, &Default::default()),
            Err(Error::UncoveredOnset { .. })
        ));
        assert!(matches!(
            import_midi(&midi, b"0,x,C\n", &Default::default()),
            Err(Error::Sidecar { .. })
        ));
        assert!(import_midi(b"not midi", CHORDS, &Default::default()).is_err());
    }
}
