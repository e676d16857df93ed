//! Downsampling baseline: one half note per two-beat window, carrying the
//! window's most common pitch.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::model::{Beats, Phrase, ReducedMelody, ReducedNote};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeWeighting {
    /// Pitches are weighted by how long they sound inside the window.
    #[default]
    Duration,
    /// Every note touching the window counts once.
    OnsetCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyWindow {
    /// Hold the previous pitch (tied); a leading empty window stays silent.
    #[default]
    Sustain,
    Rest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DsObsOptions {
    pub weighting: ModeWeighting,
    pub empty: EmptyWindow,
}

pub const WINDOW_BEATS: i64 = 2;

/// Number of two-beat windows covering the phrase span.
pub fn window_count(p: &Phrase) -> usize {
    let (start, end) = p.span();
    ((end - start) / WINDOW_BEATS).ceil().to_integer().max(0) as usize
}

#[derive(Default)]
struct Tally {
    weight: Beats,
    total_duration: Beats,
    first_onset: Option<Beats>,
    sources: Vec<usize>,
}

/// Pick the window's pitch. Highest weight wins, then longer total duration,
/// then the earlier first onset.
fn winner(tallies: &BTreeMap<u8, Tally>) -> Option<(u8, &Tally)> {
    tallies
        .iter()
        .max_by(|(_, a), (_, b)| {
            a.weight
                .cmp(&b.weight)
                .then(a.total_duration.cmp(&b.total_duration))
                .then(b.first_onset.cmp(&a.first_onset))
        })
        .map(|(p, t)| (*p, t))
}

pub fn ds_obs(p: &Phrase, opts: &DsObsOptions) -> ReducedMelody {
    let (start, _) = p.span();
    let width = Beats::from_integer(WINDOW_BEATS);
    let mut out: Vec<ReducedNote> = Vec::new();
    for w in 0..window_count(p) {
        let lo = start + width * w as i64;
        let hi = lo + width;
        let mut tallies: BTreeMap<u8, Tally> = BTreeMap::new();
        for (i, n) in p.notes.iter().enumerate() {
            let overlap = n.end().min(hi) - n.onset.max(lo);
            if overlap <= Beats::zero() {
                continue;
            }
            let t = tallies.entry(n.pitch).or_default();
            t.weight += match opts.weighting {
                ModeWeighting::Duration => overlap,
                ModeWeighting::OnsetCount => Beats::from_integer(1),
            };
            t.total_duration += n.duration;
            t.first_onset = Some(t.first_onset.map_or(n.onset, |o| o.min(n.onset)));
            t.sources.push(i);
        }
        match winner(&tallies) {
            Some((pitch, t)) => out.push(ReducedNote {
                onset: lo,
                pitch,
                duration: width,
                tie_to_next: false,
                source_indices: t.sources.clone(),
            }),
            None => {
                if opts.empty == EmptyWindow::Sustain {
                    if let Some(prev) = out.last_mut().filter(|n| n.end() == lo) {
                        prev.tie_to_next = true;
                        let held = ReducedNote {
                            onset: lo,
                            tie_to_next: false,
                            ..prev.clone()
                        };
                        out.push(held);
                    }
                }
            }
        }
    }
    ReducedMelody {
        notes: out,
        phrase_ref: String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{beats, ChordEvent, Chroma, Note, TimeSignature};

    fn phrase(notes: Vec<Note>, len: i64) -> Phrase {
        Phrase::new(
            notes,
            vec![ChordEvent::new(
                beats(0, 1),
                beats(len, 1),
                Chroma::from_pitch_classes(&[0, 4, 7]),
            )],
            TimeSignature::COMMON,
        )
    }

    #[test]
    fn equal_weights_prefer_earlier_onset() {
        let p = phrase(
            vec![
                Note::new(beats(0, 1), 62, beats(1, 1)),
                Note::new(beats(1, 1), 60, beats(1, 1)),
            ],
            2,
        );
        let m = ds_obs(&p, &Default::default());
        assert_eq!(m.notes.len(), 1);
        assert_eq!(m.notes[0].pitch, 62);
        let p = phrase(
            vec![
                Note::new(beats(0, 1), 60, beats(1, 1)),
                Note::new(beats(1, 1), 62, beats(1, 1)),
            ],
            2,
        );
        assert_eq!(ds_obs(&p, &Default::default()).notes[0].pitch, 60);
    }

    #[test]
    fn held_note_fills_window() {
        let p = phrase(vec![Note::new(beats(0, 1), 64, beats(2, 1))], 2);
        let m = ds_obs(&p, &Default::default());
        assert_eq!(m.notes[0].pitch, 64);
        assert_eq!(m.notes[0].duration, beats(2, 1));
    }

    #[test]
    fn duration_weighting_beats_count() {
        let p = phrase(
            vec![
                Note::new(beats(0, 1), 60, beats(1, 4)),
                Note::new(beats(1, 4), 62, beats(3, 2)),
                Note::new(beats(7, 4), 60, beats(1, 4)),
            ],
            2,
        );
        assert_eq!(ds_obs(&p, &Default::default()).notes[0].pitch, 62);
        let count = DsObsOptions {
            weighting: ModeWeighting::OnsetCount,
            ..Default::default()
        };
        assert_eq!(ds_obs(&p, &count).notes[0].pitch, 60);
    }

    #[test]
    fn empty_windows() {
        // chord timeline starts two beats before the first note
        let mut p = phrase(vec![Note::new(beats(2, 1), 60, beats(1, 1))], 8);
        let m = ds_obs(&p, &Default::default());
        assert_eq!(window_count(&p), 4);
        // leading window is a rest, then the note, then two sustained windows
        assert_eq!(m.notes.len(), 3);
        assert_eq!(m.notes[0].onset, beats(2, 1));
        assert!(m.notes[0].tie_to_next && m.notes[1].tie_to_next);
        assert!(!m.notes[2].tie_to_next);
        let rests = DsObsOptions {
            empty: EmptyWindow::Rest,
            ..Default::default()
        };
        assert_eq!(ds_obs(&p, &rests).notes.len(), 1);
        p.chords[0].duration = beats(7, 1);
        assert_eq!(window_count(&p), 4);
    }
}
