//! Turning a least-cost path into a playable reduced melody.
//!
//! Path notes are grouped (same-pitch prolongation runs become one note),
//! dropped into one bin per chord, and given quarter-note rhythms that fill
//! each chord exactly. Overfull bins lose randomly chosen notes; prolongations
//! that cross a chord change become ties.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    build_graph_with_range, CostConfig, EdgeCategory, PitchRangeScope, ReductionGraph,
};
use crate::ingest::{detect_anticipations, AnticipationConfig};
use crate::model::{Beats, ChordEvent, ChordMembership, Phrase, ReducedMelody, ReducedNote};
use crate::solver::{shortest_path, ReductionPath};

/// Path notes that sound as one reduced note.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteGroup {
    /// Original note indices, increasing.
    pub sources: Vec<usize>,
    pub pitch: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChordBin {
    pub chord_index: usize,
    pub onset: Beats,
    /// Length in quarter notes.
    pub length: u32,
    pub members: Vec<NoteGroup>,
}

impl ChordBin {
    pub fn end(&self) -> Beats {
        self.onset + Beats::from_integer(self.length as i64)
    }
}

/// Splits a bin of `length` quarters among `count` notes (`1 <= count <= length`).
pub trait RhythmTemplate {
    fn durations(&self, length: u32, count: u32) -> Vec<u32>;
}

/// Equal shares of `length / count`, with the remainder handed out one quarter
/// at a time starting from the first note.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrontLoadedTemplate;

impl RhythmTemplate for FrontLoadedTemplate {
    fn durations(&self, length: u32, count: u32) -> Vec<u32> {
        assert!(
            count >= 1 && count <= length,
            "{count} notes in {length} quarters"
        );
        let base = length / count;
        let extra = length % count;
        (0..count).map(|i| base + u32::from(i < extra)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmissionPolicy {
    pub rng_seed: u64,
    /// Keep the first and last note of an overfull bin.
    pub protect_endpoints: bool,
}

impl Default for OmissionPolicy {
    fn default() -> Self {
        OmissionPolicy {
            rng_seed: 0,
            protect_endpoints: true,
        }
    }
}

/// Collapse maximal runs of path notes joined by prolongational edges.
pub fn merge_prolongations(path: &ReductionPath, phrase: &Phrase) -> Vec<NoteGroup> {
    let mut groups: Vec<NoteGroup> = Vec::new();
    for (step, &node) in path.nodes.iter().enumerate() {
        let joins = step > 0 && path.categories[step - 1] == EdgeCategory::Prolongational;
        match groups.last_mut() {
            Some(g) if joins => g.sources.push(node),
            _ => groups.push(NoteGroup {
                sources: vec![node],
                pitch: phrase.notes[node].pitch,
            }),
        }
    }
    groups
}

fn whole_quarters(chord_index: usize, value: Beats) -> Result<i64> {
    if value.is_integer() {
        Ok(value.to_integer())
    } else {
        Err(Error::BinGrid { chord_index, value })
    }
}

/// One bin per chord. Each group goes to the bin of its notes' chord; a group
/// whose notes straddle a chord change is split there.
pub fn allocate_bins(
    groups: &[NoteGroup],
    membership: &ChordMembership,
    chords: &[ChordEvent],
) -> Result<Vec<ChordBin>> {
    let mut bins = chords
        .iter()
        .enumerate()
        .map(|(k, c)| {
            whole_quarters(k, c.onset)?;
            let length = whole_quarters(k, c.duration)?;
            if length < 1 {
                return Err(Error::BinGrid {
                    chord_index: k,
                    value: c.duration,
                });
            }
            Ok(ChordBin {
                chord_index: k,
                onset: c.onset,
                length: length as u32,
                members: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    for g in groups {
        let mut start = 0;
        while start < g.sources.len() {
            let chord = membership.chord_of(g.sources[start])?;
            let mut end = start + 1;
            while end < g.sources.len() && membership.chord_of(g.sources[end])? == chord {
                end += 1;
            }
            let bin = bins.get_mut(chord).ok_or(Error::IndexOutOfRange {
                index: chord,
                len: chords.len(),
            })?;
            bin.members.push(NoteGroup {
                sources: g.sources[start..end].to_vec(),
                pitch: g.pitch,
            });
            start = end;
        }
    }
    Ok(bins)
}

/// Lay out the notes of one bin. Returns the notes and whether any were omitted.
pub fn apply_rhythm_template(
    bin: &ChordBin,
    template: &dyn RhythmTemplate,
    policy: &OmissionPolicy,
    rng: &mut ChaCha8Rng,
) -> (Vec<ReducedNote>, bool) {
    let k = bin.members.len();
    let l = bin.length as usize;
    if k == 0 {
        return (Vec::new(), false);
    }
    let overflow = k > l;
    let keep: Vec<usize> = if !overflow {
        (0..k).collect()
    } else if policy.protect_endpoints && l >= 2 {
        let mut keep: Vec<usize> = index::sample(rng, k - 2, l - 2)
            .into_iter()
            .map(|i| i + 1)
            .collect();
        keep.push(0);
        keep.push(k - 1);
        keep.sort_unstable();
        keep
    } else if policy.protect_endpoints {
        vec![0]
    } else {
        let mut keep = index::sample(rng, k, l).into_vec();
        keep.sort_unstable();
        keep
    };

    let durations = template.durations(bin.length, keep.len() as u32);
    let mut t = bin.onset;
    let notes = keep
        .iter()
        .zip(durations)
        .map(|(&m, d)| {
            let d = Beats::from_integer(d as i64);
            let g = &bin.members[m];
            let note = ReducedNote {
                onset: t,
                pitch: g.pitch,
                duration: d,
                tie_to_next: false,
                source_indices: g.sources.clone(),
            };
            t += d;
            note
        })
        .collect();
    (notes, overflow)
}

/// Tie prolongations that cross a chord change, then assemble the melody.
pub fn mark_suspensions(
    mut notes: Vec<ReducedNote>,
    path: &ReductionPath,
    membership: &ChordMembership,
) -> Result<ReducedMelody> {
    notes.sort_by_key(|a| a.onset);
    for (step, w) in path.nodes.windows(2).enumerate() {
        if path.categories[step] != EdgeCategory::Prolongational
            || membership.chord_of(w[0])? == membership.chord_of(w[1])?
        {
            continue;
        }
        let from = notes.iter().position(|n| n.source_indices.contains(&w[0]));
        let to = notes.iter().position(|n| n.source_indices.contains(&w[1]));
        if let (Some(from), Some(to)) = (from, to) {
            if to == from + 1 && notes[from].end() == notes[to].onset {
                notes[from].tie_to_next = true;
            }
        }
    }
    for w in notes.windows(2) {
        assert!(w[0].end() <= w[1].onset, "reduced notes overlap");
    }
    Ok(ReducedMelody {
        notes,
        phrase_ref: String::new(),
    })
}

/// Everything needed to run the pipeline on one phrase.
#[derive(Debug, Clone, Default)]
pub struct ReduceOptions {
    pub cost: CostConfig,
    pub anticipation: AnticipationConfig,
    pub omission: OmissionPolicy,
    /// Pitch extremes for the whole piece, used when the cost config asks for piece scope.
    pub piece_pitch_range: Option<(u8, u8)>,
}

/// Intermediate products of a reduction, kept for inspection.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub membership: ChordMembership,
    pub graph: ReductionGraph,
    pub path: ReductionPath,
    pub bins: Vec<ChordBin>,
    pub melody: ReducedMelody,
    /// Some bin held more notes than quarters, so omission used the RNG.
    pub overflowed: bool,
}

/// Anticipations, graph, and membership for `p`, ready for path search.
pub fn prepare(p: &Phrase, opts: &ReduceOptions) -> Result<(ChordMembership, ReductionGraph)> {
    crate::model::ensure_valid(p)?;
    let membership = detect_anticipations(p, &opts.anticipation);
    let own = p.pitch_range().expect("validated phrase has notes");
    let range = match (opts.cost.pitch_range_scope, opts.piece_pitch_range) {
        (PitchRangeScope::Piece, Some(r)) => r,
        _ => own,
    };
    let graph = build_graph_with_range(p, &membership, &opts.cost, range)?;
    Ok((membership, graph))
}

/// Post-process a given path of `p` into a melody.
pub fn realize_path(
    p: &Phrase,
    membership: &ChordMembership,
    path: &ReductionPath,
    policy: &OmissionPolicy,
    template: &dyn RhythmTemplate,
) -> Result<(Vec<ChordBin>, ReducedMelody, bool)> {
    let groups = merge_prolongations(path, p);
    let bins = allocate_bins(&groups, membership, &p.chords)?;
    let mut rng = ChaCha8Rng::seed_from_u64(policy.rng_seed);
    let mut notes: Vec<ReducedNote> = Vec::new();
    let mut overflowed = false;
    for bin in &bins {
        if bin.members.is_empty() {
            // sustain through a chord the path skipped entirely
            if let Some(prev) = notes.last_mut().filter(|n| n.end() == bin.onset) {
                prev.duration += Beats::from_integer(bin.length as i64);
            }
            continue;
        }
        let (realized, overflow) = apply_rhythm_template(bin, template, policy, &mut rng);
        overflowed |= overflow;
        notes.extend(realized);
    }
    let melody = mark_suspensions(notes, path, membership)?;
    Ok((bins, melody, overflowed))
}

pub fn reduce_phrase_detailed(p: &Phrase, opts: &ReduceOptions) -> Result<Reduction> {
    let (membership, graph) = prepare(p, opts)?;
    let path = shortest_path(&graph);
    let (bins, melody, overflowed) =
        realize_path(p, &membership, &path, &opts.omission, &FrontLoadedTemplate)?;
    Ok(Reduction {
        membership,
        graph,
        path,
        bins,
        melody,
        overflowed,
    })
}

/// The full pipeline with default anticipation handling and template.
pub fn reduce_phrase(
    p: &Phrase,
    cfg: &CostConfig,
    policy: &OmissionPolicy,
) -> Result<ReducedMelody> {
    let opts = ReduceOptions {
        cost: cfg.clone(),
        omission: *policy,
        ..Default::default()
    };
    Ok(reduce_phrase_detailed(p, &opts)?.melody)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ReductionGraph;
    use crate::model::{beats, Chroma, Note, TimeSignature};

    fn c() -> Chroma {
        Chroma::from_pitch_classes(&[0, 4, 7])
    }

    fn cdc(pitches: [u8; 3]) -> Phrase {
        Phrase::new(
            pitches
                .iter()
                .enumerate()
                .map(|(i, &p)| Note::new(beats(i as i64, 1), p, beats(1, 1)))
                .collect(),
            vec![ChordEvent::new(beats(0, 1), beats(4, 1), c())],
            TimeSignature::COMMON,
        )
    }

    fn path_with(cats: &[EdgeCategory]) -> ReductionPath {
        ReductionPath {
            nodes: (0..=cats.len()).collect(),
            total_cost: 0.0,
            categories: cats.to_vec(),
        }
    }

    #[test]
    fn merging_runs() {
        use EdgeCategory::*;
        let p = cdc([60, 60, 62]);
        let sources = |cats: &[EdgeCategory]| -> Vec<Vec<usize>> {
            merge_prolongations(&path_with(cats), &p)
                .into_iter()
                .map(|g| g.sources)
                .collect()
        };
        assert_eq!(
            sources(&[Prolongational, Linear]),
            vec![vec![0, 1], vec![2]]
        );
        assert_eq!(sources(&[Linear, Linear]), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(
            sources(&[Prolongational, Prolongational]),
            vec![vec![0, 1, 2]]
        );
    }

    #[test]
    fn template_shapes() {
        let t = FrontLoadedTemplate;
        assert_eq!(t.durations(4, 2), vec![2, 2]);
        assert_eq!(t.durations(4, 3), vec![2, 1, 1]);
        assert_eq!(t.durations(4, 4), vec![1, 1, 1, 1]);
        assert_eq!(t.durations(7, 3), vec![3, 2, 2]);
        assert_eq!(t.durations(1, 1), vec![1]);
    }

    fn two_chords() -> Vec<ChordEvent> {
        vec![
            ChordEvent::new(beats(0, 1), beats(4, 1), c()),
            ChordEvent::new(
                beats(4, 1),
                beats(4, 1),
                Chroma::from_pitch_classes(&[5, 9, 0]),
            ),
        ]
    }

    fn group(sources: &[usize]) -> NoteGroup {
        NoteGroup {
            sources: sources.to_vec(),
            pitch: 60,
        }
    }

    #[test]
    fn bins_follow_membership() {
        let m = ChordMembership::new(vec![0, 1], vec![false, false]);
        let bins = allocate_bins(&[group(&[0]), group(&[1])], &m, &two_chords()).unwrap();
        assert_eq!(bins[0].members, vec![group(&[0])]);
        assert_eq!(bins[1].members, vec![group(&[1])]);
        // anticipation at 3.5 already mapped to chord 1
        let m = ChordMembership::new(vec![0, 1], vec![false, true]);
        let bins = allocate_bins(&[group(&[0]), group(&[1])], &m, &two_chords()).unwrap();
        assert_eq!(bins[1].members, vec![group(&[1])]);
    }

    #[test]
    fn groups_split_at_chord_change() {
        let m = ChordMembership::new(vec![0, 0, 1], vec![false; 3]);
        let bins = allocate_bins(&[group(&[0, 1, 2])], &m, &two_chords()).unwrap();
        assert_eq!(bins[0].members, vec![group(&[0, 1])]);
        assert_eq!(bins[1].members, vec![group(&[2])]);
    }

    #[test]
    fn fractional_chord_is_rejected() {
        let chords = vec![ChordEvent::new(beats(0, 1), beats(7, 2), c())];
        let m = ChordMembership::new(vec![0], vec![false]);
        assert!(matches!(
            allocate_bins(&[group(&[0])], &m, &chords),
            Err(Error::BinGrid { chord_index: 0, .. })
        ));
    }

    fn bin(length: u32, members: usize) -> ChordBin {
        ChordBin {
            chord_index: 0,
            onset: beats(0, 1),
            length,
            members: (0..members).map(|i| group(&[i])).collect(),
        }
    }

    #[test]
    fn overflow_keeps_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (notes, overflow) = apply_rhythm_template(
            &bin(2, 4),
            &FrontLoadedTemplate,
            &OmissionPolicy::default(),
            &mut rng,
        );
        assert!(overflow);
        let kept: Vec<_> = notes.iter().map(|n| n.source_indices[0]).collect();
        assert_eq!(kept, vec![0, 3]);
        assert_eq!(notes[1].onset, beats(1, 1));
    }

    #[test]
    fn overflow_is_seeded() {
        let policy = OmissionPolicy {
            rng_seed: 0,
            protect_endpoints: false,
        };
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            apply_rhythm_template(&bin(3, 8), &FrontLoadedTemplate, &policy, &mut rng).0
        };
        assert_eq!(run(1), run(1));
        let distinct: std::collections::HashSet<_> = (0..20).map(run).collect();
        assert!(distinct.len() > 1);
        for notes in (0..20).map(run) {
            assert_eq!(notes.len(), 3);
            assert_eq!(notes.iter().map(|n| n.duration).sum::<Beats>(), beats(3, 1));
        }
    }

    #[test]
    fn one_quarter_overflow_keeps_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (notes, _) = apply_rhythm_template(
            &bin(1, 3),
            &FrontLoadedTemplate,
            &OmissionPolicy::default(),
            &mut rng,
        );
        assert_eq!(notes.len(), 1);
        assert_eq!(notes[0].source_indices, vec![0]);
    }

    fn suspension_case() -> (Phrase, ReductionPath, ChordMembership) {
        // G4 held across the change from C to G, then resolving down
        let p = Phrase::new(
            vec![
                Note::new(beats(0, 1), 64, beats(2, 1)),
                Note::new(beats(2, 1), 67, beats(2, 1)),
                Note::new(beats(4, 1), 67, beats(2, 1)),
                Note::new(beats(6, 1), 65, beats(2, 1)),
            ],
            vec![
                ChordEvent::new(beats(0, 1), beats(4, 1), c()),
                ChordEvent::new(
                    beats(4, 1),
                    beats(4, 1),
                    Chroma::from_pitch_classes(&[7, 11, 2, 5]),
                ),
            ],
            TimeSignature::COMMON,
        );
        use EdgeCategory::*;
        let path = ReductionPath {
            nodes: vec![0, 1, 2, 3],
            total_cost: 0.0,
            categories: vec![Arpeggiation, Prolongational, Linear],
        };
        let m = ChordMembership::new(vec![0, 0, 1, 1], vec![false; 4]);
        (p, path, m)
    }

    #[test]
    fn prolongation_across_chords_becomes_tie() {
        let (p, path, m) = suspension_case();
        let (_, melody, _) = realize_path(
            &p,
            &m,
            &path,
            &OmissionPolicy::default(),
            &FrontLoadedTemplate,
        )
        .unwrap();
        let ties: Vec<bool> = melody.notes.iter().map(|n| n.tie_to_next).collect();
        assert_eq!(ties, vec![false, true, false, false]);
    }

    #[test]
    fn tie_needs_both_endpoints() {
        let (_, path, m) = suspension_case();
        let notes = vec![ReducedNote {
            onset: beats(0, 1),
            pitch: 67,
            duration: beats(4, 1),
            tie_to_next: false,
            source_indices: vec![1],
        }];
        let melody = mark_suspensions(notes, &path, &m).unwrap();
        assert!(!melody.notes[0].tie_to_next);
    }

    #[test]
    fn empty_bin_extends_previous_note() {
        let p = Phrase::new(
            vec![
                Note::new(beats(0, 1), 60, beats(1, 1)),
                Note::new(beats(9, 1), 60, beats(1, 1)),
            ],
            vec![
                ChordEvent::new(beats(0, 1), beats(4, 1), c()),
                ChordEvent::new(
                    beats(4, 1),
                    beats(4, 1),
                    Chroma::from_pitch_classes(&[2, 5, 9]),
                ),
                ChordEvent::new(beats(8, 1), beats(4, 1), c()),
            ],
            TimeSignature::COMMON,
        );
        let m = detect_anticipations(&p, &Default::default());
        let g = ReductionGraph::from_fn(2, |_, _| (EdgeCategory::Unclassified, 1.0));
        let path = shortest_path(&g);
        let (_, melody, _) = realize_path(
            &p,
            &m,
            &path,
            &OmissionPolicy::default(),
            &FrontLoadedTemplate,
        )
        .unwrap();
        assert_eq!(melody.notes.len(), 2);
        assert_eq!(melody.notes[0].duration, beats(8, 1));
        assert_eq!(melody.notes[1].onset, beats(8, 1));
    }

    #[test]
    fn pipeline_examples() {
        let cfg = CostConfig::default();
        let single = Phrase::new(
            vec![Note::new(beats(0, 1), 64, beats(1, 1))],
            vec![ChordEvent::new(beats(0, 1), beats(4, 1), c())],
            TimeSignature::COMMON,
        );
        let m = reduce_phrase(&single, &cfg, &OmissionPolicy::default()).unwrap();
        assert_eq!(m.notes.len(), 1);
        assert_eq!(m.notes[0].duration, beats(4, 1));

        let m = reduce_phrase(&cdc([60, 62, 60]), &cfg, &OmissionPolicy::default()).unwrap();
        let durs: Vec<_> = m.notes.iter().map(|n| n.duration).collect();
        assert_eq!(durs, vec![beats(2, 1), beats(1, 1), beats(1, 1)]);
        let pitches: Vec<_> = m.notes.iter().map(|n| n.pitch).collect();
        assert_eq!(pitches, vec![60, 62, 60]);

        // a shallow distance penalty takes the prolongation shortcut
        let coarse = CostConfig {
            eta: 0.5,
            ..Default::default()
        };
        let m = reduce_phrase(&cdc([60, 62, 60]), &coarse, &OmissionPolicy::default()).unwrap();
        assert_eq!(m.notes.len(), 1);
        assert_eq!(m.notes[0].source_indices, vec![0, 2]);
        assert_eq!(m.notes[0].duration, beats(4, 1));
    }
}
