//! The reduction graph: every causal edge `i -> j` (i < j) between phrase notes,
//! classified by melodic function and weighted by the cost model.
//!
//! Edge cost is `alpha(x_j) * (temporal(i, j) + tonal(category))`, where
//! `alpha` is the product of four note-importance factors (pitch extremity,
//! metrical position, duration, chord membership). Smaller is more significant.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Beats, ChordEvent, ChordMembership, Note, Phrase, TimeSignature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeCategory {
    /// Same pitch, within the temporal threshold.
    #[serde(rename = "PE")]
    Prolongational,
    /// A second (1 or 2 semitones), within the threshold.
    #[serde(rename = "LE")]
    Linear,
    /// Pitch-class distance 3..=9 inside one chord.
    #[serde(rename = "AE")]
    Arpeggiation,
    /// Same pitch class in another octave, within the threshold.
    #[serde(rename = "IPE")]
    ImaginaryProlongational,
    /// Compound second by pitch class, within the threshold.
    #[serde(rename = "ILE")]
    ImaginaryLinear,
    /// Everything else.
    #[serde(rename = "UE")]
    Unclassified,
}

impl EdgeCategory {
    pub const ALL: [EdgeCategory; 6] = [
        EdgeCategory::Prolongational,
        EdgeCategory::Linear,
        EdgeCategory::Arpeggiation,
        EdgeCategory::ImaginaryProlongational,
        EdgeCategory::ImaginaryLinear,
        EdgeCategory::Unclassified,
    ];

    pub fn abbrev(&self) -> &'static str {
        match self {
            EdgeCategory::Prolongational => "PE",
            EdgeCategory::Linear => "LE",
            EdgeCategory::Arpeggiation => "AE",
            EdgeCategory::ImaginaryProlongational => "IPE",
            EdgeCategory::ImaginaryLinear => "ILE",
            EdgeCategory::Unclassified => "UE",
        }
    }
}

impl fmt::Display for EdgeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

/// Where `p_min`/`p_max` for pitch importance come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PitchRangeScope {
    #[default]
    Phrase,
    Piece,
}

/// Every tunable of the cost model. Serializes as a flat JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostConfig {
    pub tonal_pe: f64,
    pub tonal_le: f64,
    pub tonal_ae: f64,
    pub tonal_ipe: f64,
    pub tonal_ile: f64,
    pub tonal_ue: f64,
    /// Exponent of the index-distance cost.
    pub eta: f64,
    /// Temporal threshold for PE/LE/IPE/ILE, in measures.
    pub d_measures: u32,
    pub pitch_weight_span: f64,
    /// Downbeat, beat, eighth, sixteenth (and finer).
    pub onset_factors: [f64; 4],
    /// >= half, >= quarter, >= eighth, shorter.
    pub duration_factors: [f64; 4],
    /// Chord tone, non-chord tone.
    pub harmony_factors: [f64; 2],
    pub pitch_range_scope: PitchRangeScope,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            tonal_pe: 0.1,
            tonal_le: 0.3,
            tonal_ae: 1.5,
            tonal_ipe: 1.0,
            tonal_ile: 1.3,
            tonal_ue: 3.0,
            eta: 1.6,
            d_measures: 2,
            pitch_weight_span: 0.1,
            onset_factors: [0.85, 0.95, 1.05, 1.15],
            duration_factors: [0.85, 0.95, 1.05, 1.15],
            harmony_factors: [0.85, 1.15],
            pitch_range_scope: PitchRangeScope::Phrase,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let tonal = [
            self.tonal_pe,
            self.tonal_le,
            self.tonal_ae,
            self.tonal_ipe,
            self.tonal_ile,
            self.tonal_ue,
        ];
        if tonal.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return bad("tonal costs must be finite and >= 0");
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad("eta must be > 0");
        }
        if self.d_measures < 1 {
            return bad("d_measures must be >= 1");
        }
        if !(0.0..2.0).contains(&self.pitch_weight_span) {
            return bad("pitch_weight_span must lie in [0, 2)");
        }
        let factors = self
            .onset_factors
            .iter()
            .chain(&self.duration_factors)
            .chain(&self.harmony_factors);
        if factors.clone().any(|f| !f.is_finite() || *f <= 0.0) {
            return bad("importance factors must be > 0");
        }
        Ok(())
    }

    /// Temporal threshold `D` in quarter beats.
    pub fn threshold(&self, ts: TimeSignature) -> Beats {
        ts.measure_length() * self.d_measures as i64
    }
}

/// Classify the edge `a -> b` (`a` earlier).
///
/// Tests run in the order PE, LE, IPE, ILE, AE, UE; the first match wins.
/// `same_chord` is chord equality under anticipation-aware membership and
/// `threshold` is `D` in quarter beats.
pub fn classify_edge(a: &Note, b: &Note, same_chord: bool, threshold: Beats) -> EdgeCategory {
    let near = b.onset - a.onset < threshold;
    let interval = (a.pitch as i32 - b.pitch as i32).abs();
    let pc_diff = (a.pitch_class() as i32 - b.pitch_class() as i32).abs();
    if near && interval == 0 {
        EdgeCategory::Prolongational
    } else if near && matches!(interval, 1 | 2) {
        EdgeCategory::Linear
    } else if near && pc_diff == 0 {
        EdgeCategory::ImaginaryProlongational
    } else if near && matches!(pc_diff, 1 | 2 | 10 | 11) {
        EdgeCategory::ImaginaryLinear
    } else if same_chord && (3..=9).contains(&pc_diff) {
        EdgeCategory::Arpeggiation
    } else {
        EdgeCategory::Unclassified
    }
}

pub fn tonal_cost(category: EdgeCategory, cfg: &CostConfig) -> f64 {
    match category {
        EdgeCategory::Prolongational => cfg.tonal_pe,
        EdgeCategory::Linear => cfg.tonal_le,
        EdgeCategory::Arpeggiation => cfg.tonal_ae,
        EdgeCategory::ImaginaryProlongational => cfg.tonal_ipe,
        EdgeCategory::ImaginaryLinear => cfg.tonal_ile,
        EdgeCategory::Unclassified => cfg.tonal_ue,
    }
}

/// `(j - i)^eta`.
pub fn temporal_cost(i: usize, j: usize, cfg: &CostConfig) -> f64 {
    debug_assert!(i < j);
    ((j - i) as f64).powf(cfg.eta)
}

/// Extreme pitches weigh less; a single-pitch range gives 1.0.
pub fn pitch_importance(pitch: u8, p_min: u8, p_max: u8, cfg: &CostConfig) -> f64 {
    if p_max == p_min {
        return 1.0;
    }
    let mid = (p_max as f64 + p_min as f64) / 2.0;
    let ratio = (pitch as f64 - mid).abs() / (p_max as f64 - mid);
    cfg.pitch_weight_span * (0.5 - ratio) + 1.0
}

/// Metrical level of an onset: 0 downbeat, 1 beat, 2 eighth, 3 sixteenth or finer.
pub fn metrical_level(onset: Beats, ts: TimeSignature, anacrusis: Beats) -> usize {
    let pos = crate::model::measure_position(onset, ts, anacrusis).beat_in_measure;
    if pos == Beats::from_integer(0) {
        0
    } else if pos.is_integer() {
        1
    } else if (pos * 2).is_integer() {
        2
    } else {
        3
    }
}

pub fn onset_importance(
    onset: Beats,
    ts: TimeSignature,
    anacrusis: Beats,
    cfg: &CostConfig,
) -> f64 {
    cfg.onset_factors[metrical_level(onset, ts, anacrusis)]
}

pub fn duration_importance(duration: Beats, cfg: &CostConfig) -> f64 {
    let level = if duration >= Beats::from_integer(2) {
        0
    } else if duration >= Beats::from_integer(1) {
        1
    } else if duration >= Beats::new(1, 2) {
        2
    } else {
        3
    };
    cfg.duration_factors[level]
}

pub fn harmony_importance(pitch_class: u8, chord: &ChordEvent, cfg: &CostConfig) -> f64 {
    if chord.chroma.contains(pitch_class) {
        cfg.harmony_factors[0]
    } else {
        cfg.harmony_factors[1]
    }
}

/// The four importance factors of one note, kept separately for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Importance {
    pub pitch: f64,
    pub onset: f64,
    pub duration: f64,
    pub harmony: f64,
}

impl Importance {
    pub fn alpha(&self) -> f64 {
        self.pitch * self.onset * self.duration * self.harmony
    }
}

/// Importance of note `i` of `p`. `pitch_range` overrides the phrase's own extremes.
pub fn note_importance(
    p: &Phrase,
    i: usize,
    membership: &ChordMembership,
    pitch_range: (u8, u8),
    cfg: &CostConfig,
) -> Result<Importance> {
    let note = p.notes.get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        len: p.len(),
    })?;
    let chord_index = membership.chord_of(i)?;
    let chord = p.chords.get(chord_index).ok_or(Error::IndexOutOfRange {
        index: chord_index,
        len: p.chords.len(),
    })?;
    Ok(Importance {
        pitch: pitch_importance(note.pitch, pitch_range.0, pitch_range.1, cfg),
        onset: onset_importance(note.onset, p.time_signature, p.anacrusis, cfg),
        duration: duration_importance(note.duration, cfg),
        harmony: harmony_importance(note.pitch_class(), chord, cfg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub category: EdgeCategory,
    pub cost: f64,
}

/// Complete causal DAG over the notes of one phrase, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionGraph {
    n: usize,
    categories: Vec<EdgeCategory>,
    costs: Vec<f64>,
    importance: Vec<Importance>,
}

impl ReductionGraph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        assert!(
            i < j && j < self.n,
            "edge {i}->{j} not in graph of {} nodes",
            self.n
        );
        i * self.n + j
    }

    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.costs[self.slot(i, j)]
    }

    pub fn category(&self, i: usize, j: usize) -> EdgeCategory {
        self.categories[self.slot(i, j)]
    }

    pub fn importance(&self, i: usize) -> &Importance {
        &self.importance[i]
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).map(move |j| Edge {
                from: i,
                to: j,
                category: self.category(i, j),
                cost: self.cost(i, j),
            })
        })
    }

    /// Build from explicit per-edge costs. Used by tests and external callers
    /// that score edges themselves; `cost(i, j)` is queried for every `i < j`.
    pub fn from_fn(
        n: usize,
        mut edge: impl FnMut(usize, usize) -> (EdgeCategory, f64),
    ) -> ReductionGraph {
        let mut categories = vec![EdgeCategory::Unclassified; n * n];
        let mut costs = vec![f64::NAN; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let (c, w) = edge(i, j);
                categories[i * n + j] = c;
                costs[i * n + j] = w;
            }
        }
        let neutral = Importance {
            pitch: 1.0,
            onset: 1.0,
            duration: 1.0,
            harmony: 1.0,
        };
        ReductionGraph {
            n,
            categories,
            costs,
            importance: vec![neutral; n],
        }
    }
}

/// Classify and cost every edge of `p`.
pub fn build_graph(
    p: &Phrase,
    membership: &ChordMembership,
    cfg: &CostConfig,
) -> Result<ReductionGraph> {
    let range = p.pitch_range().ok_or(Error::EmptyPhrase {
        start: Beats::from_integer(0),
        end: Beats::from_integer(0),
    })?;
    build_graph_with_range(p, membership, cfg, range)
}

/// As [`build_graph`], with `p_min`/`p_max` supplied by the caller (piece-wide scope).
pub fn build_graph_with_range(
    p: &Phrase,
    membership: &ChordMembership,
    cfg: &CostConfig,
    pitch_range: (u8, u8),
) -> Result<ReductionGraph> {
    cfg.validate()?;
    let n = p.len();
    if membership.len() != n {
        return Err(Error::IndexOutOfRange {
            index: membership.len(),
            len: n,
        });
    }
    let importance = (0..n)
        .map(|i| note_importance(p, i, membership, pitch_range, cfg))
        .collect::<Result<Vec<_>>>()?;
    let alpha: Vec<f64> = importance.iter().map(Importance::alpha).collect();
    let threshold = cfg.threshold(p.time_signature);
    let chord = membership.assignments();

    let mut categories = vec![EdgeCategory::Unclassified; n * n];
    let mut costs = vec![f64::NAN; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let cat = classify_edge(&p.notes[i], &p.notes[j], chord[i] == chord[j], threshold);
            categories[i * n + j] = cat;
            costs[i * n + j] = alpha[j] * (temporal_cost(i, j, cfg) + tonal_cost(cat, cfg));
        }
    }
    Ok(ReductionGraph {
        n,
        categories,
        costs,
        importance,
    })
}
