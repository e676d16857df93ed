//! Objective proxies for comparing a reduction with its source phrase.
//!
//! None of these are established measures of reduction quality; they are
//! cheap stand-ins for faithfulness (pitch recall, contour correlation) and
//! harmonic fit (chord-tone ratio).

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Beats, ChordEvent, Note, Phrase, ReducedMelody};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    /// Reduced note count over original note count.
    pub compression_ratio: f64,
    /// Share of reduction time spent on chord tones.
    pub chord_tone_ratio: f64,
    pub chord_tone_ratio_original: f64,
    /// Pearson correlation of the quarter-sampled pitch curves; absent when
    /// either curve is constant.
    pub contour_correlation: Option<f64>,
    /// Share of reduced notes whose pitch occurs in the original under the same chord.
    pub pitch_recall: f64,
}

impl MetricReport {
    pub const COLUMNS: [&'static str; 5] = [
        "compression",
        "chord_tone",
        "chord_tone_orig",
        "contour_r",
        "pitch_recall",
    ];

    pub fn values(&self) -> [Option<f64>; 5] {
        [
            Some(self.compression_ratio),
            Some(self.chord_tone_ratio),
            Some(self.chord_tone_ratio_original),
            self.contour_correlation,
            Some(self.pitch_recall),
        ]
    }
}

fn overlap(a: (Beats, Beats), b: (Beats, Beats)) -> Beats {
    (a.1.min(b.1) - a.0.max(b.0)).max(Beats::zero())
}

/// Chord-tone share of the chord-covered time of `notes`.
pub fn chord_tone_ratio(notes: &[Note], chords: &[ChordEvent]) -> f64 {
    let mut covered = Beats::zero();
    let mut tones = Beats::zero();
    for n in notes {
        for c in chords {
            let o = overlap((n.onset, n.end()), (c.onset, c.end()));
            covered += o;
            if c.chroma.contains(n.pitch_class()) {
                tones += o;
            }
        }
    }
    if covered.is_zero() {
        0.0
    } else {
        ratio(tones / covered)
    }
}

fn ratio(b: Beats) -> f64 {
    *b.numer() as f64 / *b.denom() as f64
}

/// Pitch sounding at each quarter from `start`, holding the last pitch through
/// rests and back-filling before the first note.
pub fn sample_contour(notes: &[Note], start: Beats, samples: usize) -> Vec<f64> {
    let Some(first) = notes.first() else {
        return vec![];
    };
    (0..samples)
        .map(|k| {
            let t = start + Beats::from_integer(k as i64);
            let current = notes.iter().rev().find(|n| n.onset <= t).unwrap_or(first);
            current.pitch as f64
        })
        .collect()
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 1e-12 || syy <= 1e-12 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn compute_metrics(original: &Phrase, reduced: &ReducedMelody) -> Result<MetricReport> {
    if reduced.is_empty() {
        return Err(Error::EmptyReduction);
    }
    let notes: Vec<Note> = reduced
        .notes
        .iter()
        .map(|n| Note::new(n.onset, n.pitch, n.duration))
        .collect();

    let recalled = notes
        .iter()
        .filter(|r| {
            let chord = original
                .chords
                .iter()
                .find(|c| c.sounds_at(r.onset))
                .or_else(|| {
                    original
                        .chords
                        .iter()
                        .find(|c| overlap((r.onset, r.end()), (c.onset, c.end())) > Beats::zero())
                });
            chord.is_some_and(|c| {
                original.notes.iter().any(|o| {
                    o.pitch == r.pitch
                        && overlap((o.onset, o.end()), (c.onset, c.end())) > Beats::zero()
                })
            })
        })
        .count();

    let (start, end) = original.span();
    let samples = (end - start).ceil().to_integer().max(0) as usize;
    let contour_correlation = pearson(
        &sample_contour(&original.notes, start, samples),
        &sample_contour(&notes, start, samples),
    );

    Ok(MetricReport {
        compression_ratio: reduced.len() as f64 / original.len() as f64,
        chord_tone_ratio: chord_tone_ratio(&notes, &original.chords),
        chord_tone_ratio_original: chord_tone_ratio(&original.notes, &original.chords),
        contour_correlation,
        pitch_recall: recalled as f64 / notes.len() as f64,
    })
}

/// Mean and sample standard deviation of the present values.
pub fn mean_std(values: impl IntoIterator<Item = Option<f64>>) -> Option<(f64, f64, usize)> {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt(), v.len()))
}
