//! Seeded random phrases for property tests, benchmarks and the acceptance corpus.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::ingest::parse_chord_symbol;
use crate::model::{beats, Beats, ChordEvent, Note, Phrase, TimeSignature};

const SYMBOL_QUALITIES: [&str; 9] = ["", "m", "7", "maj7", "m7", "dim", "aug", "sus2", "sus4"];
const ROOTS: [&str; 12] = [
    "C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B",
];

#[derive(Debug, Clone)]
pub struct PhraseSpec {
    pub min_notes: usize,
    pub max_notes: usize,
    pub min_pitch: u8,
    pub max_pitch: u8,
    pub max_chords: usize,
    /// Chance of an eighth rest before each note after the first.
    pub rest_probability: f64,
    /// Chance of a 3/4 phrase instead of 4/4.
    pub triple_meter_probability: f64,
}

impl Default for PhraseSpec {
    fn default() -> Self {
        PhraseSpec {
            min_notes: 1,
            max_notes: 12,
            min_pitch: 48,
            max_pitch: 84,
            max_chords: 4,
            rest_probability: 0.1,
            triple_meter_probability: 0.2,
        }
    }
}

/// A valid random phrase: quarter/eighth rhythm, 1..=`max_chords` whole-beat chords.
pub fn random_phrase<R: Rng>(rng: &mut R, spec: &PhraseSpec) -> Phrase {
    let n = rng.gen_range(spec.min_notes..=spec.max_notes);
    let mut notes = Vec::with_capacity(n);
    let mut t = Beats::from_integer(0);
    for i in 0..n {
        if i > 0 && rng.gen_bool(spec.rest_probability) {
            t += beats(1, 2);
        }
        let duration = if rng.gen_bool(0.5) {
            beats(1, 1)
        } else {
            beats(1, 2)
        };
        let pitch = rng.gen_range(spec.min_pitch..=spec.max_pitch);
        notes.push(Note::new(t, pitch, duration));
        t += duration;
    }

    let total = t.ceil().to_integer().max(1);
    let count = rng.gen_range(1..=spec.max_chords.min(total as usize));
    let mut cuts: Vec<i64> = index::sample(rng, (total - 1) as usize, count - 1)
        .into_iter()
        .map(|c| c as i64 + 1)
        .collect();
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(total);
    let chords = cuts
        .windows(2)
        .map(|w| {
            let symbol = format!(
                "{}{}",
                ROOTS.choose(rng).unwrap(),
                SYMBOL_QUALITIES.choose(rng).unwrap()
            );
            let chroma = parse_chord_symbol(&symbol).expect("vocabulary symbol");
            ChordEvent::new(
                Beats::from_integer(w[0]),
                Beats::from_integer(w[1] - w[0]),
                chroma,
            )
            .with_label(symbol)
        })
        .collect();

    let time_signature = if rng.gen_bool(spec.triple_meter_probability) {
        TimeSignature::new(3, 4).unwrap()
    } else {
        TimeSignature::COMMON
    };
    Phrase::new(notes, chords, time_signature)
}

/// `count` phrases from one seed.
pub fn corpus(seed: u64, count: usize, spec: &PhraseSpec) -> Vec<Phrase> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_phrase(&mut rng, spec)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_phrase;

    #[test]
    fn generated_phrases_are_valid() {
        for p in corpus(7, 500, &PhraseSpec::default()) {
            assert!(validate_phrase(&p).is_empty(), "{p:?}");
            assert!(p.len() <= 12);
            assert!(p.chords.len() <= 4);
            assert!(p.notes.iter().all(|n| (48..=84).contains(&n.pitch)));
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let spec = PhraseSpec::default();
        assert_eq!(corpus(3, 20, &spec), corpus(3, 20, &spec));
        assert_ne!(corpus(3, 20, &spec), corpus(4, 20, &spec));
    }
}
