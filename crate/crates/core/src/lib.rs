//! Melody reduction by least-cost paths over a graph of the melody's notes.
//!
//! A phrase's notes form a complete DAG whose edges are classified (prolongation,
//! linear progression, arpeggiation and their octave-displaced variants) and
//! weighted by a tonal, temporal and note-importance cost. The cheapest path from
//! the first to the last note is the skeleton, which is then fitted back onto the
//! chord timeline as a playable melody.
//!
//! ```
//! use melreduce::ingest::parse_leadsheet;
//! use melreduce::postprocess::{reduce_phrase, OmissionPolicy};
//!
//! let doc = br#"{
//!   "notes": [
//!     {"onset": 0, "pitch": 60, "duration": 1},
//!     {"onset": 1, "pitch": 62, "duration": 1},
//!     {"onset": 2, "pitch": 60, "duration": 1}
//!   ],
//!   "chords": [{"onset": 0, "duration": 4, "symbol": "C"}]
//! }"#;
//! let phrase = &parse_leadsheet(doc).unwrap()[0];
//! let reduced = reduce_phrase(phrase, &Default::default(), &OmissionPolicy::default()).unwrap();
//! assert_eq!(reduced.notes.len(), 3);
//! ```

pub mod baseline;
pub mod cli;
pub mod error;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod postprocess;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{build_graph, classify_edge, CostConfig, EdgeCategory, ReductionGraph};
pub use model::{
    Beats, ChordEvent, Chroma, Note, Phrase, ReducedMelody, ReducedNote, TimeSignature,
};
pub use postprocess::{reduce_phrase, OmissionPolicy};
pub use solver::{brute_force_shortest, k_shortest_paths, shortest_path, ReductionPath};
