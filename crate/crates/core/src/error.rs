use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Beats, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON at byte {offset} (line {line}, column {column}): {message}")]
    Json {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("unknown chord symbol {0:?}")]
    ChordSymbol(String),

    #[error("polyphonic overlap between notes {first} and {second}")]
    Polyphony { first: usize, second: usize },

    #[error("note {index} at beat {onset} is not covered by any chord")]
    UncoveredOnset { index: usize, onset: Beats },

    #[error("phrase [{start}, {end}) contains no notes")]
    EmptyPhrase { start: Beats, end: Beats },

    #[error("invalid phrase: {}", join(.0))]
    Invalid(Vec<Violation>),

    #[error("invalid time signature {numerator}/{denominator}")]
    InvalidTimeSignature { numerator: u32, denominator: u32 },

    #[error("MIDI: {0}")]
    Midi(String),

    #[error("MIDI file has no note events")]
    NoNotes,

    #[error("chord sidecar line {line}: {message}")]
    Sidecar { line: usize, message: String },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("chord {chord_index} spans {value} beats, not a whole number of quarters")]
    BinGrid { chord_index: usize, value: Beats },

    #[error("brute-force search limited to {max} nodes, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("reduction has no notes")]
    EmptyReduction,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            message: message.into(),
        }
    }
}
