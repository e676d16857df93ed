//! Chord symbol vocabulary: root plus one of a handful of qualities.

use crate::error::{Error, Result};
use crate::model::Chroma;

const NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// Interval sets, in the order used when naming a chroma back.
const QUALITIES: [(&str, &[u8]); 9] = [
    ("", &[0, 4, 7]),
    ("m", &[0, 3, 7]),
    ("7", &[0, 4, 7, 10]),
    ("maj7", &[0, 4, 7, 11]),
    ("m7", &[0, 3, 7, 10]),
    ("dim", &[0, 3, 6]),
    ("aug", &[0, 4, 8]),
    ("sus2", &[0, 2, 7]),
    ("sus4", &[0, 5, 7]),
];

fn quality_intervals(q: &str) -> Option<&'static [u8]> {
    let canonical = match q {
        "" | "maj" | "M" | "major" => "",
        "m" | "min" | "-" | "minor" => "m",
        "7" | "dom7" => "7",
        "maj7" | "M7" => "maj7",
        "m7" | "min7" | "-7" => "m7",
        "dim" | "o" => "dim",
        "aug" | "+" => "aug",
        "sus2" => "sus2",
        "sus4" | "sus" => "sus4",
        _ => return None,
    };
    QUALITIES
        .iter()
        .find(|(name, _)| *name == canonical)
        .map(|(_, iv)| *iv)
}

fn parse_root(s: &str) -> Option<(u8, &str)> {
    let mut chars = s.chars();
    let base = match chars.next()? {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => return None,
    };
    let rest = chars.as_str();
    if let Some(r) = rest.strip_prefix('#') {
        Some(((base + 1) % 12, r))
    } else if let Some(r) = rest.strip_prefix('b') {
        Some(((base + 11) % 12, r))
    } else {
        Some((base, rest))
    }
}

/// Resolve a chord symbol such as `C`, `F#m7`, `Bb:maj7` or `G7/B` to its chroma.
pub fn parse_chord_symbol(symbol: &str) -> Result<Chroma> {
    let err = || Error::ChordSymbol(symbol.to_string());
    let s = symbol.trim();
    let (body, bass) = match s.split_once('/') {
        Some((b, bass)) => (b, Some(bass)),
        None => (s, None),
    };
    let (root, rest) = parse_root(body).ok_or_else(err)?;
    let quality = rest.strip_prefix(':').unwrap_or(rest);
    let intervals = quality_intervals(quality).ok_or_else(err)?;
    let mut chroma = Chroma::from_pitch_classes(
        &intervals
            .iter()
            .map(|iv| (root + iv) % 12)
            .collect::<Vec<_>>(),
    );
    if let Some(bass) = bass {
        let (pc, tail) = parse_root(bass).ok_or_else(err)?;
        if !tail.is_empty() {
            return Err(err());
        }
        chroma = chroma.with(pc);
    }
    Ok(chroma)
}

/// Best-effort symbol for a chroma; falls back to listing pitch classes.
pub fn chord_name(chroma: Chroma) -> String {
    for (quality, intervals) in QUALITIES {
        for root in 0..12u8 {
            let candidate = Chroma::from_pitch_classes(
                &intervals
                    .iter()
                    .map(|iv| (root + iv) % 12)
                    .collect::<Vec<_>>(),
            );
            if candidate == chroma {
                return format!("{}{}", NAMES[root as usize], quality);
            }
        }
    }
    let pcs: Vec<&str> = chroma
        .pitch_classes()
        .map(|pc| NAMES[pc as usize])
        .collect();
    format!("{{{}}}", pcs.join(","))
}

/// Scientific pitch name, C4 = 60.
pub fn pitch_name(pitch: u8) -> String {
    format!("{}{}", NAMES[(pitch % 12) as usize], pitch as i32 / 12 - 1)
}
