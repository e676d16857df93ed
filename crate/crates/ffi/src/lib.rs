//! C ABI over the melreduce library.
//!
//! Phrase lists and melodies are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns an
//! [`MrStatus`]; on failure [`mr_last_error_message`] describes the problem.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use melreduce::baseline::{ds_obs, DsObsOptions};
use melreduce::graph::{build_graph, CostConfig};
use melreduce::ingest::{detect_anticipations, parse_leadsheet, AnticipationConfig};
use melreduce::model::{ensure_valid, Phrase, ReducedMelody};
use melreduce::postprocess::{reduce_phrase, OmissionPolicy};
use melreduce::{shortest_path, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidPhrase = 4,
    Reduction = 5,
    OutOfRange = 6,
    Config = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Phrases parsed from one lead-sheet document.
pub struct MrPhraseList {
    phrases: Vec<Phrase>,
}

/// A reduced melody together with the phrase it came from.
pub struct MrMelody {
    phrase: Phrase,
    melody: ReducedMelody,
}

/// One reduced note. Times are exact fractions of a quarter note.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MrNote {
    pub onset_num: i64,
    pub onset_den: i64,
    pub duration_num: i64,
    pub duration_den: i64,
    pub pitch: u8,
    pub tie_to_next: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> MrStatus {
    match e {
        Error::Json { .. }
        | Error::Schema { .. }
        | Error::ChordSymbol(_)
        | Error::Polyphony { .. }
        | Error::UncoveredOnset { .. }
        | Error::EmptyPhrase { .. }
        | Error::Midi(_)
        | Error::NoNotes
        | Error::Sidecar { .. } => MrStatus::Parse,
        Error::Invalid(_) | Error::InvalidTimeSignature { .. } => MrStatus::InvalidPhrase,
        Error::IndexOutOfRange { .. } => MrStatus::OutOfRange,
        Error::Config(_) => MrStatus::Config,
        _ => MrStatus::Reduction,
    }
}

fn fail(status: MrStatus, msg: impl Into<String>) -> MrStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> MrStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

/// Run `f`, turning panics into `MrStatus::Panic`.
fn guard(f: impl FnOnce() -> MrStatus) -> MrStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(MrStatus::Panic, "internal panic"),
    }
}

unsafe fn optional_str<'a>(s: *const c_char) -> Result<Option<&'a str>, MrStatus> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s)
        .to_str()
        .map(Some)
        .map_err(|_| fail(MrStatus::InvalidUtf8, "string is not valid UTF-8"))
}

fn cost_config(json: Option<&str>) -> Result<CostConfig, MrStatus> {
    let cfg: CostConfig = match json {
        None => CostConfig::default(),
        Some(text) => serde_json::from_str(text)
            .map_err(|e| fail(MrStatus::Config, format!("cost config: {e}")))?,
    };
    cfg.validate().map_err(from_error)?;
    Ok(cfg)
}

unsafe fn phrase_at<'a>(list: *const MrPhraseList, index: usize) -> Result<&'a Phrase, MrStatus> {
    let list = list
        .as_ref()
        .ok_or_else(|| fail(MrStatus::NullPointer, "null phrase list"))?;
    list.phrases.get(index).ok_or_else(|| {
        fail(
            MrStatus::OutOfRange,
            format!("phrase {index} of {}", list.phrases.len()),
        )
    })
}

fn into_string(s: String, out: *mut *mut c_char) -> MrStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            MrStatus::Ok
        }
        Err(_) => fail(MrStatus::Reduction, "output contains a nul byte"),
    }
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn mr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parse a lead-sheet JSON document of `len` bytes.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mr_phrase_list_from_json(
    data: *const u8,
    len: usize,
    out: *mut *mut MrPhraseList,
) -> MrStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return fail(MrStatus::NullPointer, "null argument");
        }
        let bytes = std::slice::from_raw_parts(data, len);
        match parse_leadsheet(bytes) {
            Ok(phrases) => {
                *out = Box::into_raw(Box::new(MrPhraseList { phrases }));
                MrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of phrases; 0 for a null handle.
///
/// # Safety
/// `list` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mr_phrase_list_len(list: *const MrPhraseList) -> usize {
    list.as_ref().map_or(0, |l| l.phrases.len())
}

/// # Safety
/// `list` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mr_phrase_list_free(list: *mut MrPhraseList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Reduce phrase `index`. `cost_json` may be null for the default cost model.
///
/// # Safety
/// `list` must be a live handle, `cost_json` null or a C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_reduce(
    list: *const MrPhraseList,
    index: usize,
    cost_json: *const c_char,
    seed: u64,
    out: *mut *mut MrMelody,
) -> MrStatus {
    guard(|| {
        if out.is_null() {
            return fail(MrStatus::NullPointer, "null output");
        }
        let run = || -> Result<MrMelody, MrStatus> {
            let phrase = phrase_at(list, index)?;
            let cfg = cost_config(optional_str(cost_json)?)?;
            let policy = OmissionPolicy {
                rng_seed: seed,
                ..Default::default()
            };
            let melody = reduce_phrase(phrase, &cfg, &policy).map_err(from_error)?;
            Ok(MrMelody {
                phrase: phrase.clone(),
                melody,
            })
        };
        match run() {
            Ok(m) => {
                *out = Box::into_raw(Box::new(m));
                MrStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Half-note downsampling baseline of phrase `index`.
///
/// # Safety
/// `list` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_ds_obs(
    list: *const MrPhraseList,
    index: usize,
    out: *mut *mut MrMelody,
) -> MrStatus {
    guard(|| {
        if out.is_null() {
            return fail(MrStatus::NullPointer, "null output");
        }
        let phrase = match phrase_at(list, index) {
            Ok(p) => p,
            Err(s) => return s,
        };
        if let Err(e) = ensure_valid(phrase) {
            return from_error(e);
        }
        *out = Box::into_raw(Box::new(MrMelody {
            phrase: phrase.clone(),
            melody: ds_obs(phrase, &DsObsOptions::default()),
        }));
        MrStatus::Ok
    })
}

/// Least-cost path of phrase `index`. Writes up to `capacity` node indices to
/// `nodes`, the full node count to `len_out` and the path cost to `cost_out`.
/// Returns `BufferTooSmall` (with `len_out` set) when `capacity` is short.
///
/// # Safety
/// `nodes` must have room for `capacity` entries; `len_out` and `cost_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mr_path(
    list: *const MrPhraseList,
    index: usize,
    cost_json: *const c_char,
    nodes: *mut usize,
    capacity: usize,
    len_out: *mut usize,
    cost_out: *mut f64,
) -> MrStatus {
    guard(|| {
        if len_out.is_null() || cost_out.is_null() || (nodes.is_null() && capacity > 0) {
            return fail(MrStatus::NullPointer, "null output");
        }
        let run = || -> Result<_, MrStatus> {
            let phrase = phrase_at(list, index)?;
            let cfg = cost_config(optional_str(cost_json)?)?;
            ensure_valid(phrase).map_err(from_error)?;
            let membership = detect_anticipations(phrase, &AnticipationConfig::default());
            let graph = build_graph(phrase, &membership, &cfg).map_err(from_error)?;
            Ok(shortest_path(&graph))
        };
        let path = match run() {
            Ok(p) => p,
            Err(s) => return s,
        };
        *len_out = path.nodes.len();
        *cost_out = path.total_cost;
        if path.nodes.len() > capacity {
            return fail(
                MrStatus::BufferTooSmall,
                format!(
                    "path has {} nodes, buffer holds {capacity}",
                    path.nodes.len()
                ),
            );
        }
        ptr::copy_nonoverlapping(path.nodes.as_ptr(), nodes, path.nodes.len());
        MrStatus::Ok
    })
}

/// # Safety
/// `melody` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mr_melody_len(melody: *const MrMelody) -> usize {
    melody.as_ref().map_or(0, |m| m.melody.len())
}

/// # Safety
/// `melody` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_melody_note_at(
    melody: *const MrMelody,
    index: usize,
    out: *mut MrNote,
) -> MrStatus {
    guard(|| {
        let (Some(m), false) = (melody.as_ref(), out.is_null()) else {
            return fail(MrStatus::NullPointer, "null argument");
        };
        let Some(n) = m.melody.notes.get(index) else {
            return fail(
                MrStatus::OutOfRange,
                format!("note {index} of {}", m.melody.len()),
            );
        };
        *out = MrNote {
            onset_num: *n.onset.numer(),
            onset_den: *n.onset.denom(),
            duration_num: *n.duration.numer(),
            duration_den: *n.duration.denom(),
            pitch: n.pitch,
            tie_to_next: n.tie_to_next,
        };
        MrStatus::Ok
    })
}

/// Reduction as a lead-sheet JSON document; free the result with [`mr_string_free`].
///
/// # Safety
/// `melody` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_melody_to_json(
    melody: *const MrMelody,
    out: *mut *mut c_char,
) -> MrStatus {
    guard(|| {
        let (Some(m), false) = (melody.as_ref(), out.is_null()) else {
            return fail(MrStatus::NullPointer, "null argument");
        };
        let doc = melreduce::export::reduction_document(&m.phrase, &m.melody);
        into_string(
            serde_json::to_string(&doc).expect("document serializes"),
            out,
        )
    })
}

/// # Safety
/// `melody` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mr_melody_free(melody: *mut MrMelody) {
    if !melody.is_null() {
        drop(Box::from_raw(melody));
    }
}

/// Default cost model as JSON; free the result with [`mr_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mr_cost_config_default(out: *mut *mut c_char) -> MrStatus {
    guard(|| {
        if out.is_null() {
            return fail(MrStatus::NullPointer, "null output");
        }
        into_string(
            serde_json::to_string(&CostConfig::default()).expect("config serializes"),
            out,
        )
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
