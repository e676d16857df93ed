use std::ffi::{CStr, CString};
use std::ptr;

use melreduce_ffi::*;

const CDC: &str = r#"{
  "notes": [
    {"onset": 0, "pitch": 60, "duration": 1},
    {"onset": 1, "pitch": 62, "duration": 1},
    {"onset": 2, "pitch": 60, "duration": 1}
  ],
  "chords": [{"onset": 0, "duration": 4, "symbol": "C"}]
}"#;

fn load(doc: &str) -> *mut MrPhraseList {
    let mut list = ptr::null_mut();
    let s = unsafe { mr_phrase_list_from_json(doc.as_ptr(), doc.len(), &mut list) };
    assert_eq!(s, MrStatus::Ok);
    list
}

fn last_error() -> String {
    let p = mr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn reduce_and_read_notes() {
    let list = load(CDC);
    unsafe {
        assert_eq!(mr_phrase_list_len(list), 1);
        let mut m = ptr::null_mut();
        assert_eq!(mr_reduce(list, 0, ptr::null(), 0, &mut m), MrStatus::Ok);
        assert_eq!(mr_melody_len(m), 3);
        let mut durations = vec![];
        for i in 0..3 {
            let mut n = MrNote::default();
            assert_eq!(mr_melody_note_at(m, i, &mut n), MrStatus::Ok);
            durations.push((n.pitch, n.duration_num, n.duration_den));
        }
        assert_eq!(durations, vec![(60, 2, 1), (62, 1, 1), (60, 1, 1)]);

        let mut n = MrNote::default();
        assert_eq!(mr_melody_note_at(m, 3, &mut n), MrStatus::OutOfRange);

        let mut json = ptr::null_mut();
        assert_eq!(mr_melody_to_json(m, &mut json), MrStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"tie_to_next\":false"));
        mr_string_free(json);

        mr_melody_free(m);
        mr_phrase_list_free(list);
    }
}

#[test]
fn path_matches_worked_example() {
    let list = load(CDC);
    unsafe {
        let mut nodes = [0usize; 4];
        let (mut len, mut cost) = (0usize, 0f64);
        let s = mr_path(
            list,
            0,
            ptr::null(),
            nodes.as_mut_ptr(),
            4,
            &mut len,
            &mut cost,
        );
        assert_eq!(s, MrStatus::Ok);
        assert_eq!(&nodes[..len], &[0, 1, 2]);
        assert!((cost - 2.22918).abs() < 1e-4);

        let s = mr_path(
            list,
            0,
            ptr::null(),
            nodes.as_mut_ptr(),
            2,
            &mut len,
            &mut cost,
        );
        assert_eq!(s, MrStatus::BufferTooSmall);
        assert_eq!(len, 3);
        mr_phrase_list_free(list);
    }
}

#[test]
fn cost_config_roundtrip_and_override() {
    unsafe {
        let mut json = ptr::null_mut();
        assert_eq!(mr_cost_config_default(&mut json), MrStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        mr_string_free(json);
        assert!(text.contains("\"eta\":1.6"));

        let list = load(CDC);
        let coarse = CString::new(r#"{"eta": 0.5}"#).unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(mr_reduce(list, 0, coarse.as_ptr(), 0, &mut m), MrStatus::Ok);
        assert_eq!(mr_melody_len(m), 1);
        mr_melody_free(m);

        let bad = CString::new(r#"{"eta": -1}"#).unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(
            mr_reduce(list, 0, bad.as_ptr(), 0, &mut m),
            MrStatus::Config
        );
        assert!(m.is_null());
        assert!(last_error().contains("eta"));
        mr_phrase_list_free(list);
    }
}

#[test]
fn ds_obs_half_notes() {
    let list = load(CDC);
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(mr_ds_obs(list, 0, &mut m), MrStatus::Ok);
        assert_eq!(mr_melody_len(m), 2);
        let mut n = MrNote::default();
        mr_melody_note_at(m, 0, &mut n);
        assert_eq!((n.pitch, n.duration_num), (60, 2));
        mr_melody_free(m);
        mr_phrase_list_free(list);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut list = ptr::null_mut();
        let doc = b"{\"notes\": [";
        assert_eq!(
            mr_phrase_list_from_json(doc.as_ptr(), doc.len(), &mut list),
            MrStatus::Parse
        );
        assert!(list.is_null());
        assert!(last_error().contains("byte"));

        assert_eq!(
            mr_phrase_list_from_json(ptr::null(), 0, &mut list),
            MrStatus::NullPointer
        );
        let mut m = ptr::null_mut();
        assert_eq!(
            mr_reduce(ptr::null(), 0, ptr::null(), 0, &mut m),
            MrStatus::NullPointer
        );
        assert_eq!(mr_phrase_list_len(ptr::null()), 0);
        assert_eq!(mr_melody_len(ptr::null()), 0);
        mr_phrase_list_free(ptr::null_mut());
        mr_melody_free(ptr::null_mut());
        mr_string_free(ptr::null_mut());

        let list = load(CDC);
        assert_eq!(
            mr_reduce(list, 5, ptr::null(), 0, &mut m),
            MrStatus::OutOfRange
        );
        assert!(last_error().contains("phrase 5"));
        assert_eq!(mr_reduce(list, 0, ptr::null(), 0, &mut m), MrStatus::Ok);
        assert!(mr_last_error_message().is_null());
        mr_melody_free(m);
        mr_phrase_list_free(list);
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/melreduce.h"))
            .unwrap();
    for name in [
        "mr_last_error_message",
        "mr_phrase_list_from_json",
        "mr_phrase_list_len",
        "mr_phrase_list_free",
        "mr_reduce",
        "mr_ds_obs",
        "mr_path",
        "mr_melody_len",
        "mr_melody_note_at",
        "mr_melody_to_json",
        "mr_melody_free",
        "mr_cost_config_default",
        "mr_string_free",
        "MR_STATUS_OK",
        "typedef struct MrPhraseList MrPhraseList;",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
