#![no_main]

use hfgt::ingest::{parse_lfes, validate_raw};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(raw) = parse_lfes(data) {
        let _ = validate_raw(&raw);
        let again = parse_lfes(raw.to_xml().as_bytes()).expect("serialized document reparses");
        assert_eq!(raw, again);
    }
});
