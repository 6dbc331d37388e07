#![no_main]

use hfgt::export::{matrix_market, parse_matrix_market};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_matrix_market(text) {
        assert_eq!(parse_matrix_market(&matrix_market(&m)).unwrap(), m);
    }
});
