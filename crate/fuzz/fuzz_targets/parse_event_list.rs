#![no_main]

use hfgt::ingest::parse_event_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(list) = parse_event_list(data) {
        assert!(list.rows.windows(2).all(|w| w[0].t_start <= w[1].t_start));
    }
});
