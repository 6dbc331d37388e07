#![no_main]

//! XML document and event list separated by a NUL byte.

use hfgt::export::export_bundle;
use hfgt::ingest::{parse_event_list, parse_lfes};
use hfgt::petrinet::{export_frames, run_replay, ReplayOptions};
use hfgt::{HfgtBundle, HfgtOptions, SystemModel};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let (xml, events) = match data.iter().position(|&b| b == 0) {
        Some(i) => (&data[..i], &data[i + 1..]),
        None => (data, &b"idxToken,tStart,idxResource,idxProcess\n"[..]),
    };
    let Ok(raw) = parse_lfes(xml) else { return };
    let Ok(model) = SystemModel::build(raw) else { return };
    // keep the dense-free sparse structures small enough for the fuzzer's memory limit
    if model.catalog.num_processes() * model.resources.num_resources() > 20_000 {
        return;
    }
    let opts = HfgtOptions::default();
    let Ok(bundle) = HfgtBundle::compute(&model, &opts) else { return };
    let _ = export_bundle(&model, &bundle, &opts);
    let Ok(list) = parse_event_list(events) else { return };
    if let Ok((net, mapped)) = run_replay(&model, &bundle, &list, &ReplayOptions::default()) {
        let _ = export_frames(&model.raw.name, &model, &net, &mapped);
    }
});
