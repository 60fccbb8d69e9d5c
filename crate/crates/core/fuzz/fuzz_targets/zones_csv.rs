#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = epigp::synthpop::read_zones_csv(Path::new("zones.csv"), data);
});
