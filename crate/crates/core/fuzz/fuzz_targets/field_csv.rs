#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = epigp::spatial::SpatialField::from_csv(Path::new("fuzz.csv"), data);
});
