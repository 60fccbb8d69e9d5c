#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;

// Input is zones.csv, places.csv and agents.csv joined by form feeds.
fuzz_target!(|data: &[u8]| {
    let mut parts = data.split(|b| *b == b'\x0c');
    let (Some(z), Some(p), Some(a)) = (parts.next(), parts.next(), parts.next()) else { return };
    let _ = epigp::synthpop::parse_population(
        (Path::new("zones.csv"), z),
        (Path::new("places.csv"), p),
        (Path::new("agents.csv"), a),
    );
});
