#![no_main]

use epigp::synthpop::{parse_zones_geojson, GeoJsonOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    for plate_carree in [false, true] {
        let _ = parse_zones_geojson(src, GeoJsonOptions { plate_carree });
    }
});
