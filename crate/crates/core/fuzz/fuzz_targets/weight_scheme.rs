#![no_main]

use epigp::gp::DrawKind;
use epigp::spatial::WeightScheme;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let _ = src.parse::<DrawKind>();
    if let Ok(s) = src.parse::<WeightScheme>() {
        let _ = s.to_string().parse::<WeightScheme>().expect("display output parses");
    }
});
