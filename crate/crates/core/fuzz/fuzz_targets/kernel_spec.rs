#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(k) = epigp::gp::parse_kernel(src) {
        // Display output must parse back to the same tree shape.
        let again = epigp::gp::parse_kernel(&k.to_string()).expect("display output parses");
        assert_eq!(k.n_params(), again.n_params());
    }
});
