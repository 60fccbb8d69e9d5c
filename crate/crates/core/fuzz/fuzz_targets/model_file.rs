#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(file) = epigp::gp::ModelFile::from_toml_str(src) {
        if let Ok(model) = file.to_model() {
            let _ = model.predict_mean(&[[0.0, 0.0]]);
        }
    }
});
