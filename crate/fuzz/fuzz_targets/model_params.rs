#![no_main]

use cropgym::soilcrop::ModelParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = ModelParams::from_toml_str(text) {
        let back = ModelParams::from_toml_str(&p.to_toml_string()).expect("serialized params reload");
        assert_eq!(back, p);
    }
});
