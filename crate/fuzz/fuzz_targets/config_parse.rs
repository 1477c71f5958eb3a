#![no_main]

use cropgym::env::{ConfigOverrides, TaskConfig, TaskMode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = TaskConfig::from_toml_str(text) {
        cfg.validate().expect("parsed configs are validated");
    }
    if let Ok(o) = ConfigOverrides::from_toml_str(text) {
        if let Ok(cfg) = TaskConfig::new(TaskMode::Fertilization).with_overrides(&o) {
            cfg.validate().expect("overridden configs are validated");
        }
    }
});
