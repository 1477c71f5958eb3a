#![no_main]

use cropgym::env::{validate_action, RawAction, TaskConfig, TaskMode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(raw) = serde_json::from_slice::<RawAction>(data) else {
        return;
    };
    for task in [TaskMode::Fertilization, TaskMode::Irrigation, TaskMode::Mixed] {
        let cfg = TaskConfig::new(task);
        if let Ok(a) = validate_action(&cfg, &raw) {
            assert!((cfg.bounds.anfer[0]..=cfg.bounds.anfer[1]).contains(&a.anfer));
            assert!((cfg.bounds.amir[0]..=cfg.bounds.amir[1]).contains(&a.amir));
        }
    }
});
