#![no_main]

use cropgym::weather::{WeatherParams, WeatherState};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(params) = WeatherParams::from_toml_str(text) else {
        return;
    };
    let Ok(mut state) = WeatherState::init(params, 0, 1) else {
        return;
    };
    for _ in 0..400 {
        let d = state.generate_day();
        assert!(d.rain >= 0.0 && d.srad >= 0.0 && d.tmax >= d.tmin);
    }
});
