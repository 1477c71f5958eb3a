#![no_main]

use cropgym::wire::{decode, encode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(msg) = decode(line) {
        // Anything we accept must survive a round trip through our own encoder.
        let again = decode(&encode(&msg)).expect("re-encoded message must decode");
        assert_eq!(again.type_name(), msg.type_name());
    }
});
