#![no_main]

use cropgym::wire::Endpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ep) = text.parse::<Endpoint>() {
        let again: Endpoint = ep.to_string().parse().expect("displayed endpoint reparses");
        assert_eq!(again, ep);
    }
});
