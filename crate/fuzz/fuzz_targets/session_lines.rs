#![no_main]

use cropgym::env::{TaskConfig, TaskMode};
use cropgym::wire::{decode, Message, Session};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut session = Session::new(TaskConfig::new(TaskMode::Mixed));
    for line in text.lines().take(64) {
        let reply = session.handle_line(line);
        assert!(!matches!(reply, Message::Init(_) | Message::Step(_)));
        decode(&cropgym::wire::encode(&reply)).expect("server replies must decode");
    }
});
