#![no_main]
use libfuzzer_sys::fuzz_target;
use tsallis_mono::states::{parse_state_bytes, StateInput, StateJson};

fuzz_target!(|data: &[u8]| {
    if let Ok(input) = parse_state_bytes(data) {
        // Accepted states must survive a round trip.
        let json = match &input {
            StateInput::Pure(s) => StateJson::from_pure(s),
            StateInput::Mixed(m) => StateJson::from_density(m),
        };
        let text = serde_json::to_string(&json).unwrap();
        assert!(parse_state_bytes(text.as_bytes()).is_ok());
    }
});
