#![no_main]
use libfuzzer_sys::fuzz_target;
use tsallis_mono::cli::parse_campaign_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_campaign_config(text) {
            assert!(cfg.samples >= 1);
            assert!(cfg.validate().is_ok());
        }
    }
});
