#![no_main]

use libfuzzer_sys::fuzz_target;
use thermoplate_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::from_text(text) {
        let back = RunConfig::from_text(&cfg.to_text()).expect("serialized config must parse");
        assert_eq!(back, cfg);
    }
});
