#![no_main]

use catalyst_bench::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::parse(text) {
        let again = ExperimentConfig::parse(&config.render()).expect("rendered config parses");
        assert_eq!(again, config);
    }
    for line in text.lines() {
        let _ = ExperimentConfig::default().apply_override(line);
    }
});
