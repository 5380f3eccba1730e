#![no_main]

use libfuzzer_sys::fuzz_target;
use tracefem::io::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::parse(text) {
        cfg.validate().expect("parsed configs are valid");
        let study = cfg.study();
        assert!(!study.stem().is_empty());
        assert_eq!(study.levels, cfg.levels);
    }
    // Single assignments never panic, valid or not.
    for line in text.lines() {
        let _ = RunConfig::default().set_pair(line);
    }
});
