#![no_main]
use libfuzzer_sys::fuzz_target;
use macro_ale::driver::{parse_config, Preset};

fuzz_target!(|data: &str| {
    for preset in [None, Some(Preset::Paper1), Some(Preset::Paper2)] {
        if let Ok(cfg) = parse_config(data, preset) {
            // Anything accepted must also pass validation on its own.
            cfg.validate().unwrap();
            cfg.level_set().unwrap();
            assert!(cfg.end_time() > 0.0);
        }
    }
});
