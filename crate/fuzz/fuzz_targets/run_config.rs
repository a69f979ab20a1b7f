#![no_main]

use std::path::Path;

use epct::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_toml_str(text, Path::new(".")) {
        let radii = cfg.fan_radii();
        assert!(!radii.is_empty());
        assert!(radii.iter().all(|r| r.is_finite() && *r > 0.0));
        assert!(radii.windows(2).all(|w| w[0] <= w[1]));
    }
});
