#![no_main]

use ep_threshold::spec::ProfileSpec;
use libfuzzer_sys::fuzz_target;

// Accepted specs must survive a Display round trip.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<ProfileSpec>() {
        let again: ProfileSpec = spec.to_string().parse().expect("display output reparses");
        assert_eq!(spec, again);
    }
});
