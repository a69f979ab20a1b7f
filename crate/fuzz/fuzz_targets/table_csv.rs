#![no_main]

use ep_threshold::profiles::Table;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = Table::parse_csv(text) {
        let r = t.abscissae();
        let (lo, hi) = (r[0], r[r.len() - 1]);
        for x in [lo, 0.5 * (lo + hi), hi, 2.0 * hi + 1.0] {
            assert!(!t.eval(x).is_nan());
        }
    }
});
