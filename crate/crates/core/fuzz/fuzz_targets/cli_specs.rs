#![no_main]

use libfuzzer_sys::fuzz_target;
use rupture_lab::spec::{parse_ids, parse_point, parse_radii};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_radii(s) {
        assert!(r.iter().all(|v| *v > 0.0 && v.is_finite()));
        assert!(r.windows(2).all(|w| w[0] <= w[1]));
    }
    if let Ok(x) = parse_point(s) {
        assert!(x.iter().all(|v| v.is_finite()));
    }
    let _ = parse_ids(s);
});
