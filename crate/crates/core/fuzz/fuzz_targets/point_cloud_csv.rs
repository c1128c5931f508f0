#![no_main]

use libfuzzer_sys::fuzz_target;
use rupture_core::gmt::{parse_point_cloud, write_point_cloud};

fuzz_target!(|data: &[u8]| {
    if let Ok(mu) = parse_point_cloud(data) {
        let mut out = vec![];
        write_point_cloud(&mu, &mut out).unwrap();
        let back = parse_point_cloud(out.as_slice()).unwrap();
        assert_eq!(back.points(), mu.points());
        assert_eq!(back.weights(), mu.weights());
    }
});
