#![no_main]

use libfuzzer_sys::fuzz_target;
use rupture_core::field::{decode_field, encode_field};

fuzz_target!(|data: &[u8]| {
    if let Ok(u) = decode_field(data) {
        // anything that decodes re-encodes to the same bytes
        assert_eq!(encode_field(&u), data);
    }
});
