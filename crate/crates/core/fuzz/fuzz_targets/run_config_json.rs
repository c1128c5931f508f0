#![no_main]

use libfuzzer_sys::fuzz_target;
use rupture_lab::config::{parse_evolve_config, parse_solve_config};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_solve_config(s) {
        let again = parse_solve_config(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }
    let _ = parse_evolve_config(s);
});

