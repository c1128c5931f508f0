//! Replays the checked-in fuzz seeds through the CLI parsers.

use std::path::PathBuf;

use rupture_lab::config::{parse_evolve_config, parse_solve_config};
use rupture_lab::spec::{parse_ids, parse_point, parse_radii};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn spec_seeds() {
    let parsed: Vec<(String, bool, bool, bool)> = seeds("cli_specs")
        .into_iter()
        .map(|(name, s)| (name, parse_radii(&s).is_ok(), parse_point(&s).is_ok(), parse_ids(&s).is_ok()))
        .collect();
    let get = |n: &str| parsed.iter().find(|p| p.0 == n).unwrap().clone();
    assert!(get("radii").1 && get("radii_single").1);
    assert!(!get("radii_bad").1 && !get("empty").1);
    assert!(get("point").2 && get("point_3d").2 && !get("radii").2);
    assert!(get("ids").3);
}

#[test]
fn config_seeds() {
    for (name, s) in seeds("run_config_json") {
        let solve = parse_solve_config(&s);
        let evolve = parse_evolve_config(&s);
        match name.as_str() {
            "evolve" => assert!(evolve.is_ok() && solve.is_err()),
            "unknown_key" => assert!(solve.is_err() && evolve.is_err()),
            _ => {
                let cfg = solve.unwrap_or_else(|e| panic!("{name}: {e}"));
                assert_eq!(parse_solve_config(&serde_json::to_string(&cfg).unwrap()).unwrap(), cfg);
            }
        }
    }
}
