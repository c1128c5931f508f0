use std::f64::consts::PI;

use proptest::prelude::*;
use rupture_core::field::*;

fn exact_2d(cells: usize, half_width: f64) -> ScalarField {
    let g = Grid::symmetric(2, 2.0 * half_width / (cells - 1) as f64, cells).unwrap();
    ScalarField::from_fn(g, "u", |x| 2f64.sqrt() * (x[0] * x[0] + x[1] * x[1]).sqrt().sqrt())
}

/// The cutoff written out from its defining conditions.
fn phi(t: f64) -> f64 {
    if t <= 8.0 {
        10.0 - t
    } else if t < 10.0 {
        let s = 10.0 - t;
        1.5 * s.powi(3) - s.powi(4) + 0.1875 * s.powi(5)
    } else {
        0.0
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m).map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h)).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[test]
fn zero_field_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.rfld");
    let u = ScalarField::constant(Grid::symmetric(2, 0.25, 4).unwrap(), 0.0, "zero");
    save_field(&u, &path).unwrap();
    let v = load_field(&path).unwrap();
    assert_eq!(u.grid(), v.grid());
    assert_eq!(u.values(), v.values());
}

#[test]
fn bad_magic_is_rejected() {
    let u = ScalarField::constant(Grid::symmetric(2, 0.25, 4).unwrap(), 1.0, "one");
    let mut bytes = encode_field(&u);
    bytes[..4].copy_from_slice(b"XXXX");
    assert!(matches!(decode_field(&bytes), Err(RfldError::BadMagic(_))));
}

#[test]
fn encoded_size_matches_the_format() {
    let u = ScalarField::constant(Grid::symmetric(2, 1.0 / 256.0, 512).unwrap(), 0.5, "u");
    // magic, version, n, shape[2], origin[2], spacing[2]
    let header = 4 + 4 + 4 + 2 * 4 + 2 * 8 + 2 * 8;
    assert_eq!(rfld::header_len(2), header);
    assert_eq!(encode_field(&u).len(), header + 512 * 512 * 8);
}

#[test]
fn decode_errors_have_distinct_codes() {
    let u = ScalarField::constant(Grid::symmetric(2, 0.5, 3).unwrap(), 1.0, "u");
    let bytes = encode_field(&u);
    let mut magic = bytes.clone();
    magic[0] = b'Y';
    let truncated = &bytes[..bytes.len() - 3];
    let mut extra = bytes.clone();
    extra.extend_from_slice(&[0; 8]);
    let codes = [
        decode_field(&magic).unwrap_err().code(),
        decode_field(truncated).unwrap_err().code(),
        decode_field(&extra).unwrap_err().code(),
    ];
    assert!(codes[0] != codes[1] && codes[1] != codes[2] && codes[0] != codes[2], "{codes:?}");
}

#[test]
fn gradient_of_a_coordinate_and_a_constant() {
    let g = Grid::cube(2, -1.0, 1.0, 32).unwrap();
    let u = ScalarField::from_fn(g.clone(), "x", |x| x[0]);
    let du = gradient(&u).unwrap();
    for c in 0..g.len() {
        assert!((du.component(c, 0) - 1.0).abs() < 1e-12);
        assert!(du.component(c, 1).abs() < 1e-12);
    }
    let k = gradient(&ScalarField::constant(g.clone(), 7.0, "k")).unwrap();
    assert!((0..g.len()).all(|c| k.norm_sq(c) == 0.0));
}

#[test]
fn gradient_of_the_exact_solution() {
    let u = exact_2d(513, 1.0);
    let du = gradient(&u).unwrap();
    let c = u.grid().flat_index(&u.grid().nearest_index(&[0.25, 0.0]));
    // |∇u|² = 1/(2|x|)
    assert!((du.norm_sq(c) - 2.0).abs() < 0.04, "{}", du.norm_sq(c));
}

#[test]
fn laplacian_examples() {
    let g = Grid::symmetric(2, 1.0 / 16.0, 33).unwrap();
    let q = laplacian(&ScalarField::from_fn(g.clone(), "q", |x| x[0] * x[0] + x[1] * x[1])).unwrap();
    let l = laplacian(&ScalarField::from_fn(g.clone(), "l", |x| 3.0 * x[0] - x[1] + 2.0)).unwrap();
    let mut idx = vec![0; 2];
    for c in 0..g.len() {
        g.unravel(c, &mut idx);
        if g.is_boundary(&idx) {
            assert!(q.values()[c].is_nan() && l.values()[c].is_nan());
        } else {
            assert!((q.values()[c] - 4.0).abs() < 1e-10);
            assert!(l.values()[c].abs() < 1e-10);
        }
    }
}

#[test]
fn laplacian_of_the_exact_solution_matches_the_nonlinearity() {
    let mut errs = vec![];
    for cells in [257, 513] {
        let u = exact_2d(cells, 1.0);
        let lap = laplacian(&u).unwrap();
        let c = u.grid().flat_index(&u.grid().nearest_index(&[0.25, 0.0]));
        let target = u.values()[c].powi(-3);
        assert!((target - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        errs.push((lap.values()[c] - target).abs());
    }
    assert!(errs[1] < 2e-3 * 2.0 * 2f64.sqrt(), "{errs:?}");
    let ratio = errs[0] / errs[1];
    assert!((3.0..5.0).contains(&ratio), "{ratio}");
}

#[test]
fn ball_integral_examples() {
    let g = Grid::symmetric(2, 1.0 / 512.0, 1201).unwrap();
    let one = ScalarField::constant(g.clone(), 1.0, "1");
    let unit = BallRegion::new(vec![0.0, 0.0], 1.0);
    let q = ball_integral(&one, &unit, &Indicator).unwrap();
    assert!((q.value - PI).abs() < 0.01 * PI);
    assert!(!q.clipped());

    let r = 0.1;
    let small = BallRegion::new(vec![0.0, 0.0], r);
    let w = WeightFn { support: 10.0, f: phi };
    let got = ball_integral(&one, &small, &w).unwrap().value;
    let oracle = 2.0 * PI * r * r * simpson(|t| t * phi(t * t), 0.0, 10f64.sqrt(), 20_000);
    assert!((got - oracle).abs() < 1e-3 * oracle, "{got} vs {oracle}");

    let zero = ScalarField::constant(g, 0.0, "0");
    assert_eq!(ball_integral(&zero, &unit, &Indicator).unwrap().value, 0.0);
}

#[test]
fn ball_integral_converges_under_refinement() {
    let ball = BallRegion::new(vec![0.1, -0.05], 0.7);
    let exact = {
        // ∫_B (1 + y₁²) with y = x − c: πR² + πR⁴/4 + πR²c₁²
        let (r, c) = (0.7f64, 0.1f64);
        PI * r * r + PI * r.powi(4) / 4.0 + PI * r * r * c * c
    };
    let errs: Vec<f64> = [101, 201, 401]
        .iter()
        .map(|&n| {
            let g = Grid::symmetric(2, 2.0 / (n - 1) as f64, n).unwrap();
            let u = ScalarField::from_fn(g, "g", |x| 1.0 + x[0] * x[0]);
            (ball_integral(&u, &ball, &Indicator).unwrap().value - exact).abs()
        })
        .collect();
    assert!(errs[2] < 0.01, "{errs:?}");
    assert!(errs[2] <= errs[0], "{errs:?}");
}

#[test]
fn distance_transform_examples() {
    let g = Grid::symmetric(2, 0.25, 17).unwrap();
    let origin = g.flat_index(&g.nearest_index(&[0.0, 0.0]));
    let single = Mask::from_fn(g.clone(), |x| x[0] == 0.0 && x[1] == 0.0);
    assert_eq!(single.count(), 1);
    let d = distance_transform(&single).unwrap();
    for c in 0..g.len() {
        let y = g.center_of(c);
        assert!((d.values()[c] - (y[0] * y[0] + y[1] * y[1]).sqrt()).abs() < 1e-12);
    }
    let pair = Mask::from_fn(g.clone(), |x| x[1] == 0.0 && x[0].abs() == 1.0);
    assert_eq!(pair.count(), 2);
    assert!((distance_transform(&pair).unwrap().values()[origin] - 1.0).abs() < 1e-12);
    assert!(matches!(distance_transform(&Mask::from_fn(g, |_| false)), Err(FieldError::EmptyMask)));
}

fn brute_force(mask: &Mask) -> Vec<f64> {
    let g = mask.grid();
    let set: Vec<Vec<f64>> = mask.set_cells().map(|c| g.center_of(c)).collect();
    (0..g.len())
        .map(|c| {
            let y = g.center_of(c);
            set.iter().map(|s| ((y[0] - s[0]).powi(2) + (y[1] - s[1]).powi(2)).sqrt()).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[test]
fn sublevel_measure_examples() {
    let u = exact_2d(1025, 1.0);
    let unit = BallRegion::new(vec![0.0, 0.0], 1.0);
    let m = sublevel_measure(&u, 0.5, &unit);
    assert!((m - PI / 64.0).abs() < 0.02 * PI / 64.0, "{m}");
    let one = ScalarField::constant(u.grid().clone(), 1.0, "1");
    assert_eq!(sublevel_measure(&one, 0.5, &unit), 0.0);
    let all = sublevel_measure(&one, f64::INFINITY, &unit);
    let cells = (0..u.grid().len()).filter(|&c| unit.contains(&u.grid().center_of(c))).count();
    assert_eq!(all, cells as f64 * u.grid().cell_volume());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn distance_transform_matches_brute_force(bits in proptest::collection::vec(any::<u8>(), 64 * 64), density in 1u8..64) {
        let g = Grid::symmetric(2, 1.0 / 32.0, 64).unwrap();
        let mut values: Vec<bool> = bits.iter().map(|&b| b < density).collect();
        values[0] = true;
        let mask = Mask::new(g, values).unwrap();
        let fast = distance_transform(&mask).unwrap();
        for (a, b) in fast.values().iter().zip(brute_force(&mask)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn round_trip_is_bit_exact(values in proptest::collection::vec(-1e300f64..1e300, 3 * 5), h in 1e-6f64..10.0) {
        let g = Grid::new(vec![3, 5], vec![-1.5, 2.0], vec![h, h]).unwrap();
        let u = ScalarField::new(g, values, "v").unwrap();
        let back = decode_field(&encode_field(&u)).unwrap();
        prop_assert_eq!(back.grid(), u.grid());
        for (a, b) in back.values().iter().zip(u.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn operators_are_exact_on_affine_fields(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
        let g = Grid::cube(2, -1.0, 1.0, 12).unwrap();
        let u = ScalarField::from_fn(g.clone(), "a", |x| a * x[0] + b * x[1] + c);
        let du = gradient(&u).unwrap();
        let lap = laplacian(&u).unwrap();
        for cell in 0..g.len() {
            prop_assert!((du.component(cell, 0) - a).abs() < 1e-10);
            prop_assert!((du.component(cell, 1) - b).abs() < 1e-10);
            let l = lap.values()[cell];
            prop_assert!(l.is_nan() || l.abs() < 1e-9);
        }
    }
}
