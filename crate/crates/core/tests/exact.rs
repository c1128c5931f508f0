use proptest::prelude::*;
use rupture_core::exact::*;
use rupture_core::field::{laplacian, Grid, ScalarField};

fn residual_sup(u: &ScalarField, p: f64, lo: f64, hi: f64) -> f64 {
    let lap = laplacian(u).unwrap();
    let g = u.grid();
    (0..g.len())
        .filter_map(|c| {
            let x = g.center_of(c);
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            (r >= lo && r <= hi).then(|| (lap.values()[c] - u.values()[c].powf(-p)).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn planar_solution_values() {
    let sol = HomogeneousSolution::radial(2, 3.0).unwrap();
    assert_eq!(sol.alpha(), 0.5);
    assert!((sol.value(&[1.0, 0.0]) - 1.414214).abs() < 1e-6);
    assert!((sol.value(&[0.0, -1.0]) - 2f64.sqrt()).abs() < 1e-15);
    let g = Grid::symmetric(2, 0.125, 17).unwrap();
    let u = homogeneous_field(&sol, &g).unwrap();
    assert_eq!(u.at(&[8, 8]), 0.0);
    // n = 2 ⇒ coeff = α^{−α}
    for p in [1.5, 3.0, 7.0] {
        let s = HomogeneousSolution::radial(2, p).unwrap();
        assert!((s.coeff() - s.alpha().powf(-s.alpha())).abs() < 1e-14);
    }
}

#[test]
fn spatial_solution_has_second_order_residual() {
    let sol = HomogeneousSolution::radial(3, 3.0).unwrap();
    assert!((sol.coeff() - 0.75f64.powf(-0.25)).abs() < 1e-15);
    assert!((sol.coeff() - 1.074570).abs() < 1e-6);
    let res: Vec<f64> = [49, 97]
        .iter()
        .map(|&n| {
            let g = Grid::symmetric(3, 2.0 / (n - 1) as f64, n).unwrap();
            residual_sup(&homogeneous_field(&sol, &g).unwrap(), 3.0, 0.25, 0.75)
        })
        .collect();
    assert!(res[1] < 0.05, "{res:?}");
    let ratio = res[0] / res[1];
    assert!((3.0..5.0).contains(&ratio), "{ratio}");
}

#[test]
fn rejects_invalid_parameters() {
    assert!(matches!(HomogeneousSolution::radial(2, 1.0), Err(ExactError::InvalidExponent(_))));
    assert!(matches!(ode_profile(0.5, 0.1, 1.0), Err(ExactError::InvalidExponent(_))));
    assert!(matches!(ode_profile(3.0, 1.0, 0.5), Err(ExactError::InvalidRange { .. })));
    let sol = HomogeneousSolution::radial(2, 3.0).unwrap();
    assert!(homogeneous_field(&sol, &Grid::symmetric(3, 0.1, 5).unwrap()).is_err());
}

#[test]
fn ode_profile_starts_flat_at_eps() {
    let sol = ode_profile(3.0, 0.1, 20.0).unwrap();
    assert_eq!(sol.v(0.1), Some(0.0));
    assert_eq!(sol.u(0.0), Some(0.1));
    assert_eq!(sol.du(0.0), Some(0.0));
    assert_eq!(sol.lambda(), 1.0);
}

#[test]
fn ode_profile_satisfies_its_first_integral() {
    let (p, eps) = (3.0, 0.1);
    let sol = ode_profile(p, eps, 20.0).unwrap();
    assert!(sol.r_max() > 1.0);
    let lambda = 2.0 / (p - 1.0);
    for i in 0..=400 {
        let r = i as f64 / 400.0;
        let u = sol.u(r).unwrap();
        let du = sol.du(r).unwrap();
        let rhs = lambda * (eps.powf(1.0 - p) - u.powf(1.0 - p));
        assert!((du * du - rhs).abs() <= 1e-6 * rhs.max(1.0), "r={r}: {} vs {rhs}", du * du);
    }
}

#[test]
fn ode_profile_is_even_convex_and_solves_the_equation() {
    let (p, eps) = (3.0, 0.1);
    let sol = ode_profile(p, eps, 20.0).unwrap();
    let h = 1e-4;
    let mut prev = eps;
    for i in 1..900 {
        let r = i as f64 / 1000.0;
        let u = sol.u(r).unwrap();
        assert_eq!(u, sol.u(-r).unwrap());
        assert!(u > prev);
        prev = u;
        let d2 = (sol.u(r + h).unwrap() - 2.0 * u + sol.u(r - h).unwrap()) / (h * h);
        assert!(d2 > 0.0);
        assert!((d2 - u.powf(-p)).abs() < 1e-3 * u.powf(-p), "r={r}");
    }
}

#[test]
fn ode_field_is_constant_across_the_axis() {
    let sol = ode_profile(3.0, 0.2, 10.0).unwrap();
    let g = Grid::symmetric(2, 0.1, 11).unwrap();
    let u = ode_field(&sol, &g, 0).unwrap();
    for i in 0..11 {
        let col: Vec<f64> = (0..11).map(|j| u.at(&[i, j])).collect();
        assert!(col.iter().all(|&v| v == col[0]));
    }
    assert_eq!(u.at(&[5, 3]), 0.2);
}

fn interp_error(u: &ScalarField, sol: &HomogeneousSolution, x: &[f64]) -> f64 {
    (u.interpolate(x).unwrap() - sol.value(x)).abs()
}

#[test]
fn homogeneous_field_is_scale_invariant() {
    let sol = HomogeneousSolution::radial(2, 3.0).unwrap();
    let u = homogeneous_field(&sol, &Grid::symmetric(2, 1.0 / 256.0, 513).unwrap()).unwrap();
    let a = sol.alpha();
    for r in [0.125, 0.25, 0.5] {
        for &(y0, y1) in &[(0.3, 0.7), (-0.9, 0.1), (0.55, -0.55)] {
            let y = [y0, y1];
            let ry = [r * y0, r * y1];
            let scaled = u.interpolate(&ry).unwrap() / r.powf(a);
            let tol = 1e-10 + interp_error(&u, &sol, &y) + interp_error(&u, &sol, &ry) / r.powf(a);
            assert!((scaled - u.interpolate(&y).unwrap()).abs() <= tol);
        }
    }
}

#[test]
fn cylindrical_field_is_invariant_along_its_axis() {
    let s = 0.5f64.sqrt();
    let sol = HomogeneousSolution::cylindrical(3, 3.0, vec![vec![s, s, 0.0]]).unwrap();
    // transverse dimension 2 gives the planar coefficient
    assert!((sol.coeff() - 2f64.sqrt()).abs() < 1e-14);
    let u = homogeneous_field(&sol, &Grid::symmetric(3, 1.0 / 32.0, 65).unwrap()).unwrap();
    for t in [-0.3, 0.1, 0.4] {
        for x in [[0.2, -0.1, 0.3], [-0.25, 0.05, -0.4], [0.0, 0.3, 0.1]] {
            let xt = [x[0] + t * s, x[1] + t * s, x[2]];
            let tol = 1e-10 + interp_error(&u, &sol, &x) + interp_error(&u, &sol, &xt);
            assert!((u.interpolate(&x).unwrap() - u.interpolate(&xt).unwrap()).abs() <= tol);
            assert!((sol.value(&x) - sol.value(&xt)).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn coefficient_solves_the_radial_equation(p in 1.1f64..10.0, n in 2usize..5, r in 0.05f64..3.0) {
        let sol = HomogeneousSolution::radial(n, p).unwrap();
        let (a, c) = (sol.alpha(), sol.coeff());
        prop_assert!(a > 0.0 && a < 1.0);
        // Δ(c r^α) = c α(α+n−2) r^{α−2}
        let lap = c * a * (a + n as f64 - 2.0) * r.powf(a - 2.0);
        let rhs = (c * r.powf(a)).powf(-p);
        prop_assert!((lap - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn value_is_exactly_homogeneous(p in 1.1f64..10.0, lam in 0.01f64..100.0, x0 in -1.0f64..1.0, x1 in -1.0f64..1.0) {
        let sol = HomogeneousSolution::radial(2, p).unwrap();
        let lhs = sol.value(&[lam * x0, lam * x1]);
        let rhs = lam.powf(sol.alpha()) * sol.value(&[x0, x1]);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }
}
