use std::f64::consts::PI;

use rupture_core::exact::{homogeneous_field, ode_field, ode_profile, HomogeneousSolution};
use rupture_core::field::{BallRegion, Grid, Mask, ScalarField};
use rupture_core::solver::*;

fn exact_2d(cells: usize, half_width: f64) -> ScalarField {
    let g = Grid::symmetric(2, 2.0 * half_width / (cells - 1) as f64, cells).unwrap();
    homogeneous_field(&HomogeneousSolution::radial(2, 3.0).unwrap(), &g).unwrap()
}

fn sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn neumann(dt_safety: f64) -> SolverConfig {
    SolverConfig { boundary: Boundary::Neumann, delta_schedule: vec![1e-6], dt_safety, ..SolverConfig::default() }
}

#[test]
fn energy_of_constant_fields() {
    let g = Grid::cube(2, 0.0, 1.0, 32).unwrap();
    let u = ScalarField::constant(g.clone(), 1.0, "u");
    let f = ScalarField::constant(g, 2.0, "f");
    assert!((energy(&u, None, None, 1e-6, 3.0).unwrap() + 0.5).abs() < 1e-12);
    assert!((energy(&u, Some(&f), None, 1e-6, 3.0).unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn energy_density_of_the_exact_solution_cancels() {
    // |∇u|²/2 = u⁻²/2 = 1/(4r); each part integrates to π/4 over B_{1/2}.
    let u = exact_2d(1025, 1.0);
    let ball = BallRegion::new(vec![0.0, 0.0], 0.5);
    let e = energy(&u, None, Some(&ball), 0.75 * u.grid().h().sqrt(), 3.0).unwrap();
    assert!(e.abs() < 0.02 * PI / 4.0, "{e}");
}

#[test]
fn large_constant_data_stays_put() {
    let m = 100.0;
    let g = Grid::symmetric(2, 1.0 / 16.0, 33).unwrap();
    let trace = ScalarField::constant(g.clone(), m, "trace");
    let init = ScalarField::from_fn(g.clone(), "init", |x| {
        if g.distance_to_boundary(x) < g.h() { m } else { m + 0.1 * (PI * x[0]).cos() * (PI * x[1]).cos() }
    });
    let cfg = SolverConfig { tol_residual: 1e-5, ..SolverConfig::default() };
    let res = solve_elliptic(None, &cfg, &init, Some(&trace)).unwrap();
    assert!(res.converged, "{}", res.final_residual);
    assert_eq!(res.active_rupture_cells, 0);
    assert!(sup_diff(&res.u, &trace) < 1e-3);
    let e = &res.energy_history;
    for w in e.windows(2) {
        assert!(w[1] - w[0] <= 1e-10 * w[0].abs(), "{w:?}");
    }
}

#[test]
fn gradient_flow_energy_is_nonincreasing_on_a_rupture_problem() {
    let g = Grid::symmetric(2, 1.0 / 32.0, 65).unwrap();
    let (init, _) = seeded_rupture_problem(&g, 3.0, 7, 0.2).unwrap();
    let cfg = SolverConfig { max_steps: 3_000, record_every: 1, ..SolverConfig::default() };
    let res = solve_elliptic(None, &cfg, &init, Some(&init)).unwrap();
    // Histories restart their energy at each δ stage; within a stage they descend.
    let per_stage = 3_000 / cfg.delta_schedule.len();
    for stage in res.energy_history.chunks(per_stage + 1) {
        for w in stage.windows(2) {
            if w[1] > w[0] {
                assert!(w[1] - w[0] <= 1e-10 * w[0].abs(), "{w:?}");
            }
        }
    }
    assert!(res.u.is_nonnegative());
}

#[test]
fn bad_initial_data_is_rejected() {
    let g = Grid::symmetric(2, 0.125, 17).unwrap();
    let trace = ScalarField::constant(g.clone(), 1.0, "trace");
    let init = ScalarField::constant(g.clone(), 2.0, "init");
    let cfg = SolverConfig::default();
    assert!(matches!(
        solve_elliptic(None, &cfg, &init, Some(&trace)),
        Err(SolverError::BoundaryMismatch { .. })
    ));
    let mut neg = init.clone();
    neg.values_mut()[40] = -1.0;
    assert!(matches!(solve_elliptic(None, &cfg, &neg, None), Err(SolverError::NegativeInit(40))));
    let bad = SolverConfig { delta_schedule: vec![1e-3, 1e-2], ..SolverConfig::default() };
    assert!(matches!(solve_elliptic(None, &bad, &init, None), Err(SolverError::InvalidConfig(_))));
}

#[test]
fn uniform_data_decays_like_the_scalar_ode() {
    let (m, p) = (2.0f64, 3.0);
    let g = Grid::symmetric(2, 1.0 / 32.0, 33).unwrap();
    let u0 = ScalarField::constant(g, m, "u0");
    let shots = evolve_parabolic(&u0, None, 2.0, 4, &neumann(0.9)).unwrap();
    assert_eq!(shots.len(), 5);
    for s in &shots {
        let y = (m.powf(p + 1.0) - (p + 1.0) * s.t).powf(1.0 / (p + 1.0));
        assert!(s.u.values().iter().all(|v| (v - y).abs() < 1e-3), "t={}: {} vs {y}", s.t, s.u.max());
        assert!(s.u.max() - s.u.min() < 1e-12);
    }
}

#[test]
fn zero_final_time_returns_the_initial_field() {
    let u0 = exact_2d(33, 1.0);
    let shots = evolve_parabolic(&u0, None, 0.0, 5, &SolverConfig::default()).unwrap();
    assert_eq!(shots.len(), 1);
    assert_eq!(shots[0].t, 0.0);
    assert_eq!(shots[0].u, u0);
}

#[test]
fn steady_solution_barely_moves() {
    let sol = ode_profile(3.0, 0.5, 5.0).unwrap();
    let g = Grid::symmetric(2, 1.0 / 32.0, 65).unwrap();
    let u0 = ode_field(&sol, &g, 0).unwrap();
    let truncation = pde_residual(&u0, None, 3.0, 0.0, 1e-6).unwrap().sup;
    let t = 0.05;
    let cfg = SolverConfig { delta_schedule: vec![1e-6], ..SolverConfig::default() };
    let shots = evolve_parabolic(&u0, None, t, 2, &cfg).unwrap();
    let drift = sup_diff(&shots[2].u, &u0);
    assert!(truncation < 0.05, "{truncation}");
    assert!(drift <= t * truncation * 1.01, "{drift} vs {}", t * truncation);
}

#[test]
fn energy_inequality_is_an_equality_for_the_uniform_decay() {
    let g = Grid::symmetric(2, 1.0 / 32.0, 33).unwrap();
    let h = g.h();
    let u0 = ScalarField::constant(g, 2.0, "u0");
    let shots = evolve_parabolic(&u0, None, 2.0, 40, &neumann(0.9)).unwrap();
    let phi = SpaceCutoff { center: vec![0.0, 0.0], radius: 0.4 };
    let rep = energy_inequality_check(&shots, &phi, &TimeCutoff::new(0.2, 1.8), 3.0, 1e-6).unwrap();
    assert!(rep.defect >= -10.0 * h * h, "{rep:?}");
    assert!(rep.defect.abs() < 1e-2 * rep.rhs.abs(), "{rep:?}");
    let off = TimeCutoff { zero: true, ..TimeCutoff::new(0.2, 1.8) };
    let rep = energy_inequality_check(&shots, &phi, &off, 3.0, 1e-6).unwrap();
    assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
    assert!(energy_inequality_check(&shots[..1], &phi, &off, 3.0, 1e-6).is_err());
}

#[test]
fn residual_of_the_exact_solution_is_second_order() {
    let excl = 0.1;
    let sups: Vec<f64> = [201, 401]
        .iter()
        .map(|&n| pde_residual(&exact_2d(n, 1.0), None, 3.0, excl, 1e-6).unwrap().sup)
        .collect();
    let ratio = sups[0] / sups[1];
    assert!((3.0..5.0).contains(&ratio), "{sups:?}");
}

#[test]
fn residual_of_constant_fields() {
    let g = Grid::symmetric(2, 0.1, 11).unwrap();
    let one = ScalarField::constant(g.clone(), 1.0, "1");
    let minus = ScalarField::constant(g, -1.0, "f");
    for p in [1.5, 3.0, 6.0] {
        let r = pde_residual(&one, Some(&minus), p, 0.0, 1e-6).unwrap();
        assert!(r.sup < 1e-12 && r.cells == 81);
    }
    let r = pde_residual(&one, None, 3.0, 0.0, 1e-6).unwrap();
    assert!((r.sup - 1.0).abs() < 1e-12);
}

#[test]
fn morrey_seminorm_of_a_disc_indicator() {
    let g = Grid::symmetric(2, 1.0 / 256.0, 1025).unwrap();
    let f = ScalarField::from_fn(g.clone(), "f", |x| if x[0] * x[0] + x[1] * x[1] < 1.0 { 1.0 } else { 0.0 });
    let centers: Vec<Vec<f64>> = (-2..=2).flat_map(|i| (-2..=2).map(move |j| vec![i as f64 * 0.25, j as f64 * 0.25])).collect();
    let radii: Vec<f64> = (-4..=1).map(|k| 2f64.powi(k)).collect();
    let m = morrey_seminorm(&f, 1.0, 2.0, &centers, &radii).unwrap();
    assert!((m - PI.sqrt()).abs() < 0.02 * PI.sqrt(), "{m}");
    let f2 = f.map("2f", |v| 2.0 * v);
    let m2 = morrey_seminorm(&f2, 1.0, 2.0, &centers, &radii).unwrap();
    assert!((m2 - 2.0 * m).abs() < 1e-12 * m);
    let zero = ScalarField::constant(g, 0.0, "0");
    assert_eq!(morrey_seminorm(&zero, 1.0, 2.0, &centers, &radii).unwrap(), 0.0);
    assert!(morrey_seminorm(&zero, 1.0, 2.0, &[], &radii).is_err());
}

#[test]
fn gradient_tail_of_the_exact_solution() {
    let u = exact_2d(1025, 1.0);
    let region = BallRegion::new(vec![0.0, 0.0], 1.0);
    let lambdas: Vec<f64> = (0..8).map(|k| 0.75 * 2f64.powf(k as f64 / 3.0)).collect();
    let tail = gradient_tail(&u, &region, 3.0, &lambdas).unwrap();
    for (l, s) in lambdas.iter().zip(&tail.statistic) {
        assert!((s - PI / 4.0).abs() < 0.05 * PI / 4.0, "λ={l}: {s}");
    }
    let slope = tail.slope.unwrap();
    assert!((slope + 4.0).abs() < 0.2, "{slope}");

    let lin = ScalarField::from_fn(u.grid().clone(), "x", |x| x[0] + 2.0);
    let t = gradient_tail(&lin, &region, 3.0, &[1.5, 2.0]).unwrap();
    assert_eq!(t.sup_statistic, 0.0);
}

#[test]
fn exact_solution_is_nondegenerate_with_bounded_energy() {
    let u = exact_2d(513, 1.0);
    let radii: Vec<f64> = (1..=5).map(|k| 2f64.powi(-k)).collect();
    let nd = nondegeneracy(&u, &[0.0, 0.0], &radii, 3.0).unwrap();
    // sup over B_r is just inside the radius: √2·r^{1/2}·(1 − O(h/r))
    assert!(nd.c_min > 1.3 && nd.c_max <= 2f64.sqrt(), "{nd:?}");
    let est = interior_estimates(&u, &[0.0, 0.0], &radii, 3.0, 1e-6).unwrap();
    assert!(est.gradient_constant.is_finite() && est.gradient_constant > 0.0);
    assert!(est.singular_constant.is_finite() && est.singular_constant > 0.0);
    // ∫_{B_r}|∇u|² = πr for this solution and 2α + n − 2 = 1.
    for g in &est.gradient_ratio {
        assert!((g - PI).abs() < 0.1 * PI, "{:?}", est.gradient_ratio);
    }
}

#[test]
fn newton_finds_a_single_cell_rupture_solution() {
    let u0 = exact_2d(97, 1.0);
    let g = u0.grid().clone();
    let pinned = Mask::from_fn(g.clone(), |x| x[0] == 0.0 && x[1] == 0.0);
    assert_eq!(pinned.count(), 1);
    let cfg = SolverConfig { tol_residual: 1e-8, ..SolverConfig::default() };
    let res = solve_critical_point(None, &cfg, &u0, Some(&pinned), &NewtonOptions::default()).unwrap();
    assert!(res.converged, "{}", res.final_residual);
    assert_eq!(res.active_rupture_cells, 1);
    let far = Mask::from_fn(g, |x| x[0] * x[0] + x[1] * x[1] > 0.25);
    let err = far.set_cells().map(|c| (res.u.values()[c] - u0.values()[c]).abs()).fold(0.0, f64::max);
    assert!(err < 0.05, "{err}");
}
