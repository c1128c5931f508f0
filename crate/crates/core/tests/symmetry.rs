use std::f64::consts::PI;

use rupture_core::density::{DensityField, DensityOptions};
use rupture_core::exact::{homogeneous_field, HomogeneousSolution};
use rupture_core::field::{BallRegion, Grid, ScalarField};
use rupture_core::symmetry::*;

fn exact_2d(cells: usize) -> (HomogeneousSolution, ScalarField) {
    let sol = HomogeneousSolution::radial(2, 3.0).unwrap();
    let g = Grid::symmetric(2, 2.0 / (cells - 1) as f64, cells).unwrap();
    let u = homogeneous_field(&sol, &g).unwrap();
    (sol, u)
}

/// `sup_{B₁}|w − T_{x,r}u_exact|`: the error of the sampled blow-up itself.
fn interpolation_error(w: &BlowUp, sol: &HomogeneousSolution) -> f64 {
    let scale = w.r.powf(-w.alpha);
    w.unit_ball_samples()
        .map(|(y, v)| {
            let z: Vec<f64> = w.x.iter().zip(&y).map(|(a, b)| a + w.r * b).collect();
            (v - scale * (sol.value(&z) - sol.value(&w.x))).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn exact_blow_up_is_self_similar() {
    let (sol, u) = exact_2d(1025);
    for r in [0.1, 0.2, 0.4] {
        let w = blow_up(&u, &[0.0, 0.0], r, 0.5, 16).unwrap();
        let reference = blow_up(&u, &[0.0, 0.0], 0.4, 0.5, 16).unwrap();
        let tol = interpolation_error(&w, &sol) + interpolation_error(&reference, &sol) + 1e-12;
        for (a, b) in w.values().iter().zip(reference.values()) {
            assert!((a - b).abs() <= tol);
        }
    }
}

#[test]
fn zero_symmetric_fit_of_exact_solution_is_within_interpolation_error() {
    let (sol, u) = exact_2d(1025);
    let probe = SymmetryProbe::new(&u, 3.0, SymmetryOptions::default()).unwrap();
    let mut defects = vec![];
    for r in [0.05, 0.1, 0.2, 0.4] {
        let d = probe.defect(&[0.0, 0.0], r, 0).unwrap();
        let w = probe.blow_up(&[0.0, 0.0], r).unwrap();
        let interp = interpolation_error(&w, &sol);
        assert!(d.defect < 5.0 * interp.max(1e-3), "r={r}: {} vs {interp}", d.defect);
        defects.push(d.defect);
    }
    let spread = defects.iter().cloned().fold(0.0, f64::max) - defects.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 0.02, "{defects:?}");
}

#[test]
fn exact_solution_is_not_one_symmetric_under_a_dense_frame_scan() {
    let (_, u) = exact_2d(513);
    let w = blow_up(&u, &[0.0, 0.0], 0.5, 0.5, 16).unwrap();
    let scan: Vec<(Frame, FitMethod)> = (0..360)
        .map(|i| {
            let t = i as f64 * PI / 360.0;
            (Frame::new(2, vec![vec![t.cos(), t.sin()]]).unwrap(), FitMethod::AxisScan)
        })
        .collect();
    let fit = fit_k_symmetric(&w, 1, &scan).unwrap();
    assert!(fit.defect >= 0.1, "{}", fit.defect);
    // The dictionary fit is an upper bound, so it cannot beat the dense scan by much.
    let d = symmetry_defect(&u, &[0.0, 0.0], 0.5, 1, 3.0).unwrap();
    assert!(d.defect >= fit.defect - 1e-2);
    assert!(!d.is_symmetric(0.05));
}

#[test]
fn dictionary_fit_equals_minimum_of_single_frame_fits() {
    let (_, u) = exact_2d(257);
    let w = blow_up(&u, &[0.1, -0.05], 0.3, 0.5, 12).unwrap();
    let frames: Vec<(Frame, FitMethod)> = (0..24)
        .map(|i| {
            let t = i as f64 * PI / 24.0;
            (Frame::new(2, vec![vec![t.cos(), t.sin()]]).unwrap(), FitMethod::RandomScan)
        })
        .collect();
    let joint = fit_k_symmetric(&w, 1, &frames).unwrap().defect;
    let single = frames
        .iter()
        .map(|f| fit_k_symmetric(&w, 1, std::slice::from_ref(f)).unwrap().defect)
        .fold(f64::INFINITY, f64::min);
    assert!((joint - single).abs() <= 1e-9);
}

#[test]
fn cylinder_is_one_symmetric_along_its_axis() {
    let e3 = vec![0.0, 0.0, 1.0];
    let sol = HomogeneousSolution::cylindrical(3, 3.0, vec![e3.clone()]).unwrap();
    let g = Grid::symmetric(3, 2.0 / 96.0, 97).unwrap();
    let u = homogeneous_field(&sol, &g).unwrap();
    let probe = SymmetryProbe::new(&u, 3.0, SymmetryOptions { reference_half_width: 10, ..Default::default() }).unwrap();
    let d = probe.defect(&[0.0, 0.0, 0.0], 0.5, 1).unwrap();
    let w = probe.blow_up(&[0.0, 0.0, 0.0], 0.5).unwrap();
    // Along the axis the blow-up is exactly invariant; what remains is the
    // interpolation error of the transverse profile.
    assert!(d.defect < 2.0 * interpolation_error(&w, &sol) + 1e-3, "{}", d.defect);
    assert_eq!(d.fit.k, 1);
    let v = &d.fit.frame.vectors()[0];
    assert!(v[2].abs() > 1.0 - 1e-6, "{v:?}");
    assert!(d.gradient_criterion < 1e-20);
}

#[test]
fn zero_blow_up_is_n_symmetric() {
    let g = Grid::symmetric(2, 0.05, 41).unwrap();
    let u = ScalarField::constant(g, 0.7, "c");
    let d = symmetry_defect(&u, &[0.0, 0.0], 0.5, 2, 3.0).unwrap();
    assert!(d.defect < 1e-12);
    assert_eq!(d.fit.method, FitMethod::Zero);
}

#[test]
fn positive_point_blow_up_is_the_rescaled_gradient() {
    // At a smooth positive point w ≈ r^{1−α}∇u(x)·y, so the distance to the
    // zero function is r^{1−α}|∇u(x)| up to O(r^{2−α}).
    let (sol, u) = exact_2d(1025);
    let x = [0.5, 0.0];
    let grad = sol.gradient(&x).unwrap();
    let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    for r in [0.01f64, 0.001] {
        let d = symmetry_defect(&u, &x, r, 2, 3.0).unwrap();
        let expected = r.powf(0.5) * gnorm;
        assert!((d.defect - expected).abs() < 0.05 * expected, "r={r}: {} vs {expected}", d.defect);
    }
    assert!(symmetry_defect(&u, &x, 0.001, 2, 3.0).unwrap().is_symmetric(0.05));
}

#[test]
fn cylinder_gradient_criterion_vanishes_on_the_axis() {
    let sol = HomogeneousSolution::cylindrical(3, 3.0, vec![vec![0.0, 0.0, 1.0]]).unwrap();
    let g = Grid::symmetric(3, 2.0 / 48.0, 49).unwrap();
    let u = homogeneous_field(&sol, &g).unwrap();
    let probe = SymmetryProbe::new(&u, 3.0, SymmetryOptions::default()).unwrap();
    let m = probe.gradient_moment(&[0.1, 0.0, 0.0], 0.4);
    for i in 0..3 {
        assert!(m[(2, i)].abs() < 1e-12 * m[(0, 0)]);
    }
}

#[test]
fn stratum_of_exact_solution_concentrates_at_the_origin() {
    // Away from the origin the blow-up at scale s is nearly linear with slope
    // c = (s/2d)^{1/2}. The angular-median fit of c·t by g±|t|^{1/2} misses by
    // about 0.35c, so a point stays flagged iff d ≲ 0.35²·r_min/(2ε²), about
    // 24·s_min at ε = 0.05 for the smallest ladder scale s_min.
    let (_, u) = exact_2d(513);
    let h = u.grid().h();
    let r_min = 2.0 * h;
    let samples: Vec<Vec<f64>> = (-12..=12)
        .flat_map(|i| (-12..=12).map(move |j| vec![i as f64 * 8.0 * h, j as f64 * 8.0 * h]))
        .collect();
    let report = quantitative_stratum(&u, 3.0, 0, 0.05, r_min, 0.05, &samples, SymmetryOptions::default()).unwrap();
    let origin = report.points.iter().find(|p| p.x == vec![0.0, 0.0]).unwrap();
    assert!(origin.flagged);
    let s_min = *report.ladder.last().unwrap();
    for p in &report.points {
        let d = p.x[0].hypot(p.x[1]);
        if p.flagged {
            assert!(d < 32.0 * s_min, "{:?}", p.x);
        }
        if d > 32.0 * s_min {
            assert!(!p.flagged, "{:?}", p.x);
        }
    }
}

#[test]
fn stratum_is_monotone_in_epsilon_level_and_scale() {
    let (_, u) = exact_2d(257);
    let h = u.grid().h();
    let samples: Vec<Vec<f64>> = (-4..=4)
        .flat_map(|i| (-4..=4).map(move |j| vec![i as f64 * 3.0 * h, j as f64 * 3.0 * h]))
        .collect();
    let probe = SymmetryProbe::new(&u, 3.0, SymmetryOptions::default()).unwrap();
    let base = probe.stratum(0, 0.1, 4.0 * h, 0.08, &samples).unwrap();
    let smaller_eps = probe.stratum(0, 0.05, 4.0 * h, 0.08, &samples).unwrap();
    let higher_k = probe.stratum(1, 0.1, 4.0 * h, 0.08, &samples).unwrap();
    let larger_r = probe.stratum(0, 0.1, 8.0 * h, 0.08, &samples).unwrap();
    assert!(base.is_subset_of(&smaller_eps));
    assert!(base.is_subset_of(&higher_k));
    assert!(base.is_subset_of(&larger_r));
}

#[test]
fn rupture_points_recover_the_sublevel_disc() {
    let (_, u) = exact_2d(1025);
    let h = u.grid().h();
    // u < 0.1·0.1^{1/2} ⇔ |x| < (0.1·0.1^{1/2}/√2)² = 5·10⁻⁴.
    let radius = (0.1f64 * 0.1f64.sqrt() / 2f64.sqrt()).powi(2);
    assert!((radius - 5e-4).abs() < 1e-12);
    let pts = rupture_points(&u, 0.1, 0.1, 3.0, Some(&BallRegion::new(vec![0.0, 0.0], 1.0)));
    assert!(!pts.is_empty());
    for p in &pts {
        assert!(p[0].hypot(p[1]) < radius + h);
    }
    assert!(rupture_points(&u, 0.0, 0.1, 3.0, None).is_empty());
    let one = ScalarField::constant(u.grid().clone(), 1.0, "one");
    assert!(rupture_points(&one, 0.1, 0.1, 3.0, None).is_empty());
}

#[test]
fn density_is_covariant_under_blow_up() {
    // θ_f(T_{x,r}u, T*_{x,r}f; 0, ρ) = θ_f(u, f; x, rρ).
    let (_, u) = exact_2d(1025);
    let f = ScalarField::from_fn(u.grid().clone(), "f", |y| 0.3 + 0.1 * y[0]);
    let (x, r) = ([0.0, 0.0], 0.5);
    let w = blow_up(&u, &x, r, 0.5, 256).unwrap().to_field().unwrap();
    let fw = scale_forcing(&f, &x, r, 0.5, 256).unwrap();
    let opts = DensityOptions::default();
    let original = DensityField::new(&u, Some(&f), 3.0, &opts).unwrap();
    let scaled = DensityField::new(&w, Some(&fw), 3.0, &opts).unwrap();
    for rho in [0.15, 0.25] {
        let a = original.evaluate(&x, r * rho).unwrap().theta_f;
        let b = scaled.evaluate(&[0.0, 0.0], rho).unwrap().theta_f;
        assert!((a - b).abs() < 0.01 * a.abs(), "ρ={rho}: {a} vs {b}");
    }
}
