use std::path::{Path, PathBuf};

use rupture_core::density::{DensityField, DensityOptions};
use rupture_core::exact::{alpha, homogeneous_field, ode_field, ode_profile, HomogeneousSolution};
use rupture_core::field::{load_field, save_field, BallRegion, Grid, Mask, ScalarField};
use rupture_core::gmt::{minkowski_content, read_point_cloud, rectifiability_integral, sublevel_neighborhood, vitali_cover};
use rupture_core::solver::{energy, evolve_parabolic, seeded_rupture_problem, solve_critical_point, solve_elliptic};
use rupture_core::symmetry::{SymmetryOptions, SymmetryProbe};

use crate::config::{parse_evolve_config, parse_solve_config, Method, SolveConfig};
use crate::error::CliError;
use crate::report::{Report, Table};
use crate::spec::{parse_ids, parse_point, parse_radii};
use crate::{
    Command, CoverArgs, DensityArgs, DisplacementArgs, EvolveArgs, FieldKind, MakeExactArgs, MinkowskiArgs, SolveArgs,
    StratifyArgs, VerifyArgs,
};

pub struct Context {
    pub seed: u64,
    pub threads: usize,
    pub summary: Option<PathBuf>,
}

pub fn dispatch(ctx: &Context, command: Command) -> Result<(), CliError> {
    match command {
        Command::MakeExact(a) => make_exact(ctx, a),
        Command::Solve(a) => solve(ctx, a),
        Command::Evolve(a) => evolve(ctx, a),
        Command::Density(a) => density(ctx, a),
        Command::Stratify(a) => stratify(ctx, a),
        Command::Minkowski(a) => minkowski(ctx, a),
        Command::Displacement(a) => displacement(ctx, a),
        Command::Cover(a) => cover(ctx, a),
        Command::Verify(a) => verify(ctx, a),
    }
}

fn load_optional(path: Option<&Path>) -> Result<Option<ScalarField>, CliError> {
    path.map(load_field).transpose().map_err(Into::into)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("--{name} must be positive, got {v}")))
    }
}

fn make_exact(ctx: &Context, a: MakeExactArgs) -> Result<(), CliError> {
    if a.shape < 3 {
        return Err(CliError::config("--shape must be at least 3"));
    }
    let half = positive("half-width", a.half_width)?;
    let grid = Grid::symmetric(a.n, 2.0 * half / (a.shape - 1) as f64, a.shape)?;
    let mut report = Report::new("make-exact", ctx.seed);
    let u = match a.kind {
        FieldKind::Radial => homogeneous_field(&HomogeneousSolution::radial(a.n, a.p)?, &grid)?,
        FieldKind::Cylinder => {
            let mut axis = vec![0.0; a.n];
            axis[a.n.saturating_sub(1)] = 1.0;
            homogeneous_field(&HomogeneousSolution::cylindrical(a.n, a.p, vec![axis])?, &grid)?
        }
        FieldKind::Ode => {
            positive("eps", a.eps)?;
            let mut s_max = 2.0 * a.eps + 1.0;
            let mut sol = ode_profile(a.p, a.eps, s_max)?;
            while sol.r_max() < half {
                s_max *= 2.0;
                sol = ode_profile(a.p, a.eps, s_max)?;
            }
            ode_field(&sol, &grid, 0)?
        }
        FieldKind::Seeded => {
            let (u, center) = seeded_rupture_problem(&grid, a.p, ctx.seed, a.amplitude)?;
            report.set("center", center);
            u
        }
    };
    save_field(&u, &a.out)?;
    report
        .param("n", a.n)
        .param("p", a.p)
        .param("kind", format!("{:?}", a.kind).to_lowercase())
        .param("shape", a.shape)
        .param("half_width", half)
        .set("h", grid.h())
        .set("min", u.min())
        .set("max", u.values().iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .artifact(&a.out);
    report.emit(ctx.summary.as_deref())
}

fn solve(ctx: &Context, a: SolveArgs) -> Result<(), CliError> {
    let cfg = match &a.config {
        Some(p) => parse_solve_config(&std::fs::read_to_string(p)?)?,
        None => SolveConfig { solver: Default::default(), method: Method::Flow, newton: Default::default(), pin: vec![] },
    };
    let init = load_field(&a.init)?;
    let f = load_optional(a.forcing.as_deref())?;
    let res = match cfg.method {
        Method::Flow => solve_elliptic(f.as_ref(), &cfg.solver, &init, None)?,
        Method::Newton => {
            let g = init.grid();
            let mut cells = vec![false; g.len()];
            for x in &cfg.pin {
                if x.len() != g.dim() || !g.contains(x) {
                    return Err(CliError::config(format!("pin point {x:?} is not inside the grid")));
                }
                cells[g.flat_index(&g.nearest_index(x))] = true;
            }
            let pinned = Mask::new(g.clone(), cells)?;
            solve_critical_point(f.as_ref(), &cfg.solver, &init, Some(&pinned), &cfg.newton)?
        }
    };
    save_field(&res.u, &a.out)?;
    let mut report = Report::new("solve", ctx.seed);
    report.param("config", &cfg).push(&res).artifact(&a.out);
    if let Some(path) = &a.history {
        let mut t = Table::new(&["record", "residual", "energy"]);
        let rows = res.residual_history.len().max(res.energy_history.len());
        for i in 0..rows {
            t.row([Some(i as f64), res.residual_history.get(i).copied(), res.energy_history.get(i).copied()]);
        }
        t.save(path)?;
        report.artifact(path);
    }
    report.emit(ctx.summary.as_deref())?;
    if !res.converged {
        return Err(CliError::Numeric(format!("no convergence: final residual {:e}", res.final_residual)));
    }
    Ok(())
}

fn evolve(ctx: &Context, a: EvolveArgs) -> Result<(), CliError> {
    let cfg = parse_evolve_config(&std::fs::read_to_string(&a.config)?)?;
    let u0 = load_field(&a.init)?;
    let f = load_optional(a.forcing.as_deref())?;
    let shots = evolve_parabolic(&u0, f.as_ref(), cfg.t_end, cfg.snapshots, &cfg.solver)?;
    let last = shots.last().expect("at least the initial snapshot");
    save_field(&last.u, &a.out)?;
    let mut report = Report::new("evolve", ctx.seed);
    report.param("config", &cfg).artifact(&a.out);
    let mut t = Table::new(&["t", "energy", "min_u"]);
    for s in &shots {
        let e = energy(&s.u, f.as_ref(), None, cfg.solver.delta_min(), cfg.solver.p)?;
        t.row([Some(s.t), Some(e), Some(s.u.min())]);
        report.push(serde_json::json!({ "t": s.t, "energy": e, "min_u": s.u.min() }));
    }
    if let Some(path) = &a.history {
        t.save(path)?;
        report.artifact(path);
    }
    report.set("snapshots", shots.len()).set("t_final", last.t);
    report.emit(ctx.summary.as_deref())
}

fn density(ctx: &Context, a: DensityArgs) -> Result<(), CliError> {
    let u = load_field(&a.field)?;
    let f = load_optional(a.forcing.as_deref())?;
    let x = parse_point(&a.point)?;
    let radii = parse_radii(&a.radii)?;
    let field = DensityField::new(&u, f.as_ref(), a.p, &DensityOptions::default())?;
    let prof = field.profile(&x, &radii)?;
    let mut t = Table::new(&["r", "D", "D_f", "F", "H", "I_f", "theta", "theta_f", "W_f"]);
    for (v, w) in prof.values.iter().zip(&prof.w_f) {
        t.row([Some(v.r), Some(v.d), Some(v.d_f), Some(v.f), Some(v.h), v.i_f, Some(v.theta), Some(v.theta_f), *w]);
    }
    t.save(&a.out)?;
    let mut report = Report::new("density", ctx.seed);
    report
        .param("p", a.p)
        .param("point", &x)
        .param("radii", &a.radii)
        .set("alpha", field.alpha())
        .set("rows", prof.values.len())
        .set("monotone_defect", prof.monotone_defect)
        .set("truncated", prof.truncated)
        .set("identity_max_abs_defect", prof.identity.as_ref().map(|i| i.max_abs_defect))
        .artifact(&a.out);
    report.emit(ctx.summary.as_deref())
}

/// Lattice points `center + pitch·z` with `|pitch·z| ≤ radius`.
pub fn lattice_in_ball(center: &[f64], pitch: f64, radius: f64) -> Vec<Vec<f64>> {
    let m = (radius / pitch).floor() as i64;
    let n = center.len();
    let mut z = vec![-m; n];
    let mut out = vec![];
    loop {
        let norm2: f64 = z.iter().map(|&k| (k as f64 * pitch).powi(2)).sum();
        if norm2 <= radius * radius * (1.0 + 1e-12) {
            out.push(center.iter().zip(&z).map(|(c, &k)| c + k as f64 * pitch).collect());
        }
        let mut d = 0;
        while d < n && z[d] == m {
            z[d] = -m;
            d += 1;
        }
        if d == n {
            return out;
        }
        z[d] += 1;
    }
}

fn center_or_origin(center: Option<&str>, n: usize) -> Result<Vec<f64>, CliError> {
    let c = center.map(parse_point).transpose()?.unwrap_or_else(|| vec![0.0; n]);
    if c.len() != n {
        return Err(CliError::config(format!("--center has {} coordinates, field has {n}", c.len())));
    }
    Ok(c)
}

fn stratify(ctx: &Context, a: StratifyArgs) -> Result<(), CliError> {
    let u = load_field(&a.field)?;
    let n = u.grid().dim();
    let samples = match (&a.points, a.pitch) {
        (Some(p), _) => read_point_cloud(p)?.points().to_vec(),
        (None, Some(pitch)) => {
            lattice_in_ball(&center_or_origin(a.center.as_deref(), n)?, positive("pitch", pitch)?, positive("within", a.within)?)
        }
        (None, None) => return Err(CliError::config("need --points or --pitch")),
    };
    let opts = SymmetryOptions { seed: ctx.seed, ..SymmetryOptions::default() };
    let rep = SymmetryProbe::new(&u, a.p, opts)?.stratum(a.k, a.eps, a.r_min, a.r_max, &samples)?;
    let mut header: Vec<String> = (1..=n).map(|d| format!("x{d}")).collect();
    header.extend(["flagged".to_string(), "best_defect".to_string()]);
    let mut t = Table { header, rows: vec![] };
    for p in &rep.points {
        let mut row: Vec<Option<f64>> = p.x.iter().map(|&v| Some(v)).collect();
        row.push(Some(if p.flagged { 1.0 } else { 0.0 }));
        row.push(Some(p.best_defect));
        t.row(row);
    }
    t.save(&a.out)?;
    let mut report = Report::new("stratify", ctx.seed);
    report
        .param("p", a.p)
        .param("k", a.k)
        .param("eps", a.eps)
        .param("r_min", a.r_min)
        .param("r_max", a.r_max)
        .set("samples", rep.points.len())
        .set("ladder", &rep.ladder)
        .set("flagged_count", rep.flagged_count)
        .set("flagged_fraction", rep.flagged_fraction)
        .artifact(&a.out);
    report.emit(ctx.summary.as_deref())
}

fn minkowski(ctx: &Context, a: MinkowskiArgs) -> Result<(), CliError> {
    let u = load_field(&a.field)?;
    let radii = parse_radii(&a.radii)?;
    let ball = BallRegion::new(center_or_origin(a.center.as_deref(), u.grid().dim())?, positive("within", a.within)?);
    let mut report = Report::new("minkowski", ctx.seed);
    let rep = match (a.eps, a.threshold) {
        (Some(eps), _) => {
            let p = a.p.ok_or_else(|| CliError::config("--eps needs --p"))?;
            if !(p > 1.0) {
                return Err(CliError::config(format!("--p must exceed 1, got {p}")));
            }
            report.param("eps", eps).param("p", p);
            sublevel_neighborhood(&u, eps, alpha(p), &radii, &ball)?
        }
        (None, Some(t)) => {
            report.param("threshold", t).param("k", a.k);
            let mask = Mask::below(&u, t).and_ball(&ball);
            minkowski_content(&mask, a.k, &radii)?
        }
        (None, None) => return Err(CliError::config("need --eps or --threshold")),
    };
    let mut t = Table::new(&["r", "volume", "content"]);
    for ((r, v), c) in rep.radii.iter().zip(&rep.volumes).zip(&rep.contents) {
        t.row([Some(*r), Some(*v), Some(*c)]);
    }
    t.save(&a.out)?;
    report
        .param("radii", &a.radii)
        .param("within", a.within)
        .set("slope", finite_or_none(rep.slope))
        .set("dimension", finite_or_none(rep.dimension))
        .artifact(&a.out);
    report.emit(ctx.summary.as_deref())
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn displacement(ctx: &Context, a: DisplacementArgs) -> Result<(), CliError> {
    let mu = read_point_cloud(&a.points)?;
    let x = parse_point(&a.x)?;
    let radii = parse_radii(&a.radii)?;
    let trace = rectifiability_integral(&mu, &x, &radii, a.k)?;
    let mut t = Table::new(&["s", "displacement"]);
    for (s, d) in trace.scales.iter().zip(&trace.displacements) {
        t.row([Some(*s), Some(*d)]);
    }
    t.save(&a.out)?;
    let mut report = Report::new("displacement", ctx.seed);
    report
        .param("x", &x)
        .param("k", a.k)
        .param("radii", &a.radii)
        .set("atoms", mu.len())
        .set("integral", trace.integral)
        .artifact(&a.out);
    report.emit(ctx.summary.as_deref())
}

fn cover(ctx: &Context, a: CoverArgs) -> Result<(), CliError> {
    let mu = read_point_cloud(&a.points)?;
    let radius = positive("radius", a.radius)?;
    let big_r = positive("big-r", a.big_r)?;
    let radii = vec![radius; mu.len()];
    let cov = vitali_cover(mu.points(), &radii)?;
    let mut header: Vec<String> = (1..=mu.dim()).map(|d| format!("x{d}")).collect();
    header.push("radius".into());
    let mut t = Table { header, rows: vec![] };
    for &i in &cov.kept {
        t.row(mu.points()[i].iter().map(|&v| Some(v)).chain([Some(radius)]));
    }
    t.save(&a.out)?;
    let mut report = Report::new("cover", ctx.seed);
    report
        .param("radius", radius)
        .param("k", a.k)
        .param("big_r", big_r)
        .set("points", mu.len())
        .set("kept", cov.kept.len())
        .set("disjoint", cov.disjoint)
        .set("dilates_cover", cov.dilates_cover)
        .set("content", cov.content(&radii, a.k, big_r))
        .artifact(&a.out);
    report.emit(ctx.summary.as_deref())
}

fn verify(ctx: &Context, a: VerifyArgs) -> Result<(), CliError> {
    let only = a.only.as_deref().map(parse_ids).transpose()?;
    let outcome = crate::verify::run_suite(a.suite, only.as_deref(), ctx.seed, ctx.threads, true)?;
    outcome.report.emit(ctx.summary.as_deref())?;
    if outcome.failed > 0 {
        return Err(CliError::VerifyFailed { failed: outcome.failed, total: outcome.total });
    }
    Ok(())
}
