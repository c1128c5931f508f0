use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::measure::{best_fit_affine, AffineSubspace, AtomicMeasure};
use super::GmtError;
use crate::density::DensityField;
use crate::field::{dist2, BallRegion};

/// Result of the greedy `s`-effective spanning construction.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveSpan {
    pub s: f64,
    pub k_max: usize,
    /// `x₀, x₁, …, x_{k_max}`.
    pub spanning_points: Vec<Vec<f64>>,
    /// `x₀ + span{xᵢ − x₀}` with an orthonormal frame.
    pub subspace: AffineSubspace,
}

impl EffectiveSpan {
    /// Coefficients `αᵢ` of the least-squares representation
    /// `x − x₀ ≈ Σ αᵢ(xᵢ − x₀)`.
    pub fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        let k = self.k_max;
        if k == 0 {
            return vec![];
        }
        let x0 = &self.spanning_points[0];
        let n = x0.len();
        let a = DMatrix::from_fn(n, k, |i, j| self.spanning_points[j + 1][i] - x0[i]);
        let b = DVector::from_iterator(n, x.iter().zip(x0).map(|(p, q)| p - q));
        let gram = a.transpose() * &a;
        let rhs = a.transpose() * b;
        gram.cholesky().map(|c| c.solve(&rhs).iter().copied().collect()).unwrap_or_else(|| vec![f64::NAN; k])
    }

    /// `max|αᵢ|·s/|x − x₀|`; bounded by a constant depending only on `n` for
    /// points of the subspace.
    pub fn coefficient_ratio(&self, x: &[f64]) -> f64 {
        let d = dist2(x, &self.spanning_points[0]).sqrt();
        if d == 0.0 {
            return 0.0;
        }
        self.coefficients(x).iter().fold(0.0f64, |m, a| m.max(a.abs())) * self.s / d
    }
}

/// Greedy construction: `x₀` is the point farthest from the centroid, then the
/// point farthest from the current affine span is added while its distance is
/// at least `2s`.
pub fn effective_span(points: &[Vec<f64>], s: f64) -> Result<EffectiveSpan, GmtError> {
    let first = points.first().ok_or(GmtError::EmptyPoints)?;
    let n = first.len();
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(GmtError::PointDimension { expected: n, got: p.len() });
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(GmtError::InvalidRadius(s));
    }
    let mut centroid = vec![0.0; n];
    for p in points {
        centroid.iter_mut().zip(p).for_each(|(c, y)| *c += y / points.len() as f64);
    }
    let farthest = |dist: &dyn Fn(&[f64]) -> f64| {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, dist(p)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
    };
    let (i0, _) = farthest(&|p| dist2(p, &centroid));
    let mut subspace = AffineSubspace { base: points[i0].clone(), frame: vec![] };
    let mut spanning_points = vec![points[i0].clone()];
    while subspace.k() < n {
        let (i, d2) = farthest(&|p| subspace.dist_sq(p));
        if d2.sqrt() < 2.0 * s {
            break;
        }
        let mut v: Vec<f64> = points[i].iter().zip(&subspace.base).map(|(a, b)| a - b).collect();
        for w in &subspace.frame {
            let c: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(w).for_each(|(a, b)| *a -= c * b);
        }
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v.iter_mut().for_each(|t| *t /= norm);
        subspace.frame.push(v);
        spanning_points.push(points[i].clone());
    }
    Ok(EffectiveSpan { s, k_max: subspace.k(), spanning_points, subspace })
}

/// Greedy Vitali subfamily with the exact disjointness and 5×-cover checks.
#[derive(Debug, Clone, Serialize)]
pub struct VitaliCover {
    /// Indices of kept balls, in selection order.
    pub kept: Vec<usize>,
    pub disjoint: bool,
    pub dilates_cover: bool,
}

impl VitaliCover {
    /// `Σ_kept rᵢᵏ / Rᵏ`, which is `#kept·rᵏ/Rᵏ` for equal radii.
    pub fn content(&self, radii: &[f64], k: usize, big_r: f64) -> f64 {
        self.kept.iter().map(|&i| (radii[i] / big_r).powi(k as i32)).sum()
    }
}

/// Balls `B_{rᵢ}(cᵢ)` sorted by radius (descending, stable), kept iff
/// disjoint from every kept ball.
pub fn vitali_cover(centers: &[Vec<f64>], radii: &[f64]) -> Result<VitaliCover, GmtError> {
    if centers.len() != radii.len() {
        return Err(GmtError::InvalidMeasure(format!("{} centers, {} radii", centers.len(), radii.len())));
    }
    if let Some(&r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(GmtError::InvalidRadius(r));
    }
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| radii[b].total_cmp(&radii[a]));
    let apart = |i: usize, j: usize| dist2(&centers[i], &centers[j]).sqrt() >= radii[i] + radii[j];
    let mut kept: Vec<usize> = vec![];
    for i in order {
        if kept.iter().all(|&j| apart(i, j)) {
            kept.push(i);
        }
    }
    let disjoint = kept.iter().enumerate().all(|(a, &i)| kept[..a].iter().all(|&j| apart(i, j)));
    let dilates_cover = (0..centers.len())
        .all(|i| kept.iter().any(|&j| dist2(&centers[i], &centers[j]).sqrt() + radii[i] <= 5.0 * radii[j]));
    Ok(VitaliCover { kept, disjoint, dilates_cover })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PinchedCoverOptions {
    /// Target dimension of the pinched set.
    pub k: usize,
    /// `F_δ = {y : W_f(y, ρs) < δ}`.
    pub delta: f64,
    pub rho: f64,
    pub max_depth: usize,
    /// Balls smaller than this are not refined further.
    pub s_min: f64,
}

impl Default for PinchedCoverOptions {
    fn default() -> Self {
        Self { k: 0, delta: 0.05, rho: 0.25, max_depth: 8, s_min: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverBallKind {
    /// `F_δ ⊂ B_{ρs/10}(L)` for a `k`-plane `L`.
    Pinched,
    /// Depth or scale limit reached.
    Leaf,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverBall {
    pub center: Vec<f64>,
    pub radius: f64,
    pub depth: usize,
    pub kind: CoverBallKind,
    pub candidates: usize,
    pub pinched: usize,
    /// `k_max` of the `ρs/10`-effective span of the pinched points.
    pub span: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PinchedCover {
    pub balls: Vec<CoverBall>,
    /// `Σ rᵏ / Rᵏ` over the final balls.
    pub content: f64,
}

/// Depth-limited covering of `candidates ∩ B_R(x)`: a ball stops once its
/// pinched points lie near a `k`-plane, otherwise its candidates are split
/// among half-radius balls centered on a Vitali family of radius `s/4`.
pub fn pinched_cover(
    density: &DensityField<'_>,
    candidates: &[Vec<f64>],
    x: &[f64],
    big_r: f64,
    opts: &PinchedCoverOptions,
) -> Result<PinchedCover, GmtError> {
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(GmtError::InvalidRadius(big_r));
    }
    if opts.k > density.dim() {
        return Err(GmtError::InvalidLevel { k: opts.k, dim: density.dim() });
    }
    let mut balls = vec![];
    let all: Vec<usize> = (0..candidates.len()).collect();
    refine(density, candidates, &all, x, big_r, 0, opts, &mut balls)?;
    let content = balls.iter().map(|b| (b.radius / big_r).powi(opts.k as i32)).sum();
    Ok(PinchedCover { balls, content })
}

#[allow(clippy::too_many_arguments)]
fn refine(
    density: &DensityField<'_>,
    candidates: &[Vec<f64>],
    pool: &[usize],
    c: &[f64],
    s: f64,
    depth: usize,
    opts: &PinchedCoverOptions,
    out: &mut Vec<CoverBall>,
) -> Result<(), GmtError> {
    let ball = BallRegion::new(c.to_vec(), s);
    let inside: Vec<usize> = pool.iter().copied().filter(|&i| ball.contains(&candidates[i])).collect();
    if inside.is_empty() {
        return Ok(());
    }
    let mut pinched = vec![];
    for &i in &inside {
        if density.pinch_w(&candidates[i], opts.rho * s)? < opts.delta {
            pinched.push(candidates[i].clone());
        }
    }
    let reach = opts.rho * s / 10.0;
    let (near_plane, span) = if pinched.is_empty() {
        (true, 0)
    } else {
        let span = effective_span(&pinched, reach)?.k_max;
        let mu = AtomicMeasure::uniform(pinched.clone())?;
        let (plane, _) = best_fit_affine(&mu, &ball, opts.k)?;
        (pinched.iter().all(|y| plane.dist(y) < reach), span)
    };
    let record = |kind| CoverBall {
        center: c.to_vec(),
        radius: s,
        depth,
        kind,
        candidates: inside.len(),
        pinched: pinched.len(),
        span,
    };
    if near_plane {
        out.push(record(CoverBallKind::Pinched));
        return Ok(());
    }
    if depth >= opts.max_depth || s / 2.0 < opts.s_min {
        out.push(record(CoverBallKind::Leaf));
        return Ok(());
    }
    let centers: Vec<Vec<f64>> = inside.iter().map(|&i| candidates[i].clone()).collect();
    let family = vitali_cover(&centers, &vec![s / 4.0; centers.len()])?;
    for &j in &family.kept {
        refine(density, candidates, &inside, &centers[j], s / 2.0, depth + 1, opts, out)?;
    }
    Ok(())
}
