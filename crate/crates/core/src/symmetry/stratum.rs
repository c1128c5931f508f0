use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::fit::{extend_orthonormal, fit_frame};
use super::{blow_up, fit_k_symmetric, BlowUp, FitMethod, Frame, SymmetryError, SymmetryFit, SymmetryOptions};
use crate::exact::alpha;
use crate::field::{gradient, BallRegion, ScalarField, VectorField};

/// Best `j`-symmetric fit over levels `j ≥ k`, plus the gradient criterion.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryDefect {
    pub k: usize,
    /// `min_{j ≥ k}` of the fitted defects; a `j`-symmetric function is also
    /// `k`-symmetric for `j ≥ k`.
    pub defect: f64,
    /// The fit attaining `defect`.
    pub fit: SymmetryFit,
    /// `inf_V r^{2−2α−n}∫_{B_r(x)}|V·∇u|²` over `k`-frames, attained by the
    /// `k` smallest eigenvectors of `∫∇u⊗∇u`.
    pub gradient_criterion: f64,
    pub clipped_fraction: f64,
}

impl SymmetryDefect {
    /// `(k, ε)`-symmetric in `B_r(x)`.
    pub fn is_symmetric(&self, epsilon: f64) -> bool {
        self.defect < epsilon
    }
}

/// A field with its gradient and a fixed frame dictionary, prepared for
/// repeated symmetry queries.
#[derive(Debug, Clone)]
pub struct SymmetryProbe<'a> {
    u: &'a ScalarField,
    grad: VectorField,
    alpha: f64,
    opts: SymmetryOptions,
    dictionary: Vec<Vec<(Frame, FitMethod)>>,
}

impl<'a> SymmetryProbe<'a> {
    pub fn new(u: &'a ScalarField, p: f64, opts: SymmetryOptions) -> Result<Self, SymmetryError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(SymmetryError::InvalidExponent(p));
        }
        let n = u.grid().dim();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let dictionary = (0..=n)
            .map(|k| {
                let mut frames: Vec<(Frame, FitMethod)> =
                    Frame::all_axis_frames(n, k).into_iter().map(|f| (f, FitMethod::AxisScan)).collect();
                if k > 0 && k < n {
                    frames.extend((0..opts.random_frames).map(|_| (Frame::random(n, k, &mut rng), FitMethod::RandomScan)));
                }
                frames
            })
            .collect();
        Ok(Self { u, grad: gradient(u)?, alpha: alpha(p), opts, dictionary })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn blow_up(&self, x: &[f64], r: f64) -> Result<BlowUp, SymmetryError> {
        blow_up(self.u, x, r, self.alpha, self.opts.reference_half_width)
    }

    /// `∫_{B_r(x)} ∇u ⊗ ∇u`.
    pub fn gradient_moment(&self, x: &[f64], r: f64) -> DMatrix<f64> {
        let n = self.u.grid().dim();
        let mut m = DMatrix::zeros(n, n);
        self.u.grid().visit_ball(x, r, |c, _, _| {
            let g = self.grad.at(c);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += g[i] * g[j];
                }
            }
        });
        m * self.u.grid().cell_volume()
    }

    /// The `k` smallest-eigenvalue directions of the gradient moment and the
    /// scale-normalized sum of those eigenvalues.
    fn moment_frame(&self, x: &[f64], r: f64, k: usize) -> Result<(Frame, f64), SymmetryError> {
        let n = self.u.grid().dim();
        let eig = SymmetricEigen::new(self.gradient_moment(x, r));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vectors: Vec<Vec<f64>> = order[..k].iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
        let sum: f64 = order[..k].iter().map(|&i| eig.eigenvalues[i].max(0.0)).sum();
        let norm = r.powf(2.0 - 2.0 * self.alpha - n as f64);
        let mut basis = Vec::with_capacity(k);
        extend_orthonormal(&mut basis, vectors.into_iter(), k, 1e-9);
        let frame = Frame::new(n, basis)?;
        Ok((frame, norm * sum))
    }

    /// Fitted defect at level exactly `k` from a given blow-up.
    fn level_fit(&self, w: &BlowUp, x: &[f64], r: f64, k: usize) -> Result<SymmetryFit, SymmetryError> {
        let mut candidates = self.dictionary[k].clone();
        if k > 0 && k < w.dim() {
            candidates.push((self.moment_frame(x, r, k)?.0, FitMethod::MomentSpectrum));
        }
        fit_k_symmetric(w, k, &candidates)
    }

    /// `(k, ε)`-symmetry defect of `u` in `B_r(x)`.
    pub fn defect(&self, x: &[f64], r: f64, k: usize) -> Result<SymmetryDefect, SymmetryError> {
        let n = self.u.grid().dim();
        if k > n {
            return Err(SymmetryError::InvalidLevel { k, dim: n });
        }
        let w = self.blow_up(x, r)?;
        let mut best: Option<SymmetryFit> = None;
        for j in k..=n {
            let fit = self.level_fit(&w, x, r, j)?;
            if best.as_ref().map_or(true, |b| fit.defect < b.defect) {
                best = Some(fit);
            }
        }
        let fit = best.expect("at least level n");
        let gradient_criterion = if k == 0 { 0.0 } else { self.moment_frame(x, r, k)?.1 };
        Ok(SymmetryDefect { k, defect: fit.defect, fit, gradient_criterion, clipped_fraction: w.clipped_fraction })
    }

    /// `min_{j ≥ k}` fitted defect from one blow-up.
    fn min_defect(&self, x: &[f64], r: f64, k: usize) -> Result<f64, SymmetryError> {
        let w = self.blow_up(x, r)?;
        let n = w.dim();
        let mut best = f64::INFINITY;
        for j in k..=n {
            let mut frames: Vec<&Frame> = self.dictionary[j].iter().map(|(f, _)| f).collect();
            let moment;
            if j > 0 && j < n {
                moment = self.moment_frame(x, r, j)?.0;
                frames.push(&moment);
            }
            for f in frames {
                best = best.min(fit_frame(&w, f).0);
            }
        }
        Ok(best)
    }

    /// Scans the dyadic ladder `r_max·2^{−i} ≥ r_min` at each sample and flags
    /// points that are `(k+1, ε)`-symmetric at no scale.
    pub fn stratum(
        &self,
        k: usize,
        epsilon: f64,
        r_min: f64,
        r_max: f64,
        samples: &[Vec<f64>],
    ) -> Result<StratumReport, SymmetryError> {
        let n = self.u.grid().dim();
        if k >= n {
            return Err(SymmetryError::InvalidLevel { k, dim: n - 1 });
        }
        let ladder = dyadic_ladder(r_min, r_max)?;
        for (index, x) in samples.iter().enumerate() {
            if x.len() != n {
                return Err(SymmetryError::PointDimension { expected: n, got: x.len() });
            }
            let available = self.u.grid().distance_to_boundary(x);
            let needed = 10.0 * r_max;
            if available < needed {
                return Err(SymmetryError::SampleMargin { index, needed, available });
            }
        }
        let points = samples
            .par_iter()
            .map(|x| {
                let defects = ladder.iter().map(|&s| self.min_defect(x, s, k + 1)).collect::<Result<Vec<_>, _>>()?;
                let best_defect = defects.iter().copied().fold(f64::INFINITY, f64::min);
                Ok(StratumPoint { x: x.clone(), flagged: best_defect >= epsilon, best_defect, defects })
            })
            .collect::<Result<Vec<_>, SymmetryError>>()?;
        let flagged_count = points.iter().filter(|p| p.flagged).count();
        Ok(StratumReport {
            epsilon,
            r_min,
            r_max,
            k,
            ladder,
            flagged_fraction: if points.is_empty() { 0.0 } else { flagged_count as f64 / points.len() as f64 },
            flagged_count,
            points,
        })
    }
}

fn dyadic_ladder(r_min: f64, r_max: f64) -> Result<Vec<f64>, SymmetryError> {
    if !(r_min > 0.0 && r_max.is_finite() && r_min <= r_max) {
        return Err(SymmetryError::EmptyLadder { r_min, r_max });
    }
    let mut out = vec![];
    let mut s = r_max;
    while s >= r_min * (1.0 - 1e-12) {
        out.push(s);
        s *= 0.5;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumPoint {
    pub x: Vec<f64>,
    pub flagged: bool,
    /// Smallest `(k+1)`-level defect over the ladder.
    pub best_defect: f64,
    /// Per ladder scale, `min_{j ≥ k+1}` fitted defect.
    pub defects: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumReport {
    pub epsilon: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub k: usize,
    pub ladder: Vec<f64>,
    pub points: Vec<StratumPoint>,
    pub flagged_count: usize,
    pub flagged_fraction: f64,
}

impl StratumReport {
    pub fn flagged_points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().filter(|p| p.flagged).map(|p| p.x.as_slice())
    }

    /// Every point flagged here is flagged in `other` (same sample order).
    pub fn is_subset_of(&self, other: &StratumReport) -> bool {
        self.points.len() == other.points.len()
            && self.points.iter().zip(&other.points).all(|(a, b)| !a.flagged || b.flagged)
    }
}

/// Free-function form of [`SymmetryProbe::defect`] with default options.
pub fn symmetry_defect(u: &ScalarField, x: &[f64], r: f64, k: usize, p: f64) -> Result<SymmetryDefect, SymmetryError> {
    SymmetryProbe::new(u, p, SymmetryOptions::default())?.defect(x, r, k)
}

/// Free-function form of [`SymmetryProbe::stratum`].
pub fn quantitative_stratum(
    u: &ScalarField,
    p: f64,
    k: usize,
    epsilon: f64,
    r_min: f64,
    r_max: f64,
    samples: &[Vec<f64>],
    opts: SymmetryOptions,
) -> Result<StratumReport, SymmetryError> {
    SymmetryProbe::new(u, p, opts)?.stratum(k, epsilon, r_min, r_max, samples)
}

/// Centers of cells with `u < ε·r^α`, optionally restricted to a ball.
pub fn rupture_points(u: &ScalarField, epsilon: f64, r: f64, p: f64, within: Option<&BallRegion>) -> Vec<Vec<f64>> {
    let threshold = epsilon * r.powf(alpha(p));
    let g = u.grid();
    (0..g.len())
        .filter(|&c| u.values()[c] < threshold)
        .map(|c| g.center_of(c))
        .filter(|y| within.map_or(true, |b| b.contains(y)))
        .collect()
}
