use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use super::{BlowUp, SymmetryError};

/// An orthonormal `k`-frame in `ℝⁿ` (`k = 0` is the empty frame).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram–Schmidt of `candidates` against `basis`, keeping vectors that survive
/// with norm above `tol`, until `want` vectors have been added.
pub(crate) fn extend_orthonormal(basis: &mut Vec<Vec<f64>>, candidates: impl Iterator<Item = Vec<f64>>, want: usize, tol: f64) {
    let target = basis.len() + want;
    for mut v in candidates {
        if basis.len() == target {
            break;
        }
        for b in basis.iter() {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > tol {
            v.iter_mut().for_each(|vi| *vi /= norm);
            basis.push(v);
        }
    }
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

impl Frame {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self, SymmetryError> {
        if vectors.len() > dim {
            return Err(SymmetryError::InvalidFrame(format!("{} vectors in dimension {dim}", vectors.len())));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(SymmetryError::InvalidFrame(format!("vector {i} has length {}", v.len())));
            }
            for (j, w) in vectors.iter().enumerate().take(i + 1) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(v, w) - target).abs() > 1e-9 {
                    return Err(SymmetryError::InvalidFrame(format!("vectors {j}, {i} not orthonormal")));
                }
            }
        }
        Ok(Self { dim, vectors })
    }

    /// Span of the listed coordinate axes.
    pub fn axes(dim: usize, axes: &[usize]) -> Result<Self, SymmetryError> {
        if let Some(&a) = axes.iter().find(|&&a| a >= dim) {
            return Err(SymmetryError::InvalidFrame(format!("axis {a} in dimension {dim}")));
        }
        Self::new(dim, axes.iter().map(|&a| unit(dim, a)).collect())
    }

    /// Orthonormalized uniform draws from `[−1, 1]ⁿ`.
    pub fn random<R: Rng>(dim: usize, k: usize, rng: &mut R) -> Self {
        let mut vectors = Vec::with_capacity(k);
        while vectors.len() < k {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            extend_orthonormal(&mut vectors, std::iter::once(v), 1, 1e-3);
        }
        Self { dim, vectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// An orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Vec<Vec<f64>> {
        let mut basis = self.vectors.clone();
        extend_orthonormal(&mut basis, (0..self.dim).map(|i| unit(self.dim, i)), self.dim - self.k(), 1e-6);
        basis.split_off(self.k())
    }

    /// All `k`-subsets of coordinate axes.
    pub fn all_axis_frames(dim: usize, k: usize) -> Vec<Frame> {
        fn rec(dim: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Frame>) {
            if cur.len() == k {
                out.push(Frame::axes(dim, cur).expect("axes in range"));
                return;
            }
            for a in start..dim {
                cur.push(a);
                rec(dim, k, a + 1, cur, out);
                cur.pop();
            }
        }
        let mut out = vec![];
        rec(dim, k, 0, &mut vec![], &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    AxisScan,
    RandomScan,
    MomentSpectrum,
    /// `k = n`: the only `n`-symmetric function is `0`.
    Zero,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryFit {
    pub k: usize,
    pub frame: Frame,
    /// Median of `w/|y_⊥|^α` per angular bin of the unit sphere of `V^⊥`.
    pub angular_profile: Vec<f64>,
    pub defect: f64,
    pub method: FitMethod,
}

/// Angular bins on the unit sphere of a `t`-dimensional space: two signs for
/// `t = 1`, uniform angles for `t = 2` (with periodic linear interpolation),
/// `(z, φ)` cells of equal area for `t = 3`, a single bin beyond.
struct Bins {
    t: usize,
    nz: usize,
    nphi: usize,
}

impl Bins {
    fn new(t: usize, m: usize) -> Self {
        match t {
            1 => Self { t, nz: 1, nphi: 2 },
            2 => Self { t, nz: 1, nphi: (2 * m).max(8) },
            3 => {
                let nz = (m / 2).max(4);
                Self { t, nz, nphi: 2 * nz }
            }
            _ => Self { t, nz: 1, nphi: 1 },
        }
    }

    fn len(&self) -> usize {
        self.nz * self.nphi
    }

    fn phi_index(&self, c: &[f64]) -> (usize, f64) {
        let phi = c[1].atan2(c[0]) + PI;
        let s = phi / (2.0 * PI) * self.nphi as f64;
        ((s.floor() as usize).min(self.nphi - 1), s)
    }

    fn index(&self, c: &[f64], rho: f64) -> usize {
        match self.t {
            1 => (c[0] > 0.0) as usize,
            2 => self.phi_index(c).0,
            3 => {
                let z = (c[2] / rho).clamp(-1.0, 1.0);
                let iz = (((z + 1.0) / 2.0 * self.nz as f64).floor() as usize).min(self.nz - 1);
                iz * self.nphi + self.phi_index(c).0
            }
            _ => 0,
        }
    }

    /// `g` at the direction of `c`; for `t = 2`, piecewise linear through the
    /// nodes `(nodes[b], g[b])` with angles measured in `[0, 2π)`.
    fn profile(&self, g: &[f64], nodes: &[f64], c: &[f64], rho: f64) -> f64 {
        if self.t != 2 {
            return g[self.index(c, rho)];
        }
        let (b, s) = self.phi_index(c);
        let phi = s / self.nphi as f64 * 2.0 * PI;
        let n = self.nphi;
        let (i0, i1) = if phi >= nodes[b] { (b, (b + 1) % n) } else { ((b + n - 1) % n, b) };
        let (a0, mut a1, mut x) = (nodes[i0], nodes[i1], phi);
        if a1 <= a0 {
            a1 += 2.0 * PI;
        }
        if x < a0 {
            x += 2.0 * PI;
        }
        let t = ((x - a0) / (a1 - a0)).clamp(0.0, 1.0);
        (1.0 - t) * g[i0] + t * g[i1]
    }

    fn angle(&self, c: &[f64]) -> f64 {
        c[1].atan2(c[0]) + PI
    }

    fn center_angle(&self, b: usize) -> f64 {
        (b as f64 + 0.5) / self.nphi as f64 * 2.0 * PI
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mid = v.len() / 2;
    let (_, &mut hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if v.len() % 2 == 1 {
        return Some(hi);
    }
    let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(0.5 * (lo + hi))
}

/// Fit against one frame: `(defect, angular profile)`.
pub(crate) fn fit_frame(w: &BlowUp, frame: &Frame) -> (f64, Vec<f64>) {
    let samples: Vec<(Vec<f64>, f64)> = w.unit_ball_samples().collect();
    let n = w.dim();
    if frame.k() == n {
        return (samples.iter().fold(0.0, |a, (_, v)| a.max(v.abs())), vec![]);
    }
    let comp = frame.complement();
    let bins = Bins::new(comp.len(), w.half_width());
    let rho_cut = 0.5 / w.half_width() as f64;
    let alpha = w.alpha;
    let coords: Vec<(Vec<f64>, f64)> = samples
        .iter()
        .map(|(y, _)| {
            let c: Vec<f64> = comp.iter().map(|e| dot(y, e)).collect();
            let rho = dot(&c, &c).sqrt();
            (c, rho)
        })
        .collect();
    let mut buckets = vec![Vec::new(); bins.len()];
    let mut angles = vec![Vec::new(); bins.len()];
    for ((c, rho), (_, v)) in coords.iter().zip(&samples) {
        if *rho >= rho_cut {
            let b = bins.index(c, *rho);
            buckets[b].push(v / rho.powf(alpha));
            if bins.t == 2 {
                angles[b].push(bins.angle(c));
            }
        }
    }
    let mut all: Vec<f64> = buckets.iter().flatten().copied().collect();
    let fallback = median(&mut all).unwrap_or(0.0);
    let g: Vec<f64> = buckets.iter_mut().map(|b| median(b).unwrap_or(fallback)).collect();
    // For a profile monotone across a bin, the median value sits at the
    // median angle, so the nodes carry no binning bias.
    let nodes: Vec<f64> = if bins.t == 2 {
        angles.iter_mut().enumerate().map(|(b, a)| median(a).unwrap_or(bins.center_angle(b))).collect()
    } else {
        vec![]
    };
    let defect = coords.iter().zip(&samples).fold(0.0f64, |acc, ((c, rho), (_, v))| {
        let h = if *rho > 0.0 { rho.powf(alpha) * bins.profile(&g, &nodes, c, *rho) } else { 0.0 };
        acc.max((v - h).abs())
    });
    (defect, g)
}

/// Best fit over `candidates` by a `k`-symmetric function. Candidates whose
/// dimension differs from `k` are ignored; for `k = n` the zero function is
/// the only candidate.
pub fn fit_k_symmetric(w: &BlowUp, k: usize, candidates: &[(Frame, FitMethod)]) -> Result<SymmetryFit, SymmetryError> {
    let n = w.dim();
    if k > n {
        return Err(SymmetryError::InvalidLevel { k, dim: n });
    }
    if k == n {
        let frame = Frame::axes(n, &(0..n).collect::<Vec<_>>())?;
        let (defect, angular_profile) = fit_frame(w, &frame);
        return Ok(SymmetryFit { k, frame, angular_profile, defect, method: FitMethod::Zero });
    }
    candidates
        .iter()
        .filter(|(f, _)| f.k() == k && f.dim() == n)
        .map(|(frame, method)| {
            let (defect, angular_profile) = fit_frame(w, frame);
            SymmetryFit { k, frame: frame.clone(), angular_profile, defect, method: *method }
        })
        .min_by(|a, b| a.defect.total_cmp(&b.defect))
        .ok_or(SymmetryError::NoCandidates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, ScalarField};
    use crate::symmetry::blow_up;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..=3 {
            let f = Frame::random(3, k, &mut rng);
            assert!(Frame::new(3, f.vectors().to_vec()).is_ok());
            let comp = f.complement();
            assert_eq!(comp.len(), 3 - k);
            for e in &comp {
                for v in f.vectors() {
                    assert!(dot(e, v).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn axis_frames_enumerate_subsets() {
        assert_eq!(Frame::all_axis_frames(4, 2).len(), 6);
        assert_eq!(Frame::all_axis_frames(3, 0).len(), 1);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn homogeneous_angular_function_fits_exactly() {
        // |y|^{1/2}(2 + cos φ) is 0-symmetric; bins resolve it up to interpolation.
        let h = |y: &[f64]| {
            let r = y[0].hypot(y[1]);
            if r == 0.0 { 0.0 } else { r.sqrt() * (2.0 + y[0] / r) }
        };
        let g = Grid::symmetric(2, 1.0 / 256.0, 513).unwrap();
        let u = ScalarField::from_fn(g, "u", h);
        let r = 0.5f64;
        let w = blow_up(&u, &[0.0, 0.0], r, 0.5, 16).unwrap();
        let interp = w
            .unit_ball_samples()
            .map(|(y, v)| (v - h(&[r * y[0], r * y[1]]) / r.sqrt()).abs())
            .fold(0.0, f64::max);
        let fit = fit_k_symmetric(&w, 0, &[(Frame::axes(2, &[]).unwrap(), FitMethod::AxisScan)]).unwrap();
        assert!(fit.defect < interp + 0.02, "{} vs {interp}", fit.defect);
    }
}
