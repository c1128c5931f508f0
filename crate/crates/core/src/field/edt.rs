//! Exact Euclidean distance transform by separable lower envelopes of
//! parabolas, one axis at a time.

use super::{FieldError, Mask, ScalarField};

/// Squared distance transform of a sampled 1-D function `f` (entries may be
/// `+∞`), written into `out`. `v`/`z` are scratch buffers.
fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    v.clear();
    z.clear();
    for (q, &fq) in f.iter().enumerate() {
        if !fq.is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let pf = p as f64;
                    let s = ((fq + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while k + 1 < v.len() && z[k + 1] < qf {
            k += 1;
        }
        let p = v[k] as f64;
        *o = (qf - p) * (qf - p) + f[v[k]];
    }
}

/// Euclidean distance from every cell center to the nearest set cell center.
pub fn distance_transform(mask: &Mask) -> Result<ScalarField, FieldError> {
    if mask.count() == 0 {
        return Err(FieldError::EmptyMask);
    }
    let g = mask.grid();
    let n = g.dim();
    let mut d2: Vec<f64> =
        mask.values().iter().map(|&b| if b { 0.0 } else { f64::INFINITY }).collect();
    let mut line = Vec::new();
    let mut res = Vec::new();
    let (mut v, mut z) = (Vec::new(), Vec::new());
    let mut idx = vec![0; n];
    for axis in 0..n {
        let len = g.shape()[axis];
        let stride = g.strides()[axis];
        line.resize(len, 0.0);
        res.resize(len, 0.0);
        for start in 0..g.len() {
            g.unravel(start, &mut idx);
            if idx[axis] != 0 {
                continue;
            }
            for i in 0..len {
                line[i] = d2[start + i * stride];
            }
            envelope_1d(&line, &mut res, &mut v, &mut z);
            for i in 0..len {
                d2[start + i * stride] = res[i];
            }
        }
    }
    let h = g.h();
    let values = d2.into_iter().map(|s| s.sqrt() * h).collect();
    Ok(ScalarField::new_unchecked(g.clone(), values, "dist"))
}

/// All-pairs reference implementation, `O(cells · set cells)`.
pub fn distance_transform_bruteforce(mask: &Mask) -> Result<ScalarField, FieldError> {
    let set: Vec<Vec<f64>> = mask.set_cells().map(|c| mask.grid().center_of(c)).collect();
    if set.is_empty() {
        return Err(FieldError::EmptyMask);
    }
    let g = mask.grid().clone();
    Ok(ScalarField::from_fn(g, "dist", |y| {
        set.iter().map(|s| super::dist2(s, y)).fold(f64::INFINITY, f64::min).sqrt()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    #[test]
    fn single_cell_gives_euclidean_norm() {
        let g = Grid::symmetric(2, 0.1, 21).unwrap();
        let mask = Mask::from_fn(g.clone(), |x| x[0].abs() < 1e-9 && x[1].abs() < 1e-9);
        let d = distance_transform(&mask).unwrap();
        for c in 0..g.len() {
            let x = g.center_of(c);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            assert!((d.values()[c] - r).abs() < 1e-12);
        }
    }

    #[test]
    fn two_cells_midpoint() {
        let g = Grid::symmetric(2, 1.0, 5).unwrap();
        let mask = Mask::from_fn(g.clone(), |x| x[1] == 0.0 && x[0].abs() == 1.0);
        let d = distance_transform(&mask).unwrap();
        assert_eq!(d.at(&[2, 2]), 1.0);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let g = Grid::symmetric(2, 1.0, 5).unwrap();
        let mask = Mask::new(g.clone(), vec![false; g.len()]).unwrap();
        assert!(matches!(distance_transform(&mask), Err(FieldError::EmptyMask)));
    }

    #[test]
    fn three_dimensional_agrees_with_bruteforce() {
        let g = Grid::symmetric(3, 0.5, 9).unwrap();
        let mask = Mask::from_fn(g, |x| (x[0] - 0.5).abs() < 1e-9 && x[1] + x[2] > 1.2);
        let a = distance_transform(&mask).unwrap();
        let b = distance_transform_bruteforce(&mask).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
