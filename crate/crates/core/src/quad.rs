//! One-dimensional Gauss–Legendre quadrature, fixed and adaptive.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge on [{a}, {b}] (estimate {estimate}, error {error})")]
    NonConvergence { a: f64, b: f64, estimate: f64, error: f64 },
    #[error("non-finite integrand value")]
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [−1, 1] by Newton iteration on Pₙ.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let m = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(c + m * x)).sum::<f64>() * m
    }
}

/// Adaptive bisection with a 10-point rule; local error is the difference
/// between the parent and the sum of its halves. Children inherit `tol/√2`,
/// which keeps endpoint singularities like `√x` tractable.
pub fn adaptive<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64, QuadError> {
    let rule = GaussLegendre::new(10);
    let mut f = f;
    let whole = rule.integrate(&mut f, a, b);
    let v = recurse(&rule, &mut f, a, b, whole, tol, max_depth)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadError::NonFinite)
    }
}

fn recurse<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadError> {
    let m = 0.5 * (a + b);
    let left = rule.integrate(&mut *f, a, m);
    let right = rule.integrate(&mut *f, m, b);
    let err = (left + right - whole).abs();
    if !err.is_finite() {
        return Err(QuadError::NonFinite);
    }
    if err <= tol.max(1e-15 * (left + right).abs()) {
        return Ok(left + right);
    }
    if depth == 0 {
        return Err(QuadError::NonConvergence { a, b, estimate: left + right, error: err });
    }
    Ok(recurse(rule, f, a, m, left, std::f64::consts::FRAC_1_SQRT_2 * tol, depth - 1)?
        + recurse(rule, f, m, b, right, std::f64::consts::FRAC_1_SQRT_2 * tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_polynomials_of_degree_2n_minus_1() {
        let g = GaussLegendre::new(5);
        let v = g.integrate(|x| x.powi(9) + 3.0 * x.powi(8), 0.0, 2.0);
        let exact = 2f64.powi(10) / 10.0 + 3.0 * 2f64.powi(9) / 9.0;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let v = adaptive(|x| x.sqrt(), 0.0, 1.0, 1e-12, 40).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn reports_non_convergence() {
        let r = adaptive(|x| 1.0 / x, 0.0, 1.0, 1e-12, 3);
        assert!(matches!(r, Err(QuadError::NonConvergence { .. }) | Err(QuadError::NonFinite)));
    }
}
