/// The mollifier `φ`: linear `10 − t` on `[0, 8]`, a quintic on `[8, 10]`
/// matching value, slope and curvature at both ends, zero beyond.
///
/// With `s = 10 − t` the quintic is `1.5s³ − s⁴ + 0.1875s⁵`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Cutoff;

impl Cutoff {
    /// `supp φ = [0, SUPPORT)`.
    pub const SUPPORT: f64 = 10.0;

    pub fn phi(self, t: f64) -> f64 {
        if t <= 8.0 {
            10.0 - t
        } else if t < 10.0 {
            let s = 10.0 - t;
            s * s * s * (1.5 - s + 0.1875 * s * s)
        } else {
            0.0
        }
    }

    pub fn dphi(self, t: f64) -> f64 {
        if t <= 8.0 {
            -1.0
        } else if t < 10.0 {
            let s = 10.0 - t;
            -s * s * (4.5 - 4.0 * s + 0.9375 * s * s)
        } else {
            0.0
        }
    }

    pub fn d2phi(self, t: f64) -> f64 {
        if t < 8.0 || t >= 10.0 {
            0.0
        } else {
            let s = 10.0 - t;
            s * (9.0 - 12.0 * s + 3.75 * s * s)
        }
    }

    /// Spatial support radius of `φ(|y−x|²/r²)`.
    pub fn reach(self, r: f64) -> f64 {
        r * Self::SUPPORT.sqrt()
    }
}

impl crate::field::RadialWeight for Cutoff {
    fn support(&self) -> f64 {
        Self::SUPPORT
    }
    fn weight(&self, t: f64) -> f64 {
        self.phi(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_at_junctions() {
        let c = Cutoff;
        assert_eq!(c.phi(8.0), 2.0);
        assert!((c.phi(8.0 + 1e-12) - 2.0).abs() < 1e-10);
        assert!((c.dphi(8.0 + 1e-12) + 1.0).abs() < 1e-10);
        assert!(c.d2phi(8.0 + 1e-12).abs() < 1e-9);
        assert_eq!(c.phi(10.0), 0.0);
        assert!(c.dphi(10.0 - 1e-9).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let c = Cutoff;
        for i in 1..400 {
            let t = 8.0 + i as f64 * 0.005;
            let fd = (c.phi(t + 1e-6) - c.phi(t - 1e-6)) / 2e-6;
            assert!((fd - c.dphi(t)).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn sampled_invariants() {
        let c = Cutoff;
        for i in 0..10_000 {
            let t = 12.0 * i as f64 / 9_999.0;
            let (v, d) = (c.phi(t), c.dphi(t));
            assert!(v >= 0.0 && d <= 0.0 && d.abs() <= 100.0);
            if t <= 8.0 {
                assert!((-2.0..=-1.0).contains(&d));
            }
            if t >= 10.0 {
                assert_eq!(v, 0.0);
            }
        }
    }
}
