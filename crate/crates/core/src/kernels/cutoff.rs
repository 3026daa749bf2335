//! Smooth radial cutoffs built from polynomial smoothsteps.
//!
//! `phi` interpolates from `pi` (r <= 1) down to 0 (r >= 2); `phi_lt1` from 1
//! (r <= 1/2) down to 0 (r >= 1); `phi_gt1 = 1 - phi_lt1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Which cutoff to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// Boundary profile: `pi` on `r <= 1`, `0` on `r >= 2`.
    Phi,
    /// Inner partition: `1` on `r <= 1/2`, `0` on `r >= 1`.
    PhiLt1,
    /// Outer partition `1 - phi_lt1`.
    PhiGt1,
}

/// Polynomial smoothstep of odd order `2n + 1`, which is `C^n` at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile {
    order: usize,
    // coefficients of S(x) = sum_k c_k x^k on [0, 1]
    coeffs: Vec<f64>,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self::new(7).expect("order 7 is valid")
    }
}

impl CutoffProfile {
    pub fn new(order: usize) -> Result<Self> {
        if order < 5 || order % 2 == 0 {
            return Err(Error::param(
                "cutoff_order",
                format!("must be an odd integer >= 5, got {order}"),
            ));
        }
        let n = (order - 1) / 2;
        // S_n(x) = x^{n+1} sum_{k=0}^{n} C(n+k, k) C(2n+1, n-k) (-x)^k
        let mut coeffs = vec![0.0; order + 1];
        for k in 0..=n {
            let c = binomial(n + k, k) * binomial(2 * n + 1, n - k);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[n + 1 + k] = sign * c;
        }
        Ok(Self { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Derivative `d` (0..=2) of the smoothstep at `x`, clamped outside `[0, 1]`.
    fn smoothstep(&self, x: f64, d: usize) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return if d == 0 { 1.0 } else { 0.0 };
        }
        let mut acc = 0.0;
        let mut xp = 1.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(d) {
            let falling = (0..d).fold(1.0, |p, i| p * (k - i) as f64);
            acc += c * falling * xp;
            xp *= x;
        }
        acc
    }

    /// Evaluate derivative `order` (0..=2) of a cutoff at radius `r`.
    pub fn eval(&self, which: Cutoff, r: f64, order: usize) -> Result<f64> {
        if order > 2 {
            return Err(Error::DerivativeOrder(order));
        }
        Ok(self.eval_unchecked(which, r, order))
    }

    pub(crate) fn eval_unchecked(&self, which: Cutoff, r: f64, order: usize) -> f64 {
        let r = r.abs();
        match which {
            Cutoff::Phi => {
                // pi * (1 - S(r - 1))
                let s = self.smoothstep(r - 1.0, order);
                if order == 0 {
                    PI * (1.0 - s)
                } else {
                    -PI * s
                }
            }
            Cutoff::PhiLt1 => {
                // 1 - S(2r - 1)
                let scale = 2f64.powi(order as i32);
                let s = self.smoothstep(2.0 * r - 1.0, order);
                if order == 0 {
                    1.0 - s
                } else {
                    -scale * s
                }
            }
            Cutoff::PhiGt1 => {
                if order == 0 {
                    // exact partition of unity with phi_lt1
                    return 1.0 - self.eval_unchecked(Cutoff::PhiLt1, r, 0);
                }
                let scale = 2f64.powi(order as i32);
                scale * self.smoothstep(2.0 * r - 1.0, order)
            }
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.eval_unchecked(Cutoff::Phi, r, 0)
    }

    pub fn phi_lt1(&self, r: f64) -> f64 {
        self.eval_unchecked(Cutoff::PhiLt1, r, 0)
    }

    pub fn phi_gt1(&self, r: f64) -> f64 {
        self.eval_unchecked(Cutoff::PhiGt1, r, 0)
    }

    /// Radial Laplacian `phi'' + (dim - 1) phi' / r` of the boundary profile.
    ///
    /// Identically zero outside `1 < r < 2`. The lifted equation uses
    /// `dim = 2`: the source term comes from the two-dimensional operator
    /// acting on `u = r v + phi`.
    pub fn laplacian_phi(&self, r: f64, dim: usize) -> f64 {
        if r <= 1.0 || r >= 2.0 {
            return 0.0;
        }
        let d1 = self.eval_unchecked(Cutoff::Phi, r, 1);
        let d2 = self.eval_unchecked(Cutoff::Phi, r, 2);
        d2 + (dim as f64 - 1.0) * d1 / r
    }

    /// Four-dimensional radial Laplacian of the boundary profile.
    pub fn laplacian_phi_4d(&self, r: f64) -> f64 {
        self.laplacian_phi(r, 4)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_coefficients_order_7() {
        let p = CutoffProfile::new(7).unwrap();
        // 35x^4 - 84x^5 + 70x^6 - 20x^7
        assert_eq!(p.coeffs, vec![0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0]);
        let p5 = CutoffProfile::new(5).unwrap();
        assert_eq!(p5.coeffs, vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0]);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(CutoffProfile::new(4).is_err());
        assert!(CutoffProfile::new(3).is_err());
        assert!(CutoffProfile::new(8).is_err());
        let p = CutoffProfile::default();
        assert_eq!(p.eval(Cutoff::Phi, 1.5, 3), Err(Error::DerivativeOrder(3)));
    }

    #[test]
    fn plateaus_are_exact() {
        let p = CutoffProfile::default();
        assert_eq!(p.phi(0.5), PI);
        assert_eq!(p.phi(1.0), PI);
        assert_eq!(p.phi(2.0), 0.0);
        assert_eq!(p.phi(7.0), 0.0);
        assert_eq!(p.phi_lt1(0.25), 1.0);
        assert_eq!(p.phi_lt1(1.0), 0.0);
        assert_eq!(p.phi_gt1(3.0), 1.0);
        assert_eq!(p.phi_gt1(0.5), 0.0);
    }

    #[test]
    fn partition_of_unity_is_exact() {
        let p = CutoffProfile::default();
        for i in 0..=400 {
            let r = i as f64 * 0.005;
            assert_eq!(p.phi_gt1(r), 1.0 - p.phi_lt1(r), "r = {r}");
        }
    }

    #[test]
    fn cutoffs_are_monotone() {
        let p = CutoffProfile::default();
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for i in 0..=3000 {
            let r = i as f64 * 1e-3;
            let cur = (p.phi(r), p.phi_lt1(r));
            assert!(cur.0 <= prev.0 && cur.1 <= prev.1, "r = {r}");
            prev = cur;
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = CutoffProfile::default();
        let h = 1e-4;
        for which in [Cutoff::Phi, Cutoff::PhiLt1, Cutoff::PhiGt1] {
            for i in 1..40 {
                let r = 0.4 + i as f64 * 0.04;
                let f = |x: f64| p.eval_unchecked(which, x, 0);
                let fd1 = (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h))
                    / (12.0 * h);
                let fd2 = (-f(r - 2.0 * h) + 16.0 * f(r - h) - 30.0 * f(r)
                    + 16.0 * f(r + h)
                    - f(r + 2.0 * h))
                    / (12.0 * h * h);
                assert!((p.eval_unchecked(which, r, 1) - fd1).abs() < 1e-9);
                assert!((p.eval_unchecked(which, r, 2) - fd2).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn laplacian_phi_matches_fourth_order_fd() {
        let p = CutoffProfile::default();
        let r = 1.5;
        let h = 1e-3;
        let f = |x: f64| p.phi(x);
        let d1 = (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h);
        let d2 = (-f(r - 2.0 * h) + 16.0 * f(r - h) - 30.0 * f(r) + 16.0 * f(r + h)
            - f(r + 2.0 * h))
            / (12.0 * h * h);
        let fd = d2 + 3.0 * d1 / r;
        assert!((p.laplacian_phi_4d(r) - fd).abs() < 1e-8);
        let fd2 = d2 + d1 / r;
        assert!((p.laplacian_phi(r, 2) - fd2).abs() < 1e-8);
        assert_eq!(p.laplacian_phi_4d(0.7), 0.0);
        assert_eq!(p.laplacian_phi_4d(2.5), 0.0);
    }
}
