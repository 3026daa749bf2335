//! Pointwise analytic objects of the lifted equation.
//!
//! Everything here is a pure function of its arguments. Removable
//! singularities at zero argument are resolved with truncated Taylor series
//! below [`KernelParams::x_switch`].
//!
//! Convention: the equivariant angle satisfies `u(t, 0) = pi` and
//! `u(t, r) -> 0` as `r -> infinity`.

mod cutoff;

pub use cutoff::{Cutoff, CutoffProfile};

use crate::error::{Error, Result};

/// The five even kernels `F~_0 .. F~_4` of the small-radius nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FTilde {
    F0,
    F1,
    F2,
    F3,
    F4,
}

impl FTilde {
    pub const ALL: [FTilde; 5] = [FTilde::F0, FTilde::F1, FTilde::F2, FTilde::F3, FTilde::F4];

    pub fn from_index(j: usize) -> Option<Self> {
        Self::ALL.get(j).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Which of the `A` coefficients to evaluate with [`KernelParams::eval_a`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AKind {
    /// `1 + alpha^2 r^-2 sin^2 u`, argument is `u`.
    A1,
    /// `1 + alpha^2 r^-2 sin^2 y`.
    A3,
    /// `1 + alpha^2 r^-2 sin^2 (r y)`, with limit `1 + alpha^2 y^2` at `r = 0`.
    A4,
    /// `1 + alpha^2 r^-2 sin^2 (r y + phi(r))`.
    A5,
}

/// Coupling constant, series switchover and cutoff shape.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    alpha: f64,
    x_switch: f64,
    series_terms: usize,
    cutoff: CutoffProfile,
    // Taylor coefficients in powers of x^2, alpha^2 factored out.
    series: [Vec<f64>; 5],
}

impl Default for KernelParams {
    fn default() -> Self {
        Self::new(1.0, Self::DEFAULT_X_SWITCH, 8, CutoffProfile::default())
            .expect("defaults are valid")
    }
}

impl KernelParams {
    pub const DEFAULT_X_SWITCH: f64 = 0.25;

    pub fn new(
        alpha: f64,
        x_switch: f64,
        series_terms: usize,
        cutoff: CutoffProfile,
    ) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be non-negative, got {alpha}")));
        }
        if !(x_switch > 0.0 && x_switch <= 1.0) {
            return Err(Error::param(
                "x_switch",
                format!("must lie in (0, 1], got {x_switch}"),
            ));
        }
        if !(4..=16).contains(&series_terms) {
            return Err(Error::param(
                "series_terms",
                format!("must lie in 4..=16, got {series_terms}"),
            ));
        }
        Ok(Self {
            alpha,
            x_switch,
            series_terms,
            cutoff,
            series: series_tables(series_terms),
        })
    }

    /// Default switchover and cutoff with the given coupling constant.
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, Self::DEFAULT_X_SWITCH, 8, CutoffProfile::default())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x_switch(&self) -> f64 {
        self.x_switch
    }

    pub fn series_terms(&self) -> usize {
        self.series_terms
    }

    pub fn cutoff(&self) -> &CutoffProfile {
        &self.cutoff
    }

    fn alpha2(&self) -> f64 {
        self.alpha * self.alpha
    }

    fn kernel_scale(&self, j: FTilde) -> f64 {
        match j {
            FTilde::F1 => 1.0,
            _ => self.alpha2(),
        }
    }

    /// `F~_j(x)`, exactly even in `x`.
    pub fn ftilde(&self, j: FTilde, x: f64) -> f64 {
        let x = x.abs();
        if x < self.x_switch {
            self.ftilde_series(j, x)
        } else {
            self.ftilde_direct(j, x)
        }
    }

    /// All five kernels at once, sharing one `sin`/`cos` evaluation.
    pub fn ftilde_all(&self, x: f64) -> [f64; 5] {
        let x = x.abs();
        if x < self.x_switch {
            return FTilde::ALL.map(|j| self.ftilde_series(j, x));
        }
        let (s, c) = x.sin_cos();
        direct_kernels(s, c, x, self.alpha2())
    }

    /// Closed-form evaluation; loses accuracy as `x -> 0`.
    pub fn ftilde_direct(&self, j: FTilde, x: f64) -> f64 {
        let x = x.abs();
        let (s, c) = x.sin_cos();
        direct_kernels(s, c, x, self.alpha2())[j.index()]
    }

    /// Truncated Taylor series in `x^2`.
    pub fn ftilde_series(&self, j: FTilde, x: f64) -> f64 {
        let z = x * x;
        let coeffs = &self.series[j.index()];
        let poly = coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c);
        self.kernel_scale(j) * poly
    }

    /// Evaluate one of the `A` coefficients. For `A1`, `y` is the field value
    /// `u`. `A1` and `A3` at `r = 0` return their pointwise limit (`1` when
    /// `sin y = 0`, otherwise `+inf`).
    pub fn eval_a(&self, kind: AKind, y: f64, r: f64) -> f64 {
        match kind {
            AKind::A1 | AKind::A3 => self.a3(y, r),
            AKind::A4 => self.a4(y, r),
            AKind::A5 => self.a5(y, r),
        }
    }

    pub fn a1(&self, u: f64, r: f64) -> f64 {
        self.a3(u, r)
    }

    pub fn a3(&self, y: f64, r: f64) -> f64 {
        let s = y.sin();
        if r == 0.0 {
            return if s == 0.0 { 1.0 } else { f64::INFINITY };
        }
        1.0 + self.alpha2() * s * s / (r * r)
    }

    pub fn a4(&self, y: f64, r: f64) -> f64 {
        let x = r * y;
        1.0 + self.alpha2() * y * y * sinc_sq(x)
    }

    /// `A_5(y, r)`; equals `A_1` of `u = r y + phi` and stays finite at `r = 0`.
    pub fn a5(&self, y: f64, r: f64) -> f64 {
        if r <= 1.0 {
            // phi == pi exactly here, and sin^2 is pi-periodic
            self.a4(y, r)
        } else {
            let s = (r * y + self.cutoff.phi(r)).sin();
            1.0 + self.alpha2() * s * s / (r * r)
        }
    }

    /// The general nonlinearity `N(u)` at a point with `r > 0`.
    pub fn eval_n(&self, u: f64, u_t: f64, u_r: f64, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius(r));
        }
        Ok(self.n_unchecked(u, u_t, u_r, r))
    }

    fn n_unchecked(&self, u: f64, u_t: f64, u_r: f64, r: f64) -> f64 {
        let (s, c) = u.sin_cos();
        let r2 = r * r;
        let excess = self.alpha2() * s * s / r2;
        let a = 1.0 + excess;
        -2.0 * (excess / a) * u_r / r
            - (self.alpha2() * (u_t * u_t - u_r * u_r) + 1.0) * s * c / (r2 * a)
    }

    /// The right-hand side `F(v)` of the lifted equation `v_tt - lap_4 v = F(v)`.
    ///
    /// Inside `r < 1` the kernel sum branch is weighted by `phi_lt1`; the
    /// direct branch `r^-2 v + r^-1 N(r v + phi)` is weighted by `phi_gt1`.
    pub fn eval_f_rhs(&self, v: f64, v_t: f64, v_r: f64, r: f64) -> f64 {
        let cutoff = &self.cutoff;
        let lt = cutoff.phi_lt1(r);
        let gt = 1.0 - lt;
        let mut total = 0.0;
        if lt > 0.0 {
            total += lt * self.kernel_sum(v, v_t, v_r, r);
        }
        if gt > 0.0 {
            // N depends on u only through sin^2 u and sin u cos u; dropping a
            // plateau value of pi keeps sin u exactly zero for v = 0
            let phi = cutoff.phi(r);
            let base = if phi == std::f64::consts::PI { 0.0 } else { phi };
            let u = r * v + base;
            let u_t = r * v_t;
            let u_r = v + r * v_r + cutoff.eval_unchecked(Cutoff::Phi, r, 1);
            total += gt * (v / (r * r) + self.n_unchecked(u, u_t, u_r, r) / r);
        }
        let source = cutoff.laplacian_phi(r, 2);
        if source != 0.0 {
            total += source / r;
        }
        total
    }

    /// `(sum_j F~_j(r v) F_j(v)) / (1 + F~_0(r v) v^2)`, which equals
    /// `r^-2 v + r^-1 N(r v + pi)` for `r > 0` and stays regular at `r = 0`.
    pub fn kernel_sum(&self, v: f64, v_t: f64, v_r: f64, r: f64) -> f64 {
        let k = self.ftilde_all(r * v);
        let v2 = v * v;
        let v3 = v2 * v;
        let terms = k[1] * v3
            + k[2] * v3 * v2
            + k[3] * v * (v_t * v_t - v_r * v_r)
            + k[4] * r * v2 * v2 * v_r;
        terms / (1.0 + k[0] * v2)
    }
}

fn direct_kernels(s: f64, c: f64, x: f64, alpha2: f64) -> [f64; 5] {
    let sinc = s / x;
    let x2 = x * x;
    let f2 = alpha2 * s * (c - sinc) / (x2 * x);
    [
        alpha2 * sinc * sinc,
        (1.0 - sinc * c) / x2,
        f2,
        -alpha2 * sinc * c,
        2.0 * f2,
    ]
}

/// `(sin x / x)^2`, equal to 1 at `x = 0`.
pub(crate) fn sinc_sq(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let z = x * x;
        1.0 - z / 3.0 + 2.0 * z * z / 45.0
    } else {
        let s = x.sin() / x;
        s * s
    }
}

fn series_tables(terms: usize) -> [Vec<f64>; 5] {
    // sin x cos x / x = sum_k (-1)^k 4^k x^{2k} / (2k+1)!
    // sin^2 x / x^2   = sum_k (-1)^k 2^{2k+1} x^{2k} / (2k+2)!
    let factorial = |n: usize| (1..=n).fold(1.0f64, |acc, i| acc * i as f64);
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let sc = |k: usize| sign(k) * 4f64.powi(k as i32) / factorial(2 * k + 1);
    let ss = |k: usize| sign(k) * 2f64.powi(2 * k as i32 + 1) / factorial(2 * k + 2);
    let f0 = (0..terms).map(ss).collect();
    let f1 = (0..terms).map(|m| -sc(m + 1)).collect();
    let f2: Vec<f64> = (0..terms).map(|m| sc(m + 1) - ss(m + 1)).collect();
    let f3 = (0..terms).map(|m| -sc(m)).collect();
    let f4 = f2.iter().map(|c| 2.0 * c).collect();
    [f0, f1, f2, f3, f4]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn limits_at_origin() {
        let p = KernelParams::default();
        assert_eq!(p.ftilde(FTilde::F0, 0.0), 1.0);
        assert_eq!(p.ftilde(FTilde::F3, 0.0), -1.0);
        assert!(rel(p.ftilde(FTilde::F1, 0.0), 2.0 / 3.0) < 1e-15);
        assert!(rel(p.ftilde(FTilde::F2, 0.0), -1.0 / 3.0) < 1e-15);
        assert!(rel(p.ftilde(FTilde::F4, 0.0), -2.0 / 3.0) < 1e-15);
        assert!(p.ftilde(FTilde::F0, PI).abs() < 1e-30);
    }

    #[test]
    fn alpha_scaling() {
        let p = KernelParams::with_alpha(2.0).unwrap();
        assert_eq!(p.ftilde(FTilde::F0, 0.0), 4.0);
        assert!(rel(p.ftilde(FTilde::F1, 0.0), 2.0 / 3.0) < 1e-15);
        assert!(rel(p.ftilde(FTilde::F2, 0.0), -4.0 / 3.0) < 1e-15);
        assert!(rel(p.ftilde(FTilde::F4, 1.3), 2.0 * p.ftilde(FTilde::F2, 1.3)) < 1e-15);
    }

    #[test]
    fn seam_is_continuous() {
        let p = KernelParams::default();
        let xs = p.x_switch();
        for j in FTilde::ALL {
            let a = p.ftilde_series(j, xs);
            let b = p.ftilde_direct(j, xs);
            assert!(rel(a, b) < 1e-12, "{j:?}: {a} vs {b}");
        }
    }

    #[test]
    fn ftilde_all_matches_single() {
        let p = KernelParams::default();
        for &x in &[0.0, 0.1, 0.3, 2.0, -7.5] {
            let all = p.ftilde_all(x);
            for j in FTilde::ALL {
                assert_eq!(all[j.index()], p.ftilde(j, x));
            }
        }
    }

    #[test]
    fn a_examples() {
        let p = KernelParams::default();
        assert_eq!(p.a1(0.0, 1.0), 1.0);
        assert_eq!(p.a3(PI / 2.0, 1.0), 2.0);
        assert_eq!(p.a4(2.0, 0.0), 5.0);
        assert_eq!(p.eval_a(AKind::A4, 2.0, 0.0), 5.0);
        // A5 at small r reduces to A4
        assert_eq!(p.a5(0.7, 0.3), p.a4(0.7, 0.3));
        // A5 equals A1 of the reconstructed angle
        let (y, r) = (0.4, 1.5);
        let u = r * y + p.cutoff().phi(r);
        assert!(rel(p.a5(y, r), p.a1(u, r)) < 1e-14);
    }

    #[test]
    fn nonlinearity_examples() {
        let p = KernelParams::default();
        assert!(p.eval_n(PI, 0.0, 0.0, 1.0).unwrap().abs() < 1e-15);
        assert!(p.eval_n(PI / 2.0, 0.0, 0.0, 2.0).unwrap().abs() < 1e-16);
        assert!(rel(p.eval_n(PI / 4.0, 0.0, 0.0, 1.0).unwrap(), -1.0 / 3.0) < 1e-15);
        assert_eq!(
            p.eval_n(1.0, 0.0, 0.0, 0.0),
            Err(Error::NonPositiveRadius(0.0))
        );
        assert!(p.eval_n(1.0, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn rhs_vanishes_for_zero_data_off_source() {
        let p = KernelParams::default();
        for &r in &[0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 3.5, 10.0] {
            assert!(p.eval_f_rhs(0.0, 0.0, 0.0, r).abs() < 1e-15, "r = {r}");
        }
        assert!(p.eval_f_rhs(0.0, 0.0, 0.0, 1.5).abs() > 1e-3);
    }

    #[test]
    fn rhs_two_path_identity() {
        let p = KernelParams::default();
        let (v, r) = (0.3, 0.25);
        let f = p.eval_f_rhs(v, 0.0, 0.0, r);
        let other = v / (r * r) + p.eval_n(r * v + PI, 0.0, v, r).unwrap() / r;
        assert!(rel(f, other) < 1e-10, "{f} vs {other}");
    }

    #[test]
    fn rhs_at_origin_is_richardson_limit() {
        let p = KernelParams::default();
        let (v, vt, vr) = (0.8, -0.4, 0.3);
        let f = |r: f64| p.eval_f_rhs(v, vt, vr, r);
        let h = 2e-3;
        // F(r) = F(0) + c1 r + c2 r^2 + ...; eliminate the first two terms
        let r1 = 2.0 * f(h / 2.0) - f(h);
        let r2 = 2.0 * f(h / 4.0) - f(h / 2.0);
        let extrapolated = (4.0 * r2 - r1) / 3.0;
        assert!(rel(f(0.0), extrapolated) < 1e-9, "{} vs {extrapolated}", f(0.0));
        // closed form at the origin
        let closed = (2.0 / 3.0 * v.powi(3) - v.powi(5) / 3.0 - v * (vt * vt - vr * vr))
            / (1.0 + v * v);
        assert!(rel(f(0.0), closed) < 1e-14);
    }

    #[test]
    fn rejects_invalid_params() {
        let c = CutoffProfile::default();
        assert!(KernelParams::new(-1.0, 0.25, 8, c.clone()).is_err());
        assert!(KernelParams::new(1.0, 0.0, 8, c.clone()).is_err());
        assert!(KernelParams::new(1.0, 0.25, 3, c).is_err());
    }
}
