//! Radial quadrature, discrete Sobolev norms and Gauss-Legendre panels.

use super::{laplacian, stencil::d_r, RadialField};
use crate::error::{Error, Result};

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub const GAUSS_LEGENDRE_5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 128.0 / 225.0),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Composite Simpson over uniformly spaced samples. An odd number of
/// intervals closes with the 3/8 rule on the last three.
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (samples[0] + samples[1]),
        _ => {
            let (body, tail) = if n % 2 == 0 { (n, 0) } else { (n - 3, 3) };
            let mut acc = 0.0;
            for k in (0..body).step_by(2) {
                acc += samples[k] + 4.0 * samples[k + 1] + samples[k + 2];
            }
            let mut total = acc * h / 3.0;
            if tail == 3 {
                let s = &samples[body..];
                total += 3.0 * h / 8.0 * (s[0] + 3.0 * s[1] + 3.0 * s[2] + s[3]);
            }
            total
        }
    }
}

/// `int_0^{r_max} f(r) r^weight_power dr` by composite Simpson.
///
/// No angular-area prefactor is applied.
pub fn integrate_radial(f: &RadialField, weight_power: i32) -> f64 {
    let grid = f.grid();
    let samples: Vec<f64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let r = grid.r(i);
            if weight_power == 0 {
                x
            } else if r == 0.0 {
                if weight_power > 0 {
                    0.0
                } else {
                    x * f64::INFINITY
                }
            } else {
                x * r.powi(weight_power)
            }
        })
        .collect();
    simpson(&samples, grid.dr())
}

/// `L^q` norm against `r^{dim-1} dr`; `q = inf` gives the sup norm.
pub fn lq_norm(f: &RadialField, q: f64) -> f64 {
    if q.is_infinite() {
        return f.max_abs();
    }
    let p = f.map(|x| x.abs().powf(q));
    let w = f.grid().dim() as i32 - 1;
    integrate_radial(&p, w).max(0.0).powf(1.0 / q)
}

/// Integer-order Sobolev norm via the Laplacian-power equivalent form
/// `sum_{2k <= s} |lap^k f|^2 + sum_{2k+1 <= s} |d_r lap^k f|^2`.
pub fn sobolev_norm(f: &RadialField, s: usize) -> Result<f64> {
    if s > 4 {
        return Err(Error::SobolevIndex(s));
    }
    let mut total = 0.0;
    let mut current = f.clone();
    let mut k = 0;
    loop {
        if 2 * k <= s {
            total += lq_norm(&current, 2.0).powi(2);
        }
        if 2 * k + 1 <= s {
            total += lq_norm(&d_r(&current, 1)?, 2.0).powi(2);
        }
        if 2 * (k + 1) > s {
            break;
        }
        current = laplacian(&current)?;
        k += 1;
    }
    Ok(total.sqrt())
}

/// Composite five-point Gauss-Legendre quadrature of `integrand` over
/// `[lower, upper]` with `panels` equal panels.
pub fn quadrature_1d(
    integrand: impl Fn(f64) -> f64,
    lower: f64,
    upper: f64,
    panels: usize,
) -> Result<f64> {
    if lower == upper {
        return Ok(0.0);
    }
    let panels = panels.max(1);
    let width = (upper - lower) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lower + (p as f64 + 0.5) * width;
        let mut acc = 0.0;
        for &(x, w) in &GAUSS_LEGENDRE_5 {
            let y = mid + half * x;
            let val = integrand(y);
            if !val.is_finite() {
                return Err(Error::NonFiniteIntegrand(y));
            }
            acc += w * val;
        }
        total += acc * half;
    }
    Ok(total)
}
