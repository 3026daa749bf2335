//! Fourth-order finite differences with parity ghosts at the origin and
//! one-sided closures at `r_max`.

use super::{Parity, RadialField};
use crate::error::{Error, Result};

const MIN_NODES: usize = 7;

// centered 4th-order weights over offsets -2..=2
const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

/// Finite-difference weights for derivatives `0..=max_order` at `x0` over the
/// nodes `xs` (Fornberg's recursion). Returns `w[k][j]`, the weight of node
/// `j` in derivative `k`.
pub fn fornberg_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut w = vec![vec![0.0; n]; max_order + 1];
    w[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

/// Precomputed one-sided closures for the last two nodes.
#[derive(Debug, Clone)]
pub struct Derivatives {
    // [node n-1, node n] x 6 weights over nodes n-5..=n, already divided by dr^k
    d1_tail: [[f64; 6]; 2],
    d2_tail: [[f64; 6]; 2],
    inv_dr: f64,
    inv_dr2: f64,
}

impl Derivatives {
    pub fn new(dr: f64) -> Self {
        let xs: Vec<f64> = (0..6).map(|k| k as f64).collect();
        let mut d1_tail = [[0.0; 6]; 2];
        let mut d2_tail = [[0.0; 6]; 2];
        for (slot, x0) in [4.0, 5.0].into_iter().enumerate() {
            let w = fornberg_weights(x0, &xs, 2);
            for j in 0..6 {
                d1_tail[slot][j] = w[1][j] / dr;
                d2_tail[slot][j] = w[2][j] / (dr * dr);
            }
        }
        Self {
            d1_tail,
            d2_tail,
            inv_dr: 1.0 / dr,
            inv_dr2: 1.0 / (dr * dr),
        }
    }

    /// First and second derivatives of the extended array `ext` (with `ghost`
    /// leading mirror nodes) into `d1`/`d2`, both of length `n_nodes`.
    pub fn first_and_second(&self, ext: &[f64], ghost: usize, d1: &mut [f64], d2: &mut [f64]) {
        let n_nodes = ext.len() - ghost;
        let last = n_nodes - 1;
        for i in 0..n_nodes.saturating_sub(2) {
            let s = &ext[ghost + i - 2..ghost + i + 3];
            let mut a = 0.0;
            let mut b = 0.0;
            for k in 0..5 {
                a += D1[k] * s[k];
                b += D2[k] * s[k];
            }
            d1[i] = a * self.inv_dr;
            d2[i] = b * self.inv_dr2;
        }
        let tail = &ext[ghost + last - 5..ghost + last + 1];
        for slot in 0..2 {
            let i = last - 1 + slot;
            d1[i] = dot6(&self.d1_tail[slot], tail);
            d2[i] = dot6(&self.d2_tail[slot], tail);
        }
    }

    fn single(&self, ext: &[f64], ghost: usize, order: usize, out: &mut [f64]) {
        let n_nodes = ext.len() - ghost;
        let last = n_nodes - 1;
        let (centered, scale, tails) = match order {
            1 => (&D1, self.inv_dr, &self.d1_tail),
            _ => (&D2, self.inv_dr2, &self.d2_tail),
        };
        for (i, o) in out.iter_mut().enumerate().take(n_nodes - 2) {
            let s = &ext[ghost + i - 2..ghost + i + 3];
            *o = centered.iter().zip(s).map(|(w, x)| w * x).sum::<f64>() * scale;
        }
        let tail = &ext[ghost + last - 5..ghost + last + 1];
        for slot in 0..2 {
            out[last - 1 + slot] = dot6(&tails[slot], tail);
        }
    }
}

fn dot6(w: &[f64; 6], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Derivative of order 1 or 2 from an already extended array. Used directly
/// by harnesses that want to supply their own ghost values.
pub fn derivative_from_extended(ext: &[f64], ghost: usize, dr: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; ext.len() - ghost];
    Derivatives::new(dr).single(ext, ghost, order, &mut out);
    out
}

fn check_size(f: &RadialField) -> Result<()> {
    if f.len() < MIN_NODES {
        return Err(Error::GridTooSmall {
            nodes: f.len(),
            needed: MIN_NODES,
        });
    }
    Ok(())
}

/// `d^order f / dr^order` for order 1 or 2.
pub fn d_r(f: &RadialField, order: usize) -> Result<RadialField> {
    if !(1..=2).contains(&order) {
        return Err(Error::param("order", format!("must be 1 or 2, got {order}")));
    }
    check_size(f)?;
    let grid = *f.grid();
    let values = derivative_from_extended(&f.extended(), grid.ghost(), grid.dr(), order);
    let parity = if order == 1 { f.parity().flip() } else { f.parity() };
    RadialField::new(grid, values, parity)
}

/// Radial Laplacian `f'' + (dim - 1) f' / r`, with `dim * f''(0)` at the origin.
pub fn laplacian(f: &RadialField) -> Result<RadialField> {
    if f.parity() != Parity::Even {
        return Err(Error::ParityMismatch);
    }
    check_size(f)?;
    let grid = *f.grid();
    let n = grid.n_nodes();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    Derivatives::new(grid.dr()).first_and_second(&f.extended(), grid.ghost(), &mut d1, &mut d2);
    let k = grid.dim() as f64 - 1.0;
    let mut out = d2;
    out[0] *= grid.dim() as f64;
    for i in 1..n {
        out[i] += k * d1[i] / grid.r(i);
    }
    RadialField::new(grid, out, Parity::Even)
}
