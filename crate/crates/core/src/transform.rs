//! The `u <-> v <-> Phi` change-of-variable chain and residual evaluators for
//! the wave equations satisfied by `Phi` and its time derivatives.
//!
//! States of `u` are [`FieldState`]s on a `dim = 2` grid whose parity tag
//! describes `u - phi` near the origin (odd for smooth equivariant data).
//! States of `v = (u - phi) / r` live on the same nodes with `dim = 4`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{d_r, laplacian, quadrature_1d, simpson, FieldState, Parity, RadialField};
use crate::io::fmt_f64;
use crate::kernels::{Cutoff, KernelParams};

const BOUNDARY_TOL: f64 = 1e-10;
const MIN_PANELS: usize = 8;
const PANELS_PER_UNIT: f64 = 16.0;

fn panels_for(length: f64) -> usize {
    MIN_PANELS.max((PANELS_PER_UNIT * length.abs()).ceil() as usize)
}

/// Value at `r = 0` of an even profile from nodes 1..=3, exact for
/// `a + b r^2 + c r^4`.
pub fn even_extrapolate(v1: f64, v2: f64, v3: f64) -> f64 {
    1.5 * v1 - 0.6 * v2 + 0.1 * v3
}

/// `v = (u - phi) / r`, `v_t = u_t / r`.
pub fn u_to_v(u: &FieldState, p: &KernelParams) -> Result<FieldState> {
    let u0 = u.f.values()[0];
    if (u0 - PI).abs() > BOUNDARY_TOL {
        return Err(Error::BoundaryViolation { value: u0 });
    }
    let grid = u.grid().with_dim(4)?;
    if grid.n_nodes() < 4 {
        return Err(Error::GridTooSmall {
            nodes: grid.n_nodes(),
            needed: 4,
        });
    }
    let parity = u.parity().flip();
    let divide = |vals: &[f64], subtract_phi: bool| -> Vec<f64> {
        let mut out: Vec<f64> = vals
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if i == 0 {
                    return 0.0;
                }
                let r = grid.r(i);
                let shifted = if subtract_phi { x - p.cutoff().phi(r) } else { x };
                shifted / r
            })
            .collect();
        if parity == Parity::Even {
            out[0] = even_extrapolate(out[1], out[2], out[3]);
        }
        out
    };
    let v = RadialField::new(grid, divide(u.f.values(), true), parity)?;
    let v_t = RadialField::new(grid, divide(u.f_t.values(), false), parity)?;
    FieldState::new(v, v_t, u.time)
}

/// `u = r v + phi`, `u_t = r v_t`.
pub fn v_to_u(v: &FieldState, p: &KernelParams) -> Result<FieldState> {
    let grid = v.grid().with_dim(2)?;
    let parity = v.parity().flip();
    let u = v
        .f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let r = grid.r(i);
            r * x + p.cutoff().phi(r)
        })
        .collect();
    let u_t = v
        .f_t
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| grid.r(i) * x)
        .collect();
    // u - phi carries the opposite parity; RadialField::new would zero u(0)
    // for odd tags, so build from values directly.
    let mut u_field = RadialField::new(grid, u, Parity::Even)?;
    let mut ut_field = RadialField::new(grid, u_t, Parity::Even)?;
    u_field = retag(u_field, parity);
    ut_field = retag(ut_field, parity);
    FieldState::new(u_field, ut_field, v.time)
}

fn retag(f: RadialField, parity: Parity) -> RadialField {
    let grid = *f.grid();
    let values = f.into_values();
    let first = values[0];
    let mut out = RadialField::new(grid, values, parity).expect("length unchanged");
    out.values_mut()[0] = first;
    out
}

/// `Phi` on `r <= 1/2`: `int_0^v A_4^{1/2}(y, r) dy`.
pub fn phi_small_branch(v: f64, r: f64, p: &KernelParams) -> Result<f64> {
    quadrature_1d(|y| p.a4(y, r).sqrt(), 0.0, v, panels_for(v))
}

/// `Phi` for `r > 0` from its defining form
/// `r^-1 int_pi^u A_3^{1/2} dy + phi_gt1(r) r^-1 int_0^pi A_3^{-3/2} dy`.
pub fn phi_large_branch(u: f64, r: f64, p: &KernelParams) -> Result<f64> {
    let main = quadrature_1d(|y| p.a3(y, r).sqrt(), PI, u, panels_for(u - PI))?;
    let weight = p.cutoff().phi_gt1(r);
    let correction = if weight > 0.0 {
        weight * phi_correction_integral(r, p)?
    } else {
        0.0
    };
    Ok((main + correction) / r)
}

/// `int_0^pi A_3^{-3/2}(y, r) dy`.
pub fn phi_correction_integral(r: f64, p: &KernelParams) -> Result<f64> {
    quadrature_1d(|y| p.a3(y, r).powf(-1.5), 0.0, PI, 2 * PANELS_PER_UNIT as usize)
}

/// The auxiliary field `Phi` from a `v` state (only `v` values are used).
pub fn compute_phi(v: &RadialField, p: &KernelParams) -> Result<RadialField> {
    let grid = *v.grid();
    let values = v
        .values()
        .iter()
        .enumerate()
        .map(|(i, &vi)| {
            let r = grid.r(i);
            if r <= 0.5 {
                phi_small_branch(vi, r, p)
            } else {
                phi_large_branch(r * vi + p.cutoff().phi(r), r, p)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    RadialField::new(grid, values, v.parity())
}

/// `Phi_t = r^-1 A_1^{1/2} u_t = A_5(v, r)^{1/2} v_t`, regular at the origin.
pub fn compute_phi_t(v: &FieldState, p: &KernelParams) -> RadialField {
    let grid = *v.grid();
    let values = v
        .f
        .values()
        .iter()
        .zip(v.f_t.values())
        .enumerate()
        .map(|(i, (&vi, &vti))| p.a5(vi, grid.r(i)).sqrt() * vti)
        .collect();
    RadialField::new(grid, values, v.parity()).expect("length unchanged")
}

/// `A_1` at every node, evaluated through `v`.
pub fn compute_a1(v: &RadialField, p: &KernelParams) -> Vec<f64> {
    let grid = v.grid();
    v.values()
        .iter()
        .enumerate()
        .map(|(i, &vi)| p.a5(vi, grid.r(i)))
        .collect()
}

/// `F(v)` at every node with `v_r` from the fourth-order stencil.
pub fn rhs_field(v: &FieldState, p: &KernelParams) -> Result<RadialField> {
    let grid = *v.grid();
    let v_r = d_r(&v.f, 1)?;
    let values = (0..grid.n_nodes())
        .map(|i| {
            p.eval_f_rhs(
                v.f.values()[i],
                v.f_t.values()[i],
                v_r.values()[i],
                grid.r(i),
            )
        })
        .collect();
    RadialField::new(grid, values, v.parity())
}

/// `v_tt - lap_4 v - F(v)` at every node.
pub fn residual_v_equation(
    v: &FieldState,
    v_tt: &RadialField,
    p: &KernelParams,
) -> Result<RadialField> {
    if !v.grid().same_nodes(v_tt.grid()) {
        return Err(Error::GridMismatch);
    }
    let lap = laplacian(&v.f)?;
    let f = rhs_field(v, p)?;
    let values = (0..lap.len())
        .map(|i| v_tt.values()[i] - lap.values()[i] - f.values()[i])
        .collect();
    RadialField::new(*v.grid(), values, v.parity())
}

/// Consecutive `v` states at uniform time spacing.
#[derive(Debug, Clone)]
pub struct TimeWindow {
    states: Vec<FieldState>,
    dt: f64,
}

impl TimeWindow {
    pub fn new(states: Vec<FieldState>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InsufficientTimeLevels {
                needed: 2,
                got: states.len(),
            });
        }
        let dt = states[1].time - states[0].time;
        if !(dt > 0.0) {
            return Err(Error::NonUniformWindow);
        }
        for pair in states.windows(2) {
            if !pair[0].grid().same_nodes(pair[1].grid()) {
                return Err(Error::GridMismatch);
            }
            let step = pair[1].time - pair[0].time;
            if (step - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::NonUniformWindow);
            }
        }
        Ok(Self { states, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FieldState] {
        &self.states
    }

    pub fn center(&self) -> usize {
        (self.states.len() - 1) / 2
    }

    /// Time of the level at which residuals are reported.
    pub fn center_time(&self) -> f64 {
        self.states[self.center()].time
    }

    fn require(&self, needed: usize) -> Result<()> {
        if self.states.len() < needed {
            return Err(Error::InsufficientTimeLevels {
                needed,
                got: self.states.len(),
            });
        }
        Ok(())
    }

    /// Sub-window of `len` levels centred `shift` levels from the middle.
    pub fn shifted(&self, len: usize, shift: isize) -> Result<TimeWindow> {
        let c = self.center() as isize + shift;
        let half = (len / 2) as isize;
        if c - half < 0 || c + half >= self.states.len() as isize {
            return Err(Error::InsufficientTimeLevels {
                needed: len + shift.unsigned_abs() * 2,
                got: self.states.len(),
            });
        }
        TimeWindow::new(self.states[(c - half) as usize..=(c + half) as usize].to_vec())
    }
}

/// A residual field together with the number of leading nodes on which it
/// is defined.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub field: RadialField,
    pub active: usize,
}

impl Residual {
    fn full(field: RadialField) -> Self {
        let active = field.len();
        Self { field, active }
    }

    /// Keep only nodes with `r < r_limit`.
    pub fn restricted(mut self, r_limit: f64) -> Self {
        let grid = *self.field.grid();
        let keep = (0..self.active).take_while(|&i| grid.r(i) < r_limit).count();
        self.active = keep;
        for x in &mut self.field.values_mut()[keep..] {
            *x = 0.0;
        }
        self
    }

    /// `L^2` norm over the active nodes against `r^{dim-1} dr`.
    pub fn l2_norm(&self) -> f64 {
        let grid = self.field.grid();
        let w = grid.dim() as i32 - 1;
        let samples: Vec<f64> = self.field.values()[..self.active]
            .iter()
            .enumerate()
            .map(|(i, x)| x * x * grid.r(i).powi(w))
            .collect();
        simpson(&samples, grid.dr()).max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.field.values()[..self.active]
            .iter()
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Residual of `Phi_tt - lap_4 Phi = alpha^-2 (Phi - int_0^v A_4^{-3/2} dy)` on
/// `r < r_limit <= 1/2`, from three or more time levels.
pub fn residual_phi_wave(window: &TimeWindow, r_limit: f64, p: &KernelParams) -> Result<Residual> {
    if r_limit > 0.5 {
        return Err(Error::RegionViolation { requested: r_limit });
    }
    window.require(3)?;
    let c = window.center();
    let states = window.states();
    let grid = *states[c].grid();
    let active = (0..grid.n_nodes())
        .take_while(|&i| grid.r(i) < r_limit)
        .count();
    // Phi is needed a few nodes past r_limit for the Laplacian stencil.
    let phis = (c - 1..=c + 1)
        .map(|k| compute_phi(&states[k].f, p))
        .collect::<Result<Vec<_>>>()?;
    let lap = laplacian(&phis[1])?;
    let dt2 = window.dt() * window.dt();
    let inv_a2 = inv_alpha_sq(p)?;
    let v = states[c].f.values();
    let mut values = vec![0.0; grid.n_nodes()];
    for i in 0..active {
        let r = grid.r(i);
        let phi_tt = (phis[2].values()[i] - 2.0 * phis[1].values()[i] + phis[0].values()[i]) / dt2;
        let g = quadrature_1d(|y| p.a4(y, r).powf(-1.5), 0.0, v[i], panels_for(v[i]))?;
        values[i] = phi_tt - lap.values()[i] - inv_a2 * (phis[1].values()[i] - g);
    }
    Ok(Residual {
        field: RadialField::new(grid, values, states[c].parity())?,
        active,
    })
}

fn inv_alpha_sq(p: &KernelParams) -> Result<f64> {
    if p.alpha() == 0.0 {
        return Err(Error::param("alpha", "Phi residuals need alpha > 0"));
    }
    Ok(1.0 / (p.alpha() * p.alpha()))
}

fn phi_t_levels(window: &TimeWindow, from: usize, to: usize, p: &KernelParams) -> Vec<RadialField> {
    (from..=to)
        .map(|k| compute_phi_t(&window.states()[k], p))
        .collect()
}

fn second_difference(a: &[f64], b: &[f64], c: &[f64], h: f64) -> Vec<f64> {
    let h2 = h * h;
    (0..a.len()).map(|i| (a[i] - 2.0 * b[i] + c[i]) / h2).collect()
}

fn centered_difference(a: &[f64], c: &[f64], h: f64) -> Vec<f64> {
    (0..a.len()).map(|i| (c[i] - a[i]) / (2.0 * h)).collect()
}

/// Residual of `Box Phi_t = alpha^-2 (1 - A_1^-2) Phi_t` at every node.
pub fn residual_phi_t_wave(window: &TimeWindow, p: &KernelParams) -> Result<Residual> {
    window.require(3)?;
    let c = window.center();
    let grid = *window.states()[c].grid();
    let pt = phi_t_levels(window, c - 1, c + 1, p);
    let tt = second_difference(pt[0].values(), pt[1].values(), pt[2].values(), window.dt());
    let lap = laplacian(&pt[1])?;
    let a1 = compute_a1(&window.states()[c].f, p);
    let inv_a2 = inv_alpha_sq(p)?;
    let values = (0..grid.n_nodes())
        .map(|i| {
            let a = a1[i];
            tt[i] - lap.values()[i] - inv_a2 * (1.0 - 1.0 / (a * a)) * pt[1].values()[i]
        })
        .collect();
    Ok(Residual::full(RadialField::new(
        grid,
        values,
        window.states()[c].parity(),
    )?))
}

/// Residual of
/// `Box Phi_tt = alpha^-2 [2 A_1^-3 dA_1/dt Phi_t + (1 - A_1^-2) Phi_tt]`
/// from five or more time levels.
pub fn residual_phi_tt_wave(window: &TimeWindow, p: &KernelParams) -> Result<Residual> {
    window.require(5)?;
    let c = window.center();
    let dt = window.dt();
    let grid = *window.states()[c].grid();
    let parity = window.states()[c].parity();
    let pt = phi_t_levels(window, c - 2, c + 2, p);
    let ptt: Vec<Vec<f64>> = (1..=3)
        .map(|k| centered_difference(pt[k - 1].values(), pt[k + 1].values(), dt))
        .collect();
    let box_tt = second_difference(&ptt[0], &ptt[1], &ptt[2], dt);
    let lap = laplacian(&RadialField::new(grid, ptt[1].clone(), parity)?)?;
    let a: Vec<Vec<f64>> = (c - 1..=c + 1)
        .map(|k| compute_a1(&window.states()[k].f, p))
        .collect();
    let a_t = centered_difference(&a[0], &a[2], dt);
    let inv_a2 = inv_alpha_sq(p)?;
    let values = (0..grid.n_nodes())
        .map(|i| {
            let ai = a[1][i];
            let source = 2.0 * a_t[i] * pt[2].values()[i] / ai.powi(3)
                + (1.0 - 1.0 / (ai * ai)) * ptt[1][i];
            box_tt[i] - lap.values()[i] - inv_a2 * source
        })
        .collect();
    Ok(Residual::full(RadialField::new(grid, values, parity)?))
}

/// Residual of the `Phi_ttt` wave equation
/// `Box Phi_ttt = alpha^-2 [-6 A^-4 (A_t)^2 Phi_t + 2 A^-3 A_tt Phi_t
///                          + 4 A^-3 A_t Phi_tt + (1 - A^-2) Phi_ttt]`
/// from five or more time levels.
pub fn residual_phi_ttt_wave(window: &TimeWindow, p: &KernelParams) -> Result<Residual> {
    window.require(5)?;
    let c = window.center();
    let dt = window.dt();
    let grid = *window.states()[c].grid();
    let parity = window.states()[c].parity();
    let pt = phi_t_levels(window, c - 2, c + 2, p);
    let pttt: Vec<Vec<f64>> = (1..=3)
        .map(|k| second_difference(pt[k - 1].values(), pt[k].values(), pt[k + 1].values(), dt))
        .collect();
    let ptt = centered_difference(pt[1].values(), pt[3].values(), dt);
    let box_ttt = second_difference(&pttt[0], &pttt[1], &pttt[2], dt);
    let lap = laplacian(&RadialField::new(grid, pttt[1].clone(), parity)?)?;
    let a: Vec<Vec<f64>> = (c - 1..=c + 1)
        .map(|k| compute_a1(&window.states()[k].f, p))
        .collect();
    let a_t = centered_difference(&a[0], &a[2], dt);
    let a_tt = second_difference(&a[0], &a[1], &a[2], dt);
    let inv_a2 = inv_alpha_sq(p)?;
    let values = (0..grid.n_nodes())
        .map(|i| {
            let ai = a[1][i];
            let phi_t = pt[2].values()[i];
            let source = -6.0 * a_t[i] * a_t[i] * phi_t / ai.powi(4)
                + 2.0 * a_tt[i] * phi_t / ai.powi(3)
                + 4.0 * a_t[i] * ptt[i] / ai.powi(3)
                + (1.0 - 1.0 / (ai * ai)) * pttt[1][i];
            box_ttt[i] - lap.values()[i] - inv_a2 * source
        })
        .collect();
    Ok(Residual::full(RadialField::new(grid, values, parity)?))
}

/// `u`, `v`, `Phi` and `Phi_t` on one mesh at one instant.
#[derive(Debug, Clone)]
pub struct TransformBundle {
    pub u: FieldState,
    pub v: FieldState,
    pub phi_field: RadialField,
    pub phi_t_field: RadialField,
}

impl TransformBundle {
    pub fn from_v(v: &FieldState, p: &KernelParams) -> Result<Self> {
        Ok(Self {
            u: v_to_u(v, p)?,
            v: v.clone(),
            phi_field: compute_phi(&v.f, p)?,
            phi_t_field: compute_phi_t(v, p),
        })
    }

    /// CSV with header `r,u,u_t,v,v_t,Phi,Phi_t`.
    pub fn to_csv(&self) -> String {
        let grid = self.v.grid();
        let mut out = String::from("r,u,u_t,v,v_t,Phi,Phi_t\n");
        for i in 0..grid.n_nodes() {
            let cols = [
                grid.r(i),
                self.u.f.values()[i],
                self.u.f_t.values()[i],
                self.v.f.values()[i],
                self.v.f_t.values()[i],
                self.phi_field.values()[i],
                self.phi_t_field.values()[i],
            ];
            let row: Vec<String> = cols.iter().map(|&x| fmt_f64(x)).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// `phi'(r)`, used when reconstructing `u_r` from `v`.
pub(crate) fn phi_prime(p: &KernelParams, r: f64) -> f64 {
    p.cutoff().eval_unchecked(Cutoff::Phi, r, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    fn grid4(n: usize, r_max: f64) -> RadialGrid {
        RadialGrid::new(n, r_max, 4).unwrap()
    }

    fn v_state(g: RadialGrid, f: impl Fn(f64) -> f64, ft: impl Fn(f64) -> f64) -> FieldState {
        FieldState::new(
            RadialField::from_fn(g, Parity::Even, f),
            RadialField::from_fn(g, Parity::Even, ft),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_v_reconstructs_cutoff() {
        let p = KernelParams::default();
        let g = grid4(64, 4.0);
        let v = v_state(g, |_| 0.0, |_| 0.0);
        let u = v_to_u(&v, &p).unwrap();
        for (i, &x) in u.f.values().iter().enumerate() {
            assert_eq!(x, p.cutoff().phi(g.r(i)));
        }
        assert_eq!(u.parity(), Parity::Odd);
        assert_eq!(u.f.values()[0], PI);
        let back = u_to_v(&u, &p).unwrap();
        assert!(back.f.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gaussian_v_keeps_boundary_value() {
        let p = KernelParams::default();
        let g = grid4(64, 4.0);
        let v = v_state(g, |r| (-r * r).exp(), |_| 0.0);
        let u = v_to_u(&v, &p).unwrap();
        assert_eq!(u.f.values()[0], PI);
    }

    #[test]
    fn roundtrip_recovers_state() {
        let p = KernelParams::default();
        let g = grid4(128, 6.0);
        let v = v_state(g, |r| 0.7 * (-r * r).exp() * (1.0 + r * r), |r| -(-r * r).exp());
        let back = u_to_v(&v_to_u(&v, &p).unwrap(), &p).unwrap();
        for i in 1..g.n_nodes() {
            assert!((back.f.values()[i] - v.f.values()[i]).abs() < 1e-13);
            assert!((back.f_t.values()[i] - v.f_t.values()[i]).abs() < 1e-13);
        }
        // origin from even extrapolation, error O(dr^6)
        assert!((back.f.values()[0] - v.f.values()[0]).abs() < 1e-7);
    }

    #[test]
    fn even_u_deviation_gives_odd_v() {
        let p = KernelParams::default();
        let g = RadialGrid::new(64, 8.0, 2).unwrap();
        let u = FieldState::new(
            RadialField::from_fn(g, Parity::Even, |r| PI * (-r * r).exp()),
            RadialField::zeros(g, Parity::Even),
            0.0,
        )
        .unwrap();
        let v = u_to_v(&u, &p).unwrap();
        assert_eq!(v.parity(), Parity::Odd);
        assert_eq!(v.f.values()[0], 0.0);
    }

    #[test]
    fn boundary_violation_detected() {
        let p = KernelParams::default();
        let g = RadialGrid::new(64, 8.0, 2).unwrap();
        let u = FieldState::new(
            RadialField::from_fn(g, Parity::Odd, |r| 3.0 * (-r * r).exp()),
            RadialField::zeros(g, Parity::Odd),
            0.0,
        );
        // odd tag zeroes u(0), which violates u(0) = pi
        let u = u.unwrap();
        assert!(matches!(u_to_v(&u, &p), Err(Error::BoundaryViolation { .. })));
    }

    #[test]
    fn phi_vanishes_for_zero_v_inside() {
        let p = KernelParams::default();
        let g = grid4(40, 4.0);
        let phi = compute_phi(&RadialField::zeros(g, Parity::Even), &p).unwrap();
        for i in 0..=5 {
            assert_eq!(phi.values()[i], 0.0);
        }
    }

    #[test]
    fn phi_branches_agree_on_strip() {
        let p = KernelParams::default();
        for &v in &[-1.3, -0.2, 0.0, 0.4, 2.5] {
            for k in 0..=10 {
                let r = 0.4 + 0.01 * k as f64;
                let small = phi_small_branch(v, r, &p).unwrap();
                let large = phi_large_branch(r * v + PI, r, &p).unwrap();
                assert!((small - large).abs() <= 1e-10, "v={v} r={r}: {small} vs {large}");
            }
        }
    }

    #[test]
    fn phi_t_examples() {
        let p = KernelParams::default();
        let g = grid4(64, 4.0);
        let still = v_state(g, |r| (-r * r).exp(), |_| 0.0);
        assert!(compute_phi_t(&still, &p).values().iter().all(|&x| x == 0.0));
        // u = pi near the origin (v = 0) makes A_1 = 1 there
        let s = v_state(g, |_| 0.0, |r| (-r).exp());
        let pt = compute_phi_t(&s, &p);
        for i in 0..=16 {
            assert_eq!(pt.values()[i], (-g.r(i)).exp());
        }
    }

    #[test]
    fn phi_t_matches_identity_off_origin() {
        let p = KernelParams::default();
        let g = grid4(64, 4.0);
        let v = v_state(g, |r| 0.9 * (-r * r).exp(), |r| (1.0 - r) * (-r * r).exp());
        let u = v_to_u(&v, &p).unwrap();
        let pt = compute_phi_t(&v, &p);
        for i in 1..g.n_nodes() {
            let r = g.r(i);
            let expect = p.a1(u.f.values()[i], r).sqrt() * u.f_t.values()[i] / r;
            assert!((pt.values()[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn residuals_vanish_on_static_zero_window_inside() {
        let p = KernelParams::default();
        let g = grid4(64, 4.0);
        let states: Vec<FieldState> = (0..5)
            .map(|k| {
                let mut s = v_state(g, |_| 0.0, |_| 0.0);
                s.time = k as f64 * 0.01;
                s
            })
            .collect();
        let w = TimeWindow::new(states).unwrap();
        // stencils near r = 1/2 see the outer branch of Phi, which is not zero
        let r = residual_phi_wave(&w, 0.3, &p).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        for res in [
            residual_phi_t_wave(&w, &p).unwrap(),
            residual_phi_tt_wave(&w, &p).unwrap(),
            residual_phi_ttt_wave(&w, &p).unwrap(),
        ] {
            assert_eq!(res.max_abs(), 0.0);
        }
    }

    #[test]
    fn window_preconditions() {
        let p = KernelParams::default();
        let g = grid4(32, 4.0);
        let mk = |t: f64| {
            let mut s = v_state(g, |_| 0.0, |_| 0.0);
            s.time = t;
            s
        };
        let w = TimeWindow::new(vec![mk(0.0), mk(0.1), mk(0.2)]).unwrap();
        assert!(matches!(
            residual_phi_tt_wave(&w, &p),
            Err(Error::InsufficientTimeLevels { needed: 5, got: 3 })
        ));
        assert!(matches!(
            residual_phi_wave(&w, 0.6, &p),
            Err(Error::RegionViolation { .. })
        ));
        assert_eq!(
            TimeWindow::new(vec![mk(0.0), mk(0.1), mk(0.25)]).unwrap_err(),
            Error::NonUniformWindow
        );
    }

    #[test]
    fn bundle_csv_header() {
        let p = KernelParams::default();
        let g = grid4(16, 4.0);
        let b = TransformBundle::from_v(&v_state(g, |r| (-r * r).exp(), |_| 0.0), &p).unwrap();
        let csv = b.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("r,u,u_t,v,v_t,Phi,Phi_t"));
        assert_eq!(lines.count(), 17);
    }
}
