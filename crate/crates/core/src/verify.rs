//! Manufactured solutions, forcing construction, convergence-order studies
//! and the reference kernel evaluator.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::evolve::{Evolver, Forcing, InitialDataSpec, Model, Sponge};
use crate::grid::{lq_norm, FieldState, Parity, RadialField, RadialGrid};
use crate::io::fmt_f64;
use crate::kernels::{FTilde, KernelParams};
use crate::transform::{
    compute_phi, compute_phi_t, residual_phi_t_wave, residual_phi_wave, residual_v_equation,
    TimeWindow,
};

/// `v(t, r) = (p(t) + q(t) r^2) exp(-r^2 / sigma^2)` with
/// `p = a (1 + b sin wt)` and `q = a c cos wt`.
///
/// `v` is even and smooth, so `u = r v + phi` has `u(t, 0) = pi` and Gaussian
/// decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub omega: f64,
    pub sigma: f64,
}

impl Default for ManufacturedSolution {
    fn default() -> Self {
        Self {
            a: 0.1,
            b: 0.5,
            c: 0.3,
            omega: 1.0,
            sigma: 1.0,
        }
    }
}

/// Pointwise values of the manufactured field and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub v_t: f64,
    pub v_tt: f64,
    pub v_r: f64,
    pub lap4: f64,
}

impl ManufacturedSolution {
    pub fn vacuum() -> Self {
        Self {
            a: 0.0,
            ..Self::default()
        }
    }

    // (p, p', p'', q, q', q'')
    fn coefficients(&self, t: f64) -> [f64; 6] {
        let (s, c) = (self.omega * t).sin_cos();
        let w = self.omega;
        let a = self.a;
        [
            a * (1.0 + self.b * s),
            a * self.b * w * c,
            -a * self.b * w * w * s,
            a * self.c * c,
            -a * self.c * w * s,
            -a * self.c * w * w * c,
        ]
    }

    pub fn jet(&self, t: f64, r: f64) -> Jet {
        let [p, p1, p2, q, q1, q2] = self.coefficients(t);
        let s2 = self.sigma * self.sigma;
        let r2 = r * r;
        let h = (-r2 / s2).exp();
        let w = p + q * r2;
        let k = 2.0 * q * r - 2.0 * r * w / s2;
        let k_over_r = 2.0 * q - 2.0 * w / s2;
        let k_r = k_over_r - 4.0 * q * r2 / s2;
        Jet {
            v: w * h,
            v_t: (p1 + q1 * r2) * h,
            v_tt: (p2 + q2 * r2) * h,
            v_r: k * h,
            lap4: h * (-2.0 * r * k / s2 + k_r + 3.0 * k_over_r),
        }
    }

    /// Exact `v` state on `grid` at time `t`.
    pub fn state(&self, grid: RadialGrid, t: f64) -> FieldState {
        let v = RadialField::from_fn(grid, Parity::Even, |r| self.jet(t, r).v);
        let v_t = RadialField::from_fn(grid, Parity::Even, |r| self.jet(t, r).v_t);
        FieldState::new(v, v_t, t).expect("same grid and parity")
    }

    pub fn v_tt_field(&self, grid: RadialGrid, t: f64) -> RadialField {
        RadialField::from_fn(grid, Parity::Even, |r| self.jet(t, r).v_tt)
    }

    /// `g = v_tt - lap_4 v - F(v)` at one point.
    pub fn forcing_at(&self, p: &KernelParams, t: f64, r: f64) -> f64 {
        let j = self.jet(t, r);
        j.v_tt - j.lap4 - p.eval_f_rhs(j.v, j.v_t, j.v_r, r)
    }
}

/// Forcing that makes `ms` an exact solution of `v_tt = lap_4 v + F(v) + g`.
pub fn make_forcing(ms: ManufacturedSolution, p: &KernelParams) -> Forcing {
    let p = p.clone();
    Box::new(move |t, r| ms.forcing_at(&p, t, r))
}

/// The forcing sampled on `grid` at time `t`.
pub fn forcing_field(ms: &ManufacturedSolution, p: &KernelParams, grid: RadialGrid, t: f64) -> Result<RadialField> {
    let values: Vec<f64> = grid.nodes().map(|r| ms.forcing_at(p, t, r)).collect();
    if let Some(i) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("forcing at r = {}", grid.r(i))));
    }
    RadialField::new(grid, values, Parity::Even)
}

/// Observed orders `log(e_k / e_{k+1}) / log(h_k / h_{k+1})`.
pub fn observed_orders(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// One refinement level of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub dr: f64,
    pub error: f64,
    /// Order measured between this level and the previous one.
    pub order: Option<f64>,
}

/// Errors and measured orders for one observable.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub observable: String,
    pub rows: Vec<StudyRow>,
    /// Errors failed to decrease between some consecutive levels.
    pub non_monotone: bool,
}

impl StudyReport {
    pub fn new(observable: impl Into<String>, drs: &[f64], errors: &[f64]) -> Self {
        let orders = observed_orders(drs, errors);
        let rows = drs
            .iter()
            .zip(errors)
            .enumerate()
            .map(|(level, (&dr, &error))| StudyRow {
                level,
                dr,
                error,
                order: level.checked_sub(1).map(|k| orders[k]),
            })
            .collect();
        let non_monotone = errors.windows(2).any(|e| !(e[1] < e[0]));
        Self {
            observable: observable.into(),
            rows,
            non_monotone,
        }
    }

    /// Order between the two finest levels.
    pub fn finest_order(&self) -> f64 {
        self.rows.last().and_then(|r| r.order).unwrap_or(f64::NAN)
    }

    /// Smallest measured order.
    pub fn min_order(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.order)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn csv_header() -> &'static str {
        "observable,level,dr,error,order"
    }

    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.observable,
                r.level,
                fmt_f64(r.dr),
                fmt_f64(r.error),
                r.order.map_or_else(|| "NaN".to_string(), fmt_f64)
            );
        }
        out
    }
}

/// Study reports as one CSV.
pub fn studies_csv(reports: &[StudyReport]) -> String {
    let mut out = format!("{}\n", StudyReport::csv_header());
    for r in reports {
        out.push_str(&r.csv_rows());
    }
    out
}

/// `L^2(r^3 dr)` norm of `a - b`.
pub fn l2_difference(a: &RadialField, b: &RadialField) -> Result<f64> {
    if !a.grid().same_nodes(b.grid()) {
        return Err(Error::GridMismatch);
    }
    let d: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    Ok(lq_norm(&RadialField::new(*a.grid(), d, Parity::Even)?, 2.0))
}

/// Grid geometry and time stepping shared by a refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ladder {
    pub base_cells: usize,
    pub levels: usize,
    pub r_max: f64,
    pub cfl: f64,
}

impl Ladder {
    pub fn grids(&self) -> Result<Vec<RadialGrid>> {
        if self.levels < 3 {
            return Err(Error::param("levels", "a study needs at least 3 levels"));
        }
        (0..self.levels)
            .map(|l| RadialGrid::new(self.base_cells << l, self.r_max, 4))
            .collect()
    }

    /// Step count for level `l` to reach `t`, doubling exactly per level.
    pub fn steps(&self, t: f64, l: usize) -> u64 {
        let dr0 = self.r_max / self.base_cells as f64;
        let base = (t / (self.cfl * dr0) - 1e-9).ceil().max(1.0) as u64;
        base << l
    }
}

/// Evolve `ms` with its forcing from `t = 0` to `t_end` and return the
/// `L^2` error of `v` at `t_end`.
pub fn manufactured_error(
    ms: ManufacturedSolution,
    p: &KernelParams,
    grid: RadialGrid,
    t_end: f64,
    steps: u64,
    cfl: f64,
) -> Result<f64> {
    let mut ev = Evolver::new(grid, p.clone(), Model::Faddeev, Sponge::off(), cfl)?
        .with_forcing(make_forcing(ms, p));
    let mut state = ms.state(grid, 0.0);
    ev.advance(&mut state, t_end / steps as f64, steps)?;
    let exact = ms.state(grid, t_end);
    l2_difference(&state.f, &exact.f)
}

/// Global error of forced manufactured runs across the ladder.
pub fn manufactured_convergence(
    ms: ManufacturedSolution,
    p: &KernelParams,
    ladder: &Ladder,
    t_end: f64,
) -> Result<StudyReport> {
    let grids = ladder.grids()?;
    let mut errors = Vec::new();
    for (l, g) in grids.iter().enumerate() {
        errors.push(manufactured_error(ms, p, *g, t_end, ladder.steps(t_end, l), ladder.cfl)?);
    }
    let drs: Vec<f64> = grids.iter().map(|g| g.dr()).collect();
    Ok(StudyReport::new("manufactured_v_error", &drs, &errors))
}

/// Discretisation error of `residual_v_equation` on exact manufactured
/// states: the continuum residual equals the forcing.
pub fn v_residual_convergence(
    ms: ManufacturedSolution,
    p: &KernelParams,
    ladder: &Ladder,
    t: f64,
) -> Result<StudyReport> {
    let grids = ladder.grids()?;
    let mut errors = Vec::new();
    for g in &grids {
        let res = residual_v_equation(&ms.state(*g, t), &ms.v_tt_field(*g, t), p)?;
        errors.push(l2_difference(&res, &forcing_field(&ms, p, *g, t)?)?);
    }
    let drs: Vec<f64> = grids.iter().map(|g| g.dr()).collect();
    Ok(StudyReport::new("residual_v_equation", &drs, &errors))
}

/// Centered difference of `compute_phi` against `compute_phi_t` along the
/// exact manufactured trajectory, for each time step in `dts`.
pub fn phi_t_identity_study(
    ms: ManufacturedSolution,
    p: &KernelParams,
    grid: RadialGrid,
    t: f64,
    dts: &[f64],
) -> Result<StudyReport> {
    let phi_t = compute_phi_t(&ms.state(grid, t), p);
    let mut errors = Vec::new();
    for &dt in dts {
        let plus = compute_phi(&ms.state(grid, t + dt).f, p)?;
        let minus = compute_phi(&ms.state(grid, t - dt).f, p)?;
        let diff: Vec<f64> = plus
            .values()
            .iter()
            .zip(minus.values())
            .map(|(a, b)| (a - b) / (2.0 * dt))
            .collect();
        errors.push(l2_difference(&RadialField::new(grid, diff, Parity::Even)?, &phi_t)?);
    }
    Ok(StudyReport::new("phi_t_identity", dts, &errors))
}

/// Evolve `initial` to `t_star` on each level and collect a five-level window
/// of consecutive steps centred there.
pub fn evolved_windows(
    initial: &InitialDataSpec,
    p: &KernelParams,
    ladder: &Ladder,
    t_star: f64,
) -> Result<Vec<TimeWindow>> {
    let grids = ladder.grids()?;
    let mut windows = Vec::new();
    for (l, g) in grids.iter().enumerate() {
        let steps = ladder.steps(t_star, l);
        let dt = t_star / steps as f64;
        let mut ev = Evolver::new(*g, p.clone(), Model::Faddeev, Sponge::off(), ladder.cfl)?;
        let mut state = initial.build(*g, p)?;
        ev.advance(&mut state, dt, steps - 2)?;
        let mut levels = vec![state.clone()];
        for k in 0..4 {
            ev.step(&mut state, dt)?;
            state.time = (steps - 1 + k) as f64 * dt;
            levels.push(state.clone());
        }
        windows.push(TimeWindow::new(levels)?);
    }
    Ok(windows)
}

/// `L^2` norms of the `Phi` (on `r < 1/2`) and `Phi_t` wave residuals over
/// evolved windows.
pub fn evolved_residual_convergence(
    initial: &InitialDataSpec,
    p: &KernelParams,
    ladder: &Ladder,
    t_star: f64,
) -> Result<[StudyReport; 2]> {
    let windows = evolved_windows(initial, p, ladder, t_star)?;
    let mut phi = Vec::new();
    let mut phi_t = Vec::new();
    for w in &windows {
        phi.push(residual_phi_wave(w, 0.5, p)?.l2_norm());
        phi_t.push(residual_phi_t_wave(w, p)?.l2_norm());
    }
    let drs: Vec<f64> = windows.iter().map(|w| w.states()[0].grid().dr()).collect();
    Ok([
        StudyReport::new("residual_phi_wave", &drs, &phi),
        StudyReport::new("residual_phi_t_wave", &drs, &phi_t),
    ])
}

const ORACLE_TERMS: usize = 24;
const ORACLE_SERIES_RADIUS: f64 = 1.5;

/// Reference values of `F~_j`: a long Taylor series in `x^2` for
/// `|x| <= 1.5` and the closed form beyond.
pub fn kernel_series_oracle(j: FTilde, xs: &[f64], p: &KernelParams) -> Vec<f64> {
    // sin(2x)/(2x) = sum (-1)^k 4^k x^2k / (2k+1)!
    // (1 - cos 2x)/(2x^2) = sum (-1)^k 2^(2k+1) x^2k / (2k+2)!
    let n = ORACLE_TERMS + 2;
    let mut sc = vec![0.0; n];
    let mut ss = vec![0.0; n];
    let mut fact = 1.0f64; // (2k+1)!
    let mut pow = 1.0f64; // 4^k
    for k in 0..n {
        if k > 0 {
            fact *= (2 * k) as f64 * (2 * k + 1) as f64;
            pow *= 4.0;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sc[k] = sign * pow / fact;
        ss[k] = sign * 2.0 * pow / (fact * (2 * k + 2) as f64);
    }
    let coeff = |m: usize| -> f64 {
        match j {
            FTilde::F0 => ss[m],
            FTilde::F1 => -sc[m + 1],
            FTilde::F2 | FTilde::F4 => sc[m + 1] - ss[m + 1],
            FTilde::F3 => -sc[m],
        }
    };
    let a2 = p.alpha() * p.alpha();
    let scale = match j {
        FTilde::F1 => 1.0,
        FTilde::F4 => 2.0 * a2,
        _ => a2,
    };
    xs.iter()
        .map(|&x| {
            if x.abs() <= ORACLE_SERIES_RADIUS {
                let y = x * x;
                let mut acc = 0.0;
                for m in (0..ORACLE_TERMS).rev() {
                    acc = acc * y + coeff(m);
                }
                scale * acc
            } else {
                p.ftilde_direct(j, x)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_matches_finite_differences() {
        let ms = ManufacturedSolution::default();
        let (t, r, h) = (0.7, 0.9, 1e-3);
        let j = ms.jet(t, r);
        let v = |t: f64, r: f64| ms.jet(t, r).v;
        let d_r = (v(t, r - 2.0 * h) - 8.0 * v(t, r - h) + 8.0 * v(t, r + h) - v(t, r + 2.0 * h)) / (12.0 * h);
        let d_rr = (-v(t, r - 2.0 * h) + 16.0 * v(t, r - h) - 30.0 * v(t, r) + 16.0 * v(t, r + h)
            - v(t, r + 2.0 * h))
            / (12.0 * h * h);
        let d_tt = (-v(t - 2.0 * h, r) + 16.0 * v(t - h, r) - 30.0 * v(t, r) + 16.0 * v(t + h, r)
            - v(t + 2.0 * h, r))
            / (12.0 * h * h);
        assert!((j.v_r - d_r).abs() < 1e-10);
        assert!((j.lap4 - (d_rr + 3.0 * d_r / r)).abs() < 1e-7);
        assert!((j.v_tt - d_tt).abs() < 1e-7);
    }

    #[test]
    fn vacuum_forcing_lives_on_cutoff_source() {
        let p = KernelParams::default();
        let ms = ManufacturedSolution::vacuum();
        for k in 0..=60 {
            let r = 0.05 * k as f64;
            let g = ms.forcing_at(&p, 0.3, r);
            if r <= 1.0 || r >= 2.0 {
                assert_eq!(g, 0.0, "r = {r}");
            } else {
                assert_eq!(g, -p.eval_f_rhs(0.0, 0.0, 0.0, r));
            }
        }
    }

    #[test]
    fn orders_and_monotonicity() {
        let rep = StudyReport::new("x", &[0.4, 0.2, 0.1], &[16.0, 1.0, 0.0625]);
        assert!((rep.finest_order() - 4.0).abs() < 1e-12);
        assert!(!rep.non_monotone);
        let bad = StudyReport::new("y", &[0.4, 0.2, 0.1], &[1.0, 2.0, 0.5]);
        assert!(bad.non_monotone);
        assert_eq!(bad.rows.len(), 3);
        assert!(studies_csv(&[rep]).starts_with("observable,level,dr,error,order\n"));
    }

    #[test]
    fn oracle_limits() {
        let p = KernelParams::with_alpha(1.7).unwrap();
        let a2 = 1.7 * 1.7;
        let at0 = |j| kernel_series_oracle(j, &[0.0], &p)[0];
        assert_eq!(at0(FTilde::F0), a2);
        assert!((at0(FTilde::F1) - 2.0 / 3.0).abs() < 1e-16);
        assert!((at0(FTilde::F2) + a2 / 3.0).abs() < 1e-15);
        assert_eq!(at0(FTilde::F3), -a2);
        assert!((at0(FTilde::F4) + 2.0 * a2 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ladder_requires_three_levels() {
        let l = Ladder {
            base_cells: 16,
            levels: 2,
            r_max: 4.0,
            cfl: 0.25,
        };
        assert!(l.grids().is_err());
        let l = Ladder { levels: 3, ..l };
        assert_eq!(l.steps(1.0, 2), 4 * l.steps(1.0, 0));
    }
}
