//! Scalar observables of a run: energy, continuation monitors, decay ratios,
//! Sobolev, `Y_s` and space-time norms.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{d_r, integrate_radial, lq_norm, sobolev_norm, FieldState, RadialField};
use crate::io::fmt_f64;
use crate::kernels::{sinc_sq, KernelParams};
use crate::transform::{compute_phi, compute_phi_t, phi_prime, u_to_v};

/// `<r> = (1 + r^2)^{1/2}`.
pub fn japanese_bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// `r^-2 sin^2 u` written through `v`, regular at the origin.
fn sin2_over_r2(v: f64, r: f64, p: &KernelParams) -> f64 {
    let phi = p.cutoff().phi(r);
    if phi == std::f64::consts::PI || r == 0.0 {
        v * v * sinc_sq(r * v)
    } else {
        let s = (r * v + phi).sin();
        s * s / (r * r)
    }
}

/// Energy `1/2 int [A_1 (u_t^2 + u_r^2) + r^-2 sin^2 u] r dr` of a `v` state,
/// with `u_t = r v_t` and `u_r = v + r v_r + phi'`.
pub fn energy_from_v(v: &FieldState, p: &KernelParams) -> Result<f64> {
    let grid = *v.grid();
    let v_r = d_r(&v.f, 1)?;
    let alpha2 = p.alpha() * p.alpha();
    let mut integrand = Vec::with_capacity(grid.n_nodes());
    for i in 0..grid.n_nodes() {
        let r = grid.r(i);
        let vi = v.f.values()[i];
        let u_t = r * v.f_t.values()[i];
        let u_r = vi + r * v_r.values()[i] + phi_prime(p, r);
        let s2 = sin2_over_r2(vi, r, p);
        let a1 = 1.0 + alpha2 * s2;
        let e = 0.5 * (a1 * (u_t * u_t + u_r * u_r) + s2) * r;
        if !e.is_finite() {
            return Err(Error::NonFiniteIntegrand(r));
        }
        integrand.push(e);
    }
    let field = RadialField::new(grid, integrand, crate::grid::Parity::Even)?;
    Ok(integrate_radial(&field, 0))
}

/// Energy of a `u` state (on a `dim = 2` grid), evaluated through the `v`
/// chart.
pub fn energy(u: &FieldState, p: &KernelParams) -> Result<f64> {
    energy_from_v(&u_to_v(u, p)?, p)
}

/// `1/2 int (v_t^2 + v_r^2) r^3 dr`, conserved by the free 4D wave equation.
pub fn free_energy(v: &FieldState) -> Result<f64> {
    let v_r = d_r(&v.f, 1)?;
    let density = RadialField::new(
        *v.grid(),
        v.f_t
            .values()
            .iter()
            .zip(v_r.values())
            .map(|(a, b)| 0.5 * (a * a + b * b))
            .collect(),
        crate::grid::Parity::Even,
    )?;
    Ok(integrate_radial(&density, 3))
}

/// Grid maxima of `<r>|v|`, `<r>|v_t|` and `<r>|v_r|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitors {
    pub v: f64,
    pub v_t: f64,
    pub grad_v: f64,
}

impl Monitors {
    pub fn max(&self) -> f64 {
        self.v.max(self.v_t).max(self.grad_v)
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.v_t.is_finite() && self.grad_v.is_finite()
    }
}

fn bracket_sup(f: &RadialField) -> f64 {
    let grid = f.grid();
    f.values()
        .iter()
        .enumerate()
        .fold(0.0, |m: f64, (i, x)| {
            let y = japanese_bracket(grid.r(i)) * x.abs();
            if y.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(y)
            }
        })
}

pub fn continuation_monitor(v: &FieldState) -> Result<Monitors> {
    Ok(Monitors {
        v: bracket_sup(&v.f),
        v_t: bracket_sup(&v.f_t),
        grad_v: bracket_sup(&d_r(&v.f, 1)?),
    })
}

/// Weighted suprema reported for a field snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    /// `sup_{r >= 1} |f| r^{3/2}`.
    pub outer: f64,
    /// `sup_{r <= 1} |f| r^{max(2 - s, 0)}`.
    pub inner: f64,
    /// `sup |f| <r>^{3/2}`.
    pub bracket: f64,
}

pub fn decay_report(f: &RadialField, s_proxy: usize) -> DecayReport {
    let grid = f.grid();
    let inner_pow = 2i32.saturating_sub(s_proxy as i32).max(0);
    let mut rep = DecayReport {
        outer: 0.0,
        inner: 0.0,
        bracket: 0.0,
    };
    for (i, x) in f.values().iter().enumerate() {
        let r = grid.r(i);
        let a = x.abs();
        if r >= 1.0 {
            rep.outer = rep.outer.max(a * r.powf(1.5));
        }
        if r <= 1.0 {
            rep.inner = rep.inner.max(a * r.powi(inner_pow));
        }
        rep.bracket = rep.bracket.max(a * japanese_bracket(r).powf(1.5));
    }
    rep
}

fn check_window(samples: &[RadialField], dt: f64, needed: usize) -> Result<()> {
    if samples.len() < needed {
        return Err(Error::InsufficientTimeLevels {
            needed,
            got: samples.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::NonUniformWindow);
    }
    let g = samples[0].grid();
    if samples.iter().any(|s| !s.grid().same_nodes(g)) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Discrete `Y_s` norm: maximum over interior samples of
/// `sum_{j <= s} |d_t^j w|_{H^{s-j}}`, with centered time differences.
pub fn ys_norm(samples: &[RadialField], dt: f64, s: usize) -> Result<f64> {
    if s > 2 {
        return Err(Error::SobolevIndex(s));
    }
    check_window(samples, dt, 2 * s + 1)?;
    let mut best: f64 = 0.0;
    for k in s..samples.len() - s {
        let mut total = sobolev_norm(&samples[k], s)?;
        if s >= 1 {
            let (a, b) = (&samples[k - 1], &samples[k + 1]);
            let d1: Vec<f64> = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (y - x) / (2.0 * dt))
                .collect();
            total += sobolev_norm(&RadialField::new(*a.grid(), d1, a.parity())?, s - 1)?;
        }
        if s == 2 {
            let (a, c, b) = (&samples[k - 1], &samples[k], &samples[k + 1]);
            let d2: Vec<f64> = (0..c.len())
                .map(|i| (a.values()[i] - 2.0 * c.values()[i] + b.values()[i]) / (dt * dt))
                .collect();
            total += lq_norm(&RadialField::new(*c.grid(), d2, c.parity())?, 2.0);
        }
        best = best.max(total);
    }
    Ok(best)
}

/// `|| |w|_{L^q_x} ||_{L^p_t}` over uniformly spaced samples, trapezoid in
/// time; infinite exponents are suprema.
pub fn spacetime_norm(samples: &[RadialField], dt: f64, p: f64, q: f64) -> Result<f64> {
    check_window(samples, dt, 1)?;
    let inner: Vec<f64> = samples.iter().map(|f| lq_norm(f, q)).collect();
    if p.is_infinite() {
        return Ok(inner.iter().fold(0.0, |m: f64, x| m.max(*x)));
    }
    if inner.len() == 1 {
        return Ok(0.0);
    }
    let last = inner.len() - 1;
    let sum: f64 = inner
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let w = if k == 0 || k == last { 0.5 } else { 1.0 };
            w * x.powf(p)
        })
        .sum();
    Ok((sum * dt).powf(1.0 / p))
}

/// Running `L^p_t L^q_x` value for samples arriving one at a time, possibly at
/// non-uniform times.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeTracker {
    pub p: f64,
    pub q: f64,
    acc: f64,
    last: Option<(f64, f64)>,
}

impl SpacetimeTracker {
    pub fn new(p: f64, q: f64) -> Self {
        Self {
            p,
            q,
            acc: 0.0,
            last: None,
        }
    }

    pub fn push(&mut self, time: f64, f: &RadialField) {
        let x = lq_norm(f, self.q);
        if self.p.is_infinite() {
            self.acc = self.acc.max(x);
        } else {
            let y = x.powf(self.p);
            if let Some((t0, y0)) = self.last {
                self.acc += 0.5 * (time - t0) * (y + y0);
            }
            self.last = Some((time, y));
        }
    }

    pub fn value(&self) -> f64 {
        if self.p.is_infinite() {
            self.acc
        } else {
            self.acc.powf(1.0 / self.p)
        }
    }
}

/// Exponent pairs `(p, q)` tracked for `Phi_t`.
pub const TRACKED_PAIRS: [(f64, f64); 4] = [
    (f64::INFINITY, 2.0),
    (2.0, 8.0),
    (4.0, 16.0 / 3.0),
    (f64::INFINITY, 4.0),
];

/// One row of the diagnostics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: u64,
    pub time: f64,
    pub energy: f64,
    pub energy_drift: f64,
    pub monitors: Monitors,
    /// `H^s` norms of `v` for `s = 1..=4`; NaN when disabled.
    pub sobolev: [f64; 4],
    pub decay_v: DecayReport,
    /// Decay ratios of `Phi`; NaN when disabled.
    pub decay_phi: DecayReport,
    /// Running values for [`TRACKED_PAIRS`]; NaN when disabled.
    pub spacetime: [f64; 4],
}

/// Column manifest of the diagnostics CSV.
pub const CSV_COLUMNS: [&str; 21] = [
    "step",
    "time",
    "energy",
    "energy_drift",
    "monitor_v",
    "monitor_vt",
    "monitor_gradv",
    "sobolev_1",
    "sobolev_2",
    "sobolev_3",
    "sobolev_4",
    "decay_v_outer",
    "decay_v_inner",
    "decay_v_bracket",
    "decay_phi_outer",
    "decay_phi_inner",
    "decay_phi_bracket",
    "st_phi_t_inf_2",
    "st_phi_t_2_8",
    "st_phi_t_4_16o3",
    "st_phi_t_inf_4",
];

impl DiagnosticsRecord {
    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut row = self.step.to_string();
        let vals = [
            self.time,
            self.energy,
            self.energy_drift,
            self.monitors.v,
            self.monitors.v_t,
            self.monitors.grad_v,
            self.sobolev[0],
            self.sobolev[1],
            self.sobolev[2],
            self.sobolev[3],
            self.decay_v.outer,
            self.decay_v.inner,
            self.decay_v.bracket,
            self.decay_phi.outer,
            self.decay_phi.inner,
            self.decay_phi.bracket,
            self.spacetime[0],
            self.spacetime[1],
            self.spacetime[2],
            self.spacetime[3],
        ];
        for x in vals {
            row.push(',');
            row.push_str(&fmt_f64(x));
        }
        row
    }
}

pub fn records_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = DiagnosticsRecord::csv_header();
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Which optional observables to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsToggles {
    pub sobolev: bool,
    pub phi: bool,
    pub decay_s: usize,
    /// Use the free-wave energy instead of the model energy.
    pub free_energy: bool,
}

impl Default for DiagnosticsToggles {
    fn default() -> Self {
        Self {
            sobolev: true,
            phi: true,
            decay_s: 1,
            free_energy: false,
        }
    }
}

/// Stateful producer of [`DiagnosticsRecord`]s along a run.
#[derive(Debug, Clone)]
pub struct DiagnosticsEngine {
    toggles: DiagnosticsToggles,
    params: KernelParams,
    energy0: Option<f64>,
    trackers: Vec<SpacetimeTracker>,
}

impl DiagnosticsEngine {
    pub fn new(toggles: DiagnosticsToggles, params: KernelParams) -> Self {
        Self {
            toggles,
            params,
            energy0: None,
            trackers: TRACKED_PAIRS
                .iter()
                .map(|&(p, q)| SpacetimeTracker::new(p, q))
                .collect(),
        }
    }

    pub fn initial_energy(&self) -> Option<f64> {
        self.energy0
    }

    fn energy(&self, v: &FieldState) -> Result<f64> {
        if self.toggles.free_energy {
            free_energy(v)
        } else {
            energy_from_v(v, &self.params)
        }
    }

    pub fn record(&mut self, step: u64, v: &FieldState) -> Result<DiagnosticsRecord> {
        let nan_report = DecayReport {
            outer: f64::NAN,
            inner: f64::NAN,
            bracket: f64::NAN,
        };
        let monitors = continuation_monitor(v)?;
        let energy = if monitors.is_finite() {
            self.energy(v).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        let e0 = *self.energy0.get_or_insert(energy);
        let energy_drift = if e0 != 0.0 {
            ((energy - e0) / e0).abs()
        } else {
            (energy - e0).abs()
        };
        let finite = monitors.is_finite() && energy.is_finite();
        let mut sobolev = [f64::NAN; 4];
        if self.toggles.sobolev && finite {
            for (s, slot) in sobolev.iter_mut().enumerate() {
                *slot = sobolev_norm(&v.f, s + 1)?;
            }
        }
        let mut decay_phi = nan_report;
        let mut spacetime = [f64::NAN; 4];
        if self.toggles.phi && finite {
            decay_phi = decay_report(&compute_phi(&v.f, &self.params)?, self.toggles.decay_s);
            let phi_t = compute_phi_t(v, &self.params);
            for (slot, tr) in spacetime.iter_mut().zip(&mut self.trackers) {
                tr.push(v.time, &phi_t);
                *slot = tr.value();
            }
        }
        Ok(DiagnosticsRecord {
            step,
            time: v.time,
            energy,
            energy_drift,
            monitors,
            sobolev,
            decay_v: decay_report(&v.f, self.toggles.decay_s),
            decay_phi,
            spacetime,
        })
    }
}
