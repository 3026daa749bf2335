//! Desk-scale verification suites behind `faddeev verify`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::Result;

use faddeev_core::diagnostics::{energy, energy_from_v, DiagnosticsRecord, DiagnosticsToggles};
use faddeev_core::evolve::{run, InitialDataSpec, Model, RunConfig};
use faddeev_core::io::fmt_f64;
use faddeev_core::transform::{compute_phi, phi_large_branch, phi_small_branch, u_to_v, v_to_u};
use faddeev_core::verify::{
    evolved_residual_convergence, kernel_series_oracle, manufactured_convergence,
    phi_t_identity_study, v_residual_convergence, Ladder, ManufacturedSolution, StudyReport,
};
use faddeev_core::{CutoffProfile, FTilde, FieldState, KernelParams, Parity, RadialField, RadialGrid};

use crate::Suite;

const KERNELS: [FTilde; 5] = [FTilde::F0, FTilde::F1, FTilde::F2, FTilde::F3, FTilde::F4];
const ORDER_BAND: f64 = 0.3;

pub fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Kernels => "kernels",
        Suite::Transforms => "transforms",
        Suite::Convergence => "convergence",
        Suite::Energy => "energy",
    }
}

/// How a measured value is judged.
#[derive(Debug, Clone, Copy)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within { center: f64, band: f64 },
}

impl Bound {
    fn holds(self, x: f64) -> bool {
        match self {
            Bound::AtMost(t) => x <= t,
            Bound::AtLeast(t) => x >= t,
            Bound::Within { center, band } => (x - center).abs() <= band,
        }
    }

    fn describe(self) -> String {
        match self {
            Bound::AtMost(t) => format!("<= {t:e}"),
            Bound::AtLeast(t) => format!(">= {t}"),
            Bound::Within { center, band } => format!("{center} +- {band}"),
        }
    }
}

pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.bound.holds(self.value)
    }
}

#[derive(Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub studies: Vec<StudyReport>,
}

impl Report {
    fn add(&mut self, name: impl Into<String>, value: f64, bound: Bound) {
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
        });
    }

    fn order(&mut self, study: StudyReport, bound: Bound) {
        self.add(format!("order_{}", study.observable), study.finest_order(), bound);
        self.studies.push(study);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    /// `check,value,bound,pass`.
    pub fn csv(&self) -> String {
        let mut out = String::from("check,value,bound,pass\n");
        for c in &self.checks {
            let _ = writeln!(out, "{},{},{},{}", c.name, fmt_f64(c.value), c.bound.describe(), c.pass());
        }
        out
    }
}

pub fn run_suite(suite: Suite) -> Result<Report> {
    let mut report = Report::default();
    match suite {
        Suite::Kernels => kernels(&mut report)?,
        Suite::Transforms => transforms(&mut report)?,
        Suite::Convergence => convergence(&mut report)?,
        Suite::Energy => energy_suite(&mut report)?,
    }
    Ok(report)
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn kernels(report: &mut Report) -> Result<()> {
    let p = KernelParams::default();
    let limits = [1.0, 2.0 / 3.0, -1.0 / 3.0, -1.0, -2.0 / 3.0];
    for (j, want) in KERNELS.iter().zip(limits) {
        report.add(format!("limit_{j:?}"), rel(p.ftilde(*j, 0.0), want), Bound::AtMost(1e-12));
    }
    let xs: Vec<f64> = (0..=400).map(|k| 1e-2 + k as f64 * (1.0 - 1e-2) / 400.0).collect();
    for j in KERNELS {
        let oracle = kernel_series_oracle(j, &xs, &p);
        let worst = xs
            .iter()
            .zip(oracle)
            .map(|(&x, o)| rel(p.ftilde(j, x), o))
            .fold(0.0, f64::max);
        report.add(format!("oracle_{j:?}"), worst, Bound::AtMost(1e-12));
        let x = p.x_switch();
        let seam = rel(p.ftilde_series(j, x), p.ftilde_direct(j, x));
        report.add(format!("series_seam_{j:?}"), seam, Bound::AtMost(1e-12));
        let odd = (0..100)
            .map(|k| 0.37 * k as f64)
            .map(|x| (p.ftilde(j, x) - p.ftilde(j, -x)).abs())
            .fold(0.0, f64::max);
        report.add(format!("evenness_{j:?}"), odd, Bound::AtMost(0.0));
    }
    report.add("two_path_identity", two_path_worst(&p), Bound::AtMost(1e-9));
    Ok(())
}

/// Largest `|F - r^-2 v - r^-1 N(r v + pi)| / (1 + |F|)` over a 10^3 lattice
/// in `(v, v_t, v_r)` with `r` cycling through `[0.05, 0.45]`.
fn two_path_worst(p: &KernelParams) -> f64 {
    let level = |k: usize| -4.0 + 8.0 * k as f64 / 9.0;
    let mut worst = 0.0f64;
    for a in 0..10 {
        for b in 0..10 {
            for c in 0..10 {
                let (v, v_t, v_r) = (level(a), level(b), level(c));
                let r = 0.05 + 0.4 * ((a * 100 + b * 10 + c) as f64 / 999.0);
                let f = p.eval_f_rhs(v, v_t, v_r, r);
                let n = p
                    .eval_n(r * v + PI, r * v_t, v + r * v_r, r)
                    .unwrap_or(f64::NAN);
                worst = worst.max((f - v / (r * r) - n / r).abs() / (1.0 + f.abs()));
            }
        }
    }
    worst
}

fn transforms(report: &mut Report) -> Result<()> {
    let p = KernelParams::default();
    // both branches are valid at r = 1/2, where the cutoff correction vanishes
    let r = 0.5;
    let seam = [-2.0, -0.3, 0.1, 0.8, 3.0]
        .iter()
        .map(|&v| -> Result<f64> {
            let small = phi_small_branch(v, r, &p)?;
            let large = phi_large_branch(r * v + PI, r, &p)?;
            Ok((small - large).abs())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    report.add("phi_branch_seam", seam, Bound::AtMost(1e-10));

    let grid = RadialGrid::new(256, 8.0, 4)?;
    let ms = ManufacturedSolution::default();
    let state = ms.state(grid, 0.3);
    let back = u_to_v(&v_to_u(&state, &p)?, &p)?;
    let round = state
        .f
        .values()
        .iter()
        .zip(back.f.values())
        // the origin value of v is extrapolated, not divided
        .skip(1)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report.add("chart_round_trip", round, Bound::AtMost(1e-12));

    let far = RadialGrid::new(200, 10.0, 4)?;
    let phi = compute_phi(&RadialField::zeros(far, Parity::Even), &p)?;
    let at_10 = *phi.values().last().unwrap_or(&f64::NAN);
    report.add("phi_far_field_rel", rel(at_10, -PI * 1e-3), Bound::AtMost(0.02));

    let study = phi_t_identity_study(ms, &p, grid, 0.4, &[0.04, 0.02, 0.01])?;
    report.order(study, Bound::Within { center: 2.0, band: ORDER_BAND });
    Ok(())
}

fn convergence(report: &mut Report) -> Result<()> {
    let p = KernelParams::default();
    let ms = ManufacturedSolution::default();
    let ladder = Ladder {
        base_cells: 128,
        levels: 3,
        r_max: 8.0,
        cfl: 0.25,
    };
    let fourth = Bound::AtLeast(3.5 - ORDER_BAND);
    let second = Bound::AtLeast(2.0 - ORDER_BAND);
    report.order(manufactured_convergence(ms, &p, &ladder, 1.0)?, fourth);
    report.order(v_residual_convergence(ms, &p, &ladder, 0.7)?, fourth);
    let smooth = KernelParams::new(1.0, KernelParams::DEFAULT_X_SWITCH, 8, CutoffProfile::new(11)?)?;
    let evolved = Ladder {
        base_cells: 512,
        ..ladder
    };
    let [phi, phi_t] = evolved_residual_convergence(&InitialDataSpec::gaussian(0.1, 0.0, 1.0), &smooth, &evolved, 0.5)?;
    report.order(phi, second);
    report.order(phi_t, second);
    let grid = RadialGrid::new(256, 8.0, 4)?;
    let study = phi_t_identity_study(ms, &p, grid, 0.4, &[0.04, 0.02, 0.01])?;
    report.order(study, Bound::Within { center: 2.0, band: ORDER_BAND });
    Ok(())
}

fn max_drift(records: &[DiagnosticsRecord]) -> f64 {
    records.iter().map(|r| r.energy_drift.abs()).fold(0.0, f64::max)
}

fn energy_suite(report: &mut Report) -> Result<()> {
    let p = KernelParams::default();
    let grid = RadialGrid::new(4000, 20.0, 2)?;
    let u = RadialField::from_fn(grid, Parity::Even, |r| PI * (-r * r).exp());
    let u_state = FieldState::new(u, RadialField::zeros(grid, Parity::Even), 0.0)?;
    // 40-digit quadrature reference
    let e = energy(&u_state, &p)?;
    report.add("energy_pi_gaussian_rel", rel(e, 5.366_511_924_548_974), Bound::AtMost(1e-8));

    let g4 = RadialGrid::new(256, 8.0, 4)?;
    let bump = InitialDataSpec::gaussian(0.3, 0.0, 1.0).build(g4, &p)?;
    report.add("energy_positive", energy_from_v(&bump, &p)?, Bound::AtLeast(0.0));

    let free = run(&RunConfig {
        n_cells: 2048,
        r_max: 40.0,
        t_end: 5.0,
        model: Model::FreeWave,
        initial: InitialDataSpec::gaussian(0.1, 0.0, 1.0),
        ..RunConfig::default()
    })?;
    report.add("free_wave_drift", max_drift(&free.records), Bound::AtMost(1e-6));

    // the reference energy run: a = 0.5, r_max = 40, t_end = 20
    let cells = [1024, 2048, 4096];
    let drifts = cells
        .iter()
        .map(|&n| {
            let cfg = RunConfig {
                n_cells: n,
                r_max: 40.0,
                t_end: 20.0,
                initial: InitialDataSpec::gaussian(0.5, 0.0, 1.0),
                diagnostics_every: 8 * n / 1024,
                toggles: DiagnosticsToggles {
                    sobolev: false,
                    phi: false,
                    ..DiagnosticsToggles::default()
                },
                ..RunConfig::default()
            };
            Ok(max_drift(&run(&cfg)?.records))
        })
        .collect::<Result<Vec<f64>>>()?;
    report.add("energy_drift_n2048", drifts[1], Bound::AtMost(1e-6));
    let drs: Vec<f64> = cells.iter().map(|&n| 40.0 / n as f64).collect();
    let study = StudyReport::new("energy_drift", &drs, &drifts);
    report.order(study, Bound::AtLeast(3.5 - ORDER_BAND));
    Ok(())
}
