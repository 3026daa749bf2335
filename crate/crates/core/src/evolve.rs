//! Method-of-lines evolution of `(v, v_t)` for `v_tt = lap_4 v + F(v)` with
//! classical RK4, a damping sponge near `r_max` and blow-up detection.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::diagnostics::{DiagnosticsEngine, DiagnosticsRecord, DiagnosticsToggles};
use crate::error::{Error, Result};
use crate::grid::{fill_extended, Derivatives, FieldState, Parity, RadialField, RadialGrid};
use crate::io::parse_csv;
use crate::kernels::KernelParams;
use crate::transform::u_to_v;

const PAR_MIN_NODES: usize = 1024;
const PAR_CHUNK: usize = 256;

/// Source term of the evolved equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `F(v)` from the kernels.
    Faddeev,
    /// `F = 0`: the free 4D radial wave equation.
    FreeWave,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Faddeev => "faddeev",
            Model::FreeWave => "free_wave",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "faddeev" => Some(Model::Faddeev),
            "free_wave" => Some(Model::FreeWave),
            _ => None,
        }
    }
}

/// Damping `-sigma(r) v_t` with `sigma` ramping quadratically from `start` to
/// `r_max`, reaching `strength` at the outer node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sponge {
    /// `None` means `0.85 r_max`.
    pub start: Option<f64>,
    pub strength: f64,
}

impl Default for Sponge {
    fn default() -> Self {
        Self {
            start: None,
            strength: 1.0,
        }
    }
}

impl Sponge {
    pub fn off() -> Self {
        Self {
            start: None,
            strength: 0.0,
        }
    }

    pub fn start_for(&self, r_max: f64) -> f64 {
        self.start.unwrap_or(0.85 * r_max)
    }

    pub fn profile(&self, grid: &RadialGrid) -> Vec<f64> {
        let r0 = self.start_for(grid.r_max());
        let width = grid.r_max() - r0;
        grid.nodes()
            .map(|r| {
                if r <= r0 || self.strength == 0.0 {
                    0.0
                } else {
                    let x = (r - r0) / width;
                    self.strength * x * x
                }
            })
            .collect()
    }
}

/// Radial shape `a (g(r - r0) + g(r + r0)) / 2`, `g(x) = exp(-x^2 / sigma^2)`,
/// which is even in `r` and equals `a g(r)` for `r0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianShape {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussianShape {
    pub fn eval(&self, r: f64) -> f64 {
        let g = |x: f64| (-(x * x) / (self.width * self.width)).exp();
        0.5 * self.amplitude * (g(r - self.center) + g(r + self.center))
    }
}

/// Initial data families.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDataSpec {
    /// Gaussian `v_0` and `v_1` profiles.
    GaussianV {
        v: GaussianShape,
        v_t: GaussianShape,
    },
    /// Tabulated `u_0`, `u_1` from a CSV with header `r,u,u_t` on the run's
    /// nodes.
    ProfileU { path: PathBuf },
}

impl InitialDataSpec {
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Self {
        InitialDataSpec::GaussianV {
            v: GaussianShape {
                amplitude,
                center,
                width,
            },
            v_t: GaussianShape {
                amplitude: 0.0,
                center,
                width,
            },
        }
    }

    /// Even-parity `v` state at `t = 0`.
    pub fn build(&self, grid: RadialGrid, p: &KernelParams) -> Result<FieldState> {
        match self {
            InitialDataSpec::GaussianV { v, v_t } => {
                if !(v.width > 0.0 && v_t.width > 0.0) {
                    return Err(Error::param("width", "must be positive"));
                }
                FieldState::new(
                    RadialField::from_fn(grid, Parity::Even, |r| v.eval(r)),
                    RadialField::from_fn(grid, Parity::Even, |r| v_t.eval(r)),
                    0.0,
                )
            }
            InitialDataSpec::ProfileU { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let (header, rows) = parse_csv(&text)?;
                if header != ["r", "u", "u_t"] {
                    return Err(Error::Config(format!(
                        "profile {} must have header r,u,u_t",
                        path.display()
                    )));
                }
                if rows.len() != grid.n_nodes()
                    || rows
                        .iter()
                        .enumerate()
                        .any(|(i, row)| (row[0] - grid.r(i)).abs() > 1e-9 * grid.r_max())
                {
                    return Err(Error::GridMismatch);
                }
                let g2 = grid.with_dim(2)?;
                let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
                let mut u = RadialField::new(g2, col(1), Parity::Even)?;
                let mut u_t = RadialField::new(g2, col(2), Parity::Even)?;
                // the tag describes u - phi; smooth data has it odd
                let u0 = u.values()[0];
                u = RadialField::new(g2, u.into_values(), Parity::Odd)?;
                u.values_mut()[0] = u0;
                u_t = RadialField::new(g2, u_t.into_values(), Parity::Odd)?;
                let v = u_to_v(&FieldState::new(u, u_t, 0.0)?, p)?;
                if v.parity() != Parity::Even {
                    return Err(Error::ParityMismatch);
                }
                Ok(v)
            }
        }
    }
}

/// Thresholds used by [`detect_blowup`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupLimits {
    pub monitor_ceiling: f64,
    pub drift_limit: f64,
}

impl Default for BlowupLimits {
    fn default() -> Self {
        Self {
            monitor_ceiling: 1e6,
            drift_limit: 1e-2,
        }
    }
}

/// Outcome of a blow-up check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowupStatus {
    Ok,
    NonFinite,
    MonitorCeiling { value: f64 },
    EnergyDrift { drift: f64 },
}

impl BlowupStatus {
    pub fn fired(&self) -> bool {
        !matches!(self, BlowupStatus::Ok)
    }

    pub fn label(&self) -> &'static str {
        match self {
            BlowupStatus::Ok => "ok",
            BlowupStatus::NonFinite => "blowup_nonfinite",
            BlowupStatus::MonitorCeiling { .. } => "blowup_monitor",
            BlowupStatus::EnergyDrift { .. } => "scheme_breakdown_energy_drift",
        }
    }
}

/// Classify a state and its latest diagnostics.
pub fn detect_blowup(
    state: &FieldState,
    record: &DiagnosticsRecord,
    limits: &BlowupLimits,
) -> BlowupStatus {
    let finite = state
        .f
        .values()
        .iter()
        .chain(state.f_t.values())
        .all(|x| x.is_finite());
    if !finite || !record.monitors.is_finite() || !record.energy.is_finite() {
        return BlowupStatus::NonFinite;
    }
    let m = record.monitors.max();
    if m >= limits.monitor_ceiling {
        return BlowupStatus::MonitorCeiling { value: m };
    }
    if record.energy_drift > limits.drift_limit {
        return BlowupStatus::EnergyDrift {
            drift: record.energy_drift,
        };
    }
    BlowupStatus::Ok
}

/// Everything needed for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_cells: usize,
    pub r_max: f64,
    pub t_end: f64,
    pub cfl: f64,
    /// Explicit step; must not exceed `cfl * dr`. `None` picks the largest
    /// step `<= cfl * dr` that lands on `t_end`.
    pub dt: Option<f64>,
    pub sponge: Sponge,
    pub model: Model,
    pub initial: InitialDataSpec,
    /// Diagnostics every this many steps (the last step is always recorded).
    pub diagnostics_every: usize,
    /// Snapshots every this many steps; 0 disables them.
    pub snapshot_every: usize,
    pub toggles: DiagnosticsToggles,
    pub limits: BlowupLimits,
    pub kernels: KernelParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_cells: 512,
            r_max: 20.0,
            t_end: 5.0,
            cfl: 0.25,
            dt: None,
            sponge: Sponge::default(),
            model: Model::Faddeev,
            initial: InitialDataSpec::gaussian(0.1, 0.0, 1.0),
            diagnostics_every: 10,
            snapshot_every: 0,
            toggles: DiagnosticsToggles::default(),
            limits: BlowupLimits::default(),
            kernels: KernelParams::default(),
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.n_cells, self.r_max, 4)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(Error::param("cfl", format!("must lie in (0, 0.5], got {}", self.cfl)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("t_end", format!("must be positive, got {}", self.t_end)));
        }
        let start = self.sponge.start_for(self.r_max);
        if !(start < self.r_max) {
            return Err(Error::param(
                "sponge_start",
                format!("must be below r_max = {}, got {start}", self.r_max),
            ));
        }
        if !(self.sponge.strength >= 0.0) {
            return Err(Error::param("sponge_strength", "must be non-negative"));
        }
        if self.diagnostics_every == 0 {
            return Err(Error::param("diagnostics_every", "must be positive"));
        }
        self.time_step(&grid)?;
        Ok(())
    }

    /// `(dt, steps)` for this configuration.
    pub fn time_step(&self, grid: &RadialGrid) -> Result<(f64, u64)> {
        let limit = self.cfl * grid.dr();
        match self.dt {
            Some(dt) => {
                if !(dt > 0.0) {
                    return Err(Error::param("dt", "must be positive"));
                }
                if dt > limit * (1.0 + 1e-12) {
                    return Err(Error::CflViolation { dt, limit });
                }
                Ok((dt, (self.t_end / dt - 1e-9).ceil().max(1.0) as u64))
            }
            None => {
                let steps = (self.t_end / limit - 1e-9).ceil().max(1.0) as u64;
                Ok((self.t_end / steps as f64, steps))
            }
        }
    }
}

/// Extra forcing `g(t, r)` added to the `v_t` equation.
pub type Forcing = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Static data shared by every right-hand-side evaluation.
pub struct Evolver {
    grid: RadialGrid,
    params: KernelParams,
    model: Model,
    sigma: Vec<f64>,
    deriv: Derivatives,
    forcing: Option<Forcing>,
    cfl_limit: f64,
    // scratch
    ext: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    k: [(Vec<f64>, Vec<f64>); 4],
    stage: (Vec<f64>, Vec<f64>),
}

impl std::fmt::Debug for Evolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Evolver")
            .field("grid", &self.grid)
            .field("model", &self.model)
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl Evolver {
    pub fn new(grid: RadialGrid, params: KernelParams, model: Model, sponge: Sponge, cfl: f64) -> Result<Self> {
        if grid.dim() != 4 {
            return Err(Error::param("dim", "the evolved field lives on a 4D grid"));
        }
        if grid.n_nodes() < 7 {
            return Err(Error::GridTooSmall {
                nodes: grid.n_nodes(),
                needed: 7,
            });
        }
        let n = grid.n_nodes();
        let pair = || (vec![0.0; n], vec![0.0; n]);
        Ok(Self {
            grid,
            params,
            model,
            sigma: sponge.profile(&grid),
            deriv: Derivatives::new(grid.dr()),
            forcing: None,
            cfl_limit: cfl * grid.dr(),
            ext: Vec::with_capacity(n + grid.ghost()),
            d1: vec![0.0; n],
            d2: vec![0.0; n],
            k: [pair(), pair(), pair(), pair()],
            stage: pair(),
        })
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// `(v_t, lap_4 v + F(v) - sigma v_t + g)` into `dv`, `dvt`. The outer node
    /// is held fixed.
    fn rhs_into(&mut self, v: &[f64], vt: &[f64], t: f64, which: usize) {
        let grid = self.grid;
        let n = grid.n_nodes();
        fill_extended(v, grid.ghost(), Parity::Even, &mut self.ext);
        self.deriv
            .first_and_second(&self.ext, grid.ghost(), &mut self.d1, &mut self.d2);
        let (dv, dvt) = &mut self.k[which];
        dv.copy_from_slice(vt);
        let d1 = &self.d1;
        let d2 = &self.d2;
        let params = &self.params;
        let sigma = &self.sigma;
        let forcing = self.forcing.as_deref();
        let model = self.model;
        let dr = grid.dr();
        let node = |i: usize| -> f64 {
            let r = i as f64 * dr;
            let lap = if i == 0 {
                4.0 * d2[0]
            } else {
                d2[i] + 3.0 * d1[i] / r
            };
            let mut acc = lap;
            if model == Model::Faddeev {
                acc += params.eval_f_rhs(v[i], vt[i], d1[i], r);
            }
            acc -= sigma[i] * vt[i];
            if let Some(g) = forcing {
                acc += g(t, r);
            }
            acc
        };
        if n >= PAR_MIN_NODES {
            dvt.par_chunks_mut(PAR_CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| {
                    for (j, out) in chunk.iter_mut().enumerate() {
                        *out = node(c * PAR_CHUNK + j);
                    }
                });
        } else {
            for (i, out) in dvt.iter_mut().enumerate() {
                *out = node(i);
            }
        }
        dv[n - 1] = 0.0;
        dvt[n - 1] = 0.0;
    }

    /// Right-hand side `(dv/dt, dv_t/dt)` of a state.
    pub fn rhs(&mut self, state: &FieldState) -> Result<(RadialField, RadialField)> {
        self.check_state(state)?;
        self.rhs_into(state.f.values(), state.f_t.values(), state.time, 0);
        let (a, b) = &self.k[0];
        Ok((
            RadialField::new(self.grid, a.clone(), Parity::Even)?,
            RadialField::new(self.grid, b.clone(), Parity::Even)?,
        ))
    }

    fn check_state(&self, state: &FieldState) -> Result<()> {
        if !state.grid().same_nodes(&self.grid) {
            return Err(Error::GridMismatch);
        }
        if state.parity() != Parity::Even {
            return Err(Error::ParityMismatch);
        }
        Ok(())
    }

    /// One classical RK4 step of size `dt`, in place.
    pub fn step(&mut self, state: &mut FieldState, dt: f64) -> Result<()> {
        if dt > self.cfl_limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation {
                dt,
                limit: self.cfl_limit,
            });
        }
        self.check_state(state)?;
        let t = state.time;
        let n = self.grid.n_nodes();
        let mut sv = std::mem::take(&mut self.stage.0);
        let mut svt = std::mem::take(&mut self.stage.1);
        let coeff = [0.5, 0.5, 1.0];
        self.rhs_into(state.f.values(), state.f_t.values(), t, 0);
        for s in 0..3 {
            let h = coeff[s] * dt;
            let (kv, kvt) = &self.k[s];
            for i in 0..n {
                sv[i] = state.f.values()[i] + h * kv[i];
                svt[i] = state.f_t.values()[i] + h * kvt[i];
            }
            self.rhs_into(&sv, &svt, t + h, s + 1);
        }
        let w = dt / 6.0;
        let v = state.f.values_mut();
        for i in 0..n {
            v[i] += w * (self.k[0].0[i] + 2.0 * self.k[1].0[i] + 2.0 * self.k[2].0[i] + self.k[3].0[i]);
        }
        let vt = state.f_t.values_mut();
        for i in 0..n {
            vt[i] += w * (self.k[0].1[i] + 2.0 * self.k[1].1[i] + 2.0 * self.k[2].1[i] + self.k[3].1[i]);
        }
        state.time = t + dt;
        self.stage = (sv, svt);
        Ok(())
    }

    /// Advance `steps` steps of size `dt`.
    pub fn advance(&mut self, state: &mut FieldState, dt: f64, steps: u64) -> Result<()> {
        let t0 = state.time;
        for k in 0..steps {
            self.step(state, dt)?;
            // avoid accumulating rounding in the clock
            state.time = t0 + (k + 1) as f64 * dt;
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    BlowUp(BlowupStatus),
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowUp(b) => b.label(),
        }
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: FieldState,
    pub steps_taken: u64,
    pub dt: f64,
}

/// Run a configuration to completion without snapshots.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    run_with(config, |_, _| Ok(()))
}

/// Run a configuration, calling `snapshot(step, state)` at the snapshot
/// cadence (including step 0 and the final step).
pub fn run_with(
    config: &RunConfig,
    mut snapshot: impl FnMut(u64, &FieldState) -> Result<()>,
) -> Result<RunOutcome> {
    config.validate()?;
    let grid = config.grid()?;
    let (dt, steps) = config.time_step(&grid)?;
    let mut state = config.initial.build(grid, &config.kernels)?;
    let mut evolver = Evolver::new(
        grid,
        config.kernels.clone(),
        config.model,
        config.sponge,
        config.cfl,
    )?;
    let mut toggles = config.toggles;
    toggles.free_energy = config.model == Model::FreeWave;
    let mut engine = DiagnosticsEngine::new(toggles, config.kernels.clone());
    let mut records = Vec::new();
    let snap_due = |k: u64| config.snapshot_every > 0 && (k % config.snapshot_every as u64 == 0 || k == steps);

    let first = engine.record(0, &state)?;
    let status = detect_blowup(&state, &first, &config.limits);
    records.push(first);
    if snap_due(0) {
        snapshot(0, &state)?;
    }
    if status.fired() {
        return Ok(RunOutcome {
            status: RunStatus::BlowUp(status),
            records,
            final_state: state,
            steps_taken: 0,
            dt,
        });
    }
    let mut taken = 0;
    for k in 1..=steps {
        evolver.step(&mut state, dt)?;
        state.time = k as f64 * dt;
        taken = k;
        let bad = state
            .f_t
            .values()
            .iter()
            .chain(state.f.values())
            .any(|x| !x.is_finite());
        if bad || k % config.diagnostics_every as u64 == 0 || k == steps {
            let rec = engine.record(k, &state)?;
            let st = detect_blowup(&state, &rec, &config.limits);
            records.push(rec);
            if snap_due(k) || st.fired() {
                snapshot(k, &state)?;
            }
            if st.fired() {
                return Ok(RunOutcome {
                    status: RunStatus::BlowUp(st),
                    records,
                    final_state: state,
                    steps_taken: taken,
                    dt,
                });
            }
        } else if snap_due(k) {
            snapshot(k, &state)?;
        }
    }
    Ok(RunOutcome {
        status: RunStatus::Completed,
        records,
        final_state: state,
        steps_taken: taken,
        dt,
    })
}
