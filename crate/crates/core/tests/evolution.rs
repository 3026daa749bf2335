use faddeev_core::diagnostics::free_energy;
use faddeev_core::evolve::{
    detect_blowup, run, BlowupLimits, BlowupStatus, Evolver, InitialDataSpec, Model, RunConfig,
    RunStatus, Sponge,
};
use faddeev_core::grid::derivative_from_extended;
use faddeev_core::verify::{l2_difference, observed_orders};
use faddeev_core::{Error, FieldState, KernelParams, Parity, RadialField, RadialGrid};

fn evolve_free(n: usize, r_max: f64, sponge: Sponge, init: &InitialDataSpec, t: f64) -> FieldState {
    let p = KernelParams::default();
    let grid = RadialGrid::new(n, r_max, 4).unwrap();
    let mut ev = Evolver::new(grid, p.clone(), Model::FreeWave, sponge, 0.25).unwrap();
    let mut s = init.build(grid, &p).unwrap();
    let dt = 0.25 * grid.dr();
    ev.advance(&mut s, dt, (t / dt).round() as u64).unwrap();
    s
}

fn peak_of_scaled(s: &FieldState) -> f64 {
    let g = s.grid();
    (0..g.n_nodes())
        .map(|i| (g.r(i), g.r(i).powf(1.5) * s.f.values()[i].abs()))
        .fold((0.0, 0.0), |best, x| if x.1 > best.1 { x } else { best })
        .0
}

#[test]
fn zero_state_stays_zero() {
    for model in [Model::Faddeev, Model::FreeWave] {
        let cfg = RunConfig {
            n_cells: 128,
            r_max: 8.0,
            t_end: 1.0,
            model,
            initial: InitialDataSpec::gaussian(0.0, 0.0, 1.0),
            ..RunConfig::default()
        };
        let out = run(&cfg).unwrap();
        assert_eq!(out.status, RunStatus::Completed);
        if model == Model::FreeWave {
            assert!(out.final_state.f.values().iter().all(|&x| x == 0.0));
            let e0 = out.records[0].energy;
            assert!(out.records.iter().all(|r| r.energy == e0));
        }
    }
}

#[test]
fn linear_pulse_front_moves_at_unit_speed() {
    let init = InitialDataSpec::gaussian(1e-6, 0.0, 1.0);
    let a = evolve_free(1024, 40.0, Sponge::default(), &init, 10.0);
    let b = evolve_free(1024, 40.0, Sponge::default(), &init, 20.0);
    assert!(a.f.max_abs() <= 1e-6);
    let speed = (peak_of_scaled(&b) - peak_of_scaled(&a)) / 10.0;
    assert!((speed - 1.0).abs() <= 0.02, "front speed {speed}");
}

#[test]
fn free_wave_self_convergence_is_fourth_order() {
    let init = InitialDataSpec::gaussian(0.1, 0.0, 1.0);
    let levels: Vec<FieldState> = [64, 128, 256, 512]
        .iter()
        .map(|&n| evolve_free(n, 8.0, Sponge::off(), &init, 2.0))
        .collect();
    let restrict = |s: &FieldState, coarse: RadialGrid| {
        let k = s.grid().n_cells() / coarse.n_cells();
        let vals = s.f.values().iter().step_by(k).copied().collect();
        RadialField::new(coarse, vals, Parity::Even).unwrap()
    };
    let diffs: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            let coarse = *w[0].grid();
            l2_difference(&w[0].f, &restrict(&w[1], coarse)).unwrap()
        })
        .collect();
    let ratios: Vec<f64> = diffs.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    let finest = *ratios.last().unwrap();
    assert!((finest - 4.0).abs() <= 0.3, "self-convergence orders {ratios:?}");
    let e0 = free_energy(&init.build(*levels[3].grid(), &KernelParams::default()).unwrap()).unwrap();
    let e1 = free_energy(&levels[3]).unwrap();
    assert!(((e1 - e0) / e0).abs() < 1e-6);
}

#[test]
fn sponge_absorbs_most_of_an_outgoing_pulse() {
    // reference on a domain three times larger sees no boundary before t = 40
    let init = InitialDataSpec::gaussian(1e-6, 0.0, 1.0);
    let reflected = |sponge: Sponge| {
        let s = evolve_free(512, 20.0, sponge, &init, 32.0);
        let b = evolve_free(1536, 60.0, Sponge::off(), &init, 32.0);
        (0..=256)
            .map(|i| (s.f.values()[i] - b.f.values()[i]).abs())
            .fold(0.0, f64::max)
    };
    let with = reflected(Sponge::default());
    let without = reflected(Sponge::off());
    assert!(with < 0.5 * without, "{with} vs {without}");
}

#[test]
fn dt_above_cfl_is_rejected_before_stepping() {
    let cfg = RunConfig {
        n_cells: 64,
        r_max: 8.0,
        dt: Some(4.0 * 0.25 * 8.0 / 64.0),
        ..RunConfig::default()
    };
    assert!(matches!(run(&cfg), Err(Error::CflViolation { .. })));
}

#[test]
fn blowup_detection() {
    let p = KernelParams::default();
    let grid = RadialGrid::new(64, 8.0, 4).unwrap();
    let state = InitialDataSpec::gaussian(0.1, 0.0, 1.0).build(grid, &p).unwrap();
    let mut engine = faddeev_core::diagnostics::DiagnosticsEngine::new(Default::default(), p.clone());
    let record = engine.record(0, &state).unwrap();
    assert_eq!(detect_blowup(&state, &record, &BlowupLimits::default()), BlowupStatus::Ok);

    let zero_ceiling = BlowupLimits { monitor_ceiling: 0.0, ..BlowupLimits::default() };
    assert!(matches!(
        detect_blowup(&state, &record, &zero_ceiling),
        BlowupStatus::MonitorCeiling { .. }
    ));

    let mut bad = state.clone();
    bad.f.values_mut()[5] = f64::NAN;
    assert_eq!(detect_blowup(&bad, &record, &BlowupLimits::default()), BlowupStatus::NonFinite);

    let cfg = RunConfig {
        n_cells: 64,
        r_max: 8.0,
        t_end: 0.5,
        limits: zero_ceiling,
        ..RunConfig::default()
    };
    let out = run(&cfg).unwrap();
    assert!(matches!(out.status, RunStatus::BlowUp(BlowupStatus::MonitorCeiling { .. })));
    assert_eq!(out.steps_taken, 0);
}

#[test]
fn first_order_ghost_fill_is_detected() {
    // linear extrapolation into the ghosts instead of the even mirror
    let f = |r: f64| (-r * r).cos() * (1.0 + r * r);
    let df = |r: f64| 2.0 * r * (-r * r).sin() * (1.0 + r * r) + 2.0 * r * (-r * r).cos();
    let mut drs = Vec::new();
    let mut errs = Vec::new();
    for n in [40, 80, 160, 320] {
        let dr = 2.0 / n as f64;
        let ghost = 3;
        let slope = f(dr) - f(0.0);
        let mut ext: Vec<f64> = (1..=ghost).rev().map(|k| f(0.0) - slope * k as f64).collect();
        ext.extend((0..=n).map(|i| f(i as f64 * dr)));
        let d = derivative_from_extended(&ext, ghost, dr, 1);
        let err = (0..4).map(|i| (d[i] - df(i as f64 * dr)).abs()).fold(0.0, f64::max);
        drs.push(dr);
        errs.push(err);
    }
    let orders = observed_orders(&drs, &errs);
    let last = *orders.last().unwrap();
    assert!((last - 1.0).abs() <= 0.3, "orders {orders:?}");
}
