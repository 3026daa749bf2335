//! Reference values computed offline by `fixtures/oracles.py` (sympy and
//! mpmath at 40 digits) and frozen here.

use std::f64::consts::PI;

use faddeev_core::diagnostics::{continuation_monitor, energy};
use faddeev_core::grid::{quadrature_1d, sobolev_norm};
use faddeev_core::transform::compute_phi;
use faddeev_core::verify::kernel_series_oracle;
use faddeev_core::{FTilde, FieldState, KernelParams, Parity, RadialField, RadialGrid};

const ENERGY_PI_GAUSSIAN: f64 = 5.366_511_924_548_974;
const PHI_AT_10: f64 = -0.003_118_249_475_281_165;
const A3_INTEGRAL_R2: f64 = 2.663_666_888_626_140_6;
const MONITOR_GRAD_GAUSSIAN: f64 = 1.083_453_476_168_624_4;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn energy_of_pi_gaussian() {
    let p = KernelParams::default();
    let grid = RadialGrid::new(4000, 20.0, 2).unwrap();
    let u = RadialField::from_fn(grid, Parity::Even, |r| PI * (-r * r).exp());
    let u_t = RadialField::zeros(grid, Parity::Even);
    let e = energy(&FieldState::new(u, u_t, 0.0).unwrap(), &p).unwrap();
    assert!(rel(e, ENERGY_PI_GAUSSIAN) < 1e-8, "energy {e}");
}

#[test]
fn phi_far_field_matches_quadrature_oracle() {
    let p = KernelParams::default();
    let grid = RadialGrid::new(200, 10.0, 4).unwrap();
    let phi = compute_phi(&RadialField::zeros(grid, Parity::Even), &p).unwrap();
    let last = *phi.values().last().unwrap();
    assert!(rel(last, PHI_AT_10) < 1e-10, "Phi(10) = {last}");
}

#[test]
fn a3_integral() {
    let p = KernelParams::default();
    let got = quadrature_1d(|y| p.a3(y, 2.0).powf(-1.5), 0.0, PI, 64).unwrap();
    assert!(rel(got, A3_INTEGRAL_R2) < 1e-13, "{got}");
}

#[test]
fn gradient_monitor_of_gaussian() {
    let grid = RadialGrid::new(8000, 8.0, 4).unwrap();
    let v = RadialField::from_fn(grid, Parity::Even, |r| (-r * r).exp());
    let state = FieldState::new(v, RadialField::zeros(grid, Parity::Even), 0.0).unwrap();
    let m = continuation_monitor(&state).unwrap();
    // node quantization of the maximum is second order in dr
    assert!(rel(m.grad_v, MONITOR_GRAD_GAUSSIAN) < 1e-6, "{}", m.grad_v);
    assert!((m.v - 1.0).abs() < 1e-12);
    assert_eq!(m.v_t, 0.0);
}

#[test]
fn h1_norm_of_gaussian() {
    let grid = RadialGrid::new(1600, 10.0, 4).unwrap();
    let v = RadialField::from_fn(grid, Parity::Even, |r| (-r * r).exp());
    let got = sobolev_norm(&v, 1).unwrap();
    assert!(rel(got, (5.0f64 / 8.0).sqrt()) < 1e-9, "{got}");
}

#[test]
fn kernel_limits_at_origin() {
    for alpha in [0.5, 1.0, 2.0] {
        let p = KernelParams::with_alpha(alpha).unwrap();
        let a2 = alpha * alpha;
        let expected = [a2, 2.0 / 3.0, -a2 / 3.0, -a2, -2.0 * a2 / 3.0];
        for (got, want) in p.ftilde_all(0.0).iter().zip(expected) {
            assert!(rel(*got, want) <= 1e-12, "alpha {alpha}: {got} vs {want}");
        }
    }
}

#[test]
fn kernels_agree_with_long_series() {
    let p = KernelParams::default();
    let xs: Vec<f64> = (0..=200).map(|k| 1e-2 + k as f64 * (1.0 - 1e-2) / 200.0).collect();
    for j in [FTilde::F0, FTilde::F1, FTilde::F2, FTilde::F3, FTilde::F4] {
        let reference = kernel_series_oracle(j, &xs, &p);
        for (&x, want) in xs.iter().zip(reference) {
            let got = p.ftilde(j, x);
            assert!(rel(got, want) <= 1e-12, "{j:?} at {x}: {got} vs {want}");
        }
    }
}
