//! Simulator and identity checker for the equivariant Faddeev model in 1+2
//! dimensions.
//!
//! The equivariant angle `u(t, r)` obeys a quasilinear wave equation on
//! `R^{1+2}`. Writing `u = r v + phi` with a fixed cutoff `phi` turns it into a
//! semilinear radial wave equation `v_tt - lap_4 v = F(v)` on `R^{1+4}`, which
//! is what [`evolve`] integrates. [`transform`] reconstructs `u` and the
//! auxiliary field `Phi`, and evaluates the residuals of the wave equations
//! satisfied by `Phi` and its time derivatives. [`diagnostics`] computes the
//! conserved energy, continuation monitors and norms, and [`verify`] holds the
//! manufactured-solution and convergence-order harnesses.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{FieldState, Parity, RadialField, RadialGrid};
pub use kernels::{AKind, Cutoff, CutoffProfile, FTilde, KernelParams};
