//! Pseudo-spectral solver and verification suite for the helically
//! decimated Navier-Stokes equations on the 2π-periodic box.
//!
//! The velocity is restricted to positive-helicity Fourier modes,
//! `v(x) = Σ_k u+(k) h+(k) e^{ik·x}`, and only the scalar amplitudes `u+(k)`
//! are stored. Energy `E = Σ|u+|²` and helicity `H = Σ|k||u+|²` are both
//! conserved by the truncated nonlinearity, and `H` is the squared H^{1/2}
//! norm of the field.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod checkpoint;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod integrator;
pub mod lattice;
pub mod nonlinear;
pub mod series;
pub mod transform;
pub mod verify;

pub use basis::{BasisAxes, FallbackAxis, HelicalBasisVector, Helicity, ReferenceAxis};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CheckpointError};
pub use config::{parse_config, ConfigError};
pub use diagnostics::{DiagnosticsRecord, ShellSpectrum};
pub use error::{Error, Result};
pub use field::{random_state, SpectralState};
pub use integrator::{make_forcing, run, step_ifrk4, Dynamics, ForcingSpec, InitSpec, SimConfig, Stepper, Trajectory};
pub use lattice::{Grid, ModeSet, WaveVector};
pub use nonlinear::{full_rhs, triadic_rhs, NonlinearEvaluator, RhsDecomposition, RhsMode, TriadSpec};
