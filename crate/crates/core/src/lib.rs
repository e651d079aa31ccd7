//! Exact desk-scale simulator of multistep resonant-transition ground-state
//! preparation for hidden subgroup problems.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`problems`] compiles an instance (Simon masks, modular powers,
//!    discrete logs, dihedral slides, graph pairs, periodic tables) into an
//!    explicit hiding-function table.
//! 2. [`oracle`] derives the value spectrum, a bisection division set, and
//!    the nested marked sets with their atom partition.
//! 3. [`path`] builds the interpolated Hamiltonian path over the hierarchy
//!    and computes exact ground states, gaps, and successive overlaps in
//!    the shared atom basis, with a dense eigensolver as reference.
//! 4. [`qrt`] simulates the probe-qubit protocol: conditional Hamiltonian,
//!    exact unitary evolution, probe measurement with repeat-until-decay,
//!    and register sampling, in collapsed or dense representation.
//! 5. [`postproc`] turns samples into answers and verifies every answer
//!    against an independent exhaustive solver.
//!
//! All numerics are generic over the scalar type ([`scalar::Scalar`],
//! `f32` or `f64`); the aliases below fix the default `f64` instantiation.

pub mod eigen;
pub mod error;
pub mod oracle;
pub mod path;
pub mod pipeline;
pub mod postproc;
pub mod problems;
pub mod qrt;
pub mod rng;
pub mod scalar;
pub mod trace;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};

/// Default-precision path specification.
pub type PathSpec64 = path::PathSpec<f64>;
/// Single-precision path specification.
pub type PathSpec32 = path::PathSpec<f32>;
/// Default-precision step data.
pub type EigenData64 = path::EigenData<f64>;
/// Default-precision engine.
pub type Engine64 = qrt::Engine<f64>;
/// Single-precision engine.
pub type Engine32 = qrt::Engine<f32>;
