//! Design engine for electrical machines.
//!
//! Synthesis pipelines size transformers, induction, synchronous and DC
//! machines from their ratings. Switched reluctance motors follow the
//! analysis route instead: a trial geometry is evaluated for aligned and
//! unaligned inductance, the inductance profile and average torque, and the
//! designer iterates on the pole arcs until the torque target is met.
//!
//! Everything here is a pure function of its inputs (spec, constants and
//! material data), so results are reproducible bit for bit.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod dcmachine;
pub mod error;
pub mod induction;
pub mod materials;
pub mod merge;
pub mod sizing;
pub mod srm;
pub mod synchronous;
pub mod transformer;

pub use curve::CurveSeries;
pub use error::{Error, Result};
pub use materials::{Material, MaterialLibrary};

/// Permeability of free space, H/m.
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;
