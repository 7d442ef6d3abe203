//! Deift–Zhou steepest descent, carried out numerically for the type-II
//! multiple Laguerre Riemann–Hilbert problem.

#![allow(clippy::needless_range_loop, clippy::redundant_guards)]

pub mod curve;
pub mod deform;
pub mod errorrhp;
pub mod harness;
pub mod local;
pub mod model;
pub mod numerics;
pub mod outer;

pub use numerics::{Cx, Mat2, Mat3, PrecisionContext};
