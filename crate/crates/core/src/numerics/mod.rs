//! Arithmetic, special functions and contour quadrature shared by all modules.

pub mod cauchy;
pub mod cx;
pub mod mat;
pub mod quad;
pub mod special;

pub use cauchy::{ArcFn, CauchyError, Contour, Node, OrientedArc};
pub use cx::Cx;
pub use mat::{Mat, Mat2, Mat3};
pub use special::{airy, bessel_mod, gamma, BesselKind, SpecialError};

use serde::{Deserialize, Serialize};

/// Working precision shared by one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionContext {
    pub significand_bits: u32,
}

impl PrecisionContext {
    pub fn new(bits: u32) -> Self {
        assert!(bits >= 64, "precision below 64 bits");
        PrecisionContext { significand_bits: bits }
    }

    /// Default policy: 256 bits, 512 once n exceeds 48.
    pub fn for_degree(n: usize) -> Self {
        Self::new(if n > 48 { 512 } else { 256 })
    }

    pub fn bits(&self) -> u32 {
        self.significand_bits
    }

    pub fn eps(&self) -> f64 {
        2f64.powi(-(self.significand_bits as i32))
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::new(256)
    }
}
