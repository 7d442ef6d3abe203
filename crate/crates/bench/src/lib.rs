//! Fixtures shared by the benchmarks.

use mop_core::deform::{ContourSystem, Deformation};
use mop_core::harness::ExperimentConfig;

/// The default experiment's deformation at degree `n`.
pub fn deformation(n: usize) -> Deformation {
    let cfg = ExperimentConfig::default();
    let (curve, ratio) = cfg.curve(cfg.bits(n)).expect("preset curve");
    let m = cfg.model(n, ratio).expect("model");
    let cs = ContourSystem::for_curve(&curve, &cfg.geometry);
    Deformation::new(curve, m, cs)
}
