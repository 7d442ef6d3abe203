//! Experiment orchestration: configuration, n-sweeps, decay fits and the
//! reports that back every acceptance verdict.

mod emit;
mod experiments;

pub use emit::{emit, to_csv, to_json, to_svg, Format};
pub use experiments::{
    exp_edge_asymptotics, exp_error_rhp, exp_oracle_integrity, exp_outer_asymptotics, exp_regularity_suite, exp_zero_distribution, kolmogorov_distance,
    limit_cdf, verify_all, Edge,
};

use crate::curve::{CurveError, CurvePreset, SpectralCurve};
use crate::deform::{ContourSystem, DeformError, GeometryConfig};
use crate::errorrhp::{ErrorRhpError, SigmaGrid};
use crate::local::LocalError;
use crate::model::{ModelDescriptor, ModelError};
use crate::outer::OuterError;
use crate::PrecisionContext;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Environment variable that overrides the working precision of the sweeps.
pub const PRECISION_ENV: &str = "MOP_PRECISION_BITS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Outer(#[from] OuterError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    ErrorRhp(#[from] ErrorRhpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{set} probe {z} {reason}")]
    Probe { set: &'static str, z: C64, reason: &'static str },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Probe points, as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Probes {
    /// Outside every disk and off Σ_R; also used to sample R.
    pub outer: Vec<[f64; 2]>,
    /// Inside U0, off the real axis and the lips.
    pub hard: Vec<[f64; 2]>,
    /// Inside Ux0, off the real axis and the lips.
    pub soft: Vec<[f64; 2]>,
}

impl Probes {
    /// Default outer set scaled to x0, and three points at half radius in
    /// each edge disk at angles π/4, π/2, 3π/4.
    pub fn for_edges(x0: f64, g: &GeometryConfig) -> Self {
        let s = x0 / 3.5650323971803;
        let outer = [[5.5, 1.0], [1.7, 1.8], [-2.5, 1.0], [0.5, -2.0], [3.0, -1.5], [-0.5, 1.2]].iter().map(|p| [p[0] * s, p[1] * s]).collect();
        let ring = |c: f64, r: f64| {
            [0.25, 0.5, 0.75]
                .iter()
                .map(|t| {
                    let z = C64::new(c, 0.0) + C64::from_polar(0.5 * r, t * PI);
                    [z.re, z.im]
                })
                .collect()
        };
        Probes { outer, hard: ring(0.0, g.disk_radius * x0), soft: ring(x0, g.x0_disk_radius * x0) }
    }
}

impl Default for Probes {
    fn default() -> Self {
        Probes::for_edges(3.5650323971803, &GeometryConfig::default())
    }
}

/// Pass bands and thresholds, one per acceptance rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub residual: f64,
    pub outer_p: [f64; 2],
    pub outer_halving: [f64; 2],
    pub min_outer_probes: usize,
    pub control_p_max: f64,
    pub edge_p: [f64; 2],
    pub min_edge_probes: usize,
    pub jump: f64,
    pub min_jump_nodes: usize,
    pub infinity: f64,
    pub infinity_radius: f64,
    pub matching_halving: [f64; 2],
    pub lens_r2: f64,
    pub conductor_phi: f64,
    pub closed_form: f64,
    pub r_p: [f64; 2],
    pub grid_change: f64,
    pub mass: f64,
    /// Error denominators are max(|reference|, floor).
    pub floor: f64,
    /// Probes where |N11| falls below this are flagged and not gated.
    pub flag_below: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-40,
            outer_p: [0.8, 1.2],
            outer_halving: [0.35, 0.7],
            min_outer_probes: 5,
            control_p_max: 0.3,
            edge_p: [0.7, 1.3],
            min_edge_probes: 3,
            jump: 1e-20,
            min_jump_nodes: 50,
            infinity: 1e-3,
            infinity_radius: 1e4,
            matching_halving: [0.4, 0.65],
            lens_r2: 0.99,
            conductor_phi: 1e-10,
            closed_form: 1e-12,
            r_p: [0.8, 1.2],
            grid_change: 0.1,
            mass: 1e-6,
            floor: 1e-30,
            flag_below: 1e-3,
        }
    }
}

/// Node counts of the pointwise checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sampling {
    /// Points per lip and per conductor in the sign chart.
    pub sign: usize,
    /// Fixed points per lip for the lens decay.
    pub lens: usize,
    /// Points on each disk boundary for the matching.
    pub matching: usize,
    /// Chebyshev points per conductor for the jumps of N.
    pub jumps: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { sign: 40, lens: 8, matching: 64, jumps: 25 }
    }
}

/// Random draws for the oracle check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub samples: usize,
    pub max_n: usize,
    pub alpha_range: [f64; 2],
    pub seed: u64,
    pub precision_bits: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { samples: 24, max_n: 32, alpha_range: [-0.5, 2.0], seed: 20_241_016, precision_bits: 256 }
    }
}

/// Zero distribution of P_{n,n} on a curve with n1 = n2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZeroConfig {
    pub preset: String,
    pub n_sweep: Vec<usize>,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        ZeroConfig { preset: "symmetric".into(), n_sweep: vec![16, 32, 64] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// `ratio-3/4`, `symmetric`, `laguerre` or the path of a preset file.
    pub preset: String,
    pub alpha1: f64,
    pub alpha2: f64,
    pub n_sweep: Vec<usize>,
    /// Fixed working precision; by default 256 bits, 512 above degree 48.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    /// Command-line precision; outranks the environment and the file.
    #[serde(skip)]
    pub precision_override: Option<u32>,
    pub geometry: GeometryConfig,
    pub grid: SigmaGrid,
    pub probes: Probes,
    pub sampling: Sampling,
    pub oracle: OracleConfig,
    pub zeros: ZeroConfig,
    pub tolerances: Tolerances,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: "ratio-3/4".into(),
            alpha1: 0.3,
            alpha2: -0.2,
            n_sweep: vec![8, 16, 32, 64],
            precision_bits: None,
            precision_override: None,
            geometry: GeometryConfig::default(),
            grid: SigmaGrid::default(),
            probes: Probes::default(),
            sampling: Sampling::default(),
            oracle: OracleConfig::default(),
            zeros: ZeroConfig::default(),
            tolerances: Tolerances::default(),
            out_dir: "out".into(),
        }
    }
}

/// The curve named by a preset string, with the ratio n1/n of its ray.
pub fn load_curve(name: &str, bits: u32) -> Result<(SpectralCurve, f64)> {
    if name == "laguerre" {
        return Ok((SpectralCurve::laguerre(bits), 1.0));
    }
    let preset = load_preset(name)?;
    let ratio = preset.ratio[0] as f64 / preset.ratio[1] as f64;
    Ok((SpectralCurve::from_preset(&preset, bits)?, ratio))
}

pub fn load_preset(name: &str) -> Result<CurvePreset> {
    match name {
        "ratio-3/4" | "ratio-3-4" => Ok(CurvePreset::ratio_3_4()),
        "symmetric" => Ok(CurvePreset::symmetric()),
        path => Ok(CurvePreset::parse(&std::fs::read_to_string(path)?)?),
    }
}

impl ExperimentConfig {
    /// Defaults with probes placed for the named preset.
    pub fn for_preset(name: &str) -> Result<Self> {
        let (c, _) = load_curve(name, 128)?;
        let mut cfg = ExperimentConfig { preset: name.into(), ..Default::default() };
        cfg.probes = Probes::for_edges(c.x0_f64(), &cfg.geometry);
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Working precision for total degree `n`: the command-line override,
    /// the environment, the configured value, then the default policy.
    pub fn bits(&self, n: usize) -> u32 {
        if let Some(b) = self.precision_override {
            return b;
        }
        if let Some(b) = std::env::var(PRECISION_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            return b;
        }
        self.precision_bits.unwrap_or_else(|| PrecisionContext::for_degree(n).bits())
    }

    pub fn curve(&self, bits: u32) -> Result<(SpectralCurve, f64)> {
        load_curve(&self.preset, bits)
    }

    /// Descriptor of total degree `n` on the preset's ray.
    pub fn model(&self, n: usize, ratio: f64) -> Result<ModelDescriptor> {
        Ok(ModelDescriptor::on_ray(self.alpha1, self.alpha2, ratio, n)?)
    }

    /// Checks the sweep and that every probe lies in its region.
    pub fn validate(&self) -> Result<()> {
        if self.n_sweep.len() < 2 || self.n_sweep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::Config("n_sweep needs at least two increasing entries".into()));
        }
        let (c, _) = self.curve(64)?;
        let cs = ContourSystem::for_curve(&c, &self.geometry);
        let scale = c.x0_f64();
        let margin = 1e-3 * scale;
        for p in &self.probes.outer {
            let z = C64::new(p[0], p[1]);
            if cs.disks.iter().any(|k| (z - k.center).norm() < k.radius + margin) {
                return Err(HarnessError::Probe { set: "outer", z, reason: "lies in an endpoint disk" });
            }
            check_off_sigma(&cs, z, margin, "outer")?;
        }
        for (set, name, pts) in [("hard", "U0", &self.probes.hard), ("soft", "Ux0", &self.probes.soft)] {
            let k = &cs.disks[cs.disk_index(name).expect("edge disks exist")];
            for p in pts {
                let z = C64::new(p[0], p[1]);
                if (z - k.center).norm() > k.radius - margin {
                    return Err(HarnessError::Probe { set, z, reason: "lies outside its disk" });
                }
                check_off_sigma(&cs, z, margin, set)?;
            }
        }
        Ok(())
    }
}

fn check_off_sigma(cs: &ContourSystem, z: C64, margin: f64, set: &'static str) -> Result<()> {
    if z.im.abs() < margin {
        return Err(HarnessError::Probe { set, z, reason: "lies on the real axis" });
    }
    for (i, k) in cs.conductors.iter().enumerate() {
        for upper in [true, false] {
            let near = (0..=400).any(|j| (cs.lip_point(i, upper, j as f64 / 400.0) - z).norm() < margin.max(1e-3 * k.lip_height));
            if near {
                return Err(HarnessError::Probe { set, z, reason: "lies on a lens lip" });
            }
        }
    }
    Ok(())
}

/// Fitted model of an error series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    /// error ≈ C n^{−p}
    Power,
    /// error ≈ C e^{−p n}
    Exponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub law: Law,
    pub p: f64,
    pub c: f64,
    pub r2: f64,
}

/// Least squares y ≈ a + b x; returns (a, b, R²).
pub fn affine_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let m = x.len();
    if m < 2 || y.len() != m || x.iter().chain(y).any(|v| !v.is_finite()) {
        return None;
    }
    let mx = x.iter().sum::<f64>() / m as f64;
    let my = y.iter().sum::<f64>() / m as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((a, b, r2))
}

/// log–log least squares of error against n.
pub fn power_fit(n: &[usize], e: &[f64]) -> Option<Fit> {
    if e.iter().any(|v| *v <= 0.0) {
        return None;
    }
    let x: Vec<f64> = n.iter().map(|&k| (k as f64).ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    affine_fit(&x, &y).map(|(a, b, r2)| Fit { law: Law::Power, p: -b, c: a.exp(), r2 })
}

/// Least squares of log error against n.
pub fn exponential_fit(n: &[usize], e: &[f64]) -> Option<Fit> {
    if e.iter().any(|v| *v <= 0.0) {
        return None;
    }
    let x: Vec<f64> = n.iter().map(|&k| k as f64).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    affine_fit(&x, &y).map(|(a, b, r2)| Fit { law: Law::Exponential, p: -b, c: a.exp(), r2 })
}

/// Ratios of consecutive errors.
pub fn halving_ratios(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| w[1] / w[0]).collect()
}

/// One (n, error) table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub probe: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
    pub n: Vec<usize>,
    pub error: Vec<f64>,
    pub fit: Option<Fit>,
    pub halving: Vec<f64>,
    pub flagged: bool,
    pub pass: bool,
}

impl Series {
    pub fn power(probe: impl Into<String>, z: Option<[f64; 2]>, n: Vec<usize>, error: Vec<f64>) -> Self {
        let fit = power_fit(&n, &error);
        let halving = halving_ratios(&error);
        Series { probe: probe.into(), z, n, error, fit, halving, flagged: false, pass: true }
    }

    pub fn exponential(probe: impl Into<String>, n: Vec<usize>, error: Vec<f64>) -> Self {
        let fit = exponential_fit(&n, &error);
        let halving = halving_ratios(&error);
        Series { probe: probe.into(), z: None, n, error, fit, halving, flagged: false, pass: true }
    }

    pub fn p(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.p)
    }
}

/// A pass/fail rule: every value must lie in the band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Acceptance criterion, `C1` to `C9`.
    pub criterion: String,
    pub rule: String,
    pub values: Vec<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Bounds exclude equality.
    pub strict: bool,
    /// Informational checks do not enter the verdict.
    pub gating: bool,
    pub pass: bool,
}

impl Check {
    pub fn new(criterion: &str, rule: impl Into<String>, values: Vec<f64>, lower: Option<f64>, upper: Option<f64>) -> Self {
        let mut c = Check { criterion: criterion.into(), rule: rule.into(), values, lower, upper, strict: false, gating: true, pass: false };
        c.pass = c.evaluate();
        c
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self.pass = self.evaluate();
        self
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }

    pub fn band(criterion: &str, rule: impl Into<String>, values: Vec<f64>, band: [f64; 2]) -> Self {
        Self::new(criterion, rule, values, Some(band[0]), Some(band[1]))
    }

    pub fn at_most(criterion: &str, rule: impl Into<String>, values: Vec<f64>, bound: f64) -> Self {
        Self::new(criterion, rule, values, None, Some(bound))
    }

    pub fn at_least(criterion: &str, rule: impl Into<String>, values: Vec<f64>, bound: f64) -> Self {
        Self::new(criterion, rule, values, Some(bound), None)
    }

    /// Recomputes the verdict from the stored values.
    pub fn evaluate(&self) -> bool {
        !self.values.is_empty()
            && self.values.iter().all(|&v| {
                let lo = self.lower.is_none_or(|l| if self.strict { v > l } else { v >= l });
                let hi = self.upper.is_none_or(|u| if self.strict { v < u } else { v <= u });
                v.is_finite() && lo && hi
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub experiment: String,
    pub preset: String,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl AsymptoticReport {
    pub fn new(experiment: &str, preset: &str, series: Vec<Series>, checks: Vec<Check>) -> Self {
        let pass = checks.iter().filter(|c| c.gating).all(|c| c.pass);
        AsymptoticReport { experiment: experiment.into(), preset: preset.into(), series, checks, pass }
    }

    /// Gating checks of one criterion.
    pub fn criterion(&self, id: &str) -> impl Iterator<Item = &Check> {
        let id = id.to_string();
        self.checks.iter().filter(move |c| c.gating && c.criterion == id)
    }

    pub fn series(&self, probe: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.probe == probe)
    }
}

fn probe_label(z: &[f64; 2]) -> String {
    format!("{:.4}{:+.4}i", z[0], z[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_fit_recovers_exponent() {
        let n = vec![8, 16, 32, 64];
        let e: Vec<f64> = n.iter().map(|&k| 3.0 * (k as f64).powf(-1.1)).collect();
        let f = power_fit(&n, &e).unwrap();
        assert!((f.p - 1.1).abs() < 1e-12 && (f.c - 3.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        for r in halving_ratios(&e) {
            assert!((r - 0.5f64.powf(1.1)).abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_fit_recovers_rate() {
        let n = vec![8, 16, 32, 64];
        let e: Vec<f64> = n.iter().map(|&k| 0.7 * (-0.25 * k as f64).exp()).collect();
        let f = exponential_fit(&n, &e).unwrap();
        assert!((f.p - 0.25).abs() < 1e-12 && (f.c - 0.7).abs() < 1e-12);
        assert!(power_fit(&n, &[1.0, 0.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn checks_follow_their_values() {
        let c = Check::band("C2", "p", vec![0.9, 1.1], [0.8, 1.2]);
        assert!(c.pass && c.gating);
        assert!(!Check::band("C2", "p", vec![0.9, 1.3], [0.8, 1.2]).pass);
        assert!(!Check::at_most("C9", "ratio", vec![1.0], 1.0).strict().pass);
        assert!(!Check::at_most("C9", "nan", vec![f64::NAN], 1.0).pass);
        assert!(!Check::at_most("C9", "empty", vec![], 1.0).pass);
        let r = AsymptoticReport::new("x", "p", vec![], vec![Check::at_most("C5", "i", vec![2.0], 1.0).informational()]);
        assert!(r.pass);
    }

    #[test]
    fn default_config_round_trips_and_validates() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let lag = ExperimentConfig::for_preset("laguerre").unwrap();
        lag.validate().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&lag.to_toml()).unwrap(), lag);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml("n_sweep = [8, 16]\n[geometry]\ndelta_lip = 0.2\n").unwrap();
        assert_eq!(cfg.n_sweep, vec![8, 16]);
        assert_eq!(cfg.geometry.delta_lip, 0.2);
        assert_eq!(cfg.geometry.disk_radius, GeometryConfig::default().disk_radius);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert!(ExperimentConfig::from_toml("n_sweep = 3").is_err());
    }

    #[test]
    fn misplaced_probes_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.probes.outer.push([0.1, 0.1]);
        assert!(matches!(cfg.validate(), Err(HarnessError::Probe { set: "outer", .. })));
        let mut cfg = ExperimentConfig::default();
        cfg.probes.soft.push([3.6, 0.0]);
        assert!(matches!(cfg.validate(), Err(HarnessError::Probe { set: "soft", .. })));
        let mut cfg = ExperimentConfig::default();
        cfg.probes.outer.push([1.78, 0.25 * 3.5650323971803]);
        assert!(matches!(cfg.validate(), Err(HarnessError::Probe { reason: "lies on a lens lip", .. })));
        let cfg = ExperimentConfig { n_sweep: vec![16, 8], ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn precision_policy() {
        let cfg = ExperimentConfig::default();
        if std::env::var(PRECISION_ENV).is_err() {
            assert_eq!(cfg.bits(32), 256);
            assert_eq!(cfg.bits(64), 512);
            let fixed = ExperimentConfig { precision_bits: Some(384), ..Default::default() };
            assert_eq!(fixed.bits(8), 384);
        }
    }

    proptest! {
        #[test]
        fn power_fit_is_exact_on_power_laws(p in 0.1f64..3.0, c in 1e-6f64..1e3) {
            let n = vec![8, 16, 32, 64];
            let e: Vec<f64> = n.iter().map(|&k| c * (k as f64).powf(-p)).collect();
            let f = power_fit(&n, &e).unwrap();
            prop_assert!((f.p - p).abs() < 1e-9);
            prop_assert!((f.c / c - 1.0).abs() < 1e-9);
        }

        #[test]
        fn tolerances_round_trip(r in 1e-60f64..1e-3, lo in 0.0f64..1.0, w in 0.01f64..1.0) {
            let cfg = ExperimentConfig {
                tolerances: Tolerances { residual: r, outer_p: [lo, lo + w], ..Default::default() },
                precision_bits: Some(320),
                ..Default::default()
            };
            prop_assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        }
    }
}
