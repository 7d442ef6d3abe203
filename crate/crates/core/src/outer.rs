//! Outer parametrix N = C 𝓜 built from the sheet matrix of the cubic.
//!
//! Column j of 𝓜 is (1, θ_j, θ_j²) times the scalar
//! 𝒮(θ_j) σ_j(z) / (θ_j √(θ_j − θ₊) √(θ_j − θ₋)), where
//! 𝒮(θ) = ((θ+a)/θ)^{α₁} ((θ+1−a)/θ)^{α₂} and the sheet gauges
//! σ₁ = 1, σ₂ = i z^{α₁} √(−z)/√z, σ₃ = 2i sin(πβ) (−z)^{α₁+α₂} z^{−α₁}
//! turn the permutation jumps into the weighted central jumps
//! [[0, w], [−1/w, 0]]. C = 𝓜(∞)⁻¹ is taken at |z| = 2^{bits/2}.

use crate::curve::{CurveError, Side, SpectralCurve};
use crate::deform::Deformation;
use crate::numerics::{Cx, Mat2, Mat3};
use num_complex::Complex64 as C64;
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OuterError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("sheet matrix at infinity is singular")]
    Singular,
    #[error("{0} lies on a conductor")]
    OnConductor(C64),
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Sheets,
    /// Classical 2×2 Laguerre outer solution on [0, 4] in channel (1, 2).
    Laguerre,
}

#[derive(Clone, Debug)]
pub struct OuterParametrix {
    curve: SpectralCurve,
    alpha1: f64,
    alpha2: f64,
    c: Mat3,
    /// Condition estimate ‖𝓜(∞)‖ ‖𝓜(∞)⁻¹‖.
    pub condition: f64,
    kind: Kind,
}

impl OuterParametrix {
    pub fn new(curve: &SpectralCurve, alpha1: f64, alpha2: f64) -> Result<Self, OuterError> {
        let mut o = OuterParametrix { curve: curve.clone(), alpha1, alpha2, c: Mat3::identity(curve.prec), condition: 1.0, kind: Kind::Sheets };
        let prec = curve.prec;
        let r = Float::with_val(prec, Float::u_exp(1, (prec / 2) as i32));
        let far = &Cx::from_parts(&r, &r) * 0.5f64.sqrt();
        let m = o.sheet_matrix(&far)?;
        let inv = m.inverse().ok_or(OuterError::Singular)?;
        o.condition = m.norm() * inv.norm();
        o.c = inv;
        Ok(o)
    }

    pub fn for_deformation(d: &Deformation) -> Result<Self, OuterError> {
        if d.curve.a_f64() == 1.0 {
            Ok(Self::laguerre(&d.curve, d.model.alpha1))
        } else {
            Self::new(&d.curve, d.model.alpha1, d.model.alpha2)
        }
    }

    /// Outer solution of the classical Laguerre problem with weight x^α on
    /// [0, 4], embedded in channel (1, 2).
    pub fn laguerre(curve: &SpectralCurve, alpha: f64) -> Self {
        OuterParametrix { curve: curve.clone(), alpha1: alpha, alpha2: 0.0, c: Mat3::identity(curve.prec), condition: 1.0, kind: Kind::Laguerre }
    }

    pub fn prec(&self) -> u32 {
        self.curve.prec
    }

    fn beta(&self) -> f64 {
        self.alpha2 - self.alpha1
    }

    /// σ_j(z), the sheet gauge of column j.
    pub fn sheet_gauge(&self, j: usize, z: &Cx) -> Cx {
        let p = self.prec();
        let f = |v: f64| Float::with_val(p, v);
        let mz = -z.clone();
        match j {
            0 => Cx::one(p),
            1 => &(&Cx::i(p) * &z.powf(&f(self.alpha1))) * &(&mz.sqrt() / &z.sqrt()),
            _ => {
                let s = 2.0 * (std::f64::consts::PI * self.beta()).sin();
                &(&Cx::new(p, 0.0, s) * &mz.powf(&f(self.alpha1 + self.alpha2))) * &z.powf(&f(-self.alpha1))
            }
        }
    }

    /// 𝒮(θ) = ((θ+a)/θ)^{α₁} ((θ+1−a)/θ)^{α₂}.
    pub fn szego_factor(&self, theta: &Cx) -> Cx {
        let p = self.prec();
        let a = &self.curve.a;
        let r1 = &(theta + a) / theta;
        let r2 = &(&(theta + 1.0) - a) / theta;
        &r1.powf(&Float::with_val(p, self.alpha1)) * &r2.powf(&Float::with_val(p, self.alpha2))
    }

    /// 𝓜(z) at z off the real axis.
    pub fn sheet_matrix(&self, z: &Cx) -> Result<Mat3, OuterError> {
        let t = self.curve.branches_at(z, Side::of(z.to_c64()))?;
        let tp = Cx::from_float(&self.curve.theta_plus);
        let tm = Cx::from_float(&self.curve.theta_minus);
        let cols: Vec<Cx> = (0..3)
            .map(|j| {
                let th = &t[j];
                let den = &(th * &(th - &tp).sqrt()) * &(th - &tm).sqrt();
                &(&self.szego_factor(th) * &self.sheet_gauge(j, z)) / &den
            })
            .collect();
        Ok(Mat3::from_fn(|l, j| &t[j].powi(l as i64) * &cols[j]))
    }

    /// N(z) at z off the real axis.
    pub fn eval(&self, z: &Cx) -> Result<Mat3, OuterError> {
        if z.im_f64() == 0.0 {
            return Err(OuterError::OnConductor(z.to_c64()));
        }
        match self.kind {
            Kind::Sheets => Ok(&self.c * &self.sheet_matrix(z)?),
            Kind::Laguerre => Ok(self.laguerre_eval(z)),
        }
    }

    /// Boundary value N±(x) at a real point, or N(z) off the axis.
    pub fn eval_side(&self, z: &Cx, side: Side) -> Result<Mat3, OuterError> {
        self.eval(&nudge(z, side))
    }

    fn laguerre_eval(&self, z: &Cx) -> Mat3 {
        let p = self.prec();
        let quarter = Float::with_val(p, 0.25);
        let g = (&(z - 4.0) / z).powf(&quarter);
        let gi = g.recip();
        let two_i = Cx::new(p, 0.0, 2.0);
        let s = &(&g + &gi) * 0.5;
        let d = &(&g - &gi) / &two_i;
        let n0 = Mat2::from_fn(|i, j| match (i, j) {
            (0, 1) => d.clone(),
            (1, 0) => -d.clone(),
            _ => s.clone(),
        });
        let root = &z.sqrt() * &(z - 4.0).sqrt();
        let phi_hat = &(&(z - 2.0) + &root) * 0.5;
        let dz = (z / &phi_hat).powf(&Float::with_val(p, 0.5 * self.alpha1));
        let dd = Mat2::diag([dz.recip(), dz]);
        (&n0 * &dd).embed((0, 1))
    }

    pub fn n11(&self, z: &Cx) -> Result<Cx, OuterError> {
        Ok(self.eval(z)?.get(0, 0).clone())
    }
}

/// Moves a real point off the axis by 2^{−2p/3} (relative) to the requested
/// side, so that principal branches pick the boundary value from that side
/// while the offset stays far above rounding noise.
pub fn nudge(z: &Cx, side: Side) -> Cx {
    if z.im_f64() != 0.0 {
        return z.clone();
    }
    let p = z.prec();
    let s = if side == Side::Upper { 1.0 } else { -1.0 };
    let h = Float::with_val(p, Float::u_exp(1, -(2 * p as i32) / 3)) * z.abs_f64().max(1.0) * s;
    z + &Cx::from_parts(&Float::new(p), &h)
}

/// H_j = 1/√(∂𝓕/∂θ (θ_j, z)).
pub fn prefactor_h(c: &SpectralCurve, j: usize, z: &Cx) -> Result<Cx, OuterError> {
    let t = c.branches_at(z, Side::of(z.to_c64()))?;
    let (_, d) = c.eval(&t[j], z);
    Ok(d.sqrt().recip())
}

/// (θ₁/θ₃, θ₂/θ₃).
pub fn phi_language_ratios(c: &SpectralCurve, z: &Cx) -> Result<(Cx, Cx), OuterError> {
    let t = c.branches_at(z, Side::of(z.to_c64()))?;
    Ok((&t[0] / &t[2], &t[1] / &t[2]))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpReport {
    pub max_residual: f64,
    pub per_conductor: Vec<f64>,
    pub nodes: usize,
    pub eps: f64,
}

/// max ‖N(x+iε) − N(x−iε) J⁽⁰⁾(x)‖ / ‖N(x+iε)‖ over `nodes` points per
/// conductor. With `swap` the inverse central jump is used instead, as a
/// negative control.
pub fn jump_residual(n: &OuterParametrix, d: &Deformation, nodes: usize, eps: f64, swap: bool) -> Result<JumpReport, OuterError> {
    let p = n.prec();
    let mut per = Vec::new();
    let mut count = 0;
    for (c, k) in d.cs.conductors.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for i in 0..nodes {
            // Chebyshev points avoid the endpoints
            let t = ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * nodes) as f64).cos();
            let x = 0.5 * (k.left + k.right) + 0.5 * (k.right - k.left) * t;
            let xr = Cx::real(p, x);
            let np = n.eval(&(&xr + &Cx::new(p, 0.0, eps)))?;
            let nm = n.eval(&(&xr - &Cx::new(p, 0.0, eps)))?;
            let mut j0 = d.central_jump(c, &xr);
            if swap {
                j0 = j0.inverse().expect("unimodular");
            }
            let r = (&np - &(&nm * &j0)).norm() / np.norm();
            worst = worst.max(r);
            count += 1;
        }
        per.push(worst);
    }
    Ok(JumpReport { max_residual: per.iter().cloned().fold(0.0, f64::max), per_conductor: per, nodes: count, eps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurvePreset;
    use crate::deform::{ContourSystem, GeometryConfig};
    use crate::model::ModelDescriptor;

    fn deformation(prec: u32) -> Deformation {
        let c = SpectralCurve::from_preset(&CurvePreset::ratio_3_4(), prec).unwrap();
        let m = ModelDescriptor::new(0.3, -0.2, 6, 2).unwrap();
        let cs = ContourSystem::for_curve(&c, &GeometryConfig::default());
        Deformation::new(c, m, cs)
    }

    #[test]
    fn normalized_at_infinity() {
        let d = deformation(256);
        let n = OuterParametrix::for_deformation(&d).unwrap();
        for z in [Cx::new(256, 1e4, 0.0), Cx::new(256, 0.0, -1e4), Cx::new(256, -7071.0, 7071.0)] {
            let z = &z + &Cx::new(256, 0.0, 1e-3);
            assert!(n.eval(&z).unwrap().dist_identity() < 1e-3);
        }
    }

    #[test]
    fn unit_determinant() {
        let d = deformation(256);
        let n = OuterParametrix::for_deformation(&d).unwrap();
        for z in [Cx::new(256, 1.0, 0.5), Cx::new(256, -0.5, -0.1), Cx::new(256, 6.0, 2.0)] {
            assert!((&n.eval(&z).unwrap().det() - 1.0).abs_f64() < 1e-35);
        }
    }

    #[test]
    fn n11_matches_closed_form() {
        // N11 = ((θ+a)/θ)^{α₁+1} ((θ+1−a)/θ)^{α₂+1} / √Δ(θ) on sheet 1, up to the sign of √Δ
        let d = deformation(256);
        let n = OuterParametrix::for_deformation(&d).unwrap();
        let z = Cx::new(256, 1.0, 1.0);
        let v = n.n11(&z).unwrap().to_c64();
        assert!((v - C64::new(0.8902906608, 0.1826776668)).norm() < 1e-9);
    }

    #[test]
    fn permutation_jumps() {
        let d = deformation(256);
        let n = OuterParametrix::for_deformation(&d).unwrap();
        let r = jump_residual(&n, &d, 25, 1e-35, false).unwrap();
        assert!(r.max_residual < 1e-20, "{r:?}");
        assert!(r.nodes >= 50);
        let bad = jump_residual(&n, &d, 5, 1e-35, true).unwrap();
        assert!(bad.max_residual > 0.1);
    }

    #[test]
    fn laguerre_outer_jump() {
        let c = SpectralCurve::laguerre(192);
        let m = ModelDescriptor::new(0.7, 0.0, 8, 0).unwrap();
        let cs = ContourSystem::for_curve(&c, &GeometryConfig::default());
        let d = Deformation::new(c, m, cs);
        let n = OuterParametrix::for_deformation(&d).unwrap();
        let r = jump_residual(&n, &d, 20, 1e-40, false).unwrap();
        assert!(r.max_residual < 1e-20, "{r:?}");
        let far = n.eval(&Cx::new(192, 3e4, 4e4)).unwrap();
        assert!(far.dist_identity() < 1e-3);
        assert!((&n.eval(&Cx::new(192, -1.0, 0.3)).unwrap().det() - 1.0).abs_f64() < 1e-40);
    }

    #[test]
    fn prefactor_identity() {
        let c = SpectralCurve::from_preset(&CurvePreset::ratio_3_4(), 128).unwrap();
        let z = Cx::new(128, 0.4, -0.9);
        let t = c.branches_at(&z, Side::Lower).unwrap();
        for j in 0..3 {
            let h = prefactor_h(&c, j, &z).unwrap();
            let (_, d) = c.eval(&t[j], &z);
            assert!((&(&h.sqr() * &d) - 1.0).abs_f64() < 1e-30);
        }
        let (r1, r2) = phi_language_ratios(&c, &z).unwrap();
        let e = (&t[0].ln() - &t[2].ln()).exp();
        assert!((&e - &r1).abs_f64() < 1e-30);
        assert!(r2.is_finite());
    }
}
