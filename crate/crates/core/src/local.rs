//! Airy and Bessel model problems and the endpoint parametrices built on them.
//!
//! Near an endpoint the parametrix is P = E · Φ(ζ) e^{Λσ₃} w^{−σ₃/2} in the
//! conductor's channel, with ζ = n^{2/3} f (Airy) or n² f₀ (Bessel),
//! Λ = (2/3)ζ^{3/2} or −2ζ^{1/2}, and E = N w^{σ₃/2} A(ζ)⁻¹ where A is the
//! normal form of the model at infinity. The model sector is chosen from
//! the z-region (outside or inside the lens, upper or lower), so P has its
//! jumps exactly on the lens lips of S rather than on the preimages of the
//! model rays. Endpoints whose conductor lies to their right are mapped with
//! an orientation-reversing coordinate; there the model is used in the
//! mirrored form σ₃Φσ₃, whose jumps are those of the model with every ray
//! reversed.

use crate::curve::{CurveError, Side};
use crate::deform::{DeformError, Deformation, Disk, EdgeKind, Opening, Region};
use crate::numerics::cx::unit_root;
use crate::numerics::special::{airy, bessel_mod, BesselKind, SpecialError};
use crate::numerics::{Cx, Mat2, Mat3};
use crate::outer::{nudge, OuterError, OuterParametrix};
use num_complex::Complex64 as C64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LocalError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Outer(#[from] OuterError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error("ζ = {0} lies on a model ray")]
    OnRay(C64),
    #[error("{0} lies outside disk {1}")]
    OutsideDisk(C64, String),
    #[error("no disk named {0}")]
    UnknownDisk(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Bessel,
    Airy,
}

/// Sectors of the model contours. Airy: I = (0, 2π/3), II = (2π/3, π),
/// III = (−π, −2π/3), IV = (−2π/3, 0). Bessel uses I for |arg ζ| < 2π/3
/// and ignores IV.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    I,
    II,
    III,
    IV,
}

impl Sector {
    /// Sector of ζ by its argument; ζ on a ray is an error.
    pub fn of(kind: ModelKind, zeta: C64) -> Result<Sector, LocalError> {
        let a = zeta.arg();
        let rays: &[f64] = match kind {
            ModelKind::Airy => &[0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0, PI, -PI],
            ModelKind::Bessel => &[2.0 * PI / 3.0, -2.0 * PI / 3.0, PI, -PI],
        };
        if zeta.norm() == 0.0 || rays.iter().any(|r| (a - r).abs() < 1e-14) {
            return Err(LocalError::OnRay(zeta));
        }
        let t = 2.0 * PI / 3.0;
        Ok(match kind {
            ModelKind::Airy if a > t => Sector::II,
            ModelKind::Airy if a > 0.0 => Sector::I,
            ModelKind::Airy if a > -t => Sector::IV,
            ModelKind::Airy => Sector::III,
            _ if a > t => Sector::II,
            _ if a < -t => Sector::III,
            _ => Sector::I,
        })
    }
}

fn mat2(v: [[Cx; 2]; 2]) -> Mat2 {
    crate::numerics::Mat(v)
}

fn unipotent_lower(p: u32, x: Cx) -> Mat2 {
    mat2([[Cx::one(p), Cx::zero(p)], [x, Cx::one(p)]])
}

fn sigma3_conj(m: &Mat2) -> Mat2 {
    Mat2::from_fn(|i, j| if i == j { m.get(i, j).clone() } else { -m.get(i, j).clone() })
}

/// (1/√2) [[1, i], [i, 1]].
fn a0(p: u32) -> Mat2 {
    let s = Cx::real(p, 0.5).sqrt();
    let is = &Cx::i(p) * &s;
    mat2([[s.clone(), is.clone()], [is, s]])
}

/// e^{iπk/6}.
fn twelfth_root(p: u32, k: i32) -> Cx {
    unit_root(p, k as i64, 6)
}

/// ω^k with ω = e^{2πi/3}.
fn omega(p: u32, k: i32) -> Cx {
    twelfth_root(p, 4 * k)
}

/// Airy model Φ_Ai(ζ) in the given sector, normalized to det Φ = 1 and
/// Φ(ζ) = ζ^{−σ₃/4} (1/√2)[[1, i], [i, 1]] (I + O(ζ^{−3/2})) e^{−(2/3)ζ^{3/2}σ₃}.
/// Jumps, rays oriented toward the origin except arg ζ = 0:
/// [[1, 1], [0, 1]] on (0, ∞), [[1, 0], [1, 1]] on arg ζ = ±2π/3 and
/// [[0, 1], [−1, 0]] on (−∞, 0).
pub fn airy_model(zeta: &Cx, sector: Sector) -> Result<Mat2, LocalError> {
    let p = zeta.prec();
    if !zeta.is_finite() {
        return Err(LocalError::OnRay(zeta.to_c64()));
    }
    let (w, w2) = (omega(p, 1), omega(p, 2));
    let (ai, aip) = airy(zeta);
    let upper = matches!(sector, Sector::I | Sector::II);
    let (c2, d2) = if upper {
        let (b, bp) = airy(&(&w2 * zeta));
        (b, &w2 * &bp)
    } else {
        let (b, bp) = airy(&(&w * zeta));
        (-(&w2 * &b), -bp)
    };
    // e^{−πiσ₃/6}, then the constant left factor that makes det = 1
    let em = twelfth_root(p, -1);
    let ep = twelfth_root(p, 1);
    let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
    let d1 = &em / &Cx::from_float(&two_pi.sqrt());
    let d2i = (&Cx::i(p) * &d1).recip();
    let d1i = d1.recip();
    let mut m = mat2([[&(&ai * &em) * &d1i, &(&c2 * &ep) * &d1i], [&(&aip * &em) * &d2i, &(&d2 * &ep) * &d2i]]);
    match sector {
        Sector::II => m = &m * &unipotent_lower(p, -Cx::one(p)),
        Sector::III => m = &m * &unipotent_lower(p, Cx::one(p)),
        _ => {}
    }
    Ok(m)
}

/// ζ^{−σ₃/4} (1/√2)[[1, i], [i, 1]].
pub fn airy_normal_form(zeta: &Cx) -> Mat2 {
    let p = zeta.prec();
    let q = zeta.powf(&Float::with_val(p, -0.25));
    &Mat2::diag([q.clone(), q.recip()]) * &a0(p)
}

/// (2/3) ζ^{3/2}.
pub fn airy_exponent(zeta: &Cx) -> Cx {
    let p = zeta.prec();
    &zeta.powf(&Float::with_val(p, 1.5)) * &Cx::from_float(&(Float::with_val(p, 2) / 3u32))
}

/// Bessel model Φ_Bes(ζ) of order α. In |arg ζ| < 2π/3
/// Φ = [[I_α(2ζ^{1/2}), (i/π)K_α(2ζ^{1/2})],
///      [2πiζ^{1/2} I_α′(2ζ^{1/2}), −2ζ^{1/2} K_α′(2ζ^{1/2})]],
/// continued to the other sectors through the jumps [[1, 0], [e^{±απi}, 1]]
/// on arg ζ = ±2π/3 (oriented toward the origin). The jump on (−∞, 0) is
/// then [[0, 1], [−1, 0]] and
/// Φ(ζ) = (2πζ^{1/2})^{−σ₃/2} (1/√2)[[1, i], [i, 1]] (I + O(ζ^{−1/2})) e^{2ζ^{1/2}σ₃}.
pub fn bessel_model(zeta: &Cx, sector: Sector, alpha: f64) -> Result<Mat2, LocalError> {
    let p = zeta.prec();
    if zeta.im_f64() == 0.0 && zeta.re_f64() <= 0.0 {
        return Err(LocalError::OnRay(zeta.to_c64()));
    }
    let s = zeta.sqrt();
    let x = &s * 2.0;
    let nu = Float::with_val(p, alpha);
    let nu1 = Float::with_val(p, &nu + 1u32);
    let i0 = bessel_mod(BesselKind::I, &nu, &x)?;
    let i1 = bessel_mod(BesselKind::I, &nu1, &x)?;
    let k0 = bessel_mod(BesselKind::K, &nu, &x)?;
    let k1 = bessel_mod(BesselKind::K, &nu1, &x)?;
    let a_over_x = &Cx::real(p, alpha) / &x;
    let ip = &i1 + &(&a_over_x * &i0);
    let kp = &(&a_over_x * &k0) - &k1;
    let pi = Cx::pi(p);
    let i = Cx::i(p);
    let mut m = mat2([[i0, &(&i / &pi) * &k0], [&(&(&(&pi * &i) * 2.0) * &s) * &ip, &(&s * -2.0) * &kp]]);
    match sector {
        Sector::II => m = &m * &unipotent_lower(p, -Cx::one(p).rot_pi(alpha)),
        Sector::III => m = &m * &unipotent_lower(p, Cx::one(p).rot_pi(-alpha)),
        _ => {}
    }
    Ok(m)
}

/// (2πζ^{1/2})^{−σ₃/2} (1/√2)[[1, i], [i, 1]].
pub fn bessel_normal_form(zeta: &Cx) -> Mat2 {
    let p = zeta.prec();
    let q = (&(&zeta.sqrt() * &Cx::pi(p)) * 2.0).sqrt();
    &Mat2::diag([q.recip(), q]) * &a0(p)
}

/// −2 ζ^{1/2}, so that Φ_Bes e^{Λσ₃} tends to the normal form.
pub fn bessel_exponent(zeta: &Cx) -> Cx {
    &zeta.sqrt() * -2.0
}

/// Places a 2×2 block on the channel (i, j) of the 3×3 identity.
pub fn embed_channel(m: &Mat2, channel: (usize, usize)) -> Mat3 {
    m.embed(channel)
}

/// ‖A(ζ)⁻¹ Φ(ζ) e^{Λσ₃} − I‖, the distance of a model from its normal form.
pub fn normal_form_deviation(kind: ModelKind, zeta: &Cx, sector: Sector, alpha: f64) -> Result<f64, LocalError> {
    let (phi, a, lam) = match kind {
        ModelKind::Airy => (airy_model(zeta, sector)?, airy_normal_form(zeta), airy_exponent(zeta)),
        ModelKind::Bessel => (bessel_model(zeta, sector, alpha)?, bessel_normal_form(zeta), bessel_exponent(zeta)),
    };
    let e = lam.exp();
    let r = &a.inverse().expect("unimodular") * &(&phi * &Mat2::diag([e.clone(), e.recip()]));
    Ok(r.dist_identity())
}

/// A local parametrix on one endpoint disk.
#[derive(Clone, Debug)]
pub struct LocalParametrix {
    pub disk: Disk,
    pub kind: ModelKind,
    pub channel: (usize, usize),
    /// Order of the Bessel model; unused for Airy.
    pub alpha: f64,
    /// Whether the conductor lies to the right of the endpoint.
    pub mirrored: bool,
    d: Deformation,
    outer: OuterParametrix,
}

/// Per-piece jump residuals of P inside its disk.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LocalJumpReport {
    pub conductor: f64,
    pub other_side: f64,
    pub lips: f64,
    pub prefactor: f64,
    pub nodes: usize,
}

impl LocalJumpReport {
    pub fn max(&self) -> f64 {
        self.conductor.max(self.other_side).max(self.lips)
    }
}

impl LocalParametrix {
    /// Parametrix on the disk named `name` (`U0`, `Ux0` or `U-x1`). The
    /// Bessel order defaults to α₁.
    pub fn build(d: &Deformation, outer: &OuterParametrix, name: &str, bessel_alpha: Option<f64>) -> Result<Self, LocalError> {
        let k = d.cs.disk_index(name).ok_or_else(|| LocalError::UnknownDisk(name.to_string()))?;
        let disk = d.cs.disks[k].clone();
        let channel = d.cs.conductors[disk.conductor].channel;
        let kind = match disk.kind {
            EdgeKind::Hard => ModelKind::Bessel,
            EdgeKind::Soft => ModelKind::Airy,
        };
        Ok(LocalParametrix {
            mirrored: disk.opening == Opening::Right,
            disk,
            kind,
            channel,
            alpha: bessel_alpha.unwrap_or(d.model.alpha1),
            d: d.clone(),
            outer: outer.clone(),
        })
    }

    pub fn build_p0(d: &Deformation, outer: &OuterParametrix, alpha: Option<f64>) -> Result<Self, LocalError> {
        Self::build(d, outer, "U0", alpha)
    }

    pub fn build_px0(d: &Deformation, outer: &OuterParametrix) -> Result<Self, LocalError> {
        Self::build(d, outer, "Ux0", None)
    }

    pub fn build_p_minus_x1(d: &Deformation, outer: &OuterParametrix) -> Result<Self, LocalError> {
        Self::build(d, outer, "U-x1", None)
    }

    fn prec(&self) -> u32 {
        self.d.prec
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.disk.center).norm() <= self.disk.radius * (1.0 + 1e-12)
    }

    /// Local coordinate f (Airy) or f₀ (Bessel).
    pub fn coordinate(&self, z: &Cx, side: Side) -> Result<Cx, LocalError> {
        let c = &self.d.curve;
        Ok(match (self.kind, self.disk.center > 0.0) {
            (ModelKind::Bessel, _) => c.f_0(z, side)?,
            (ModelKind::Airy, true) => c.f_x0(z, side)?,
            (ModelKind::Airy, false) => c.f_minus_x1(z, side)?,
        })
    }

    /// ζ = n^{2/3} f or n² f₀.
    pub fn zeta(&self, z: &Cx, side: Side) -> Result<Cx, LocalError> {
        let p = self.prec();
        let n = Float::with_val(p, self.d.n());
        let s = match self.kind {
            ModelKind::Airy => n.pow(Float::with_val(p, 2) / 3u32),
            ModelKind::Bessel => n.square(),
        };
        Ok(&self.coordinate(z, side)? * &s)
    }

    /// w^{1/2}, continuous on the disk: z^{α₁/2} on Δ, √c (−z)^{β/2} on Γ,
    /// (−z)^{α/2} at the hard edge.
    fn half_weight(&self, z: &Cx) -> Cx {
        let p = self.prec();
        let f = |v: f64| Float::with_val(p, v);
        match (self.kind, self.channel) {
            (ModelKind::Bessel, _) => (-z.clone()).powf(&f(0.5 * self.alpha)),
            (_, (0, 1)) => z.powf(&f(0.5 * self.d.model.alpha1)),
            _ => {
                let beta = self.d.beta();
                let c = Cx::new(p, 0.0, -2.0 * (PI * beta).sin());
                &c.sqrt() * &(-z.clone()).powf(&f(0.5 * beta))
            }
        }
    }

    fn sector_for(&self, lens: bool, side: Side) -> Sector {
        let upper = (side == Side::Upper) != self.mirrored;
        match (self.kind, lens, upper) {
            (ModelKind::Bessel, false, _) => Sector::I,
            (_, false, true) => Sector::I,
            (_, true, true) => Sector::II,
            (_, true, false) => Sector::III,
            (_, false, false) => Sector::IV,
        }
    }

    fn in_my_lens(&self, z: C64) -> bool {
        matches!(self.d.cs.region(z), Region::Lens { conductor, .. } if conductor == self.disk.conductor)
    }

    fn model(&self, zeta: &Cx, sector: Sector) -> Result<Mat2, LocalError> {
        let m = match self.kind {
            ModelKind::Airy => airy_model(zeta, sector)?,
            ModelKind::Bessel => bessel_model(zeta, sector, self.alpha)?,
        };
        Ok(if self.mirrored { sigma3_conj(&m) } else { m })
    }

    fn normal_form(&self, zeta: &Cx) -> Mat2 {
        let a = match self.kind {
            ModelKind::Airy => airy_normal_form(zeta),
            ModelKind::Bessel => bessel_normal_form(zeta),
        };
        if self.mirrored {
            sigma3_conj(&a)
        } else {
            a
        }
    }

    fn exponent(&self, zeta: &Cx) -> Cx {
        match self.kind {
            ModelKind::Airy => airy_exponent(zeta),
            ModelKind::Bessel => bessel_exponent(zeta),
        }
    }

    /// The 2×2 block H A(ζ)⁻¹ Φ(ζ) e^{Λσ₃} H⁻¹ with H = w^{σ₃/2}, so that
    /// P = N · embed(block).
    fn inner(&self, z: &Cx, lens: bool, side: Side) -> Result<Mat2, LocalError> {
        let zeta = self.zeta(z, side)?;
        let phi = self.model(&zeta, self.sector_for(lens, side))?;
        let e = self.exponent(&zeta).exp();
        let h = self.half_weight(z);
        let hm = Mat2::diag([h.clone(), h.recip()]);
        let hi = Mat2::diag([h.recip(), h]);
        let ai = self.normal_form(&zeta).inverse().expect("unimodular");
        Ok(&(&(&(&hm * &ai) * &phi) * &Mat2::diag([e.clone(), e.recip()])) * &hi)
    }

    /// P evaluated with the formula of the given region and side; `z` may
    /// lie on the boundary of that region.
    pub fn eval_with(&self, z: &Cx, lens: bool, side: Side) -> Result<Mat3, LocalError> {
        let z = nudge(z, side);
        let n = self.outer.eval(&z)?;
        Ok(&n * &embed_channel(&self.inner(&z, lens, side)?, self.channel))
    }

    /// P(z) for z in the closed disk, off the contour.
    pub fn eval(&self, z: &Cx) -> Result<Mat3, LocalError> {
        let zc = z.to_c64();
        if !self.contains(zc) {
            return Err(LocalError::OutsideDisk(zc, self.disk.name.clone()));
        }
        if zc.im == 0.0 {
            return Err(LocalError::OnRay(zc));
        }
        self.eval_with(z, self.in_my_lens(zc), Side::of(zc))
    }

    /// The analytic prefactor E = N w^{σ₃/2} A(ζ)⁻¹ (embedded).
    pub fn prefactor(&self, z: &Cx, side: Side) -> Result<Mat3, LocalError> {
        let z = nudge(z, side);
        let zeta = self.zeta(&z, side)?;
        let h = self.half_weight(&z);
        let b = &Mat2::diag([h.clone(), h.recip()]) * &self.normal_form(&zeta).inverse().expect("unimodular");
        Ok(&self.outer.eval(&z)? * &embed_channel(&b, self.channel))
    }

    /// P N⁻¹ at z.
    pub fn matching(&self, z: &Cx) -> Result<Mat3, LocalError> {
        let n = self.outer.eval(z)?;
        Ok(&self.eval(z)? * &n.inverse().ok_or(OuterError::Singular)?)
    }

    /// Boundary nodes at angles 2π(k + ½)/m.
    pub fn circle_nodes(&self, m: usize) -> Vec<C64> {
        (0..m).map(|k| self.disk.center + C64::from_polar(self.disk.radius, 2.0 * PI * (k as f64 + 0.5) / m as f64)).collect()
    }

    /// sup ‖P N⁻¹ − I‖ over `m` boundary nodes.
    pub fn matching_sup(&self, m: usize) -> Result<f64, LocalError> {
        let p = self.prec();
        let mut worst: f64 = 0.0;
        for z in self.circle_nodes(m) {
            worst = worst.max(self.matching(&Cx::from_c64(p, z))?.dist_identity());
        }
        Ok(worst)
    }

    /// Boundary values (P₊, P₋) at real x inside the disk.
    pub fn real_boundary_values(&self, x: f64) -> Result<(Mat3, Mat3), LocalError> {
        let xr = Cx::real(self.prec(), x);
        let on_conductor = (x > self.disk.center) == self.mirrored;
        Ok((self.eval_with(&xr, on_conductor, Side::Upper)?, self.eval_with(&xr, on_conductor, Side::Lower)?))
    }

    /// Boundary values (P₊, P₋) on a lip of conductor `c` (left to right,
    /// + side above) inside the disk.
    pub fn lip_boundary_values(&self, c: usize, upper: bool, z: &Cx) -> Result<(Mat3, Mat3), LocalError> {
        let side = if upper { Side::Upper } else { Side::Lower };
        if c != self.disk.conductor {
            let v = self.eval_with(z, false, side)?;
            return Ok((v.clone(), v));
        }
        let out = self.eval_with(z, false, side)?;
        let inn = self.eval_with(z, true, side)?;
        Ok(if upper { (out, inn) } else { (inn, out) })
    }

    /// Jump of S at real x inside the disk.
    pub fn s_jump_real(&self, x: f64) -> Result<Mat3, LocalError> {
        let p = self.prec();
        for (c, k) in self.d.cs.conductors.iter().enumerate() {
            if x > k.left && x < k.right {
                return Ok(self.d.central_jump(c, &nudge(&Cx::real(p, x), Side::Upper)));
            }
        }
        Ok(self.d.jump_t(&Float::with_val(p, x))?)
    }

    /// Relative residuals of P₊ − P₋ J_S on the real axis and on the lens
    /// lips inside the disk, and of E₊ − E₋ on the real axis, at `m` points
    /// per piece.
    pub fn jump_residuals(&self, m: usize) -> Result<LocalJumpReport, LocalError> {
        let p = self.prec();
        let (c, r) = (self.disk.center, self.disk.radius);
        let mut rep = LocalJumpReport::default();
        let rel = |a: &Mat3, b: &Mat3| (a - b).norm() / a.norm();
        for k in 0..m {
            let t = 0.9 * (k as f64 + 0.5) / m as f64 + 0.05;
            for dir in [-1.0, 1.0] {
                let x = c + dir * r * t;
                let on_conductor = (dir > 0.0) == self.mirrored;
                let xr = Cx::real(p, x);
                let j = self.s_jump_real(x)?;
                let (pp, pm) = self.real_boundary_values(x)?;
                let res = rel(&pp, &(&pm * &j));
                if on_conductor {
                    rep.conductor = rep.conductor.max(res);
                } else {
                    rep.other_side = rep.other_side.max(res);
                }
                let ep = self.prefactor(&xr, Side::Upper)?;
                let em = self.prefactor(&xr, Side::Lower)?;
                rep.prefactor = rep.prefactor.max(rel(&ep, &em));
                rep.nodes += 1;
            }
        }
        for (ci, _) in self.d.cs.conductors.iter().enumerate() {
            for upper in [true, false] {
                for k in 0..4 * m {
                    let t = (k as f64 + 0.5) / (4 * m) as f64;
                    let s = self.d.cs.lip_point(ci, upper, t);
                    if (s - c).norm() >= r * 0.98 || s.im.abs() < 1e-3 * r {
                        continue;
                    }
                    let sz = Cx::from_c64(p, s);
                    let (pp, pm) = self.lip_boundary_values(ci, upper, &sz)?;
                    let j = self.d.lip_factor(ci, &sz)?;
                    let res = rel(&pp, &(&pm * &j));
                    rep.lips = rep.lips.max(res);
                    rep.nodes += 1;
                }
            }
        }
        Ok(rep)
    }
}

/// The global parametrix: a local parametrix inside its disk, N elsewhere.
#[derive(Clone, Debug)]
pub struct GlobalParametrix {
    pub outer: OuterParametrix,
    pub locals: Vec<LocalParametrix>,
}

impl GlobalParametrix {
    /// N together with parametrices on every disk of the contour system.
    pub fn build(d: &Deformation, bessel_alpha: Option<f64>) -> Result<Self, LocalError> {
        let outer = OuterParametrix::for_deformation(d)?;
        let locals = d.cs.disks.iter().map(|k| LocalParametrix::build(d, &outer, &k.name, bessel_alpha)).collect::<Result<_, _>>()?;
        Ok(GlobalParametrix { outer, locals })
    }

    pub fn local(&self, name: &str) -> Option<&LocalParametrix> {
        self.locals.iter().find(|l| l.disk.name == name)
    }

    pub fn eval(&self, z: &Cx) -> Result<Mat3, LocalError> {
        let zc = z.to_c64();
        for l in &self.locals {
            if (zc - l.disk.center).norm() < l.disk.radius {
                return l.eval(z);
            }
        }
        Ok(self.outer.eval(z)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{CurvePreset, SpectralCurve};
    use crate::deform::{ContourSystem, GeometryConfig};
    use crate::model::ModelDescriptor;

    const P: u32 = 192;

    /// ‖Φ₊ − Φ₋J‖ across the ray through e^{iπ·ray} at |ζ| = 1. Rays are
    /// oriented toward the origin except (0, ∞); "+" is the left side.
    fn jump_at(kind: ModelKind, ray: f64, alpha: f64) -> f64 {
        use Sector::*;
        let e = |s: f64| Cx::one(P).rot_pi(s * alpha);
        let (one, zero) = (Cx::one(P), Cx::zero(P));
        let lower = |x: Cx| {
            Mat2::from_fn(|i, j| match (i, j) {
                (1, 0) => x.clone(),
                (0, 1) => zero.clone(),
                _ => one.clone(),
            })
        };
        let swap = Mat2::from_fn(|i, j| Cx::real(P, [[0.0, 1.0], [-1.0, 0.0]][i][j]));
        let (plus, minus, j, outward) = match (kind, ray) {
            (ModelKind::Airy, r) if r == 0.0 => (I, IV, Mat2::from_fn(|i, j| Cx::real(P, [[1.0, 1.0], [0.0, 1.0]][i][j])), true),
            (_, r) if r == 1.0 => (II, III, swap, false),
            (ModelKind::Airy, r) if r > 0.0 => (I, II, lower(one.clone()), false),
            (ModelKind::Airy, _) => (III, IV, lower(one.clone()), false),
            (ModelKind::Bessel, r) if r > 0.0 => (I, II, lower(e(1.0)), false),
            (ModelKind::Bessel, _) => (III, I, lower(e(-1.0)), false),
        };
        let delta = 1e-50;
        let base = twelfth_root(P, (ray * 6.0).round() as i32);
        let at = |s: f64| &base * &Cx::one(P).rot_pi(s * delta);
        let (zp, zm) = if outward { (at(1.0), at(-1.0)) } else { (at(-1.0), at(1.0)) };
        let ev = |zeta: &Cx, s: Sector| match kind {
            ModelKind::Airy => airy_model(zeta, s).unwrap(),
            ModelKind::Bessel => bessel_model(zeta, s, alpha).unwrap(),
        };
        (&ev(&zp, plus) - &(&ev(&zm, minus) * &j)).norm()
    }

    #[test]
    fn airy_model_jumps_and_determinant() {
        for ray in [0.0, 2.0 / 3.0, -2.0 / 3.0, 1.0] {
            let r = jump_at(ModelKind::Airy, ray, 0.0);
            assert!(r < 1e-40, "ray {ray}: {r}");
        }
        for (x, y) in [(0.3, 0.8), (-1.2, 0.4), (2.0, -1.0), (-0.5, -2.5)] {
            let z = Cx::new(P, x, y);
            let s = Sector::of(ModelKind::Airy, z.to_c64()).unwrap();
            let d = airy_model(&z, s).unwrap().det();
            assert!((&d - 1.0).abs_f64() < 1e-45);
        }
    }

    #[test]
    fn airy_cyclic_identity() {
        for (x, y) in [(0.7, 0.2), (-3.0, 1.1), (1.5, -2.0)] {
            let z = Cx::new(P, x, y);
            let (w, w2) = (omega(P, 1), omega(P, 2));
            let s = &(&airy(&z).0 + &(&w * &airy(&(&w * &z)).0)) + &(&w2 * &airy(&(&w2 * &z)).0);
            assert!(s.abs_f64() < 1e-50);
        }
    }

    #[test]
    fn airy_normal_form_at_large_zeta() {
        for th in [0.1, 0.5, 0.9, -0.3, -0.8] {
            let z = &Cx::real(P, 100.0).rot_pi(th) * 1.0;
            let s = Sector::of(ModelKind::Airy, z.to_c64()).unwrap();
            let dev = normal_form_deviation(ModelKind::Airy, &z, s, 0.0).unwrap();
            assert!(dev < 1e-3, "θ = {th}: {dev}");
        }
    }

    #[test]
    fn bessel_model_jumps_and_determinant() {
        for alpha in [0.3, 1.7, -0.4] {
            for ray in [2.0 / 3.0, -2.0 / 3.0, 1.0] {
                let r = jump_at(ModelKind::Bessel, ray, alpha);
                assert!(r < 1e-20, "α {alpha} ray {ray}: {r}");
            }
            for (x, y) in [(0.3, 0.8), (-1.2, 0.4), (2.0, -1.0), (-0.5, -2.5)] {
                let z = Cx::new(P, x, y);
                let s = Sector::of(ModelKind::Bessel, z.to_c64()).unwrap();
                let d = bessel_model(&z, s, alpha).unwrap().det();
                assert!((&d - 1.0).abs_f64() < 1e-40, "{:?}", d.to_c64());
            }
        }
    }

    #[test]
    fn bessel_normal_form_at_large_zeta() {
        for th in [0.1, 0.5, 0.9, -0.4, -0.95] {
            let z = Cx::real(P, 1e4).rot_pi(th);
            let s = Sector::of(ModelKind::Bessel, z.to_c64()).unwrap();
            let dev = normal_form_deviation(ModelKind::Bessel, &z, s, 0.6).unwrap();
            assert!(dev < 0.02, "θ = {th}: {dev}");
        }
    }

    #[test]
    fn rays_are_rejected() {
        assert!(matches!(Sector::of(ModelKind::Airy, C64::new(2.0, 0.0)), Err(LocalError::OnRay(_))));
        assert!(bessel_model(&Cx::real(P, -1.0), Sector::II, 0.5).is_err());
        assert_eq!(Sector::of(ModelKind::Bessel, C64::new(1.0, -1.0)).unwrap(), Sector::I);
    }

    #[test]
    fn embedding() {
        let id = Mat2::identity(P);
        assert_eq!(embed_channel(&id, (0, 2)), Mat3::identity(P));
        let anti = Mat2::from_fn(|i, j| Cx::real(P, if i == j { 0.0 } else { 1.0 }));
        let e = embed_channel(&anti, (0, 2));
        let v = [1.0, 2.0, 3.0];
        let out: Vec<f64> = (0..3).map(|i| (0..3).map(|j| e.get(i, j).re_f64() * v[j]).sum()).collect();
        assert_eq!(out, vec![3.0, 2.0, 1.0]);
    }

    fn preset(n: usize) -> Deformation {
        let c = SpectralCurve::from_preset(&CurvePreset::ratio_3_4(), P).unwrap();
        let m = ModelDescriptor::new(0.3, -0.2, 3 * n / 4, n / 4).unwrap();
        let cs = ContourSystem::for_curve(&c, &GeometryConfig::default());
        Deformation::new(c, m, cs)
    }

    fn laguerre(n: usize) -> Deformation {
        let c = SpectralCurve::laguerre(P);
        let m = ModelDescriptor::new(0.7, 0.0, n, 0).unwrap();
        let cs = ContourSystem::for_curve(&c, &GeometryConfig::default());
        Deformation::new(c, m, cs)
    }

    #[test]
    fn soft_edges_share_the_jumps_of_s() {
        let d = preset(8);
        let g = GlobalParametrix::build(&d, None).unwrap();
        for name in ["Ux0", "U-x1"] {
            let rep = g.local(name).unwrap().jump_residuals(4).unwrap();
            assert!(rep.max() < 1e-30, "{name}: {rep:?}");
            assert!(rep.prefactor < 1e-30, "{name}: {rep:?}");
        }
    }

    #[test]
    fn laguerre_hard_edge_shares_the_jumps_of_s() {
        let d = laguerre(8);
        let g = GlobalParametrix::build(&d, None).unwrap();
        for name in ["U0", "Ux0"] {
            let rep = g.local(name).unwrap().jump_residuals(4).unwrap();
            assert!(rep.max() < 1e-30, "{name}: {rep:?}");
            assert!(rep.prefactor < 1e-30, "{name}: {rep:?}");
        }
    }

    #[test]
    fn matching_halves_under_doubling() {
        let sups = |name: &str| -> Vec<f64> {
            [8, 16, 32]
                .iter()
                .map(|&n| {
                    let d = preset(n);
                    let o = OuterParametrix::for_deformation(&d).unwrap();
                    LocalParametrix::build(&d, &o, name, None).unwrap().matching_sup(32).unwrap()
                })
                .collect()
        };
        for name in ["U0", "Ux0"] {
            let s = sups(name);
            for w in s.windows(2) {
                let r = w[1] / w[0];
                assert!((0.4..=0.65).contains(&r), "{name}: {s:?}");
            }
        }
    }

    #[test]
    fn zeta_on_the_circle_grows_like_n_two_thirds() {
        let ns = [8usize, 16, 32, 64];
        let pts: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n| {
                let d = preset(n);
                let o = OuterParametrix::for_deformation(&d).unwrap();
                let l = LocalParametrix::build_px0(&d, &o).unwrap();
                let z = Cx::from_c64(P, l.circle_nodes(8)[1]);
                ((n as f64).ln(), l.zeta(&z, Side::Upper).unwrap().abs_f64().ln())
            })
            .collect();
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / 4.0, pts.iter().map(|p| p.1).sum::<f64>() / 4.0);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope - 0.67).abs() < 0.05, "{slope}");
    }

    #[test]
    fn hard_edge_on_the_ratio_preset_misses_the_gamma_jump() {
        let d = preset(8);
        let o = OuterParametrix::for_deformation(&d).unwrap();
        let rep = LocalParametrix::build_p0(&d, &o, None).unwrap().jump_residuals(4).unwrap();
        assert!(rep.conductor < 1e-30, "{rep:?}");
        assert!(rep.other_side > 1e-3, "{rep:?}");
    }

    #[test]
    fn global_parametrix_selects_by_region() {
        let d = preset(8);
        let g = GlobalParametrix::build(&d, None).unwrap();
        let far = Cx::new(P, 1.5, 2.0);
        assert_eq!(g.eval(&far).unwrap(), g.outer.eval(&far).unwrap());
        let x0 = d.curve.x0_f64();
        let inside = Cx::new(P, x0 + 0.1, 0.1);
        assert_eq!(g.eval(&inside).unwrap(), g.local("Ux0").unwrap().eval(&inside).unwrap());
        assert!(g.local("Ux0").unwrap().eval(&Cx::new(P, x0 + 2.0, 0.1)).is_err());
    }
}
