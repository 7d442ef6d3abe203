//! Lens geometry and the chain Y → X → T → S with its inverses.
//!
//! X = Y E with E = I − z^β E₂₃ moves the second weight onto the negative
//! axis, T = L X D normalizes at infinity with D built from the sheet
//! exponentials e^{nλ_j}, and S opens lenses around each conductor. All
//! exponentials are evaluated in the exact form
//! e^{nλ(θ)} = e^{n(z+θ)} (θ+a)^{n1} (θ+1−a)^{n2}, so no logarithm branch
//! ever enters a jump.

use crate::curve::{CurveError, Side, SpectralCurve};
use crate::model::{moment, solve_mop, ModelDescriptor, ModelError, MonicPolynomial};
use crate::numerics::mat::solve_real;
use crate::numerics::{Cx, Mat3, PrecisionContext};
use num_complex::Complex64 as C64;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DeformError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("exponent range exceeded at {0}")]
    Overflow(C64),
    #[error("point {0} lies on the contour")]
    OnContour(C64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    Soft,
    Hard,
}

/// Where the conductor lies relative to its endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Opening {
    /// Conductor to the left of the endpoint.
    Left,
    /// Conductor to the right of the endpoint.
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conductor {
    pub name: String,
    pub left: f64,
    pub right: f64,
    /// Sheets (i, j), zero based, coupled across the conductor.
    pub channel: (usize, usize),
    pub lip_height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub name: String,
    pub center: f64,
    pub radius: f64,
    pub kind: EdgeKind,
    /// Conductor whose endpoint this is.
    pub conductor: usize,
    pub opening: Opening,
}

/// Real half-line carrying an exponentially small jump in a conductor's channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub from: f64,
    pub to: f64,
    pub conductor: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    /// Radius of the disks at 0 and −x1 as a fraction of x0.
    pub disk_radius: f64,
    /// Radius of the disk at x0 as a fraction of x0.
    pub x0_disk_radius: f64,
    /// Height of the lens over [0, x0] as a fraction of x0.
    pub delta_lip: f64,
    /// Height of the lens over [−x1, 0] as a fraction of x1.
    pub gamma_lip: f64,
    /// Length of each truncated real tail beyond its disk.
    pub tail_length: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { disk_radius: 0.125, x0_disk_radius: 0.25, delta_lip: 0.25, gamma_lip: 0.5, tail_length: 8.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Outside,
    Lens { conductor: usize, upper: bool },
}

/// Conductors, lenses, endpoint disks and real tails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSystem {
    pub conductors: Vec<Conductor>,
    pub disks: Vec<Disk>,
    pub tails: Vec<Tail>,
}

impl ContourSystem {
    /// Two conductors [0, x0] in channel (1, 2) and [−x1, 0] in channel (2, 3).
    pub fn for_curve(c: &SpectralCurve, g: &GeometryConfig) -> Self {
        let x0 = c.x0_f64();
        let r = g.disk_radius * x0;
        let rx = g.x0_disk_radius * x0;
        let mut cs = ContourSystem {
            conductors: vec![Conductor { name: "delta".into(), left: 0.0, right: x0, channel: (0, 1), lip_height: g.delta_lip * x0 }],
            disks: vec![
                Disk { name: "U0".into(), center: 0.0, radius: r, kind: EdgeKind::Hard, conductor: 0, opening: Opening::Right },
                Disk { name: "Ux0".into(), center: x0, radius: rx, kind: EdgeKind::Soft, conductor: 0, opening: Opening::Left },
            ],
            tails: vec![Tail { from: x0 + rx, to: x0 + rx + g.tail_length, conductor: 0 }],
        };
        if let Some(x1) = c.x1_f64() {
            cs.conductors.push(Conductor { name: "gamma".into(), left: -x1, right: 0.0, channel: (1, 2), lip_height: g.gamma_lip * x1 });
            cs.disks.push(Disk { name: "U-x1".into(), center: -x1, radius: r, kind: EdgeKind::Soft, conductor: 1, opening: Opening::Right });
            cs.tails.push(Tail { from: -x1 - r - g.tail_length, to: -x1 - r, conductor: 1 });
        }
        cs
    }

    pub fn disk_index(&self, name: &str) -> Option<usize> {
        self.disks.iter().position(|d| d.name == name)
    }

    /// Point of the lip of conductor `c` at parameter t ∈ [0, 1], running
    /// left to right along the half ellipse over the conductor.
    pub fn lip_point(&self, c: usize, upper: bool, t: f64) -> C64 {
        let k = &self.conductors[c];
        let (m, h) = (0.5 * (k.left + k.right), 0.5 * (k.right - k.left));
        let th = std::f64::consts::PI * (1.0 - t);
        let s = if upper { 1.0 } else { -1.0 };
        C64::new(m + h * th.cos(), s * k.lip_height * th.sin())
    }

    pub fn lip_tangent(&self, c: usize, upper: bool, t: f64) -> C64 {
        let k = &self.conductors[c];
        let h = 0.5 * (k.right - k.left);
        let th = std::f64::consts::PI * (1.0 - t);
        let s = if upper { 1.0 } else { -1.0 };
        C64::new(h * th.sin(), -s * k.lip_height * th.cos()) * std::f64::consts::PI
    }

    pub fn disk_of(&self, z: C64) -> Option<usize> {
        self.disks.iter().position(|d| (z - d.center).norm() < d.radius)
    }

    pub fn region(&self, z: C64) -> Region {
        for (i, k) in self.conductors.iter().enumerate() {
            let (m, h) = (0.5 * (k.left + k.right), 0.5 * (k.right - k.left));
            let u = (z.re - m) / h;
            let v = z.im / k.lip_height;
            if u * u + v * v < 1.0 && z.im != 0.0 {
                return Region::Lens { conductor: i, upper: z.im > 0.0 };
            }
        }
        Region::Outside
    }

    /// Parameter interval of a lip lying outside all disks.
    pub fn lip_range_outside(&self, c: usize, upper: bool) -> (f64, f64) {
        let inside = |t: f64| self.disk_of(self.lip_point(c, upper, t)).is_some();
        let bisect = |mut a: f64, mut b: f64| {
            // a inside, b outside
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if inside(m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        (bisect(0.0, 0.5), bisect(1.0, 0.5))
    }
}

/// Lower, central and upper factors of a conductor jump, 3×3.
#[derive(Clone, Debug)]
pub struct TriangularFactors {
    pub lower: Mat3,
    pub central: Mat3,
    pub upper: Mat3,
}

impl TriangularFactors {
    pub fn reassemble(&self) -> Mat3 {
        &(&self.lower * &self.central) * &self.upper
    }
}

/// The deformation data for one multi-index.
#[derive(Clone, Debug)]
pub struct Deformation {
    pub curve: SpectralCurve,
    pub model: ModelDescriptor,
    pub cs: ContourSystem,
    pub prec: u32,
}

impl Deformation {
    /// Requires n1/n to equal the curve's ratio.
    pub fn new(curve: SpectralCurve, model: ModelDescriptor, cs: ContourSystem) -> Self {
        let prec = curve.prec;
        Deformation { curve, model, cs, prec }
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    /// e^{n(λ(θ) − z)} = e^{nθ} (θ+a)^{n1} (θ+1−a)^{n2}.
    fn exp_lambda_shift(&self, t: &Cx) -> Cx {
        let one = Cx::one(self.prec);
        let e = (t * self.n() as f64).exp();
        let p1 = (t + &self.curve.a).powi(self.model.n1 as i64);
        let p2 = (&(t + &one) - &self.curve.a).powi(self.model.n2 as i64);
        &(&e * &p1) * &p2
    }

    /// The weight carried by conductor `c`, continued off the real axis:
    /// z^{α₁} on [0, x0] and c (−z)^β on [−x1, 0], c = −2i sin πβ.
    pub fn conductor_weight(&self, c: usize, z: &Cx) -> Cx {
        let p = self.prec;
        match self.cs.conductors[c].channel {
            (0, 1) => z.powf(&Float::with_val(p, self.model.alpha1)),
            _ => {
                let beta = self.beta();
                let cc = Cx::new(p, 0.0, -2.0 * (std::f64::consts::PI * beta).sin());
                &cc * &(-z.clone()).powf(&Float::with_val(p, beta))
            }
        }
    }

    pub fn beta(&self) -> f64 {
        self.model.alpha2 - self.model.alpha1
    }

    /// e^{−nφ} for conductor `c` with sheets taken on the side of `z`.
    pub fn exp_neg_n_phi(&self, c: usize, z: &Cx, side: Side) -> Result<Cx, DeformError> {
        let t = self.curve.branches_at(z, side)?;
        let (i, j) = self.cs.conductors[c].channel;
        Ok(self.curve.exp_lambda_diff(self.model.n1, self.model.n2, &t[j], &t[i]))
    }

    /// Phase φ = λ_i − λ_j of conductor `c` (principal logarithms).
    pub fn phi(&self, c: usize, z: &Cx, side: Side) -> Result<Cx, DeformError> {
        let t = self.curve.branches_at(z, side)?;
        let (i, j) = self.cs.conductors[c].channel;
        Ok(self.curve.lambda_diff(&t[i], &t[j]))
    }

    /// Lip factor I + w^{−1} e^{−nφ} E_{ji}, the continuation of the outer
    /// triangular factor into the lens on the side of `z`.
    pub fn lip_factor(&self, c: usize, z: &Cx) -> Result<Mat3, DeformError> {
        let side = Side::of(z.to_c64());
        let e = self.exp_neg_n_phi(c, z, side)?;
        let w = self.conductor_weight(c, z);
        let (i, j) = self.cs.conductors[c].channel;
        let mut m = Mat3::identity(self.prec);
        m.set(j, i, &e / &w);
        Ok(m)
    }

    /// Constant-in-n central jump [[0, w], [−1/w, 0]] in the conductor's channel.
    pub fn central_jump(&self, c: usize, x: &Cx) -> Mat3 {
        let w = self.conductor_weight(c, x);
        let (i, j) = self.cs.conductors[c].channel;
        let mut m = Mat3::identity(self.prec);
        m.set(i, i, Cx::zero(self.prec));
        m.set(j, j, Cx::zero(self.prec));
        m.set(i, j, w.clone());
        m.set(j, i, -w.recip());
        m
    }

    /// Jump of Y at real x > 0.
    pub fn jump_y(&self, x: &Float) -> Mat3 {
        let mut m = Mat3::identity(self.prec);
        m.set(0, 1, Cx::from_float(&self.model.weight(1, x)));
        if self.model.n2 > 0 {
            m.set(0, 2, Cx::from_float(&self.model.weight(2, x)));
        }
        m
    }

    /// Jump of X = Y E on the real line.
    pub fn jump_x(&self, x: &Float) -> Mat3 {
        let p = self.prec;
        let mut m = Mat3::identity(p);
        if *x > 0 {
            m.set(0, 1, Cx::from_float(&self.model.weight(1, x)));
        } else if self.model.n2 > 0 {
            let beta = self.beta();
            let c = -2.0 * (std::f64::consts::PI * beta).sin();
            let ax = Float::with_val(p, -x.clone()).pow(&Float::with_val(p, beta));
            m.set(1, 2, &Cx::new(p, 0.0, c) * &ax);
        }
        m
    }

    /// Diagonal D(z) = diag(e^{−nλ₁}, e^{−n(λ₂−z)}, e^{−n(λ₃−z)}) from sheet values.
    fn d_from_sheets(&self, z: &Cx, t: &[Cx; 3]) -> Mat3 {
        let n = self.n() as f64;
        let e1 = (z * (-n)).exp();
        Mat3::diag([&e1 / &self.exp_lambda_shift(&t[0]), self.exp_lambda_shift(&t[1]).recip(), self.exp_lambda_shift(&t[2]).recip()])
    }

    pub fn d_matrix(&self, z: &Cx, side: Side) -> Result<Mat3, DeformError> {
        let t = self.curve.branches_at(z, side)?;
        Ok(self.d_from_sheets(z, &t))
    }

    /// Constant left factor L with T = L X D → I at infinity.
    pub fn l_matrix(&self) -> Mat3 {
        let p = self.prec;
        let (n1, n2) = (self.model.n1 as i64, self.model.n2 as i64);
        let n = (n1 + n2) as f64;
        let a = Cx::from_float(&self.curve.a);
        let one = Cx::one(p);
        let b = &one - &a;
        let l1 = {
            let v = Cx::real(p, n).exp();
            if (n1 + n2) % 2 == 1 {
                -v
            } else {
                v
            }
        };
        let one_m_2a = &b - &a;
        let l2 = &(&(&a * (-n)).exp() * &one_m_2a.powi(n2 - n1)) * &a.powi(3 * n1);
        let l3 = if n2 == 0 { one.clone() } else { &(&(&b * (-n)).exp() * &(-one_m_2a).powi(n1 - n2)) * &b.powi(3 * n2) };
        Mat3::diag([l1, l2, l3])
    }

    /// T-jump at real x (not a branch point), D₋⁻¹ J_X D₊.
    pub fn jump_t(&self, x: &Float) -> Result<Mat3, DeformError> {
        let z = Cx::from_float(x);
        let dp = self.d_matrix(&z, Side::Upper)?;
        let dm = self.d_matrix(&z, Side::Lower)?;
        let dmi = Mat3::diag([dm.get(0, 0).recip(), dm.get(1, 1).recip(), dm.get(2, 2).recip()]);
        Ok(&(&dmi * &self.jump_x(x)) * &dp)
    }

    /// Factorization J_T = J^(l) J^(0) J^(u) on conductor `c` at real x.
    pub fn factor_jumps(&self, c: usize, x: &Float) -> Result<TriangularFactors, DeformError> {
        let z = Cx::from_float(x);
        let (i, j) = self.cs.conductors[c].channel;
        let w = self.conductor_weight(c, &z);
        let up = self.exp_neg_n_phi(c, &z, Side::Upper)?;
        let dn = self.exp_neg_n_phi(c, &z, Side::Lower)?;
        let mut upper = Mat3::identity(self.prec);
        upper.set(j, i, &up / &w);
        let mut lower = Mat3::identity(self.prec);
        lower.set(j, i, &dn / &w);
        Ok(TriangularFactors { lower, central: self.central_jump(c, &z), upper })
    }

    /// S from T at z off the contour: T (J^(u))⁻¹ in upper lenses, T J^(l)
    /// in lower lenses, T elsewhere.
    pub fn to_s(&self, t: &Mat3, z: &Cx) -> Result<Mat3, DeformError> {
        match self.cs.region(z.to_c64()) {
            Region::Outside => Ok(t.clone()),
            Region::Lens { conductor, upper } => {
                let f = self.lip_factor(conductor, z)?;
                if upper {
                    Ok(t * &f.inverse().expect("unit triangular"))
                } else {
                    Ok(t * &f)
                }
            }
        }
    }

    pub fn t_from_s(&self, s: &Mat3, z: &Cx) -> Result<Mat3, DeformError> {
        match self.cs.region(z.to_c64()) {
            Region::Outside => Ok(s.clone()),
            Region::Lens { conductor, upper } => {
                let f = self.lip_factor(conductor, z)?;
                if upper {
                    Ok(s * &f)
                } else {
                    Ok(s * &f.inverse().expect("unit triangular"))
                }
            }
        }
    }

    /// Multiplier M(z) with S = T M(z).
    pub fn s_multiplier(&self, z: &Cx) -> Result<Mat3, DeformError> {
        self.to_s(&Mat3::identity(self.prec), z)
    }

    /// T = L Y E D at z off the real axis.
    pub fn t_from_y(&self, y: &Mat3, z: &Cx) -> Result<Mat3, DeformError> {
        let p = self.prec;
        let mut e = Mat3::identity(p);
        if self.model.n2 > 0 {
            e.set(1, 2, -z.powf(&Float::with_val(p, self.beta())));
        }
        let d = self.d_matrix(z, Side::of(z.to_c64()))?;
        Ok(&(&(&self.l_matrix() * y) * &e) * &d)
    }

    /// Y11 = e^{nG} T11.
    pub fn reconstruct_y11(&self, t11: &Cx, z: &Cx) -> Result<Cx, DeformError> {
        let e = self.curve.exp_n_g(self.model.n1, self.model.n2, z, Side::of(z.to_c64()))?;
        Ok(&e * t11)
    }

    /// Exact Y at large |z| from moment expansions of the Cauchy transforms.
    pub fn exact_y_far(&self, z: &Cx, terms: usize) -> Result<Mat3, DeformError> {
        let p = self.prec;
        let m = &self.model;
        let n = m.n();
        let work = p + 3 * n as u32 + 32;
        let ctx = PrecisionContext::new(p);
        let row1 = solve_mop(m, ctx)?.poly;
        let row2 = self.type_two_row(1, work)?;
        let row3 = if m.n2 > 0 { Some(self.type_two_row(2, work)?) } else { None };
        let two_pi_i = Cx::new(p, 0.0, 2.0 * std::f64::consts::PI);
        let cauchy = |coef: &[Float], j: usize| -> Cx {
            // C(q w_j)(z) = −(1/2πi) Σ_k z^{−k−1} ∫ q w_j x^k
            let mut acc = Cx::zero(p);
            let zi = z.recip();
            let mut zp = zi.clone();
            for k in 0..terms {
                let mut mom = Float::with_val(p, 0);
                for (i, c) in coef.iter().enumerate() {
                    mom += Float::with_val(p, c * moment(j, i + k, m, p));
                }
                acc += &zp * &mom;
                zp = &zp * &zi;
            }
            -(&acc / &two_pi_i)
        };
        let eval = |coef: &[Float]| -> Cx {
            let mut acc = Cx::zero(p);
            for c in coef.iter().rev() {
                acc = &(&acc * z) + &Cx::from_float(c);
            }
            acc
        };
        let mut y = Mat3::identity(p);
        let rows: [Option<(Vec<Float>, Cx)>; 3] =
            [Some((row1.coeffs.clone(), Cx::one(p))), Some((row2, -two_pi_i.clone())), row3.map(|r| (r, -two_pi_i.clone()))];
        for (r, item) in rows.iter().enumerate() {
            if let Some((coef, scale)) = item {
                let coef: Vec<Float> = coef.iter().map(|c| Float::with_val(p, c)).collect();
                y.set(r, 0, &eval(&coef) * scale);
                y.set(r, 1, &cauchy(&coef, 1) * scale);
                if m.n2 > 0 {
                    y.set(r, 2, &cauchy(&coef, 2) * scale);
                }
            }
        }
        Ok(y)
    }

    /// Real coefficients q̂ of degree < n with ∫ q̂ w_j x^{n_j − 1} = 1 and all
    /// other lower moments zero; row j + 1 of Y is −2πi (q̂, C(q̂ w₁), C(q̂ w₂)).
    fn type_two_row(&self, j: usize, work: u32) -> Result<Vec<Float>, DeformError> {
        let m = &self.model;
        let n = m.n();
        let counts = [m.n1, m.n2];
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (wi, &cnt) in counts.iter().enumerate() {
            for k in 0..cnt {
                a.push((0..n).map(|i| moment(wi + 1, i + k, m, work)).collect::<Vec<_>>());
                let one = wi + 1 == j && k + 1 == cnt;
                b.push(Float::with_val(work, if one { 1 } else { 0 }));
            }
        }
        let (x, cond) = solve_real(a, b).ok_or(ModelError::Singular(f64::INFINITY))?;
        let _ = cond;
        Ok(x)
    }

    /// The exact monic polynomial of this multi-index.
    pub fn polynomial(&self) -> Result<MonicPolynomial, DeformError> {
        Ok(solve_mop(&self.model, PrecisionContext::new(self.prec))?.poly)
    }
}

/// Outcome of the sign chart check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignChartReport {
    pub min_lip: f64,
    pub max_conductor: f64,
    pub lip_nodes: usize,
    pub conductor_nodes: usize,
    pub pass: bool,
}

/// Re φ at `nodes` points on every lip outside the disks and on every
/// conductor.
pub fn sign_chart_check(d: &Deformation, nodes: usize, conductor_tol: f64) -> Result<SignChartReport, DeformError> {
    let p = d.prec;
    let mut min_lip = f64::INFINITY;
    let mut max_cond: f64 = 0.0;
    let mut ln = 0;
    let mut cn = 0;
    for (c, k) in d.cs.conductors.iter().enumerate() {
        for upper in [true, false] {
            let (t0, t1) = d.cs.lip_range_outside(c, upper);
            for i in 0..nodes {
                let t = t0 + (t1 - t0) * i as f64 / (nodes - 1) as f64;
                let z = d.cs.lip_point(c, upper, t);
                let phi = d.phi(c, &Cx::from_c64(p, z), Side::of(z))?;
                min_lip = min_lip.min(phi.re_f64());
                ln += 1;
            }
        }
        for i in 1..nodes {
            let x = k.left + (k.right - k.left) * i as f64 / nodes as f64;
            for side in [Side::Upper, Side::Lower] {
                let phi = d.phi(c, &Cx::real(p, x), side)?;
                max_cond = max_cond.max(phi.re_f64().abs());
                cn += 1;
            }
        }
    }
    Ok(SignChartReport { min_lip, max_conductor: max_cond, lip_nodes: ln, conductor_nodes: cn, pass: min_lip > 0.0 && max_cond < conductor_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurvePreset;

    fn setup(n: usize) -> Deformation {
        let c = SpectralCurve::from_preset(&CurvePreset::ratio_3_4(), 256).unwrap();
        let m = ModelDescriptor::new(0.3, -0.2, 3 * n / 4, n / 4).unwrap();
        let cs = ContourSystem::for_curve(&c, &GeometryConfig::default());
        Deformation::new(c, m, cs)
    }

    #[test]
    fn factorization_reassembles() {
        let d = setup(8);
        for (c, x) in [(0, 1.3), (0, 3.0), (1, -0.4)] {
            let xf = Float::with_val(256, x);
            let f = d.factor_jumps(c, &xf).unwrap();
            let jt = d.jump_t(&xf).unwrap();
            assert!((&f.reassemble() - &jt).norm() < 1e-60, "{x}");
        }
    }

    #[test]
    fn jump_t_small_on_tails() {
        for x in [5.0, -2.5] {
            let x = Float::with_val(256, x);
            let a = setup(16).jump_t(&x).unwrap().dist_identity();
            let b = setup(32).jump_t(&x).unwrap().dist_identity();
            assert!(b < a * a * 1.01 && a < 0.2, "{a} {b}");
        }
    }

    #[test]
    fn jump_y_first_entry() {
        let m = ModelDescriptor::new(0.0, 0.5, 1, 0).unwrap();
        let c = SpectralCurve::laguerre(128);
        let cs = ContourSystem::for_curve(&c, &GeometryConfig::default());
        let d = Deformation::new(c, m, cs);
        let j = d.jump_y(&Float::with_val(128, 1));
        assert!((j.get(0, 1).re_f64() - (-1f64).exp()).abs() < 1e-15);
        assert!((&j.det() - 1.0).abs_f64() < 1e-30);
    }

    #[test]
    fn regions() {
        let d = setup(8);
        assert_eq!(d.cs.region(C64::new(1.5, 0.3)), Region::Lens { conductor: 0, upper: true });
        assert_eq!(d.cs.region(C64::new(-0.5, -0.2)), Region::Lens { conductor: 1, upper: false });
        assert_eq!(d.cs.region(C64::new(5.0, 0.1)), Region::Outside);
        let (t0, t1) = d.cs.lip_range_outside(0, true);
        assert!(t0 > 0.0 && t1 < 1.0 && t0 < t1);
        let z = d.cs.lip_point(0, true, t0);
        assert!((z.norm() - d.cs.disks[0].radius).abs() < 1e-9);
    }

    #[test]
    fn s_round_trip() {
        let d = setup(8);
        let t = Mat3::from_fn(|i, j| Cx::new(256, (i + 2 * j) as f64 * 0.1, 1.0 - i as f64));
        for z in [C64::new(1.0, 0.2), C64::new(2.0, -0.3), C64::new(-0.5, 0.1), C64::new(6.0, 1.0)] {
            let zz = Cx::from_c64(256, z);
            let s = d.to_s(&t, &zz).unwrap();
            let back = d.t_from_s(&s, &zz).unwrap();
            assert!((&back - &t).norm() < 1e-60);
        }
        let z = Cx::new(256, 6.0, 1.0);
        assert_eq!(d.to_s(&t, &z).unwrap(), t);
    }
}
