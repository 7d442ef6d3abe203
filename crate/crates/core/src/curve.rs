//! The cubic spectral curve θ³ + z(θ + a)(θ + 1 − a) = 0, its sheets,
//! the g-function, the phase functions and the local edge coordinates.
//!
//! Sheet 1 behaves like 1 − z at infinity, sheet 2 tends to −a and sheet 3
//! to −(1 − a), where a = n1/n. Sheets 1 and 2 are glued along [0, x0],
//! sheets 2 and 3 along [−x1, 0]; the origin is a triple branch point.

use crate::model::ModelDescriptor;
use crate::numerics::cx::unit_root;
use crate::numerics::Cx;
use num_complex::Complex64 as C64;
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("branch tracking failed near {0}")]
    Tracking(C64),
    #[error("point {0} is a branch point")]
    BranchPoint(C64),
    #[error("discriminant has extra zeros on (0, inf): {0:?}")]
    Degenerate(Vec<f64>),
    #[error("preset: {0}")]
    Preset(String),
    #[error("conformal coordinate at {center} is not conformal (derivative {derivative:?})")]
    NotConformal { center: f64, derivative: C64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn of(z: C64) -> Side {
        if z.im >= 0.0 {
            Side::Upper
        } else {
            Side::Lower
        }
    }
    fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicSpec {
    pub c2: Vec<String>,
    pub c1: Vec<String>,
    pub c0: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetSpec {
    pub anchors: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub x0: String,
    #[serde(default)]
    pub minus_x1: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConductorSpec {
    pub from: String,
    pub to: String,
    pub sheets: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConductorPair {
    pub delta: ConductorSpec,
    pub gamma: ConductorSpec,
}

/// Structured-text description of a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePreset {
    pub name: String,
    pub ratio: [u32; 2],
    pub alpha1: f64,
    pub alpha2: f64,
    pub cubic: CubicSpec,
    pub sheets: SheetSpec,
    pub edges: EdgeSpec,
    pub conductors: ConductorPair,
}

pub const PRESET_RATIO_3_4: &str = include_str!("../presets/ratio-3-4.toml");
pub const PRESET_SYMMETRIC: &str = include_str!("../presets/symmetric.toml");

impl CurvePreset {
    pub fn parse(text: &str) -> Result<Self, CurveError> {
        toml::from_str(text).map_err(|e| CurveError::Preset(e.to_string()))
    }
    pub fn ratio_3_4() -> Self {
        Self::parse(PRESET_RATIO_3_4).expect("bundled preset")
    }
    pub fn symmetric() -> Self {
        Self::parse(PRESET_SYMMETRIC).expect("bundled preset")
    }
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serializable preset")
    }
}

/// Parses "p/q" or a decimal.
pub fn parse_rational(s: &str, prec: u32) -> Result<Float, CurveError> {
    let bad = || CurveError::Preset(format!("not a number: {s}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = Float::parse(p.trim()).map_err(|_| bad())?;
            let q = Float::parse(q.trim()).map_err(|_| bad())?;
            Ok(Float::with_val(prec, p) / Float::with_val(prec, q))
        }
        None => Ok(Float::with_val(prec, Float::parse(s.trim()).map_err(|_| bad())?)),
    }
}

#[derive(Clone, Debug)]
pub struct SpectralCurve {
    pub prec: u32,
    /// Ratio a = n1/n.
    pub a: Float,
    /// a(1 − a).
    pub k: Float,
    pub x0: Float,
    /// Left soft edge −x1, absent when sheets 2 and 3 meet at infinity.
    pub minus_x1: Option<Float>,
    /// Critical points of z(θ): θ± = −1 ± √(1 − 3a + 3a²).
    pub theta_plus: Float,
    pub theta_minus: Float,
    anchors: [(f64, f64); 3],
}

fn c64(z: &Cx) -> C64 {
    z.to_c64()
}

impl SpectralCurve {
    /// Curve for a ratio a ∈ (0, 1).
    pub fn from_ratio(a: Float) -> Result<Self, CurveError> {
        let prec = a.prec();
        if a <= 0 || a >= 1 {
            return Err(CurveError::Preset(format!("ratio {} outside (0, 1)", a.to_f64())));
        }
        let one = Float::with_val(prec, 1);
        let k = Float::with_val(prec, &a * Float::with_val(prec, &one - &a));
        let s = Float::with_val(prec, Float::with_val(prec, &one - Float::with_val(prec, &k * 3u32))).sqrt();
        let theta_plus = Float::with_val(prec, &s - 1u32);
        let theta_minus = Float::with_val(prec, -Float::with_val(prec, &s + 1u32));
        let (roots, lin) = discriminant_roots(&k);
        let pos: Vec<f64> = roots.iter().filter(|r| **r > 0.0).cloned().collect();
        if pos.len() != 1 {
            return Err(CurveError::Degenerate(pos));
        }
        let af = a.to_f64();
        let mut c =
            SpectralCurve { prec, k, x0: Float::new(prec), minus_x1: None, theta_plus, theta_minus, anchors: [(1.0, -1.0), (-af, 0.0), (af - 1.0, 0.0)], a };
        c.x0 = c.z_of_theta(&Cx::from_float(&c.theta_minus)).re();
        if !lin {
            c.minus_x1 = Some(c.z_of_theta(&Cx::from_float(&c.theta_plus)).re());
        }
        Ok(c)
    }

    /// Degenerate member a = 1 of the family: θ(θ² + zθ + z) = 0. Sheet 3 is
    /// identically zero and sheets 1, 2 carry the classical Laguerre curve
    /// with soft edge 4 and hard edge 0.
    pub fn laguerre(prec: u32) -> Self {
        SpectralCurve {
            prec,
            a: Float::with_val(prec, 1),
            k: Float::new(prec),
            x0: Float::with_val(prec, 4),
            minus_x1: None,
            theta_plus: Float::new(prec),
            theta_minus: Float::with_val(prec, -2),
            anchors: [(1.0, -1.0), (-1.0, 0.0), (0.0, 0.0)],
        }
    }

    /// Curve of a descriptor, a = n1/n.
    pub fn build(m: &ModelDescriptor, prec: u32) -> Result<Self, CurveError> {
        if m.n1 == 0 || m.n2 == 0 {
            return Err(CurveError::Degenerate(vec![]));
        }
        Self::from_ratio(Float::with_val(prec, m.n1 as u64) / m.n() as u64)
    }

    /// Curve of a preset, after checking its declared data.
    pub fn from_preset(p: &CurvePreset, prec: u32) -> Result<Self, CurveError> {
        let a = Float::with_val(prec, p.ratio[0]) / p.ratio[1];
        let c = Self::from_ratio(a)?;
        let want = |v: &[String], lin: f64| -> Result<bool, CurveError> {
            let vals: Vec<f64> = v.iter().map(|s| parse_rational(s, prec).map(|f| f.to_f64())).collect::<Result<_, _>>()?;
            Ok(vals.len() == 2 && vals[0] == 0.0 && (vals[1] - lin).abs() < 1e-15)
        };
        let kf = c.k.to_f64();
        if !(want(&p.cubic.c2, 1.0)? && want(&p.cubic.c1, 1.0)? && want(&p.cubic.c0, kf)?) {
            return Err(CurveError::Preset("cubic is not of the form theta^3 + z(theta + a)(theta + 1 - a)".into()));
        }
        let x0 = parse_rational(&p.edges.x0, prec)?.to_f64();
        if (x0 - c.x0.to_f64()).abs() > 1e-9 * x0 {
            return Err(CurveError::Preset(format!("declared x0 = {x0}, curve gives {}", c.x0.to_f64())));
        }
        if let (Some(d), Some(m)) = (&p.edges.minus_x1, &c.minus_x1) {
            let d = parse_rational(d, prec)?.to_f64();
            if (d - m.to_f64()).abs() > 1e-9 {
                return Err(CurveError::Preset(format!("declared -x1 = {d}, curve gives {}", m.to_f64())));
            }
        }
        for (j, an) in p.sheets.anchors.iter().enumerate() {
            let pa = parse_rational(&an[0], prec)?.to_f64();
            let qa = parse_rational(&an[1], prec)?.to_f64();
            if (pa - c.anchors[j].0).abs() > 1e-15 || (qa - c.anchors[j].1).abs() > 1e-15 {
                return Err(CurveError::Preset(format!("anchor of sheet {} disagrees with the ratio", j + 1)));
            }
        }
        Ok(c)
    }

    pub fn a_f64(&self) -> f64 {
        self.a.to_f64()
    }

    pub fn x0_f64(&self) -> f64 {
        self.x0.to_f64()
    }

    /// x1 > 0 with −x1 the left soft edge.
    pub fn x1_f64(&self) -> Option<f64> {
        self.minus_x1.as_ref().map(|m| -m.to_f64())
    }

    /// Sheets 2 and 3 are asymptotically distinct.
    pub fn has_left_edge(&self) -> bool {
        self.minus_x1.is_some()
    }

    /// Coefficients (c2, c1, c0) at z.
    pub fn coefficients(&self, z: &Cx) -> [Cx; 3] {
        [z.clone(), z.clone(), z * &self.k]
    }

    /// F(θ, z) and ∂F/∂θ.
    pub fn eval(&self, theta: &Cx, z: &Cx) -> (Cx, Cx) {
        let [c2, c1, c0] = self.coefficients(z);
        let f = &(&(&(&(theta + &c2) * theta) + &c1) * theta) + &c0;
        let d = &(&(&(theta * 3.0) + &(&c2 * 2.0)) * theta) + &c1;
        (f, d)
    }

    /// z(θ) = −θ³ / ((θ + a)(θ + 1 − a)).
    pub fn z_of_theta(&self, t: &Cx) -> Cx {
        let q = &(&(t + &self.a) * &(&(t + 1.0) - &self.a));
        -(&(&t.sqr() * t) / q)
    }

    fn roots_c64(&self, z: C64) -> [C64; 3] {
        let k = self.k.to_f64();
        let (b, c, d) = (z, z, z * k);
        let f = |x: C64| ((x + b) * x + c) * x + d;
        let r = 1.0 + z.norm();
        let mut x = [C64::from_polar(r, 0.4), C64::from_polar(r, 2.494), C64::from_polar(r, 4.589)];
        for _ in 0..500 {
            let mut delta: f64 = 0.0;
            for i in 0..3 {
                let mut den = C64::new(1.0, 0.0);
                for j in 0..3 {
                    if i != j {
                        den *= x[i] - x[j];
                    }
                }
                let step = f(x[i]) / den;
                x[i] -= step;
                delta = delta.max(step.norm() / (1.0 + x[i].norm()));
            }
            if delta < 1e-15 {
                break;
            }
        }
        for xi in x.iter_mut() {
            for _ in 0..2 {
                let df = (3.0 * *xi + 2.0 * b) * *xi + c;
                if df.norm() > 0.0 {
                    *xi -= f(*xi) / df;
                }
            }
        }
        x
    }

    fn label_far(&self, z: C64) -> [C64; 3] {
        let r = self.roots_c64(z);
        let mut out = [C64::new(0.0, 0.0); 3];
        let mut used = [false; 3];
        for j in 0..3 {
            let target = C64::new(self.anchors[j].0, 0.0) + z * self.anchors[j].1;
            let best = (0..3).filter(|i| !used[*i]).min_by(|&p, &q| (r[p] - target).norm().partial_cmp(&(r[q] - target).norm()).unwrap()).unwrap();
            used[best] = true;
            out[j] = r[best];
        }
        out
    }

    /// Sheet-labelled roots in double precision, continued from
    /// `Re z ± iR` down the vertical line to `z`.
    pub fn track_c64(&self, z: C64, side: Side) -> Result<[C64; 3], CurveError> {
        let s = side.sign();
        let far = 40.0 + 2.0 * z.norm();
        let target = z.im;
        let mut y = s * far;
        if s * target > far {
            y = target;
        }
        let mut cur = self.label_far(C64::new(z.re, y));
        let mut h = 0.5;
        let mut guard = 0;
        while y != target {
            guard += 1;
            if guard > 1_000_000 {
                return Err(CurveError::Tracking(z));
            }
            let ny = if (y - target).abs() <= h { target } else { y - s * h };
            let r = self.roots_c64(C64::new(z.re, ny));
            let mut next = [C64::new(0.0, 0.0); 3];
            let mut used = [false; 3];
            let mut ok = true;
            for j in 0..3 {
                let mut d: Vec<(f64, usize)> = (0..3).map(|i| ((r[i] - cur[j]).norm(), i)).collect();
                d.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
                let best = d[0].1;
                if used[best] || d[0].0 > 0.3 * d[1].0 {
                    ok = false;
                    break;
                }
                used[best] = true;
                next[j] = r[best];
            }
            if ok {
                cur = next;
                y = ny;
                h = (h * 1.5).min(0.5 + 0.2 * C64::new(z.re, y).norm());
            } else {
                h /= 2.0;
                if h < 1e-13 {
                    return Err(CurveError::Tracking(z));
                }
            }
        }
        Ok(cur)
    }

    /// The three sheet values θ₁, θ₂, θ₃ at working precision. On the real
    /// axis `side` selects the boundary value.
    pub fn branches_at(&self, z: &Cx, side: Side) -> Result<[Cx; 3], CurveError> {
        let zc = c64(z);
        let af = self.a_f64();
        let guess = if zc.norm() > 1e6 && (1.0 - 2.0 * af).abs() > 1e-3 {
            // labels at infinity are the anchors themselves
            let b = 1.0 - af * (1.0 - af);
            [-zc + 1.0 + b / zc, C64::new(-af, 0.0), C64::new(af - 1.0, 0.0)]
        } else {
            self.track_c64(zc, side)?
        };
        let prec = z.prec();
        let tol = 2f64.powi(8 - prec as i32);
        let mut out: [Cx; 3] = std::array::from_fn(|j| Cx::from_c64(prec, guess[j]));
        for t in out.iter_mut() {
            let mut prev = f64::INFINITY;
            for it in 0..200 {
                let (f, d) = self.eval(t, z);
                if d.is_zero() {
                    return Err(CurveError::BranchPoint(zc));
                }
                let step = &f / &d;
                *t = &*t - &step;
                let size = step.abs_f64() / (1.0 + t.abs_f64());
                // near a branch point rounding noise in F sets the floor
                if size <= tol || (size < 1e-20 && size > 0.25 * prev) {
                    break;
                }
                prev = size;
                if it == 199 {
                    return Err(CurveError::Tracking(zc));
                }
            }
        }
        for i in 0..3 {
            for j in i + 1..3 {
                if (&out[i] - &out[j]).abs_f64() < 1e3 * tol {
                    return Err(CurveError::BranchPoint(zc));
                }
            }
        }
        Ok(out)
    }

    /// e^{n(λ_i − λ_j)} for sheet values θ_i, θ_j, where
    /// e^{nλ(θ)} = e^{n(z + θ)} (θ + a)^{n1} (θ + 1 − a)^{n2}.
    pub fn exp_lambda_diff(&self, n1: usize, n2: usize, ti: &Cx, tj: &Cx) -> Cx {
        let n = (n1 + n2) as f64;
        let e = (&(ti - tj) * n).exp();
        let r1 = &(ti + &self.a) / &(tj + &self.a);
        let b = &(&Cx::one(ti.prec()) - &self.a);
        let r2 = &(ti + b) / &(tj + b);
        &(&e * &r1.powi(n1 as i64)) * &r2.powi(n2 as i64)
    }

    /// λ_i − λ_j with principal logarithms of the two ratios; analytic
    /// while both ratios stay off (−∞, 0].
    pub fn lambda_diff(&self, ti: &Cx, tj: &Cx) -> Cx {
        let one = Cx::one(ti.prec());
        let b = &one - &self.a;
        let l1 = (&(ti + &self.a) / &(tj + &self.a)).ln();
        let l2 = (&(ti + &b) / &(tj + &b)).ln();
        &(&(ti - tj) + &(&l1 * &self.a)) + &(&l2 * &b)
    }

    /// φ_Δ = λ₁ − λ₂, the phase of the [0, x0] conductor; Re φ_Δ > 0 on the lips.
    pub fn phi_delta(&self, z: &Cx, side: Side) -> Result<Cx, CurveError> {
        let t = self.branches_at(z, side)?;
        Ok(self.lambda_diff(&t[0], &t[1]))
    }

    /// φ_Γ = λ₂ − λ₃, the phase of the [−x1, 0] conductor.
    pub fn phi_gamma(&self, z: &Cx, side: Side) -> Result<Cx, CurveError> {
        let t = self.branches_at(z, side)?;
        Ok(self.lambda_diff(&t[1], &t[2]))
    }

    /// G(z) = log z + K(θ₁), with
    /// K = z + θ₁ − 1 + (1 + a) log((θ₁ + a)/θ₁) + (2 − a) log((θ₁ + 1 − a)/θ₁).
    pub fn g_eval(&self, z: &Cx, side: Side) -> Result<Cx, CurveError> {
        let t = self.branches_at(z, side)?;
        Ok(self.g_from_theta(z, &t[0]))
    }

    fn g_from_theta(&self, z: &Cx, u: &Cx) -> Cx {
        let one = Cx::one(z.prec());
        let b = &one - &self.a;
        let k = &(&(z + u) - 1.0) + &(&(&(&(u + &self.a) / u).ln() * &(&one + &self.a)) + &(&(&(u + &b) / u).ln() * &(&(&one * 2.0) - &self.a)));
        &z.ln() + &k
    }

    /// e^{nG(z)} = (−1)^n e^{n(z + θ₁ − 1)} (θ₁ + a)^{n1} (θ₁ + 1 − a)^{n2}, exact
    /// for integer n1, n2 with n1/n = a.
    pub fn exp_n_g(&self, n1: usize, n2: usize, z: &Cx, side: Side) -> Result<Cx, CurveError> {
        let t = self.branches_at(z, side)?;
        Ok(self.exp_n_g_theta(n1, n2, z, &t[0]))
    }

    pub fn exp_n_g_theta(&self, n1: usize, n2: usize, z: &Cx, u: &Cx) -> Cx {
        let n = n1 + n2;
        let one = Cx::one(z.prec());
        let e = (&(&(z + u) - 1.0) * n as f64).exp();
        let p1 = (u + &self.a).powi(n1 as i64);
        let p2 = (&(u + &one) - &self.a).powi(n2 as i64);
        let v = &(&e * &p1) * &p2;
        if n % 2 == 1 {
            -v
        } else {
            v
        }
    }

    /// G by integrating G′ = 1 + θ₁/z from a far anchor on the same vertical
    /// line, started from log z_A − (1 − a + a²)/z_A.
    pub fn g_path(&self, z: &Cx, side: Side, panels: usize) -> Result<Cx, CurveError> {
        let prec = z.prec();
        let s = side.sign();
        let zc = c64(z);
        let big = 1e12;
        let one = Cx::one(prec);
        let a2 = Float::with_val(prec, &self.a * &self.a) - &self.a;
        let za = Cx::new(prec, zc.re, zc.im + s * big);
        let mut acc = &za.ln() - &(&(&one + &a2) / &za);
        // z(τ) = Re z + i(Im z + s(e^τ − 1)), τ from log(1 + big) down to 0.
        let tmax = Float::with_val(prec, 1.0 + big).ln();
        let (gx, gw) = crate::numerics::quad::gauss_legendre_mp(20, prec);
        for p in 0..panels {
            let ta = Float::with_val(prec, &tmax * p as u32) / panels as u32;
            let tb = Float::with_val(prec, &tmax * (p + 1) as u32) / panels as u32;
            let half = Float::with_val(prec, &tb - &ta) / 2u32;
            let mid = Float::with_val(prec, &ta + &tb) / 2u32;
            for k in 0..gx.len() {
                let tau = Float::with_val(prec, &half * &gx[k]) + &mid;
                let e = tau.exp();
                let off = Float::with_val(prec, &e - 1u32) * s;
                let zi = Cx::from_parts(&z.re(), &Float::with_val(prec, &off + z.im()));
                let dz = Cx::from_parts(&Float::new(prec), &Float::with_val(prec, &e * s));
                let th = self.branches_at(&zi, side)?;
                let gp = &one + &(&th[0] / &zi);
                acc = &acc - &(&(&gp * &dz) * &Float::with_val(prec, &half * &gw[k]));
            }
        }
        Ok(acc)
    }

    /// Limit density of zeros on (0, x0): ρ(x) = −Im θ₁(x + i0)/(πx). On the
    /// conductor θ₁ and θ₂ are the complex pair of the real cubic, so |Im θ₁|
    /// comes from deflating the real root.
    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.x0_f64() {
            return 0.0;
        }
        let k = self.k.to_f64();
        let f = |t: f64| ((t + x) * t + x) * t + x * k;
        // F(0) = xk > 0 and F(−1 − 2x) < 0 bracket the real root
        let (mut lo, mut hi) = (-1.0 - 2.0 * x, 0.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m == lo || m == hi {
                break;
            }
            if f(m) < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        let r = 0.5 * (lo + hi);
        let b = x + r;
        let c = x + r * b;
        let disc = 4.0 * c - b * b;
        if disc <= 0.0 {
            return 0.0;
        }
        0.5 * disc.sqrt() / (std::f64::consts::PI * x)
    }

    /// The same density from the tracked sheet 1.
    pub fn density_tracked(&self, x: f64) -> Option<f64> {
        if x <= 0.0 || x >= self.x0_f64() {
            return Some(0.0);
        }
        let t = self.track_c64(C64::new(x, 0.0), Side::Upper).ok()?;
        Some((-t[0].im / (std::f64::consts::PI * x)).max(0.0))
    }

    /// Soft-edge coordinate at x0: f = ((−3/4)φ_Δ)^{2/3}, the cube-root
    /// branch chosen so that f′(x0) > 0.
    pub fn f_x0(&self, z: &Cx, side: Side) -> Result<Cx, CurveError> {
        let phi = self.phi_delta(z, side)?;
        let center = Cx::from_float(&self.x0);
        Ok(two_thirds_power_near(&(&phi * -0.75), &(z - &center)))
    }

    /// Soft-edge coordinate at −x1: f = ((−3/4)φ_Γ)^{2/3} with f′(−x1) < 0.
    pub fn f_minus_x1(&self, z: &Cx, side: Side) -> Result<Cx, CurveError> {
        let m = self.minus_x1.as_ref().ok_or(CurveError::Degenerate(vec![]))?;
        let phi = self.phi_gamma(z, side)?;
        let center = Cx::from_float(m);
        Ok(two_thirds_power_near(&(&phi * -0.75), &(&center - z)))
    }

    /// Hard-edge coordinate f0 = φ_Δ²/16 based at the origin; the
    /// conductor (0, x0) maps to f0 < 0.
    pub fn f_0(&self, z: &Cx, side: Side) -> Result<Cx, CurveError> {
        let phi = self.phi_delta(z, side)?;
        Ok(&phi.sqr() * 0.0625)
    }

    /// Checks that `f` is conformal at the real point `center` on the disk
    /// of radius `r`: the difference quotients at two scales agree, their
    /// real part has the sign `orientation`, and the image of the circle of
    /// radius r/2 winds once around f(center).
    pub fn check_conformal<F>(&self, center: f64, r: f64, orientation: f64, f: F) -> Result<C64, CurveError>
    where
        F: Fn(&Cx, Side) -> Result<Cx, CurveError>,
    {
        let prec = self.prec;
        let at = |z: C64| f(&Cx::from_c64(prec, z), Side::of(z)).map(|v| v.to_c64());
        let quotient = |h: f64| -> Result<C64, CurveError> {
            let up = at(C64::new(center, h))?;
            let dn = at(C64::new(center, -h))?;
            Ok((up - dn) / C64::new(0.0, 2.0 * h))
        };
        let h = 1e-3 * r;
        let (d1, d2) = (quotient(h)?, quotient(h / 4.0)?);
        let bad = |d: C64| CurveError::NotConformal { center, derivative: d };
        if (d1 - d2).norm() > 1e-2 * d2.norm() || d2.re * orientation <= 0.0 || d2.im.abs() > 1e-3 * d2.norm() {
            return Err(bad(d2));
        }
        let f0 = at(C64::new(center, 0.0)).unwrap_or(C64::new(0.0, 0.0));
        let m = 256;
        let mut turn = 0.0;
        let mut prev = at(C64::new(center, 0.0) + C64::from_polar(0.5 * r, 0.01))? - f0;
        for k in 1..=m {
            let t = 0.01 + 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            let v = at(C64::new(center, 0.0) + C64::from_polar(0.5 * r, t))? - f0;
            turn += (v / prev).arg();
            prev = v;
        }
        if (turn / (2.0 * std::f64::consts::PI) - 1.0).abs() > 0.05 {
            return Err(bad(d2));
        }
        Ok(d2)
    }

    /// Permutation of the sheet labels after continuing once
    /// counterclockwise around the circle |z − c| = r.
    pub fn monodromy(&self, c: f64, r: f64) -> Result<[usize; 3], CurveError> {
        let start = C64::new(c, 0.0) + C64::from_polar(r, 0.5);
        let init = self.track_c64(start, Side::of(start))?;
        let mut cur = init;
        let steps = 4000;
        for k in 1..=steps {
            let z = C64::new(c, 0.0) + C64::from_polar(r, 0.5 + 2.0 * std::f64::consts::PI * k as f64 / steps as f64);
            let roots = self.roots_c64(z);
            let mut next = cur;
            for j in 0..3 {
                next[j] = *roots.iter().min_by(|p, q| (**p - cur[j]).norm().partial_cmp(&(**q - cur[j]).norm()).unwrap()).unwrap();
            }
            cur = next;
        }
        let mut perm = [0; 3];
        for j in 0..3 {
            perm[j] = (0..3).min_by(|&p, &q| (init[p] - cur[j]).norm().partial_cmp(&(init[q] - cur[j]).norm()).unwrap()).unwrap();
        }
        Ok(perm)
    }
}

/// Roots of the discriminant of F in θ other than the double root z = 0:
/// z²(1 − 4k) + z(18k − 4) − 27k² = 0. The flag reports the linear case.
fn discriminant_roots(k: &Float) -> (Vec<f64>, bool) {
    let k = k.to_f64();
    let (a2, a1, a0) = (1.0 - 4.0 * k, 18.0 * k - 4.0, -27.0 * k * k);
    if a2.abs() < 1e-14 {
        return (vec![-a0 / a1], true);
    }
    let d = (a1 * a1 - 4.0 * a2 * a0).sqrt();
    (vec![(-a1 + d) / (2.0 * a2), (-a1 - d) / (2.0 * a2)], false)
}

/// The value of w^{2/3} whose argument is closest to that of `dir`.
fn two_thirds_power_near(w: &Cx, dir: &Cx) -> Cx {
    let prec = w.prec();
    if w.is_zero() {
        return Cx::zero(prec);
    }
    let two_thirds = Float::with_val(prec, 2) / 3u32;
    let base = w.powf(&two_thirds);
    // largest cosine of the angle between candidate and direction
    let mut best = base.clone();
    let mut score = f64::NEG_INFINITY;
    for k in 0..3 {
        let cand = &base * &unit_root(prec, 2 * k, 3);
        let c = (&cand * &dir.conj()).re_f64() / (cand.abs_f64() * dir.abs_f64());
        if c > score {
            score = c;
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> SpectralCurve {
        SpectralCurve::from_preset(&CurvePreset::ratio_3_4(), 192).unwrap()
    }

    #[test]
    fn density_routes_agree() {
        let c = curve();
        let x0 = c.x0_f64();
        for t in [0.01, 0.2, 0.5, 0.8, 0.99] {
            let a = c.density(t * x0);
            let b = c.density_tracked(t * x0).unwrap();
            assert!((a - b).abs() < 1e-10 * a, "{t}: {a} {b}");
        }
        assert!(c.density(1e-30) > 1e15);
    }

    #[test]
    fn edges() {
        let c = curve();
        assert!((c.x0_f64() - 3.565032397180).abs() < 1e-11);
        assert!((c.x1_f64().unwrap() - 1.065032397180).abs() < 1e-11);
        let s = SpectralCurve::from_preset(&CurvePreset::symmetric(), 128).unwrap();
        assert!((s.x0_f64() - 3.375).abs() < 1e-14);
        assert!(!s.has_left_edge());
    }

    #[test]
    fn vieta() {
        let c = curve();
        let z = Cx::new(192, 0.7, -1.3);
        let t = c.branches_at(&z, Side::Lower).unwrap();
        let [c2, c1, c0] = c.coefficients(&z);
        let s = &(&t[0] + &t[1]) + &t[2];
        assert!((&s + &c2).abs_f64() < 1e-50);
        let p = &(&(&t[0] * &t[1]) + &(&t[0] * &t[2])) + &(&t[1] * &t[2]);
        assert!((&p - &c1).abs_f64() < 1e-50);
        assert!((&(&(&t[0] * &t[1]) * &t[2]) + &c0).abs_f64() < 1e-50);
    }

    #[test]
    fn monodromy() {
        let c = curve();
        assert_eq!(c.monodromy(c.x0_f64(), 0.3).unwrap(), [1, 0, 2]);
        assert_eq!(c.monodromy(-c.x1_f64().unwrap(), 0.3).unwrap(), [0, 2, 1]);
        let p = c.monodromy(0.0, 0.2).unwrap();
        assert!(p == [1, 2, 0] || p == [2, 0, 1]);
    }

    #[test]
    fn soft_edges_conformal_hard_edge_not() {
        let c = curve();
        let x0 = c.x0_f64();
        assert!(c.check_conformal(x0, x0 / 8.0, 1.0, |z, s| c.f_x0(z, s)).is_ok());
        let m = -c.x1_f64().unwrap();
        assert!(c.check_conformal(m, x0 / 8.0, -1.0, |z, s| c.f_minus_x1(z, s)).is_ok());
        // the origin is a triple branch point, so φ² is not a local coordinate there
        assert!(matches!(c.check_conformal(0.0, x0 / 8.0, -1.0, |z, s| c.f_0(z, s)), Err(CurveError::NotConformal { .. })));
        let l = SpectralCurve::laguerre(192);
        assert!(l.check_conformal(0.0, 0.5, -1.0, |z, s| l.f_0(z, s)).is_ok());
        assert!(l.check_conformal(4.0, 0.5, 1.0, |z, s| l.f_x0(z, s)).is_ok());
    }

    #[test]
    fn sheets_swap_across_conductors() {
        let c = curve();
        let z = Cx::new(192, -0.4, 0.0);
        let up = c.branches_at(&z, Side::Upper).unwrap();
        let dn = c.branches_at(&z, Side::Lower).unwrap();
        assert!((&up[1] - &dn[2]).abs_f64() < 1e-40 && (&up[2] - &dn[1]).abs_f64() < 1e-40);
        assert!((&up[0] - &dn[0]).abs_f64() < 1e-40);
        let z = Cx::new(192, 2.0, 0.0);
        let up = c.branches_at(&z, Side::Upper).unwrap();
        let dn = c.branches_at(&z, Side::Lower).unwrap();
        assert!((&up[0] - &dn[1]).abs_f64() < 1e-40 && (&up[1] - &dn[0]).abs_f64() < 1e-40);
    }

    #[test]
    fn branches_distinct_at_infinity() {
        let c = curve();
        let t = c.branches_at(&Cx::new(192, 1e4, 0.0), Side::Upper).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!((&t[i] - &t[j]).abs_f64() > 1e-3);
            }
        }
    }

    #[test]
    fn preset_mismatch_rejected() {
        let mut p = CurvePreset::ratio_3_4();
        p.edges.x0 = "3.6".into();
        assert!(SpectralCurve::from_preset(&p, 128).is_err());
        let mut q = CurvePreset::ratio_3_4();
        q.cubic.c1 = vec!["0".into(), "2".into()];
        assert!(SpectralCurve::from_preset(&q, 128).is_err());
    }
}
