//! Exact multiple Laguerre polynomials from the moment (Gram) system.

use crate::numerics::mat::solve_real;
use crate::numerics::special::gamma_real;
use crate::numerics::{Cx, PrecisionContext};
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("alpha{0} = {1} must exceed -1")]
    Alpha(usize, f64),
    #[error("alpha2 - alpha1 = {0} is an integer; the weights do not form an AT system")]
    IntegerDifference(f64),
    #[error("Gram system is singular (condition estimate {0:e})")]
    Singular(f64),
    #[error("root {index} did not converge (last correction {correction:e})")]
    NoConvergence { index: usize, correction: f64 },
}

/// Weights `w_j(x) = x^{α_j} e^{−nx}` on (0, ∞) with multi-index (n1, n2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub alpha1: f64,
    pub alpha2: f64,
    pub n1: usize,
    pub n2: usize,
    /// Limit of n1/n along the asymptotic sweep, when one is intended.
    #[serde(default)]
    pub ratio: Option<f64>,
}

impl ModelDescriptor {
    pub fn new(alpha1: f64, alpha2: f64, n1: usize, n2: usize) -> Result<Self, ModelError> {
        let m = ModelDescriptor { alpha1, alpha2, n1, n2, ratio: None };
        m.validate()?;
        Ok(m)
    }

    /// Descriptor on the ray n1/n = `ratio` (n1 rounded to the nearest integer).
    pub fn on_ray(alpha1: f64, alpha2: f64, ratio: f64, n: usize) -> Result<Self, ModelError> {
        let n1 = (ratio * n as f64).round() as usize;
        let mut m = Self::new(alpha1, alpha2, n1, n - n1)?;
        m.ratio = Some(ratio);
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.alpha1 <= -1.0 {
            return Err(ModelError::Alpha(1, self.alpha1));
        }
        if self.alpha2 <= -1.0 {
            return Err(ModelError::Alpha(2, self.alpha2));
        }
        let d = self.alpha2 - self.alpha1;
        if self.n1 > 0 && self.n2 > 0 && d == d.round() {
            return Err(ModelError::IntegerDifference(d));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn alpha(&self, j: usize) -> f64 {
        if j == 1 {
            self.alpha1
        } else {
            self.alpha2
        }
    }

    /// Exponents of the diagonal normalization at infinity: (n, −n1, −n2).
    pub fn lambda(&self) -> [i64; 3] {
        [self.n() as i64, -(self.n1 as i64), -(self.n2 as i64)]
    }

    /// `w_j(x)` at real `x > 0`.
    pub fn weight(&self, j: usize, x: &Float) -> Float {
        let p = x.prec();
        let a = Float::with_val(p, self.alpha(j));
        let e = Float::with_val(p, -Float::with_val(p, x * self.n() as u64)).exp();
        Float::with_val(p, x.clone().pow(&a)) * e
    }
}

use rug::ops::Pow;

/// `∫₀^∞ x^k w_j(x) dx = Γ(k + α_j + 1) / n^{k + α_j + 1}`.
pub fn moment(j: usize, k: usize, m: &ModelDescriptor, prec: u32) -> Float {
    let s = Float::with_val(prec, m.alpha(j)) + (k as u64 + 1);
    let g = gamma_real(&s).expect("moment argument is positive");
    let nn = Float::with_val(prec, m.n().max(1) as u64);
    g / nn.pow(&s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonicPolynomial {
    /// Coefficients from the constant term up; the last one is exactly 1.
    pub coeffs: Vec<Float>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    degree: usize,
    precision_bits: u32,
    coefficients: Vec<String>,
}

impl MonicPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.coeffs[0].prec()
    }

    pub fn to_json(&self) -> String {
        let digits = (self.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        let j = PolyJson {
            degree: self.degree(),
            precision_bits: self.prec(),
            coefficients: self.coeffs.iter().map(|c| c.to_string_radix(10, Some(digits))).collect(),
        };
        serde_json::to_string_pretty(&j).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        let j: PolyJson = serde_json::from_str(s)?;
        let coeffs = j.coefficients.iter().map(|c| Float::with_val(j.precision_bits, Float::parse(c).expect("decimal coefficient"))).collect();
        Ok(MonicPolynomial { coeffs })
    }
}

/// Result of the Gram solve together with its diagnostics.
#[derive(Clone, Debug)]
pub struct MopSolution {
    pub poly: MonicPolynomial,
    pub condition: f64,
    /// Largest orthogonality residual relative to the moment scale.
    pub max_residual: f64,
}

/// Extra bits used inside the Gram solve to absorb its ill-conditioning.
fn guard_bits(n: usize) -> u32 {
    (3 * n + 32) as u32
}

/// Solves the multiple orthogonality conditions for the monic P_{n1,n2}.
pub fn solve_mop(m: &ModelDescriptor, ctx: PrecisionContext) -> Result<MopSolution, ModelError> {
    m.validate()?;
    let prec = ctx.bits();
    let n = m.n();
    if n == 0 {
        return Ok(MopSolution { poly: MonicPolynomial { coeffs: vec![Float::with_val(prec, 1)] }, condition: 1.0, max_residual: 0.0 });
    }
    let wp = prec + guard_bits(n);
    let mom: Vec<Vec<Float>> = [1usize, 2].iter().map(|&j| (0..2 * n).map(|k| moment(j, k, m, wp)).collect()).collect();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for (jj, nj) in [m.n1, m.n2].into_iter().enumerate() {
        for k in 0..nj {
            a.push((0..n).map(|i| mom[jj][i + k].clone()).collect::<Vec<_>>());
            b.push(Float::with_val(wp, -&mom[jj][n + k]));
        }
    }
    let (x, cond) = solve_real(a, b).ok_or(ModelError::Singular(f64::INFINITY))?;
    let mut coeffs: Vec<Float> = x;
    coeffs.push(Float::with_val(wp, 1));
    let max_residual = residuals_with(&coeffs, m, &mom).into_iter().fold(0.0, f64::max);
    if !max_residual.is_finite() || max_residual > 1e-3 {
        return Err(ModelError::Singular(cond));
    }
    let coeffs = coeffs.into_iter().map(|c| Float::with_val(prec, c)).collect();
    Ok(MopSolution { poly: MonicPolynomial { coeffs }, condition: cond, max_residual })
}

fn residuals_with(c: &[Float], m: &ModelDescriptor, mom: &[Vec<Float>]) -> Vec<f64> {
    let mut out = Vec::new();
    let p = c[0].prec();
    for (jj, nj) in [m.n1, m.n2].into_iter().enumerate() {
        for k in 0..nj {
            let mut s = Float::with_val(p, 0);
            let mut scale = Float::with_val(p, 0);
            for (i, ci) in c.iter().enumerate() {
                let t = Float::with_val(p, ci * &mom[jj][i + k]);
                scale += t.clone().abs();
                s += t;
            }
            out.push((s / scale).to_f64().abs());
        }
    }
    out
}

/// Relative orthogonality residuals `|∫ P x^k w_j| / ∫ |c_i| x^{i+k} w_j`,
/// evaluated with closed-form moments at the polynomial's precision.
pub fn orthogonality_residuals(p: &MonicPolynomial, m: &ModelDescriptor) -> Vec<f64> {
    let n = m.n();
    let prec = p.prec();
    let mom: Vec<Vec<Float>> = [1usize, 2].iter().map(|&j| (0..2 * n.max(1)).map(|k| moment(j, k, m, prec)).collect()).collect();
    residuals_with(&p.coeffs, m, &mom)
}

/// Horner evaluation at complex `z` (precision of `z`).
pub fn poly_eval(p: &MonicPolynomial, z: &Cx) -> Cx {
    let mut acc = Cx::zero(z.prec());
    for c in p.coeffs.iter().rev() {
        acc = &(&acc * z) + c;
    }
    acc
}

fn eval_with_derivative(p: &MonicPolynomial, z: &Cx) -> (Cx, Cx) {
    let mut v = Cx::zero(z.prec());
    let mut d = Cx::zero(z.prec());
    for c in p.coeffs.iter().rev() {
        d = &(&d * z) + &v;
        v = &(&v * z) + c;
    }
    (v, d)
}

/// All roots by Aberth–Ehrlich simultaneous iteration at full precision,
/// followed by Newton polishing.
pub fn poly_zeros(p: &MonicPolynomial) -> Result<Vec<Cx>, ModelError> {
    let n = p.degree();
    let prec = p.prec();
    if n == 0 {
        return Ok(vec![]);
    }
    let bound = 1.0 + p.coeffs[..n].iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max).min(1e300).powf(1.0 / n as f64).max(1.0);
    let radius = {
        let c0 = p.coeffs[0].to_f64().abs();
        if c0 > 0.0 && c0.is_finite() {
            c0.powf(1.0 / n as f64).min(bound)
        } else {
            bound / 2.0
        }
    };
    let mut z: Vec<Cx> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Cx::new(prec, radius * th.cos(), radius * th.sin())
        })
        .collect();
    let tol = 2f64.powi(-(prec as i32) / 2) * radius.max(1.0);
    let mut last = vec![f64::INFINITY; n];
    for _ in 0..2000 {
        let mut done = true;
        for i in 0..n {
            let (v, d) = eval_with_derivative(p, &z[i]);
            if v.is_zero() {
                last[i] = 0.0;
                continue;
            }
            let ratio = &v / &d;
            let mut s = Cx::zero(prec);
            for (k, zk) in z.iter().enumerate() {
                if k != i {
                    s += (&z[i] - zk).recip();
                }
            }
            let corr = &ratio / &(&Cx::one(prec) - &(&ratio * &s));
            last[i] = corr.abs_f64();
            z[i] = &z[i] - &corr;
            if last[i] > tol * (1.0 + z[i].abs_f64()) {
                done = false;
            }
        }
        if done {
            break;
        }
    }
    for (i, zi) in z.iter_mut().enumerate() {
        for _ in 0..3 {
            let (v, d) = eval_with_derivative(p, zi);
            if d.is_zero() {
                break;
            }
            let c = &v / &d;
            *zi = &*zi - &c;
            last[i] = c.abs_f64();
        }
        if !zi.is_finite() || last[i] > tol.sqrt() {
            return Err(ModelError::NoConvergence { index: i, correction: last[i] });
        }
    }
    z.sort_by(|a, b| a.re_f64().partial_cmp(&b.re_f64()).unwrap());
    Ok(z)
}

/// Checks that all zeros are real (|Im| below `tol`), positive and simple.
pub fn zeros_real_positive_simple(z: &[Cx], tol: f64) -> bool {
    let re: Vec<f64> = z.iter().map(|v| v.re_f64()).collect();
    z.iter().all(|v| v.im_f64().abs() < tol && v.re_f64() > 0.0) && re.windows(2).all(|w| w[1] - w[0] > tol)
}
