//! Gamma, modified Bessel and Airy functions at arbitrary precision.
//!
//! Each function has a convergent-series route (run with enough guard bits
//! to absorb cancellation) and a large-argument asymptotic route; the public
//! entry points pick whichever reaches full working precision.

use super::cx::Cx;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecialError {
    #[error("gamma has a pole at {0}")]
    Pole(f64),
    #[error("K_nu requested on its branch cut at {0}")]
    BranchCut(f64),
}

fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

fn near_nonpositive_integer(x: &Cx) -> Option<f64> {
    let (re, im) = (x.re_f64(), x.im_f64());
    if im == 0.0 && re <= 0.0 && re == re.round() {
        Some(re)
    } else {
        None
    }
}

/// Γ(x) on the real line via MPFR.
pub fn gamma_real(x: &Float) -> Result<Float, SpecialError> {
    if x.is_integer() && *x <= 0 {
        return Err(SpecialError::Pole(x.to_f64()));
    }
    Ok(x.clone().gamma())
}

/// log Γ(z) by the Stirling series after shifting `Re z` past a
/// precision-dependent threshold. Requires `Re z > 0`.
fn ln_gamma_stirling(z: &Cx) -> Cx {
    let prec = z.prec();
    let wp = prec + 32;
    let threshold = 0.12 * wp as f64 + 12.0;
    let mut w = z.with_prec(wp);
    let mut shift = Cx::one(wp);
    while w.re_f64() < threshold {
        shift = &shift * &w;
        w = &w + 1.0;
    }
    let half_ln_2pi = Float::with_val(wp, pi(wp) * 2u32).ln() / 2u32;
    let mut s = &(&(&w - 0.5) * &w.ln()) - &w;
    s = &s + &half_ln_2pi;
    let w2 = w.sqr();
    let mut wpow = w.clone();
    let tol = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    for k in 1..10 * wp {
        let two_k = 2 * k;
        // B_{2k} = (-1)^{k+1} 2 (2k)! ζ(2k) / (2π)^{2k}
        let zeta = Float::with_val(wp, two_k).zeta();
        let fact = Float::with_val(wp, Float::factorial(two_k));
        let tp = Float::with_val(wp, pi(wp) * 2u32).pow(two_k);
        let mut b = Float::with_val(wp, fact * zeta * 2u32) / tp;
        if k % 2 == 0 {
            b = -b;
        }
        let denom = Float::with_val(wp, two_k as u64 * (two_k as u64 - 1));
        let term = &(&Cx::from_float(&(b / denom)) / &wpow);
        if term.abs() < tol {
            break;
        }
        s = &s + term;
        wpow = &wpow * &w2;
    }
    (&s - &shift.ln()).with_prec(prec)
}

/// Γ(z) for complex `z`: Stirling series for `Re z ≥ ½`, reflection below.
pub fn gamma(z: &Cx) -> Result<Cx, SpecialError> {
    if let Some(r) = near_nonpositive_integer(z) {
        return Err(SpecialError::Pole(r));
    }
    let prec = z.prec();
    if z.re_f64() >= 0.5 {
        return Ok(ln_gamma_stirling(z).exp());
    }
    let wp = prec + 32;
    let zw = z.with_prec(wp);
    let one_minus = &Cx::one(wp) - &zw;
    let g = ln_gamma_stirling(&one_minus).exp();
    let s = (&zw * &Cx::pi(wp)).sin();
    Ok((&Cx::pi(wp) / &(&s * &g)).with_prec(prec))
}

/// 1/Γ(z), returning exact zero at the poles.
pub fn rgamma(z: &Cx) -> Cx {
    match gamma(z) {
        Ok(g) => g.recip(),
        Err(_) => Cx::zero(z.prec()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BesselKind {
    I,
    K,
}

fn guard_bits(z: &Cx, factor: f64) -> u32 {
    (factor * z.abs_f64() + 24.0).ceil() as u32
}

/// I_ν(z) by its Maclaurin series.
pub fn bessel_i_series(nu: &Float, z: &Cx) -> Cx {
    let prec = z.prec();
    if nu.is_integer() && *nu < 0 {
        return bessel_i_series(&Float::with_val(prec, -nu), z);
    }
    if z.is_zero() {
        return if nu.is_zero() { Cx::one(prec) } else { Cx::zero(prec) };
    }
    let wp = prec + guard_bits(z, 1.5);
    let zw = z.with_prec(wp);
    let nuw = Float::with_val(wp, nu);
    let half = &zw * 0.5;
    let q = half.sqr();
    let g = Float::with_val(wp, &nuw + 1u32);
    let rg = match gamma_real(&g) {
        Ok(v) => Cx::from_float(&v.recip()),
        Err(_) => Cx::zero(wp),
    };
    let lead = &half.powf(&nuw) * &rg;
    let mut term = Cx::one(wp);
    let mut sum = Cx::one(wp);
    let tol = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    let mut k = 1u32;
    loop {
        let d = Float::with_val(wp, &nuw + k) * k;
        term = &(&term * &q) / &d;
        sum += &term;
        if term.abs() < Float::with_val(wp, sum.abs() * &tol) && k as f64 > z.abs_f64() {
            break;
        }
        k += 1;
    }
    (&lead * &sum).with_prec(prec)
}

fn harmonic(k: u32, wp: u32) -> Float {
    let mut h = Float::with_val(wp, 0);
    for j in 1..=k {
        h += Float::with_val(wp, 1) / j;
    }
    h
}

/// K_ν(z) from the series of I_{±ν} (non-integer ν) or the logarithmic
/// series (integer ν). Principal branch, `z` off (−∞, 0].
pub fn bessel_k_series(nu: &Float, z: &Cx) -> Result<Cx, SpecialError> {
    let prec = z.prec();
    if z.im_f64() == 0.0 && z.re_f64() <= 0.0 {
        return Err(SpecialError::BranchCut(z.re_f64()));
    }
    let nu = Float::with_val(prec, nu.clone().abs());
    if nu.is_integer() {
        return Ok(bessel_k_integer(nu.to_u32_saturating().unwrap(), z));
    }
    let sin = Float::with_val(prec + 64, pi(prec + 64) * &nu).sin();
    let loss = (-sin.to_f64().abs().log2()).max(0.0) as u32;
    let wp = prec + guard_bits(z, 2.9) + loss;
    let zw = z.with_prec(wp);
    let nuw = Float::with_val(wp, &nu);
    let ip = bessel_i_series(&nuw, &zw);
    let im = bessel_i_series(&Float::with_val(wp, -&nuw), &zw);
    let sinw = Float::with_val(wp, pi(wp) * &nuw).sin();
    let f = Float::with_val(wp, pi(wp) / (sinw * 2u32));
    Ok((&(&im - &ip) * &f).with_prec(prec))
}

fn bessel_k_integer(m: u32, z: &Cx) -> Cx {
    let prec = z.prec();
    let wp = prec + guard_bits(z, 2.9);
    let zw = z.with_prec(wp);
    let half = &zw * 0.5;
    let q = half.sqr();
    let mut first = Cx::zero(wp);
    if m > 0 {
        let mut t = Cx::one(wp);
        for k in 0..m {
            let c = Float::with_val(wp, Float::factorial(m - k - 1)) / Float::with_val(wp, Float::factorial(k));
            first += &(&t * &c);
            t = &t * &(-&q);
        }
        first = &(&first * &half.powi(-(m as i64))) * 0.5;
    }
    let euler = Float::with_val(wp, Constant::Euler);
    let mut sum = Cx::zero(wp);
    let mut t = Cx::one(wp) / &Float::with_val(wp, Float::factorial(m));
    let tol = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    let mut k = 0u32;
    loop {
        let psi = Float::with_val(wp, harmonic(k, wp) + harmonic(m + k, wp)) - Float::with_val(wp, &euler * 2u32);
        let inc = &t * &psi;
        sum += &inc;
        if k as f64 > z.abs_f64() && inc.abs() < Float::with_val(wp, sum.abs() * &tol) {
            break;
        }
        k += 1;
        t = &(&t * &q) / &Float::with_val(wp, (k as u64) * (m + k) as u64);
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let second = &(&sum * &half.powi(m as i64)) * (0.5 * sign);
    let log_part = &(&half.ln() * &bessel_i_series(&Float::with_val(wp, m), &zw)) * (-sign);
    (&(&first + &log_part) + &second).with_prec(prec)
}

/// Coefficients a_k(ν) of the Hankel expansion while they keep decreasing
/// relative to |z|^k; returns the truncated sums Σ a_k/z^k and
/// Σ (−1)^k a_k/z^k together with the size of the last omitted term.
fn hankel_sums(nu: &Float, z: &Cx) -> (Cx, Cx, f64) {
    let wp = z.prec();
    let mu = Float::with_val(wp, nu.clone().square() * 4u32);
    let mut plus = Cx::one(wp);
    let mut minus = Cx::one(wp);
    let mut ak = Cx::one(wp);
    let zr = z.recip();
    let mut last = 1.0f64;
    for k in 1..4000u32 {
        let c = Float::with_val(wp, &mu - (2 * k - 1) * (2 * k - 1)) / (8 * k);
        let next = &(&ak * &c) * &zr;
        let size = next.abs_f64();
        if size >= last {
            return (plus, minus, last);
        }
        ak = next;
        plus += &ak;
        if k % 2 == 0 {
            minus += &ak;
        } else {
            minus -= &ak;
        }
        last = size;
        if size == 0.0 || size < 2f64.powi(-(wp as i32)) {
            return (plus, minus, 0.0);
        }
    }
    (plus, minus, last)
}

/// Large-|z| expansion of K_ν; also returns the relative truncation error.
pub fn bessel_k_asymptotic(nu: &Float, z: &Cx) -> (Cx, f64) {
    let wp = z.prec();
    let (plus, _, err) = hankel_sums(nu, z);
    let pre = (&Cx::from_float(&Float::with_val(wp, pi(wp) / 2u32)) / z).sqrt();
    (&(&pre * &(-z).exp()) * &plus, err)
}

/// Large-|z| expansion of I_ν including the exponentially small
/// counter-term, valid for |arg z| < π/2 + π.
pub fn bessel_i_asymptotic(nu: &Float, z: &Cx) -> (Cx, f64) {
    let wp = z.prec();
    let (plus, minus, err) = hankel_sums(nu, z);
    let pre = (&Cx::from_float(&Float::with_val(wp, pi(wp) * 2u32)) * z).sqrt().recip();
    let dom = &(&pre * &z.exp()) * &minus;
    let s = if z.im_f64() >= 0.0 { 1.0 } else { -1.0 };
    let phase = Cx::i(wp).rot_pi(s * nu.to_f64()) * s;
    let sub = &(&(&pre * &(-z).exp()) * &plus) * &phase;
    (&dom + &sub, err)
}

/// I_ν(z) or K_ν(z) at the precision of `z`.
pub fn bessel_mod(kind: BesselKind, nu: &Float, z: &Cx) -> Result<Cx, SpecialError> {
    let prec = z.prec();
    let eps = 2f64.powi(-(prec as i32));
    if z.abs_f64() > 0.3 * prec as f64 && z.re_f64() > 0.0 {
        let zw = z.with_prec(prec + 16);
        let (v, err) = match kind {
            BesselKind::I => bessel_i_asymptotic(nu, &zw),
            BesselKind::K => bessel_k_asymptotic(nu, &zw),
        };
        if err < eps {
            return Ok(v.with_prec(prec));
        }
    }
    match kind {
        BesselKind::I => Ok(bessel_i_series(nu, z)),
        BesselKind::K => bessel_k_series(nu, z),
    }
}

/// (Ai(z), Ai′(z)) from the Maclaurin series.
pub fn airy_series(z: &Cx) -> (Cx, Cx) {
    let prec = z.prec();
    let r = z.abs_f64();
    let wp = prec + (1.93 * r.powf(1.5) + 24.0) as u32;
    let zw = z.with_prec(wp);
    let z3 = &zw.sqr() * &zw;
    let three = Float::with_val(wp, 3);
    let g23 = Float::with_val(wp, Float::with_val(wp, 2) / 3u32).gamma();
    let g13 = Float::with_val(wp, Float::with_val(wp, 1) / 3u32).gamma();
    let c1 = Float::with_val(wp, three.clone().pow(Float::with_val(wp, -2) / 3u32)) / g23;
    let c2 = Float::with_val(wp, three.pow(Float::with_val(wp, -1) / 3u32)) / g13;
    let tol = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    let mut f = Cx::one(wp);
    let mut g = zw.clone();
    let mut fp = &zw.sqr() * 0.5;
    let mut gp = Cx::one(wp);
    let (mut tf, mut tg, mut tfp, mut tgp) = (f.clone(), g.clone(), fp.clone(), gp.clone());
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        tf = &(&tf * &z3) / ((3.0 * kf - 1.0) * 3.0 * kf);
        tg = &(&tg * &z3) / (3.0 * kf * (3.0 * kf + 1.0));
        tgp = &(&tgp * &z3) / ((3.0 * kf - 2.0) * 3.0 * kf);
        if k >= 2 {
            tfp = &(&tfp * &z3) / ((3.0 * kf - 1.0) * (3.0 * kf - 3.0));
            fp += &tfp;
        }
        f += &tf;
        g += &tg;
        gp += &tgp;
        let small = |t: &Cx| t.abs() <= tol;
        if k > 3 && small(&tf) && small(&tg) && small(&tfp) && small(&tgp) {
            break;
        }
        k += 1;
    }
    let ai = &(&f * &c1) - &(&g * &c2);
    let aip = &(&fp * &c1) - &(&gp * &c2);
    (ai.with_prec(prec), aip.with_prec(prec))
}

/// Asymptotic (Ai, Ai′) for |arg z| < π, with the relative truncation error.
pub fn airy_asymptotic(z: &Cx) -> (Cx, Cx, f64) {
    let wp = z.prec();
    let xi = &(&z.sqrt() * z) * (2.0 / 3.0);
    let xr = xi.recip();
    let mut u = Float::with_val(wp, 1);
    let mut su = Cx::one(wp);
    let mut sv = Cx::one(wp);
    let mut pw = Cx::one(wp);
    let mut last = f64::INFINITY;
    let mut err = 0.0;
    for k in 1..4000u32 {
        let kk = k as u64;
        u = u * ((6 * kk - 5) * (6 * kk - 3) * (6 * kk - 1)) / ((2 * kk - 1) * 216 * kk);
        let v = Float::with_val(wp, -&u) * (6 * kk + 1) / (6 * kk - 1);
        pw = &(-&pw) * &xr;
        let tu = &pw * &u;
        let size = tu.abs_f64();
        if size >= last {
            err = last;
            break;
        }
        su += &tu;
        sv += &(&pw * &v);
        last = size;
        if size < 2f64.powi(-(wp as i32)) {
            break;
        }
    }
    let sp = Float::with_val(wp, pi(wp).sqrt() * 2u32);
    let e = (-&xi).exp();
    let q = z.sqrt().sqrt();
    let ai = &(&(&e / &q) * &su) / &sp;
    let aip = -(&(&(&e * &q) * &sv) / &sp);
    (ai, aip, err)
}

fn airy_asymptotic_any(z: &Cx) -> (Cx, Cx, f64) {
    let arg = z.im_f64().atan2(z.re_f64()).abs();
    if arg <= 2.0 * std::f64::consts::PI / 3.0 {
        return airy_asymptotic(z);
    }
    let w = super::cx::unit_root(z.prec(), 2, 3);
    let w2 = w.sqr();
    let (a1, d1, e1) = airy_asymptotic(&(&w * z));
    let (a2, d2, e2) = airy_asymptotic(&(&w2 * z));
    let ai = -(&(&w * &a1) + &(&w2 * &a2));
    let aip = -(&(&w2 * &d1) + &(&w * &d2));
    (ai, aip, e1.max(e2))
}

/// (Ai(z), Ai′(z)) at the precision of `z`.
pub fn airy(z: &Cx) -> (Cx, Cx) {
    let prec = z.prec();
    if z.abs_f64() > 0.25 * (prec as f64).powf(2.0 / 3.0) * 2.0 {
        let zw = z.with_prec(prec + 16);
        let (a, d, err) = airy_asymptotic_any(&zw);
        if err < 2f64.powi(-(prec as i32)) {
            return (a.with_prec(prec), d.with_prec(prec));
        }
    }
    airy_series(z)
}
