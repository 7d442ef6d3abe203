//! Multiprecision complex scalars with operator overloading.
//!
//! Every binary operation rounds to the precision of its left operand, so a
//! computation started at one precision stays there.

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, PartialEq)]
pub struct Cx(pub Complex);

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.to_c64();
        write!(f, "Cx({:e}{:+e}i)", c.re, c.im)
    }
}

impl Cx {
    pub fn new(prec: u32, re: f64, im: f64) -> Cx {
        Cx(Complex::with_val(prec, (re, im)))
    }
    pub fn zero(prec: u32) -> Cx {
        Cx(Complex::new(prec))
    }
    pub fn one(prec: u32) -> Cx {
        Cx::real(prec, 1.0)
    }
    pub fn i(prec: u32) -> Cx {
        Cx::new(prec, 0.0, 1.0)
    }
    pub fn real(prec: u32, x: f64) -> Cx {
        Cx::new(prec, x, 0.0)
    }
    pub fn from_float(x: &Float) -> Cx {
        Cx(Complex::with_val(x.prec(), (x, 0)))
    }
    pub fn from_parts(re: &Float, im: &Float) -> Cx {
        Cx(Complex::with_val(re.prec().max(im.prec()), (re, im)))
    }
    pub fn from_c64(prec: u32, z: Complex64) -> Cx {
        Cx::new(prec, z.re, z.im)
    }
    /// Parses a decimal string such as `"0.3"` exactly at `prec` bits.
    pub fn parse_real(prec: u32, s: &str) -> Cx {
        let v = Float::parse(s).expect("decimal literal");
        Cx(Complex::with_val(prec, (v, 0)))
    }
    pub fn pi(prec: u32) -> Cx {
        Cx::from_float(&Float::with_val(prec, Constant::Pi))
    }
    pub fn prec(&self) -> u32 {
        self.0.prec().0
    }
    pub fn with_prec(&self, prec: u32) -> Cx {
        Cx(Complex::with_val(prec, &self.0))
    }
    pub fn re(&self) -> Float {
        self.0.real().clone()
    }
    pub fn im(&self) -> Float {
        self.0.imag().clone()
    }
    pub fn re_f64(&self) -> f64 {
        self.0.real().to_f64()
    }
    pub fn im_f64(&self) -> f64 {
        self.0.imag().to_f64()
    }
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re_f64(), self.im_f64())
    }
    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.0.abs_ref())
    }
    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }
    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.0.arg_ref())
    }
    pub fn conj(&self) -> Cx {
        Cx(self.0.clone().conj())
    }
    pub fn recip(&self) -> Cx {
        Cx(self.0.clone().recip())
    }
    pub fn exp(&self) -> Cx {
        Cx(self.0.clone().exp())
    }
    /// Principal logarithm, argument in (−π, π].
    pub fn ln(&self) -> Cx {
        Cx(self.0.clone().ln())
    }
    /// Principal square root.
    pub fn sqrt(&self) -> Cx {
        Cx(self.0.clone().sqrt())
    }
    /// Principal power `self^p` for real `p`.
    pub fn powf(&self, p: &Float) -> Cx {
        if self.is_zero() {
            return Cx::zero(self.prec());
        }
        Cx(self.0.clone().pow(p))
    }
    pub fn powc(&self, p: &Cx) -> Cx {
        Cx(self.0.clone().pow(&p.0))
    }
    pub fn powi(&self, k: i64) -> Cx {
        let mut base = if k < 0 { self.recip() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Cx::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }
    pub fn sqr(&self) -> Cx {
        Cx(self.0.clone().square())
    }
    pub fn sin(&self) -> Cx {
        Cx(self.0.clone().sin())
    }
    pub fn cos(&self) -> Cx {
        Cx(self.0.clone().cos())
    }
    pub fn is_zero(&self) -> bool {
        self.0.real().is_zero() && self.0.imag().is_zero()
    }
    pub fn is_finite(&self) -> bool {
        self.0.real().is_finite() && self.0.imag().is_finite()
    }
    /// Multiplies by `e^{iθ}` for real `θ` given in units of π.
    pub fn rot_pi(&self, theta: f64) -> Cx {
        let p = self.prec();
        let th = Float::with_val(p, Constant::Pi) * theta;
        let w = Cx(Complex::with_val(p, (th.clone().cos(), th.sin())));
        self * &w
    }
}

/// `e^{iπ·num/den}` with the angle formed at working precision.
pub fn unit_root(prec: u32, num: i64, den: u32) -> Cx {
    let th = Float::with_val(prec, Constant::Pi) * num / den;
    Cx(Complex::with_val(prec, (th.clone().cos(), th.sin())))
}

/// `e^{iπθ}` at precision `prec`.
pub fn expi_pi(prec: u32, theta: &Float) -> Cx {
    let th = Float::with_val(prec, Constant::Pi) * theta;
    Cx(Complex::with_val(prec, (th.clone().cos(), th.sin())))
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Cx> for &Cx {
            type Output = Cx;
            fn $m(self, rhs: &Cx) -> Cx {
                Cx(Complex::with_val(self.0.prec(), $tr::$m(&self.0, &rhs.0)))
            }
        }
        impl $tr<Cx> for Cx {
            type Output = Cx;
            fn $m(self, rhs: Cx) -> Cx {
                $tr::$m(&self, &rhs)
            }
        }
        impl $tr<&Cx> for Cx {
            type Output = Cx;
            fn $m(self, rhs: &Cx) -> Cx {
                $tr::$m(&self, rhs)
            }
        }
        impl $tr<Cx> for &Cx {
            type Output = Cx;
            fn $m(self, rhs: Cx) -> Cx {
                $tr::$m(self, &rhs)
            }
        }
        impl $tr<f64> for &Cx {
            type Output = Cx;
            fn $m(self, rhs: f64) -> Cx {
                Cx(Complex::with_val(self.0.prec(), $tr::$m(&self.0, rhs)))
            }
        }
        impl $tr<f64> for Cx {
            type Output = Cx;
            fn $m(self, rhs: f64) -> Cx {
                $tr::$m(&self, rhs)
            }
        }
        impl $tr<&Float> for &Cx {
            type Output = Cx;
            fn $m(self, rhs: &Float) -> Cx {
                Cx(Complex::with_val(self.0.prec(), $tr::$m(&self.0, rhs)))
            }
        }
        impl $tr<&Float> for Cx {
            type Output = Cx;
            fn $m(self, rhs: &Float) -> Cx {
                $tr::$m(&self, rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx(Complex::with_val(self.0.prec(), -&self.0))
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx(-self.0)
    }
}

impl AddAssign<&Cx> for Cx {
    fn add_assign(&mut self, rhs: &Cx) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Cx> for Cx {
    fn add_assign(&mut self, rhs: Cx) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Cx> for Cx {
    fn sub_assign(&mut self, rhs: &Cx) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Cx> for Cx {
    fn mul_assign(&mut self, rhs: &Cx) {
        self.0 *= &rhs.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_keeps_left_precision() {
        let a = Cx::new(200, 1.0, 2.0);
        let b = Cx::new(64, 3.0, -1.0);
        let c = &a * &b;
        assert_eq!(c.prec(), 200);
        assert_eq!(c.to_c64(), Complex64::new(5.0, 5.0));
    }

    #[test]
    fn integer_powers() {
        let z = Cx::new(128, 0.5, -1.5);
        let p = z.powi(7);
        let q = z.powi(-3).recip();
        let r = &(&z * &z) * &z;
        assert!((&p - &(&(&r * &r) * &z)).abs_f64() < 1e-30);
        assert!((&q - &r).abs_f64() < 1e-30);
    }

    #[test]
    fn rotation() {
        let z = Cx::one(128).rot_pi(0.5);
        assert!((&z - &Cx::i(128)).abs_f64() < 1e-35);
    }
}
