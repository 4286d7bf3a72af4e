//! Binary floating-point reals and complexes with a configurable mantissa.
//!
//! Every value records its working precision in bits; binary operations run
//! at the smaller precision of their operands. Backed by `astro-float`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::numtheory::Rational;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// A real number carried at `bits` bits of mantissa.
#[derive(Clone, Debug)]
pub struct HpReal {
    v: BigFloat,
    bits: usize,
}

impl HpReal {
    fn wrap(v: BigFloat, bits: usize) -> Self {
        debug_assert!(!v.is_nan(), "NaN in HpReal arithmetic");
        HpReal { v, bits }
    }

    pub fn zero(bits: usize) -> Self {
        Self::wrap(BigFloat::from_u8(0, bits), bits)
    }

    pub fn one(bits: usize) -> Self {
        Self::wrap(BigFloat::from_u8(1, bits), bits)
    }

    pub fn from_i64(x: i64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_i64(x, bits), bits)
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_f64(x, bits), bits)
    }

    pub fn from_bigint(x: &BigInt, bits: usize) -> Self {
        // exact Horner accumulation, then one rounding
        let work = bits.max(x.bits() as usize + 64);
        let shift = BigFloat::from_f64(18446744073709551616.0, work);
        let mut acc = BigFloat::from_u8(0, work);
        for d in x.magnitude().to_u64_digits().iter().rev() {
            acc = acc.mul(&shift, work, RM).add(&BigFloat::from_u64(*d, work), work, RM);
        }
        if x.is_negative() {
            acc = acc.neg();
        }
        let mut r = Self::wrap(acc, work);
        r.set_bits(bits);
        r
    }

    pub fn from_rational(x: &Rational, bits: usize) -> Self {
        let n = HpReal::from_bigint(x.numer(), bits + 8);
        let d = HpReal::from_bigint(x.denom(), bits + 8);
        let mut r = n / d;
        r.set_bits(bits);
        r
    }

    pub fn pi(bits: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(bits, RM)), bits)
    }

    /// `2^e`.
    pub fn pow2(e: i64, bits: usize) -> Self {
        let two = BigFloat::from_u8(2, bits);
        let v = two.powi(e.unsigned_abs() as usize, bits, RM);
        let v = if e < 0 { v.reciprocal(bits, RM) } else { v };
        Self::wrap(v, bits)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Rounds (or widens) to a new working precision.
    pub fn set_bits(&mut self, bits: usize) {
        self.v.set_precision(bits, RM).expect("precision change");
        self.bits = bits;
    }

    pub fn with_bits(&self, bits: usize) -> Self {
        let mut r = self.clone();
        r.set_bits(bits);
        r
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.bits)
    }

    pub fn sqr(&self) -> Self {
        self * self
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self * &HpReal::from_i64(k, self.bits)
    }

    pub fn div_i64(&self, k: i64) -> Self {
        self / &HpReal::from_i64(k, self.bits)
    }

    pub fn powi(&self, n: usize) -> Self {
        Self::wrap(self.v.powi(n, self.bits, RM), self.bits)
    }

    pub fn recip(&self) -> Self {
        Self::wrap(self.v.reciprocal(self.bits, RM), self.bits)
    }

    pub fn sqrt(&self) -> Self {
        if self.v.is_zero() {
            return self.clone();
        }
        Self::wrap(self.v.sqrt(self.bits, RM), self.bits)
    }

    pub fn sin(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.sin(self.bits, RM, cc)), self.bits)
    }

    pub fn cos(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.cos(self.bits, RM, cc)), self.bits)
    }

    pub fn exp(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.exp(self.bits, RM, cc)), self.bits)
    }

    pub fn ln(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.ln(self.bits, RM, cc)), self.bits)
    }

    pub fn atan(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.atan(self.bits, RM, cc)), self.bits)
    }

    /// The angle of `(x, y)` in `(-pi, pi]`.
    pub fn atan2(y: &HpReal, x: &HpReal) -> HpReal {
        let bits = y.bits.min(x.bits);
        let pi = HpReal::pi(bits);
        if x.is_zero() {
            if y.is_zero() {
                return HpReal::zero(bits);
            }
            let h = pi.div_i64(2);
            return if y.is_negative() { -h } else { h };
        }
        // keep the atan argument at most 1 in magnitude
        if y.abs() <= x.abs() {
            let a = (y / x).atan();
            if !x.is_negative() {
                a
            } else if y.is_negative() {
                a - pi
            } else {
                a + pi
            }
        } else {
            let a = (x / y).atan();
            let h = pi.div_i64(2);
            if y.is_negative() {
                -h - a
            } else {
                h - a
            }
        }
    }

    pub fn floor(&self) -> Self {
        Self::wrap(self.v.floor(), self.bits)
    }

    /// Nearest integer (ties to even).
    pub fn round_to_bigint(&self) -> BigInt {
        let r = self.v.round(0, RM);
        bigfloat_int_to_bigint(&r)
    }

    pub fn floor_to_bigint(&self) -> BigInt {
        bigfloat_int_to_bigint(&self.v.floor())
    }

    /// Nearest `f64` (truncating the mantissa).
    pub fn to_f64(&self) -> f64 {
        let Some((words, _, sign, exp, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        if self.v.is_zero() || words.is_empty() {
            return 0.0;
        }
        let top = *words.last().unwrap() as f64;
        let below = if words.len() > 1 { words[words.len() - 2] as f64 / 18446744073709551616.0 } else { 0.0 };
        let m = (top + below) / 18446744073709551616.0;
        let v = m * 2f64.powi(exp);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    /// Binary exponent `e` with `|x| in [2^(e-1), 2^e)`; very negative for 0.
    pub fn exponent(&self) -> i64 {
        if self.v.is_zero() {
            return i64::MIN / 4;
        }
        self.v.exponent().map(|e| e as i64).unwrap_or(0)
    }

    /// Fixed-point decimal with `digits` digits after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = HpReal::from_bigint(&BigInt::from(10u32).pow(digits as u32), self.bits + 8);
        let mut x = self.with_bits(self.bits + 8);
        x = &x * &scale;
        let n = x.round_to_bigint();
        let neg = n.is_negative();
        let s = n.magnitude().to_string();
        let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// Decimal digits warranted by the working precision.
    pub fn natural_digits(&self) -> usize {
        ((self.bits as f64) * std::f64::consts::LOG10_2).floor() as usize
    }
}

fn bigfloat_int_to_bigint(r: &BigFloat) -> BigInt {
    let Some((words, _, sign, exp, _)) = r.as_raw_parts() else {
        panic!("non-finite value");
    };
    if r.is_zero() {
        return BigInt::zero();
    }
    let mut mag = BigUint::zero();
    for w in words.iter().rev() {
        mag = (mag << 64u32) | BigUint::from(*w);
    }
    let total = (words.len() * 64) as i64;
    let shift = exp as i64 - total;
    let mag = if shift >= 0 { mag << shift as u64 } else { mag >> (-shift) as u64 };
    let v = BigInt::from(mag);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

impl fmt::Display for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or_else(|| self.natural_digits());
        f.write_str(&self.to_decimal(digits))
    }
}

impl PartialEq for HpReal {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for HpReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&HpReal> for &HpReal {
            type Output = HpReal;
            fn $m(self, o: &HpReal) -> HpReal {
                let b = self.bits.min(o.bits);
                HpReal::wrap(self.v.$m(&o.v, b, RM), b)
            }
        }
        impl $tr<HpReal> for HpReal {
            type Output = HpReal;
            fn $m(self, o: HpReal) -> HpReal {
                (&self).$m(&o)
            }
        }
        impl $tr<&HpReal> for HpReal {
            type Output = HpReal;
            fn $m(self, o: &HpReal) -> HpReal {
                (&self).$m(o)
            }
        }
        impl $tr<HpReal> for &HpReal {
            type Output = HpReal;
            fn $m(self, o: HpReal) -> HpReal {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for HpReal {
    type Output = HpReal;
    fn neg(self) -> HpReal {
        HpReal::wrap(BigFloat::neg(&self.v), self.bits)
    }
}

impl Neg for &HpReal {
    type Output = HpReal;
    fn neg(self) -> HpReal {
        HpReal::wrap(BigFloat::neg(&self.v), self.bits)
    }
}

/// A complex number with both parts at a shared precision.
#[derive(Clone, Debug, PartialEq)]
pub struct HpComplex {
    pub re: HpReal,
    pub im: HpReal,
}

impl HpComplex {
    pub fn new(re: HpReal, im: HpReal) -> Self {
        let b = re.bits.min(im.bits);
        HpComplex { re: re.with_bits(b), im: im.with_bits(b) }
    }

    pub fn from_f64(re: f64, im: f64, bits: usize) -> Self {
        HpComplex { re: HpReal::from_f64(re, bits), im: HpReal::from_f64(im, bits) }
    }

    pub fn from_real(re: HpReal) -> Self {
        let b = re.bits;
        HpComplex { re, im: HpReal::zero(b) }
    }

    pub fn zero(bits: usize) -> Self {
        HpComplex { re: HpReal::zero(bits), im: HpReal::zero(bits) }
    }

    pub fn one(bits: usize) -> Self {
        HpComplex { re: HpReal::one(bits), im: HpReal::zero(bits) }
    }

    pub fn i(bits: usize) -> Self {
        HpComplex { re: HpReal::zero(bits), im: HpReal::one(bits) }
    }

    pub fn bits(&self) -> usize {
        self.re.bits.min(self.im.bits)
    }

    pub fn with_bits(&self, bits: usize) -> Self {
        HpComplex { re: self.re.with_bits(bits), im: self.im.with_bits(bits) }
    }

    pub fn conj(&self) -> Self {
        HpComplex { re: self.re.clone(), im: -&self.im }
    }

    pub fn scale(&self, k: &HpReal) -> Self {
        HpComplex { re: &self.re * k, im: &self.im * k }
    }

    pub fn mul_i(&self) -> Self {
        HpComplex { re: -&self.im, im: self.re.clone() }
    }

    pub fn norm_sqr(&self) -> HpReal {
        self.re.sqr() + self.im.sqr()
    }

    pub fn abs(&self) -> HpReal {
        self.norm_sqr().sqrt()
    }

    /// Principal argument in `(-pi, pi]`.
    pub fn arg(&self) -> HpReal {
        HpReal::atan2(&self.im, &self.re)
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        HpComplex { re: &self.re / &n, im: -(&self.im / &n) }
    }

    /// `e^(i x)` for real `x`.
    pub fn cis(x: &HpReal) -> Self {
        HpComplex { re: x.cos(), im: x.sin() }
    }

    pub fn exp(&self) -> Self {
        HpComplex::cis(&self.im).scale(&self.re.exp())
    }

    /// Principal square root (`sqrt(1) = 1`, cut along the negative axis,
    /// `Re >= 0`).
    pub fn sqrt(&self) -> Self {
        let bits = self.bits();
        if self.re.is_zero() && self.im.is_zero() {
            return HpComplex::zero(bits);
        }
        let r = self.abs();
        let two = HpReal::from_i64(2, bits);
        if !self.re.is_negative() {
            let a = ((&r + &self.re) / &two).sqrt();
            let b = &self.im / (&two * &a);
            HpComplex { re: a, im: b }
        } else {
            let mut b = ((&r - &self.re) / &two).sqrt();
            if self.im.is_negative() {
                b = -b;
            }
            let a = &self.im / (&two * &b);
            HpComplex { re: a, im: b }
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = HpComplex::one(self.bits());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for HpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or_else(|| self.re.natural_digits());
        let im = self.im.to_decimal(digits);
        if let Some(stripped) = im.strip_prefix('-') {
            write!(f, "{} - {}i", self.re.to_decimal(digits), stripped)
        } else {
            write!(f, "{} + {}i", self.re.to_decimal(digits), im)
        }
    }
}

impl Add<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn add(self, o: &HpComplex) -> HpComplex {
        HpComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn sub(self, o: &HpComplex) -> HpComplex {
        HpComplex { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn mul(self, o: &HpComplex) -> HpComplex {
        HpComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Div<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn div(self, o: &HpComplex) -> HpComplex {
        self * &o.recip()
    }
}

impl Neg for &HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        HpComplex { re: -&self.re, im: -&self.im }
    }
}

macro_rules! owned_cplx {
    ($tr:ident, $m:ident) => {
        impl $tr<HpComplex> for HpComplex {
            type Output = HpComplex;
            fn $m(self, o: HpComplex) -> HpComplex {
                (&self).$m(&o)
            }
        }
        impl $tr<&HpComplex> for HpComplex {
            type Output = HpComplex;
            fn $m(self, o: &HpComplex) -> HpComplex {
                (&self).$m(o)
            }
        }
        impl $tr<HpComplex> for &HpComplex {
            type Output = HpComplex;
            fn $m(self, o: HpComplex) -> HpComplex {
                self.$m(&o)
            }
        }
    };
}

owned_cplx!(Add, add);
owned_cplx!(Sub, sub);
owned_cplx!(Mul, mul);
owned_cplx!(Div, div);

impl Neg for HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        -&self
    }
}

/// Exactness helper for tests and reports: `|x - y|` as `f64`.
pub fn abs_diff_f64(x: &HpReal, y: &HpReal) -> f64 {
    (x - y).abs().to_f64()
}

/// `i64` from a value known to be a small integer.
pub fn to_i64_exact(x: &HpReal) -> Option<i64> {
    x.round_to_bigint().to_i64()
}
