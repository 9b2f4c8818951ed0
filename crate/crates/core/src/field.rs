//! Scalar fields: exact complex rationals and tolerance-carrying complex floats.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Coefficient field shared by every algebraic structure in the crate.
pub trait Field:
    Clone
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_frac(num: i64, den: i64) -> Self;
    /// Exact backend converts the binary double exactly.
    fn from_c64(c: Complex64) -> Self;
    fn to_c64(&self) -> Complex64;
    fn inv(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn approx_eq(&self, other: &Self) -> bool;
    /// True when `|self| <= tol * scale` (exact: structural zero).
    fn negligible(&self, scale: f64) -> bool;
    fn abs(&self) -> f64;
    fn tol(&self) -> f64;
    /// `e^self`; the exact backend only knows `e^0 = 1`.
    fn exp(&self) -> Option<Self>;
    /// Total order on (re, im), used for canonical sorting.
    fn key_cmp(&self, other: &Self) -> Ordering;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.clone() * i)
    }
    fn is_one(&self) -> bool {
        (self.clone() - Self::one()).is_zero()
    }
    fn from_usize(n: usize) -> Self {
        Self::from_i64(n as i64)
    }
    fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }
}

/// Exact complex rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exact {
    pub re: BigRational,
    pub im: BigRational,
}

impl Exact {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Exact { re, im }
    }
    pub fn real(re: BigRational) -> Self {
        Exact { re, im: BigRational::zero() }
    }
    pub fn complex_frac(re: (i64, i64), im: (i64, i64)) -> Self {
        Exact {
            re: BigRational::new(re.0.into(), re.1.into()),
            im: BigRational::new(im.0.into(), im.1.into()),
        }
    }
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    pub fn conj(&self) -> Self {
        Exact { re: self.re.clone(), im: -self.im.clone() }
    }
    fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
    /// Largest denominator among the two components.
    pub fn denom_bits(&self) -> u64 {
        self.re.denom().bits().max(self.im.denom().bits())
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn f64_to_rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

fn parse_rat(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(n))
    }
}

fn rat_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl Add for Exact {
    type Output = Exact;
    fn add(self, o: Exact) -> Exact {
        Exact { re: self.re + o.re, im: self.im + o.im }
    }
}
impl Sub for Exact {
    type Output = Exact;
    fn sub(self, o: Exact) -> Exact {
        Exact { re: self.re - o.re, im: self.im - o.im }
    }
}
impl Mul for Exact {
    type Output = Exact;
    fn mul(self, o: Exact) -> Exact {
        if self.im.is_zero() && o.im.is_zero() {
            return Exact::real(self.re * o.re);
        }
        Exact {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}
impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        Exact { re: -self.re, im: -self.im }
    }
}

impl Field for Exact {
    const EXACT: bool = true;
    fn zero() -> Self {
        Exact::real(BigRational::zero())
    }
    fn one() -> Self {
        Exact::real(BigRational::one())
    }
    fn from_i64(n: i64) -> Self {
        Exact::real(BigRational::from_integer(n.into()))
    }
    fn from_frac(num: i64, den: i64) -> Self {
        Exact::real(BigRational::new(num.into(), den.into()))
    }
    fn from_c64(c: Complex64) -> Self {
        Exact { re: f64_to_rat(c.re), im: f64_to_rat(c.im) }
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(Exact::real(self.re.recip()));
        }
        let n = self.norm_sqr();
        Some(Exact { re: &self.re / &n, im: -(&self.im / &n) })
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
    fn abs(&self) -> f64 {
        self.to_c64().norm()
    }
    fn tol(&self) -> f64 {
        0.0
    }
    fn exp(&self) -> Option<Self> {
        if self.is_zero() {
            Some(Self::one())
        } else {
            None
        }
    }
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "({}-{}i)", self.re, -self.im.clone())
        } else {
            write!(f, "({}+{}i)", self.re, self.im)
        }
    }
}

/// Complex double with the tolerance used for its equality tests.
#[derive(Clone, Copy, PartialEq)]
pub struct Approx {
    pub v: Complex64,
    pub tol: f64,
}

impl Approx {
    pub fn new(re: f64, im: f64) -> Self {
        Approx { v: Complex64::new(re, im), tol: DEFAULT_TOL }
    }
    pub fn with_tol(v: Complex64, tol: f64) -> Self {
        Approx { v, tol }
    }
    pub fn c(v: Complex64) -> Self {
        Approx { v, tol: DEFAULT_TOL }
    }
}

impl Add for Approx {
    type Output = Approx;
    fn add(self, o: Approx) -> Approx {
        Approx { v: self.v + o.v, tol: self.tol.max(o.tol) }
    }
}
impl Sub for Approx {
    type Output = Approx;
    fn sub(self, o: Approx) -> Approx {
        Approx { v: self.v - o.v, tol: self.tol.max(o.tol) }
    }
}
impl Mul for Approx {
    type Output = Approx;
    fn mul(self, o: Approx) -> Approx {
        Approx { v: self.v * o.v, tol: self.tol.max(o.tol) }
    }
}
impl Neg for Approx {
    type Output = Approx;
    fn neg(self) -> Approx {
        Approx { v: -self.v, tol: self.tol }
    }
}

impl Field for Approx {
    const EXACT: bool = false;
    fn zero() -> Self {
        Approx::new(0.0, 0.0)
    }
    fn one() -> Self {
        Approx::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Approx::new(n as f64, 0.0)
    }
    fn from_frac(num: i64, den: i64) -> Self {
        Approx::new(num as f64 / den as f64, 0.0)
    }
    fn from_c64(c: Complex64) -> Self {
        Approx::c(c)
    }
    fn to_c64(&self) -> Complex64 {
        self.v
    }
    fn inv(&self) -> Option<Self> {
        if self.v.norm() <= self.tol * 1e-3 || self.v.norm() == 0.0 {
            None
        } else {
            Some(Approx { v: 1.0 / self.v, tol: self.tol })
        }
    }
    fn is_zero(&self) -> bool {
        self.v.norm() <= self.tol
    }
    fn approx_eq(&self, other: &Self) -> bool {
        let tol = self.tol.max(other.tol);
        let scale = 1f64.max(self.v.norm()).max(other.v.norm());
        (self.v - other.v).norm() <= tol * scale
    }
    fn negligible(&self, scale: f64) -> bool {
        self.v.norm() <= self.tol * scale
    }
    fn abs(&self) -> f64 {
        self.v.norm()
    }
    fn tol(&self) -> f64 {
        self.tol
    }
    fn exp(&self) -> Option<Self> {
        Some(Approx { v: self.v.exp(), tol: self.tol })
    }
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.v
            .re
            .total_cmp(&other.v.re)
            .then_with(|| self.v.im.total_cmp(&other.v.im))
    }
}

impl fmt::Debug for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.im == 0.0 {
            write!(f, "{}", self.v.re)
        } else {
            write!(f, "({}{:+}i)", self.v.re, self.v.im)
        }
    }
}

/// Scalar tagged with its backend, for I/O and mixed-input checks.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Exact),
    Approx(Approx),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Scalar {
    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(e) => e.to_c64(),
            Scalar::Approx(a) => a.v,
        }
    }

    pub fn arith(&self, other: &Scalar, op: ArithOp) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(apply(a, b, op)?)),
            (Scalar::Approx(a), Scalar::Approx(b)) => Ok(Scalar::Approx(apply(a, b, op)?)),
            _ => Err(Error::MixedBackend),
        }
    }

    pub fn approx_equal(&self, other: &Scalar) -> Result<bool> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(a == b),
            (Scalar::Approx(a), Scalar::Approx(b)) => Ok(a.approx_eq(b)),
            _ => Err(Error::MixedBackend),
        }
    }

    pub fn into_exact(self) -> Result<Exact> {
        match self {
            Scalar::Exact(e) => Ok(e),
            Scalar::Approx(_) => Err(Error::MixedBackend),
        }
    }

    /// Approximate view of any scalar; exact values are rounded.
    pub fn to_approx(&self) -> Approx {
        Approx::c(self.to_c64())
    }
}

fn apply<F: Field>(a: &F, b: &F, op: ArithOp) -> Result<F> {
    Ok(match op {
        ArithOp::Add => a.clone() + b.clone(),
        ArithOp::Sub => a.clone() - b.clone(),
        ArithOp::Mul => a.clone() * b.clone(),
        ArithOp::Div => a.div(b).ok_or(Error::DivisionByZero)?,
    })
}

/// Conversion between a concrete backend and the tagged scalar.
pub trait IoScalar: Field {
    fn to_scalar(&self) -> Scalar;
    fn from_scalar(s: &Scalar) -> Result<Self>;
}

impl IoScalar for Exact {
    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.clone())
    }
    /// Approximate values are accepted only when both parts are integers.
    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Exact(e) => Ok(e.clone()),
            Scalar::Approx(a) if a.v.re.fract() == 0.0 && a.v.im.fract() == 0.0 => {
                Ok(Exact::from_c64(a.v))
            }
            Scalar::Approx(_) => Err(Error::MixedBackend),
        }
    }
}

impl IoScalar for Approx {
    fn to_scalar(&self) -> Scalar {
        Scalar::Approx(*self)
    }
    fn from_scalar(s: &Scalar) -> Result<Self> {
        Ok(s.to_approx())
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_json::json!({"re": rat_to_string(&self.re), "im": rat_to_string(&self.im)})
            .serialize(s)
    }
}

impl Serialize for Approx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_json::json!({"re": self.v.re, "im": self.v.im}).serialize(s)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(e) => e.serialize(s),
            Scalar::Approx(a) => a.serialize(s),
        }
    }
}

fn component(v: Option<&serde_json::Value>) -> std::result::Result<Scalar, String> {
    use serde_json::Value;
    match v {
        None => Ok(Scalar::Exact(Exact::zero())),
        Some(Value::String(s)) => parse_rat(s)
            .map(|r| Scalar::Exact(Exact::real(r)))
            .ok_or_else(|| format!("bad rational {s:?}")),
        Some(Value::Number(n)) => {
            if let Some(i) = n.as_i64() {
                Ok(Scalar::Approx(Approx::new(i as f64, 0.0)))
            } else {
                Ok(Scalar::Approx(Approx::new(n.as_f64().unwrap_or(f64::NAN), 0.0)))
            }
        }
        Some(other) => Err(format!("bad scalar component {other}")),
    }
}

impl Scalar {
    /// Accepts `{"re":..,"im":..}` objects, bare strings `"p/q"` (exact) and bare numbers (approx).
    pub fn from_json(v: &serde_json::Value) -> std::result::Result<Scalar, String> {
        use serde_json::Value;
        match v {
            Value::Object(map) => {
                let parts = [map.get("re"), map.get("im")];
                let all_str = parts.iter().all(|p| matches!(p, None | Some(Value::String(_))));
                let all_num = parts.iter().all(|p| matches!(p, None | Some(Value::Number(_))));
                let re = component(parts[0])?;
                let im = component(parts[1])?;
                if all_str {
                    let re = re.into_exact().map_err(|e| e.to_string())?.re;
                    let im = im.into_exact().map_err(|e| e.to_string())?.re;
                    Ok(Scalar::Exact(Exact::new(re, im)))
                } else if all_num {
                    Ok(Scalar::Approx(Approx::c(Complex64::new(re.to_c64().re, im.to_c64().re))))
                } else {
                    Err("mixed exact/approx components".into())
                }
            }
            Value::String(_) | Value::Number(_) => component(Some(v)),
            other => Err(format!("bad scalar {other}")),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Scalar::from_json(&v).map_err(serde::de::Error::custom)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let s = Scalar::from_json(&v).map_err(serde::de::Error::custom)?;
        Exact::from_scalar(&s).map_err(serde::de::Error::custom)
    }
}

impl<'de> Deserialize<'de> for Approx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Scalar::from_json(&v)
            .map(|s| s.to_approx())
            .map_err(serde::de::Error::custom)
    }
}

/// Rebuild an exact scalar from rational parts given as (num, den) pairs.
pub fn exact(re: i64, den: i64) -> Exact {
    Exact::from_frac(re, den)
}

/// Round an approximate complex number to a nearby Gaussian rational with
/// denominator at most `max_den`, via continued fractions per component.
pub fn rationalize(c: Complex64, max_den: u64) -> Exact {
    Exact::new(best_rational(c.re, max_den), best_rational(c.im, max_den))
}

fn best_rational(x: f64, max_den: u64) -> BigRational {
    if !x.is_finite() {
        return BigRational::zero();
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e18 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return BigRational::zero();
    }
    BigRational::new(BigInt::from(h1), BigInt::from(k1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_frac(n, d)
    }

    #[test]
    fn rational_addition() {
        assert_eq!(q(1, 2) + q(1, 3), q(5, 6));
    }

    #[test]
    fn zero_absorbs() {
        let x = Exact::complex_frac((3, 7), (-2, 5));
        assert!((Exact::zero() * x).is_zero());
    }

    #[test]
    fn conjugate_product() {
        let a = Exact::complex_frac((2, 1), (1, 1));
        assert_eq!(a.clone() * a.conj(), Exact::from_i64(5));
    }

    #[test]
    fn approx_equality_thresholds() {
        let one = Approx::new(1.0, 0.0);
        assert!(one.approx_eq(&Approx::new(1.0 + 1e-12, 0.0)));
        assert!(!one.approx_eq(&Approx::new(1.01, 0.0)));
        assert!(q(1, 3).approx_eq(&q(1, 3)));
    }

    #[test]
    fn mixed_backend_rejected() {
        let a = Scalar::Exact(q(1, 2));
        let b = Scalar::Approx(Approx::new(0.5, 0.0));
        assert_eq!(a.arith(&b, ArithOp::Add), Err(Error::MixedBackend));
        assert_eq!(a.approx_equal(&b), Err(Error::MixedBackend));
    }

    #[test]
    fn division_by_zero() {
        let a = Scalar::Exact(q(1, 2));
        let z = Scalar::Exact(Exact::zero());
        assert_eq!(a.arith(&z, ArithOp::Div), Err(Error::DivisionByZero));
    }

    #[test]
    fn exact_json_round_trip() {
        let a = Exact::complex_frac((-7, 3), (5, 11));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"im":"5/11","re":"-7/3"}"#);
        let b: Exact = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        let sc: Scalar = serde_json::from_str(&s).unwrap();
        assert_eq!(sc, Scalar::Exact(a));
    }

    #[test]
    fn approx_json() {
        let sc: Scalar = serde_json::from_str(r#"{"re":1.25,"im":-0.5}"#).unwrap();
        assert_eq!(sc, Scalar::Approx(Approx::new(1.25, -0.5)));
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        let c = Complex64::new(-3.0 / 7.0, 5.0 / 2.0);
        assert_eq!(rationalize(c, 1000), Exact::complex_frac((-3, 7), (5, 2)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn ex() -> impl Strategy<Value = Exact> {
            (-50i64..50, 1i64..20, -50i64..50, 1i64..20)
                .prop_map(|(a, b, c, d)| Exact::complex_frac((a, b), (c, d)))
        }

        proptest! {
            #[test]
            fn associativity(a in ex(), b in ex(), c in ex()) {
                prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a + (b + c));
            }

            #[test]
            fn distributivity(a in ex(), b in ex(), c in ex()) {
                prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b + a * c);
            }

            #[test]
            fn inverse(a in ex()) {
                prop_assume!(!a.is_zero());
                prop_assert!((a.clone() * a.inv().unwrap()).is_one());
            }

            #[test]
            fn serialization_lossless(a in ex()) {
                let s = serde_json::to_string(&a).unwrap();
                let b: Exact = serde_json::from_str(&s).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
