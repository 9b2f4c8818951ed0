//! Rational functions with monic denominators.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::laurent::LaurentSeries;
use crate::poly::Poly;
use num::complex::Complex64;
use std::fmt;

#[derive(Clone)]
pub struct RatFn<F: Field> {
    num: Poly<F>,
    den: Poly<F>,
}

impl<F: Field> RatFn<F> {
    /// Normalizes to a monic denominator; the exact backend also cancels the gcd.
    pub fn new(num: Poly<F>, den: Poly<F>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFn::zero());
        }
        let (num, den) = if F::EXACT && den.deg() > 0 {
            let g = num.gcd(&den)?;
            (num.exact_div(&g).unwrap(), den.exact_div(&g).unwrap())
        } else {
            (num, den)
        };
        let l = den.lead().inv().ok_or(Error::DivisionByZero)?;
        Ok(RatFn { num: num.scale(&l), den: den.scale(&l) })
    }

    pub fn from_poly(p: Poly<F>) -> Self {
        RatFn { num: p, den: Poly::one() }
    }
    pub fn zero() -> Self {
        RatFn { num: Poly::zero(), den: Poly::one() }
    }
    pub fn one() -> Self {
        RatFn::from_poly(Poly::one())
    }
    pub fn constant(a: F) -> Self {
        RatFn::from_poly(Poly::constant(a))
    }

    pub fn num(&self) -> &Poly<F> {
        &self.num
    }
    pub fn den(&self) -> &Poly<F> {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_polynomial(&self) -> bool {
        self.den.deg() == 0
    }
    /// The polynomial this function equals, if the denominator is constant.
    pub fn as_poly(&self) -> Option<Poly<F>> {
        if self.is_polynomial() {
            Some(self.num.clone())
        } else {
            None
        }
    }
    /// Degree of numerator minus degree of denominator (order of growth at infinity).
    pub fn degree(&self) -> Option<isize> {
        if self.is_zero() {
            None
        } else {
            Some(self.num.deg() - self.den.deg())
        }
    }

    pub fn scale(&self, a: &F) -> Self {
        if a.is_zero() {
            return RatFn::zero();
        }
        RatFn { num: self.num.scale(a), den: self.den.clone() }
    }

    pub fn mul_poly(&self, p: &Poly<F>) -> Result<Self> {
        RatFn::new(&self.num * p, self.den.clone())
    }

    pub fn div_poly(&self, p: &Poly<F>) -> Result<Self> {
        RatFn::new(self.num.clone(), &self.den * p)
    }

    pub fn add(&self, o: &RatFn<F>) -> RatFn<F> {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den.approx_eq(&o.den) {
            let n = &self.num + &o.num;
            return RatFn::new(n, self.den.clone()).unwrap();
        }
        let n = &(&self.num * &o.den) + &(&o.num * &self.den);
        RatFn::new(n, &self.den * &o.den).unwrap()
    }

    pub fn neg(&self) -> RatFn<F> {
        RatFn { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFn<F>) -> RatFn<F> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFn<F>) -> RatFn<F> {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero();
        }
        RatFn::new(&self.num * &o.num, &self.den * &o.den).unwrap()
    }

    pub fn inv(&self) -> Result<RatFn<F>> {
        RatFn::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &RatFn<F>) -> Result<RatFn<F>> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn deriv(&self) -> RatFn<F> {
        if self.is_zero() {
            return RatFn::zero();
        }
        if self.is_polynomial() {
            return RatFn { num: self.num.deriv(), den: self.den.clone() };
        }
        let n = &(&self.num.deriv() * &self.den) - &(&self.num * &self.den.deriv());
        RatFn::new(n, &self.den * &self.den).unwrap()
    }

    pub fn eval(&self, x: &F) -> Result<F> {
        let d = self.den.eval(x);
        self.num.eval(x).div(&d).ok_or(Error::PoleHit)
    }

    pub fn eval_c64(&self, x: Complex64) -> Result<Complex64> {
        let d = self.den.eval_c64(x);
        if d.norm() == 0.0 {
            return Err(Error::PoleHit);
        }
        Ok(self.num.eval_c64(x) / d)
    }

    /// Laurent expansion of `self(x)·e^{mu (x - z0)}` at `z0`, through absolute order `hi`.
    /// The factor `e^{mu z0}` is carried symbolically on the series.
    pub fn laurent(&self, z0: &F, mu: &F, hi: i64) -> Result<LaurentSeries<F>> {
        LaurentSeries::of_ratfn(&self.num, &self.den, z0, mu, hi)
    }

    /// Order of vanishing (negative for a pole) at `z0`.
    pub fn order_at(&self, z0: &F) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let v = |p: &Poly<F>| -> i64 {
            let s = p.shift(z0);
            let scale = s.scale_norm();
            s.coeffs().iter().position(|c| !c.negligible(scale)).unwrap_or(0) as i64
        };
        Some(v(&self.num) - v(&self.den))
    }

    pub fn approx_eq(&self, o: &RatFn<F>) -> bool {
        let a = &self.num * &o.den;
        let b = &o.num * &self.den;
        a.approx_eq(&b)
    }
}

impl<F: Field> fmt::Debug for RatFn<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Field> fmt::Display for RatFn<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl<F: Field> PartialEq for RatFn<F> {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}
