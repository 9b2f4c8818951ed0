//! Dense univariate polynomials, lowest degree first.

use crate::error::{Error, Result};
use crate::field::Field;
use num::complex::Complex64;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone)]
pub struct Poly<F: Field> {
    c: Vec<F>,
}

fn max_abs<F: Field>(c: &[F]) -> f64 {
    c.iter().map(|a| a.abs()).fold(0.0, f64::max)
}

fn trim<F: Field>(mut c: Vec<F>, scale: f64) -> Vec<F> {
    while let Some(last) = c.last() {
        let gone = if F::EXACT { last.is_zero() } else { last.negligible(scale) || last.abs() == 0.0 };
        if gone {
            c.pop();
        } else {
            break;
        }
    }
    c
}

impl<F: Field> Poly<F> {
    pub fn new(c: Vec<F>) -> Self {
        let s = max_abs(&c);
        Poly { c: trim(c, s) }
    }

    /// Builds from coefficients, trimming against an external magnitude.
    pub fn with_scale(c: Vec<F>, scale: f64) -> Self {
        Poly { c: trim(c, scale) }
    }

    pub fn zero() -> Self {
        Poly { c: vec![] }
    }
    pub fn one() -> Self {
        Poly::constant(F::one())
    }
    pub fn constant(a: F) -> Self {
        Poly::new(vec![a])
    }
    pub fn x() -> Self {
        Poly { c: vec![F::zero(), F::one()] }
    }
    /// `x - a`
    pub fn linear_root(a: &F) -> Self {
        Poly { c: vec![-a.clone(), F::one()] }
    }
    pub fn monomial(a: F, k: usize) -> Self {
        let mut c = vec![F::zero(); k];
        c.push(a);
        Poly::new(c)
    }
    pub fn from_roots(roots: &[F]) -> Self {
        roots.iter().fold(Poly::one(), |acc, r| &acc * &Poly::linear_root(r))
    }
    pub fn from_i64(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&v| F::from_i64(v)).collect())
    }

    pub fn coeffs(&self) -> &[F] {
        &self.c
    }
    pub fn into_coeffs(self) -> Vec<F> {
        self.c
    }
    pub fn coeff(&self, k: usize) -> F {
        self.c.get(k).cloned().unwrap_or_else(F::zero)
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    /// Degree with `-1` for the zero polynomial.
    pub fn deg(&self) -> isize {
        self.c.len() as isize - 1
    }
    pub fn lead(&self) -> F {
        self.c.last().cloned().unwrap_or_else(F::zero)
    }
    pub fn scale_norm(&self) -> f64 {
        max_abs(&self.c)
    }

    pub fn scale(&self, a: &F) -> Self {
        let s = self.scale_norm() * a.abs();
        Poly::with_scale(self.c.iter().map(|x| x.clone() * a.clone()).collect(), s)
    }

    pub fn monic(&self) -> Self {
        match self.lead().inv() {
            Some(i) if !self.is_zero() => self.scale(&i),
            _ => self.clone(),
        }
    }

    pub fn deriv(&self) -> Self {
        if self.c.len() <= 1 {
            return Poly::zero();
        }
        let s = self.scale_norm() * self.c.len() as f64;
        Poly::with_scale(
            self.c.iter().enumerate().skip(1).map(|(k, a)| a.clone() * F::from_usize(k)).collect(),
            s,
        )
    }

    pub fn deriv_n(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.deriv())
    }

    pub fn eval(&self, x: &F) -> F {
        self.c.iter().rev().fold(F::zero(), |acc, a| acc * x.clone() + a.clone())
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        self.c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * x + a.to_c64())
    }

    /// Coefficients of `p(x + a)`, i.e. the Taylor coefficients at `a`.
    pub fn shift(&self, a: &F) -> Self {
        let n = self.c.len();
        let mut c = self.c.clone();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = c[j + 1].clone() * a.clone();
                c[j] = c[j].clone() + t;
            }
        }
        let s = self.scale_norm() * (1.0 + a.abs()).powi(n as i32);
        Poly::with_scale(c, s)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division; the approximate backend drops the negligible remainder tail.
    pub fn div_rem(&self, d: &Poly<F>) -> Result<(Poly<F>, Poly<F>)> {
        let dl = d.lead().inv().filter(|_| !d.is_zero()).ok_or(Error::DivisionByZero)?;
        let dd = d.c.len() - 1;
        if self.c.len() < d.c.len() {
            return Ok((Poly::zero(), self.clone()));
        }
        let scale = self.scale_norm().max(1e-300);
        let mut r = self.c.clone();
        let mut q = vec![F::zero(); self.c.len() - dd];
        for k in (0..q.len()).rev() {
            let coef = r[k + dd].clone() * dl.clone();
            for (j, dj) in d.c.iter().enumerate() {
                r[k + j] = r[k + j].clone() - coef.clone() * dj.clone();
            }
            r[k + dd] = F::zero();
            q[k] = coef;
        }
        r.truncate(dd);
        Ok((Poly::new(q), Poly::with_scale(r, scale)))
    }

    /// Quotient when `d` divides `self`; `None` otherwise.
    pub fn exact_div(&self, d: &Poly<F>) -> Option<Poly<F>> {
        let (q, r) = self.div_rem(d).ok()?;
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    pub fn gcd(&self, other: &Poly<F>) -> Result<Poly<F>> {
        if !F::EXACT {
            return Err(Error::ApproxBackendUnsupported);
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    pub fn lcm(&self, other: &Poly<F>) -> Result<Poly<F>> {
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero());
        }
        let g = self.gcd(other)?;
        let q = self.exact_div(&g).ok_or(Error::DivisionByZero)?;
        Ok((&q * other).monic())
    }

    /// Coefficientwise comparison with the backend tolerance, relative to the larger norm.
    pub fn approx_eq(&self, other: &Poly<F>) -> bool {
        let d = self - other;
        if F::EXACT {
            return d.is_zero();
        }
        let s = self.scale_norm().max(other.scale_norm()).max(1.0);
        d.c.iter().all(|a| a.negligible(s))
    }

    /// Largest coefficient of `self - other` relative to the larger norm.
    pub fn rel_diff(&self, other: &Poly<F>) -> f64 {
        let d = self - other;
        let s = self.scale_norm().max(other.scale_norm()).max(1e-300);
        d.scale_norm() / s
    }

    /// Yun square-free decomposition `p = c·∏ a_i^i` (exact backend).
    pub fn squarefree(&self) -> Result<Vec<(Poly<F>, usize)>> {
        if !F::EXACT {
            return Err(Error::ApproxBackendUnsupported);
        }
        let mut out = vec![];
        if self.deg() < 1 {
            return Ok(out);
        }
        let f = self.monic();
        let fp = f.deriv();
        let a0 = f.gcd(&fp)?;
        let mut b = f.exact_div(&a0).ok_or(Error::DivisionByZero)?;
        let c = fp.exact_div(&a0).ok_or(Error::DivisionByZero)?;
        let mut d = &c - &b.deriv();
        let mut i = 1;
        while b.deg() > 0 {
            let a = b.gcd(&d)?;
            b = b.exact_div(&a).ok_or(Error::DivisionByZero)?;
            let c = d.exact_div(&a).ok_or(Error::DivisionByZero)?;
            d = &c - &b.deriv();
            if a.deg() > 0 {
                out.push((a, i));
            }
            i += 1;
        }
        Ok(out)
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Poly<G> {
        Poly::new(self.c.iter().map(f).collect())
    }
}

impl<F: Field> fmt::Debug for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Field> fmt::Display for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() && F::EXACT {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}·x")?,
                _ => write!(f, "{a}·x^{k}")?,
            }
        }
        Ok(())
    }
}

impl<F: Field> PartialEq for Poly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

impl<'a, F: Field> Add<&'a Poly<F>> for &'a Poly<F> {
    type Output = Poly<F>;
    fn add(self, o: &Poly<F>) -> Poly<F> {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| self.coeff(k) + o.coeff(k)).collect();
        Poly::with_scale(c, self.scale_norm().max(o.scale_norm()))
    }
}

impl<'a, F: Field> Sub<&'a Poly<F>> for &'a Poly<F> {
    type Output = Poly<F>;
    fn sub(self, o: &Poly<F>) -> Poly<F> {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| self.coeff(k) - o.coeff(k)).collect();
        Poly::with_scale(c, self.scale_norm().max(o.scale_norm()))
    }
}

impl<'a, F: Field> Mul<&'a Poly<F>> for &'a Poly<F> {
    type Output = Poly<F>;
    fn mul(self, o: &Poly<F>) -> Poly<F> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![F::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if F::EXACT && a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::with_scale(c, self.scale_norm() * o.scale_norm())
    }
}

impl<F: Field> Neg for &Poly<F> {
    type Output = Poly<F>;
    fn neg(self) -> Poly<F> {
        Poly { c: self.c.iter().map(|a| -a.clone()).collect() }
    }
}

impl<F: Field> Add for Poly<F> {
    type Output = Poly<F>;
    fn add(self, o: Poly<F>) -> Poly<F> {
        &self + &o
    }
}
impl<F: Field> Sub for Poly<F> {
    type Output = Poly<F>;
    fn sub(self, o: Poly<F>) -> Poly<F> {
        &self - &o
    }
}
impl<F: Field> Mul for Poly<F> {
    type Output = Poly<F>;
    fn mul(self, o: Poly<F>) -> Poly<F> {
        &self * &o
    }
}

/// Binomial coefficient as a field element.
pub fn binomial<F: Field>(n: usize, k: usize) -> F {
    if k > n {
        return F::zero();
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    if acc <= i64::MAX as u128 {
        F::from_i64(acc as i64)
    } else {
        let mut r = F::one();
        for i in 0..k {
            r = r * F::from_usize(n - i) * F::from_usize(i + 1).inv().unwrap();
        }
        r
    }
}

pub fn factorial<F: Field>(n: usize) -> F {
    (1..=n).fold(F::one(), |acc, k| acc * F::from_usize(k))
}
