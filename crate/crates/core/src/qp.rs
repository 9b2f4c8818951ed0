//! Quasi-polynomials `Σ r_k(x) e^{λ_k x}` with rational-function coefficients.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::laurent::LaurentSeries;
use crate::poly::Poly;
use crate::ratfn::RatFn;
use num::complex::Complex64;
use std::fmt;

/// Variable tag; the transform maps functions of `x` to functions of `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    U,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::U,
            Var::U => Var::X,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::X => "x",
            Var::U => "u",
        })
    }
}

#[derive(Clone)]
pub struct QuasiPoly<F: Field> {
    /// Sorted by exponent, no duplicate exponents, no zero coefficients.
    terms: Vec<(F, RatFn<F>)>,
    pub var: Var,
}

impl<F: Field> QuasiPoly<F> {
    pub fn new(terms: Vec<(F, RatFn<F>)>, var: Var) -> Self {
        let mut out: Vec<(F, RatFn<F>)> = Vec::with_capacity(terms.len());
        for (l, r) in terms {
            if let Some(slot) = out.iter_mut().find(|(m, _)| m.approx_eq(&l)) {
                slot.1 = slot.1.add(&r);
            } else {
                out.push((l, r));
            }
        }
        out.retain(|(_, r)| !r.is_zero());
        out.sort_by(|a, b| a.0.key_cmp(&b.0));
        QuasiPoly { terms: out, var }
    }

    pub fn zero(var: Var) -> Self {
        QuasiPoly { terms: vec![], var }
    }

    /// `r(x) e^{λx}`
    pub fn term(lambda: F, r: RatFn<F>, var: Var) -> Self {
        QuasiPoly::new(vec![(lambda, r)], var)
    }

    /// `p(x) e^{λx}`
    pub fn poly_exp(p: Poly<F>, lambda: F, var: Var) -> Self {
        QuasiPoly::term(lambda, RatFn::from_poly(p), var)
    }

    pub fn terms(&self) -> &[(F, RatFn<F>)] {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn exponents(&self) -> Vec<F> {
        self.terms.iter().map(|(l, _)| l.clone()).collect()
    }
    /// The single exponential of a one-term function.
    pub fn single(&self) -> Option<(&F, &RatFn<F>)> {
        match self.terms.as_slice() {
            [(l, r)] => Some((l, r)),
            _ => None,
        }
    }
    /// Coefficient of `e^{λx}`.
    pub fn coeff_of(&self, lambda: &F) -> RatFn<F> {
        self.terms
            .iter()
            .find(|(l, _)| l.approx_eq(lambda))
            .map(|(_, r)| r.clone())
            .unwrap_or_else(RatFn::zero)
    }

    pub fn deriv(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(l, r)| (l.clone(), r.deriv().add(&r.scale(l))))
            .collect();
        QuasiPoly::new(terms, self.var)
    }

    pub fn deriv_n(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |f, _| f.deriv())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        QuasiPoly::new(t, self.var)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-F::one()))
    }

    pub fn scale(&self, a: &F) -> Self {
        QuasiPoly::new(self.terms.iter().map(|(l, r)| (l.clone(), r.scale(a))).collect(), self.var)
    }

    pub fn mul_ratfn(&self, g: &RatFn<F>) -> Self {
        QuasiPoly::new(self.terms.iter().map(|(l, r)| (l.clone(), r.mul(g))).collect(), self.var)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut t = vec![];
        for (l1, r1) in &self.terms {
            for (l2, r2) in &o.terms {
                t.push((l1.clone() + l2.clone(), r1.mul(r2)));
            }
        }
        QuasiPoly::new(t, self.var)
    }

    pub fn div_ratfn(&self, g: &RatFn<F>) -> Result<Self> {
        let gi = g.inv()?;
        Ok(self.mul_ratfn(&gi))
    }

    /// Reciprocal of a single-term function.
    pub fn recip(&self) -> Result<Self> {
        let (l, r) = self.single().ok_or_else(|| Error::InvalidInput("reciprocal of a multi-term function".into()))?;
        Ok(QuasiPoly::term(-l.clone(), r.inv()?, self.var))
    }

    pub fn eval_c64(&self, x: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, r) in &self.terms {
            acc += r.eval_c64(x)? * (l.to_c64() * x).exp();
        }
        Ok(acc)
    }

    /// Laurent expansion at `z0` through order `hi`. Each `e^{λx}` is written as
    /// `e^{λ z0} e^{λ(x - z0)}`; the constant is carried on the series. Terms with
    /// different constants cannot be summed exactly.
    pub fn expand_at(&self, z0: &F, hi: i64) -> Result<LaurentSeries<F>> {
        let mut acc: Option<LaurentSeries<F>> = None;
        for (l, r) in &self.terms {
            let s = r.laurent(z0, l, hi)?;
            acc = Some(match acc {
                None => s,
                Some(a) => a.add(&s)?,
            });
        }
        Ok(acc.unwrap_or(LaurentSeries { point: z0.clone(), prefactor: F::zero(), order: hi + 1, coeffs: vec![] }))
    }

    pub fn approx_eq(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Result<QuasiPoly<G>> {
        let mut t = vec![];
        for (l, r) in &self.terms {
            t.push((f(l), RatFn::new(r.num().map(&f), r.den().map(&f))?));
        }
        Ok(QuasiPoly::new(t, self.var))
    }
}

impl<F: Field> fmt::Debug for QuasiPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Field> fmt::Display for QuasiPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (l, r)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if l.is_zero() {
                write!(f, "[{}]", r)?;
            } else {
                write!(f, "[{}]·e^({}·{})", r, l, self.var)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Exact;

    fn e(n: i64) -> Exact {
        Exact::from_i64(n)
    }

    #[test]
    fn product_rule() {
        let f = QuasiPoly::poly_exp(Poly::x(), e(1), Var::X);
        let want = QuasiPoly::poly_exp(Poly::from_i64(&[1, 1]), e(1), Var::X);
        assert!(f.deriv().approx_eq(&want));
    }

    #[test]
    fn exponential_derivative() {
        let l = Exact::from_frac(3, 7);
        let f = QuasiPoly::poly_exp(Poly::one(), l.clone(), Var::X);
        assert!(f.deriv().approx_eq(&f.scale(&l)));
    }

    #[test]
    fn second_derivative_of_square() {
        let f = QuasiPoly::poly_exp(Poly::from_i64(&[0, 0, 1]), e(0), Var::X);
        assert!(f.deriv_n(2).approx_eq(&QuasiPoly::poly_exp(Poly::from_i64(&[2]), e(0), Var::X)));
    }

    #[test]
    fn like_terms_merge_and_cancel() {
        let f = QuasiPoly::poly_exp(Poly::x(), e(2), Var::X);
        assert!(f.sub(&f).is_zero());
        assert_eq!(f.add(&f).terms().len(), 1);
    }

    #[test]
    fn expansion_at_zero_sums_terms() {
        // e^x - 1 has order 1 at 0
        let f = QuasiPoly::poly_exp(Poly::one(), e(1), Var::X)
            .sub(&QuasiPoly::poly_exp(Poly::one(), e(0), Var::X));
        let s = f.expand_at(&e(0), 3).unwrap();
        assert_eq!(s.order, 1);
        assert_eq!(s.coeffs[0], e(1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn qp() -> impl Strategy<Value = QuasiPoly<Exact>> {
            (proptest::collection::vec(-3i64..4, 1..4), -2i64..3, proptest::collection::vec(-3i64..4, 0..3))
                .prop_map(|(c, l, d)| {
                    let mut den = Poly::from_i64(&d);
                    if den.is_zero() {
                        den = Poly::one();
                    }
                    QuasiPoly::term(e(l), RatFn::new(Poly::from_i64(&c), den).unwrap(), Var::X)
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]
            #[test]
            fn expansion_is_multiplicative(f in qp(), g in qp()) {
                prop_assume!(!f.is_zero() && !g.is_zero());
                let z = e(0);
                let hi = 5;
                let a = f.expand_at(&z, hi).unwrap();
                let b = g.expand_at(&z, hi).unwrap();
                let fg = f.mul(&g).expand_at(&z, hi).unwrap();
                let ab = a.mul(&b);
                prop_assert_eq!(ab.order, fg.order);
                for k in ab.order..=ab.hi().min(fg.hi()) {
                    prop_assert_eq!(ab.coeff(k), fg.coeff(k));
                }
            }

            #[test]
            fn expansion_commutes_with_derivative(f in qp()) {
                prop_assume!(!f.is_zero());
                let z = e(1);
                let hi = 5;
                let df = f.deriv();
                let termwise = f.expand_at(&z, hi).unwrap().deriv();
                if df.is_zero() {
                    prop_assert!(termwise.is_zero());
                } else {
                    let s = df.expand_at(&z, hi).unwrap();
                    prop_assert!(s.prefactor == termwise.prefactor);
                    for k in s.order.min(termwise.order)..=s.hi().min(termwise.hi()) {
                        prop_assert_eq!(s.coeff(k), termwise.coeff(k));
                    }
                }
            }
        }
    }
}
