//! Truncated Laurent series at a finite point.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::Poly;

/// `e^{prefactor} · Σ_{k=order}^{order+len-1} coeffs[k-order] (x - point)^k`.
///
/// An empty coefficient list means the function vanishes through the
/// computed window; `order` is then a lower bound.
#[derive(Clone, Debug)]
pub struct LaurentSeries<F: Field> {
    pub point: F,
    pub prefactor: F,
    pub order: i64,
    pub coeffs: Vec<F>,
}

impl<F: Field> LaurentSeries<F> {
    /// Highest order covered by the window.
    pub fn hi(&self) -> i64 {
        self.order + self.coeffs.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i64) -> F {
        if k < self.order {
            return F::zero();
        }
        self.coeffs.get((k - self.order) as usize).cloned().unwrap_or_else(F::zero)
    }

    /// Expansion of `num/den · e^{mu(x-z0)}` at `z0` through order `hi`, with prefactor `mu·z0`.
    pub fn of_ratfn(num: &Poly<F>, den: &Poly<F>, z0: &F, mu: &F, hi: i64) -> Result<Self> {
        let prefactor = mu.clone() * z0.clone();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ds = den.shift(z0);
        let dscale = ds.scale_norm();
        let vd = ds
            .coeffs()
            .iter()
            .position(|c| !c.negligible(dscale))
            .ok_or(Error::DivisionByZero)?;
        let ns = num.shift(z0);
        let nscale = ns.scale_norm();
        let vn = match ns.coeffs().iter().position(|c| !c.negligible(nscale)) {
            Some(v) => v,
            None => {
                return Ok(LaurentSeries { point: z0.clone(), prefactor, order: hi + 1, coeffs: vec![] })
            }
        };
        let order = vn as i64 - vd as i64;
        let len = (hi - order + 1).max(0) as usize;
        let a: Vec<F> = ns.coeffs()[vn..].to_vec();
        let b: Vec<F> = ds.coeffs()[vd..].to_vec();
        let b0inv = b[0].inv().ok_or(Error::DivisionByZero)?;
        let mut q: Vec<F> = Vec::with_capacity(len);
        for k in 0..len {
            let mut acc = a.get(k).cloned().unwrap_or_else(F::zero);
            for j in 1..=k.min(b.len() - 1) {
                acc = acc - b[j].clone() * q[k - j].clone();
            }
            q.push(acc * b0inv.clone());
        }
        let out = if mu.is_zero() {
            q
        } else {
            let mut e = Vec::with_capacity(len);
            let mut t = F::one();
            for k in 0..len {
                if k > 0 {
                    t = t * mu.clone() * F::from_usize(k).inv().unwrap();
                }
                e.push(t.clone());
            }
            (0..len)
                .map(|k| (0..=k).fold(F::zero(), |acc, j| acc + q[j].clone() * e[k - j].clone()))
                .collect()
        };
        Ok(LaurentSeries { point: z0.clone(), prefactor, order, coeffs: out })
    }

    /// Product; the window is the overlap of the two windows shifted by the orders.
    pub fn mul(&self, o: &LaurentSeries<F>) -> LaurentSeries<F> {
        let order = self.order + o.order;
        let len = self.coeffs.len().min(o.coeffs.len());
        let coeffs = (0..len)
            .map(|k| (0..=k).fold(F::zero(), |acc, j| acc + self.coeffs[j].clone() * o.coeffs[k - j].clone()))
            .collect();
        LaurentSeries {
            point: self.point.clone(),
            prefactor: self.prefactor.clone() + o.prefactor.clone(),
            order,
            coeffs,
        }
    }

    /// Termwise derivative.
    pub fn deriv(&self) -> LaurentSeries<F> {
        let coeffs: Vec<F> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.clone() * F::from_i64(self.order + i as i64))
            .collect();
        let mut s = LaurentSeries {
            point: self.point.clone(),
            prefactor: self.prefactor.clone(),
            order: self.order - 1,
            coeffs,
        };
        s.normalize();
        s
    }

    /// Sum of two series at the same point; prefactors must agree (exact) or are folded in (approx).
    pub fn add(&self, o: &LaurentSeries<F>) -> Result<LaurentSeries<F>> {
        let (a, b) = if self.prefactor.approx_eq(&o.prefactor) {
            (self.clone(), o.clone())
        } else if F::EXACT {
            return Err(Error::InvalidInput(
                "exact sum of expansions with different exponential prefactors".into(),
            ));
        } else {
            (self.fold_prefactor()?, o.fold_prefactor()?)
        };
        let order = a.order.min(b.order);
        let hi = a.hi().min(b.hi());
        let coeffs = (order..=hi).map(|k| a.coeff(k) + b.coeff(k)).collect();
        let mut s = LaurentSeries { point: a.point.clone(), prefactor: a.prefactor.clone(), order, coeffs };
        s.normalize();
        Ok(s)
    }

    /// Multiplies the numeric value of `e^{prefactor}` into the coefficients (approx only).
    pub fn fold_prefactor(&self) -> Result<LaurentSeries<F>> {
        let e = self.prefactor.exp().ok_or(Error::ApproxBackendUnsupported)?;
        Ok(LaurentSeries {
            point: self.point.clone(),
            prefactor: F::zero(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.clone() * e.clone()).collect(),
        })
    }

    /// Strips leading zero coefficients so `coeffs[0]` is nonzero.
    pub fn normalize(&mut self) {
        let scale = self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let lead = self.coeffs.iter().position(|c| !c.negligible(scale));
        match lead {
            Some(k) => {
                self.coeffs.drain(..k);
                self.order += k as i64;
            }
            None => {
                self.order += self.coeffs.len() as i64;
                self.coeffs.clear();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Approx, Exact};

    fn p(c: &[i64]) -> Poly<Exact> {
        Poly::from_i64(c)
    }

    #[test]
    fn simple_pole() {
        let z = Exact::from_i64(3);
        let s = LaurentSeries::of_ratfn(&Poly::one(), &p(&[-3, 1]), &z, &Exact::zero(), 1).unwrap();
        assert_eq!(s.order, -1);
        assert_eq!(s.coeffs, vec![Exact::one(), Exact::zero(), Exact::zero()]);
    }

    #[test]
    fn exponential_series() {
        let s = LaurentSeries::of_ratfn(&Poly::one(), &Poly::one(), &Exact::zero(), &Exact::one(), 2).unwrap();
        assert_eq!(s.order, 0);
        assert_eq!(s.coeffs, vec![Exact::one(), Exact::one(), Exact::from_frac(1, 2)]);
    }

    #[test]
    fn shifted_exponential_keeps_prefactor() {
        // (x+1)e^x at -1: order 1, leading coefficient e^{-1}
        let z = Exact::from_i64(-1);
        let s = LaurentSeries::of_ratfn(&p(&[1, 1]), &Poly::one(), &z, &Exact::one(), 1).unwrap();
        assert_eq!(s.order, 1);
        assert_eq!(s.coeffs[0], Exact::one());
        assert_eq!(s.prefactor, Exact::from_i64(-1));
        let a = LaurentSeries::of_ratfn(
            &Poly::<Approx>::from_i64(&[1, 1]),
            &Poly::one(),
            &Approx::new(-1.0, 0.0),
            &Approx::new(1.0, 0.0),
            1,
        )
        .unwrap()
        .fold_prefactor()
        .unwrap();
        assert!((a.coeffs[0].v.re - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn add_rejects_distinct_exact_prefactors() {
        let z = Exact::one();
        let a = LaurentSeries::of_ratfn(&Poly::one(), &Poly::one(), &z, &Exact::one(), 2).unwrap();
        let b = LaurentSeries::of_ratfn(&Poly::one(), &Poly::one(), &z, &Exact::zero(), 2).unwrap();
        assert!(a.add(&b).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_poly() -> impl Strategy<Value = Poly<Exact>> {
            proptest::collection::vec(-4i64..5, 1..4).prop_map(|c| Poly::from_i64(&c))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn product_rule(a in small_poly(), b in small_poly(), c in small_poly(), d in small_poly(), z in -3i64..3) {
                prop_assume!(!a.is_zero() && !c.is_zero() && !b.is_zero() && !d.is_zero());
                let z = Exact::from_i64(z);
                let mu = Exact::from_frac(1, 2);
                let hi = 6;
                let f = LaurentSeries::of_ratfn(&a, &b, &z, &mu, hi).unwrap();
                let g = LaurentSeries::of_ratfn(&c, &d, &z, &Exact::zero(), hi).unwrap();
                let fg = LaurentSeries::of_ratfn(&(&a * &c), &(&b * &d), &z, &mu, hi).unwrap();
                let prod = f.mul(&g);
                prop_assert_eq!(prod.order, fg.order);
                for k in prod.order..=prod.hi().min(fg.hi()) {
                    prop_assert_eq!(prod.coeff(k), fg.coeff(k));
                }
            }

            #[test]
            fn derivative_commutes(a in small_poly(), b in small_poly(), z in -3i64..3) {
                prop_assume!(!a.is_zero() && !b.is_zero());
                let z = Exact::from_i64(z);
                let hi = 5;
                let f = LaurentSeries::of_ratfn(&a, &b, &z, &Exact::zero(), hi).unwrap();
                let n = &(&a.deriv() * &b) - &(&a * &b.deriv());
                let df = LaurentSeries::of_ratfn(&n, &(&b * &b), &z, &Exact::zero(), hi).unwrap();
                let termwise = f.deriv();
                for k in (termwise.order.min(df.order))..=termwise.hi().min(df.hi()) {
                    prop_assert_eq!(termwise.coeff(k), df.coeff(k));
                }
            }
        }
    }
}
