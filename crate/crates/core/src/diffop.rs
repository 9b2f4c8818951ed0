//! Linear differential operators `Σ A_ij x^i ∂^j` (x to the left).

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg;
use crate::poly::{binomial, Poly};
use crate::qp::{QuasiPoly, Var};
use crate::ratfn::RatFn;
use crate::spaces::{regularizing_factor, FunctionSpace, SpecialSpace};
use std::fmt;

/// Polynomial-coefficient operator; `coeffs[j]` multiplies `∂^j`.
#[derive(Clone)]
pub struct DiffOperator<F: Field> {
    coeffs: Vec<Poly<F>>,
    pub var: Var,
}

impl<F: Field> DiffOperator<F> {
    pub fn new(mut coeffs: Vec<Poly<F>>, var: Var) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        DiffOperator { coeffs, var }
    }

    pub fn from_table(entries: &[(usize, usize, F)], var: Var) -> Self {
        let jmax = entries.iter().map(|e| e.1).max().map_or(0, |j| j + 1);
        let mut cols: Vec<Vec<F>> = vec![vec![]; jmax];
        for (i, j, a) in entries {
            let c = &mut cols[*j];
            if c.len() <= *i {
                c.resize(i + 1, F::zero());
            }
            c[*i] = c[*i].clone() + a.clone();
        }
        DiffOperator::new(cols.into_iter().map(Poly::new).collect(), var)
    }

    /// Nonzero entries `(i, j, A_ij)` sorted by `(j, i)`.
    pub fn table(&self) -> Vec<(usize, usize, F)> {
        let mut out = vec![];
        for (j, p) in self.coeffs.iter().enumerate() {
            for (i, a) in p.coeffs().iter().enumerate() {
                if !a.is_zero() {
                    out.push((i, j, a.clone()));
                }
            }
        }
        out
    }

    pub fn coeffs(&self) -> &[Poly<F>] {
        &self.coeffs
    }
    pub fn coeff(&self, j: usize) -> Poly<F> {
        self.coeffs.get(j).cloned().unwrap_or_else(Poly::zero)
    }
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// Largest power of the variable.
    pub fn x_degree(&self) -> usize {
        self.coeffs.iter().map(|p| p.deg().max(0) as usize).max().unwrap_or(0)
    }

    pub fn apply(&self, f: &QuasiPoly<F>) -> QuasiPoly<F> {
        let mut acc = QuasiPoly::zero(f.var);
        let mut d = f.clone();
        for (j, a) in self.coeffs.iter().enumerate() {
            if j > 0 {
                d = d.deriv();
            }
            if !a.is_zero() {
                acc = acc.add(&d.mul_ratfn(&RatFn::from_poly(a.clone())));
            }
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        DiffOperator::new((0..n).map(|j| &self.coeff(j) + &o.coeff(j)).collect(), self.var)
    }

    pub fn scale(&self, a: &F) -> Self {
        DiffOperator::new(self.coeffs.iter().map(|p| p.scale(a)).collect(), self.var)
    }

    /// `self ∘ o`, using `∂^j b = Σ_l C(j,l) b^{(j-l)} ∂^l`.
    pub fn compose(&self, o: &Self) -> Self {
        let n = self.coeffs.len() + o.coeffs.len();
        let mut out = vec![Poly::zero(); n.max(1)];
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (k, b) in o.coeffs.iter().enumerate() {
                let mut db = b.clone();
                for t in 0..=j {
                    // t derivatives land on b, j - t on the function
                    if t > 0 {
                        db = db.deriv();
                    }
                    if db.is_zero() {
                        break;
                    }
                    let c: F = binomial(j, t);
                    out[j - t + k] = &out[j - t + k] + &(a * &db).scale(&c);
                }
            }
        }
        DiffOperator::new(out, self.var)
    }

    /// `Σ A_ij x^i ∂^j ↦ Σ A_ij u^j ∂_u^i`.
    pub fn bispectral_swap(&self) -> Self {
        let mut entries = vec![];
        for (i, j, a) in self.table() {
            entries.push((j, i, a));
        }
        DiffOperator::from_table(&entries, self.var.other())
    }

    /// `Σ_j (-∂)^j ∘ A_j(x)`.
    pub fn formal_conjugate(&self) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![Poly::zero(); n];
        for (j, a) in self.coeffs.iter().enumerate() {
            let sign = if j % 2 == 0 { F::one() } else { -F::one() };
            let mut da = a.clone();
            for t in 0..=j {
                if t > 0 {
                    da = da.deriv();
                }
                if da.is_zero() {
                    break;
                }
                let c: F = binomial(j, t);
                out[j - t] = &out[j - t] + &da.scale(&(c * sign.clone()));
            }
        }
        DiffOperator::new(out, self.var)
    }

    /// Divides by the entry with the largest `(i + j, i)`.
    pub fn normalize(&self) -> Self {
        let lead = self
            .table()
            .into_iter()
            .filter(|(_, _, a)| !a.negligible(self.max_abs()))
            .max_by_key(|(i, j, _)| (i + j, *i));
        match lead {
            Some((_, _, a)) => self.scale(&a.inv().unwrap()),
            None => self.clone(),
        }
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|p| p.scale_norm()).fold(0.0, f64::max)
    }

    /// Equal up to one nonzero scalar.
    pub fn eq_up_to_scalar(&self, o: &Self) -> bool {
        self.rel_distance(o) <= if F::EXACT { 0.0 } else { 1e-8 }
    }

    /// Largest entrywise difference after normalization, relative to the largest entry.
    pub fn rel_distance(&self, o: &Self) -> f64 {
        let (a, b) = (self.normalize(), o.normalize());
        let d = a.add(&b.scale(&-F::one()));
        if F::EXACT {
            return if d.is_zero() { 0.0 } else { f64::INFINITY };
        }
        d.max_abs() / a.max_abs().max(b.max_abs()).max(1e-300)
    }

    /// `B_k(∂)` in `D = Σ_k x^{M-k} B_k(∂)` with `M` the largest power of `x`.
    pub fn b_polys(&self) -> Vec<Poly<F>> {
        let m = self.x_degree();
        (0..=m).map(|k| Poly::new(self.coeffs.iter().map(|p| p.coeff(m - k)).collect())).collect()
    }
}

impl<F: Field> fmt::Debug for DiffOperator<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Field> fmt::Display for DiffOperator<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, p) in self.coeffs.iter().enumerate().rev() {
            if p.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({})", p)?;
            if j > 0 {
                write!(f, "·∂^{}", j)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl<F: Field> PartialEq for DiffOperator<F> {
    fn eq(&self, o: &Self) -> bool {
        let n = self.coeffs.len().max(o.coeffs.len());
        (0..n).all(|j| self.coeff(j).approx_eq(&o.coeff(j)))
    }
}

/// `∂^N + Ā_1 ∂^{N-1} + … + Ā_N`; `coeffs[i] = Ā_i`, `coeffs[0] = 1`.
#[derive(Clone, Debug)]
pub struct MonicOperator<F: Field> {
    pub coeffs: Vec<RatFn<F>>,
    pub var: Var,
}

impl<F: Field> MonicOperator<F> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn apply(&self, f: &QuasiPoly<F>) -> QuasiPoly<F> {
        let n = self.order();
        let mut acc = QuasiPoly::zero(f.var);
        let mut d = f.clone();
        for j in 0..=n {
            if j > 0 {
                d = d.deriv();
            }
            let a = &self.coeffs[n - j];
            if !a.is_zero() {
                acc = acc.add(&d.mul_ratfn(a));
            }
        }
        acc
    }

    /// `p · self` as a polynomial operator; fails if a pole survives.
    pub fn clear(&self, p: &Poly<F>) -> Result<DiffOperator<F>> {
        let n = self.order();
        let mut out = vec![Poly::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            out[n - i] = clear_ratfn(a, p)?;
        }
        Ok(DiffOperator::new(out, self.var))
    }

    /// Product of the distinct denominators (exact: their lcm).
    pub fn common_denominator(&self) -> Poly<F> {
        let mut dens: Vec<Poly<F>> = vec![];
        for a in &self.coeffs {
            if a.den().deg() > 0 && !dens.iter().any(|d| d.approx_eq(a.den())) {
                dens.push(a.den().clone());
            }
        }
        if F::EXACT {
            dens.iter().fold(Poly::one(), |acc, d| acc.lcm(d).unwrap())
        } else {
            dens.iter().fold(Poly::one(), |acc, d| &acc * d)
        }
    }

    /// Pole order of `Ā_i` at `z0` (0 if regular or zero).
    pub fn pole_order(&self, i: usize, z0: &F) -> i64 {
        self.coeffs[i].order_at(z0).map_or(0, |o| (-o).max(0))
    }
}

/// `p · r` as a polynomial, checking the remainder.
fn clear_ratfn<F: Field>(r: &RatFn<F>, p: &Poly<F>) -> Result<Poly<F>> {
    let prod = r.num() * p;
    let (q, rem) = prod.div_rem(r.den())?;
    let ok = if F::EXACT {
        rem.is_zero()
    } else {
        rem.scale_norm() <= 1e-7 * prod.scale_norm().max(q.scale_norm() * r.den().scale_norm())
    };
    if ok {
        Ok(q)
    } else {
        Err(Error::NotRegularizable(format!("({}) · ({}) keeps a pole", p, r)))
    }
}

/// `Ā_i = (-1)^i Wr_{V,i} / Wr_V`.
pub fn monic_fundamental<F: Field>(space: &FunctionSpace<F>) -> Result<MonicOperator<F>> {
    let sub = space.scaled_sub_wronskians();
    if sub[0].is_zero() {
        return Err(Error::DegenerateBasis);
    }
    let coeffs = sub
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let r = RatFn::new(w.clone(), sub[0].clone())?;
            Ok(if i % 2 == 1 { r.neg() } else { r })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonicOperator { coeffs, var: space.var })
}

/// `D_V = ∏ (x - z_a)^{M_a} D̄_V`, also returning the multiplier.
pub fn regularize<F: Field>(op: &MonicOperator<F>, space: &FunctionSpace<F>) -> Result<(DiffOperator<F>, Poly<F>)> {
    let factor = if F::EXACT {
        op.common_denominator()
    } else {
        regularizing_factor(&space.singular_points()?)
    };
    Ok((op.clear(&factor)?, factor))
}

/// The degree bullets for `D_V = x^M B_0(∂) + x^{M-1} B_1(∂) + …`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DegCoeffReport {
    /// `A_0 = ∏ (x - z_a)^{M_a}`
    pub leading_is_product: bool,
    pub max_degree: usize,
    pub m: usize,
    /// `B_0 = ∏ (∂ - λ_i)^{N_i}`
    pub b0_is_product: bool,
    /// `B_0, …, B_M` have no common factor
    pub coprime: bool,
}

impl DegCoeffReport {
    pub fn holds(&self) -> bool {
        self.leading_is_product && self.max_degree <= self.m && self.b0_is_product && self.coprime
    }
}

pub fn deg_coeff_check<F: Field>(space: &FunctionSpace<F>) -> Result<DegCoeffReport> {
    if !F::EXACT {
        return Err(Error::ApproxBackendUnsupported);
    }
    let (d, _) = regularize(&monic_fundamental(space)?, space)?;
    let product = regularizing_factor(&space.singular_points()?);
    let m = product.deg().max(0) as usize;
    let n = d.order();
    let b0_want = space
        .lambdas()
        .iter()
        .fold(Poly::one(), |acc, (l, k)| &acc * &Poly::linear_root(l).pow(*k));
    let bs = d.b_polys();
    let mut g = Poly::zero();
    for b in &bs {
        g = g.gcd(b)?;
    }
    Ok(DegCoeffReport {
        leading_is_product: d.coeff(n) == product,
        max_degree: d.x_degree(),
        m,
        b0_is_product: d.x_degree() == m && bs[0] == b0_want,
        coprime: g.deg() == 0,
    })
}

/// `D̃_V = ∏_a (x - z_a) D̄_V`.
pub fn special_fundamental<F: Field>(special: &SpecialSpace<F>) -> Result<DiffOperator<F>> {
    let op = monic_fundamental(&special.space)?;
    let p = special.z.iter().fold(Poly::one(), |acc, z| &acc * &Poly::linear_root(z));
    op.clear(&p)
}

/// `ln'(g)` for `g = c · ∏ (x - z)^k e^{λx}` given as a rational function and exponent.
fn log_derivative<F: Field>(r: &RatFn<F>, lambda: &F) -> Result<RatFn<F>> {
    Ok(r.deriv().div(r)?.add(&RatFn::constant(lambda.clone())))
}

/// `(∂ - ln'(y_0 e^{λ_1 x}/y_1)) ⋯ (∂ - ln'(y_{N-1} e^{λ_N x}))` with
/// `y_0 = ∏ (x - z_a)^{m_a}` and `y_N = 1`.
pub fn factorized_from_tuple<F: Field>(
    y: &[Poly<F>],
    lambda: &[F],
    z: &[F],
    m: &[usize],
    var: Var,
) -> Result<MonicOperator<F>> {
    let n = lambda.len();
    if y.len() + 1 != n || z.len() != m.len() {
        return Err(Error::NonAdmissibleTuple("tuple length must be N - 1".into()));
    }
    if y.iter().any(|p| p.is_zero()) {
        return Err(Error::NonAdmissibleTuple("zero polynomial in tuple".into()));
    }
    let y0 = z.iter().zip(m).fold(Poly::one(), |acc, (za, &ma)| &acc * &Poly::linear_root(za).pow(ma));
    let mut ys = vec![y0];
    ys.extend(y.iter().cloned());
    ys.push(Poly::one());
    let gs = (0..n)
        .map(|i| {
            let r = RatFn::new(ys[i].clone(), ys[i + 1].clone())?;
            log_derivative(&r, &lambda[i])
        })
        .collect::<Result<Vec<_>>>()?;
    // L stored lowest order first; build from the rightmost factor
    let mut l: Vec<RatFn<F>> = vec![RatFn::one()];
    for g in gs.iter().rev() {
        let k = l.len();
        let mut next = vec![RatFn::zero(); k + 1];
        for j in 0..=k {
            let mut acc = RatFn::zero();
            if j > 0 {
                acc = acc.add(&l[j - 1]);
            }
            if j < k {
                acc = acc.add(&l[j].deriv()).sub(&g.mul(&l[j]));
            }
            next[j] = acc;
        }
        l = next;
    }
    l.reverse();
    Ok(MonicOperator { coeffs: l, var })
}

/// `φ_ij` of an N = M = 2 special operator:
/// `D - (x-z1)(x-z2)(∂-λ1)(∂-λ2) = Σ φ_ij (x - z_i)(∂ - λ_j)`.
pub fn extract_phi<F: Field>(op: &DiffOperator<F>, lambda: &[F; 2], z: &[F; 2]) -> Result<[[F; 2]; 2]> {
    let var = op.var;
    let xz = |a: &F| DiffOperator::new(vec![Poly::linear_root(a)], var);
    let dl = |l: &F| DiffOperator::new(vec![Poly::constant(-l.clone()), Poly::one()], var);
    let base = xz(&z[0]).compose(&xz(&z[1])).compose(&dl(&lambda[0])).compose(&dl(&lambda[1]));
    // leading coefficient of op fixes the scale
    let lead = op.coeff(2).coeff(2);
    let op = op.scale(&lead.inv().ok_or(Error::NotInPhiForm(f64::INFINITY))?);
    let rest = op.add(&base.scale(&-F::one()));
    let basis = [
        xz(&z[0]).compose(&dl(&lambda[0])),
        xz(&z[0]).compose(&dl(&lambda[1])),
        xz(&z[1]).compose(&dl(&lambda[0])),
        xz(&z[1]).compose(&dl(&lambda[1])),
    ];
    // equations: entries x^i ∂^j for i ≤ 2, j ≤ 2
    let mut rows = vec![];
    let mut rhs = vec![];
    for i in 0..=2 {
        for j in 0..=2 {
            rows.push(basis.iter().map(|b| b.coeff(j).coeff(i)).collect::<Vec<F>>());
            rhs.push(rest.coeff(j).coeff(i));
        }
    }
    let extra = rest.table().into_iter().any(|(i, j, a)| (i > 2 || j > 2) && !a.negligible(op.max_abs()));
    if extra {
        return Err(Error::NotInPhiForm(f64::INFINITY));
    }
    let sol = if F::EXACT {
        linalg::solve(&rows, &rhs).ok_or(Error::NotInPhiForm(f64::INFINITY))?
    } else {
        least_squares(&rows, &rhs)
    };
    let mut res = 0.0f64;
    let scale = op.max_abs().max(1.0);
    for (row, b) in rows.iter().zip(&rhs) {
        let lhs = row.iter().zip(&sol).fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone());
        res = res.max((lhs - b.clone()).abs() / scale);
    }
    if (F::EXACT && res > 0.0) || res > 1e-8 {
        return Err(Error::NotInPhiForm(res));
    }
    Ok([[sol[0].clone(), sol[1].clone()], [sol[2].clone(), sol[3].clone()]])
}

/// Normal equations solve for a small full-rank system.
fn least_squares<F: Field>(a: &[Vec<F>], b: &[F]) -> Vec<F> {
    let n = a[0].len();
    let conj = |x: &F| F::from_c64(x.to_c64().conj());
    let ata: Vec<Vec<F>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a.iter().fold(F::zero(), |acc, r| acc + conj(&r[i]) * r[j].clone()))
                .collect()
        })
        .collect();
    let atb: Vec<F> = (0..n).map(|i| a.iter().zip(b).fold(F::zero(), |acc, (r, bi)| acc + conj(&r[i]) * bi.clone())).collect();
    linalg::solve(&ata, &atb).unwrap_or_else(|| vec![F::zero(); n])
}
