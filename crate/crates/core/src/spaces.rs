//! Finite-dimensional spaces of quasi-polynomials.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::qp::{QuasiPoly, Var};
use crate::ratfn::RatFn;
use crate::roots::{poly_roots, RootValue};
use std::collections::HashMap;
use std::sync::OnceLock;

/// Attainable orders of a space at a point, strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exponents(pub Vec<i64>);

impl Exponents {
    pub fn trivial(n: usize) -> Self {
        Exponents((0..n as i64).collect())
    }
    pub fn is_trivial(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &e)| e == i as i64)
    }
    /// Number of trailing exponents that leave the pattern `e_i = i - 1`.
    pub fn defect_count(&self) -> usize {
        let prefix = self.0.iter().enumerate().take_while(|(i, &e)| e == *i as i64).count();
        self.0.len() - prefix
    }
    /// Sum of `e_i - (i - 1)`; the order of the Wronskian at the point.
    pub fn excess(&self) -> i64 {
        self.0.iter().enumerate().map(|(i, &e)| e - i as i64).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SingularPoint<F: Field> {
    pub point: F,
    pub exponents: Exponents,
}

/// Span of quasi-polynomials; every stored basis element carries one exponential.
#[derive(Clone, Debug)]
pub struct FunctionSpace<F: Field> {
    basis: Vec<QuasiPoly<F>>,
    pub var: Var,
    wronskian: OnceLock<Result<QuasiPoly<F>>>,
}

/// Per basis element: numerator `a`, denominator `b`, exponent `λ`.
struct Column<F: Field> {
    den: Poly<F>,
    lambda: F,
    /// `P_j` with `(r e^{λx})^{(j)} = P_j / b^{j+1} · e^{λx}`.
    derivs: Vec<Poly<F>>,
}

fn columns<F: Field>(basis: &[QuasiPoly<F>], upto: usize) -> Vec<Column<F>> {
    basis
        .iter()
        .map(|f| {
            let (l, r) = f.single().expect("graded basis");
            let b = r.den().clone();
            let db = b.deriv();
            let mut derivs = vec![r.num().clone()];
            for j in 0..upto {
                let p = &derivs[j];
                let next = &(&(&p.deriv() * &b) - &(&p.scale(&F::from_usize(j + 1)) * &db)) + &(p * &b).scale(l);
                derivs.push(next);
            }
            Column { den: b, lambda: l.clone(), derivs }
        })
        .collect()
}

/// Determinants of the submatrices on `rows` and each requested column subset,
/// after scaling column `k` by `b_k^e` so that entries are polynomials.
fn minors<F: Field>(cols: &[Column<F>], rows: &[usize], e: usize, masks: &[u64]) -> Vec<Poly<F>> {
    let entry = |k: usize, j: usize| -> Poly<F> {
        let c = &cols[k];
        &c.derivs[j] * &c.den.pow(e - j - 1)
    };
    let mut cache: HashMap<(usize, usize), Poly<F>> = HashMap::new();
    let mut memo: HashMap<u64, Poly<F>> = HashMap::new();
    memo.insert(0, Poly::one());
    fn go<F: Field>(
        mask: u64,
        rows: &[usize],
        memo: &mut HashMap<u64, Poly<F>>,
        ent: &mut dyn FnMut(usize, usize) -> Poly<F>,
    ) -> Poly<F> {
        if let Some(p) = memo.get(&mask) {
            return p.clone();
        }
        let s = mask.count_ones() as usize;
        let row = rows[s - 1];
        let mut acc = Poly::zero();
        let mut pos = 0;
        for k in 0..64 {
            if mask & (1 << k) == 0 {
                continue;
            }
            let sub = go(mask & !(1 << k), rows, memo, ent);
            if !sub.is_zero() {
                let t = &ent(k, row) * &sub;
                acc = if (s - 1 + pos) % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            pos += 1;
        }
        memo.insert(mask, acc.clone());
        acc
    }
    let mut ent = |k: usize, j: usize| cache.entry((k, j)).or_insert_with(|| entry(k, j)).clone();
    masks.iter().map(|&m| go(m, rows, &mut memo, &mut ent)).collect()
}

fn full_mask(n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        (1u64 << n) - 1
    }
}

impl<F: Field> FunctionSpace<F> {
    /// Builds the span of `funcs`, regrading it into single-exponential elements.
    pub fn new(funcs: Vec<QuasiPoly<F>>, var: Var) -> Result<Self> {
        if funcs.is_empty() {
            return Ok(FunctionSpace { basis: vec![], var, wronskian: OnceLock::new() });
        }
        if funcs.iter().any(|f| f.is_zero()) {
            return Err(Error::DegenerateBasis);
        }
        let n = funcs.len();
        let basis = if funcs.iter().all(|f| f.single().is_some()) {
            funcs
        } else {
            let mut lambdas: Vec<F> = vec![];
            for f in &funcs {
                for l in f.exponents() {
                    if !lambdas.iter().any(|m| m.approx_eq(&l)) {
                        lambdas.push(l);
                    }
                }
            }
            lambdas.sort_by(|a, b| a.key_cmp(b));
            let mut out = vec![];
            for l in &lambdas {
                let comps: Vec<QuasiPoly<F>> = funcs
                    .iter()
                    .map(|f| QuasiPoly::term(l.clone(), f.coeff_of(l), var))
                    .filter(|g| !g.is_zero())
                    .collect();
                let mut chosen: Vec<QuasiPoly<F>> = vec![];
                for c in comps {
                    let mut trial = chosen.clone();
                    trial.push(c);
                    if linalg::rank(&coefficient_matrix(&trial)) == trial.len() {
                        chosen = trial;
                    }
                }
                out.extend(chosen);
            }
            if out.len() > n {
                return Err(Error::NotGraded);
            }
            if out.len() < n {
                return Err(Error::DegenerateBasis);
            }
            out
        };
        let s = FunctionSpace { basis, var, wronskian: OnceLock::new() };
        s.wronskian()?;
        Ok(s)
    }

    pub fn basis(&self) -> &[QuasiPoly<F>] {
        &self.basis
    }
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Distinct exponentials with multiplicities `N_i`, sorted.
    pub fn lambdas(&self) -> Vec<(F, usize)> {
        let mut out: Vec<(F, usize)> = vec![];
        for f in &self.basis {
            let l = f.single().unwrap().0;
            match out.iter_mut().find(|(m, _)| m.approx_eq(l)) {
                Some(slot) => slot.1 += 1,
                None => out.push((l.clone(), 1)),
            }
        }
        out.sort_by(|a, b| a.0.key_cmp(&b.0));
        out
    }

    /// Distinct degrees of the polynomial parts attached to each exponential.
    pub fn degrees(&self) -> Result<Vec<(F, Vec<usize>)>> {
        let mut out = vec![];
        for (l, _) in self.lambdas() {
            let polys: Vec<Poly<F>> = self
                .basis
                .iter()
                .filter_map(|f| f.single())
                .filter(|(m, _)| m.approx_eq(&l))
                .map(|(_, r)| r.as_poly().ok_or(Error::NonPolynomialCoefficients))
                .collect::<Result<_>>()?;
            let width = polys.iter().map(|p| p.deg().max(0) as usize + 1).max().unwrap_or(1);
            let rows: Matrix<F> = polys.iter().map(|p| (0..width).rev().map(|k| p.coeff(k)).collect()).collect();
            let mut degs: Vec<usize> = linalg::rref(&rows).1.into_iter().map(|c| width - 1 - c).collect();
            degs.sort();
            out.push((l, degs));
        }
        Ok(out)
    }

    /// Both sides of `Σ_{a,b} (m_{ab} + 1 - b) = Σ_{i,j} (n_{ij} + 1 - j)`: the Wronskian
    /// order summed over singular points, and the degree count of the graded basis.
    pub fn wronskian_degree_sides(&self) -> Result<(i64, i64)> {
        let lhs = self.singular_points()?.iter().map(|s| s.exponents.excess()).sum();
        let rhs = self
            .degrees()?
            .iter()
            .flat_map(|(_, d)| d.iter().enumerate().map(|(j, &n)| n as i64 - j as i64))
            .sum();
        Ok((lhs, rhs))
    }

    /// All coefficients are polynomials.
    pub fn is_polynomial(&self) -> bool {
        self.basis.iter().all(|f| f.single().unwrap().1.is_polynomial())
    }

    pub fn wronskian(&self) -> Result<QuasiPoly<F>> {
        self.wronskian
            .get_or_init(|| {
                let n = self.dim();
                if n == 0 {
                    return Ok(QuasiPoly::poly_exp(Poly::one(), F::zero(), self.var));
                }
                let cols = columns(&self.basis, n);
                let rows: Vec<usize> = (0..n).collect();
                let det = minors(&cols, &rows, n, &[full_mask(n)]).remove(0);
                if det.is_zero() {
                    return Err(Error::DegenerateBasis);
                }
                let den = cols.iter().fold(Poly::one(), |acc, c| &acc * &c.den.pow(n));
                let lam = cols.iter().fold(F::zero(), |acc, c| acc + c.lambda.clone());
                Ok(QuasiPoly::term(lam, RatFn::new(det, den)?, self.var))
            })
            .clone()
    }

    /// Rational part of the Wronskian.
    pub fn wronskian_ratfn(&self) -> Result<RatFn<F>> {
        Ok(self.wronskian()?.single().map(|(_, r)| r.clone()).unwrap_or_else(RatFn::one))
    }

    /// `Wr_{V,i}` for i = 0..=N: derivative rows `0..=N` with row `N - i` removed,
    /// all scaled by the same column factors (which cancel in ratios).
    pub(crate) fn scaled_sub_wronskians(&self) -> Vec<Poly<F>> {
        let n = self.dim();
        let cols = columns(&self.basis, n);
        (0..=n)
            .map(|i| {
                let rows: Vec<usize> = (0..=n).filter(|&r| r != n - i).collect();
                minors(&cols, &rows, n + 1, &[full_mask(n)]).remove(0)
            })
            .collect()
    }

    /// Laurent data of each basis element at `z0`, with exponential constants dropped.
    pub fn exponents_at(&self, z0: &F) -> Result<Exponents> {
        let n = self.dim();
        if n == 0 {
            return Ok(Exponents(vec![]));
        }
        let wr = self.wronskian_ratfn()?;
        let pole = self
            .basis
            .iter()
            .map(|f| -f.single().unwrap().1.order_at(z0).unwrap_or(0))
            .max()
            .unwrap_or(0)
            .max(0);
        let mut k = n as i64 + pole + wr.num().deg().max(0) as i64 + wr.den().deg().max(0) as i64 + 2;
        for _ in 0..6 {
            let lo = -pole;
            let hi = lo + k;
            let rows: Vec<Vec<F>> = self
                .basis
                .iter()
                .map(|f| {
                    let (l, r) = f.single().unwrap();
                    let s = r.laurent(z0, l, hi)?;
                    Ok((lo..=hi).map(|o| s.coeff(o)).collect())
                })
                .collect::<Result<_>>()?;
            let (_, piv) = linalg::rref(&rows);
            if piv.len() == n {
                return Ok(Exponents(piv.iter().map(|&c| lo + c as i64).collect()));
            }
            k *= 2;
        }
        Err(Error::InsufficientPrecision(format!("exponents at {} not resolved", z0)))
    }

    /// Points whose exponents differ from `{0,…,N-1}`.
    pub fn singular_points(&self) -> Result<Vec<SingularPoint<F>>> {
        let wr = self.wronskian_ratfn()?;
        let mut polys = vec![wr.num().clone(), wr.den().clone()];
        for f in &self.basis {
            polys.push(f.single().unwrap().1.den().clone());
        }
        let mut cands: Vec<F> = vec![];
        for p in polys {
            if p.deg() < 1 {
                continue;
            }
            for r in poly_roots(&p)? {
                let z = match r.value {
                    RootValue::InField(z) => z,
                    RootValue::Numeric(c) => {
                        return Err(Error::NonRationalSingularPoint(format!("{}", c)));
                    }
                };
                if !cands.iter().any(|c| c.approx_eq(&z)) {
                    cands.push(z);
                }
            }
        }
        cands.sort_by(|a, b| a.key_cmp(b));
        let mut out = vec![];
        for z in cands {
            let e = self.exponents_at(&z)?;
            if !e.is_trivial() {
                out.push(SingularPoint { point: z, exponents: e });
            }
        }
        Ok(out)
    }

    /// `V* = span { Wr(f_1..f_{N-1}) / Wr_V }`.
    pub fn conjugate(&self) -> Result<FunctionSpace<F>> {
        let n = self.dim();
        let cols = columns(&self.basis, n);
        let rows: Vec<usize> = (0..n.saturating_sub(1)).collect();
        let full = full_mask(n);
        let mut masks: Vec<u64> = (0..n).map(|k| full & !(1 << k)).collect();
        let cof = minors(&cols, &rows, n, &masks);
        masks.clear();
        let rows_full: Vec<usize> = (0..n).collect();
        let det = minors(&cols, &rows_full, n, &[full]).remove(0);
        if det.is_zero() {
            return Err(Error::DegenerateBasis);
        }
        let basis = (0..n)
            .map(|k| {
                let num = &cof[k] * &cols[k].den.pow(n);
                Ok(QuasiPoly::term(-cols[k].lambda.clone(), RatFn::new(num, det.clone())?, self.var))
            })
            .collect::<Result<Vec<_>>>()?;
        FunctionSpace::new(basis, self.var)
    }

    /// Conjugate space computed against a prescribed Wronskian `w` (used when the
    /// Wronskian's factorization is known and should not be recomputed numerically).
    pub fn conjugate_with_wronskian(&self, w: &RatFn<F>) -> Result<FunctionSpace<F>> {
        let n = self.dim();
        let cols = columns(&self.basis, n);
        let rows: Vec<usize> = (0..n.saturating_sub(1)).collect();
        let full = full_mask(n);
        let masks: Vec<u64> = (0..n).map(|k| full & !(1 << k)).collect();
        let cof = minors(&cols, &rows, n - 1 + 1, &masks);
        let basis = (0..n)
            .map(|k| {
                // cofactor carries the factor ∏_{j≠k} b_j^n; undo it
                let others = (0..n).filter(|&j| j != k).fold(Poly::one(), |acc, j| &acc * &cols[j].den.pow(n));
                let r = RatFn::new(cof[k].clone(), others)?.div(w)?;
                Ok(QuasiPoly::term(-cols[k].lambda.clone(), r, self.var))
            })
            .collect::<Result<Vec<_>>>()?;
        FunctionSpace::new(basis, self.var)
    }

    /// `V† = V* · ∏ (x - z_a)^{-M_a}` over the singular points of `V`.
    pub fn regularized_conjugate(&self) -> Result<FunctionSpace<F>> {
        let sing = self.singular_points()?;
        let star = self.conjugate()?;
        let factor = regularizing_factor(&sing);
        star.map_basis(|f| f.div_ratfn(&RatFn::from_poly(factor.clone())))
    }

    pub fn map_basis(&self, f: impl Fn(&QuasiPoly<F>) -> Result<QuasiPoly<F>>) -> Result<FunctionSpace<F>> {
        FunctionSpace::new(self.basis.iter().map(f).collect::<Result<Vec<_>>>()?, self.var)
    }

    /// Equality of spans.
    pub fn span_eq(&self, other: &FunctionSpace<F>) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        let m = coefficient_matrix(&all);
        let (a, b) = m.split_at(self.dim());
        linalg::same_row_space(&a.to_vec(), &b.to_vec())
    }

    pub fn contains(&self, f: &QuasiPoly<F>) -> bool {
        let mut all = self.basis.clone();
        all.push(f.clone());
        linalg::rank(&coefficient_matrix(&all)) == linalg::rank(&coefficient_matrix(&self.basis))
    }
}

/// `∏ (x - z_a)^{M_a}` with `M_a` the number of exponents leaving `e_i = i - 1`.
pub fn regularizing_factor<F: Field>(sing: &[SingularPoint<F>]) -> Poly<F> {
    sing.iter().fold(Poly::one(), |acc, s| &acc * &Poly::linear_root(&s.point).pow(s.exponents.defect_count()))
}

/// Rows: functions; columns: (exponential, power of x) over a common denominator per exponential.
pub fn coefficient_matrix<F: Field>(funcs: &[QuasiPoly<F>]) -> Matrix<F> {
    let mut groups: Vec<(F, Vec<Poly<F>>)> = vec![];
    for f in funcs {
        for (l, r) in f.terms() {
            let slot = match groups.iter().position(|(m, _)| m.approx_eq(l)) {
                Some(i) => i,
                None => {
                    groups.push((l.clone(), vec![]));
                    groups.len() - 1
                }
            };
            let dens = &mut groups[slot].1;
            if !dens.iter().any(|d| d.approx_eq(r.den())) {
                dens.push(r.den().clone());
            }
        }
    }
    // common denominators: exact uses the lcm, approx the product of distinct ones
    let commons: Vec<Poly<F>> = groups
        .iter()
        .map(|(_, dens)| {
            if F::EXACT {
                dens.iter().fold(Poly::one(), |acc, d| acc.lcm(d).unwrap())
            } else {
                dens.iter().fold(Poly::one(), |acc, d| &acc * d)
            }
        })
        .collect();
    let widths: Vec<usize> = funcs
        .iter()
        .fold(vec![0usize; groups.len()], |mut w, f| {
            for (l, r) in f.terms() {
                let g = groups.iter().position(|(m, _)| m.approx_eq(l)).unwrap();
                let deg = (r.num().deg() + commons[g].deg() - r.den().deg()).max(0) as usize + 1;
                w[g] = w[g].max(deg);
            }
            w
        });
    let total: usize = widths.iter().sum();
    funcs
        .iter()
        .map(|f| {
            let mut row = vec![F::zero(); total];
            for (l, r) in f.terms() {
                let g = groups.iter().position(|(m, _)| m.approx_eq(l)).unwrap();
                let mult = if F::EXACT {
                    commons[g].exact_div(r.den()).expect("lcm is a multiple")
                } else {
                    groups[g].1.iter().filter(|d| !d.approx_eq(r.den())).fold(Poly::one(), |acc, d| &acc * d)
                };
                let num = r.num() * &mult;
                let off: usize = widths[..g].iter().sum();
                for (k, c) in num.coeffs().iter().enumerate() {
                    row[off + k] = c.clone();
                }
            }
            row
        })
        .collect()
}

/// A space of the `(λ, z, n, m)`-type: basis `p_i e^{λ_i x}` with exponents
/// `{0,…,N-2, N-1+m_a}` at each listed point.
#[derive(Clone, Debug)]
pub struct SpecialSpace<F: Field> {
    pub space: FunctionSpace<F>,
    pub z: Vec<F>,
    pub lambda: Vec<F>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
}

impl<F: Field> SpecialSpace<F> {
    /// `p_i` in the order of `lambda`.
    pub fn polys(&self) -> Vec<Poly<F>> {
        self.space.basis().iter().map(|f| f.single().unwrap().1.num().clone()).collect()
    }

    /// Points of `z` that are not singular.
    pub fn padded(&self) -> Vec<usize> {
        (0..self.m.len()).filter(|&a| self.m[a] == 0).collect()
    }

    /// `∏ (x - z_a)^{m_a}`
    pub fn wronskian_shape(&self) -> Poly<F> {
        self.z.iter().zip(&self.m).fold(Poly::one(), |acc, (z, &m)| &acc * &Poly::linear_root(z).pow(m))
    }

    /// `K ∏ (x - z_a)^{m_a}` with `K` taken from the computed Wronskian.
    pub fn structured_wronskian(&self) -> Result<RatFn<F>> {
        let w = self.space.wronskian_ratfn()?;
        let shape = self.wronskian_shape();
        Ok(RatFn::from_poly(shape.scale(&w.num().lead())))
    }
}

/// Checks the exponent pattern at each `z_a` and that no singular point lies outside `z`.
pub fn classify_special<F: Field>(space: &FunctionSpace<F>, z: &[F]) -> Result<SpecialSpace<F>> {
    let n_dim = space.dim();
    if n_dim < 2 {
        return Err(Error::NotSpecial("dimension must be at least 2".into()));
    }
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            if z[a].approx_eq(&z[b]) {
                return Err(Error::InvalidInput("points must be distinct".into()));
            }
        }
    }
    let lambdas = space.lambdas();
    if lambdas.len() != n_dim {
        return Err(Error::NotSpecial("exponentials must be distinct, one basis element each".into()));
    }
    if !space.is_polynomial() {
        return Err(Error::NotSpecial("coefficients must be polynomials".into()));
    }
    let mut m = vec![];
    for za in z {
        let e = space.exponents_at(za)?;
        let ok = e.0[..n_dim - 1].iter().enumerate().all(|(i, &v)| v == i as i64);
        if !ok {
            return Err(Error::NotSpecial(format!("exponents {:?} at {}", e.0, za)));
        }
        m.push((e.0[n_dim - 1] - (n_dim as i64 - 1)) as usize);
    }
    let wr = space.wronskian_ratfn()?;
    let deg = wr.num().deg().max(0) as usize;
    let total: usize = m.iter().sum();
    if deg > total {
        return Err(Error::MissingSingularPoint(format!("Wronskian degree {} exceeds Σm = {}", deg, total)));
    }
    let (lambda, n): (Vec<F>, Vec<usize>) = space
        .basis()
        .iter()
        .map(|f| {
            let (l, r) = f.single().unwrap();
            (l.clone(), r.num().deg() as usize)
        })
        .unzip();
    if n.iter().sum::<usize>() != total {
        return Err(Error::NotSpecial(format!("Σn = {} differs from Σm = {}", n.iter().sum::<usize>(), total)));
    }
    Ok(SpecialSpace { space: space.clone(), z: z.to_vec(), lambda, n, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Exact;

    fn e(n: i64) -> Exact {
        Exact::from_i64(n)
    }
    fn pe(c: &[i64], l: i64) -> QuasiPoly<Exact> {
        QuasiPoly::poly_exp(Poly::from_i64(c), e(l), Var::X)
    }
    fn space(fs: Vec<QuasiPoly<Exact>>) -> FunctionSpace<Exact> {
        FunctionSpace::new(fs, Var::X).unwrap()
    }

    #[test]
    fn wronskian_of_two_exponentials() {
        let (l1, l2) = (Exact::from_frac(1, 3), e(-2));
        let v = space(vec![
            QuasiPoly::poly_exp(Poly::one(), l1.clone(), Var::X),
            QuasiPoly::poly_exp(Poly::one(), l2.clone(), Var::X),
        ]);
        let want = QuasiPoly::poly_exp(Poly::constant(l2.clone() - l1.clone()), l1 + l2, Var::X);
        assert!(v.wronskian().unwrap().approx_eq(&want));
    }

    #[test]
    fn wronskian_of_one_and_x() {
        let v = space(vec![pe(&[1], 0), pe(&[0, 1], 0)]);
        assert!(v.wronskian().unwrap().approx_eq(&pe(&[1], 0)));
    }

    #[test]
    fn wronskian_of_one_and_x_exp() {
        // det [[1, x e^x], [0, (x+1) e^x]]
        let v = space(vec![pe(&[1], 0), pe(&[0, 1], 1)]);
        assert!(v.wronskian().unwrap().approx_eq(&pe(&[1, 1], 1)));
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let r = FunctionSpace::new(vec![pe(&[1, 1], 0), pe(&[2, 2], 0)], Var::X);
        assert_eq!(r.unwrap_err(), Error::DegenerateBasis);
    }

    #[test]
    fn mixed_basis_is_regraded() {
        let v = space(vec![pe(&[1], 0).add(&pe(&[0, 1], 1)), pe(&[1], 0)]);
        assert!(v.basis().iter().all(|f| f.single().is_some()));
        assert!(v.span_eq(&space(vec![pe(&[1], 0), pe(&[0, 1], 1)])));
        let bad = FunctionSpace::new(vec![pe(&[1], 0).add(&pe(&[1], 1))], Var::X);
        assert_eq!(bad.unwrap_err(), Error::NotGraded);
    }

    #[test]
    fn exponents_examples() {
        let v = space(vec![pe(&[1], 0), pe(&[0, 1], 1)]);
        assert_eq!(v.exponents_at(&e(-1)).unwrap().0, vec![0, 2]);
        assert_eq!(v.exponents_at(&e(3)).unwrap().0, vec![0, 1]);
        let w = space(vec![pe(&[1], 0), pe(&[0, 1], 0)]);
        assert_eq!(w.exponents_at(&Exact::from_frac(5, 7)).unwrap().0, vec![0, 1]);
        let x = space(vec![pe(&[1], 2), pe(&[1], -1)]);
        assert_eq!(x.exponents_at(&e(4)).unwrap().0, vec![0, 1]);
    }

    #[test]
    fn singular_point_examples() {
        let v = space(vec![pe(&[1], 0), pe(&[0, 1], 1)]);
        let s = v.singular_points().unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].point, e(-1));
        assert_eq!(s[0].exponents.0, vec![0, 2]);
        assert!(space(vec![pe(&[1], 2), pe(&[1], -1)]).singular_points().unwrap().is_empty());
        assert!(space(vec![pe(&[1], 0), pe(&[0, 1], 0), pe(&[0, 0, 1], 0)]).singular_points().unwrap().is_empty());
    }

    #[test]
    fn conjugate_of_exponentials() {
        let v = space(vec![pe(&[1], 1), pe(&[1], 3)]);
        let want = space(vec![pe(&[1], -1), pe(&[1], -3)]);
        assert!(v.conjugate().unwrap().span_eq(&want));
    }

    #[test]
    fn conjugate_of_line() {
        let f = pe(&[1, 2], 1);
        let v = space(vec![f.clone()]);
        let want = space(vec![f.recip().unwrap()]);
        assert!(v.conjugate().unwrap().span_eq(&want));
    }

    #[test]
    fn regularized_conjugate_exponents() {
        let v = space(vec![pe(&[1], 0), pe(&[0, 1], 1)]);
        let d = v.regularized_conjugate().unwrap();
        assert_eq!(d.exponents_at(&e(-1)).unwrap().0, vec![-2, 0]);
        assert_eq!(v.conjugate().unwrap().exponents_at(&e(-1)).unwrap().0, vec![-1, 1]);
        // no singular points: V† = V*
        let w = space(vec![pe(&[1], 1), pe(&[1], 3)]);
        assert!(w.regularized_conjugate().unwrap().span_eq(&w.conjugate().unwrap()));
    }

    #[test]
    fn classify_line_shift() {
        // <1, (x - t) e^x>: Wronskian (x - t + 1) e^x, singular at t - 1
        let t = Exact::from_frac(5, 2);
        let p2 = Poly::linear_root(&t);
        let v = space(vec![pe(&[1], 0), QuasiPoly::poly_exp(p2, e(1), Var::X)]);
        let z0 = t.clone() - e(1);
        let s = classify_special(&v, &[z0, e(7)]).unwrap();
        assert_eq!(s.n, vec![0, 1]);
        assert_eq!(s.m, vec![1, 0]);
    }

    #[test]
    fn classify_exponentials_with_padding() {
        let v = space(vec![pe(&[1], 0), pe(&[1], 1)]);
        let s = classify_special(&v, &[e(0), e(1)]).unwrap();
        assert_eq!(s.n, vec![0, 0]);
        assert_eq!(s.m, vec![0, 0]);
    }

    #[test]
    fn classify_rejects_shared_exponential() {
        let v = space(vec![pe(&[1], 0), pe(&[0, 0, 0, 1], 0)]);
        assert!(matches!(classify_special(&v, &[e(0)]), Err(Error::NotSpecial(_))));
    }

    #[test]
    fn classify_reports_missing_point() {
        let v = space(vec![pe(&[1], 0), pe(&[0, 1], 1)]);
        assert!(matches!(classify_special(&v, &[e(0), e(1)]), Err(Error::MissingSingularPoint(_))));
    }

    #[test]
    fn double_conjugate_returns_space() {
        let v = space(vec![pe(&[1, 0, 1], 0), pe(&[-2, 1], 1), pe(&[3], -1)]);
        assert!(v.conjugate().unwrap().conjugate().unwrap().span_eq(&v));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn two_space() -> impl Strategy<Value = (Vec<i64>, Vec<i64>, i64, i64)> {
            (
                proptest::collection::vec(-3i64..4, 2..4),
                proptest::collection::vec(-3i64..4, 2..4),
                -2i64..3,
                -2i64..3,
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn conjugation_is_involutive((a, b, l1, l2) in two_space()) {
                let f = pe(&a, l1);
                let g = pe(&b, l2);
                prop_assume!(!f.is_zero() && !g.is_zero());
                let Ok(v) = FunctionSpace::new(vec![f, g], Var::X) else { return Ok(()) };
                let vv = v.conjugate().unwrap().conjugate().unwrap();
                prop_assert!(vv.span_eq(&v));
            }

            #[test]
            fn basis_change_invariance((a, b, l1, l2) in two_space(), c in 1i64..4) {
                let f = pe(&a, l1);
                let g = pe(&b, l2);
                prop_assume!(!f.is_zero() && !g.is_zero());
                let Ok(v) = FunctionSpace::new(vec![f.clone(), g.clone()], Var::X) else { return Ok(()) };
                let Ok(w) = FunctionSpace::new(vec![f.add(&g.scale(&e(c))), g], Var::X) else { return Ok(()) };
                prop_assert!(v.span_eq(&w));
                let (wv, ww) = (v.wronskian_ratfn().unwrap(), w.wronskian_ratfn().unwrap());
                prop_assert!(wv.num().monic() == ww.num().monic());
                for z in [-1i64, 0, 2] {
                    prop_assert_eq!(v.exponents_at(&e(z)).unwrap(), w.exponents_at(&e(z)).unwrap());
                }
            }
        }
    }
}
