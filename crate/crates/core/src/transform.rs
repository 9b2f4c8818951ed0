//! The bispectral integral transform, computed by residues.
//!
//! `∮ e^{ux} f(x) dx` around `z0` equals `2πi · e^{(u+μ) z0} · q(u)` for a term
//! `r(x) e^{μx}`; the constant `2πi e^{μ z0}` is dropped since only spans matter.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg;
use crate::poly::{factorial, Poly};
use crate::qp::QuasiPoly;
use crate::ratfn::RatFn;
use crate::spaces::{classify_special, FunctionSpace, SpecialSpace};

#[derive(Clone, Debug)]
pub struct TransformResult<F: Field> {
    pub dual: FunctionSpace<F>,
    /// Per point `z_a`, the transformed functions `q(u) e^{z_a u}` (echelon basis, by degree).
    pub components: Vec<(F, Vec<QuasiPoly<F>>)>,
}

/// `q(u) e^{z0 u}` with `q(u) = Σ_l s_{-1-l} u^l / l!`, `s` the Laurent series of `f` at `z0`.
pub fn contour_transform<F: Field>(f: &QuasiPoly<F>, z0: &F) -> Result<QuasiPoly<F>> {
    let var = f.var.other();
    let s = f.expand_at(z0, -1)?;
    if s.is_zero() || s.order >= 0 {
        return Ok(QuasiPoly::zero(var));
    }
    let d = (-1 - s.order) as usize;
    let q: Vec<F> = (0..=d)
        .map(|l| {
            let c = s.coeff(-1 - l as i64);
            c * factorial::<F>(l).inv().unwrap()
        })
        .collect();
    let q = Poly::new(q);
    if q.is_zero() {
        return Err(Error::EssentialSingularity);
    }
    Ok(QuasiPoly::poly_exp(q, z0.clone(), var))
}

/// Echelon basis of polynomial parts, pivoting on the highest degree first; sorted by degree.
fn reduce_component<F: Field>(fs: &[QuasiPoly<F>], z0: &F) -> Vec<QuasiPoly<F>> {
    if fs.is_empty() {
        return vec![];
    }
    let var = fs[0].var;
    let polys: Vec<Poly<F>> = fs.iter().map(|f| f.coeff_of(z0).num().clone()).collect();
    let width = polys.iter().map(|p| p.deg().max(0) as usize + 1).max().unwrap();
    let rows: Vec<Vec<F>> = polys
        .iter()
        .map(|p| (0..width).rev().map(|k| p.coeff(k)).collect())
        .collect();
    let (r, piv) = linalg::rref(&rows);
    let mut out: Vec<QuasiPoly<F>> = (0..piv.len())
        .map(|i| {
            let c: Vec<F> = (0..width).map(|k| r[i][width - 1 - k].clone()).collect();
            QuasiPoly::poly_exp(Poly::new(c), z0.clone(), var)
        })
        .collect();
    out.sort_by_key(|f| f.coeff_of(z0).num().deg());
    out
}

fn transform_at_points<F: Field>(fs: &FunctionSpace<F>, points: &[F]) -> Result<TransformResult<F>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].key_cmp(&points[b]));
    let mut components = vec![];
    let mut all = vec![];
    for a in order {
        let z = &points[a];
        let mut hats = vec![];
        for f in fs.basis() {
            let g = contour_transform(f, z)?;
            if !g.is_zero() {
                hats.push(g);
            }
        }
        let red = reduce_component(&hats, z);
        all.extend(red.iter().cloned());
        components.push((z.clone(), red));
    }
    let dual = FunctionSpace::new(all, fs.var.other())?;
    Ok(TransformResult { dual, components })
}

/// `U = span { ∮_{z_a} e^{ux} f(x) dx : f ∈ V†, z_a singular }`.
pub fn bispectral_dual<F: Field>(space: &FunctionSpace<F>) -> Result<TransformResult<F>> {
    let sing = space.singular_points()?;
    let dag = space.regularized_conjugate()?;
    let pts: Vec<F> = sing.iter().map(|s| s.point.clone()).collect();
    transform_at_points(&dag, &pts)
}

/// Residues of `f(x) ∏_b (x - z_b)^{-1}`, `f ∈ V*`, at every `z_a`; the result is
/// classified as a `(z, λ, m, n)`-type space.
pub fn special_bispectral_dual<F: Field>(special: &SpecialSpace<F>) -> Result<(TransformResult<F>, SpecialSpace<F>)> {
    let w = special.structured_wronskian()?;
    let star = special.space.conjugate_with_wronskian(&w)?;
    let prod = special.z.iter().fold(Poly::one(), |acc, z| &acc * &Poly::linear_root(z));
    let inv = RatFn::new(Poly::one(), prod)?;
    let g = star.map_basis(|f| Ok(f.mul_ratfn(&inv)))?;
    let res = transform_at_points(&g, &special.z)?;
    // reorder the dual basis to follow z
    let mut basis = vec![];
    for z in &special.z {
        let comp = res.components.iter().find(|(p, _)| p.approx_eq(z)).map(|(_, c)| c.clone()).unwrap_or_default();
        if comp.len() != 1 {
            return Err(Error::NotSpecial(format!("{} functions from the contour around {}", comp.len(), z)));
        }
        basis.push(comp[0].clone());
    }
    let u = FunctionSpace::new(basis, special.space.var.other())?;
    let sp = classify_special(&u, &special.lambda)?;
    Ok((TransformResult { dual: u, components: res.components }, sp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::{monic_fundamental, regularize, special_fundamental};
    use crate::field::Exact;
    use crate::qp::Var;

    fn e(n: i64) -> Exact {
        Exact::from_i64(n)
    }
    fn pe(c: &[i64], l: i64) -> QuasiPoly<Exact> {
        QuasiPoly::poly_exp(Poly::from_i64(c), e(l), Var::X)
    }

    #[test]
    fn simple_and_double_pole() {
        let z = Exact::from_frac(2, 3);
        let f = QuasiPoly::term(e(0), RatFn::new(Poly::one(), Poly::linear_root(&z)).unwrap(), Var::X);
        let g = contour_transform(&f, &z).unwrap();
        assert!(g.approx_eq(&QuasiPoly::poly_exp(Poly::one(), z.clone(), Var::U)));
        let f2 = QuasiPoly::term(e(0), RatFn::new(Poly::one(), Poly::linear_root(&z).pow(2)).unwrap(), Var::X);
        let g2 = contour_transform(&f2, &z).unwrap();
        assert!(g2.approx_eq(&QuasiPoly::poly_exp(Poly::x(), z, Var::U)));
    }

    #[test]
    fn exponential_factor_gives_constant() {
        // residue of e^{(u+λ)x}/(x - z) is e^{λz} e^{zu}; the constant is dropped
        let z = e(2);
        let f = QuasiPoly::term(e(3), RatFn::new(Poly::one(), Poly::linear_root(&z)).unwrap(), Var::X);
        let g = contour_transform(&f, &z).unwrap();
        let (l, r) = g.single().unwrap();
        assert_eq!(l, &z);
        assert_eq!(r.num().deg(), 0);
    }

    #[test]
    fn regular_point_gives_zero() {
        assert!(contour_transform(&pe(&[1, 2], 1), &e(0)).unwrap().is_zero());
    }

    #[test]
    fn dual_of_one_and_x_exp() {
        let v = FunctionSpace::new(vec![pe(&[1], 0), pe(&[0, 1], 1)], Var::X).unwrap();
        let r = bispectral_dual(&v).unwrap();
        assert_eq!(r.dual.dim(), 1);
        let (l, q) = r.dual.basis()[0].single().unwrap();
        assert_eq!(l, &e(-1));
        assert_eq!(q.num().deg(), 1);
    }

    #[test]
    fn regular_dual_round_trip_and_swap() {
        // Wronskians (x-1)(x+1)(2x-1) and (x-1)^2 (x+1)
        for (p2, l, dim) in [(vec![-1, -1, 1], 2, 3), (vec![-1, -2, 1], 1, 2)] {
            let v = FunctionSpace::new(vec![pe(&[0, 1], 0), pe(&p2, l)], Var::X).unwrap();
            let r = bispectral_dual(&v).unwrap();
            assert_eq!(r.dual.dim(), dim);
            let back = bispectral_dual(&r.dual).unwrap();
            assert!(back.dual.span_eq(&v));
            let (dv, _) = regularize(&monic_fundamental(&v).unwrap(), &v).unwrap();
            let (du, _) = regularize(&monic_fundamental(&r.dual).unwrap(), &r.dual).unwrap();
            assert!(du.eq_up_to_scalar(&dv.bispectral_swap()));
        }
    }

    #[test]
    fn special_dual_of_padded_line() {
        // <1, (x - 5/2) e^x> with z = (3/2, 0)
        let v = FunctionSpace::new(
            vec![pe(&[1], 0), QuasiPoly::poly_exp(Poly::linear_root(&Exact::from_frac(5, 2)), e(1), Var::X)],
            Var::X,
        )
        .unwrap();
        let s = classify_special(&v, &[Exact::from_frac(3, 2), e(0)]).unwrap();
        let (_, u) = special_bispectral_dual(&s).unwrap();
        assert_eq!(u.n, vec![1, 0]);
        assert_eq!(u.m, vec![0, 1]);
        let (_, back) = special_bispectral_dual(&u).unwrap();
        assert!(back.space.span_eq(&v));
        let dv = special_fundamental(&s).unwrap();
        let du = special_fundamental(&u).unwrap();
        assert!(du.eq_up_to_scalar(&dv.bispectral_swap()));
    }
}
