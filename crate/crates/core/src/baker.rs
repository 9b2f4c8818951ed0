//! Admissible subspaces of `ℂ[t]` and stationary Baker–Akhiezer functions.
//!
//! A condition `Σ_a c_a r^{(a)}(λ) = 0` is stored as the coefficient list `c_0..c_n`
//! and corresponds to the function `(Σ_a c_a x^a) e^{λx}`.

use crate::diffop::{monic_fundamental, MonicOperator};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::Poly;
use crate::qp::{QuasiPoly, Var};
use crate::roots::numeric_roots;
use crate::spaces::FunctionSpace;
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

type C = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleSubspace<F: Field> {
    /// per point `λ_i`, its conditions
    pub conditions: Vec<(F, Vec<Vec<F>>)>,
}

impl<F: Field> AdmissibleSubspace<F> {
    /// Builds from raw conditions, rejecting empty lists and a zero top coefficient.
    pub fn new(conditions: Vec<(F, Vec<Vec<F>>)>) -> Result<Self> {
        for (l, cs) in &conditions {
            for c in cs {
                if c.last().is_none_or(|t| t.is_zero()) {
                    return Err(Error::InvalidInput(format!("condition at {} has a zero top coefficient", l)));
                }
            }
        }
        Ok(AdmissibleSubspace { conditions })
    }

    /// `r ∈ W`.
    pub fn contains(&self, r: &Poly<F>) -> bool {
        self.conditions.iter().all(|(l, cs)| {
            cs.iter().all(|c| {
                let v = c.iter().enumerate().fold(F::zero(), |acc, (a, ca)| acc + ca.clone() * r.deriv_n(a).eval(l));
                v.negligible(r.scale_norm().max(1.0))
            })
        })
    }
}

/// Condition data read off the basis `p_{ij} e^{λ_i x}`.
pub fn space_to_subspace<F: Field>(space: &FunctionSpace<F>) -> Result<AdmissibleSubspace<F>> {
    let mut out: Vec<(F, Vec<Vec<F>>)> = vec![];
    for f in space.basis() {
        let (l, r) = f.single().ok_or(Error::NotGraded)?;
        let p = r.as_poly().ok_or(Error::NonPolynomialCoefficients)?;
        let c = p.coeffs().to_vec();
        match out.iter_mut().find(|(m, _)| m.approx_eq(l)) {
            Some(slot) => slot.1.push(c),
            None => out.push((l.clone(), vec![c])),
        }
    }
    AdmissibleSubspace::new(out)
}

pub fn subspace_to_space<F: Field>(w: &AdmissibleSubspace<F>, var: Var) -> Result<FunctionSpace<F>> {
    let funcs = w
        .conditions
        .iter()
        .flat_map(|(l, cs)| cs.iter().map(move |c| QuasiPoly::poly_exp(Poly::new(c.clone()), l.clone(), var)))
        .collect();
    FunctionSpace::new(funcs, var)
}

/// `Ψ_W(x, ξ) = ∏(ξ - λ_i)^{-N_i} D̄_V e^{xξ}` for a fixed space, evaluated pointwise.
#[derive(Clone, Debug)]
pub struct BakerFunction {
    op: Vec<(Vec<C>, Vec<C>)>,
    lambdas: Vec<(C, usize)>,
    poles: Vec<C>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BakerValue {
    pub big: C,
    /// `ψ_W = Ψ_W e^{-xξ}`
    pub rational: C,
}

fn horner(c: &[C], x: C) -> C {
    c.iter().rev().fold(C::new(0.0, 0.0), |acc, &a| acc * x + a)
}

impl BakerFunction {
    pub fn new<F: Field>(space: &FunctionSpace<F>) -> Result<Self> {
        let mono: MonicOperator<F> = monic_fundamental(space)?;
        let to_c = |p: &Poly<F>| p.coeffs().iter().map(|a| a.to_c64()).collect::<Vec<C>>();
        let op: Vec<(Vec<C>, Vec<C>)> = mono.coeffs.iter().map(|a| (to_c(a.num()), to_c(a.den()))).collect();
        let mut poles = vec![];
        for (num, den) in &op {
            if den.len() > 1 && num.iter().any(|a| a.norm() > 0.0) {
                poles.extend(numeric_roots(den)?.into_iter().map(|(r, _)| r));
            }
        }
        let lambdas = space.lambdas().into_iter().map(|(l, k)| (l.to_c64(), k)).collect();
        Ok(BakerFunction { op, lambdas, poles })
    }

    /// Poles of the operator coefficients (in `x`).
    pub fn x_poles(&self) -> &[C] {
        &self.poles
    }

    /// Exponents `λ_i` (poles in `ξ`).
    pub fn xi_poles(&self) -> Vec<C> {
        self.lambdas.iter().map(|&(l, _)| l).collect()
    }

    pub fn eval(&self, x: C, xi: C) -> Result<BakerValue> {
        let n = self.op.len() - 1;
        let mut s = C::new(0.0, 0.0);
        for (k, (num, den)) in self.op.iter().enumerate() {
            let d = horner(den, x);
            if d.norm() == 0.0 {
                return Err(Error::PoleHit);
            }
            s += horner(num, x) / d * xi.powu((n - k) as u32);
        }
        let mut q = C::new(1.0, 0.0);
        for &(l, k) in &self.lambdas {
            q *= (xi - l).powu(k as u32);
        }
        if q.norm() == 0.0 {
            return Err(Error::PoleHit);
        }
        let rational = s / q;
        Ok(BakerValue { big: rational * (x * xi).exp(), rational })
    }
}

pub fn baker_function<F: Field>(space: &FunctionSpace<F>, x0: C, xi0: C) -> Result<BakerValue> {
    BakerFunction::new(space)?.eval(x0, xi0)
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub size: usize,
    pub lo: f64,
    pub hi: f64,
    /// jitter amplitude as a fraction of the grid step
    pub jitter: f64,
    pub seed: u64,
    /// points closer than this to a pole are skipped
    pub pole_distance: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { size: 5, lo: 2.0, hi: 6.0, jitter: 0.2, seed: 0, pole_distance: 0.1 }
    }
}

impl Grid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
        let step = if self.size > 1 { (self.hi - self.lo) / (self.size - 1) as f64 } else { 0.0 };
        let mut out = vec![];
        for i in 0..self.size {
            for j in 0..self.size {
                let mut jit = || if self.jitter > 0.0 { rng.random_range(-self.jitter..self.jitter) * step } else { 0.0 };
                out.push((self.lo + i as f64 * step + jit(), self.lo + j as f64 * step + jit()));
            }
        }
        out
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct InvolutionReport {
    pub max_deviation: f64,
    pub evaluated: usize,
    /// grid points `(x, ξ)` skipped near poles
    pub skipped: Vec<(f64, f64)>,
    /// one of the spaces is zero-dimensional
    pub vacuous: bool,
}

/// `max |ψ_U(x, ξ) - ψ_V(ξ, x)|` over the grid.
pub fn verify_involution<F: Field>(v: &FunctionSpace<F>, u: &FunctionSpace<F>, grid: &Grid) -> Result<InvolutionReport> {
    let bv = BakerFunction::new(v)?;
    let bu = BakerFunction::new(u)?;
    // ψ_U(x, ξ) has poles at x ∈ poles(U), ξ ∈ exps(U); ψ_V(ξ, x) at ξ ∈ poles(V), x ∈ exps(V)
    let near = |p: C, set: &[C]| set.iter().any(|s| (p - s).norm() < grid.pole_distance);
    let bad_x: Vec<C> = bu.x_poles().iter().copied().chain(bv.xi_poles()).collect();
    let bad_xi: Vec<C> = bv.x_poles().iter().copied().chain(bu.xi_poles()).collect();
    let pts = grid.points();
    let results: Vec<std::result::Result<f64, (f64, f64)>> = pts
        .par_iter()
        .map(|&(x, xi)| {
            let (xc, xic) = (C::new(x, 0.0), C::new(xi, 0.0));
            if near(xc, &bad_x) || near(xic, &bad_xi) {
                return Err((x, xi));
            }
            match (bu.eval(xc, xic), bv.eval(xic, xc)) {
                (Ok(a), Ok(b)) => Ok((a.rational - b.rational).norm()),
                _ => Err((x, xi)),
            }
        })
        .collect();
    let mut rep = InvolutionReport { max_deviation: 0.0, evaluated: 0, skipped: vec![], vacuous: v.dim() == 0 || u.dim() == 0 };
    for r in results {
        match r {
            Ok(d) => {
                rep.max_deviation = rep.max_deviation.max(d);
                rep.evaluated += 1;
            }
            Err(p) => rep.skipped.push(p),
        }
    }
    Ok(rep)
}
