//! Polynomial roots: Aberth–Ehrlich iteration, clustering, and exact rational extraction.

use crate::error::{Error, Result};
use crate::field::{rationalize, Exact, Field};
use crate::poly::Poly;
use num::complex::Complex64;
use num::rational::BigRational;
use num::Zero;

pub const MAX_ITER: usize = 200;
pub const CLUSTER_RADIUS: f64 = 1e-7;

#[derive(Clone, Debug)]
pub enum RootValue<F: Field> {
    /// A root represented in the coefficient field.
    InField(F),
    /// A root known only numerically (irrational root of an exact polynomial).
    Numeric(Complex64),
}

impl<F: Field> RootValue<F> {
    pub fn to_c64(&self) -> Complex64 {
        match self {
            RootValue::InField(v) => v.to_c64(),
            RootValue::Numeric(c) => *c,
        }
    }
    pub fn in_field(&self) -> Option<&F> {
        match self {
            RootValue::InField(v) => Some(v),
            RootValue::Numeric(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Root<F: Field> {
    pub value: RootValue<F>,
    pub multiplicity: usize,
}

fn horner(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// All complex roots of the polynomial with coefficients `c` (lowest first).
pub fn aberth(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Ok(vec![]);
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|a| a / lead).collect();
    // Cauchy bound for the initial circle.
    let radius = 1.0 + monic[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let r0 = radius.min(1e6).max(1e-3) * 0.5;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(r0, th)
        })
        .collect();
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut maxstep: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        1.0 / d
                    }
                })
                .sum();
            let denom = 1.0 - ratio * s;
            let w = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            if w.is_finite() {
                z[i] -= w;
                maxstep = maxstep.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if maxstep < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        // Multiple roots converge linearly; accept if residuals are small.
        let scale: f64 = monic.iter().map(|a| a.norm()).sum();
        let ok = z.iter().all(|&r| {
            let (p, _) = horner(&monic, r);
            p.norm() <= 1e-6 * scale * (1.0 + r.norm()).powi(n as i32)
        });
        if !ok {
            return Err(Error::NoConvergence("Aberth iteration".into()));
        }
    }
    Ok(z)
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

fn newton_polish(c: &[Complex64], mut x: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp) = horner(c, x);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.norm() <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Numeric roots with multiplicities: Aberth, greedy clustering, then polishing
/// each cluster centre on the derivative of order `multiplicity - 1`.
pub fn numeric_roots(c: &[Complex64]) -> Result<Vec<(Complex64, usize)>> {
    let z = aberth(c)?;
    let n = z.len();
    let scale: f64 = c.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut used = vec![false; n];
    let mut clusters: Vec<Vec<Complex64>> = vec![];
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut cl = vec![z[i]];
        let mut k = 0;
        while k < cl.len() {
            for j in 0..n {
                if !used[j] && (z[j] - cl[k]).norm() <= CLUSTER_RADIUS * (1.0 + cl[k].norm()) {
                    used[j] = true;
                    cl.push(z[j]);
                }
            }
            k += 1;
        }
        clusters.push(cl);
    }
    // Second pass: merge nearby clusters whose centre is a multiple root numerically.
    let mut merged = true;
    while merged {
        merged = false;
        'outer: for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let ca = mean(&clusters[a]);
                let cb = mean(&clusters[b]);
                if (ca - cb).norm() > 1e-3 * (1.0 + ca.norm()) {
                    continue;
                }
                let mut all = clusters[a].clone();
                all.extend(clusters[b].iter().cloned());
                let m = all.len();
                let ctr = mean(&all);
                let mut d = c.to_vec();
                let mut ok = true;
                for _ in 0..m {
                    let (p, _) = horner(&d, ctr);
                    let s = d.iter().map(|x| x.norm()).fold(0.0, f64::max).max(scale * 1e-300);
                    if p.norm() > 1e-5 * s * (1.0 + ctr.norm()).powi(d.len() as i32) {
                        ok = false;
                        break;
                    }
                    d = derivative(&d);
                }
                if ok {
                    clusters[a] = all;
                    clusters.remove(b);
                    merged = true;
                    break 'outer;
                }
            }
        }
    }
    let mut out: Vec<(Complex64, usize)> = clusters
        .into_iter()
        .map(|cl| {
            let m = cl.len();
            let mut d = c.to_vec();
            for _ in 1..m {
                d = derivative(&d);
            }
            (newton_polish(&d, mean(&cl)), m)
        })
        .collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(out)
}

fn mean(v: &[Complex64]) -> Complex64 {
    v.iter().sum::<Complex64>() / v.len() as f64
}

fn convergents(x: f64) -> Vec<BigRational> {
    let mut out = vec![];
    if !x.is_finite() {
        return out;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > 1_000_000_000 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= 1e-7 * (1.0 + x.abs()) {
            out.push(BigRational::new(h1.into(), k1.into()));
        }
        let frac = r - a;
        if frac.abs() < 1e-14 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

/// Candidate Gaussian rationals near `z`, ordered by denominator size.
fn rational_candidates(z: Complex64) -> Vec<Exact> {
    let res = convergents(z.re);
    let ims = if z.im.abs() < 1e-9 * (1.0 + z.norm()) {
        vec![BigRational::zero()]
    } else {
        convergents(z.im)
    };
    let mut out = vec![];
    for a in &res {
        for b in &ims {
            out.push(Exact::new(a.clone(), b.clone()));
        }
    }
    out.sort_by_key(|e| e.denom_bits());
    if out.is_empty() {
        out.push(rationalize(z, 1_000_000));
    }
    out
}

/// Roots of an exact polynomial: square-free split, then rational roots are
/// certified by exact evaluation and the remainder is reported numerically.
pub fn exact_roots(p: &Poly<Exact>) -> Result<Vec<Root<Exact>>> {
    if p.is_zero() {
        return Err(Error::InvalidInput("roots of the zero polynomial".into()));
    }
    let mut out = vec![];
    for (factor, mult) in p.squarefree()? {
        let mut rest = factor.clone();
        let approx: Vec<Complex64> = factor.coeffs().iter().map(|a| a.to_c64()).collect();
        let nums = numeric_roots(&approx)?;
        for (z, _) in nums {
            let mut found = None;
            if rest.deg() >= 1 {
                for cand in rational_candidates(z) {
                    if rest.eval(&cand).is_zero() {
                        found = Some(cand);
                        break;
                    }
                }
            }
            match found {
                Some(r) => {
                    rest = rest.exact_div(&Poly::linear_root(&r)).expect("certified root divides");
                    out.push(Root { value: RootValue::InField(r), multiplicity: mult });
                }
                None => out.push(Root { value: RootValue::Numeric(z), multiplicity: mult }),
            }
        }
    }
    out.sort_by(|a, b| {
        let (x, y) = (a.value.to_c64(), b.value.to_c64());
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    Ok(out)
}

/// Backend-dispatching root finder.
pub fn poly_roots<F: Field>(p: &Poly<F>) -> Result<Vec<Root<F>>> {
    if p.is_zero() {
        return Err(Error::InvalidInput("roots of the zero polynomial".into()));
    }
    if F::EXACT {
        // Re-route through the exact implementation by value conversion.
        let q: Poly<Exact> = Poly::new(p.coeffs().iter().map(|a| to_exact(a)).collect());
        let roots = exact_roots(&q)?;
        return Ok(roots
            .into_iter()
            .map(|r| Root {
                value: match r.value {
                    RootValue::InField(e) => RootValue::InField(from_exact::<F>(&e)),
                    RootValue::Numeric(c) => RootValue::Numeric(c),
                },
                multiplicity: r.multiplicity,
            })
            .collect());
    }
    let c: Vec<Complex64> = p.coeffs().iter().map(|a| a.to_c64()).collect();
    Ok(numeric_roots(&c)?
        .into_iter()
        .map(|(z, m)| Root { value: RootValue::InField(F::from_c64(z)), multiplicity: m })
        .collect())
}

// `Exact` is the only field with `EXACT = true`, so these downcasts cannot fail.
fn to_exact<F: Field>(a: &F) -> Exact {
    let any: &dyn std::any::Any = a;
    any.downcast_ref::<Exact>().cloned().expect("exact backend")
}

fn from_exact<F: Field>(e: &Exact) -> F {
    let any: &dyn std::any::Any = e;
    let boxed: Box<dyn std::any::Any> = Box::new(any.downcast_ref::<Exact>().cloned().unwrap());
    *boxed.downcast::<F>().expect("exact backend")
}
