//! Random exact special spaces over small rationals.
//!
//! For `N = 2` the Wronskian of `p_1 e^{λ_1 x}, p_2 e^{λ_2 x}` is
//! `(A + μB) e^{(λ_1+λ_2)x}` with `A = p_1 p_2' - p_1' p_2`, `B = p_1 p_2` and
//! `μ = λ_2 - λ_1`. Choosing `μ = -A(r)/B(r)` puts a rational root at `r`; the
//! candidate is kept when the rest also splits over `ℚ`. `N = 3` spaces are
//! special duals of `N = 2` spaces with three singular points.

use crate::error::{Error, Result};
use crate::field::{Exact, Field};
use crate::poly::Poly;
use crate::qp::{QuasiPoly, Var};
use crate::roots::{exact_roots, RootValue};
use crate::spaces::{classify_special, FunctionSpace, SpecialSpace};
use crate::transform::special_bispectral_dual;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `N = 2`, `n = (1, 1)`
    A,
    /// `N = 2`, `n_1 + n_2 ∈ {3, 4}`
    B,
    /// `N = 3`, the dual of a `B` space with `M = 3`
    C,
}

fn small_rational(rng: &mut ChaCha8Rng) -> Exact {
    let den = rng.random_range(1..=3);
    Exact::from_frac(rng.random_range(-6..=6), den)
}

fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> Poly<Exact> {
    let mut c: Vec<Exact> = (0..deg).map(|_| small_rational(rng)).collect();
    c.push(Exact::one());
    Poly::new(c)
}

/// Distinct roots with multiplicities, or `None` unless `p` splits over `ℚ`.
fn split(p: &Poly<Exact>) -> Option<Vec<(Exact, usize)>> {
    let roots = exact_roots(p).ok()?;
    roots
        .into_iter()
        .map(|r| match r.value {
            RootValue::InField(z) if z.to_c64().im == 0.0 => Some((z, r.multiplicity)),
            _ => None,
        })
        .collect()
}

fn try_two(rng: &mut ChaCha8Rng, n: [usize; 2], max_points: usize) -> Option<SpecialSpace<Exact>> {
    let p1 = random_poly(rng, n[0]);
    let p2 = random_poly(rng, n[1]);
    let a = &(&p1 * &p2.deriv()) - &(&p1.deriv() * &p2);
    let b = &p1 * &p2;
    let r = small_rational(rng);
    let br = b.eval(&r);
    if br.is_zero() {
        return None;
    }
    let mu = -(a.eval(&r) * br.inv()?);
    if mu.is_zero() {
        return None;
    }
    let w = &a + &b.scale(&mu);
    let roots = split(&w)?;
    if roots.len() < 2 || roots.len() > max_points {
        return None;
    }
    let l1 = small_rational(rng);
    let l2 = l1.clone() + mu;
    let v = FunctionSpace::new(vec![QuasiPoly::poly_exp(p1, l1, Var::X), QuasiPoly::poly_exp(p2, l2, Var::X)], Var::X).ok()?;
    let z: Vec<Exact> = roots.into_iter().map(|(z, _)| z).collect();
    let sp = classify_special(&v, &z).ok()?;
    (sp.m.iter().all(|&m| m >= 1) && sp.n.iter().all(|&k| k >= 1)).then_some(sp)
}

/// One special space of the given family, retrying up to `budget` candidates.
pub fn random_special(rng: &mut ChaCha8Rng, family: Family, budget: usize) -> Result<SpecialSpace<Exact>> {
    for _ in 0..budget {
        let found = match family {
            Family::A => try_two(rng, [1, 1], 2),
            Family::B => {
                let n = [[1, 2], [2, 1], [2, 2]][rng.random_range(0..3)];
                try_two(rng, n, 3)
            }
            Family::C => {
                let n = [[1, 2], [2, 1]][rng.random_range(0..2)];
                try_two(rng, n, 3)
                    .filter(|v| v.z.len() == 3)
                    .and_then(|v| special_bispectral_dual(&v).ok().map(|(_, u)| u))
            }
        };
        if let Some(sp) = found {
            return Ok(sp);
        }
    }
    Err(Error::NoConvergence(format!("no {:?} space within {} candidates", family, budget)))
}

/// `count` spaces cycling through the families, reproducible from `seed`.
pub fn special_corpus(count: usize, seed: u64) -> Result<Vec<SpecialSpace<Exact>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fams = [Family::A, Family::B, Family::C];
    (0..count).map(|k| random_special(&mut rng, fams[k % 3], 20_000)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_have_the_promised_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_special(&mut rng, Family::A, 20_000).unwrap();
        assert_eq!(a.n, vec![1, 1]);
        let b = random_special(&mut rng, Family::B, 20_000).unwrap();
        assert_eq!(b.lambda.len(), 2);
        assert!(b.n.iter().sum::<usize>() >= 3);
        let c = random_special(&mut rng, Family::C, 20_000).unwrap();
        assert_eq!(c.lambda.len(), 3);
        assert_eq!(c.z.len(), 2);
        for sp in [&a, &b, &c] {
            assert!(sp.space.dim() <= 3 && sp.z.len() <= 3);
            assert_eq!(sp.n.iter().sum::<usize>(), sp.m.iter().sum::<usize>());
        }
    }
}
