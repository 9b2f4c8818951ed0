//! gl_N weight spaces in the monomial realization, KZ and dynamical
//! Hamiltonians, the (gl_N, gl_M) duality and the N = M = 2 Bethe vectors.
//!
//! A basis vector of `(L_{m_1} ⊗ … ⊗ L_{m_M})[n]` is an `M×N` matrix `k` of
//! exponents: factor `a` holds the monomial `∏_i x_i^{k_{ai}}`.

use crate::bethe::{normalization_partials, parameter_partials, CriticalPoint, MasterSpec};
use crate::error::{Error, Result};
use crate::field::{Approx, Exact, Field};
use crate::linalg::{self, Matrix};
use crate::diffop::{extract_phi, special_fundamental};
use crate::poly::{factorial, Poly};
use crate::spaces::SpecialSpace;
use num::complex::Complex64;
use std::collections::{BTreeMap, HashMap};

#[derive(Clone, Debug)]
pub struct WeightBasis {
    /// number of variables per factor (the `N` of gl_N)
    pub n_vars: usize,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    /// row-major `M×N` exponent matrices in lexicographic order
    pub mats: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl WeightBasis {
    pub fn dim(&self) -> usize {
        self.mats.len()
    }
    pub fn factors(&self) -> usize {
        self.m.len()
    }
    pub fn index_of(&self, mat: &[usize]) -> Option<usize> {
        self.index.get(mat).copied()
    }
    pub fn entry(&self, k: usize, a: usize, i: usize) -> usize {
        self.mats[k][a * self.n_vars + i]
    }
}

fn check_weights(m: &[usize], n: &[usize]) -> Result<()> {
    let (sm, sn): (usize, usize) = (m.iter().sum(), n.iter().sum());
    if sm != sn {
        return Err(Error::WeightMismatch(format!("Σm = {} but Σn = {}", sm, sn)));
    }
    Ok(())
}

/// Rows with the given sums, columns bounded by what remains of `n`.
fn enumerate(m: &[usize], cols: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let nv = cols.len();
    let a = cur.len() / nv.max(1);
    if a == m.len() {
        if cols.iter().all(|&c| c == 0) {
            out.push(cur.clone());
        }
        return;
    }
    fn row(
        i: usize,
        left: usize,
        m: &[usize],
        cols: &mut Vec<usize>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let nv = cols.len();
        if i + 1 == nv {
            if left <= cols[i] {
                cols[i] -= left;
                cur.push(left);
                enumerate(m, cols, cur, out);
                cur.pop();
                cols[i] += left;
            }
            return;
        }
        for v in 0..=left.min(cols[i]) {
            cols[i] -= v;
            cur.push(v);
            row(i + 1, left - v, m, cols, cur, out);
            cur.pop();
            cols[i] += v;
        }
    }
    row(0, m[a], m, cols, cur, out);
}

/// Basis of `(L_{m_1} ⊗ … ⊗ L_{m_M})[n_1, …, n_N]`.
pub fn build_weight_basis(n_vars: usize, m: &[usize], n: &[usize]) -> Result<WeightBasis> {
    if n.len() != n_vars {
        return Err(Error::WeightMismatch(format!("expected {} weight entries, got {}", n_vars, n.len())));
    }
    check_weights(m, n)?;
    let mut mats = vec![];
    if n_vars > 0 {
        enumerate(m, &mut n.to_vec(), &mut vec![], &mut mats);
    }
    let index = mats.iter().enumerate().map(|(k, v)| (v.clone(), k)).collect();
    Ok(WeightBasis { n_vars, m: m.to_vec(), n: n.to_vec(), mats, index })
}

/// Number of nonnegative integer matrices with row sums `m` and column sums `n`.
pub fn weight_dimension(m: &[usize], n: &[usize]) -> usize {
    if m.iter().sum::<usize>() != n.iter().sum::<usize>() {
        return 0;
    }
    fn count(m: &[usize], cols: &mut Vec<usize>, memo: &mut HashMap<(usize, Vec<usize>), usize>) -> usize {
        let Some((&first, rest)) = m.split_first() else {
            return usize::from(cols.iter().all(|&c| c == 0));
        };
        let key = (m.len(), cols.clone());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        fn fill(i: usize, left: usize, rest: &[usize], cols: &mut Vec<usize>, memo: &mut HashMap<(usize, Vec<usize>), usize>) -> usize {
            if i + 1 == cols.len() {
                if left > cols[i] {
                    return 0;
                }
                cols[i] -= left;
                let r = count(rest, cols, memo);
                cols[i] += left;
                return r;
            }
            let mut s = 0;
            for v in 0..=left.min(cols[i]) {
                cols[i] -= v;
                s += fill(i + 1, left - v, rest, cols, memo);
                cols[i] += v;
            }
            s
        }
        let r = if cols.is_empty() { usize::from(first == 0) * count(rest, cols, memo) } else { fill(0, first, rest, cols, memo) };
        memo.insert(key, r);
        r
    }
    count(m, &mut n.to_vec(), &mut HashMap::new())
}

/// `E_{ij}^{(a)} = x_i ∂_j` on factor `a`.
fn e_on(mat: &[usize], nv: usize, a: usize, i: usize, j: usize) -> Option<(Vec<usize>, usize)> {
    let c = mat[a * nv + j];
    if c == 0 {
        return None;
    }
    let mut out = mat.to_vec();
    out[a * nv + j] -= 1;
    out[a * nv + i] += 1;
    Some((out, c))
}

type Vector = BTreeMap<Vec<usize>, i64>;

fn e_vec(v: &Vector, nv: usize, a: usize, i: usize, j: usize) -> Vector {
    let mut out = Vector::new();
    for (mat, c) in v {
        if let Some((w, k)) = e_on(mat, nv, a, i, j) {
            *out.entry(w).or_insert(0) += c * k as i64;
        }
    }
    out
}

fn add_into(acc: &mut Vector, v: &Vector, s: i64) {
    for (k, c) in v {
        *acc.entry(k.clone()).or_insert(0) += s * c;
    }
}

/// Integer matrix of a weight-preserving operator given on single basis vectors.
fn int_matrix(basis: &WeightBasis, op: impl Fn(&Vector) -> Vector) -> Vec<Vec<i64>> {
    let d = basis.dim();
    let mut out = vec![vec![0i64; d]; d];
    for (l, mat) in basis.mats.iter().enumerate() {
        let img = op(&Vector::from([(mat.clone(), 1)]));
        for (w, c) in img {
            if c != 0 {
                let k = basis.index_of(&w).expect("operator preserves the weight");
                out[k][l] += c;
            }
        }
    }
    out
}

/// `Ω^{(ab)} = Σ_{ij} E_{ij}^{(a)} E_{ji}^{(b)}`.
pub fn casimir(basis: &WeightBasis, a: usize, b: usize) -> Vec<Vec<i64>> {
    let nv = basis.n_vars;
    int_matrix(basis, |v| {
        let mut acc = Vector::new();
        for i in 0..nv {
            for j in 0..nv {
                add_into(&mut acc, &e_vec(&e_vec(v, nv, b, j, i), nv, a, i, j), 1);
            }
        }
        acc
    })
}

/// `E_{ii}^{(a)}`, diagonal.
pub fn cartan(basis: &WeightBasis, a: usize, i: usize) -> Vec<Vec<i64>> {
    int_matrix(basis, |v| e_vec(v, basis.n_vars, a, i, i))
}

/// `E_{ij} E_{ji} - E_{ii}` with `E = Σ_a E^{(a)}`.
pub fn dynamical_term(basis: &WeightBasis, i: usize, j: usize) -> Vec<Vec<i64>> {
    let (nv, mm) = (basis.n_vars, basis.factors());
    int_matrix(basis, |v| {
        let mut acc = Vector::new();
        for a in 0..mm {
            let ev = e_vec(v, nv, a, j, i);
            for b in 0..mm {
                add_into(&mut acc, &e_vec(&ev, nv, b, i, j), 1);
            }
            add_into(&mut acc, &e_vec(v, nv, a, i, i), -1);
        }
        acc
    })
}

#[derive(Clone, Debug)]
pub struct HamiltonianSet<F: Field> {
    pub h: Vec<Matrix<F>>,
    pub g: Vec<Matrix<F>>,
    pub lambda: Vec<F>,
    pub z: Vec<F>,
}

fn scaled_add<F: Field>(acc: &mut Matrix<F>, m: &[Vec<i64>], s: &F) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (x, &c) in ra.iter_mut().zip(rm) {
            if c != 0 {
                *x = x.clone() + s.clone() * F::from_i64(c);
            }
        }
    }
}

fn distinct<F: Field>(v: &[F], what: &str) -> Result<()> {
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            if (v[a].clone() - v[b].clone()).inv().is_none() {
                return Err(Error::CoincidingParameters(format!("{}_{} = {}_{}", what, a + 1, what, b + 1)));
            }
        }
    }
    Ok(())
}

/// `H_a = Σ_{b≠a} Ω^{(ab)}/(z_a - z_b) + Σ_i λ_i E_ii^{(a)}` and
/// `G_i = Σ_{j≠i} (E_ij E_ji - E_ii)/(λ_i - λ_j) + Σ_a z_a E_ii^{(a)}`.
pub fn hamiltonians<F: Field>(basis: &WeightBasis, lambda: &[F], z: &[F]) -> Result<HamiltonianSet<F>> {
    let (nv, mm, d) = (basis.n_vars, basis.factors(), basis.dim());
    if lambda.len() != nv || z.len() != mm {
        return Err(Error::WeightMismatch("parameter counts differ from N, M".into()));
    }
    distinct(lambda, "λ")?;
    distinct(z, "z")?;
    let zero = || vec![vec![F::zero(); d]; d];
    let mut h = vec![];
    for a in 0..mm {
        let mut acc = zero();
        for b in (0..mm).filter(|&b| b != a) {
            let s = (z[a].clone() - z[b].clone()).inv().unwrap();
            scaled_add(&mut acc, &casimir(basis, a, b), &s);
        }
        for (i, l) in lambda.iter().enumerate() {
            scaled_add(&mut acc, &cartan(basis, a, i), l);
        }
        h.push(acc);
    }
    let mut g = vec![];
    for i in 0..nv {
        let mut acc = zero();
        for j in (0..nv).filter(|&j| j != i) {
            let s = (lambda[i].clone() - lambda[j].clone()).inv().unwrap();
            scaled_add(&mut acc, &dynamical_term(basis, i, j), &s);
        }
        for (a, za) in z.iter().enumerate() {
            scaled_add(&mut acc, &cartan(basis, a, i), za);
        }
        g.push(acc);
    }
    Ok(HamiltonianSet { h, g, lambda: lambda.to_vec(), z: z.to_vec() })
}

pub fn mat_mul<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter().zip(b).fold(F::zero(), |acc, (x, r)| {
                        if x.is_zero() || r[j].is_zero() {
                            acc
                        } else {
                            acc + x.clone() * r[j].clone()
                        }
                    })
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<F: Field>(a: &Matrix<F>, v: &[F]) -> Vec<F> {
    a.iter().map(|row| row.iter().zip(v).fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())).collect()
}

/// Largest entry of `[a, b]`.
pub fn commutator_norm<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> f64 {
    let (ab, ba) = (mat_mul(a, b), mat_mul(b, a));
    let mut worst = 0.0f64;
    for (r1, r2) in ab.iter().zip(&ba) {
        for (x, y) in r1.iter().zip(r2) {
            let d = x.clone() - y.clone();
            if !d.is_zero() {
                worst = worst.max(d.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    worst
}

impl<F: Field> HamiltonianSet<F> {
    pub fn all(&self) -> Vec<&Matrix<F>> {
        self.h.iter().chain(&self.g).collect()
    }

    /// Largest commutator entry over all pairs (exactly 0 when they commute).
    pub fn max_commutator(&self) -> f64 {
        let ops = self.all();
        let mut worst = 0.0f64;
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                worst = worst.max(commutator_norm(ops[i], ops[j]));
            }
        }
        worst
    }
}

/// Basis of the dual weight space and the transpose permutation:
/// `perm[k]` is the index of `mats[k]ᵀ` in the dual basis.
pub fn duality_isomorphism(basis: &WeightBasis) -> Result<(WeightBasis, Vec<usize>)> {
    let (nv, mm) = (basis.n_vars, basis.factors());
    let dual = build_weight_basis(mm, &basis.n, &basis.m)?;
    let perm = basis
        .mats
        .iter()
        .map(|k| {
            let t: Vec<usize> = (0..nv * mm).map(|p| k[(p % mm) * nv + p / mm]).collect();
            dual.index_of(&t).ok_or_else(|| Error::WeightMismatch("transpose left the weight space".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    if dual.dim() != basis.dim() {
        return Err(Error::WeightMismatch("dual weight spaces differ in dimension".into()));
    }
    Ok((dual, perm))
}

/// Largest entry of `P A P⁻¹ - B` for the permutation `P`.
pub fn conjugation_defect<F: Field>(a: &Matrix<F>, b: &Matrix<F>, perm: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for (k, row) in a.iter().enumerate() {
        for (l, x) in row.iter().enumerate() {
            let d = x.clone() - b[perm[k]][perm[l]].clone();
            if !d.is_zero() {
                worst = worst.max(d.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    worst
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct InterchangeReport {
    pub dim: usize,
    /// `max_a |H^N_a(λ,z) - G^M_a(z,λ)|`
    pub h_to_g: f64,
    /// `max_i |G^N_i(λ,z) - H^M_i(z,λ)|`
    pub g_to_h: f64,
    pub max_commutator: f64,
    pub dual_max_commutator: f64,
}

impl InterchangeReport {
    pub fn exact(&self) -> bool {
        self.h_to_g == 0.0 && self.g_to_h == 0.0
    }
}

/// Builds both sides of the duality and compares the Hamiltonians.
pub fn verify_interchange<F: Field>(basis: &WeightBasis, lambda: &[F], z: &[F]) -> Result<InterchangeReport> {
    let (dual, perm) = duality_isomorphism(basis)?;
    let ours = hamiltonians(basis, lambda, z)?;
    let theirs = hamiltonians(&dual, z, lambda)?;
    let h_to_g = ours.h.iter().zip(&theirs.g).map(|(a, b)| conjugation_defect(a, b, &perm)).fold(0.0, f64::max);
    let g_to_h = ours.g.iter().zip(&theirs.h).map(|(a, b)| conjugation_defect(a, b, &perm)).fold(0.0, f64::max);
    Ok(InterchangeReport {
        dim: basis.dim(),
        h_to_g,
        g_to_h,
        max_commutator: ours.max_commutator(),
        dual_max_commutator: theirs.max_commutator(),
    })
}

/// Bounds `α = max(0, n_2 - m_1)`, `β = min(m_2, n_2)` of the divided-power indices.
pub fn alpha_beta(m: [usize; 2], n: [usize; 2]) -> (usize, usize) {
    (n[1].saturating_sub(m[0]), m[1].min(n[1]))
}

/// `E_{21}^{n_2-i} v_{m_1}/(n_2-i)! ⊗ E_{21}^i v_{m_2}/i!  ↦  E_{21}^{m_1-n_2+i} v_{m_1}/… ⊗ E_{21}^{m_2-i} v_{m_2}/(m_2-i)!`,
/// i.e. the second-factor index `i ↦ m_2 - i` from `[n_1, n_2]` to `[n_2, n_1]`.
pub fn weyl_isomorphism(m: [usize; 2], n: [usize; 2], i: usize) -> Result<usize> {
    let (a, b) = alpha_beta(m, n);
    if i < a || i > b {
        return Err(Error::OutOfRange(format!("index {} outside [{}, {}]", i, a, b)));
    }
    Ok(m[1] - i)
}

/// `E_{21}^k x_1^m / k!` in the monomial realization, computed from the derivation action.
pub fn divided_power(m: usize, k: usize) -> Result<(usize, Exact)> {
    if k > m {
        return Err(Error::OutOfRange(format!("E_21^{} kills v_{}", k, m)));
    }
    let mut v = Vector::from([(vec![m, 0], 1)]);
    for _ in 0..k {
        v = e_vec(&v, 2, 0, 1, 0);
    }
    let (mat, c) = v.into_iter().next().expect("nonzero for k <= m");
    Ok((mat[1], Exact::from_i64(c) * factorial::<Exact>(k).inv().unwrap()))
}

/// Basis index and scalar of `E_{21}^{n_2-i} v_{m_1}/(n_2-i)! ⊗ E_{21}^i v_{m_2}/i!`.
pub fn divided_power_vector(basis: &WeightBasis, i: usize) -> Result<(usize, i64)> {
    if basis.n_vars != 2 || basis.factors() != 2 {
        return Err(Error::WeightMismatch("divided powers need N = M = 2".into()));
    }
    let (m, n2) = (&basis.m, basis.n[1]);
    if i > n2 || n2 - i > m[0] || i > m[1] {
        return Err(Error::OutOfRange(format!("index {} for m = {:?}, n_2 = {}", i, m, n2)));
    }
    let (k1, c1) = divided_power(m[0], n2 - i)?;
    let (k2, c2) = divided_power(m[1], i)?;
    let mat = vec![m[0] - k1, k1, m[1] - k2, k2];
    let k = basis.index_of(&mat).ok_or_else(|| Error::OutOfRange("vector outside the weight space".into()))?;
    Ok((k, (c1 * c2).to_c64().re.round() as i64))
}

/// `C_i(t) = Sym ∏_{j ≤ n_2-i} 1/(t_j - z_1) ∏_{j ≤ i} 1/(t_{n_2-i+j} - z_2)`, for `i = 0..=n_2`.
pub fn universal_coefficients(t: &[Complex64], z: [Complex64; 2]) -> Result<Vec<Complex64>> {
    let n2 = t.len();
    for tj in t {
        if (tj - z[0]).norm() == 0.0 || (tj - z[1]).norm() == 0.0 {
            return Err(Error::NonAdmissiblePoint(format!("t = {} hits a point z", tj)));
        }
    }
    let perms = permutations(n2);
    Ok((0..=n2)
        .map(|i| {
            perms
                .iter()
                .map(|s| {
                    let mut p = Complex64::new(1.0, 0.0);
                    for (pos, &j) in s.iter().enumerate() {
                        let za = if pos < n2 - i { z[0] } else { z[1] };
                        p /= t[j] - za;
                    }
                    p
                })
                .sum()
        })
        .collect())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// `ω(t) = Σ_i C_i E_{21}^{n_2-i} v_{m_1}/(n_2-i)! ⊗ E_{21}^i v_{m_2}/i!` over the monomial basis.
pub fn bethe_vector_2x2(basis: &WeightBasis, t: &[Complex64], z: [Complex64; 2]) -> Result<Vec<Complex64>> {
    if t.len() != basis.n[1] {
        return Err(Error::WeightMismatch(format!("{} variables for n_2 = {}", t.len(), basis.n[1])));
    }
    let c = universal_coefficients(t, z)?;
    let mut out = vec![Complex64::new(0.0, 0.0); basis.dim()];
    for (i, ci) in c.iter().enumerate() {
        if let Ok((k, s)) = divided_power_vector(basis, i) {
            out[k] += ci * s as f64;
        }
    }
    Ok(out)
}

/// Coefficients of `p = Σ_i c_i (x-z_1)^{n-i}/(n-i)! · (x-z_2)^i/i!`.
pub fn mixed_basis_expand<F: Field>(p: &Poly<F>, z1: &F, z2: &F, n: usize) -> Result<Vec<F>> {
    if p.deg() > n as isize {
        return Err(Error::DegreeTooHigh(p.deg() as usize, n));
    }
    if (z1.clone() - z2.clone()).inv().is_none() {
        return Err(Error::CoincidingParameters("z_1 = z_2".into()));
    }
    let cols: Vec<Poly<F>> = (0..=n)
        .map(|i| {
            let s = (factorial::<F>(n - i) * factorial::<F>(i)).inv().unwrap();
            (&Poly::linear_root(z1).pow(n - i) * &Poly::linear_root(z2).pow(i)).scale(&s)
        })
        .collect();
    let rows: Matrix<F> = (0..=n).map(|k| cols.iter().map(|b| b.coeff(k)).collect()).collect();
    let rhs: Vec<F> = (0..=n).map(|k| p.coeff(k)).collect();
    linalg::solve(&rows, &rhs).ok_or_else(|| Error::InvalidInput("mixed basis system is singular".into()))
}

/// `max |a - s b| / max|a|` for the best scalar `s` (least squares), after dropping
/// the common scale.
pub fn proportionality_defect(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let dot: Complex64 = b.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
    let s = dot / (nb * nb);
    a.iter().zip(b).map(|(x, y)| (x - s * y).norm()).fold(0.0, f64::max) / a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `‖A v - μ v‖ / ‖v‖`.
pub fn eigen_residual(a: &Matrix<Approx>, v: &[Complex64], mu: Complex64) -> f64 {
    let va: Vec<Approx> = v.iter().map(|&x| Approx::c(x)).collect();
    let av = mat_vec(a, &va);
    let num: f64 = av.iter().zip(v).map(|(x, y)| (x.v - mu * y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct EigenMatch {
    pub eigenvalue: [f64; 2],
    /// proportionality defect against the best dual eigenvector
    pub defect: f64,
}

/// Eigenvalues from the complex Schur form, sorted by real then imaginary part.
pub fn eigenvalues<F: Field>(a: &Matrix<F>) -> Vec<Complex64> {
    let m = nalgebra::DMatrix::from_fn(a.len(), a.len(), |i, j| a[i][j].to_c64());
    let (_, tri) = m.schur().unpack();
    let mut out: Vec<Complex64> = (0..tri.nrows()).map(|i| tri[(i, i)]).collect();
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    out
}

/// Eigenvectors of a generic combination `Σ r_a H_a` compared across the duality.
///
/// The dual side uses `Σ r_a G_a` built on the transposed basis; only the
/// eigenline matching is reported.
pub fn conjecture_experiment(basis: &WeightBasis, lambda: &[Complex64], z: &[Complex64], seed: u64) -> Result<Vec<EigenMatch>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let la: Vec<Approx> = lambda.iter().map(|&c| Approx::c(c)).collect();
    let za: Vec<Approx> = z.iter().map(|&c| Approx::c(c)).collect();
    let (dual, perm) = duality_isomorphism(basis)?;
    let ours = hamiltonians(basis, &la, &za)?;
    let theirs = hamiltonians(&dual, &za, &la)?;
    let r: Vec<f64> = (0..ours.h.len()).map(|_| rng.random_range(0.5..1.5)).collect();
    let comb = |ms: &[Matrix<Approx>]| {
        let d = basis.dim();
        let mut acc = vec![vec![Approx::zero(); d]; d];
        for (m, &ri) in ms.iter().zip(&r) {
            for (ra, rm) in acc.iter_mut().zip(m) {
                for (x, y) in ra.iter_mut().zip(rm) {
                    *x = *x + *y * Approx::new(ri, 0.0);
                }
            }
        }
        acc
    };
    let a = comb(&ours.h);
    let b = comb(&theirs.g);
    let to_na = |m: &Matrix<Approx>| nalgebra::DMatrix::from_fn(m.len(), m.len(), |i, j| m[i][j].v);
    let (_, tri) = to_na(&a).schur().unpack();
    let eigs: Vec<Complex64> = (0..tri.nrows()).map(|i| tri[(i, i)]).collect();
    let kernel = |m: &Matrix<Approx>, mu: Complex64| {
        let rows: Vec<Vec<Complex64>> = m
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, x)| x.v - if i == j { mu } else { Complex64::new(0.0, 0.0) }).collect())
            .collect();
        linalg::approx_null_vector(&rows, m.len()).0
    };
    let mut out = vec![];
    for mu in eigs.iter() {
        let v = kernel(&a, *mu);
        let w = kernel(&b, *mu);
        let mut mapped = vec![Complex64::new(0.0, 0.0); v.len()];
        for (k, x) in v.iter().enumerate() {
            mapped[perm[k]] = *x;
        }
        out.push(EigenMatch { eigenvalue: [mu.re, mu.im], defect: proportionality_defect(&mapped, &w) });
    }
    Ok(out)
}

/// Polynomial part of the basis element of `sp` with exponent `mu`.
fn poly_at<F: Field>(sp: &SpecialSpace<F>, mu: &F) -> Result<Poly<F>> {
    sp.space
        .basis()
        .iter()
        .filter_map(|f| f.single())
        .find(|(l, _)| l.approx_eq(mu))
        .map(|(_, r)| r.num().clone())
        .ok_or_else(|| Error::InvalidInput(format!("no basis element with exponent {}", mu)))
}

fn c64s<F: Field>(v: &[F]) -> Vec<Complex64> {
    v.iter().map(|x| x.to_c64()).collect()
}

/// `(−1)^i v_i`.
fn twist(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().enumerate().map(|(i, &x)| if i % 2 == 1 { -x } else { x }).collect()
}

/// Relative residuals of the three-term relations
/// `(n_2-i)(m_2-i) c_{i+1} + i(n_1-m_2+i) c_{i-1} + (−2i² + i(2n_2-m_1+m_2) − n_2 m_2 + (λ_1-λ_2)(z_1-z_2)(i+φ)) c_i`
/// for `lo ≤ i ≤ hi`; each is divided by the largest of its three terms.
pub fn recurrence_residuals(
    c: &[Complex64],
    n: [usize; 2],
    m: [usize; 2],
    lambda: [Complex64; 2],
    z: [Complex64; 2],
    phi: Complex64,
    (lo, hi): (usize, usize),
) -> Vec<f64> {
    let [n1, n2] = n.map(|x| x as f64);
    let [m1, m2] = m.map(|x| x as f64);
    let get = |k: isize| if k < 0 { Complex64::new(0.0, 0.0) } else { c.get(k as usize).copied().unwrap_or_default() };
    (lo..=hi)
        .map(|i| {
            let fi = i as f64;
            let t = [
                get(i as isize + 1) * ((n2 - fi) * (m2 - fi)),
                get(i as isize - 1) * (fi * (n1 - m2 + fi)),
                get(i as isize)
                    * (Complex64::new(-2.0 * fi * fi + fi * (2.0 * n2 - m1 + m2) - n2 * m2, 0.0)
                        + (lambda[0] - lambda[1]) * (z[0] - z[1]) * (fi + phi)),
            ];
            let scale = t.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if scale == 0.0 {
                0.0
            } else {
                (t[0] + t[1] + t[2]).norm() / scale
            }
        })
        .collect()
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DualityReport {
    pub alpha: usize,
    pub beta: usize,
    /// proportionality defects of `d_{m_2-i}` and `e_i` against `c_i` on `α..=β`
    pub d_defect: f64,
    pub e_defect: f64,
    /// relation for `(−1)^i c_i` with `φ_{11}`
    pub recurrence_residual: f64,
    /// the same relation applied to `c_i` without the sign twist
    pub printed_sign_residual: f64,
    /// relation for `(−1)^i d_i` with `λ_1 ↔ λ_2`, `n_1 ↔ n_2`, `φ_{11} → φ_{12}`
    pub dual_recurrence_residual: f64,
    pub phi: [[f64; 4]; 2],
}

impl DualityReport {
    pub fn max_residual(&self) -> f64 {
        [self.d_defect, self.e_defect, self.recurrence_residual, self.dual_recurrence_residual].into_iter().fold(0.0, f64::max)
    }
}

/// Compares the expansions of `p_2`, `p_1` (from `V`) and `q_2` (from `U`) on
/// `α ≤ i ≤ β`, and checks the coefficient relations.
pub fn verify_duality_2x2<F: Field>(v: &SpecialSpace<F>, u: &SpecialSpace<F>, tol: f64) -> Result<DualityReport> {
    if v.lambda.len() != 2 || v.z.len() != 2 {
        return Err(Error::WeightMismatch("verify_duality_2x2 needs N = M = 2".into()));
    }
    if u.n != v.m || u.m != v.n {
        return Err(Error::WeightMismatch(format!("U has n = {:?}, m = {:?}", u.n, u.m)));
    }
    let (n, m) = ([v.n[0], v.n[1]], [v.m[0], v.m[1]]);
    let (la, z) = (&v.lambda, &v.z);
    let p1 = poly_at(v, &la[0])?;
    let p2 = poly_at(v, &la[1])?;
    let q2 = poly_at(u, &z[1])?;
    let c = c64s(&mixed_basis_expand(&p2, &z[0], &z[1], n[1])?);
    let d = c64s(&mixed_basis_expand(&p1, &z[0], &z[1], n[0])?);
    let e = c64s(&mixed_basis_expand(&q2, &la[0], &la[1], m[1])?);
    let (alpha, beta) = alpha_beta(m, n);
    let cs: Vec<Complex64> = (alpha..=beta).map(|i| c[i]).collect();
    let ds: Vec<Complex64> = (alpha..=beta).map(|i| d[m[1] - i]).collect();
    let es: Vec<Complex64> = (alpha..=beta).map(|i| e[i]).collect();
    let d_defect = proportionality_defect(&cs, &ds);
    let e_defect = proportionality_defect(&cs, &es);

    let phi = extract_phi(&special_fundamental(v)?, &[la[0].clone(), la[1].clone()], &[z[0].clone(), z[1].clone()])?;
    let phi_c = [[phi[0][0].to_c64(), phi[0][1].to_c64()], [phi[1][0].to_c64(), phi[1][1].to_c64()]];
    let lc = [la[0].to_c64(), la[1].to_c64()];
    let zc = [z[0].to_c64(), z[1].to_c64()];
    let worst = |r: &[f64], lo: usize| r.iter().enumerate().fold((0.0f64, lo), |acc, (k, &x)| if x > acc.0 { (x, lo + k) } else { acc });
    let rec = recurrence_residuals(&twist(&c), n, m, lc, zc, phi_c[0][0], (alpha, beta));
    let printed = recurrence_residuals(&c, n, m, lc, zc, phi_c[0][0], (alpha, beta));
    let (dlo, dhi) = alpha_beta(m, [n[1], n[0]]);
    let drec = recurrence_residuals(&twist(&d), [n[1], n[0]], m, [lc[1], lc[0]], zc, phi_c[0][1], (dlo, dhi));
    let report = DualityReport {
        alpha,
        beta,
        d_defect,
        e_defect,
        recurrence_residual: worst(&rec, alpha).0,
        printed_sign_residual: worst(&printed, alpha).0,
        dual_recurrence_residual: worst(&drec, dlo).0,
        phi: [
            [phi_c[0][0].re, phi_c[0][0].im, phi_c[0][1].re, phi_c[0][1].im],
            [phi_c[1][0].re, phi_c[1][0].im, phi_c[1][1].re, phi_c[1][1].im],
        ],
    };
    let checks = [(report.d_defect, alpha), (report.e_defect, alpha), worst(&rec, alpha), worst(&drec, dlo)];
    if let Some(&(residual, index)) = checks.iter().find(|(r, _)| *r > tol) {
        return Err(Error::DualityViolation { index, residual });
    }
    Ok(report)
}

/// Residuals `‖A ω - μ ω‖/‖ω‖` of the Bethe vector against the parameter partials of `log Φ`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EigenReport {
    pub h_residual: f64,
    pub g_residual: f64,
    /// `G_i` against the partials of `log Φ - n_2 log(λ_1 - λ_2)`
    pub g_normalized_residual: f64,
}

pub fn bethe_eigen_check(spec: &MasterSpec, cp: &CriticalPoint) -> Result<EigenReport> {
    if spec.big_n() != 2 || spec.z.len() != 2 {
        return Err(Error::WeightMismatch("the Bethe vector is built for N = M = 2".into()));
    }
    let basis = build_weight_basis(2, &spec.m, &spec.n)?;
    let t = cp.flat();
    let omega = bethe_vector_2x2(&basis, &t, [spec.z[0], spec.z[1]])?;
    let ap = |v: &[Complex64]| v.iter().map(|&x| Approx::c(x)).collect::<Vec<_>>();
    let hs = hamiltonians(&basis, &ap(&spec.lambda), &ap(&spec.z))?;
    let p = parameter_partials(spec, &t)?;
    let q = normalization_partials(spec)?;
    let worst = |ms: &[Matrix<Approx>], mu: &dyn Fn(usize) -> Complex64| {
        ms.iter().enumerate().map(|(k, a)| eigen_residual(a, &omega, mu(k))).fold(0.0, f64::max)
    };
    Ok(EigenReport {
        h_residual: worst(&hs.h, &|a| p.z[a]),
        g_residual: worst(&hs.g, &|i| p.lambda[i]),
        g_normalized_residual: worst(&hs.g, &|i| p.lambda[i] + q.lambda[i]),
    })
}
