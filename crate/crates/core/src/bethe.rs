//! Master functions, the Bethe equations and the correspondence between their
//! critical points and special spaces.
//!
//! Coordinates are flat: level `i` (`i = 1..N-1`) holds `n̄_i = n_{i+1}+…+n_N`
//! variables, levels concatenated in order.

use crate::diffop::factorized_from_tuple;
use crate::error::{Error, Result};
use crate::field::{Approx, Field};
use crate::gaudin::weight_dimension;
use crate::linalg;
use crate::poly::Poly;
use crate::qp::{QuasiPoly, Var};
use crate::roots::poly_roots;
use crate::spaces::{classify_special, FunctionSpace, SpecialSpace};
use crate::transform::special_bispectral_dual;
use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct MasterSpec {
    pub lambda: Vec<C>,
    pub z: Vec<C>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
}

impl MasterSpec {
    pub fn new(lambda: Vec<C>, z: Vec<C>, n: Vec<usize>, m: Vec<usize>) -> Result<Self> {
        if lambda.len() != n.len() || z.len() != m.len() {
            return Err(Error::InvalidInput("λ/n and z/m must have matching lengths".into()));
        }
        if lambda.len() < 2 {
            return Err(Error::InvalidInput("need N >= 2".into()));
        }
        for v in [&lambda, &z] {
            for a in 0..v.len() {
                for b in a + 1..v.len() {
                    if (v[a] - v[b]).norm() == 0.0 {
                        return Err(Error::CoincidingParameters(format!("{} repeated", v[a])));
                    }
                }
            }
        }
        let (sn, sm): (usize, usize) = (n.iter().sum(), m.iter().sum());
        if sn != sm {
            return Err(Error::WeightMismatch(format!("Σn = {} but Σm = {}", sn, sm)));
        }
        Ok(MasterSpec { lambda, z, n, m })
    }

    /// Shorthand for real parameters.
    pub fn real(lambda: &[f64], z: &[f64], n: &[usize], m: &[usize]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| C::new(x, 0.0)).collect();
        MasterSpec::new(c(lambda), c(z), n.to_vec(), m.to_vec())
    }

    pub fn big_n(&self) -> usize {
        self.lambda.len()
    }

    /// `n̄_i` for `i = 1..N-1` (index 0 is level 1).
    pub fn nbar(&self) -> Vec<usize> {
        (1..self.big_n()).map(|i| self.n[i..].iter().sum()).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.nbar().iter().sum()
    }

    /// `(start, len)` of each level in the flat coordinate vector.
    pub fn levels(&self) -> Vec<(usize, usize)> {
        let mut off = 0;
        self.nbar()
            .into_iter()
            .map(|k| {
                let r = (off, k);
                off += k;
                r
            })
            .collect()
    }

    pub fn split(&self, t: &[C]) -> Vec<Vec<C>> {
        self.levels().iter().map(|&(s, k)| t[s..s + k].to_vec()).collect()
    }

    /// The master function of the bispectral dual, `Φ(·; z; λ; n)`.
    pub fn dual(&self) -> MasterSpec {
        MasterSpec { lambda: self.z.clone(), z: self.lambda.clone(), n: self.m.clone(), m: self.n.clone() }
    }

    /// `Φ(·; λ_2, λ_1; z; m)` for N = 2.
    pub fn swapped(&self) -> MasterSpec {
        let mut s = self.clone();
        s.lambda.reverse();
        s.n.reverse();
        s
    }
}

/// One orbit representative; coordinates sorted within each level by (re, im).
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub levels: Vec<Vec<C>>,
    pub residual: f64,
}

impl CriticalPoint {
    pub fn new(mut levels: Vec<Vec<C>>, residual: f64) -> Self {
        for l in &mut levels {
            l.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        }
        CriticalPoint { levels, residual }
    }

    pub fn flat(&self) -> Vec<C> {
        self.levels.concat()
    }

    /// `y_i = ∏_j (x - t^{(i)}_j)`.
    pub fn tuple(&self) -> Vec<Poly<Approx>> {
        self.levels.iter().map(|l| Poly::from_roots(&l.iter().map(|&t| Approx::c(t)).collect::<Vec<_>>())).collect()
    }

    /// Distance between orbits: greedy nearest matching inside each level.
    pub fn orbit_distance(&self, o: &CriticalPoint) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.levels.iter().zip(&o.levels) {
            let mut used = vec![false; b.len()];
            for x in a {
                let best = (0..b.len()).filter(|&k| !used[k]).min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
                match best {
                    Some(k) => {
                        used[k] = true;
                        worst = worst.max((b[k] - x).norm());
                    }
                    None => return f64::INFINITY,
                }
            }
        }
        worst
    }
}

fn scale_of(spec: &MasterSpec, t: &[C]) -> f64 {
    spec.z.iter().chain(&spec.lambda).chain(t).map(|c| c.norm()).fold(1.0, f64::max)
}

/// Φ is defined and nonzero: no `t^{(1)}` at a `z_a` with `m_a > 0`, no repeated
/// coordinate in a level, no collision between adjacent levels.
pub fn check_admissible(spec: &MasterSpec, t: &[C]) -> Result<()> {
    if t.len() != spec.num_vars() {
        return Err(Error::InvalidInput(format!("expected {} coordinates, got {}", spec.num_vars(), t.len())));
    }
    let eps = 1e-12 * scale_of(spec, t);
    let lv = spec.split(t);
    let close = |a: C, b: C| (a - b).norm() <= eps;
    if let Some(first) = lv.first() {
        for (za, &ma) in spec.z.iter().zip(&spec.m) {
            if ma > 0 && first.iter().any(|&x| close(x, *za)) {
                return Err(Error::NonAdmissiblePoint(format!("t^(1) hits z = {}", za)));
            }
        }
    }
    for (i, l) in lv.iter().enumerate() {
        for a in 0..l.len() {
            if l[a + 1..].iter().any(|&x| close(x, l[a])) {
                return Err(Error::NonAdmissiblePoint(format!("repeated coordinate at level {}", i + 1)));
            }
            if let Some(next) = lv.get(i + 1) {
                if next.iter().any(|&x| close(x, l[a])) {
                    return Err(Error::NonAdmissiblePoint(format!("levels {} and {} collide", i + 1, i + 2)));
                }
            }
        }
    }
    Ok(())
}

/// Principal-branch `log Φ` as a sum of factor logarithms.
pub fn log_master(spec: &MasterSpec, t: &[C]) -> Result<C> {
    check_admissible(spec, t)?;
    let (l, z, m) = (&spec.lambda, &spec.z, &spec.m);
    let lv = spec.split(t);
    let mut acc = l[0] * z.iter().zip(m).map(|(za, &ma)| za * ma as f64).sum::<C>();
    for (i, level) in lv.iter().enumerate() {
        acc += (l[i + 1] - l[i]) * level.iter().sum::<C>();
    }
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            if m[a] * m[b] > 0 {
                acc += (z[a] - z[b]).ln() * (m[a] * m[b]) as f64;
            }
        }
    }
    if let Some(first) = lv.first() {
        for tj in first {
            for (za, &ma) in z.iter().zip(m) {
                if ma > 0 {
                    acc -= (tj - za).ln() * ma as f64;
                }
            }
        }
    }
    for (i, level) in lv.iter().enumerate() {
        for a in 0..level.len() {
            for b in a + 1..level.len() {
                acc += 2.0 * (level[a] - level[b]).ln();
            }
            if let Some(next) = lv.get(i + 1) {
                for s in next {
                    acc -= (level[a] - s).ln();
                }
            }
        }
    }
    Ok(acc)
}

/// `Φ(t; λ; z; m)`, the product formula including the exponential prefactor.
pub fn master_value(spec: &MasterSpec, t: &[C]) -> Result<C> {
    Ok(log_master(spec, t)?.exp())
}

/// `∂ log Φ / ∂t` per coordinate; at level `i` this is the displayed left side
/// minus `λ_i - λ_{i+1}`.
pub fn critical_equations(spec: &MasterSpec, t: &[C]) -> Result<Vec<C>> {
    check_admissible(spec, t)?;
    Ok(gradient(spec, t))
}

fn gradient(spec: &MasterSpec, t: &[C]) -> Vec<C> {
    let lv = spec.split(t);
    let mut out = Vec::with_capacity(t.len());
    for (i, level) in lv.iter().enumerate() {
        for (j, &tj) in level.iter().enumerate() {
            let mut r = spec.lambda[i + 1] - spec.lambda[i];
            for (k, &tk) in level.iter().enumerate() {
                if k != j {
                    r += 2.0 / (tj - tk);
                }
            }
            if i == 0 {
                for (za, &ma) in spec.z.iter().zip(&spec.m) {
                    if ma > 0 {
                        r -= ma as f64 / (tj - za);
                    }
                }
            }
            for adj in [i.checked_sub(1), Some(i + 1)].into_iter().flatten() {
                if let Some(other) = lv.get(adj) {
                    for s in other {
                        r -= 1.0 / (tj - s);
                    }
                }
            }
            out.push(r);
        }
    }
    out
}

/// Hessian of `log Φ` in the coordinates.
pub fn critical_jacobian(spec: &MasterSpec, t: &[C]) -> Vec<Vec<C>> {
    let n = t.len();
    let levels = spec.levels();
    let level_of: Vec<usize> = levels.iter().enumerate().flat_map(|(i, &(_, k))| std::iter::repeat_n(i, k)).collect();
    let mut h = vec![vec![ZERO; n]; n];
    for p in 0..n {
        let li = level_of[p];
        let mut diag = ZERO;
        if li == 0 {
            for (za, &ma) in spec.z.iter().zip(&spec.m) {
                if ma > 0 {
                    diag += ma as f64 / (t[p] - za).powi(2);
                }
            }
        }
        for q in 0..n {
            if q == p {
                continue;
            }
            let lq = level_of[q];
            let w = (t[p] - t[q]).powi(2);
            if lq == li {
                h[p][q] = 2.0 / w;
                diag -= 2.0 / w;
            } else if lq + 1 == li || li + 1 == lq {
                h[p][q] = -1.0 / w;
                diag += 1.0 / w;
            }
        }
        h[p][p] = diag;
    }
    h
}

/// Partials of `log Φ` with respect to the parameters.
#[derive(Clone, Debug)]
pub struct Partials {
    pub lambda: Vec<C>,
    pub z: Vec<C>,
}

pub fn parameter_partials(spec: &MasterSpec, t: &[C]) -> Result<Partials> {
    check_admissible(spec, t)?;
    let nn = spec.big_n();
    let sums: Vec<C> = spec.split(t).iter().map(|l| l.iter().sum()).collect();
    let mz: C = spec.z.iter().zip(&spec.m).map(|(za, &ma)| za * ma as f64).sum();
    let lambda = (0..nn)
        .map(|i| {
            let prev = if i == 0 { mz } else { sums[i - 1] };
            let cur = sums.get(i).copied().unwrap_or(ZERO);
            prev - cur
        })
        .collect();
    let first = spec.split(t).into_iter().next().unwrap_or_default();
    let z = (0..spec.z.len())
        .map(|a| {
            let ma = spec.m[a] as f64;
            let mut r = spec.lambda[0] * ma;
            for b in (0..spec.z.len()).filter(|&b| b != a) {
                r += ma * spec.m[b] as f64 / (spec.z[a] - spec.z[b]);
            }
            for tj in &first {
                r += ma / (tj - spec.z[a]);
            }
            r
        })
        .collect();
    Ok(Partials { lambda, z })
}

/// Partials of `-n_2 log(λ_1 - λ_2)`, the factor separating `log Φ` from the
/// eigenvalues of the dynamical Hamiltonians when `N = 2`.
pub fn normalization_partials(spec: &MasterSpec) -> Result<Partials> {
    if spec.big_n() != 2 {
        return Err(Error::InvalidInput("normalization is only known for N = 2".into()));
    }
    let d = spec.n[1] as f64 / (spec.lambda[0] - spec.lambda[1]);
    Ok(Partials { lambda: vec![-d, d], z: vec![ZERO; spec.z.len()] })
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// number of Newton starts; `None` means `200 · #variables`
    pub starts: Option<usize>,
    pub seed: u64,
    /// acceptance threshold on the max-norm residual
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { starts: None, seed: 0, tol: 1e-10, max_iter: 100 }
    }
}

/// `Σ c_i (λ_i - λ_{i+1}) ≠ 0` for `0 ≤ c_i ≤ n̄_i`, `c ≠ 0`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GenericityReport {
    pub min_abs: f64,
    pub offending: Vec<Vec<usize>>,
}

impl GenericityReport {
    pub fn generic(&self) -> bool {
        self.offending.is_empty()
    }
}

pub fn genericity(spec: &MasterSpec) -> GenericityReport {
    let nbar = spec.nbar();
    let diffs: Vec<C> = (0..nbar.len()).map(|i| spec.lambda[i] - spec.lambda[i + 1]).collect();
    let mut c = vec![0usize; nbar.len()];
    let mut min_abs = f64::INFINITY;
    let mut offending = vec![];
    let scale = diffs.iter().map(|d| d.norm()).fold(1.0, f64::max);
    loop {
        // odometer over the box
        let mut k = 0;
        while k < c.len() && c[k] == nbar[k] {
            c[k] = 0;
            k += 1;
        }
        if k == c.len() {
            break;
        }
        c[k] += 1;
        let v: C = c.iter().zip(&diffs).map(|(&ci, d)| d * ci as f64).sum();
        min_abs = min_abs.min(v.norm());
        if v.norm() <= 1e-12 * scale {
            offending.push(c.clone());
        }
    }
    GenericityReport { min_abs, offending }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub points: Vec<CriticalPoint>,
    pub starts: usize,
    pub converged: usize,
    /// `dim (L_{m_1} ⊗ … ⊗ L_{m_M})[n]`, an upper bound for the orbit count
    pub bound: usize,
    pub genericity: GenericityReport,
}

fn inf_norm(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Damped Newton on the gradient of `log Φ`.
fn newton(spec: &MasterSpec, mut t: Vec<C>, max_iter: usize) -> Option<(Vec<C>, f64)> {
    let n = t.len();
    let blowup = 1e6 * scale_of(spec, &[]);
    let residual = |t: &[C]| check_admissible(spec, t).ok().map(|_| inf_norm(&gradient(spec, t)));
    let mut r = residual(&t)?;
    for _ in 0..max_iter {
        if r < 1e-12 {
            break;
        }
        let f = gradient(spec, &t);
        let j = critical_jacobian(spec, &t);
        let jm = DMatrix::from_fn(n, n, |a, b| j[a][b]);
        let step = jm.lu().solve(&DVector::from_iterator(n, f.iter().map(|x| -x)))?;
        let mut alpha = 1.0;
        loop {
            let trial: Vec<C> = t.iter().zip(step.iter()).map(|(x, d)| x + d * alpha).collect();
            if let Some(rt) = residual(&trial) {
                if rt < r || alpha < 1e-3 {
                    t = trial;
                    r = rt;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-6 {
                return None;
            }
        }
        if t.iter().any(|x| !x.is_finite() || x.norm() > blowup) {
            return None;
        }
    }
    Some((t, r))
}

/// Orbit representatives of admissible critical points, found by multistart Newton.
pub fn solve_bethe(spec: &MasterSpec, opts: &SolveOptions) -> Result<SolveReport> {
    let nv = spec.num_vars();
    let bound = weight_dimension(&spec.m, &spec.n);
    let gen = genericity(spec);
    if !gen.generic() {
        log::warn!("λ differences are resonant: {:?}", gen.offending);
    }
    if nv == 0 {
        let p = CriticalPoint::new(vec![vec![]; spec.big_n() - 1], 0.0);
        return Ok(SolveReport { points: vec![p], starts: 0, converged: 0, bound, genericity: gen });
    }
    let starts = opts.starts.unwrap_or(200 * nv);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let center: C = spec.z.iter().sum::<C>() / spec.z.len().max(1) as f64;
    let radius = 2.0 * spec.z.iter().chain(&spec.lambda).map(|c| c.norm()).fold(1.0, f64::max);
    let inits: Vec<Vec<C>> = (0..starts)
        .map(|_| {
            (0..nv)
                .map(|_| {
                    let r = radius * rng.random::<f64>().sqrt();
                    let th = std::f64::consts::TAU * rng.random::<f64>();
                    center + C::from_polar(r, th)
                })
                .collect()
        })
        .collect();
    let results: Vec<Option<(Vec<C>, f64)>> = inits.into_par_iter().map(|t0| newton(spec, t0, opts.max_iter)).collect();
    let mut points: Vec<CriticalPoint> = vec![];
    let mut converged = 0;
    for (t, r) in results.into_iter().flatten() {
        if r > opts.tol {
            continue;
        }
        converged += 1;
        let cp = CriticalPoint::new(spec.split(&t), r);
        match points.iter_mut().find(|p| p.orbit_distance(&cp) < 1e-7) {
            Some(p) if p.residual > cp.residual => *p = cp,
            Some(_) => {}
            None => points.push(cp),
        }
    }
    if converged == 0 {
        return Err(Error::MaxStartsExceeded(starts));
    }
    points.sort_by(|a, b| {
        let (x, y) = (a.flat(), b.flat());
        x.iter()
            .zip(&y)
            .map(|(p, q)| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if points.len() > bound {
        return Err(Error::PossiblyNonGeneric(format!(
            "{} distinct orbits exceed the weight-space bound {}",
            points.len(),
            bound
        )));
    }
    Ok(SolveReport { points, starts, converged, bound, genericity: gen })
}

/// Numeric roots of each polynomial; also checks admissibility of the tuple.
pub fn roots_of_tuple<F: Field>(y: &[Poly<F>], spec: &MasterSpec) -> Result<CriticalPoint> {
    let mut levels = vec![];
    for p in y {
        let mut l = vec![];
        for r in poly_roots(p)? {
            for _ in 0..r.multiplicity {
                l.push(r.value.to_c64());
            }
        }
        levels.push(l);
    }
    let cp = CriticalPoint::new(levels, 0.0);
    let t = cp.flat();
    if t.len() != spec.num_vars() {
        return Err(Error::NonAdmissibleSpace(format!("tuple degrees {:?} differ from n̄ = {:?}", cp.levels.iter().map(Vec::len).collect::<Vec<_>>(), spec.nbar())));
    }
    // separations are looser than the solver's since roots of computed polynomials are noisy
    let eps = 1e-7 * scale_of(spec, &t);
    let lv = &cp.levels;
    for (i, l) in lv.iter().enumerate() {
        for a in 0..l.len() {
            let bad_z = i == 0 && spec.z.iter().zip(&spec.m).any(|(z, &m)| m > 0 && (l[a] - z).norm() < eps);
            let rep = l[a + 1..].iter().any(|x| (x - l[a]).norm() < eps);
            let adj = lv.get(i + 1).is_some_and(|nx| nx.iter().any(|x| (x - l[a]).norm() < eps));
            if bad_z || rep || adj {
                return Err(Error::NonAdmissibleSpace(format!("level {} root {} collides", i + 1, l[a])));
            }
        }
    }
    let residual = inf_norm(&gradient(spec, &t));
    Ok(CriticalPoint { residual, ..cp })
}

/// `y_i = e^{-(λ_{i+1}+…+λ_N)x} Wr(p_{i+1} e^{λ_{i+1}x}, …, p_N e^{λ_N x})`, monic.
pub fn tuple_from_space<F: Field>(special: &SpecialSpace<F>) -> Result<Vec<Poly<F>>> {
    let basis = special.space.basis();
    let nn = basis.len();
    let mut out = vec![];
    for i in 1..nn {
        let sub = FunctionSpace::new(basis[i..].to_vec(), special.space.var)?;
        let w = sub.wronskian()?;
        let (_, r) = w.single().ok_or(Error::NotGraded)?;
        let p = r.as_poly().ok_or(Error::NonPolynomialCoefficients)?;
        out.push(p.monic());
    }
    Ok(out)
}

/// Master-function parameters of a special space (in its basis order).
pub fn spec_of_special<F: Field>(special: &SpecialSpace<F>) -> Result<MasterSpec> {
    let c = |v: &[F]| v.iter().map(|x| x.to_c64()).collect();
    MasterSpec::new(c(&special.lambda), c(&special.z), special.n.clone(), special.m.clone())
}

/// The critical point represented by `y^V`.
pub fn critical_point_of_space<F: Field>(special: &SpecialSpace<F>) -> Result<CriticalPoint> {
    let spec = spec_of_special(special)?;
    roots_of_tuple(&tuple_from_space(special)?, &spec)
}

/// Kernel of the factorized operator, one `p_i e^{λ_i x}` per exponent.
pub fn space_from_critical_point(spec: &MasterSpec, cp: &CriticalPoint) -> Result<SpecialSpace<Approx>> {
    let t = cp.flat();
    check_admissible(spec, &t)?;
    let res = inf_norm(&gradient(spec, &t));
    if res > 1e-6 {
        return Err(Error::NonAdmissiblePoint(format!("residual {:e} is not a critical point", res)));
    }
    let a = |v: &[C]| v.iter().map(|&x| Approx::c(x)).collect::<Vec<_>>();
    let (lambda, z) = (a(&spec.lambda), a(&spec.z));
    let y = cp.tuple();
    let op = factorized_from_tuple(&y, &lambda, &z, &spec.m, Var::X)?;
    // degrees: n_1 = Σm - deg y_1, n_i = deg y_{i-1} - deg y_i
    let sm: usize = spec.m.iter().sum();
    let mut degs = vec![];
    let mut prev = sm;
    for p in y.iter().map(|p| p.deg().max(0) as usize).chain([0]) {
        degs.push(prev.checked_sub(p).ok_or_else(|| Error::KernelSolveFailed("degrees of the tuple increase".into()))?);
        prev = p;
    }
    let order = op.order();
    // sample points on a circle clear of every pole
    let rad = 2.0 + 2.0 * scale_of(spec, &t);
    let mut basis = vec![];
    for (i, &d) in degs.iter().enumerate() {
        let li = spec.lambda[i];
        let samples = 2 * (d + 1) + 4;
        let rows: Vec<Vec<C>> = (0..samples)
            .map(|s| {
                let x = C::from_polar(rad, 0.7 + std::f64::consts::TAU * s as f64 / samples as f64);
                let coef: Vec<C> = (0..=order).map(|j| op.coeffs[order - j].eval_c64(x).unwrap_or(ZERO)).collect();
                (0..=d)
                    .map(|k| {
                        // e^{-λx} ∂^j (x^k e^{λx}) = Σ_r C(j,r) λ^{j-r} (x^k)^{(r)}
                        let mut acc = ZERO;
                        for (j, cj) in coef.iter().enumerate() {
                            let mut dj = ZERO;
                            for r in 0..=j.min(k) {
                                let falling: f64 = (0..r).map(|q| (k - q) as f64).product();
                                dj += binom(j, r) * li.powu((j - r) as u32) * falling * x.powu((k - r) as u32);
                            }
                            acc += cj * dj;
                        }
                        acc / x.powu(d as u32)
                    })
                    .collect()
            })
            .collect();
        let (v, ratio) = linalg::approx_null_vector(&rows, d + 1);
        if ratio > 1e-7 {
            return Err(Error::KernelSolveFailed(format!("no kernel element with exponent {} (σ ratio {:e})", li, ratio)));
        }
        let p = Poly::new(v.iter().map(|&c| Approx::c(c)).collect()).monic();
        basis.push(QuasiPoly::poly_exp(p, lambda[i], Var::X));
    }
    let space = FunctionSpace::new(basis, Var::X)?;
    let sp = classify_special(&space, &z)?;
    reorder_like(sp, &lambda)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, q| acc * (n - q) as f64 / (q + 1) as f64)
}

/// Puts the basis of a special space in the given exponent order.
pub fn reorder_like<F: Field>(sp: SpecialSpace<F>, lambda: &[F]) -> Result<SpecialSpace<F>> {
    let mut idx = vec![];
    for l in lambda {
        idx.push(sp.lambda.iter().position(|x| x.approx_eq(l)).ok_or_else(|| Error::NotSpecial(format!("missing exponent {}", l)))?);
    }
    let basis = sp.space.basis();
    let space = FunctionSpace::new(idx.iter().map(|&k| basis[k].clone()).collect(), sp.space.var)?;
    Ok(SpecialSpace {
        space,
        z: sp.z,
        lambda: idx.iter().map(|&k| sp.lambda[k].clone()).collect(),
        n: idx.iter().map(|&k| sp.n[k]).collect(),
        m: sp.m,
    })
}

/// The three N = M = 2 master functions and their matched critical points:
/// `t` roots of `p_2`, `s` roots of `p_1`, `r` roots of `q_2`.
#[derive(Clone, Debug)]
pub struct LagrangeChain {
    pub specs: [MasterSpec; 3],
    pub points: [CriticalPoint; 3],
    pub v: SpecialSpace<Approx>,
    pub u: SpecialSpace<Approx>,
}

pub fn lagrange_chain(spec: &MasterSpec, cp: &CriticalPoint) -> Result<LagrangeChain> {
    if spec.big_n() != 2 || spec.z.len() != 2 {
        return Err(Error::InvalidInput("the chain needs N = M = 2".into()));
    }
    let v = space_from_critical_point(spec, cp)?;
    let (_, u) = special_bispectral_dual(&v)?;
    let u = reorder_like(u, &v.z)?;
    let p = v.polys();
    let q = u.polys();
    let s2 = spec.swapped();
    let s3 = spec.dual();
    let p1 = roots_of_tuple(&[p[0].monic()], &s2)?;
    let q2 = roots_of_tuple(&[q[1].monic()], &s3)?;
    Ok(LagrangeChain { specs: [spec.clone(), s2, s3], points: [cp.clone(), p1, q2], v, u })
}

#[derive(Clone, Debug)]
pub struct LagrangeReport {
    /// rows: `∂/∂λ_1, ∂/∂λ_2, ∂/∂z_1, ∂/∂z_2`; columns: the three functions
    pub partials: Vec<[C; 3]>,
    /// relative deviation of `F_2` from `F_1`
    pub swapped_deviation: f64,
    /// relative deviation of `F_3` from `F_1`
    pub dual_deviation: f64,
    /// largest deviation after each `F_k` is multiplied by `(λ_1 - λ_2)^{-n_2}` of its own spec
    pub normalized_deviation: f64,
}

impl LagrangeReport {
    pub fn max_deviation(&self) -> f64 {
        self.swapped_deviation.max(self.dual_deviation)
    }
}

/// The four parameter partials of `log F_1 = log Φ(t; λ; z; m)`,
/// `log F_2 = log Φ(s; λ_2, λ_1; z; m)` and `log F_3 = log Φ(r; z; λ; n)`.
pub fn lagrange_partials(specs: &[MasterSpec; 3], cps: &[CriticalPoint; 3]) -> Result<LagrangeReport> {
    let p1 = parameter_partials(&specs[0], &cps[0].flat())?;
    let p2 = parameter_partials(&specs[1], &cps[1].flat())?;
    let p3 = parameter_partials(&specs[2], &cps[2].flat())?;
    let partials = vec![
        [p1.lambda[0], p2.lambda[1], p3.z[0]],
        [p1.lambda[1], p2.lambda[0], p3.z[1]],
        [p1.z[0], p2.z[0], p3.lambda[0]],
        [p1.z[1], p2.z[1], p3.lambda[1]],
    ];
    let dev = |rows: &[[C; 3]], k: usize| {
        rows.iter().map(|row| (row[k] - row[0]).norm() / row.iter().map(|x| x.norm()).fold(1.0, f64::max)).fold(0.0, f64::max)
    };
    let q: Vec<Partials> = specs.iter().map(normalization_partials).collect::<Result<_>>()?;
    let corr = [
        [q[0].lambda[0], q[1].lambda[1], q[2].z[0]],
        [q[0].lambda[1], q[1].lambda[0], q[2].z[1]],
        [q[0].z[0], q[1].z[0], q[2].lambda[0]],
        [q[0].z[1], q[1].z[1], q[2].lambda[1]],
    ];
    let normalized: Vec<[C; 3]> = partials.iter().zip(&corr).map(|(r, c)| [r[0] + c[0], r[1] + c[1], r[2] + c[2]]).collect();
    Ok(LagrangeReport {
        swapped_deviation: dev(&partials, 1),
        dual_deviation: dev(&partials, 2),
        normalized_deviation: dev(&normalized, 1).max(dev(&normalized, 2)),
        partials,
    })
}

/// `lagrange_partials`, failing when any deviation exceeds `tol`.
pub fn lagrange_match(specs: &[MasterSpec; 3], cps: &[CriticalPoint; 3], tol: f64) -> Result<LagrangeReport> {
    let rep = lagrange_partials(specs, cps)?;
    if rep.max_deviation() > tol {
        return Err(Error::CorrespondenceBroken(format!("partials differ by {:e}: {:?}", rep.max_deviation(), rep.partials)));
    }
    Ok(rep)
}
