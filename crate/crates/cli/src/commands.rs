use crate::report::{digest, Check, InputDigest, Report, Status};
use crate::{BakerArgs, DemoArgs, DualityArgs, SolveArgs, SpectrumArgs, TransformArgs, VerifyArgs};
use anyhow::{anyhow, bail, Context, Result};
use bispectral::baker::{verify_involution, Grid};
use bispectral::bethe::{
    critical_equations, critical_point_of_space, lagrange_chain, lagrange_partials, solve_bethe, space_from_critical_point,
    CriticalPoint, MasterSpec, SolveOptions,
};
use bispectral::diffop::{monic_fundamental, regularize, special_fundamental};
use bispectral::field::IoScalar;
use bispectral::gaudin::{
    bethe_eigen_check, build_weight_basis, conjecture_experiment, eigenvalues, hamiltonians, verify_duality_2x2,
    verify_interchange, weight_dimension,
};
use bispectral::io::{
    points_from_json, points_to_json, space_from_json, space_to_json, spec_from_json, special_to_json, PointsFile, SpaceFile,
    SpecFile,
};
use bispectral::spaces::{classify_special, Exponents, FunctionSpace};
use bispectral::transform::{bispectral_dual, special_bispectral_dual};
use bispectral::{Approx, Exact, Scalar};
use log::{debug, info};
use num::complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fs;
use std::path::Path;
use std::time::Instant;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(T, InputDigest)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let v = serde_json::from_slice(&bytes).with_context(|| format!("cannot parse {}", path.display()))?;
    Ok((v, digest(path, &bytes)))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(mut report: Report, out: Option<&Path>, start: Instant) -> Result<Status> {
    report.timing.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    match out {
        Some(p) => write_json(p, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(report.status)
}

fn space_scalars(f: &SpaceFile) -> Vec<&Scalar> {
    let mut out: Vec<&Scalar> = f.z.iter().flatten().collect();
    for q in &f.basis {
        for t in &q.terms {
            out.push(&t.lambda);
            out.extend(t.num.iter().chain(&t.den));
        }
    }
    out
}

fn c64_json(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

/// `{0, …, M-2, M-1+n}` for a special dual of dimension `M`.
fn special_exponents(dim: usize, n: usize) -> Exponents {
    let mut e: Vec<i64> = (0..dim as i64 - 1).collect();
    e.push(dim as i64 - 1 + n as i64);
    Exponents(e)
}

/// `{0, …, M-N_i-1, M-N_i+n_{i1}, …}` for a regular dual of dimension `M`.
fn regular_exponents(dim: usize, degrees: &[usize]) -> Exponents {
    let k = dim as i64 - degrees.len() as i64;
    Exponents((0..k).chain(degrees.iter().map(|&d| k + d as i64)).collect())
}

pub fn transform(a: &TransformArgs) -> Result<Status> {
    let start = Instant::now();
    let (file, d) = read_json::<SpaceFile>(&a.input)?;
    let exact = a.exact || space_scalars(&file).iter().all(|s| s.is_exact());
    info!("transform with the {} backend", if exact { "exact" } else { "approximate" });
    let (dual, checks, result) =
        if exact { transform_with::<Exact>(&file, a.special, a.tol)? } else { transform_with::<Approx>(&file, a.special, a.tol)? };
    write_json(&a.output, &dual)?;
    emit(Report::new("transform", None, vec![d], checks, result), a.report.as_deref(), start)
}

fn transform_with<F: IoScalar>(file: &SpaceFile, special: bool, tol: f64) -> Result<(SpaceFile, Vec<Check>, Value)> {
    let (space, z) = space_from_json::<F>(file)?;
    let backend = if F::EXACT { "exact" } else { "approx" };
    if special {
        let z = z.ok_or_else(|| anyhow!("a special transform needs the points \"z\" in the input"))?;
        let v = classify_special(&space, &z)?;
        info!("input is of type n = {:?}, m = {:?}", v.n, v.m);
        let (_, u) = special_bispectral_dual(&v)?;
        let (_, w) = special_bispectral_dual(&u)?;
        let swap = special_fundamental(&u)?.rel_distance(&special_fundamental(&v)?.bispectral_swap());
        let dim = u.space.dim();
        let exps = v
            .lambda
            .iter()
            .zip(&v.n)
            .all(|(l, &n)| u.space.exponents_at(l).map(|e| e == special_exponents(dim, n)).unwrap_or(false));
        let checks = vec![
            Check::holds("involution", "the special dual of the dual spans the input space", w.space.span_eq(&v.space)),
            Check::within(
                "operator swap",
                "the special fundamental operator of the dual is the x/∂ transpose of the input's, up to a scalar",
                swap,
                tol,
            ),
            Check::holds("dual type", "the dual is of (z, λ, m, n) type", u.n == v.m && u.m == v.n),
            Check::holds("dual exponents", "the dual has exponents {0, …, M-2, M-1+n_i} at each λ_i", exps),
        ];
        let result = json!({"backend": backend, "special": true, "dim": dim, "n": u.n, "m": u.m});
        Ok((special_to_json(&u), checks, result))
    } else {
        let u = bispectral_dual(&space)?.dual;
        let w = bispectral_dual(&u)?.dual;
        let sing = space.singular_points()?;
        let big_m: usize = sing.iter().map(|s| s.exponents.defect_count()).sum();
        let op = |s: &FunctionSpace<F>| -> Result<_> { Ok(regularize(&monic_fundamental(s)?, s)?.0) };
        let swap = op(&u)?.rel_distance(&op(&space)?.bispectral_swap());
        let exps = space
            .degrees()?
            .iter()
            .all(|(l, degs)| u.exponents_at(l).map(|e| e == regular_exponents(u.dim(), degs)).unwrap_or(false));
        let checks = vec![
            Check::holds("involution", "the dual of the dual spans the input space", w.span_eq(&space)),
            Check::within(
                "operator swap",
                "the regularized fundamental operator of the dual is the x/∂ transpose of the input's, up to a scalar",
                swap,
                tol,
            ),
            Check::holds("dual dimension", "the dual has dimension M, the number of exponent defects", u.dim() == big_m),
            Check::holds("dual exponents", "the dual has exponents {0, …, M-N_i-1, M-N_i+n_ij} at each λ_i", exps),
        ];
        let result = json!({"backend": backend, "special": false, "dim": u.dim()});
        Ok((space_to_json(&u, None), checks, result))
    }
}

pub fn bethe_solve(a: &SolveArgs) -> Result<Status> {
    let start = Instant::now();
    let (file, d) = read_json::<SpecFile>(&a.spec)?;
    let spec = spec_from_json(&file)?;
    let opts = SolveOptions { starts: a.starts, seed: a.seed, tol: a.tol, ..SolveOptions::default() };
    let rep = solve_bethe(&spec, &opts)?;
    info!("{} orbits from {} starts ({} converged)", rep.points.len(), rep.starts, rep.converged);
    write_json(&a.out, &points_to_json(&spec, &rep))?;
    let worst = rep.points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let checks = vec![
        Check::within("critical equations", "every reported point solves the critical equations", worst, a.tol),
        Check::holds(
            "orbit bound",
            "the number of orbits does not exceed the weight-space dimension",
            rep.points.len() <= rep.bound,
        ),
    ];
    let result = json!({
        "orbits": rep.points.len(),
        "bound": rep.bound,
        "starts": rep.starts,
        "converged": rep.converged,
        "generic": rep.genericity.generic(),
    });
    emit(Report::new("bethe solve", Some(a.seed), vec![d], checks, result), None, start)
}

/// Largest value over the points, kept per check name.
#[derive(Default)]
struct Worst(Vec<(&'static str, &'static str, f64, f64)>);

impl Worst {
    fn add(&mut self, name: &'static str, property: &'static str, residual: f64, tol: f64) {
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        match self.0.iter_mut().find(|e| e.0 == name) {
            Some(e) => e.2 = e.2.max(r),
            None => self.0.push((name, property, r, tol)),
        }
    }
    fn checks(&self) -> Vec<Check> {
        self.0.iter().map(|&(n, p, r, t)| Check::within(n, p, r, t)).collect()
    }
}

/// Checks shared by `bethe verify` and `demo`, plus per-point diagnostics.
fn point_checks(spec: &MasterSpec, points: &[CriticalPoint], tol: f64, seed: u64) -> Result<(Vec<Check>, Vec<Value>)> {
    let mut w = Worst::default();
    let mut diags = vec![];
    let two = spec.big_n() == 2 && spec.z.len() == 2;
    for (k, cp) in points.iter().enumerate() {
        debug!("point {}: {:?}", k, cp.levels);
        let g = critical_equations(spec, &cp.flat())?;
        let scale = cp.flat().iter().map(|x| x.norm()).fold(1.0, f64::max);
        let residual = g.iter().map(|x| x.norm()).fold(0.0, f64::max) / scale;
        w.add("critical equations", "the point solves the critical equations of the master function", residual, tol);
        if residual > tol {
            // nothing downstream is defined away from critical points
            diags.push(json!({"point": k, "skipped": true}));
            continue;
        }
        let v = space_from_critical_point(spec, cp)?;
        let back = critical_point_of_space(&v)?;
        w.add("space round trip", "the space built from the point represents the same orbit", back.orbit_distance(cp), tol);
        let (_, u) = special_bispectral_dual(&v)?;
        let (_, vv) = special_bispectral_dual(&u)?;
        w.add("involution", "the special dual of the dual spans the space of the point", if vv.space.span_eq(&v.space) { 0.0 } else { 1.0 }, 0.0);
        let grid = Grid { seed, ..Grid::default() };
        let inv = verify_involution(&v.space, &u.space, &grid)?;
        w.add("baker involution", "ψ_U(x, ξ) = ψ_V(ξ, x) on the grid", inv.max_deviation, 1e-9);
        let mut diag = json!({"point": k, "baker_evaluations": inv.evaluated});
        if two {
            let dual = verify_duality_2x2(&v, &u, f64::INFINITY)?;
            w.add(
                "coefficient duality",
                "the expansions of p_2, p_1 and q_2 agree up to one scalar per sequence",
                dual.d_defect.max(dual.e_defect),
                tol,
            );
            w.add(
                "three-term recurrence",
                "the sign-twisted expansion coefficients satisfy the three-term relation",
                dual.recurrence_residual.max(dual.dual_recurrence_residual),
                tol,
            );
            let eig = bethe_eigen_check(spec, cp)?;
            w.add("KZ eigenvalues", "H_a ω = ∂_{z_a} log Φ · ω for the Bethe vector ω", eig.h_residual, tol);
            w.add(
                "dynamical eigenvalues",
                "G_i ω = ∂_{λ_i} log(Φ·(λ_1-λ_2)^(-n_2)) · ω for the Bethe vector ω",
                eig.g_normalized_residual,
                tol,
            );
            let chain = lagrange_chain(spec, cp)?;
            let lag = lagrange_partials(&chain.specs, &chain.points)?;
            w.add(
                "Lagrange partials",
                "the three master functions, each times (λ_1-λ_2)^(-n_2), have equal parameter partials",
                lag.normalized_deviation,
                tol,
            );
            diag["printed_sign_recurrence"] = json!(dual.printed_sign_residual);
            diag["dynamical_residual_unnormalized"] = json!(eig.g_residual);
            diag["lagrange_deviation_unnormalized"] = json!(lag.max_deviation());
        }
        diags.push(diag);
    }
    Ok((w.checks(), diags))
}

pub fn bethe_verify(a: &VerifyArgs) -> Result<Status> {
    let start = Instant::now();
    let (file, d) = read_json::<PointsFile>(&a.input)?;
    let (spec, points) = points_from_json(&file)?;
    if points.is_empty() {
        bail!("{} lists no points", a.input.display());
    }
    let (checks, diags) = point_checks(&spec, &points, a.tol, a.seed)?;
    let result = json!({"points": points.len(), "diagnostics": diags});
    emit(Report::new("bethe verify", Some(a.seed), vec![d], checks, result), a.out.as_deref(), start)
}

/// Weight data and parameters; spectrum files carry the same fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub lambda: Vec<Scalar>,
    pub z: Vec<Scalar>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSpectrum {
    pub name: String,
    pub eigenvalues: Vec<Scalar>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumFile {
    #[serde(flatten)]
    pub instance: InstanceFile,
    pub dim: usize,
    pub operators: Vec<OperatorSpectrum>,
}

fn parse_scalar(s: &str) -> Result<Scalar> {
    if let Ok(v) = Scalar::from_json(&Value::String(s.trim().into())) {
        if v.is_exact() {
            return Ok(v);
        }
    }
    let x: f64 = s.trim().parse().map_err(|_| anyhow!("cannot read {:?} as a number", s))?;
    Ok(Scalar::Approx(Approx::new(x, 0.0)))
}

fn convert<F: IoScalar>(v: &[Scalar]) -> Result<Vec<F>> {
    Ok(v.iter().map(F::from_scalar).collect::<bispectral::Result<_>>()?)
}

fn validate_instance(inst: &InstanceFile) -> Result<()> {
    if inst.lambda.len() != inst.n.len() || inst.z.len() != inst.m.len() {
        bail!("λ needs one value per entry of n and z one per entry of m");
    }
    if inst.n.iter().sum::<usize>() != inst.m.iter().sum::<usize>() {
        bail!("the entries of n and m must have the same sum");
    }
    if weight_dimension(&inst.m, &inst.n) == 0 {
        bail!("the weight space is zero");
    }
    Ok(())
}

pub fn gaudin_spectrum(a: &SpectrumArgs) -> Result<Status> {
    let start = Instant::now();
    if a.m.len() != a.big_m || a.n.len() != a.big_n {
        bail!("--m needs {} entries and --n needs {}", a.big_m, a.big_n);
    }
    let inst = InstanceFile {
        m: a.m.clone(),
        n: a.n.clone(),
        lambda: a.lambda.iter().map(|s| parse_scalar(s)).collect::<Result<_>>()?,
        z: a.z.iter().map(|s| parse_scalar(s)).collect::<Result<_>>()?,
    };
    validate_instance(&inst)?;
    let exact = a.exact || inst.lambda.iter().chain(&inst.z).all(|s| s.is_exact());
    let (ops, comm) = if exact { spectrum_with::<Exact>(&inst)? } else { spectrum_with::<Approx>(&inst)? };
    let dim = weight_dimension(&inst.m, &inst.n);
    let file = SpectrumFile { instance: inst, dim, operators: ops };
    write_json(&a.out, &file)?;
    let tol = if exact { 0.0 } else { a.tol };
    let checks = vec![Check::within("commutativity", "the KZ and dynamical Hamiltonians commute pairwise", comm, tol)];
    emit(Report::new("gaudin spectrum", None, vec![], checks, json!({"dim": dim, "exact": exact})), None, start)
}

fn spectrum_with<F: IoScalar>(inst: &InstanceFile) -> Result<(Vec<OperatorSpectrum>, f64)> {
    let basis = build_weight_basis(inst.n.len(), &inst.m, &inst.n)?;
    let hs = hamiltonians(&basis, &convert::<F>(&inst.lambda)?, &convert::<F>(&inst.z)?)?;
    let named = hs.h.iter().enumerate().map(|(a, m)| (format!("H_{}", a + 1), m)).chain(hs.g.iter().enumerate().map(|(i, m)| (format!("G_{}", i + 1), m)));
    let ops = named
        .map(|(name, m)| OperatorSpectrum { name, eigenvalues: eigenvalues(m).into_iter().map(|z| Scalar::Approx(Approx::c(z))).collect() })
        .collect();
    Ok((ops, hs.max_commutator()))
}

pub fn gaudin_verify_duality(a: &DualityArgs) -> Result<Status> {
    let start = Instant::now();
    let (inst, d) = read_json::<InstanceFile>(&a.instance)?;
    validate_instance(&inst)?;
    let exact = a.exact || inst.lambda.iter().chain(&inst.z).all(|s| s.is_exact());
    let basis = build_weight_basis(inst.n.len(), &inst.m, &inst.n)?;
    let rep = if exact {
        verify_interchange(&basis, &convert::<Exact>(&inst.lambda)?, &convert::<Exact>(&inst.z)?)?
    } else {
        verify_interchange(&basis, &convert::<Approx>(&inst.lambda)?, &convert::<Approx>(&inst.z)?)?
    };
    let tol = if exact { 0.0 } else { a.tol };
    let checks = vec![
        Check::within("H to G", "each KZ Hamiltonian equals the dual dynamical Hamiltonian under the duality isomorphism", rep.h_to_g, tol),
        Check::within("G to H", "each dynamical Hamiltonian equals the dual KZ Hamiltonian under the duality isomorphism", rep.g_to_h, tol),
        Check::within("commutativity", "the Hamiltonians commute on both sides", rep.max_commutator.max(rep.dual_max_commutator), tol),
    ];
    let c = |v: &[Scalar]| v.iter().map(|s| s.to_c64()).collect::<Vec<_>>();
    let matches = conjecture_experiment(&basis, &c(&inst.lambda), &c(&inst.z), a.seed)?;
    let result = json!({
        "dim": rep.dim,
        "exact": exact,
        "eigenline_matching": matches.iter().map(|m| json!({"eigenvalue": c64_json(Complex64::new(m.eigenvalue[0], m.eigenvalue[1])), "defect": m.defect})).collect::<Vec<_>>(),
    });
    emit(Report::new("gaudin verify-duality", Some(a.seed), vec![d], checks, result), a.out.as_deref(), start)
}

pub fn baker_verify(a: &BakerArgs) -> Result<Status> {
    let start = Instant::now();
    let (file, d) = read_json::<SpaceFile>(&a.space)?;
    if a.grid == 0 {
        bail!("--grid must be positive");
    }
    let grid = Grid { size: a.grid, seed: a.seed, ..Grid::default() };
    let exact = a.exact || space_scalars(&file).iter().all(|s| s.is_exact());
    let rep = if exact { baker_with::<Exact>(&file, &grid)? } else { baker_with::<Approx>(&file, &grid)? };
    let checks = vec![
        Check::within("baker involution", "ψ_U(x, ξ) = ψ_V(ξ, x) at every grid point away from poles", rep.max_deviation, a.tol),
        Check::holds("grid coverage", "at least one grid point was evaluated on a nonzero space", rep.evaluated > 0 && !rep.vacuous),
    ];
    let result = json!({"evaluated": rep.evaluated, "skipped": rep.skipped, "special": file.z.is_some()});
    emit(Report::new("baker verify", Some(a.seed), vec![d], checks, result), a.out.as_deref(), start)
}

fn baker_with<F: IoScalar>(file: &SpaceFile, grid: &Grid) -> Result<bispectral::baker::InvolutionReport> {
    let (space, z) = space_from_json::<F>(file)?;
    let u = match z {
        Some(z) => special_bispectral_dual(&classify_special(&space, &z)?)?.1.space,
        None => bispectral_dual(&space)?.dual,
    };
    Ok(verify_involution(&space, &u, grid)?)
}

pub fn demo(a: &DemoArgs) -> Result<Status> {
    let start = Instant::now();
    let spec = MasterSpec::real(&[0.0, 1.0], &[0.0, 1.0], &[1, 1], &[1, 1])?;
    let rep = solve_bethe(&spec, &SolveOptions { seed: a.seed, ..SolveOptions::default() })?;
    info!("demo: {} orbits", rep.points.len());
    let r5 = 5f64.sqrt();
    let mut found: Vec<f64> = rep.points.iter().map(|p| p.flat()[0].re).collect();
    found.sort_by(f64::total_cmp);
    let location = if found.len() == 2 {
        (found[0] - (3.0 - r5) / 2.0).abs().max((found[1] - (3.0 + r5) / 2.0).abs())
    } else {
        f64::INFINITY
    };
    let mut checks = vec![
        Check::holds(
            "orbit count",
            "two critical orbits, equal to the weight-space dimension",
            rep.points.len() == 2 && weight_dimension(&spec.m, &spec.n) == 2,
        ),
        Check::within("orbit locations", "the orbits sit at the roots of t² - 3t + 1", location, 1e-10),
    ];
    let (more, diags) = point_checks(&spec, &rep.points, 1e-8, a.seed)?;
    checks.extend(more);
    let result = json!({
        "spec": bispectral::io::spec_to_json(&spec),
        "points": found,
        "diagnostics": diags,
    });
    emit(Report::new("demo", Some(a.seed), vec![], checks, result), a.out.as_deref(), start)
}
