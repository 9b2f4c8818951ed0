//! JSON file formats. Scalars are `{"re":…,"im":…}` with strings `"p/q"` for
//! exact values and numbers for approximate ones.

use crate::bethe::{CriticalPoint, MasterSpec, SolveReport};
use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::field::{Approx, IoScalar, Scalar};
use crate::poly::Poly;
use crate::qp::{QuasiPoly, Var};
use crate::ratfn::RatFn;
use crate::spaces::{FunctionSpace, SpecialSpace};
use num::complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyJson {
    pub coeffs: Vec<Scalar>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub lambda: Scalar,
    pub num: Vec<Scalar>,
    #[serde(default)]
    pub den: Vec<Scalar>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuasiPolyJson {
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpaceFile {
    pub variable: Var,
    /// exponent of each basis element; informational on input
    #[serde(default)]
    pub lambda: Vec<Scalar>,
    pub basis: Vec<QuasiPolyJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<Scalar>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorEntry {
    pub i: usize,
    pub j: usize,
    pub coeff: Scalar,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorJson {
    pub variable: Var,
    pub table: Vec<OperatorEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpecFile {
    pub lambda: Vec<Scalar>,
    pub z: Vec<Scalar>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointJson {
    /// coordinates per level
    pub levels: Vec<Vec<Scalar>>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointsFile {
    pub spec: SpecFile,
    pub points: Vec<PointJson>,
    pub starts: usize,
    pub converged: usize,
    pub bound: usize,
    pub generic: bool,
}

fn scalars<F: IoScalar>(v: &[F]) -> Vec<Scalar> {
    v.iter().map(|a| a.to_scalar()).collect()
}

fn from_scalars<F: IoScalar>(v: &[Scalar]) -> Result<Vec<F>> {
    v.iter().map(F::from_scalar).collect()
}

fn c(s: &Scalar) -> Complex64 {
    s.to_c64()
}

fn approx(z: Complex64) -> Scalar {
    Scalar::Approx(Approx::c(z))
}

pub fn poly_to_json<F: IoScalar>(p: &Poly<F>) -> PolyJson {
    PolyJson { coeffs: scalars(p.coeffs()) }
}

pub fn poly_from_json<F: IoScalar>(p: &PolyJson) -> Result<Poly<F>> {
    Ok(Poly::new(from_scalars(&p.coeffs)?))
}

pub fn qp_to_json<F: IoScalar>(f: &QuasiPoly<F>) -> QuasiPolyJson {
    QuasiPolyJson {
        terms: f
            .terms()
            .iter()
            .map(|(l, r)| TermJson { lambda: l.to_scalar(), num: scalars(r.num().coeffs()), den: scalars(r.den().coeffs()) })
            .collect(),
    }
}

pub fn qp_from_json<F: IoScalar>(f: &QuasiPolyJson, var: Var) -> Result<QuasiPoly<F>> {
    let terms = f
        .terms
        .iter()
        .map(|t| {
            let den = if t.den.is_empty() { Poly::one() } else { Poly::new(from_scalars(&t.den)?) };
            Ok((F::from_scalar(&t.lambda)?, RatFn::new(Poly::new(from_scalars(&t.num)?), den)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuasiPoly::new(terms, var))
}

pub fn space_to_json<F: IoScalar>(space: &FunctionSpace<F>, z: Option<&[F]>) -> SpaceFile {
    SpaceFile {
        variable: space.var,
        lambda: space.basis().iter().filter_map(|f| f.single()).map(|(l, _)| l.to_scalar()).collect(),
        basis: space.basis().iter().map(qp_to_json).collect(),
        z: z.map(scalars),
    }
}

pub fn special_to_json<F: IoScalar>(sp: &SpecialSpace<F>) -> SpaceFile {
    space_to_json(&sp.space, Some(&sp.z))
}

/// The space and its optional point list.
pub fn space_from_json<F: IoScalar>(file: &SpaceFile) -> Result<(FunctionSpace<F>, Option<Vec<F>>)> {
    let funcs = file.basis.iter().map(|f| qp_from_json(f, file.variable)).collect::<Result<Vec<_>>>()?;
    let space = FunctionSpace::new(funcs, file.variable)?;
    let z = file.z.as_deref().map(from_scalars).transpose()?;
    Ok((space, z))
}

pub fn operator_to_json<F: IoScalar>(op: &DiffOperator<F>) -> OperatorJson {
    OperatorJson {
        variable: op.var,
        table: op.table().into_iter().map(|(i, j, a)| OperatorEntry { i, j, coeff: a.to_scalar() }).collect(),
    }
}

pub fn operator_from_json<F: IoScalar>(op: &OperatorJson) -> Result<DiffOperator<F>> {
    let entries = op.table.iter().map(|e| Ok((e.i, e.j, F::from_scalar(&e.coeff)?))).collect::<Result<Vec<_>>>()?;
    Ok(DiffOperator::from_table(&entries, op.variable))
}

pub fn spec_to_json(spec: &MasterSpec) -> SpecFile {
    SpecFile {
        lambda: spec.lambda.iter().copied().map(approx).collect(),
        z: spec.z.iter().copied().map(approx).collect(),
        n: spec.n.clone(),
        m: spec.m.clone(),
    }
}

pub fn spec_from_json(file: &SpecFile) -> Result<MasterSpec> {
    MasterSpec::new(file.lambda.iter().map(c).collect(), file.z.iter().map(c).collect(), file.n.clone(), file.m.clone())
}

pub fn point_to_json(cp: &CriticalPoint) -> PointJson {
    PointJson { levels: cp.levels.iter().map(|l| l.iter().copied().map(approx).collect()).collect(), residual: cp.residual }
}

pub fn point_from_json(p: &PointJson) -> CriticalPoint {
    CriticalPoint::new(p.levels.iter().map(|l| l.iter().map(c).collect()).collect(), p.residual)
}

pub fn points_to_json(spec: &MasterSpec, rep: &SolveReport) -> PointsFile {
    PointsFile {
        spec: spec_to_json(spec),
        points: rep.points.iter().map(point_to_json).collect(),
        starts: rep.starts,
        converged: rep.converged,
        bound: rep.bound,
        generic: rep.genericity.generic(),
    }
}

/// Spec and points, with the level sizes checked against the spec.
pub fn points_from_json(file: &PointsFile) -> Result<(MasterSpec, Vec<CriticalPoint>)> {
    let spec = spec_from_json(&file.spec)?;
    let want: Vec<usize> = spec.levels().iter().map(|&(_, k)| k).collect();
    let points: Vec<CriticalPoint> = file.points.iter().map(point_from_json).collect();
    for p in &points {
        let got: Vec<usize> = p.levels.iter().map(|l| l.len()).collect();
        if got != want {
            return Err(Error::InvalidInput(format!("point has level sizes {:?}, spec wants {:?}", got, want)));
        }
    }
    Ok((spec, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Exact, Field};

    #[test]
    fn exact_space_round_trip() {
        let text = r#"{"variable":"x","basis":[
            {"terms":[{"lambda":{"re":"0","im":"0"},"num":[{"re":"1","im":"0"}]}]},
            {"terms":[{"lambda":{"re":"1","im":"0"},"num":[{"re":"-5/2","im":"0"},{"re":"1","im":"0"}]}]}
        ],"z":[{"re":"3/2","im":"0"},{"re":"0","im":"0"}]}"#;
        let file: SpaceFile = serde_json::from_str(text).unwrap();
        let (v, z) = space_from_json::<Exact>(&file).unwrap();
        assert_eq!(v.dim(), 2);
        assert_eq!(z.unwrap()[0], Exact::from_frac(3, 2));
        let out = space_to_json(&v, None);
        let again: SpaceFile = serde_json::from_str(&serde_json::to_string(&out).unwrap()).unwrap();
        let (w, _) = space_from_json::<Exact>(&again).unwrap();
        assert!(w.span_eq(&v));
        assert_eq!(again.lambda.len(), 2);
    }

    #[test]
    fn operator_round_trip() {
        let op = DiffOperator::new(vec![Poly::from_i64(&[0, -2]), Poly::from_i64(&[1, 1])], Var::U);
        let j = serde_json::to_string(&operator_to_json(&op)).unwrap();
        let back: DiffOperator<Exact> = operator_from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn spec_and_points() {
        let spec = MasterSpec::real(&[0.0, 1.0], &[0.0, 1.0], &[1, 1], &[1, 1]).unwrap();
        let f = spec_to_json(&spec);
        assert_eq!(spec_from_json(&serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap()).unwrap(), spec);
        let cp = CriticalPoint::new(vec![vec![Complex64::new(0.5, 0.0)]], 1e-13);
        let p = point_to_json(&cp);
        assert_eq!(point_from_json(&p), cp);
        let bad = PointsFile { spec: f, points: vec![PointJson { levels: vec![], residual: 0.0 }], starts: 1, converged: 1, bound: 2, generic: true };
        assert!(points_from_json(&bad).is_err());
    }

    #[test]
    fn mixed_components_are_rejected() {
        let r: std::result::Result<Scalar, _> = serde_json::from_str(r#"{"re":"1/2","im":0.5}"#);
        assert!(r.is_err());
        let a: Scalar = serde_json::from_str(r#"{"re":1.25,"im":-0.5}"#).unwrap();
        assert!(!a.is_exact());
        assert_eq!(Exact::from_scalar(&Scalar::Exact(Exact::one())).unwrap(), Exact::one());
    }
}
