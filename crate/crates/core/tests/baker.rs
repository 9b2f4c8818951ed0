use bispectral::baker::{space_to_subspace, subspace_to_space, verify_involution, BakerFunction, Grid};
use bispectral::generators::special_corpus;
use bispectral::qp::{QuasiPoly, Var};
use bispectral::spaces::FunctionSpace;
use bispectral::transform::{bispectral_dual, special_bispectral_dual};
use bispectral::{Exact, Field, Poly};
use num::complex::Complex64 as C;

fn pe(c: &[i64], l: i64) -> QuasiPoly<Exact> {
    QuasiPoly::poly_exp(Poly::from_i64(c), Exact::from_i64(l), Var::X)
}

#[test]
fn subspace_round_trip_on_random_spaces() {
    for v in special_corpus(6, 5).unwrap() {
        let w = space_to_subspace(&v.space).unwrap();
        let back = subspace_to_space(&w, Var::X).unwrap();
        assert!(back.span_eq(&v.space));
        for p in v.polys() {
            assert!(!p.is_zero());
        }
    }
}

#[test]
fn regular_pair_on_a_shifted_grid() {
    let v = FunctionSpace::new(vec![pe(&[0, 1], 0), pe(&[-1, -2, 1], 1)], Var::X).unwrap();
    let u = bispectral_dual(&v).unwrap().dual;
    let grid = Grid { size: 6, lo: 2.5, hi: 7.0, seed: 11, ..Grid::default() };
    let r = verify_involution(&v, &u, &grid).unwrap();
    assert!(r.evaluated >= 30 && r.max_deviation <= 1e-9, "{:?}", r);
}

#[test]
fn special_pairs() {
    for v in special_corpus(3, 17).unwrap() {
        let (_, u) = special_bispectral_dual(&v).unwrap();
        let r = verify_involution(&v.space, &u.space, &Grid::default()).unwrap();
        assert!(!r.vacuous && r.max_deviation <= 1e-9, "{:?}", r);
    }
}

#[test]
fn psi_of_a_single_exponential() {
    // V = <(x - 2) e^{3x}>: D̄ = ∂ - 3 - 1/(x - 2), ψ = e^{xξ}(1 - 1/((x - 2)(ξ - 3)))
    let v = FunctionSpace::new(vec![pe(&[-2, 1], 3)], Var::X).unwrap();
    let b = BakerFunction::new(&v).unwrap();
    let (x, xi) = (C::new(4.0, 0.0), C::new(5.0, 0.0));
    let got = b.eval(x, xi).unwrap().rational;
    let want = 1.0 - 1.0 / ((x - 2.0) * (xi - 3.0));
    assert!((got - want).norm() < 1e-12, "{} vs {}", got, want);
}
