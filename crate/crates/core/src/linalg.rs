//! Dense row reduction over a `Field`.
//!
//! The approximate backend normalizes every row to unit max-norm first and
//! treats entries below `tol` as zero during pivot search.

use crate::field::Field;

pub type Matrix<F> = Vec<Vec<F>>;

fn row_normalize<F: Field>(m: &mut Matrix<F>) {
    if F::EXACT {
        return;
    }
    for row in m.iter_mut() {
        let s = row.iter().map(|a| a.abs()).fold(0.0, f64::max);
        if s > 0.0 {
            let inv = F::from_c64(num::complex::Complex64::new(1.0 / s, 0.0));
            for a in row.iter_mut() {
                *a = a.clone() * inv.clone();
            }
        }
    }
}

/// Reduced row echelon form and pivot columns.
pub fn rref<F: Field>(m: &Matrix<F>) -> (Matrix<F>, Vec<usize>) {
    rref_cols(m, None)
}

/// Row reduction that only pivots in the first `pivot_cols` columns (all if `None`).
pub fn rref_cols<F: Field>(m: &Matrix<F>, pivot_cols: Option<usize>) -> (Matrix<F>, Vec<usize>) {
    let mut a = m.clone();
    row_normalize(&mut a);
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let pc = pivot_cols.unwrap_or(cols).min(cols);
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..pc {
        if r == rows {
            break;
        }
        let best = if F::EXACT {
            (r..rows).find(|&i| !a[i][c].is_zero())
        } else {
            let (i, v) = (r..rows)
                .map(|i| (i, a[i][c].abs()))
                .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let tol = a[r][c].tol().max(crate::field::DEFAULT_TOL * 1e-3);
            if v > tol {
                Some(i)
            } else {
                None
            }
        };
        let Some(p) = best else { continue };
        a.swap(r, p);
        let inv = a[r][c].inv().expect("pivot is nonzero");
        for x in a[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = f.clone() * a[r][j].clone();
                    a[i][j] = a[i][j].clone() - t;
                }
            }
        }
        if !F::EXACT {
            for i in 0..rows {
                if i != r {
                    a[i][c] = F::zero();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank<F: Field>(m: &Matrix<F>) -> usize {
    rref(m).1.len()
}

/// Basis of `{v : m v = 0}`.
pub fn nullspace<F: Field>(m: &Matrix<F>, cols: usize) -> Vec<Vec<F>> {
    if m.is_empty() {
        return (0..cols)
            .map(|k| (0..cols).map(|j| if j == k { F::one() } else { F::zero() }).collect())
            .collect();
    }
    let (a, piv) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![F::zero(); cols];
            v[f] = F::one();
            for (r, &p) in piv.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solution of `m v = b`, if the system is consistent.
pub fn solve<F: Field>(m: &Matrix<F>, b: &[F]) -> Option<Vec<F>> {
    let cols = m.first().map_or(0, |r| r.len());
    let aug: Matrix<F> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (a, piv) = rref_cols(&aug, Some(cols));
    for row in a.iter().skip(piv.len()) {
        if !row[cols].is_zero() {
            return None;
        }
    }
    let mut v = vec![F::zero(); cols];
    for (r, &p) in piv.iter().enumerate() {
        v[p] = a[r][cols].clone();
    }
    if !F::EXACT {
        let scale = b.iter().map(|x| x.abs()).fold(1.0, f64::max);
        for (row, bi) in m.iter().zip(b) {
            let lhs = row.iter().zip(&v).fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone());
            let rs = row.iter().zip(&v).map(|(x, y)| x.abs() * y.abs()).fold(scale, f64::max);
            if (lhs - bi.clone()).abs() > 1e3 * bi.tol().max(1e-12) * rs {
                return None;
            }
        }
    }
    Some(v)
}

/// Determinant by elimination.
pub fn det<F: Field>(m: &Matrix<F>) -> F {
    let n = m.len();
    let mut a = m.clone();
    let mut d = F::one();
    for c in 0..n {
        let p = if F::EXACT {
            (c..n).find(|&i| !a[i][c].is_zero())
        } else {
            (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
        };
        let Some(p) = p else { return F::zero() };
        let Some(inv) = a[p][c].inv() else { return F::zero() };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d = d * a[c][c].clone();
        for i in c + 1..n {
            let f = a[i][c].clone() * inv.clone();
            for j in c..n {
                let t = f.clone() * a[c][j].clone();
                a[i][j] = a[i][j].clone() - t;
            }
        }
    }
    d
}

/// Unit vector minimizing `|m v|` (approx), with the ratio of smallest to largest singular value.
pub fn approx_null_vector(m: &[Vec<num::complex::Complex64>], cols: usize) -> (Vec<num::complex::Complex64>, f64) {
    use nalgebra::DMatrix;
    let rows = m.len().max(cols);
    // pad with zero rows so the thin SVD exposes the full right singular basis
    let a = DMatrix::from_fn(rows, cols, |i, j| m.get(i).map_or(num::complex::Complex64::new(0.0, 0.0), |r| r[j]));
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (mut kmin, mut smax) = (0, 0.0f64);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        smax = smax.max(s);
        if s < svd.singular_values[kmin] {
            kmin = k;
        }
    }
    let smin = svd.singular_values[kmin];
    let v = (0..cols).map(|j| vt[(kmin, j)].conj()).collect();
    (v, if smax > 0.0 { smin / smax } else { 0.0 })
}

/// Row spaces are equal.
pub fn same_row_space<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> bool {
    let ra = rank(a);
    if ra != rank(b) {
        return false;
    }
    let mut s = a.clone();
    s.extend(b.iter().cloned());
    rank(&s) == ra
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Approx, Exact};

    fn m(rows: &[&[i64]]) -> Matrix<Exact> {
        rows.iter().map(|r| r.iter().map(|&x| Exact::from_i64(x)).collect()).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&a), 2);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        for row in &a {
            let s = row.iter().zip(&ns[0]).fold(Exact::zero(), |acc, (x, y)| acc + x.clone() * y.clone());
            assert!(s.is_zero());
        }
    }

    #[test]
    fn solve_and_inconsistency() {
        let a = m(&[&[1, 1], &[1, -1]]);
        let v = solve(&a, &[Exact::from_i64(3), Exact::from_i64(1)]).unwrap();
        assert_eq!(v, vec![Exact::from_i64(2), Exact::from_i64(1)]);
        let b = m(&[&[1, 1], &[2, 2]]);
        assert!(solve(&b, &[Exact::one(), Exact::one()]).is_none());
    }

    #[test]
    fn determinant() {
        let a = m(&[&[2, 1], &[7, 4]]);
        assert_eq!(det(&a), Exact::one());
    }

    #[test]
    fn approx_rank_ignores_noise() {
        let a: Matrix<Approx> = vec![
            vec![Approx::new(1.0, 0.0), Approx::new(2.0, 0.0)],
            vec![Approx::new(2.0, 0.0), Approx::new(4.0 + 1e-13, 0.0)],
        ];
        assert_eq!(rank(&a), 1);
    }

    #[test]
    fn row_space_equality() {
        let a = m(&[&[1, 0, 1], &[0, 1, 1]]);
        let b = m(&[&[1, 1, 2], &[1, -1, 0]]);
        assert!(same_row_space(&a, &b));
        assert!(!same_row_space(&a, &m(&[&[1, 0, 0], &[0, 1, 1]])));
    }
}
