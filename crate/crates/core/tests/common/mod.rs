//! Oracles computed independently of the library's projector formulas.

#![allow(dead_code)]

use cocomp::grassmann::Subspace;
use cocomp::substrate::{op_norm, CMatrix};
use num_complex::Complex64;

type Dense = Vec<Vec<Complex64>>;

fn to_rows(m: &CMatrix) -> Dense {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
        .collect()
}

fn from_rows(rows: &Dense, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Solves `A X = B` by Gauss-Jordan elimination with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.rows();
    assert!(a.is_square() && b.rows() == n);
    let m = b.cols();
    let mut aug: Dense = to_rows(a)
        .into_iter()
        .zip(to_rows(b))
        .map(|(mut r, rb)| {
            r.extend(rb);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| aug[x][col].norm().total_cmp(&aug[y][col].norm()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p.norm() > 0.0, "singular system");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col {
                continue;
            }
            let f = row[col];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    let sol: Dense = aug.into_iter().map(|r| r[n..].to_vec()).collect();
    from_rows(&sol, m)
}

/// Oblique projector onto `l` along `k` from the decomposition
/// `x = B_L a + B_K b`: the projector keeps `B_L a`.
pub fn oblique_oracle(l: &Subspace, k: &Subspace) -> CMatrix {
    let n = l.ambient_dim();
    let stacked = l.basis().hstack(k.basis());
    let coeffs = solve(&stacked, &CMatrix::identity(n));
    l.basis() * &coeffs.row_range(0, l.dim())
}

/// Orthonormal basis of the column space of a full-column-rank matrix by
/// modified Gram-Schmidt with one reorthogonalization pass.
pub fn gram_schmidt(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut q: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..a.cols() {
        let mut v: Vec<Complex64> = (0..n).map(|i| a.get(i, j)).collect();
        for _ in 0..2 {
            for u in &q {
                let c: Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= c * ui;
                }
            }
        }
        let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        assert!(nv > 0.0, "rank deficient input");
        q.push(v.into_iter().map(|x| x / nv).collect());
    }
    CMatrix::from_fn(n, q.len(), |i, j| q[j][i])
}

/// Orthogonal projector onto `G(S)`, via Gram-Schmidt of `G B_S`.
pub fn image_projector_oracle(g: &CMatrix, s: &Subspace) -> CMatrix {
    let q = gram_schmidt(&(g * s.basis()));
    &q * &q.adjoint()
}

pub fn max_col_deviation(l: &CMatrix, basis: &CMatrix) -> f64 {
    (0..basis.cols())
        .map(|j| {
            let v = basis.col(j);
            (&(l * &v) - &v).frobenius_norm()
        })
        .fold(0.0, f64::max)
}

pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    op_norm(&(a - b))
}
