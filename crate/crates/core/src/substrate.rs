//! Dense complex matrices and the handful of factorizations the rest of the
//! crate is built on.
//!
//! Rank, equality and invertibility decisions are all made from singular
//! values, relative to the largest one, so that they are scale invariant.
//! Strict inequalities are evaluated against a margin and may come back
//! [`TriState::Indeterminate`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical policy shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Singular values below `rank_rtol * sigma_max` count as zero.
    pub rank_rtol: f64,
    /// Absolute tolerance for operator-norm equality checks.
    pub eq_atol: f64,
    /// A strict inequality `x < 1` is accepted only as `x <= 1 - margin_delta`.
    pub margin_delta: f64,
    /// Largest condition number accepted by inversions.
    pub cond_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rtol: 1e-10,
            eq_atol: 1e-9,
            margin_delta: 1e-8,
            cond_max: 1e12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [
            self.rank_rtol,
            self.eq_atol,
            self.margin_delta,
            self.cond_max,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive {
            return Err(Error::InvalidInput(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.margin_delta >= 1.0 {
            return Err(Error::InvalidInput("margin_delta must be < 1".into()));
        }
        Ok(())
    }

    /// Verdict for `value < 1`: true below `1 - margin_delta`, false once the
    /// value is within `rank_rtol` of 1, indeterminate in between.
    pub fn strictly_below_one(&self, value: f64) -> TriState {
        if value <= 1.0 - self.margin_delta {
            TriState::True
        } else if value >= 1.0 - self.rank_rtol {
            TriState::False
        } else {
            TriState::Indeterminate
        }
    }
}

/// Three-valued verdict for floating-point decisions near a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    True,
    False,
    Indeterminate,
}

impl TriState {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TriState::True
        } else {
            TriState::False
        }
    }

    pub fn is_true(self) -> bool {
        self == TriState::True
    }

    pub fn is_false(self) -> bool {
        self == TriState::False
    }

    pub fn is_determinate(self) -> bool {
        self != TriState::Indeterminate
    }

    /// Kleene conjunction.
    pub fn and(self, other: TriState) -> TriState {
        match (self, other) {
            (TriState::False, _) | (_, TriState::False) => TriState::False,
            (TriState::True, TriState::True) => TriState::True,
            _ => TriState::Indeterminate,
        }
    }
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriState::True => "true",
            TriState::False => "false",
            TriState::Indeterminate => "indeterminate",
        })
    }
}

/// Dense complex matrix in double precision.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list()
            .entries(
                (0..self.rows())
                    .map(|i| (0..self.cols()).map(|j| self.get(i, j)).collect::<Vec<_>>()),
            )
            .finish()
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        CMatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        assert_eq!(
            entries.len(),
            rows * cols,
            "entry count does not match shape"
        );
        CMatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(
            entries.len(),
            rows * cols,
            "entry count does not match shape"
        );
        Self::from_fn(rows, cols, |i, j| {
            Complex64::new(entries[i * cols + j], 0.0)
        })
    }

    /// A single column vector.
    pub fn column(entries: &[Complex64]) -> Self {
        Self::from_row_slice(entries.len(), 1, entries)
    }

    pub fn real_column(entries: &[f64]) -> Self {
        Self::from_real_rows(entries.len(), 1, entries)
    }

    /// Square diagonal matrix with real entries.
    pub fn real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `e_index` in C^n as a column.
    pub fn unit_vector(n: usize, index: usize) -> Self {
        Self::from_fn(n, 1, |i, _| {
            if i == index {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.0[(i, j)] = value;
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        CMatrix(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Copy of columns `start..start + count`.
    pub fn columns(&self, start: usize, count: usize) -> Self {
        CMatrix(self.0.columns(start, count).into_owned())
    }

    pub fn col(&self, j: usize) -> Self {
        self.columns(j, 1)
    }

    /// Copy of rows `start..start + count`.
    pub fn row_range(&self, start: usize, count: usize) -> Self {
        CMatrix(self.0.rows(start, count).into_owned())
    }

    /// `[self, other]`.
    pub fn hstack(&self, other: &CMatrix) -> Self {
        assert_eq!(self.rows(), other.rows(), "hstack row mismatch");
        let (r, c1, c2) = (self.rows(), self.cols(), other.cols());
        Self::from_fn(r, c1 + c2, |i, j| {
            if j < c1 {
                self.get(i, j)
            } else {
                other.get(i, j - c1)
            }
        })
    }

    /// Row-major real and imaginary parts.
    /// Inverse of [`CMatrix::to_parts`]; rejects wrong lengths and
    /// non-finite entries.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        let len = rows * cols;
        if re.len() != len || im.len() != len {
            return Err(Error::InvalidInput(format!(
                "expected {len} entries in re and im, found {} and {}",
                re.len(),
                im.len()
            )));
        }
        if re.iter().chain(im).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        let entries: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Ok(CMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn to_parts(&self) -> (Vec<f64>, Vec<f64>) {
        let mut re = Vec::with_capacity(self.rows() * self.cols());
        let mut im = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.get(i, j);
                re.push(z.re);
                im.push(z.im);
            }
        }
        (re, im)
    }

    /// Entrywise max-modulus distance.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        (self - other).max_abs()
    }

    pub(crate) fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub(crate) fn from_inner(m: DMatrix<Complex64>) -> Self {
        CMatrix(m)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols(), rhs.rows(), "matrix product shape mismatch");
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

#[derive(Serialize, Deserialize)]
struct CMatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let (re, im) = self.to_parts();
        CMatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            re,
            im,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = CMatrixJson::deserialize(deserializer)?;
        CMatrix::from_parts(raw.rows, raw.cols, &raw.re, &raw.im).map_err(D::Error::custom)
    }
}

/// Thin SVD `A = U diag(sigma) Vᴴ` with `sigma` non-increasing.
pub(crate) struct ThinSvd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

fn to_faer(a: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(a.rows(), a.cols(), |i, j| a.0[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Tries faer on `A`, then on `Aᴴ` (swapping the factors), then nalgebra's
/// bidiagonal SVD. The iteration limit of one backend is occasionally hit on
/// input the others handle.
pub(crate) fn thin_svd(a: &CMatrix) -> ThinSvd {
    if let Ok(svd) = to_faer(a).thin_svd() {
        return ThinSvd {
            u: from_faer(svd.U()),
            sigma: svd.S().column_vector().iter().map(|x| x.re).collect(),
            v: from_faer(svd.V()),
        };
    }
    if let Ok(svd) = to_faer(&a.adjoint()).thin_svd() {
        return ThinSvd {
            u: from_faer(svd.V()),
            sigma: svd.S().column_vector().iter().map(|x| x.re).collect(),
            v: from_faer(svd.U()),
        };
    }
    nalgebra_thin_svd(a)
}

fn nalgebra_thin_svd(a: &CMatrix) -> ThinSvd {
    let svd =
        a.0.clone()
            .try_svd(true, true, f64::EPSILON, 0)
            .expect("SVD of a finite matrix converges");
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    ThinSvd {
        u: CMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]),
        sigma: order.iter().map(|&j| svd.singular_values[j]).collect(),
        v: CMatrix::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)].conj()),
    }
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    let mut sv = match to_faer(a).singular_values() {
        Ok(sv) => sv,
        Err(_) => thin_svd(a).sigma,
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Smallest singular value; 0 for an empty matrix.
pub fn min_singular_value(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// `sigma_max / sigma_min`, infinite when singular.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Numerical rank with threshold `rank_rtol * sigma_max`.
pub fn numerical_rank(a: &CMatrix, tol: &Tolerances) -> usize {
    let sv = singular_values(a);
    let Some(&smax) = sv.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_rtol * smax).count()
}

/// Orthonormal, phase-normalized basis for the column space of `a`.
///
/// The rank comes from the singular values; the basis itself is extracted
/// from the orthogonal projector onto the column space by pivoted
/// Gram-Schmidt, so it depends only on the subspace and not on the spanning
/// set that was passed in.
pub fn orthonormalize(a: &CMatrix, tol: &Tolerances) -> (CMatrix, usize) {
    let n = a.rows();
    if a.cols() == 0 || n == 0 {
        return (CMatrix::zeros(n, 0), 0);
    }
    let svd = thin_svd(a);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return (CMatrix::zeros(n, 0), 0);
    }
    let rank = svd
        .sigma
        .iter()
        .filter(|&&x| x > tol.rank_rtol * smax)
        .count();
    let ur = svd.u.columns(0, rank);
    let projector = &ur * &ur.adjoint();
    (basis_from_projector(&projector, rank), rank)
}

/// Orthonormal basis of `rank` columns for the range of the (near) orthogonal
/// projector `p`, via Gram-Schmidt with column pivoting and one round of
/// reorthogonalization. Columns are phase-normalized.
pub fn basis_from_projector(p: &CMatrix, rank: usize) -> CMatrix {
    let n = p.rows();
    let mut work: Vec<Vec<Complex64>> = (0..p.cols())
        .map(|j| (0..n).map(|i| p.get(i, j)).collect())
        .collect();
    let mut used = vec![false; work.len()];
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(rank);

    for _ in 0..rank.min(work.len()) {
        let norms: Vec<f64> = work.iter().map(|c| vec_norm(c)).collect();
        let mut best: Option<usize> = None;
        for (j, &nj) in norms.iter().enumerate() {
            if used[j] {
                continue;
            }
            // Strictly greater keeps the lowest index on (near) ties.
            match best {
                Some(b) if nj <= norms[b] * (1.0 + 1e-12) => {}
                _ => best = Some(j),
            }
        }
        let Some(j) = best else { break };
        used[j] = true;
        let mut q = work[j].clone();
        // Second pass against the accepted basis ("twice is enough").
        for b in &basis {
            let c = dot(b, &q);
            axpy(&mut q, -c, b);
        }
        let nq = vec_norm(&q);
        if nq == 0.0 {
            break;
        }
        q.iter_mut().for_each(|z| *z /= nq);
        for (k, col) in work.iter_mut().enumerate() {
            if used[k] {
                continue;
            }
            let c = dot(&q, col);
            axpy(col, -c, &q);
        }
        basis.push(q);
    }

    let mut out = CMatrix::from_fn(n, basis.len(), |i, j| basis[j][i]);
    phase_normalize_columns(&mut out);
    out
}

/// Rotates every column so that its first entry of (numerically) largest
/// modulus is real and positive.
pub fn phase_normalize_columns(m: &mut CMatrix) {
    for j in 0..m.cols() {
        let max = (0..m.rows())
            .map(|i| m.get(i, j).norm())
            .fold(0.0, f64::max);
        if max == 0.0 {
            continue;
        }
        let pivot = (0..m.rows())
            .find(|&i| m.get(i, j).norm() >= max * (1.0 - 1e-9))
            .expect("a maximal entry exists");
        let z = m.get(pivot, j);
        let phase = z.conj() / z.norm();
        for i in 0..m.rows() {
            let v = m.get(i, j) * phase;
            m.set(i, j, v);
        }
        let fixed = m.get(pivot, j);
        m.set(pivot, j, Complex64::new(fixed.re, 0.0));
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn require_square(a: &CMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

/// Inverse of a square matrix; refuses when the condition number exceeds
/// `cond_max`.
pub fn inverse(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    require_square(a)?;
    if a.rows() == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let cond = condition_number(a);
    if !(cond <= tol.cond_max) {
        return Err(Error::NotInvertible { cond });
    }
    a.inner()
        .clone()
        .lu()
        .try_inverse()
        .map(CMatrix)
        .ok_or(Error::NotInvertible { cond })
}

/// Unitary factor `W = S |S|^{-1}` of the polar decomposition, computed from
/// the SVD `S = U Σ Vᴴ` as `W = U Vᴴ`.
pub fn polar_unitary(s: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    require_square(s)?;
    let n = s.rows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let svd = thin_svd(s);
    let hi = svd.sigma.first().copied().unwrap_or(0.0);
    let lo = svd.sigma.last().copied().unwrap_or(0.0);
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= tol.cond_max) {
        return Err(Error::NotInvertible { cond });
    }
    Ok(&svd.u * &svd.v.adjoint())
}

/// Positive square root of `Sᴴ S`, used to check `S = W |S|`.
pub fn abs_factor(s: &CMatrix) -> CMatrix {
    if s.rows() == 0 || s.cols() == 0 {
        return CMatrix::zeros(s.cols(), s.cols());
    }
    let svd = thin_svd(s);
    let sigma: Vec<f64> = svd.sigma;
    &(&svd.v * &CMatrix::real_diagonal(&sigma)) * &svd.v.adjoint()
}

/// Gap metric between two orthogonal projectors: `‖P1 − P2‖`.
pub fn gap_distance(p1: &CMatrix, p2: &CMatrix) -> f64 {
    op_norm(&(p1 - p2))
}
