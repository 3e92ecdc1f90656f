//! Subspaces of C^n and the projectors attached to them.
//!
//! A [`Subspace`] is stored through an orthonormal, phase-normalized basis.
//! Two subspaces are equal when the gap between their orthogonal projectors
//! is below `eq_atol`. Zero-dimensional and full subspaces are ordinary
//! values (their bases are `n x 0` and `n x n`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::substrate::{
    basis_from_projector, gap_distance, inverse, min_singular_value, op_norm, orthonormalize,
    CMatrix, Tolerances, TriState,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: CMatrix,
}

impl Subspace {
    /// Column space of `spanning` (any `n x m` matrix).
    pub fn span(spanning: &CMatrix, tol: &Tolerances) -> Self {
        let (basis, _) = orthonormalize(spanning, tol);
        Subspace {
            ambient_dim: spanning.rows(),
            basis,
        }
    }

    /// Span of real column vectors, given as slices of length `n`.
    pub fn span_real(vectors: &[&[f64]], tol: &Tolerances) -> Self {
        let n = vectors.first().map_or(0, |v| v.len());
        let m = CMatrix::from_fn(n, vectors.len(), |i, j| Complex64::new(vectors[j][i], 0.0));
        Self::span(&m, tol)
    }

    pub fn zero(n: usize) -> Self {
        Subspace {
            ambient_dim: n,
            basis: CMatrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            ambient_dim: n,
            basis: CMatrix::identity(n),
        }
    }

    /// Span of the standard basis vectors `e_i`, `i` in `indices` (0-based).
    pub fn coordinate(n: usize, indices: &[usize]) -> Self {
        let basis = CMatrix::from_fn(n, indices.len(), |i, j| {
            Complex64::new(if indices[j] == i { 1.0 } else { 0.0 }, 0.0)
        });
        Subspace {
            ambient_dim: n,
            basis,
        }
    }

    /// Accepts a basis that is already orthonormal, re-canonicalizing it.
    pub fn from_orthonormal(basis: CMatrix, tol: &Tolerances) -> Result<Self> {
        let k = basis.cols();
        let gram = &basis.adjoint() * &basis;
        let defect = op_norm(&(&gram - &CMatrix::identity(k)));
        if !basis.is_finite() || defect > tol.eq_atol.max(1e-6) {
            return Err(Error::InvalidInput(format!(
                "basis columns are not orthonormal (defect {defect:e})"
            )));
        }
        let p = &basis * &basis.adjoint();
        Ok(Subspace {
            ambient_dim: basis.rows(),
            basis: basis_from_projector(&p, k),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim - self.dim()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Orthogonal projector `B Bᴴ`.
    pub fn projector_matrix(&self) -> CMatrix {
        &self.basis * &self.basis.adjoint()
    }

    /// Gap `‖P_self − P_other‖`.
    pub fn gap(&self, other: &Subspace) -> f64 {
        gap_distance(&self.projector_matrix(), &other.projector_matrix())
    }

    pub fn approx_eq(&self, other: &Subspace, tol: &Tolerances) -> bool {
        self.ambient_dim == other.ambient_dim && self.gap(other) <= tol.eq_atol
    }

    /// `G(self)` for an arbitrary (not necessarily invertible) `G`.
    pub fn image(&self, g: &CMatrix, tol: &Tolerances) -> Subspace {
        Subspace::span(&(g * &self.basis), tol)
    }

    /// Distance of `x` from the subspace relative to `‖x‖`, per column max.
    pub fn containment_residual(&self, x: &CMatrix) -> f64 {
        let p = self.projector_matrix();
        let r = &(&p * x) - x;
        let scale = op_norm(x);
        if scale == 0.0 {
            0.0
        } else {
            op_norm(&r) / scale
        }
    }

    pub(crate) fn check_same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    ambient_dim: usize,
    basis: CMatrix,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        SubspaceJson {
            ambient_dim: self.ambient_dim,
            basis: self.basis.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SubspaceJson::deserialize(deserializer)?;
        if raw.basis.rows() != raw.ambient_dim {
            return Err(D::Error::custom(format!(
                "basis has {} rows but ambient_dim is {}",
                raw.basis.rows(),
                raw.ambient_dim
            )));
        }
        let tol = Tolerances::default();
        let (basis, rank) = orthonormalize(&raw.basis, &tol);
        if rank != raw.basis.cols() {
            return Err(D::Error::custom(format!(
                "basis columns are linearly dependent (rank {rank} < {})",
                raw.basis.cols()
            )));
        }
        Ok(Subspace {
            ambient_dim: raw.ambient_dim,
            basis,
        })
    }
}

#[derive(Debug, Clone)]
pub struct OrthProjector {
    pub matrix: CMatrix,
    pub subspace: Subspace,
}

/// The idempotent with range `range_space` and nullspace `null_space`.
#[derive(Debug, Clone)]
pub struct ObliqueProjector {
    pub matrix: CMatrix,
    pub range_space: Subspace,
    pub null_space: Subspace,
}

/// Graph coordinates over `anchor`: the subspace `{w + Xw : w ∈ anchor⊥}`.
///
/// `x` is `dim(anchor) x (n - dim(anchor))`, written in the canonical bases
/// of `anchor⊥` (domain) and `anchor` (codomain).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphCoordinate {
    pub anchor: Subspace,
    pub x: CMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentIndex {
    pub dim: usize,
    pub codim: usize,
}

/// Outcome of the three equivalent complementarity tests for a pair of
/// orthogonal projectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuckholtzReport {
    /// `P_S − P_Z` invertible.
    pub diff_invertible: TriState,
    /// `‖P_S + P_Z − 1‖`.
    pub norm_value: f64,
    /// `‖P_S + P_Z − 1‖ < 1`.
    pub norm_lt_one: TriState,
    /// `S ∔ Z = H`.
    pub direct_sum: TriState,
    /// Smallest singular value of `P_S − P_Z`.
    pub diff_min_singular: f64,
    /// Smallest singular value of the stacked bases `[B_S B_Z]` (0 when the
    /// dimensions do not add up to `n`).
    pub stacked_min_singular: f64,
}

impl BuckholtzReport {
    /// `1 − ‖P_S + P_Z − 1‖`.
    pub fn margin(&self) -> f64 {
        1.0 - self.norm_value
    }

    pub fn all_true(&self) -> bool {
        self.diff_invertible.is_true() && self.norm_lt_one.is_true() && self.direct_sum.is_true()
    }

    pub fn all_determinate(&self) -> bool {
        self.diff_invertible.is_determinate()
            && self.norm_lt_one.is_determinate()
            && self.direct_sum.is_determinate()
    }

    /// The three verdicts coincide (only meaningful when all are determinate).
    pub fn consistent(&self) -> bool {
        self.diff_invertible == self.norm_lt_one && self.norm_lt_one == self.direct_sum
    }
}

pub fn orth_projector(s: &Subspace) -> OrthProjector {
    OrthProjector {
        matrix: s.projector_matrix(),
        subspace: s.clone(),
    }
}

pub fn perp(s: &Subspace) -> Subspace {
    let n = s.ambient_dim;
    let q = &CMatrix::identity(n) - &s.projector_matrix();
    Subspace {
        ambient_dim: n,
        basis: basis_from_projector(&q, n - s.dim()),
    }
}

/// `ε_S = 2P_S − 1`.
pub fn symmetry(s: &Subspace) -> CMatrix {
    &s.projector_matrix().scale_real(2.0) - &CMatrix::identity(s.ambient_dim)
}

pub fn component_index(s: &Subspace) -> ComponentIndex {
    ComponentIndex {
        dim: s.dim(),
        codim: s.codim(),
    }
}

/// Evaluates (a) invertibility of `P_S − P_Z`, (b) `‖P_S + P_Z − 1‖ < 1`
/// and (c) `S ∔ Z = H`.
///
/// The three statistics are tied together by `σ_min(P−Q)² = 1 − c²` and
/// `σ_min([B_S B_Z])² = 1 − c` (with `c` the norm in (b)), so the true-bands
/// are placed at the same point `c = 1 − margin_delta` and the false-bands
/// inside the region where the norm is numerically 1. Determinate verdicts
/// therefore never contradict each other.
pub fn buckholtz_report(s: &Subspace, z: &Subspace, tol: &Tolerances) -> Result<BuckholtzReport> {
    s.check_same_ambient(z)?;
    let n = s.ambient_dim;
    let delta = tol.margin_delta;
    if n == 0 {
        return Ok(BuckholtzReport {
            diff_invertible: TriState::True,
            norm_value: 0.0,
            norm_lt_one: TriState::True,
            direct_sum: TriState::True,
            diff_min_singular: 1.0,
            stacked_min_singular: 1.0,
        });
    }
    let p = s.projector_matrix();
    let q = z.projector_matrix();

    let diff_min = min_singular_value(&(&p - &q));
    let diff_hi = (delta * (2.0 - delta)).sqrt();
    let diff_invertible = if diff_min >= diff_hi {
        TriState::True
    } else if diff_min <= tol.rank_rtol {
        TriState::False
    } else {
        TriState::Indeterminate
    };

    let norm_value = op_norm(&(&(&p + &q) - &CMatrix::identity(n)));
    let norm_lt_one = tol.strictly_below_one(norm_value);

    let (direct_sum, stacked_min) = if s.dim() + z.dim() != n {
        (TriState::False, 0.0)
    } else {
        let stacked = s.basis.hstack(&z.basis);
        let sv = crate::substrate::singular_values(&stacked);
        let hi = sv.first().copied().unwrap_or(0.0);
        let lo = sv.last().copied().unwrap_or(0.0);
        let verdict = if lo >= delta.sqrt() {
            TriState::True
        } else if lo <= tol.rank_rtol * hi {
            TriState::False
        } else {
            TriState::Indeterminate
        };
        (verdict, lo)
    };

    Ok(BuckholtzReport {
        diff_invertible,
        norm_value,
        norm_lt_one,
        direct_sum,
        diff_min_singular: diff_min,
        stacked_min_singular: stacked_min,
    })
}

/// Direct-sum decision used as a precondition throughout: criterion (b).
pub fn complementary(s: &Subspace, z: &Subspace, tol: &Tolerances) -> Result<TriState> {
    Ok(buckholtz_report(s, z, tol)?.norm_lt_one)
}

pub(crate) fn require_complementary(
    s: &Subspace,
    z: &Subspace,
    tol: &Tolerances,
    context: &str,
) -> Result<BuckholtzReport> {
    let report = buckholtz_report(s, z, tol)?;
    if !report.norm_lt_one.is_true() {
        return Err(Error::NotComplementary {
            context: format!("{context}: ‖P+Q−1‖ = {}", report.norm_value),
        });
    }
    Ok(report)
}

/// `P_{L∥K} = P_L (P_L − P_K)^{-1}`.
pub fn oblique_projector(l: &Subspace, k: &Subspace, tol: &Tolerances) -> Result<ObliqueProjector> {
    require_complementary(l, k, tol, "oblique projector")?;
    let pl = l.projector_matrix();
    let pk = k.projector_matrix();
    let matrix = &pl * &inverse(&(&pl - &pk), tol)?;
    Ok(ObliqueProjector {
        matrix,
        range_space: l.clone(),
        null_space: k.clone(),
    })
}

/// `φ_Z(S) = P_Z (P_{Z⊥}|_S)^{-1}` as a matrix from `Z⊥` to `Z`.
pub fn graph_chart(z: &Subspace, s: &Subspace, tol: &Tolerances) -> Result<GraphCoordinate> {
    require_complementary(s, z, tol, "graph chart")?;
    let zp = perp(z);
    // Restriction of P_{Z⊥} to S, in the bases of S and Z⊥.
    let restricted = &zp.basis.adjoint() * &s.basis;
    let x = &(&z.basis.adjoint() * &s.basis) * &inverse(&restricted, tol)?;
    Ok(GraphCoordinate {
        anchor: z.clone(),
        x,
    })
}

pub fn graph_chart_inv(coord: &GraphCoordinate, tol: &Tolerances) -> Result<Subspace> {
    let z = &coord.anchor;
    let n = z.ambient_dim;
    if coord.x.rows() != z.dim() || coord.x.cols() != n - z.dim() {
        return Err(Error::InvalidInput(format!(
            "graph coordinate must be {}x{}, found {}x{}",
            z.dim(),
            n - z.dim(),
            coord.x.rows(),
            coord.x.cols()
        )));
    }
    let zp = perp(z);
    let graph = &zp.basis + &(&z.basis * &coord.x);
    Ok(Subspace::span(&graph, tol))
}

/// `G(S)` both by orthonormalizing `G·B_S` and by Ando's formula
/// `P_{G(S)} = E (E + Eᴴ − 1)^{-1}` with `E = G P_S G^{-1}`.
///
/// The returned projector carries the Ando matrix; its `subspace` field is
/// the orthonormalized image.
pub fn act(g: &CMatrix, s: &Subspace, tol: &Tolerances) -> Result<(Subspace, OrthProjector)> {
    let n = s.ambient_dim;
    if !g.is_square() || g.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.rows(),
        });
    }
    let g_inv = inverse(g, tol)?;
    let image = s.image(g, tol);
    let e = &(g * &s.projector_matrix()) * &g_inv;
    let m = &(&e + &e.adjoint()) - &CMatrix::identity(n);
    let ando = &e * &inverse(&m, tol)?;
    Ok((
        image.clone(),
        OrthProjector {
            matrix: ando,
            subspace: image,
        },
    ))
}
