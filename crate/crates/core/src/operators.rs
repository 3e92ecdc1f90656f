//! Transition operators between complements of a fixed subspace, the group
//! `Gl^Z` of invertible operators leaving `Z` invariant, and the unitary that
//! conjugates one orthogonal projector onto a nearby one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{oblique_projector, perp, require_complementary, Subspace};
use crate::substrate::{
    condition_number, inverse, op_norm, polar_unitary, CMatrix, Tolerances, TriState,
};

/// An invertible operator together with a subspace it leaves invariant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlZOperator {
    pub matrix: CMatrix,
    pub invariant_space: Subspace,
}

impl GlZOperator {
    /// Validates invertibility and `G(Z) = Z`.
    pub fn new(matrix: CMatrix, invariant_space: Subspace, tol: &Tolerances) -> Result<Self> {
        match glz_check(&matrix, &invariant_space, tol)? {
            TriState::True => Ok(GlZOperator {
                matrix,
                invariant_space,
            }),
            verdict => Err(Error::InvalidGroupElement {
                reason: format!(
                    "membership test is {verdict} (invariance residual {:e})",
                    invariance_residual(&matrix, &invariant_space, tol)
                ),
            }),
        }
    }

    /// Wraps a matrix that is in `Gl^Z` by construction.
    pub(crate) fn trusted(matrix: CMatrix, invariant_space: Subspace) -> Self {
        GlZOperator {
            matrix,
            invariant_space,
        }
    }
}

/// Unitary `W` with `W P_source Wᴴ = P_target`.
#[derive(Debug, Clone)]
pub struct ConjugatingUnitary {
    pub matrix: CMatrix,
    pub source: Subspace,
    pub target: Subspace,
}

/// Gap between `G(Z)` and `Z` (`1` when `G` collapses `Z`).
pub fn invariance_residual(g: &CMatrix, z: &Subspace, tol: &Tolerances) -> f64 {
    let image = z.image(g, tol);
    if image.dim() != z.dim() {
        return 1.0;
    }
    image.gap(z)
}

/// Membership of `G` in `Gl^Z`: invertible with `G(Z) = Z`.
///
/// True when the invariance gap is within `eq_atol`, false beyond
/// `sqrt(eq_atol)` or when `G` is singular, indeterminate in between.
pub fn glz_check(g: &CMatrix, z: &Subspace, tol: &Tolerances) -> Result<TriState> {
    let n = z.ambient_dim();
    if !g.is_square() || g.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.rows(),
        });
    }
    if n == 0 {
        return Ok(TriState::True);
    }
    if !(condition_number(g) <= tol.cond_max) {
        return Ok(TriState::False);
    }
    let residual = invariance_residual(g, z, tol);
    Ok(if residual <= tol.eq_atol {
        TriState::True
    } else if residual >= tol.eq_atol.sqrt() {
        TriState::False
    } else {
        TriState::Indeterminate
    })
}

/// `L^Z_{S,T} = P_{Z∥S} + P_{T∥Z} P_{S∥Z}`: fixes `Z` pointwise and carries
/// `S` onto `T`.
pub fn big_l(z: &Subspace, s: &Subspace, t: &Subspace, tol: &Tolerances) -> Result<GlZOperator> {
    z.check_same_ambient(s)?;
    z.check_same_ambient(t)?;
    require_complementary(s, z, tol, "transition operator, (S, Z)")?;
    require_complementary(t, z, tol, "transition operator, (T, Z)")?;
    let z_along_s = oblique_projector(z, s, tol)?;
    let t_along_z = oblique_projector(t, z, tol)?;
    let s_along_z = oblique_projector(s, z, tol)?;
    let matrix = &z_along_s.matrix + &(&t_along_z.matrix * &s_along_z.matrix);
    Ok(GlZOperator::trusted(matrix, z.clone()))
}

/// The same operator through projector differences only:
/// `P_Z(P_Z−P_S)^{-1} + P_T(P_T−P_Z)^{-1} P_S(P_S−P_Z)^{-1}`.
pub fn big_l_analytic(
    z: &Subspace,
    s: &Subspace,
    t: &Subspace,
    tol: &Tolerances,
) -> Result<CMatrix> {
    z.check_same_ambient(s)?;
    z.check_same_ambient(t)?;
    require_complementary(s, z, tol, "transition operator, (S, Z)")?;
    require_complementary(t, z, tol, "transition operator, (T, Z)")?;
    let pz = z.projector_matrix();
    let ps = s.projector_matrix();
    let pt = t.projector_matrix();
    let first = &pz * &inverse(&(&pz - &ps), tol)?;
    let second = &(&pt * &inverse(&(&pt - &pz), tol)?) * &(&ps * &inverse(&(&ps - &pz), tol)?);
    Ok(&first + &second)
}

/// `l_{Z,S} = L^Z_{S,Z⊥}`: sends `S` onto `Z⊥` and fixes `Z`.
pub fn little_l(z: &Subspace, s: &Subspace, tol: &Tolerances) -> Result<GlZOperator> {
    big_l(z, s, &perp(z), tol)
}

/// `π_{S0}(G) = G(S0)`.
pub fn pi_s0(g: &GlZOperator, s0: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    require_complementary(s0, &g.invariant_space, tol, "orbit map base point")?;
    Ok(s0.image(&g.matrix, tol))
}

/// Global cross section `σ_{S0}(T) = L^Z_{S0,T}` of the orbit map.
pub fn section_sigma(
    z: &Subspace,
    s0: &Subspace,
    t: &Subspace,
    tol: &Tolerances,
) -> Result<GlZOperator> {
    big_l(z, s0, t, tol)
}

/// Unitary factor of `M = QP + (1−Q)(1−P)`, which satisfies `W P Wᴴ = Q`
/// whenever `‖P − Q‖ < 1`.
pub fn w_unitary(s: &Subspace, target: &Subspace, tol: &Tolerances) -> Result<ConjugatingUnitary> {
    s.check_same_ambient(target)?;
    let n = s.ambient_dim();
    let p = s.projector_matrix();
    let q = target.projector_matrix();
    let gap = op_norm(&(&p - &q));
    if !tol.strictly_below_one(gap).is_true() {
        return Err(Error::GapTooLarge { gap });
    }
    let id = CMatrix::identity(n);
    let m = &(&q * &p) + &(&(&id - &q) * &(&id - &p));
    Ok(ConjugatingUnitary {
        matrix: polar_unitary(&m, tol)?,
        source: s.clone(),
        target: target.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(i: usize) -> Subspace {
        Subspace::coordinate(2, &[i])
    }

    fn diag_line() -> Subspace {
        Subspace::span_real(&[&[1.0, 1.0]], &tol())
    }

    fn lower(c: f64) -> CMatrix {
        CMatrix::from_real_rows(2, 2, &[1.0, 0.0, c, 1.0])
    }

    #[test]
    fn glz_check_examples() {
        let t = tol();
        assert_eq!(
            glz_check(&CMatrix::identity(2), &diag_line(), &t).unwrap(),
            TriState::True
        );
        let upper = CMatrix::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(glz_check(&upper, &e(0), &t).unwrap(), TriState::True);
        let swap = CMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(glz_check(&swap, &e(0), &t).unwrap(), TriState::False);
        assert!(glz_check(&CMatrix::identity(3), &e(0), &t).is_err());
    }

    #[test]
    fn glz_check_rejects_singular() {
        let g = CMatrix::real_diagonal(&[1.0, 0.0]);
        assert_eq!(glz_check(&g, &e(0), &tol()).unwrap(), TriState::False);
    }

    #[test]
    fn big_l_examples() {
        let t = tol();
        let l = big_l(&e(1), &e(0), &e(0), &t).unwrap();
        assert!(l.matrix.max_abs_diff(&CMatrix::identity(2)) < 1e-14);

        let l = big_l(&e(1), &e(0), &diag_line(), &t).unwrap();
        assert!(l.matrix.max_abs_diff(&lower(1.0)) < 1e-14);
        assert!(e(0).image(&l.matrix, &t).approx_eq(&diag_line(), &t));

        let l = big_l(&e(1), &diag_line(), &e(0), &t).unwrap();
        assert!(l.matrix.max_abs_diff(&lower(-1.0)) < 1e-14);
        assert!(diag_line().image(&l.matrix, &t).approx_eq(&e(0), &t));
    }

    #[test]
    fn big_l_requires_complements() {
        assert!(matches!(
            big_l(&e(1), &e(1), &e(0), &tol()),
            Err(Error::NotComplementary { .. })
        ));
    }

    #[test]
    fn big_l_analytic_examples() {
        let t = tol();
        let l = big_l_analytic(&e(1), &e(0), &e(0), &t).unwrap();
        assert!(l.max_abs_diff(&CMatrix::identity(2)) < 1e-14);
        let l = big_l_analytic(&e(1), &e(0), &diag_line(), &t).unwrap();
        assert!(l.max_abs_diff(&lower(1.0)) < 1e-14);
    }

    #[test]
    fn little_l_examples() {
        let t = tol();
        let l = little_l(&e(1), &e(0), &t).unwrap();
        assert!(l.matrix.max_abs_diff(&CMatrix::identity(2)) < 1e-14);

        let l = little_l(&e(1), &diag_line(), &t).unwrap();
        assert!(l.matrix.max_abs_diff(&lower(-1.0)) < 1e-14);
        assert!(diag_line().image(&l.matrix, &t).approx_eq(&e(0), &t));

        let l = little_l(&Subspace::zero(3), &Subspace::full(3), &t).unwrap();
        assert!(l.matrix.max_abs_diff(&CMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn pi_s0_examples() {
        let t = tol();
        let z = e(1);
        let id = GlZOperator::new(CMatrix::identity(2), z.clone(), &t).unwrap();
        assert!(pi_s0(&id, &e(0), &t).unwrap().approx_eq(&e(0), &t));
        let g = GlZOperator::new(lower(1.0), z.clone(), &t).unwrap();
        assert!(pi_s0(&g, &e(0), &t).unwrap().approx_eq(&diag_line(), &t));
        let two = GlZOperator::new(CMatrix::identity(2).scale_real(2.0), z, &t).unwrap();
        assert!(pi_s0(&two, &e(0), &t).unwrap().approx_eq(&e(0), &t));
    }

    #[test]
    fn section_examples() {
        let t = tol();
        let sigma = section_sigma(&e(1), &e(0), &e(0), &t).unwrap();
        assert!(pi_s0(&sigma, &e(0), &t).unwrap().approx_eq(&e(0), &t));
        assert!((&sigma.matrix * e(0).basis()).max_abs_diff(e(0).basis()) < 1e-14);

        let sigma = section_sigma(&e(1), &e(0), &diag_line(), &t).unwrap();
        assert!(sigma.matrix.max_abs_diff(&lower(1.0)) < 1e-14);
        assert!(pi_s0(&sigma, &e(0), &t)
            .unwrap()
            .approx_eq(&diag_line(), &t));
    }

    #[test]
    fn w_unitary_examples() {
        let t = tol();
        let w = w_unitary(&diag_line(), &diag_line(), &t).unwrap();
        assert!(w.matrix.max_abs_diff(&CMatrix::identity(2)) < 1e-14);

        let w = w_unitary(&e(0), &diag_line(), &t).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let expected = CMatrix::from_real_rows(2, 2, &[h, -h, h, h]);
        assert!(w.matrix.max_abs_diff(&expected) < 1e-14);
        let conj = &(&w.matrix * &e(0).projector_matrix()) * &w.matrix.adjoint();
        assert!(conj.max_abs_diff(&CMatrix::from_real_rows(2, 2, &[0.5; 4])) < 1e-14);
    }

    #[test]
    fn w_unitary_gap_too_large() {
        assert!(matches!(
            w_unitary(&e(0), &e(1), &tol()),
            Err(Error::GapTooLarge { .. })
        ));
    }
}
