//! The total space `E = {(Z, G, K) : G(Z) = K(Z) = Z}`, the bundle maps
//! `p(Z, G, K) = (G(Z⊥), K(Z⊥))` and `π(Z, G, K) = Z`, and their explicit
//! charts and local trivializations.
//!
//! Every map here is a product of orthogonal projectors, transition
//! operators `l`/`L`, polar unitaries and a fixed splitting unitary `T`.
//! Inverse maps are obtained by inverting each factor in order.

use serde::{Deserialize, Serialize};

use crate::delta::{delta_neighborhood_check, DeltaPair};
use crate::error::{Error, Result};
use crate::grassmann::{buckholtz_report, perp, require_complementary, Subspace};
use crate::operators::{big_l, glz_check, little_l, w_unitary, GlZOperator};
use crate::substrate::{inverse, op_norm, CMatrix, Tolerances, TriState};

/// A point `(Z, G, K)` of the total space.
#[derive(Debug, Clone)]
pub struct FramePoint {
    pub z: Subspace,
    pub g: GlZOperator,
    pub k: GlZOperator,
}

impl FramePoint {
    pub fn new(z: Subspace, g: CMatrix, k: CMatrix, tol: &Tolerances) -> Result<Self> {
        let g = GlZOperator::new(g, z.clone(), tol)?;
        let k = GlZOperator::new(k, z.clone(), tol)?;
        Ok(FramePoint { z, g, k })
    }

    pub fn g_matrix(&self) -> &CMatrix {
        &self.g.matrix
    }

    pub fn k_matrix(&self) -> &CMatrix {
        &self.k.matrix
    }
}

#[derive(Serialize, Deserialize)]
struct FramePointJson {
    z: Subspace,
    g: CMatrix,
    k: CMatrix,
}

impl Serialize for FramePoint {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        FramePointJson {
            z: self.z.clone(),
            g: self.g.matrix.clone(),
            k: self.k.matrix.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FramePoint {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = FramePointJson::deserialize(deserializer)?;
        FramePoint::new(raw.z, raw.g, raw.k, &Tolerances::default()).map_err(D::Error::custom)
    }
}

/// Orthogonal splitting `H = H− ⊕ H+` with `H− = span(e_1..e_i)`, together
/// with the unitary `T` (and optionally a second one `T'`) that carries a
/// designated source subspace onto one of the halves.
#[derive(Debug, Clone)]
pub struct SplitFrame {
    pub h_minus: Subspace,
    pub h_plus: Subspace,
    pub t_unitary: CMatrix,
    pub t_prime: Option<CMatrix>,
}

/// Unitary sending the canonical basis of `source` to that of `target` and
/// of `source⊥` to that of `target⊥`.
fn aligning_unitary(source: &Subspace, target: &Subspace) -> CMatrix {
    let direct = target.basis() * &source.basis().adjoint();
    let complement = perp(target).basis() * &perp(source).basis().adjoint();
    &direct + &complement
}

impl SplitFrame {
    fn coordinate_split(n: usize, minus_dim: usize) -> (Subspace, Subspace) {
        let minus: Vec<usize> = (0..minus_dim).collect();
        let plus: Vec<usize> = (minus_dim..n).collect();
        (
            Subspace::coordinate(n, &minus),
            Subspace::coordinate(n, &plus),
        )
    }

    /// Splitting with `dim H− = dim source` and `T(source) = H−`.
    pub fn onto_minus(source: &Subspace) -> Self {
        let (h_minus, h_plus) = Self::coordinate_split(source.ambient_dim(), source.dim());
        let t_unitary = aligning_unitary(source, &h_minus);
        SplitFrame {
            h_minus,
            h_plus,
            t_unitary,
            t_prime: None,
        }
    }

    /// Splitting with `dim H+ = dim source` and `T(source) = H+`.
    pub fn onto_plus(source: &Subspace) -> Self {
        let n = source.ambient_dim();
        let (h_minus, h_plus) = Self::coordinate_split(n, n - source.dim());
        let t_unitary = aligning_unitary(source, &h_plus);
        SplitFrame {
            h_minus,
            h_plus,
            t_unitary,
            t_prime: None,
        }
    }

    /// Installs a second unitary; it must move `source` exactly as `T` does
    /// (onto `target`, one of the two halves).
    pub fn with_t_prime(
        mut self,
        t_prime: CMatrix,
        source: &Subspace,
        target: &Subspace,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_unitary_maps(&t_prime, source, target, tol, "T'")?;
        self.t_prime = Some(t_prime);
        Ok(self)
    }

    pub fn t_prime_or_t(&self) -> &CMatrix {
        self.t_prime.as_ref().unwrap_or(&self.t_unitary)
    }

    /// Norm of the off-diagonal blocks of `a` against `H− ⊕ H+`, relative
    /// to `max(1, ‖a‖)`.
    pub fn block_residual(&self, a: &CMatrix) -> f64 {
        let pm = self.h_minus.projector_matrix();
        let pp = self.h_plus.projector_matrix();
        let off = op_norm(&(&(&pp * a) * &pm)) + op_norm(&(&(&pm * a) * &pp));
        off / op_norm(a).max(1.0)
    }

    /// Norm of the block mapping `H+` into `H−`; zero exactly when
    /// `a ∈ Gl^{H+}` (for invertible `a`).
    pub fn plus_invariance_residual(&self, a: &CMatrix) -> f64 {
        let pm = self.h_minus.projector_matrix();
        let pp = self.h_plus.projector_matrix();
        op_norm(&(&(&pm * a) * &pp)) / op_norm(a).max(1.0)
    }
}

fn check_unitary_maps(
    u: &CMatrix,
    source: &Subspace,
    target: &Subspace,
    tol: &Tolerances,
    label: &str,
) -> Result<()> {
    let n = source.ambient_dim();
    if !u.is_square() || u.rows() != n || target.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.rows(),
        });
    }
    let defect = op_norm(&(&(&u.adjoint() * u) - &CMatrix::identity(n)));
    if defect > tol.eq_atol {
        return Err(Error::InvalidInput(format!(
            "{label} is not unitary (defect {defect:e})"
        )));
    }
    if source.dim() != target.dim() || source.image(u, tol).gap(target) > tol.eq_atol {
        return Err(Error::InvalidInput(format!(
            "{label} does not map the required subspace onto its half of the splitting"
        )));
    }
    Ok(())
}

/// A frame known to lie in the fiber over `base`.
#[derive(Debug, Clone)]
pub struct FiberPoint {
    pub frame: FramePoint,
    pub base: DeltaPair,
}

impl FiberPoint {
    pub fn new(frame: FramePoint, base: DeltaPair, tol: &Tolerances) -> Result<Self> {
        let image = project_p(&frame, tol)?;
        let gap = image.s.gap(&base.s).max(image.t.gap(&base.t));
        if gap > tol.eq_atol {
            return Err(Error::InvalidInput(format!(
                "frame projects to a different pair (gap {gap:e})"
            )));
        }
        Ok(FiberPoint { frame, base })
    }
}

/// Coordinates `(S, T, u, a, b)` of a frame in the local trivialization of `p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trivialization {
    pub s: Subspace,
    pub t: Subspace,
    pub u: Subspace,
    pub a: CMatrix,
    pub b: CMatrix,
}

/// `p(Z, G, K) = (G(Z⊥), K(Z⊥))`, with `Z` recorded as the witness.
pub fn project_p(f: &FramePoint, tol: &Tolerances) -> Result<DeltaPair> {
    let zp = perp(&f.z);
    Ok(DeltaPair {
        s: zp.image(f.g_matrix(), tol),
        t: zp.image(f.k_matrix(), tol),
        witness: Some(f.z.clone()),
    })
}

/// `π(Z, G, K) = Z`.
pub fn project_pi(f: &FramePoint) -> Subspace {
    f.z.clone()
}

/// `(Z, L^Z_{Z⊥,S}, L^Z_{Z⊥,T})`, a frame over `(S, T)`.
pub fn p_preimage_point(
    s: &Subspace,
    t: &Subspace,
    z: &Subspace,
    tol: &Tolerances,
) -> Result<FramePoint> {
    let zp = perp(z);
    let g = big_l(z, &zp, s, tol)?;
    let k = big_l(z, &zp, t, tol)?;
    Ok(FramePoint { z: z.clone(), g, k })
}

fn require_plus_group(
    g: &CMatrix,
    frames: &SplitFrame,
    tol: &Tolerances,
    label: &str,
) -> Result<()> {
    match glz_check(g, &frames.h_plus, tol)? {
        TriState::True => Ok(()),
        verdict => Err(Error::InvalidGroupElement {
            reason: format!("{label} ∉ Gl^(H+) (test is {verdict})"),
        }),
    }
}

/// Chart of `E` around the fiber over `Z0`: for `z ∈ G^{Z0}` and
/// `G, K ∈ Gl^{H+}`,
/// `(z, l⁻¹ T0ᴴ G T0 l, l⁻¹ T0'ᴴ K T0' l)` with `l = l_{Z0,z}`.
///
/// `frames` must carry `Z0⊥` onto `H+` (see [`SplitFrame::onto_plus`]).
pub fn e_chart(
    z0: &Subspace,
    frames: &SplitFrame,
    z: &Subspace,
    g: &CMatrix,
    k: &CMatrix,
    tol: &Tolerances,
) -> Result<FramePoint> {
    let z0p = perp(z0);
    check_unitary_maps(&frames.t_unitary, &z0p, &frames.h_plus, tol, "T0")?;
    check_unitary_maps(frames.t_prime_or_t(), &z0p, &frames.h_plus, tol, "T0'")?;
    require_plus_group(g, frames, tol, "G")?;
    require_plus_group(k, frames, tol, "K")?;
    let l = little_l(z0, z, tol)?.matrix;
    let l_inv = inverse(&l, tol)?;
    let t0 = &frames.t_unitary;
    let t0p = frames.t_prime_or_t();
    let g_out = &(&(&(&l_inv * &t0.adjoint()) * g) * t0) * &l;
    let k_out = &(&(&(&l_inv * &t0p.adjoint()) * k) * t0p) * &l;
    FramePoint::new(z.clone(), g_out, k_out, tol)
}

/// Inverse of [`e_chart`], defined on frames whose `z` is a complement of
/// `Z0` (that is, `‖P_z − P_{Z0⊥}‖ < 1`).
pub fn e_chart_inv(
    z0: &Subspace,
    frames: &SplitFrame,
    f: &FramePoint,
    tol: &Tolerances,
) -> Result<(Subspace, CMatrix, CMatrix)> {
    let report = buckholtz_report(&f.z, z0, tol)?;
    if !report.norm_lt_one.is_true() {
        return Err(Error::OutsideChartDomain {
            gap: report.norm_value,
        });
    }
    let z0p = perp(z0);
    check_unitary_maps(&frames.t_unitary, &z0p, &frames.h_plus, tol, "T0")?;
    check_unitary_maps(frames.t_prime_or_t(), &z0p, &frames.h_plus, tol, "T0'")?;
    let l = little_l(z0, &f.z, tol)?.matrix;
    let l_inv = inverse(&l, tol)?;
    let t0 = &frames.t_unitary;
    let t0p = frames.t_prime_or_t();
    let g = &(&(&(t0 * &l) * f.g_matrix()) * &l_inv) * &t0.adjoint();
    let k = &(&(&(t0p * &l) * f.k_matrix()) * &l_inv) * &t0p.adjoint();
    Ok((f.z.clone(), g, k))
}

/// `L_Z = L^Z_{T0,S0}`, the operator shared by [`fiber_psi`] and its inverse.
pub fn fiber_lz(
    z: &Subspace,
    s0: &Subspace,
    t0: &Subspace,
    tol: &Tolerances,
) -> Result<GlZOperator> {
    big_l(z, t0, s0, tol)
}

struct FiberFactors {
    t: CMatrix,
    l_s0z: CMatrix,
    l_s0z_inv: CMatrix,
    l_zs0: CMatrix,
    l_zs0_inv: CMatrix,
}

fn fiber_factors(
    s0: &Subspace,
    frames: &SplitFrame,
    lz: &GlZOperator,
    z: &Subspace,
    tol: &Tolerances,
) -> Result<FiberFactors> {
    check_unitary_maps(&frames.t_unitary, s0, &frames.h_minus, tol, "T")?;
    if lz.invariant_space.ambient_dim() != z.ambient_dim()
        || lz.invariant_space.gap(z) > tol.eq_atol
    {
        return Err(Error::InvalidInput(
            "L_Z was built for a different Z".into(),
        ));
    }
    let l_s0z = little_l(s0, z, tol)?.matrix;
    let l_zs0 = little_l(z, s0, tol)?.matrix;
    Ok(FiberFactors {
        t: frames.t_unitary.clone(),
        l_s0z_inv: inverse(&l_s0z, tol)?,
        l_zs0_inv: inverse(&l_zs0, tol)?,
        l_s0z,
        l_zs0,
    })
}

/// Parametrization of the fiber over `(S0, T0)`:
///
/// `Ψ(z, G, K) = (z, l_{S0,z}⁻¹ Tᴴ G⁻¹ T l_{S0,z} l_{z,S0}⁻¹,
///                L_Z⁻¹ l_{S0,z}⁻¹ Tᴴ K⁻¹ T l_{S0,z} l_{z,S0}⁻¹)`
///
/// with `T(S0) = H−` and `G, K ∈ Gl^{H+}`. For block-diagonal `G, K` the
/// result lies in the fiber.
#[allow(clippy::too_many_arguments)]
pub fn fiber_psi(
    s0: &Subspace,
    t0: &Subspace,
    frames: &SplitFrame,
    lz: &GlZOperator,
    z: &Subspace,
    g: &CMatrix,
    k: &CMatrix,
    tol: &Tolerances,
) -> Result<FramePoint> {
    s0.check_same_ambient(t0)?;
    require_complementary(z, s0, tol, "fiber chart, (z, S0)")?;
    require_plus_group(g, frames, tol, "G")?;
    require_plus_group(k, frames, tol, "K")?;
    let f = fiber_factors(s0, frames, lz, z, tol)?;
    let wrap = |x_inv: &CMatrix| -> CMatrix {
        let left = &(&f.l_s0z_inv * &f.t.adjoint()) * x_inv;
        &(&(&left * &f.t) * &f.l_s0z) * &f.l_zs0_inv
    };
    let g_out = wrap(&inverse(g, tol)?);
    let k_out = &inverse(&lz.matrix, tol)? * &wrap(&inverse(k, tol)?);
    FramePoint::new(z.clone(), g_out, k_out, tol)
}

/// Inverse of [`fiber_psi`] for the same `(S0, T0, frames, L_Z)`.
pub fn fiber_psi_inverse(
    s0: &Subspace,
    t0: &Subspace,
    frames: &SplitFrame,
    lz: &GlZOperator,
    f: &FramePoint,
    tol: &Tolerances,
) -> Result<(Subspace, CMatrix, CMatrix)> {
    s0.check_same_ambient(t0)?;
    require_complementary(&f.z, s0, tol, "fiber chart, (z, S0)")?;
    let ff = fiber_factors(s0, frames, lz, &f.z, tol)?;
    let unwrap = |y: &CMatrix| -> CMatrix {
        let left = &(&ff.t * &ff.l_s0z) * y;
        &(&(&left * &ff.l_zs0) * &ff.l_s0z_inv) * &ff.t.adjoint()
    };
    let g = inverse(&unwrap(f.g_matrix()), tol)?;
    let k = inverse(&unwrap(&(&lz.matrix * f.k_matrix())), tol)?;
    Ok((f.z.clone(), g, k))
}

struct TrivFactors {
    tw: CMatrix,
    l_sz: CMatrix,
    l_sz_inv: CMatrix,
    l_zs: CMatrix,
    l_zs_inv: CMatrix,
    l_ts: CMatrix,
}

fn triv_rotation(
    z0: &Subspace,
    frames: &SplitFrame,
    s: &Subspace,
    t: &Subspace,
    tol: &Tolerances,
) -> Result<CMatrix> {
    match delta_neighborhood_check(z0, s, t, tol)? {
        TriState::True => {}
        verdict => {
            return Err(Error::OutsideTrivializationDomain {
                reason: format!("(S, T) ∈ Δ^(Z0) test is {verdict}"),
            })
        }
    }
    let z0p = perp(z0);
    check_unitary_maps(&frames.t_unitary, &z0p, &frames.h_minus, tol, "T")?;
    let w = w_unitary(s, &z0p, tol)?;
    Ok(&frames.t_unitary * &w.matrix)
}

fn triv_factors(
    tw: CMatrix,
    z: &Subspace,
    s: &Subspace,
    t: &Subspace,
    tol: &Tolerances,
) -> Result<TrivFactors> {
    let l_sz = little_l(s, z, tol)?.matrix;
    let l_zs = little_l(z, s, tol)?.matrix;
    let l_ts = big_l(z, t, s, tol)?.matrix;
    Ok(TrivFactors {
        tw,
        l_sz_inv: inverse(&l_sz, tol)?,
        l_zs_inv: inverse(&l_zs, tol)?,
        l_sz,
        l_zs,
        l_ts,
    })
}

/// Local trivialization of `p` over `Δ^{Z0}`:
///
/// * `u = T W (Z)` with `W = W_S^{Z0⊥}`,
/// * `a = T W l_{S,Z} l_{Z,S}⁻¹ G⁻¹ l_{S,Z}⁻¹ Wᴴ Tᴴ`,
/// * `b = T W l_{S,Z} l_{Z,S}⁻¹ K⁻¹ (L^Z_{T,S})⁻¹ l_{S,Z}⁻¹ Wᴴ Tᴴ`,
///
/// where `(S, T) = p(Z, G, K)` and `T(Z0⊥) = H−` (see
/// [`SplitFrame::onto_minus`]).
pub fn trivialize_phi(
    z0: &Subspace,
    frames: &SplitFrame,
    f: &FramePoint,
    tol: &Tolerances,
) -> Result<Trivialization> {
    let pair = project_p(f, tol)?;
    let (s, t) = (pair.s, pair.t);
    let tw = triv_rotation(z0, frames, &s, &t, tol)?;
    let u = f.z.image(&tw, tol);
    let fac = triv_factors(tw, &f.z, &s, &t, tol)?;
    let head = &(&fac.tw * &fac.l_sz) * &fac.l_zs_inv;
    let tail = &fac.l_sz_inv * &fac.tw.adjoint();
    let a = &(&head * &inverse(f.g_matrix(), tol)?) * &tail;
    let b = &(&(&head * &inverse(f.k_matrix(), tol)?) * &inverse(&fac.l_ts, tol)?) * &tail;
    Ok(Trivialization { s, t, u, a, b })
}

/// Inverse of [`trivialize_phi`].
pub fn trivialize_phi_inv(
    z0: &Subspace,
    frames: &SplitFrame,
    coords: &Trivialization,
    tol: &Tolerances,
) -> Result<FramePoint> {
    let (s, t) = (&coords.s, &coords.t);
    let tw = triv_rotation(z0, frames, s, t, tol)?;
    if !buckholtz_report(&coords.u, &frames.h_minus, tol)?
        .norm_lt_one
        .is_true()
    {
        return Err(Error::OutsideTrivializationDomain {
            reason: "u is not a complement of H−".into(),
        });
    }
    let block_tol = tol.eq_atol.sqrt();
    for (label, m) in [("a", &coords.a), ("b", &coords.b)] {
        let r = frames.block_residual(m);
        if r > block_tol {
            return Err(Error::OutsideTrivializationDomain {
                reason: format!("{label} is not block diagonal (residual {r:e})"),
            });
        }
    }
    let z = coords.u.image(&tw.adjoint(), tol);
    let fac = triv_factors(tw, &z, s, t, tol)?;
    let head = &(&fac.l_zs * &fac.l_sz_inv) * &fac.tw.adjoint();
    let tail = &fac.tw * &fac.l_sz;
    let g_inv = &(&head * &coords.a) * &tail;
    let k_inv = &(&(&head * &coords.b) * &tail) * &fac.l_ts;
    FramePoint::new(z, inverse(&g_inv, tol)?, inverse(&k_inv, tol)?, tol)
}

/// Local trivialization of `π` near `Z0`:
/// `(Z, G, K) ↦ (Z, W G Wᴴ, W K Wᴴ)` with `W = W_Z^{Z0}`.
pub fn pi_trivialize(
    z0: &Subspace,
    f: &FramePoint,
    tol: &Tolerances,
) -> Result<(Subspace, CMatrix, CMatrix)> {
    let w = pi_rotation(z0, &f.z, tol)?;
    let g = &(&w * f.g_matrix()) * &w.adjoint();
    let k = &(&w * f.k_matrix()) * &w.adjoint();
    Ok((f.z.clone(), g, k))
}

/// Inverse of [`pi_trivialize`].
pub fn pi_untrivialize(
    z0: &Subspace,
    z: &Subspace,
    g: &CMatrix,
    k: &CMatrix,
    tol: &Tolerances,
) -> Result<FramePoint> {
    let w = pi_rotation(z0, z, tol)?;
    let g = &(&w.adjoint() * g) * &w;
    let k = &(&w.adjoint() * k) * &w;
    FramePoint::new(z.clone(), g, k, tol)
}

fn pi_rotation(z0: &Subspace, z: &Subspace, tol: &Tolerances) -> Result<CMatrix> {
    z.check_same_ambient(z0)?;
    let gap = z.gap(z0);
    if !tol.strictly_below_one(gap).is_true() {
        return Err(Error::OutsideChartDomain { gap });
    }
    Ok(w_unitary(z, z0, tol)?.matrix)
}

/// Relative distance `‖A − B‖ / max(1, ‖B‖)`.
pub fn relative_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    op_norm(&(a - b)) / op_norm(b).max(1.0)
}

/// `G` perturbed inside `Gl^{H+}` by a block from `H−` into `H+`, which
/// takes it out of `Gl^{H−}`.
pub fn perturb_off_block(g: &CMatrix, frames: &SplitFrame, perturbation: &CMatrix) -> CMatrix {
    let pm = frames.h_minus.projector_matrix();
    let pp = frames.h_plus.projector_matrix();
    g + &(&(&pp * perturbation) * &pm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta::common_complement;
    use crate::grassmann::component_index;
    use crate::random::{random_block_diagonal, random_glz, random_subspace, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(n: usize, idx: &[usize]) -> Subspace {
        Subspace::coordinate(n, idx)
    }

    fn diag_line() -> Subspace {
        Subspace::span_real(&[&[1.0, 1.0]], &tol())
    }

    fn lower() -> CMatrix {
        CMatrix::from_real_rows(2, 2, &[1.0, 0.0, 1.0, 1.0])
    }

    #[test]
    fn project_p_examples() {
        let t = tol();
        let id = CMatrix::identity(2);
        let f = FramePoint::new(e(2, &[1]), id.clone(), id.clone(), &t).unwrap();
        let pair = project_p(&f, &t).unwrap();
        assert!(pair.s.approx_eq(&e(2, &[0]), &t) && pair.t.approx_eq(&e(2, &[0]), &t));

        let f = FramePoint::new(e(2, &[1]), lower(), id, &t).unwrap();
        let pair = project_p(&f, &t).unwrap();
        assert!(pair.s.approx_eq(&diag_line(), &t));
        assert!(pair.t.approx_eq(&e(2, &[0]), &t));

        let mut rng = rng_from_seed(1);
        let g = crate::random::random_invertible(3, 10.0, &mut rng);
        let f = FramePoint::new(Subspace::zero(3), g.clone(), g, &t).unwrap();
        let pair = project_p(&f, &t).unwrap();
        assert_eq!((pair.s.dim(), pair.t.dim()), (3, 3));
    }

    #[test]
    fn project_pi_returns_z() {
        let t = tol();
        let id = CMatrix::identity(2);
        let f = FramePoint::new(e(2, &[1]), id.clone(), id, &t).unwrap();
        assert!(project_pi(&f).approx_eq(&e(2, &[1]), &t));
    }

    #[test]
    fn frame_point_rejects_non_members() {
        let swap = CMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            FramePoint::new(e(2, &[0]), swap, CMatrix::identity(2), &tol()),
            Err(Error::InvalidGroupElement { .. })
        ));
    }

    #[test]
    fn preimage_examples() {
        let t = tol();
        let z = e(2, &[1]);
        let f = p_preimage_point(&e(2, &[0]), &e(2, &[0]), &z, &t).unwrap();
        assert!(f.g_matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
        assert!(f.k_matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-14);

        let f = p_preimage_point(&e(2, &[0]), &diag_line(), &z, &t).unwrap();
        let pair = project_p(&f, &t).unwrap();
        assert!(pair.s.approx_eq(&e(2, &[0]), &t) && pair.t.approx_eq(&diag_line(), &t));
    }

    #[test]
    fn preimage_random_round_trip() {
        let t = tol();
        let mut rng = rng_from_seed(8);
        let s = random_subspace(8, 3, &mut rng, &t);
        let tt = random_subspace(8, 3, &mut rng, &t);
        let cert = common_complement(&s, &tt, &t, 8).unwrap();
        let f = p_preimage_point(&s, &tt, &cert.z, &t).unwrap();
        let pair = project_p(&f, &t).unwrap();
        assert!(pair.s.gap(&s) < 1e-8 && pair.t.gap(&tt) < 1e-8);
        // components swap dimension and codimension
        let zi = component_index(&cert.z);
        let si = component_index(&pair.s);
        assert_eq!((zi.dim, zi.codim), (si.codim, si.dim));
    }

    #[test]
    fn e_chart_at_center_is_identity() {
        let t = tol();
        let z0 = e(2, &[1]);
        let frames = SplitFrame::onto_plus(&perp(&z0));
        let id = CMatrix::identity(2);
        let f = e_chart(&z0, &frames, &perp(&z0), &id, &id, &t).unwrap();
        assert!(f.z.approx_eq(&e(2, &[0]), &t));
        assert!(f.g_matrix().max_abs_diff(&id) < 1e-14);
        assert!(f.k_matrix().max_abs_diff(&id) < 1e-14);
    }

    #[test]
    fn e_chart_perturbed_point() {
        let t = tol();
        let z0 = e(2, &[1]);
        let frames = SplitFrame::onto_plus(&perp(&z0));
        let z = perp(&Subspace::span_real(&[&[0.1, 1.0]], &t));
        let g = CMatrix::real_diagonal(&[2.0, 1.0]);
        let f = e_chart(&z0, &frames, &z, &g, &g, &t).unwrap();
        assert_eq!(glz_check(f.g_matrix(), &z, &t).unwrap(), TriState::True);
        let (z_back, g_back, _) = e_chart_inv(&z0, &frames, &f, &t).unwrap();
        assert!(z_back.approx_eq(&z, &t));
        assert!(g_back.max_abs_diff(&g) < 1e-12);
    }

    #[test]
    fn e_chart_rejects_non_plus_group() {
        let t = tol();
        let z0 = e(2, &[1]);
        let frames = SplitFrame::onto_plus(&perp(&z0));
        // H+ = span(e2) here; a shear from H+ into H− leaves the group.
        let g = CMatrix::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            e_chart(&z0, &frames, &perp(&z0), &g, &g, &t),
            Err(Error::InvalidGroupElement { .. })
        ));
    }

    #[test]
    fn e_chart_inv_domain() {
        let t = tol();
        let z0 = e(2, &[1]);
        let frames = SplitFrame::onto_plus(&perp(&z0));
        let id = CMatrix::identity(2);
        let f = FramePoint::new(z0.clone(), id.clone(), id, &t).unwrap();
        assert!(matches!(
            e_chart_inv(&z0, &frames, &f, &t),
            Err(Error::OutsideChartDomain { .. })
        ));
    }

    #[test]
    fn fiber_psi_identity_lands_in_fiber() {
        let t = tol();
        let mut rng = rng_from_seed(21);
        let n = 6;
        let s0 = random_subspace(n, 2, &mut rng, &t);
        let t0 = random_subspace(n, 2, &mut rng, &t);
        let z = common_complement(&s0, &t0, &t, 0).unwrap().z;
        let frames = SplitFrame::onto_minus(&s0);
        let lz = fiber_lz(&z, &s0, &t0, &t).unwrap();
        let id = CMatrix::identity(n);
        let f = fiber_psi(&s0, &t0, &frames, &lz, &z, &id, &id, &t).unwrap();
        let pair = project_p(&f, &t).unwrap();
        assert!(pair.s.gap(&s0) < 1e-8 && pair.t.gap(&t0) < 1e-8);
        let base = DeltaPair::new(s0.clone(), t0.clone(), None, &t).unwrap();
        assert!(FiberPoint::new(f, base, &t).is_ok());
    }

    #[test]
    fn fiber_psi_block_diagonal_round_trip() {
        let t = tol();
        let mut rng = rng_from_seed(22);
        let n = 8;
        let s0 = random_subspace(n, 3, &mut rng, &t);
        let t0 = random_subspace(n, 3, &mut rng, &t);
        let z = common_complement(&s0, &t0, &t, 0).unwrap().z;
        let frames = SplitFrame::onto_minus(&s0);
        let lz = fiber_lz(&z, &s0, &t0, &t).unwrap();
        let g = random_block_diagonal(n, 3, 10.0, &mut rng);
        let k = random_block_diagonal(n, 3, 10.0, &mut rng);
        let f = fiber_psi(&s0, &t0, &frames, &lz, &z, &g, &k, &t).unwrap();
        let pair = project_p(&f, &t).unwrap();
        assert!(pair.s.gap(&s0) < 1e-8 && pair.t.gap(&t0) < 1e-8);
        let (z_back, g_back, k_back) = fiber_psi_inverse(&s0, &t0, &frames, &lz, &f, &t).unwrap();
        assert!(z_back.gap(&z) < 1e-8);
        assert!(relative_distance(&g_back, &g) < 1e-8);
        assert!(relative_distance(&k_back, &k) < 1e-8);
    }

    #[test]
    fn fiber_psi_negative_control_leaves_fiber() {
        let t = tol();
        let mut rng = rng_from_seed(23);
        let n = 6;
        let s0 = random_subspace(n, 2, &mut rng, &t);
        let t0 = random_subspace(n, 2, &mut rng, &t);
        let z = common_complement(&s0, &t0, &t, 0).unwrap().z;
        let frames = SplitFrame::onto_minus(&s0);
        let lz = fiber_lz(&z, &s0, &t0, &t).unwrap();
        let g = perturb_off_block(
            &CMatrix::identity(n),
            &frames,
            &crate::random::gaussian_matrix(n, n, &mut rng),
        );
        let id = CMatrix::identity(n);
        let f = fiber_psi(&s0, &t0, &frames, &lz, &z, &g, &id, &t).unwrap();
        let pair = project_p(&f, &t).unwrap();
        assert!(pair.s.gap(&s0) > 1e-6);
    }

    #[test]
    fn trivialization_zero_gap() {
        let t = tol();
        let n = 4;
        let z0 = e(n, &[2, 3]);
        let frames = SplitFrame::onto_minus(&perp(&z0));
        let id = CMatrix::identity(n);
        let f = FramePoint::new(z0.clone(), id.clone(), id.clone(), &t).unwrap();
        let triv = trivialize_phi(&z0, &frames, &f, &t).unwrap();
        assert!(triv.s.approx_eq(&perp(&z0), &t));
        assert!(triv.u.approx_eq(&frames.h_plus, &t));
        assert!(triv.a.max_abs_diff(&id) < 1e-12);
        assert!(triv.b.max_abs_diff(&id) < 1e-12);
        let back = trivialize_phi_inv(&z0, &frames, &triv, &t).unwrap();
        assert!(back.z.approx_eq(&z0, &t));
        assert!(back.g_matrix().max_abs_diff(&id) < 1e-12);
    }

    #[test]
    fn trivialization_random_frame() {
        let t = tol();
        let mut rng = rng_from_seed(31);
        let n = 4;
        let z0 = random_subspace(n, 2, &mut rng, &t);
        let z = crate::random::subspace_at_gap(&z0, 0.5, &mut rng, &t);
        let g = random_glz(&z, 5.0, &mut rng);
        let k = random_glz(&z, 5.0, &mut rng);
        let f = FramePoint::new(z, g, k, &t).unwrap();
        let frames = SplitFrame::onto_minus(&perp(&z0));
        let triv = trivialize_phi(&z0, &frames, &f, &t).unwrap();
        assert!(frames.block_residual(&triv.a) < 1e-8);
        assert!(frames.block_residual(&triv.b) < 1e-8);
        assert!(buckholtz_report(&triv.u, &frames.h_minus, &t)
            .unwrap()
            .all_true());
        let back = trivialize_phi_inv(&z0, &frames, &triv, &t).unwrap();
        assert!(back.z.gap(&f.z) < 1e-8);
        assert!(relative_distance(back.g_matrix(), f.g_matrix()) < 1e-8);
        assert!(relative_distance(back.k_matrix(), f.k_matrix()) < 1e-8);
    }

    #[test]
    fn trivialization_outside_domain() {
        let t = tol();
        let n = 2;
        let z0 = e(n, &[1]);
        let frames = SplitFrame::onto_minus(&perp(&z0));
        // p(f) = (span(e2), span(e2)) meets Z0.
        let z = e(n, &[0]);
        let id = CMatrix::identity(n);
        let f = FramePoint::new(z, id.clone(), id, &t).unwrap();
        assert!(matches!(
            trivialize_phi(&z0, &frames, &f, &t),
            Err(Error::OutsideTrivializationDomain { .. })
        ));
    }

    #[test]
    fn pi_trivialization_examples() {
        let t = tol();
        let mut rng = rng_from_seed(41);
        let n = 5;
        let z0 = random_subspace(n, 2, &mut rng, &t);
        let g = random_glz(&z0, 10.0, &mut rng);
        let f = FramePoint::new(z0.clone(), g.clone(), g.clone(), &t).unwrap();
        let (_, g2, _) = pi_trivialize(&z0, &f, &t).unwrap();
        assert!(g2.max_abs_diff(&g) < 1e-12);

        let z = crate::random::subspace_at_gap(&z0, 0.8, &mut rng, &t);
        let g = random_glz(&z, 10.0, &mut rng);
        let f = FramePoint::new(z.clone(), g.clone(), g, &t).unwrap();
        let (zz, g2, k2) = pi_trivialize(&z0, &f, &t).unwrap();
        assert_eq!(glz_check(&g2, &z0, &t).unwrap(), TriState::True);
        let back = pi_untrivialize(&z0, &zz, &g2, &k2, &t).unwrap();
        assert!(relative_distance(back.g_matrix(), f.g_matrix()) < 1e-8);

        let n = 4;
        let z0 = e(n, &[0, 1]);
        let id = CMatrix::identity(n);
        let f = FramePoint::new(e(n, &[2, 3]), id.clone(), id, &t).unwrap();
        assert!(matches!(
            pi_trivialize(&z0, &f, &t),
            Err(Error::OutsideChartDomain { .. })
        ));
    }
}
