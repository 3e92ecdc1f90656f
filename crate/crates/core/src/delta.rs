//! Pairs of subspaces that admit a common complement.
//!
//! In finite dimension a pair `(S, T)` has a common complement exactly when
//! `dim S = dim T`. [`common_complement`] constructs one and returns it with a
//! certificate that can be re-verified independently.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{buckholtz_report, BuckholtzReport, Subspace};
use crate::random::{random_subspace, random_unit_vector, rng_from_seed};
use crate::substrate::{CMatrix, Tolerances, TriState};

/// Candidates whose distance to `span(Z ∪ S)` or `span(Z ∪ T)` falls below
/// this (relative to their norm) are skipped.
pub const GREEDY_MIN_RESIDUAL: f64 = 1e-3;

/// Random draws allowed per basis slot once the deterministic pool is spent.
pub const RANDOM_DRAWS_PER_SLOT: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaPair {
    pub s: Subspace,
    pub t: Subspace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Subspace>,
}

impl DeltaPair {
    pub fn new(
        s: Subspace,
        t: Subspace,
        witness: Option<Subspace>,
        tol: &Tolerances,
    ) -> Result<Self> {
        s.check_same_ambient(&t)?;
        if let Some(z) = &witness {
            for (label, x) in [("S", &s), ("T", &t)] {
                let report = buckholtz_report(x, z, tol)?;
                if !report.all_true() {
                    return Err(Error::NotComplementary {
                        context: format!("witness is not a complement of {label}"),
                    });
                }
            }
        }
        Ok(DeltaPair { s, t, witness })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Greedy,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplementCertificate {
    pub z: Subspace,
    /// `1 − ‖P_S + P_Z − 1‖`.
    pub margin_s: f64,
    /// `1 − ‖P_T + P_Z − 1‖`.
    pub margin_t: f64,
    pub method: SearchMethod,
    pub seed: u64,
}

impl ComplementCertificate {
    /// Recomputes both reports from scratch.
    pub fn verify(&self, s: &Subspace, t: &Subspace, tol: &Tolerances) -> Result<bool> {
        Ok(buckholtz_report(s, &self.z, tol)?.all_true()
            && buckholtz_report(t, &self.z, tol)?.all_true())
    }
}

/// Membership in Δ: equal dimensions.
pub fn in_delta(s: &Subspace, t: &Subspace) -> Result<TriState> {
    s.check_same_ambient(t)?;
    Ok(TriState::from_bool(s.dim() == t.dim()))
}

/// `(S, T) ∈ Δ^{Z0}`: both `S` and `T` are complements of `Z0`.
pub fn delta_neighborhood_check(
    z0: &Subspace,
    s: &Subspace,
    t: &Subspace,
    tol: &Tolerances,
) -> Result<TriState> {
    let rs = buckholtz_report(s, z0, tol)?;
    let rt = buckholtz_report(t, z0, tol)?;
    Ok(rs.norm_lt_one.and(rt.norm_lt_one))
}

type Vector = Vec<Complex64>;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Removes from `r` its component along the unit vector `q`.
fn remove_component(r: &mut [Complex64], q: &[Complex64]) {
    let c = dot(q, r);
    for (ri, qi) in r.iter_mut().zip(q) {
        *ri -= c * qi;
    }
}

fn column(m: &CMatrix, j: usize) -> Vector {
    (0..m.rows()).map(|i| m.get(i, j)).collect()
}

/// Incrementally maintained orthonormal basis.
struct Frame {
    cols: Vec<Vector>,
}

impl Frame {
    fn from_basis(b: &CMatrix) -> Self {
        Frame {
            cols: (0..b.cols()).map(|j| column(b, j)).collect(),
        }
    }

    /// Component of `v` orthogonal to the frame (two passes).
    fn orthogonal_part(&self, v: &[Complex64]) -> Vector {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for q in &self.cols {
                remove_component(&mut r, q);
            }
        }
        r
    }

    fn residual(&self, v: &[Complex64]) -> f64 {
        norm(&self.orthogonal_part(v))
    }

    /// Appends the normalized orthogonal part of `v`; returns the new column.
    fn push(&mut self, v: &[Complex64]) -> &[Complex64] {
        let mut r = self.orthogonal_part(v);
        let nr = norm(&r);
        r.iter_mut().for_each(|x| *x /= nr);
        self.cols.push(r);
        self.cols.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// A pool vector with its running residuals against `span(Z ∪ S)` and
/// `span(Z ∪ T)`.
struct Candidate {
    vector: Vector,
    against_s: Vector,
    against_t: Vector,
    used: bool,
}

impl Candidate {
    fn score(&self) -> f64 {
        norm(&self.against_s).min(norm(&self.against_t))
    }
}

/// Standard basis vectors, then `(e_i + e_j)/√2` for `i < j`.
fn candidate_pool(n: usize) -> Vec<Vector> {
    let unit = |i: usize, scale: f64| -> Vector {
        (0..n)
            .map(|r| Complex64::new(if r == i { scale } else { 0.0 }, 0.0))
            .collect()
    };
    let mut pool: Vec<Vector> = (0..n).map(|i| unit(i, 1.0)).collect();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v = unit(i, h);
            v[j] = Complex64::new(h, 0.0);
            pool.push(v);
        }
    }
    pool
}

fn certify(
    s: &Subspace,
    t: &Subspace,
    z: &Subspace,
    tol: &Tolerances,
) -> Result<(BuckholtzReport, BuckholtzReport)> {
    Ok((buckholtz_report(s, z, tol)?, buckholtz_report(t, z, tol)?))
}

/// Builds `Z` with `Z ∔ S = Z ∔ T = H`.
///
/// Each basis slot takes the pool candidate (standard vectors, then
/// normalized `e_i + e_j`) that stays farthest from both `span(Z ∪ S)` and
/// `span(Z ∪ T)`; the first candidate wins ties. When the pool has nothing
/// above [`GREEDY_MIN_RESIDUAL`], seeded random unit vectors are drawn. The
/// result is verified before it is returned; a failed verification falls
/// back to random complements of the right dimension.
pub fn common_complement(
    s: &Subspace,
    t: &Subspace,
    tol: &Tolerances,
    seed: u64,
) -> Result<ComplementCertificate> {
    if !in_delta(s, t)?.is_true() {
        return Err(Error::NotInDelta {
            dim_s: s.dim(),
            dim_t: t.dim(),
        });
    }
    let n = s.ambient_dim();
    let needed = n - s.dim();
    let mut rng = rng_from_seed(seed);
    let mut method = SearchMethod::Greedy;

    let mut with_s = Frame::from_basis(s.basis());
    let mut with_t = Frame::from_basis(t.basis());
    let mut pool: Vec<Candidate> = candidate_pool(n)
        .into_iter()
        .map(|v| Candidate {
            against_s: with_s.orthogonal_part(&v),
            against_t: with_t.orthogonal_part(&v),
            vector: v,
            used: false,
        })
        .collect();
    let mut z_cols: Vec<Vector> = Vec::with_capacity(needed);

    for _ in 0..needed {
        let mut best: Option<(usize, f64)> = None;
        for (idx, cand) in pool.iter().enumerate() {
            if cand.used {
                continue;
            }
            let score = cand.score();
            if score >= GREEDY_MIN_RESIDUAL && best.is_none_or(|(_, b)| score > b) {
                best = Some((idx, score));
            }
        }
        let chosen = match best {
            Some((idx, _)) => {
                pool[idx].used = true;
                pool[idx].vector.clone()
            }
            None => {
                method = SearchMethod::Random;
                let mut found = None;
                for _ in 0..RANDOM_DRAWS_PER_SLOT {
                    let v = column(&random_unit_vector(n, &mut rng), 0);
                    if with_s.residual(&v).min(with_t.residual(&v)) >= GREEDY_MIN_RESIDUAL {
                        found = Some(v);
                        break;
                    }
                }
                match found {
                    Some(v) => v,
                    None => break,
                }
            }
        };
        let qs = with_s.push(&chosen).to_vec();
        let qt = with_t.push(&chosen).to_vec();
        for cand in pool.iter_mut().filter(|c| !c.used) {
            remove_component(&mut cand.against_s, &qs);
            remove_component(&mut cand.against_t, &qt);
        }
        z_cols.push(chosen);
    }

    let mut best_margins = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    if z_cols.len() == needed {
        let spanning = CMatrix::from_fn(n, needed, |i, j| z_cols[j][i]);
        let z = Subspace::span(&spanning, tol);
        let (rs, rt) = certify(s, t, &z, tol)?;
        if rs.all_true() && rt.all_true() {
            return Ok(ComplementCertificate {
                z,
                margin_s: rs.margin(),
                margin_t: rt.margin(),
                method,
                seed,
            });
        }
        best_margins = (rs.margin(), rt.margin());
    }

    for _ in 0..RANDOM_DRAWS_PER_SLOT {
        let z = random_subspace(n, needed, &mut rng, tol);
        let (rs, rt) = certify(s, t, &z, tol)?;
        if rs.all_true() && rt.all_true() {
            return Ok(ComplementCertificate {
                z,
                margin_s: rs.margin(),
                margin_t: rt.margin(),
                method: SearchMethod::Random,
                seed,
            });
        }
        if rs.margin().min(rt.margin()) > best_margins.0.min(best_margins.1) {
            best_margins = (rs.margin(), rt.margin());
        }
    }
    Err(Error::SearchFailed {
        best_margin_s: best_margins.0,
        best_margin_t: best_margins.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::perp;
    use crate::random::random_subspace;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(n: usize, idx: &[usize]) -> Subspace {
        Subspace::coordinate(n, idx)
    }

    fn diag_line() -> Subspace {
        Subspace::span_real(&[&[1.0, 1.0]], &tol())
    }

    #[test]
    fn in_delta_examples() {
        assert_eq!(in_delta(&e(2, &[0]), &diag_line()).unwrap(), TriState::True);
        assert_eq!(
            in_delta(&e(3, &[0]), &e(3, &[0, 1])).unwrap(),
            TriState::False
        );
        let s = e(3, &[1]);
        assert_eq!(in_delta(&s, &s).unwrap(), TriState::True);
        let cert = common_complement(&s, &s, &tol(), 0).unwrap();
        assert!(cert.verify(&s, &s, &tol()).unwrap());
        assert!(in_delta(&e(2, &[0]), &e(3, &[0])).is_err());
    }

    #[test]
    fn complement_of_oblique_pair() {
        let t = tol();
        let cert = common_complement(&e(2, &[0]), &diag_line(), &t, 1).unwrap();
        assert!(cert.z.approx_eq(&e(2, &[1]), &t));
        assert!((cert.margin_s - 1.0).abs() < 1e-14);
        assert!((cert.margin_t - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-14);
        assert_eq!(cert.method, SearchMethod::Greedy);
    }

    #[test]
    fn complement_of_diagonal_pair() {
        let t = tol();
        let s = e(2, &[0]);
        let cert = common_complement(&s, &s, &t, 1).unwrap();
        assert!(cert.z.approx_eq(&e(2, &[1]), &t));
        assert!((cert.margin_s - 1.0).abs() < 1e-14);
        assert!((cert.margin_t - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complement_of_random_pair() {
        let t = tol();
        let mut rng = rng_from_seed(12);
        let s = random_subspace(12, 5, &mut rng, &t);
        let tt = random_subspace(12, 5, &mut rng, &t);
        let cert = common_complement(&s, &tt, &t, 99).unwrap();
        assert_eq!(cert.z.dim(), 7);
        assert!(cert.margin_s > 0.0 && cert.margin_t > 0.0);
        assert!(cert.verify(&s, &tt, &t).unwrap());
    }

    #[test]
    fn complement_rejects_unequal_dimensions() {
        assert!(matches!(
            common_complement(&e(3, &[0]), &e(3, &[0, 1]), &tol(), 0),
            Err(Error::NotInDelta { dim_s: 1, dim_t: 2 })
        ));
    }

    #[test]
    fn complement_handles_trivial_dimensions() {
        let t = tol();
        let cert = common_complement(&Subspace::full(3), &Subspace::full(3), &t, 0).unwrap();
        assert_eq!(cert.z.dim(), 0);
        let cert = common_complement(&Subspace::zero(3), &Subspace::zero(3), &t, 0).unwrap();
        assert_eq!(cert.z.dim(), 3);
    }

    #[test]
    fn diagonal_witnessed_by_perp() {
        let t = tol();
        let mut rng = rng_from_seed(3);
        let s = random_subspace(7, 3, &mut rng, &t);
        assert!(DeltaPair::new(s.clone(), s.clone(), Some(perp(&s)), &t).is_ok());
    }

    #[test]
    fn neighborhood_examples() {
        let t = tol();
        let z0 = e(2, &[1]);
        assert_eq!(
            delta_neighborhood_check(&z0, &e(2, &[0]), &diag_line(), &t).unwrap(),
            TriState::True
        );
        assert_eq!(
            delta_neighborhood_check(&z0, &e(2, &[1]), &diag_line(), &t).unwrap(),
            TriState::False
        );
        let full = Subspace::full(3);
        assert_eq!(
            delta_neighborhood_check(&Subspace::zero(3), &full, &full, &t).unwrap(),
            TriState::True
        );
    }
}
