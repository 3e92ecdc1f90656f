//! Seeded generators for random instances.
//!
//! Every generator takes the RNG by mutable reference; callers derive one
//! RNG per instance from `(seed, indices...)` with [`derive_seed`] so that
//! any single instance can be replayed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bundle::FramePoint;
use crate::error::Result;
use crate::grassmann::{perp, Subspace};
use crate::operators::big_l;
use crate::substrate::{CMatrix, Tolerances};

pub type InstanceRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a sequence of indices (SplitMix64 finalizer).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

/// Entries `(x + iy)/√2` with `x, y` standard normal.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> CMatrix {
    loop {
        let v = gaussian_matrix(n, 1, rng);
        let norm = v.frobenius_norm();
        if norm > 1e-3 {
            return v.scale_real(1.0 / norm);
        }
    }
}

pub fn random_subspace(n: usize, k: usize, rng: &mut impl Rng, tol: &Tolerances) -> Subspace {
    loop {
        let s = Subspace::span(&gaussian_matrix(n, k, rng), tol);
        if s.dim() == k {
            return s;
        }
    }
}

/// Haar-distributed unitary (QR of a Gaussian matrix with the phases of
/// `R`'s diagonal divided out).
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let g = gaussian_matrix(n, n, rng);
    let qr = g.inner().clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = CMatrix::from_inner(q);
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            let v = out.get(i, j) * phase;
            out.set(i, j, v);
        }
    }
    out
}

/// `U diag(σ) V` with `σ` spread log-uniformly over `[1, cond]`; both
/// extremes are attained, so the condition number is exactly `cond`.
pub fn random_invertible(n: usize, cond: f64, rng: &mut impl Rng) -> CMatrix {
    let mut sigma: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => 1.0,
            _ if i == n - 1 => cond,
            _ => cond.powf(rng.random::<f64>()),
        })
        .collect();
    if n == 1 {
        sigma[0] = 1.0;
    }
    let u = random_unitary(n, rng);
    let v = random_unitary(n, rng);
    &(&u * &CMatrix::real_diagonal(&sigma)) * &v
}

/// Random element of `Gl^Z`: block upper triangular against `Z ⊕ Z⊥` with
/// diagonal blocks of condition number at most `cond_cap`.
pub fn random_glz(z: &Subspace, cond_cap: f64, rng: &mut impl Rng) -> CMatrix {
    let n = z.ambient_dim();
    let k = z.dim();
    let zp = perp(z);
    let cond_a = cond_cap.powf(rng.random::<f64>());
    let cond_d = cond_cap.powf(rng.random::<f64>());
    let a = random_invertible(k, cond_a, rng);
    let d = random_invertible(n - k, cond_d, rng);
    let c = gaussian_matrix(k, n - k, rng).scale_real(1.0 / (n.max(1) as f64).sqrt());
    let bz = z.basis();
    let bzp = zp.basis();
    let top = &(&(bz * &a) * &bz.adjoint()) + &(&(bz * &c) * &bzp.adjoint());
    &top + &(&(bzp * &d) * &bzp.adjoint())
}

/// Random element of `Gl^Z` that also leaves `Z⊥` invariant.
pub fn random_glz_split(z: &Subspace, cond_cap: f64, rng: &mut impl Rng) -> CMatrix {
    let k = z.dim();
    let n = z.ambient_dim();
    let a = random_invertible(k, cond_cap.powf(rng.random::<f64>()), rng);
    let d = random_invertible(n - k, cond_cap.powf(rng.random::<f64>()), rng);
    let bz = z.basis();
    let bzp = perp(z);
    let bzp = bzp.basis();
    &(&(bz * &a) * &bz.adjoint()) + &(&(bzp * &d) * &bzp.adjoint())
}

/// A frame `(Z, G, K)` with `Z` and `p(Z, G, K)` close to `(Z0, Z0⊥, Z0⊥)`:
/// each of `Z`, `G(Z⊥)`, `K(Z⊥)` lies within gap `max_gap` of its reference.
/// For `max_gap < 1/2` the pair `p(Z, G, K)` lies in `Δ^{Z0}`.
pub fn random_frame_near(
    z0: &Subspace,
    max_gap: f64,
    cond_cap: f64,
    rng: &mut impl Rng,
    tol: &Tolerances,
) -> Result<FramePoint> {
    let z0p = perp(z0);
    let z = subspace_at_gap(z0, max_gap * rng.random::<f64>(), rng, tol);
    let s = subspace_at_gap(&z0p, max_gap * rng.random::<f64>(), rng, tol);
    let t = subspace_at_gap(&z0p, max_gap * rng.random::<f64>(), rng, tol);
    let zp = perp(&z);
    let g = &big_l(&z, &zp, &s, tol)?.matrix * &random_glz_split(&z, cond_cap, rng);
    let k = &big_l(&z, &zp, &t, tol)?.matrix * &random_glz_split(&z, cond_cap, rng);
    FramePoint::new(z, g, k, tol)
}

/// Block-diagonal operator for the coordinate splitting
/// `span(e_1..e_i) ⊕ span(e_{i+1}..e_n)`.
pub fn random_block_diagonal(n: usize, i: usize, cond_cap: f64, rng: &mut impl Rng) -> CMatrix {
    let a = random_invertible(i, cond_cap.powf(rng.random::<f64>()), rng);
    let d = random_invertible(n - i, cond_cap.powf(rng.random::<f64>()), rng);
    CMatrix::from_fn(n, n, |r, c| {
        if r < i && c < i {
            a.get(r, c)
        } else if r >= i && c >= i {
            d.get(r - i, c - i)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// A subspace `Q` of the same dimension as `s` with `‖P_s − P_Q‖ = gap`
/// (for `0 <= gap < 1`), obtained by tilting principal vectors of `s`
/// towards `s⊥` by angles at most `asin(gap)`.
pub fn subspace_at_gap(s: &Subspace, gap: f64, rng: &mut impl Rng, tol: &Tolerances) -> Subspace {
    let n = s.ambient_dim();
    let k = s.dim();
    let m = k.min(n - k);
    if m == 0 {
        return s.clone();
    }
    let theta_max = gap.clamp(0.0, 1.0).asin();
    let sp = perp(s);
    // Random orthonormal m-frame inside s⊥.
    let frame = Subspace::span(&(sp.basis() * &gaussian_matrix(n - k, m, rng)), tol);
    let b = s.basis();
    let c = frame.basis();
    let mut q = b.clone();
    for i in 0..m {
        let theta = if i == 0 {
            theta_max
        } else {
            theta_max * rng.random::<f64>()
        };
        for r in 0..n {
            let v = b.get(r, i) * theta.cos() + c.get(r, i) * theta.sin();
            q.set(r, i, v);
        }
    }
    Subspace::span(&q, tol)
}
