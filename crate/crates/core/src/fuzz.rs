//! Seeded property harness.
//!
//! Each trial owns an RNG seeded by `derive_seed(seed, [suite, dim, trial])`,
//! so a report is reproducible and any single instance can be replayed from
//! the seed recorded next to it. Trials run in parallel; results are folded
//! in trial order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{
    e_chart, e_chart_inv, fiber_lz, fiber_psi, fiber_psi_inverse, p_preimage_point,
    perturb_off_block, pi_trivialize, pi_untrivialize, project_p, relative_distance,
    trivialize_phi, trivialize_phi_inv, FramePoint, SplitFrame,
};
use crate::delta::common_complement;
use crate::error::{Error, Result};
use crate::grassmann::{
    act, buckholtz_report, graph_chart, graph_chart_inv, oblique_projector, perp, GraphCoordinate,
    Subspace,
};
use crate::operators::{big_l, big_l_analytic, glz_check, pi_s0, section_sigma, w_unitary};
use crate::random::{
    derive_seed, gaussian_matrix, random_block_diagonal, random_frame_near, random_glz,
    random_invertible, random_subspace, random_unit_vector, rng_from_seed, subspace_at_gap,
    InstanceRng,
};
use crate::substrate::{condition_number, inverse, op_norm, CMatrix, Tolerances};

/// Residual bound for subspace gaps and operator identities.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Residual bound for pointwise fixing, idempotency and conjugation.
pub const TIGHT_TOL: f64 = 1e-9;
/// Residual bound for `WᴴW − I`.
pub const UNITARY_TOL: f64 = 1e-12;
/// Condition cap for the diagonal blocks of random `Gl^Z` elements.
pub const GLZ_COND_CAP: f64 = 1e3;
/// Largest condition number of random operators fed to the action formula.
pub const ACTION_COND_MAX: f64 = 1e6;
/// Gap above which a perturbed fiber point counts as having left the fiber.
pub const LEAVES_FIBER_GAP: f64 = 1e-6;
/// Largest gap between a generated fiber base point and `Z⊥`.
pub const FIBER_MAX_GAP: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Buckholtz,
    Oblique,
    Transition,
    Section,
    Unitary,
    Charts,
    Fiber,
    Trivialization,
    Complement,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Buckholtz,
        Suite::Oblique,
        Suite::Transition,
        Suite::Section,
        Suite::Unitary,
        Suite::Charts,
        Suite::Fiber,
        Suite::Trivialization,
        Suite::Complement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Buckholtz => "buckholtz",
            Suite::Oblique => "oblique",
            Suite::Transition => "transition",
            Suite::Section => "section",
            Suite::Unitary => "unitary",
            Suite::Charts => "charts",
            Suite::Fiber => "fiber",
            Suite::Trivialization => "trivialization",
            Suite::Complement => "complement",
        }
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|s| *s == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub suites: Vec<Suite>,
}

impl FuzzConfig {
    pub fn new(dims: Vec<usize>, trials: usize, seed: u64) -> Self {
        FuzzConfig {
            dims,
            trials,
            seed,
            tolerances: Tolerances::default(),
            suites: Suite::ALL.to_vec(),
        }
    }

    pub fn with_suites(mut self, suites: Vec<Suite>) -> Self {
        self.suites = suites;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidInput("dims must be nonempty".into()));
        }
        if self.dims.contains(&0) {
            return Err(Error::InvalidInput(
                "every dimension must be at least 1".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.suites.is_empty() {
            return Err(Error::InvalidInput(
                "at least one suite must be selected".into(),
            ));
        }
        self.tolerances.validate()
    }

    pub fn instance_seed(&self, suite: Suite, dim: usize, trial: usize) -> u64 {
        derive_seed(self.seed, &[suite.index(), dim as u64, trial as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub suite: Suite,
    pub dim: usize,
    pub seed: u64,
    pub status: Status,
    /// Measured residual per property.
    pub residuals: BTreeMap<String, f64>,
    /// Event tallies (e.g. negative controls that left the fiber).
    pub counters: BTreeMap<String, usize>,
    /// First violated property or error, for failures.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailingInstance {
    pub dim: usize,
    pub trial: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
    pub worst_residuals: BTreeMap<String, f64>,
    pub counters: BTreeMap<String, usize>,
    pub failures: Vec<FailingInstance>,
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: FuzzConfig,
    pub suites: Vec<SuiteReport>,
    pub total_failures: usize,
    pub wall_clock_ms: f64,
}

impl Report {
    pub fn success(&self) -> bool {
        self.total_failures == 0
    }

    /// Copy with every timing field zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Report {
        let mut out = self.clone();
        out.wall_clock_ms = 0.0;
        for s in &mut out.suites {
            s.wall_clock_ms = 0.0;
        }
        out
    }

    pub fn suite(&self, suite: Suite) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == suite)
    }
}

/// Accumulates residual checks for one trial.
struct Checks {
    residuals: BTreeMap<String, f64>,
    counters: BTreeMap<String, usize>,
    violation: Option<String>,
    indeterminate: bool,
}

impl Checks {
    fn new() -> Self {
        Checks {
            residuals: BTreeMap::new(),
            counters: BTreeMap::new(),
            violation: None,
            indeterminate: false,
        }
    }

    fn record(&mut self, name: &str, value: f64, bound: f64) {
        let value = if value.is_finite() { value } else { f64::MAX };
        let slot = self.residuals.entry(name.to_string()).or_insert(0.0);
        *slot = slot.max(value);
        if value > bound && self.violation.is_none() {
            self.violation = Some(format!("{name} = {value:e} exceeds {bound:e}"));
        }
    }

    fn require(&mut self, name: &str, holds: bool) {
        if !holds && self.violation.is_none() {
            self.violation = Some(format!("{name} does not hold"));
        }
    }

    fn count(&mut self, name: &str) {
        *self.counters.entry(name.to_string()).or_insert(0) += 1;
    }

    fn zero_counter(&mut self, name: &str) {
        self.counters.entry(name.to_string()).or_insert(0);
    }
}

/// Runs a single instance; used by the harness and for replay.
pub fn run_instance(suite: Suite, dim: usize, seed: u64, tol: &Tolerances) -> InstanceOutcome {
    let mut rng = rng_from_seed(seed);
    let mut checks = Checks::new();
    let result = match suite {
        Suite::Buckholtz => buckholtz_trial(dim, &mut rng, tol, &mut checks),
        Suite::Oblique => oblique_trial(dim, &mut rng, tol, &mut checks),
        Suite::Transition => transition_trial(dim, &mut rng, tol, &mut checks),
        Suite::Section => section_trial(dim, &mut rng, tol, &mut checks),
        Suite::Unitary => unitary_trial(dim, &mut rng, tol, &mut checks),
        Suite::Charts => charts_trial(dim, &mut rng, tol, &mut checks),
        Suite::Fiber => fiber_trial(dim, &mut rng, tol, &mut checks),
        Suite::Trivialization => trivialization_trial(dim, &mut rng, tol, &mut checks),
        Suite::Complement => complement_trial(dim, &mut rng, tol, &mut checks),
    };
    let (status, reason) = match (result, checks.violation.take()) {
        (Err(e), _) => (Status::Fail, Some(e.to_string())),
        (Ok(()), Some(v)) => (Status::Fail, Some(v)),
        (Ok(()), None) if checks.indeterminate => (Status::Indeterminate, None),
        (Ok(()), None) => (Status::Pass, None),
    };
    InstanceOutcome {
        suite,
        dim,
        seed,
        status,
        residuals: checks.residuals,
        counters: checks.counters,
        reason,
    }
}

pub fn run_fuzz(config: &FuzzConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let mut suites = Vec::with_capacity(config.suites.len());
    for &suite in &config.suites {
        suites.push(run_suite(config, suite));
    }
    let total_failures = suites.iter().map(|s| s.fail).sum();
    Ok(Report {
        config: config.clone(),
        suites,
        total_failures,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn run_suite(config: &FuzzConfig, suite: Suite) -> SuiteReport {
    let start = Instant::now();
    let jobs: Vec<(usize, usize)> = config
        .dims
        .iter()
        .flat_map(|&d| (0..config.trials).map(move |t| (d, t)))
        .collect();
    let outcomes: Vec<(usize, InstanceOutcome)> = jobs
        .par_iter()
        .map(|&(dim, trial)| {
            let seed = config.instance_seed(suite, dim, trial);
            (trial, run_instance(suite, dim, seed, &config.tolerances))
        })
        .collect();
    let mut report = SuiteReport {
        suite,
        trials: outcomes.len(),
        pass: 0,
        fail: 0,
        indeterminate: 0,
        worst_residuals: BTreeMap::new(),
        counters: BTreeMap::new(),
        failures: Vec::new(),
        wall_clock_ms: 0.0,
    };
    for (trial, outcome) in outcomes {
        match outcome.status {
            Status::Pass => report.pass += 1,
            Status::Indeterminate => report.indeterminate += 1,
            Status::Fail => {
                report.fail += 1;
                report.failures.push(FailingInstance {
                    dim: outcome.dim,
                    trial,
                    seed: outcome.seed,
                    reason: outcome.reason.clone().unwrap_or_default(),
                });
            }
        }
        for (name, value) in outcome.residuals {
            let slot = report.worst_residuals.entry(name).or_insert(0.0);
            *slot = slot.max(value);
        }
        for (name, count) in outcome.counters {
            *report.counters.entry(name).or_insert(0) += count;
        }
    }
    report.wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

/// Subspace dimension for a trial: anything in `0..=n`.
fn any_dim(n: usize, rng: &mut InstanceRng) -> usize {
    rng.random_range(0..=n)
}

/// Subspace dimension strictly between `0` and `n` when possible.
fn proper_dim(n: usize, rng: &mut InstanceRng) -> usize {
    if n >= 2 {
        rng.random_range(1..n)
    } else {
        any_dim(n, rng)
    }
}

fn subspace(n: usize, k: usize, rng: &mut InstanceRng, tol: &Tolerances) -> Subspace {
    if k == 0 {
        Subspace::zero(n)
    } else {
        random_subspace(n, k, rng, tol)
    }
}

fn buckholtz_trial(
    n: usize,
    rng: &mut InstanceRng,
    tol: &Tolerances,
    c: &mut Checks,
) -> Result<()> {
    let kind = rng.random_range(0..3u8);
    let kind = if kind == 1 && n < 2 { 2 } else { kind };
    let (s, z, expected) = match kind {
        0 => {
            let k = any_dim(n, rng);
            (subspace(n, k, rng, tol), subspace(n, n - k, rng, tol), true)
        }
        1 => {
            // Dimensions add up to n but the two share a direction.
            let k = rng.random_range(1..n);
            let v = random_unit_vector(n, rng);
            let s = Subspace::span(&v.hstack(&gaussian_matrix(n, k - 1, rng)), tol);
            let z = Subspace::span(&v.hstack(&gaussian_matrix(n, n - k - 1, rng)), tol);
            (s, z, false)
        }
        _ => {
            let k = rng.random_range(1..=n);
            let s = subspace(n, k, rng, tol);
            (s.clone(), s, false)
        }
    };
    let report = buckholtz_report(&s, &z, tol)?;
    let verdicts = [
        report.diff_invertible,
        report.norm_lt_one,
        report.direct_sum,
    ];
    for (name, v) in ["diff_invertible", "norm_lt_one", "direct_sum"]
        .iter()
        .zip(verdicts)
    {
        if v.is_determinate() {
            c.require(
                &format!("{name} matches construction"),
                v.is_true() == expected,
            );
        }
    }
    c.zero_counter("three_way_agreement");
    if report.all_determinate() {
        c.require("three criteria agree", report.consistent());
        if report.consistent() {
            c.count("three_way_agreement");
        }
    } else {
        c.indeterminate = true;
    }
    Ok(())
}

fn oblique_trial(n: usize, rng: &mut InstanceRng, tol: &Tolerances, c: &mut Checks) -> Result<()> {
    let k = any_dim(n, rng);
    let l = subspace(n, k, rng, tol);
    let kk = subspace(n, n - k, rng, tol);
    if !buckholtz_report(&l, &kk, tol)?.norm_lt_one.is_true() {
        c.indeterminate = true;
        return Ok(());
    }
    let e = oblique_projector(&l, &kk, tol)?.matrix;
    // x = B_L a + B_K b, so E x = B_L a with (a; b) = [B_L B_K]⁻¹ x.
    let coeffs = inverse(&l.basis().hstack(kk.basis()), tol)?;
    let oracle = l.basis() * &coeffs.row_range(0, k);
    c.record("oracle", op_norm(&(&e - &oracle)), IDENTITY_TOL);
    let scale = op_norm(&e).max(1.0);
    c.record(
        "idempotency",
        op_norm(&(&(&e * &e) - &e)) / scale,
        TIGHT_TOL,
    );
    Ok(())
}

fn transition_trial(
    n: usize,
    rng: &mut InstanceRng,
    tol: &Tolerances,
    c: &mut Checks,
) -> Result<()> {
    let k = any_dim(n, rng);
    let z = subspace(n, n - k, rng, tol);
    let s = subspace(n, k, rng, tol);
    let t = subspace(n, k, rng, tol);
    let rs = buckholtz_report(&s, &z, tol)?;
    let rt = buckholtz_report(&t, &z, tol)?;
    if !(rs.norm_lt_one.is_true() && rt.norm_lt_one.is_true()) {
        c.indeterminate = true;
        return Ok(());
    }
    let l = big_l(&z, &s, &t, tol)?.matrix;
    c.record("maps_s_onto_t", s.image(&l, tol).gap(&t), IDENTITY_TOL);
    let fixed = (0..z.dim())
        .map(|j| {
            let v = z.basis().col(j);
            (&(&l * &v) - &v).frobenius_norm()
        })
        .fold(0.0, f64::max);
    c.record("fixes_z", fixed, TIGHT_TOL);
    c.require("invertible", condition_number(&l) < tol.cond_max);
    let analytic = big_l_analytic(&z, &s, &t, tol)?;
    c.record("analytic_form", op_norm(&(&l - &analytic)), IDENTITY_TOL);
    Ok(())
}

fn section_trial(n: usize, rng: &mut InstanceRng, tol: &Tolerances, c: &mut Checks) -> Result<()> {
    let k = any_dim(n, rng);
    let z = subspace(n, n - k, rng, tol);
    let s0 = subspace(n, k, rng, tol);
    let t = subspace(n, k, rng, tol);
    let r0 = buckholtz_report(&s0, &z, tol)?;
    let rt = buckholtz_report(&t, &z, tol)?;
    if r0.norm_lt_one.is_true() && rt.norm_lt_one.is_true() {
        let g = section_sigma(&z, &s0, &t, tol)?;
        c.record("section_law", pi_s0(&g, &s0, tol)?.gap(&t), IDENTITY_TOL);
    } else {
        c.indeterminate = true;
    }

    // Action of a random invertible operator: Ando's closed form against
    // the projector onto the orthonormalized image.
    let cond = ACTION_COND_MAX.powf(rng.random::<f64>());
    let g = random_invertible(n, cond, rng);
    let s = subspace(n, any_dim(n, rng), rng, tol);
    let (_, ando) = act(&g, &s, tol)?;
    let image = Subspace::span(&(&g * s.basis()), tol);
    c.require("action preserves dimension", image.dim() == s.dim());
    c.record(
        "ando_formula",
        op_norm(&(&ando.matrix - &image.projector_matrix())),
        IDENTITY_TOL,
    );
    Ok(())
}

fn unitary_trial(n: usize, rng: &mut InstanceRng, tol: &Tolerances, c: &mut Checks) -> Result<()> {
    let s = subspace(n, any_dim(n, rng), rng, tol);
    let q = subspace_at_gap(&s, 0.95 * rng.random::<f64>(), rng, tol);
    let w = w_unitary(&s, &q, tol)?.matrix;
    let id = CMatrix::identity(n);
    c.record(
        "unitarity",
        op_norm(&(&(&w.adjoint() * &w) - &id)),
        UNITARY_TOL,
    );
    let conj = &(&w * &s.projector_matrix()) * &w.adjoint();
    c.record(
        "conjugation",
        op_norm(&(&conj - &q.projector_matrix())),
        TIGHT_TOL,
    );
    Ok(())
}

fn charts_trial(n: usize, rng: &mut InstanceRng, tol: &Tolerances, c: &mut Checks) -> Result<()> {
    let k = any_dim(n, rng);
    let z = subspace(n, k, rng, tol);
    let s = subspace(n, n - k, rng, tol);
    if buckholtz_report(&s, &z, tol)?.norm_lt_one.is_true() {
        let coord = graph_chart(&z, &s, tol)?;
        c.record(
            "inv_after_chart",
            graph_chart_inv(&coord, tol)?.gap(&s),
            IDENTITY_TOL,
        );
    } else {
        c.indeterminate = true;
    }
    let coord = GraphCoordinate {
        anchor: z.clone(),
        x: gaussian_matrix(k, n - k, rng),
    };
    let back = graph_chart(&z, &graph_chart_inv(&coord, tol)?, tol)?;
    c.record(
        "chart_after_inv",
        back.x.max_abs_diff(&coord.x),
        IDENTITY_TOL,
    );
    Ok(())
}

fn fiber_trial(n: usize, rng: &mut InstanceRng, tol: &Tolerances, c: &mut Checks) -> Result<()> {
    let k = proper_dim(n, rng);
    // The base pair is drawn around a shared complement so that every
    // instance has margin at least 1 − FIBER_MAX_GAP.
    let z = subspace(n, n - k, rng, tol);
    let zp = perp(&z);
    let s0 = subspace_at_gap(&zp, FIBER_MAX_GAP * rng.random::<f64>(), rng, tol);
    let t0 = subspace_at_gap(&zp, FIBER_MAX_GAP * rng.random::<f64>(), rng, tol);
    let frames = SplitFrame::onto_minus(&s0);
    let lz = fiber_lz(&z, &s0, &t0, tol)?;
    let g = random_block_diagonal(n, k, GLZ_COND_CAP, rng);
    let kk = random_block_diagonal(n, k, GLZ_COND_CAP, rng);
    let f = fiber_psi(&s0, &t0, &frames, &lz, &z, &g, &kk, tol)?;
    let pair = project_p(&f, tol)?;
    c.record(
        "lands_in_fiber",
        pair.s.gap(&s0).max(pair.t.gap(&t0)),
        IDENTITY_TOL,
    );
    let (z_back, g_back, k_back) = fiber_psi_inverse(&s0, &t0, &frames, &lz, &f, tol)?;
    let err = z_back
        .gap(&z)
        .max(relative_distance(&g_back, &g))
        .max(relative_distance(&k_back, &kk));
    c.record("psi_round_trip", err, IDENTITY_TOL);

    c.zero_counter("negative_control_trials");
    c.zero_counter("negative_control_left_fiber");
    if k > 0 && k < n {
        let bad = perturb_off_block(&g, &frames, &gaussian_matrix(n, n, rng));
        if let Ok(f_bad) = fiber_psi(&s0, &t0, &frames, &lz, &z, &bad, &kk, tol) {
            c.count("negative_control_trials");
            if project_p(&f_bad, tol)?.s.gap(&s0) > LEAVES_FIBER_GAP {
                c.count("negative_control_left_fiber");
            }
        }
    }
    Ok(())
}

fn frame_round_trip(f: &FramePoint, z: &Subspace, g: &CMatrix, k: &CMatrix) -> f64 {
    f.z.gap(z)
        .max(relative_distance(f.g_matrix(), g))
        .max(relative_distance(f.k_matrix(), k))
}

fn trivialization_trial(
    n: usize,
    rng: &mut InstanceRng,
    tol: &Tolerances,
    c: &mut Checks,
) -> Result<()> {
    let z0 = subspace(n, proper_dim(n, rng), rng, tol);
    let z0p = perp(&z0);

    // Trivialization of p over Δ^{Z0}.
    let minus = SplitFrame::onto_minus(&z0p);
    let f = random_frame_near(&z0, 0.45, GLZ_COND_CAP, rng, tol)?;
    let triv = trivialize_phi(&z0, &minus, &f, tol)?;
    c.record("phi_block_a", minus.block_residual(&triv.a), IDENTITY_TOL);
    c.record("phi_block_b", minus.block_residual(&triv.b), IDENTITY_TOL);
    let ru = buckholtz_report(&triv.u, &minus.h_minus, tol)?;
    c.require("u complements H−", ru.all_true());
    let back = trivialize_phi_inv(&z0, &minus, &triv, tol)?;
    c.record(
        "phi_round_trip",
        frame_round_trip(&back, &f.z, f.g_matrix(), f.k_matrix()),
        IDENTITY_TOL,
    );

    // Chart of E around the fiber over Z0, both directions.
    let plus = SplitFrame::onto_plus(&z0p);
    let z = subspace_at_gap(&z0p, 0.9 * rng.random::<f64>(), rng, tol);
    let g = random_glz(&plus.h_plus, GLZ_COND_CAP, rng);
    let k = random_glz(&plus.h_plus, GLZ_COND_CAP, rng);
    let fe = e_chart(&z0, &plus, &z, &g, &k, tol)?;
    let (zb, gb, kb) = e_chart_inv(&z0, &plus, &fe, tol)?;
    let err = zb
        .gap(&z)
        .max(relative_distance(&gb, &g))
        .max(relative_distance(&kb, &k));
    c.record("e_chart_round_trip", err, IDENTITY_TOL);
    let fz = FramePoint::new(
        z.clone(),
        random_glz(&z, GLZ_COND_CAP, rng),
        random_glz(&z, GLZ_COND_CAP, rng),
        tol,
    )?;
    let (zc, gc, kc) = e_chart_inv(&z0, &plus, &fz, tol)?;
    let again = e_chart(&z0, &plus, &zc, &gc, &kc, tol)?;
    c.record(
        "e_chart_inv_round_trip",
        frame_round_trip(&again, &fz.z, fz.g_matrix(), fz.k_matrix()),
        IDENTITY_TOL,
    );

    // Trivialization of π near Z0.
    let zn = subspace_at_gap(&z0, 0.9 * rng.random::<f64>(), rng, tol);
    let fp = FramePoint::new(
        zn.clone(),
        random_glz(&zn, GLZ_COND_CAP, rng),
        random_glz(&zn, GLZ_COND_CAP, rng),
        tol,
    )?;
    let (zp, gp, kp) = pi_trivialize(&z0, &fp, tol)?;
    c.require(
        "π chart lands in Gl^(Z0)",
        glz_check(&gp, &z0, tol)?.is_true() && glz_check(&kp, &z0, tol)?.is_true(),
    );
    let back = pi_untrivialize(&z0, &zp, &gp, &kp, tol)?;
    c.record(
        "pi_round_trip",
        frame_round_trip(&back, &fp.z, fp.g_matrix(), fp.k_matrix()),
        IDENTITY_TOL,
    );
    Ok(())
}

fn complement_trial(
    n: usize,
    rng: &mut InstanceRng,
    tol: &Tolerances,
    c: &mut Checks,
) -> Result<()> {
    let k = any_dim(n, rng);
    let s = subspace(n, k, rng, tol);
    let t = subspace(n, k, rng, tol);
    let cert = common_complement(&s, &t, tol, rng.random())?;
    c.require("certificate re-verifies", cert.verify(&s, &t, tol)?);
    c.zero_counter("random_phase");
    if cert.method == crate::delta::SearchMethod::Random {
        c.count("random_phase");
    }
    let f = p_preimage_point(&s, &t, &cert.z, tol)?;
    let pair = project_p(&f, tol)?;
    c.record(
        "preimage_projects_back",
        pair.s.gap(&s).max(pair.t.gap(&t)),
        IDENTITY_TOL,
    );
    Ok(())
}
