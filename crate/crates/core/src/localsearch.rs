//! Candidate-set analysis and the single flip pass that follows rounding.
//!
//! A vertex is a candidate when its projection `⟨g, v_i⟩` lies in the open
//! band `(-ε, ε)`. Each candidate's neighbours split into
//!
//! * `A`: neighbours that are candidates themselves,
//! * `B`: neighbours whose constraint with `i` is violated with margin
//!   (`b_ij x_i ⟨g, v_j⟩ ≤ -ε`),
//! * `C`: neighbours whose constraint is satisfied with margin
//!   (`b_ij x_i ⟨g, v_j⟩ ≥ ε`).
//!
//! A candidate flips when its `B` weight strictly exceeds the weight of
//! `A ∪ C`. `B` and `C` vertices never flip, so each flip gains at least
//! `w(B) - w(A ∪ C)` even if every `A` edge ends up violated.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::constants::{rho_star, RHO_WINDOW};
use crate::error::{Error, Result};
use crate::instance::{Assignment, Max2LinInstance};
use crate::rng;
use crate::rounding::{hyperplane_round, projections, sample_gaussian, GaussianSample};
use crate::sdp::{solve_sdp, SdpConfig, SdpEmbedding, SdpReport};

/// Default constant in the band width.
pub const DEFAULT_C: f64 = 2.0;

/// Half-width of the candidate band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Epsilon {
    pub value: f64,
    /// `None` when the width was given directly.
    pub constant: Option<f64>,
    pub degree: Option<usize>,
}

impl Epsilon {
    /// `1 / (C · d' · √(ln d'))` with `d' = max(d, 2)`.
    pub fn for_degree(d: usize, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "constant C = {c} must be positive"
            )));
        }
        let dd = d.max(2) as f64;
        let value = 1.0 / (c * dd * libm::sqrt(libm::log(dd)));
        Ok(Epsilon {
            value,
            constant: Some(c),
            degree: Some(d),
        })
    }

    pub fn from_value(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "epsilon {value} must be positive"
            )));
        }
        Ok(Epsilon {
            value,
            constant: None,
            degree: None,
        })
    }
}

/// Band width for `inst` using its maximum degree.
pub fn default_epsilon(d: usize, c: f64) -> Result<Epsilon> {
    Epsilon::for_degree(d, c)
}

/// Neighbourhood split of one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub vertex: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    /// Total incident weight `W_i`.
    pub incident_weight: f64,
    pub b_weight: f64,
    /// `max(0, 2·w(B) − W_i)`.
    pub delta: f64,
    pub flip: bool,
}

impl Candidate {
    /// `w(B) − w(A ∪ C)`, unclamped.
    pub fn margin(&self) -> f64 {
        2.0 * self.b_weight - self.incident_weight
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateAnalysis {
    pub epsilon: f64,
    /// Sorted by vertex id.
    pub candidates: Vec<Candidate>,
}

impl CandidateAnalysis {
    pub fn s_size(&self) -> usize {
        self.candidates.len()
    }

    pub fn flip_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.flip).count()
    }

    pub fn is_candidate(&self, v: usize) -> bool {
        self.candidates
            .binary_search_by_key(&v, |c| c.vertex)
            .is_ok()
    }

    /// `Σ_{flipped} (w(B_i) − w(A_i ∪ C_i))`: the gain the flip pass is
    /// guaranteed to realize.
    pub fn guaranteed_gain(&self) -> f64 {
        self.candidates
            .iter()
            .filter(|c| c.flip)
            .map(Candidate::margin)
            .sum()
    }
}

/// Builds the candidate set and the `A/B/C` split for every candidate.
/// `x` is normally `hyperplane_round(emb, g)`.
pub fn analyze_candidates(
    inst: &Max2LinInstance,
    emb: &SdpEmbedding,
    g: &GaussianSample,
    x: &Assignment,
    eps: &Epsilon,
) -> Result<CandidateAnalysis> {
    if emb.n() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            got: emb.n(),
        });
    }
    if x.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    let proj = projections(emb, g)?;
    let e = eps.value;
    let in_band = |v: usize| libm::fabs(proj[v]) < e;
    let mut candidates = Vec::new();
    for i in (0..inst.n()).filter(|&i| in_band(i)) {
        let mut cand = Candidate {
            vertex: i,
            a: Vec::new(),
            b: Vec::new(),
            c: Vec::new(),
            incident_weight: 0.0,
            b_weight: 0.0,
            delta: 0.0,
            flip: false,
        };
        let xi = f64::from(x.get(i));
        for nb in inst.neighbors(i) {
            cand.incident_weight += nb.weight;
            let j = nb.vertex;
            if in_band(j) {
                cand.a.push(j);
                continue;
            }
            // |proj[j]| >= e here, so exactly one of the two holds
            if f64::from(nb.sign) * xi * proj[j] <= -e {
                cand.b.push(j);
                cand.b_weight += nb.weight;
            } else {
                cand.c.push(j);
            }
        }
        let rest = cand.incident_weight - cand.b_weight;
        cand.flip = cand.b_weight > rest;
        cand.delta = cand.margin().max(0.0);
        candidates.push(cand);
    }
    Ok(CandidateAnalysis {
        epsilon: e,
        candidates,
    })
}

/// Flips every candidate marked `flip`; returns the new assignment and
/// `evaluate(x') − evaluate(x)`.
pub fn apply_flips(
    inst: &Max2LinInstance,
    x: &Assignment,
    analysis: &CandidateAnalysis,
) -> Result<(Assignment, f64)> {
    let mut flipped = x.clone();
    for c in analysis.candidates.iter().filter(|c| c.flip) {
        flipped.flip(c.vertex);
    }
    let gain = inst.evaluate(&flipped)? - inst.evaluate(x)?;
    Ok((flipped, gain))
}

/// Greedy single-vertex improvement until no flip gains more than `1e-12`.
pub fn polish(inst: &Max2LinInstance, x: &Assignment) -> Result<Assignment> {
    if x.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    let mut x = x.clone();
    loop {
        let mut improved = false;
        for v in 0..inst.n() {
            let xv = x.get(v);
            let delta: f64 = inst
                .neighbors(v)
                .iter()
                .map(|nb| {
                    let sat = xv * x.get(nb.vertex) == nb.sign;
                    if sat {
                        -nb.weight
                    } else {
                        nb.weight
                    }
                })
                .sum();
            if delta > 1e-12 {
                x.flip(v);
                improved = true;
            }
        }
        if !improved {
            return Ok(x);
        }
    }
}

/// Weighted fraction of constraints with `b_ij ⟨v_i, v_j⟩` within
/// [`RHO_WINDOW`] of the worst-case correlation.
pub fn rho_window_fraction(inst: &Max2LinInstance, emb: &SdpEmbedding) -> f64 {
    let total = inst.total_weight();
    if total == 0.0 {
        return 0.0;
    }
    let rs = rho_star();
    let inside: f64 = inst
        .edges()
        .iter()
        .filter(|e| libm::fabs(f64::from(e.sign) * emb.inner(e.i, e.j) - rs) <= RHO_WINDOW)
        .map(|e| e.weight)
        .sum();
    inside / total
}

/// A solved relaxation together with the seed that produced it.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub embedding: SdpEmbedding,
    pub report: SdpReport,
    pub seed: u64,
}

pub fn relax(inst: &Max2LinInstance, cfg: &SdpConfig) -> Result<Relaxation> {
    let (embedding, report) = solve_sdp(inst, cfg)?;
    Ok(Relaxation {
        embedding,
        report,
        seed: cfg.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub sdp: u64,
    pub rounding: u64,
}

/// Record of one rounding trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub sdp_value: f64,
    pub rounded_value: f64,
    pub flipped_value: f64,
    pub gain: f64,
    /// `Σ_{flipped} (w(B_i) − w(A_i ∪ C_i))`.
    pub guaranteed_gain: f64,
    pub s_size: usize,
    pub flip_count: usize,
    pub epsilon: f64,
    pub rho_window_fraction: f64,
    pub seeds: Seeds,
    pub converged: bool,
    /// Value after greedy 1-opt, when enabled.
    pub polished_value: Option<f64>,
    pub generator: String,
}

impl RunReport {
    /// Value of the assignment the trial hands back.
    pub fn final_value(&self) -> f64 {
        self.polished_value.unwrap_or(self.flipped_value)
    }
}

/// Rounds the relaxation with the Gaussian keyed by `seed`, then runs the
/// flip pass (and the greedy polish when `polish_after` is set).
pub fn run_once(
    inst: &Max2LinInstance,
    relaxation: &Relaxation,
    seed: u64,
    eps: &Epsilon,
    polish_after: bool,
) -> Result<(Assignment, RunReport)> {
    let emb = &relaxation.embedding;
    let g = sample_gaussian(emb.rank(), seed);
    let x = hyperplane_round(emb, &g)?;
    let analysis = analyze_candidates(inst, emb, &g, &x, eps)?;
    let (flipped, gain) = apply_flips(inst, &x, &analysis)?;
    let rounded_value = inst.evaluate(&x)?;
    let flipped_value = inst.evaluate(&flipped)?;
    let (out, polished_value) = if polish_after {
        let p = polish(inst, &flipped)?;
        let v = inst.evaluate(&p)?;
        (p, Some(v))
    } else {
        (flipped, None)
    };
    let report = RunReport {
        sdp_value: relaxation.report.objective,
        rounded_value,
        flipped_value,
        gain,
        guaranteed_gain: analysis.guaranteed_gain(),
        s_size: analysis.s_size(),
        flip_count: analysis.flip_count(),
        epsilon: eps.value,
        rho_window_fraction: rho_window_fraction(inst, emb),
        seeds: Seeds {
            sdp: relaxation.seed,
            rounding: seed,
        },
        converged: relaxation.report.converged,
        polished_value,
        generator: String::from(rng::GENERATOR),
    };
    Ok((out, report))
}

#[derive(Debug, Clone)]
pub struct BestOf {
    pub assignment: Assignment,
    pub value: f64,
    pub reports: Vec<RunReport>,
}

/// Seed of trial `k` in a batch keyed by `base_seed`.
pub fn trial_seed(base_seed: u64, k: usize) -> u64 {
    rng::derive_seed(base_seed, k as u64)
}

/// Runs `trials` independent roundings and keeps the best final value.
/// Ties keep the earliest trial.
pub fn best_of(
    inst: &Max2LinInstance,
    relaxation: &Relaxation,
    trials: usize,
    base_seed: u64,
    eps: &Epsilon,
    polish_after: bool,
) -> Result<BestOf> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut best: Option<(Assignment, f64)> = None;
    let mut reports = Vec::with_capacity(trials);
    for k in 0..trials {
        let (x, report) = run_once(
            inst,
            relaxation,
            trial_seed(base_seed, k),
            eps,
            polish_after,
        )?;
        let v = report.final_value();
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((x, v));
        }
        reports.push(report);
    }
    let (assignment, value) = best.expect("trials >= 1");
    Ok(BestOf {
        assignment,
        value,
        reports,
    })
}
