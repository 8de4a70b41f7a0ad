//! Single-instance pipeline: relax, round many times, keep the best.

use anyhow::Context;
use bdcut_core::instance::Max2LinInstance;
use bdcut_core::localsearch::{best_of, default_epsilon, relax, RunReport, DEFAULT_C};
use bdcut_core::oracle::{brute_force_opt_capped, DEFAULT_CAP};
use bdcut_core::rng::derive_seed;
use bdcut_core::sdp::{SdpConfig, SdpEmbedding, TriangleMode};
use serde::{Deserialize, Serialize};

use crate::VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub seed: u64,
    pub trials: usize,
    pub epsilon_c: f64,
    pub triangle_mode: TriangleMode,
    pub rank: Option<usize>,
    pub tol: Option<f64>,
    pub oracle: bool,
    pub oracle_cap: usize,
    pub polish: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: 0,
            trials: 10,
            epsilon_c: DEFAULT_C,
            triangle_mode: TriangleMode::default(),
            rank: None,
            tol: None,
            oracle: false,
            oracle_cap: DEFAULT_CAP,
            polish: false,
        }
    }
}

impl SolveOptions {
    pub fn sdp_config(&self) -> SdpConfig {
        let mut cfg = SdpConfig {
            rank: self.rank,
            triangle_mode: self.triangle_mode,
            seed: derive_seed(self.seed, 1),
            ..SdpConfig::default()
        };
        if let Some(t) = self.tol {
            cfg.objective_tol = t;
            cfg.constraint_tol = t;
        }
        cfg
    }

    pub fn rounding_seed(&self) -> u64 {
        derive_seed(self.seed, 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub total_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSummary {
    pub objective: f64,
    pub max_violation: f64,
    pub converged: bool,
    pub rank: usize,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub version: String,
    pub options: SolveOptions,
    pub instance: InstanceSummary,
    pub sdp: SdpSummary,
    pub epsilon: f64,
    pub best_value: f64,
    pub best_trial: usize,
    /// `best_value` over the relaxation value.
    pub ratio_sdp: Option<f64>,
    pub opt: Option<f64>,
    /// `best_value` over the exact optimum.
    pub ratio_opt: Option<f64>,
    /// Set when the oracle was requested but `n` exceeds the cap.
    pub oracle_skipped: Option<String>,
    pub assignment: Vec<i8>,
    pub runs: Vec<RunReport>,
}

pub fn solve(
    inst: &Max2LinInstance,
    opts: &SolveOptions,
) -> anyhow::Result<(SolveReport, SdpEmbedding)> {
    anyhow::ensure!(opts.trials >= 1, "trials must be at least 1");
    let cfg = opts.sdp_config();
    cfg.validate(inst.n())
        .context("invalid relaxation settings")?;
    let relaxation = relax(inst, &cfg)?;
    let eps = default_epsilon(inst.max_degree(), opts.epsilon_c)?;
    let best = best_of(
        inst,
        &relaxation,
        opts.trials,
        opts.rounding_seed(),
        &eps,
        opts.polish,
    )?;
    let best_trial = best
        .reports
        .iter()
        .position(|r| r.final_value() == best.value)
        .expect("best is one of the runs");

    let (opt, oracle_skipped) = if !opts.oracle {
        (None, None)
    } else if inst.n() > opts.oracle_cap {
        (
            None,
            Some(format!(
                "n = {} exceeds the oracle cap {}",
                inst.n(),
                opts.oracle_cap
            )),
        )
    } else {
        (
            Some(brute_force_opt_capped(inst, opts.oracle_cap)?.opt),
            None,
        )
    };
    let ratio = |den: f64| {
        if den > 0.0 {
            Some(best.value / den)
        } else {
            None
        }
    };
    let report = &relaxation.report;
    let out = SolveReport {
        version: VERSION.to_string(),
        options: opts.clone(),
        instance: InstanceSummary {
            n: inst.n(),
            m: inst.m(),
            max_degree: inst.max_degree(),
            total_weight: inst.total_weight(),
        },
        sdp: SdpSummary {
            objective: report.objective,
            max_violation: report.max_violation,
            converged: report.converged,
            rank: relaxation.embedding.rank(),
            outer_iterations: report.outer_iterations,
            inner_iterations: report.inner_sweeps,
        },
        epsilon: eps.value,
        best_value: best.value,
        best_trial,
        ratio_sdp: ratio(report.objective),
        ratio_opt: opt.and_then(ratio),
        opt,
        oracle_skipped,
        assignment: best.assignment.as_slice().to_vec(),
        runs: best.reports,
    };
    Ok((out, relaxation.embedding))
}
