//! End-to-end run of the numerical checks behind the rounding analysis.

use std::f64::consts::PI;

use bdcut_core::constants::{alpha_gw, rho_star};
use bdcut_core::numerics::psd::{random_correlation, CorrelationMatrix};
use bdcut_core::numerics::{
    arcsin_coeff, arcsin_form, band_mass, band_mass_bounds, check_arcsin_form, check_arcsin_series,
    entrywise_arcsin_min_eigenvalue, entrywise_power_psd, estimate_local_gain, sheppard,
    sheppard_mc, CheckResult, LocalGainParams, TaylorSeries,
};
use bdcut_core::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::VERSION;

/// Lowest eigenvalue still counted as PSD.
pub const EIGEN_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Monte-Carlo draws for the orthant and local-gain checks.
    pub samples: usize,
    /// Random matrices for the closure and arcsin-form checks.
    pub matrix_trials: usize,
    /// Truncation points for the partial-sum and tail checks.
    pub grid_taus: Vec<usize>,
    /// Truncation points for the gap-at-one check.
    pub gap_taus: Vec<usize>,
    pub degrees: Vec<usize>,
    pub epsilon_c: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            samples: 100_000,
            matrix_trials: 200,
            grid_taus: vec![16, 64, 256],
            gap_taus: vec![100, 400, 1600],
            degrees: vec![4, 16, 64],
            epsilon_c: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub version: String,
    pub options: VerifyOptions,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const SHEPPARD_GRID: [f64; 7] = [-0.9, -0.5, 0.0, 1.0 / 3.0, 0.5, 0.689, 0.9];
pub const SHEPPARD_TOL: f64 = 0.005;

pub fn run(opts: &VerifyOptions) -> anyhow::Result<VerifyReport> {
    anyhow::ensure!(opts.samples >= 1000, "need at least 1000 samples");
    anyhow::ensure!(opts.matrix_trials >= 1, "need at least one matrix trial");
    anyhow::ensure!(opts.gap_taus.len() >= 2, "gap check needs two or more taus");
    let mut checks = vec![constants_check()];
    checks.extend(taylor_checks(opts)?);
    checks.push(orthant_closed_form()?);
    checks.push(orthant_monte_carlo(opts)?);
    checks.push(band_mass_check());
    checks.push(closure_check(opts)?);
    checks.push(arcsin_form_sign_check(opts)?);
    checks.push(
        check_arcsin_form(
            opts.matrix_trials,
            &[2, 4, 8, 16, 32],
            rng::derive_seed(opts.seed, 3),
        )?
        .to_check(),
    );
    checks.extend(local_gain_checks(opts)?);
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        version: VERSION.to_string(),
        options: opts.clone(),
        pass,
        checks,
    })
}

fn constants_check() -> CheckResult {
    let (rho, alpha) = (rho_star(), alpha_gw());
    CheckResult::new(
        "worst_case_correlation",
        (rho - 0.689).abs() < 1e-3 && (alpha - 0.878).abs() < 1e-3,
    )
    .constant("rho_star", rho)
    .constant("alpha", alpha)
}

fn taylor_checks(opts: &VerifyOptions) -> anyhow::Result<Vec<CheckResult>> {
    let xs: Vec<f64> = (1..=100)
        .flat_map(|k| [k as f64 / 100.0, -(k as f64) / 100.0])
        .collect();
    let grid = check_arcsin_series(&opts.grid_taus, &xs)?;
    let gap = check_arcsin_series(&opts.gap_taus, &[])?;
    let mut out: Vec<CheckResult> = grid.to_checks().into_iter().take(2).collect();
    out.push(gap.to_checks().pop().expect("gap check"));

    let c30 = arcsin_coeff(30);
    let predicted = 30f64.powf(-1.5) / (2.0 * PI.sqrt());
    let factor = c30 / predicted;
    out.push(
        CheckResult::new("taylor_coefficient_size", (0.2..=5.0).contains(&factor))
            .constant("c_30", c30)
            .constant("factor_vs_leading_term", factor),
    );

    // recurrence against the product form (2k)!/(4^k (k!)^2) / (2k+1)
    let series = TaylorSeries::new(2000);
    let mut product = 1.0;
    let mut worst = (0usize, 0.0f64);
    for (k, &c) in series.coeffs.iter().enumerate() {
        if k > 0 {
            product *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        let rel = (c - product / (2 * k + 1) as f64).abs() / c;
        if rel > worst.1 {
            worst = (k, rel);
        }
    }
    let positive = series.coeffs.iter().all(|&c| c > 0.0);
    out.push(
        CheckResult::new(
            "taylor_coefficients_closed_form",
            worst.1 <= 1e-12 && positive,
        )
        .constant("max_relative_error", worst.1)
        .worst(format!("k={}", worst.0)),
    );
    Ok(out)
}

fn orthant_closed_form() -> anyhow::Result<CheckResult> {
    let half = sheppard(0.5)?;
    let ends = [sheppard(1.0)?, sheppard(0.0)?, sheppard(-1.0)?];
    let pass = (half - 1.0 / 3.0).abs() <= f64::EPSILON && ends == [0.5, 0.25, 0.0];
    Ok(CheckResult::new("orthant_closed_form", pass)
        .constant("at_half", half)
        .constant("error_at_half", half - 1.0 / 3.0))
}

fn orthant_monte_carlo(opts: &VerifyOptions) -> anyhow::Result<CheckResult> {
    let mut check = CheckResult::new("orthant_monte_carlo", true);
    let mut worst = (0.0, 0.0f64);
    for (k, &s) in SHEPPARD_GRID.iter().enumerate() {
        let exact = sheppard(s)?;
        let mc = sheppard_mc(s, opts.samples, rng::derive_seed(opts.seed, 100 + k as u64))?;
        let err = (mc - exact).abs();
        let sigma = (exact * (1.0 - exact) / opts.samples as f64).sqrt();
        // both a fixed tolerance and three standard errors
        let ok = err <= SHEPPARD_TOL && err <= 3.0 * sigma.max(0.5 / opts.samples as f64);
        check.pass &= ok;
        check = check.constant(&format!("abs_error@{s}"), err);
        if err > worst.1 {
            worst = (s, err);
        }
    }
    Ok(check.worst(format!("sigma={} error={}", worst.0, worst.1)))
}

fn band_mass_check() -> CheckResult {
    let mut check = CheckResult::new("band_mass_bounds", true);
    let mut tightest = f64::INFINITY;
    for k in 1..=400 {
        let eps = k as f64 / 200.0;
        let (lo, hi) = band_mass_bounds(eps);
        let m = band_mass(eps);
        check.pass &= lo <= m && m <= hi;
        tightest = tightest.min((m - lo).min(hi - m));
    }
    check.constant("min_margin", tightest)
}

fn closure_check(opts: &VerifyOptions) -> anyhow::Result<CheckResult> {
    let mut rng = rng::seeded(rng::derive_seed(opts.seed, 1));
    let mut worst = (f64::INFINITY, String::new());
    for trial in 0..opts.matrix_trials {
        let d = rng.random_range(2..=40);
        let dim = rng.random_range(1..=d);
        let a = random_correlation(d, dim, -1.0, &mut rng)?;
        for t in [3u32, 5, 9] {
            let e = entrywise_power_psd(&a, t)?;
            if e < worst.0 {
                worst = (e, format!("trial={trial} d={d} power={t}"));
            }
        }
        let e = entrywise_arcsin_min_eigenvalue(&a);
        if e < worst.0 {
            worst = (e, format!("trial={trial} d={d} arcsin"));
        }
    }
    Ok(
        CheckResult::new("entrywise_closure_psd", worst.0 >= EIGEN_FLOOR)
            .constant("min_eigenvalue", worst.0)
            .worst(worst.1),
    )
}

fn arcsin_form_sign_check(opts: &VerifyOptions) -> anyhow::Result<CheckResult> {
    let mut rng = rng::seeded(rng::derive_seed(opts.seed, 2));
    let mut worst = (f64::INFINITY, String::new());
    for trial in 0..500 {
        let d = rng.random_range(2..=24);
        let a = random_correlation(d, rng.random_range(1..=d), -1.0, &mut rng)?;
        let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        // the double sum written out directly, independent of the library form
        let direct: f64 = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| w[i] * w[j] * a.matrix()[(i, j)].asin())
            .sum();
        let lib = arcsin_form(&a, &w)?;
        anyhow::ensure!(
            (direct - lib).abs() <= 1e-9 * direct.abs().max(1.0),
            "arcsin form mismatch"
        );
        let scaled = lib / w.iter().sum::<f64>().powi(2);
        if scaled < worst.0 {
            worst = (scaled, format!("trial={trial} d={d}"));
        }
    }
    Ok(
        CheckResult::new("arcsin_form_nonnegative", worst.0 >= -1e-12)
            .constant("min_value_over_l1_squared", worst.0)
            .worst(worst.1),
    )
}

fn local_gain_checks(opts: &VerifyOptions) -> anyhow::Result<Vec<CheckResult>> {
    let mut gain = CheckResult::new("local_gain_lower_bound", true);
    let mut member = CheckResult::new("band_membership_rate", true);
    let mut worst_gain = (f64::INFINITY, 0);
    let mut worst_member = (f64::INFINITY, 0);
    for (k, &d) in opts.degrees.iter().enumerate() {
        let params = LocalGainParams {
            neighbor_gram: CorrelationMatrix::identity(d),
            rho: 0.689,
            weights: vec![1.0; d],
            c: opts.epsilon_c,
            trials: opts.samples,
            seed: rng::derive_seed(opts.seed, 200 + k as u64),
        };
        let est = estimate_local_gain(&params)?;
        let floor = 0.1 * est.incident_weight / (d as f64 * (d as f64).ln().sqrt());
        let ratio = est.mean / floor;
        gain.pass &= ratio >= 1.0;
        gain = gain
            .constant(&format!("mean@d={d}"), est.mean)
            .constant(&format!("std_err@d={d}"), est.std_err)
            .constant(&format!("normalized@d={d}"), est.normalized);
        if ratio < worst_gain.0 {
            worst_gain = (ratio, d);
        }
        let (lo, hi) = est.membership_bounds;
        let slack = 3.0 * est.membership_std_err;
        let margin = (est.membership_rate - (lo - slack)).min(hi + slack - est.membership_rate);
        member.pass &= margin >= 0.0;
        member = member.constant(&format!("rate@d={d}"), est.membership_rate);
        if margin < worst_member.0 {
            worst_member = (margin, d);
        }
    }
    Ok(vec![
        gain.worst(format!("d={} mean/floor={}", worst_gain.1, worst_gain.0)),
        member.worst(format!("d={} margin={}", worst_member.1, worst_member.0)),
    ])
}
