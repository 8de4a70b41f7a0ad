use bdcut_core::constants::alpha_gw;
use bdcut_core::instance::{gen_random_regular, Edge, Max2LinInstance, WeightLaw};
use bdcut_core::linalg::{min_eigenvalue, Matrix};
use bdcut_core::localsearch::{default_epsilon, relax, run_once, trial_seed};
use bdcut_core::numerics::psd::random_correlation;
use bdcut_core::numerics::{arcsin_coeff, band_mass_bounds, sheppard, sheppard_mc, TaylorSeries};
use bdcut_core::rng;
use bdcut_core::rounding::{hyperplane_round, projections, sample_gaussian};
use bdcut_core::sdp::{SdpConfig, SdpEmbedding};
use std::f64::consts::PI;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn edge_satisfaction_follows_the_arcsine_law() {
    for &(rho, sign) in &[(0.689, 1_i8), (0.689, -1), (-0.3, 1), (0.0, -1), (-0.9, -1)] {
        let inst = Max2LinInstance::new(2, vec![Edge::new(0, 1, sign, 1.0)]).unwrap();
        let emb =
            SdpEmbedding::from_rows(2, 2, vec![1.0, 0.0, rho, (1.0 - rho * rho).sqrt()]).unwrap();
        let trials = 100_000;
        let mut hits = 0;
        for t in 0..trials {
            let x = hyperplane_round(&emb, &sample_gaussian(2, t)).unwrap();
            hits += inst.evaluate(&x).unwrap() as usize;
        }
        let same = 0.5 + rho.asin() / PI;
        let expect = if sign == 1 { same } else { 1.0 - same };
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        let freq = hits as f64 / trials as f64;
        assert!(
            (freq - expect).abs() <= 4.0 * sigma,
            "rho {rho} sign {sign}: {freq} vs {expect}"
        );
    }
}

#[test]
fn rounding_keeps_the_ratio_in_expectation() {
    for seed in 0..3 {
        let inst = gen_random_regular(
            40,
            3 + seed as usize,
            0.8,
            WeightLaw::Uniform { lo: 0.5, hi: 1.5 },
            seed,
        )
        .unwrap();
        let relaxation = relax(&inst, &SdpConfig::default().with_seed(seed)).unwrap();
        let eps = default_epsilon(inst.max_degree(), 2.0).unwrap();
        let values: Vec<f64> = (0..2000)
            .map(|k| {
                run_once(&inst, &relaxation, trial_seed(seed, k), &eps, false)
                    .unwrap()
                    .1
                    .rounded_value
            })
            .collect();
        let (mean, se) = mean_se(&values);
        let target = alpha_gw() * relaxation.report.objective;
        assert!(mean >= target - 3.0 * se, "seed {seed}: {mean} < {target}");
    }
}

#[test]
fn band_membership_matches_gaussian_mass() {
    let inst = gen_random_regular(100, 4, 1.0, WeightLaw::Unit, 11).unwrap();
    let relaxation = relax(&inst, &SdpConfig::default().with_seed(11)).unwrap();
    let emb = &relaxation.embedding;
    let eps = default_epsilon(4, 2.0).unwrap().value;
    let (lo, hi) = band_mass_bounds(eps);
    let (mut inside, mut total) = (0usize, 0usize);
    for t in 0..2000 {
        let proj = projections(emb, &sample_gaussian(emb.rank(), t)).unwrap();
        inside += proj.iter().filter(|p| p.abs() < eps).count();
        total += proj.len();
    }
    let freq = inside as f64 / total as f64;
    // projections of one Gaussian are correlated, so allow a wide margin
    let sigma = (2.0 * hi * (1.0 - 2.0 * lo) / 2000.0).sqrt();
    assert!(
        freq >= 2.0 * lo - 4.0 * sigma && freq <= 2.0 * hi + 4.0 * sigma,
        "{freq} vs [{}, {}]",
        2.0 * lo,
        2.0 * hi
    );
}

#[test]
fn orthant_monte_carlo_agrees() {
    for (k, &s) in [-0.9, -0.5, 0.0, 1.0 / 3.0, 0.5, 0.689, 0.9]
        .iter()
        .enumerate()
    {
        let exact = sheppard(s).unwrap();
        let mc = sheppard_mc(s, 100_000, k as u64).unwrap();
        let sigma = (exact * (1.0 - exact) / 1e5).sqrt();
        assert!(
            (mc - exact).abs() <= 3.0 * sigma.max(1e-4),
            "sigma {s}: {mc} vs {exact}"
        );
    }
}

#[test]
fn coefficient_thirty_has_the_predicted_size() {
    let c30 = arcsin_coeff(30);
    let predicted = 1.0 / (2.0 * PI.sqrt()) * 30f64.powf(-1.5);
    assert!(c30 >= 0.2 * predicted && c30 <= 5.0 * predicted);
    // exact product formula: c_k = (2k)! / (4^k (k!)² (2k+1))
    let mut exact = 1.0;
    for j in 1..=30 {
        exact *= (2 * j - 1) as f64 / (2 * j) as f64;
    }
    exact /= 61.0;
    assert!((c30 - exact).abs() <= 1e-14 * exact);
    assert!((TaylorSeries::new(30).coeffs[30] - c30).abs() == 0.0);
}

/// Independent eigen-solver check of the entrywise power and arcsin closure.
#[test]
fn entrywise_closure_agrees_with_nalgebra() {
    let mut rng = rng::seeded(41);
    for trial in 0..60 {
        let d = 2 + trial % 12;
        let a = random_correlation(d, 2 + trial % 5, -1.0, &mut rng).unwrap();
        let check = |m: Matrix| {
            let ours = min_eigenvalue(&m);
            let na = nalgebra::DMatrix::from_row_slice(d, d, m.as_slice());
            let theirs = na.symmetric_eigen().eigenvalues.min();
            assert!((ours - theirs).abs() <= 1e-9, "{ours} vs {theirs}");
            assert!(theirs >= -1e-8, "min eigenvalue {theirs}");
        };
        for t in [1, 3, 5, 9] {
            check(a.matrix().map(|v| v.powi(t)));
        }
        check(a.matrix().map(f64::asin));
    }
}
