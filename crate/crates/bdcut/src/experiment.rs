//! Batch experiments: a grid of instances, many roundings each, one CSV.
//!
//! Work runs in two parallel phases (relaxations, then `(instance, trial)`
//! pairs). Every seed is derived from the spec alone and rows are sorted
//! before writing, so the output does not depend on the worker count.

use std::path::{Path, PathBuf};

use anyhow::{ensure, Context};
use bdcut_core::instance::{gen_random_regular, Max2LinInstance, WeightLaw};
use bdcut_core::localsearch::{
    default_epsilon, relax, run_once, trial_seed, Relaxation, RunReport, DEFAULT_C,
};
use bdcut_core::oracle::{brute_force_opt, DEFAULT_CAP};
use bdcut_core::rng::derive_seed;
use bdcut_core::sdp::{SdpConfig, TriangleMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::format::parse_instance;
use crate::VERSION;

/// First line of every experiment CSV.
pub const CSV_SCHEMA: &str = "# bdcut experiment csv v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// Random regular instances for every `(d, n, seed)` in the grid.
    Generator { sign_bias: f64, weights: WeightLaw },
    /// Instance files; paths are relative to the spec file.
    Files(Vec<PathBuf>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub source: Source,
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default)]
    pub n: Vec<usize>,
    /// Roundings per instance.
    pub trials: usize,
    #[serde(default = "default_c")]
    pub epsilon_c: f64,
    #[serde(default)]
    pub triangle_mode: TriangleMode,
    /// One instance per seed and grid point.
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Also compute the exact optimum when `n` is small enough.
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub polish: bool,
    #[serde(default)]
    pub output: Outputs,
}

fn default_c() -> f64 {
    DEFAULT_C
}

impl ExperimentSpec {
    /// Reads a spec and resolves relative paths against its directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut spec: ExperimentSpec =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Source::Files(files) = &mut spec.source {
            for f in files.iter_mut() {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        for p in [&mut spec.output.csv, &mut spec.output.json]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.trials >= 1, "trials must be at least 1");
        ensure!(!self.seeds.is_empty(), "seeds must not be empty");
        ensure!(
            self.epsilon_c > 0.0 && self.epsilon_c.is_finite(),
            "epsilon_c must be positive"
        );
        if let Some(t) = self.tol {
            ensure!(t > 0.0 && t.is_finite(), "tol must be positive");
        }
        match &self.source {
            Source::Generator { sign_bias, weights } => {
                ensure!(
                    !self.d.is_empty() && !self.n.is_empty(),
                    "generator needs non-empty d and n lists"
                );
                ensure!(self.d.iter().all(|&d| d >= 1), "degrees must be at least 1");
                ensure!(
                    self.n.iter().all(|&n| n >= 1),
                    "vertex counts must be at least 1"
                );
                ensure!(
                    (0.0..=1.0).contains(sign_bias),
                    "sign_bias must lie in [0, 1]"
                );
                if let WeightLaw::Uniform { lo, hi } = weights {
                    ensure!(
                        *lo > 0.0 && lo <= hi && hi.is_finite(),
                        "uniform weights need 0 < lo <= hi"
                    );
                }
            }
            Source::Files(files) => {
                ensure!(!files.is_empty(), "file list must not be empty");
                for f in files {
                    ensure!(f.is_file(), "instance file {} does not exist", f.display());
                }
            }
        }
        Ok(())
    }

    pub fn sdp_config(&self, seed: u64) -> SdpConfig {
        let mut cfg = SdpConfig {
            rank: self.rank,
            triangle_mode: self.triangle_mode,
            seed,
            ..SdpConfig::default()
        };
        if let Some(t) = self.tol {
            cfg.objective_tol = t;
            cfg.constraint_tol = t;
        }
        cfg
    }
}

/// One instance of the grid with the seeds derived for it.
#[derive(Debug, Clone)]
struct Unit {
    label: String,
    seed: u64,
    /// Generator seed, or a per-file key.
    instance_seed: u64,
    make: Make,
}

#[derive(Debug, Clone)]
enum Make {
    Regular {
        n: usize,
        d: usize,
        sign_bias: f64,
        weights: WeightLaw,
    },
    File(PathBuf),
}

impl Unit {
    fn build(&self) -> anyhow::Result<Max2LinInstance> {
        match &self.make {
            Make::Regular {
                n,
                d,
                sign_bias,
                weights,
            } => Ok(gen_random_regular(
                *n,
                *d,
                *sign_bias,
                *weights,
                self.instance_seed,
            )?),
            Make::File(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(parse_instance(&text).with_context(|| format!("parsing {}", path.display()))?)
            }
        }
    }

    fn sdp_seed(&self) -> u64 {
        derive_seed(self.instance_seed, 1)
    }

    fn rounding_base(&self) -> u64 {
        derive_seed(self.instance_seed, 2)
    }
}

fn units(spec: &ExperimentSpec) -> Vec<Unit> {
    let mut out = Vec::new();
    match &spec.source {
        Source::Generator { sign_bias, weights } => {
            for &d in &spec.d {
                for &n in &spec.n {
                    for &seed in &spec.seeds {
                        out.push(Unit {
                            label: format!("regular-n{n}-d{d}"),
                            seed,
                            instance_seed: derive_seed(derive_seed(seed, n as u64), d as u64),
                            make: Make::Regular {
                                n,
                                d,
                                sign_bias: *sign_bias,
                                weights: *weights,
                            },
                        });
                    }
                }
            }
        }
        Source::Files(files) => {
            for (k, f) in files.iter().enumerate() {
                for &seed in &spec.seeds {
                    out.push(Unit {
                        label: f.file_name().map_or_else(
                            || f.display().to_string(),
                            |s| s.to_string_lossy().into(),
                        ),
                        seed,
                        instance_seed: derive_seed(seed, k as u64),
                        make: Make::File(f.clone()),
                    });
                }
            }
        }
    }
    out
}

/// One CSV line; trial rows and summary rows share the header.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub kind: String,
    pub instance: String,
    pub unit: Option<usize>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub m: Option<usize>,
    pub trial: Option<usize>,
    pub sdp_seed: Option<u64>,
    pub rounding_seed: Option<u64>,
    pub sdp_value: Option<f64>,
    pub rounded_value: Option<f64>,
    pub flipped_value: Option<f64>,
    pub polished_value: Option<f64>,
    pub gain: Option<f64>,
    pub guaranteed_gain: Option<f64>,
    pub s_size: Option<usize>,
    pub flip_count: Option<usize>,
    pub epsilon: Option<f64>,
    pub rho_window_fraction: Option<f64>,
    pub converged: Option<bool>,
    /// Ratios against the relaxation value.
    pub rounded_ratio_sdp: Option<f64>,
    pub flipped_ratio_sdp: Option<f64>,
    /// Ratios against the exact optimum.
    pub opt: Option<f64>,
    pub rounded_ratio_opt: Option<f64>,
    pub flipped_ratio_opt: Option<f64>,
    /// Summary statistics over the trial rows of one degree.
    pub count: Option<usize>,
    pub mean_rounded_ratio_sdp: Option<f64>,
    pub sd_rounded_ratio_sdp: Option<f64>,
    pub mean_flipped_ratio_sdp: Option<f64>,
    pub sd_flipped_ratio_sdp: Option<f64>,
    pub mean_rounded_ratio_opt: Option<f64>,
    pub sd_rounded_ratio_opt: Option<f64>,
    pub mean_flipped_ratio_opt: Option<f64>,
    pub sd_flipped_ratio_opt: Option<f64>,
    pub mean_gain: Option<f64>,
    pub sd_gain: Option<f64>,
    pub error: Option<String>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

fn trial_row(
    unit_idx: usize,
    unit: &Unit,
    inst: &Max2LinInstance,
    k: usize,
    rep: &RunReport,
    opt: Option<f64>,
) -> Row {
    Row {
        kind: "trial".into(),
        instance: unit.label.clone(),
        unit: Some(unit_idx),
        seed: Some(unit.seed),
        n: Some(inst.n()),
        d: Some(inst.max_degree()),
        m: Some(inst.m()),
        trial: Some(k),
        sdp_seed: Some(rep.seeds.sdp),
        rounding_seed: Some(rep.seeds.rounding),
        sdp_value: Some(rep.sdp_value),
        rounded_value: Some(rep.rounded_value),
        flipped_value: Some(rep.flipped_value),
        polished_value: rep.polished_value,
        gain: Some(rep.gain),
        guaranteed_gain: Some(rep.guaranteed_gain),
        s_size: Some(rep.s_size),
        flip_count: Some(rep.flip_count),
        epsilon: Some(rep.epsilon),
        rho_window_fraction: Some(rep.rho_window_fraction),
        converged: Some(rep.converged),
        rounded_ratio_sdp: ratio(rep.rounded_value, rep.sdp_value),
        flipped_ratio_sdp: ratio(rep.flipped_value, rep.sdp_value),
        opt,
        rounded_ratio_opt: opt.and_then(|o| ratio(rep.rounded_value, o)),
        flipped_ratio_opt: opt.and_then(|o| ratio(rep.flipped_value, o)),
        ..Row::default()
    }
}

fn error_row(unit_idx: usize, unit: &Unit, d: Option<usize>, err: &anyhow::Error) -> Row {
    let (n, d) = match unit.make {
        Make::Regular { n, d, .. } => (Some(n), Some(d)),
        Make::File(_) => (None, d),
    };
    Row {
        kind: "error".into(),
        instance: unit.label.clone(),
        unit: Some(unit_idx),
        seed: Some(unit.seed),
        n,
        d,
        error: Some(format!("{err:#}")),
        ..Row::default()
    }
}

fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(sd))
}

fn summaries(rows: &[Row]) -> Vec<Row> {
    let mut degrees: Vec<usize> = rows
        .iter()
        .filter(|r| r.kind == "trial")
        .filter_map(|r| r.d)
        .collect();
    degrees.sort_unstable();
    degrees.dedup();
    degrees
        .into_iter()
        .map(|d| {
            let group: Vec<&Row> = rows
                .iter()
                .filter(|r| r.kind == "trial" && r.d == Some(d))
                .collect();
            let col = |f: fn(&Row) -> Option<f64>| -> Vec<f64> {
                group.iter().filter_map(|r| f(r)).collect()
            };
            let (mr, sr) = mean_sd(&col(|r| r.rounded_ratio_sdp));
            let (mf, sf) = mean_sd(&col(|r| r.flipped_ratio_sdp));
            let (mro, sro) = mean_sd(&col(|r| r.rounded_ratio_opt));
            let (mfo, sfo) = mean_sd(&col(|r| r.flipped_ratio_opt));
            let (mg, sg) = mean_sd(&col(|r| r.gain));
            Row {
                kind: "summary".into(),
                instance: "all".into(),
                d: Some(d),
                count: Some(group.len()),
                mean_rounded_ratio_sdp: mr,
                sd_rounded_ratio_sdp: sr,
                mean_flipped_ratio_sdp: mf,
                sd_flipped_ratio_sdp: sf,
                mean_rounded_ratio_opt: mro,
                sd_rounded_ratio_opt: sro,
                mean_flipped_ratio_opt: mfo,
                sd_flipped_ratio_opt: sfo,
                mean_gain: mg,
                sd_gain: sg,
                ..Row::default()
            }
        })
        .collect()
}

struct Prepared {
    inst: Max2LinInstance,
    relaxation: Relaxation,
    opt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub version: String,
    pub spec: ExperimentSpec,
    /// Trial and error rows in `(unit, trial)` order, then summaries by `d`.
    pub rows: Vec<Row>,
}

impl ExperimentResult {
    pub fn trial_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.kind == "trial")
    }

    pub fn summary_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.kind == "summary")
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let body = String::from_utf8(w.into_inner()?)?;
        Ok(format!("{CSV_SCHEMA} (bdcut {VERSION})\n{body}"))
    }
}

/// Runs the experiment on a pool of `workers` threads (0 means rayon's
/// default).
pub fn run(spec: &ExperimentSpec, workers: usize) -> anyhow::Result<ExperimentResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    let units = units(spec);
    let prepared: Vec<Result<Prepared, anyhow::Error>> = pool.install(|| {
        units
            .par_iter()
            .map(|u| {
                let inst = u.build()?;
                let relaxation = relax(&inst, &spec.sdp_config(u.sdp_seed()))?;
                let opt = if spec.oracle && inst.n() <= DEFAULT_CAP {
                    Some(brute_force_opt(&inst)?.opt)
                } else {
                    None
                };
                Ok(Prepared {
                    inst,
                    relaxation,
                    opt,
                })
            })
            .collect()
    });

    let jobs: Vec<(usize, usize)> = prepared
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_ok())
        .flat_map(|(u, _)| (0..spec.trials).map(move |k| (u, k)))
        .collect();
    let mut rows: Vec<Row> = pool.install(|| {
        jobs.par_iter()
            .map(|&(u, k)| {
                let p = prepared[u].as_ref().expect("filtered");
                let unit = &units[u];
                let run = default_epsilon(p.inst.max_degree(), spec.epsilon_c).and_then(|eps| {
                    run_once(
                        &p.inst,
                        &p.relaxation,
                        trial_seed(unit.rounding_base(), k),
                        &eps,
                        spec.polish,
                    )
                });
                match run {
                    Ok((_, rep)) => trial_row(u, unit, &p.inst, k, &rep, p.opt),
                    Err(e) => {
                        let mut row = error_row(u, unit, Some(p.inst.max_degree()), &e.into());
                        row.trial = Some(k);
                        row
                    }
                }
            })
            .collect()
    });
    for (u, p) in prepared.iter().enumerate() {
        if let Err(e) = p {
            rows.push(error_row(u, &units[u], None, e));
        }
    }
    rows.sort_by_key(|r| (r.unit, r.trial));
    let summary = summaries(&rows);
    rows.extend(summary);
    Ok(ExperimentResult {
        version: VERSION.to_string(),
        spec: spec.clone(),
        rows,
    })
}
