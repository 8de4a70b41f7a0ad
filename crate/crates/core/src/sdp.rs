//! Vector relaxation with signed triangle inequalities.
//!
//! The relaxation maximizes `Σ w_ij (1 + b_ij ⟨v_i, v_j⟩) / 2` over unit
//! vectors. For a triple `{i, j, k}` with correlations `ρ`, the signed ℓ₂²
//! triangle inequalities over all sign patterns reduce to four linear
//! constraints:
//!
//! ```text
//! 1 + ρ_ij + ρ_jk + ρ_ik ≥ 0
//! 1 + ρ_ij − ρ_jk − ρ_ik ≥ 0   (and the two rotations)
//! ```
//!
//! The solver works on a rank-`r` factorization `V` (one unit row per
//! vertex). Violated constraints enter a working set lazily and are handled
//! by an augmented Lagrangian. The first outer iteration starts with a few
//! block sweeps, each maximizing a quadratic minorant over one row in closed
//! form (`v ← normalize(∇ + L·v)`); after that the inner problem is solved
//! by L-BFGS on the product of spheres with a normalizing retraction and an
//! Armijo line search, so the Lagrangian never decreases inside an outer
//! iteration.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Max2LinInstance;
use crate::linalg::{dot, norm};
use crate::rng;

/// Unit vectors `v_0 .. v_{n-1}` stored as rows of an `n × rank` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpEmbedding {
    n: usize,
    rank: usize,
    data: Vec<f64>,
}

/// Allowed deviation of a row norm from 1.
pub const UNIT_NORM_TOL: f64 = 1e-8;

impl SdpEmbedding {
    /// Wraps `n` rows of length `rank`; each row must already be a unit
    /// vector to within [`UNIT_NORM_TOL`].
    pub fn from_rows(n: usize, rank: usize, data: Vec<f64>) -> Result<Self> {
        if rank == 0 && n > 0 {
            return Err(Error::InvalidParameter("rank must be at least 1".into()));
        }
        if data.len() != n * rank {
            return Err(Error::DimensionMismatch {
                expected: n * rank,
                got: data.len(),
            });
        }
        let emb = SdpEmbedding { n, rank, data };
        if let Some(i) = (0..n).find(|&i| libm::fabs(norm(emb.row(i)) - 1.0) > UNIT_NORM_TOL) {
            return Err(Error::InvalidParameter(format!(
                "row {i} is not a unit vector"
            )));
        }
        Ok(emb)
    }

    /// Like [`from_rows`](Self::from_rows) but rescales every row to unit
    /// length first. Zero rows are rejected.
    pub fn normalized(n: usize, rank: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != n * rank {
            return Err(Error::DimensionMismatch {
                expected: n * rank,
                got: data.len(),
            });
        }
        for row in data.chunks_mut(rank.max(1)) {
            let len = norm(row);
            if len == 0.0 {
                return Err(Error::InvalidParameter(
                    "zero row cannot be normalized".into(),
                ));
            }
            row.iter_mut().for_each(|x| *x /= len);
        }
        SdpEmbedding::from_rows(n, rank, data)
    }

    /// Rank-one embedding `v_i = x_i · e_1` of a ±1 vector.
    pub fn integral(signs: &[i8]) -> Self {
        SdpEmbedding {
            n: signs.len(),
            rank: 1,
            data: signs.iter().map(|&s| f64::from(s)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.rank..(i + 1) * self.rank]
    }

    #[inline]
    pub fn inner(&self, i: usize, j: usize) -> f64 {
        dot(self.row(i), self.row(j))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_norm_error(&self) -> f64 {
        (0..self.n)
            .map(|i| libm::fabs(norm(self.row(i)) - 1.0))
            .fold(0.0, f64::max)
    }
}

/// Which triples carry triangle inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TriangleMode {
    None,
    /// Triples made of a vertex and two of its neighbours.
    #[default]
    Neighborhood,
    All,
}

impl core::str::FromStr for TriangleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(TriangleMode::None),
            "neighborhood" => Ok(TriangleMode::Neighborhood),
            "all" => Ok(TriangleMode::All),
            other => Err(Error::InvalidParameter(format!(
                "unknown triangle mode {other:?}"
            ))),
        }
    }
}

impl core::fmt::Display for TriangleMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            TriangleMode::None => "none",
            TriangleMode::Neighborhood => "neighborhood",
            TriangleMode::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpConfig {
    /// `None` picks `⌈√(2n)⌉ + 1`, capped at `n`.
    pub rank: Option<usize>,
    pub triangle_mode: TriangleMode,
    pub max_outer: usize,
    /// Inner iterations per outer iteration.
    pub max_inner: usize,
    /// Final stationarity tolerance of the inner solve, in units of the
    /// mean weight times the largest degree.
    pub objective_tol: f64,
    /// Largest accepted triangle violation, measured in squared-norm units.
    pub constraint_tol: f64,
    pub penalty_growth: f64,
    /// Starting penalty, in units of the mean edge weight.
    pub initial_penalty: f64,
    pub seed: u64,
}

impl Default for SdpConfig {
    fn default() -> Self {
        SdpConfig {
            rank: None,
            triangle_mode: TriangleMode::Neighborhood,
            max_outer: 100,
            max_inner: 5000,
            objective_tol: 1e-6,
            constraint_tol: 1e-6,
            penalty_growth: 4.0,
            initial_penalty: 10.0,
            seed: 0,
        }
    }
}

impl SdpConfig {
    pub fn with_mode(mut self, mode: TriangleMode) -> Self {
        self.triangle_mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn default_rank(n: usize) -> usize {
        let r = libm::ceil(libm::sqrt(2.0 * n as f64)) as usize + 1;
        r.min(n).max(1)
    }

    pub fn resolved_rank(&self, n: usize) -> usize {
        self.rank.unwrap_or_else(|| SdpConfig::default_rank(n))
    }

    /// Checks the settings against an instance with `n` vertices.
    pub fn validate(&self, n: usize) -> Result<()> {
        let r = self.resolved_rank(n);
        if r == 0 || (n > 0 && r > n) {
            return Err(Error::InvalidParameter(format!(
                "rank {r} outside [1, {n}]"
            )));
        }
        let positive = [
            self.objective_tol,
            self.constraint_tol,
            self.initial_penalty,
        ];
        if positive.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter(
                "tolerances and penalty must be positive".into(),
            ));
        }
        if !(self.penalty_growth >= 1.0) {
            return Err(Error::InvalidParameter(
                "penalty growth must be at least 1".into(),
            ));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidParameter(
                "iteration budgets must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Lagrangian value at the start and end of one outer iteration's sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterStep {
    pub lagrangian_before: f64,
    pub lagrangian_after: f64,
    pub sweeps: usize,
    /// Lagrangian-and-gradient evaluations spent in the line searches.
    pub evaluations: usize,
    pub max_violation: f64,
    pub working_set: usize,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpReport {
    /// `Σ w_ij (1 + b_ij ⟨v_i, v_j⟩) / 2`, unnormalized.
    pub objective: f64,
    /// Largest triangle violation over the configured family.
    pub max_violation: f64,
    pub outer_iterations: usize,
    pub inner_sweeps: usize,
    pub converged: bool,
    pub trace: Vec<OuterStep>,
}

/// Unnormalized relaxation value of `emb`.
pub fn sdp_objective(inst: &Max2LinInstance, emb: &SdpEmbedding) -> Result<f64> {
    if emb.n() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            got: emb.n(),
        });
    }
    Ok(inst
        .edges()
        .iter()
        .map(|e| e.weight * 0.5 * (1.0 + f64::from(e.sign) * emb.inner(e.i, e.j)))
        .sum())
}

/// Sorted vertex triple.
pub type Triple = [usize; 3];

/// Triples carrying triangle inequalities under `mode`, sorted.
pub fn enumerate_triples(inst: &Max2LinInstance, mode: TriangleMode) -> Vec<Triple> {
    let n = inst.n();
    match mode {
        TriangleMode::None => Vec::new(),
        TriangleMode::All => {
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        out.push([i, j, k]);
                    }
                }
            }
            out
        }
        TriangleMode::Neighborhood => {
            let mut set = BTreeSet::new();
            for center in 0..n {
                let nbrs = inst.neighbors(center);
                for (a, na) in nbrs.iter().enumerate() {
                    for nb in &nbrs[a + 1..] {
                        let mut t = [center, na.vertex, nb.vertex];
                        t.sort_unstable();
                        set.insert(t);
                    }
                }
            }
            set.into_iter().collect()
        }
    }
}

/// `max(0, ‖a_i v_i − a_k v_k‖² − ‖a_i v_i − a_j v_j‖² − ‖a_j v_j − a_k v_k‖²)`
/// for `triple = (i, j, k)` with `j` in the middle.
pub fn triangle_violation(emb: &SdpEmbedding, triple: Triple, pattern: [i8; 3]) -> f64 {
    let [i, j, k] = triple;
    let [ai, aj, ak] = pattern.map(f64::from);
    let dist2 = |p: usize, sp: f64, q: usize, sq: f64| -> f64 {
        emb.row(p)
            .iter()
            .zip(emb.row(q))
            .map(|(x, y)| (sp * x - sq * y) * (sp * x - sq * y))
            .sum()
    };
    let long = dist2(i, ai, k, ak);
    let short = dist2(i, ai, j, aj) + dist2(j, aj, k, ak);
    (long - short).max(0.0)
}

/// Largest violation over the three choices of middle vertex and all sign
/// patterns of one triple.
pub fn max_triple_violation(emb: &SdpEmbedding, t: Triple) -> f64 {
    let mut worst = 0.0_f64;
    for rot in 0..3 {
        let triple = [t[rot], t[(rot + 1) % 3], t[(rot + 2) % 3]];
        for &pattern in &PATTERNS {
            worst = worst.max(triangle_violation(emb, triple, pattern));
        }
    }
    worst
}

/// Sign patterns with `a_i = 1`; the other four are their negations.
const PATTERNS: [[i8; 3]; 4] = [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]];

/// Coefficients of `(ρ_ij, ρ_jk, ρ_ik)` in the four canonical constraints
/// `1 + s·ρ ≥ 0` of a sorted triple `(i, j, k)`.
const CLASSES: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Largest violation over every triple in `triples`, in squared-norm units.
pub fn max_violation(emb: &SdpEmbedding, triples: &[Triple]) -> f64 {
    triples
        .iter()
        .map(|&t| {
            canonical_slacks(emb, t)
                .iter()
                .fold(0.0_f64, |acc, &c| acc.max(-2.0 * c))
        })
        .fold(0.0, f64::max)
}

fn canonical_slacks(emb: &SdpEmbedding, [i, j, k]: Triple) -> [f64; 4] {
    let rho = [emb.inner(i, j), emb.inner(j, k), emb.inner(i, k)];
    CLASSES.map(|s| 1.0 + s[0] * rho[0] + s[1] * rho[1] + s[2] * rho[2])
}

struct Constraint {
    triple: Triple,
    signs: [f64; 3],
    lambda: f64,
}

impl Constraint {
    fn slack(&self, v: &[f64], r: usize) -> f64 {
        let [i, j, k] = self.triple;
        let row = |p: usize| &v[p * r..(p + 1) * r];
        1.0 + self.signs[0] * dot(row(i), row(j))
            + self.signs[1] * dot(row(j), row(k))
            + self.signs[2] * dot(row(i), row(k))
    }

    /// The two (partner, sign) terms of the constraint that involve `p`.
    fn partners(&self, p: usize) -> [(usize, f64); 2] {
        let [i, j, k] = self.triple;
        let s = self.signs;
        if p == i {
            [(j, s[0]), (k, s[2])]
        } else if p == j {
            [(i, s[0]), (k, s[1])]
        } else {
            [(i, s[2]), (j, s[1])]
        }
    }
}

struct Solver<'a> {
    inst: &'a Max2LinInstance,
    r: usize,
    v: Vec<f64>,
    mu: f64,
    working: Vec<Constraint>,
    keys: BTreeSet<(Triple, usize)>,
    incident: Vec<Vec<usize>>,
    grad: Vec<f64>,
    evaluations: usize,
}

const LBFGS_MEMORY: usize = 8;

impl Solver<'_> {
    fn objective_at(&self, v: &[f64]) -> f64 {
        let r = self.r;
        self.inst
            .edges()
            .iter()
            .map(|e| {
                let rho = dot(&v[e.i * r..(e.i + 1) * r], &v[e.j * r..(e.j + 1) * r]);
                e.weight * 0.5 * (1.0 + f64::from(e.sign) * rho)
            })
            .sum()
    }

    fn objective(&self) -> f64 {
        self.objective_at(&self.v)
    }

    fn lagrangian_at(&self, v: &[f64]) -> f64 {
        let penalty: f64 = self
            .working
            .iter()
            .map(|c| {
                let p = (c.lambda - self.mu * c.slack(v, self.r)).max(0.0);
                p * p - c.lambda * c.lambda
            })
            .sum();
        self.objective_at(v) - penalty / (2.0 * self.mu)
    }

    fn lagrangian(&self) -> f64 {
        self.lagrangian_at(&self.v)
    }

    /// Lagrangian at `v` and its Riemannian gradient (the Euclidean
    /// gradient with each row's radial component removed) written to `out`.
    fn lagrangian_grad(&self, v: &[f64], out: &mut [f64]) -> f64 {
        let r = self.r;
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut value = 0.0;
        for e in self.inst.edges() {
            let (a, b) = (e.i * r, e.j * r);
            let coef = 0.5 * e.weight * f64::from(e.sign);
            value += 0.5 * e.weight + coef * dot(&v[a..a + r], &v[b..b + r]);
            for k in 0..r {
                out[a + k] += coef * v[b + k];
                out[b + k] += coef * v[a + k];
            }
        }
        let mut penalty = 0.0;
        for c in &self.working {
            let pressure = (c.lambda - self.mu * c.slack(v, r)).max(0.0);
            penalty += pressure * pressure - c.lambda * c.lambda;
            if pressure == 0.0 {
                continue;
            }
            let [i, j, k] = c.triple;
            for (p, q, s) in [(i, j, c.signs[0]), (j, k, c.signs[1]), (i, k, c.signs[2])] {
                let f = pressure * s;
                for t in 0..r {
                    out[p * r + t] += f * v[q * r + t];
                    out[q * r + t] += f * v[p * r + t];
                }
            }
        }
        project_rows(v, out, r);
        value - penalty / (2.0 * self.mu)
    }

    /// Block update of row `p`: maximizes the quadratic minorant
    /// `⟨∇, v⟩ − (L/2)‖v − v_p‖²` over the unit sphere.
    fn update_row(&mut self, p: usize) {
        let r = self.r;
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        for nb in self.inst.neighbors(p) {
            let coef = 0.5 * nb.weight * f64::from(nb.sign);
            let q = &self.v[nb.vertex * r..(nb.vertex + 1) * r];
            self.grad
                .iter_mut()
                .zip(q)
                .for_each(|(g, x)| *g += coef * x);
        }
        let mut lipschitz = 0.0;
        for &ci in &self.incident[p] {
            let c = &self.working[ci];
            let [(q1, s1), (q2, s2)] = c.partners(p);
            let (row1, row2) = (&self.v[q1 * r..(q1 + 1) * r], &self.v[q2 * r..(q2 + 1) * r]);
            // ‖s1 v_q1 + s2 v_q2‖²
            lipschitz += self.mu * (2.0 + 2.0 * s1 * s2 * dot(row1, row2));
            let pressure = (c.lambda - self.mu * c.slack(&self.v, r)).max(0.0);
            if pressure > 0.0 {
                for ((g, x1), x2) in self.grad.iter_mut().zip(row1).zip(row2) {
                    *g += pressure * (s1 * x1 + s2 * x2);
                }
            }
        }
        let row = &mut self.v[p * r..(p + 1) * r];
        for (g, x) in self.grad.iter_mut().zip(row.iter()) {
            *g += lipschitz * x;
        }
        let len = norm(&self.grad);
        if len > 1e-300 {
            row.iter_mut()
                .zip(&self.grad)
                .for_each(|(x, g)| *x = g / len);
        }
    }

    fn sweep(&mut self) {
        for p in 0..self.inst.n() {
            self.update_row(p);
        }
    }

    /// Riemannian L-BFGS ascent on the Lagrangian with an Armijo
    /// backtracking search along the normalizing retraction. Returns the
    /// number of iterations and whether the gradient tolerance was met.
    fn ascend(&mut self, max_iter: usize, grad_tol: f64) -> (usize, bool) {
        let r = self.r;
        let len = self.v.len();
        let mut x = self.v.clone();
        let mut g = vec![0.0; len];
        let mut f = self.lagrangian_grad(&x, &mut g);
        let mut memory: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(LBFGS_MEMORY);
        let mut dir = vec![0.0; len];
        let mut trial = vec![0.0; len];
        let mut g_trial = vec![0.0; len];
        let mut alpha = [0.0; LBFGS_MEMORY];
        let mut iters = 0;
        let mut settled = false;
        while iters < max_iter {
            if max_row_norm(&g, r) <= grad_tol {
                settled = true;
                break;
            }
            iters += 1;
            // two-loop recursion for ascent: dir ≈ H g
            dir.copy_from_slice(&g);
            for (slot, (s, y, rho)) in memory.iter().enumerate().rev() {
                let a = rho * dot(s, &dir);
                alpha[slot] = a;
                dir.iter_mut().zip(y).for_each(|(d, yy)| *d -= a * yy);
            }
            let gamma = match memory.last() {
                Some((s, y, _)) => dot(s, y) / dot(y, y),
                None => 1.0 / max_row_norm(&g, r).max(1e-300),
            };
            dir.iter_mut().for_each(|d| *d *= gamma);
            for (slot, (s, y, rho)) in memory.iter().enumerate() {
                let b = rho * dot(y, &dir);
                let a = alpha[slot];
                dir.iter_mut().zip(s).for_each(|(d, ss)| *d += (a - b) * ss);
            }
            project_rows(&x, &mut dir, r);
            let mut slope = dot(&g, &dir);
            if !(slope > 0.0) {
                memory.clear();
                let scale = 1.0 / max_row_norm(&g, r).max(1e-300);
                dir.iter_mut().zip(&g).for_each(|(d, gg)| *d = scale * gg);
                slope = dot(&g, &dir);
            }
            // a row never moves by more than half a radian-ish per step
            let longest = max_row_norm(&dir, r);
            let mut step = if longest > 0.5 { 0.5 / longest } else { 1.0 };
            let mut accepted = false;
            for _ in 0..40 {
                trial
                    .iter_mut()
                    .zip(x.iter().zip(&dir))
                    .for_each(|(t, (a, d))| *t = a + step * d);
                normalize_rows(&mut trial, r);
                let f_trial = self.lagrangian_grad(&trial, &mut g_trial);
                self.evaluations += 1;
                if f_trial >= f + 1e-4 * step * slope {
                    accepted = true;
                    let mut s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                    // transport by projection onto the new tangent space;
                    // the pair uses −∇ since the problem is an ascent
                    let mut y = g.clone();
                    project_rows(&trial, &mut y, r);
                    y.iter_mut().zip(&g_trial).for_each(|(a, b)| *a -= b);
                    project_rows(&trial, &mut s, r);
                    let sy = dot(&s, &y);
                    if sy > 1e-12 * norm(&s) * norm(&y) {
                        if memory.len() == LBFGS_MEMORY {
                            memory.remove(0);
                        }
                        memory.push((s, y, 1.0 / sy));
                    }
                    core::mem::swap(&mut x, &mut trial);
                    core::mem::swap(&mut g, &mut g_trial);
                    f = f_trial;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                // no ascent possible at machine precision
                settled = true;
                break;
            }
        }
        self.v = x;
        (iters, settled)
    }

    /// Adds every violated constraint of `triples` to the working set and
    /// returns the largest violation (squared-norm units).
    fn scan(&mut self, triples: &[Triple], emb: &SdpEmbedding) -> f64 {
        let mut worst = 0.0_f64;
        for &t in triples {
            for (class, c) in canonical_slacks(emb, t).into_iter().enumerate() {
                worst = worst.max(-2.0 * c);
                if c < 0.0 && self.keys.insert((t, class)) {
                    let idx = self.working.len();
                    self.working.push(Constraint {
                        triple: t,
                        signs: CLASSES[class],
                        lambda: 0.0,
                    });
                    for &p in &t {
                        self.incident[p].push(idx);
                    }
                }
            }
        }
        worst
    }

    fn embedding(&self) -> SdpEmbedding {
        SdpEmbedding {
            n: self.inst.n(),
            rank: self.r,
            data: self.v.clone(),
        }
    }
}

fn project_rows(v: &[f64], out: &mut [f64], r: usize) {
    for (row, o) in v.chunks(r).zip(out.chunks_mut(r)) {
        let radial = dot(row, o);
        o.iter_mut().zip(row).for_each(|(x, y)| *x -= radial * y);
    }
}

fn normalize_rows(v: &mut [f64], r: usize) {
    for row in v.chunks_mut(r) {
        let len = norm(row);
        if len > 1e-300 {
            row.iter_mut().for_each(|x| *x /= len);
        }
    }
}

fn max_row_norm(v: &[f64], r: usize) -> f64 {
    v.chunks(r).map(norm).fold(0.0, f64::max)
}

/// Ceiling on the penalty parameter relative to the mean weight; past it
/// the inner problem gets too stiff and the multipliers do the work.
const MAX_PENALTY_FACTOR: f64 = 1e3;

/// Size of the random nudge applied when an infeasible iterate does not move.
const STALL_KICK: f64 = 1e-3;

/// Coordinate sweeps used to warm-start the first outer iteration.
const WARM_SWEEPS: usize = 200;

/// Solves the relaxation; see the module docs for the method.
///
/// Running out of iterations is not an error: the best iterate seen is
/// returned with `converged = false`.
pub fn solve_sdp(inst: &Max2LinInstance, cfg: &SdpConfig) -> Result<(SdpEmbedding, SdpReport)> {
    cfg.validate(inst.n())?;
    let n = inst.n();
    let r = cfg.resolved_rank(n);
    let mut rng = rng::seeded(cfg.seed);
    let mut v: Vec<f64> = (0..n * r).map(|_| rng::normal(&mut rng)).collect();
    normalize_rows(&mut v, r.max(1));
    let mean_weight = if inst.m() == 0 {
        1.0
    } else {
        inst.total_weight() / inst.m() as f64
    };
    let grad_scale = mean_weight * (inst.max_degree().max(1) as f64);
    let triples = enumerate_triples(inst, cfg.triangle_mode);

    let mut solver = Solver {
        inst,
        r,
        v,
        mu: cfg.initial_penalty * mean_weight,
        working: Vec::new(),
        keys: BTreeSet::new(),
        incident: vec![Vec::new(); n],
        grad: vec![0.0; r],
        evaluations: 0,
    };

    let mut trace = Vec::new();
    let mut total_sweeps = 0;
    let mut best: Option<(SdpEmbedding, f64, f64)> = None;
    let mut prev_violation = f64::INFINITY;
    let mut converged = false;
    let mut stalled = false;

    if n == 0 || r == 0 {
        let emb = SdpEmbedding {
            n,
            rank: r,
            data: Vec::new(),
        };
        let report = SdpReport {
            objective: 0.0,
            max_violation: 0.0,
            outer_iterations: 0,
            inner_sweeps: 0,
            converged: true,
            trace,
        };
        return Ok((emb, report));
    }

    for outer in 0..cfg.max_outer {
        let before = solver.lagrangian();
        let mut sweeps = 0;
        if outer == 0 {
            let mut current = before;
            while sweeps < WARM_SWEEPS.min(cfg.max_inner) {
                solver.sweep();
                sweeps += 1;
                let next = solver.lagrangian();
                let change = next - current;
                current = next;
                if change <= cfg.objective_tol * 1e-3 * current.abs().max(mean_weight) {
                    break;
                }
            }
        }
        if stalled {
            // symmetric configurations can be critical points of the
            // Lagrangian while infeasible; nudge off them
            for x in solver.v.iter_mut() {
                *x += STALL_KICK * rng::normal(&mut rng);
            }
            normalize_rows(&mut solver.v, r);
        }
        let evals_before = solver.evaluations;
        // loose inner solves while the constraints are far from satisfied
        let tol = grad_scale * cfg.objective_tol.max((0.1 * prev_violation).min(1e-2));
        let (iters, settled) = solver.ascend(cfg.max_inner, tol);
        sweeps += iters;
        total_sweeps += sweeps;
        let after = solver.lagrangian();

        let emb = solver.embedding();
        let violation = solver.scan(&triples, &emb);
        let objective = solver.objective();

        // complementarity is measured before the multiplier step
        let mut complementarity = 0.0_f64;
        for c in solver.working.iter_mut() {
            let slack = c.slack(&solver.v, r);
            complementarity = complementarity.max(libm::fabs(slack.min(c.lambda / solver.mu)));
            c.lambda = (c.lambda - solver.mu * slack).max(0.0);
        }

        trace.push(OuterStep {
            lagrangian_before: before,
            lagrangian_after: after,
            sweeps,
            evaluations: solver.evaluations - evals_before,
            max_violation: violation,
            working_set: solver.working.len(),
            penalty: solver.mu,
        });

        let feasible = violation <= cfg.constraint_tol;
        stalled = !feasible && iters == 0;
        let better = match &best {
            None => true,
            Some((_, bv, bo)) => {
                let b_ok = *bv <= cfg.constraint_tol;
                (feasible && !b_ok)
                    || (feasible == b_ok
                        && if feasible {
                            objective >= *bo
                        } else {
                            violation < *bv
                        })
            }
        };
        if better {
            best = Some((emb, violation, objective));
        }

        let final_tolerance = prev_violation <= 10.0 * cfg.objective_tol;
        if settled && final_tolerance && feasible && 2.0 * complementarity <= cfg.constraint_tol {
            converged = true;
            best = Some((solver.embedding(), violation, objective));
            break;
        }
        if !feasible && violation > 0.25 * prev_violation {
            solver.mu = (solver.mu * cfg.penalty_growth).min(MAX_PENALTY_FACTOR * mean_weight);
        }
        prev_violation = violation;
    }

    let (emb, violation, objective) = best.expect("at least one outer iteration");
    let report = SdpReport {
        objective,
        max_violation: violation,
        outer_iterations: trace.len(),
        inner_sweeps: total_sweeps,
        converged,
        trace,
    };
    Ok((emb, report))
}
