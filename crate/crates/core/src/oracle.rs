//! Exact optimum by enumeration, for small instances.

use alloc::vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Assignment, Max2LinInstance};

pub const DEFAULT_CAP: usize = 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub opt: f64,
    pub argmax: Assignment,
    /// Number of assignments scanned (`2^(n-1)`, one per global-sign class).
    pub enumerated: u64,
}

/// Exact optimum with [`DEFAULT_CAP`].
pub fn brute_force_opt(inst: &Max2LinInstance) -> Result<OracleResult> {
    brute_force_opt_capped(inst, DEFAULT_CAP)
}

/// Enumerates every assignment with `x_0 = +1` in Gray-code order, updating
/// the value by the change of the single flipped vertex. Whenever the running
/// value comes within tolerance of the best, the assignment is re-evaluated
/// from scratch, so the returned optimum is an exact evaluation.
pub fn brute_force_opt_capped(inst: &Max2LinInstance, cap: usize) -> Result<OracleResult> {
    let n = inst.n();
    if n > cap || n > 63 {
        return Err(Error::TooLarge { n, cap });
    }
    if n <= 1 {
        let x = Assignment::all_plus(n);
        let opt = inst.evaluate(&x)?;
        return Ok(OracleResult {
            opt,
            argmax: x,
            enumerated: 1,
        });
    }
    let total: u64 = 1 << (n - 1);
    let tol = 1e-9 * inst.total_weight().max(1.0);
    let mut x = vec![1_i8; n];
    let mut running = exact_value(inst, &x);
    let mut best = running;
    let mut best_code = 0_u64;
    for step in 1..total {
        // Gray code: bit `trailing_zeros(step)` of the free variables changes
        let v = step.trailing_zeros() as usize + 1;
        let xv = x[v];
        let delta: f64 = inst
            .neighbors(v)
            .iter()
            .map(|nb| {
                if xv * x[nb.vertex] == nb.sign {
                    -nb.weight
                } else {
                    nb.weight
                }
            })
            .sum();
        x[v] = -xv;
        running += delta;
        if running >= best - tol {
            let exact = exact_value(inst, &x);
            running = exact;
            if exact > best {
                best = exact;
                best_code = step ^ (step >> 1);
            }
        }
    }
    Ok(OracleResult {
        opt: best,
        argmax: Assignment::from_mask(n, best_code << 1),
        enumerated: total,
    })
}

/// Same summation order as [`Max2LinInstance::evaluate`].
fn exact_value(inst: &Max2LinInstance, x: &[i8]) -> f64 {
    inst.edges()
        .iter()
        .filter(|e| x[e.i] * x[e.j] == e.sign)
        .map(|e| e.weight)
        .sum()
}

/// Exhaustive evaluation of every one of the `2^n` assignments without any
/// incremental bookkeeping.
pub fn naive_opt(inst: &Max2LinInstance) -> Result<f64> {
    let n = inst.n();
    if n > 20 {
        return Err(Error::TooLarge { n, cap: 20 });
    }
    let mut best = 0.0_f64;
    for mask in 0..(1_u64 << n) {
        best = best.max(inst.evaluate(&Assignment::from_mask(n, mask))?);
    }
    Ok(best)
}

/// `value / opt`.
pub fn ratio(opt: f64, value: f64) -> Result<f64> {
    if !(opt > 0.0) {
        return Err(Error::Domain(alloc::format!(
            "ratio undefined for optimum {opt}"
        )));
    }
    Ok(value / opt)
}
