//! Weighted Max-2LIN instances and ±1 assignments.
//!
//! A constraint `x_i · x_j = b` over ±1 variables is stored as an [`Edge`].
//! Max-Cut is the special case where every sign is `-1`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Constraint `x_i · x_j = sign` with weight `weight`, normalized so `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub sign: i8,
    pub weight: f64,
}

impl Edge {
    pub fn new(i: usize, j: usize, sign: i8, weight: f64) -> Self {
        Edge { i, j, sign, weight }
    }

    #[inline]
    pub fn is_satisfied(&self, x: &Assignment) -> bool {
        x.get(self.i) * x.get(self.j) == self.sign
    }
}

/// Entry of a vertex's adjacency list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: usize,
    pub sign: i8,
    pub weight: f64,
}

/// Validated, immutable weighted signed graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Max2LinInstance {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Neighbor>>,
    max_degree: usize,
}

impl Max2LinInstance {
    /// Builds an instance, rejecting self-loops, duplicate pairs, indices out
    /// of range, signs other than ±1 and weights that are not finite and
    /// strictly positive. Edges given as `(j, i)` with `j > i` are reoriented;
    /// their order in the list is kept.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (idx, e) in edges.into_iter().enumerate() {
            let (i, j) = if e.i <= e.j { (e.i, e.j) } else { (e.j, e.i) };
            if j >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge {idx}: vertex {j} out of range for n = {n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidInstance(format!(
                    "edge {idx}: self-loop on {i}"
                )));
            }
            if e.sign != 1 && e.sign != -1 {
                return Err(Error::InvalidInstance(format!(
                    "edge {idx}: sign must be -1 or 1, got {}",
                    e.sign
                )));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "edge {idx}: weight must be finite and > 0, got {}",
                    e.weight
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidInstance(format!(
                    "edge {idx}: duplicate pair ({i}, {j})"
                )));
            }
            normalized.push(Edge::new(i, j, e.sign, e.weight));
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in &normalized {
            adjacency[e.i].push(Neighbor {
                vertex: e.j,
                sign: e.sign,
                weight: e.weight,
            });
            adjacency[e.j].push(Neighbor {
                vertex: e.i,
                sign: e.sign,
                weight: e.weight,
            });
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Max2LinInstance {
            n,
            edges: normalized,
            adjacency,
            max_degree,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Total weight incident to `i`.
    pub fn incident_weight(&self, i: usize) -> f64 {
        self.adjacency[i].iter().map(|nb| nb.weight).sum()
    }

    fn check_len(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Total weight of satisfied constraints.
    pub fn evaluate(&self, x: &Assignment) -> Result<f64> {
        self.check_len(x)?;
        Ok(self
            .edges
            .iter()
            .filter(|e| e.is_satisfied(x))
            .map(|e| e.weight)
            .sum())
    }

    /// Total weight of violated constraints.
    pub fn violated_weight(&self, x: &Assignment) -> Result<f64> {
        self.check_len(x)?;
        Ok(self
            .edges
            .iter()
            .filter(|e| !e.is_satisfied(x))
            .map(|e| e.weight)
            .sum())
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: perm.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(perm[e.i], perm[e.j], e.sign, e.weight))
            .collect();
        Max2LinInstance::new(self.n, edges)
    }
}

/// ±1 label per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(Vec<i8>);

impl Assignment {
    pub fn new(x: Vec<i8>) -> Result<Self> {
        if let Some(bad) = x.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!(
                "assignment entry {bad} is not ±1"
            )));
        }
        Ok(Assignment(x))
    }

    pub fn all_plus(n: usize) -> Self {
        Assignment(vec![1; n])
    }

    /// Bit `v` of `mask` set means `x_v = -1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Assignment(
            (0..n)
                .map(|v| if mask >> v & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn negated(&self) -> Self {
        Assignment(self.0.iter().map(|&s| -s).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }
}

/// Distribution of edge weights for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLaw {
    Unit,
    Uniform { lo: f64, hi: f64 },
}

const REGULAR_RESTARTS: usize = 10_000;

/// Random simple `d`-regular graph on `n` vertices.
///
/// Points of the configuration model are paired one random pair at a time,
/// refusing pairs that would create a loop or a repeated edge; when no legal
/// pair remains the pairing restarts. Each edge then gets sign `-1` with
/// probability `sign_bias` (else `+1`) and a weight drawn from `weights`.
pub fn gen_random_regular(
    n: usize,
    d: usize,
    sign_bias: f64,
    weights: WeightLaw,
    seed: u64,
) -> Result<Max2LinInstance> {
    if (n * d) % 2 == 1 {
        return Err(Error::InvalidParameter(format!("n·d = {} is odd", n * d)));
    }
    if d >= n && d > 0 {
        return Err(Error::InvalidParameter(format!(
            "degree {d} must be below n = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&sign_bias) {
        return Err(Error::InvalidParameter(format!(
            "sign bias {sign_bias} outside [0, 1]"
        )));
    }
    if let WeightLaw::Uniform { lo, hi } = weights {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight range [{lo}, {hi}] must satisfy 0 < lo <= hi"
            )));
        }
    }
    let mut rng = rng::seeded(seed);
    let pairs = pair_regular(n, d, &mut rng)?;
    let edges = pairs
        .into_iter()
        .map(|(i, j)| {
            let sign = if rng.random::<f64>() < sign_bias {
                -1
            } else {
                1
            };
            let weight = match weights {
                WeightLaw::Unit => 1.0,
                WeightLaw::Uniform { lo, hi } if hi > lo => rng.random_range(lo..hi),
                WeightLaw::Uniform { lo, .. } => lo,
            };
            Edge::new(i, j, sign, weight)
        })
        .collect();
    Max2LinInstance::new(n, edges)
}

fn pair_regular<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    'restart: for _ in 0..REGULAR_RESTARTS {
        let mut points: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, d)).collect();
        points.shuffle(rng);
        let mut adjacent: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut pairs = Vec::with_capacity(n * d / 2);
        while !points.is_empty() {
            let mut placed = false;
            for _ in 0..64 {
                let a = rng.random_range(0..points.len());
                let b = rng.random_range(0..points.len());
                let (u, v) = (points[a], points[b]);
                let key = (u.min(v), u.max(v));
                if a == b || u == v || adjacent.contains(&key) {
                    continue;
                }
                adjacent.insert(key);
                pairs.push(key);
                let (hi, lo) = (a.max(b), a.min(b));
                points.swap_remove(hi);
                points.swap_remove(lo);
                placed = true;
                break;
            }
            if !placed && !has_legal_pair(&points, &adjacent) {
                continue 'restart;
            }
        }
        pairs.sort_unstable();
        return Ok(pairs);
    }
    Err(Error::BudgetExceeded {
        what: format!("pairing a {d}-regular graph on {n} vertices"),
        attempts: REGULAR_RESTARTS,
    })
}

fn has_legal_pair(points: &[usize], adjacent: &BTreeSet<(usize, usize)>) -> bool {
    let verts: BTreeSet<usize> = points.iter().copied().collect();
    let verts: Vec<usize> = verts.into_iter().collect();
    verts
        .iter()
        .enumerate()
        .any(|(k, &u)| verts[k + 1..].iter().any(|&v| !adjacent.contains(&(u, v))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Max2LinInstance {
        Max2LinInstance::new(
            3,
            vec![
                Edge::new(0, 1, -1, 1.0),
                Edge::new(0, 2, -1, 1.0),
                Edge::new(1, 2, -1, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn triangle_values() {
        let t = triangle();
        assert_eq!(t.max_degree(), 2);
        let x = Assignment::new(vec![1, 1, -1]).unwrap();
        assert_eq!(t.evaluate(&x).unwrap(), 2.0);
        assert_eq!(t.evaluate(&Assignment::all_plus(3)).unwrap(), 0.0);
    }

    #[test]
    fn single_equality_edge() {
        let inst = Max2LinInstance::new(2, vec![Edge::new(0, 1, 1, 2.5)]).unwrap();
        assert_eq!(inst.evaluate(&Assignment::all_plus(2)).unwrap(), 2.5);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Max2LinInstance::new(2, vec![Edge::new(0, 1, -1, 0.0)]).is_err());
        assert!(Max2LinInstance::new(2, vec![Edge::new(0, 1, -1, f64::NAN)]).is_err());
        assert!(Max2LinInstance::new(2, vec![Edge::new(1, 1, -1, 1.0)]).is_err());
        assert!(Max2LinInstance::new(2, vec![Edge::new(0, 2, -1, 1.0)]).is_err());
        assert!(Max2LinInstance::new(2, vec![Edge::new(0, 1, 0, 1.0)]).is_err());
        assert!(
            Max2LinInstance::new(3, vec![Edge::new(0, 1, -1, 1.0), Edge::new(1, 0, 1, 1.0)])
                .is_err()
        );
    }

    #[test]
    fn evaluate_length_mismatch() {
        assert!(matches!(
            triangle().evaluate(&Assignment::all_plus(2)),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn assignment_rejects_zero() {
        assert!(Assignment::new(vec![1, 0]).is_err());
    }

    #[test]
    fn k4_is_the_only_cubic_graph_on_four_vertices() {
        let inst = gen_random_regular(4, 3, 1.0, WeightLaw::Unit, 7).unwrap();
        assert_eq!(inst.m(), 6);
        assert!(inst.edges().iter().all(|e| e.sign == -1 && e.weight == 1.0));
        assert!((0..4).all(|v| inst.degree(v) == 3));
    }

    #[test]
    fn regular_generator_degrees_and_determinism() {
        for &(n, d) in &[(10, 3), (50, 8), (200, 8), (31, 10)] {
            let a =
                gen_random_regular(n, d, 0.5, WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, 11).unwrap();
            assert!((0..n).all(|v| a.degree(v) == d), "n={n} d={d}");
            let b =
                gen_random_regular(n, d, 0.5, WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, 11).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn regular_generator_rejects_bad_parameters() {
        assert!(gen_random_regular(5, 3, 1.0, WeightLaw::Unit, 0).is_err());
        assert!(gen_random_regular(4, 4, 1.0, WeightLaw::Unit, 0).is_err());
        assert!(gen_random_regular(4, 2, 1.5, WeightLaw::Unit, 0).is_err());
    }
}
