//! Time-evolving two-color environments over a graph, the 1-BP rule, and the
//! exact reference oracles (distance to the rule, feasibility) used to
//! validate the sampling testers.
//!
//! An environment assigns each vertex a color at each step 1..=T. Under the
//! 1-BP rule a vertex is black at step t+1 exactly when at least one of its
//! neighbors is black at step t, so a member of the rule is determined by its
//! step-1 configuration. Distance between environments is the fraction of the
//! n*T cells where they differ.

use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexSet};

/// Largest vertex count the exhaustive oracles accept by default.
pub const BRUTE_FORCE_CAP_DEFAULT: u32 = 20;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("horizon must be at least 2 (got {0})")]
    HorizonTooSmall(u32),
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(u32, usize),
    #[error("environments have different shape")]
    ShapeMismatch,
    #[error("n = {0} exceeds the exhaustive-enumeration cap {1}")]
    AboveBruteForceCap(usize, u32),
    #[error("observation step must be at least 1")]
    StepTooSmall,
    #[error("black and white observation sets overlap at vertex {0}")]
    OverlappingObservations(u32),
    #[error("graph must have a self-loop on every vertex")]
    MissingSelfLoops,
    #[error("bad environment file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A cell where the environment deviates from the 1-BP rule.
///
/// Type I: the vertex is white at t although some neighbor was black at t-1.
/// Type II: the vertex is black at t although all neighbors were white at t-1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub v: u32,
    pub t: u32,
    pub kind: ViolationKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    TypeI,
    TypeII,
}

/// One observed or claimed cell value, used by feasibility reasoning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub v: u32,
    pub t: u32,
    pub value: bool,
}

impl Fact {
    pub fn new(v: u32, t: u32, value: bool) -> Self {
        Fact { v, t, value }
    }
}

/// Colors for every (vertex, step) cell, stored as bit-packed rows per step.
/// Immutable once built.
#[derive(Clone, PartialEq)]
pub struct Environment {
    graph: Arc<Graph>,
    horizon: u32,
    words_per_step: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Environment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Environment(n={}, T={})",
            self.graph.vertex_count(),
            self.horizon
        )
    }
}

impl Environment {
    /// Builds an environment by evaluating `color(v, t)` for every cell.
    pub fn from_fn(
        graph: Arc<Graph>,
        horizon: u32,
        mut color: impl FnMut(u32, u32) -> bool,
    ) -> Result<Self, EnvError> {
        if horizon < 2 {
            return Err(EnvError::HorizonTooSmall(horizon));
        }
        let n = graph.vertex_count();
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; words * horizon as usize];
        for t in 1..=horizon {
            let base = (t - 1) as usize * words;
            for v in 0..n as u32 {
                if color(v, t) {
                    bits[base + (v as usize >> 6)] |= 1 << (v & 63);
                }
            }
        }
        Ok(Environment {
            graph,
            horizon,
            words_per_step: words,
            bits,
        })
    }

    pub fn all_white(graph: Arc<Graph>, horizon: u32) -> Result<Self, EnvError> {
        Self::from_fn(graph, horizon, |_, _| false)
    }

    /// The unique member of the 1-BP rule whose step-1 black set is `initial`.
    pub fn evolve(
        graph: Arc<Graph>,
        initial: &VertexSet,
        horizon: u32,
    ) -> Result<Self, EnvError> {
        if horizon < 2 {
            return Err(EnvError::HorizonTooSmall(horizon));
        }
        let n = graph.vertex_count();
        for &v in initial {
            if v as usize >= n {
                return Err(EnvError::VertexOutOfRange(v, n));
            }
        }
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; words * horizon as usize];
        for &v in initial {
            bits[v as usize >> 6] |= 1 << (v & 63);
        }
        for t in 2..=horizon as usize {
            let (prev_rows, row) = bits.split_at_mut((t - 1) * words);
            let prev = &prev_rows[(t - 2) * words..];
            let row = &mut row[..words];
            for v in 0..n as u32 {
                let black = graph
                    .adj(v)
                    .iter()
                    .any(|&u| prev[u as usize >> 6] >> (u & 63) & 1 == 1);
                if black {
                    row[v as usize >> 6] |= 1 << (v & 63);
                }
            }
        }
        Ok(Environment {
            graph,
            horizon,
            words_per_step: words,
            bits,
        })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn cells(&self) -> u64 {
        self.graph.vertex_count() as u64 * self.horizon as u64
    }

    /// Color at (v, t) with 1 <= t <= T. Panics out of range.
    pub fn get(&self, v: u32, t: u32) -> bool {
        let n = self.graph.vertex_count();
        assert!((v as usize) < n, "vertex {v} out of range");
        assert!(t >= 1 && t <= self.horizon, "step {t} out of range");
        let idx = (t - 1) as usize * self.words_per_step + (v as usize >> 6);
        self.bits[idx] >> (v & 63) & 1 == 1
    }

    pub(crate) fn row(&self, t: u32) -> &[u64] {
        let base = (t - 1) as usize * self.words_per_step;
        &self.bits[base..base + self.words_per_step]
    }

    /// Copy with the given cells flipped. Duplicate cells toggle repeatedly.
    pub fn with_flipped(&self, cells: &[(u32, u32)]) -> Result<Self, EnvError> {
        let n = self.graph.vertex_count();
        let mut out = self.clone();
        for &(v, t) in cells {
            if v as usize >= n {
                return Err(EnvError::VertexOutOfRange(v, n));
            }
            if t < 1 || t > self.horizon {
                return Err(EnvError::Format(format!("step {t} out of range")));
            }
            let idx = (t - 1) as usize * out.words_per_step + (v as usize >> 6);
            out.bits[idx] ^= 1 << (v & 63);
        }
        Ok(out)
    }

    pub fn black_set(&self, t: u32) -> VertexSet {
        (0..self.graph.vertex_count() as u32)
            .filter(|&v| self.get(v, t))
            .collect()
    }

    /// All rule violations, scanning steps 2..=T in order.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let g = &self.graph;
        for t in 2..=self.horizon {
            let prev = self.row(t - 1);
            for v in 0..g.vertex_count() as u32 {
                let pred_black = g
                    .adj(v)
                    .iter()
                    .any(|&u| prev[u as usize >> 6] >> (u & 63) & 1 == 1);
                let black = self.get(v, t);
                if black && !pred_black {
                    out.push(Violation {
                        v,
                        t,
                        kind: ViolationKind::TypeII,
                    });
                } else if !black && pred_black {
                    out.push(Violation {
                        v,
                        t,
                        kind: ViolationKind::TypeI,
                    });
                }
            }
        }
        out
    }

    /// True iff the environment follows the rule at every cell.
    pub fn is_member(&self) -> bool {
        let g = &self.graph;
        for t in 2..=self.horizon {
            let prev = self.row(t - 1);
            for v in 0..g.vertex_count() as u32 {
                let pred_black = g
                    .adj(v)
                    .iter()
                    .any(|&u| prev[u as usize >> 6] >> (u & 63) & 1 == 1);
                if pred_black != self.get(v, t) {
                    return false;
                }
            }
        }
        true
    }

    pub fn differing_cells(&self, other: &Environment) -> Result<u64, EnvError> {
        if self.graph.vertex_count() != other.graph.vertex_count()
            || self.horizon != other.horizon
        {
            return Err(EnvError::ShapeMismatch);
        }
        // Tail bits past n are zero in both, so a packed XOR popcount is exact.
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum())
    }

    /// Normalized Hamming distance: differing cells / (n * T).
    pub fn distance(&self, other: &Environment) -> Result<f64, EnvError> {
        Ok(self.differing_cells(other)? as f64 / self.cells() as f64)
    }
}

/// Per-vertex closed adjacency masks for graphs that fit in one machine word.
fn adjacency_masks(g: &Graph) -> Vec<u64> {
    let n = g.vertex_count();
    let mut masks = vec![0u64; n];
    for v in 0..n as u32 {
        for &u in g.adj(v) {
            masks[v as usize] |= 1 << u;
        }
    }
    masks
}

/// Cells where `env` differs from the member evolved from the step-1 set
/// `initial` (a bitmask), for graphs with at most 64 vertices.
fn flips_against_member(env: &Environment, masks: &[u64], initial: u64) -> u64 {
    let n = masks.len();
    let tail = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut row = initial;
    let mut flips = (row ^ env.row(1)[0]).count_ones() as u64;
    for t in 2..=env.horizon() {
        let mut next = 0u64;
        let mut bits = row;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            // adjacency is symmetric, so v black at t-1 blackens masks[v] at t
            next |= masks[v];
        }
        next &= tail;
        flips += (next ^ env.row(t)[0]).count_ones() as u64;
        row = next;
    }
    flips
}

/// Minimum number of cell flips to the nearest member, by enumerating all
/// 2^n step-1 configurations. Deterministic; parallelized internally.
pub fn brute_force_min_flips(env: &Environment, cap: u32) -> Result<u64, EnvError> {
    let n = env.graph().vertex_count();
    if n as u32 > cap || n > 24 {
        return Err(EnvError::AboveBruteForceCap(n, cap.min(24)));
    }
    let masks = adjacency_masks(env.graph());
    let total = 1u64 << n;
    Ok((0..total)
        .into_par_iter()
        .map(|s| flips_against_member(env, &masks, s))
        .min()
        .unwrap())
}

/// Distance from `env` to the 1-BP rule, exact, via exhaustive enumeration.
pub fn brute_force_distance_to_rule(env: &Environment) -> Result<f64, EnvError> {
    Ok(brute_force_min_flips(env, BRUTE_FORCE_CAP_DEFAULT)? as f64 / env.cells() as f64)
}

/// Whether `env` is at distance at least eps from every member of the rule.
pub fn is_eps_far(env: &Environment, eps: f64) -> Result<bool, EnvError> {
    Ok(brute_force_distance_to_rule(env)? >= eps)
}

fn check_observation(
    g: &Graph,
    t1: u32,
    black: &VertexSet,
    white: &VertexSet,
) -> Result<(), EnvError> {
    if t1 < 1 {
        return Err(EnvError::StepTooSmall);
    }
    if !g.all_self_looped() {
        return Err(EnvError::MissingSelfLoops);
    }
    let n = g.vertex_count();
    for &v in black.iter().chain(white.iter()) {
        if v as usize >= n {
            return Err(EnvError::VertexOutOfRange(v, n));
        }
    }
    if let Some(&v) = black.intersection(white).next() {
        return Err(EnvError::OverlappingObservations(v));
    }
    Ok(())
}

/// Whether some member of the rule on a fully self-looped graph matches the
/// observed colors at step t1: black on `black`, white on `white`.
///
/// On self-looped graphs a member's step-t black set is exactly the radius
/// (t-1) ball around its step-1 set S. The most permissive S is every vertex
/// whose radius (t1-1) ball avoids the white observations; the observation is
/// feasible iff that S reaches every black observation in t1-1 hops.
pub fn feasible_partial(
    g: &Graph,
    t1: u32,
    black: &VertexSet,
    white: &VertexSet,
) -> Result<bool, EnvError> {
    check_observation(g, t1, black, white)?;
    if black.is_empty() {
        return Ok(true);
    }
    let n = g.vertex_count();
    let radius = t1 - 1;
    let mut allowed = vec![true; n];
    if !white.is_empty() {
        let (dist, _) = g.bfs(white.iter().copied());
        for v in 0..n {
            if let Some(d) = dist[v] {
                if d <= radius {
                    allowed[v] = false;
                }
            }
        }
    }
    let sources: Vec<u32> = (0..n as u32).filter(|&v| allowed[v as usize]).collect();
    if sources.is_empty() {
        return Ok(false);
    }
    let (dist, _) = g.bfs(sources);
    Ok(black
        .iter()
        .all(|&b| matches!(dist[b as usize], Some(d) if d <= radius)))
}

/// Reference implementation of `feasible_partial` that enumerates all 2^n
/// step-1 sets. Kept independent of the BFS characterization on purpose.
pub fn feasible_partial_exhaustive(
    g: &Graph,
    t1: u32,
    black: &VertexSet,
    white: &VertexSet,
    cap: u32,
) -> Result<bool, EnvError> {
    check_observation(g, t1, black, white)?;
    let n = g.vertex_count();
    if n as u32 > cap || n > 24 {
        return Err(EnvError::AboveBruteForceCap(n, cap.min(24)));
    }
    let masks = adjacency_masks(g);
    let tail = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let black_mask: u64 = black.iter().fold(0, |m, &v| m | 1 << v);
    let white_mask: u64 = white.iter().fold(0, |m, &v| m | 1 << v);
    Ok((0..1u64 << n).into_par_iter().any(|s| {
        let mut row = s;
        for _ in 1..t1 {
            let mut next = 0u64;
            let mut bits = row;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                next |= masks[v];
            }
            row = next & tail;
        }
        row & black_mask == black_mask && row & white_mask == 0
    }))
}

/// Whether some member of the rule on a fully self-looped graph agrees with
/// every listed cell value. Generalizes `feasible_partial` to observations at
/// mixed steps; used to replay tester rejection witnesses.
pub fn facts_admit_member(g: &Graph, facts: &[Fact]) -> Result<bool, EnvError> {
    if !g.all_self_looped() {
        return Err(EnvError::MissingSelfLoops);
    }
    let n = g.vertex_count();
    for f in facts {
        if f.v as usize >= n {
            return Err(EnvError::VertexOutOfRange(f.v, n));
        }
        if f.t < 1 {
            return Err(EnvError::StepTooSmall);
        }
    }
    let mut allowed = vec![true; n];
    let mut white_steps: Vec<u32> = facts.iter().filter(|f| !f.value).map(|f| f.t).collect();
    white_steps.sort_unstable();
    white_steps.dedup();
    for &t in &white_steps {
        let sources: VertexSet = facts
            .iter()
            .filter(|f| !f.value && f.t == t)
            .map(|f| f.v)
            .collect();
        let (dist, _) = g.bfs(sources.iter().copied());
        for v in 0..n {
            if let Some(d) = dist[v] {
                if d <= t - 1 {
                    allowed[v] = false;
                }
            }
        }
    }
    let blacks: Vec<&Fact> = facts.iter().filter(|f| f.value).collect();
    if blacks.is_empty() {
        return Ok(true);
    }
    let sources: Vec<u32> = (0..n as u32).filter(|&v| allowed[v as usize]).collect();
    if sources.is_empty() {
        return Ok(false);
    }
    let (dist, _) = g.bfs(sources);
    Ok(blacks
        .iter()
        .all(|f| matches!(dist[f.v as usize], Some(d) if d <= f.t - 1)))
}

/// Parses the text format: a `n T` header, then T lines of n characters,
/// each '0' (white) or '1' (black); line t is the step-t configuration.
pub fn parse_environment(text: &str, graph: Arc<Graph>) -> Result<Environment, EnvError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| EnvError::Format("missing header".into()))?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| EnvError::Format("bad vertex count".into()))?;
    let horizon: u32 = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| EnvError::Format("bad horizon".into()))?;
    if n != graph.vertex_count() {
        return Err(EnvError::Format(format!(
            "file says n = {n}, graph has {}",
            graph.vertex_count()
        )));
    }
    let mut rows: Vec<Vec<bool>> = Vec::with_capacity(horizon as usize);
    for line in lines {
        if line.len() != n {
            return Err(EnvError::Format(format!(
                "row {} has {} cells, expected {n}",
                rows.len() + 1,
                line.len()
            )));
        }
        let row: Vec<bool> = line
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(EnvError::Format(format!("bad cell character {other:?}"))),
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    if rows.len() != horizon as usize {
        return Err(EnvError::Format(format!(
            "header says {horizon} steps, found {}",
            rows.len()
        )));
    }
    Environment::from_fn(graph, horizon, |v, t| rows[(t - 1) as usize][v as usize])
}

pub fn format_environment(env: &Environment) -> String {
    let n = env.graph().vertex_count();
    let mut out = format!("{} {}\n", n, env.horizon());
    for t in 1..=env.horizon() {
        for v in 0..n as u32 {
            out.push(if env.get(v, t) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

pub fn read_environment(
    path: impl AsRef<Path>,
    graph: Arc<Graph>,
) -> Result<Environment, EnvError> {
    parse_environment(&fs::read_to_string(path)?, graph)
}

pub fn write_environment(env: &Environment, path: impl AsRef<Path>) -> Result<(), EnvError> {
    fs::write(path, format_environment(env))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vset;

    fn arc(g: Graph) -> Arc<Graph> {
        Arc::new(g)
    }

    #[test]
    fn evolve_path_one_step() {
        // a-b-c, initial {a}: at step 2 only b is black (a has no loop).
        let g = arc(Graph::path(3));
        let env = Environment::evolve(g, &vset([0]), 2).unwrap();
        assert_eq!(env.black_set(2), vset([1]));
    }

    #[test]
    fn evolve_self_looped_path() {
        let g = arc(Graph::path(3).add_self_loops());
        let env = Environment::evolve(g, &vset([0]), 3).unwrap();
        assert_eq!(env.black_set(2), vset([0, 1]));
        assert_eq!(env.black_set(3), vset([0, 1, 2]));
    }

    #[test]
    fn evolve_empty_initial_stays_white() {
        let g = arc(Graph::complete(4));
        let env = Environment::evolve(g, &vset([]), 5).unwrap();
        for t in 1..=5 {
            assert!(env.black_set(t).is_empty());
        }
    }

    #[test]
    fn violations_of_member_empty() {
        let g = arc(Graph::cycle(5));
        let env = Environment::evolve(g, &vset([2]), 4).unwrap();
        assert!(env.violations().is_empty());
        assert!(env.is_member());
    }

    #[test]
    fn type_one_violation_detected() {
        // a black at 1, everything white at 2: exactly one Type I at (b, 2).
        let g = arc(Graph::path(2));
        let env = Environment::from_fn(g, 2, |v, t| t == 1 && v == 0).unwrap();
        assert_eq!(
            env.violations(),
            vec![Violation {
                v: 1,
                t: 2,
                kind: ViolationKind::TypeI
            }]
        );
    }

    #[test]
    fn type_two_violation_detected() {
        let g = arc(Graph::path(2));
        let env = Environment::from_fn(g, 2, |v, t| t == 2 && v == 0).unwrap();
        assert_eq!(
            env.violations(),
            vec![Violation {
                v: 0,
                t: 2,
                kind: ViolationKind::TypeII
            }]
        );
    }

    #[test]
    fn distance_basics() {
        let g = arc(Graph::path(2));
        let a = Environment::all_white(g.clone(), 2).unwrap();
        let b = Environment::from_fn(g.clone(), 2, |_, _| true).unwrap();
        assert_eq!(a.distance(&a).unwrap(), 0.0);
        assert_eq!(a.distance(&b).unwrap(), 1.0);
        let c = a.with_flipped(&[(0, 2)]).unwrap();
        assert_eq!(a.distance(&c).unwrap(), 0.25);
    }

    #[test]
    fn distance_shape_mismatch() {
        let g = arc(Graph::path(2));
        let a = Environment::all_white(g.clone(), 2).unwrap();
        let b = Environment::all_white(g, 3).unwrap();
        assert!(matches!(a.distance(&b), Err(EnvError::ShapeMismatch)));
    }

    #[test]
    fn brute_force_member_distance_zero() {
        let g = arc(Graph::cycle(5));
        let env = Environment::evolve(g, &vset([0, 2]), 3).unwrap();
        assert_eq!(brute_force_min_flips(&env, 20).unwrap(), 0);
    }

    #[test]
    fn brute_force_path_quarter() {
        // Two vertices a-b, all white at 1, only a black at 2. The nearest
        // members are the all-white one and the one evolved from {b}; both
        // differ in exactly one of the four cells.
        let g = arc(Graph::path(2));
        let env = Environment::from_fn(g, 2, |v, t| t == 2 && v == 0).unwrap();
        assert_eq!(brute_force_min_flips(&env, 20).unwrap(), 1);
        assert_eq!(brute_force_distance_to_rule(&env).unwrap(), 0.25);
    }

    #[test]
    fn brute_force_all_black_self_looped() {
        let g = arc(Graph::complete(3).add_self_loops());
        let env = Environment::from_fn(g, 3, |_, _| true).unwrap();
        assert_eq!(brute_force_min_flips(&env, 20).unwrap(), 0);
    }

    #[test]
    fn brute_force_cap_enforced() {
        let g = arc(Graph::path(6));
        let env = Environment::all_white(g, 2).unwrap();
        assert!(matches!(
            brute_force_min_flips(&env, 4),
            Err(EnvError::AboveBruteForceCap(6, 4))
        ));
    }

    #[test]
    fn eps_far_thresholds() {
        let g = arc(Graph::path(2));
        let member = Environment::all_white(g.clone(), 2).unwrap();
        assert!(!is_eps_far(&member, 0.1).unwrap());
        assert!(is_eps_far(&member, 0.0).unwrap());
        let quarter = Environment::from_fn(g, 2, |v, t| t == 2 && v == 0).unwrap();
        assert!(is_eps_far(&quarter, 0.25).unwrap());
        assert!(!is_eps_far(&quarter, 0.3).unwrap());
    }

    #[test]
    fn feasibility_trivial_cases() {
        let g = Graph::path(3).add_self_loops();
        assert!(feasible_partial(&g, 3, &vset([]), &vset([0, 1, 2])).unwrap());
        // t1 = 1: step 1 is unconstrained, any disjoint observation fits
        assert!(feasible_partial(&g, 1, &vset([0, 2]), &vset([1])).unwrap());
    }

    #[test]
    fn feasibility_path_counterexample() {
        // a-b-c self-looped, t1 = 2, a black and b white. Any step-1 set
        // blackening a by step 2 must touch {a, b}, but then b is black too.
        let g = Graph::path(3).add_self_loops();
        assert!(!feasible_partial(&g, 2, &vset([0]), &vset([1])).unwrap());
        assert!(!feasible_partial_exhaustive(&g, 2, &vset([0]), &vset([1]), 20).unwrap());
    }

    #[test]
    fn feasibility_requires_self_loops() {
        let g = Graph::path(3);
        assert!(matches!(
            feasible_partial(&g, 2, &vset([0]), &vset([])),
            Err(EnvError::MissingSelfLoops)
        ));
    }

    #[test]
    fn feasibility_rejects_overlap() {
        let g = Graph::path(3).add_self_loops();
        assert!(matches!(
            feasible_partial(&g, 2, &vset([0]), &vset([0])),
            Err(EnvError::OverlappingObservations(0))
        ));
    }

    #[test]
    fn facts_checker_matches_feasibility_shape() {
        let g = Graph::path(3).add_self_loops();
        let facts = [
            Fact {
                v: 0,
                t: 2,
                value: true,
            },
            Fact {
                v: 1,
                t: 2,
                value: false,
            },
        ];
        assert!(!facts_admit_member(&g, &facts).unwrap());
        // contradictory single-vertex facts: black at 2 yet white at 3
        let facts = [
            Fact {
                v: 0,
                t: 2,
                value: true,
            },
            Fact {
                v: 0,
                t: 3,
                value: false,
            },
        ];
        assert!(!facts_admit_member(&g, &facts).unwrap());
        let facts = [Fact {
            v: 2,
            t: 3,
            value: true,
        }];
        assert!(facts_admit_member(&g, &facts).unwrap());
    }

    #[test]
    fn environment_file_round_trip() {
        let g = arc(Graph::path(3));
        let env = Environment::from_fn(g.clone(), 3, |v, t| (v + t) % 2 == 0).unwrap();
        let text = format_environment(&env);
        let back = parse_environment(&text, g).unwrap();
        assert_eq!(env, back);
    }

    #[test]
    fn environment_file_validation() {
        let g = arc(Graph::path(3));
        assert!(parse_environment("3 2\n000\n", g.clone()).is_err());
        assert!(parse_environment("3 2\n000\n0x0\n", g.clone()).is_err());
        assert!(parse_environment("4 2\n0000\n0000\n", g).is_err());
    }
}
