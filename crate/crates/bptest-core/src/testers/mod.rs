//! The testing algorithms: two T=2 testers (low-degree and large-degree),
//! the structure-independent general-T tester, the decomposition-based
//! tester, and the trivial long-horizon tester. All are one-sided: a
//! rejection always carries a witness that the answered values are
//! inconsistent with the 1-BP rule.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::DecompError;
use crate::env::EnvError;
use crate::graph::{Graph, GraphError};
use crate::oracle::{OracleError, QueryOracle};

pub mod decomposition_based;
pub mod gen_t;
pub mod long_horizon;
pub mod t2;
pub mod witness;

pub use decomposition_based::{
    test_gen_t_decomposition, test_gen_t_decomposition_detailed, DecompositionRunInfo,
};
pub use gen_t::test_gen_t_local;
pub use long_horizon::test_long_horizon;
pub use t2::{test_t2_large_degree, test_t2_low_degree};
pub use witness::{verify_witness, Witness};

#[derive(Debug, Error)]
pub enum TesterError {
    #[error("eps must be in (0, 1], got {0}")]
    BadEps(f64),
    #[error("tester requires horizon T = 2, oracle has T = {0}")]
    HorizonNotTwo(u32),
    #[error("tester requires max degree >= 2 (degree-1 graphs have diameter 1; use the long-horizon strategy)")]
    DegreeTooSmall,
    #[error("tester requires T >= 4/eps, got T = {t}, eps = {eps}")]
    HorizonVsEps { t: u32, eps: f64 },
    #[error("tester requires T >= (1 + 2/eps) * max component diameter, got T = {t}, diameter {diam}, eps = {eps}")]
    HorizonVsDiameter { t: u32, diam: u32, eps: f64 },
    #[error("graph must have a self-loop on every vertex")]
    MissingSelfLoops,
    #[error("graph has {graph_n} vertices but the oracle's environment has {oracle_n}")]
    GraphMismatch { graph_n: usize, oracle_n: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Decomposition(#[from] DecompError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
}

/// Outcome of one tester run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub queries_used: u64,
    pub time_conforming: bool,
    #[serde(rename = "seed")]
    pub rng_seed: u64,
}

impl Verdict {
    pub fn rejected(&self) -> bool {
        self.decision == Decision::Reject
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn ceil_to_u64(x: f64) -> u64 {
    // float-to-int casts saturate, which is what huge budgets should do
    x.ceil() as u64
}

pub(crate) fn check_eps(eps: f64) -> Result<(), TesterError> {
    if eps.is_finite() && eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(TesterError::BadEps(eps))
    }
}

pub(crate) fn check_graph(oracle: &QueryOracle, g: &Graph) -> Result<(), TesterError> {
    if oracle.vertex_count() == g.vertex_count() {
        Ok(())
    } else {
        Err(TesterError::GraphMismatch {
            graph_n: g.vertex_count(),
            oracle_n: oracle.vertex_count(),
        })
    }
}

pub(crate) fn verdict_from(oracle: &QueryOracle, witness: Option<Witness>, seed: u64) -> Verdict {
    Verdict {
        decision: if witness.is_some() {
            Decision::Reject
        } else {
            Decision::Accept
        },
        witness,
        queries_used: oracle.queries_used(),
        time_conforming: oracle.time_conforming(),
        rng_seed: seed,
    }
}

/// Sample size of the low-degree T=2 tester: min(n, ⌈2/eps⌉).
pub fn size_t2_low_degree(eps: f64, n: usize) -> u64 {
    (n as u64).min(ceil_to_u64(2.0 / eps))
}

/// Query budget of the low-degree T=2 tester: ⌈2/eps⌉ * (Δ + 1).
pub fn budget_t2_low_degree(eps: f64, max_degree: usize) -> u64 {
    ceil_to_u64(2.0 / eps).saturating_mul(max_degree as u64 + 1)
}

/// Size of each of the four first-phase samples of the large-degree tester:
/// min(n, ⌈(24/eps) * sqrt(n) * ln(n)^(3/2)⌉).
pub fn size_t2_large_degree_phase1(eps: f64, n: usize) -> u64 {
    let nf = n as f64;
    (n as u64).min(ceil_to_u64(24.0 / eps * nf.sqrt() * nf.ln().max(0.0).powf(1.5)))
}

/// Third-phase sample bound of the large-degree tester: ⌈(4/eps) * ln n⌉.
pub fn size_t2_large_degree_phase3(eps: f64, n: usize) -> u64 {
    ceil_to_u64(4.0 / eps * (n as f64).ln().max(0.0))
}

/// Degree threshold defining the set F in the large-degree tester:
/// 4 * sqrt(n * ln n).
pub fn threshold_t2_large_degree(n: usize) -> f64 {
    let nf = n as f64;
    4.0 * (nf * nf.ln().max(0.0)).sqrt()
}

/// Query budget of the large-degree T=2 tester:
/// 4 * phase-1 size + phase-3 bound * (2 + 4 * sqrt(n * ln n)).
pub fn budget_t2_large_degree(eps: f64, n: usize) -> u64 {
    let phase1 = 4 * size_t2_large_degree_phase1(eps, n);
    let per_v = 2.0 + threshold_t2_large_degree(n);
    phase1 + (size_t2_large_degree_phase3(eps, n) as f64 * per_v).floor() as u64
}

/// Pair-sample size of the general-T local tester:
/// min(n * (T - 1), ⌈2 * Δ^(T-2) / (eps * T)⌉).
pub fn size_gen_t_local(eps: f64, n: usize, max_degree: usize, horizon: u32) -> u64 {
    let pop = n as u64 * (horizon as u64 - 1);
    let raw = 2.0 * (max_degree as f64).powi(horizon as i32 - 2) / (eps * horizon as f64);
    pop.min(ceil_to_u64(raw))
}

/// Query budget of the general-T local tester: pair-sample bound * (Δ + 1).
pub fn budget_gen_t_local(eps: f64, max_degree: usize, horizon: u32) -> u64 {
    let raw = 2.0 * (max_degree as f64).powi(horizon as i32 - 2) / (eps * horizon as f64);
    ceil_to_u64(raw).saturating_mul(max_degree as u64 + 1)
}

/// Query budget of the decomposition tester: |B| + 2 * ⌈4/eps⌉.
pub fn budget_gen_t_decomposition(eps: f64, boundary_size: u64) -> u64 {
    boundary_size + 2 * ceil_to_u64(4.0 / eps)
}

/// Query budget of the long-horizon tester: one representative per
/// component plus two pair samples of ⌈4/eps⌉.
pub fn budget_long_horizon(eps: f64, component_count: u64) -> u64 {
    component_count + 2 * ceil_to_u64(4.0 / eps)
}

/// Distinct uniform pairs (v, t) with v in 0..n and t in t_lo..=t_hi, in
/// draw order.
pub(crate) fn sample_pairs(
    rng: &mut impl Rng,
    n: usize,
    t_lo: u32,
    t_hi: u32,
    amount: u64,
) -> Vec<(u32, u32)> {
    let pop = n as u64 * (t_hi - t_lo + 1) as u64;
    let amount = amount.min(pop);
    rand::seq::index::sample(rng, pop as usize, amount as usize)
        .into_iter()
        .map(|i| {
            let i = i as u64;
            ((i % n as u64) as u32, t_lo + (i / n as u64) as u32)
        })
        .collect()
}

/// Distinct uniform vertices in draw order.
pub(crate) fn sample_vertices(rng: &mut impl Rng, n: usize, amount: u64) -> Vec<u32> {
    let amount = amount.min(n as u64);
    rand::seq::index::sample(rng, n, amount as usize)
        .into_iter()
        .map(|v| v as u32)
        .collect()
}
