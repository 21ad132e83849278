//! Structure-independent tester for arbitrary horizons. Samples uniform
//! (vertex, step) pairs with step >= 2 and checks each against its full
//! neighborhood at the previous step. The pair budget carries the
//! Δ^(T-2) factor that makes this approach viable only for short horizons
//! or tiny degree; the decomposition tester exists to avoid it.

use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Violation, ViolationKind};
use crate::graph::Graph;
use crate::oracle::QueryOracle;

use super::{
    check_eps, check_graph, sample_pairs, size_gen_t_local, verdict_from, TesterError, Verdict,
    Witness,
};

/// Samples min(n(T-1), ⌈2 Δ^(T-2) / (eps T)⌉) pairs and rejects iff one of
/// them is a direct violation. Non-adaptive and time-conforming. Requires
/// Δ >= 2; degree-1 graphs have diameter 1 and are better served by the
/// long-horizon strategy.
pub fn test_gen_t_local(
    oracle: &mut QueryOracle,
    g: &Graph,
    eps: f64,
    seed: u64,
) -> Result<Verdict, TesterError> {
    check_eps(eps)?;
    check_graph(oracle, g)?;
    let horizon = oracle.horizon();
    if horizon < 2 {
        return Err(TesterError::HorizonNotTwo(horizon));
    }
    let max_degree = g.max_degree();
    if max_degree < 2 {
        return Err(TesterError::DegreeTooSmall);
    }
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = sample_pairs(
        &mut rng,
        n,
        2,
        horizon,
        size_gen_t_local(eps, n, max_degree, horizon),
    );

    // one batch: u at t and N(u) at t-1 for every sampled pair, step order
    let mut cells: BTreeSet<(u32, u32)> = BTreeSet::new();
    for &(u, t) in &pairs {
        cells.insert((t, u));
        for &w in g.adj(u) {
            cells.insert((t - 1, w));
        }
    }
    oracle.register(cells.iter().map(|&(t, v)| (v, t)))?;
    let mut val: HashMap<(u32, u32), bool> = HashMap::new();
    for &(t, v) in &cells {
        val.insert((v, t), oracle.query(v, t)?);
    }

    let mut witness = None;
    for &(u, t) in &pairs {
        let black_at_t = val[&(u, t)];
        let black_neighbor = g.adj(u).iter().copied().find(|&w| val[&(w, t - 1)]);
        match (black_at_t, black_neighbor) {
            (false, Some(w)) => {
                witness = Some(Witness::Direct {
                    violation: Violation {
                        v: u,
                        t,
                        kind: ViolationKind::TypeI,
                    },
                    black_neighbor: Some(w),
                });
                break;
            }
            (true, None) => {
                witness = Some(Witness::Direct {
                    violation: Violation {
                        v: u,
                        t,
                        kind: ViolationKind::TypeII,
                    },
                    black_neighbor: None,
                });
                break;
            }
            _ => {}
        }
    }
    Ok(verdict_from(oracle, witness, seed))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::env::Environment;
    use crate::graph::vset;
    use crate::oracle::OraclePolicy;
    use crate::testers::witness::verify_witness;
    use crate::testers::{budget_gen_t_local, Decision};

    #[test]
    fn accepts_members_at_various_horizons() {
        for horizon in [2, 3, 5] {
            let g = Arc::new(Graph::grid(5, 5).add_self_loops());
            let env = Environment::evolve(g, &vset([7]), horizon).unwrap();
            for seed in 0..20 {
                let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive().enforcing());
                let v = test_gen_t_local(&mut o, env.graph(), 0.15, seed).unwrap();
                assert_eq!(v.decision, Decision::Accept);
                assert!(v.time_conforming);
            }
        }
    }

    #[test]
    fn rejects_a_dense_violation_pattern() {
        // alternating all-black/all-white steps: every pair with t >= 2
        // violates one way or the other
        let g = Arc::new(Graph::cycle(10));
        let env = Environment::from_fn(g, 4, |_, t| t % 2 == 1).unwrap();
        for seed in 0..20 {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            let v = test_gen_t_local(&mut o, env.graph(), 0.5, seed).unwrap();
            assert_eq!(v.decision, Decision::Reject);
            assert!(verify_witness(&env, v.witness.as_ref().unwrap()));
        }
    }

    #[test]
    fn stays_within_budget() {
        let g = Arc::new(Graph::grid(4, 4));
        let env = Environment::all_white(g, 4).unwrap();
        for (eps, seed) in [(0.1, 1u64), (0.33, 2), (0.9, 3)] {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            let v = test_gen_t_local(&mut o, env.graph(), eps, seed).unwrap();
            assert!(v.queries_used <= budget_gen_t_local(eps, env.graph().max_degree(), 4));
        }
    }

    #[test]
    fn rejects_degree_one_graphs() {
        // a perfect matching has max degree 1
        let g = Arc::new(Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap());
        let env = Environment::all_white(g, 3).unwrap();
        let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
        let err = test_gen_t_local(&mut o, env.graph(), 0.2, 0).unwrap_err();
        assert!(matches!(err, TesterError::DegreeTooSmall));
    }

    #[test]
    fn deterministic_per_seed() {
        let g = Arc::new(Graph::cycle(16));
        let env = Environment::evolve(g, &vset([3]), 3).unwrap();
        let run = |seed| {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            test_gen_t_local(&mut o, env.graph(), 0.25, seed).unwrap()
        };
        assert_eq!(run(11), run(11));
    }
}
