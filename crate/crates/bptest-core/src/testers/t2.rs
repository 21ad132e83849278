//! Horizon-2 testers. The low-degree tester samples vertices and reads
//! their full neighborhoods; the large-degree one replaces most of that
//! with four vertex samples whose answers let it infer step-1 colors, and
//! only reads neighborhoods filtered down to the still-unknown part.

use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Violation, ViolationKind};
use crate::graph::Graph;
use crate::oracle::QueryOracle;

use super::{
    check_eps, check_graph, sample_vertices, size_t2_large_degree_phase1,
    size_t2_large_degree_phase3, size_t2_low_degree, threshold_t2_large_degree, verdict_from,
    TesterError, Verdict, Witness,
};

fn require_horizon_two(oracle: &QueryOracle) -> Result<(), TesterError> {
    if oracle.horizon() == 2 {
        Ok(())
    } else {
        Err(TesterError::HorizonNotTwo(oracle.horizon()))
    }
}

/// Samples min(n, ⌈2/eps⌉) vertices and checks each against its full
/// neighborhood. Non-adaptive and time-conforming; meant for small maximum
/// degree, where the (Δ+1) factor in the budget is cheap.
pub fn test_t2_low_degree(
    oracle: &mut QueryOracle,
    g: &Graph,
    eps: f64,
    seed: u64,
) -> Result<Verdict, TesterError> {
    check_eps(eps)?;
    check_graph(oracle, g)?;
    require_horizon_two(oracle)?;
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = sample_vertices(&mut rng, n, size_t2_low_degree(eps, n));

    // one batch: N(u) at step 1 and u at step 2, deduplicated, step order
    let mut cells: BTreeSet<(u32, u32)> = BTreeSet::new();
    for &u in &sample {
        cells.insert((2, u));
        for &w in g.adj(u) {
            cells.insert((1, w));
        }
    }
    oracle.register(cells.iter().map(|&(t, v)| (v, t)))?;
    let mut val: HashMap<(u32, u32), bool> = HashMap::new();
    for &(t, v) in &cells {
        val.insert((v, t), oracle.query(v, t)?);
    }

    let mut witness = None;
    for &u in &sample {
        let black_at_2 = val[&(u, 2)];
        let black_neighbor = g.adj(u).iter().copied().find(|&w| val[&(w, 1)]);
        match (black_at_2, black_neighbor) {
            (false, Some(w)) => {
                witness = Some(Witness::Direct {
                    violation: Violation {
                        v: u,
                        t: 2,
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
                        t: 2,
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

/// The sublinear-in-Δ tester for horizon 2. Four vertex samples Q1, Q1',
/// Q2, Q2' of size min(n, ⌈(24/eps) sqrt(n) ln(n)^{3/2}⌉) establish
/// vertices known black at step 2 (a Q1 neighbor answered black at step 1)
/// and known white at step 1 (a Q2 neighbor answered white at step 2).
/// Cross-checking Q1' and Q2' against those sets catches dense violation
/// patterns; a final filtered-neighborhood pass over low-residual-degree
/// vertices catches the rest. Adaptive; the final pass returns to step 1
/// after step-2 queries, so it is not time-conforming.
pub fn test_t2_large_degree(
    oracle: &mut QueryOracle,
    g: &Graph,
    eps: f64,
    seed: u64,
) -> Result<Verdict, TesterError> {
    check_eps(eps)?;
    check_graph(oracle, g)?;
    require_horizon_two(oracle)?;
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = size_t2_large_degree_phase1(eps, n);
    let q1 = sample_vertices(&mut rng, n, cap);
    let q1p = sample_vertices(&mut rng, n, cap);
    let q2 = sample_vertices(&mut rng, n, cap);
    let q2p = sample_vertices(&mut rng, n, cap);

    // step-1 phase
    let mut val1: Vec<Option<bool>> = vec![None; n];
    for &u in &q1 {
        val1[u as usize] = Some(oracle.query(u, 1)?);
    }
    for &u in &q2p {
        val1[u as usize] = Some(oracle.query(u, 1)?);
    }
    // known black at step 2, tagged with the answered-black step-1 neighbor
    let mut black2_from: Vec<Option<u32>> = vec![None; n];
    for &u in &q1 {
        if val1[u as usize] == Some(true) {
            for &w in g.adj(u) {
                black2_from[w as usize].get_or_insert(u);
            }
        }
    }

    // step-2 phase
    let mut val2: Vec<Option<bool>> = vec![None; n];
    for &u in &q1p {
        val2[u as usize] = Some(oracle.query(u, 2)?);
    }
    for &u in &q2 {
        val2[u as usize] = Some(oracle.query(u, 2)?);
    }
    // known white at step 1, tagged with the answered-white step-2 neighbor
    let mut white1_from: Vec<Option<u32>> = vec![None; n];
    for &u in &q2 {
        if val2[u as usize] == Some(false) {
            for &w in g.adj(u) {
                white1_from[w as usize].get_or_insert(u);
            }
        }
    }

    for &u in &q1p {
        if let Some(src) = black2_from[u as usize] {
            if val2[u as usize] == Some(false) {
                let witness = Witness::Direct {
                    violation: Violation {
                        v: u,
                        t: 2,
                        kind: ViolationKind::TypeI,
                    },
                    black_neighbor: Some(src),
                };
                return Ok(verdict_from(oracle, Some(witness), seed));
            }
        }
    }
    for &u in &q2p {
        if val1[u as usize] == Some(true) {
            if let Some(cert) = white1_from[u as usize] {
                // u answered black at step 1, its neighbor cert answered
                // white at step 2: the violation sits at (cert, 2)
                let witness = Witness::Direct {
                    violation: Violation {
                        v: cert,
                        t: 2,
                        kind: ViolationKind::TypeI,
                    },
                    black_neighbor: Some(u),
                };
                return Ok(verdict_from(oracle, Some(witness), seed));
            }
        }
    }

    // vertices whose neighborhood is almost entirely known white at step 1
    let threshold = threshold_t2_large_degree(n);
    let filtered: Vec<u32> = (0..n as u32)
        .filter(|&v| {
            let residual = g
                .adj(v)
                .iter()
                .filter(|&&u| white1_from[u as usize].is_none())
                .count();
            residual as f64 <= threshold
        })
        .collect();
    let q3_size = size_t2_large_degree_phase3(eps, n).min(filtered.len() as u64);
    let q3: Vec<u32> = rand::seq::index::sample(&mut rng, filtered.len(), q3_size as usize)
        .into_iter()
        .map(|i| filtered[i])
        .collect();

    for &v in &q3 {
        let black_at_2 = oracle.query(v, 2)?;
        let residual: Vec<u32> = g
            .adj(v)
            .iter()
            .copied()
            .filter(|&u| white1_from[u as usize].is_none())
            .collect();
        let mut black_neighbor = None;
        for &u in &residual {
            // stepping back to step 1 here is what breaks time-conformity
            if oracle.query(u, 1)? && black_neighbor.is_none() {
                black_neighbor = Some(u);
            }
        }
        if !black_at_2 {
            if let Some(u) = black_neighbor {
                let witness = Witness::Direct {
                    violation: Violation {
                        v,
                        t: 2,
                        kind: ViolationKind::TypeI,
                    },
                    black_neighbor: Some(u),
                };
                return Ok(verdict_from(oracle, Some(witness), seed));
            }
        } else if black_neighbor.is_none() {
            // every neighbor is answered white at step 1 or forced white by
            // an answered white step-2 neighbor
            let inferred_white: Vec<(u32, u32)> = g
                .adj(v)
                .iter()
                .filter_map(|&w| white1_from[w as usize].map(|x| (w, x)))
                .collect();
            let witness = Witness::FilteredTypeTwo {
                v,
                seen_white_step1: residual,
                inferred_white,
            };
            return Ok(verdict_from(oracle, Some(witness), seed));
        }
    }
    Ok(verdict_from(oracle, None, seed))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::env::Environment;
    use crate::graph::vset;
    use crate::oracle::OraclePolicy;
    use crate::testers::witness::verify_witness;
    use crate::testers::{budget_t2_low_degree, Decision};

    fn member_env(n: usize) -> Environment {
        let g = Arc::new(Graph::cycle(n));
        Environment::evolve(g, &vset([0, (n / 2) as u32]), 2).unwrap()
    }

    #[test]
    fn low_degree_accepts_members() {
        let env = member_env(40);
        for seed in 0..25 {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            let v = test_t2_low_degree(&mut o, env.graph(), 0.1, seed).unwrap();
            assert_eq!(v.decision, Decision::Accept);
            assert!(v.witness.is_none());
            assert!(v.time_conforming);
        }
    }

    #[test]
    fn low_degree_rejects_type_i_everywhere() {
        // all black at step 1, all white at step 2: every vertex violates
        let g = Arc::new(Graph::cycle(12));
        let env = Environment::from_fn(g, 2, |_, t| t == 1).unwrap();
        for seed in 0..25 {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            let v = test_t2_low_degree(&mut o, env.graph(), 0.5, seed).unwrap();
            assert_eq!(v.decision, Decision::Reject);
            assert!(verify_witness(&env, v.witness.as_ref().unwrap()));
        }
    }

    #[test]
    fn low_degree_rejects_type_ii_everywhere() {
        let g = Arc::new(Graph::cycle(12));
        let env = Environment::from_fn(g, 2, |_, t| t == 2).unwrap();
        let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
        let v = test_t2_low_degree(&mut o, env.graph(), 0.5, 3).unwrap();
        assert_eq!(v.decision, Decision::Reject);
        match v.witness.as_ref().unwrap() {
            Witness::Direct {
                violation,
                black_neighbor,
            } => {
                assert_eq!(violation.kind, ViolationKind::TypeII);
                assert!(black_neighbor.is_none());
            }
            other => panic!("unexpected witness {other:?}"),
        }
        assert!(verify_witness(&env, v.witness.as_ref().unwrap()));
    }

    #[test]
    fn low_degree_respects_budget_and_determinism() {
        let env = member_env(30);
        let run = |seed| {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive().enforcing());
            let v = test_t2_low_degree(&mut o, env.graph(), 0.07, seed).unwrap();
            (v.clone(), o.queries_used())
        };
        let (v1, q1) = run(9);
        let (v2, q2) = run(9);
        assert_eq!(v1, v2);
        assert_eq!(q1, q2);
        assert!(q1 <= budget_t2_low_degree(0.07, env.graph().max_degree()));
        let (v3, _) = run(10);
        assert_eq!(v3.decision, Decision::Accept);
    }

    #[test]
    fn low_degree_requires_horizon_two() {
        let g = Arc::new(Graph::path(4));
        let env = Environment::all_white(g, 3).unwrap();
        let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
        let err = test_t2_low_degree(&mut o, env.graph(), 0.1, 0).unwrap_err();
        assert!(matches!(err, TesterError::HorizonNotTwo(3)));
    }

    #[test]
    fn large_degree_accepts_members() {
        let env = member_env(30);
        for seed in 0..15 {
            let mut o = QueryOracle::new(&env, OraclePolicy::adaptive());
            let v = test_t2_large_degree(&mut o, env.graph(), 0.2, seed).unwrap();
            assert_eq!(v.decision, Decision::Accept);
        }
    }

    #[test]
    fn large_degree_first_check_rejects_while_time_conforming() {
        // dense violations: all black at 1, all white at 2; at this size the
        // phase-1 samples cover V, so the cross-check fires before the
        // filtered pass and the run never returns to step 1
        let g = Arc::new(Graph::complete(10));
        let env = Environment::from_fn(g, 2, |_, t| t == 1).unwrap();
        for seed in 0..10 {
            let mut o = QueryOracle::new(&env, OraclePolicy::adaptive());
            let v = test_t2_large_degree(&mut o, env.graph(), 0.3, seed).unwrap();
            assert_eq!(v.decision, Decision::Reject);
            assert!(v.time_conforming);
            assert!(verify_witness(&env, v.witness.as_ref().unwrap()));
        }
    }

    #[test]
    fn large_degree_filtered_pass_flags_type_ii_and_conformity() {
        // all white at 1, all black at 2: nothing enters the known-black or
        // known-white sets, so rejection comes from the filtered pass, whose
        // step-1 queries break time-conformity
        let g = Arc::new(Graph::cycle(14));
        let env = Environment::from_fn(g, 2, |_, t| t == 2).unwrap();
        for seed in 0..10 {
            let mut o = QueryOracle::new(&env, OraclePolicy::adaptive());
            let v = test_t2_large_degree(&mut o, env.graph(), 0.4, seed).unwrap();
            assert_eq!(v.decision, Decision::Reject);
            assert!(!v.time_conforming);
            let w = v.witness.as_ref().unwrap();
            assert!(matches!(w, Witness::FilteredTypeTwo { .. }));
            assert!(verify_witness(&env, w));
        }
    }

    #[test]
    fn large_degree_is_deterministic_per_seed() {
        let env = member_env(24);
        let run = |seed| {
            let mut o = QueryOracle::new(&env, OraclePolicy::adaptive());
            let v = test_t2_large_degree(&mut o, env.graph(), 0.3, seed).unwrap();
            (v, o.transcript().summary.queries)
        };
        assert_eq!(run(5), run(5));
    }
}
