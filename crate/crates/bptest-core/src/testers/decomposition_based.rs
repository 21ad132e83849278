//! Decomposition-based tester for long horizons on fully self-looped
//! graphs. It reads the cut of a low-diameter decomposition at a single
//! early step t1, checks that reading for feasibility, and turns it into
//! per-vertex prediction windows: v must stay white before step t1 +
//! alpha(v) and must be black from step t1 + beta(v) on. A uniform pair
//! sample over steps >= t1 is then checked against those windows, which
//! sidesteps the Δ^T blowup of the local tester.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{low_diameter_decomposition, DecompError, Decomposition};
use crate::env::{feasible_partial, Fact};
use crate::graph::{Graph, VertexSet};
use crate::oracle::QueryOracle;

use super::{
    check_eps, check_graph, sample_pairs, verdict_from, TesterError, Verdict, Witness,
};

/// Per-run facts about the decomposition side of the tester, for budget
/// accounting and diagnostics.
#[derive(Clone, Debug)]
pub struct DecompositionRunInfo {
    pub t1: u32,
    pub decomposition: Decomposition,
    /// |B|: endpoints of cut edges, the vertices read at step t1.
    pub boundary_size: u64,
    /// Clusters where a white cut does not pin the interior white: some
    /// interior vertex sits at distance >= t1 from every cut vertex (or the
    /// cluster is a whole graph component of diameter >= t1). Their
    /// interiors are treated as potentially black.
    pub suspicious_clusters: Vec<u32>,
    pub max_cluster_diameter: u32,
}

/// Runs the decomposition tester with the default cut sampler.
pub fn test_gen_t_decomposition(
    oracle: &mut QueryOracle,
    g: &Graph,
    eps: f64,
    seed: u64,
) -> Result<Verdict, TesterError> {
    test_gen_t_decomposition_detailed(oracle, g, eps, seed, |g, d, s| {
        low_diameter_decomposition(g, d, &mut ChaCha8Rng::seed_from_u64(s))
    })
    .map(|(verdict, _)| verdict)
}

/// As `test_gen_t_decomposition`, but with a caller-supplied decomposer
/// (graph, target diameter, seed) and the decomposition-side run info
/// returned alongside the verdict.
pub fn test_gen_t_decomposition_detailed(
    oracle: &mut QueryOracle,
    g: &Graph,
    eps: f64,
    seed: u64,
    decomposer: impl FnOnce(&Graph, u32, u64) -> Result<Decomposition, DecompError>,
) -> Result<(Verdict, DecompositionRunInfo), TesterError> {
    check_eps(eps)?;
    check_graph(oracle, g)?;
    if !g.all_self_looped() {
        return Err(TesterError::MissingSelfLoops);
    }
    let horizon = oracle.horizon();
    if (horizon as f64) < 4.0 / eps {
        return Err(TesterError::HorizonVsEps { t: horizon, eps });
    }
    let t1 = ((eps * horizon as f64 / 4.0).floor() as u32).clamp(1, horizon);
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dec_seed: u64 = rng.gen();
    let dec = decomposer(g, t1, dec_seed)?;

    let mut in_boundary = vec![false; n];
    for &(u, w) in &dec.cut_edges {
        in_boundary[u as usize] = true;
        in_boundary[w as usize] = true;
    }
    let boundary: Vec<u32> = (0..n as u32).filter(|&v| in_boundary[v as usize]).collect();
    let clusters = dec.components();

    // A white cut pins a cluster interior white only if every interior
    // vertex is within t1 - 1 of the cut (for a cut-free cluster: only if
    // the whole component has diameter <= t1 - 1). Otherwise an unseen
    // black could hide inside, so the interior must count as potentially
    // black when predicting white windows.
    let mut suspicious_clusters = Vec::new();
    let mut max_cluster_diameter = 0u32;
    for (i, cluster) in clusters.iter().enumerate() {
        let set: VertexSet = cluster.iter().copied().collect();
        let diam = g.weak_diameter(&set)?;
        max_cluster_diameter = max_cluster_diameter.max(diam);
        let cut_members: Vec<u32> = cluster
            .iter()
            .copied()
            .filter(|&v| in_boundary[v as usize])
            .collect();
        let pinned = if cut_members.is_empty() {
            diam + 1 <= t1
        } else {
            let (dist, _) = g.bfs(cut_members.iter().copied());
            cluster
                .iter()
                .all(|&v| matches!(dist[v as usize], Some(d) if d + 1 <= t1))
        };
        if !pinned {
            suspicious_clusters.push(i as u32);
        }
    }

    // query plan: cut at t1, sampled vertices at t1, sampled pairs; one
    // deduplicated batch in step order
    let budget_pairs = (4.0 / eps).ceil() as u64;
    let pairs = sample_pairs(&mut rng, n, t1, horizon, budget_pairs);
    let mut cells: BTreeSet<(u32, u32)> = BTreeSet::new();
    for &b in &boundary {
        cells.insert((t1, b));
    }
    for &(v, t) in &pairs {
        cells.insert((t1, v));
        cells.insert((t, v));
    }
    oracle.register(cells.iter().map(|&(t, v)| (v, t)))?;
    let mut val: HashMap<(u32, u32), bool> = HashMap::new();
    for &(t, v) in &cells {
        val.insert((v, t), oracle.query(v, t)?);
    }

    let info = |dec: Decomposition, suspicious: Vec<u32>| DecompositionRunInfo {
        t1,
        decomposition: dec,
        boundary_size: boundary.len() as u64,
        suspicious_clusters: suspicious,
        max_cluster_diameter,
    };

    let black_cut: VertexSet = boundary
        .iter()
        .copied()
        .filter(|&b| val[&(b, t1)])
        .collect();
    let white_cut: VertexSet = boundary
        .iter()
        .copied()
        .filter(|&b| !val[&(b, t1)])
        .collect();
    if !feasible_partial(g, t1, &black_cut, &white_cut)? {
        let facts: Vec<Fact> = boundary
            .iter()
            .map(|&b| Fact::new(b, t1, val[&(b, t1)]))
            .collect();
        let witness = Witness::InfeasibleFacts {
            kind: "infeasible-cut".into(),
            facts,
        };
        let verdict = verdict_from(oracle, Some(witness), seed);
        return Ok((verdict, info(dec, suspicious_clusters)));
    }

    // alpha sources: everything that may already be black at t1 (black cut
    // vertices plus the interiors of clusters that are not pinned white);
    // beta sources: everything certainly black at t1
    let mut alpha_sources: BTreeSet<u32> = BTreeSet::new();
    let mut beta_sources: BTreeSet<u32> = BTreeSet::new();
    for (i, cluster) in clusters.iter().enumerate() {
        let cluster_blacks: Vec<u32> = cluster
            .iter()
            .copied()
            .filter(|v| black_cut.contains(v))
            .collect();
        beta_sources.extend(cluster_blacks.iter().copied());
        if !cluster_blacks.is_empty() || suspicious_clusters.contains(&(i as u32)) {
            alpha_sources.extend(cluster_blacks.iter().copied());
            alpha_sources.extend(
                cluster
                    .iter()
                    .copied()
                    .filter(|&v| !in_boundary[v as usize]),
            );
        }
    }
    let empty = || (vec![None; n], vec![None; n]);
    let (alpha, _) = if alpha_sources.is_empty() {
        empty()
    } else {
        g.bfs(alpha_sources.iter().copied())
    };
    let (beta, beta_origin) = if beta_sources.is_empty() {
        empty()
    } else {
        g.bfs(beta_sources.iter().copied())
    };

    let pinned_everywhere = suspicious_clusters.is_empty();
    for v in 0..n {
        if let Some(b) = beta[v] {
            let a = alpha[v].expect("alpha sources contain all beta sources");
            assert!(a <= b, "white window must not pass the black deadline");
            if pinned_everywhere {
                assert!(
                    b - a <= max_cluster_diameter,
                    "prediction window wider than the largest cluster"
                );
            }
        }
    }

    let mut witness = None;
    for &(v, t) in &pairs {
        let at_t1 = val[&(v, t1)];
        let at_t = val[&(v, t)];
        if at_t1 {
            if !at_t {
                witness = Some(Witness::InfeasibleFacts {
                    kind: "monotone".into(),
                    facts: vec![Fact::new(v, t1, true), Fact::new(v, t, false)],
                });
                break;
            }
            continue;
        }
        let before_alpha = match alpha[v as usize] {
            None => true,
            Some(a) => t < t1 + a,
        };
        if before_alpha {
            if at_t {
                // the cut reading leaves no black within reach of v by t
                let mut facts: Vec<Fact> = boundary
                    .iter()
                    .map(|&b| Fact::new(b, t1, val[&(b, t1)]))
                    .collect();
                facts.push(Fact::new(v, t1, false));
                facts.push(Fact::new(v, t, true));
                witness = Some(Witness::InfeasibleFacts {
                    kind: "early-black".into(),
                    facts,
                });
                break;
            }
        } else if let Some(b) = beta[v as usize] {
            if t >= t1 + b && !at_t {
                let src = beta_origin[v as usize].expect("finite beta has an origin");
                witness = Some(Witness::InfeasibleFacts {
                    kind: "late-white".into(),
                    facts: vec![Fact::new(src, t1, true), Fact::new(v, t, false)],
                });
                break;
            }
        }
    }
    let verdict = verdict_from(oracle, witness, seed);
    Ok((verdict, info(dec, suspicious_clusters)))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::env::Environment;
    use crate::graph::vset;
    use crate::oracle::OraclePolicy;
    use crate::testers::witness::verify_witness;
    use crate::testers::{budget_gen_t_decomposition, Decision};

    fn looped_path(n: usize) -> Arc<Graph> {
        Arc::new(Graph::path(n).add_self_loops())
    }

    #[test]
    fn accepts_members() {
        let g = looped_path(20);
        // T=40, eps=0.5 gives t1=5; odd t1 keeps every cluster pinned
        for blacks in [vset([]), vset([0]), vset([3, 17])] {
            let env = Environment::evolve(Arc::clone(&g), &blacks, 40).unwrap();
            for seed in 0..30 {
                let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive().enforcing());
                let (v, info) =
                    test_gen_t_decomposition_detailed(&mut o, env.graph(), 0.5, seed, |g, d, s| {
                        low_diameter_decomposition(g, d, &mut ChaCha8Rng::seed_from_u64(s))
                    })
                    .unwrap();
                assert_eq!(v.decision, Decision::Accept, "seed {seed}");
                assert!(v.time_conforming);
                assert!(info.suspicious_clusters.is_empty());
                assert!(v.queries_used <= budget_gen_t_decomposition(0.5, info.boundary_size));
            }
        }
    }

    #[test]
    fn rejects_late_blackening_with_early_black_witness() {
        // all white at t1=5, everything black from step 20 on: any sampled
        // pair at t >= 20 contradicts the all-white cut reading
        let g = looped_path(20);
        let env = Environment::from_fn(g, 40, |_, t| t >= 20).unwrap();
        let mut rejects = 0;
        for seed in 0..50 {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            let v = test_gen_t_decomposition(&mut o, env.graph(), 0.5, seed).unwrap();
            if v.decision == Decision::Reject {
                rejects += 1;
                let w = v.witness.as_ref().unwrap();
                assert!(matches!(
                    w,
                    Witness::InfeasibleFacts { kind, .. } if kind == "early-black"
                ));
                assert!(verify_witness(&env, w));
            }
        }
        // per-seed miss probability is (15/36)^8, about 1e-3
        assert!(rejects >= 45, "rejected only {rejects}/50");
    }

    #[test]
    fn rejects_unblackening_with_monotone_witness() {
        let g = looped_path(20);
        let env = Environment::from_fn(g, 40, |_, t| t <= 10).unwrap();
        let mut rejects = 0;
        for seed in 0..50 {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            let v = test_gen_t_decomposition(&mut o, env.graph(), 0.5, seed).unwrap();
            if v.decision == Decision::Reject {
                rejects += 1;
                let w = v.witness.as_ref().unwrap();
                assert!(matches!(
                    w,
                    Witness::InfeasibleFacts { kind, .. } if kind == "monotone"
                ));
                assert!(verify_witness(&env, w));
            }
        }
        assert!(rejects >= 45, "rejected only {rejects}/50");
    }

    #[test]
    fn rejects_infeasible_cut_deterministically() {
        // singleton clusters observe every vertex at t1; a lone black cell
        // at (10, 5) with an all-white surrounding is infeasible
        let g = looped_path(20);
        let env = Environment::from_fn(g, 40, |v, t| v == 10 && t == 5).unwrap();
        let singletons = |g: &Graph, d: u32, _s: u64| {
            Ok(Decomposition {
                d,
                cut_edges: g
                    .edges()
                    .into_iter()
                    .filter(|&(u, w)| u != w)
                    .collect(),
                component_id: (0..g.vertex_count() as u32).collect(),
                alpha_observed: 1.0,
            })
        };
        for seed in 0..10 {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            let (v, info) =
                test_gen_t_decomposition_detailed(&mut o, env.graph(), 0.5, seed, singletons)
                    .unwrap();
            assert_eq!(v.decision, Decision::Reject);
            let w = v.witness.as_ref().unwrap();
            assert!(matches!(
                w,
                Witness::InfeasibleFacts { kind, .. } if kind == "infeasible-cut"
            ));
            assert!(verify_witness(&env, w));
            assert_eq!(info.boundary_size, 20);
            assert!(v.queries_used <= budget_gen_t_decomposition(0.5, 20));
        }
    }

    #[test]
    fn rejects_stuck_white_with_late_white_witness() {
        // {0..4} black at every step is a plausible t1 = 5 reading (the
        // ball of radius 4 around 0), but a member would keep spreading;
        // singleton clusters make beta finite everywhere, so the stuck
        // whites beyond the ball get caught
        let g = looped_path(20);
        let env = Environment::from_fn(g, 40, |v, _| v <= 4).unwrap();
        let singletons = |g: &Graph, d: u32, _s: u64| {
            Ok(Decomposition {
                d,
                cut_edges: g
                    .edges()
                    .into_iter()
                    .filter(|&(u, w)| u != w)
                    .collect(),
                component_id: (0..g.vertex_count() as u32).collect(),
                alpha_observed: 1.0,
            })
        };
        let mut rejects = 0;
        for seed in 0..60 {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            let (v, _) =
                test_gen_t_decomposition_detailed(&mut o, env.graph(), 0.5, seed, singletons)
                    .unwrap();
            if v.decision == Decision::Reject {
                rejects += 1;
                let w = v.witness.as_ref().unwrap();
                assert!(matches!(
                    w,
                    Witness::InfeasibleFacts { kind, .. } if kind == "late-white"
                ));
                assert!(verify_witness(&env, w));
            }
        }
        // a pair (v, t) with v >= 5 rejects iff t >= 5 + dist(v, 4), which
        // covers well over half of the 20 x 36 pair grid
        assert!(rejects >= 50, "rejected only {rejects}/60");
    }

    #[test]
    fn unpinned_cluster_interior_is_not_predicted_white() {
        // one cluster covering a diameter-8 path with an even t1 = 4: a
        // member can hide a black deep inside while the (empty) cut says
        // nothing. The reachability guard must keep the tester from
        // predicting white and rejecting the member.
        let g = looped_path(9);
        let env = Environment::evolve(Arc::clone(&g), &vset([0]), 40).unwrap();
        let whole = |g: &Graph, d: u32, _s: u64| {
            Ok(Decomposition {
                d,
                cut_edges: Vec::new(),
                component_id: vec![0; g.vertex_count()],
                alpha_observed: 0.0,
            })
        };
        for seed in 0..100 {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            let (v, info) =
                test_gen_t_decomposition_detailed(&mut o, env.graph(), 0.4, seed, whole).unwrap();
            assert_eq!(info.t1, 4);
            assert_eq!(info.suspicious_clusters, vec![0]);
            assert_eq!(v.decision, Decision::Accept, "seed {seed}");
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        let unlooped = Arc::new(Graph::path(8));
        let env = Environment::all_white(Arc::clone(&unlooped), 40).unwrap();
        let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
        assert!(matches!(
            test_gen_t_decomposition(&mut o, &unlooped, 0.5, 0),
            Err(TesterError::MissingSelfLoops)
        ));

        let g = looped_path(8);
        let short = Environment::all_white(Arc::clone(&g), 6).unwrap();
        let mut o = QueryOracle::new(&short, OraclePolicy::non_adaptive());
        assert!(matches!(
            test_gen_t_decomposition(&mut o, &g, 0.5, 0),
            Err(TesterError::HorizonVsEps { .. })
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let g = looped_path(16);
        let env = Environment::evolve(g, &vset([5]), 32).unwrap();
        let run = |seed| {
            let mut o = QueryOracle::new(&env, OraclePolicy::non_adaptive());
            test_gen_t_decomposition(&mut o, env.graph(), 0.5, seed).unwrap()
        };
        assert_eq!(run(21), run(21));
    }
}
