//! Trivial tester for horizons long enough that every component has
//! settled: once T >= (1 + 2/eps) * diameter, a component representative's
//! color at step T determines the whole component's story. A black
//! representative means the component was black from step diameter + 1 at
//! the latest; a white one means it was never black at all.

use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::Fact;
use crate::graph::Graph;
use crate::oracle::QueryOracle;

use super::{
    check_eps, check_graph, sample_pairs, verdict_from, TesterError, Verdict, Witness,
};

/// Queries one representative per connected component at step T, then
/// checks ⌈4/eps⌉ uniform pairs from the settled range t > diameter against
/// the representative colors, and another ⌈4/eps⌉ uniform pairs from the
/// full range against the white-representative components. Non-adaptive
/// and time-conforming. Requires every vertex self-looped and
/// T >= (1 + 2/eps) * max component diameter.
pub fn test_long_horizon(
    oracle: &mut QueryOracle,
    g: &Graph,
    eps: f64,
    seed: u64,
) -> Result<Verdict, TesterError> {
    check_eps(eps)?;
    check_graph(oracle, g)?;
    if !g.all_self_looped() {
        return Err(TesterError::MissingSelfLoops);
    }
    let horizon = oracle.horizon();
    let diam = g.max_component_diameter();
    if (horizon as f64) < (1.0 + 2.0 / eps) * diam as f64 {
        return Err(TesterError::HorizonVsDiameter {
            t: horizon,
            diam,
            eps,
        });
    }
    let n = g.vertex_count();
    let components = g.connected_components();
    let mut comp_of = vec![0u32; n];
    for (i, comp) in components.iter().enumerate() {
        for &v in comp {
            comp_of[v as usize] = i as u32;
        }
    }
    let reps: Vec<u32> = components.iter().map(|c| c[0]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair_count = (4.0 / eps).ceil() as u64;
    let settled = sample_pairs(&mut rng, n, diam + 1, horizon, pair_count);
    let full = sample_pairs(&mut rng, n, 1, horizon, pair_count);

    let mut cells: BTreeSet<(u32, u32)> = BTreeSet::new();
    for &r in &reps {
        cells.insert((horizon, r));
    }
    for &(v, t) in settled.iter().chain(full.iter()) {
        cells.insert((t, v));
    }
    oracle.register(cells.iter().map(|&(t, v)| (v, t)))?;
    let mut val: HashMap<(u32, u32), bool> = HashMap::new();
    for &(t, v) in &cells {
        val.insert((v, t), oracle.query(v, t)?);
    }
    let rep_black: Vec<bool> = reps.iter().map(|&r| val[&(r, horizon)]).collect();

    let mut witness = None;
    for &(v, t) in &settled {
        let c = comp_of[v as usize] as usize;
        let rep = reps[c];
        let at = val[&(v, t)];
        if rep_black[c] && !at {
            witness = Some(Witness::InfeasibleFacts {
                kind: "component-black".into(),
                facts: vec![Fact::new(rep, horizon, true), Fact::new(v, t, false)],
            });
            break;
        }
        if !rep_black[c] && at {
            witness = Some(Witness::InfeasibleFacts {
                kind: "component-white".into(),
                facts: vec![Fact::new(rep, horizon, false), Fact::new(v, t, true)],
            });
            break;
        }
    }
    if witness.is_none() {
        for &(v, t) in &full {
            let c = comp_of[v as usize] as usize;
            if !rep_black[c] && val[&(v, t)] {
                witness = Some(Witness::InfeasibleFacts {
                    kind: "component-white".into(),
                    facts: vec![Fact::new(reps[c], horizon, false), Fact::new(v, t, true)],
                });
                break;
            }
        }
    }
    Ok(verdict_from(oracle, witness, seed))
}
