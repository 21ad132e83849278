//! Rejection witnesses and their replay check. Every witness must encode an
//! inconsistency between values the oracle actually answered and the 1-BP
//! rule, so a rejection can be audited without trusting the tester.

use serde::{Deserialize, Serialize};

use crate::env::{facts_admit_member, Environment, Fact, Violation, ViolationKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    /// A violating cell whose full neighborhood at the previous step was
    /// answered. For a Type I violation `black_neighbor` names one answered
    /// black neighbor; for Type II every neighbor was answered white.
    Direct {
        violation: Violation,
        black_neighbor: Option<u32>,
    },
    /// A Type II violation at (v, 2) where part of N(v) was answered white
    /// at step 1 directly and the rest is forced white at step 1 by an
    /// answered white cell at step 2: each pair (w, x) has x a neighbor of
    /// w with ENV(x, 2) = 0, so w cannot have been black at step 1.
    FilteredTypeTwo {
        v: u32,
        seen_white_step1: Vec<u32>,
        inferred_white: Vec<(u32, u32)>,
    },
    /// A set of answered cells no member environment can match. `kind`
    /// labels the check that produced it: "infeasible-cut", "monotone",
    /// "early-black", "late-white", "component-white", or
    /// "component-black".
    InfeasibleFacts { kind: String, facts: Vec<Fact> },
}

/// Replays a witness against the environment it was produced from. Returns
/// true iff the cited cells carry the claimed values and those values are
/// genuinely inconsistent with the 1-BP rule.
pub fn verify_witness(env: &Environment, witness: &Witness) -> bool {
    let g = env.graph();
    let n = g.vertex_count();
    let in_range = |v: u32, t: u32| (v as usize) < n && t >= 1 && t <= env.horizon();
    match witness {
        Witness::Direct {
            violation,
            black_neighbor,
        } => {
            let Violation { v, t, kind } = *violation;
            if !in_range(v, t) || t < 2 {
                return false;
            }
            match kind {
                ViolationKind::TypeI => {
                    let Some(u) = *black_neighbor else {
                        return false;
                    };
                    !env.get(v, t) && g.adj(v).contains(&u) && env.get(u, t - 1)
                }
                ViolationKind::TypeII => {
                    env.get(v, t) && g.adj(v).iter().all(|&u| !env.get(u, t - 1))
                }
            }
        }
        Witness::FilteredTypeTwo {
            v,
            seen_white_step1,
            inferred_white,
        } => {
            if !in_range(*v, 2) || env.horizon() < 2 || !env.get(*v, 2) {
                return false;
            }
            let nbrs = g.adj(*v);
            let seen_ok = seen_white_step1
                .iter()
                .all(|&u| nbrs.contains(&u) && !env.get(u, 1));
            // x white at step 2 forces its neighbor w white at step 1
            let inferred_ok = inferred_white.iter().all(|&(w, x)| {
                nbrs.contains(&w) && g.adj(w).contains(&x) && in_range(x, 2) && !env.get(x, 2)
            });
            let covered: std::collections::BTreeSet<u32> = seen_white_step1
                .iter()
                .copied()
                .chain(inferred_white.iter().map(|&(w, _)| w))
                .collect();
            seen_ok && inferred_ok && nbrs.iter().all(|u| covered.contains(u))
        }
        Witness::InfeasibleFacts { facts, .. } => {
            let cited_match = facts
                .iter()
                .all(|f| in_range(f.v, f.t) && env.get(f.v, f.t) == f.value);
            cited_match && matches!(facts_admit_member(g, facts), Ok(false))
        }
    }
}
