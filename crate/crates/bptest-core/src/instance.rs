//! Instance generators: random members and perturbations for soundness and
//! completeness experiments, plus the adversarial constructions behind the
//! query lower bounds (random bipartite expanders, the one-sided hard
//! distribution, and the indistinguishable pair D_Y / D_N).

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{EnvError, Environment};
use crate::graph::{Graph, GraphError, VertexSet};

/// Whole-instance resamples before a generator gives up.
const RESAMPLE_CAP: u32 = 100;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error("graph is not bipartite between its two vertex halves")]
    NotBipartite,
    #[error("{0} exceeded {RESAMPLE_CAP} resampling attempts")]
    RetriesExhausted(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// A random balanced bipartite multigraph (union of delta perfect matchings)
/// made simple by edge swaps. Left vertices are 0..side, right vertices are
/// side..2*side; every vertex ends up with degree exactly delta.
#[derive(Clone, Debug)]
pub struct BipartiteExpander {
    pub graph: Graph,
    pub side: u32,
    pub delta: u32,
    pub seed: u64,
    pub resamples: u32,
}

/// Swaps a duplicated (left, right) pair against a random other pair until
/// the multigraph is simple. Swaps preserve both endpoints' degrees and the
/// bipartite orientation. Returns None when the step budget runs out.
fn simplify_matching_union(edges: &mut [(u32, u32)], rng: &mut impl Rng) -> Option<()> {
    let mut counts: HashMap<(u32, u32), u32> = HashMap::new();
    for &e in edges.iter() {
        *counts.entry(e).or_insert(0) += 1;
    }
    let mut dup_indices: Vec<usize> = (0..edges.len())
        .filter(|&i| counts[&edges[i]] > 1)
        .collect();
    let step_cap = 50 * edges.len().max(1);
    for _ in 0..step_cap {
        dup_indices.retain(|&i| counts[&edges[i]] > 1);
        let Some(&i) = dup_indices.choose(rng) else {
            return Some(());
        };
        let j = rng.gen_range(0..edges.len());
        let (u, v) = edges[i];
        let (x, y) = edges[j];
        // propose (u, y) and (x, v); both stay left-right pairs
        if u == x || v == y || counts.contains_key(&(u, y)) || counts.contains_key(&(x, v)) {
            continue;
        }
        for old in [(u, v), (x, y)] {
            let c = counts.get_mut(&old).unwrap();
            *c -= 1;
            if *c == 0 {
                counts.remove(&old);
            }
        }
        counts.insert((u, y), 1);
        counts.insert((x, v), 1);
        edges[i] = (u, y);
        edges[j] = (x, v);
    }
    None
}

/// Samples the union of delta uniform perfect matchings on side+side
/// vertices and simplifies it. The whole draw is retried when simplification
/// stalls; the retry count is recorded on the result.
pub fn sample_bipartite_expander(
    side: u32,
    delta: u32,
    seed: u64,
) -> Result<BipartiteExpander, InstanceError> {
    if delta < 1 || delta >= side {
        return Err(InstanceError::BadParams(format!(
            "need 1 <= delta < side, got delta = {delta}, side = {side}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for resamples in 0..RESAMPLE_CAP {
        let mut edges: Vec<(u32, u32)> = Vec::with_capacity((side * delta) as usize);
        let mut partners: Vec<u32> = (0..side).collect();
        for _ in 0..delta {
            partners.shuffle(&mut rng);
            edges.extend((0..side).map(|l| (l, side + partners[l as usize])));
        }
        if simplify_matching_union(&mut edges, &mut rng).is_none() {
            continue;
        }
        let graph = Graph::from_edges(2 * side as usize, edges.iter().copied())?;
        debug_assert!(graph.vertices().all(|v| graph.degree(v) == delta as usize));
        return Ok(BipartiteExpander {
            graph,
            side,
            delta,
            seed,
            resamples,
        });
    }
    Err(InstanceError::RetriesExhausted("expander sampling"))
}

/// Identifies left vertex i with right vertex side+i, turning the bipartite
/// expander into a graph on `side` vertices. A matching edge (i, side+i)
/// becomes a self-loop; coinciding folded edges are merged, so degrees land
/// in [delta, 2*delta].
pub fn fold_expander(exp: &BipartiteExpander) -> Graph {
    let folded: BTreeSet<(u32, u32)> = exp
        .graph
        .edges()
        .into_iter()
        .map(|(l, r)| {
            let (a, b) = (l, r - exp.side);
            (a.min(b), a.max(b))
        })
        .collect();
    let edges: Vec<(u32, u32)> = folded.into_iter().collect();
    Graph::from_edges(exp.side as usize, edges).expect("fold of a regular bipartite graph")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

fn check_halves_bipartite(g: &Graph) -> Result<u32, InstanceError> {
    let n = g.vertex_count();
    if n == 0 || n % 2 != 0 {
        return Err(InstanceError::NotBipartite);
    }
    let half = (n / 2) as u32;
    for (u, v) in g.edges() {
        if (u < half) == (v < half) {
            return Err(InstanceError::NotBipartite);
        }
    }
    Ok(half)
}

fn subsets_up_to(total: u64, max_size: u32, cap: u64) -> u64 {
    let mut sum: u64 = 0;
    let mut binom: u128 = 1;
    for k in 1..=max_size as u64 {
        binom = binom * (total + 1 - k) as u128 / k as u128;
        sum = sum.saturating_add(binom.min(cap as u128) as u64);
        if sum >= cap {
            return cap;
        }
    }
    sum
}

/// Worst observed neighborhood expansion |N(S)|/|S| over subsets of one side
/// with |S| <= max_size. Enumeration is exhaustive whenever the number of
/// candidate sets fits in `trials`, otherwise that many sets are sampled.
pub fn expansion_probe(
    g: &Graph,
    side: Side,
    max_size: u32,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<f64, InstanceError> {
    let half = check_halves_bipartite(g)?;
    if max_size < 1 || max_size > half {
        return Err(InstanceError::BadParams(format!(
            "need 1 <= max_size <= {half}, got {max_size}"
        )));
    }
    if trials < 1 {
        return Err(InstanceError::BadParams("trials must be positive".into()));
    }
    let base = match side {
        Side::Left => 0,
        Side::Right => half,
    };
    let ratio_of = |s: &[u32]| -> f64 {
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        for &v in s {
            seen.extend(g.adj(base + v).iter().copied());
        }
        seen.len() as f64 / s.len() as f64
    };
    let mut worst = f64::INFINITY;
    if subsets_up_to(half as u64, max_size, trials + 1) <= trials {
        // lexicographic enumeration of every k-subset, k = 1..=max_size
        for k in 1..=max_size as usize {
            let mut idx: Vec<u32> = (0..k as u32).collect();
            loop {
                worst = worst.min(ratio_of(&idx));
                let mut i = k;
                while i > 0 && idx[i - 1] == half - (k - i + 1) as u32 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..k {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
    } else {
        for _ in 0..trials {
            let k = rng.gen_range(1..=max_size) as usize;
            let s: Vec<u32> = rand::seq::index::sample(rng, half as usize, k)
                .into_iter()
                .map(|v| v as u32)
                .collect();
            worst = worst.min(ratio_of(&s));
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LbVariant {
    OneSided,
    TwoSided,
}

/// Expansion guarantee for one side: sets of at most a gamma fraction of the
/// side expand by at least (delta - rho). `gamma_limit` is the largest
/// admissible gamma for this rho; outside that regime (or when rho <= 1) the
/// guarantee is vacuous and `admissible` is false. Never clamped silently.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideBound {
    pub gamma: f64,
    pub rho: f64,
    pub gamma_limit: f64,
    pub admissible: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbParams {
    pub variant: LbVariant,
    pub b: f64,
    pub r: f64,
    pub left: SideBound,
    pub right: SideBound,
}

fn gamma_limit(rho: f64, delta: f64) -> f64 {
    // ((1/2e)(rho/2e delta^2)^rho)^(1/(rho-1)), evaluated in log space to
    // dodge underflow at large rho
    if rho <= 1.0 {
        return 0.0;
    }
    let ln = (-(2.0 * std::f64::consts::E).ln()
        + rho * (rho / (2.0 * std::f64::consts::E * delta * delta)).ln())
        / (rho - 1.0);
    ln.exp().min(0.5)
}

fn side_bound(gamma: f64, rho: f64, delta: f64) -> SideBound {
    let limit = gamma_limit(rho, delta);
    SideBound {
        gamma,
        rho,
        gamma_limit: limit,
        admissible: rho > 1.0 && gamma <= limit,
    }
}

/// Parameters of the lower-bound expander family for a given exponent b in
/// eps = a * delta^b / n: the set-size fractions, expansion losses, and the
/// intersection bound r from the case analysis on b.
pub fn lb_params(
    variant: LbVariant,
    b: f64,
    delta: u32,
    n: u64,
    eps: f64,
) -> Result<LbParams, InstanceError> {
    if b < 1.0 {
        return Err(InstanceError::BadParams(format!("need b >= 1, got {b}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(InstanceError::BadParams(format!(
            "need eps in (0, 1], got {eps}"
        )));
    }
    if delta < 2 || n < 2 {
        return Err(InstanceError::BadParams(
            "need delta >= 2 and n >= 2".into(),
        ));
    }
    let d = delta as f64;
    let nf = n as f64;
    let e3 = std::f64::consts::E.powi(3);
    let a = eps * nf / d.powf(b);
    let (r, left, right) = match variant {
        LbVariant::OneSided => {
            let r = if b > 2.0 {
                1.0 + 4.0 / (b - 2.0)
            } else if b == 2.0 {
                1.0 + 8.0 * e3 * d.ln()
            } else {
                let alpha = 2.0 * 1.0f64.max(1.0 / a);
                1.0 + 16.0 * alpha * e3 * d.powf(2.0 - b)
            };
            let beta = 1.0 / 48.0;
            let left = side_bound(1.0 / (96.0 * std::f64::consts::E * d), beta * d, d);
            let right = side_bound(2.0 / (eps * nf), r, d);
            (r, left, right)
        }
        LbVariant::TwoSided => {
            let r = if b > 3.0 {
                1.0 + 4.0 / (b - 3.0)
            } else if b == 3.0 {
                1.0 + 8.0 * e3 * d.ln()
            } else {
                let alpha = 1.0f64.max(1.0 / a.sqrt());
                1.0 + 16.0 * alpha * e3 * d.powf((3.0 - b) / 2.0)
            };
            let beta = 1.0 / (48.0 * 48.0);
            let alpha = 24.0 * eps;
            let left = side_bound(2.0 * alpha / d, beta * d, d);
            let set_bound = (d / eps).min((nf / (eps * d)).sqrt());
            let right = side_bound(set_bound / nf, r, d);
            (r, left, right)
        }
    };
    Ok(LbParams {
        variant,
        b,
        r,
        left,
        right,
    })
}

/// Hard instance against one-sided T=2 testers, on the folded expander:
/// step 1 all white, step 2 black independently with probability 3*eps.
pub fn gen_one_sided_hard(
    exp: &BipartiteExpander,
    eps: f64,
    rng: &mut impl Rng,
) -> Result<Environment, InstanceError> {
    if !(0.0..=1.0 / 3.0).contains(&eps) {
        return Err(InstanceError::BadParams(format!(
            "need eps in [0, 1/3], got {eps}"
        )));
    }
    let g = Arc::new(fold_expander(exp));
    let black: Vec<bool> = (0..g.vertex_count()).map(|_| rng.gen_bool(3.0 * eps)).collect();
    Ok(Environment::from_fn(g, 2, |v, t| {
        t == 2 && black[v as usize]
    })?)
}

/// The indistinguishable pair for the two-sided lower bound, on the
/// self-looped bipartite expander itself. D_Y picks left set S with
/// probability alpha/(3 delta) per vertex and blackens S at both steps plus
/// N(S) at step 2 (a member). D_N picks S with probability alpha/delta,
/// leaves it white, and blackens each right neighbor of S independently with
/// probability 1/3 at step 2 only. alpha = 24*eps.
pub fn gen_two_sided_pair(
    exp: &BipartiteExpander,
    eps: f64,
    rng: &mut impl Rng,
) -> Result<(Environment, Environment), InstanceError> {
    let alpha = 24.0 * eps;
    if !(eps > 0.0) || alpha / exp.delta as f64 > 1.0 {
        return Err(InstanceError::BadParams(format!(
            "need 0 < 24*eps <= delta, got eps = {eps}, delta = {}",
            exp.delta
        )));
    }
    let g = Arc::new(exp.graph.add_self_loops());
    let side = exp.side;

    let s_yes: VertexSet = (0..side)
        .filter(|_| rng.gen_bool(alpha / (3.0 * exp.delta as f64)))
        .collect();
    let n_of_s = g.neighbor_set(&s_yes)?;
    let yes = Environment::from_fn(g.clone(), 2, |v, t| {
        s_yes.contains(&v) || (t == 2 && n_of_s.contains(&v))
    })?;

    let s_no: Vec<u32> = (0..side)
        .filter(|_| rng.gen_bool(alpha / exp.delta as f64))
        .collect();
    let mut b_no: VertexSet = VertexSet::new();
    for &v in &s_no {
        for &u in exp.graph.adj(v) {
            if rng.gen_bool(1.0 / 3.0) {
                b_no.insert(u);
            }
        }
    }
    let no = Environment::from_fn(g, 2, |v, t| t == 2 && b_no.contains(&v))?;
    Ok((yes, no))
}

/// A member environment evolved from a density-p random initial set.
pub fn random_member(
    graph: Arc<Graph>,
    horizon: u32,
    density: f64,
    rng: &mut impl Rng,
) -> Result<Environment, InstanceError> {
    if !(0.0..=1.0).contains(&density) {
        return Err(InstanceError::BadParams(format!(
            "need density in [0, 1], got {density}"
        )));
    }
    let initial: VertexSet = (0..graph.vertex_count() as u32)
        .filter(|_| rng.gen_bool(density))
        .collect();
    Ok(Environment::evolve(graph, &initial, horizon)?)
}

/// Copy of `env` with `flips` distinct uniformly chosen cells flipped.
pub fn perturb(
    env: &Environment,
    flips: u64,
    rng: &mut impl Rng,
) -> Result<Environment, InstanceError> {
    let cells = env.cells();
    if flips > cells {
        return Err(InstanceError::BadParams(format!(
            "need flips <= {cells}, got {flips}"
        )));
    }
    let n = env.graph().vertex_count() as u64;
    let picked = rand::seq::index::sample(rng, cells as usize, flips as usize);
    let cells: Vec<(u32, u32)> = picked
        .into_iter()
        .map(|i| ((i as u64 % n) as u32, (i as u64 / n) as u32 + 1))
        .collect();
    Ok(env.with_flipped(&cells)?)
}

/// Uniform-ish random d-regular simple graph via the pairing model with
/// swap-based repair of self-loops and duplicates.
pub fn random_regular_graph(
    n: u32,
    d: u32,
    rng: &mut impl Rng,
) -> Result<Graph, InstanceError> {
    if d < 1 || d >= n || (n as u64 * d as u64) % 2 != 0 {
        return Err(InstanceError::BadParams(format!(
            "need 1 <= d < n and n*d even, got n = {n}, d = {d}"
        )));
    }
    'resample: for _ in 0..RESAMPLE_CAP {
        let mut stubs: Vec<u32> = (0..n).flat_map(|v| std::iter::repeat(v).take(d as usize)).collect();
        stubs.shuffle(rng);
        let mut edges: Vec<(u32, u32)> = stubs
            .chunks(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        let mut counts: HashMap<(u32, u32), u32> = HashMap::new();
        for &e in &edges {
            *counts.entry(e).or_insert(0) += 1;
        }
        let is_bad = |e: (u32, u32), counts: &HashMap<(u32, u32), u32>| {
            e.0 == e.1 || counts[&e] > 1
        };
        let step_cap = 100 * edges.len().max(1);
        for _ in 0..step_cap {
            let bad: Vec<usize> = (0..edges.len())
                .filter(|&i| is_bad(edges[i], &counts))
                .collect();
            let Some(&i) = bad.choose(rng) else {
                let g = Graph::from_edges(n as usize, edges.iter().copied())?;
                debug_assert!(g.vertices().all(|v| g.degree(v) == d as usize));
                return Ok(g);
            };
            let j = rng.gen_range(0..edges.len());
            if i == j {
                continue;
            }
            let (u, v) = edges[i];
            let (x, y) = edges[j];
            // two rewirings preserve degrees; pick one at random
            let (a, b) = if rng.gen_bool(0.5) { (x, y) } else { (y, x) };
            let e1 = (u.min(a), u.max(a));
            let e2 = (v.min(b), v.max(b));
            if e1.0 == e1.1 || e2.0 == e2.1 || counts.contains_key(&e1) || counts.contains_key(&e2)
            {
                continue;
            }
            for old in [edges[i], edges[j]] {
                let c = counts.get_mut(&old).unwrap();
                *c -= 1;
                if *c == 0 {
                    counts.remove(&old);
                }
            }
            *counts.entry(e1).or_insert(0) += 1;
            *counts.entry(e2).or_insert(0) += 1;
            edges[i] = e1;
            edges[j] = e2;
        }
        continue 'resample;
    }
    Err(InstanceError::RetriesExhausted("regular graph sampling"))
}
