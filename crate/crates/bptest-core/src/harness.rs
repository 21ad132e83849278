//! Experiment harness: named tester dispatch, graph and instance
//! specifications, repeated-trial reports, and the validation suites the
//! CLI exposes.
//!
//! Everything here is deterministic in the base seed. Trial i of an
//! experiment always runs with seed `base_seed + i`, so a single trial can
//! be replayed in isolation; suites derive per-case seeds by mixing the
//! base seed with the case index.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::{low_diameter_decomposition, verify_decomposition, DecompError};
use crate::env::{
    brute_force_min_flips, feasible_partial, feasible_partial_exhaustive, read_environment,
    EnvError, Environment, Fact, Violation, ViolationKind, BRUTE_FORCE_CAP_DEFAULT,
};
use crate::graph::{read_graph, Graph, GraphError, VertexSet};
use crate::instance::{
    expansion_probe, fold_expander, gen_one_sided_hard, gen_two_sided_pair, perturb,
    random_member, random_regular_graph, sample_bipartite_expander, InstanceError, Side,
};
use crate::oracle::{OraclePolicy, QueryOracle};
use crate::testers::{
    budget_gen_t_decomposition, budget_gen_t_local, budget_long_horizon, budget_t2_large_degree,
    budget_t2_low_degree, test_gen_t_decomposition_detailed, test_gen_t_local,
    test_long_horizon, test_t2_large_degree, test_t2_low_degree, verify_witness, Decision,
    TesterError, Verdict, Witness,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("bad graph spec `{0}`")]
    BadGraphSpec(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Decomposition(#[from] DecompError),
    #[error(transparent)]
    Tester(#[from] TesterError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// splitmix64-style finalizer; decorrelates per-case seeds derived from one
/// base seed without consuming the base RNG stream.
fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Base seed for a run: the BPTEST_SEED environment variable wins over the
/// configured value.
pub fn resolve_base_seed(configured: u64) -> Result<u64, HarnessError> {
    match std::env::var("BPTEST_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            HarnessError::BadConfig(format!("BPTEST_SEED must be a u64, got `{text}`"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(configured),
        Err(e) => Err(HarnessError::BadConfig(format!("BPTEST_SEED: {e}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TesterId {
    T2LowDegree,
    T2LargeDegree,
    GenTLocal,
    GenTDecomposition,
    LongHorizon,
}

impl TesterId {
    pub const ALL: [TesterId; 5] = [
        TesterId::T2LowDegree,
        TesterId::T2LargeDegree,
        TesterId::GenTLocal,
        TesterId::GenTDecomposition,
        TesterId::LongHorizon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TesterId::T2LowDegree => "t2-low-degree",
            TesterId::T2LargeDegree => "t2-large-degree",
            TesterId::GenTLocal => "gen-t-local",
            TesterId::GenTDecomposition => "gen-t-decomposition",
            TesterId::LongHorizon => "long-horizon",
        }
    }
}

impl fmt::Display for TesterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TesterId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|t| t.name() == s)
            .copied()
            .ok_or_else(|| HarnessError::BadConfig(format!("unknown tester `{s}`")))
    }
}

/// Graph family plus parameters, written `path:64`, `cycle:50`,
/// `complete:32`, `grid:20x20`, `regular:256:3`, `expander:500:8` (the
/// folded bipartite expander) or `file:PATH`, with an optional `+loops`
/// suffix that adds a self-loop at every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSource {
    pub kind: SourceKind,
    pub self_loops: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SourceKind {
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    Grid { width: usize, height: usize },
    Regular { n: u32, d: u32 },
    Expander { side: u32, delta: u32 },
    File { path: String },
}

impl SourceKind {
    fn parse(body: &str) -> Option<SourceKind> {
        let (head, rest) = body.split_once(':')?;
        match head {
            "path" => Some(SourceKind::Path { n: rest.parse().ok()? }),
            "cycle" => Some(SourceKind::Cycle { n: rest.parse().ok()? }),
            "complete" => Some(SourceKind::Complete { n: rest.parse().ok()? }),
            "grid" => {
                let (w, h) = rest.split_once('x')?;
                Some(SourceKind::Grid {
                    width: w.parse().ok()?,
                    height: h.parse().ok()?,
                })
            }
            "regular" => {
                let (n, d) = rest.split_once(':')?;
                Some(SourceKind::Regular {
                    n: n.parse().ok()?,
                    d: d.parse().ok()?,
                })
            }
            "expander" => {
                let (side, delta) = rest.split_once(':')?;
                Some(SourceKind::Expander {
                    side: side.parse().ok()?,
                    delta: delta.parse().ok()?,
                })
            }
            "file" if !rest.is_empty() => Some(SourceKind::File { path: rest.to_string() }),
            _ => None,
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKind::Path { n } => write!(f, "path:{n}"),
            SourceKind::Cycle { n } => write!(f, "cycle:{n}"),
            SourceKind::Complete { n } => write!(f, "complete:{n}"),
            SourceKind::Grid { width, height } => write!(f, "grid:{width}x{height}"),
            SourceKind::Regular { n, d } => write!(f, "regular:{n}:{d}"),
            SourceKind::Expander { side, delta } => write!(f, "expander:{side}:{delta}"),
            SourceKind::File { path } => write!(f, "file:{path}"),
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if self.self_loops {
            write!(f, "+loops")?;
        }
        Ok(())
    }
}

impl FromStr for GraphSource {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (body, self_loops) = match s.strip_suffix("+loops") {
            Some(body) => (body, true),
            None => (s, false),
        };
        let kind =
            SourceKind::parse(body).ok_or_else(|| HarnessError::BadGraphSpec(s.to_string()))?;
        Ok(GraphSource { kind, self_loops })
    }
}

impl Serialize for GraphSource {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GraphSource {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

impl GraphSource {
    /// Materializes the graph. Randomized families (`regular`, `expander`)
    /// are drawn deterministically from `seed`; the rest ignore it.
    pub fn build(&self, seed: u64) -> Result<Graph, HarnessError> {
        let g = match &self.kind {
            SourceKind::Path { n } => Graph::path(*n),
            SourceKind::Cycle { n } => Graph::cycle(*n),
            SourceKind::Complete { n } => Graph::complete(*n),
            SourceKind::Grid { width, height } => Graph::grid(*width, *height),
            SourceKind::Regular { n, d } => {
                random_regular_graph(*n, *d, &mut ChaCha8Rng::seed_from_u64(seed))?
            }
            SourceKind::Expander { side, delta } => {
                fold_expander(&sample_bipartite_expander(*side, *delta, seed)?)
            }
            SourceKind::File { path } => read_graph(path)?,
        };
        Ok(if self.self_loops { g.add_self_loops() } else { g })
    }
}

/// What environment to put behind the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSpec {
    /// A member evolved from a density-p random initial set.
    Member { density: f64 },
    /// A member with `flips` uniformly chosen cells flipped afterwards.
    Perturbed { density: f64, flips: u64 },
    /// An environment file in the text format, read against the built graph.
    EnvFile { path: String },
    /// The hard far instance for one-sided T=2 testers; requires an
    /// `expander` graph source, which it folds itself.
    OneSidedHard,
    /// The member half of the two-sided indistinguishable pair; requires an
    /// `expander` graph source, which it self-loops itself.
    TwoSidedYes,
    /// The far-leaning half of the two-sided pair.
    TwoSidedNo,
}

fn default_brute_force_cap() -> u32 {
    BRUTE_FORCE_CAP_DEFAULT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub instance: InstanceSpec,
    pub tester: TesterId,
    pub eps: f64,
    /// Horizon of generated member/perturbed instances. Hard instances are
    /// T=2 by construction and environment files carry their own horizon.
    pub horizon: u32,
    pub trials: u32,
    pub base_seed: u64,
    /// When set, the JSON report lands here and a CSV of per-trial rows
    /// lands next to it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Vertex-count ceiling under which the report also carries the exact
    /// brute-force flip distance of the instance.
    #[serde(default = "default_brute_force_cap")]
    pub brute_force_cap: u32,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials < 1 {
            return Err(HarnessError::BadConfig("trials must be at least 1".into()));
        }
        if !(self.eps.is_finite() && self.eps > 0.0 && self.eps <= 1.0) {
            return Err(HarnessError::BadConfig(format!(
                "eps must be in (0, 1], got {}",
                self.eps
            )));
        }
        if self.horizon < 2 {
            return Err(HarnessError::BadConfig(format!(
                "horizon must be at least 2, got {}",
                self.horizon
            )));
        }
        match &self.instance {
            InstanceSpec::Member { density } | InstanceSpec::Perturbed { density, .. } => {
                if !(0.0..=1.0).contains(density) {
                    return Err(HarnessError::BadConfig(format!(
                        "density must be in [0, 1], got {density}"
                    )));
                }
            }
            InstanceSpec::OneSidedHard | InstanceSpec::TwoSidedYes | InstanceSpec::TwoSidedNo => {
                if !matches!(self.graph.kind, SourceKind::Expander { .. }) {
                    return Err(HarnessError::BadConfig(format!(
                        "instance {:?} needs an expander graph source, got {}",
                        self.instance, self.graph
                    )));
                }
                if self.graph.self_loops {
                    return Err(HarnessError::BadConfig(
                        "hard instances manage self-loops themselves; drop +loops".into(),
                    ));
                }
            }
            InstanceSpec::EnvFile { .. } => {}
        }
        Ok(())
    }
}

/// Builds the environment a config describes. Deterministic in the base
/// seed; the instance RNG stream is decoupled from the per-trial seeds.
pub fn build_instance(config: &ExperimentConfig) -> Result<Environment, HarnessError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.base_seed, 0x1275));
    match &config.instance {
        InstanceSpec::Member { density } => {
            let g = Arc::new(config.graph.build(config.base_seed)?);
            Ok(random_member(g, config.horizon, *density, &mut rng)?)
        }
        InstanceSpec::Perturbed { density, flips } => {
            let g = Arc::new(config.graph.build(config.base_seed)?);
            let member = random_member(g, config.horizon, *density, &mut rng)?;
            Ok(perturb(&member, *flips, &mut rng)?)
        }
        InstanceSpec::EnvFile { path } => {
            let g = Arc::new(config.graph.build(config.base_seed)?);
            Ok(read_environment(path, g)?)
        }
        InstanceSpec::OneSidedHard => {
            let exp = expander_of(config)?;
            Ok(gen_one_sided_hard(&exp, config.eps, &mut rng)?)
        }
        InstanceSpec::TwoSidedYes => {
            let exp = expander_of(config)?;
            Ok(gen_two_sided_pair(&exp, config.eps, &mut rng)?.0)
        }
        InstanceSpec::TwoSidedNo => {
            let exp = expander_of(config)?;
            Ok(gen_two_sided_pair(&exp, config.eps, &mut rng)?.1)
        }
    }
}

fn expander_of(config: &ExperimentConfig) -> Result<crate::instance::BipartiteExpander, HarnessError> {
    match config.graph.kind {
        SourceKind::Expander { side, delta } => {
            Ok(sample_bipartite_expander(side, delta, config.base_seed)?)
        }
        _ => Err(HarnessError::BadConfig(format!(
            "instance {:?} needs an expander graph source",
            config.instance
        ))),
    }
}

/// Runs one tester once and returns its verdict together with the worst-case
/// query bound of that tester on this input. The large-degree tester runs
/// under the adaptive oracle policy, everything else non-adaptively.
pub fn run_tester_with_budget(
    env: &Environment,
    tester: TesterId,
    eps: f64,
    seed: u64,
) -> Result<(Verdict, u64), TesterError> {
    let g = env.graph().clone();
    match tester {
        TesterId::T2LowDegree => {
            let mut oracle = QueryOracle::new(env, OraclePolicy::non_adaptive());
            let verdict = test_t2_low_degree(&mut oracle, &g, eps, seed)?;
            Ok((verdict, budget_t2_low_degree(eps, g.max_degree())))
        }
        TesterId::T2LargeDegree => {
            let mut oracle = QueryOracle::new(env, OraclePolicy::adaptive());
            let verdict = test_t2_large_degree(&mut oracle, &g, eps, seed)?;
            Ok((verdict, budget_t2_large_degree(eps, g.vertex_count())))
        }
        TesterId::GenTLocal => {
            let mut oracle = QueryOracle::new(env, OraclePolicy::non_adaptive());
            let verdict = test_gen_t_local(&mut oracle, &g, eps, seed)?;
            Ok((verdict, budget_gen_t_local(eps, g.max_degree(), env.horizon())))
        }
        TesterId::GenTDecomposition => {
            let mut oracle = QueryOracle::new(env, OraclePolicy::non_adaptive());
            let (verdict, info) =
                test_gen_t_decomposition_detailed(&mut oracle, &g, eps, seed, |g, d, s| {
                    low_diameter_decomposition(g, d, &mut ChaCha8Rng::seed_from_u64(s))
                })?;
            Ok((verdict, budget_gen_t_decomposition(eps, info.boundary_size)))
        }
        TesterId::LongHorizon => {
            let mut oracle = QueryOracle::new(env, OraclePolicy::non_adaptive());
            let verdict = test_long_horizon(&mut oracle, &g, eps, seed)?;
            let components = g.connected_components().len() as u64;
            Ok((verdict, budget_long_horizon(eps, components)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub seed: u64,
    pub decision: Decision,
    pub queries_used: u64,
    pub time_conforming: bool,
    pub budget_bound: u64,
}

/// Runs `trials` independent repetitions of one tester on one environment,
/// trial i seeded with `base_seed + i`.
pub fn run_trials(
    env: &Environment,
    tester: TesterId,
    eps: f64,
    trials: u32,
    base_seed: u64,
) -> Result<Vec<TrialRecord>, TesterError> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i as u64);
            let (verdict, budget_bound) = run_tester_with_budget(env, tester, eps, seed)?;
            Ok(TrialRecord {
                trial: i,
                seed,
                decision: verdict.decision,
                queries_used: verdict.queries_used,
                time_conforming: verdict.time_conforming,
                budget_bound,
            })
        })
        .collect()
}

/// Wilson score interval at 95% confidence; (0, 1) when there are no trials.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let margin = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((center - margin) / denom).max(0.0),
        ((center + margin) / denom).min(1.0),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    pub trials: u32,
    pub rejections: u32,
    pub rejection_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub queries_min: u64,
    pub queries_mean: f64,
    pub queries_max: u64,
    pub all_time_conforming: bool,
    pub budget_respected: bool,
    /// Exact flip distance of the instance to the rule, present when the
    /// graph is within the configured brute-force cap.
    pub exact_min_flips: Option<u64>,
    pub records: Vec<TrialRecord>,
}

impl Report {
    pub fn new(
        config: ExperimentConfig,
        exact_min_flips: Option<u64>,
        records: Vec<TrialRecord>,
    ) -> Report {
        let trials = records.len() as u32;
        let rejections = records
            .iter()
            .filter(|r| r.decision == Decision::Reject)
            .count() as u32;
        let rejection_rate = if trials == 0 {
            0.0
        } else {
            rejections as f64 / trials as f64
        };
        let (wilson_low, wilson_high) = wilson_interval(rejections as u64, trials as u64);
        let queries_min = records.iter().map(|r| r.queries_used).min().unwrap_or(0);
        let queries_max = records.iter().map(|r| r.queries_used).max().unwrap_or(0);
        let queries_mean = if trials == 0 {
            0.0
        } else {
            records.iter().map(|r| r.queries_used).sum::<u64>() as f64 / trials as f64
        };
        Report {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            trials,
            rejections,
            rejection_rate,
            wilson_low,
            wilson_high,
            queries_min,
            queries_mean,
            queries_max,
            all_time_conforming: records.iter().all(|r| r.time_conforming),
            budget_respected: records.iter().all(|r| r.queries_used <= r.budget_bound),
            exact_min_flips,
            records,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,seed,decision,queries_used,time_conforming,budget_bound\n");
        for r in &self.records {
            let decision = match r.decision {
                Decision::Accept => "accept",
                Decision::Reject => "reject",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.trial, r.seed, decision, r.queries_used, r.time_conforming, r.budget_bound
            ));
        }
        out
    }

    /// Writes the JSON report to `path` and the per-trial CSV next to it.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json())?;
        std::fs::write(path.with_extension("csv"), self.to_csv())?;
        Ok(())
    }
}

/// Builds the instance, runs all trials, aggregates, and writes the report
/// files when the config names an output path.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    config.validate()?;
    let env = build_instance(config)?;
    let n = env.graph().vertex_count() as u32;
    let exact_min_flips = if n <= config.brute_force_cap.min(24) {
        Some(brute_force_min_flips(&env, config.brute_force_cap)?)
    } else {
        None
    };
    let records = run_trials(&env, config.tester, config.eps, config.trials, config.base_seed)?;
    let report = Report::new(config.clone(), exact_min_flips, records);
    if let Some(path) = &config.output {
        report.write(path)?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub toolkit_version: String,
    pub base_seed: u64,
    pub checks: Vec<SuiteCheck>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: &str, base_seed: u64, checks: Vec<SuiteCheck>) -> SuiteReport {
        let passed = checks.iter().all(|c| c.passed);
        SuiteReport {
            suite: suite.to_string(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            base_seed,
            checks,
            passed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("suite report serializes");
        out.push('\n');
        out
    }
}

/// One cell of the soundness suite: a tester plus a graph and member
/// parameters it is valid for.
#[derive(Clone, Debug)]
pub struct SoundnessCombo {
    pub tester: TesterId,
    pub graph: GraphSource,
    pub horizon: u32,
    pub eps: f64,
}

fn combo(tester: TesterId, graph: &str, horizon: u32, eps: f64) -> SoundnessCombo {
    SoundnessCombo {
        tester,
        graph: graph.parse().expect("combo graph spec parses"),
        horizon,
        eps,
    }
}

/// Mixed-family cells covering every tester within its preconditions: the
/// T=2 testers at horizon 2, the local tester on degree >= 2 graphs, the
/// decomposition tester on self-looped graphs with T >= 4/eps, the
/// long-horizon tester on self-looped graphs with T past the settling bound.
pub fn default_soundness_combos() -> Vec<SoundnessCombo> {
    use TesterId::*;
    vec![
        combo(T2LowDegree, "cycle:2000", 2, 0.1),
        combo(T2LowDegree, "path:200", 2, 0.25),
        combo(T2LowDegree, "grid:20x20", 2, 0.5),
        combo(T2LowDegree, "regular:256:3", 2, 0.2),
        combo(T2LowDegree, "cycle:64+loops", 2, 0.3),
        combo(T2LargeDegree, "complete:64", 2, 0.3),
        combo(T2LargeDegree, "regular:500:8", 2, 0.25),
        combo(T2LargeDegree, "expander:200:6", 2, 0.3),
        combo(T2LargeDegree, "grid:16x16", 2, 0.5),
        combo(T2LargeDegree, "cycle:1000+loops", 2, 0.2),
        combo(GenTLocal, "cycle:500", 6, 0.3),
        combo(GenTLocal, "grid:20x20", 4, 0.3),
        combo(GenTLocal, "regular:256:3", 5, 0.25),
        combo(GenTLocal, "cycle:64+loops", 8, 0.3),
        combo(GenTLocal, "complete:32", 3, 0.5),
        combo(GenTDecomposition, "grid:20x20+loops", 40, 0.5),
        combo(GenTDecomposition, "path:500+loops", 16, 0.5),
        combo(GenTDecomposition, "cycle:300+loops", 20, 0.4),
        combo(GenTDecomposition, "regular:200:3+loops", 12, 0.5),
        combo(GenTDecomposition, "grid:10x40+loops", 30, 0.3),
        combo(LongHorizon, "complete:50+loops", 6, 0.5),
        combo(LongHorizon, "cycle:12+loops", 32, 0.5),
        combo(LongHorizon, "grid:4x4+loops", 40, 0.4),
        combo(LongHorizon, "path:10+loops", 48, 0.5),
        combo(LongHorizon, "complete:400+loops", 8, 1.0),
    ]
}

/// Aggregates over the member trials of one soundness combo.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComboOutcome {
    pub trials: u32,
    pub rejections: u32,
    pub over_budget: u32,
    pub time_violations: u32,
    pub max_queries: u64,
}

/// Runs `trials` fresh member environments through the combo's tester.
/// Each trial draws its own density, member, and tester seed from `seed`.
pub fn run_soundness_combo(
    combo: &SoundnessCombo,
    trials: u32,
    seed: u64,
) -> Result<ComboOutcome, HarnessError> {
    let g = Arc::new(combo.graph.build(seed)?);
    let per_trial: Result<Vec<(bool, u64, u64, bool)>, HarnessError> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64 + 1));
            let density = rng.gen_range(0.0..=0.4);
            let env = random_member(g.clone(), combo.horizon, density, &mut rng)?;
            let (verdict, bound) =
                run_tester_with_budget(&env, combo.tester, combo.eps, rng.gen())?;
            Ok((
                verdict.rejected(),
                verdict.queries_used,
                bound,
                verdict.time_conforming,
            ))
        })
        .collect();
    let per_trial = per_trial?;
    Ok(ComboOutcome {
        trials,
        rejections: per_trial.iter().filter(|r| r.0).count() as u32,
        over_budget: per_trial.iter().filter(|r| r.1 > r.2).count() as u32,
        time_violations: per_trial.iter().filter(|r| !r.3).count() as u32,
        max_queries: per_trial.iter().map(|r| r.1).max().unwrap_or(0),
    })
}

/// Every check expects zero rejections on freshly drawn member environments
/// and zero budget overruns. The final check is a negative control:
/// fabricated rejection witnesses against a member must fail replay.
pub fn soundness_suite(
    combos: &[SoundnessCombo],
    trials_per_combo: u32,
    base_seed: u64,
) -> Result<SuiteReport, HarnessError> {
    if trials_per_combo < 1 {
        return Err(HarnessError::BadConfig("trials_per_combo must be at least 1".into()));
    }
    let mut checks = Vec::new();
    for (ci, combo) in combos.iter().enumerate() {
        let outcome = run_soundness_combo(combo, trials_per_combo, mix_seed(base_seed, ci as u64 + 1))?;
        checks.push(SuiteCheck {
            name: format!("{} on {}", combo.tester, combo.graph),
            passed: outcome.rejections == 0 && outcome.over_budget == 0,
            detail: format!(
                "{} member trials: {} rejections, {} over budget, max {} queries",
                outcome.trials, outcome.rejections, outcome.over_budget, outcome.max_queries
            ),
        });
    }
    checks.push(fabricated_witness_control()?);
    Ok(SuiteReport::new("soundness", base_seed, checks))
}

/// Witness replay must reject made-up evidence: claims misquoting the
/// environment and claims whose facts a member can satisfy.
fn fabricated_witness_control() -> Result<SuiteCheck, HarnessError> {
    let g = Arc::new(Graph::path(6).add_self_loops());
    let env = Environment::evolve(g, &VertexSet::from([0]), 4)?;
    let fabrications = vec![
        // claims neighbor (2, 2) was black; it is white
        Witness::Direct {
            violation: Violation { v: 3, t: 3, kind: ViolationKind::TypeI },
            black_neighbor: Some(2),
        },
        // (1, 2) is black, but neighbor (0, 1) is black too
        Witness::Direct {
            violation: Violation { v: 1, t: 2, kind: ViolationKind::TypeII },
            black_neighbor: None,
        },
        // (2, 2) is not even black
        Witness::FilteredTypeTwo {
            v: 2,
            seen_white_step1: vec![1, 2, 3],
            inferred_white: vec![],
        },
        // quotes the environment correctly, but a member admits these facts
        Witness::InfeasibleFacts {
            kind: "monotone".into(),
            facts: vec![Fact::new(0, 1, true), Fact::new(0, 4, true)],
        },
        // misquotes the environment: (5, 1) is white
        Witness::InfeasibleFacts {
            kind: "early-black".into(),
            facts: vec![Fact::new(5, 1, true)],
        },
    ];
    let accepted = fabrications
        .iter()
        .filter(|w| verify_witness(&env, w))
        .count();
    Ok(SuiteCheck {
        name: "fabricated-witness-negative-control".into(),
        passed: accepted == 0,
        detail: format!(
            "{} fabricated witnesses, {} wrongly verified",
            fabrications.len(),
            accepted
        ),
    })
}

#[derive(Clone, Debug)]
pub struct OracleSuiteParams {
    /// Exhaustive T=2 sandwich check on every connected graph (self-loop
    /// combinations included) up to this many vertices.
    pub t2_max_n: usize,
    pub gen_t_cases: u32,
    pub feasibility_cases: u32,
}

impl Default for OracleSuiteParams {
    fn default() -> Self {
        OracleSuiteParams { t2_max_n: 4, gen_t_cases: 200, feasibility_cases: 200 }
    }
}

/// Cross-checks the counting arguments against the brute-force oracles: the
/// T=2 and general-T violation/distance sandwiches and the BFS feasibility
/// characterization.
pub fn oracle_suite(params: &OracleSuiteParams, base_seed: u64) -> Result<SuiteReport, HarnessError> {
    let checks = vec![
        t2_exhaustive_check(params.t2_max_n)?,
        gen_t_randomized_check(params.gen_t_cases, mix_seed(base_seed, 2))?,
        feasibility_check(params.feasibility_cases, mix_seed(base_seed, 3))?,
    ];
    Ok(SuiteReport::new("oracle", base_seed, checks))
}

/// Every mask over vertex pairs and loops, kept when it forms a connected
/// graph covering all n vertices.
fn all_connected_graphs(n: usize) -> Vec<Graph> {
    let mut slots: Vec<(u32, u32)> = Vec::new();
    for u in 0..n as u32 {
        for v in u..n as u32 {
            slots.push((u, v));
        }
    }
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << slots.len()) {
        let edges = slots
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e);
        let Ok(g) = Graph::from_edges(n, edges) else { continue };
        if g.connected_components().len() == 1 {
            out.push(g);
        }
    }
    out
}

/// T=2 sandwich, integer-exact form: with k the exact flip distance and
/// `viol` the violation count, viol <= Δ·k and k <= viol.
fn t2_exhaustive_check(max_n: usize) -> Result<SuiteCheck, HarnessError> {
    let mut graphs = 0u64;
    let mut envs = 0u64;
    let mut failures = 0u64;
    for n in 1..=max_n {
        for g in all_connected_graphs(n) {
            graphs += 1;
            let delta = g.max_degree() as u64;
            let g = Arc::new(g);
            for mask in 0u32..1 << (2 * n) {
                let env = Environment::from_fn(g.clone(), 2, |v, t| {
                    mask >> ((t as usize - 1) * n + v as usize) & 1 == 1
                })?;
                let viol = env.violations().len() as u64;
                let k = brute_force_min_flips(&env, BRUTE_FORCE_CAP_DEFAULT)?;
                if !(viol <= delta * k && k <= viol) {
                    failures += 1;
                }
                envs += 1;
            }
        }
    }
    Ok(SuiteCheck {
        name: "t2-exhaustive-sandwich".into(),
        passed: failures == 0,
        detail: format!("{graphs} graphs, {envs} environments, {failures} sandwich failures"),
    })
}

/// General-T sandwich on random loop-free graphs of minimum degree >= 2:
/// viol <= (Δ+1)·k and k·(Δ-1) <= viol·(Δ^(T-1)-1).
fn gen_t_randomized_check(cases: u32, seed: u64) -> Result<SuiteCheck, HarnessError> {
    let results: Result<Vec<bool>, HarnessError> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64));
            let n = rng.gen_range(5..=10usize);
            let horizon = rng.gen_range(3..=4u32);
            let g = Arc::new(random_cycle_plus_chords(n, 0.2, &mut rng)?);
            let p = rng.gen_range(0.2..0.6);
            let colors: Vec<bool> = (0..n * horizon as usize).map(|_| rng.gen_bool(p)).collect();
            let env = Environment::from_fn(g.clone(), horizon, |v, t| {
                colors[(t as usize - 1) * n + v as usize]
            })?;
            let viol = env.violations().len() as u128;
            let k = brute_force_min_flips(&env, BRUTE_FORCE_CAP_DEFAULT)? as u128;
            let delta = g.max_degree() as u128;
            let upper_ok = viol <= (delta + 1) * k;
            let lower_ok = k * (delta - 1) <= viol * (delta.pow(horizon - 1) - 1);
            Ok(upper_ok && lower_ok)
        })
        .collect();
    let failures = results?.iter().filter(|ok| !**ok).count();
    Ok(SuiteCheck {
        name: "gen-t-randomized-sandwich".into(),
        passed: failures == 0,
        detail: format!("{cases} cases, {failures} sandwich failures"),
    })
}

/// Cycle on n vertices plus each non-cycle chord independently with
/// probability `chord_p`. Connected with minimum degree 2 by construction.
fn random_cycle_plus_chords(n: usize, chord_p: f64, rng: &mut impl Rng) -> Result<Graph, GraphError> {
    let mut edges: Vec<(u32, u32)> = (0..n).map(|i| (i as u32, ((i + 1) % n) as u32)).collect();
    for u in 0..n as u32 {
        for v in u + 2..n as u32 {
            if u == 0 && v == n as u32 - 1 {
                continue; // already a cycle edge
            }
            if rng.gen_bool(chord_p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// BFS feasibility against the 2^n enumeration on random self-looped graphs
/// with random partial observations.
fn feasibility_check(cases: u32, seed: u64) -> Result<SuiteCheck, HarnessError> {
    let results: Result<Vec<bool>, HarnessError> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64));
            let n = rng.gen_range(3..=14usize);
            let g = random_cycle_plus_chords(n, 0.15, &mut rng)?.add_self_loops();
            let t1 = rng.gen_range(1..=4u32);
            let mut black = VertexSet::new();
            let mut white = VertexSet::new();
            for v in 0..n as u32 {
                match rng.gen_range(0..3u8) {
                    0 => {
                        black.insert(v);
                    }
                    1 => {
                        white.insert(v);
                    }
                    _ => {}
                }
            }
            let fast = feasible_partial(&g, t1, &black, &white)?;
            let slow = feasible_partial_exhaustive(&g, t1, &black, &white, 14)?;
            Ok(fast == slow)
        })
        .collect();
    let disagreements = results?.iter().filter(|ok| !**ok).count();
    Ok(SuiteCheck {
        name: "feasibility-bfs-vs-enumeration".into(),
        passed: disagreements == 0,
        detail: format!("{cases} cases, {disagreements} disagreements"),
    })
}

#[derive(Clone, Debug)]
pub struct DecompositionSuiteParams {
    pub seeds_per_cell: u32,
    /// Target diameters, ascending; the monotonicity check compares the
    /// first against the last.
    pub diameters: Vec<u32>,
}

impl Default for DecompositionSuiteParams {
    fn default() -> Self {
        DecompositionSuiteParams { seeds_per_cell: 100, diameters: vec![4, 8, 16] }
    }
}

/// Validity of the randomized decomposition on three graph families, plus
/// the cut fraction shrinking as the allowed diameter grows.
pub fn decomposition_suite(
    params: &DecompositionSuiteParams,
    base_seed: u64,
) -> Result<SuiteReport, HarnessError> {
    if params.seeds_per_cell < 1 || params.diameters.is_empty() {
        return Err(HarnessError::BadConfig(
            "need at least one seed and one diameter".into(),
        ));
    }
    let families: Vec<GraphSource> = ["path:64", "grid:16x16", "regular:256:3"]
        .iter()
        .map(|s| s.parse().expect("family spec parses"))
        .collect();
    let mut checks = Vec::new();
    for (fi, family) in families.iter().enumerate() {
        let mut mean_by_d: Vec<(u32, f64)> = Vec::new();
        for &d in &params.diameters {
            let results: Result<Vec<(bool, f64)>, HarnessError> = (0..params.seeds_per_cell)
                .into_par_iter()
                .map(|i| {
                    let salt = (fi as u64) << 48 | (d as u64) << 24 | i as u64;
                    let seed = mix_seed(base_seed, salt);
                    let g = family.build(seed)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1));
                    let dec = low_diameter_decomposition(&g, d, &mut rng)?;
                    Ok((verify_decomposition(&g, &dec), dec.alpha_observed))
                })
                .collect();
            let results = results?;
            let invalid = results.iter().filter(|r| !r.0).count();
            let mean = results.iter().map(|r| r.1).sum::<f64>() / results.len() as f64;
            mean_by_d.push((d, mean));
            checks.push(SuiteCheck {
                name: format!("{family} d={d} validity"),
                passed: invalid == 0,
                detail: format!(
                    "{} seeds, {} invalid, mean cut fraction {:.4}",
                    params.seeds_per_cell, invalid, mean
                ),
            });
        }
        if params.diameters.len() >= 2 {
            let (d_lo, mean_lo) = mean_by_d[0];
            let (d_hi, mean_hi) = *mean_by_d.last().expect("at least two diameters");
            checks.push(SuiteCheck {
                name: format!("{family} cut-monotonicity"),
                passed: mean_lo > mean_hi,
                detail: format!(
                    "mean cut fraction {mean_lo:.4} at d={d_lo} vs {mean_hi:.4} at d={d_hi}"
                ),
            });
        }
    }
    Ok(SuiteReport::new("decomposition", base_seed, checks))
}

#[derive(Clone, Debug)]
pub struct ExpanderSuiteParams {
    pub side: u32,
    pub delta: u32,
    pub probe_trials: u64,
    pub regular_seeds: u32,
}

impl Default for ExpanderSuiteParams {
    fn default() -> Self {
        ExpanderSuiteParams { side: 500, delta: 8, probe_trials: 10_000, regular_seeds: 100 }
    }
}

/// Largest set size the expansion guarantee covers on each side:
/// max(1, ⌊side / (96 e Δ)⌋).
pub fn expansion_probe_size(side: u32, delta: u32) -> u32 {
    let bound = side as f64 / (96.0 * std::f64::consts::E * delta as f64);
    (bound.floor() as u32).max(1)
}

/// Probes one sampled expander for (1 - 1/24)Δ vertex expansion on both
/// sides at the guaranteed set sizes, and re-samples many expanders to
/// confirm they come out Δ-regular and simple.
pub fn expander_suite(
    params: &ExpanderSuiteParams,
    base_seed: u64,
) -> Result<SuiteReport, HarnessError> {
    let mut checks = Vec::new();
    let exp = sample_bipartite_expander(params.side, params.delta, mix_seed(base_seed, 1))?;
    let max_size = expansion_probe_size(params.side, params.delta);
    let need = (1.0 - 1.0 / 24.0) * params.delta as f64;
    for (side, name, salt) in [(Side::Left, "left", 2u64), (Side::Right, "right", 3u64)] {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(base_seed, salt));
        let worst = expansion_probe(&exp.graph, side, max_size, params.probe_trials, &mut rng)?;
        checks.push(SuiteCheck {
            name: format!("{name}-side-expansion"),
            passed: worst >= need,
            detail: format!(
                "worst |N(S)|/|S| = {worst:.3} over {} sets of size <= {max_size} (need >= {need:.3})",
                params.probe_trials
            ),
        });
    }
    let results: Result<Vec<bool>, HarnessError> = (0..params.regular_seeds)
        .into_par_iter()
        .map(|i| {
            let e = sample_bipartite_expander(params.side, params.delta, mix_seed(base_seed, 100 + i as u64))?;
            // from_edges rejects duplicate edges, so a built graph is simple;
            // bipartiteness rules out loops. Degrees are the open question.
            let regular = e.graph.vertices().all(|v| e.graph.degree(v) == params.delta as usize);
            Ok(regular)
        })
        .collect();
    let results = results?;
    let irregular = results.iter().filter(|ok| !**ok).count();
    checks.push(SuiteCheck {
        name: "delta-regular-simple".into(),
        passed: irregular == 0,
        detail: format!("{} samples, {} not {}-regular", params.regular_seeds, irregular, params.delta),
    });
    Ok(SuiteReport::new("expander", base_seed, checks))
}
