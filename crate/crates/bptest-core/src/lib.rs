//! Property testers for the 1-BP bootstrap percolation rule on evolving
//! networks, together with the exact oracles, graph decompositions,
//! adversarial instance generators, and the experiment harness used to
//! validate them.

pub mod decomposition;
pub mod env;
pub mod graph;
pub mod harness;
pub mod instance;
pub mod oracle;
pub mod testers;

pub use decomposition::{Decomposition, DecompError};
pub use env::{Environment, EnvError, Fact, Violation, ViolationKind};
pub use graph::{Graph, GraphError, VertexSet};
pub use harness::{
    ExperimentConfig, GraphSource, HarnessError, InstanceSpec, Report, SuiteCheck, SuiteReport,
    TesterId, TrialRecord,
};
pub use instance::{BipartiteExpander, InstanceError, LbParams, LbVariant, Side, SideBound};
pub use oracle::{OracleError, OracleMode, OraclePolicy, QueryOracle, Transcript};
pub use testers::{Decision, TesterError, Verdict, Witness};
