//! Command line front end: generate instances, run testers, run the
//! validation suites, and inspect report files.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bptest_core::env::write_environment;
use bptest_core::graph::write_graph;
use bptest_core::harness::{
    build_instance, decomposition_suite, default_soundness_combos, expander_suite, oracle_suite,
    resolve_base_seed, run_experiment, soundness_suite, DecompositionSuiteParams,
    ExpanderSuiteParams, ExperimentConfig, GraphSource, InstanceSpec, OracleSuiteParams, Report,
    TesterId,
};
use bptest_core::Decision;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bptest", version, about = "Property testers for 1-BP network dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance environment and write it to a file
    Gen(GenArgs),
    /// Run one tester repeatedly against one instance and report statistics
    Test(TestArgs),
    /// Run a validation suite; exits nonzero when any check fails
    Suite(SuiteArgs),
    /// Summarize a report file and verify its embedded aggregates
    Report(ReportArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Graph source: path:N, cycle:N, complete:N, grid:WxH, regular:N:D,
    /// expander:SIDE:DELTA, or file:PATH; append +loops for self-loops
    #[arg(long)]
    graph: String,
    /// member | perturbed | env-file | one-sided-hard | two-sided-yes | two-sided-no
    #[arg(long, default_value = "member")]
    instance: String,
    /// Initial black density for member and perturbed instances
    #[arg(long, default_value_t = 0.2)]
    density: f64,
    /// Cells to flip for the perturbed instance
    #[arg(long, default_value_t = 1)]
    flips: u64,
    /// Environment file, required by the env-file instance
    #[arg(long)]
    env_file: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    horizon: u32,
    /// Base seed; the BPTEST_SEED environment variable overrides it
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Distance parameter, used by the hard and two-sided instances
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Where to write the environment
    #[arg(long)]
    out: PathBuf,
    /// Also write the underlying graph
    #[arg(long)]
    out_graph: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// t2-low-degree | t2-large-degree | gen-t-local | gen-t-decomposition |
    /// long-horizon
    #[arg(long)]
    tester: String,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Write the report here as JSON, with per-trial rows in an adjacent CSV
    #[arg(long)]
    output: Option<PathBuf>,
    /// Largest vertex count the exact flip-distance oracle is attempted on
    #[arg(long, default_value_t = 20)]
    brute_force_cap: u32,
}

#[derive(Args)]
struct SuiteArgs {
    #[command(subcommand)]
    suite: SuiteCommand,
}

#[derive(Subcommand)]
enum SuiteCommand {
    /// Member environments across every tester must never be rejected
    Soundness {
        #[arg(long, default_value_t = 40)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Distance sandwiches and the feasibility oracle against brute force
    Oracle {
        /// Exhaustive T=2 check covers all connected graphs up to this order
        #[arg(long, default_value_t = 4)]
        t2_max_n: usize,
        /// Randomized general-T sandwich cases
        #[arg(long, default_value_t = 200)]
        gen_t_cases: u32,
        /// Randomized feasibility cases
        #[arg(long, default_value_t = 200)]
        feasibility_cases: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Low-diameter decomposition validity and cut monotonicity
    Decomposition {
        #[arg(long, default_value_t = 100)]
        seeds_per_cell: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [4, 8, 16])]
        diameters: Vec<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Bipartite expander sampling: expansion probe and regularity
    Expander {
        #[arg(long, default_value_t = 500)]
        side: u32,
        #[arg(long, default_value_t = 8)]
        delta: u32,
        #[arg(long, default_value_t = 10_000)]
        probe_trials: u64,
        #[arg(long, default_value_t = 100)]
        regular_seeds: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON produced by `bptest test --output`
    path: PathBuf,
}

fn instance_spec(args: &InstanceArgs) -> Result<InstanceSpec> {
    Ok(match args.instance.as_str() {
        "member" => InstanceSpec::Member { density: args.density },
        "perturbed" => InstanceSpec::Perturbed { density: args.density, flips: args.flips },
        "env-file" => InstanceSpec::EnvFile {
            path: args
                .env_file
                .as_ref()
                .context("--env-file is required for the env-file instance")?
                .to_string_lossy()
                .into_owned(),
        },
        "one-sided-hard" => InstanceSpec::OneSidedHard,
        "two-sided-yes" => InstanceSpec::TwoSidedYes,
        "two-sided-no" => InstanceSpec::TwoSidedNo,
        other => bail!(
            "unknown instance kind `{other}` (expected member, perturbed, env-file, \
             one-sided-hard, two-sided-yes, or two-sided-no)"
        ),
    })
}

fn experiment_config(
    args: &InstanceArgs,
    tester: TesterId,
    eps: f64,
    trials: u32,
    output: Option<PathBuf>,
    brute_force_cap: u32,
) -> Result<ExperimentConfig> {
    let graph: GraphSource = args.graph.parse()?;
    Ok(ExperimentConfig {
        graph,
        instance: instance_spec(args)?,
        tester,
        eps,
        horizon: args.horizon,
        trials,
        base_seed: resolve_base_seed(args.seed)?,
        output,
        brute_force_cap,
    })
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode> {
    // The tester field is irrelevant for generation; any id satisfies the
    // config shape.
    let config = experiment_config(&args.instance, TesterId::T2LowDegree, args.eps, 1, None, 20)?;
    let env = build_instance(&config)?;
    write_environment(&env, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote environment: n={} horizon={} cells={} -> {}",
        env.graph().vertex_count(),
        env.horizon(),
        env.cells(),
        args.out.display()
    );
    if let Some(path) = &args.out_graph {
        write_graph(env.graph(), path).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote graph -> {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_test(args: &TestArgs) -> Result<ExitCode> {
    let tester: TesterId = args.tester.parse()?;
    let config = experiment_config(
        &args.instance,
        tester,
        args.eps,
        args.trials,
        args.output.clone(),
        args.brute_force_cap,
    )?;
    let report = run_experiment(&config)?;
    print_report(&report);
    if let Some(path) = &args.output {
        println!(
            "wrote {} and {}",
            path.display(),
            path.with_extension("csv").display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn instance_label(spec: &InstanceSpec) -> &'static str {
    match spec {
        InstanceSpec::Member { .. } => "member",
        InstanceSpec::Perturbed { .. } => "perturbed",
        InstanceSpec::EnvFile { .. } => "env-file",
        InstanceSpec::OneSidedHard => "one-sided-hard",
        InstanceSpec::TwoSidedYes => "two-sided-yes",
        InstanceSpec::TwoSidedNo => "two-sided-no",
    }
}

fn print_report(report: &Report) {
    println!(
        "tester {} on {} ({}), eps {}, horizon {}, seed {}",
        report.config.tester,
        report.config.graph,
        instance_label(&report.config.instance),
        report.config.eps,
        report.config.horizon,
        report.config.base_seed
    );
    println!(
        "rejection rate {:.4} over {} trials, wilson 95% [{:.4}, {:.4}]",
        report.rejection_rate, report.trials, report.wilson_low, report.wilson_high
    );
    println!(
        "queries min/mean/max {}/{:.1}/{}, time-conforming {}, budget respected {}",
        report.queries_min,
        report.queries_mean,
        report.queries_max,
        report.all_time_conforming,
        report.budget_respected
    );
    if let Some(k) = report.exact_min_flips {
        println!("exact flip distance to the rule: {k}");
    }
}

fn cmd_suite(args: &SuiteArgs) -> Result<ExitCode> {
    let (report, output) = match &args.suite {
        SuiteCommand::Soundness { trials, seed, output } => (
            soundness_suite(&default_soundness_combos(), *trials, resolve_base_seed(*seed)?)?,
            output,
        ),
        SuiteCommand::Oracle { t2_max_n, gen_t_cases, feasibility_cases, seed, output } => {
            let params = OracleSuiteParams {
                t2_max_n: *t2_max_n,
                gen_t_cases: *gen_t_cases,
                feasibility_cases: *feasibility_cases,
            };
            (oracle_suite(&params, resolve_base_seed(*seed)?)?, output)
        }
        SuiteCommand::Decomposition { seeds_per_cell, diameters, seed, output } => {
            let params = DecompositionSuiteParams {
                seeds_per_cell: *seeds_per_cell,
                diameters: diameters.clone(),
            };
            (decomposition_suite(&params, resolve_base_seed(*seed)?)?, output)
        }
        SuiteCommand::Expander { side, delta, probe_trials, regular_seeds, seed, output } => {
            let params = ExpanderSuiteParams {
                side: *side,
                delta: *delta,
                probe_trials: *probe_trials,
                regular_seeds: *regular_seeds,
            };
            (expander_suite(&params, resolve_base_seed(*seed)?)?, output)
        }
    };
    for check in &report.checks {
        let tag = if check.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", check.name, check.detail);
    }
    println!(
        "suite {}: {} ({} checks, seed {})",
        report.suite,
        if report.passed { "passed" } else { "FAILED" },
        report.checks.len(),
        report.base_seed
    );
    if let Some(path) = output {
        std::fs::write(path, report.to_json())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

/// Recomputes every aggregate from the embedded per-trial records and
/// reports any field that disagrees with the stored value.
fn report_inconsistencies(report: &Report) -> Vec<String> {
    let mut problems = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            problems.push(name.to_string());
        }
    };
    let records = &report.records;
    let rejections =
        records.iter().filter(|r| r.decision == Decision::Reject).count() as u32;
    let trials = records.len() as u32;
    check("trials", report.trials == trials);
    check("rejections", report.rejections == rejections);
    if trials > 0 {
        let rate = rejections as f64 / trials as f64;
        check("rejection_rate", (report.rejection_rate - rate).abs() < 1e-12);
        let min = records.iter().map(|r| r.queries_used).min().unwrap();
        let max = records.iter().map(|r| r.queries_used).max().unwrap();
        let mean =
            records.iter().map(|r| r.queries_used).sum::<u64>() as f64 / trials as f64;
        check("queries_min", report.queries_min == min);
        check("queries_max", report.queries_max == max);
        check("queries_mean", (report.queries_mean - mean).abs() < 1e-9);
    }
    check(
        "all_time_conforming",
        report.all_time_conforming == records.iter().all(|r| r.time_conforming),
    );
    check(
        "budget_respected",
        report.budget_respected == records.iter().all(|r| r.queries_used <= r.budget_bound),
    );
    problems
}

fn cmd_report(args: &ReportArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.path)
        .with_context(|| format!("reading {}", args.path.display()))?;
    let report = Report::from_json(&text)
        .with_context(|| format!("parsing {}", args.path.display()))?;
    print_report(&report);
    let problems = report_inconsistencies(&report);
    if problems.is_empty() {
        println!("aggregates consistent with {} embedded records", report.records.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("aggregates inconsistent with embedded records: {}", problems.join(", "));
        Ok(ExitCode::FAILURE)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Test(args) => cmd_test(args),
        Command::Suite(args) => cmd_suite(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
