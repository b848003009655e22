//! `rcsim` command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{info, warn};

use crate::engine::{generate_scenario, run, Scenario, SimulationTrace};
use crate::error::Error;
use crate::io::{
    load_scenario, read_trace_csv, scenario_json, to_json_pretty, trace_csv, write_atomic, ComparisonReport,
    EnergyRatio, PolicyOutcome, Summary,
};
use crate::oracle::verify_trace;
use crate::plot;
use crate::range_policy::{FixedDelta, RangePolicy, Schedule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Core(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rcsim", version, about = "Consensus simulator with per-agent transmission range control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write trace, summary and plots.
    Run {
        scenario: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run several range policies on the same scenario and horizon.
    Compare {
        scenario: PathBuf,
        /// Comma-separated: preserving, modified, fixed, fixed:<delta>, intermittent:<gap>
        #[arg(short, long, value_delimiter = ',', required = true)]
        policies: Vec<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Write a random scenario whose initial topology has a directed spanning tree.
    Generate {
        #[arg(short = 'n', long)]
        agents: usize,
        #[arg(short, long)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Replay a run directory and check every recorded step.
    #[command(hide = true)]
    VerifyTrace { dir: PathBuf },
}

/// Parses a policy name as accepted by `compare -p`.
pub fn parse_policy(spec: &str, n_agents: usize) -> Result<RangePolicy<f64>, CliError> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec.trim(), None),
    };
    let bad = || CliError::Usage(format!("unknown policy `{spec}`"));
    Ok(match (name, arg) {
        ("preserving", None) => RangePolicy::Preserving,
        ("modified", None) => RangePolicy::Modified,
        ("fixed", None) => RangePolicy::Fixed { delta: FixedDelta::PerAgentInitial },
        ("fixed", Some(d)) => RangePolicy::Fixed { delta: FixedDelta::Common(d.parse().map_err(|_| bad())?) },
        ("intermittent", Some(g)) => {
            let gap: usize = g.parse().map_err(|_| bad())?;
            RangePolicy::Intermittent { schedule: Schedule::uniform(n_agents, gap)? }
        }
        _ => return Err(bad()),
    })
}

fn write_run_dir(dir: &Path, scenario: &Scenario<f64>, trace: &SimulationTrace<f64>) -> Result<Summary, CliError> {
    fs::create_dir_all(dir)?;
    let summary = Summary::from_trace(trace, scenario.consensus_tol);
    write_atomic(&dir.join("scenario.json"), scenario_json(scenario)?.as_bytes())?;
    write_atomic(&dir.join("trace.csv"), &trace_csv(trace)?)?;
    write_atomic(&dir.join("summary.json"), &to_json_pretty(&summary)?)?;
    let plots = [
        ("trajectories.svg", plot::trajectories(trace)),
        ("x_components.svg", plot::x_components(trace)),
        ("y_components.svg", plot::y_components(trace)),
        ("ranges.svg", plot::ranges(trace)),
        ("energy.svg", plot::energy(trace)),
    ];
    for (name, svg) in plots {
        write_atomic(&dir.join(name), svg.as_bytes())?;
    }
    Ok(summary)
}

pub fn cmd_run(scenario_path: &Path, out_dir: &Path) -> Result<Summary, CliError> {
    let scenario = load_scenario(scenario_path)?;
    let trace = run(&scenario)?;
    let summary = write_run_dir(out_dir, &scenario, &trace)?;
    println!(
        "{}: {:?} after {} steps, final diameter {:.3e}, team energy {:.6}",
        summary.policy, summary.termination, summary.steps_executed, summary.final_diameter, summary.team_energy
    );
    Ok(summary)
}

pub fn cmd_compare(scenario_path: &Path, policies: &[String], out_dir: &Path) -> Result<ComparisonReport, CliError> {
    if policies.len() < 2 {
        return Err(CliError::Usage("compare needs at least two policies".into()));
    }
    let base = load_scenario(scenario_path)?;
    let mut variants = Vec::new();
    for spec in policies {
        let policy = parse_policy(spec, base.n_agents())?;
        let mut s = base.with_policy(policy);
        s.stop_at_consensus = false;
        s.validate()?;
        variants.push(s);
    }
    let mut labels: Vec<String> = variants.iter().map(|s| s.policy.label()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != variants.len() {
        return Err(CliError::Usage("duplicate policies".into()));
    }

    let traces: Vec<Result<SimulationTrace<f64>, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = variants.iter().map(|s| scope.spawn(move || run(s))).collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>, _>>()?;

    fs::create_dir_all(out_dir)?;
    let mut outcomes = Vec::new();
    for (s, trace) in variants.iter().zip(&traces) {
        let summary = write_run_dir(&out_dir.join(&trace.policy_label), s, trace)?;
        outcomes.push(PolicyOutcome {
            policy: summary.policy,
            team_energy: summary.team_energy,
            per_agent_energy: summary.per_agent_energy,
            final_diameter: summary.final_diameter,
            steps_executed: summary.steps_executed,
        });
    }
    let mut ratios = Vec::new();
    for a in &outcomes {
        for b in &outcomes {
            if a.policy != b.policy {
                ratios.push(EnergyRatio {
                    numerator: a.policy.clone(),
                    denominator: b.policy.clone(),
                    ratio: (b.team_energy != 0.0).then(|| a.team_energy / b.team_energy),
                });
            }
        }
    }
    let report = ComparisonReport {
        scenario_hash: base.fingerprint(),
        horizon_steps: base.max_steps,
        policies: outcomes,
        ratios,
    };
    write_atomic(&out_dir.join("comparison.json"), &to_json_pretty(&report)?)?;
    let runs: Vec<(String, &crate::energy::EnergyLedger<f64>)> =
        traces.iter().map(|t| (t.policy_label.clone(), &t.energy)).collect();
    write_atomic(&out_dir.join("energy.svg"), plot::energy_overlay(&runs).as_bytes())?;
    for p in &report.policies {
        println!("{:>16}: team energy {:.6}", p.policy, p.team_energy);
    }
    Ok(report)
}

pub fn cmd_generate(n_agents: usize, seed: u64, out_path: &Path) -> Result<(), CliError> {
    if n_agents < 2 {
        return Err(CliError::Usage("generate needs -n >= 2".into()));
    }
    let scenario = generate_scenario(n_agents, seed)?;
    write_atomic(out_path, scenario_json(&scenario)?.as_bytes())?;
    info!("wrote {}-agent scenario to {}", n_agents, out_path.display());
    Ok(())
}

/// Replays `dir/trace.csv` against `dir/scenario.json` and cross-checks
/// `dir/summary.json` when present. Returns the number of steps checked.
pub fn cmd_verify_trace(dir: &Path) -> Result<usize, CliError> {
    let scenario = load_scenario(&dir.join("scenario.json"))?;
    let rec = read_trace_csv(&dir.join("trace.csv"))?;
    if rec.n_agents != scenario.n_agents() {
        return Err(Error::Trace(format!("trace has {} agents, scenario {}", rec.n_agents, scenario.n_agents())).into());
    }
    let bad = verify_trace(&scenario, &rec);
    for m in bad.iter().take(20) {
        warn!("{m}");
        eprintln!("mismatch: {m}");
    }
    if !bad.is_empty() {
        return Err(Error::Trace(format!("{} replay mismatches", bad.len())).into());
    }
    let summary_path = dir.join("summary.json");
    if summary_path.exists() {
        let summary: Summary = serde_json::from_str(&fs::read_to_string(&summary_path)?).map_err(Error::from)?;
        let total: f64 = rec.steps.iter().flatten().map(|r| r.step_energy).sum();
        let rel = (summary.team_energy - total).abs() / total.abs().max(1e-300);
        if total != summary.team_energy && rel > 1e-9 {
            return Err(Error::Trace(format!("summary energy {} vs trace {}", summary.team_energy, total)).into());
        }
        if summary.steps_executed + 1 != rec.len() {
            return Err(Error::Trace("summary step count disagrees with trace".into()).into());
        }
    }
    println!("verified {} steps", rec.len());
    Ok(rec.len())
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("RC_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run { scenario, out } => cmd_run(&scenario, &out).map(|_| ()),
        Command::Compare { scenario, policies, out } => cmd_compare(&scenario, &policies, &out).map(|_| ()),
        Command::Generate { agents, seed, out } => cmd_generate(agents, seed, &out),
        Command::VerifyTrace { dir } => cmd_verify_trace(&dir).map(|_| ()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names() {
        assert_eq!(parse_policy("modified", 4).unwrap(), RangePolicy::Modified);
        assert_eq!(parse_policy(" fixed:2.5", 4).unwrap(), RangePolicy::Fixed { delta: FixedDelta::Common(2.5) });
        assert!(matches!(parse_policy("intermittent:3", 4).unwrap(), RangePolicy::Intermittent { .. }));
        assert!(parse_policy("intermittent", 4).is_err());
        assert!(parse_policy("intermittent:0", 4).is_err());
        assert!(parse_policy("bogus", 4).is_err());
        assert_eq!(parse_policy("fixed:x", 4).unwrap_err().exit_code(), EXIT_USAGE);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["rcsim", "--help"]), EXIT_OK);
        assert_eq!(main_with_args(["rcsim", "frobnicate"]), EXIT_USAGE);
        assert_eq!(CliError::Core(Error::Validation("x".into())).exit_code(), EXIT_VALIDATION);
        assert_eq!(CliError::Core(Error::NoCompletePhase).exit_code(), EXIT_RUNTIME);
    }
}
