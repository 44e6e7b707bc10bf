mod config;
mod experiments;
mod json;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, ExperimentConfig};
use experiments::{run_experiment, Outcome};
use json::{render, Json};

/// Output directory override; the report still echoes the configured
/// path so the bytes do not depend on the environment.
const OUTPUT_DIR_ENV: &str = "QXENT_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "qxent", version, about = "Information-production experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run { config: PathBuf },
    /// Print what an experiment computes and which config keys it reads.
    Describe { experiment: String },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match cmd_run(&config) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(2),
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
        Command::Describe { experiment } => match cmd_describe(&experiment) {
            Ok(()) => ExitCode::SUCCESS,
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
    }
}

fn cmd_run(path: &Path) -> Result<bool, String> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&raw).map_err(|e| format!("invalid config: {e}"))?;
    cfg.validate().map_err(|e| format!("invalid config: {e}"))?;

    // Compute everything before touching the filesystem so a failed run
    // leaves no partial outputs behind.
    let outcome = run_experiment(&cfg)?;
    let report = build_report(&cfg, &outcome);

    let out_dir = std::env::var(OUTPUT_DIR_ENV).unwrap_or_else(|_| cfg.output_dir.clone());
    let out_dir = PathBuf::from(out_dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    write_file(&out_dir.join("report.json"), &render(&report))?;
    for (name, body) in &outcome.csv_files {
        write_file(&out_dir.join(name), body)?;
    }

    for c in &outcome.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {}: value {:.3e}, residual {:.3e}, tolerance {:.3e}",
            c.name, c.value, c.residual, c.tolerance
        );
    }
    Ok(outcome.all_pass())
}

fn write_file(path: &Path, body: &str) -> Result<(), String> {
    std::fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn build_report(cfg: &ExperimentConfig, outcome: &Outcome) -> Json {
    let mut report = Json::obj();
    report.push("version", Json::Str(env!("CARGO_PKG_VERSION").into()));
    report.push("config", cfg.echo());
    let checks = outcome
        .checks
        .iter()
        .map(|c| {
            let mut obj = Json::obj();
            obj.push("name", Json::Str(c.name.clone()));
            obj.push("value", Json::Num(c.value));
            obj.push("residual", Json::Num(c.residual));
            obj.push("tolerance", Json::Num(c.tolerance));
            obj.push("pass", Json::Bool(c.pass));
            obj
        })
        .collect();
    report.push("checks", Json::Arr(checks));
    report.push("pass", Json::Bool(outcome.all_pass()));
    report
}

fn cmd_describe(name: &str) -> Result<(), String> {
    let exp = Experiment::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        format!("unknown experiment {name:?}; known experiments: {}", known.join(", "))
    })?;
    println!("{}", describe_text(exp));
    Ok(())
}

fn describe_text(exp: Experiment) -> &'static str {
    match exp {
        Experiment::VerifyJarzynski => "\
verify-jarzynski
  For each seed: draw a random density matrix, measure it in its own
  eigenbasis, push each outcome through a random channel, and build the
  per-outcome information production from cross entropies.
  Checks: the exponential average of minus the information production
  equals the sum of exponentiated cross entropies; its mean equals the
  entropy change; the entropy change is bounded below by the fluctuation
  bound; the transition-probability decomposition rebuilds each atom.
  Config keys: seeds, workers, max_dim, tolerances.identity,
  tolerances.bound.
  Outputs: report.json, instances.csv.",
        Experiment::RandomSuite => "\
random-suite
  Same quantities as verify-jarzynski, cycling channel kinds per seed:
  random Kraus channels, random mixtures of unitaries (unital), and Haar
  unitaries. For unital channels the fluctuation bound is additionally
  checked to be nonnegative.
  Config keys: seeds, workers, max_dim, tolerances.identity,
  tolerances.bound.
  Outputs: report.json, instances.csv.",
        Experiment::Qae => "\
qae
  For each seed: build a rank-limited two-qubit pure-state ensemble,
  train a layered rotation-plus-CNOT circuit to compress it onto one
  qubit, and evaluate the trained circuit.
  Checks: the trained compression cost; the chain linking the
  fluctuation bound, the entropy change, the latent-register entropy,
  the fidelity bound, and the cost bound; agreement of the fluctuation
  bound computed from compressed states with the generic channel route;
  independence of the entropic disturbance from the fresh state.
  Config keys: seeds, workers, qae.layers, qae.max_evals, qae.rank,
  tolerances.cost, tolerances.bound, tolerances.identity.
  Outputs: report.json, instances.csv, cost_trace.csv.",
        Experiment::SpinBoson => "\
spin-boson
  Sweep the interaction time for a qubit dephasing through one bosonic
  mode in a thermal state, simulated in a truncated number basis.
  Checks: the simulated bath-energy change against the closed form; its
  stability under doubling the truncation; unitality of the reduced
  qubit channel; and at every grid point the chain entropy change >=
  fluctuation bound >= 0 and bath-energy change >= 0.
  Config keys: workers, spin_boson.{omega0, omega, g, beta, tau_max,
  tau_points, fock_cutoff}, tolerances.energy, tolerances.identity.
  Outputs: report.json, sweep.csv. Seeds are unused and may be empty.
  Bath dimension is fock_cutoff per mode; the doubling check simulates
  at twice the cutoff, so keep 2 * fock_cutoff * 2 within reach.",
        Experiment::GuessedHeat => "\
guessed-heat
  For each seed: draw a random qubit-plus-qubit-bath unitary with Gibbs
  endpoints (the final Hamiltonian is synthesized from the channel
  output), plus one dephasing reference instance reported as seed -1.
  Checks: the guessed-heat fluctuation identity; the second law with
  guessed heat in place of true heat; the exergy upper bound.
  Config keys: seeds, workers, guessed_heat.{beta, coupling,
  fock_cutoff, tau}, tolerances.guessed_identity, tolerances.bound.
  Outputs: report.json, instances.csv.",
    }
}
