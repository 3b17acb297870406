// SPDX-License-Identifier: Apache-2.0

//! `sftlock`: run scenarios, trace token lifecycles, replay journals and
//! compare against the hybrid baseline.
//!
//! Exit status is 0 on success, 1 when the engine rejects a step or an
//! assertion fails, and 2 for usage, parse and I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde_json::json;
use sftlock_core::compare::{compare, CompareError};
use sftlock_core::scenario::StepFailure;
use sftlock_core::{format_shares, replay, Journal, Scenario, TokenId, Weights};

#[derive(Parser)]
#[command(
    name = "sftlock",
    version,
    about = "Spectrum securitization ledger scenarios"
)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// JSON file of cost weights; overrides the scenario's `cost_weights`.
    #[arg(long, global = true, value_name = "FILE")]
    weights: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write `<name>.journal` next to it.
    Run { file: PathBuf },
    /// List the journal events touching one token.
    Trace { journal: PathBuf, token_id: u64 },
    /// Run a scenario on the engine and on the hybrid baseline side by side.
    Compare { file: PathBuf },
    /// Rebuild state from a journal and print its digest.
    Replay { journal: PathBuf },
}

enum Failure {
    /// Bad input: exit 2.
    Usage(anyhow::Error),
    /// Rejected step, failed assertion or invalid journal history: exit 1.
    Run(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { file } => run(&cli, file),
        Command::Trace { journal, token_id } => trace(&cli, journal, TokenId(*token_id)),
        Command::Compare { file } => compare_cmd(&cli, file),
        Command::Replay { journal } => replay_cmd(&cli, journal),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Scenario::parse(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn load_journal(path: &Path) -> Result<Journal, Failure> {
    let parsed = Journal::load(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parsed.with_context(|| format!("parsing {}", path.display()))?)
}

fn weights(cli: &Cli, scenario: Option<&Scenario>) -> Result<Weights, Failure> {
    match &cli.weights {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(serde_json::from_str(&text)
                .with_context(|| format!("parsing weights {}", path.display()))?)
        }
        None => Ok(scenario.map(Scenario::weights).unwrap_or_default()),
    }
}

fn failure_json(f: &StepFailure) -> serde_json::Value {
    json!({ "step": f.step, "line": f.line, "message": f.kind.to_string() })
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("JSON values always encode")
    );
}

fn journal_path(file: &Path) -> PathBuf {
    file.with_extension("journal")
}

fn run(cli: &Cli, file: &Path) -> Outcome {
    let scenario = load_scenario(file)?;
    let weights = weights(cli, Some(&scenario))?;
    let report = scenario.run();
    let ledger = &report.ledger;

    let out = journal_path(file);
    ledger
        .journal()
        .save(&out)
        .with_context(|| format!("writing {}", out.display()))?;

    let name = |a: &sftlock_core::Address| {
        scenario
            .role_of(a)
            .map_or_else(|| a.to_string(), str::to_owned)
    };
    let shares = &ledger.state().securitization.shares;
    let costs = ledger.costs().summary(&weights);

    if cli.json {
        let balances: serde_json::Map<_, _> = shares
            .namespaces()
            .map(|pu| {
                let holders: serde_json::Map<_, _> = shares
                    .holders(pu)
                    .map(|(h, b)| (name(h), json!(b.to_string())))
                    .collect();
                (name(pu), holders.into())
            })
            .collect();
        print_json(&json!({
            "scenario": scenario.name,
            "ok": report.succeeded(),
            "steps": scenario.steps.len(),
            "steps_run": report.steps_run,
            "events": ledger.journal().len(),
            "journal": out.display().to_string(),
            "digest": ledger.digest().to_string(),
            "balances": balances,
            "costs": costs.to_json(),
            "failure": report.failure.as_ref().map(failure_json),
        }));
    } else {
        println!(
            "scenario {}: {}/{} steps",
            scenario.name,
            report.steps_run,
            scenario.steps.len()
        );
        println!(
            "journal  {} ({} events)",
            out.display(),
            ledger.journal().len()
        );
        println!("digest   {}", ledger.digest());
        for pu in shares.namespaces() {
            println!("namespace {}", name(pu));
            for (holder, balance) in shares.holders(pu) {
                println!("  {:<12} {}", name(holder), format_shares(balance));
            }
            println!("  locked   {:?}", ledger.locked_of(pu));
            println!("  unlocked {:?}", ledger.unlocked_of(pu));
        }
        print!("{costs}");
    }

    match report.failure {
        Some(f) => Err(Failure::Run(anyhow!(f))),
        None => Ok(()),
    }
}

fn trace(cli: &Cli, path: &Path, token: TokenId) -> Outcome {
    let journal = load_journal(path)?;
    let events = journal.trace(token);
    if cli.json {
        let values: Vec<_> = events
            .iter()
            .map(|e| serde_json::to_value(e).expect("events encode"))
            .collect();
        print_json(&json!(values));
    } else {
        for e in events {
            println!("{e}");
        }
    }
    Ok(())
}

fn compare_cmd(cli: &Cli, file: &Path) -> Outcome {
    let scenario = load_scenario(file)?;
    let weights = weights(cli, Some(&scenario))?;
    let c = compare(&scenario, Some(&weights)).map_err(|e| match e {
        CompareError::MultipleNamespaces(_) => Failure::Usage(e.into()),
        CompareError::Baseline { .. } => Failure::Run(e.into()),
    })?;
    if cli.json {
        print_json(&c.to_json());
    } else {
        print!("{c}");
    }
    match c.failure {
        Some(f) => Err(Failure::Run(anyhow!(f))),
        None => Ok(()),
    }
}

fn replay_cmd(cli: &Cli, path: &Path) -> Outcome {
    let journal = load_journal(path)?;
    let state = replay(&journal).map_err(|e| Failure::Run(e.into()))?;
    let digest = state.digest();
    if cli.json {
        print_json(&json!({ "events": journal.len(), "digest": digest.to_string() }));
    } else {
        println!("replayed {} events", journal.len());
        println!("digest   {digest}");
    }
    Ok(())
}
