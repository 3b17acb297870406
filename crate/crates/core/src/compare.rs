// SPDX-License-Identifier: Apache-2.0

//! Differential run of the engine against the hybrid baseline.
//!
//! Both ledgers see the same step stream. Staking mints one hybrid unit to
//! the primary user; transfers in the primary user's namespace are mirrored
//! as hybrid transfers; every other step only touches the engine. The
//! comparison is restricted to a single namespace because the baseline has
//! only one global pool.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::address::Address;
use crate::amount::ShareAmount;
use crate::baseline::HybridLedger;
use crate::cost::{CostLedger, CostReport, Weights};
use crate::error::LedgerError;
use crate::ledger::SpectrumLedger;
use crate::scenario::{execute_step, Scenario, Step, StepFailure};
use crate::token::TokenId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("comparison needs a single primary-user namespace, found {0:?}")]
    MultipleNamespaces(Vec<Address>),
    #[error("baseline rejected step {step}: {error}")]
    Baseline { step: usize, error: LedgerError },
}

/// A step after which the per-holder NFT counts disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMismatch {
    pub step: usize,
    pub holder: Address,
    pub engine: u64,
    pub baseline: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdSets {
    pub before: BTreeSet<TokenId>,
    pub after: BTreeSet<TokenId>,
}

impl IdSets {
    /// True when every id present before is still present after.
    pub fn continuous(&self) -> bool {
        self.before.is_subset(&self.after)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub primary_user: Option<Address>,
    pub steps_run: usize,
    pub mismatches: Vec<CountMismatch>,
    /// Engine SNFST ids of the primary user, before the first transfer and at the end.
    pub engine_ids: IdSets,
    /// Baseline NFT ids in existence, before the first transfer and at the end.
    pub baseline_ids: IdSets,
    pub baseline_burned: u64,
    pub costs: CostReport,
    pub failure: Option<StepFailure>,
}

impl Comparison {
    pub fn counts_match(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let ids = |s: &BTreeSet<TokenId>| s.iter().map(|t| t.0).collect::<Vec<_>>();
        let sets = |s: &IdSets| {
            serde_json::json!({
                "before": ids(&s.before),
                "after": ids(&s.after),
                "continuous": s.continuous(),
            })
        };
        serde_json::json!({
            "primary_user": self.primary_user.map(|a| a.to_string()),
            "steps_run": self.steps_run,
            "counts_match": self.counts_match(),
            "mismatches": self.mismatches.iter().map(|m| serde_json::json!({
                "step": m.step,
                "holder": m.holder.to_string(),
                "engine": m.engine,
                "baseline": m.baseline,
            })).collect::<Vec<_>>(),
            "engine_ids": sets(&self.engine_ids),
            "baseline_ids": sets(&self.baseline_ids),
            "baseline_burned": self.baseline_burned,
            "costs": self.costs.to_json(),
            "failure": self.failure.as_ref().map(|f| f.to_string()),
        })
    }
}

fn id_list(s: &BTreeSet<TokenId>) -> String {
    let v: Vec<String> = s.iter().map(ToString::to_string).collect();
    format!("{{{}}}", v.join(", "))
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.primary_user {
            Some(pu) => writeln!(f, "namespace      {pu}")?,
            None => writeln!(f, "namespace      (none)")?,
        }
        writeln!(f, "steps run      {}", self.steps_run)?;
        writeln!(
            f,
            "NFT counts     {}",
            if self.counts_match() {
                "equal after every step".to_owned()
            } else {
                format!("{} mismatches", self.mismatches.len())
            }
        )?;
        for (label, s) in [
            ("SNFST ids", &self.engine_ids),
            ("hybrid ids", &self.baseline_ids),
        ] {
            writeln!(
                f,
                "{label:<14} {} -> {}  ({})",
                id_list(&s.before),
                id_list(&s.after),
                if s.continuous() {
                    "continuous"
                } else {
                    "identity lost"
                }
            )?;
        }
        writeln!(f, "hybrid burns   {}", self.baseline_burned)?;
        if let Some(failure) = &self.failure {
            writeln!(f, "stopped at     {failure}")?;
        }
        write!(f, "{}", self.costs)
    }
}

/// Namespaces touched by staking, orders or transfers.
fn namespaces<S>(scenario: &Scenario<S>) -> Vec<Address> {
    let mut seen = BTreeSet::new();
    for step in &scenario.steps {
        match step {
            Step::StakeNfst { pu, .. } | Step::Transfer { pu, .. } => {
                seen.insert(*pu);
            }
            Step::SetLockOrder { caller, .. } | Step::SetUnlockOrder { caller, .. } => {
                seen.insert(*caller);
            }
            _ => {}
        }
    }
    seen.into_iter().collect()
}

fn engine_count<S: ShareAmount>(ledger: &SpectrumLedger<S>, pu: &Address, holder: &Address) -> u64 {
    if holder == pu {
        ledger.unlocked_of(pu).len() as u64
    } else {
        ledger.share_of(pu, holder)
    }
}

/// Runs `scenario` on both ledgers and reports counts, identity and cost.
///
/// `weights` overrides the scenario's own `cost_weights`.
pub fn compare<S: ShareAmount>(
    scenario: &Scenario<S>,
    weights: Option<&Weights>,
) -> Result<Comparison, CompareError> {
    let spaces = namespaces(scenario);
    if spaces.len() > 1 {
        return Err(CompareError::MultipleNamespaces(spaces));
    }
    let pu = spaces.first().copied();
    let weights = weights.copied().unwrap_or_else(|| scenario.weights());

    let mut engine = SpectrumLedger::<S>::new(scenario.contracts());
    let mut baseline = HybridLedger::<S>::new();
    let mut holders: BTreeSet<Address> = scenario.actors.iter().map(|(_, a)| *a).collect();
    holders.extend(pu);

    let mut mismatches = Vec::new();
    let mut before: Option<(BTreeSet<TokenId>, BTreeSet<TokenId>)> = None;
    let mut burned = 0u64;
    let mut failure = None;
    let mut steps_run = 0;

    for (i, step) in scenario.steps.iter().enumerate() {
        if before.is_none() && matches!(step, Step::Transfer { .. }) {
            let pu = pu.expect("a transfer names a namespace");
            before = Some((
                engine.state().securitization.snfst_ids_of(&pu),
                baseline.live_ids(),
            ));
        }
        if let Err(kind) = execute_step(&mut engine, step) {
            failure = Some(StepFailure {
                step: i,
                line: scenario.step_lines[i],
                kind,
            });
            break;
        }
        let mirrored = match step {
            Step::StakeNfst { pu, .. } => baseline.hybrid_mint(*pu, 1).map(|_| ()),
            Step::Transfer {
                from, to, amount, ..
            } => baseline
                .hybrid_transfer(*from, *to, amount.clone())
                .map(|o| burned += o.burned.len() as u64),
            _ => Ok(()),
        };
        mirrored.map_err(|error| CompareError::Baseline { step: i, error })?;
        steps_run += 1;

        if let Some(pu) = &pu {
            for h in &holders {
                let (e, b) = (engine_count(&engine, pu, h), baseline.held(h).len() as u64);
                if e != b {
                    mismatches.push(CountMismatch {
                        step: i,
                        holder: *h,
                        engine: e,
                        baseline: b,
                    });
                }
            }
        }
    }

    let engine_after = pu
        .map(|pu| engine.state().securitization.snfst_ids_of(&pu))
        .unwrap_or_default();
    let baseline_after = baseline.live_ids();
    let (engine_before, baseline_before) =
        before.unwrap_or_else(|| (engine_after.clone(), baseline_after.clone()));

    let mut costs = CostLedger::new();
    costs.merge(engine.costs());
    costs.merge(baseline.costs());

    Ok(Comparison {
        primary_user: pu,
        steps_run,
        mismatches,
        engine_ids: IdSets {
            before: engine_before,
            after: engine_after,
        },
        baseline_ids: IdSets {
            before: baseline_before,
            after: baseline_after,
        },
        baseline_burned: burned,
        costs: costs.summary(&weights),
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = r#"
{"op":"actor","role":"SMA","address":"0x50c0720d772d21017d0bd4d1cb1357b3dc59bcb0"}
{"op":"actor","role":"PU","address":"0x0aa7652b45d957b9d2de60afbbd90b2dad3d1f60"}
{"op":"actor","role":"PU2","address":"0x0bb7652b45d957b9d2de60afbbd90b2dad3d1f60"}
{"op":"actor","role":"SU","address":"0x408dd44b2c2ebfd0f9b66a448eea7293b3c1f9f0"}
"#;

    const ROUND_TRIP: &str = r#"
{"op":"mint_nfst","caller":"SMA","to":"PU","channel":"ch-1","location":"cell-A"}
{"op":"mint_nfst","caller":"SMA","to":"PU","channel":"ch-2","location":"cell-A"}
{"op":"stake_nfst","pu":"PU","token_id":1}
{"op":"stake_nfst","pu":"PU","token_id":2}
{"op":"set_lock_order","caller":"PU","token_ids":[2,1]}
{"op":"transfer","from":"PU","to":"SU","pu":"PU","shares":"0.3"}
{"op":"transfer","from":"SU","to":"PU","pu":"PU","shares":"0.3"}
"#;

    fn scenario(body: &str) -> Scenario<u128> {
        Scenario::parse(&format!("{HEADER}{body}")).unwrap()
    }

    fn set(ids: &[u64]) -> BTreeSet<TokenId> {
        ids.iter().copied().map(TokenId).collect()
    }

    #[test]
    fn round_trip_keeps_engine_identity_only() {
        let c = compare(&scenario(ROUND_TRIP), None).unwrap();
        assert!(c.failure.is_none());
        assert!(c.counts_match(), "{:?}", c.mismatches);
        assert_eq!(c.engine_ids.before, set(&[1, 2]));
        assert_eq!(c.engine_ids.after, set(&[1, 2]));
        assert!(c.engine_ids.continuous());
        assert_eq!(c.baseline_ids.before, set(&[1, 2]));
        assert_eq!(c.baseline_ids.after, set(&[2, 3]));
        assert!(!c.baseline_ids.continuous());
        assert_eq!(c.baseline_burned, 1);
    }

    #[test]
    fn multiple_namespaces_are_rejected() {
        let s = scenario(
            r#"{"op":"mint_nfst","caller":"SMA","to":"PU","channel":"a","location":"x"}
{"op":"mint_nfst","caller":"SMA","to":"PU2","channel":"b","location":"x"}
{"op":"stake_nfst","pu":"PU","token_id":1}
{"op":"stake_nfst","pu":"PU2","token_id":2}"#,
        );
        assert!(
            matches!(compare(&s, None), Err(CompareError::MultipleNamespaces(v)) if v.len() == 2)
        );
    }

    #[test]
    fn empty_scenario_has_zero_costs() {
        let c = compare(&scenario(""), None).unwrap();
        assert_eq!(c.primary_user, None);
        assert_eq!(c.steps_run, 0);
        assert!(c.costs.mint.is_none() && c.costs.lock.is_none());
        assert!(c.engine_ids.before.is_empty() && c.baseline_ids.after.is_empty());
    }

    #[test]
    fn engine_failure_stops_comparison() {
        let s = scenario(r#"{"op":"transfer","from":"PU","to":"SU","pu":"PU","shares":"1"}"#);
        let c = compare(&s, None).unwrap();
        assert_eq!(c.failure.unwrap().step, 0);
        assert_eq!(c.steps_run, 0);
    }
}
