// SPDX-License-Identifier: Apache-2.0

//! Declarative scenario files.
//!
//! A scenario is line-oriented: one JSON object per line, selected by its
//! `op` field. Blank lines and lines starting with `#` are ignored.
//!
//! ```text
//! {"op":"scenario","name":"table2_roundtrip"}
//! {"op":"actor","role":"PU","address":"0x0aa7652b45d957b9d2de60afbbd90b2dad3d1f60"}
//! {"op":"cost_weights","slot_write_new":20000}
//! {"op":"mint_nfst","caller":"SMA","to":"PU","channel":"ch-1","location":"cell-A"}
//! {"op":"transfer","from":"PU","to":"SU","pu":"PU","shares":"0.3"}
//! {"op":"assert_share","pu":"PU","holder":"PU","share":2}
//! ```
//!
//! Steps name actors by role; a role must be declared before use. Amounts
//! are strings, given either as `"amount"` (integer atto-shares) or as
//! `"shares"` (decimal share notation, at most 18 fractional digits).

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use crate::address::Address;
use crate::amount::{format_shares, parse_atto, parse_shares, ShareAmount};
use crate::cost::Weights;
use crate::error::{AmountError, LedgerError};
use crate::ledger::{Contracts, SpectrumLedger};
use crate::token::TokenId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line} (step {step}): undeclared actor {role:?}")]
    UnknownActor {
        line: usize,
        step: usize,
        role: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step<S> {
    MintNfst {
        caller: Address,
        to: Address,
        channel: String,
        location: String,
    },
    ReclaimNfst {
        caller: Address,
        token_id: TokenId,
    },
    StakeNfst {
        pu: Address,
        token_id: TokenId,
    },
    SetLockOrder {
        caller: Address,
        token_ids: Vec<TokenId>,
    },
    SetUnlockOrder {
        caller: Address,
        token_ids: Vec<TokenId>,
    },
    Transfer {
        from: Address,
        to: Address,
        pu: Address,
        amount: S,
    },
    MintRnfst {
        pu: Address,
    },
    SetUser {
        caller: Address,
        token_id: TokenId,
        user: Address,
        expires: u64,
        now: u64,
    },
    AssertBalance {
        pu: Address,
        holder: Address,
        amount: S,
    },
    AssertShare {
        pu: Address,
        holder: Address,
        share: u64,
    },
    AssertLocked {
        pu: Address,
        token_ids: Vec<TokenId>,
    },
    AssertUnlocked {
        pu: Address,
        token_ids: Vec<TokenId>,
    },
    AssertUser {
        token_id: TokenId,
        now: u64,
        user: Address,
    },
}

impl<S> Step<S> {
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            Step::AssertBalance { .. }
                | Step::AssertShare { .. }
                | Step::AssertLocked { .. }
                | Step::AssertUnlocked { .. }
                | Step::AssertUser { .. }
        )
    }

    pub fn is_rental(&self) -> bool {
        matches!(
            self,
            Step::MintRnfst { .. } | Step::SetUser { .. } | Step::AssertUser { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario<S> {
    pub name: String,
    /// Declared roles in declaration order.
    pub actors: Vec<(String, Address)>,
    pub cost_weights: Option<Weights>,
    pub steps: Vec<Step<S>>,
    /// 1-based source line of each step.
    pub step_lines: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum Line {
    Scenario {
        name: String,
    },
    Actor {
        role: String,
        address: Address,
    },
    CostWeights(Weights),
    MintNfst {
        caller: String,
        to: String,
        channel: String,
        location: String,
    },
    ReclaimNfst {
        caller: String,
        token_id: u64,
    },
    StakeNfst {
        pu: String,
        token_id: u64,
    },
    SetLockOrder {
        caller: String,
        token_ids: Vec<u64>,
    },
    SetUnlockOrder {
        caller: String,
        token_ids: Vec<u64>,
    },
    Transfer {
        from: String,
        to: String,
        pu: String,
        amount: Option<String>,
        shares: Option<String>,
    },
    MintRnfst {
        pu: String,
    },
    SetUser {
        caller: String,
        token_id: u64,
        user: String,
        expires: u64,
        now: u64,
    },
    AssertBalance {
        pu: String,
        holder: String,
        amount: Option<String>,
        shares: Option<String>,
    },
    AssertShare {
        pu: String,
        holder: String,
        share: u64,
    },
    AssertLocked {
        pu: String,
        token_ids: Vec<u64>,
    },
    AssertUnlocked {
        pu: String,
        token_ids: Vec<u64>,
    },
    AssertUser {
        token_id: u64,
        now: u64,
        /// `null` asserts that nobody holds the user role.
        user: Option<String>,
    },
}

fn ids(v: Vec<u64>) -> Vec<TokenId> {
    v.into_iter().map(TokenId).collect()
}

fn amount_of<S: ShareAmount>(amount: Option<String>, shares: Option<String>) -> Result<S, String> {
    let parsed: Result<S, AmountError> = match (amount, shares) {
        (Some(a), None) => parse_atto(&a),
        (None, Some(s)) => parse_shares(&s),
        (None, None) => return Err("missing \"amount\" or \"shares\"".into()),
        (Some(_), Some(_)) => return Err("give either \"amount\" or \"shares\", not both".into()),
    };
    parsed.map_err(|e| e.to_string())
}

struct Resolver<'a> {
    actors: &'a BTreeMap<String, Address>,
    line: usize,
    step: usize,
}

impl Resolver<'_> {
    fn get(&self, role: &str) -> Result<Address, ScenarioError> {
        self.actors
            .get(role)
            .copied()
            .ok_or_else(|| ScenarioError::UnknownActor {
                line: self.line,
                step: self.step,
                role: role.to_owned(),
            })
    }
}

impl<S: ShareAmount> Scenario<S> {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut name = None;
        let mut actors = BTreeMap::new();
        let mut declared = Vec::new();
        let mut cost_weights = None;
        let mut steps = Vec::new();
        let mut step_lines = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let perr = |message: String| ScenarioError::Parse { line, message };
            let parsed: Line = serde_json::from_str(trimmed).map_err(|e| perr(e.to_string()))?;
            let r = Resolver {
                actors: &actors,
                line,
                step: steps.len(),
            };
            let step = match parsed {
                Line::Scenario { name: n } => {
                    if name.replace(n).is_some() {
                        return Err(perr("scenario name given twice".into()));
                    }
                    continue;
                }
                Line::Actor { role, address } => {
                    if actors.insert(role.clone(), address).is_some() {
                        return Err(perr(format!("actor {role:?} declared twice")));
                    }
                    declared.push((role, address));
                    continue;
                }
                Line::CostWeights(w) => {
                    if cost_weights.replace(w).is_some() {
                        return Err(perr("cost_weights given twice".into()));
                    }
                    continue;
                }
                Line::MintNfst {
                    caller,
                    to,
                    channel,
                    location,
                } => Step::MintNfst {
                    caller: r.get(&caller)?,
                    to: r.get(&to)?,
                    channel,
                    location,
                },
                Line::ReclaimNfst { caller, token_id } => Step::ReclaimNfst {
                    caller: r.get(&caller)?,
                    token_id: TokenId(token_id),
                },
                Line::StakeNfst { pu, token_id } => Step::StakeNfst {
                    pu: r.get(&pu)?,
                    token_id: TokenId(token_id),
                },
                Line::SetLockOrder { caller, token_ids } => Step::SetLockOrder {
                    caller: r.get(&caller)?,
                    token_ids: ids(token_ids),
                },
                Line::SetUnlockOrder { caller, token_ids } => Step::SetUnlockOrder {
                    caller: r.get(&caller)?,
                    token_ids: ids(token_ids),
                },
                Line::Transfer {
                    from,
                    to,
                    pu,
                    amount,
                    shares,
                } => Step::Transfer {
                    from: r.get(&from)?,
                    to: r.get(&to)?,
                    pu: r.get(&pu)?,
                    amount: amount_of(amount, shares).map_err(perr)?,
                },
                Line::MintRnfst { pu } => Step::MintRnfst { pu: r.get(&pu)? },
                Line::SetUser {
                    caller,
                    token_id,
                    user,
                    expires,
                    now,
                } => Step::SetUser {
                    caller: r.get(&caller)?,
                    token_id: TokenId(token_id),
                    user: r.get(&user)?,
                    expires,
                    now,
                },
                Line::AssertBalance {
                    pu,
                    holder,
                    amount,
                    shares,
                } => Step::AssertBalance {
                    pu: r.get(&pu)?,
                    holder: r.get(&holder)?,
                    amount: amount_of(amount, shares).map_err(perr)?,
                },
                Line::AssertShare { pu, holder, share } => Step::AssertShare {
                    pu: r.get(&pu)?,
                    holder: r.get(&holder)?,
                    share,
                },
                Line::AssertLocked { pu, token_ids } => Step::AssertLocked {
                    pu: r.get(&pu)?,
                    token_ids: ids(token_ids),
                },
                Line::AssertUnlocked { pu, token_ids } => Step::AssertUnlocked {
                    pu: r.get(&pu)?,
                    token_ids: ids(token_ids),
                },
                Line::AssertUser {
                    token_id,
                    now,
                    user,
                } => Step::AssertUser {
                    token_id: TokenId(token_id),
                    now,
                    user: match user {
                        Some(u) => r.get(&u)?,
                        None => Address::ZERO,
                    },
                },
            };
            steps.push(step);
            step_lines.push(line);
        }

        Ok(Scenario {
            name: name.unwrap_or_else(|| "unnamed".to_owned()),
            actors: declared,
            cost_weights,
            steps,
            step_lines,
        })
    }

    pub fn actor(&self, role: &str) -> Option<Address> {
        self.actors.iter().find(|(r, _)| r == role).map(|(_, a)| *a)
    }

    pub fn role_of(&self, address: &Address) -> Option<&str> {
        self.actors
            .iter()
            .find(|(_, a)| a == address)
            .map(|(r, _)| r.as_str())
    }

    /// Contract addresses for this scenario; an `SMA` actor overrides the
    /// default authority.
    pub fn contracts(&self) -> Contracts {
        let mut c = Contracts::default();
        if let Some(sma) = self.actor("SMA") {
            c.sma = sma;
        }
        c
    }

    pub fn weights(&self) -> Weights {
        self.cost_weights.unwrap_or_default()
    }

    /// Same scenario with the steps rejected by `drop` removed.
    pub fn without_steps(&self, mut drop: impl FnMut(&Step<S>) -> bool) -> Self {
        let (steps, step_lines) = self
            .steps
            .iter()
            .cloned()
            .zip(self.step_lines.iter().copied())
            .filter(|(s, _)| !drop(s))
            .unzip();
        Scenario {
            steps,
            step_lines,
            ..self.clone()
        }
    }

    /// Runs every step on a fresh ledger, stopping at the first failure.
    pub fn run(&self) -> RunReport<S> {
        let mut ledger = SpectrumLedger::new(self.contracts());
        let mut failure = None;
        let mut steps_run = 0;
        for (i, step) in self.steps.iter().enumerate() {
            if let Err(kind) = execute_step(&mut ledger, step) {
                failure = Some(StepFailure {
                    step: i,
                    line: self.step_lines[i],
                    kind,
                });
                break;
            }
            steps_run += 1;
        }
        RunReport {
            ledger,
            steps_run,
            failure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FailureKind {
    #[error("engine error: {0}")]
    Engine(#[from] LedgerError),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step} (line {line}): {kind}")]
pub struct StepFailure {
    pub step: usize,
    pub line: usize,
    pub kind: FailureKind,
}

#[derive(Debug, Clone)]
pub struct RunReport<S> {
    pub ledger: SpectrumLedger<S>,
    pub steps_run: usize,
    pub failure: Option<StepFailure>,
}

impl<S> RunReport<S> {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

fn check(cond: bool, message: impl FnOnce() -> String) -> Result<(), FailureKind> {
    if cond {
        Ok(())
    } else {
        Err(FailureKind::Assertion(message()))
    }
}

/// Applies one step. Assertions only read.
pub fn execute_step<S: ShareAmount>(
    ledger: &mut SpectrumLedger<S>,
    step: &Step<S>,
) -> Result<(), FailureKind> {
    match step {
        Step::MintNfst {
            caller,
            to,
            channel,
            location,
        } => {
            ledger.mint_nfst(*caller, *to, channel, location)?;
        }
        Step::ReclaimNfst { caller, token_id } => ledger.reclaim_nfst(*caller, *token_id)?,
        Step::StakeNfst { pu, token_id } => ledger.stake_nfst(*pu, *token_id)?,
        Step::SetLockOrder { caller, token_ids } => {
            ledger.set_lock_order(*caller, token_ids.clone())?
        }
        Step::SetUnlockOrder { caller, token_ids } => {
            ledger.set_unlock_order(*caller, token_ids.clone())?
        }
        Step::Transfer {
            from,
            to,
            pu,
            amount,
        } => {
            ledger.transfer(*from, *to, *pu, amount.clone())?;
        }
        Step::MintRnfst { pu } => {
            ledger.mint_rnfst(*pu)?;
        }
        Step::SetUser {
            caller,
            token_id,
            user,
            expires,
            now,
        } => ledger.set_user(*caller, *token_id, *user, *expires, *now)?,
        Step::AssertBalance { pu, holder, amount } => {
            let actual = ledger.balance_of(pu, holder);
            check(actual == *amount, || {
                format!(
                    "balance of {holder} in {pu} is {} shares, expected {}",
                    format_shares(&actual),
                    format_shares(amount)
                )
            })?;
        }
        Step::AssertShare { pu, holder, share } => {
            let actual = ledger.share_of(pu, holder);
            check(actual == *share, || {
                format!("share of {holder} in {pu} is {actual}, expected {share}")
            })?;
        }
        Step::AssertLocked { pu, token_ids } => {
            for id in token_ids {
                check(ledger.locked_of(pu).contains(id), || {
                    format!(
                        "SNFST {id} of {pu} is not locked (locked: {:?})",
                        ledger.locked_of(pu)
                    )
                })?;
            }
        }
        Step::AssertUnlocked { pu, token_ids } => {
            for id in token_ids {
                check(ledger.unlocked_of(pu).contains(id), || {
                    format!(
                        "SNFST {id} of {pu} is not unlocked (unlocked: {:?})",
                        ledger.unlocked_of(pu)
                    )
                })?;
            }
        }
        Step::AssertUser {
            token_id,
            now,
            user,
        } => {
            let actual = ledger.user_of(*token_id, *now)?;
            check(actual == *user, || {
                format!("user of RNFST {token_id} at {now} is {actual}, expected {user}")
            })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = r#"
{"op":"scenario","name":"t"}
{"op":"actor","role":"SMA","address":"0x50c0720d772d21017d0bd4d1cb1357b3dc59bcb0"}
{"op":"actor","role":"PU","address":"0x0aa7652b45d957b9d2de60afbbd90b2dad3d1f60"}
{"op":"actor","role":"SU","address":"0x408dd44b2c2ebfd0f9b66a448eea7293b3c1f9f0"}
"#;

    fn parse(body: &str) -> Result<Scenario<u128>, ScenarioError> {
        Scenario::parse(&format!("{HEADER}{body}"))
    }

    #[test]
    fn parses_both_amount_forms() {
        let s = parse(
            r#"{"op":"transfer","from":"PU","to":"SU","pu":"PU","shares":"0.3"}
{"op":"transfer","from":"PU","to":"SU","pu":"PU","amount":"300000000000000000"}"#,
        )
        .unwrap();
        assert_eq!(s.steps[0], s.steps[1]);
        assert_eq!(s.step_lines, vec![6, 7]);
    }

    #[test]
    fn amount_errors_are_parse_errors() {
        for body in [
            r#"{"op":"transfer","from":"PU","to":"SU","pu":"PU"}"#,
            r#"{"op":"transfer","from":"PU","to":"SU","pu":"PU","shares":"0.3","amount":"1"}"#,
            r#"{"op":"transfer","from":"PU","to":"SU","pu":"PU","shares":"0.1234567890123456789"}"#,
            r#"{"op":"transfer","from":"PU","to":"SU","pu":"PU","amount":"0.3"}"#,
        ] {
            assert!(
                matches!(parse(body), Err(ScenarioError::Parse { line: 6, .. })),
                "{body}"
            );
        }
    }

    #[test]
    fn undeclared_actor_reports_step() {
        let err = parse(
            r#"{"op":"mint_nfst","caller":"SMA","to":"PU","channel":"c","location":"l"}
{"op":"stake_nfst","pu":"NDASP","token_id":1}"#,
        )
        .unwrap_err();
        assert_eq!(
            err,
            ScenarioError::UnknownActor {
                line: 7,
                step: 1,
                role: "NDASP".into()
            }
        );
    }

    #[test]
    fn malformed_and_unknown_fields() {
        assert!(matches!(
            parse("{not json"),
            Err(ScenarioError::Parse { .. })
        ));
        assert!(matches!(
            parse(r#"{"op":"explode"}"#),
            Err(ScenarioError::Parse { .. })
        ));
        assert!(matches!(
            parse(r#"{"op":"mint_rnfst","pu":"PU","extra":1}"#),
            Err(ScenarioError::Parse { .. })
        ));
    }

    #[test]
    fn comments_and_weights() {
        let s = parse(
            "# a comment\n\n{\"op\":\"cost_weights\",\"slot_read\":1}\n{\"op\":\"mint_rnfst\",\"pu\":\"PU\"}",
        )
        .unwrap();
        assert_eq!(s.weights().slot_read, 1);
        assert_eq!(
            s.weights().slot_write_new,
            Weights::default().slot_write_new
        );
        assert_eq!(s.steps.len(), 1);
        assert_eq!(s.contracts().sma, s.actor("SMA").unwrap());
    }

    #[test]
    fn failing_assertion_stops_run() {
        let s = parse(
            r#"{"op":"mint_nfst","caller":"SMA","to":"PU","channel":"c","location":"l"}
{"op":"assert_share","pu":"PU","holder":"PU","share":1}
{"op":"stake_nfst","pu":"PU","token_id":1}"#,
        )
        .unwrap();
        let report = s.run();
        let failure = report.failure.unwrap();
        assert_eq!(failure.step, 1);
        assert_eq!(failure.line, 7);
        assert!(matches!(failure.kind, FailureKind::Assertion(_)));
        assert_eq!(report.steps_run, 1);
        assert_eq!(report.ledger.journal().len(), 1);
    }

    #[test]
    fn engine_error_stops_run() {
        let s = parse(r#"{"op":"stake_nfst","pu":"PU","token_id":1}"#).unwrap();
        let failure = s.run().failure.unwrap();
        assert_eq!(failure.step, 0);
        assert!(matches!(
            failure.kind,
            FailureKind::Engine(LedgerError::NotFound { .. })
        ));
    }

    #[test]
    fn null_user_asserts_no_renter() {
        let s = parse(
            r#"{"op":"mint_nfst","caller":"SMA","to":"PU","channel":"c","location":"l"}
{"op":"mint_rnfst","pu":"PU"}
{"op":"assert_user","token_id":1,"now":0,"user":null}
{"op":"set_user","caller":"PU","token_id":1,"user":"SU","expires":100,"now":0}
{"op":"assert_user","token_id":1,"now":99,"user":"SU"}
{"op":"assert_user","token_id":1,"now":100,"user":null}"#,
        )
        .unwrap();
        assert!(s.run().succeeded());
        let stripped = s.without_steps(Step::is_rental);
        assert_eq!(stripped.steps.len(), 1);
        assert_eq!(stripped.step_lines, vec![6]);
    }
}
