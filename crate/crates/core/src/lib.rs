// SPDX-License-Identifier: Apache-2.0

//! Deterministic, event-sourced ledger for spectrum securitization.
//!
//! An authority mints NFSTs (one per channel/location) to primary users.
//! A primary user stakes an NFST into escrow and receives an SNFST with the
//! same id plus one whole share of fungible SFST in its own namespace.
//! Shares move freely; whenever the primary user's own whole-share count
//! drops or rises, the matching number of its SNFSTs lock or unlock. No
//! SNFST is ever created or destroyed by a transfer.
//!
//! Alongside the engine live a mint/burn hybrid baseline for differential
//! comparison, a storage-primitive cost model, journal replay, and the
//! scenario format driving the CLI.
//!
//! The engine is generic over the unsigned integer type that stores
//! atto-share balances. [`Ledger`] and friends fix it to `u128`;
//! [`BigLedger`] uses arbitrary precision.

pub mod address;
pub mod amount;
pub mod authorization;
pub mod baseline;
pub mod compare;
pub mod cost;
pub mod error;
pub mod event;
pub mod journal;
pub mod ledger;
pub mod replay;
pub mod scenario;
pub mod securitization;
pub mod sharing;
pub mod state;
pub mod token;

pub use address::Address;
pub use amount::{format_shares, parse_atto, parse_shares, ShareAmount, ATTO_PER_SHARE};
pub use cost::{CostLedger, CostReport, OpKind, Primitive, Reduction, Weights};
pub use error::{AmountError, JournalError, LedgerError, ReplayError};
pub use event::{EventKind, EventPayload};
pub use ledger::{Contracts, SpectrumLedger};
pub use replay::{replay, replay_text, Replayer};
pub use state::StateDigest;
pub use token::TokenId;

/// Atto-share balance type used by the concrete aliases.
pub type Atto = u128;

pub type Ledger = SpectrumLedger<Atto>;
pub type Baseline = baseline::HybridLedger<Atto>;
pub type Event = event::Event<Atto>;
pub type Journal = journal::Journal<Atto>;
pub type SystemState = state::SystemState<Atto>;
pub type Scenario = scenario::Scenario<Atto>;

pub type BigLedger = SpectrumLedger<num_bigint::BigUint>;
