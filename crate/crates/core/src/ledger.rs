// SPDX-License-Identifier: Apache-2.0

use crate::address::Address;
use crate::amount::ShareAmount;
use crate::cost::{CostLedger, OpKind, Primitive};
use crate::event::EventPayload;
use crate::journal::Journal;
use crate::state::{StateDigest, SystemState};

/// Addresses of the authority and the three logical contracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contracts {
    /// Spectrum Management Authority, the only NFST minter and reclaimer.
    pub sma: Address,
    /// Emits NFST registry events.
    pub authorization: Address,
    /// Emits SNFST/SFST events and holds staked NFSTs in escrow.
    pub securitization: Address,
    /// Emits rental events.
    pub sharing: Address,
}

impl Default for Contracts {
    fn default() -> Self {
        let parse = |s: &str| s.parse().expect("valid built-in address");
        Contracts {
            sma: parse("0x50c0720d772d21017d0bd4d1cb1357b3dc59bcb0"),
            authorization: parse("0x748998d49e1504df069b7075edfe0b1fe8a7b646"),
            securitization: parse("0xd30c2759bae44819d4817568649664750a78b10f"),
            sharing: parse("0x4907a1c0ffee4907a1c0ffee4907a1c0ffee4907"),
        }
    }
}

/// The lock/unlock securitization engine.
///
/// All mutations go through `&mut self`, so one ledger is one serialized
/// command stream. Every successful mutation appends at least one event; a
/// failed one changes nothing.
#[derive(Debug, Clone)]
pub struct SpectrumLedger<S> {
    pub(crate) contracts: Contracts,
    pub(crate) state: SystemState<S>,
    pub(crate) journal: Journal<S>,
    pub(crate) costs: CostLedger,
}

impl<S: ShareAmount> Default for SpectrumLedger<S> {
    fn default() -> Self {
        Self::new(Contracts::default())
    }
}

impl<S: ShareAmount> SpectrumLedger<S> {
    pub fn new(contracts: Contracts) -> Self {
        SpectrumLedger {
            contracts,
            state: SystemState::new(),
            journal: Journal::new(),
            costs: CostLedger::new(),
        }
    }

    pub fn contracts(&self) -> &Contracts {
        &self.contracts
    }

    pub fn state(&self) -> &SystemState<S> {
        &self.state
    }

    pub fn journal(&self) -> &Journal<S> {
        &self.journal
    }

    pub fn costs(&self) -> &CostLedger {
        &self.costs
    }

    pub fn digest(&self) -> StateDigest {
        self.state.digest()
    }

    pub(crate) fn emit(&mut self, op: OpKind, emitter: Address, payload: EventPayload<S>) {
        self.costs.record(op, Primitive::EventEmit, 1);
        self.journal.record(emitter, payload);
    }
}
