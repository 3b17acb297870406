// SPDX-License-Identifier: Apache-2.0

//! Hybrid fungible/non-fungible ledger in the ERC-404 style.
//!
//! One global pool of atto-shares. Every address holds exactly
//! `floor(balance / 10^18)` NFTs; when a transfer moves that count, the
//! sender's NFTs are burned from the front of its list and the receiver gets
//! freshly numbered ones. Burned ids are gone for good.

use std::collections::{BTreeMap, BTreeSet};

use crate::address::Address;
use crate::amount::ShareAmount;
use crate::cost::{CostLedger, OpKind, Primitive};
use crate::error::LedgerError;
use crate::token::TokenId;

#[derive(Debug, Clone)]
pub struct HybridLedger<S> {
    balances: BTreeMap<Address, S>,
    held: BTreeMap<Address, Vec<TokenId>>,
    nft_counter: u64,
    costs: CostLedger,
}

impl<S> Default for HybridLedger<S> {
    fn default() -> Self {
        HybridLedger {
            balances: BTreeMap::new(),
            held: BTreeMap::new(),
            nft_counter: 0,
            costs: CostLedger::default(),
        }
    }
}

/// NFTs destroyed and created by one hybrid transfer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HybridOutcome {
    pub burned: Vec<TokenId>,
    pub minted: Vec<TokenId>,
}

impl<S: ShareAmount> HybridLedger<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn balance_of(&self, a: &Address) -> S {
        self.balances.get(a).cloned().unwrap_or_else(S::zero)
    }

    pub fn held(&self, a: &Address) -> &[TokenId] {
        self.held.get(a).map_or(&[], Vec::as_slice)
    }

    /// Every NFT id currently in existence.
    pub fn live_ids(&self) -> BTreeSet<TokenId> {
        self.held.values().flatten().copied().collect()
    }

    pub fn nft_counter(&self) -> u64 {
        self.nft_counter
    }

    pub fn costs(&self) -> &CostLedger {
        &self.costs
    }

    /// Mints `units` whole shares to `to`, each with a fresh NFT.
    pub fn hybrid_mint(&mut self, to: Address, units: u64) -> Result<Vec<TokenId>, LedgerError> {
        if to.is_zero() {
            return Err(LedgerError::InvalidRecipient);
        }
        if units == 0 {
            return Err(LedgerError::Invariant(
                "hybrid mint needs at least one unit".into(),
            ));
        }
        let amount = S::from_shares(units).map_err(|_| LedgerError::Overflow)?;
        let balance = self
            .balance_of(&to)
            .checked_add(&amount)
            .ok_or(LedgerError::Overflow)?;
        self.nft_counter
            .checked_add(units)
            .ok_or(LedgerError::Overflow)?;

        self.costs.begin(OpKind::HybridTransfer);
        self.costs.record(
            OpKind::HybridTransfer,
            if self.balances.contains_key(&to) {
                Primitive::SlotUpdate
            } else {
                Primitive::SlotWriteNew
            },
            1,
        );
        self.balances.insert(to, balance);
        Ok((0..units).map(|_| self.mint_nft(to)).collect())
    }

    /// Moves `amount` atto-shares and burns/mints NFTs to restore the
    /// floor-share count on both sides.
    pub fn hybrid_transfer(
        &mut self,
        from: Address,
        to: Address,
        amount: S,
    ) -> Result<HybridOutcome, LedgerError> {
        if to.is_zero() {
            return Err(LedgerError::InvalidRecipient);
        }
        if from.is_zero() {
            return Err(LedgerError::InvalidSender);
        }
        let from_bal = self.balance_of(&from);
        if from_bal < amount {
            return Err(LedgerError::InsufficientBalance {
                holder: from,
                primary_user: Address::ZERO,
                balance: from_bal.to_string(),
                requested: amount.to_string(),
            });
        }
        let op = OpKind::HybridTransfer;
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotRead, 2);
        if from == to || amount.is_zero() {
            return Ok(HybridOutcome::default());
        }
        let to_bal = self.balance_of(&to);
        let new_to = to_bal.checked_add(&amount).ok_or(LedgerError::Overflow)?;
        let new_from = from_bal.clone() - amount;

        let burn = from_bal.whole_shares() - new_from.whole_shares();
        let mint = new_to.whole_shares() - to_bal.whole_shares();
        self.nft_counter
            .checked_add(mint)
            .ok_or(LedgerError::Overflow)?;

        self.costs.record(
            op,
            if new_from.is_zero() {
                Primitive::SlotDelete
            } else {
                Primitive::SlotUpdate
            },
            1,
        );
        self.costs.record(
            op,
            if to_bal.is_zero() {
                Primitive::SlotWriteNew
            } else {
                Primitive::SlotUpdate
            },
            1,
        );
        for (a, b) in [(from, new_from), (to, new_to)] {
            if b.is_zero() {
                self.balances.remove(&a);
            } else {
                self.balances.insert(a, b);
            }
        }

        let mut outcome = HybridOutcome::default();
        for _ in 0..burn {
            outcome.burned.push(self.burn_front(from));
        }
        for _ in 0..mint {
            outcome.minted.push(self.mint_nft(to));
        }
        Ok(outcome)
    }

    fn mint_nft(&mut self, to: Address) -> TokenId {
        self.nft_counter += 1;
        let id = TokenId(self.nft_counter);
        self.held.entry(to).or_default().push(id);

        let op = OpKind::NftMint;
        self.costs.begin(op);
        // owner-of slot and holder index slot
        self.costs.record(op, Primitive::SlotWriteNew, 2);
        self.costs.record(op, Primitive::SlotUpdate, 1);
        self.costs.record(op, Primitive::ListInsert, 1);
        self.costs.record(op, Primitive::EventEmit, 1);
        id
    }

    fn burn_front(&mut self, from: Address) -> TokenId {
        let ids = self
            .held
            .get_mut(&from)
            .expect("floor-share count implies held NFTs");
        let id = ids.remove(0);
        if ids.is_empty() {
            self.held.remove(&from);
        }

        let op = OpKind::NftBurn;
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotRead, 1);
        self.costs.record(op, Primitive::SlotDelete, 2);
        self.costs.record(op, Primitive::ListRemove, 1);
        self.costs.record(op, Primitive::EventEmit, 1);
        id
    }
}
