// SPDX-License-Identifier: Apache-2.0

//! Staking, SNFST lock state and the share transfer engine.
//!
//! Staking an NFST escrows it and mints an unlocked SNFST twin (same token
//! id) plus one whole share to the primary user. From then on the number of
//! unlocked SNFSTs a primary user has always equals the whole shares it still
//! holds in its own namespace. A transfer that lowers that count locks
//! SNFSTs; one that raises it unlocks them. SNFSTs are never minted or burned
//! by transfers, so their ids persist.
//!
//! Order lists let a primary user choose which SNFSTs transition first. An
//! SNFST leaves an order list as soon as its lock state contradicts the
//! list, whichever path changed it, so the front of each list is always a
//! valid candidate.

use std::collections::{BTreeMap, BTreeSet};

use crate::address::Address;
use crate::amount::ShareAmount;
use crate::cost::{OpKind, Primitive};
use crate::error::LedgerError;
use crate::event::EventPayload;
use crate::ledger::SpectrumLedger;
use crate::state::{CanonicalWriter, SystemState};
use crate::token::TokenId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snfst {
    pub token_id: TokenId,
    pub primary_user: Address,
    pub channel: String,
    pub location: String,
    pub locked: bool,
}

/// Per-namespace fungible share balances in atto-shares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SfstLedger<S> {
    balances: BTreeMap<Address, BTreeMap<Address, S>>,
    total_supply: BTreeMap<Address, S>,
}

impl<S> Default for SfstLedger<S> {
    fn default() -> Self {
        SfstLedger {
            balances: BTreeMap::new(),
            total_supply: BTreeMap::new(),
        }
    }
}

impl<S: ShareAmount> SfstLedger<S> {
    pub fn balance_of(&self, pu: &Address, holder: &Address) -> S {
        self.balances
            .get(pu)
            .and_then(|m| m.get(holder))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn total_supply(&self, pu: &Address) -> S {
        self.total_supply.get(pu).cloned().unwrap_or_else(S::zero)
    }

    /// Namespaces that have ever had shares minted.
    pub fn namespaces(&self) -> impl Iterator<Item = &Address> {
        self.total_supply.keys()
    }

    /// Non-zero holders in a namespace.
    pub fn holders(&self, pu: &Address) -> impl Iterator<Item = (&Address, &S)> {
        self.balances.get(pu).into_iter().flat_map(|m| m.iter())
    }

    fn set_balance(&mut self, pu: Address, holder: Address, value: S) {
        let ns = self.balances.entry(pu).or_default();
        if value.is_zero() {
            ns.remove(&holder);
            if ns.is_empty() {
                self.balances.remove(&pu);
            }
        } else {
            ns.insert(holder, value);
        }
    }
}

/// Lock-state lists per primary user.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LockBook {
    locked: BTreeMap<Address, Vec<TokenId>>,
    unlocked: BTreeMap<Address, Vec<TokenId>>,
    lock_order: BTreeMap<Address, Vec<TokenId>>,
    unlock_order: BTreeMap<Address, Vec<TokenId>>,
    origin_owner: BTreeMap<TokenId, Address>,
}

fn list<'a>(map: &'a BTreeMap<Address, Vec<TokenId>>, pu: &Address) -> &'a [TokenId] {
    map.get(pu).map_or(&[], Vec::as_slice)
}

fn push(map: &mut BTreeMap<Address, Vec<TokenId>>, pu: Address, id: TokenId) {
    map.entry(pu).or_default().push(id);
}

/// Removes `id` from `map[pu]`; reports whether it was present.
fn remove(map: &mut BTreeMap<Address, Vec<TokenId>>, pu: &Address, id: TokenId) -> bool {
    let Some(ids) = map.get_mut(pu) else {
        return false;
    };
    let Some(pos) = ids.iter().position(|t| *t == id) else {
        return false;
    };
    ids.remove(pos);
    if ids.is_empty() {
        map.remove(pu);
    }
    true
}

fn replace(map: &mut BTreeMap<Address, Vec<TokenId>>, pu: Address, ids: Vec<TokenId>) -> usize {
    let old = if ids.is_empty() {
        map.remove(&pu)
    } else {
        map.insert(pu, ids)
    };
    old.map_or(0, |v| v.len())
}

impl LockBook {
    pub fn locked_of(&self, pu: &Address) -> &[TokenId] {
        list(&self.locked, pu)
    }

    pub fn unlocked_of(&self, pu: &Address) -> &[TokenId] {
        list(&self.unlocked, pu)
    }

    pub fn lock_order_of(&self, pu: &Address) -> &[TokenId] {
        list(&self.lock_order, pu)
    }

    pub fn unlock_order_of(&self, pu: &Address) -> &[TokenId] {
        list(&self.unlock_order, pu)
    }

    pub fn origin_owner(&self, id: TokenId) -> Option<Address> {
        self.origin_owner.get(&id).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Securitization<S> {
    snfsts: BTreeMap<TokenId, Snfst>,
    pub shares: SfstLedger<S>,
    pub book: LockBook,
}

impl<S> Default for Securitization<S> {
    fn default() -> Self {
        Securitization {
            snfsts: BTreeMap::new(),
            shares: SfstLedger::default(),
            book: LockBook::default(),
        }
    }
}

impl<S: ShareAmount> Securitization<S> {
    pub fn snfst(&self, id: TokenId) -> Option<&Snfst> {
        self.snfsts.get(&id)
    }

    pub fn snfsts(&self) -> impl Iterator<Item = &Snfst> {
        self.snfsts.values()
    }

    /// Ids of every SNFST bound to `pu`.
    pub fn snfst_ids_of(&self, pu: &Address) -> BTreeSet<TokenId> {
        self.snfsts
            .values()
            .filter(|s| s.primary_user == *pu)
            .map(|s| s.token_id)
            .collect()
    }

    pub fn holds_any(&self, pu: &Address) -> bool {
        self.book.locked.contains_key(pu) || self.book.unlocked.contains_key(pu)
    }

    pub(crate) fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.tag("snfst");
        w.u64(self.snfsts.len() as u64);
        for s in self.snfsts.values() {
            w.token(s.token_id);
            w.address(&s.primary_user);
            w.bytes(s.channel.as_bytes());
            w.bytes(s.location.as_bytes());
            w.bool(s.locked);
        }
        w.tag("sfst");
        w.u64(self.shares.balances.len() as u64);
        for (pu, holders) in &self.shares.balances {
            w.address(pu);
            w.u64(holders.len() as u64);
            for (h, amount) in holders {
                w.address(h);
                w.amount(amount);
            }
        }
        w.u64(self.shares.total_supply.len() as u64);
        for (pu, amount) in &self.shares.total_supply {
            w.address(pu);
            w.amount(amount);
        }
        w.tag("book");
        for map in [
            &self.book.locked,
            &self.book.unlocked,
            &self.book.lock_order,
            &self.book.unlock_order,
        ] {
            w.u64(map.len() as u64);
            for (pu, ids) in map {
                w.address(pu);
                w.tokens(ids);
            }
        }
        w.u64(self.book.origin_owner.len() as u64);
        for (id, owner) in &self.book.origin_owner {
            w.token(*id);
            w.address(owner);
        }
    }
}

/// Storage touched by one balance move, for cost accounting.
pub(crate) struct MoveEffect {
    pub sender_cleared: bool,
    pub recipient_new: bool,
    pub moved: bool,
}

impl<S: ShareAmount> SystemState<S> {
    fn snfst_for(&self, pu: &Address, id: TokenId) -> Result<&Snfst, LedgerError> {
        let s = self
            .securitization
            .snfsts
            .get(&id)
            .ok_or(LedgerError::NotFound {
                kind: "SNFST",
                token: id,
            })?;
        if s.primary_user != *pu {
            return Err(LedgerError::NotOwner {
                caller: *pu,
                token: id,
            });
        }
        Ok(s)
    }

    pub(crate) fn check_stake(&self, pu: &Address, id: TokenId) -> Result<(), LedgerError> {
        let nfst = self.registry.live_nfst(id)?;
        if nfst.owner != *pu {
            return Err(LedgerError::NotOwner {
                caller: *pu,
                token: id,
            });
        }
        if nfst.staked {
            return Err(LedgerError::AlreadyStaked(id));
        }
        Ok(())
    }

    /// Escrows the NFST and mints its unlocked SNFST twin.
    pub(crate) fn apply_snfst_mint(&mut self, pu: Address, id: TokenId, escrow: Address) {
        self.registry.set_staked(id, escrow);
        let nfst = self.registry.nfst(id).expect("staked NFST exists");
        let snfst = Snfst {
            token_id: id,
            primary_user: pu,
            channel: nfst.channel.clone(),
            location: nfst.location.clone(),
            locked: false,
        };
        let sec = &mut self.securitization;
        sec.book.origin_owner.insert(id, pu);
        sec.snfsts.insert(id, snfst);
        push(&mut sec.book.unlocked, pu, id);
    }

    pub(crate) fn check_share_mint(&self, pu: &Address, amount: &S) -> Result<(), LedgerError> {
        let sh = &self.securitization.shares;
        sh.total_supply(pu)
            .checked_add(amount)
            .ok_or(LedgerError::Overflow)?;
        sh.balance_of(pu, pu)
            .checked_add(amount)
            .ok_or(LedgerError::Overflow)?;
        Ok(())
    }

    /// Credits freshly minted shares to the primary user's own balance.
    /// Returns (balance slot was new, supply slot was new).
    pub(crate) fn apply_share_mint(&mut self, pu: Address, amount: S) -> (bool, bool) {
        let sh = &mut self.securitization.shares;
        let balance = sh.balance_of(&pu, &pu);
        let supply = sh.total_supply(&pu);
        let fresh = (balance.is_zero(), !sh.total_supply.contains_key(&pu));
        sh.set_balance(pu, pu, balance + amount.clone());
        sh.total_supply.insert(pu, supply + amount);
        fresh
    }

    pub(crate) fn check_move(
        &self,
        from: &Address,
        to: &Address,
        pu: &Address,
        amount: &S,
    ) -> Result<(), LedgerError> {
        if to.is_zero() {
            return Err(LedgerError::InvalidRecipient);
        }
        if from.is_zero() {
            return Err(LedgerError::InvalidSender);
        }
        let balance = self.securitization.shares.balance_of(pu, from);
        if balance < *amount {
            return Err(LedgerError::InsufficientBalance {
                holder: *from,
                primary_user: *pu,
                balance: balance.to_string(),
                requested: amount.to_string(),
            });
        }
        if from != to {
            self.securitization
                .shares
                .balance_of(pu, to)
                .checked_add(amount)
                .ok_or(LedgerError::Overflow)?;
        }
        Ok(())
    }

    pub(crate) fn apply_move(
        &mut self,
        from: Address,
        to: Address,
        pu: Address,
        amount: S,
    ) -> MoveEffect {
        if from == to || amount.is_zero() {
            return MoveEffect {
                sender_cleared: false,
                recipient_new: false,
                moved: false,
            };
        }
        let sh = &mut self.securitization.shares;
        let from_bal = sh.balance_of(&pu, &from) - amount.clone();
        let to_bal = sh.balance_of(&pu, &to);
        let effect = MoveEffect {
            sender_cleared: from_bal.is_zero(),
            recipient_new: to_bal.is_zero(),
            moved: true,
        };
        sh.set_balance(pu, from, from_bal);
        sh.set_balance(pu, to, to_bal + amount);
        effect
    }

    pub(crate) fn check_lock(&self, pu: &Address, id: TokenId) -> Result<(), LedgerError> {
        if self.snfst_for(pu, id)?.locked {
            return Err(LedgerError::WrongLockState {
                token: id,
                locked: true,
            });
        }
        Ok(())
    }

    /// Marks the SNFST locked and moves it between lists. Returns whether it
    /// was purged from the lock order.
    pub(crate) fn apply_lock(&mut self, pu: Address, id: TokenId) -> bool {
        let sec = &mut self.securitization;
        sec.snfsts.get_mut(&id).expect("checked SNFST").locked = true;
        remove(&mut sec.book.unlocked, &pu, id);
        push(&mut sec.book.locked, pu, id);
        remove(&mut sec.book.lock_order, &pu, id)
    }

    pub(crate) fn check_unlock(&self, pu: &Address, id: TokenId) -> Result<(), LedgerError> {
        if !self.snfst_for(pu, id)?.locked {
            return Err(LedgerError::WrongLockState {
                token: id,
                locked: false,
            });
        }
        Ok(())
    }

    pub(crate) fn apply_unlock(&mut self, pu: Address, id: TokenId) -> bool {
        let sec = &mut self.securitization;
        sec.snfsts.get_mut(&id).expect("checked SNFST").locked = false;
        remove(&mut sec.book.locked, &pu, id);
        push(&mut sec.book.unlocked, pu, id);
        remove(&mut sec.book.unlock_order, &pu, id)
    }

    /// Validates an order list: every id is the caller's SNFST, in the
    /// required lock state, and listed once.
    pub(crate) fn check_order(
        &self,
        caller: &Address,
        ids: &[TokenId],
        want_locked: bool,
    ) -> Result<(), LedgerError> {
        let mut seen = BTreeSet::new();
        for &id in ids {
            let s = self.snfst_for(caller, id)?;
            if s.locked != want_locked {
                return Err(LedgerError::WrongLockState {
                    token: id,
                    locked: s.locked,
                });
            }
            if !seen.insert(id) {
                return Err(LedgerError::DuplicateInList(id));
            }
        }
        Ok(())
    }

    /// Replaces the lock order wholesale; returns the previous length.
    pub(crate) fn apply_lock_order(&mut self, caller: Address, ids: Vec<TokenId>) -> usize {
        replace(&mut self.securitization.book.lock_order, caller, ids)
    }

    pub(crate) fn apply_unlock_order(&mut self, caller: Address, ids: Vec<TokenId>) -> usize {
        replace(&mut self.securitization.book.unlock_order, caller, ids)
    }
}

impl<S: ShareAmount> SpectrumLedger<S> {
    /// Stakes an NFST: escrows it, mints the SNFST twin (unlocked) and one
    /// whole share to the staker.
    pub fn stake_nfst(&mut self, pu: Address, id: TokenId) -> Result<(), LedgerError> {
        self.state.check_stake(&pu, id)?;
        let unit = S::unit();
        self.state.check_share_mint(&pu, &unit)?;

        let escrow = self.contracts.securitization;
        self.state.apply_snfst_mint(pu, id, escrow);
        let (balance_new, supply_new) = self.state.apply_share_mint(pu, unit.clone());

        let op = OpKind::Stake;
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotRead, 1);
        // origin owner and SNFST record
        self.costs.record(op, Primitive::SlotWriteNew, 2);
        // NFST staking flag and holder
        self.costs.record(op, Primitive::SlotUpdate, 2);
        self.costs.record(op, Primitive::ListInsert, 1);
        for fresh in [balance_new, supply_new] {
            self.costs.record(
                op,
                if fresh {
                    Primitive::SlotWriteNew
                } else {
                    Primitive::SlotUpdate
                },
                1,
            );
        }
        self.emit(
            op,
            escrow,
            EventPayload::TransferSnfst {
                from: Address::ZERO,
                to: pu,
                token_id: id,
            },
        );
        self.emit(
            op,
            escrow,
            EventPayload::TransferSfst {
                from: Address::ZERO,
                to: pu,
                primary_user: Address::ZERO,
                amount: unit,
            },
        );
        Ok(())
    }

    pub(crate) fn lock_snfst(
        &mut self,
        pu: Address,
        id: TokenId,
        is_order: bool,
    ) -> Result<(), LedgerError> {
        self.state.check_lock(&pu, id)?;
        let purged = self.state.apply_lock(pu, id);
        debug_assert!(
            !is_order || purged,
            "ordered lock must consume the lock order head"
        );
        self.record_transition(OpKind::Lock, purged);
        self.emit(
            OpKind::Lock,
            self.contracts.securitization,
            EventPayload::LockSnfst {
                primary_user: pu,
                token_id: id,
            },
        );
        Ok(())
    }

    pub(crate) fn unlock_snfst(
        &mut self,
        pu: Address,
        id: TokenId,
        is_order: bool,
    ) -> Result<(), LedgerError> {
        self.state.check_unlock(&pu, id)?;
        let purged = self.state.apply_unlock(pu, id);
        debug_assert!(
            !is_order || purged,
            "ordered unlock must consume the unlock order head"
        );
        self.record_transition(OpKind::Unlock, purged);
        self.emit(
            OpKind::Unlock,
            self.contracts.securitization,
            EventPayload::UnlockSnfst {
                primary_user: pu,
                token_id: id,
            },
        );
        Ok(())
    }

    fn record_transition(&mut self, op: OpKind, purged_from_order: bool) {
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotRead, 1);
        self.costs.record(op, Primitive::SlotUpdate, 1);
        self.costs
            .record(op, Primitive::ListRemove, 1 + u64::from(purged_from_order));
        self.costs.record(op, Primitive::ListInsert, 1);
    }

    /// Sets which unlocked SNFSTs lock first. Replaces any previous list.
    pub fn set_lock_order(
        &mut self,
        caller: Address,
        ids: Vec<TokenId>,
    ) -> Result<(), LedgerError> {
        self.state.check_order(&caller, &ids, false)?;
        let n = ids.len() as u64;
        let old = self.state.apply_lock_order(caller, ids.clone());
        self.record_order_set(OpKind::SetLockOrder, n, old as u64);
        self.emit(
            OpKind::SetLockOrder,
            self.contracts.securitization,
            EventPayload::SetLockOrder {
                primary_user: caller,
                token_ids: ids,
            },
        );
        Ok(())
    }

    /// Sets which locked SNFSTs unlock first. Replaces any previous list.
    pub fn set_unlock_order(
        &mut self,
        caller: Address,
        ids: Vec<TokenId>,
    ) -> Result<(), LedgerError> {
        self.state.check_order(&caller, &ids, true)?;
        let n = ids.len() as u64;
        let old = self.state.apply_unlock_order(caller, ids.clone());
        self.record_order_set(OpKind::SetUnlockOrder, n, old as u64);
        self.emit(
            OpKind::SetUnlockOrder,
            self.contracts.securitization,
            EventPayload::SetUnlockOrder {
                primary_user: caller,
                token_ids: ids,
            },
        );
        Ok(())
    }

    fn record_order_set(&mut self, op: OpKind, new_len: u64, old_len: u64) {
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotRead, new_len);
        self.costs.record(op, Primitive::ListRemove, old_len);
        self.costs.record(op, Primitive::ListInsert, new_len);
    }

    /// Raw balance move inside one namespace, with no lock transitions.
    pub(crate) fn transfer_sfst(
        &mut self,
        from: Address,
        to: Address,
        pu: Address,
        amount: S,
    ) -> Result<(), LedgerError> {
        self.state.check_move(&from, &to, &pu, &amount)?;
        let effect = self.state.apply_move(from, to, pu, amount.clone());

        let op = OpKind::SfstTransfer;
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotRead, 2);
        if effect.moved {
            self.costs.record(
                op,
                if effect.sender_cleared {
                    Primitive::SlotDelete
                } else {
                    Primitive::SlotUpdate
                },
                1,
            );
            self.costs.record(
                op,
                if effect.recipient_new {
                    Primitive::SlotWriteNew
                } else {
                    Primitive::SlotUpdate
                },
                1,
            );
        }
        self.emit(
            op,
            self.contracts.securitization,
            EventPayload::TransferSfst {
                from,
                to,
                primary_user: pu,
                amount,
            },
        );
        Ok(())
    }

    /// Moves `amount` atto-shares of namespace `pu` and applies the implied
    /// SNFST transitions.
    ///
    /// When `from == pu`, each whole share the primary user loses locks one
    /// SNFST, taken from the front of its lock order and then from the
    /// front of its unlocked list. When `to == pu`, each whole share gained
    /// unlocks one, from the unlock order and then the locked list.
    /// Transfers between other holders never change lock state.
    pub fn transfer(
        &mut self,
        from: Address,
        to: Address,
        pu: Address,
        amount: S,
    ) -> Result<TransferOutcome, LedgerError> {
        self.state.check_move(&from, &to, &pu, &amount)?;

        let shares = &self.state.securitization.shares;
        let from_bal = shares.balance_of(&pu, &from);
        let to_bal = shares.balance_of(&pu, &to);
        let from_old = from_bal.whole_shares();
        let to_old = to_bal.whole_shares();
        let (from_new, to_new) = if from == to {
            (from_old, to_old)
        } else {
            (
                (from_bal - amount.clone()).whole_shares(),
                (to_bal + amount.clone()).whole_shares(),
            )
        };

        let lock_num = if from == pu {
            from_old.saturating_sub(from_new)
        } else {
            0
        };
        let unlock_num = if to == pu {
            to_new.saturating_sub(to_old)
        } else {
            0
        };

        let book = &self.state.securitization.book;
        if lock_num as usize > book.unlocked_of(&pu).len() {
            return Err(LedgerError::Invariant(format!(
                "{pu} must lock {lock_num} SNFSTs but has {} unlocked",
                book.unlocked_of(&pu).len()
            )));
        }
        if unlock_num as usize > book.locked_of(&pu).len() {
            return Err(LedgerError::Invariant(format!(
                "{pu} must unlock {unlock_num} SNFSTs but has {} locked",
                book.locked_of(&pu).len()
            )));
        }

        self.transfer_sfst(from, to, pu, amount)?;

        let mut outcome = TransferOutcome::default();
        let ordered =
            (lock_num as usize).min(self.state.securitization.book.lock_order_of(&pu).len());
        for i in 0..lock_num as usize {
            let book = &self.state.securitization.book;
            let (id, is_order) = if i < ordered {
                (book.lock_order_of(&pu)[0], true)
            } else {
                (book.unlocked_of(&pu)[0], false)
            };
            self.lock_snfst(pu, id, is_order)?;
            outcome.locked.push(id);
        }
        let ordered =
            (unlock_num as usize).min(self.state.securitization.book.unlock_order_of(&pu).len());
        for i in 0..unlock_num as usize {
            let book = &self.state.securitization.book;
            let (id, is_order) = if i < ordered {
                (book.unlock_order_of(&pu)[0], true)
            } else {
                (book.locked_of(&pu)[0], false)
            };
            self.unlock_snfst(pu, id, is_order)?;
            outcome.unlocked.push(id);
        }
        Ok(outcome)
    }

    pub fn balance_of(&self, pu: &Address, holder: &Address) -> S {
        self.state.securitization.shares.balance_of(pu, holder)
    }

    pub fn share_of(&self, pu: &Address, holder: &Address) -> u64 {
        self.balance_of(pu, holder).whole_shares()
    }

    pub fn total_supply(&self, pu: &Address) -> S {
        self.state.securitization.shares.total_supply(pu)
    }

    pub fn locked_of(&self, pu: &Address) -> &[TokenId] {
        self.state.securitization.book.locked_of(pu)
    }

    pub fn unlocked_of(&self, pu: &Address) -> &[TokenId] {
        self.state.securitization.book.unlocked_of(pu)
    }

    pub fn lock_order_of(&self, pu: &Address) -> &[TokenId] {
        self.state.securitization.book.lock_order_of(pu)
    }

    pub fn unlock_order_of(&self, pu: &Address) -> &[TokenId] {
        self.state.securitization.book.unlock_order_of(pu)
    }

    pub fn origin_owner(&self, id: TokenId) -> Option<Address> {
        self.state.securitization.book.origin_owner(id)
    }

    pub fn snfst(&self, id: TokenId) -> Option<&Snfst> {
        self.state.securitization.snfst(id)
    }
}

/// SNFSTs a transfer locked or unlocked, in the order they transitioned.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransferOutcome {
    pub locked: Vec<TokenId>,
    pub unlocked: Vec<TokenId>,
}
