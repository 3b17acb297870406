// SPDX-License-Identifier: Apache-2.0

//! Rentable spectrum tokens: an owner grants a time-bounded user role
//! without transferring ownership. Time is a logical `u64` supplied by the
//! caller, and expiry is exclusive (`now == expires` means expired).

use std::collections::BTreeMap;

use crate::address::Address;
use crate::amount::ShareAmount;
use crate::cost::{OpKind, Primitive};
use crate::error::LedgerError;
use crate::event::EventPayload;
use crate::ledger::SpectrumLedger;
use crate::state::{CanonicalWriter, SystemState};
use crate::token::TokenId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rnfst {
    pub token_id: TokenId,
    pub owner: Address,
    pub user: Address,
    pub expires: u64,
}

impl Rnfst {
    pub fn user_at(&self, now: u64) -> Address {
        if now < self.expires {
            self.user
        } else {
            Address::ZERO
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Rentals {
    counter: u64,
    tokens: BTreeMap<TokenId, Rnfst>,
}

impl Rentals {
    pub fn get(&self, id: TokenId) -> Result<&Rnfst, LedgerError> {
        self.tokens.get(&id).ok_or(LedgerError::NotFound {
            kind: "RNFST",
            token: id,
        })
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub(crate) fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.tag("rentals");
        w.u64(self.counter);
        w.u64(self.tokens.len() as u64);
        for r in self.tokens.values() {
            w.token(r.token_id);
            w.address(&r.owner);
            w.address(&r.user);
            w.u64(r.expires);
        }
    }
}

impl<S: ShareAmount> SystemState<S> {
    pub(crate) fn check_mint_rnfst(&self, pu: &Address) -> Result<TokenId, LedgerError> {
        if !self.registry.is_pu(pu) && !self.securitization.holds_any(pu) {
            return Err(LedgerError::Unauthorized {
                caller: *pu,
                action: "mint rental tokens",
            });
        }
        let next = self
            .rentals
            .counter
            .checked_add(1)
            .ok_or(LedgerError::Overflow)?;
        Ok(TokenId(next))
    }

    pub(crate) fn apply_mint_rnfst(&mut self, owner: Address) -> TokenId {
        let r = &mut self.rentals;
        r.counter += 1;
        let id = TokenId(r.counter);
        r.tokens.insert(
            id,
            Rnfst {
                token_id: id,
                owner,
                user: Address::ZERO,
                expires: 0,
            },
        );
        id
    }

    pub(crate) fn apply_set_user(&mut self, id: TokenId, user: Address, expires: u64) {
        let r = self.rentals.tokens.get_mut(&id).expect("checked RNFST");
        r.user = user;
        r.expires = expires;
    }
}

impl<S: ShareAmount> SpectrumLedger<S> {
    /// Mints a rental token owned by a registered primary user.
    pub fn mint_rnfst(&mut self, pu: Address) -> Result<TokenId, LedgerError> {
        self.state.check_mint_rnfst(&pu)?;
        let id = self.state.apply_mint_rnfst(pu);

        let op = OpKind::MintRnfst;
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotRead, 1);
        self.costs.record(op, Primitive::SlotUpdate, 1);
        self.costs.record(op, Primitive::SlotWriteNew, 1);
        self.emit(
            op,
            self.contracts.sharing,
            EventPayload::MintRnfst {
                to: pu,
                token_id: id,
            },
        );
        Ok(id)
    }

    /// Grants `user` the user role until `expires`. Only the owner may call
    /// this, and `expires` must lie after `now`.
    pub fn set_user(
        &mut self,
        caller: Address,
        id: TokenId,
        user: Address,
        expires: u64,
        now: u64,
    ) -> Result<(), LedgerError> {
        let token = self.state.rentals.get(id)?;
        if token.owner != caller {
            return Err(LedgerError::Unauthorized {
                caller,
                action: "set the rental user",
            });
        }
        if expires <= now {
            return Err(LedgerError::InvalidExpiry { expires, now });
        }
        self.state.apply_set_user(id, user, expires);

        let op = OpKind::SetUser;
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotRead, 1);
        self.costs.record(op, Primitive::SlotUpdate, 2);
        self.emit(
            op,
            self.contracts.sharing,
            EventPayload::UpdateUser {
                token_id: id,
                user,
                expires,
            },
        );
        Ok(())
    }

    /// Current user at logical time `now`, or the zero address once expired.
    pub fn user_of(&self, id: TokenId, now: u64) -> Result<Address, LedgerError> {
        Ok(self.state.rentals.get(id)?.user_at(now))
    }

    pub fn rnfst(&self, id: TokenId) -> Result<&Rnfst, LedgerError> {
        self.state.rentals.get(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::EventKind;

    fn pu() -> Address {
        "0x0aa7652b45d957b9d2de60afbbd90b2dad3d1f60"
            .parse()
            .unwrap()
    }

    fn su() -> Address {
        "0x408dd44b2c2ebfd0f9b66a448eea7293b3c1f9f0"
            .parse()
            .unwrap()
    }

    fn with_pu() -> SpectrumLedger<u128> {
        let mut l = SpectrumLedger::default();
        let sma = l.contracts().sma;
        l.mint_nfst(sma, pu(), "ch-1", "cell").unwrap();
        l
    }

    #[test]
    fn pu_mints_sequential_rental_tokens() {
        let mut l = with_pu();
        assert_eq!(l.mint_rnfst(pu()), Ok(TokenId(1)));
        assert_eq!(l.user_of(TokenId(1), 0), Ok(Address::ZERO));
        assert_eq!(l.mint_rnfst(pu()), Ok(TokenId(2)));
        assert_eq!(l.rnfst(TokenId(2)).unwrap().owner, pu());
        assert_eq!(
            l.journal().entries().last().unwrap().emitter,
            l.contracts().sharing
        );
    }

    #[test]
    fn su_cannot_mint() {
        let mut l = with_pu();
        assert!(matches!(
            l.mint_rnfst(su()),
            Err(LedgerError::Unauthorized { .. })
        ));
    }

    #[test]
    fn staked_pu_keeps_rental_rights() {
        let mut l = with_pu();
        l.stake_nfst(pu(), TokenId(1)).unwrap();
        assert!(l.mint_rnfst(pu()).is_ok());
    }

    #[test]
    fn exclusive_expiry_boundary() {
        let mut l = with_pu();
        let id = l.mint_rnfst(pu()).unwrap();
        let t = 1_700_000_000;
        l.set_user(pu(), id, su(), t + 3600, t).unwrap();
        assert_eq!(l.user_of(id, t), Ok(su()));
        assert_eq!(l.user_of(id, t + 3599), Ok(su()));
        assert_eq!(l.user_of(id, t + 3600), Ok(Address::ZERO));
        assert_eq!(l.user_of(id, t + 99_999), Ok(Address::ZERO));
        let ev = l.journal().entries().last().unwrap();
        assert_eq!(ev.kind(), EventKind::UpdateUser);
    }

    #[test]
    fn set_user_guards() {
        let mut l = with_pu();
        let id = l.mint_rnfst(pu()).unwrap();
        assert!(matches!(
            l.set_user(su(), id, su(), 10, 0),
            Err(LedgerError::Unauthorized { .. })
        ));
        assert_eq!(
            l.set_user(pu(), id, su(), 10, 10),
            Err(LedgerError::InvalidExpiry {
                expires: 10,
                now: 10
            })
        );
        assert!(matches!(
            l.set_user(pu(), TokenId(9), su(), 10, 0),
            Err(LedgerError::NotFound { .. })
        ));
        assert!(matches!(
            l.user_of(TokenId(9), 0),
            Err(LedgerError::NotFound { .. })
        ));
    }
}
