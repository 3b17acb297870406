// SPDX-License-Identifier: Apache-2.0

//! NFST registry: the authority mints spectrum assets to primary users and
//! reclaims them.

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
pub struct Nfst {
    pub token_id: TokenId,
    pub owner: Address,
    pub channel: String,
    pub location: String,
    pub staked: bool,
    /// Custodian. Equals `owner` until staked, then the escrow contract.
    pub holder: Address,
    pub reclaimed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfstInfo {
    pub owner: Address,
    pub channel: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpectrumKey {
    pub channel: String,
    pub location: String,
}

impl SpectrumKey {
    pub fn new(channel: impl Into<String>, location: impl Into<String>) -> Self {
        SpectrumKey {
            channel: channel.into(),
            location: location.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    token_counter: u64,
    nfsts: BTreeMap<TokenId, Nfst>,
    uploaded: BTreeSet<SpectrumKey>,
    minted: Vec<TokenId>,
    owned: BTreeMap<Address, Vec<TokenId>>,
    pus: BTreeSet<Address>,
}

impl Registry {
    /// Highest token id ever issued.
    pub fn token_counter(&self) -> u64 {
        self.token_counter
    }

    /// Any NFST ever minted, including reclaimed ones.
    pub fn nfst(&self, id: TokenId) -> Option<&Nfst> {
        self.nfsts.get(&id)
    }

    pub fn live_nfst(&self, id: TokenId) -> Result<&Nfst, LedgerError> {
        self.nfsts
            .get(&id)
            .filter(|n| !n.reclaimed)
            .ok_or(LedgerError::NotFound {
                kind: "NFST",
                token: id,
            })
    }

    pub fn nfst_info(&self, id: TokenId) -> Result<NfstInfo, LedgerError> {
        let n = self.live_nfst(id)?;
        Ok(NfstInfo {
            owner: n.owner,
            channel: n.channel.clone(),
            location: n.location.clone(),
        })
    }

    pub fn is_uploaded(&self, key: &SpectrumKey) -> bool {
        self.uploaded.contains(key)
    }

    pub fn minted_list(&self) -> &[TokenId] {
        &self.minted
    }

    pub fn owned_by(&self, owner: &Address) -> &[TokenId] {
        self.owned.get(owner).map_or(&[], Vec::as_slice)
    }

    pub fn is_pu(&self, a: &Address) -> bool {
        self.pus.contains(a)
    }

    pub fn pus(&self) -> impl Iterator<Item = &Address> {
        self.pus.iter()
    }

    pub(crate) fn set_staked(&mut self, id: TokenId, escrow: Address) {
        let n = self.nfsts.get_mut(&id).expect("staked NFST exists");
        n.staked = true;
        n.holder = escrow;
    }

    pub(crate) fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.tag("registry");
        w.u64(self.token_counter);
        w.u64(self.nfsts.len() as u64);
        for n in self.nfsts.values() {
            w.token(n.token_id);
            w.address(&n.owner);
            w.bytes(n.channel.as_bytes());
            w.bytes(n.location.as_bytes());
            w.bool(n.staked);
            w.address(&n.holder);
            w.bool(n.reclaimed);
        }
        w.u64(self.uploaded.len() as u64);
        for k in &self.uploaded {
            w.bytes(k.channel.as_bytes());
            w.bytes(k.location.as_bytes());
        }
        w.tokens(&self.minted);
        w.u64(self.owned.len() as u64);
        for (a, ids) in &self.owned {
            w.address(a);
            w.tokens(ids);
        }
        w.u64(self.pus.len() as u64);
        for a in &self.pus {
            w.address(a);
        }
    }
}

impl<S: ShareAmount> SystemState<S> {
    pub(crate) fn check_mint_nfst(
        &self,
        to: &Address,
        channel: &str,
        location: &str,
    ) -> Result<TokenId, LedgerError> {
        if to.is_zero() {
            return Err(LedgerError::InvalidRecipient);
        }
        if self
            .registry
            .is_uploaded(&SpectrumKey::new(channel, location))
        {
            return Err(LedgerError::DuplicateSpectrum {
                channel: channel.to_owned(),
                location: location.to_owned(),
            });
        }
        let next = self
            .registry
            .token_counter
            .checked_add(1)
            .ok_or(LedgerError::Overflow)?;
        Ok(TokenId(next))
    }

    /// Returns the new id and whether `to` became a PU.
    pub(crate) fn apply_mint_nfst(
        &mut self,
        to: Address,
        channel: &str,
        location: &str,
    ) -> (TokenId, bool) {
        let reg = &mut self.registry;
        reg.token_counter += 1;
        let id = TokenId(reg.token_counter);
        reg.nfsts.insert(
            id,
            Nfst {
                token_id: id,
                owner: to,
                channel: channel.to_owned(),
                location: location.to_owned(),
                staked: false,
                holder: to,
                reclaimed: false,
            },
        );
        reg.uploaded.insert(SpectrumKey::new(channel, location));
        reg.minted.push(id);
        reg.owned.entry(to).or_default().push(id);
        (id, reg.pus.insert(to))
    }

    pub(crate) fn check_reclaim(&self, id: TokenId) -> Result<(), LedgerError> {
        let n = self.registry.live_nfst(id)?;
        if n.staked {
            return Err(LedgerError::Staked(id));
        }
        Ok(())
    }

    /// Returns whether the holder lost PU status.
    pub(crate) fn apply_reclaim(&mut self, id: TokenId) -> bool {
        let holds_snfst = {
            let holder = self.registry.nfsts[&id].holder;
            self.securitization.holds_any(&holder)
        };
        let reg = &mut self.registry;
        let n = reg.nfsts.get_mut(&id).expect("checked NFST");
        n.reclaimed = true;
        let holder = n.holder;
        reg.uploaded
            .remove(&SpectrumKey::new(n.channel.clone(), n.location.clone()));
        reg.minted.retain(|t| *t != id);
        let now_empty = match reg.owned.get_mut(&holder) {
            Some(list) => {
                list.retain(|t| *t != id);
                list.is_empty()
            }
            None => true,
        };
        if now_empty {
            reg.owned.remove(&holder);
        }
        now_empty && !holds_snfst && reg.pus.remove(&holder)
    }
}

impl<S: ShareAmount> SpectrumLedger<S> {
    /// Mints an NFST for `(channel, location)` to `to`. Only the authority
    /// may call this.
    pub fn mint_nfst(
        &mut self,
        caller: Address,
        to: Address,
        channel: &str,
        location: &str,
    ) -> Result<TokenId, LedgerError> {
        if caller != self.contracts.sma {
            return Err(LedgerError::Unauthorized {
                caller,
                action: "mint NFSTs",
            });
        }
        self.state.check_mint_nfst(&to, channel, location)?;
        let (id, new_pu) = self.state.apply_mint_nfst(to, channel, location);

        let op = OpKind::MintNfst;
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotUpdate, 1);
        // owner, channel, location, uploaded flag
        self.costs.record(op, Primitive::SlotWriteNew, 4);
        self.costs.record(op, Primitive::ListInsert, 2);
        self.costs.record(
            op,
            if new_pu {
                Primitive::SlotWriteNew
            } else {
                Primitive::SlotRead
            },
            1,
        );
        self.emit(
            op,
            self.contracts.authorization,
            EventPayload::MintNfst {
                to,
                token_id: id,
                channel: channel.to_owned(),
                location: location.to_owned(),
            },
        );
        Ok(id)
    }

    /// Reclaims a live, unstaked NFST. The spectrum key becomes available
    /// again; the id is never reissued.
    pub fn reclaim_nfst(&mut self, caller: Address, id: TokenId) -> Result<(), LedgerError> {
        if caller != self.contracts.sma {
            return Err(LedgerError::Unauthorized {
                caller,
                action: "reclaim NFSTs",
            });
        }
        self.state.check_reclaim(id)?;
        let pu_cleared = self.state.apply_reclaim(id);

        let op = OpKind::ReclaimNfst;
        self.costs.begin(op);
        self.costs.record(op, Primitive::SlotRead, 1);
        self.costs.record(op, Primitive::SlotUpdate, 2);
        self.costs.record(op, Primitive::ListRemove, 2);
        if pu_cleared {
            self.costs.record(op, Primitive::SlotDelete, 1);
        }
        self.emit(
            op,
            self.contracts.authorization,
            EventPayload::ReclaimNfst {
                authority: caller,
                token_id: id,
            },
        );
        Ok(())
    }

    pub fn get_nfst_info(&self, id: TokenId) -> Result<NfstInfo, LedgerError> {
        self.state.registry.nfst_info(id)
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

    fn setup() -> (SpectrumLedger<u128>, Address) {
        let ledger = SpectrumLedger::<u128>::default();
        let sma = ledger.contracts().sma;
        (ledger, sma)
    }

    #[test]
    fn first_mint_is_token_one_from_zero() {
        let (mut l, sma) = setup();
        assert_eq!(l.mint_nfst(sma, pu(), "ch-1", "cell-A"), Ok(TokenId(1)));
        let ev = &l.journal().entries()[0];
        assert_eq!(ev.kind(), EventKind::MintNfst);
        assert_eq!(ev.emitter, l.contracts().authorization);
        let args = ev.payload.args();
        assert_eq!(args[0], ("_from", Address::ZERO.to_string()));
        assert_eq!(args[1], ("_to", pu().to_string()));
        assert_eq!(args[2], ("_tokenId", "1".to_owned()));
        assert!(l.state().registry.is_pu(&pu()));
    }

    #[test]
    fn second_mint_increments() {
        let (mut l, sma) = setup();
        l.mint_nfst(sma, pu(), "ch-1", "cell-A").unwrap();
        assert_eq!(l.mint_nfst(sma, pu(), "ch-2", "cell-A"), Ok(TokenId(2)));
        assert_eq!(l.state().registry.minted_list(), &[TokenId(1), TokenId(2)]);
        assert_eq!(
            l.state().registry.owned_by(&pu()),
            &[TokenId(1), TokenId(2)]
        );
    }

    #[test]
    fn duplicate_spectrum_rejected() {
        let (mut l, sma) = setup();
        l.mint_nfst(sma, pu(), "ch-1", "cell-A").unwrap();
        assert!(matches!(
            l.mint_nfst(sma, pu(), "ch-1", "cell-A"),
            Err(LedgerError::DuplicateSpectrum { .. })
        ));
        assert_eq!(l.journal().len(), 1);
    }

    #[test]
    fn only_sma_mints_and_never_to_zero() {
        let (mut l, sma) = setup();
        assert!(matches!(
            l.mint_nfst(pu(), pu(), "ch-1", "cell-A"),
            Err(LedgerError::Unauthorized { .. })
        ));
        assert_eq!(
            l.mint_nfst(sma, Address::ZERO, "ch-1", "cell-A"),
            Err(LedgerError::InvalidRecipient)
        );
        assert!(l.journal().is_empty());
    }

    #[test]
    fn reclaim_emits_authority_and_clears_pu() {
        let (mut l, sma) = setup();
        for ch in ["ch-1", "ch-2", "ch-3"] {
            l.mint_nfst(sma, pu(), ch, "cell-A").unwrap();
        }
        l.reclaim_nfst(sma, TokenId(3)).unwrap();
        let ev = l.journal().entries().last().unwrap();
        assert_eq!(
            ev.payload.args(),
            vec![("_from", sma.to_string()), ("_tokenId", "3".to_owned())]
        );
        let reg = &l.state().registry;
        assert!(reg.nfst(TokenId(3)).unwrap().reclaimed);
        assert_eq!(reg.minted_list(), &[TokenId(1), TokenId(2)]);
        assert!(reg.is_pu(&pu()));

        l.reclaim_nfst(sma, TokenId(1)).unwrap();
        l.reclaim_nfst(sma, TokenId(2)).unwrap();
        assert!(!l.state().registry.is_pu(&pu()));
        assert!(l.state().registry.owned_by(&pu()).is_empty());
    }

    #[test]
    fn reclaim_twice_is_not_found() {
        let (mut l, sma) = setup();
        l.mint_nfst(sma, pu(), "ch-1", "cell-A").unwrap();
        l.reclaim_nfst(sma, TokenId(1)).unwrap();
        assert_eq!(
            l.reclaim_nfst(sma, TokenId(1)),
            Err(LedgerError::NotFound {
                kind: "NFST",
                token: TokenId(1)
            })
        );
        assert!(l.get_nfst_info(TokenId(1)).is_err());
    }

    #[test]
    fn reclaim_by_non_sma_rejected() {
        let (mut l, sma) = setup();
        l.mint_nfst(sma, pu(), "ch-1", "cell-A").unwrap();
        assert!(matches!(
            l.reclaim_nfst(pu(), TokenId(1)),
            Err(LedgerError::Unauthorized { .. })
        ));
    }

    #[test]
    fn reclaimed_key_reissues_with_new_id() {
        let (mut l, sma) = setup();
        l.mint_nfst(sma, pu(), "ch-1", "cell-A").unwrap();
        l.reclaim_nfst(sma, TokenId(1)).unwrap();
        assert!(!l
            .state()
            .registry
            .is_uploaded(&SpectrumKey::new("ch-1", "cell-A")));
        assert_eq!(l.mint_nfst(sma, pu(), "ch-1", "cell-A"), Ok(TokenId(2)));
    }

    #[test]
    fn info_reports_minted_metadata() {
        let (mut l, sma) = setup();
        l.mint_nfst(sma, pu(), "ch-36", "cell-7").unwrap();
        assert_eq!(
            l.get_nfst_info(TokenId(1)).unwrap(),
            NfstInfo {
                owner: pu(),
                channel: "ch-36".into(),
                location: "cell-7".into()
            }
        );
        assert_eq!(
            l.get_nfst_info(TokenId(999)),
            Err(LedgerError::NotFound {
                kind: "NFST",
                token: TokenId(999)
            })
        );
    }
}
