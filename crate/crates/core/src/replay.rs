// SPDX-License-Identifier: Apache-2.0

//! Rebuilds state from a journal by re-applying each event's mutation.

use crate::address::Address;
use crate::amount::ShareAmount;
use crate::error::{LedgerError, ReplayError};
use crate::event::{Event, EventPayload};
use crate::journal::Journal;
use crate::state::SystemState;
use crate::token::TokenId;

/// Incremental journal fold.
#[derive(Debug, Clone)]
pub struct Replayer<S> {
    state: SystemState<S>,
    next_sequence: u64,
    /// A stake's SNFST mint must be followed by its share mint.
    pending_share_mint: Option<Address>,
}

impl<S: ShareAmount> Default for Replayer<S> {
    fn default() -> Self {
        Replayer {
            state: SystemState::new(),
            next_sequence: 0,
            pending_share_mint: None,
        }
    }
}

impl<S: ShareAmount> Replayer<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> &SystemState<S> {
        &self.state
    }

    pub fn apply(&mut self, event: &Event<S>) -> Result<(), ReplayError> {
        let sequence = event.sequence;
        if sequence != self.next_sequence {
            return Err(ReplayError {
                sequence: self.next_sequence,
                reason: format!("found sequence {sequence}"),
            });
        }
        let fail = |reason: String| ReplayError { sequence, reason };
        let rejected = |e: LedgerError| fail(e.to_string());

        if let Some(pu) = self.pending_share_mint.take() {
            let is_pair = matches!(
                &event.payload,
                EventPayload::TransferSfst { from, to, .. } if from.is_zero() && *to == pu
            );
            if !is_pair {
                return Err(fail(format!(
                    "expected the share mint for {pu} after its SNFST mint"
                )));
            }
        }

        let st = &mut self.state;
        match &event.payload {
            EventPayload::MintNfst {
                to,
                token_id,
                channel,
                location,
            } => {
                let expected = st
                    .check_mint_nfst(to, channel, location)
                    .map_err(rejected)?;
                expect_id(expected, *token_id).map_err(fail)?;
                st.apply_mint_nfst(*to, channel, location);
            }
            EventPayload::ReclaimNfst { token_id, .. } => {
                st.check_reclaim(*token_id).map_err(rejected)?;
                st.apply_reclaim(*token_id);
            }
            EventPayload::TransferSnfst { from, to, token_id } => {
                if !from.is_zero() {
                    return Err(fail(
                        "SNFSTs are only ever minted, never transferred".into(),
                    ));
                }
                st.check_stake(to, *token_id).map_err(rejected)?;
                st.apply_snfst_mint(*to, *token_id, event.emitter);
                self.pending_share_mint = Some(*to);
            }
            EventPayload::TransferSfst {
                from,
                to,
                primary_user,
                amount,
            } => {
                if from.is_zero() {
                    if !primary_user.is_zero() {
                        return Err(fail("share mint must carry a zero _primaryUser".into()));
                    }
                    if *amount != S::unit() {
                        return Err(fail(format!(
                            "share mint of {amount} is not one whole share"
                        )));
                    }
                    // Only reachable as the second half of a stake.
                    if !event_follows_snfst_mint(st, to) {
                        return Err(fail("share mint without a preceding SNFST mint".into()));
                    }
                    st.check_share_mint(to, amount).map_err(rejected)?;
                    st.apply_share_mint(*to, amount.clone());
                } else {
                    st.check_move(from, to, primary_user, amount)
                        .map_err(rejected)?;
                    st.apply_move(*from, *to, *primary_user, amount.clone());
                }
            }
            EventPayload::LockSnfst {
                primary_user,
                token_id,
            } => {
                st.check_lock(primary_user, *token_id).map_err(rejected)?;
                st.apply_lock(*primary_user, *token_id);
            }
            EventPayload::UnlockSnfst {
                primary_user,
                token_id,
            } => {
                st.check_unlock(primary_user, *token_id).map_err(rejected)?;
                st.apply_unlock(*primary_user, *token_id);
            }
            EventPayload::SetLockOrder {
                primary_user,
                token_ids,
            } => {
                st.check_order(primary_user, token_ids, false)
                    .map_err(rejected)?;
                st.apply_lock_order(*primary_user, token_ids.clone());
            }
            EventPayload::SetUnlockOrder {
                primary_user,
                token_ids,
            } => {
                st.check_order(primary_user, token_ids, true)
                    .map_err(rejected)?;
                st.apply_unlock_order(*primary_user, token_ids.clone());
            }
            EventPayload::MintRnfst { to, token_id } => {
                let expected = st.check_mint_rnfst(to).map_err(rejected)?;
                expect_id(expected, *token_id).map_err(fail)?;
                st.apply_mint_rnfst(*to);
            }
            EventPayload::UpdateUser {
                token_id,
                user,
                expires,
            } => {
                st.rentals.get(*token_id).map_err(rejected)?;
                st.apply_set_user(*token_id, *user, *expires);
            }
        }
        self.next_sequence += 1;
        Ok(())
    }

    /// Ends the fold. Fails if a stake was left half-applied.
    pub fn finish(self) -> Result<SystemState<S>, ReplayError> {
        if let Some(pu) = self.pending_share_mint {
            return Err(ReplayError {
                sequence: self.next_sequence,
                reason: format!("journal ends before the share mint for {pu}"),
            });
        }
        Ok(self.state)
    }
}

fn expect_id(expected: TokenId, found: TokenId) -> Result<(), String> {
    if expected == found {
        Ok(())
    } else {
        Err(format!(
            "token id {found} out of order, expected {expected}"
        ))
    }
}

/// The SNFST count of `pu` exceeds its whole-share supply exactly when an
/// SNFST mint is waiting for its share mint.
fn event_follows_snfst_mint<S: ShareAmount>(state: &SystemState<S>, pu: &Address) -> bool {
    let sec = &state.securitization;
    let snfsts = sec.snfst_ids_of(pu).len() as u64;
    sec.shares.total_supply(pu).whole_shares() < snfsts
}

pub fn replay<S: ShareAmount>(journal: &Journal<S>) -> Result<SystemState<S>, ReplayError> {
    replay_events(journal.entries())
}

pub fn replay_events<S: ShareAmount>(events: &[Event<S>]) -> Result<SystemState<S>, ReplayError> {
    let mut r = Replayer::new();
    for e in events {
        r.apply(e)?;
    }
    r.finish()
}

/// Parses journal text and replays it.
pub fn replay_text<S: ShareAmount>(text: &str) -> Result<SystemState<S>, ReplayError> {
    let journal = Journal::from_text(text)?;
    replay(&journal)
}
