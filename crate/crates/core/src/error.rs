// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::address::Address;
use crate::token::TokenId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmountError {
    #[error("malformed amount {0:?}")]
    Malformed(String),
    #[error("amount {0:?} has more than 18 fractional digits")]
    TooPrecise(String),
    #[error("amount overflows the share type")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid address {input:?}: {reason}")]
pub struct AddressError {
    pub input: String,
    pub reason: &'static str,
}

/// Errors raised by ledger operations. A failed operation leaves state,
/// journal and cost counters untouched.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("{caller} is not authorized to {action}")]
    Unauthorized {
        caller: Address,
        action: &'static str,
    },
    #[error("spectrum ({channel}, {location}) is already uploaded")]
    DuplicateSpectrum { channel: String, location: String },
    #[error("recipient must not be the zero address")]
    InvalidRecipient,
    #[error("sender must not be the zero address")]
    InvalidSender,
    #[error("{kind} {token} not found")]
    NotFound { kind: &'static str, token: TokenId },
    #[error("NFST {0} is staked and cannot be reclaimed")]
    Staked(TokenId),
    #[error("NFST {0} is already staked")]
    AlreadyStaked(TokenId),
    #[error("{caller} does not own token {token}")]
    NotOwner { caller: Address, token: TokenId },
    #[error("SNFST {token} is {}", if *.locked { "locked" } else { "unlocked" })]
    WrongLockState { token: TokenId, locked: bool },
    #[error("token {0} appears more than once in the order list")]
    DuplicateInList(TokenId),
    #[error("{holder} holds {balance} atto-shares of {primary_user}, cannot move {requested}")]
    InsufficientBalance {
        holder: Address,
        primary_user: Address,
        balance: String,
        requested: String,
    },
    #[error("expiry {expires} is not after the current time {now}")]
    InvalidExpiry { expires: u64, now: u64 },
    #[error("arithmetic overflow")]
    Overflow,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Journal(#[from] JournalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JournalError {
    #[error("event sequence {found} does not match journal length {expected}")]
    SequenceMismatch { expected: u64, found: u64 },
    #[error("malformed journal entry at sequence {sequence}: {reason}")]
    Malformed { sequence: u64, reason: String },
}

/// Raised when a journal cannot be folded back into a state.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("replay failed at sequence {sequence}: {reason}")]
pub struct ReplayError {
    pub sequence: u64,
    pub reason: String,
}

impl From<JournalError> for ReplayError {
    fn from(err: JournalError) -> Self {
        match err {
            JournalError::SequenceMismatch { expected, found } => ReplayError {
                sequence: expected,
                reason: format!("found sequence {found}"),
            },
            JournalError::Malformed { sequence, reason } => ReplayError { sequence, reason },
        }
    }
}
