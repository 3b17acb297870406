// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use sha2::{Digest, Sha256};

use crate::address::Address;
use crate::amount::ShareAmount;
use crate::authorization::Registry;
use crate::securitization::Securitization;
use crate::sharing::Rentals;
use crate::token::TokenId;

/// Everything the three logical contracts store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemState<S> {
    pub registry: Registry,
    pub securitization: Securitization<S>,
    pub rentals: Rentals,
}

impl<S> Default for SystemState<S> {
    fn default() -> Self {
        SystemState {
            registry: Registry::default(),
            securitization: Securitization::default(),
            rentals: Rentals::default(),
        }
    }
}

impl<S: ShareAmount> SystemState<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// SHA-256 over a canonical encoding of the state. Maps are walked in
    /// key order (addresses bytewise, token ids as big-endian integers),
    /// sequences in stored order.
    pub fn digest(&self) -> StateDigest {
        let mut w = CanonicalWriter::new();
        self.registry.write_canonical(&mut w);
        self.securitization.write_canonical(&mut w);
        self.rentals.write_canonical(&mut w);
        w.finish()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateDigest(pub [u8; 32]);

impl fmt::Display for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateDigest({self})")
    }
}

/// Length-prefixed, tagged byte stream feeding the state digest.
pub(crate) struct CanonicalWriter {
    hasher: Sha256,
}

impl CanonicalWriter {
    fn new() -> Self {
        CanonicalWriter {
            hasher: Sha256::new(),
        }
    }

    pub(crate) fn tag(&mut self, tag: &str) {
        self.bytes(tag.as_bytes());
    }

    pub(crate) fn u64(&mut self, v: u64) {
        self.hasher.update(v.to_be_bytes());
    }

    pub(crate) fn bool(&mut self, v: bool) {
        self.hasher.update([v as u8]);
    }

    pub(crate) fn bytes(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.hasher.update(b);
    }

    pub(crate) fn address(&mut self, a: &Address) {
        self.hasher.update(a.as_bytes());
    }

    pub(crate) fn token(&mut self, t: TokenId) {
        self.u64(t.0);
    }

    pub(crate) fn tokens(&mut self, ts: &[TokenId]) {
        self.u64(ts.len() as u64);
        for t in ts {
            self.token(*t);
        }
    }

    pub(crate) fn amount<S: ShareAmount>(&mut self, a: &S) {
        self.bytes(a.to_string().as_bytes());
    }

    fn finish(self) -> StateDigest {
        StateDigest(self.hasher.finalize().into())
    }
}
