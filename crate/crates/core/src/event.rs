// SPDX-License-Identifier: Apache-2.0

//! Audit events and their journal encoding.
//!
//! A journal line looks like
//!
//! ```text
//! {"sequence":0,"emitter":"0x…","kind":"MINT_NFST","args":{"_from":"0x…","_to":"0x…","_tokenId":"1",…}}
//! ```
//!
//! Every argument value is a string: addresses in lowercase hex, token ids
//! and amounts in decimal. Argument order is fixed per kind so encoded lines
//! are byte-stable.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::address::Address;
use crate::amount::{parse_atto, ShareAmount};
use crate::token::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    MintNfst,
    ReclaimNfst,
    TransferSnfst,
    TransferSfst,
    LockSnfst,
    UnlockSnfst,
    SetLockOrder,
    SetUnlockOrder,
    MintRnfst,
    UpdateUser,
}

impl EventKind {
    pub const ALL: [EventKind; 10] = [
        EventKind::MintNfst,
        EventKind::ReclaimNfst,
        EventKind::TransferSnfst,
        EventKind::TransferSfst,
        EventKind::LockSnfst,
        EventKind::UnlockSnfst,
        EventKind::SetLockOrder,
        EventKind::SetUnlockOrder,
        EventKind::MintRnfst,
        EventKind::UpdateUser,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::MintNfst => "MINT_NFST",
            EventKind::ReclaimNfst => "RECLAIM_NFST",
            EventKind::TransferSnfst => "TRANSFER_SNFST",
            EventKind::TransferSfst => "TRANSFER_SFST",
            EventKind::LockSnfst => "LOCK_SNFST",
            EventKind::UnlockSnfst => "UNLOCK_SNFST",
            EventKind::SetLockOrder => "SET_LOCK_ORDER",
            EventKind::SetUnlockOrder => "SET_UNLOCK_ORDER",
            EventKind::MintRnfst => "MINT_RNFST",
            EventKind::UpdateUser => "UPDATE_USER",
        }
    }

    /// Rental events number their tokens from a separate counter.
    pub fn is_rental(self) -> bool {
        matches!(self, EventKind::MintRnfst | EventKind::UpdateUser)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown event kind {s:?}"))
    }
}

/// Kind-specific event arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventPayload<S> {
    /// `_from` is always the zero address.
    MintNfst {
        to: Address,
        token_id: TokenId,
        channel: String,
        location: String,
    },
    /// `_from` is the reclaiming authority.
    ReclaimNfst {
        authority: Address,
        token_id: TokenId,
    },
    TransferSnfst {
        from: Address,
        to: Address,
        token_id: TokenId,
    },
    TransferSfst {
        from: Address,
        to: Address,
        primary_user: Address,
        amount: S,
    },
    LockSnfst {
        primary_user: Address,
        token_id: TokenId,
    },
    UnlockSnfst {
        primary_user: Address,
        token_id: TokenId,
    },
    SetLockOrder {
        primary_user: Address,
        token_ids: Vec<TokenId>,
    },
    SetUnlockOrder {
        primary_user: Address,
        token_ids: Vec<TokenId>,
    },
    MintRnfst {
        to: Address,
        token_id: TokenId,
    },
    UpdateUser {
        token_id: TokenId,
        user: Address,
        expires: u64,
    },
}

impl<S: ShareAmount> EventPayload<S> {
    pub fn kind(&self) -> EventKind {
        match self {
            EventPayload::MintNfst { .. } => EventKind::MintNfst,
            EventPayload::ReclaimNfst { .. } => EventKind::ReclaimNfst,
            EventPayload::TransferSnfst { .. } => EventKind::TransferSnfst,
            EventPayload::TransferSfst { .. } => EventKind::TransferSfst,
            EventPayload::LockSnfst { .. } => EventKind::LockSnfst,
            EventPayload::UnlockSnfst { .. } => EventKind::UnlockSnfst,
            EventPayload::SetLockOrder { .. } => EventKind::SetLockOrder,
            EventPayload::SetUnlockOrder { .. } => EventKind::SetUnlockOrder,
            EventPayload::MintRnfst { .. } => EventKind::MintRnfst,
            EventPayload::UpdateUser { .. } => EventKind::UpdateUser,
        }
    }

    /// The `_tokenId` argument, if the kind carries one.
    pub fn token_id(&self) -> Option<TokenId> {
        match self {
            EventPayload::MintNfst { token_id, .. }
            | EventPayload::ReclaimNfst { token_id, .. }
            | EventPayload::TransferSnfst { token_id, .. }
            | EventPayload::LockSnfst { token_id, .. }
            | EventPayload::UnlockSnfst { token_id, .. }
            | EventPayload::MintRnfst { token_id, .. }
            | EventPayload::UpdateUser { token_id, .. } => Some(*token_id),
            EventPayload::TransferSfst { .. }
            | EventPayload::SetLockOrder { .. }
            | EventPayload::SetUnlockOrder { .. } => None,
        }
    }

    /// Arguments in their canonical order.
    pub fn args(&self) -> Vec<(&'static str, String)> {
        let addr = |a: &Address| a.to_string();
        let id = |t: &TokenId| t.to_string();
        match self {
            EventPayload::MintNfst {
                to,
                token_id,
                channel,
                location,
            } => vec![
                ("_from", addr(&Address::ZERO)),
                ("_to", addr(to)),
                ("_tokenId", id(token_id)),
                ("_channel", channel.clone()),
                ("_location", location.clone()),
            ],
            EventPayload::ReclaimNfst {
                authority,
                token_id,
            } => {
                vec![("_from", addr(authority)), ("_tokenId", id(token_id))]
            }
            EventPayload::TransferSnfst { from, to, token_id } => vec![
                ("_from", addr(from)),
                ("_to", addr(to)),
                ("_tokenId", id(token_id)),
            ],
            EventPayload::TransferSfst {
                from,
                to,
                primary_user,
                amount,
            } => vec![
                ("_from", addr(from)),
                ("_to", addr(to)),
                ("_primaryUser", addr(primary_user)),
                ("_amount", amount.to_string()),
            ],
            EventPayload::LockSnfst {
                primary_user,
                token_id,
            }
            | EventPayload::UnlockSnfst {
                primary_user,
                token_id,
            } => vec![
                ("_primaryUser", addr(primary_user)),
                ("_tokenId", id(token_id)),
            ],
            EventPayload::SetLockOrder {
                primary_user,
                token_ids,
            }
            | EventPayload::SetUnlockOrder {
                primary_user,
                token_ids,
            } => vec![
                ("_primaryUser", addr(primary_user)),
                ("_tokenIds", join_ids(token_ids)),
            ],
            EventPayload::MintRnfst { to, token_id } => vec![
                ("_from", addr(&Address::ZERO)),
                ("_to", addr(to)),
                ("_tokenId", id(token_id)),
            ],
            EventPayload::UpdateUser {
                token_id,
                user,
                expires,
            } => vec![
                ("_tokenId", id(token_id)),
                ("_user", addr(user)),
                ("_expires", expires.to_string()),
            ],
        }
    }

    /// Rebuilds a payload from decoded arguments. The argument set must
    /// match the kind exactly.
    pub fn from_args(kind: EventKind, args: &BTreeMap<String, String>) -> Result<Self, String> {
        let mut reader = ArgReader { args, used: 0 };
        let payload = match kind {
            EventKind::MintNfst => {
                reader.zero("_from")?;
                EventPayload::MintNfst {
                    to: reader.address("_to")?,
                    token_id: reader.token("_tokenId")?,
                    channel: reader.text("_channel")?,
                    location: reader.text("_location")?,
                }
            }
            EventKind::ReclaimNfst => EventPayload::ReclaimNfst {
                authority: reader.address("_from")?,
                token_id: reader.token("_tokenId")?,
            },
            EventKind::TransferSnfst => EventPayload::TransferSnfst {
                from: reader.address("_from")?,
                to: reader.address("_to")?,
                token_id: reader.token("_tokenId")?,
            },
            EventKind::TransferSfst => EventPayload::TransferSfst {
                from: reader.address("_from")?,
                to: reader.address("_to")?,
                primary_user: reader.address("_primaryUser")?,
                amount: parse_atto(reader.text("_amount")?.as_str())
                    .map_err(|e| format!("_amount: {e}"))?,
            },
            EventKind::LockSnfst => EventPayload::LockSnfst {
                primary_user: reader.address("_primaryUser")?,
                token_id: reader.token("_tokenId")?,
            },
            EventKind::UnlockSnfst => EventPayload::UnlockSnfst {
                primary_user: reader.address("_primaryUser")?,
                token_id: reader.token("_tokenId")?,
            },
            EventKind::SetLockOrder => EventPayload::SetLockOrder {
                primary_user: reader.address("_primaryUser")?,
                token_ids: reader.token_list("_tokenIds")?,
            },
            EventKind::SetUnlockOrder => EventPayload::SetUnlockOrder {
                primary_user: reader.address("_primaryUser")?,
                token_ids: reader.token_list("_tokenIds")?,
            },
            EventKind::MintRnfst => {
                reader.zero("_from")?;
                EventPayload::MintRnfst {
                    to: reader.address("_to")?,
                    token_id: reader.token("_tokenId")?,
                }
            }
            EventKind::UpdateUser => EventPayload::UpdateUser {
                token_id: reader.token("_tokenId")?,
                user: reader.address("_user")?,
                expires: reader.number("_expires")?,
            },
        };
        if reader.used != args.len() {
            let expected: Vec<_> = payload.args().into_iter().map(|(k, _)| k).collect();
            let extra: Vec<_> = args
                .keys()
                .filter(|k| !expected.contains(&k.as_str()))
                .collect();
            return Err(format!("unexpected arguments {extra:?} for {kind}"));
        }
        Ok(payload)
    }
}

fn join_ids(ids: &[TokenId]) -> String {
    ids.iter()
        .map(TokenId::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

struct ArgReader<'a> {
    args: &'a BTreeMap<String, String>,
    used: usize,
}

impl ArgReader<'_> {
    fn text(&mut self, name: &str) -> Result<String, String> {
        let value = self
            .args
            .get(name)
            .ok_or_else(|| format!("missing argument {name}"))?;
        self.used += 1;
        Ok(value.clone())
    }

    fn address(&mut self, name: &str) -> Result<Address, String> {
        self.text(name)?.parse().map_err(|e| format!("{name}: {e}"))
    }

    fn zero(&mut self, name: &str) -> Result<(), String> {
        if self.address(name)?.is_zero() {
            Ok(())
        } else {
            Err(format!("{name} must be the zero address"))
        }
    }

    fn number(&mut self, name: &str) -> Result<u64, String> {
        let text = self.text(name)?;
        if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("{name}: {text:?} is not a decimal integer"));
        }
        text.parse().map_err(|e| format!("{name}: {e}"))
    }

    fn token(&mut self, name: &str) -> Result<TokenId, String> {
        self.number(name).map(TokenId)
    }

    fn token_list(&mut self, name: &str) -> Result<Vec<TokenId>, String> {
        let text = self.text(name)?;
        if text.is_empty() {
            return Ok(Vec::new());
        }
        text.split(',')
            .map(|part| {
                if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(format!("{name}: bad token id {part:?}"));
                }
                part.parse()
                    .map(TokenId)
                    .map_err(|e| format!("{name}: {e}"))
            })
            .collect()
    }
}

/// One journal entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event<S> {
    pub sequence: u64,
    /// The logical contract that emitted the event.
    pub emitter: Address,
    pub payload: EventPayload<S>,
}

impl<S: ShareAmount> Event<S> {
    pub fn kind(&self) -> EventKind {
        self.payload.kind()
    }

    /// Single-line JSON encoding used by journal files.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("event encoding cannot fail")
    }

    pub fn from_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}

impl<S: ShareAmount> fmt::Display for Event<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {}", self.sequence, self.kind())?;
        for (name, value) in self.payload.args() {
            write!(f, " {name}={value}")?;
        }
        Ok(())
    }
}

struct OrderedArgs(Vec<(&'static str, String)>);

impl Serialize for OrderedArgs {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<S: ShareAmount> Serialize for Event<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let mut st = serializer.serialize_struct("Event", 4)?;
        st.serialize_field("sequence", &self.sequence)?;
        st.serialize_field("emitter", &self.emitter)?;
        st.serialize_field("kind", self.kind().as_str())?;
        st.serialize_field("args", &OrderedArgs(self.payload.args()))?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    sequence: u64,
    emitter: Address,
    kind: String,
    args: BTreeMap<String, String>,
}

impl<'de, S: ShareAmount> Deserialize<'de> for Event<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawEvent::deserialize(deserializer)?;
        let kind: EventKind = raw.kind.parse().map_err(serde::de::Error::custom)?;
        let payload = EventPayload::from_args(kind, &raw.args).map_err(serde::de::Error::custom)?;
        Ok(Event {
            sequence: raw.sequence,
            emitter: raw.emitter,
            payload,
        })
    }
}
