// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io;
use std::path::Path;

use crate::address::Address;
use crate::amount::ShareAmount;
use crate::error::JournalError;
use crate::event::{Event, EventPayload};
use crate::token::TokenId;

/// Append-only event log. Sequence numbers are exactly `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Journal<S> {
    entries: Vec<Event<S>>,
}

impl<S> Default for Journal<S> {
    fn default() -> Self {
        Journal {
            entries: Vec::new(),
        }
    }
}

impl<S: ShareAmount> Journal<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an event whose sequence must equal the current length.
    pub fn append(&mut self, event: Event<S>) -> Result<u64, JournalError> {
        let expected = self.entries.len() as u64;
        if event.sequence != expected {
            return Err(JournalError::SequenceMismatch {
                expected,
                found: event.sequence,
            });
        }
        self.entries.push(event);
        Ok(expected)
    }

    /// Stamps the next sequence number onto a payload and appends it.
    pub fn record(&mut self, emitter: Address, payload: EventPayload<S>) -> u64 {
        let sequence = self.entries.len() as u64;
        self.entries.push(Event {
            sequence,
            emitter,
            payload,
        });
        sequence
    }

    pub fn entries(&self) -> &[Event<S>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn since(&self, sequence: usize) -> &[Event<S>] {
        &self.entries[sequence.min(self.entries.len())..]
    }

    /// Lifecycle of a spectrum token (NFST and its SNFST twin).
    ///
    /// Returns every non-rental event whose `_tokenId` is `token`, plus the
    /// share mint that a stake emits directly after the token's SNFST mint.
    /// That share mint carries no token id of its own.
    pub fn trace(&self, token: TokenId) -> Vec<&Event<S>> {
        let mut out = Vec::new();
        for (i, event) in self.entries.iter().enumerate() {
            if event.kind().is_rental() || event.payload.token_id() != Some(token) {
                continue;
            }
            out.push(event);
            if let EventPayload::TransferSnfst { from, to, .. } = &event.payload {
                if !from.is_zero() {
                    continue;
                }
                if let Some(next) = self.entries.get(i + 1) {
                    if matches!(
                        &next.payload,
                        EventPayload::TransferSfst { from, to: mint_to, .. }
                            if from.is_zero() && mint_to == to
                    ) {
                        out.push(next);
                    }
                }
            }
        }
        out
    }

    /// Journal file contents: one encoded event per line, newline terminated.
    pub fn to_text(&self) -> String {
        let mut text = String::new();
        for event in &self.entries {
            text.push_str(&event.to_line());
            text.push('\n');
        }
        text
    }

    /// Parses journal text. Blank lines are ignored; any other undecodable
    /// line fails with the sequence number it should have carried.
    pub fn from_text(text: &str) -> Result<Self, JournalError> {
        let mut journal = Journal::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let sequence = journal.len() as u64;
            let event = Event::from_line(line).map_err(|e| JournalError::Malformed {
                sequence,
                reason: e.to_string(),
            })?;
            journal.append(event)?;
        }
        Ok(journal)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        fs::write(path, self.to_text())
    }

    pub fn load(path: impl AsRef<Path>) -> io::Result<Result<Self, JournalError>> {
        Ok(Self::from_text(&fs::read_to_string(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lock(sequence: u64, id: u64) -> Event<u128> {
        Event {
            sequence,
            emitter: Address::ZERO,
            payload: EventPayload::LockSnfst {
                primary_user: Address::ZERO,
                token_id: TokenId(id),
            },
        }
    }

    fn filled(n: u64) -> Journal<u128> {
        let mut j = Journal::new();
        for i in 0..n {
            j.append(lock(i, 1)).unwrap();
        }
        j
    }

    #[test]
    fn first_append_is_sequence_zero() {
        assert_eq!(Journal::new().append(lock(0, 1)), Ok(0));
    }

    #[test]
    fn append_follows_length() {
        assert_eq!(filled(5).append(lock(5, 1)), Ok(5));
    }

    #[test]
    fn gap_is_rejected() {
        assert_eq!(
            filled(5).append(lock(7, 1)),
            Err(JournalError::SequenceMismatch {
                expected: 5,
                found: 7
            })
        );
    }

    #[test]
    fn unknown_token_traces_empty() {
        assert!(filled(3).trace(TokenId(999)).is_empty());
    }

    #[test]
    fn text_round_trip_and_malformed_line() {
        let j = filled(3);
        assert_eq!(Journal::<u128>::from_text(&j.to_text()).unwrap(), j);

        let mut text = j.to_text();
        text.push_str("{not json}\n");
        assert!(matches!(
            Journal::<u128>::from_text(&text),
            Err(JournalError::Malformed { sequence: 3, .. })
        ));

        let text = format!("{}\n{}\n", lock(0, 1).to_line(), lock(2, 1).to_line());
        assert_eq!(
            Journal::<u128>::from_text(&text),
            Err(JournalError::SequenceMismatch {
                expected: 1,
                found: 2
            })
        );
    }
}
