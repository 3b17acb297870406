// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::AddressError;

/// A 20-byte participant or contract identity.
///
/// Rendered as `0x` followed by 40 lowercase hex digits. Parsing accepts
/// mixed case, so checksummed input normalizes to the same value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address([u8; 20]);

impl Address {
    /// The mint/burn sentinel. Never a real participant.
    pub const ZERO: Address = Address([0; 20]);

    pub const fn from_bytes(bytes: [u8; 20]) -> Self {
        Address(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 20]
    }
}

impl FromStr for Address {
    type Err = AddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| AddressError {
            input: s.to_owned(),
            reason,
        };
        let digits = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .ok_or_else(|| err("missing 0x prefix"))?;
        if digits.len() != 40 {
            return Err(err("expected 40 hex digits"));
        }
        let mut bytes = [0u8; 20];
        hex::decode_to_slice(digits, &mut bytes).map_err(|_| err("not hexadecimal"))?;
        Ok(Address(bytes))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PU: &str = "0x0aa7652B45d957B9d2dE60AFbbD90b2DaD3d1f60";

    #[test]
    fn rendering_is_lowercase() {
        let a: Address = PU.parse().unwrap();
        assert_eq!(a.to_string(), PU.to_lowercase());
        assert_eq!(a, PU.to_lowercase().parse().unwrap());
    }

    #[test]
    fn zero_sentinel() {
        assert!(Address::ZERO.is_zero());
        assert_eq!(
            Address::ZERO.to_string(),
            "0x0000000000000000000000000000000000000000"
        );
        assert!(!PU.parse::<Address>().unwrap().is_zero());
    }

    #[test]
    fn rejects_truncated_and_garbage() {
        // Table I style elided addresses are not addresses.
        assert!("0x50C...BCB".parse::<Address>().is_err());
        assert!("0aa7652b45d957b9d2de60afbbd90b2dad3d1f60"
            .parse::<Address>()
            .is_err());
        assert!("0x0aa7652b45d957b9d2de60afbbd90b2dad3d1f6"
            .parse::<Address>()
            .is_err());
        assert!("0xzz a7652b45d957b9d2de60afbbd90b2dad3d1f"
            .parse::<Address>()
            .is_err());
    }

    #[test]
    fn serde_uses_hex_string() {
        let a: Address = PU.parse().unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, format!("\"{}\"", PU.to_lowercase()));
        assert_eq!(serde_json::from_str::<Address>(&json).unwrap(), a);
    }
}
