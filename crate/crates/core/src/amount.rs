// SPDX-License-Identifier: Apache-2.0

//! Exact share arithmetic.
//!
//! Balances are counted in atto-shares: one whole share (one spectrum unit)
//! is `10^18` atto-shares. The engine is generic over the integer type that
//! stores them so the same state machine runs on `u128` in production and on
//! arbitrary precision integers where headroom matters. Floating point never
//! appears on this path.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Num, ToPrimitive, Unsigned};

use crate::error::AmountError;

/// Number of decimal places between one share and one atto-share.
pub const SHARE_DECIMALS: usize = 18;

/// `10^18`, the atto-share count of one whole share.
pub const ATTO_PER_SHARE: u64 = 1_000_000_000_000_000_000;

/// Unsigned integer type usable as an atto-share balance.
pub trait ShareAmount:
    Num
    + Unsigned
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + Clone
    + Ord
    + Hash
    + Debug
    + Display
    + FromStr
{
    /// One whole share, `10^18` atto-shares.
    fn unit() -> Self {
        Self::from_u64(ATTO_PER_SHARE).expect("share amount type cannot represent 10^18")
    }

    /// Whole shares implied by a balance (floor division by the unit).
    fn whole_shares(&self) -> u64 {
        (self.clone() / Self::unit())
            .to_u64()
            .expect("whole share count exceeds u64")
    }

    /// `n` whole shares expressed in atto-shares.
    fn from_shares(n: u64) -> Result<Self, AmountError> {
        Self::from_u64(n)
            .and_then(|n| n.checked_mul(&Self::unit()))
            .ok_or(AmountError::Overflow)
    }
}

impl<T> ShareAmount for T where
    T: Num
        + Unsigned
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
        + Clone
        + Ord
        + Hash
        + Debug
        + Display
        + FromStr
{
}

/// Parses a plain decimal integer of atto-shares, e.g. `"300000000000000000"`.
pub fn parse_atto<S: ShareAmount>(text: &str) -> Result<S, AmountError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(AmountError::Malformed(text.to_owned()));
    }
    S::from_str_radix(text, 10).map_err(|_| AmountError::Overflow)
}

/// Parses decimal share notation (`"0.3"`, `"2"`, `"1.000000000000000001"`)
/// into atto-shares. More than 18 fractional digits is rejected rather than
/// rounded.
pub fn parse_shares<S: ShareAmount>(text: &str) -> Result<S, AmountError> {
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    let digits_only = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if whole.is_empty() && frac.is_empty()
        || !digits_only(whole)
        || !digits_only(frac)
        || text.ends_with('.')
    {
        return Err(AmountError::Malformed(text.to_owned()));
    }
    if frac.len() > SHARE_DECIMALS {
        return Err(AmountError::TooPrecise(text.to_owned()));
    }

    let whole: S = if whole.is_empty() {
        S::zero()
    } else {
        S::from_str_radix(whole, 10).map_err(|_| AmountError::Overflow)?
    };
    let mut padded = frac.to_owned();
    padded.extend(std::iter::repeat_n('0', SHARE_DECIMALS - frac.len()));
    let frac: S = S::from_str_radix(&padded, 10).map_err(|_| AmountError::Overflow)?;

    whole
        .checked_mul(&S::unit())
        .and_then(|w| w.checked_add(&frac))
        .ok_or(AmountError::Overflow)
}

/// Renders atto-shares in share notation with trailing zeros trimmed:
/// `1700000000000000000` becomes `"1.7"`.
pub fn format_shares<S: ShareAmount>(amount: &S) -> String {
    let unit = S::unit();
    let whole = amount.clone() / unit.clone();
    let frac = amount.clone() % unit;
    if frac.is_zero() {
        return whole.to_string();
    }
    let frac = format!("{:0>width$}", frac.to_string(), width = SHARE_DECIMALS);
    format!("{}.{}", whole, frac.trim_end_matches('0'))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    #[test]
    fn unit_is_ten_to_the_eighteen() {
        assert_eq!(<u128 as ShareAmount>::unit(), 10u128.pow(18));
        assert_eq!(
            <BigUint as ShareAmount>::unit(),
            BigUint::from(10u8).pow(18)
        );
    }

    #[test]
    fn decimal_share_notation() {
        assert_eq!(
            parse_shares::<u128>("0.3").unwrap(),
            300_000_000_000_000_000
        );
        assert_eq!(
            parse_shares::<u128>("2").unwrap(),
            2_000_000_000_000_000_000
        );
        assert_eq!(parse_shares::<u128>(".5").unwrap(), 500_000_000_000_000_000);
        assert_eq!(
            parse_shares::<u128>("1.000000000000000001").unwrap(),
            1_000_000_000_000_000_001
        );
        assert_eq!(parse_shares::<u128>("0").unwrap(), 0);
    }

    #[test]
    fn rejects_bad_notation() {
        assert!(matches!(
            parse_shares::<u128>("0.0000000000000000001"),
            Err(AmountError::TooPrecise(_))
        ));
        for bad in ["", ".", "1.", "-1", "+1", "1e3", "0x10", "1.2.3", " 1"] {
            assert!(
                parse_shares::<u128>(bad).is_err(),
                "{bad:?} should be rejected"
            );
        }
        assert!(parse_atto::<u128>("+5").is_err());
        assert!(matches!(
            parse_atto::<u64>("18446744073709551616"),
            Err(AmountError::Overflow)
        ));
    }

    #[test]
    fn whole_shares_floor() {
        assert_eq!(1_700_000_000_000_000_000u128.whole_shares(), 1);
        assert_eq!(999_999_999_999_999_999u128.whole_shares(), 0);
        assert_eq!(
            <u128 as ShareAmount>::from_shares(3).unwrap(),
            3 * 10u128.pow(18)
        );
        assert!(matches!(
            <u64 as ShareAmount>::from_shares(19),
            Err(AmountError::Overflow)
        ));
    }

    #[test]
    fn formats_table_values() {
        assert_eq!(format_shares(&1_700_000_000_000_000_000u128), "1.7");
        assert_eq!(format_shares(&300_000_000_000_000_000u128), "0.3");
        assert_eq!(format_shares(&2_000_000_000_000_000_000u128), "2");
        assert_eq!(format_shares(&0u128), "0");
        assert_eq!(format_shares(&1u128), "0.000000000000000001");
    }

    proptest! {
        #[test]
        fn share_notation_round_trips(atto in any::<u64>().prop_map(u128::from)) {
            let text = format_shares(&atto);
            prop_assert_eq!(parse_shares::<u128>(&text).unwrap(), atto);
            let big: BigUint = parse_shares(&text).unwrap();
            prop_assert_eq!(big, BigUint::from(atto));
        }
    }
}
