// SPDX-License-Identifier: Apache-2.0

//! Storage-primitive accounting.
//!
//! Each mutating operation records how many storage primitives it touches.
//! A weight table turns those counts into a scalar cost. The default weights
//! are loosely modelled on EVM storage pricing; they are a relative model for
//! comparing lock/unlock against mint/burn, not a gas oracle.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    MintNfst,
    ReclaimNfst,
    Stake,
    SfstTransfer,
    Lock,
    Unlock,
    SetLockOrder,
    SetUnlockOrder,
    MintRnfst,
    SetUser,
    /// Baseline: one NFT created because a balance crossed a unit threshold.
    NftMint,
    /// Baseline: one NFT destroyed because a balance dropped below a threshold.
    NftBurn,
    HybridTransfer,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = serde_json::to_value(self).expect("op kind serializes");
        f.write_str(name.as_str().expect("op kind is a string"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    SlotWriteNew,
    SlotUpdate,
    SlotDelete,
    SlotRead,
    ListInsert,
    ListRemove,
    EventEmit,
}

impl Primitive {
    pub const ALL: [Primitive; 7] = [
        Primitive::SlotWriteNew,
        Primitive::SlotUpdate,
        Primitive::SlotDelete,
        Primitive::SlotRead,
        Primitive::ListInsert,
        Primitive::ListRemove,
        Primitive::EventEmit,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

/// Cost per primitive. Missing fields in a weights file fall back to the
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub slot_write_new: u64,
    pub slot_update: u64,
    pub slot_delete: u64,
    pub slot_read: u64,
    pub list_insert: u64,
    pub list_remove: u64,
    pub event_emit: u64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            slot_write_new: 20_000,
            slot_update: 5_000,
            slot_delete: 4_800,
            slot_read: 2_100,
            list_insert: 1_500,
            list_remove: 1_500,
            event_emit: 1_000,
        }
    }
}

impl Weights {
    pub const ZERO: Weights = Weights {
        slot_write_new: 0,
        slot_update: 0,
        slot_delete: 0,
        slot_read: 0,
        list_insert: 0,
        list_remove: 0,
        event_emit: 0,
    };

    pub fn get(&self, p: Primitive) -> u64 {
        match p {
            Primitive::SlotWriteNew => self.slot_write_new,
            Primitive::SlotUpdate => self.slot_update,
            Primitive::SlotDelete => self.slot_delete,
            Primitive::SlotRead => self.slot_read,
            Primitive::ListInsert => self.list_insert,
            Primitive::ListRemove => self.list_remove,
            Primitive::EventEmit => self.event_emit,
        }
    }

    pub fn set(&mut self, p: Primitive, value: u64) {
        let slot = match p {
            Primitive::SlotWriteNew => &mut self.slot_write_new,
            Primitive::SlotUpdate => &mut self.slot_update,
            Primitive::SlotDelete => &mut self.slot_delete,
            Primitive::SlotRead => &mut self.slot_read,
            Primitive::ListInsert => &mut self.list_insert,
            Primitive::ListRemove => &mut self.list_remove,
            Primitive::EventEmit => &mut self.event_emit,
        };
        *slot = value;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PrimitiveCounts([u64; 7]);

impl PrimitiveCounts {
    pub fn get(&self, p: Primitive) -> u64 {
        self.0[p.index()]
    }

    pub fn add(&mut self, p: Primitive, n: u64) {
        self.0[p.index()] += n;
    }

    pub fn weighted(&self, weights: &Weights) -> u128 {
        Primitive::ALL
            .iter()
            .map(|&p| u128::from(self.get(p)) * u128::from(weights.get(p)))
            .sum()
    }

    fn merge(&mut self, other: &PrimitiveCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub instances: u64,
    pub counts: PrimitiveCounts,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CostLedger {
    tallies: BTreeMap<OpKind, Tally>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts one more instance of `op`.
    pub fn begin(&mut self, op: OpKind) {
        self.tallies.entry(op).or_default().instances += 1;
    }

    pub fn record(&mut self, op: OpKind, primitive: Primitive, n: u64) {
        if n == 0 {
            return;
        }
        self.tallies.entry(op).or_default().counts.add(primitive, n);
    }

    pub fn tally(&self, op: OpKind) -> Tally {
        self.tallies.get(&op).copied().unwrap_or_default()
    }

    pub fn tallies(&self) -> impl Iterator<Item = (OpKind, &Tally)> {
        self.tallies.iter().map(|(k, t)| (*k, t))
    }

    pub fn total(&self, op: OpKind, weights: &Weights) -> u128 {
        self.tally(op).counts.weighted(weights)
    }

    pub fn merge(&mut self, other: &CostLedger) {
        for (op, t) in &other.tallies {
            let mine = self.tallies.entry(*op).or_default();
            mine.instances += t.instances;
            mine.counts.merge(&t.counts);
        }
    }

    fn op_cost(&self, op: OpKind, weights: &Weights) -> Option<OpCost> {
        let t = self.tally(op);
        (t.instances > 0).then(|| OpCost {
            instances: t.instances,
            total: t.counts.weighted(weights),
        })
    }

    /// Comparison table over whatever op kinds were recorded.
    pub fn summary(&self, weights: &Weights) -> CostReport {
        let mint = self.op_cost(OpKind::NftMint, weights);
        let burn = self.op_cost(OpKind::NftBurn, weights);
        let unlock = self.op_cost(OpKind::Unlock, weights);
        let lock = self.op_cost(OpKind::Lock, weights);
        CostReport {
            unlock_vs_mint: mint
                .zip(unlock)
                .and_then(|(b, n)| Reduction::between_ops(&b, &n)),
            lock_vs_burn: burn
                .zip(lock)
                .and_then(|(b, n)| Reduction::between_ops(&b, &n)),
            mint,
            burn,
            unlock,
            lock,
        }
    }

    /// Like [`summary`](Self::summary) but requires every compared kind.
    pub fn report(&self, weights: &Weights) -> Result<CostReport, CostError> {
        for op in [
            OpKind::NftMint,
            OpKind::NftBurn,
            OpKind::Unlock,
            OpKind::Lock,
        ] {
            if self.tally(op).instances == 0 {
                return Err(CostError::IncompleteData(op));
            }
        }
        Ok(self.summary(weights))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("no {0} operation was recorded")]
    IncompleteData(OpKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpCost {
    pub instances: u64,
    pub total: u128,
}

impl OpCost {
    /// Mean cost per instance, rounded half up.
    pub fn per_op(&self) -> u128 {
        let n = u128::from(self.instances);
        (2 * self.total + n) / (2 * n)
    }
}

/// Relative saving of a new cost against a base cost, in tenths of a
/// percent, rounded half away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Reduction {
    pub permille: i128,
}

impl Reduction {
    /// `(base - new) / base`. `None` when the base cost is zero.
    pub fn between(base: u128, new: u128) -> Option<Reduction> {
        Self::from_ratio(base as i128 - new as i128, base as i128)
    }

    /// Reduction between per-instance means, computed without rounding the
    /// means first.
    pub fn between_ops(base: &OpCost, new: &OpCost) -> Option<Reduction> {
        let bt = base.total as i128;
        let bn = i128::from(base.instances);
        let nt = new.total as i128;
        let nn = i128::from(new.instances);
        Self::from_ratio(bt * nn - nt * bn, bt * nn)
    }

    fn from_ratio(num: i128, den: i128) -> Option<Reduction> {
        if den == 0 {
            return None;
        }
        let scaled = 2000 * num.abs();
        let rounded = (scaled + den) / (2 * den);
        Some(Reduction {
            permille: if num < 0 { -rounded } else { rounded },
        })
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.permille < 0 { "-" } else { "" };
        let p = self.permille.abs();
        write!(f, "{sign}{}.{}%", p / 10, p % 10)
    }
}

impl Serialize for Reduction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub mint: Option<OpCost>,
    pub burn: Option<OpCost>,
    pub unlock: Option<OpCost>,
    pub lock: Option<OpCost>,
    pub unlock_vs_mint: Option<Reduction>,
    pub lock_vs_burn: Option<Reduction>,
}

impl CostReport {
    pub fn to_json(&self) -> serde_json::Value {
        let op = |c: &Option<OpCost>| match c {
            Some(c) => serde_json::json!({
                "instances": c.instances,
                "total": c.total.to_string(),
                "per_op": c.per_op().to_string(),
            }),
            None => serde_json::Value::Null,
        };
        let red = |r: &Option<Reduction>| match r {
            Some(r) => serde_json::Value::String(r.to_string()),
            None => serde_json::Value::Null,
        };
        serde_json::json!({
            "mint": op(&self.mint),
            "burn": op(&self.burn),
            "unlock": op(&self.unlock),
            "lock": op(&self.lock),
            "reductions": {
                "unlock_vs_mint": red(&self.unlock_vs_mint),
                "lock_vs_burn": red(&self.lock_vs_burn),
            },
        })
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:>6} {:>14} {:>12}",
            "op", "count", "total", "per-op"
        )?;
        for (name, cost) in [
            ("mint", &self.mint),
            ("burn", &self.burn),
            ("unlock", &self.unlock),
            ("lock", &self.lock),
        ] {
            match cost {
                Some(c) => writeln!(
                    f,
                    "{name:<8} {:>6} {:>14} {:>12}",
                    c.instances,
                    c.total,
                    c.per_op()
                )?,
                None => writeln!(f, "{name:<8} {:>6} {:>14} {:>12}", 0, 0, "-")?,
            }
        }
        let show = |r: &Option<Reduction>| r.map_or_else(|| "n/a".to_owned(), |r| r.to_string());
        writeln!(
            f,
            "unlock vs mint reduction: {}",
            show(&self.unlock_vs_mint)
        )?;
        writeln!(f, "lock vs burn reduction:   {}", show(&self.lock_vs_burn))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_gas_figures_format_like_the_published_comparison() {
        // mint 262,958 / burn 133,340 against unlock 86,617 / lock 103,700.
        assert_eq!(
            Reduction::between(262_958, 86_617).unwrap().to_string(),
            "67.1%"
        );
        assert_eq!(
            Reduction::between(133_340, 103_700).unwrap().to_string(),
            "22.2%"
        );
    }

    #[test]
    fn reduction_rounding_and_sign() {
        assert_eq!(Reduction::between(1000, 1000).unwrap().permille, 0);
        assert_eq!(Reduction::between(2000, 1).unwrap().permille, 1000);
        // 1 - 1999/2000 = 0.05% rounds half away from zero.
        assert_eq!(Reduction::between(2000, 1999).unwrap().permille, 1);
        assert_eq!(Reduction::between(100, 150).unwrap().to_string(), "-50.0%");
        assert_eq!(Reduction::between(0, 0), None);
    }

    #[test]
    fn zero_weights_give_zero_totals_and_no_reductions() {
        let mut ledger = CostLedger::new();
        for op in [
            OpKind::NftMint,
            OpKind::NftBurn,
            OpKind::Unlock,
            OpKind::Lock,
        ] {
            ledger.begin(op);
            ledger.record(op, Primitive::SlotUpdate, 3);
        }
        let report = ledger.report(&Weights::ZERO).unwrap();
        assert_eq!(report.mint.unwrap().total, 0);
        assert_eq!(report.lock.unwrap().total, 0);
        assert_eq!(report.unlock_vs_mint, None);
        assert_eq!(report.lock_vs_burn, None);
    }

    #[test]
    fn report_names_missing_kind() {
        let mut ledger = CostLedger::new();
        ledger.begin(OpKind::NftMint);
        assert_eq!(
            ledger.report(&Weights::default()),
            Err(CostError::IncompleteData(OpKind::NftBurn))
        );
    }

    #[test]
    fn total_is_weighted_sum() {
        let mut ledger = CostLedger::new();
        ledger.begin(OpKind::Lock);
        ledger.record(OpKind::Lock, Primitive::SlotUpdate, 1);
        ledger.record(OpKind::Lock, Primitive::ListInsert, 1);
        ledger.record(OpKind::Lock, Primitive::ListRemove, 1);
        ledger.record(OpKind::Lock, Primitive::EventEmit, 1);
        ledger.record(OpKind::Lock, Primitive::SlotRead, 0);
        let w = Weights::default();
        assert_eq!(
            ledger.total(OpKind::Lock, &w),
            u128::from(w.slot_update + w.list_insert + w.list_remove + w.event_emit)
        );
    }

    #[test]
    fn weights_file_overrides_partially() {
        let w: Weights = serde_json::from_str(r#"{"slot_read": 7}"#).unwrap();
        assert_eq!(w.slot_read, 7);
        assert_eq!(w.slot_write_new, Weights::default().slot_write_new);
        assert!(serde_json::from_str::<Weights>(r#"{"sload": 7}"#).is_err());
    }

    #[test]
    fn default_weights_follow_storage_ordering() {
        let w = Weights::default();
        assert!(w.slot_write_new > 2 * w.slot_update);
        assert!(w.slot_update >= w.slot_delete);
        assert!(w.slot_delete > w.slot_read);
        assert!(w.slot_read > w.list_insert);
        assert!(w.list_insert == w.list_remove);
        assert!(w.list_remove > w.event_emit);
    }

    #[test]
    fn merge_adds_instances_and_counts() {
        let mut a = CostLedger::new();
        a.begin(OpKind::Lock);
        a.record(OpKind::Lock, Primitive::SlotUpdate, 1);
        let mut b = CostLedger::new();
        b.begin(OpKind::Lock);
        b.record(OpKind::Lock, Primitive::SlotUpdate, 2);
        a.merge(&b);
        assert_eq!(a.tally(OpKind::Lock).instances, 2);
        assert_eq!(a.tally(OpKind::Lock).counts.get(Primitive::SlotUpdate), 3);
    }
}
