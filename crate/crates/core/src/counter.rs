//! Round counters: finite partial maps from process ids to round counts.
//!
//! A process absent from the map carries the bottom value and does not participate.
//! The textual form lists counts from process 0 upward, `x` marking a gap, e.g. `2,x,1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::{Pid, ProcSet, MAX_PROCESSES};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<Pid, u32>", into = "BTreeMap<Pid, u32>")]
pub struct RoundCounter {
    counts: BTreeMap<Pid, u32>,
}

/// The output of [`RoundCounter::classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub support: ProcSet,
    pub active: ProcSet,
    pub passive: ProcSet,
    pub cardinality: u64,
}

impl RoundCounter {
    pub fn new(counts: BTreeMap<Pid, u32>) -> Result<Self> {
        if let Some(&p) = counts.keys().find(|&&p| p >= MAX_PROCESSES) {
            return Err(Error::PidOutOfRange(p));
        }
        Ok(RoundCounter { counts })
    }

    /// The short-hand `(r_0, ..., r_n)`.
    pub fn from_slice(counts: &[u32]) -> Self {
        assert!(counts.len() <= MAX_PROCESSES);
        RoundCounter { counts: counts.iter().copied().enumerate().collect() }
    }

    /// `χ_{A,B}`: 1 on `A`, 0 on `B`.
    pub fn chi_of(active: ProcSet, passive: ProcSet) -> Result<Self> {
        if !active.is_disjoint(passive) {
            return Err(Error::Overlap(active, passive));
        }
        let counts = active.iter().map(|p| (p, 1)).chain(passive.iter().map(|p| (p, 0))).collect();
        Ok(RoundCounter { counts })
    }

    pub fn get(&self, p: Pid) -> Option<u32> {
        self.counts.get(&p).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pid, u32)> + '_ {
        self.counts.iter().map(|(&p, &c)| (p, c))
    }

    pub fn support(&self) -> ProcSet {
        self.counts.keys().copied().collect()
    }

    pub fn active(&self) -> ProcSet {
        self.iter().filter(|&(_, c)| c >= 1).map(|(p, _)| p).collect()
    }

    pub fn passive(&self) -> ProcSet {
        self.iter().filter(|&(_, c)| c == 0).map(|(p, _)| p).collect()
    }

    /// `|r̄|`, the total number of rounds.
    pub fn cardinality(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }

    pub fn classify(&self) -> Classification {
        Classification {
            support: self.support(),
            active: self.active(),
            passive: self.passive(),
            cardinality: self.cardinality(),
        }
    }

    /// Deletion `r̄ ∖ A`. Ids of `A` outside the support are ignored.
    pub fn delete(&self, set: ProcSet) -> Self {
        let counts = self.iter().filter(|&(p, _)| !set.contains(p)).collect();
        RoundCounter { counts }
    }

    /// Execution `r̄ ↓ S`, requiring `S ⊆ act r̄`.
    pub fn execute(&self, set: ProcSet) -> Result<Self> {
        let active = self.active();
        if !set.is_subset(active) {
            return Err(Error::NotActive { set, active });
        }
        let counts = self.iter().map(|(p, c)| (p, if set.contains(p) { c - 1 } else { c })).collect();
        Ok(RoundCounter { counts })
    }

    /// `r̄_{S,A} = (r̄ ↓ S) ∖ A`.
    pub fn restrict(&self, executed: ProcSet, deleted: ProcSet) -> Result<Self> {
        Ok(self.execute(executed)?.delete(deleted))
    }

    /// `χ(r̄) = χ_{act r̄, pass r̄}`.
    pub fn chi(&self) -> Self {
        let counts = self.iter().map(|(p, c)| (p, c.min(1))).collect();
        RoundCounter { counts }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// True when every participating process runs exactly one round and the support is
    /// `{0, ..., n}`.
    pub fn is_standard_simplex(&self) -> bool {
        !self.is_empty() && self.support() == ProcSet::range(self.counts.len()) && self.counts.values().all(|&c| c == 1)
    }
}

impl TryFrom<BTreeMap<Pid, u32>> for RoundCounter {
    type Error = Error;
    fn try_from(counts: BTreeMap<Pid, u32>) -> Result<Self> {
        RoundCounter::new(counts)
    }
}

impl From<RoundCounter> for BTreeMap<Pid, u32> {
    fn from(r: RoundCounter) -> Self {
        r.counts
    }
}

impl fmt::Display for RoundCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(&last) = self.counts.keys().next_back() else {
            return Ok(());
        };
        for p in 0..=last {
            if p > 0 {
                f.write_str(",")?;
            }
            match self.get(p) {
                Some(c) => write!(f, "{c}")?,
                None => f.write_str("x")?,
            }
        }
        Ok(())
    }
}

impl FromStr for RoundCounter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s).trim();
        if s.is_empty() {
            return Ok(RoundCounter::default());
        }
        let mut counts = BTreeMap::new();
        for (p, tok) in s.split(',').enumerate() {
            let tok = tok.trim();
            if tok == "x" || tok == "X" || tok == "⊥" {
                continue;
            }
            let c = tok
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad round count `{tok}` at position {p}")))?;
            counts.insert(p, c);
        }
        RoundCounter::new(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(ids: &[Pid]) -> ProcSet {
        ids.iter().copied().collect()
    }

    fn r(s: &str) -> RoundCounter {
        s.parse().unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = r("2,1,1").classify();
        assert_eq!((c.support, c.active, c.passive, c.cardinality), (set(&[0, 1, 2]), set(&[0, 1, 2]), set(&[]), 4));
        let c = r("1,0,1").classify();
        assert_eq!((c.active, c.passive, c.cardinality), (set(&[0, 2]), set(&[1]), 2));
        let c = RoundCounter::default().classify();
        assert_eq!((c.support, c.cardinality), (ProcSet::empty(), 0));
    }

    #[test]
    fn delete_and_execute_examples() {
        assert_eq!(r("2,1,1").delete(set(&[1])), r("2,x,1"));
        assert_eq!(r("2,1,1").delete(ProcSet::empty()), r("2,1,1"));
        assert_eq!(r("2,1,1").execute(set(&[0])).unwrap(), r("1,1,1"));
        assert_eq!(r("2,1,1").execute(set(&[0, 1, 2])).unwrap(), r("1,0,0"));
        assert!(matches!(r("1,0").execute(set(&[1])), Err(Error::NotActive { .. })));
        assert!(r("1,0").execute(set(&[5])).is_err());
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(r("2,1,1").restrict(set(&[0, 1]), set(&[1])).unwrap(), r("1,x,1"));
        assert_eq!(r("2,1,1").restrict(set(&[0]), ProcSet::empty()).unwrap(), r("1,1,1"));
    }

    #[test]
    fn chi_examples() {
        assert_eq!(r("2,1,1").chi(), r("1,1,1"));
        assert_eq!(r("1,0,1").chi(), r("1,0,1"));
        assert_eq!(RoundCounter::chi_of(set(&[0, 2]), set(&[1])).unwrap(), r("1,0,1"));
        assert!(matches!(RoundCounter::chi_of(set(&[0]), set(&[0, 1])), Err(Error::Overlap(..))));
    }

    #[test]
    fn text_and_json_forms() {
        assert_eq!(r("2,x,1").to_string(), "2,x,1");
        assert_eq!(r("(1,0)").to_string(), "1,0");
        assert_eq!(r("x,3").support(), set(&[1]));
        assert!("1,a".parse::<RoundCounter>().is_err());
        let json = serde_json::to_string(&r("2,x,1")).unwrap();
        assert_eq!(json, r#"{"0":2,"2":1}"#);
        let back: RoundCounter = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r("2,x,1"));
    }

    fn counter_strategy() -> impl Strategy<Value = RoundCounter> {
        proptest::collection::btree_map(0usize..8, 0u32..4, 0..7).prop_map(|m| RoundCounter::new(m).unwrap())
    }

    fn subset_of(universe: ProcSet) -> impl Strategy<Value = ProcSet> {
        any::<u64>().prop_map(move |bits| ProcSet::from_bits(bits) & universe)
    }

    proptest! {
        #[test]
        fn chi_is_idempotent(c in counter_strategy()) {
            prop_assert_eq!(c.chi().chi(), c.chi());
            prop_assert_eq!(c.chi().support(), c.support());
        }

        #[test]
        fn deletion_and_execution_sets(c in counter_strategy(), bits in any::<u64>()) {
            let a = ProcSet::from_bits(bits) & ProcSet::range(8);
            prop_assert_eq!(c.delete(a).support(), c.support() - a);
            let s = a & c.active();
            let e = c.execute(s).unwrap();
            let expected: ProcSet = c.active().iter().filter(|&i| !s.contains(i) || c.get(i).unwrap() >= 2).collect();
            prop_assert_eq!(e.active(), expected);
            prop_assert_eq!(e.support(), c.support());
        }

        #[test]
        fn restriction_orders_agree(
            (c, s, a) in counter_strategy().prop_flat_map(|c| {
                let act = c.active();
                let supp = c.support();
                (Just(c), subset_of(act), subset_of(supp))
            })
        ) {
            let lhs = c.execute(s).unwrap().delete(a);
            let rhs = c.delete(a).execute(s - a).unwrap();
            prop_assert_eq!(&lhs, &rhs);
            if s.is_disjoint(a) {
                prop_assert_eq!(&lhs, &c.delete(a).execute(s).unwrap());
            }
            prop_assert_eq!(c.restrict(s, a).unwrap(), lhs);
        }

        #[test]
        fn chi_identities(cd in any::<u16>(), split in any::<u16>(), abits in any::<u16>()) {
            let univ = ProcSet::range(10);
            let cd = ProcSet::from_bits(cd as u64) & univ;
            let c = ProcSet::from_bits(split as u64) & cd;
            let d = cd - c;
            let a = ProcSet::from_bits(abits as u64) & univ;
            let chi = RoundCounter::chi_of(c, d).unwrap();
            prop_assert_eq!(chi.delete(a), RoundCounter::chi_of(c - a, d - a).unwrap());
            let s = a & c;
            prop_assert_eq!(chi.execute(s).unwrap(), RoundCounter::chi_of(c - s, d | s).unwrap());
        }
    }
}
