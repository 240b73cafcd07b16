//! Finite sets of process ids.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A process identifier. Ids are small nonnegative integers.
pub type Pid = usize;

/// Largest admissible process id plus one.
pub const MAX_PROCESSES: usize = 64;

/// A finite set of process ids, stored as a bitmask.
///
/// Ordering is lexicographic on the increasing element lists, so `{0,1} < {0,2} < {1}`
/// and a proper prefix sorts first (`{0} < {0,1}`).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ProcSet(u64);

impl ProcSet {
    pub const fn empty() -> Self {
        ProcSet(0)
    }

    pub fn singleton(p: Pid) -> Self {
        assert!(p < MAX_PROCESSES, "process id {p} out of range");
        ProcSet(1 << p)
    }

    /// Checked constructor used at input boundaries.
    pub fn try_from_iter<I: IntoIterator<Item = Pid>>(iter: I) -> Result<Self> {
        let mut s = ProcSet::empty();
        for p in iter {
            if p >= MAX_PROCESSES {
                return Err(Error::PidOutOfRange(p));
            }
            s.0 |= 1 << p;
        }
        Ok(s)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        assert!(n <= MAX_PROCESSES);
        if n == MAX_PROCESSES {
            ProcSet(u64::MAX)
        } else {
            ProcSet((1u64 << n) - 1)
        }
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub const fn from_bits(bits: u64) -> Self {
        ProcSet(bits)
    }

    pub fn contains(self, p: Pid) -> bool {
        p < MAX_PROCESSES && self.0 & (1 << p) != 0
    }

    pub fn insert(&mut self, p: Pid) {
        *self = *self | ProcSet::singleton(p);
    }

    pub fn remove(&mut self, p: Pid) {
        if p < MAX_PROCESSES {
            self.0 &= !(1 << p);
        }
    }

    pub fn with(self, p: Pid) -> Self {
        self | ProcSet::singleton(p)
    }

    pub fn without(self, p: Pid) -> Self {
        let mut s = self;
        s.remove(p);
        s
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_subset(self, other: ProcSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Strict inclusion.
    pub const fn is_proper_subset(self, other: ProcSet) -> bool {
        self.is_subset(other) && self.0 != other.0
    }

    pub const fn is_disjoint(self, other: ProcSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn min(self) -> Option<Pid> {
        (!self.is_empty()).then(|| self.0.trailing_zeros() as Pid)
    }

    pub fn max(self) -> Option<Pid> {
        (!self.is_empty()).then(|| 63 - self.0.leading_zeros() as Pid)
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    /// All subsets, in increasing order of their bitmask.
    pub fn subsets(self) -> Subsets {
        Subsets { universe: self.0, next: Some(0) }
    }

    /// Subsets sorted by cardinality, then lexicographically.
    pub fn subsets_by_size(self) -> Vec<ProcSet> {
        let mut v: Vec<ProcSet> = self.subsets().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        v
    }
}

impl BitOr for ProcSet {
    type Output = ProcSet;
    fn bitor(self, rhs: ProcSet) -> ProcSet {
        ProcSet(self.0 | rhs.0)
    }
}

impl BitAnd for ProcSet {
    type Output = ProcSet;
    fn bitand(self, rhs: ProcSet) -> ProcSet {
        ProcSet(self.0 & rhs.0)
    }
}

impl Sub for ProcSet {
    type Output = ProcSet;
    fn sub(self, rhs: ProcSet) -> ProcSet {
        ProcSet(self.0 & !rhs.0)
    }
}

impl Ord for ProcSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let low = diff & diff.wrapping_neg();
        let above = !(low | (low - 1));
        // Both lists agree below `low`. The list holding `low` is smaller unless the
        // other list has run out of elements.
        let self_holds = self.0 & low != 0;
        let rest = if self_holds { other.0 } else { self.0 };
        let holder_smaller = rest & above != 0;
        if holder_smaller == self_holds {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for ProcSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<Pid> for ProcSet {
    fn from_iter<I: IntoIterator<Item = Pid>>(iter: I) -> Self {
        let mut s = ProcSet::empty();
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl IntoIterator for ProcSet {
    type Item = Pid;
    type IntoIter = Iter;
    fn into_iter(self) -> Iter {
        self.iter()
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = Pid;
    fn next(&mut self) -> Option<Pid> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as Pid;
        self.0 &= self.0 - 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

pub struct Subsets {
    universe: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = ProcSet;
    fn next(&mut self) -> Option<ProcSet> {
        let cur = self.next?;
        self.next = if cur == self.universe {
            None
        } else {
            Some((cur.wrapping_sub(self.universe)) & self.universe)
        };
        Some(ProcSet(cur))
    }
}

impl fmt::Debug for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Accepts `{0,2}`, `0,2`, `{}` and the empty string.
impl FromStr for ProcSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim();
        let inner = inner.strip_prefix('{').unwrap_or(inner);
        let inner = inner.strip_suffix('}').unwrap_or(inner).trim();
        if inner.is_empty() {
            return Ok(ProcSet::empty());
        }
        let ids = inner
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<Pid>()
                    .map_err(|_| Error::Parse(format!("bad process id `{}` in set `{s}`", tok.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        ProcSet::try_from_iter(ids)
    }
}

impl Serialize for ProcSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ProcSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<Pid>::deserialize(deserializer)?;
        ProcSet::try_from_iter(ids).map_err(serde::de::Error::custom)
    }
}
