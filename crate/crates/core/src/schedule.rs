//! Layered immediate snapshot executions.
//!
//! A schedule is a sequence of nonempty layers; each layer is a group of processes that
//! write concurrently and then take an atomic snapshot. Process `p` appears in exactly
//! `r(p)` layers.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::counter::RoundCounter;
use crate::error::{Error, Result};
use crate::set::{Pid, ProcSet};
use crate::witness::{Row, WitnessStructure};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub layers: Vec<ProcSet>,
}

impl Schedule {
    pub fn new(layers: Vec<ProcSet>) -> Self {
        Schedule { layers }
    }

    pub fn check(&self, r: &RoundCounter) -> Result<()> {
        if self.layers.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidWitness("schedule has an empty layer".into()));
        }
        for (p, c) in r.iter() {
            let seen = self.layers.iter().filter(|l| l.contains(p)).count();
            if seen != c as usize {
                return Err(Error::InvalidWitness(format!("process {p} runs {seen} rounds, counter says {c}")));
            }
        }
        let used = self.layers.iter().fold(ProcSet::empty(), |acc, &l| acc | l);
        if !used.is_subset(r.support()) {
            return Err(Error::InvalidWitness(format!("schedule uses {used} outside the support {}", r.support())));
        }
        Ok(())
    }

    /// The facet `((supp r̄, ∅), (L_1, ∅), ..., (L_t, ∅))`.
    pub fn to_facet(&self, r: &RoundCounter) -> Result<WitnessStructure> {
        self.check(r)?;
        let rows = std::iter::once(Row::new(r.support(), ProcSet::empty()))
            .chain(self.layers.iter().map(|&l| Row::new(l, ProcSet::empty())))
            .collect();
        WitnessStructure::new(rows)
    }

    /// Inverse of [`Schedule::to_facet`] on ghost-free witness structures.
    pub fn from_facet(sigma: &WitnessStructure) -> Result<Self> {
        if !sigma.ghost_set().is_empty() {
            return Err(Error::InvalidWitness(format!("{sigma} has ghosts, so it is not a facet")));
        }
        Ok(Schedule { layers: sigma.rows()[1..].iter().map(|r| r.witnessed).collect() })
    }

    /// The local view of each process at the end of the run: the vertex of its color.
    pub fn views(&self, r: &RoundCounter) -> Result<BTreeMap<Pid, WitnessStructure>> {
        let facet = self.to_facet(r)?;
        r.support().iter().map(|p| Ok((p, facet.vertex(p)?))).collect()
    }
}

/// All schedules for `r`, in lexicographic order of their layer lists.
pub fn enumerate(r: &RoundCounter, cap: usize) -> Result<Vec<Schedule>> {
    let mut remaining: BTreeMap<Pid, u32> = r.iter().filter(|&(_, c)| c > 0).collect();
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    extend(&mut remaining, &mut prefix, &mut out, cap)?;
    Ok(out)
}

fn extend(remaining: &mut BTreeMap<Pid, u32>, prefix: &mut Vec<ProcSet>, out: &mut Vec<Schedule>, cap: usize) -> Result<()> {
    let pending: ProcSet = remaining.iter().filter(|(_, &c)| c > 0).map(|(&p, _)| p).collect();
    if pending.is_empty() {
        if out.len() >= cap {
            return Err(Error::ResourceCap { limit: cap, what: "schedules" });
        }
        out.push(Schedule::new(prefix.clone()));
        return Ok(());
    }
    let mut layers: Vec<ProcSet> = pending.subsets().filter(|l| !l.is_empty()).collect();
    layers.sort();
    for layer in layers {
        for p in layer {
            *remaining.get_mut(&p).expect("pending ids are tracked") -= 1;
        }
        prefix.push(layer);
        let res = extend(remaining, prefix, out, cap);
        prefix.pop();
        for p in layer {
            *remaining.get_mut(&p).expect("pending ids are tracked") += 1;
        }
        res?;
    }
    Ok(())
}

/// Number of schedules, by memoized recursion over the sorted multiset of remaining
/// round counts.
pub fn count(r: &RoundCounter) -> u128 {
    let mut key: Vec<u32> = r.iter().map(|(_, c)| c).filter(|&c| c > 0).collect();
    key.sort_unstable();
    count_memo(&key, &mut HashMap::new())
}

fn count_memo(counts: &[u32], memo: &mut HashMap<Vec<u32>, u128>) -> u128 {
    if counts.is_empty() {
        return 1;
    }
    if let Some(&v) = memo.get(counts) {
        return v;
    }
    let n = counts.len();
    let mut total = 0;
    for mask in 1u64..(1 << n) {
        let mut next: Vec<u32> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| if mask & (1 << i) != 0 { c - 1 } else { c })
            .filter(|&c| c > 0)
            .collect();
        next.sort_unstable();
        total += count_memo(&next, memo);
    }
    memo.insert(counts.to_vec(), total);
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[Pid]) -> ProcSet {
        ids.iter().copied().collect()
    }

    fn r(s: &str) -> RoundCounter {
        s.parse().unwrap()
    }

    /// Ordered set partitions of an n-set: a(n) = Σ_k C(n,k) a(n-k).
    fn fubini(n: usize) -> u128 {
        let mut a = vec![1u128; n + 1];
        for m in 1..=n {
            a[m] = (1..=m).map(|k| binom(m, k) * a[m - k]).sum();
        }
        a[n]
    }

    fn binom(n: usize, k: usize) -> u128 {
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    }

    #[test]
    fn enumerate_examples() {
        let s = enumerate(&r("1,1"), usize::MAX).unwrap();
        let expected = vec![
            Schedule::new(vec![set(&[0]), set(&[1])]),
            Schedule::new(vec![set(&[0, 1])]),
            Schedule::new(vec![set(&[1]), set(&[0])]),
        ];
        assert_eq!(s, expected);
        assert_eq!(enumerate(&r("2,1"), usize::MAX).unwrap().len(), 5);
        assert_eq!(count(&r("2,1")), 5);
        assert_eq!(enumerate(&r("0,0"), usize::MAX).unwrap(), vec![Schedule::default()]);
        assert!(matches!(enumerate(&r("1,1,1"), 4), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn counts_match_fubini() {
        for n in 1..=5 {
            let ones = RoundCounter::from_slice(&vec![1; n]);
            assert_eq!(count(&ones), fubini(n));
            if n <= 4 {
                assert_eq!(enumerate(&ones, usize::MAX).unwrap().len() as u128, fubini(n));
            }
        }
        assert_eq!(fubini(3), 13);
        assert_eq!(fubini(4), 75);
    }

    #[test]
    fn count_agrees_with_enumeration() {
        for text in ["2,1", "2,2", "3,1", "2,1,1", "1,0,2", "3,2"] {
            let c = r(text);
            assert_eq!(count(&c), enumerate(&c, usize::MAX).unwrap().len() as u128, "{text}");
        }
    }

    #[test]
    fn to_facet_examples() {
        let f = Schedule::new(vec![set(&[0, 1])]).to_facet(&r("1,1")).unwrap();
        assert_eq!(f, WitnessStructure::from_pairs(&[(&[0, 1], &[]), (&[0, 1], &[])]).unwrap());
        let f = Schedule::new(vec![set(&[0]), set(&[0, 1])]).to_facet(&r("2,1")).unwrap();
        assert_eq!(f, WitnessStructure::from_pairs(&[(&[0, 1], &[]), (&[0], &[]), (&[0, 1], &[])]).unwrap());
        assert_eq!(Schedule::from_facet(&f).unwrap(), Schedule::new(vec![set(&[0]), set(&[0, 1])]));
        assert!(Schedule::new(vec![set(&[0])]).to_facet(&r("1,1")).is_err());
        assert!(Schedule::new(vec![set(&[0]), set(&[])]).to_facet(&r("1")).is_err());
    }

    #[test]
    fn views_examples() {
        let v = Schedule::new(vec![set(&[0, 1])]).views(&r("1,1")).unwrap();
        assert_eq!(v[&0], WitnessStructure::from_pairs(&[(&[0, 1], &[]), (&[0], &[1])]).unwrap());
        let v = Schedule::new(vec![set(&[0]), set(&[1])]).views(&r("1,1")).unwrap();
        assert_eq!(v[&0], WitnessStructure::from_pairs(&[(&[0], &[1]), (&[0], &[])]).unwrap());
        for (p, view) in v {
            assert_eq!(view.active_set(), ProcSet::singleton(p));
        }
    }

    #[test]
    fn schedule_json() {
        let s = Schedule::new(vec![set(&[0]), set(&[0, 1])]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[0],[0,1]]");
    }
}
