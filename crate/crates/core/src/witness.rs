//! Witness prestructures and witness structures.
//!
//! Pair form `((W_0,G_0),...,(W_t,G_t))` is the storage form. Trace form
//! `(A, G, {Tr(p)})` is used for stabilization, where truncating traces is the natural
//! operation. Ghosting `Γ_S` is stabilization modulo `S` followed by the canonical form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::{Pid, ProcSet};

/// One pair `(W_i, G_i)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(ProcSet, ProcSet)", into = "(ProcSet, ProcSet)")]
pub struct Row {
    pub witnessed: ProcSet,
    pub ghosts: ProcSet,
}

impl Row {
    pub const fn new(witnessed: ProcSet, ghosts: ProcSet) -> Self {
        Row { witnessed, ghosts }
    }

    pub fn union(self) -> ProcSet {
        self.witnessed | self.ghosts
    }
}

impl From<(ProcSet, ProcSet)> for Row {
    fn from((w, g): (ProcSet, ProcSet)) -> Self {
        Row::new(w, g)
    }
}

impl From<Row> for (ProcSet, ProcSet) {
    fn from(r: Row) -> Self {
        (r.witnessed, r.ghosts)
    }
}

/// Strongest class a sequence of pairs belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    Invalid,
    Prestructure,
    Stable,
    Witness,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Invalid => "invalid",
            Class::Prestructure => "prestructure",
            Class::Stable => "stable",
            Class::Witness => "witness",
        })
    }
}

pub fn classify(rows: &[Row]) -> Class {
    if !satisfies_prestructure(rows) {
        return Class::Invalid;
    }
    let t = rows.len() - 1;
    if rows[1..].iter().all(|r| !r.witnessed.is_empty()) {
        Class::Witness
    } else if t == 0 || !rows[t].witnessed.is_empty() {
        Class::Stable
    } else {
        Class::Prestructure
    }
}

fn satisfies_prestructure(rows: &[Row]) -> bool {
    let Some(first) = rows.first() else {
        return false;
    };
    let w0 = first.witnessed;
    // (P1)
    if !rows[1..].iter().all(|r| r.witnessed.is_subset(w0) && r.ghosts.is_subset(w0)) {
        return false;
    }
    // (P2): pairwise disjoint ghost sets
    let mut seen = ProcSet::empty();
    for r in rows {
        if !r.ghosts.is_disjoint(seen) {
            return false;
        }
        seen = seen | r.ghosts;
    }
    // (P3): G_i ∩ W_j = ∅ for i ≤ j
    let mut ghosts_so_far = ProcSet::empty();
    for r in rows {
        ghosts_so_far = ghosts_so_far | r.ghosts;
        if !r.witnessed.is_disjoint(ghosts_so_far) {
            return false;
        }
    }
    true
}

/// A sequence of pairs satisfying (P1)-(P3).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prestructure {
    rows: Vec<Row>,
}

impl Prestructure {
    pub fn new(rows: Vec<Row>) -> Result<Self> {
        if classify(&rows) == Class::Invalid {
            return Err(Error::InvalidWitness(format!("{} violates (P1)-(P3)", Display(&rows))));
        }
        Ok(Prestructure { rows })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Index of the last pair.
    pub fn t(&self) -> usize {
        self.rows.len() - 1
    }

    /// The pair at index `i`; indices past `t` read as `(∅, ∅)`.
    pub fn row(&self, i: usize) -> Row {
        self.rows.get(i).copied().unwrap_or_default()
    }

    pub fn class(&self) -> Class {
        classify(&self.rows)
    }

    pub fn is_stable(&self) -> bool {
        self.class() >= Class::Stable
    }

    pub fn support(&self) -> ProcSet {
        self.rows[0].union()
    }

    /// `G(σ) = G_0 ∪ ... ∪ G_t`.
    pub fn ghost_set(&self) -> ProcSet {
        self.rows.iter().fold(ProcSet::empty(), |acc, r| acc | r.ghosts)
    }

    /// `A(σ) = supp σ ∖ G(σ)`.
    pub fn active_set(&self) -> ProcSet {
        self.support() - self.ghost_set()
    }

    /// `|A(σ)| - 1`; the empty simplex has dimension -1.
    pub fn dim(&self) -> isize {
        self.active_set().len() as isize - 1
    }

    pub fn trace(&self, p: Pid) -> Vec<usize> {
        self.rows.iter().enumerate().filter(|(_, r)| r.union().contains(p)).map(|(i, _)| i).collect()
    }

    /// `last(p)`: the last index with `p ∈ W_i`, or -1.
    pub fn last(&self, p: Pid) -> isize {
        self.rows.iter().rposition(|r| r.witnessed.contains(p)).map_or(-1, |i| i as isize)
    }

    pub fn to_trace_form(&self) -> TraceForm {
        let ghosts = self.ghost_set();
        let traces = self.support().iter().map(|p| (p, self.trace(p).into_iter().collect())).collect();
        TraceForm { active: self.active_set(), ghosts, traces }
    }

    /// Stabilization modulo `set` (`st_S`). `set` must lie in the active set.
    ///
    /// When every `W_i` is absorbed by `set ∪ G(σ)` the cut-off index is taken to be 0,
    /// which sends `st_{A(σ)}(σ)` to `((∅, supp σ))`.
    pub fn stabilize(&self, set: ProcSet) -> Result<Prestructure> {
        let active = self.active_set();
        if !set.is_subset(active) {
            return Err(Error::NotSubsetOfActive { set, active });
        }
        let absorbed = set | self.ghost_set();
        let q = self.rows.iter().rposition(|r| !r.witnessed.is_subset(absorbed)).unwrap_or(0);
        let mut tf = self.to_trace_form();
        tf.active = tf.active - set;
        tf.ghosts = tf.ghosts | set;
        for trace in tf.traces.values_mut() {
            trace.retain(|&i| i <= q);
        }
        tf.to_prestructure()
    }

    /// `C(σ)`: drops the pairs with empty `W_i` and merges their ghosts forward.
    pub fn canonical_form(&self) -> Result<WitnessStructure> {
        if !self.is_stable() {
            return Err(Error::NotStable);
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        rows.push(self.rows[0]);
        let mut pending = ProcSet::empty();
        for r in &self.rows[1..] {
            pending = pending | r.ghosts;
            if !r.witnessed.is_empty() {
                rows.push(Row::new(r.witnessed, pending));
                pending = ProcSet::empty();
            }
        }
        debug_assert!(pending.is_empty());
        Ok(WitnessStructure(Prestructure { rows }))
    }
}

/// A stable prestructure whose `W_1, ..., W_t` are all nonempty.
///
/// Witness structures index the simplices of immediate snapshot complexes; equality and
/// hashing use the pair form, which is canonical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WitnessStructure(Prestructure);

impl WitnessStructure {
    pub fn new(rows: Vec<Row>) -> Result<Self> {
        match classify(&rows) {
            Class::Witness => Ok(WitnessStructure(Prestructure { rows })),
            class => Err(Error::InvalidWitness(format!("{} is {class}, not a witness structure", Display(&rows)))),
        }
    }

    /// Builds from `(W_i, G_i)` id lists, mainly for tests and examples.
    pub fn from_pairs(pairs: &[(&[Pid], &[Pid])]) -> Result<Self> {
        let rows = pairs
            .iter()
            .map(|(w, g)| Ok(Row::new(ProcSet::try_from_iter(w.iter().copied())?, ProcSet::try_from_iter(g.iter().copied())?)))
            .collect::<Result<Vec<_>>>()?;
        WitnessStructure::new(rows)
    }

    /// `((∅, support))`, the empty simplex.
    pub fn empty(support: ProcSet) -> Self {
        WitnessStructure(Prestructure { rows: vec![Row::new(ProcSet::empty(), support)] })
    }

    pub fn as_prestructure(&self) -> &Prestructure {
        &self.0
    }

    pub fn into_rows(self) -> Vec<Row> {
        self.0.rows
    }

    pub fn is_empty_simplex(&self) -> bool {
        self.active_set().is_empty()
    }

    /// `Γ_S(σ) = C(st_S(σ))`.
    pub fn ghost(&self, set: ProcSet) -> Result<WitnessStructure> {
        if set.is_empty() {
            return Ok(self.clone());
        }
        self.0.stabilize(set)?.canonical_form()
    }

    /// The vertex of color `p`: `Γ_{A(σ)∖{p}}(σ)`.
    pub fn vertex(&self, p: Pid) -> Result<WitnessStructure> {
        let active = self.active_set();
        if !active.contains(p) {
            return Err(Error::NotSubsetOfActive { set: ProcSet::singleton(p), active });
        }
        self.ghost(active.without(p))
    }

    /// Canonical encoding: compact JSON of the pair list with sorted id arrays.
    pub fn key(&self) -> String {
        serde_json::to_string(&self.0.rows).expect("rows serialize")
    }
}

impl Deref for WitnessStructure {
    type Target = Prestructure;
    fn deref(&self) -> &Prestructure {
        &self.0
    }
}

impl fmt::Debug for WitnessStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Display(&self.0.rows))
    }
}

impl fmt::Display for WitnessStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Display(&self.0.rows))
    }
}

struct Display<'a>(&'a [Row]);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({},{})", r.witnessed, r.ghosts)?;
        }
        f.write_str(")")
    }
}

#[derive(Serialize, Deserialize)]
struct PairsJson {
    pairs: Vec<Row>,
}

impl Serialize for WitnessStructure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PairsJson { pairs: self.0.rows.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WitnessStructure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let PairsJson { pairs } = PairsJson::deserialize(deserializer)?;
        WitnessStructure::new(pairs).map_err(serde::de::Error::custom)
    }
}

/// Trace form `(A, G, {Tr(p)})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceForm {
    pub active: ProcSet,
    pub ghosts: ProcSet,
    pub traces: BTreeMap<Pid, BTreeSet<usize>>,
}

impl TraceForm {
    /// Checks condition (T), disjointness of `A` and `G`, and that traces are given for
    /// exactly `A ∪ G`.
    pub fn check(&self) -> Result<()> {
        if !self.active.is_disjoint(self.ghosts) {
            return Err(Error::InvalidWitness(format!("active {} and ghost {} sets overlap", self.active, self.ghosts)));
        }
        let keys: ProcSet = ProcSet::try_from_iter(self.traces.keys().copied())?;
        if keys != self.active | self.ghosts {
            return Err(Error::InvalidWitness(format!("traces given for {keys}, expected {}", self.active | self.ghosts)));
        }
        if let Some((p, _)) = self.traces.iter().find(|(_, tr)| !tr.contains(&0)) {
            return Err(Error::InvalidWitness(format!("trace of {p} misses 0")));
        }
        Ok(())
    }

    fn max_trace(&self, p: Pid) -> usize {
        self.traces[&p].iter().next_back().copied().unwrap_or(0)
    }

    /// (TS).
    pub fn is_stable(&self) -> bool {
        if self.active.is_empty() {
            return self.ghosts.iter().all(|p| self.traces[&p].len() == 1);
        }
        let top = self.active.iter().map(|p| self.max_trace(p)).max().unwrap_or(0);
        self.ghosts.iter().all(|p| self.max_trace(p) <= top)
    }

    /// (TW), on top of (TS).
    pub fn is_witness(&self) -> bool {
        if !self.is_stable() {
            return false;
        }
        let top = self.active.iter().map(|p| self.max_trace(p)).max().unwrap_or(0);
        (1..=top).all(|k| {
            self.active.iter().any(|p| self.traces[&p].contains(&k))
                || self.ghosts.iter().any(|p| self.traces[&p].contains(&k) && self.max_trace(p) != k)
        })
    }

    /// Active ids occupy `W_i` for every `i ∈ Tr(p)`; a ghost id sits in
    /// `G_{max Tr(p)}` and in `W_i` for the smaller indices of its trace.
    pub fn to_prestructure(&self) -> Result<Prestructure> {
        self.check()?;
        let len = self.traces.values().filter_map(|tr| tr.iter().next_back()).max().map_or(1, |m| m + 1);
        let mut rows = vec![Row::default(); len];
        for (&p, tr) in &self.traces {
            let top = *tr.iter().next_back().expect("trace contains 0");
            for &i in tr {
                if self.ghosts.contains(p) && i == top {
                    rows[i].ghosts.insert(p);
                } else {
                    rows[i].witnessed.insert(p);
                }
            }
        }
        Prestructure::new(rows)
    }

    pub fn to_witness_structure(&self) -> Result<WitnessStructure> {
        WitnessStructure::new(self.to_prestructure()?.rows)
    }
}
