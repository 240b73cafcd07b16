//! The canonical decomposition of `P(r̄)` into strata.
//!
//! `Z_S` holds the simplices with `S ⊆ G_1`; `Y_{S,A}` those with `W_1 ∪ G_1 = S` and
//! `A ⊆ G_1`; `X_{S,A} = Y_{S,A} ∪ Z_S`; `B_V` those with `V ⊆ G_0`.
//!
//! A simplex with a single pair (`t = 0`) has every active process of `r̄` in `G_0`; it
//! is fixed by stabilization, so it belongs to every `Z_S`. With this reading the strata
//! are face-closed and `γ_{S,A}` is a bijection. [`incidence`] is the short inclusion
//! criterion `(S = T and B ⊆ A) or T ⊆ A`, which misses one family of inclusions;
//! [`incidence_exact`] is complete.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex, SimplexId};
use crate::counter::RoundCounter;
use crate::error::{Error, Result};
use crate::set::ProcSet;
use crate::witness::{Row, WitnessStructure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StratumKind {
    X,
    Y,
    Z,
    B,
    #[serde(rename = "XBV")]
    Xbv,
}

/// Names one stratum. Unused fields are empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StratumRef {
    pub kind: StratumKind,
    #[serde(rename = "S")]
    pub s: ProcSet,
    #[serde(rename = "A")]
    pub a: ProcSet,
    #[serde(rename = "V")]
    pub v: ProcSet,
}

impl StratumRef {
    pub fn x(s: ProcSet, a: ProcSet) -> Self {
        StratumRef { kind: StratumKind::X, s, a, v: ProcSet::empty() }
    }

    pub fn y(s: ProcSet, a: ProcSet) -> Self {
        StratumRef { kind: StratumKind::Y, s, a, v: ProcSet::empty() }
    }

    pub fn z(s: ProcSet) -> Self {
        StratumRef { kind: StratumKind::Z, s, a: s, v: ProcSet::empty() }
    }

    pub fn b(v: ProcSet) -> Self {
        StratumRef { kind: StratumKind::B, s: ProcSet::empty(), a: ProcSet::empty(), v }
    }

    pub fn xbv(s: ProcSet, a: ProcSet, v: ProcSet) -> Self {
        StratumRef { kind: StratumKind::Xbv, s, a, v }
    }

    /// `X_{S,S}` becomes `Z_S` and `X_{S,A,∅}` becomes `X_{S,A}`.
    pub fn normalized(self) -> Self {
        match self.kind {
            StratumKind::X if self.a == self.s => StratumRef::z(self.s),
            StratumKind::Xbv if self.v.is_empty() => StratumRef::x(self.s, self.a).normalized(),
            _ => self,
        }
    }

    /// `A ⊆ S ⊆ act r̄`, `V ⊆ supp r̄`, `V ∩ S = ∅`.
    pub fn check(&self, r: &RoundCounter) -> Result<()> {
        let act = r.active();
        let bad = |msg: String| Err(Error::MalformedStratum(format!("{self}: {msg}")));
        if !self.s.is_subset(act) {
            return bad(format!("S is not within the active set {act}"));
        }
        if !self.a.is_subset(self.s) {
            return bad("A is not within S".into());
        }
        if !self.v.is_subset(r.support()) {
            return bad(format!("V is not within the support {}", r.support()));
        }
        if !self.v.is_disjoint(self.s) {
            return bad("V meets S".into());
        }
        Ok(())
    }

    pub fn contains(&self, sigma: &WitnessStructure) -> bool {
        match self.kind {
            StratumKind::X => in_x(sigma, self.s, self.a),
            StratumKind::Y => in_y(sigma, self.s, self.a),
            StratumKind::Z => in_z(sigma, self.s),
            StratumKind::B => in_b(sigma, self.v),
            StratumKind::Xbv => in_x(sigma, self.s, self.a) && in_b(sigma, self.v),
        }
    }
}

impl fmt::Display for StratumRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StratumKind::X => write!(f, "X_{{{},{}}}", self.s, self.a),
            StratumKind::Y => write!(f, "Y_{{{},{}}}", self.s, self.a),
            StratumKind::Z => write!(f, "Z_{{{}}}", self.s),
            StratumKind::B => write!(f, "B_{{{}}}", self.v),
            StratumKind::Xbv => write!(f, "X_{{{},{},{}}}", self.s, self.a, self.v),
        }
    }
}

pub fn in_z(sigma: &WitnessStructure, s: ProcSet) -> bool {
    sigma.t() == 0 || s.is_subset(sigma.row(1).ghosts)
}

/// Empty when `A ⊄ S`.
pub fn in_y(sigma: &WitnessStructure, s: ProcSet, a: ProcSet) -> bool {
    let r1 = sigma.row(1);
    sigma.t() >= 1 && a.is_subset(s) && r1.union() == s && a.is_subset(r1.ghosts)
}

pub fn in_x(sigma: &WitnessStructure, s: ProcSet, a: ProcSet) -> bool {
    in_y(sigma, s, a) || in_z(sigma, s)
}

pub fn in_b(sigma: &WitnessStructure, v: ProcSet) -> bool {
    v.is_subset(sigma.row(0).ghosts)
}

/// Member ids, in storage order.
pub fn members(k: &Complex, stratum: &StratumRef) -> Result<Vec<SimplexId>> {
    stratum.check(k.counter())?;
    Ok((0..k.len()).filter(|&i| stratum.contains(k.simplex(i))).collect())
}

pub fn member_set(k: &Complex, stratum: &StratumRef) -> FixedBitSet {
    let mut bits = FixedBitSet::with_capacity(k.len());
    for i in 0..k.len() {
        if stratum.contains(k.simplex(i)) {
            bits.insert(i);
        }
    }
    bits
}

/// True when every codimension-one face of a member is a member.
pub fn is_face_closed(k: &Complex, set: &FixedBitSet) -> bool {
    set.ones().all(|i| k.faces(i).iter().all(|&f| set.contains(f)))
}

fn not_in(sigma: &WitnessStructure, stratum: StratumRef) -> Error {
    Error::NotInStratum { simplex: sigma.to_string(), stratum: stratum.to_string() }
}

/// `γ_S`: `X_S(r̄) → P(r̄_S)`.
pub fn gamma_s(sigma: &WitnessStructure, s: ProcSet) -> Result<WitnessStructure> {
    let rows = sigma.rows();
    let (r0, r1) = (sigma.row(0), sigma.row(1));
    let mut out = Vec::with_capacity(rows.len());
    if sigma.t() >= 1 && r1.union() == s {
        out.push(Row::new(r0.witnessed - r1.ghosts, r0.ghosts | r1.ghosts));
        out.extend_from_slice(&rows[2..]);
    } else if in_z(sigma, s) {
        out.push(Row::new(r0.witnessed - s, r0.ghosts | s));
        if let Some(first) = rows.get(1) {
            out.push(Row::new(first.witnessed, first.ghosts - s));
            out.extend_from_slice(&rows[2..]);
        }
    } else {
        return Err(not_in(sigma, StratumRef::x(s, ProcSet::empty())));
    }
    WitnessStructure::new(out)
}

/// `γ_{S,A} = Ξ ∘ γ_S`, with `Ξ` deleting `A` from `G_0`.
pub fn gamma(sigma: &WitnessStructure, s: ProcSet, a: ProcSet) -> Result<WitnessStructure> {
    if !a.is_subset(s) || !in_x(sigma, s, a) {
        return Err(not_in(sigma, StratumRef::x(s, a)));
    }
    let mut rows = gamma_s(sigma, s)?.into_rows();
    debug_assert!(a.is_subset(rows[0].ghosts));
    rows[0].ghosts = rows[0].ghosts - a;
    WitnessStructure::new(rows)
}

/// `ρ_S = γ_S^{-1}`: `P(r̄_S) → X_S(r̄)`.
pub fn rho(tau: &WitnessStructure, s: ProcSet) -> Result<WitnessStructure> {
    let rows = tau.rows();
    let r0 = tau.row(0);
    let mut out = Vec::with_capacity(rows.len() + 1);
    if !(r0.witnessed & s).is_empty() {
        let hs = r0.ghosts & s;
        out.push(Row::new(r0.witnessed | hs, r0.ghosts - s));
        out.push(Row::new(r0.witnessed & s, hs));
        out.extend_from_slice(&rows[1..]);
    } else {
        if !s.is_subset(r0.ghosts) {
            return Err(Error::InvalidWitness(format!("{tau} does not carry {s} in its support")));
        }
        if tau.t() == 0 {
            return Ok(tau.clone());
        }
        out.push(Row::new(r0.witnessed | s, r0.ghosts - s));
        out.push(Row::new(rows[1].witnessed, rows[1].ghosts | s));
        out.extend_from_slice(&rows[2..]);
    }
    WitnessStructure::new(out)
}

/// `γ_{S,A}^{-1}`: puts `A` back into `G_0`, then applies `ρ_S`.
pub fn gamma_inverse(tau: &WitnessStructure, s: ProcSet, a: ProcSet) -> Result<WitnessStructure> {
    if !a.is_disjoint(tau.support()) {
        return Err(Error::Overlap(a, tau.support()));
    }
    let mut rows = tau.rows().to_vec();
    rows[0].ghosts = rows[0].ghosts | a;
    rho(&WitnessStructure::new(rows)?, s)
}

/// `δ_V`: `B_V(r̄) → P(r̄∖V)`.
pub fn delta(sigma: &WitnessStructure, v: ProcSet) -> Result<WitnessStructure> {
    if !in_b(sigma, v) {
        return Err(not_in(sigma, StratumRef::b(v)));
    }
    let mut rows = sigma.rows().to_vec();
    rows[0].ghosts = rows[0].ghosts - v;
    WitnessStructure::new(rows)
}

pub fn delta_inverse(tau: &WitnessStructure, v: ProcSet) -> Result<WitnessStructure> {
    if !v.is_disjoint(tau.support()) {
        return Err(Error::Overlap(v, tau.support()));
    }
    let mut rows = tau.rows().to_vec();
    rows[0].ghosts = rows[0].ghosts | v;
    WitnessStructure::new(rows)
}

/// Inclusion `X_{S,A} ⊆ X_{T,B}` as stated in the literature: `S = T ∧ B ⊆ A`, or `T ⊆ A`.
pub fn incidence(s: ProcSet, a: ProcSet, t: ProcSet, b: ProcSet) -> bool {
    (s == t && b.is_subset(a)) || t.is_subset(a)
}

/// Inclusion `X_{S,A} ⊆ X_{T,B}` for strata of a counter with active set `act`.
///
/// Adds the case missed by [`incidence`]: when `S = A` and `act ∖ S = {q}`, every
/// simplex of `Z_S` with `t ≥ 1` has `W_1 = {q}` and `G_1 = S`, so
/// `Z_S ⊆ X_{act,B}` for all `B ⊆ S`.
pub fn incidence_exact(act: ProcSet, s: ProcSet, a: ProcSet, t: ProcSet, b: ProcSet) -> bool {
    incidence(s, a, t, b) || (s == a && (act - s).len() == 1 && t == act && b.is_subset(s))
}

/// `X_{S,A} ∩ X_{T,B}` in closed form.
///
/// The case `T ⊂ S` mirrors `S ⊂ T`.
pub fn intersect_pair(s: ProcSet, a: ProcSet, t: ProcSet, b: ProcSet) -> StratumRef {
    let out = if s == t {
        StratumRef::x(s, a | b)
    } else if s.is_proper_subset(t) {
        StratumRef::x(t, s | b)
    } else if t.is_proper_subset(s) {
        StratumRef::x(s, t | a)
    } else {
        StratumRef::z(s | t)
    };
    out.normalized()
}

/// How a family intersection was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Corollary,
    PairwiseFold,
}

/// `X_{S_1} ∩ ... ∩ X_{S_k}`.
///
/// Duplicates are dropped and a maximal set is moved to the front, which always meets
/// the hypothesis of the closed formula. An empty family yields `X_∅`, the whole complex.
pub fn intersect_family(sets: &[ProcSet]) -> (StratumRef, Method) {
    let mut distinct: Vec<ProcSet> = sets.to_vec();
    distinct.sort();
    distinct.dedup();
    let Some(pos) = distinct.iter().position(|s| !distinct.iter().any(|t| s.is_proper_subset(*t))) else {
        return (intersect_fold(sets), Method::PairwiseFold);
    };
    let first = distinct.remove(pos);
    let rest = distinct.iter().fold(ProcSet::empty(), |acc, &s| acc | s);
    let out = if distinct.iter().all(|s| s.is_proper_subset(first)) {
        StratumRef::x(first, rest)
    } else {
        StratumRef::z(first | rest)
    };
    (out.normalized(), Method::Corollary)
}

/// Left fold of [`intersect_pair`] over `X_{S_i}`.
pub fn intersect_fold(sets: &[ProcSet]) -> StratumRef {
    let Some((&first, rest)) = sets.split_first() else {
        return StratumRef::x(ProcSet::empty(), ProcSet::empty());
    };
    rest.iter()
        .fold(StratumRef::x(first, ProcSet::empty()), |acc, &s| intersect_pair(acc.s, acc.a, s, ProcSet::empty()))
        .normalized()
}

/// Closed forms for `Y` and `Z` intersections; `None` is the empty set.
pub fn yz_closed_form(lhs: StratumRef, rhs: StratumRef) -> Option<StratumRef> {
    use StratumKind::{Y, Z};
    let y = |s: ProcSet, a: ProcSet| a.is_subset(s).then(|| StratumRef::y(s, a));
    match (lhs.kind, rhs.kind) {
        (Z, Z) => Some(StratumRef::z(lhs.s | rhs.s)),
        (Y, Z) => y(lhs.s, lhs.a | rhs.s),
        (Z, Y) => y(rhs.s, rhs.a | lhs.s),
        (Y, Y) if lhs.s == rhs.s => y(lhs.s, lhs.a | rhs.a),
        (Y, Y) => None,
        _ => panic!("yz_closed_form takes Y and Z strata"),
    }
}

fn nonempty_subsets(set: ProcSet) -> Vec<ProcSet> {
    set.subsets_by_size().into_iter().filter(|s| !s.is_empty()).collect()
}

/// Every `(S, A)` with `A ⊆ S ⊆ act` and `S ≠ ∅`.
pub fn admissible_pairs(act: ProcSet) -> Vec<(ProcSet, ProcSet)> {
    nonempty_subsets(act).into_iter().flat_map(|s| s.subsets_by_size().into_iter().map(move |a| (s, a))).collect()
}

/// One family of closed-form checks and the instances that disagreed with the setwise
/// computation.
#[derive(Clone, Debug, Serialize)]
pub struct CalculusCheck {
    pub name: &'static str,
    pub instances: usize,
    pub failures: Vec<String>,
}

impl CalculusCheck {
    fn new(name: &'static str) -> Self {
        CalculusCheck { name, instances: 0, failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures.push(detail());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct MemberCache<'a> {
    k: &'a Complex,
    sets: HashMap<StratumRef, FixedBitSet>,
}

impl<'a> MemberCache<'a> {
    fn new(k: &'a Complex) -> Self {
        MemberCache { k, sets: HashMap::new() }
    }

    fn get(&mut self, stratum: StratumRef) -> &FixedBitSet {
        let k = self.k;
        self.sets.entry(stratum).or_insert_with(|| member_set(k, &stratum))
    }

    fn owned(&mut self, stratum: StratumRef) -> FixedBitSet {
        self.get(stratum).clone()
    }
}

fn and(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut out = a.clone();
    out.intersect_with(b);
    out
}

/// Compares every closed-form incidence and intersection formula with the setwise
/// computation on `k`, over all admissible parameters and all families of up to
/// `max_family` sets.
pub fn check_calculus(k: &Complex, max_family: usize) -> Vec<CalculusCheck> {
    let act = k.counter().active();
    let pairs = admissible_pairs(act);
    let singles = nonempty_subsets(act);
    let mut cache = MemberCache::new(k);
    let full = {
        let mut all = FixedBitSet::with_capacity(k.len());
        all.insert_range(..);
        all
    };

    let mut closure = CalculusCheck::new("closure");
    for &(s, a) in &pairs {
        let set = cache.owned(StratumRef::x(s, a));
        closure.record(is_face_closed(k, &set), || format!("X_{{{s},{a}}} is not face-closed"));
    }
    for v in k.counter().support().subsets() {
        let set = cache.owned(StratumRef::b(v));
        closure.record(is_face_closed(k, &set), || format!("B_{{{v}}} is not face-closed"));
    }

    let mut cover = CalculusCheck::new("cover");
    let mut union = FixedBitSet::with_capacity(k.len());
    for &s in &singles {
        union.union_with(cache.get(StratumRef::x(s, ProcSet::empty())));
    }
    cover.record(union == full, || "the strata X_S do not cover the complex".into());

    let mut xaa = CalculusCheck::new("union-xaa");
    for a in act.subsets().filter(|&a| a != act) {
        let lhs = cache.owned(StratumRef::x(a, a));
        let mut rhs = FixedBitSet::with_capacity(k.len());
        for t in act.subsets().filter(|&t| a.is_proper_subset(t)) {
            rhs.union_with(cache.get(StratumRef::x(t, a)));
        }
        xaa.record(lhs == rhs, || format!("X_{{{a},{a}}} differs from the union of X_{{T,{a}}}"));
    }

    let mut inc = CalculusCheck::new("incidence");
    let mut inc_exact = CalculusCheck::new("incidence-exact");
    let mut pair = CalculusCheck::new("pair-intersections");
    for &(s, a) in &pairs {
        for &(t, b) in &pairs {
            let lhs = cache.owned(StratumRef::x(s, a));
            let rhs = cache.owned(StratumRef::x(t, b));
            let contained = lhs.is_subset(&rhs);
            inc.record(incidence(s, a, t, b) == contained, || {
                format!("X_{{{s},{a}}} ⊆ X_{{{t},{b}}} is {contained}, formula says {}", !contained)
            });
            inc_exact.record(incidence_exact(act, s, a, t, b) == contained, || {
                format!("X_{{{s},{a}}} ⊆ X_{{{t},{b}}} is {contained}, corrected formula says {}", !contained)
            });
            let closed = intersect_pair(s, a, t, b);
            let got = cache.owned(closed);
            pair.record(got == and(&lhs, &rhs), || format!("X_{{{s},{a}}} ∩ X_{{{t},{b}}} is not {closed}"));
        }
    }

    let mut yz = CalculusCheck::new("yz-intersections");
    let mut yz_refs: Vec<StratumRef> = singles.iter().map(|&s| StratumRef::z(s)).collect();
    yz_refs.extend(pairs.iter().map(|&(s, a)| StratumRef::y(s, a)));
    for &l in &yz_refs {
        for &r in &yz_refs {
            let rhs = cache.owned(r);
            let setwise = and(cache.get(l), &rhs);
            let closed = yz_closed_form(l, r);
            let got = closed.map_or_else(|| FixedBitSet::with_capacity(k.len()), |c| cache.owned(c));
            yz.record(got == setwise, || format!("{l} ∩ {r} is not {}", closed.map_or("∅".to_string(), |c| c.to_string())));
        }
    }

    let mut xs = CalculusCheck::new("xs-intersections");
    let mut xz = CalculusCheck::new("xz-intersections");
    let mut xz_exact = CalculusCheck::new("xz-intersections-exact");
    for &s in &singles {
        for &t in &singles {
            let x_s = cache.owned(StratumRef::x(s, ProcSet::empty()));
            if s != t {
                let closed = if s.is_proper_subset(t) {
                    StratumRef::x(t, s)
                } else if t.is_proper_subset(s) {
                    StratumRef::x(s, t)
                } else {
                    StratumRef::z(s | t)
                }
                .normalized();
                let x_t = cache.owned(StratumRef::x(t, ProcSet::empty()));
                let setwise = and(&x_s, &x_t);
                xs.record(cache.owned(closed) == setwise, || format!("X_{{{s}}} ∩ X_{{{t}}} is not {closed}"));
            }
            let z_t = cache.owned(StratumRef::z(t));
            let setwise = and(&x_s, &z_t);
            xz.record(cache.owned(StratumRef::z(s | t)) == setwise, || format!("X_{{{s}}} ∩ Z_{{{t}}} is not Z_{{{}}}", s | t));
            let exact = intersect_pair(s, ProcSet::empty(), t, t);
            xz_exact.record(cache.owned(exact) == setwise, || format!("X_{{{s}}} ∩ Z_{{{t}}} is not {exact}"));
        }
    }

    let mut family = CalculusCheck::new("family-intersections");
    let mut fold = CalculusCheck::new("family-fold");
    let mut seq: Vec<ProcSet> = Vec::new();
    let mut families = Vec::new();
    enumerate_families(&singles, max_family, &mut seq, &mut families);
    for fam in families {
        let mut setwise = full.clone();
        for &s in &fam {
            setwise.intersect_with(cache.get(StratumRef::x(s, ProcSet::empty())));
        }
        let (closed, _) = intersect_family(&fam);
        family.record(cache.owned(closed) == setwise, || format!("family {fam:?}: intersection is not {closed}"));
        let folded = intersect_fold(&fam);
        fold.record(cache.owned(folded) == setwise, || format!("family {fam:?}: pairwise fold gives {folded}"));
    }

    vec![closure, cover, xaa, inc, inc_exact, yz, pair, xs, xz, xz_exact, family, fold]
}

fn enumerate_families(pool: &[ProcSet], max: usize, seq: &mut Vec<ProcSet>, out: &mut Vec<Vec<ProcSet>>) {
    if !seq.is_empty() {
        out.push(seq.clone());
    }
    if seq.len() == max {
        return;
    }
    for &s in pool {
        seq.push(s);
        enumerate_families(pool, max, seq, out);
        seq.pop();
    }
}

/// Nerve of the cover by the strata `X_S`, `∅ ≠ S ⊆ act`.
#[derive(Clone, Debug, Serialize)]
pub struct Nerve {
    pub vertices: Vec<ProcSet>,
    /// Every nerve simplex, as sorted vertex indices.
    pub simplices: Vec<Vec<usize>>,
    pub f_vector: Vec<usize>,
    pub apex: ProcSet,
    pub is_cone: bool,
}

impl Nerve {
    /// Maximal simplices.
    pub fn facets(&self) -> Vec<&Vec<usize>> {
        let set: HashSet<&Vec<usize>> = self.simplices.iter().collect();
        self.simplices
            .iter()
            .filter(|s| {
                (0..self.vertices.len()).all(|v| {
                    if s.contains(&v) {
                        return true;
                    }
                    let mut bigger = (*s).clone();
                    bigger.push(v);
                    bigger.sort_unstable();
                    !set.contains(&bigger)
                })
            })
            .collect()
    }
}

/// Largest active set accepted by [`nerve`]; the cover then has 15 members.
pub const NERVE_ACTIVE_CAP: usize = 4;

/// A family of strata spans a nerve simplex when its intersection contains a simplex
/// other than the empty one.
pub fn nerve(k: &Complex) -> Result<Nerve> {
    let act = k.counter().active();
    if act.len() > NERVE_ACTIVE_CAP {
        return Err(Error::ResourceCap { limit: NERVE_ACTIVE_CAP, what: "active processes for the nerve" });
    }
    let vertices = nonempty_subsets(act);
    let sets: Vec<FixedBitSet> = vertices
        .iter()
        .map(|&s| {
            let mut set = member_set(k, &StratumRef::x(s, ProcSet::empty()));
            set.set(k.empty_id(), false);
            set
        })
        .collect();
    let mut simplices = Vec::new();
    let mut current = Vec::new();
    let mut all = FixedBitSet::with_capacity(k.len());
    all.insert_range(..);
    all.set(k.empty_id(), false);
    grow_nerve(&sets, 0, &all, &mut current, &mut simplices);
    simplices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut f_vector = vec![0; simplices.iter().map(Vec::len).max().unwrap_or(0)];
    for s in &simplices {
        f_vector[s.len() - 1] += 1;
    }
    let apex_index = vertices.iter().position(|&v| v == act);
    let lookup: HashSet<&Vec<usize>> = simplices.iter().collect();
    let is_cone = apex_index.is_some_and(|ai| {
        simplices.iter().all(|s| {
            let mut with = s.clone();
            if !with.contains(&ai) {
                with.push(ai);
                with.sort_unstable();
            }
            lookup.contains(&with)
        })
    });
    Ok(Nerve { vertices, simplices, f_vector, apex: act, is_cone })
}

fn grow_nerve(sets: &[FixedBitSet], from: usize, inter: &FixedBitSet, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    for i in from..sets.len() {
        let next = and(inter, &sets[i]);
        if next.is_clear() {
            continue;
        }
        current.push(i);
        out.push(current.clone());
        grow_nerve(sets, i + 1, &next, current, out);
        current.pop();
    }
}

/// Named parameter sets of a certificate or diagram instance.
pub type Params = BTreeMap<&'static str, ProcSet>;

/// Certificate that a map between simplex sets is a simplicial isomorphism.
#[derive(Clone, Debug, Serialize)]
pub struct IsoReport {
    pub map: &'static str,
    pub parameters: Params,
    pub domain: usize,
    pub target: usize,
    pub bijective: bool,
    pub dimension_preserving: bool,
    pub face_preserving: bool,
    pub inverse: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl IsoReport {
    pub fn passed(&self) -> bool {
        self.bijective && self.dimension_preserving && self.face_preserving && self.inverse
    }
}

type MapFn<'f> = &'f dyn Fn(&WitnessStructure) -> Result<WitnessStructure>;

/// `domain` and `target` are face-closed member sets of the two complexes.
fn certify(
    map: &'static str,
    parameters: Params,
    (dk, domain): (&Complex, &[SimplexId]),
    (tk, target): (&Complex, &[SimplexId]),
    forward: MapFn<'_>,
    backward: MapFn<'_>,
) -> IsoReport {
    let mut report = IsoReport {
        map,
        parameters,
        domain: domain.len(),
        target: target.len(),
        bijective: true,
        dimension_preserving: true,
        face_preserving: true,
        inverse: true,
        detail: None,
    };
    let in_target: HashSet<SimplexId> = target.iter().copied().collect();
    let in_domain: HashSet<SimplexId> = domain.iter().copied().collect();
    let mut image: HashMap<SimplexId, SimplexId> = HashMap::new();
    for &id in domain {
        let sigma = dk.simplex(id);
        let Some(tid) = forward(sigma).ok().and_then(|tau| tk.id_of(&tau)).filter(|t| in_target.contains(t)) else {
            report.bijective = false;
            report.detail.get_or_insert_with(|| format!("{sigma} has no image in the target"));
            continue;
        };
        report.dimension_preserving &= tk.dim(tid) == dk.dim(id);
        if backward(tk.simplex(tid)).ok().as_ref() != Some(sigma) {
            report.inverse = false;
            report.detail.get_or_insert_with(|| format!("inverse does not return {sigma}"));
        }
        image.insert(id, tid);
    }
    let distinct: HashSet<SimplexId> = image.values().copied().collect();
    if distinct.len() != domain.len() || domain.len() != target.len() {
        report.bijective = false;
        report.detail.get_or_insert_with(|| format!("{} domain simplices, {} images, {} target simplices", domain.len(), distinct.len(), target.len()));
    }
    for &tid in target {
        let back = backward(tk.simplex(tid)).ok().and_then(|s| dk.id_of(&s)).filter(|s| in_domain.contains(s));
        if back.and_then(|s| image.get(&s)) != Some(&tid) {
            report.inverse = false;
            report.detail.get_or_insert_with(|| format!("inverse fails on {}", tk.simplex(tid)));
        }
    }
    for (&id, &tid) in &image {
        for &f in dk.faces(id) {
            if image.get(&f).is_none_or(|tf| !tk.faces(tid).contains(tf)) {
                report.face_preserving = false;
                report.detail.get_or_insert_with(|| format!("face {} of {} is not carried to a face", dk.simplex(f), dk.simplex(id)));
            }
        }
    }
    report
}

/// Complexes of derived counters, built once each.
pub struct ComplexCache {
    complexes: HashMap<RoundCounter, Complex>,
}

impl Default for ComplexCache {
    fn default() -> Self {
        Self::new()
    }
}

impl ComplexCache {
    pub fn new() -> Self {
        ComplexCache { complexes: HashMap::new() }
    }

    pub fn get(&mut self, r: &RoundCounter) -> Result<&Complex> {
        if !self.complexes.contains_key(r) {
            let k = Complex::build_any(r)?;
            self.complexes.insert(r.clone(), k);
        }
        Ok(&self.complexes[r])
    }
}

fn all_ids(k: &Complex) -> Vec<SimplexId> {
    (0..k.len()).collect()
}

fn params(entries: &[(&'static str, ProcSet)]) -> Params {
    entries.iter().copied().collect()
}

/// Certificates for `γ_{S,A}` (all admissible `S, A`), `ρ_S` and `δ_V` (all `V ⊆ supp`)
/// on `k`.
pub fn certify_isomorphisms(k: &Complex, cache: &mut ComplexCache) -> Result<Vec<IsoReport>> {
    let r = k.counter().clone();
    let mut out = Vec::new();
    for (s, a) in admissible_pairs(r.active()) {
        let domain = members(k, &StratumRef::x(s, a))?;
        let target_k = cache.get(&r.restrict(s, a)?)?;
        out.push(certify(
            "gamma",
            params(&[("S", s), ("A", a)]),
            (k, &domain),
            (target_k, &all_ids(target_k)),
            &|x| gamma(x, s, a),
            &|x| gamma_inverse(x, s, a),
        ));
        if a.is_empty() {
            out.push(certify(
                "rho",
                params(&[("S", s)]),
                (target_k, &all_ids(target_k)),
                (k, &domain),
                &|x| rho(x, s),
                &|x| gamma_s(x, s),
            ));
        }
    }
    for v in r.support().subsets_by_size() {
        let domain = members(k, &StratumRef::b(v))?;
        let target_k = cache.get(&r.delete(v))?;
        out.push(certify(
            "delta",
            params(&[("V", v)]),
            (k, &domain),
            (target_k, &all_ids(target_k)),
            &|x| delta(x, v),
            &|x| delta_inverse(x, v),
        ));
    }
    Ok(out)
}

/// One commuting-diagram instance.
#[derive(Clone, Debug, Serialize)]
pub struct DiagramInstance {
    pub diagram: &'static str,
    pub parameters: Params,
    pub instances_checked: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl DiagramInstance {
    fn new(diagram: &'static str, parameters: Params) -> Self {
        DiagramInstance { diagram, parameters, instances_checked: 0, status: Status::Pass, detail: None }
    }

    fn fail(&mut self, detail: String) {
        if self.status == Status::Pass {
            self.status = Status::Fail;
            self.detail = Some(detail);
        }
    }

    fn expect(&mut self, sigma: &WitnessStructure, ok: Result<bool>, what: &str) {
        match ok {
            Ok(true) => {}
            Ok(false) => self.fail(format!("{what} fails at {sigma}")),
            Err(e) => self.fail(format!("{what} fails at {sigma}: {e}")),
        }
    }
}

/// Checks the three commuting diagrams pointwise for every admissible parameter choice.
///
/// `execution-square`: `γ_{A,A}(σ) = ρ_S(γ_{S∪A,A}(σ))` on `X_{S∪A,A}(r̄)`, the right
/// side lying in `X_S(r̄∖A)`. `ghost-shift`: `γ_{S,B}(σ) = δ_{A∖B}^{-1}(γ_{S,A}(σ))` on
/// `X_{S,A}(r̄)`. `deletion-square`: `φ = γ_{S,A}` and `ψ = δ_V` restricted to `X_{S,A,V}(r̄)` are bijections onto
/// `B_V(r̄_{S,A})` and `X_{S,A}(r̄∖V)`, and `δ_V ∘ φ = γ_{S,A} ∘ ψ`.
pub fn verify_diagrams(k: &Complex, cache: &mut ComplexCache) -> Result<Vec<DiagramInstance>> {
    let r = k.counter().clone();
    let act = r.active();
    let supp = r.support();
    let mut out = Vec::new();

    for a in act.subsets_by_size() {
        let r_minus_a = r.delete(a);
        for s in nonempty_subsets(act - a) {
            let mut inst = DiagramInstance::new("execution-square", params(&[("S", s), ("A", a)]));
            for id in members(k, &StratumRef::x(s | a, a))? {
                let sigma = k.simplex(id);
                inst.instances_checked += 1;
                let lhs = gamma(sigma, a, a);
                let rhs = gamma(sigma, s | a, a).and_then(|t| rho(&t, s));
                inst.expect(
                    sigma,
                    lhs.and_then(|l| {
                        let rhs = rhs?;
                        Ok(l == rhs && in_x(&rhs, s, ProcSet::empty()) && crate::complex::membership(&r_minus_a, &rhs))
                    }),
                    "execution-square",
                );
            }
            out.push(inst);
        }
    }

    for (s, a) in admissible_pairs(act) {
        for b in a.subsets_by_size() {
            let r_sb = r.restrict(s, b)?;
            let mut inst = DiagramInstance::new("ghost-shift", params(&[("S", s), ("A", a), ("B", b)]));
            for id in members(k, &StratumRef::x(s, a))? {
                let sigma = k.simplex(id);
                inst.instances_checked += 1;
                let ok = (|| {
                    let lhs = gamma(sigma, s, b)?;
                    let rhs = delta_inverse(&gamma(sigma, s, a)?, a - b)?;
                    Ok(lhs == rhs && in_b(&rhs, a - b) && crate::complex::membership(&r_sb, &rhs))
                })();
                inst.expect(sigma, ok, "ghost-shift");
            }
            out.push(inst);
        }
    }

    for (s, a) in admissible_pairs(act) {
        let r_sa = r.restrict(s, a)?;
        for v in (supp - s).subsets_by_size() {
            let r_v = r.delete(v);
            let r_sav = r_sa.delete(v);
            let mut inst = DiagramInstance::new("deletion-square", params(&[("S", s), ("A", a), ("V", v)]));
            let domain = members(k, &StratumRef::xbv(s, a, v))?;
            let mut phi_images = HashSet::new();
            let mut psi_images = HashSet::new();
            for &id in &domain {
                let sigma = k.simplex(id);
                inst.instances_checked += 1;
                let ok = (|| {
                    let phi = gamma(sigma, s, a)?;
                    let psi = delta(sigma, v)?;
                    let phi_ok = in_b(&phi, v) && crate::complex::membership(&r_sa, &phi);
                    let psi_ok = in_x(&psi, s, a) && crate::complex::membership(&r_v, &psi);
                    let lhs = delta(&phi, v)?;
                    let rhs = gamma(&psi, s, a)?;
                    let square = lhs == rhs && crate::complex::membership(&r_sav, &lhs);
                    phi_images.insert(phi);
                    psi_images.insert(psi);
                    Ok(phi_ok && psi_ok && square)
                })();
                inst.expect(sigma, ok, "deletion-square");
            }
            let b_target = cache.get(&r_sa)?.simplices().iter().filter(|t| in_b(t, v)).count();
            let x_target = cache.get(&r_v)?.simplices().iter().filter(|t| in_x(t, s, a)).count();
            if phi_images.len() != domain.len() || b_target != domain.len() {
                inst.fail(format!("phi: {} simplices, {} images, {} in B_V(r_SA)", domain.len(), phi_images.len(), b_target));
            }
            if psi_images.len() != domain.len() || x_target != domain.len() {
                inst.fail(format!("psi: {} simplices, {} images, {} in X_SA(r∖V)", domain.len(), psi_images.len(), x_target));
            }
            out.push(inst);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::Pid;

    fn set(ids: &[Pid]) -> ProcSet {
        ids.iter().copied().collect()
    }

    fn r(s: &str) -> RoundCounter {
        s.parse().unwrap()
    }

    fn ws(pairs: &[(&[Pid], &[Pid])]) -> WitnessStructure {
        WitnessStructure::from_pairs(pairs).unwrap()
    }

    #[test]
    fn member_examples() {
        let k = Complex::build(&r("1,1")).unwrap();
        let central = k.require(&ws(&[(&[0, 1], &[]), (&[0, 1], &[])])).unwrap();
        let mut expected = k.all_faces(central);
        expected.sort_unstable();
        assert_eq!(members(&k, &StratumRef::x(set(&[0, 1]), set(&[]))).unwrap(), expected);

        let x0 = member_set(&k, &StratumRef::x(set(&[0]), set(&[])));
        let x1 = member_set(&k, &StratumRef::x(set(&[1]), set(&[])));
        assert_eq!(and(&x0, &x1), member_set(&k, &StratumRef::z(set(&[0, 1]))));
        assert_eq!(member_set(&k, &StratumRef::x(set(&[]), set(&[]))).count_ones(..), k.len());
        assert!(members(&k, &StratumRef::x(set(&[0]), set(&[1]))).is_err());
    }

    #[test]
    fn gamma_examples() {
        let s = set(&[0, 1]);
        let top = ws(&[(&[0, 1], &[]), (&[0, 1], &[])]);
        assert_eq!(gamma(&top, s, set(&[])).unwrap(), ws(&[(&[0, 1], &[])]));
        let edge = ws(&[(&[0, 1], &[]), (&[0], &[1])]);
        assert_eq!(gamma(&edge, s, set(&[])).unwrap(), ws(&[(&[0], &[1])]));
        assert_eq!(rho(&ws(&[(&[0], &[1])]), s).unwrap(), edge);
        assert!(gamma(&ws(&[(&[0, 1], &[]), (&[0], &[]), (&[1], &[])]), s, set(&[])).is_err());
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&ws(&[(&[], &[0, 1])]), set(&[1])).unwrap(), ws(&[(&[], &[0])]));
        let sigma = ws(&[(&[0], &[1]), (&[0], &[])]);
        assert_eq!(delta(&sigma, set(&[1])).unwrap(), ws(&[(&[0], &[]), (&[0], &[])]));
        assert_eq!(delta_inverse(&ws(&[(&[0], &[]), (&[0], &[])]), set(&[1])).unwrap(), sigma);
        assert!(delta(&sigma, set(&[0])).is_err());
    }

    #[test]
    fn incidence_examples() {
        assert!(incidence(set(&[0, 1]), set(&[0]), set(&[0]), set(&[])));
        assert!(!incidence(set(&[0, 1]), set(&[0]), set(&[0, 1]), set(&[0, 1])));
        let s = set(&[0, 1]);
        assert!(incidence(s, s, s, s));
    }

    #[test]
    fn incidence_counterexample_on_three_processes() {
        let k = Complex::build(&r("1,1,1")).unwrap();
        let s = set(&[0, 1]);
        let act = set(&[0, 1, 2]);
        let z = member_set(&k, &StratumRef::x(s, s));
        let expected: Vec<_> = [ws(&[(&[0, 1, 2], &[]), (&[2], &[0, 1])]), WitnessStructure::empty(act)]
            .iter()
            .map(|w| k.require(w).unwrap())
            .collect();
        let mut got: Vec<_> = z.ones().collect();
        got.sort_unstable();
        let mut expected_sorted = expected.clone();
        expected_sorted.sort_unstable();
        assert_eq!(got, expected_sorted);
        assert!(z.is_subset(&member_set(&k, &StratumRef::x(act, set(&[])))));
        assert!(!incidence(s, s, act, set(&[])));
        assert!(incidence_exact(act, s, s, act, set(&[])));
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(intersect_pair(set(&[0]), set(&[]), set(&[0, 1]), set(&[])), StratumRef::x(set(&[0, 1]), set(&[0])));
        assert_eq!(intersect_pair(set(&[0]), set(&[]), set(&[1]), set(&[])), StratumRef::z(set(&[0, 1])));
        let (fam, method) = intersect_family(&[set(&[0, 1, 2]), set(&[0]), set(&[1])]);
        assert_eq!(fam, StratumRef::x(set(&[0, 1, 2]), set(&[0, 1])));
        assert_eq!(method, Method::Corollary);
        let (fam, _) = intersect_family(&[set(&[0]), set(&[0])]);
        assert_eq!(fam, StratumRef::x(set(&[0]), set(&[])));
        assert_eq!(StratumRef::z(set(&[0, 1])).to_string(), "Z_{{0,1}}");
    }

    #[test]
    fn calculus_on_two_processes() {
        for text in ["1,1", "2,1", "1,0,1"] {
            let k = Complex::build(&r(text)).unwrap();
            for check in check_calculus(&k, 3) {
                if check.name == "incidence" || check.name == "xz-intersections" {
                    // published forms with known gaps; their corrected versions are checked
                    assert!(!check.passed());
                } else {
                    assert!(check.passed(), "{text} {}: {:?}", check.name, check.failures);
                }
            }
        }
    }

    #[test]
    fn nerve_examples() {
        let n = nerve(&Complex::build(&r("1,1")).unwrap()).unwrap();
        assert_eq!(n.vertices, vec![set(&[0]), set(&[1]), set(&[0, 1])]);
        assert_eq!(n.f_vector, vec![3, 2]);
        assert!(n.is_cone);
        let n = nerve(&Complex::build(&r("1")).unwrap()).unwrap();
        assert_eq!(n.f_vector, vec![1]);
        let n = nerve(&Complex::build(&r("1,1,1")).unwrap()).unwrap();
        assert_eq!(n.vertices.len(), 7);
        assert!(n.is_cone);
    }

    #[test]
    fn isomorphisms_and_diagrams_on_small_counters() {
        let mut cache = ComplexCache::new();
        for text in ["1,1", "2,1", "1,0,1"] {
            let k = Complex::build(&r(text)).unwrap();
            for rep in certify_isomorphisms(&k, &mut cache).unwrap() {
                assert!(rep.passed(), "{text}: {rep:?}");
            }
            for inst in verify_diagrams(&k, &mut cache).unwrap() {
                assert_eq!(inst.status, Status::Pass, "{text}: {inst:?}");
            }
        }
    }
}
