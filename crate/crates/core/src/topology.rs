//! Pseudomanifold structure, interior classification, collapses and Z/2 homology.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::complex::{Complex, SimplexId};
use crate::counter::RoundCounter;
use crate::error::{Error, Result};
use crate::set::{Pid, ProcSet};
use crate::strata::{self, StratumRef};
use crate::witness::WitnessStructure;

fn full_set(k: &Complex) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(k.len());
    s.insert_range(..);
    s
}

/// Ids whose simplex satisfies `pred`.
pub fn select(k: &Complex, pred: impl Fn(&WitnessStructure) -> bool) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(k.len());
    for (i, sigma) in k.simplices().iter().enumerate() {
        if pred(sigma) {
            s.insert(i);
        }
    }
    s
}

/// Downward closure of `seeds`.
pub fn closure(k: &Complex, seeds: impl IntoIterator<Item = SimplexId>) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(k.len());
    let mut stack: Vec<SimplexId> = seeds.into_iter().collect();
    while let Some(id) = stack.pop() {
        if out.put(id) {
            continue;
        }
        stack.extend(k.faces(id).iter().copied().filter(|&f| !out.contains(f)));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    pub ridges: usize,
    /// `degree_counts[d]` ridges lie in exactly `d` facets.
    pub degree_counts: Vec<usize>,
    pub degrees_ok: bool,
    pub boundary_simplices: usize,
    /// The closure of the degree-one ridges equals the simplices with `G_0 ≠ ∅`.
    pub boundary_matches: bool,
    pub boundary_f_vector: Vec<usize>,
    #[serde(skip)]
    pub boundary: FixedBitSet,
}

impl BoundaryReport {
    pub fn passed(&self) -> bool {
        self.degrees_ok && self.boundary_matches
    }
}

/// Ridge degrees and the boundary of a pure complex.
pub fn boundary(k: &Complex) -> BoundaryReport {
    let ridge_dim = k.top_dim() - 1;
    let mut degree_counts = vec![0usize; 3];
    let mut free_ridges = Vec::new();
    let mut ridges = 0;
    for id in k.ids_of_dim(ridge_dim) {
        ridges += 1;
        let d = k.cofaces(id).len();
        if d >= degree_counts.len() {
            degree_counts.resize(d + 1, 0);
        }
        degree_counts[d] += 1;
        if d == 1 {
            free_ridges.push(id);
        }
    }
    let degrees_ok = degree_counts.iter().enumerate().all(|(d, &n)| n == 0 || d == 1 || d == 2);
    let boundary = closure(k, free_ridges);
    let expected = select(k, |s| !s.row(0).ghosts.is_empty());
    let mut f = vec![0; (k.top_dim()).max(0) as usize];
    for id in boundary.ones() {
        let d = k.dim(id);
        if d >= 0 {
            f[d as usize] += 1;
        }
    }
    BoundaryReport {
        ridges,
        degree_counts,
        degrees_ok,
        boundary_simplices: boundary.count_ones(..),
        boundary_matches: boundary == expected,
        boundary_f_vector: f,
        boundary,
    }
}

/// Pairs of facets sharing a ridge, each pair listed once with the smaller id first.
pub fn facet_adjacency(k: &Complex) -> BTreeSet<(SimplexId, SimplexId)> {
    let mut edges = BTreeSet::new();
    for id in k.ids_of_dim(k.top_dim() - 1) {
        let cof = k.cofaces(id);
        for (i, &a) in cof.iter().enumerate() {
            for &b in &cof[i + 1..] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    edges
}

/// The facet graph with ridge adjacency is connected.
pub fn strong_connectivity(k: &Complex) -> bool {
    let facets = k.facet_ids();
    let pos: HashMap<SimplexId, usize> = facets.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut parent: Vec<usize> = (0..facets.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let mut components = facets.len();
    for (a, b) in facet_adjacency(k) {
        let (ra, rb) = (find(&mut parent, pos[&a]), find(&mut parent, pos[&b]));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components <= 1
}

/// The piece of the disjoint decomposition whose interior contains `int σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Interior {
    /// A face of `((pass r̄, act r̄))`.
    Passive,
    Stratum {
        #[serde(rename = "S")]
        s: ProcSet,
        #[serde(rename = "A")]
        a: ProcSet,
        #[serde(rename = "V")]
        v: ProcSet,
    },
}

/// `(S, A, V) = (W_1 ∪ G_1, G_1, G_0)` when `t ≥ 1`.
pub fn classify_interior(sigma: &WitnessStructure) -> Interior {
    if sigma.t() == 0 {
        return Interior::Passive;
    }
    let (r0, r1) = (sigma.row(0), sigma.row(1));
    Interior::Stratum { s: r1.union(), a: r1.ghosts, v: r0.ghosts }
}

/// `int σ ⊆ int X_{S,A,V}`: `σ ∈ X_{S,A,V}` and `δ_V(γ_{S,A}(σ))` has `G_0 = ∅`.
pub fn in_interior(sigma: &WitnessStructure, s: ProcSet, a: ProcSet, v: ProcSet) -> bool {
    if !StratumRef::xbv(s, a, v).contains(sigma) {
        return false;
    }
    strata::gamma(sigma, s, a)
        .and_then(|g| strata::delta(&g, v))
        .is_ok_and(|image| image.row(0).ghosts.is_empty())
}

#[derive(Clone, Debug, Serialize)]
pub struct InteriorReport {
    pub simplices: usize,
    pub passive: usize,
    pub strata_used: usize,
    /// Simplices whose interior lies in zero or several pieces, or in a piece other
    /// than the classified one.
    pub violations: Vec<String>,
}

impl InteriorReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the pieces `Δ^{pass r̄}` and `int X_{S,A,V}` (`A ⊂ S ⊆ act`,
/// `V ⊆ supp ∖ S`) partition the simplices, and that [`classify_interior`] names the
/// piece.
pub fn verify_interior_partition(k: &Complex) -> InteriorReport {
    let r = k.counter();
    let (act, supp) = (r.active(), r.support());
    let passive_top = WitnessStructure::new(vec![crate::witness::Row::new(r.passive(), act)]).expect("one-row structure");
    let passive_faces: BTreeSet<SimplexId> = k.id_of(&passive_top).map(|id| k.all_faces(id).into_iter().collect()).unwrap_or_default();
    let triples: Vec<(ProcSet, ProcSet, ProcSet)> = act
        .subsets()
        .flat_map(|s| s.subsets().filter(move |&a| a != s).map(move |a| (s, a)))
        .flat_map(|(s, a)| (supp - s).subsets().map(move |v| (s, a, v)))
        .collect();
    let mut violations = Vec::new();
    let mut used = BTreeSet::new();
    let mut passive = 0;
    for (id, sigma) in k.simplices().iter().enumerate() {
        let hits: Vec<_> = triples.iter().filter(|&&(s, a, v)| in_interior(sigma, s, a, v)).collect();
        let in_passive = passive_faces.contains(&id);
        match classify_interior(sigma) {
            Interior::Passive => {
                passive += 1;
                if !in_passive || !hits.is_empty() {
                    violations.push(format!("{sigma}: t = 0 but lies in {} interiors", hits.len()));
                }
            }
            Interior::Stratum { s, a, v } => {
                used.insert((s, a, v));
                if in_passive || hits.len() != 1 || *hits[0] != (s, a, v) {
                    violations.push(format!("{sigma}: classified as ({s},{a},{v}), interiors hit: {hits:?}"));
                }
            }
        }
    }
    InteriorReport { simplices: k.len(), passive, strata_used: used.len(), violations }
}

/// One elementary collapse: `free` is removed together with its unique coface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CollapseStep {
    pub free: SimplexId,
    pub cofacet: SimplexId,
}

/// Where a step came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Provenance {
    #[serde(rename = "stage1")]
    Stage1,
    #[serde(rename = "stage2")]
    Stage2,
    #[serde(rename = "stage3")]
    Stage3,
    #[serde(rename = "recursive")]
    Recursive,
    #[serde(rename = "greedy-fallback")]
    GreedyFallback,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CollapseSequence {
    pub steps: Vec<CollapseStep>,
    pub provenance: Vec<Provenance>,
}

impl CollapseSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn fallback_steps(&self) -> usize {
        self.provenance.iter().filter(|&&p| p == Provenance::GreedyFallback).count()
    }

    pub fn count(&self, which: Provenance) -> usize {
        self.provenance.iter().filter(|&&p| p == which).count()
    }

    /// `{free, cofacet, provenance}` with canonical encodings.
    pub fn to_export(&self, k: &Complex) -> Vec<StepExport> {
        self.steps
            .iter()
            .zip(&self.provenance)
            .map(|(s, &p)| StepExport { free: k.simplex(s.free).key(), cofacet: k.simplex(s.cofacet).key(), provenance: p })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepExport {
    pub free: String,
    pub cofacet: String,
    pub provenance: Provenance,
}

/// Remaining-simplex state for replaying collapses. The remaining set is always a
/// subcomplex, so a simplex is free exactly when one of its codimension-one cofaces
/// remains.
pub struct Replay<'a> {
    k: &'a Complex,
    remaining: FixedBitSet,
    live_cofaces: Vec<u32>,
}

impl<'a> Replay<'a> {
    pub fn new(k: &'a Complex) -> Self {
        let live_cofaces = (0..k.len()).map(|i| k.cofaces(i).len() as u32).collect();
        Replay { k, remaining: full_set(k), live_cofaces }
    }

    pub fn remaining(&self) -> &FixedBitSet {
        &self.remaining
    }

    fn unique_coface(&self, id: SimplexId) -> Option<SimplexId> {
        (self.live_cofaces[id] == 1).then(|| *self.k.cofaces(id).iter().find(|&&c| self.remaining.contains(c)).expect("count is one"))
    }

    pub fn check(&self, step: CollapseStep) -> std::result::Result<(), String> {
        let k = self.k;
        if step.free >= k.len() || step.cofacet >= k.len() {
            return Err("unknown simplex id".into());
        }
        if !self.remaining.contains(step.free) || !self.remaining.contains(step.cofacet) {
            return Err("simplex already removed".into());
        }
        if k.dim(step.cofacet) != k.dim(step.free) + 1 || !k.cofaces(step.free).contains(&step.cofacet) {
            return Err(format!("{} is not a cofacet of {}", k.simplex(step.cofacet), k.simplex(step.free)));
        }
        if self.live_cofaces[step.cofacet] != 0 {
            return Err(format!("{} is not maximal", k.simplex(step.cofacet)));
        }
        if self.live_cofaces[step.free] != 1 {
            return Err(format!("{} has {} remaining cofacets", k.simplex(step.free), self.live_cofaces[step.free]));
        }
        Ok(())
    }

    fn remove(&mut self, id: SimplexId) {
        self.remaining.set(id, false);
        for &f in self.k.faces(id) {
            self.live_cofaces[f] -= 1;
        }
    }

    pub fn apply(&mut self, step: CollapseStep) -> std::result::Result<(), String> {
        self.check(step)?;
        self.remove(step.cofacet);
        self.remove(step.free);
        Ok(())
    }

    /// The free pair with the smallest free id among `allowed` simplices.
    pub fn next_greedy(&self, allowed: &FixedBitSet) -> Option<CollapseStep> {
        self.remaining.ones().filter(|&i| allowed.contains(i)).find_map(|i| {
            self.unique_coface(i)
                .filter(|&c| allowed.contains(c))
                .map(|c| CollapseStep { free: i, cofacet: c })
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub steps_checked: usize,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub remaining: usize,
}

/// Replays `steps`; with `target = None` the steps must exhaust the complex (a perfect
/// matching), otherwise the remaining set must equal `target`.
pub fn validate_collapse(k: &Complex, steps: &[CollapseStep], target: Option<&FixedBitSet>) -> ValidationReport {
    let mut replay = Replay::new(k);
    for (i, &step) in steps.iter().enumerate() {
        if let Err(reason) = replay.apply(step) {
            return ValidationReport {
                steps_checked: i,
                valid: false,
                failed_step: Some(i),
                reason: Some(reason),
                remaining: replay.remaining.count_ones(..),
            };
        }
    }
    let empty = FixedBitSet::with_capacity(k.len());
    let want = target.unwrap_or(&empty);
    let remaining = replay.remaining.count_ones(..);
    let ok = replay.remaining == *want;
    ValidationReport {
        steps_checked: steps.len(),
        valid: ok,
        failed_step: None,
        reason: (!ok).then(|| format!("{remaining} simplices remain, expected {}", want.count_ones(..))),
        remaining,
    }
}

/// Collapses greedily inside `allowed`, smallest free id first, until no allowed free
/// pair is left.
fn greedy_within(replay: &mut Replay<'_>, allowed: &FixedBitSet, seq: &mut CollapseSequence, tag: Provenance) {
    while let Some(step) = replay.next_greedy(allowed) {
        replay.apply(step).expect("greedy picks free pairs");
        seq.steps.push(step);
        seq.provenance.push(tag);
    }
}

/// Greedy collapse of the whole complex; fails if it gets stuck.
pub fn greedy_collapse(k: &Complex) -> Result<CollapseSequence> {
    let mut replay = Replay::new(k);
    let mut seq = CollapseSequence::default();
    greedy_within(&mut replay, &full_set(k), &mut seq, Provenance::GreedyFallback);
    let left = replay.remaining.count_ones(..);
    if left > 0 {
        return Err(Error::CollapseStalled { remaining: left });
    }
    Ok(seq)
}

type Pair = (WitnessStructure, WitnessStructure);

/// Paper-guided collapse schedules, memoized per `(counter, pivot)`.
///
/// `lemma(r, p)` collapses `P(r)` onto `∂P(r) ∖ int B_p(r)`, i.e. removes exactly the
/// simplices with `G_0 ∈ {∅, {p}}`. Each step is a pair of witness structures of `P(r)`.
#[derive(Default)]
pub struct CollapseEngine {
    memo: HashMap<(RoundCounter, Pid), Rc<Vec<Pair>>>,
}

impl CollapseEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lemma(&mut self, r: &RoundCounter, p: Pid) -> Result<Rc<Vec<Pair>>> {
        let key = (r.clone(), p);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let steps: Vec<Pair> = self.lemma_staged(r, p)?.into_iter().map(|(_, pair)| pair).collect();
        let steps = Rc::new(steps);
        self.memo.insert(key, steps.clone());
        Ok(steps)
    }

    /// Steps of `lemma(r, p)` tagged with the stage that produced them.
    pub fn lemma_staged(&mut self, r: &RoundCounter, p: Pid) -> Result<Vec<(Provenance, Pair)>> {
        let supp = r.support();
        if !supp.contains(p) {
            return Err(Error::NotInSupport(p));
        }
        let act = r.active();
        if act.is_empty() {
            let one = |w: ProcSet, g: ProcSet| WitnessStructure::new(vec![crate::witness::Row::new(w, g)]);
            let free = one(supp.without(p), ProcSet::singleton(p))?;
            let top = one(supp, ProcSet::empty())?;
            return Ok(vec![(Provenance::Recursive, (free, top))]);
        }
        let mut out = Vec::new();

        // Stage 1: (X_{S,A,p}, X_{S,A}) ≅ (B_p(r_{S,A}), P(r_{S,A})) for p ∉ S.
        let mut stage1: Vec<(ProcSet, ProcSet)> = strata::admissible_pairs(act)
            .into_iter()
            .filter(|&(s, a)| a != s && !s.contains(p))
            .collect();
        stage1.sort_by(|x, y| x.1.len().cmp(&y.1.len()).then(x.cmp(y)));
        for (s, a) in stage1 {
            self.pull_back(r, s, a, p, Provenance::Stage1, &mut out)?;
        }

        // Stage 2: for p ∈ S, |S| ≥ 2 and q = min(S ∖ p), the pairs
        // (X_{S,A∪q}, X_{S,A}) ≅ (B_q(r_{S,A}), P(r_{S,A})), A ⊆ S ∖ {p,q}.
        if act.contains(p) {
            let mut stage2 = Vec::new();
            for s in act.subsets().filter(|s| s.contains(p) && s.len() >= 2) {
                let q = s.without(p).min().expect("|S| ≥ 2");
                for a in s.without(p).without(q).subsets() {
                    stage2.push((s, a, q));
                }
            }
            stage2.sort_by(|x, y| x.1.len().cmp(&y.1.len()).then((x.0, x.1).cmp(&(y.0, y.1))));
            for (s, a, q) in stage2 {
                self.pull_back(r, s, a, q, Provenance::Stage2, &mut out)?;
            }

            // Stage 3: (X_{p,p}, X_p) ≅ (B_p(r_p), P(r_p)).
            self.pull_back(r, ProcSet::singleton(p), ProcSet::empty(), p, Provenance::Stage3, &mut out)?;
        }
        Ok(out)
    }

    fn pull_back(&mut self, r: &RoundCounter, s: ProcSet, a: ProcSet, pivot: Pid, tag: Provenance, out: &mut Vec<(Provenance, Pair)>) -> Result<()> {
        let sub = self.lemma(&r.restrict(s, a)?, pivot)?;
        for (free, cofacet) in sub.iter() {
            out.push((tag, (strata::gamma_inverse(free, s, a)?, strata::gamma_inverse(cofacet, s, a)?)));
        }
        Ok(())
    }
}

/// The simplices that survive [`collapse_to_relative_boundary`]: `G_0 ∉ {∅, {p}}`.
pub fn relative_boundary(k: &Complex, p: Pid) -> FixedBitSet {
    select(k, |s| {
        let g0 = s.row(0).ghosts;
        !g0.is_empty() && g0 != ProcSet::singleton(p)
    })
}

/// Converts engine pairs to ids and replays them, finishing greedily inside `allowed` if
/// a step fails.
fn run_pairs(
    k: &Complex,
    pairs: impl IntoIterator<Item = (Provenance, Pair)>,
    replay: &mut Replay<'_>,
    allowed: &FixedBitSet,
    seq: &mut CollapseSequence,
) -> Result<bool> {
    for (tag, (free, cofacet)) in pairs {
        let step = CollapseStep { free: k.require(&free)?, cofacet: k.require(&cofacet)? };
        if replay.apply(step).is_err() {
            greedy_within(replay, allowed, seq, Provenance::GreedyFallback);
            return Ok(false);
        }
        seq.steps.push(step);
        seq.provenance.push(tag);
    }
    Ok(true)
}

/// Collapses `P(r̄)` onto `∂P(r̄) ∖ int B_p(r̄)`, validating every step.
pub fn collapse_to_relative_boundary(k: &Complex, p: Pid) -> Result<CollapseSequence> {
    let mut engine = CollapseEngine::new();
    let pairs = engine.lemma_staged(k.counter(), p)?;
    let target = relative_boundary(k, p);
    let mut allowed = full_set(k);
    allowed.difference_with(&target);
    let mut replay = Replay::new(k);
    let mut seq = CollapseSequence::default();
    run_pairs(k, pairs, &mut replay, &allowed, &mut seq)?;
    if *replay.remaining() != target {
        return Err(Error::CollapseStalled { remaining: replay.remaining().count_ones(..) - target.count_ones(..) });
    }
    Ok(seq)
}

/// A perfect matching of all simplices by elementary collapses.
///
/// For `V ⊆ supp ∖ {p}` by increasing size, collapses `B_V ≅ P(r̄∖V)` onto its relative
/// boundary, transported by `δ_V^{-1}`: this removes the simplices with
/// `G_0 ∈ {V, V ∪ {p}}`. Every coface of such a simplex has a smaller `G_0`, so it is
/// gone by then. The last pair is `(empty simplex, vertex)`.
pub fn collapse_all(k: &Complex, p: Pid) -> Result<CollapseSequence> {
    let r = k.counter();
    if !r.support().contains(p) {
        return Err(Error::NotInSupport(p));
    }
    let mut engine = CollapseEngine::new();
    let mut replay = Replay::new(k);
    let mut seq = CollapseSequence::default();
    let all = full_set(k);
    for v in r.support().without(p).subsets_by_size() {
        let staged = engine.lemma_staged(&r.delete(v), p)?;
        let mut mapped = Vec::with_capacity(staged.len());
        for (tag, (free, cofacet)) in staged {
            let tag = if v.is_empty() { tag } else { Provenance::Recursive };
            mapped.push((tag, (strata::delta_inverse(&free, v)?, strata::delta_inverse(&cofacet, v)?)));
        }
        if !run_pairs(k, mapped, &mut replay, &all, &mut seq)? {
            break;
        }
    }
    let left = replay.remaining().count_ones(..);
    if left > 0 {
        greedy_within(&mut replay, &all, &mut seq, Provenance::GreedyFallback);
        let left = replay.remaining().count_ones(..);
        if left > 0 {
            return Err(Error::CollapseStalled { remaining: left });
        }
    }
    Ok(seq)
}

/// Reduced Betti numbers over Z/2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedBetti {
    /// Dimension -1: nonzero only for the complex whose only simplex is the empty one.
    pub minus_one: usize,
    /// Dimensions 0, 1, ...
    pub dims: Vec<usize>,
}

impl ReducedBetti {
    pub fn is_acyclic(&self) -> bool {
        self.minus_one == 0 && self.dims.iter().all(|&b| b == 0)
    }

    /// Reduced homology of the `n`-sphere; `n = -1` is the empty sphere.
    pub fn is_sphere(&self, n: isize) -> bool {
        let at = |d: isize| if d == -1 { self.minus_one } else { self.dims.get(d as usize).copied().unwrap_or(0) };
        (-1..self.dims.len() as isize).all(|d| at(d) == usize::from(d == n)) && (n < self.dims.len() as isize)
    }
}

/// Reduced homology of the subcomplex `set` (all of `k` when `None`), from the ranks of
/// the augmented boundary maps.
pub fn homology_z2(k: &Complex, set: Option<&FixedBitSet>) -> ReducedBetti {
    let all = full_set(k);
    let set = set.unwrap_or(&all);
    let top = k.top_dim();
    let mut local = vec![usize::MAX; k.len()];
    let mut counts = vec![0usize; (top + 2) as usize];
    for id in set.ones() {
        let slot = (k.dim(id) + 1) as usize;
        local[id] = counts[slot];
        counts[slot] += 1;
    }
    // rank of ∂_d : C_d → C_{d-1}, indexed by d + 1
    let mut ranks = vec![0usize; (top + 3) as usize];
    for d in 0..=top {
        let rows = counts[d as usize];
        let columns = set.ones().filter(|&id| k.dim(id) == d).map(|id| {
            let mut col = FixedBitSet::with_capacity(rows);
            for &f in k.faces(id) {
                col.insert(local[f]);
            }
            col
        });
        ranks[(d + 1) as usize] = rank_z2(columns);
    }
    let betti = |slot: usize| counts[slot] - ranks[slot] - ranks[slot + 1];
    let occupied = counts.iter().rposition(|&c| c > 0).map_or(0, |s| s + 1);
    ReducedBetti { minus_one: betti(0), dims: (1..occupied).map(betti).collect() }
}

/// Column rank over Z/2, reducing each column against stored pivots (highest set bit).
fn rank_z2(columns: impl Iterator<Item = FixedBitSet>) -> usize {
    let mut pivots: HashMap<usize, FixedBitSet> = HashMap::new();
    for mut col in columns {
        while let Some(top) = col.maximum() {
            match pivots.get(&top) {
                Some(p) => col.symmetric_difference_with(p),
                None => {
                    pivots.insert(top, col);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Alternating sum of simplex counts of `set`, the empty simplex excluded.
pub fn euler(k: &Complex, set: Option<&FixedBitSet>) -> i64 {
    let all = full_set(k);
    let set = set.unwrap_or(&all);
    set.ones().map(|id| k.dim(id)).filter(|&d| d >= 0).map(|d| if d % 2 == 0 { 1 } else { -1 }).sum()
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

    fn build(s: &str) -> Complex {
        Complex::build(&r(s)).unwrap()
    }

    fn ws(pairs: &[(&[Pid], &[Pid])]) -> WitnessStructure {
        WitnessStructure::from_pairs(pairs).unwrap()
    }

    #[test]
    fn boundary_examples() {
        let k = build("1,1");
        let b = boundary(&k);
        assert!(b.passed());
        assert_eq!(b.degree_counts[1..], [2, 2]);
        assert_eq!(b.boundary_f_vector, vec![2]);

        let b = boundary(&build("1,1,1"));
        assert!(b.passed());
        assert_eq!(b.boundary_f_vector, vec![9, 9]);

        let b = boundary(&build("1,0"));
        assert!(b.passed());
        assert_eq!(b.boundary_f_vector, vec![2]);
    }

    #[test]
    fn strong_connectivity_examples() {
        assert!(strong_connectivity(&build("1,1")));
        assert!(strong_connectivity(&build("2,1,1")));
        assert!(strong_connectivity(&build("1,0")));
    }

    #[test]
    fn interior_examples() {
        let top = ws(&[(&[0, 1], &[]), (&[0, 1], &[])]);
        assert_eq!(classify_interior(&top), Interior::Stratum { s: set(&[0, 1]), a: set(&[]), v: set(&[]) });
        let lonely = ws(&[(&[0], &[1]), (&[0], &[])]);
        assert_eq!(classify_interior(&lonely), Interior::Stratum { s: set(&[0]), a: set(&[]), v: set(&[1]) });
        assert_eq!(classify_interior(&ws(&[(&[1], &[0])])), Interior::Passive);
        for text in ["1,1", "2,1", "1,0,1", "1,1,1"] {
            let rep = verify_interior_partition(&build(text));
            assert!(rep.passed(), "{text}: {:?}", rep.violations);
        }
    }

    #[test]
    fn relative_collapse_examples() {
        let k = build("1,1");
        let seq = collapse_to_relative_boundary(&k, 0).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.fallback_steps(), 0);
        let rest = relative_boundary(&k, 0);
        let left: Vec<_> = rest.ones().map(|i| k.simplex(i).clone()).collect();
        assert_eq!(left, vec![WitnessStructure::empty(set(&[0, 1])), ws(&[(&[0], &[1]), (&[0], &[])])]);
        assert!(validate_collapse(&k, &seq.steps, Some(&rest)).valid);

        let k = build("1,0");
        let seq = collapse_to_relative_boundary(&k, 0).unwrap();
        assert_eq!(seq.len(), 1);
    }

    #[test]
    fn full_collapse_examples() {
        for (text, pairs) in [("1,1", 4), ("1,1,1", 25), ("2,1", 6), ("1", 1), ("0", 1)] {
            let k = build(text);
            let seq = collapse_all(&k, 0).unwrap();
            assert_eq!(seq.len(), pairs, "{text}");
            assert_eq!(seq.fallback_steps(), 0, "{text}");
            assert!(validate_collapse(&k, &seq.steps, None).valid, "{text}");
            let last = seq.steps.last().unwrap();
            assert_eq!(last.free, k.empty_id());
        }
    }

    #[test]
    fn validator_rejects_swapped_steps() {
        let k = build("1,1");
        let mut steps = collapse_all(&k, 0).unwrap().steps;
        let n = steps.len();
        steps.swap(n - 2, n - 1);
        let rep = validate_collapse(&k, &steps, None);
        assert!(!rep.valid);
        assert_eq!(rep.failed_step, Some(n - 2));
    }

    #[test]
    fn greedy_examples() {
        let k = build("1,1,1");
        let seq = greedy_collapse(&k).unwrap();
        assert_eq!(seq.len(), k.len() / 2);
        assert!(validate_collapse(&k, &seq.steps, None).valid);
    }

    #[test]
    fn homology_examples() {
        let k = build("1,1,1");
        let h = homology_z2(&k, None);
        assert!(h.is_acyclic());
        assert_eq!(euler(&k, None), 1);
        let b = boundary(&k);
        let hb = homology_z2(&k, Some(&b.boundary));
        assert_eq!(hb.dims, vec![0, 1]);
        assert!(hb.is_sphere(1));

        let k = build("1,0");
        let b = boundary(&k);
        assert_eq!(homology_z2(&k, Some(&b.boundary)).dims, vec![1]);

        let k = build("1");
        let b = boundary(&k);
        assert!(homology_z2(&k, Some(&b.boundary)).is_sphere(-1));
    }
}
