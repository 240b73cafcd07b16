//! The immediate snapshot complex `P(r̄)`.
//!
//! Simplices are stored once, sorted by dimension and then by pair form, and addressed by
//! dense [`SimplexId`]s. Codimension-one faces and cofaces are precomputed.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::counter::RoundCounter;
use crate::error::{Error, Result};
use crate::schedule;
use crate::set::{Pid, ProcSet};
use crate::witness::{Row, WitnessStructure};

pub type SimplexId = usize;

/// Default bound on the number of stored simplices.
pub const DEFAULT_SIMPLEX_CAP: usize = 2_000_000;

/// The three simplex conditions: `A ∪ G = supp r̄`, `|Tr(q)| = r(q)+1` on active ids and
/// `|Tr(q)| ≤ r(q)+1` on ghosts.
pub fn membership(r: &RoundCounter, sigma: &WitnessStructure) -> bool {
    if sigma.support() != r.support() {
        return false;
    }
    let ghosts = sigma.ghost_set();
    r.iter().all(|(q, c)| {
        let len = sigma.trace(q).len();
        if ghosts.contains(q) {
            len <= c as usize + 1
        } else {
            len == c as usize + 1
        }
    })
}

/// Facets, one per layered schedule, sorted.
pub fn facets(r: &RoundCounter, cap: usize) -> Result<Vec<WitnessStructure>> {
    if r.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut out = schedule::enumerate(r, cap)?
        .iter()
        .map(|s| s.to_facet(r))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Complex {
    counter: RoundCounter,
    simplices: Vec<WitnessStructure>,
    index: HashMap<WitnessStructure, SimplexId>,
    facets: Vec<SimplexId>,
    faces: Vec<Vec<SimplexId>>,
    cofaces: Vec<Vec<SimplexId>>,
}

impl Complex {
    pub fn build(r: &RoundCounter) -> Result<Self> {
        Complex::build_with_cap(r, DEFAULT_SIMPLEX_CAP)
    }

    /// Facets from schedules, then closure under single-id ghosting.
    pub fn build_with_cap(r: &RoundCounter, cap: usize) -> Result<Self> {
        let tops = facets(r, cap)?;
        let mut seen: HashSet<WitnessStructure> = tops.iter().cloned().collect();
        let mut frontier = tops.clone();
        while let Some(sigma) = frontier.pop() {
            for p in sigma.active_set() {
                let face = sigma.ghost(ProcSet::singleton(p))?;
                if seen.insert(face.clone()) {
                    if seen.len() > cap {
                        return Err(Error::ResourceCap { limit: cap, what: "simplices" });
                    }
                    frontier.push(face);
                }
            }
        }
        let mut simplices: Vec<WitnessStructure> = seen.into_iter().collect();
        simplices.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.cmp(b)));
        let index: HashMap<_, _> = simplices.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let faces: Vec<Vec<SimplexId>> = simplices
            .iter()
            .map(|s| {
                s.active_set()
                    .iter()
                    .map(|p| index[&s.ghost(ProcSet::singleton(p)).expect("p is active")])
                    .collect()
            })
            .collect();
        let mut cofaces = vec![Vec::new(); simplices.len()];
        for (id, fs) in faces.iter().enumerate() {
            for &f in fs {
                cofaces[f].push(id);
            }
        }
        let facets = tops.iter().map(|f| index[f]).collect();
        Ok(Complex { counter: r.clone(), simplices, index, facets, faces, cofaces })
    }

    /// Like [`Complex::build`], but an empty counter yields the complex whose only
    /// simplex is `((∅, ∅))`. Strata are isomorphic to such complexes in degenerate cases.
    pub fn build_any(r: &RoundCounter) -> Result<Self> {
        if !r.is_empty() {
            return Complex::build(r);
        }
        let void = WitnessStructure::empty(ProcSet::empty());
        Ok(Complex {
            counter: r.clone(),
            index: HashMap::from([(void.clone(), 0)]),
            simplices: vec![void],
            facets: vec![0],
            faces: vec![Vec::new()],
            cofaces: vec![Vec::new()],
        })
    }

    pub fn counter(&self) -> &RoundCounter {
        &self.counter
    }

    /// Number of simplices, the empty one included.
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[WitnessStructure] {
        &self.simplices
    }

    pub fn simplex(&self, id: SimplexId) -> &WitnessStructure {
        &self.simplices[id]
    }

    pub fn id_of(&self, sigma: &WitnessStructure) -> Option<SimplexId> {
        self.index.get(sigma).copied()
    }

    pub fn require(&self, sigma: &WitnessStructure) -> Result<SimplexId> {
        self.id_of(sigma).ok_or_else(|| Error::NotInComplex(sigma.to_string()))
    }

    pub fn contains(&self, sigma: &WitnessStructure) -> bool {
        self.index.contains_key(sigma)
    }

    pub fn dim(&self, id: SimplexId) -> isize {
        self.simplices[id].dim()
    }

    /// `|supp r̄| - 1`.
    pub fn top_dim(&self) -> isize {
        self.counter.support().len() as isize - 1
    }

    /// The empty simplex `((∅, supp r̄))`; always id 0.
    pub fn empty_id(&self) -> SimplexId {
        0
    }

    pub fn facet_ids(&self) -> &[SimplexId] {
        &self.facets
    }

    /// Codimension-one faces, ordered by the color removed.
    pub fn faces(&self, id: SimplexId) -> &[SimplexId] {
        &self.faces[id]
    }

    /// Codimension-one cofaces.
    pub fn cofaces(&self, id: SimplexId) -> &[SimplexId] {
        &self.cofaces[id]
    }

    /// All faces `Γ_S(σ)`, `S ⊆ A(σ)`, the simplex itself and the empty face included.
    pub fn all_faces(&self, id: SimplexId) -> Vec<SimplexId> {
        let sigma = &self.simplices[id];
        let mut out: Vec<SimplexId> = sigma
            .active_set()
            .subsets()
            .map(|s| self.index[&sigma.ghost(s).expect("subset of the active set")])
            .collect();
        out.sort_unstable();
        out
    }

    /// One vertex per color `p ∈ A(σ)`, keyed by color.
    pub fn vertices(&self, id: SimplexId) -> BTreeMap<Pid, SimplexId> {
        let sigma = &self.simplices[id];
        sigma.active_set().iter().map(|p| (p, self.index[&sigma.vertex(p).expect("p is active")])).collect()
    }

    /// Ids of dimension `d`, in storage order.
    pub fn ids_of_dim(&self, d: isize) -> impl Iterator<Item = SimplexId> + '_ {
        (0..self.len()).filter(move |&i| self.dim(i) == d)
    }

    /// `f_0, f_1, ..`: simplex counts by dimension, the empty simplex excluded.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut f = vec![0; (self.top_dim() + 1).max(0) as usize];
        for s in &self.simplices[1..] {
            f[s.dim() as usize] += 1;
        }
        f
    }

    /// Alternating sum of the f-vector.
    pub fn euler(&self) -> i64 {
        self.f_vector().iter().enumerate().map(|(d, &n)| if d % 2 == 0 { n as i64 } else { -(n as i64) }).sum()
    }

    pub fn to_export(&self, full: bool) -> ComplexExport {
        ComplexExport {
            counter: self.counter.clone(),
            f_vector: self.f_vector(),
            facets: self.facets.iter().map(|&f| self.simplices[f].clone()).collect(),
            simplices: full.then(|| {
                self.simplices
                    .iter()
                    .enumerate()
                    .map(|(i, s)| SimplexExport {
                        id: s.key(),
                        dim: s.dim(),
                        faces: self.faces[i].iter().map(|&f| self.simplices[f].key()).collect(),
                    })
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ComplexExport {
    pub counter: RoundCounter,
    pub f_vector: Vec<usize>,
    pub facets: Vec<WitnessStructure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simplices: Option<Vec<SimplexExport>>,
}

#[derive(Debug, Serialize)]
pub struct SimplexExport {
    pub id: String,
    pub dim: isize,
    pub faces: Vec<String>,
}

/// A passive process turns the complex into a cone: `P(r̄) ≅ P(r̄∖p) * {a}`.
#[derive(Debug)]
pub struct ConeSplit {
    pub base: Complex,
    /// The vertex of color `p`, which plays the apex.
    pub apex: SimplexId,
    /// For each simplex of `P(r̄)`: its base simplex in `P(r̄∖p)` and whether it contains
    /// the apex.
    pub map: Vec<(SimplexId, bool)>,
}

/// Drops `p` from `σ`, which for a passive `p` occurs only in `W_0` or `G_0`.
fn cone_base(sigma: &WitnessStructure, p: Pid) -> Result<WitnessStructure> {
    let mut rows = sigma.rows().to_vec();
    rows[0] = Row::new(rows[0].witnessed.without(p), rows[0].ghosts.without(p));
    WitnessStructure::new(rows)
}

/// Builds the cone decomposition and certifies that it is a bijection onto
/// `P(r̄∖p) × {with, without apex}` carrying codimension-one faces to codimension-one faces.
pub fn cone_split(k: &Complex, p: Pid) -> Result<ConeSplit> {
    let r = k.counter();
    match r.get(p) {
        Some(0) => {}
        Some(_) => return Err(Error::NotPassive(p)),
        None => return Err(Error::NotInSupport(p)),
    }
    let base = Complex::build(&r.delete(ProcSet::singleton(p)))?;
    let mut map = Vec::with_capacity(k.len());
    let mut hit = HashSet::new();
    for sigma in k.simplices() {
        let b = base.require(&cone_base(sigma, p)?)?;
        let flag = sigma.active_set().contains(p);
        if !hit.insert((b, flag)) {
            return Err(Error::Certificate(format!("cone map is not injective at {sigma}")));
        }
        map.push((b, flag));
    }
    if hit.len() != 2 * base.len() {
        return Err(Error::Certificate(format!("cone map hits {} of {} cone simplices", hit.len(), 2 * base.len())));
    }
    for (id, &(b, flag)) in map.iter().enumerate() {
        let mut got: Vec<(SimplexId, bool)> = k.faces(id).iter().map(|&f| map[f]).collect();
        let mut want: Vec<(SimplexId, bool)> = base.faces(b).iter().map(|&f| (f, flag)).collect();
        if flag {
            want.push((b, false));
        }
        got.sort_unstable();
        want.sort_unstable();
        if got != want {
            return Err(Error::Certificate(format!("cone map does not preserve the faces of {}", k.simplex(id))));
        }
    }
    let apex_sigma = WitnessStructure::new(vec![Row::new(ProcSet::singleton(p), r.support().without(p))])?;
    let apex = k.require(&apex_sigma)?;
    Ok(ConeSplit { base, apex, map })
}

/// A simplex of the standard chromatic subdivision: a set of `(color, view)` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChromaticSimplex {
    pub vertices: Vec<(Pid, ProcSet)>,
}

impl ChromaticSimplex {
    /// The tuple `((B_1..B_t)(C_1..C_t))`: views in increasing order, `B_i` the new ids of
    /// the `i`-th view and `C_i` the colors holding it.
    pub fn blocks(&self) -> (Vec<ProcSet>, Vec<ProcSet>) {
        let mut views: Vec<ProcSet> = self.vertices.iter().map(|&(_, v)| v).collect();
        views.sort_by_key(|v| v.len());
        views.dedup();
        let mut prev = ProcSet::empty();
        let mut b = Vec::new();
        let mut c = Vec::new();
        for v in views {
            b.push(v - prev);
            c.push(self.vertices.iter().filter(|&&(_, w)| w == v).map(|&(p, _)| p).collect());
            prev = v;
        }
        (b, c)
    }
}

/// Largest dimension accepted by the chromatic subdivision oracle.
pub const CHROMATIC_BOUND: usize = 3;

/// `χ(Δ^n)` on colors `0..=n`, enumerated from its vertex description: distinct colors,
/// views totally ordered by inclusion, and `c_i ∈ V_j ⟹ V_i ⊆ V_j`. Includes the empty
/// simplex.
pub fn chromatic_oracle(n: usize) -> Result<Vec<ChromaticSimplex>> {
    if n > CHROMATIC_BOUND {
        return Err(Error::ResourceCap { limit: CHROMATIC_BOUND, what: "dimensions for the chromatic oracle" });
    }
    let colors = ProcSet::range(n + 1);
    let mut out = Vec::new();
    let mut current = Vec::new();
    choose_vertices(colors, 0, n, &mut current, &mut out);
    out.sort();
    Ok(out)
}

fn choose_vertices(colors: ProcSet, c: Pid, n: usize, current: &mut Vec<(Pid, ProcSet)>, out: &mut Vec<ChromaticSimplex>) {
    if c > n {
        if chromatic_compatible(current) {
            out.push(ChromaticSimplex { vertices: current.clone() });
        }
        return;
    }
    choose_vertices(colors, c + 1, n, current, out);
    for view in colors.subsets().filter(|v| v.contains(c)) {
        current.push((c, view));
        choose_vertices(colors, c + 1, n, current, out);
        current.pop();
    }
}

fn chromatic_compatible(vs: &[(Pid, ProcSet)]) -> bool {
    vs.iter().all(|&(ci, vi)| {
        vs.iter().all(|&(_, vj)| (vi.is_subset(vj) || vj.is_subset(vi)) && (!vj.contains(ci) || vi.is_subset(vj)))
    })
}

/// The table map from chromatic tuples to witness structures.
pub fn phi(n: usize, s: &ChromaticSimplex) -> Result<WitnessStructure> {
    let (b, c) = s.blocks();
    let w0 = b.iter().fold(ProcSet::empty(), |acc, &x| acc | x);
    let mut rows = vec![Row::new(w0, ProcSet::range(n + 1) - w0)];
    rows.extend(b.iter().zip(&c).map(|(&bi, &ci)| Row::new(ci, bi - ci)));
    WitnessStructure::new(rows)
}

#[derive(Debug, Serialize)]
pub struct PhiReport {
    pub n: usize,
    pub simplices: usize,
    pub f_vector_oracle: Vec<usize>,
    pub f_vector_complex: Vec<usize>,
    pub bijective: bool,
    pub dimension_preserving: bool,
    pub face_preserving: bool,
}

impl PhiReport {
    pub fn ok(&self) -> bool {
        self.bijective && self.dimension_preserving && self.face_preserving && self.f_vector_oracle == self.f_vector_complex
    }
}

/// Certifies that the table map is a face-preserving bijection `χ(Δ^n) → P(1,...,1)`.
///
/// Both sides have exactly `d+1` codimension-one faces per `d`-simplex, so checking that
/// every face of the oracle maps to a face of the image settles the face poset.
pub fn phi_iso(n: usize) -> Result<PhiReport> {
    let oracle = chromatic_oracle(n)?;
    let k = Complex::build(&RoundCounter::from_slice(&vec![1; n + 1]))?;
    let mut f_oracle = vec![0; n + 1];
    for s in &oracle {
        if !s.vertices.is_empty() {
            f_oracle[s.vertices.len() - 1] += 1;
        }
    }
    let mut images = HashMap::new();
    let mut dimension_preserving = true;
    for s in &oracle {
        let id = match phi(n, s).ok().and_then(|w| k.id_of(&w)) {
            Some(id) => id,
            None => {
                return Ok(PhiReport {
                    n,
                    simplices: oracle.len(),
                    f_vector_oracle: f_oracle,
                    f_vector_complex: k.f_vector(),
                    bijective: false,
                    dimension_preserving: false,
                    face_preserving: false,
                })
            }
        };
        dimension_preserving &= k.dim(id) == s.vertices.len() as isize - 1;
        images.insert(s.clone(), id);
    }
    let distinct: HashSet<SimplexId> = images.values().copied().collect();
    let bijective = distinct.len() == oracle.len() && oracle.len() == k.len();
    let face_preserving = oracle.iter().all(|s| {
        let id = images[s];
        (0..s.vertices.len()).all(|i| {
            let mut face = s.clone();
            face.vertices.remove(i);
            k.faces(id).contains(&images[&face])
        })
    });
    Ok(PhiReport {
        n,
        simplices: oracle.len(),
        f_vector_oracle: f_oracle,
        f_vector_complex: k.f_vector(),
        bijective,
        dimension_preserving,
        face_preserving,
    })
}

/// Witness structures with `W_0 ∪ G_0 = A ∪ B`, `W_0 ∩ A = W_1 ∪ .. ∪ W_t ∪ G_1 ∪ .. ∪ G_t`
/// and the later sets pairwise disjoint: the simplices of `P(χ_{A,B})`.
pub fn chi_simplices(active: ProcSet, passive: ProcSet) -> Result<Vec<WitnessStructure>> {
    let supp = active | passive;
    let mut out = Vec::new();
    for w0 in supp.subsets() {
        let mut rows = vec![Row::new(w0, supp - w0)];
        chi_rows(w0 & active, &mut rows, &mut out)?;
    }
    out.sort();
    Ok(out)
}

fn chi_rows(remaining: ProcSet, rows: &mut Vec<Row>, out: &mut Vec<WitnessStructure>) -> Result<()> {
    if remaining.is_empty() {
        out.push(WitnessStructure::new(rows.clone())?);
        return Ok(());
    }
    for w in remaining.subsets().filter(|w| !w.is_empty()) {
        for g in (remaining - w).subsets() {
            rows.push(Row::new(w, g));
            chi_rows(remaining - w - g, rows, out)?;
            rows.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> RoundCounter {
        s.parse().unwrap()
    }

    fn ws(pairs: &[(&[Pid], &[Pid])]) -> WitnessStructure {
        WitnessStructure::from_pairs(pairs).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(membership(&r("1,1"), &ws(&[(&[0, 1], &[]), (&[0, 1], &[])])));
        assert!(!membership(&r("1,1"), &ws(&[(&[0, 1], &[]), (&[0], &[1]), (&[0], &[])])));
        assert!(membership(&r("2,1"), &ws(&[(&[0, 1], &[]), (&[0, 1], &[]), (&[0], &[])])));
        assert!(!membership(&r("1,1,1"), &ws(&[(&[0, 1], &[]), (&[0, 1], &[])])));
    }

    #[test]
    fn facet_counts() {
        assert_eq!(facets(&r("1,1"), usize::MAX).unwrap().len(), 3);
        assert_eq!(facets(&r("1,1,1"), usize::MAX).unwrap().len(), 13);
        assert_eq!(facets(&r("2,1"), usize::MAX).unwrap().len(), 5);
        assert_eq!(facets(&RoundCounter::default(), usize::MAX), Err(Error::EmptySupport));
    }

    #[test]
    fn f_vectors() {
        let k = Complex::build(&r("1,1")).unwrap();
        assert_eq!(k.f_vector(), vec![4, 3]);
        assert_eq!(k.len(), 8);
        assert_eq!(k.simplex(k.empty_id()), &WitnessStructure::empty(ProcSet::range(2)));
        assert_eq!(Complex::build(&r("1,1,1")).unwrap().f_vector(), vec![12, 24, 13]);
        assert_eq!(Complex::build(&r("1,0")).unwrap().f_vector(), vec![2, 1]);
        assert_eq!(Complex::build(&r("2,1")).unwrap().f_vector(), vec![6, 5]);
        assert!(matches!(Complex::build_with_cap(&r("1,1,1"), 20), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn faces_and_vertices() {
        let k = Complex::build(&r("1,1")).unwrap();
        let top = k.require(&ws(&[(&[0, 1], &[]), (&[0, 1], &[])])).unwrap();
        let v = k.vertices(top);
        assert_eq!(v.keys().copied().collect::<Vec<_>>(), vec![0, 1]);
        for (&color, &vid) in &v {
            assert_eq!(k.vertices(vid), BTreeMap::from([(color, vid)]));
        }
        let k = Complex::build(&r("2,1")).unwrap();
        for id in 0..k.len() {
            let d = k.dim(id);
            assert_eq!(k.all_faces(id).len(), 1 << (d + 1));
            assert_eq!(k.faces(id).len(), (d + 1) as usize);
        }
    }

    #[test]
    fn every_stored_simplex_satisfies_membership() {
        for text in ["1,1", "2,1", "1,0,1", "2,1,1"] {
            let c = r(text);
            let k = Complex::build(&c).unwrap();
            assert!(k.simplices().iter().all(|s| membership(&c, s)), "{text}");
        }
    }

    #[test]
    fn cone_split_examples() {
        let k = Complex::build(&r("1,0")).unwrap();
        let split = cone_split(&k, 1).unwrap();
        assert_eq!(split.base.f_vector(), vec![1]);
        assert_eq!(k.simplex(split.apex), &ws(&[(&[1], &[0])]));

        let k = Complex::build(&r("1,1,0")).unwrap();
        let split = cone_split(&k, 2).unwrap();
        assert_eq!(split.base.f_vector(), vec![4, 3]);
        assert_eq!(k.f_vector(), vec![5, 7, 3]);
        assert_eq!(cone_split(&k, 0).unwrap_err(), Error::NotPassive(0));
    }

    #[test]
    fn chromatic_subdivision_matches() {
        let one = chromatic_oracle(1).unwrap();
        assert_eq!(one.iter().filter(|s| s.vertices.len() == 2).count(), 3);
        assert_eq!(one.iter().filter(|s| s.vertices.len() == 1).count(), 4);
        for n in 1..=2 {
            let report = phi_iso(n).unwrap();
            assert!(report.ok(), "{report:?}");
        }
        assert_eq!(phi_iso(2).unwrap().f_vector_oracle, vec![12, 24, 13]);
        let central = ChromaticSimplex { vertices: vec![(0, ProcSet::range(2)), (1, ProcSet::range(2))] };
        assert_eq!(phi(1, &central).unwrap(), ws(&[(&[0, 1], &[]), (&[0, 1], &[])]));
        assert!(chromatic_oracle(4).is_err());
    }

    #[test]
    fn chi_characterization() {
        for (a, b) in [(ProcSet::range(2), ProcSet::empty()), (ProcSet::range(2), ProcSet::singleton(2)), (ProcSet::singleton(1), ProcSet::singleton(0))] {
            let c = RoundCounter::chi_of(a, b).unwrap();
            let k = Complex::build(&c).unwrap();
            let mut stored = k.simplices().to_vec();
            stored.sort();
            assert_eq!(chi_simplices(a, b).unwrap(), stored);
        }
    }

    #[test]
    fn export_is_deterministic() {
        let k = Complex::build(&r("1,1")).unwrap();
        let a = serde_json::to_string(&k.to_export(true)).unwrap();
        let b = serde_json::to_string(&Complex::build(&r("1,1")).unwrap().to_export(true)).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with(r#"{"counter":{"0":1,"1":1},"f_vector":[4,3]"#));
    }
}
