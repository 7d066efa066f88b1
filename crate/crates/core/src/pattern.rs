//! Pattern hypergraphs and loading schedules.
//!
//! Pattern vertices are numbered `1..=kappa`. Pairs and triples are stored as
//! sorted arrays; a directed pattern additionally remembers the orientation each
//! triple was given in.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

/// Unordered pair of pattern vertices, stored sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair(pub [u8; 2]);

/// Unordered triple of pattern vertices, stored sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple(pub [u8; 3]);

impl Pair {
    pub fn new(a: u8, b: u8) -> Self {
        if a <= b {
            Pair([a, b])
        } else {
            Pair([b, a])
        }
    }

    pub fn contains(&self, v: u8) -> bool {
        self.0.contains(&v)
    }
}

impl Triple {
    pub fn new(a: u8, b: u8, c: u8) -> Self {
        let mut t = [a, b, c];
        t.sort_unstable();
        Triple(t)
    }

    pub fn contains(&self, v: u8) -> bool {
        self.0.contains(&v)
    }

    /// The three 2-subsets, in sorted order: `{a,b}`, `{a,c}`, `{b,c}`.
    pub fn pairs(&self) -> [Pair; 3] {
        let [a, b, c] = self.0;
        [Pair([a, b]), Pair([a, c]), Pair([b, c])]
    }

    pub fn contains_pair(&self, p: Pair) -> bool {
        self.contains(p.0[0]) && self.contains(p.0[1])
    }

    /// The vertex of the triple that is not in `p`. `p` must be one of its pairs.
    pub fn third(&self, p: Pair) -> u8 {
        *self.0.iter().find(|v| !p.contains(**v)).expect("pair not in triple")
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0[0], self.0[1])
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.0[0], self.0[1], self.0[2])
    }
}

/// One entry of a loading schedule.
///
/// The derived order (all vertices, then pairs, then triples, each
/// lexicographic) is the fixed element order used for enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScheduleElement {
    Vertex(u8),
    Pair(Pair),
    Triple(Triple),
}

impl ScheduleElement {
    fn indices(&self) -> &[u8] {
        match self {
            ScheduleElement::Vertex(v) => std::slice::from_ref(v),
            ScheduleElement::Pair(p) => &p.0,
            ScheduleElement::Triple(t) => &t.0,
        }
    }
}

/// Compact notation: `v1`, `p12`, `t123`. When an index has more than one
/// digit the indices are separated by `-` (`p3-10`).
impl ScheduleElement {
    /// Image under the vertex map `sigma[v - 1]`.
    pub fn relabel(&self, sigma: &[u8]) -> ScheduleElement {
        let m = |v: u8| sigma[v as usize - 1];
        match *self {
            ScheduleElement::Vertex(v) => ScheduleElement::Vertex(m(v)),
            ScheduleElement::Pair(p) => ScheduleElement::Pair(Pair::new(m(p.0[0]), m(p.0[1]))),
            ScheduleElement::Triple(t) => ScheduleElement::Triple(Triple::new(m(t.0[0]), m(t.0[1]), m(t.0[2]))),
        }
    }
}

impl fmt::Display for ScheduleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            ScheduleElement::Vertex(_) => 'v',
            ScheduleElement::Pair(_) => 'p',
            ScheduleElement::Triple(_) => 't',
        };
        let idx = self.indices();
        let sep = if idx.iter().any(|&i| i >= 10) { "-" } else { "" };
        let body: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        write!(f, "{tag}{}", body.join(sep))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid schedule element `{0}` (expected v<i>, p<ij> or t<ijk>)")]
pub struct ElementParseError(pub String);

impl FromStr for ScheduleElement {
    type Err = ElementParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ElementParseError(s.to_string());
        let s = s.trim();
        let mut chars = s.chars();
        let tag = chars.next().ok_or_else(err)?;
        let body = chars.as_str();
        let arity = match tag {
            'v' => 1,
            'p' => 2,
            't' => 3,
            _ => return Err(err()),
        };
        let idx: Vec<u8> = if body.contains(['-', ',']) {
            body.split(['-', ','])
                .map(|t| t.trim().parse::<u8>().map_err(|_| err()))
                .collect::<Result<_, _>>()?
        } else {
            body.chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(err))
                .collect::<Result<_, _>>()?
        };
        if idx.len() != arity {
            return Err(err());
        }
        // Order and distinctness are checked by validation, not by the parser,
        // so that a malformed element surfaces as a clause (i) violation.
        Ok(match arity {
            1 => ScheduleElement::Vertex(idx[0]),
            2 => ScheduleElement::Pair(Pair::new(idx[0], idx[1])),
            _ => ScheduleElement::Triple(Triple::new(idx[0], idx[1], idx[2])),
        })
    }
}

impl Serialize for ScheduleElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScheduleElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ordered list of schedule elements. Validity is checked separately.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LoadingSchedule(pub Vec<ScheduleElement>);

impl LoadingSchedule {
    pub fn new(elements: Vec<ScheduleElement>) -> Self {
        LoadingSchedule(elements)
    }

    pub fn elements(&self) -> &[ScheduleElement] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses a whitespace- or comma-separated list in compact notation.
    pub fn parse_compact(s: &str) -> Result<Self, ElementParseError> {
        s.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(LoadingSchedule)
    }

    pub fn to_compact(&self) -> Vec<String> {
        self.0.iter().map(|e| e.to_string()).collect()
    }
}

impl fmt::Display for LoadingSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact().join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("kappa must be between 1 and 255, got {0}")]
    BadKappa(usize),
    #[error("triple {0:?} has a vertex outside 1..={1}")]
    VertexOutOfRange([u8; 3], u8),
    #[error("triple {0:?} repeats a vertex")]
    RepeatedVertex([u8; 3]),
    #[error("triple {0} appears more than once")]
    DuplicateTriple(Triple),
}

/// Constant-sized 3-uniform pattern `H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternHypergraph {
    kappa: u8,
    triples: Vec<Triple>,
    pairs: Vec<Pair>,
    /// Orientation of each entry of `triples`, present for directed patterns.
    orientation: Option<Vec<[u8; 3]>>,
}

impl PatternHypergraph {
    /// Builds a pattern. For directed patterns each triple is taken to be in
    /// its query orientation; the canonical (sorted) triple is what loading
    /// schedules refer to.
    pub fn new(
        kappa: usize,
        triples: impl IntoIterator<Item = [u8; 3]>,
        directed: bool,
    ) -> Result<Self, PatternError> {
        if kappa == 0 || kappa > u8::MAX as usize {
            return Err(PatternError::BadKappa(kappa));
        }
        let kappa = kappa as u8;
        let mut entries: Vec<(Triple, [u8; 3])> = Vec::new();
        let mut seen = HashSet::new();
        for raw in triples {
            if raw.iter().any(|&v| v == 0 || v > kappa) {
                return Err(PatternError::VertexOutOfRange(raw, kappa));
            }
            if raw[0] == raw[1] || raw[0] == raw[2] || raw[1] == raw[2] {
                return Err(PatternError::RepeatedVertex(raw));
            }
            let t = Triple::new(raw[0], raw[1], raw[2]);
            if !seen.insert(t) {
                return Err(PatternError::DuplicateTriple(t));
            }
            entries.push((t, raw));
        }
        entries.sort();
        let triples: Vec<Triple> = entries.iter().map(|e| e.0).collect();
        let orientation = directed.then(|| entries.iter().map(|e| e.1).collect());
        let pairs = sigma2_of(&triples).into_iter().collect();
        Ok(PatternHypergraph {
            kappa,
            triples,
            pairs,
            orientation,
        })
    }

    /// Complete 3-uniform pattern on `k` vertices (`k = 4` is the 4-clique).
    pub fn complete(k: u8) -> Self {
        let mut ts = Vec::new();
        for a in 1..=k {
            for b in a + 1..=k {
                for c in b + 1..=k {
                    ts.push([a, b, c]);
                }
            }
        }
        Self::new(k as usize, ts, false).expect("complete pattern is well formed")
    }

    pub fn k4() -> Self {
        Self::complete(4)
    }

    pub fn single_triple() -> Self {
        Self::new(3, [[1, 2, 3]], false).expect("well formed")
    }

    /// Seven-vertex directed certificate pattern for ternary associativity,
    /// hyperedges `(1,2,3), (2,3,4), (6,4,5), (1,7,5)`.
    pub fn h7() -> Self {
        Self::new(7, [[1, 2, 3], [2, 3, 4], [6, 4, 5], [1, 7, 5]], true).expect("well formed")
    }

    pub fn kappa(&self) -> u8 {
        self.kappa
    }

    pub fn vertices(&self) -> impl Iterator<Item = u8> + '_ {
        1..=self.kappa
    }

    /// Σ3, sorted.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Σ2, sorted.
    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn is_directed(&self) -> bool {
        self.orientation.is_some()
    }

    /// Query orientation of a triple of Σ3 (the sorted triple when undirected).
    pub fn orientation(&self, t: Triple) -> Option<[u8; 3]> {
        let idx = self.triples.binary_search(&t).ok()?;
        Some(match &self.orientation {
            Some(o) => o[idx],
            None => t.0,
        })
    }

    /// Vertex permutations mapping Σ3 onto itself (orientation ignored), as
    /// `sigma[v - 1] = image of v`, in lexicographic order. The identity is first.
    pub fn automorphisms(&self) -> Vec<Vec<u8>> {
        fn extend(h: &PatternHypergraph, map: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
            let k = h.kappa as usize;
            if map.len() == k {
                out.push(map.clone());
                return;
            }
            let v = map.len() as u8 + 1;
            for img in 1..=h.kappa {
                if used[img as usize] {
                    continue;
                }
                map.push(img);
                let ok = h.triples.iter().filter(|t| t.0[2] == v).all(|t| {
                    let [a, b, c] = t.0.map(|x| map[x as usize - 1]);
                    h.has_triple(Triple::new(a, b, c))
                });
                if ok {
                    used[img as usize] = true;
                    extend(h, map, used, out);
                    used[img as usize] = false;
                }
                map.pop();
            }
        }
        let mut out = Vec::new();
        extend(self, &mut Vec::new(), &mut vec![false; self.kappa as usize + 1], &mut out);
        out
    }

    pub fn has_triple(&self, t: Triple) -> bool {
        self.triples.binary_search(&t).is_ok()
    }

    pub fn has_pair(&self, p: Pair) -> bool {
        self.pairs.binary_search(&p).is_ok()
    }

    pub fn has_vertex(&self, v: u8) -> bool {
        v >= 1 && v <= self.kappa
    }

    pub fn contains_element(&self, e: &ScheduleElement) -> bool {
        match *e {
            ScheduleElement::Vertex(v) => self.has_vertex(v),
            ScheduleElement::Pair(p) => self.has_pair(p),
            ScheduleElement::Triple(t) => self.has_triple(t),
        }
    }

    /// Vertices that belong to no triple.
    pub fn isolated_vertices(&self) -> Vec<u8> {
        self.vertices()
            .filter(|&v| !self.triples.iter().any(|t| t.contains(v)))
            .collect()
    }

    /// Σ1 ∪ Σ2 ∪ Σ3 in the fixed element order.
    pub fn elements(&self) -> Vec<ScheduleElement> {
        let mut out: Vec<ScheduleElement> = self.vertices().map(ScheduleElement::Vertex).collect();
        out.extend(self.pairs.iter().copied().map(ScheduleElement::Pair));
        out.extend(self.triples.iter().copied().map(ScheduleElement::Triple));
        out
    }

    /// Triples in the orientation they were given (sorted for undirected patterns).
    pub fn oriented_triples(&self) -> Vec<[u8; 3]> {
        match &self.orientation {
            Some(o) => o.clone(),
            None => self.triples.iter().map(|t| t.0).collect(),
        }
    }
}

fn sigma2_of(triples: &[Triple]) -> BTreeSet<Pair> {
    triples.iter().flat_map(|t| t.pairs()).collect()
}

/// The pairs covered by at least one triple of `h`.
pub fn derive_sigma2(h: &PatternHypergraph) -> BTreeSet<Pair> {
    sigma2_of(h.triples())
}

/// Which part of the validity definition a schedule breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Clause {
    /// (i) element is not in Σ1 ∪ Σ2 ∪ Σ3.
    ForeignElement,
    /// (ii) a pair is loaded before one of its vertices.
    VertexBeforePair,
    /// (iii) a triple is loaded before one of its pairs.
    PairBeforeTriple,
    /// (iv) an element is loaded twice.
    Repeated,
    /// (v) some triple of Σ3 is never loaded.
    MissingTriple,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("position {position}: {element} is not an element of the pattern")]
    ForeignElement { position: usize, element: ScheduleElement },
    #[error("position {position}: pair {pair} loaded before vertex {vertex}")]
    VertexBeforePair { position: usize, pair: Pair, vertex: u8 },
    #[error("position {position}: triple {triple} loaded before pair {pair}")]
    PairBeforeTriple { position: usize, triple: Triple, pair: Pair },
    #[error("position {position}: {element} loaded twice")]
    Repeated { position: usize, element: ScheduleElement },
    #[error("triple {triple} is never loaded")]
    MissingTriple { triple: Triple },
}

impl Violation {
    pub fn clause(&self) -> Clause {
        match self {
            Violation::ForeignElement { .. } => Clause::ForeignElement,
            Violation::VertexBeforePair { .. } => Clause::VertexBeforePair,
            Violation::PairBeforeTriple { .. } => Clause::PairBeforeTriple,
            Violation::Repeated { .. } => Clause::Repeated,
            Violation::MissingTriple { .. } => Clause::MissingTriple,
        }
    }
}

/// Checks a schedule against the validity definition and reports the
/// violation at the earliest position (a missing triple is reported last).
pub fn validate_schedule(h: &PatternHypergraph, s: &LoadingSchedule) -> Result<(), Violation> {
    let mut loaded: HashSet<ScheduleElement> = HashSet::with_capacity(s.len());
    for (position, &element) in s.elements().iter().enumerate() {
        let well_formed = match element {
            ScheduleElement::Vertex(_) => true,
            ScheduleElement::Pair(p) => p.0[0] != p.0[1],
            ScheduleElement::Triple(t) => t.0[0] != t.0[1] && t.0[1] != t.0[2],
        };
        if !well_formed || !h.contains_element(&element) {
            return Err(Violation::ForeignElement { position, element });
        }
        if loaded.contains(&element) {
            return Err(Violation::Repeated { position, element });
        }
        match element {
            ScheduleElement::Vertex(_) => {}
            ScheduleElement::Pair(pair) => {
                for &vertex in &pair.0 {
                    if !loaded.contains(&ScheduleElement::Vertex(vertex)) {
                        return Err(Violation::VertexBeforePair { position, pair, vertex });
                    }
                }
            }
            ScheduleElement::Triple(triple) => {
                for pair in triple.pairs() {
                    if !loaded.contains(&ScheduleElement::Pair(pair)) {
                        return Err(Violation::PairBeforeTriple { position, triple, pair });
                    }
                }
            }
        }
        loaded.insert(element);
    }
    for &triple in h.triples() {
        if !loaded.contains(&ScheduleElement::Triple(triple)) {
            return Err(Violation::MissingTriple { triple });
        }
    }
    Ok(())
}

pub fn is_valid_schedule(h: &PatternHypergraph, s: &LoadingSchedule) -> bool {
    validate_schedule(h, s).is_ok()
}

/// Best K4 schedule reported for the 4-clique: vertices, then pairs, then
/// triples, each in increasing order.
pub fn k4_reference_schedule() -> LoadingSchedule {
    LoadingSchedule::parse_compact("v1 v2 v3 v4 p12 p13 p14 p23 p24 p34 t123 t124 t134 t234")
        .expect("static schedule")
}

/// Reported schedule for the associativity pattern [`PatternHypergraph::h7`].
pub fn h7_reference_schedule() -> LoadingSchedule {
    LoadingSchedule::parse_compact(
        "v1 v3 v4 v6 v2 v5 v7 p12 p13 p15 p17 p23 p24 p34 p45 p46 p56 p57 t123 t157 t234 t456",
    )
    .expect("static schedule")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(list: &[[u8; 2]]) -> BTreeSet<Pair> {
        list.iter().map(|p| Pair::new(p[0], p[1])).collect()
    }

    #[test]
    fn sigma2_of_k4_is_every_pair() {
        let all = pairs(&[[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]]);
        assert_eq!(derive_sigma2(&PatternHypergraph::k4()), all);
    }

    #[test]
    fn sigma2_of_single_triple() {
        let expected = pairs(&[[1, 2], [1, 3], [2, 3]]);
        assert_eq!(derive_sigma2(&PatternHypergraph::single_triple()), expected);
    }

    #[test]
    fn sigma2_of_h7_has_eleven_pairs() {
        let expected = pairs(&[
            [1, 2], [1, 3], [2, 3], [2, 4], [3, 4], [4, 6], [4, 5], [5, 6], [1, 7], [1, 5], [5, 7],
        ]);
        let got = derive_sigma2(&PatternHypergraph::h7());
        assert_eq!(got.len(), 11);
        assert_eq!(got, expected);
    }

    #[test]
    fn rejects_malformed_patterns() {
        assert_eq!(
            PatternHypergraph::new(3, [[1, 1, 2]], false),
            Err(PatternError::RepeatedVertex([1, 1, 2]))
        );
        assert!(matches!(
            PatternHypergraph::new(3, [[1, 2, 4]], false),
            Err(PatternError::VertexOutOfRange(..))
        ));
        assert!(matches!(
            PatternHypergraph::new(3, [[1, 2, 3], [3, 2, 1]], false),
            Err(PatternError::DuplicateTriple(_))
        ));
        assert_eq!(PatternHypergraph::new(0, [], false), Err(PatternError::BadKappa(0)));
    }

    #[test]
    fn directed_pattern_keeps_orientation() {
        let h = PatternHypergraph::h7();
        assert!(h.is_directed());
        assert_eq!(h.orientation(Triple::new(4, 5, 6)), Some([6, 4, 5]));
        assert_eq!(h.orientation(Triple::new(1, 5, 7)), Some([1, 7, 5]));
        assert_eq!(PatternHypergraph::k4().orientation(Triple::new(1, 2, 3)), Some([1, 2, 3]));
    }

    #[test]
    fn reference_schedules_are_valid() {
        assert_eq!(validate_schedule(&PatternHypergraph::k4(), &k4_reference_schedule()), Ok(()));
        let h7 = h7_reference_schedule();
        assert_eq!(h7.len(), 22);
        assert_eq!(validate_schedule(&PatternHypergraph::h7(), &h7), Ok(()));
    }

    #[test]
    fn pair_before_its_vertices_is_clause_ii() {
        let h = PatternHypergraph::single_triple();
        let s = LoadingSchedule::parse_compact("p12").unwrap();
        let v = validate_schedule(&h, &s).unwrap_err();
        assert_eq!(v.clause(), Clause::VertexBeforePair);
    }

    #[test]
    fn missing_triple_is_clause_v() {
        let h = PatternHypergraph::single_triple();
        let s = LoadingSchedule::parse_compact("v1 v2 v3 p12 p13 p23").unwrap();
        let v = validate_schedule(&h, &s).unwrap_err();
        assert_eq!(v.clause(), Clause::MissingTriple);
    }

    #[test]
    fn other_clauses() {
        let h = PatternHypergraph::single_triple();
        let s = LoadingSchedule::parse_compact("v1 v2 v1").unwrap();
        assert_eq!(validate_schedule(&h, &s).unwrap_err().clause(), Clause::Repeated);
        let s = LoadingSchedule::parse_compact("v1 v2 v3 p12 p13 t123").unwrap();
        assert_eq!(validate_schedule(&h, &s).unwrap_err().clause(), Clause::PairBeforeTriple);
        let s = LoadingSchedule::parse_compact("v4").unwrap();
        assert_eq!(validate_schedule(&h, &s).unwrap_err().clause(), Clause::ForeignElement);
        let s = LoadingSchedule(vec![ScheduleElement::Pair(Pair([1, 1]))]);
        assert_eq!(validate_schedule(&h, &s).unwrap_err().clause(), Clause::ForeignElement);
    }

    #[test]
    fn moving_a_pair_ahead_of_its_vertex_invalidates() {
        let h = PatternHypergraph::k4();
        let mut s = k4_reference_schedule();
        // p12 to the front.
        let p = s.0.remove(4);
        s.0.insert(0, p);
        assert_eq!(validate_schedule(&h, &s).unwrap_err().clause(), Clause::VertexBeforePair);
    }

    #[test]
    fn compact_notation_round_trips() {
        let s = h7_reference_schedule();
        let text = s.to_compact().join(" ");
        assert_eq!(LoadingSchedule::parse_compact(&text).unwrap(), s);
        let big: ScheduleElement = "p3-10".parse().unwrap();
        assert_eq!(big, ScheduleElement::Pair(Pair([3, 10])));
        assert_eq!(big.to_string(), "p3-10");
        assert!("q12".parse::<ScheduleElement>().is_err());
        assert!("p123".parse::<ScheduleElement>().is_err());
    }

    #[test]
    fn adding_a_triple_never_removes_a_pair() {
        let base = PatternHypergraph::new(5, [[1, 2, 3]], false).unwrap();
        let more = PatternHypergraph::new(5, [[1, 2, 3], [3, 4, 5]], false).unwrap();
        assert!(derive_sigma2(&base).is_subset(&derive_sigma2(&more)));
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(PatternHypergraph::k4().automorphisms().len(), 24);
        assert_eq!(PatternHypergraph::single_triple().automorphisms().len(), 6);
        let h7 = PatternHypergraph::h7().automorphisms();
        assert_eq!(h7[0], vec![1, 2, 3, 4, 5, 6, 7]);
        for s in &h7 {
            for t in PatternHypergraph::h7().triples() {
                let e = ScheduleElement::Triple(*t).relabel(s);
                assert!(PatternHypergraph::h7().contains_element(&e));
            }
        }
    }
}
