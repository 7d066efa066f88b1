//! Classical ground truth: instances, the hyperedge oracle with query
//! counting, planted instances and backtracking sub-hypergraph search.

use crate::pattern::PatternHypergraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::ControlFlow;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("vertex {0} outside 1..={1}")]
    OutOfRange(u32, u32),
    #[error("undirected triple {0:?} repeats a vertex")]
    RepeatedVertex([u32; 3]),
    #[error("weight given for {0:?}, which is not a hyperedge")]
    WeightWithoutEdge([u32; 3]),
    #[error("need n >= kappa (n = {n}, kappa = {kappa})")]
    TooFewVertices { n: u32, kappa: u8 },
    #[error("density {0} outside [0, 1]")]
    BadDensity(f64),
}

/// 3-uniform instance hypergraph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceHypergraph {
    n: u32,
    directed: bool,
    edges: BTreeSet<[u32; 3]>,
    weights: Option<BTreeMap<[u32; 3], u32>>,
}

impl InstanceHypergraph {
    /// Undirected triples are stored sorted; directed ones as given.
    pub fn new(
        n: u32,
        hyperedges: impl IntoIterator<Item = [u32; 3]>,
        directed: bool,
        weights: Option<BTreeMap<[u32; 3], u32>>,
    ) -> Result<Self, OracleError> {
        let mut g = InstanceHypergraph {
            n,
            directed,
            edges: BTreeSet::new(),
            weights: None,
        };
        for t in hyperedges {
            let t = g.canonical(t)?;
            g.edges.insert(t);
        }
        if let Some(w) = weights {
            let mut canon = BTreeMap::new();
            for (t, label) in w {
                let t = g.canonical(t)?;
                if !g.edges.contains(&t) {
                    return Err(OracleError::WeightWithoutEdge(t));
                }
                canon.insert(t, label);
            }
            g.weights = Some(canon);
        }
        Ok(g)
    }

    pub fn empty(n: u32) -> Self {
        InstanceHypergraph {
            n,
            directed: false,
            edges: BTreeSet::new(),
            weights: None,
        }
    }

    /// Every 3-subset of `1..=n`.
    pub fn complete(n: u32) -> Self {
        let mut edges = BTreeSet::new();
        for a in 1..=n {
            for b in a + 1..=n {
                for c in b + 1..=n {
                    edges.insert([a, b, c]);
                }
            }
        }
        InstanceHypergraph {
            n,
            directed: false,
            edges,
            weights: None,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn hyperedges(&self) -> &BTreeSet<[u32; 3]> {
        &self.edges
    }

    pub fn weights(&self) -> Option<&BTreeMap<[u32; 3], u32>> {
        self.weights.as_ref()
    }

    fn canonical(&self, t: [u32; 3]) -> Result<[u32; 3], OracleError> {
        if let Some(&v) = t.iter().find(|&&v| v == 0 || v > self.n) {
            return Err(OracleError::OutOfRange(v, self.n));
        }
        if self.directed {
            return Ok(t);
        }
        if t[0] == t[1] || t[0] == t[2] || t[1] == t[2] {
            return Err(OracleError::RepeatedVertex(t));
        }
        let mut s = t;
        s.sort_unstable();
        Ok(s)
    }

    /// `chi(t)`: whether `t` is a hyperedge. Counts one query.
    pub fn chi(&self, t: [u32; 3], counter: &mut QueryCounter) -> Result<bool, OracleError> {
        let t = self.canonical(t)?;
        counter.record(t);
        Ok(self.edges.contains(&t))
    }

    /// Weight label of `t`, `None` when `t` is not a hyperedge or carries no
    /// label. Counts one query.
    pub fn weight(&self, t: [u32; 3], counter: &mut QueryCounter) -> Result<Option<u32>, OracleError> {
        let t = self.canonical(t)?;
        counter.record(t);
        Ok(self.weights.as_ref().and_then(|w| w.get(&t).copied()))
    }
}

/// Distinct and total oracle queries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryCounter {
    seen: HashSet<[u32; 3]>,
    total: u64,
}

impl QueryCounter {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&mut self, t: [u32; 3]) {
        self.seen.insert(t);
        self.total += 1;
    }

    pub fn distinct(&self) -> u64 {
        self.seen.len() as u64
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Adds the queries of another counter.
    pub fn merge(&mut self, other: QueryCounter) {
        self.total += other.total;
        self.seen.extend(other.seen);
    }
}

/// Random instance with background density plus one planted copy of `h`.
/// Returns the instance and the embedding (`emb[v - 1]` is the image of `v`).
pub fn plant_pattern(
    n: u32,
    h: &PatternHypergraph,
    density: f64,
    seed: u64,
) -> Result<(InstanceHypergraph, Vec<u32>), OracleError> {
    if n < h.kappa() as u32 {
        return Err(OracleError::TooFewVertices { n, kappa: h.kappa() });
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(OracleError::BadDensity(density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verts: Vec<u32> = (1..=n).collect();
    verts.shuffle(&mut rng);
    let emb: Vec<u32> = verts[..h.kappa() as usize].to_vec();
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            for c in b + 1..=n {
                if rng.gen_bool(density) {
                    edges.push([a, b, c]);
                }
            }
        }
    }
    for t in h.triples() {
        let [a, b, c] = h.orientation(*t).expect("own triple");
        edges.push([emb[a as usize - 1], emb[b as usize - 1], emb[c as usize - 1]]);
    }
    Ok((InstanceHypergraph::new(n, edges, false, None)?, emb))
}

struct Matcher<'a> {
    g: &'a InstanceHypergraph,
    /// Oriented pattern triples grouped by their largest vertex.
    by_last: Vec<Vec<[u8; 3]>>,
    kappa: usize,
}

impl<'a> Matcher<'a> {
    fn new(g: &'a InstanceHypergraph, h: &PatternHypergraph) -> Self {
        let kappa = h.kappa() as usize;
        let mut by_last = vec![Vec::new(); kappa + 1];
        for t in h.triples() {
            let o = h.orientation(*t).expect("own triple");
            by_last[t.0[2] as usize].push(o);
        }
        Matcher { g, by_last, kappa }
    }

    fn image(map: &[u32], t: [u8; 3]) -> [u32; 3] {
        [map[t[0] as usize - 1], map[t[1] as usize - 1], map[t[2] as usize - 1]]
    }

    /// Extends `map` in increasing vertex order; `visit` sees every complete embedding.
    fn extend(
        &self,
        map: &mut Vec<u32>,
        used: &mut [bool],
        counter: &mut QueryCounter,
        visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if map.len() == self.kappa {
            return visit(map);
        }
        let v = map.len() + 1;
        for x in 1..=self.g.n {
            if used[x as usize] {
                continue;
            }
            map.push(x);
            let mut ok = true;
            for &t in &self.by_last[v] {
                if !self.g.chi(Self::image(map, t), counter).expect("vertices in range") {
                    ok = false;
                    break;
                }
            }
            if ok {
                used[x as usize] = true;
                let flow = self.extend(map, used, counter, visit);
                used[x as usize] = false;
                if flow.is_break() {
                    map.pop();
                    return flow;
                }
            }
            map.pop();
        }
        ControlFlow::Continue(())
    }

    fn run(&self, counter: &mut QueryCounter, visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>) {
        let mut map = Vec::with_capacity(self.kappa);
        let mut used = vec![false; self.g.n as usize + 1];
        let _ = self.extend(&mut map, &mut used, counter, visit);
    }
}

/// Lexicographically least injective map (`emb[v - 1]` is the image of `v`)
/// under which every pattern triple is a hyperedge, or `None`.
pub fn find_subhypergraph(
    g: &InstanceHypergraph,
    h: &PatternHypergraph,
    counter: &mut QueryCounter,
) -> Option<Vec<u32>> {
    let mut out = None;
    Matcher::new(g, h).run(counter, &mut |m| {
        out = Some(m.to_vec());
        ControlFlow::Break(())
    });
    out
}

/// Every embedding, in lexicographic order.
pub fn find_all_embeddings(g: &InstanceHypergraph, h: &PatternHypergraph, counter: &mut QueryCounter) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    Matcher::new(g, h).run(counter, &mut |m| {
        out.push(m.to_vec());
        ControlFlow::Continue(())
    });
    out
}

/// Re-checks an embedding with one query per pattern triple.
pub fn verify_embedding(g: &InstanceHypergraph, h: &PatternHypergraph, emb: &[u32], counter: &mut QueryCounter) -> bool {
    if emb.len() != h.kappa() as usize || emb.iter().any(|&x| x == 0 || x > g.n) {
        return false;
    }
    let distinct: HashSet<u32> = emb.iter().copied().collect();
    distinct.len() == emb.len()
        && h.triples().iter().all(|t| {
            let o = h.orientation(*t).expect("own triple");
            g.chi(Matcher::image(emb, o), counter).unwrap_or(false)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_complete_answers() {
        let mut c = QueryCounter::new();
        assert!(!InstanceHypergraph::empty(5).chi([1, 2, 3], &mut c).unwrap());
        assert!(InstanceHypergraph::complete(5).chi([5, 1, 3], &mut c).unwrap());
        assert!(InstanceHypergraph::complete(5).chi([3, 2, 1], &mut c).unwrap());
        assert_eq!(c.total(), 3);
        assert_eq!(c.distinct(), 2);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let mut c = QueryCounter::new();
        assert_eq!(InstanceHypergraph::empty(3).chi([1, 2, 4], &mut c), Err(OracleError::OutOfRange(4, 3)));
        assert!(matches!(InstanceHypergraph::empty(3).chi([1, 1, 2], &mut c), Err(OracleError::RepeatedVertex(_))));
    }

    #[test]
    fn density_extremes() {
        let h = PatternHypergraph::k4();
        let (g, emb) = plant_pattern(9, &h, 0.0, 3).unwrap();
        let mut planted: Vec<u32> = emb.clone();
        planted.sort();
        let expect: BTreeSet<[u32; 3]> = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
            .iter()
            .map(|t| [planted[t[0]], planted[t[1]], planted[t[2]]])
            .collect();
        assert_eq!(g.hyperedges(), &expect);
        let (full, _) = plant_pattern(7, &h, 1.0, 3).unwrap();
        assert_eq!(full, InstanceHypergraph::complete(7));
    }

    #[test]
    fn planting_is_reproducible() {
        let h = PatternHypergraph::k4();
        assert_eq!(plant_pattern(10, &h, 0.3, 8).unwrap(), plant_pattern(10, &h, 0.3, 8).unwrap());
    }

    #[test]
    fn single_hyperedge_is_found() {
        let g = InstanceHypergraph::new(6, [[5, 2, 4]], false, None).unwrap();
        let mut c = QueryCounter::new();
        let e = find_subhypergraph(&g, &PatternHypergraph::single_triple(), &mut c).unwrap();
        assert_eq!(e, vec![2, 4, 5]);
    }

    #[test]
    fn star_on_vertex_one_has_no_k4() {
        let edges: Vec<[u32; 3]> = (2..=6).flat_map(|b| (b + 1..=6).map(move |c| [1, b, c])).collect();
        let g = InstanceHypergraph::new(6, edges, false, None).unwrap();
        let mut c = QueryCounter::new();
        assert_eq!(find_subhypergraph(&g, &PatternHypergraph::k4(), &mut c), None);
    }

    #[test]
    fn complete_instance_embeddings_are_all_injections() {
        let g = InstanceHypergraph::complete(5);
        let mut c = QueryCounter::new();
        assert_eq!(find_all_embeddings(&g, &PatternHypergraph::k4(), &mut c).len(), 5 * 4 * 3 * 2);
    }

    #[test]
    fn verification_uses_one_query_per_triple() {
        let h = PatternHypergraph::k4();
        let (g, emb) = plant_pattern(8, &h, 0.2, 1).unwrap();
        let mut c = QueryCounter::new();
        assert!(verify_embedding(&g, &h, &emb, &mut c));
        assert_eq!(c.total(), 4);
    }
}
