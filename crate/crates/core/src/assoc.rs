//! Ternary associativity: brute-force checks, certificates and the reduction
//! to finding the seven-vertex pattern in a weighted directed instance.
//!
//! Domain elements are `1..=n`.

use crate::oracle::{InstanceHypergraph, OracleError, QueryCounter};
use crate::pattern::PatternHypergraph;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssocError {
    #[error("table has {got} entries, expected n^3 = {expected}")]
    TableSize { got: usize, expected: usize },
    #[error("table entry {index} is {value}, outside 1..={n}")]
    ValueOutOfRange { index: usize, value: u32, n: u32 },
    #[error("domain size must be positive")]
    EmptyDomain,
}

/// Total map `X^3 -> X` stored row-major: entry `((a-1) n + (b-1)) n + (c-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryOperator {
    n: u32,
    table: Vec<u32>,
}

impl TernaryOperator {
    pub fn new(n: u32, table: Vec<u32>) -> Result<Self, AssocError> {
        if n == 0 {
            return Err(AssocError::EmptyDomain);
        }
        let expected = (n as usize).pow(3);
        if table.len() != expected {
            return Err(AssocError::TableSize {
                got: table.len(),
                expected,
            });
        }
        if let Some((index, &value)) = table.iter().enumerate().find(|(_, &v)| v == 0 || v > n) {
            return Err(AssocError::ValueOutOfRange { index, value, n });
        }
        Ok(TernaryOperator { n, table })
    }

    pub fn from_fn(n: u32, f: impl Fn(u32, u32, u32) -> u32) -> Result<Self, AssocError> {
        let mut table = Vec::with_capacity((n as usize).pow(3));
        for a in 1..=n {
            for b in 1..=n {
                for c in 1..=n {
                    table.push(f(a, b, c));
                }
            }
        }
        Self::new(n, table)
    }

    /// `(a + b + c) mod n`, shifted to `1..=n`.
    pub fn modular_sum(n: u32) -> Self {
        Self::from_fn(n, |a, b, c| (a + b + c - 3) % n + 1).expect("in range")
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    fn index(&self, a: u32, b: u32, c: u32) -> usize {
        let n = self.n as usize;
        ((a as usize - 1) * n + (b as usize - 1)) * n + (c as usize - 1)
    }

    pub fn apply(&self, a: u32, b: u32, c: u32) -> u32 {
        self.table[self.index(a, b, c)]
    }

    /// Overwrites one entry.
    pub fn set(&mut self, a: u32, b: u32, c: u32, value: u32) -> Result<(), AssocError> {
        if value == 0 || value > self.n {
            return Err(AssocError::ValueOutOfRange {
                index: self.index(a, b, c),
                value,
                n: self.n,
            });
        }
        let i = self.index(a, b, c);
        self.table[i] = value;
        Ok(())
    }
}

fn tuples5(n: u32) -> impl Iterator<Item = [u32; 5]> {
    let n5 = (n as u64).pow(5);
    (0..n5).map(move |mut i| {
        let mut t = [0u32; 5];
        for slot in t.iter_mut().rev() {
            *slot = (i % n as u64) as u32 + 1;
            i /= n as u64;
        }
        t
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Associativity {
    Associative,
    /// First 5-tuple in lexicographic order where the three bracketings disagree.
    Violation { tuple: [u32; 5] },
}

/// Exhaustive check of `F(F(a,b,c),d,e) = F(a,F(b,c,d),e) = F(a,b,F(c,d,e))`.
pub fn is_associative(f: &TernaryOperator) -> Associativity {
    tuples5(f.n)
        .find(|&[a, b, c, d, e]| {
            let left = f.apply(f.apply(a, b, c), d, e);
            let mid = f.apply(a, f.apply(b, c, d), e);
            let right = f.apply(a, b, f.apply(c, d, e));
            left != mid || mid != right
        })
        .map_or(Associativity::Associative, |tuple| Associativity::Violation { tuple })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CertCase {
    /// `F(F(a1,a2,a3),a4,a5) != F(a1,F(a2,a3,a4),a5)`.
    #[serde(rename = "i")]
    I,
    /// `F(a1,F(a2,a3,a4),a5) != F(a1,a2,F(a3,a4,a5))`.
    #[serde(rename = "ii")]
    II,
}

impl fmt::Display for CertCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertCase::I => "i",
            CertCase::II => "ii",
        })
    }
}

impl std::str::FromStr for CertCase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "i" => Ok(CertCase::I),
            "ii" => Ok(CertCase::II),
            other => Err(format!("unknown case {other:?}, expected i or ii")),
        }
    }
}

/// Seven domain elements `a1..a7`.
///
/// Case i: `F(a1,a2,a3) = a6`, `F(a2,a3,a4) = a7`, `F(a6,a4,a5) != F(a1,a7,a5)`.
/// Case ii: `F(a2,a3,a4) = a6`, `F(a3,a4,a5) = a7`, `F(a1,a6,a5) != F(a1,a2,a7)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssocCertificate {
    pub case: CertCase,
    pub tuple: [u32; 7],
}

impl AssocCertificate {
    /// Completes a 5-tuple with the two intermediate products.
    pub fn complete(f: &TernaryOperator, case: CertCase, a: [u32; 5]) -> Self {
        let [a1, a2, a3, a4, a5] = a;
        let (a6, a7) = match case {
            CertCase::I => (f.apply(a1, a2, a3), f.apply(a2, a3, a4)),
            CertCase::II => (f.apply(a2, a3, a4), f.apply(a3, a4, a5)),
        };
        AssocCertificate {
            case,
            tuple: [a1, a2, a3, a4, a5, a6, a7],
        }
    }
}

/// The two compared sides of a case, each as (outer triple) with the
/// intermediate products substituted.
fn sides(case: CertCase, a: &[u32; 7]) -> ([u32; 3], [u32; 3], [u32; 3], [u32; 3]) {
    let [a1, a2, a3, a4, a5, a6, a7] = *a;
    match case {
        // defining triples, then the two compared triples
        CertCase::I => ([a1, a2, a3], [a2, a3, a4], [a6, a4, a5], [a1, a7, a5]),
        CertCase::II => ([a2, a3, a4], [a3, a4, a5], [a1, a6, a5], [a1, a2, a7]),
    }
}

/// Re-evaluates the three defining conditions with at most four lookups.
pub fn verify_certificate(f: &TernaryOperator, cert: &AssocCertificate) -> bool {
    if cert.tuple.iter().any(|&x| x == 0 || x > f.n) {
        return false;
    }
    let (d1, d2, l, r) = sides(cert.case, &cert.tuple);
    let at = |t: [u32; 3]| f.apply(t[0], t[1], t[2]);
    at(d1) == cert.tuple[5] && at(d2) == cert.tuple[6] && at(l) != at(r)
}

/// First certificate of the given case in lexicographic order of `a1..a5`.
pub fn find_certificate(f: &TernaryOperator, case: CertCase) -> Option<AssocCertificate> {
    tuples5(f.n)
        .map(|a| AssocCertificate::complete(f, case, a))
        .find(|c| verify_certificate(f, c))
}

/// Directed hyperedges of the case pattern in query orientation.
pub fn case_pattern_edges(case: CertCase) -> [[u8; 3]; 4] {
    match case {
        CertCase::I => [[1, 2, 3], [2, 3, 4], [6, 4, 5], [1, 7, 5]],
        CertCase::II => [[2, 3, 4], [3, 4, 5], [1, 6, 5], [1, 2, 7]],
    }
}

/// Seven-vertex directed pattern of the case (`H7` for case i, its mirror
/// image under `1<->5, 2<->4, 6<->7` for case ii).
pub fn case_pattern(case: CertCase) -> PatternHypergraph {
    PatternHypergraph::new(7, case_pattern_edges(case), true).expect("well formed")
}

/// Weighted directed instance over `X` together with the case pattern.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub case: CertCase,
    pub instance: InstanceHypergraph,
    pub pattern: PatternHypergraph,
}

/// Every ordered triple `(a,b,c)` of `X^3` is a hyperedge of weight `F(a,b,c)`.
pub fn build_reduction(f: &TernaryOperator, case: CertCase) -> Reduction {
    let n = f.n;
    let mut weights = BTreeMap::new();
    for a in 1..=n {
        for b in 1..=n {
            for c in 1..=n {
                weights.insert([a, b, c], f.apply(a, b, c));
            }
        }
    }
    let edges: Vec<[u32; 3]> = weights.keys().copied().collect();
    let instance = InstanceHypergraph::new(n, edges, true, Some(weights)).expect("triples in range");
    Reduction {
        case,
        instance,
        pattern: case_pattern(case),
    }
}

impl Reduction {
    fn weight(&self, t: [u32; 3], counter: &mut QueryCounter) -> Result<u32, OracleError> {
        Ok(self.instance.weight(t, counter)?.expect("every ordered triple is weighted"))
    }

    /// Occurrence predicate on a map `phi` of the seven pattern vertices into
    /// `X` (not necessarily injective): the first two edges carry weights
    /// `phi(6)` and `phi(7)`, the last two carry different weights. Uses one
    /// query per pattern edge.
    pub fn is_occurrence(&self, phi: &[u32; 7], counter: &mut QueryCounter) -> Result<bool, OracleError> {
        let (d1, d2, l, r) = sides(self.case, phi);
        Ok(self.weight(d1, counter)? == phi[5]
            && self.weight(d2, counter)? == phi[6]
            && self.weight(l, counter)? != self.weight(r, counter)?)
    }

    fn search(&self, counter: &mut QueryCounter, all: bool) -> Vec<[u32; 7]> {
        let n = self.instance.n();
        let mut out = Vec::new();
        for a in tuples5(n) {
            let [a1, a2, a3, a4, a5] = a;
            let (t6, t7) = match self.case {
                CertCase::I => ([a1, a2, a3], [a2, a3, a4]),
                CertCase::II => ([a2, a3, a4], [a3, a4, a5]),
            };
            // phi(6) and phi(7) are forced by the first two weights.
            let a6 = self.weight(t6, counter).expect("in range");
            let a7 = self.weight(t7, counter).expect("in range");
            let phi = [a1, a2, a3, a4, a5, a6, a7];
            let (_, _, l, r) = sides(self.case, &phi);
            if self.weight(l, counter).expect("in range") != self.weight(r, counter).expect("in range") {
                out.push(phi);
                if !all {
                    break;
                }
            }
        }
        out
    }

    /// First occurrence in lexicographic order.
    pub fn find_occurrence(&self, counter: &mut QueryCounter) -> Option<[u32; 7]> {
        self.search(counter, false).into_iter().next()
    }

    /// Every occurrence in lexicographic order.
    pub fn occurrences(&self, counter: &mut QueryCounter) -> Vec<[u32; 7]> {
        self.search(counter, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_sum_is_associative() {
        for n in 1..=5 {
            assert_eq!(is_associative(&TernaryOperator::modular_sum(n)), Associativity::Associative);
        }
    }

    #[test]
    fn constant_is_associative() {
        let f = TernaryOperator::from_fn(3, |_, _, _| 2).unwrap();
        assert_eq!(is_associative(&f), Associativity::Associative);
        assert_eq!(find_certificate(&f, CertCase::I), None);
        assert_eq!(find_certificate(&f, CertCase::II), None);
    }

    #[test]
    fn perturbed_sum_has_verified_certificate() {
        let mut f = TernaryOperator::modular_sum(5);
        f.set(1, 1, 1, 5).unwrap();
        assert!(matches!(is_associative(&f), Associativity::Violation { .. }));
        let c = find_certificate(&f, CertCase::I).expect("violation");
        assert!(verify_certificate(&f, &c));
    }

    #[test]
    fn corrupted_certificate_fails() {
        let mut f = TernaryOperator::modular_sum(4);
        f.set(2, 3, 1, 1).unwrap();
        let mut c = find_certificate(&f, CertCase::I).unwrap();
        c.tuple[5] = c.tuple[5] % 4 + 1;
        assert!(!verify_certificate(&f, &c));
    }

    #[test]
    fn completion_of_violating_tuple_is_valid() {
        let mut f = TernaryOperator::modular_sum(3);
        f.set(1, 2, 3, 3).unwrap();
        if let Associativity::Violation { tuple } = is_associative(&f) {
            let c1 = AssocCertificate::complete(&f, CertCase::I, tuple);
            let c2 = AssocCertificate::complete(&f, CertCase::II, tuple);
            assert!(verify_certificate(&f, &c1) || verify_certificate(&f, &c2));
        } else {
            panic!("perturbation should break associativity");
        }
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(matches!(TernaryOperator::new(2, vec![1; 7]), Err(AssocError::TableSize { .. })));
        assert!(matches!(TernaryOperator::new(2, vec![3; 8]), Err(AssocError::ValueOutOfRange { .. })));
    }

    #[test]
    fn case_patterns_match_h7() {
        assert_eq!(case_pattern(CertCase::I), PatternHypergraph::h7());
        let mirrored: Vec<[u8; 3]> = case_pattern(CertCase::II).triples().iter().map(|t| t.0).collect();
        assert_eq!(mirrored, vec![[1, 2, 7], [1, 5, 6], [2, 3, 4], [3, 4, 5]]);
    }

    #[test]
    fn occurrence_check_costs_four_queries() {
        let mut f = TernaryOperator::modular_sum(3);
        f.set(1, 1, 1, 2).unwrap();
        let red = build_reduction(&f, CertCase::I);
        let mut c = QueryCounter::new();
        let phi = red.find_occurrence(&mut c).unwrap();
        let mut c = QueryCounter::new();
        assert!(red.is_occurrence(&phi, &mut c).unwrap());
        assert_eq!(c.total(), 4);
    }

    #[test]
    fn associative_operator_has_no_occurrence() {
        let red = build_reduction(&TernaryOperator::modular_sum(3), CertCase::I);
        assert_eq!(red.find_occurrence(&mut QueryCounter::new()), None);
    }
}
