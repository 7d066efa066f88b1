//! Enumeration of complete loading schedules.
//!
//! A complete schedule loads every element of Σ1 ∪ Σ2 ∪ Σ3 exactly once, each
//! after its prerequisites, so the complete schedules are exactly the linear
//! extensions of the containment order (vertex < pair < triple).

use crate::pattern::{LoadingSchedule, PatternHypergraph, ScheduleElement};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{HashMap, HashSet};

/// Largest poset counted by memoised downset recursion; larger ones are counted
/// by walking every extension.
pub const DP_MAX_ELEMENTS: usize = 24;

const MAX_ELEMENTS: usize = 128;

/// Consecutive duplicate proposals after which a heuristic stream gives up.
const STALE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumError {
    #[error("pattern vertex {0} lies in no triple")]
    IsolatedVertex(u8),
    #[error("pattern has {0} schedule elements; at most {MAX_ELEMENTS} are supported")]
    TooManyElements(usize),
    #[error("heuristic search needs a budget of at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationMode {
    Exhaustive,
    CountOnly,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationConfig {
    pub mode: EnumerationMode,
    /// Maximum number of schedules yielded in heuristic mode.
    pub budget: usize,
    pub seed: u64,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            mode: EnumerationMode::Exhaustive,
            budget: 1000,
            seed: crate::DEFAULT_SEED,
        }
    }
}

/// Containment order on the elements of a pattern, elements indexed in the
/// fixed element order.
#[derive(Debug, Clone)]
pub struct SchedulePoset {
    elements: Vec<ScheduleElement>,
    /// Bit `j` of `preds[i]` is set when element `j` must precede element `i`
    /// directly (vertex of a pair, pair of a triple).
    preds: Vec<u128>,
}

impl SchedulePoset {
    pub fn new(h: &PatternHypergraph) -> Result<Self, EnumError> {
        if let Some(&v) = h.isolated_vertices().first() {
            return Err(EnumError::IsolatedVertex(v));
        }
        let elements = h.elements();
        if elements.len() > MAX_ELEMENTS {
            return Err(EnumError::TooManyElements(elements.len()));
        }
        let index: HashMap<ScheduleElement, usize> =
            elements.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let bit = |e: ScheduleElement| 1u128 << index[&e];
        let preds = elements
            .iter()
            .map(|e| match *e {
                ScheduleElement::Vertex(_) => 0,
                ScheduleElement::Pair(p) => p.0.iter().map(|&v| bit(ScheduleElement::Vertex(v))).sum(),
                ScheduleElement::Triple(t) => {
                    t.pairs().iter().map(|&p| bit(ScheduleElement::Pair(p))).sum()
                }
            })
            .collect();
        Ok(SchedulePoset { elements, preds })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ScheduleElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> ScheduleElement {
        self.elements[i]
    }

    pub fn preds(&self, i: usize) -> u128 {
        self.preds[i]
    }

    pub fn full_mask(&self) -> u128 {
        if self.len() == 128 {
            u128::MAX
        } else {
            (1u128 << self.len()) - 1
        }
    }

    /// Whether element `i` can be loaded next after the elements in `loaded`.
    pub fn is_available(&self, loaded: u128, i: usize) -> bool {
        loaded & (1 << i) == 0 && self.preds[i] & !loaded == 0
    }

    /// Elements loadable next, ascending.
    pub fn available(&self, loaded: u128) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.is_available(loaded, i))
    }

    /// Index of `e` in the fixed element order.
    pub fn index_of(&self, e: ScheduleElement) -> Option<usize> {
        self.elements.binary_search(&e).ok()
    }

    pub fn schedule_of(&self, order: &[u8]) -> LoadingSchedule {
        LoadingSchedule(order.iter().map(|&i| self.elements[i as usize]).collect())
    }

    /// Element indices of a complete schedule, or `None` when `s` is not one.
    pub fn order_of(&self, s: &LoadingSchedule) -> Option<Vec<u8>> {
        if s.len() != self.len() {
            return None;
        }
        let mut loaded = 0u128;
        let mut out = Vec::with_capacity(s.len());
        for e in s.elements() {
            let i = self.index_of(*e)?;
            if !self.is_available(loaded, i) {
                return None;
            }
            loaded |= 1 << i;
            out.push(i as u8);
        }
        Some(out)
    }

    /// Number of linear extensions.
    pub fn count_linear_extensions(&self) -> u128 {
        if self.len() <= DP_MAX_ELEMENTS {
            let mut memo = HashMap::new();
            self.count_from(0, &mut memo)
        } else {
            self.count_by_walking(0)
        }
    }

    fn count_from(&self, loaded: u128, memo: &mut HashMap<u128, u128>) -> u128 {
        if loaded == self.full_mask() {
            return 1;
        }
        if let Some(&c) = memo.get(&loaded) {
            return c;
        }
        let total = (0..self.len())
            .filter(|&i| self.is_available(loaded, i))
            .map(|i| self.count_from(loaded | (1 << i), memo))
            .sum();
        memo.insert(loaded, total);
        total
    }

    fn count_by_walking(&self, loaded: u128) -> u128 {
        if loaded == self.full_mask() {
            return 1;
        }
        (0..self.len())
            .filter(|&i| self.is_available(loaded, i))
            .map(|i| self.count_by_walking(loaded | (1 << i)))
            .sum()
    }
}

/// Lexicographic iterator over the linear extensions of a [`SchedulePoset`].
pub struct Extensions {
    poset: SchedulePoset,
    order: Vec<u8>,
    loaded: u128,
    started: bool,
    done: bool,
}

impl Extensions {
    pub fn new(poset: SchedulePoset) -> Self {
        Extensions {
            poset,
            order: Vec::new(),
            loaded: 0,
            started: false,
            done: false,
        }
    }

    /// Extends the current prefix with the smallest available element until full.
    fn descend(&mut self) {
        while self.order.len() < self.poset.len() {
            let i = self
                .poset
                .available(self.loaded)
                .next()
                .expect("a prefix of a linear extension always extends");
            self.order.push(i as u8);
            self.loaded |= 1 << i;
        }
    }

    /// Replaces the deepest element that has a larger sibling; false when exhausted.
    fn advance(&mut self) -> bool {
        while let Some(last) = self.order.pop() {
            self.loaded &= !(1u128 << last);
            let next = (last as usize + 1..self.poset.len()).find(|&i| self.poset.is_available(self.loaded, i));
            if let Some(i) = next {
                self.order.push(i as u8);
                self.loaded |= 1 << i;
                return true;
            }
        }
        false
    }
}

impl Iterator for Extensions {
    type Item = LoadingSchedule;

    fn next(&mut self) -> Option<LoadingSchedule> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        self.descend();
        Some(self.poset.schedule_of(&self.order))
    }
}

/// Every complete schedule of `h`, in lexicographic order of the fixed element order.
pub fn enumerate_complete_schedules(h: &PatternHypergraph) -> Result<Extensions, EnumError> {
    Ok(Extensions::new(SchedulePoset::new(h)?))
}

pub fn count_complete_schedules(h: &PatternHypergraph) -> Result<u128, EnumError> {
    Ok(SchedulePoset::new(h)?.count_linear_extensions())
}

/// Seeded stream of distinct complete schedules: random topological sorts
/// interleaved with random adjacent transpositions of the last schedule.
pub struct HeuristicSchedules {
    poset: SchedulePoset,
    rng: ChaCha8Rng,
    seen: HashSet<Vec<u8>>,
    current: Option<Vec<u8>>,
    remaining: usize,
}

impl HeuristicSchedules {
    const RESTART_PROBABILITY: f64 = 0.05;

    pub fn new(poset: SchedulePoset, budget: usize, seed: u64) -> Result<Self, EnumError> {
        if budget == 0 {
            return Err(EnumError::ZeroBudget);
        }
        Ok(HeuristicSchedules {
            poset,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seen: HashSet::new(),
            current: None,
            remaining: budget,
        })
    }

    fn random_topological_sort(&mut self) -> Vec<u8> {
        let mut loaded = 0u128;
        let mut order = Vec::with_capacity(self.poset.len());
        while order.len() < self.poset.len() {
            let avail: Vec<usize> = self.poset.available(loaded).collect();
            let &i = avail.choose(&mut self.rng).expect("extension exists");
            order.push(i as u8);
            loaded |= 1 << i;
        }
        order
    }

    fn transposed(&mut self, base: &[u8]) -> Vec<u8> {
        let swappable: Vec<usize> = (0..base.len().saturating_sub(1))
            .filter(|&p| self.poset.preds(base[p + 1] as usize) & (1 << base[p]) == 0)
            .collect();
        let mut out = base.to_vec();
        if let Some(&p) = swappable.choose(&mut self.rng) {
            out.swap(p, p + 1);
        }
        out
    }
}

impl Iterator for HeuristicSchedules {
    type Item = LoadingSchedule;

    fn next(&mut self) -> Option<LoadingSchedule> {
        if self.remaining == 0 {
            return None;
        }
        for _ in 0..STALE_LIMIT {
            let candidate = match self.current.clone() {
                Some(cur) if !self.rng.gen_bool(Self::RESTART_PROBABILITY) => self.transposed(&cur),
                _ => self.random_topological_sort(),
            };
            if self.seen.insert(candidate.clone()) {
                self.remaining -= 1;
                let out = self.poset.schedule_of(&candidate);
                self.current = Some(candidate);
                return Some(out);
            }
            self.current = Some(candidate);
        }
        self.remaining = 0;
        None
    }
}

pub fn heuristic_schedules(
    h: &PatternHypergraph,
    budget: usize,
    seed: u64,
) -> Result<HeuristicSchedules, EnumError> {
    HeuristicSchedules::new(SchedulePoset::new(h)?, budget, seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnumerationOutput {
    Count(u128),
    Schedules(Vec<LoadingSchedule>),
}

/// Dispatches on `config.mode`.
pub fn run_enumeration(
    h: &PatternHypergraph,
    config: &EnumerationConfig,
) -> Result<EnumerationOutput, EnumError> {
    Ok(match config.mode {
        EnumerationMode::CountOnly => EnumerationOutput::Count(count_complete_schedules(h)?),
        EnumerationMode::Exhaustive => {
            EnumerationOutput::Schedules(enumerate_complete_schedules(h)?.collect())
        }
        EnumerationMode::Heuristic => {
            EnumerationOutput::Schedules(heuristic_schedules(h, config.budget, config.seed)?.collect())
        }
    })
}
