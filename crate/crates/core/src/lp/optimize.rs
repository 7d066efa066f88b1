//! Minimum LP exponent over loading schedules.
//!
//! Exhaustive mode walks the tree of schedule prefixes depth first. The LP of
//! a prefix (structural rows plus the rows of its levels) is a relaxation of
//! the LP of every completion, so its optimum is a lower bound; a subtree is
//! dropped only when that bound is strictly above the best complete schedule
//! seen so far, which keeps every minimizer. Each child tableau is the
//! parent's solved tableau with the new level's rows appended, so only a few
//! dual simplex pivots are needed per node.
//!
//! Two things tighten the bound without changing any complete schedule's
//! optimum. Every epsilon, delta and update exponent is nonnegative on the
//! feasible region, so the last level's term is at least the sum of all
//! epsilon exponents, whatever the order; the root carries that implied row.
//! The incumbent starts at the best of a few cold solves of sampled schedules.
//!
//! With `symmetry` on, relabelling by a pattern automorphism leaves every
//! schedule's LP unchanged up to renaming variables. Only schedules whose
//! sequence of vertex elements is lexicographically least in its orbit are
//! searched, and the minimizers found are closed under the automorphisms at
//! the end, so the argmin set is the same as without the reduction.

use super::exponent::{solve_schedule, structural_rows, ExponentLpError, LpOptions, ScheduleOptimum};
use super::scalar::{Overflow, Scalar, Small};
use super::simplex::{Outcome, Tableau};
use crate::complexity::{delta_form, epsilon_form, update_branches, LinearForm, VarLayout};
use crate::pattern::{LoadingSchedule, PatternHypergraph, ScheduleElement};
use crate::rational::Rational;
use num_traits::One;
use crate::schedule_enum::{heuristic_schedules, EnumError, SchedulePoset};
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptimizeMode {
    Exhaustive,
    Heuristic { budget: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    pub mode: OptimizeMode,
    pub options: LpOptions,
    /// Worker threads; `None` uses the rayon default.
    pub jobs: Option<usize>,
    /// Schedules evaluated before the heuristic stream (heuristic mode only).
    pub seeds: Vec<LoadingSchedule>,
    /// Search one schedule per automorphism orbit (exhaustive mode only).
    pub symmetry: bool,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            mode: OptimizeMode::Exhaustive,
            options: LpOptions::default(),
            jobs: None,
            seeds: Vec::new(),
            symmetry: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error(transparent)]
    Lp(#[from] ExponentLpError),
    #[error("no schedule was evaluated")]
    Empty,
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub exponent: Rational,
    /// Every minimizing schedule found, in increasing element order.
    pub argmins: Vec<LoadingSchedule>,
    /// Cold solve of the first argmin, with its audited certificate.
    pub best: ScheduleOptimum,
    /// Complete schedules whose LP was solved (one per orbit with `symmetry`).
    pub leaves: u64,
    /// Tableau solves, including prefixes.
    pub solves: u64,
    /// Subtrees cut by the bound.
    pub pruned: u64,
}

/// Minimizes the LP exponent over schedules of `h`.
pub fn optimize_over_schedules(h: &PatternHypergraph, config: &OptimizeConfig) -> Result<OptimizeResult, OptimizeError> {
    let run = || match &config.mode {
        OptimizeMode::Exhaustive => exhaustive(h, &config.options, config.symmetry),
        OptimizeMode::Heuristic { budget, seed } => heuristic(h, &config.options, &config.seeds, *budget, *seed),
    };
    match config.jobs {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| OptimizeError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    }
}

#[derive(Default)]
struct Found {
    value: Option<Rational>,
    orders: Vec<Vec<u8>>,
}

impl Found {
    fn offer(&mut self, value: Rational, order: Vec<u8>) {
        match &self.value {
            Some(v) if value > *v => {}
            Some(v) if value == *v => self.orders.push(order),
            _ => {
                self.value = Some(value);
                self.orders = vec![order];
            }
        }
    }

    fn merge(&mut self, other: Found) {
        if let Some(v) = other.value {
            for o in other.orders {
                self.offer(v.clone(), o);
            }
        }
    }
}

/// Level pieces per poset element, converted to `S` once.
struct ElementRows<S> {
    epsilon: Vec<S>,
    epsilon_const: S,
    /// `delta + branch` per update branch.
    branches: Vec<Vec<S>>,
}

fn to_scalars<S: Scalar>(f: &LinearForm) -> Result<Vec<S>, Overflow> {
    f.coeffs.iter().map(S::from_rational).collect()
}

struct Search<'a> {
    h: &'a PatternHypergraph,
    layout: VarLayout,
    poset: SchedulePoset,
    options: &'a LpOptions,
    capacity: usize,
    /// Non-identity automorphisms used to skip non-canonical vertex orders.
    symmetries: Vec<Vec<u8>>,
    best: Mutex<Option<Rational>>,
    solves: AtomicU64,
    leaves: AtomicU64,
    pruned: AtomicU64,
}

struct Node<S> {
    tableau: Tableau<S>,
    eps: Vec<S>,
    eps_const: S,
}

impl<'a> Search<'a> {
    fn element_rows<S: Scalar>(&self) -> Result<Vec<ElementRows<S>>, Overflow> {
        self.poset
            .elements()
            .iter()
            .map(|&e| {
                let eps = epsilon_form(&self.layout, e);
                let delta = delta_form(&self.layout, e);
                let branches = update_branches(self.h, &self.layout, e)
                    .iter()
                    .map(|u| to_scalars(&delta.plus(u)))
                    .collect::<Result<_, _>>()?;
                Ok(ElementRows {
                    epsilon: to_scalars(&eps)?,
                    epsilon_const: S::from_rational(&eps.constant)?,
                    branches,
                })
            })
            .collect()
    }

    fn root<S: Scalar>(&self) -> Result<Node<S>, Overflow> {
        let mut tableau = Tableau::new(self.layout.len(), self.layout.objective(), self.capacity);
        for r in structural_rows(self.h, &self.layout, self.options) {
            tableau.add_row(&r.coeffs, &r.rhs, false)?;
        }
        let mut all = LinearForm::zero(self.layout.len());
        for &e in self.poset.elements() {
            all = all.plus(&epsilon_form(&self.layout, e));
        }
        all.coeffs[self.layout.objective()] -= Rational::one();
        tableau.add_row(&all.coeffs, &-all.constant, false)?;
        tableau.solve()?;
        Ok(Node {
            tableau,
            eps: vec![S::nil(); self.layout.len()],
            eps_const: S::nil(),
        })
    }

    /// Child of `node` obtained by loading element `i`; `None` when infeasible.
    fn child<S: Scalar>(&self, node: &Node<S>, rows: &ElementRows<S>) -> Result<Option<Node<S>>, Overflow> {
        let mut eps = node.eps.clone();
        for (a, b) in eps.iter_mut().zip(&rows.epsilon) {
            if !b.is_nil() {
                *a = a.add(b)?;
            }
        }
        let eps_const = node.eps_const.add(&rows.epsilon_const)?;
        let mut tableau = node.tableau.clone();
        let t = self.layout.objective();
        let rhs = eps_const.neg()?;
        for br in &rows.branches {
            let mut coeffs = eps.clone();
            for (a, b) in coeffs.iter_mut().zip(br) {
                if !b.is_nil() {
                    *a = a.add(b)?;
                }
            }
            coeffs[t] = coeffs[t].sub(&S::unit())?;
            tableau.add_scalar_row(&coeffs, rhs.clone())?;
        }
        self.solves.fetch_add(1, Ordering::Relaxed);
        Ok(match tableau.solve()? {
            Outcome::Infeasible => None,
            Outcome::Optimal => Some(Node { tableau, eps, eps_const }),
        })
    }

    /// Whether appending element `i` keeps the vertex sequence lexicographically
    /// least among its images.
    fn canonical_with(&self, order: &[u8], i: usize) -> bool {
        let ScheduleElement::Vertex(v) = self.poset.element(i) else {
            return true;
        };
        if self.symmetries.is_empty() {
            return true;
        }
        let mut seq: Vec<u8> = order
            .iter()
            .filter_map(|&j| match self.poset.element(j as usize) {
                ScheduleElement::Vertex(u) => Some(u),
                _ => None,
            })
            .collect();
        seq.push(v);
        self.symmetries.iter().all(|s| {
            let image = seq.iter().map(|&u| s[u as usize - 1]);
            image.cmp(seq.iter().copied()) != std::cmp::Ordering::Less
        })
    }

    fn beaten(&self, value: &Rational) -> bool {
        matches!(&*self.best.lock().expect("best"), Some(b) if value > b)
    }

    fn record(&self, value: &Rational) {
        let mut best = self.best.lock().expect("best");
        if best.as_ref().is_none_or(|b| value < b) {
            *best = Some(value.clone());
        }
    }

    fn dfs<S: Scalar>(
        &self,
        rows: &[ElementRows<S>],
        node: &Node<S>,
        loaded: u128,
        order: &mut Vec<u8>,
        found: &mut Found,
    ) -> Result<(), Overflow> {
        let avail: Vec<usize> = self.poset.available(loaded).collect();
        for i in avail {
            if !self.canonical_with(order, i) {
                self.pruned.fetch_add(1, Ordering::Relaxed);
                continue;
            }
            order.push(i as u8);
            let res = self.visit(rows, node, loaded | (1u128 << i), i, order, found);
            if res.is_err() {
                self.visit_big(loaded | (1u128 << i), order, found);
            }
            order.pop();
        }
        Ok(())
    }

    fn visit<S: Scalar>(
        &self,
        rows: &[ElementRows<S>],
        node: &Node<S>,
        loaded: u128,
        i: usize,
        order: &mut Vec<u8>,
        found: &mut Found,
    ) -> Result<(), Overflow> {
        let Some(child) = self.child(node, &rows[i])? else {
            self.pruned.fetch_add(1, Ordering::Relaxed);
            return Ok(());
        };
        self.descend(rows, child, loaded, order, found)
    }

    fn descend<S: Scalar>(
        &self,
        rows: &[ElementRows<S>],
        child: Node<S>,
        loaded: u128,
        order: &mut Vec<u8>,
        found: &mut Found,
    ) -> Result<(), Overflow> {
        let value = child.tableau.value();
        if self.beaten(&value) {
            self.pruned.fetch_add(1, Ordering::Relaxed);
            return Ok(());
        }
        if loaded == self.poset.full_mask() {
            self.leaves.fetch_add(1, Ordering::Relaxed);
            self.record(&value);
            found.offer(value, order.clone());
            return Ok(());
        }
        self.dfs(rows, &child, loaded, order, found)
    }

    /// Solves the levels of `order` from `root` and searches below.
    fn visit_prefix<S: Scalar>(
        &self,
        rows: &[ElementRows<S>],
        root: &Node<S>,
        loaded: u128,
        order: &mut Vec<u8>,
        found: &mut Found,
    ) -> Result<(), Overflow> {
        let mut node: Option<Node<S>> = None;
        for &i in order.iter() {
            match self.child(node.as_ref().unwrap_or(root), &rows[i as usize])? {
                Some(n) => node = Some(n),
                None => {
                    self.pruned.fetch_add(1, Ordering::Relaxed);
                    return Ok(());
                }
            }
        }
        match node {
            Some(n) => self.descend(rows, n, loaded, order, found),
            None => self.dfs(rows, root, loaded, order, found),
        }
    }

    /// Re-solves the prefix `order` from scratch in arbitrary precision and
    /// continues the subtree there.
    fn visit_big(&self, loaded: u128, order: &mut Vec<u8>, found: &mut Found) {
        let rows = self.element_rows::<Rational>().expect("no overflow");
        let mut node = self.root::<Rational>().expect("no overflow");
        for &i in order.iter() {
            match self.child(&node, &rows[i as usize]).expect("no overflow") {
                Some(n) => node = n,
                None => {
                    self.pruned.fetch_add(1, Ordering::Relaxed);
                    return;
                }
            }
        }
        self.descend(&rows, node, loaded, order, found).expect("no overflow");
    }
}

/// Prefixes of this length are the units of parallel work.
const SPLIT_DEPTH: usize = 2;

fn exhaustive(h: &PatternHypergraph, options: &LpOptions, symmetry: bool) -> Result<OptimizeResult, OptimizeError> {
    let poset = SchedulePoset::new(h)?;
    let layout = VarLayout::new(h);
    let nstructural = structural_rows(h, &layout, options).len();
    let nlevel: usize = poset
        .elements()
        .iter()
        .map(|&e| update_branches(h, &layout, e).len())
        .sum();
    let automorphisms = h.automorphisms();
    let search = Search {
        h,
        layout,
        poset,
        options,
        capacity: nstructural + nlevel + 1,
        symmetries: if symmetry { automorphisms[1..].to_vec() } else { Vec::new() },
        best: Mutex::new(incumbent(h, options)?),
        solves: AtomicU64::new(0),
        leaves: AtomicU64::new(0),
        pruned: AtomicU64::new(0),
    };
    let mut prefixes: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..SPLIT_DEPTH.min(search.poset.len()) {
        prefixes = prefixes
            .into_iter()
            .flat_map(|p| {
                let loaded = p.iter().fold(0u128, |m, &i| m | (1u128 << i));
                search
                    .poset
                    .available(loaded)
                    .filter(|&i| search.canonical_with(&p, i))
                    .map(|i| {
                        let mut q = p.clone();
                        q.push(i as u8);
                        q
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    let small = search.element_rows::<Small>().and_then(|r| Ok((r, search.root::<Small>()?)));
    let found: Vec<Found> = prefixes
        .par_iter()
        .map(|prefix| {
            let mut found = Found::default();
            let mut order = prefix.clone();
            let loaded = prefix.iter().fold(0u128, |m, &i| m | (1u128 << i));
            let done = match &small {
                Ok((rows, root)) => search.visit_prefix(rows, root, loaded, &mut order, &mut found).is_ok(),
                Err(_) => false,
            };
            if !done {
                found = Found::default();
                search.visit_big(loaded, &mut order, &mut found);
            }
            found
        })
        .collect();
    let mut all = Found::default();
    for f in found {
        all.merge(f);
    }
    let leaves = search.leaves.load(Ordering::Relaxed);
    let solves = search.solves.load(Ordering::Relaxed);
    let pruned = search.pruned.load(Ordering::Relaxed);
    let argmins: Vec<LoadingSchedule> = {
        let elements = search.poset.elements();
        let mut orders: Vec<Vec<u8>> = Vec::new();
        for o in &all.orders {
            for sigma in &automorphisms {
                orders.push(
                    o.iter()
                        .map(|&i| {
                            let e = elements[i as usize].relabel(sigma);
                            search.poset.index_of(e).expect("automorphism maps elements to elements") as u8
                        })
                        .collect(),
                );
            }
        }
        orders.sort();
        orders.dedup();
        orders.iter().map(|o| search.poset.schedule_of(o)).collect()
    };
    finish(h, options, all.value, argmins, leaves, solves, pruned)
}

/// Number of sampled schedules solved cold to start the incumbent.
const INCUMBENT_SAMPLES: usize = 16;

fn incumbent(h: &PatternHypergraph, options: &LpOptions) -> Result<Option<Rational>, OptimizeError> {
    let mut best: Option<Rational> = None;
    for s in heuristic_schedules(h, INCUMBENT_SAMPLES, crate::DEFAULT_SEED)? {
        let lp = super::exponent::build_exponent_lp(h, &s, options).map_err(ExponentLpError::from)?;
        if let Some(v) = super::simplex::solve_exact(&lp).map_err(ExponentLpError::from)?.optimum {
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    Ok(best)
}

fn finish(
    h: &PatternHypergraph,
    options: &LpOptions,
    value: Option<Rational>,
    argmins: Vec<LoadingSchedule>,
    leaves: u64,
    solves: u64,
    pruned: u64,
) -> Result<OptimizeResult, OptimizeError> {
    let exponent = value.ok_or(OptimizeError::Empty)?;
    let first = argmins.first().ok_or(OptimizeError::Empty)?;
    let best = solve_schedule(h, first, options)?;
    debug_assert_eq!(best.exponent, exponent);
    Ok(OptimizeResult {
        exponent,
        argmins,
        best,
        leaves,
        solves,
        pruned,
    })
}

fn heuristic(
    h: &PatternHypergraph,
    options: &LpOptions,
    seeds: &[LoadingSchedule],
    budget: usize,
    seed: u64,
) -> Result<OptimizeResult, OptimizeError> {
    let poset = SchedulePoset::new(h)?;
    let mut candidates: Vec<LoadingSchedule> = seeds.to_vec();
    if budget > 0 {
        candidates.extend(heuristic_schedules(h, budget, seed)?);
    }
    let mut orders: Vec<Vec<u8>> = candidates.iter().filter_map(|s| poset.order_of(s)).collect();
    orders.sort();
    orders.dedup();
    let plain = LpOptions {
        margin: options.margin.clone(),
        relax_vertex: options.relax_vertex,
    };
    let values: Vec<Result<(Rational, Vec<u8>), ExponentLpError>> = orders
        .par_iter()
        .map(|o| {
            let s = poset.schedule_of(o);
            let lp = super::exponent::build_exponent_lp(h, &s, &plain)?;
            let sol = super::simplex::solve_exact(&lp)?;
            Ok((sol.optimum.expect("feasible"), o.clone()))
        })
        .collect();
    let mut found = Found::default();
    for v in values {
        let (value, order) = v?;
        found.offer(value, order);
    }
    let n = orders.len() as u64;
    let argmins = found.orders.iter().map(|o| poset.schedule_of(o)).collect();
    finish(h, options, found.value, argmins, n, n, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::exponent::build_exponent_lp;
    use crate::lp::simplex::solve_exact;
    use crate::schedule_enum::enumerate_complete_schedules;

    /// Brute force: one cold LP per schedule.
    fn brute_force(h: &PatternHypergraph) -> (Rational, Vec<LoadingSchedule>) {
        let mut found = Found::default();
        let poset = SchedulePoset::new(h).unwrap();
        for s in enumerate_complete_schedules(h).unwrap() {
            let lp = build_exponent_lp(h, &s, &LpOptions::default()).unwrap();
            let v = solve_exact(&lp).unwrap().optimum.unwrap();
            found.offer(v, poset.order_of(&s).unwrap());
        }
        found.orders.sort();
        (found.value.unwrap(), found.orders.iter().map(|o| poset.schedule_of(o)).collect())
    }

    #[test]
    fn single_triple_search_matches_brute_force() {
        let h = PatternHypergraph::single_triple();
        let r = optimize_over_schedules(&h, &OptimizeConfig::default()).unwrap();
        let (v, argmins) = brute_force(&h);
        assert_eq!(r.exponent, v);
        assert_eq!(r.argmins, argmins);
    }

    #[test]
    fn heuristic_keeps_an_injected_seed() {
        let h = PatternHypergraph::single_triple();
        let s = LoadingSchedule::parse_compact("v1 v2 v3 p12 p13 p23 t123").unwrap();
        let cfg = OptimizeConfig {
            mode: OptimizeMode::Heuristic { budget: 0, seed: 1 },
            seeds: vec![s.clone()],
            ..Default::default()
        };
        let r = optimize_over_schedules(&h, &cfg).unwrap();
        assert_eq!(r.argmins, vec![s]);
    }

    #[test]
    fn symmetry_reduction_keeps_every_argmin() {
        let h = PatternHypergraph::new(4, [[1, 2, 3], [1, 2, 4]], false).unwrap();
        let on = optimize_over_schedules(&h, &OptimizeConfig::default()).unwrap();
        let off = optimize_over_schedules(
            &h,
            &OptimizeConfig {
                symmetry: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(on.exponent, off.exponent);
        assert_eq!(on.argmins, off.argmins);
        assert!(on.leaves < off.leaves);
        let (v, argmins) = brute_force(&h);
        assert_eq!(off.exponent, v);
        assert_eq!(off.argmins, argmins);
    }
}
