//! Classical data structures of the nested walk and Monte Carlo checks of
//! their concentration properties.
//!
//! Vertex triples are ordered tuples over `1..=n`, ordered lexicographically.
//! Index sets `R` and permutations `pi` are 1-based, as in the construction of
//! `Y(R, Gamma)`.

use crate::pattern::{Pair, PatternHypergraph, Triple};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Ordered vertex triple with vertices in `1..=n`.
pub type VTriple = [u32; 3];

/// `V x V x V` for `|V| = n`, in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleUniverse {
    n: u32,
}

impl TripleUniverse {
    pub fn new(n: u32) -> Self {
        assert!(n >= 1 && (n as u64).pow(3) <= u32::MAX as u64, "universe size out of range");
        TripleUniverse { n }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn size(&self) -> u32 {
        self.n * self.n * self.n
    }

    /// 0-based position of `t` in the order.
    pub fn rank(&self, t: &VTriple) -> u32 {
        let n = self.n;
        ((t[0] - 1) * n + (t[1] - 1)) * n + (t[2] - 1)
    }

    pub fn unrank(&self, i: u32) -> VTriple {
        let n = self.n;
        [i / (n * n) + 1, (i / n) % n + 1, i % n + 1]
    }

    pub fn contains(&self, t: &VTriple) -> bool {
        t.iter().all(|&v| v >= 1 && v <= self.n)
    }

    pub fn iter(&self) -> impl Iterator<Item = VTriple> + '_ {
        (0..self.size()).map(|i| self.unrank(i))
    }
}

/// `Lambda`: the triples of `gamma` in increasing order, then the rest in increasing order.
pub fn build_lambda(gamma: &BTreeSet<VTriple>, u: &TripleUniverse) -> Vec<VTriple> {
    let mut out: Vec<VTriple> = gamma.iter().copied().collect();
    out.extend(u.iter().filter(|t| !gamma.contains(t)));
    out
}

/// `Y(R, Gamma) = {Lambda[a] | a in R} ∩ Gamma` with 1-based `R`.
pub fn y_of(r: &[u32], gamma: &BTreeSet<VTriple>, u: &TripleUniverse) -> BTreeSet<VTriple> {
    y_with_lambda(r, gamma, &build_lambda(gamma, u))
}

fn y_with_lambda(r: &[u32], gamma: &BTreeSet<VTriple>, lambda: &[VTriple]) -> BTreeSet<VTriple> {
    r.iter()
        .map(|&a| lambda[a as usize - 1])
        .filter(|t| gamma.contains(t))
        .collect()
}

/// `Lambda_1 = {Lambda[a] | 1 <= a <= p} ∩ Gamma`.
pub fn lambda_prefix(gamma: &BTreeSet<VTriple>, p: u32, u: &TripleUniverse) -> BTreeSet<VTriple> {
    build_lambda(gamma, u)
        .into_iter()
        .take(p as usize)
        .filter(|t| gamma.contains(t))
        .collect()
}

/// Coupling permutation of `{1..p}` (returned as `pi[a - 1] = pi(a)`).
///
/// For `a <= min(p, |Gamma|)` with `Lambda[a]` in `Lambda'_1`, `pi(a)` is the
/// position of that triple in `Lambda'`. The other indices take the unused
/// values in increasing order.
pub fn coupling_permutation(
    gamma: &BTreeSet<VTriple>,
    gamma2: &BTreeSet<VTriple>,
    p: u32,
    u: &TripleUniverse,
) -> Vec<u32> {
    coupling_with_lambdas(gamma, &build_lambda(gamma, u), &build_lambda(gamma2, u), gamma2, p)
}

fn coupling_with_lambdas(
    gamma: &BTreeSet<VTriple>,
    lambda: &[VTriple],
    lambda2: &[VTriple],
    gamma2: &BTreeSet<VTriple>,
    p: u32,
) -> Vec<u32> {
    let p = p as usize;
    let pos2: HashMap<VTriple, usize> = lambda2
        .iter()
        .take(p.min(gamma2.len()))
        .enumerate()
        .map(|(i, t)| (*t, i + 1))
        .collect();
    let mut pi = vec![0u32; p];
    let mut used = vec![false; p + 1];
    for a in 1..=p.min(gamma.len()) {
        if let Some(&b) = pos2.get(&lambda[a - 1]) {
            pi[a - 1] = b as u32;
            used[b] = true;
        }
    }
    let mut next = 1;
    for slot in pi.iter_mut().filter(|v| **v == 0) {
        while used[next] {
            next += 1;
        }
        *slot = next as u32;
        used[next] = true;
    }
    pi
}

/// `|Lambda_1 ∆ Lambda'_1| <= 2 |Gamma ∆ Gamma'|`.
pub fn check_claim_lambda(
    gamma: &BTreeSet<VTriple>,
    gamma2: &BTreeSet<VTriple>,
    p: u32,
    u: &TripleUniverse,
) -> bool {
    let l1 = lambda_prefix(gamma, p, u);
    let l2 = lambda_prefix(gamma2, p, u);
    l1.symmetric_difference(&l2).count() <= 2 * gamma.symmetric_difference(gamma2).count()
}

/// Per-trial generator, independent of how trials are scheduled on threads.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut z = seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Uniform `k`-subset of `{1..p}`, sorted.
fn random_subset<R: Rng>(rng: &mut R, p: u32, k: u32) -> Vec<u32> {
    let mut v: Vec<u32> = sample(rng, p as usize, k as usize).into_iter().map(|i| i as u32 + 1).collect();
    v.sort_unstable();
    v
}

/// Random `Gamma` of size `size` and `Gamma'` of the same size with
/// `|Gamma ∆ Gamma'| = diff` (`diff` even, at most `2 size`).
pub fn random_gamma_pair<R: Rng>(
    rng: &mut R,
    u: &TripleUniverse,
    size: u32,
    diff: u32,
) -> (BTreeSet<VTriple>, BTreeSet<VTriple>) {
    assert!(diff.is_multiple_of(2) && diff / 2 <= size && size + diff / 2 <= u.size());
    let swap = diff / 2;
    let picked: Vec<VTriple> = sample(rng, u.size() as usize, (size + swap) as usize)
        .into_iter()
        .map(|i| u.unrank(i as u32))
        .collect();
    let gamma: BTreeSet<VTriple> = picked[..size as usize].iter().copied().collect();
    let mut gamma2: BTreeSet<VTriple> = picked[swap as usize..].iter().copied().collect();
    // keep the common core, replace `swap` elements
    gamma2.retain(|t| gamma.contains(t) || picked[size as usize..].contains(t));
    (gamma, gamma2)
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma3Report {
    pub trials: u64,
    pub sym_diff: usize,
    /// `22 r |Gamma ∆ Gamma'| / p + 100 ln n`.
    pub threshold: f64,
    pub frequency: f64,
    /// `1 - 2 (1/2)^(11 r |Gamma ∆ Gamma'| / p + 50 ln n)`.
    pub floor: f64,
    /// Same checks with `log` read as base 2.
    pub threshold_base2: f64,
    pub frequency_base2: f64,
    pub floor_base2: f64,
    pub max_observed: usize,
    pub meets_floor: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("need 1 <= r <= p <= n^3 (r = {r}, p = {p}, n^3 = {size})")]
    BadDraws { r: u32, p: u32, size: u32 },
    #[error("{0} pairs requested from a product of size {1}")]
    InfeasibleParameters(u64, u64),
    #[error("parameter {0} must be positive")]
    NonPositive(&'static str),
    #[error("cannot draw sets of size {size} differing in {diff} triples from {universe}")]
    BadDifference { size: u32, diff: u32, universe: u32 },
    #[error("triple level needs e <= M = {m} (got {e})")]
    TripleLevel { e: u64, m: u64 },
}

/// Monte Carlo estimate of `Pr[|Y(R,Gamma) ∆ Y(pi(R),Gamma')| <= threshold]`
/// over uniform `r`-subsets `R` of `{1..p}`.
pub fn mc_lemma3(
    gamma: &BTreeSet<VTriple>,
    gamma2: &BTreeSet<VTriple>,
    p: u32,
    r: u32,
    trials: u64,
    seed: u64,
    u: &TripleUniverse,
) -> Result<Lemma3Report, SimError> {
    if r == 0 || r > p || p > u.size() {
        return Err(SimError::BadDraws { r, p, size: u.size() });
    }
    let lambda = build_lambda(gamma, u);
    let lambda2 = build_lambda(gamma2, u);
    let pi = coupling_with_lambdas(gamma, &lambda, &lambda2, gamma2, p);
    let delta = gamma.symmetric_difference(gamma2).count();
    let base = r as f64 * delta as f64 / p as f64;
    let ln_n = (u.n() as f64).ln();
    let log2_n = (u.n() as f64).log2();
    let threshold = 22.0 * base + 100.0 * ln_n;
    let threshold_base2 = 22.0 * base + 100.0 * log2_n;
    let floor = 1.0 - 2.0 * 0.5f64.powf(11.0 * base + 50.0 * ln_n);
    let floor_base2 = 1.0 - 2.0 * 0.5f64.powf(11.0 * base + 50.0 * log2_n);
    let sizes: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let rs = if r == p { (1..=p).collect() } else { random_subset(&mut rng, p, r) };
            let mapped: Vec<u32> = rs.iter().map(|&a| pi[a as usize - 1]).collect();
            let y = y_with_lambda(&rs, gamma, &lambda);
            let y2 = y_with_lambda(&mapped, gamma2, &lambda2);
            y.symmetric_difference(&y2).count()
        })
        .collect();
    let frac = |th: f64| sizes.iter().filter(|&&s| s as f64 <= th).count() as f64 / trials.max(1) as f64;
    let frequency = frac(threshold);
    Ok(Lemma3Report {
        trials,
        sym_diff: delta,
        threshold,
        frequency,
        floor,
        threshold_base2,
        frequency_base2: frac(threshold_base2),
        floor_base2,
        max_observed: sizes.iter().copied().max().unwrap_or(0),
        meets_floor: frequency >= floor,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaClaimReport {
    pub n: u32,
    pub trials: u64,
    pub failures: u64,
    /// Fraction of instances where the claim held.
    pub frequency: f64,
    pub pass: bool,
}

/// Checks the claim on random `(Gamma, Gamma', p)`: sizes and `p` uniform,
/// sets uniform of their size.
pub fn mc_lambda_claim(n: u32, trials: u64, seed: u64) -> LambdaClaimReport {
    let u = TripleUniverse::new(n);
    let size = u.size();
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(seed, t);
            let pick = |rng: &mut ChaCha8Rng| -> BTreeSet<VTriple> {
                let k = rng.gen_range(0..=size);
                sample(rng, size as usize, k as usize).into_iter().map(|i| u.unrank(i as u32)).collect()
            };
            let g = pick(&mut rng);
            let g2 = pick(&mut rng);
            let p = rng.gen_range(1..=size);
            !check_claim_lambda(&g, &g2, p, &u)
        })
        .count() as u64;
    LambdaClaimReport {
        n,
        trials,
        failures,
        frequency: (trials - failures) as f64 / trials.max(1) as f64,
        pass: failures == 0,
    }
}

/// Sizes for [`mc_lemma3_random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Lemma3Params {
    pub gamma_size: u32,
    pub sym_diff: u32,
    pub p: u32,
    pub r: u32,
}

/// [`mc_lemma3`] on a `(Gamma, Gamma')` drawn from `seed`.
pub fn mc_lemma3_random(n: u32, params: &Lemma3Params, trials: u64, seed: u64) -> Result<Lemma3Report, SimError> {
    let u = TripleUniverse::new(n);
    let Lemma3Params { gamma_size, sym_diff, p, r } = *params;
    if sym_diff % 2 != 0 || sym_diff / 2 > gamma_size || gamma_size + sym_diff / 2 > u.size() {
        return Err(SimError::BadDifference {
            size: gamma_size,
            diff: sym_diff,
            universe: u.size(),
        });
    }
    let mut rng = trial_rng(seed, u64::MAX);
    let (g, g2) = random_gamma_pair(&mut rng, &u, gamma_size, sym_diff);
    mc_lemma3(&g, &g2, p, r, trials, seed, &u)
}

/// Pairs `(u, v)` with `u` in `V_a` and `v` in `V_b`, vertices labelled from 0.
pub type PairSet = BTreeSet<(u32, u32)>;

/// `Gamma_ijk = {(u,v,w) | (u,v) in F_ij, (u,w) in F_ik, (v,w) in F_jk}`.
pub fn gamma_of(f_ij: &PairSet, f_ik: &PairSet, f_jk: &PairSet) -> BTreeSet<VTriple> {
    let mut by_u: HashMap<u32, BTreeSet<u32>> = HashMap::new();
    for &(u, w) in f_ik {
        by_u.entry(u).or_default().insert(w);
    }
    let mut by_v: HashMap<u32, BTreeSet<u32>> = HashMap::new();
    for &(v, w) in f_jk {
        by_v.entry(v).or_default().insert(w);
    }
    let mut out = BTreeSet::new();
    for &(u, v) in f_ij {
        if let (Some(a), Some(b)) = (by_u.get(&u), by_v.get(&v)) {
            for &w in a.intersection(b) {
                out.insert([u, v, w]);
            }
        }
    }
    out
}

/// Uniform `f`-subset of `{0..ra} x {0..rb}`.
pub fn random_pairs<R: Rng>(rng: &mut R, ra: u32, rb: u32, f: u64) -> Result<PairSet, SimError> {
    let total = ra as u64 * rb as u64;
    if f > total {
        return Err(SimError::InfeasibleParameters(f, total));
    }
    Ok(sample(rng, total as usize, f as usize)
        .into_iter()
        .map(|i| ((i as u64 / rb as u64) as u32, (i as u64 % rb as u64) as u32))
        .collect())
}

/// Earlier pair level `{i,k}` used by condition (d).
#[derive(Debug, Clone)]
pub struct PriorContext {
    pub r_k: u32,
    pub f_ik: PairSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MarkedFlags {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
}

impl MarkedFlags {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c && self.d
    }
}

fn degrees_ok(degs: &[u64], f: u64, r: u64) -> bool {
    // f/(2r) <= deg <= 2f/r
    degs.iter().all(|&d| 2 * r * d >= f && r * d <= 2 * f)
}

/// Conditions (a)-(d) for a pair-level state `F_ij` over `V_i = {0..r_i}`,
/// `V_j = {0..r_j}`. Condition (d) is checked against `contexts` only.
pub fn marked_pair_check(
    f_ij: &PairSet,
    r_i: u32,
    r_j: u32,
    planted: (u32, u32),
    contexts: &[PriorContext],
) -> MarkedFlags {
    let f = f_ij.len() as u64;
    let mut deg_i = vec![0u64; r_i as usize];
    let mut deg_j = vec![0u64; r_j as usize];
    let mut nbr_j: Vec<Vec<u32>> = vec![Vec::new(); r_i as usize];
    for &(u, v) in f_ij {
        deg_i[u as usize] += 1;
        deg_j[v as usize] += 1;
        nbr_j[u as usize].push(v);
    }
    let d = contexts.iter().all(|ctx| {
        let mut nbr_k: Vec<Vec<u32>> = vec![Vec::new(); r_i as usize];
        for &(u, w) in &ctx.f_ik {
            nbr_k[u as usize].push(w);
        }
        let rk = ctx.r_k as usize;
        let mut counts = vec![0u64; r_j as usize * rk];
        for u in 0..r_i as usize {
            for &v in &nbr_j[u] {
                for &w in &nbr_k[u] {
                    counts[v as usize * rk + w as usize] += 1;
                }
            }
        }
        // count <= 11 f_ij f_ik / (r_i r_j r_k)
        let lhs_scale = r_i as u128 * r_j as u128 * ctx.r_k as u128;
        let rhs = 11 * f as u128 * ctx.f_ik.len() as u128;
        counts.iter().all(|&c| c as u128 * lhs_scale <= rhs)
    });
    MarkedFlags {
        a: f_ij.contains(&planted),
        b: degrees_ok(&deg_i, f, r_i as u64),
        c: degrees_ok(&deg_j, f, r_j as u64),
        d,
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let n = trials as f64;
    let ph = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (ph + z * z / (2.0 * n)) / denom;
    let half = z * ((ph * (1.0 - ph) + z * z / (4.0 * n)) / n).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Regularity parameters for `F_ij` with one earlier pair level `{i,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct RegularityParams {
    pub r_i: u32,
    pub r_j: u32,
    pub r_k: u32,
    pub f_ij: u64,
    pub f_ik: u64,
    /// Number of possible `k` in the union bound.
    pub kappa: u32,
}

/// `2 r_i e^(-f_ij/(8 r_i)) + 2 r_j e^(-f_ij/(8 r_j)) + r_j r_k kappa 2^(-11 f_ij f_ik/(r_i r_j r_k))`.
pub fn regularity_bound(p: &RegularityParams) -> f64 {
    let (ri, rj, rk) = (p.r_i as f64, p.r_j as f64, p.r_k as f64);
    let (fij, fik) = (p.f_ij as f64, p.f_ik as f64);
    2.0 * ri * (-fij / (8.0 * ri)).exp()
        + 2.0 * rj * (-fij / (8.0 * rj)).exp()
        + rj * rk * p.kappa as f64 * 2f64.powf(-11.0 * fij * fik / (ri * rj * rk))
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub params: RegularityParams,
    pub trials: u64,
    pub failures: u64,
    pub frequency: f64,
    pub wilson: (f64, f64),
    pub bound: f64,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
    /// The observed failure rate is consistent with the bound (Wilson lower end at most the bound).
    pub pass: bool,
}

/// Samples `F_ik` and `F_ij` uniformly and counts trials where (b), (c) or
/// (d) fails for `F_ij`.
pub fn mc_regularity(p: &RegularityParams, trials: u64, seed: u64) -> Result<RegularityReport, SimError> {
    for (name, v) in [("r_i", p.r_i), ("r_j", p.r_j), ("r_k", p.r_k)] {
        if v == 0 {
            return Err(SimError::NonPositive(name));
        }
    }
    check_fits(p.f_ij, p.r_i, p.r_j)?;
    check_fits(p.f_ik, p.r_i, p.r_k)?;
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(seed, t);
            let f_ik = random_pairs(&mut rng, p.r_i, p.r_k, p.f_ik).expect("checked");
            let f_ij = random_pairs(&mut rng, p.r_i, p.r_j, p.f_ij).expect("checked");
            let planted = f_ij.iter().next().copied().unwrap_or((0, 0));
            let flags = marked_pair_check(&f_ij, p.r_i, p.r_j, planted, &[PriorContext { r_k: p.r_k, f_ik }]);
            !(flags.b && flags.c && flags.d)
        })
        .count() as u64;
    let bound = regularity_bound(p);
    let wilson = wilson_interval(failures, trials);
    Ok(RegularityReport {
        params: *p,
        trials,
        failures,
        frequency: failures as f64 / trials.max(1) as f64,
        wilson,
        bound,
        vacuous: bound >= 1.0,
        pass: wilson.0 <= bound,
    })
}

fn check_fits(f: u64, ra: u32, rb: u32) -> Result<(), SimError> {
    let total = ra as u64 * rb as u64;
    if f > total {
        Err(SimError::InfeasibleParameters(f, total))
    } else {
        Ok(())
    }
}

/// Sizes for the swap experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct SwapParams {
    pub r_i: u32,
    pub r_j: u32,
    pub r_k: u32,
    pub f_ij: u64,
    pub f_ik: u64,
    pub f_jk: u64,
}

impl SwapParams {
    fn check(&self) -> Result<(), SimError> {
        for (name, v) in [("r_i", self.r_i), ("r_j", self.r_j), ("r_k", self.r_k)] {
            if v == 0 {
                return Err(SimError::NonPositive(name));
            }
        }
        check_fits(self.f_ij, self.r_i, self.r_j)?;
        check_fits(self.f_ik, self.r_i, self.r_k)?;
        check_fits(self.f_jk, self.r_j, self.r_k)
    }

    /// `44 f_ij f_ik f_jk / (r_i^2 r_j r_k)`.
    pub fn vertex_threshold(&self) -> f64 {
        44.0 * self.f_ij as f64 * self.f_ik as f64 * self.f_jk as f64
            / (self.r_i as f64 * self.r_i as f64 * self.r_j as f64 * self.r_k as f64)
    }

    /// `22 f_ik f_jk / (r_i r_j r_k)`.
    pub fn pair_threshold(&self) -> f64 {
        22.0 * self.f_ik as f64 * self.f_jk as f64 / (self.r_i as f64 * self.r_j as f64 * self.r_k as f64)
    }
}

/// `|Gamma ∆ Gamma'|` when vertex `u` of `V_i` is replaced by a fresh `u2`,
/// every pair `(u, .)` of `F_ij` and `F_ik` moving to `(u2, .)`.
pub fn vertex_swap_delta(f_ij: &PairSet, f_ik: &PairSet, f_jk: &PairSet, u: u32, u2: u32) -> usize {
    let mv = |f: &PairSet| -> PairSet { f.iter().map(|&(a, b)| if a == u { (u2, b) } else { (a, b) }).collect() };
    let g = gamma_of(f_ij, f_ik, f_jk);
    let g2 = gamma_of(&mv(f_ij), &mv(f_ik), f_jk);
    g.symmetric_difference(&g2).count()
}

/// `|Gamma ∆ Gamma'|` for `F'_ij = F_ij \ {old} ∪ {new}`.
pub fn pair_swap_delta(f_ij: &PairSet, f_ik: &PairSet, f_jk: &PairSet, old: (u32, u32), new: (u32, u32)) -> usize {
    let mut f2 = f_ij.clone();
    f2.remove(&old);
    f2.insert(new);
    let g = gamma_of(f_ij, f_ik, f_jk);
    let g2 = gamma_of(&f2, f_ik, f_jk);
    g.symmetric_difference(&g2).count()
}

#[derive(Debug, Clone, Serialize)]
pub struct SwapReport {
    pub params: SwapParams,
    pub trials: u64,
    pub threshold: f64,
    pub exceedances: u64,
    pub frequency: f64,
    pub max_delta: usize,
    /// Allowed exceedance frequency.
    pub tolerance: f64,
    pub pass: bool,
}

/// Default exceedance tolerance for the swap experiments.
pub const SWAP_TOLERANCE: f64 = 0.01;

fn swap_report(params: SwapParams, trials: u64, threshold: f64, deltas: Vec<usize>) -> SwapReport {
    let exceedances = deltas.iter().filter(|&&d| d as f64 >= threshold).count() as u64;
    let frequency = exceedances as f64 / trials.max(1) as f64;
    SwapReport {
        params,
        trials,
        threshold,
        exceedances,
        frequency,
        max_delta: deltas.iter().copied().max().unwrap_or(0),
        tolerance: SWAP_TOLERANCE,
        pass: frequency <= SWAP_TOLERANCE,
    }
}

/// Frequency of `|Gamma ∆ Gamma'| >= 44 f_ij f_ik f_jk / (r_i^2 r_j r_k)` under a vertex swap.
pub fn mc_vertex_swap(p: &SwapParams, trials: u64, seed: u64) -> Result<SwapReport, SimError> {
    p.check()?;
    let deltas = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let f_ij = random_pairs(&mut rng, p.r_i, p.r_j, p.f_ij).expect("checked");
            let f_ik = random_pairs(&mut rng, p.r_i, p.r_k, p.f_ik).expect("checked");
            let f_jk = random_pairs(&mut rng, p.r_j, p.r_k, p.f_jk).expect("checked");
            let u = rng.gen_range(0..p.r_i);
            vertex_swap_delta(&f_ij, &f_ik, &f_jk, u, p.r_i)
        })
        .collect();
    Ok(swap_report(*p, trials, p.vertex_threshold(), deltas))
}

/// Frequency of `|Gamma ∆ Gamma'| >= 22 f_ik f_jk / (r_i r_j r_k)` when one pair of `F_ij` is exchanged.
pub fn mc_pair_swap(p: &SwapParams, trials: u64, seed: u64) -> Result<SwapReport, SimError> {
    p.check()?;
    let total = p.r_i as u64 * p.r_j as u64;
    if p.f_ij == 0 || p.f_ij >= total {
        return Err(SimError::InfeasibleParameters(p.f_ij, total));
    }
    let deltas = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let f_ij = random_pairs(&mut rng, p.r_i, p.r_j, p.f_ij).expect("checked");
            let f_ik = random_pairs(&mut rng, p.r_i, p.r_k, p.f_ik).expect("checked");
            let f_jk = random_pairs(&mut rng, p.r_j, p.r_k, p.f_jk).expect("checked");
            let old = *f_ij.iter().nth(rng.gen_range(0..f_ij.len())).expect("nonempty");
            let new = loop {
                let c = (rng.gen_range(0..p.r_i), rng.gen_range(0..p.r_j));
                if !f_ij.contains(&c) {
                    break c;
                }
            };
            pair_swap_delta(&f_ij, &f_ik, &f_jk, old, new)
        })
        .collect();
    Ok(swap_report(*p, trials, p.pair_threshold(), deltas))
}

/// Integer level sizes for a pattern: `r_i`, `f_ij`, `e_ijk`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSizes {
    pub r: BTreeMap<u8, u32>,
    pub f: BTreeMap<Pair, u64>,
    pub e: BTreeMap<Triple, u64>,
}

/// One sampled state of every level.
#[derive(Debug, Clone)]
pub struct LevelSets {
    pub n: u32,
    /// `V_i`, instance vertices in `1..=n`.
    pub v: BTreeMap<u8, BTreeSet<u32>>,
    /// `F_ij` as pairs of instance vertices.
    pub f: BTreeMap<Pair, BTreeSet<(u32, u32)>>,
    pub gamma: BTreeMap<Triple, BTreeSet<VTriple>>,
    /// `ceil(11 f_ij f_ik f_jk / (r_i r_j r_k))`.
    pub m: BTreeMap<Triple, u64>,
    /// `R_t` of each triple level, 1-based indices into `{1..M_ijk}`.
    pub r_sets: BTreeMap<Triple, Vec<u32>>,
    pub e: BTreeMap<Triple, BTreeSet<VTriple>>,
}

/// `ceil(11 f_ij f_ik f_jk / (r_i r_j r_k))`.
pub fn m_size(sizes: &LevelSizes, t: Triple) -> u64 {
    let [i, j, k] = t.0;
    let num = 11u128
        * sizes.f[&Pair::new(i, j)] as u128
        * sizes.f[&Pair::new(i, k)] as u128
        * sizes.f[&Pair::new(j, k)] as u128;
    let den = sizes.r[&i] as u128 * sizes.r[&j] as u128 * sizes.r[&k] as u128;
    num.div_ceil(den) as u64
}

impl LevelSets {
    /// Samples every level uniformly for the given sizes.
    pub fn sample(h: &PatternHypergraph, n: u32, sizes: &LevelSizes, seed: u64) -> Result<Self, SimError> {
        let mut rng = trial_rng(seed, 0);
        let u = TripleUniverse::new(n);
        let mut v = BTreeMap::new();
        for i in h.vertices() {
            let ri = sizes.r[&i];
            if ri > n {
                return Err(SimError::InfeasibleParameters(ri as u64, n as u64));
            }
            v.insert(i, random_subset(&mut rng, n, ri).into_iter().collect::<BTreeSet<u32>>());
        }
        let mut f = BTreeMap::new();
        for &p in h.pairs() {
            let [a, b] = p.0;
            let va: Vec<u32> = v[&a].iter().copied().collect();
            let vb: Vec<u32> = v[&b].iter().copied().collect();
            let local = random_pairs(&mut rng, va.len() as u32, vb.len() as u32, sizes.f[&p])?;
            f.insert(p, local.into_iter().map(|(x, y)| (va[x as usize], vb[y as usize])).collect::<BTreeSet<_>>());
        }
        let mut gamma = BTreeMap::new();
        let mut m = BTreeMap::new();
        let mut r_sets = BTreeMap::new();
        let mut e = BTreeMap::new();
        for &t in h.triples() {
            let [i, j, k] = t.0;
            let g = gamma_of(&f[&Pair::new(i, j)], &f[&Pair::new(i, k)], &f[&Pair::new(j, k)]);
            let mt = m_size(sizes, t).min(u.size() as u64);
            let et = sizes.e[&t];
            if et > mt {
                return Err(SimError::TripleLevel { e: et, m: mt });
            }
            let rs = random_subset(&mut rng, mt as u32, et as u32);
            e.insert(t, y_of(&rs, &g, &u));
            gamma.insert(t, g);
            m.insert(t, mt);
            r_sets.insert(t, rs);
        }
        Ok(LevelSets {
            n,
            v,
            f,
            gamma,
            m,
            r_sets,
            e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[VTriple]) -> BTreeSet<VTriple> {
        v.iter().copied().collect()
    }

    #[test]
    fn rank_round_trips() {
        let u = TripleUniverse::new(4);
        for i in 0..u.size() {
            assert_eq!(u.rank(&u.unrank(i)), i);
        }
        assert_eq!(u.unrank(0), [1, 1, 1]);
        assert_eq!(u.unrank(63), [4, 4, 4]);
    }

    #[test]
    fn lambda_of_empty_and_full() {
        let u = TripleUniverse::new(3);
        let all: Vec<VTriple> = u.iter().collect();
        assert_eq!(build_lambda(&BTreeSet::new(), &u), all);
        assert_eq!(build_lambda(&all.iter().copied().collect(), &u), all);
    }

    #[test]
    fn lambda_puts_gamma_first() {
        let u = TripleUniverse::new(2);
        let l = build_lambda(&set(&[[2, 1, 1]]), &u);
        assert_eq!(l[0], [2, 1, 1]);
        let rest: Vec<VTriple> = u.iter().filter(|t| *t != [2, 1, 1]).collect();
        assert_eq!(&l[1..], &rest[..]);
    }

    #[test]
    fn y_examples() {
        let u = TripleUniverse::new(2);
        let g = set(&[[1, 2, 1]]);
        assert_eq!(y_of(&[1, 8], &g, &u), g);
        assert!(y_of(&[1, 2], &BTreeSet::new(), &u).is_empty());
        let g3 = set(&[[1, 1, 2], [2, 2, 1], [2, 2, 2]]);
        assert_eq!(y_of(&[1, 3], &g3, &u), set(&[[1, 1, 2], [2, 2, 2]]));
    }

    #[test]
    fn coupling_identity_on_equal_sets() {
        let u = TripleUniverse::new(3);
        let g = set(&[[1, 1, 1], [2, 3, 1], [3, 3, 3]]);
        let pi = coupling_permutation(&g, &g, 10, &u);
        assert_eq!(&pi[..3], &[1, 2, 3]);
        let mut sorted = pi.clone();
        sorted.sort();
        assert_eq!(sorted, (1..=10).collect::<Vec<u32>>());
    }

    #[test]
    fn claim_on_disjoint_sets() {
        let u = TripleUniverse::new(3);
        let g = set(&[[1, 1, 1], [1, 1, 2]]);
        let g2 = set(&[[3, 3, 3]]);
        assert!(check_claim_lambda(&g, &g2, 27, &u));
    }

    #[test]
    fn gamma_single_witness_and_empty() {
        let fij: PairSet = [(0, 1)].into_iter().collect();
        let fik: PairSet = [(0, 2)].into_iter().collect();
        let fjk: PairSet = [(1, 2)].into_iter().collect();
        assert_eq!(gamma_of(&fij, &fik, &fjk), set(&[[0, 1, 2]]));
        assert!(gamma_of(&fij, &fik, &PairSet::new()).is_empty());
    }

    #[test]
    fn gamma_of_complete_bipartite() {
        let full = |a: u32, b: u32| -> PairSet { (0..a).flat_map(|x| (0..b).map(move |y| (x, y))).collect() };
        assert_eq!(gamma_of(&full(2, 3), &full(2, 4), &full(3, 4)).len(), 24);
    }

    #[test]
    fn regular_state_is_marked() {
        // each u has exactly 2 partners, each v exactly 2
        let f: PairSet = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)].into_iter().collect();
        let flags = marked_pair_check(&f, 3, 3, (0, 0), &[]);
        assert!(flags.all());
        assert!(!marked_pair_check(&f, 3, 3, (0, 2), &[]).a);
    }

    #[test]
    fn complete_f_never_fails_regularity() {
        let p = RegularityParams {
            r_i: 4,
            r_j: 4,
            r_k: 4,
            f_ij: 16,
            f_ik: 16,
            kappa: 1,
        };
        let r = mc_regularity(&p, 50, 1).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.vacuous);
    }

    #[test]
    fn oversized_pair_sets_are_rejected() {
        let p = RegularityParams {
            r_i: 16,
            r_j: 16,
            r_k: 16,
            f_ij: 1024,
            f_ik: 1024,
            kappa: 1,
        };
        assert!(matches!(mc_regularity(&p, 1, 1), Err(SimError::InfeasibleParameters(1024, 256))));
    }

    #[test]
    fn empty_pair_sets_give_zero_delta() {
        let p = SwapParams {
            r_i: 5,
            r_j: 5,
            r_k: 5,
            f_ij: 0,
            f_ik: 0,
            f_jk: 0,
        };
        assert_eq!(mc_vertex_swap(&p, 20, 2).unwrap().max_delta, 0);
    }

    #[test]
    fn vertex_swap_on_complete_sets() {
        let full = |a: u32, b: u32| -> PairSet { (0..a).flat_map(|x| (0..b).map(move |y| (x, y))).collect() };
        // u has r_j r_k triples before and u' has as many after.
        assert_eq!(vertex_swap_delta(&full(3, 4), &full(3, 5), &full(4, 5), 1, 3), 2 * 4 * 5);
    }

    #[test]
    fn pair_swap_with_complete_neighbours() {
        let full = |a: u32, b: u32| -> PairSet { (0..a).flat_map(|x| (0..b).map(move |y| (x, y))).collect() };
        let fij: PairSet = [(0, 0), (1, 2)].into_iter().collect();
        assert_eq!(pair_swap_delta(&fij, &full(3, 6), &full(3, 6), (0, 0), (2, 1)), 2 * 6);
        assert_eq!(pair_swap_delta(&fij, &full(3, 6), &full(3, 6), (0, 0), (0, 0)), 0);
    }

    #[test]
    fn wilson_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(5, 100);
        assert!(lo < 0.05 && 0.05 < hi);
        assert!(wilson_interval(0, 100).0 < 1e-12);
    }

    #[test]
    fn level_sets_respect_sizes() {
        let h = PatternHypergraph::single_triple();
        let sizes = LevelSizes {
            r: [(1, 4), (2, 4), (3, 4)].into_iter().collect(),
            f: h.pairs().iter().map(|&p| (p, 8)).collect(),
            e: [(Triple([1, 2, 3]), 3)].into_iter().collect(),
        };
        let ls = LevelSets::sample(&h, 6, &sizes, 9).unwrap();
        let t = Triple([1, 2, 3]);
        assert!(ls.v.values().all(|v| v.len() == 4));
        assert!(ls.f.values().all(|f| f.len() == 8));
        assert!(ls.e[&t].is_subset(&ls.gamma[&t]));
        assert!(ls.e[&t].len() <= ls.r_sets[&t].len());
        assert_eq!(ls.m[&t], (11 * 512u64).div_ceil(64));
    }

    #[test]
    fn random_gamma_pair_has_requested_difference() {
        let u = TripleUniverse::new(8);
        let mut rng = trial_rng(5, 0);
        let (g, g2) = random_gamma_pair(&mut rng, &u, 100, 20);
        assert_eq!(g.len(), 100);
        assert_eq!(g2.len(), 100);
        assert_eq!(g.symmetric_difference(&g2).count(), 20);
    }
}
