//! Exact hypergeometric distribution and checks of its tail bounds.
//!
//! `HG(N, m, r)` counts successes among `r` draws without replacement from a
//! population of `N` containing `m` successes. Tail probabilities are exact
//! rationals; the exponential bounds are compared with outward-rounded
//! floating-point intervals, falling back to exact rational enclosures when
//! the interval comparison is inconclusive.

use crate::rational::Rational;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HGParams {
    /// Population size.
    pub n: u64,
    /// Successes in the population.
    pub m: u64,
    /// Draws.
    pub r: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("invalid parameters HG({n},{m},{r}): need m <= N and r <= N")]
    InvalidParams { n: u64, m: u64, r: u64 },
    #[error("outcome {j} outside 0..={r}")]
    OutOfRange { j: u64, r: u64 },
}

impl HGParams {
    pub fn new(n: u64, m: u64, r: u64) -> Result<Self, StatsError> {
        if m > n || r > n {
            return Err(StatsError::InvalidParams { n, m, r });
        }
        Ok(HGParams { n, m, r })
    }

    /// `mu = r m / N` (0 for the empty population).
    pub fn mean(&self) -> Rational {
        if self.n == 0 {
            return Rational::zero();
        }
        Rational::new(BigInt::from(self.r * self.m), BigInt::from(self.n))
    }

    pub fn support(&self) -> std::ops::RangeInclusive<u64> {
        let lo = (self.r + self.m).saturating_sub(self.n);
        lo..=self.r.min(self.m)
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Pascal's triangle up to row `nmax`.
pub struct BinomialTable {
    rows: Vec<Vec<BigUint>>,
}

impl BinomialTable {
    pub fn new(nmax: u64) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(nmax as usize + 1);
        for n in 0..=nmax as usize {
            let mut row = vec![BigUint::one(); n + 1];
            for k in 1..n {
                row[k] = &rows[n - 1][k - 1] + &rows[n - 1][k];
            }
            rows.push(row);
        }
        BinomialTable { rows }
    }

    pub fn get(&self, n: u64, k: u64) -> BigUint {
        if k > n {
            BigUint::zero()
        } else {
            self.rows[n as usize][k as usize].clone()
        }
    }
}

/// Numerators `C(m,j) C(N-m,r-j)` for `j = 0..=r`, over the common denominator `C(N,r)`.
fn pmf_numerators(p: &HGParams, table: &BinomialTable) -> (Vec<BigUint>, BigUint) {
    let nums = (0..=p.r)
        .map(|j| {
            if j > p.m || p.r - j > p.n - p.m {
                BigUint::zero()
            } else {
                table.get(p.m, j) * table.get(p.n - p.m, p.r - j)
            }
        })
        .collect();
    (nums, table.get(p.n, p.r))
}

fn to_rational(num: BigUint, den: &BigUint) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den.clone()))
}

/// `Pr[X = j] = C(m,j) C(N-m,r-j) / C(N,r)`.
pub fn hg_pmf(p: &HGParams, j: u64) -> Result<Rational, StatsError> {
    if j > p.r {
        return Err(StatsError::OutOfRange { j, r: p.r });
    }
    if j > p.m || p.r - j > p.n - p.m {
        return Ok(Rational::zero());
    }
    let num = binomial(p.m, j) * binomial(p.n - p.m, p.r - j);
    Ok(to_rational(num, &binomial(p.n, p.r)))
}

/// `Pr[X <= j]` for `j = 0..=r`.
pub fn hg_cdf(p: &HGParams) -> Vec<Rational> {
    let table = BinomialTable::new(p.n);
    let (nums, den) = pmf_numerators(p, &table);
    let mut acc = BigUint::zero();
    nums.into_iter()
        .map(|x| {
            acc += x;
            to_rational(acc.clone(), &den)
        })
        .collect()
}

/// Draws `r` of `N` items by a partial Fisher-Yates shuffle and counts how
/// many of the first `m` were drawn.
pub fn hg_sample<R: Rng + ?Sized>(p: &HGParams, rng: &mut R) -> u64 {
    let n = p.n as usize;
    let mut items: Vec<u32> = (0..n as u32).collect();
    let mut hits = 0;
    for i in 0..p.r as usize {
        let k = rng.gen_range(i..n);
        items.swap(i, k);
        if (items[i] as u64) < p.m {
            hits += 1;
        }
    }
    hits
}

/// Kolmogorov-Smirnov distance between the empirical cdf of `samples` and the exact cdf.
pub fn ks_statistic(p: &HGParams, samples: &[u64]) -> f64 {
    let cdf: Vec<f64> = hg_cdf(p).iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let mut counts = vec![0u64; p.r as usize + 1];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let total = samples.len() as f64;
    let mut acc = 0u64;
    let mut d: f64 = 0.0;
    for (j, c) in counts.iter().enumerate() {
        acc += c;
        d = d.max((acc as f64 / total - cdf[j]).abs());
    }
    d
}

/// Critical KS distance at significance `alpha` for `n` samples (asymptotic).
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// `Pr[X >= (1+d) mu] <= exp(-mu d^2 / 3)` for `0 < d <= 1`.
    Upper,
    /// `Pr[X <= (1-d) mu] <= exp(-mu d^2 / 2)` for `0 < d < 1`.
    Lower,
    /// `Pr[X > (1+d) mu] < 2^(-(1+d) mu)` for `d > 2e - 1`.
    Large,
}

impl TailKind {
    /// Whether `delta` meets the bound's hypothesis.
    pub fn admits(&self, delta: &Rational) -> bool {
        let one = Rational::one();
        match self {
            TailKind::Upper => delta.is_positive() && *delta <= one,
            TailKind::Lower => delta.is_positive() && *delta < one,
            // 2e - 1 < 4.4366 < 4437/1000; 2e - 1 > 4.4365 > 44365/10000.
            TailKind::Large => {
                let hi = Rational::new(4437.into(), 1000.into());
                let lo = Rational::new(44365.into(), 10000.into());
                if *delta > hi {
                    true
                } else if *delta <= lo {
                    false
                } else {
                    delta.to_f64().unwrap_or(0.0) > 2.0 * std::f64::consts::E - 1.0
                }
            }
        }
    }
}

/// Closed interval of `f64`s known to contain a real number.
#[derive(Debug, Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
}

const WIDEN: f64 = 1e-12;

fn widen(x: f64) -> Interval {
    Interval {
        lo: (x * (1.0 - WIDEN)).min(x - f64::MIN_POSITIVE),
        hi: (x * (1.0 + WIDEN)).max(x + f64::MIN_POSITIVE),
    }
}

fn rational_interval(r: &Rational) -> Interval {
    let x = r.to_f64().unwrap_or(f64::NAN);
    let i = widen(x);
    Interval { lo: i.lo.max(0.0), hi: i.hi }
}

/// `exp(-a)` for `a >= 0`.
fn exp_neg_interval(a: &Rational) -> Interval {
    let ai = widen(a.to_f64().unwrap_or(f64::NAN));
    Interval {
        lo: (-ai.hi).exp() * (1.0 - 4.0 * f64::EPSILON),
        hi: ((-ai.lo).exp() * (1.0 + 4.0 * f64::EPSILON)).min(1.0),
    }
}

/// Exact enclosure `[lo, hi]` of `exp(x)` for rational `0 <= x`, by halving
/// the argument below 1/2, a Taylor polynomial with remainder, and squaring.
fn exp_enclosure(x: &Rational) -> (Rational, Rational) {
    let half = Rational::new(1.into(), 2.into());
    let mut s = 0u32;
    let mut y = x.clone();
    while y > half {
        y /= Rational::from_integer(2.into());
        s += 1;
    }
    const TERMS: u32 = 24;
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for k in 0..=TERMS {
        sum += &term;
        term = term * &y / Rational::from_integer((k + 1).into());
    }
    // Remainder of the series for y <= 1/2 is at most 2 * next term.
    let mut lo = sum.clone();
    let mut hi = sum + term * Rational::from_integer(2.into());
    for _ in 0..s {
        lo = &lo * &lo;
        hi = &hi * &hi;
    }
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    /// Decided by the outward-rounded interval comparison.
    Interval,
    /// Decided by exact rational enclosures.
    Exact,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailPoint {
    pub params: HGParams,
    pub kind: TailKind,
    #[serde(with = "crate::rational::serde_pq")]
    pub delta: Rational,
    #[serde(with = "crate::rational::serde_pq")]
    pub tail: Rational,
    /// Nearest `f64` of the bound, for reporting.
    pub bound: f64,
    pub holds: bool,
    pub resolution: Resolution,
}

/// Exact tail for `kind` at `delta`.
pub fn exact_tail(p: &HGParams, kind: TailKind, delta: &Rational, table: &BinomialTable) -> Rational {
    let (nums, den) = pmf_numerators(p, table);
    let mu = p.mean();
    let one = Rational::one();
    let mut acc = BigUint::zero();
    match kind {
        TailKind::Upper => {
            let t = (&one + delta) * &mu;
            let k = t.ceil().to_integer();
            for (j, x) in nums.iter().enumerate() {
                if BigInt::from(j) >= k {
                    acc += x;
                }
            }
        }
        TailKind::Large => {
            let t = (&one + delta) * &mu;
            let k = t.floor().to_integer();
            for (j, x) in nums.iter().enumerate() {
                if BigInt::from(j) > k {
                    acc += x;
                }
            }
        }
        TailKind::Lower => {
            let t = (&one - delta) * &mu;
            let k = t.floor().to_integer();
            for (j, x) in nums.iter().enumerate() {
                if BigInt::from(j) <= k {
                    acc += x;
                }
            }
        }
    }
    to_rational(acc, &den)
}

/// Evaluates one grid point.
pub fn check_point(p: &HGParams, kind: TailKind, delta: &Rational, table: &BinomialTable) -> TailPoint {
    let tail = exact_tail(p, kind, delta, table);
    let mu = p.mean();
    let one = Rational::one();
    let (holds, resolution, bound) = match kind {
        TailKind::Upper | TailKind::Lower => {
            let denom = if kind == TailKind::Upper { 3 } else { 2 };
            let a = &mu * delta * delta / Rational::from_integer(denom.into());
            let b = exp_neg_interval(&a);
            let t = rational_interval(&tail);
            let approx = (-a.to_f64().unwrap_or(f64::NAN)).exp();
            if a.is_zero() {
                (tail <= one, Resolution::Exact, 1.0)
            } else if t.hi <= b.lo {
                (true, Resolution::Interval, approx)
            } else if t.lo > b.hi {
                (false, Resolution::Interval, approx)
            } else {
                // tail <= exp(-a)  <=>  tail * exp(a) <= 1
                let (lo, hi) = exp_enclosure(&a);
                let holds = if &tail * &hi <= one {
                    true
                } else if &tail * &lo > one {
                    false
                } else {
                    // Unresolved at this precision: report as not holding.
                    false
                };
                (holds, Resolution::Exact, approx)
            }
        }
        TailKind::Large => {
            // tail < 2^(-b) with b = (1+d) mu = num/den  <=>  tail^den * 2^num < 1
            let b = (&one + delta) * &mu;
            let approx = 2f64.powf(-b.to_f64().unwrap_or(f64::NAN));
            let den = b.denom().to_u32().expect("small denominator");
            let num = b.numer().to_u32().expect("small numerator");
            let lhs = num_traits::pow(tail.clone(), den as usize)
                * Rational::from_integer(BigInt::from(2u32).pow(num));
            (lhs < one, Resolution::Exact, approx)
        }
    };
    TailPoint {
        params: *p,
        kind,
        delta: delta.clone(),
        tail,
        bound,
        holds,
        resolution,
    }
}

/// Grid of parameters and `delta` values per bound.
#[derive(Debug, Clone, Serialize)]
pub struct TailGrid {
    pub nmax: u64,
    #[serde(serialize_with = "ser_rationals")]
    pub upper_deltas: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub lower_deltas: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub large_deltas: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(crate::rational::format_rational))
}

impl TailGrid {
    /// Every `N <= nmax`, every `m`, `r`; `delta` in {1/4, 1/2, 3/4, 1} for the
    /// upper tail, {1/4, 1/2, 3/4} for the lower tail, {5, 6, 8} for large deviations.
    pub fn standard(nmax: u64) -> Self {
        let q = |a: i64, b: i64| Rational::new(a.into(), b.into());
        TailGrid {
            nmax,
            upper_deltas: vec![q(1, 4), q(1, 2), q(3, 4), q(1, 1)],
            lower_deltas: vec![q(1, 4), q(1, 2), q(3, 4)],
            large_deltas: vec![q(5, 1), q(6, 1), q(8, 1)],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailBoundReport {
    pub grid: TailGrid,
    pub points_checked: usize,
    /// Points whose hypothesis on `delta` failed and were skipped.
    pub skipped: usize,
    pub resolved_exactly: usize,
    pub violations: Vec<TailPoint>,
    /// All points, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<TailPoint>>,
}

impl TailBoundReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every grid point by exact summation.
pub fn verify_tail_bounds(grid: &TailGrid, keep_points: bool) -> TailBoundReport {
    use rayon::prelude::*;
    let table = BinomialTable::new(grid.nmax);
    let kinds: Vec<(TailKind, &Vec<Rational>)> = vec![
        (TailKind::Upper, &grid.upper_deltas),
        (TailKind::Lower, &grid.lower_deltas),
        (TailKind::Large, &grid.large_deltas),
    ];
    let params: Vec<HGParams> = (1..=grid.nmax)
        .flat_map(|n| (0..=n).flat_map(move |m| (0..=n).map(move |r| HGParams { n, m, r })))
        .collect();
    let per_param: Vec<(Vec<TailPoint>, usize)> = params
        .par_iter()
        .map(|p| {
            let mut pts = Vec::new();
            let mut skipped = 0;
            for (kind, deltas) in &kinds {
                for d in deltas.iter() {
                    if kind.admits(d) {
                        pts.push(check_point(p, *kind, d, &table));
                    } else {
                        skipped += 1;
                    }
                }
            }
            (pts, skipped)
        })
        .collect();
    let mut report = TailBoundReport {
        grid: grid.clone(),
        points_checked: 0,
        skipped: 0,
        resolved_exactly: 0,
        violations: Vec::new(),
        points: keep_points.then(Vec::new),
    };
    for (pts, skipped) in per_param {
        report.skipped += skipped;
        for pt in pts {
            report.points_checked += 1;
            if pt.resolution == Resolution::Exact {
                report.resolved_exactly += 1;
            }
            if !pt.holds {
                report.violations.push(pt.clone());
            }
            if let Some(all) = report.points.as_mut() {
                all.push(pt);
            }
        }
    }
    report
}
