//! Cost of a nested walk in exponent space, and parameter admissibility.
//!
//! Parameters are exponents of `n`: `r_i = n^x_i`, `f_ij = n^y_ij`,
//! `e_ijk = n^z_ijk`. Every cost term is then `n` raised to a linear form in
//! those exponents; constants and polylogarithmic factors are dropped.

use crate::pattern::{
    validate_schedule, LoadingSchedule, Pair, PatternHypergraph, ScheduleElement, Triple, Violation,
};
use crate::rational::{ratio, serde_pq, Rational};
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(#[from] Violation),
    #[error("parameter keys do not match the pattern: {0}")]
    KeyMismatch(String),
}

/// Column layout shared by parameter vectors and exponent LPs:
/// `x_1..x_kappa`, then `y` per pair of Σ2, then `z` per triple of Σ3, then `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarLayout {
    kappa: u8,
    pairs: Vec<Pair>,
    triples: Vec<Triple>,
}

impl VarLayout {
    pub fn new(h: &PatternHypergraph) -> Self {
        VarLayout {
            kappa: h.kappa(),
            pairs: h.pairs().to_vec(),
            triples: h.triples().to_vec(),
        }
    }

    /// Number of columns including `T`.
    pub fn len(&self) -> usize {
        self.kappa as usize + self.pairs.len() + self.triples.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, v: u8) -> usize {
        v as usize - 1
    }

    pub fn y(&self, p: Pair) -> usize {
        self.kappa as usize + self.pairs.binary_search(&p).expect("pair of the pattern")
    }

    pub fn z(&self, t: Triple) -> usize {
        self.kappa as usize
            + self.pairs.len()
            + self.triples.binary_search(&t).expect("triple of the pattern")
    }

    pub fn objective(&self) -> usize {
        self.len() - 1
    }

    pub fn names(&self) -> Vec<String> {
        let mut out: Vec<String> = (1..=self.kappa).map(|v| format!("x{v}")).collect();
        out.extend(self.pairs.iter().map(|p| format!("y{}{}", p.0[0], p.0[1])));
        out.extend(self.triples.iter().map(|t| format!("z{}{}{}", t.0[0], t.0[1], t.0[2])));
        out.push("T".to_string());
        out
    }
}

/// Affine form `constant + Σ coeffs[c] · var[c]` over a [`VarLayout`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForm {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl LinearForm {
    pub fn zero(width: usize) -> Self {
        LinearForm {
            coeffs: vec![Rational::zero(); width],
            constant: Rational::zero(),
        }
    }

    pub fn with_constant(mut self, c: Rational) -> Self {
        self.constant += c;
        self
    }

    pub fn add_term(&mut self, col: usize, c: Rational) {
        self.coeffs[col] += c;
    }

    pub fn term(mut self, col: usize, c: Rational) -> Self {
        self.add_term(col, c);
        self
    }

    pub fn plus(&self, other: &LinearForm) -> LinearForm {
        LinearForm {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            constant: &self.constant + &other.constant,
        }
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(values)
            .filter(|(c, _)| !c.is_zero())
            .fold(self.constant.clone(), |acc, (c, v)| acc + c * v)
    }
}

/// Exponent of `1/sqrt(eps_t)` contributed by loading `e`.
pub fn epsilon_form(layout: &VarLayout, e: ScheduleElement) -> LinearForm {
    let half = ratio(1, 2);
    let neg_half = ratio(-1, 2);
    let f = LinearForm::zero(layout.len());
    match e {
        // eps = r_i / n
        ScheduleElement::Vertex(i) => f.with_constant(half).term(layout.x(i), neg_half),
        // eps = f_ij / (r_i r_j)
        ScheduleElement::Pair(p) => f
            .term(layout.x(p.0[0]), half.clone())
            .term(layout.x(p.0[1]), half)
            .term(layout.y(p), neg_half),
        // eps = e_ijk r_i r_j r_k / (f_ij f_ik f_jk)
        ScheduleElement::Triple(t) => {
            let mut f = f.term(layout.z(t), neg_half.clone());
            for p in t.pairs() {
                f.add_term(layout.y(p), half.clone());
            }
            for v in t.0 {
                f.add_term(layout.x(v), neg_half.clone());
            }
            f
        }
    }
}

/// Exponent of `1/sqrt(delta_t)`: the walk on `J(N, K)` has gap `1/K`.
pub fn delta_form(layout: &VarLayout, e: ScheduleElement) -> LinearForm {
    let col = match e {
        ScheduleElement::Vertex(i) => layout.x(i),
        ScheduleElement::Pair(p) => layout.y(p),
        ScheduleElement::Triple(t) => layout.z(t),
    };
    LinearForm::zero(layout.len()).term(col, ratio(1, 2))
}

/// Branches of the update-cost maximum; the first branch is always the constant 0.
pub fn update_branches(h: &PatternHypergraph, layout: &VarLayout, e: ScheduleElement) -> Vec<LinearForm> {
    let width = layout.len();
    let mut out = vec![LinearForm::zero(width)];
    match e {
        ScheduleElement::Vertex(i) => {
            for &t in h.triples().iter().filter(|t| t.contains(i)) {
                out.push(LinearForm::zero(width).term(layout.z(t), Rational::one()).term(layout.x(i), -Rational::one()));
            }
        }
        ScheduleElement::Pair(p) => {
            for &t in h.triples().iter().filter(|t| t.contains_pair(p)) {
                out.push(LinearForm::zero(width).term(layout.z(t), Rational::one()).term(layout.y(p), -Rational::one()));
            }
        }
        ScheduleElement::Triple(_) => {}
    }
    out
}

/// Per-level cost pieces as linear forms.
#[derive(Debug, Clone)]
pub struct LevelForms {
    pub element: ScheduleElement,
    pub epsilon: LinearForm,
    /// Sum of the epsilon forms of levels `1..=t`.
    pub epsilon_prefix: LinearForm,
    pub delta: LinearForm,
    pub updates: Vec<LinearForm>,
}

impl LevelForms {
    /// `epsilon_prefix + delta + update_branch` for each update branch.
    pub fn term_forms(&self) -> Vec<LinearForm> {
        let base = self.epsilon_prefix.plus(&self.delta);
        self.updates.iter().map(|u| base.plus(u)).collect()
    }
}

/// Cost forms of every level of `s` (the schedule is not validated here).
pub fn level_forms(h: &PatternHypergraph, layout: &VarLayout, s: &[ScheduleElement]) -> Vec<LevelForms> {
    let mut prefix = LinearForm::zero(layout.len());
    s.iter()
        .map(|&element| {
            let epsilon = epsilon_form(layout, element);
            prefix = prefix.plus(&epsilon);
            LevelForms {
                element,
                epsilon,
                epsilon_prefix: prefix.clone(),
                delta: delta_form(layout, element),
                updates: update_branches(h, layout, element),
            }
        })
        .collect()
}

/// Setup cost `sum e_ijk` is `n^(max z_ijk)` up to a constant.
pub fn setup_forms(h: &PatternHypergraph, layout: &VarLayout) -> Vec<LinearForm> {
    h.triples()
        .iter()
        .map(|&t| LinearForm::zero(layout.len()).term(layout.z(t), Rational::one()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    /// Must hold with slack `>= 0`.
    NonStrict,
    /// Must hold with slack `> 0` (polynomially large ratio).
    Strict,
}

/// An admissibility condition as a slack form: the condition holds when the
/// slack is nonnegative (non-strict) or positive (strict).
#[derive(Debug, Clone)]
pub struct ConditionForm {
    pub id: String,
    pub kind: ConditionKind,
    /// `n / r_i` conditions, which `relax_vertex` skips.
    pub vertex_ratio: bool,
    pub slack: LinearForm,
}

/// Admissibility conditions of a pattern in exponent form.
pub fn admissibility_forms(h: &PatternHypergraph, layout: &VarLayout) -> Vec<ConditionForm> {
    use ConditionKind::*;
    let w = layout.len();
    let one = Rational::one;
    let mut out = Vec::new();
    let mut push = |id: String, kind, vertex_ratio, slack| {
        out.push(ConditionForm { id, kind, vertex_ratio, slack })
    };
    for v in h.vertices() {
        push(format!("r{v}>=1"), NonStrict, false, LinearForm::zero(w).term(layout.x(v), one()));
        push(format!("r{v}<=n"), NonStrict, false, LinearForm::zero(w).with_constant(one()).term(layout.x(v), -one()));
    }
    for &p in h.pairs() {
        let [i, j] = p.0;
        let tag = format!("{i}{j}");
        push(format!("f{tag}>=1"), NonStrict, false, LinearForm::zero(w).term(layout.y(p), one()));
        push(
            format!("f{tag}<=r{i}r{j}"),
            NonStrict,
            false,
            LinearForm::zero(w).term(layout.x(i), one()).term(layout.x(j), one()).term(layout.y(p), -one()),
        );
    }
    for &t in h.triples() {
        let tag = format!("{}{}{}", t.0[0], t.0[1], t.0[2]);
        push(format!("e{tag}>=1"), NonStrict, false, LinearForm::zero(w).term(layout.z(t), one()));
        let mut bound = LinearForm::zero(w).term(layout.z(t), -one());
        for p in t.pairs() {
            bound.add_term(layout.y(p), one());
        }
        for v in t.0 {
            bound.add_term(layout.x(v), -one());
        }
        push(format!("e{tag}<=M{tag}"), NonStrict, false, bound);
    }
    for v in h.vertices() {
        push(format!("n/r{v}"), Strict, true, LinearForm::zero(w).with_constant(one()).term(layout.x(v), -one()));
    }
    for &p in h.pairs() {
        let [i, j] = p.0;
        for (a, b) in [(i, j), (j, i)] {
            // f_ij / r_a
            let _ = b;
            push(
                format!("f{i}{j}/r{a}"),
                Strict,
                false,
                LinearForm::zero(w).term(layout.y(p), one()).term(layout.x(a), -one()),
            );
        }
    }
    for &t in h.triples() {
        let tag = format!("{}{}{}", t.0[0], t.0[1], t.0[2]);
        for &shared in &t.0 {
            // f_{s a} f_{s b} / (r_i r_j r_k) for the two pairs through the shared vertex
            let mut f = LinearForm::zero(w);
            for p in t.pairs().iter().filter(|p| p.contains(shared)) {
                f.add_term(layout.y(*p), one());
            }
            for v in t.0 {
                f.add_term(layout.x(v), -one());
            }
            push(format!("f*f/rrr[{tag}@{shared}]"), Strict, false, f);
        }
    }
    out
}

/// Exponents `x`, `y`, `z` keyed by Σ1, Σ2, Σ3.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParameterExponents {
    pub x: BTreeMap<u8, Rational>,
    pub y: BTreeMap<Pair, Rational>,
    pub z: BTreeMap<Triple, Rational>,
}

impl ParameterExponents {
    /// All exponents zero (every parameter equal to 1).
    pub fn zeros(h: &PatternHypergraph) -> Self {
        ParameterExponents {
            x: h.vertices().map(|v| (v, Rational::zero())).collect(),
            y: h.pairs().iter().map(|&p| (p, Rational::zero())).collect(),
            z: h.triples().iter().map(|&t| (t, Rational::zero())).collect(),
        }
    }

    pub fn check_keys(&self, h: &PatternHypergraph) -> Result<(), ModelError> {
        let xs: Vec<u8> = self.x.keys().copied().collect();
        let want_x: Vec<u8> = h.vertices().collect();
        if xs != want_x {
            return Err(ModelError::KeyMismatch(format!("vertices {xs:?}, expected {want_x:?}")));
        }
        if !self.y.keys().copied().eq(h.pairs().iter().copied()) {
            return Err(ModelError::KeyMismatch("pair exponents differ from the pair set".into()));
        }
        if !self.z.keys().copied().eq(h.triples().iter().copied()) {
            return Err(ModelError::KeyMismatch("triple exponents differ from the triple set".into()));
        }
        Ok(())
    }

    /// Column vector in `layout` order; `T` is set to 0.
    pub fn to_vector(&self, layout: &VarLayout) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); layout.len()];
        for (&i, r) in &self.x {
            v[layout.x(i)] = r.clone();
        }
        for (&p, r) in &self.y {
            v[layout.y(p)] = r.clone();
        }
        for (&t, r) in &self.z {
            v[layout.z(t)] = r.clone();
        }
        v
    }

    pub fn from_vector(h: &PatternHypergraph, layout: &VarLayout, v: &[Rational]) -> Self {
        ParameterExponents {
            x: h.vertices().map(|i| (i, v[layout.x(i)].clone())).collect(),
            y: h.pairs().iter().map(|&p| (p, v[layout.y(p)].clone())).collect(),
            z: h.triples().iter().map(|&t| (t, v[layout.z(t)].clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionSlack {
    pub id: String,
    pub kind: ConditionKind,
    #[serde(with = "serde_pq")]
    pub slack: Rational,
    /// Whether the condition was skipped (vertex ratios under `relax_vertex`).
    pub skipped: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    /// Every non-strict condition holds.
    pub nonstrict_ok: bool,
    /// Every checked condition holds, strict ones with positive slack.
    pub strict_ok: bool,
    pub relaxed_vertex: bool,
    pub conditions: Vec<ConditionSlack>,
}

impl AdmissibilityReport {
    /// Strict conditions with nonpositive slack that were checked.
    pub fn failing(&self) -> impl Iterator<Item = &ConditionSlack> {
        self.conditions.iter().filter(|c| !c.skipped && !c.holds)
    }
}

fn condition_holds(kind: ConditionKind, slack: &Rational) -> bool {
    match kind {
        ConditionKind::NonStrict => !slack.is_negative(),
        ConditionKind::Strict => slack.is_positive(),
    }
}

/// Evaluates every admissibility condition exactly. With `relax_vertex` the
/// strict `n / r_i` conditions are reported but not enforced.
pub fn check_admissibility(
    h: &PatternHypergraph,
    p: &ParameterExponents,
    relax_vertex: bool,
) -> Result<AdmissibilityReport, ModelError> {
    p.check_keys(h)?;
    let layout = VarLayout::new(h);
    let values = p.to_vector(&layout);
    let conditions: Vec<ConditionSlack> = admissibility_forms(h, &layout)
        .into_iter()
        .map(|c| {
            let slack = c.slack.eval(&values);
            ConditionSlack {
                holds: condition_holds(c.kind, &slack),
                skipped: relax_vertex && c.vertex_ratio,
                id: c.id,
                kind: c.kind,
                slack,
            }
        })
        .collect();
    let nonstrict_ok = conditions
        .iter()
        .filter(|c| c.kind == ConditionKind::NonStrict)
        .all(|c| c.holds);
    let strict_ok = conditions.iter().all(|c| c.skipped || c.holds);
    Ok(AdmissibilityReport {
        nonstrict_ok,
        strict_ok,
        relaxed_vertex: relax_vertex,
        conditions,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCost {
    /// 1-based level index.
    pub t: usize,
    pub element: ScheduleElement,
    #[serde(with = "serde_pq")]
    pub epsilon_exponent: Rational,
    #[serde(with = "serde_pq")]
    pub epsilon_cumulative: Rational,
    #[serde(with = "serde_pq")]
    pub delta_exponent: Rational,
    #[serde(with = "serde_pq")]
    pub update_exponent: Rational,
    #[serde(with = "serde_pq")]
    pub total_term_exponent: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostBreakdown {
    #[serde(with = "serde_pq")]
    pub setup_exponent: Rational,
    pub levels: Vec<LevelCost>,
    #[serde(with = "serde_pq")]
    pub overall: Rational,
}

fn max_of(values: impl IntoIterator<Item = Rational>) -> Rational {
    values.into_iter().max().unwrap_or_else(Rational::zero)
}

/// Query-cost exponent of the nested walk for schedule `s` and parameters `p`.
pub fn cost_exponent(
    h: &PatternHypergraph,
    s: &LoadingSchedule,
    p: &ParameterExponents,
) -> Result<CostBreakdown, ModelError> {
    validate_schedule(h, s)?;
    p.check_keys(h)?;
    let layout = VarLayout::new(h);
    let values = p.to_vector(&layout);
    let setup_exponent = max_of(setup_forms(h, &layout).iter().map(|f| f.eval(&values)));
    let levels: Vec<LevelCost> = level_forms(h, &layout, s.elements())
        .iter()
        .enumerate()
        .map(|(idx, lf)| {
            let epsilon_exponent = lf.epsilon.eval(&values);
            let epsilon_cumulative = lf.epsilon_prefix.eval(&values);
            let delta_exponent = lf.delta.eval(&values);
            let update_exponent = max_of(lf.updates.iter().map(|u| u.eval(&values)));
            let total_term_exponent = &epsilon_cumulative + &delta_exponent + &update_exponent;
            LevelCost {
                t: idx + 1,
                element: lf.element,
                epsilon_exponent,
                epsilon_cumulative,
                delta_exponent,
                update_exponent,
                total_term_exponent,
            }
        })
        .collect();
    let overall = max_of(
        std::iter::once(setup_exponent.clone()).chain(levels.iter().map(|l| l.total_term_exponent.clone())),
    );
    Ok(CostBreakdown {
        setup_exponent,
        levels,
        overall,
    })
}

/// Exponent of `M_ijk` (the bound on `|Gamma_ijk|`), dropping the factor 11.
pub fn m_exponent(p: &ParameterExponents, t: Triple) -> Rational {
    let ys: Rational = t.pairs().iter().map(|q| p.y[q].clone()).sum();
    let xs: Rational = t.0.iter().map(|v| p.x[v].clone()).sum();
    ys - xs
}

/// Exponents reported for the 4-clique with the K4 reference schedule.
pub fn k4_reference_parameters() -> ParameterExponents {
    let h = PatternHypergraph::k4();
    let mut p = ParameterExponents::zeros(&h);
    for (v, x) in [(1, ratio(1, 2)), (2, ratio(3, 4)), (3, ratio(7, 8)), (4, ratio(3, 4))] {
        p.x.insert(v, x);
    }
    for (a, b, y) in [
        (1, 2, ratio(5, 4)),
        (1, 3, ratio(5, 4)),
        (1, 4, ratio(147, 128)),
        (2, 3, ratio(193, 128)),
        (2, 4, ratio(83, 64)),
        (3, 4, ratio(181, 128)),
    ] {
        p.y.insert(Pair::new(a, b), y);
    }
    for (t, z) in [
        ([1, 2, 3], ratio(241, 128)),
        ([1, 2, 4], ratio(217, 128)),
        ([1, 3, 4], ratio(211, 128)),
        ([2, 3, 4], ratio(193, 128)),
    ] {
        p.z.insert(Triple(t), z);
    }
    p
}

/// Exponents reported for the associativity pattern with its reference schedule.
pub fn h7_reference_parameters() -> ParameterExponents {
    let h = PatternHypergraph::h7();
    let mut p = ParameterExponents::zeros(&h);
    for (v, x) in [
        (1, ratio(3, 4)),
        (2, ratio(1, 1)),
        (3, ratio(1, 1)),
        (4, ratio(7, 8)),
        (5, ratio(1, 2)),
        (6, ratio(1, 1)),
        (7, ratio(1, 1)),
    ] {
        p.x.insert(v, x);
    }
    for (a, b, y) in [
        (1, 2, ratio(7, 4)),
        (1, 3, ratio(7, 4)),
        (1, 5, ratio(5, 4)),
        (1, 7, ratio(7, 4)),
        (2, 3, ratio(23, 16)),
        (2, 4, ratio(29, 16)),
        (3, 4, ratio(15, 8)),
        (4, 5, ratio(11, 8)),
        (4, 6, ratio(15, 8)),
        (5, 6, ratio(3, 2)),
        (5, 7, ratio(3, 2)),
    ] {
        p.y.insert(Pair::new(a, b), y);
    }
    for (t, z) in [
        ([1, 2, 3], ratio(169, 80)),
        ([1, 5, 7], ratio(169, 80)),
        ([2, 3, 4], ratio(169, 80)),
        ([4, 5, 6], ratio(0, 1)),
    ] {
        p.z.insert(Triple(t), z);
    }
    p
}
