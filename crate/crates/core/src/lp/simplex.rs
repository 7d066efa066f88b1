//! Exact dual simplex for programs of the form
//! `minimize x_obj  s.t.  rows,  x >= 0`.
//!
//! Every row is brought to `a·x <= b`. Since the objective is a single
//! nonnegative variable, the all-slack basis is dual feasible from the start
//! and no phase 1 is needed. Pivots follow the smallest-subscript rule, which
//! rules out cycling. Rows can be appended to a solved tableau and the solve
//! resumed, which is what the schedule search does along a prefix tree.

use super::scalar::{Overflow, Scalar, Small};
use crate::rational::Rational;
use num_traits::{Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub label: String,
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .filter(|(c, _)| !c.is_zero())
            .fold(Rational::zero(), |acc, (c, v)| acc + c * v)
    }

    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("row `{label}` has {got} coefficients, expected {expected}")]
    RowWidth { label: String, got: usize, expected: usize },
    #[error("objective column {0} out of range")]
    BadObjective(usize),
}

/// `minimize names[objective]` subject to `rows`, every variable nonnegative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub rows: Vec<Constraint>,
    pub objective: usize,
}

impl LinearProgram {
    pub fn new(names: Vec<String>, objective: usize) -> Self {
        LinearProgram {
            names,
            rows: Vec::new(),
            objective,
        }
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn push(&mut self, label: impl Into<String>, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.rows.push(Constraint {
            label: label.into(),
            coeffs,
            relation,
            rhs,
        });
    }

    /// Drops rows identical (coefficients, relation, right-hand side) to an earlier row.
    pub fn dedup_rows(&mut self) {
        let mut seen = std::collections::HashSet::new();
        self.rows
            .retain(|r| seen.insert((r.coeffs.clone(), r.relation, r.rhs.clone())));
    }

    pub fn check(&self) -> Result<(), LpError> {
        if self.objective >= self.width() {
            return Err(LpError::BadObjective(self.objective));
        }
        for r in &self.rows {
            if r.coeffs.len() != self.width() {
                return Err(LpError::RowWidth {
                    label: r.label.clone(),
                    got: r.coeffs.len(),
                    expected: self.width(),
                });
            }
        }
        Ok(())
    }

    /// The `<=` rows handed to the tableau: original row index and whether the
    /// row is negated.
    fn normalized(&self) -> Vec<(usize, bool, &Constraint)> {
        let mut out = Vec::with_capacity(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            match r.relation {
                Relation::Le => out.push((i, false, r)),
                Relation::Ge => out.push((i, true, r)),
                Relation::Eq => {
                    out.push((i, false, r));
                    out.push((i, true, r));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    /// Kept for completeness; a nonnegative objective variable cannot be unbounded below.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    #[serde(with = "crate::rational::serde_pq_opt")]
    pub optimum: Option<Rational>,
    #[serde(serialize_with = "serialize_vec")]
    pub witness: Vec<Rational>,
    /// One multiplier per original row: `<= 0` for `<=` rows, `>= 0` for `>=` rows.
    #[serde(serialize_with = "serialize_vec")]
    pub duals: Vec<Rational>,
    pub tight_rows: Vec<usize>,
    pub pivots: usize,
}

fn serialize_vec<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&crate::rational::format_rational(r))?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("row `{0}` violated by the witness")]
    Infeasible(String),
    #[error("witness objective differs from the reported optimum")]
    ObjectiveMismatch,
    #[error("multiplier of row `{0}` has the wrong sign")]
    DualSign(String),
    #[error("dual constraint of column `{0}` violated")]
    DualInfeasible(String),
    #[error("dual objective differs from the primal optimum")]
    DualityGap,
    #[error("solution is not optimal")]
    NotOptimal,
    #[error("row `{0}` reported tight but has slack")]
    NotTight(String),
}

/// Audits an optimal solution by exact substitution: primal feasibility,
/// dual feasibility and equality of the two objective values.
pub fn verify_certificate(lp: &LinearProgram, sol: &LpSolution) -> Result<(), CertificateError> {
    let opt = match (&sol.status, &sol.optimum) {
        (LpStatus::Optimal, Some(v)) => v,
        _ => return Err(CertificateError::NotOptimal),
    };
    if sol.witness.iter().any(|v| v.is_negative()) {
        return Err(CertificateError::Infeasible("x >= 0".into()));
    }
    for r in &lp.rows {
        if !r.satisfied_by(&sol.witness) {
            return Err(CertificateError::Infeasible(r.label.clone()));
        }
    }
    for &i in &sol.tight_rows {
        if lp.rows[i].lhs(&sol.witness) != lp.rows[i].rhs {
            return Err(CertificateError::NotTight(lp.rows[i].label.clone()));
        }
    }
    if &sol.witness[lp.objective] != opt {
        return Err(CertificateError::ObjectiveMismatch);
    }
    let mut aty = vec![Rational::zero(); lp.width()];
    let mut by = Rational::zero();
    for (r, y) in lp.rows.iter().zip(&sol.duals) {
        let ok = match r.relation {
            Relation::Le => !y.is_positive(),
            Relation::Ge => !y.is_negative(),
            Relation::Eq => true,
        };
        if !ok {
            return Err(CertificateError::DualSign(r.label.clone()));
        }
        if y.is_zero() {
            continue;
        }
        for (acc, c) in aty.iter_mut().zip(&r.coeffs) {
            if !c.is_zero() {
                *acc += c * y;
            }
        }
        by += &r.rhs * y;
    }
    for (j, v) in aty.iter().enumerate() {
        let c = if j == lp.objective { Rational::from_integer(1.into()) } else { Rational::zero() };
        if v > &c {
            return Err(CertificateError::DualInfeasible(lp.names[j].clone()));
        }
    }
    if &by != opt {
        return Err(CertificateError::DualityGap);
    }
    Ok(())
}

/// Dense dual-simplex tableau over `S`. Columns are the structural variables
/// followed by one slack per row slot; slots are reserved up front so that
/// appending rows never reshapes existing rows.
#[derive(Debug, Clone)]
pub(crate) struct Tableau<S> {
    nstruct: usize,
    ncols: usize,
    /// Row-major `len() x ncols`.
    data: Vec<S>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    reduced: Vec<S>,
    value: S,
    pivots: usize,
}

pub(crate) enum Outcome {
    Optimal,
    Infeasible,
}

impl<S: Scalar> Tableau<S> {
    /// Empty tableau minimizing column `objective` with room for `capacity` rows.
    pub fn new(nstruct: usize, objective: usize, capacity: usize) -> Self {
        let ncols = nstruct + capacity;
        let mut reduced = vec![S::nil(); ncols];
        reduced[objective] = S::unit();
        Tableau {
            nstruct,
            ncols,
            data: Vec::with_capacity(ncols * capacity),
            rhs: Vec::with_capacity(capacity),
            basis: Vec::with_capacity(capacity),
            reduced,
            value: S::nil(),
            pivots: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    /// Appends `sign · a·x <= sign · b` expressed in the current basis.
    pub fn add_row(&mut self, coeffs: &[Rational], rhs: &Rational, negate: bool) -> Result<(), Overflow> {
        let mut row = Vec::with_capacity(self.nstruct);
        for c in coeffs {
            let v = S::from_rational(c)?;
            row.push(if negate && !v.is_nil() { v.neg()? } else { v });
        }
        let b = S::from_rational(rhs)?;
        self.add_scalar_row(&row, if negate { b.neg()? } else { b })
    }

    /// Appends `a·x <= b` over the structural columns.
    pub fn add_scalar_row(&mut self, coeffs: &[S], rhs: S) -> Result<(), Overflow> {
        let slot = self.len();
        assert!(self.nstruct + slot < self.ncols, "tableau capacity exceeded");
        let mut row = vec![S::nil(); self.ncols];
        row[..coeffs.len()].clone_from_slice(coeffs);
        let mut b = rhs;
        // Eliminate basic columns.
        for i in 0..slot {
            let bv = self.basis[i];
            if bv >= self.nstruct || row[bv].is_nil() {
                continue;
            }
            let a = row[bv].clone();
            for (j, t) in self.row(i).iter().enumerate() {
                if !t.is_nil() {
                    row[j] = row[j].sub(&a.mul(t)?)?;
                }
            }
            b = b.sub(&a.mul(&self.rhs[i])?)?;
        }
        row[self.nstruct + slot] = S::unit();
        self.data.extend(row);
        self.rhs.push(b);
        self.basis.push(self.nstruct + slot);
        Ok(())
    }

    fn pivot(&mut self, r: usize, e: usize) -> Result<(), Overflow> {
        self.pivots += 1;
        let n = self.ncols;
        let p = self.data[r * n + e].clone();
        let nz: Vec<usize> = (0..n).filter(|&j| !self.data[r * n + j].is_nil()).collect();
        for &j in &nz {
            self.data[r * n + j] = self.data[r * n + j].div(&p)?;
        }
        self.rhs[r] = self.rhs[r].div(&p)?;
        let prow: Vec<S> = self.data[r * n..(r + 1) * n].to_vec();
        for i in 0..self.len() {
            if i == r {
                continue;
            }
            let f = self.data[i * n + e].clone();
            if f.is_nil() {
                continue;
            }
            for &j in &nz {
                let v = self.data[i * n + j].sub(&f.mul(&prow[j])?)?;
                self.data[i * n + j] = v;
            }
            self.rhs[i] = self.rhs[i].sub(&f.mul(&self.rhs[r])?)?;
        }
        let d = self.reduced[e].clone();
        if !d.is_nil() {
            for &j in &nz {
                self.reduced[j] = self.reduced[j].sub(&d.mul(&prow[j])?)?;
            }
            self.value = self.value.add(&d.mul(&self.rhs[r])?)?;
        }
        self.basis[r] = e;
        Ok(())
    }

    /// Runs dual simplex iterations until primal feasibility or a proof of infeasibility.
    pub fn solve(&mut self) -> Result<Outcome, Overflow> {
        loop {
            // Leaving row: negative right-hand side, smallest basic index.
            let leave = (0..self.len())
                .filter(|&i| self.rhs[i].is_neg())
                .min_by_key(|&i| self.basis[i]);
            let Some(r) = leave else {
                return Ok(Outcome::Optimal);
            };
            // Entering column: minimum ratio d_j / -a_rj over a_rj < 0, smallest index on ties.
            let mut best: Option<(usize, S)> = None;
            for (j, a) in self.row(r).iter().enumerate() {
                if !a.is_neg() {
                    continue;
                }
                let ratio = self.reduced[j].div(&a.neg()?)?;
                if best.as_ref().is_none_or(|(_, b)| ratio < *b) {
                    best = Some((j, ratio));
                }
            }
            let Some((e, _)) = best else {
                return Ok(Outcome::Infeasible);
            };
            self.pivot(r, e)?;
        }
    }

    /// Current objective value (valid after an optimal solve).
    pub fn value(&self) -> Rational {
        self.value.to_rational()
    }

    /// Primal values of the structural variables.
    pub fn primal(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.nstruct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.nstruct {
                x[b] = self.rhs[i].to_rational();
            }
        }
        x
    }

    /// Multiplier of each `<=` row slot: minus the reduced cost of its slack.
    pub fn slot_duals(&self) -> Vec<Rational> {
        (0..self.len())
            .map(|i| -self.reduced[self.nstruct + i].to_rational())
            .collect()
    }
}

fn solve_with<S: Scalar>(lp: &LinearProgram) -> Result<LpSolution, Overflow> {
    let slots = lp.normalized();
    let mut t = Tableau::<S>::new(lp.width(), lp.objective, slots.len());
    for (_, negate, r) in &slots {
        t.add_row(&r.coeffs, &r.rhs, *negate)?;
    }
    let outcome = t.solve()?;
    let pivots = t.pivots();
    Ok(match outcome {
        Outcome::Infeasible => LpSolution {
            status: LpStatus::Infeasible,
            optimum: None,
            witness: Vec::new(),
            duals: Vec::new(),
            tight_rows: Vec::new(),
            pivots,
        },
        Outcome::Optimal => {
            let witness = t.primal();
            let mut duals = vec![Rational::zero(); lp.rows.len()];
            for ((orig, negated, _), y) in slots.iter().zip(t.slot_duals()) {
                // Slot multipliers are <= 0 in the slot's own `<=` orientation.
                duals[*orig] += if *negated { -y } else { y };
            }
            let tight_rows = lp
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.lhs(&witness) == r.rhs)
                .map(|(i, _)| i)
                .collect();
            LpSolution {
                status: LpStatus::Optimal,
                optimum: Some(t.value()),
                witness,
                duals,
                tight_rows,
                pivots,
            }
        }
    })
}

/// Solves `lp` exactly. Deterministic: the same program always yields the
/// same witness, multipliers and pivot count.
pub fn solve_exact(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    Ok(match solve_with::<Small>(lp) {
        Ok(sol) => sol,
        Err(Overflow) => solve_with::<Rational>(lp).expect("arbitrary precision never overflows"),
    })
}

/// Same as [`solve_exact`] but always in arbitrary precision.
pub fn solve_exact_big(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    Ok(solve_with::<Rational>(lp).expect("arbitrary precision never overflows"))
}
