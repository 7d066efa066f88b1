//! The min-max cost exponent of a fixed schedule as a linear program.

use super::simplex::{solve_exact, verify_certificate, CertificateError, Constraint, LinearProgram, LpError, LpStatus, Relation};
use crate::complexity::{
    admissibility_forms, check_admissibility, level_forms, setup_forms, ConditionKind, LevelForms, LinearForm,
    ModelError, ParameterExponents, VarLayout,
};
use crate::pattern::{validate_schedule, LoadingSchedule, PatternHypergraph};
use crate::rational::{ratio, Rational};
use num_traits::{One, Zero};

/// Margin used when a strict admissibility condition is tight at the optimum.
pub fn default_margin() -> Rational {
    ratio(1, 1024)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOptions {
    /// When set, every strict admissibility slack must be at least this value.
    pub margin: Option<Rational>,
    /// Skip the strict `n / r_i` rows.
    pub relax_vertex: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            margin: None,
            relax_vertex: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExponentLpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("certificate audit failed: {0}")]
    Certificate(#[from] CertificateError),
}

fn t_col(layout: &VarLayout) -> usize {
    layout.objective()
}

/// `form <= T`, written as `form.coeffs - T <= -form.constant`.
fn below_t(label: String, layout: &VarLayout, form: &LinearForm) -> Constraint {
    let mut coeffs = form.coeffs.clone();
    coeffs[t_col(layout)] -= Rational::one();
    Constraint {
        label,
        coeffs,
        relation: Relation::Le,
        rhs: -form.constant.clone(),
    }
}

/// `slack >= bound`, written as `-slack.coeffs <= slack.constant - bound`.
fn slack_at_least(label: String, slack: &LinearForm, bound: &Rational) -> Constraint {
    Constraint {
        label,
        coeffs: slack.coeffs.iter().map(|c| -c).collect(),
        relation: Relation::Le,
        rhs: &slack.constant - bound,
    }
}

/// Parameter-range rows, setup rows and optional margin rows: everything
/// that does not depend on the schedule.
pub fn structural_rows(h: &PatternHypergraph, layout: &VarLayout, options: &LpOptions) -> Vec<Constraint> {
    let zero = Rational::zero();
    let forms = admissibility_forms(h, layout);
    let mut rows: Vec<Constraint> = forms
        .iter()
        .filter(|c| c.kind == ConditionKind::NonStrict && !c.id.ends_with(">=1"))
        .map(|c| slack_at_least(c.id.clone(), &c.slack, &zero))
        .collect();
    for (t, f) in h.triples().iter().zip(setup_forms(h, layout)) {
        rows.push(below_t(format!("setup[t{}{}{}]", t.0[0], t.0[1], t.0[2]), layout, &f));
    }
    if let Some(m) = &options.margin {
        for c in forms
            .iter()
            .filter(|c| c.kind == ConditionKind::Strict && !(options.relax_vertex && c.vertex_ratio))
        {
            rows.push(slack_at_least(format!("margin[{}]", c.id), &c.slack, m));
        }
    }
    rows
}

/// Rows `term <= T` for each update branch of one level (1-based `t`).
pub fn rows_of_level(layout: &VarLayout, t: usize, lf: &LevelForms) -> Vec<Constraint> {
    lf.term_forms()
        .iter()
        .enumerate()
        .map(|(b, f)| below_t(format!("level{t}[{}]#{b}", lf.element), layout, f))
        .collect()
}

/// Exponent LP of schedule `s`: variables `x`, `y`, `z`, `T`; minimize `T`.
pub fn build_exponent_lp(
    h: &PatternHypergraph,
    s: &LoadingSchedule,
    options: &LpOptions,
) -> Result<LinearProgram, ModelError> {
    validate_schedule(h, s)?;
    let layout = VarLayout::new(h);
    let mut lp = LinearProgram::new(layout.names(), t_col(&layout));
    lp.rows = structural_rows(h, &layout, options);
    for (i, lf) in level_forms(h, &layout, s.elements()).iter().enumerate() {
        lp.rows.extend(rows_of_level(&layout, i + 1, lf));
    }
    lp.dedup_rows();
    Ok(lp)
}

/// LP optimum of one schedule, with post hoc strict admissibility.
#[derive(Debug, Clone)]
pub struct ScheduleOptimum {
    pub schedule: LoadingSchedule,
    pub exponent: Rational,
    pub witness: ParameterExponents,
    pub tight_rows: Vec<String>,
    /// Whether the witness satisfies every strict condition that is checked.
    pub strict_ok: bool,
    /// Margin used for the re-solve, when one was needed.
    pub margin: Option<Rational>,
    /// Optimum with the margin rows; `None` if no re-solve happened or it was infeasible.
    pub margin_exponent: Option<Rational>,
    pub margin_witness: Option<ParameterExponents>,
}

struct Solved {
    exponent: Rational,
    witness: ParameterExponents,
    tight_rows: Vec<String>,
}

fn solve_audited(
    h: &PatternHypergraph,
    s: &LoadingSchedule,
    options: &LpOptions,
) -> Result<Option<Solved>, ExponentLpError> {
    let lp = build_exponent_lp(h, s, options)?;
    let sol = solve_exact(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    verify_certificate(&lp, &sol)?;
    let layout = VarLayout::new(h);
    Ok(Some(Solved {
        exponent: sol.optimum.clone().expect("optimal"),
        witness: ParameterExponents::from_vector(h, &layout, &sol.witness),
        tight_rows: sol.tight_rows.iter().map(|&i| lp.rows[i].label.clone()).collect(),
    }))
}

/// Solves the schedule LP without margins, audits the certificate and checks
/// strict admissibility at the witness. When a strict condition is tight the
/// LP is solved again with `options.margin` (or the default margin) and both
/// optima are reported.
pub fn solve_schedule(
    h: &PatternHypergraph,
    s: &LoadingSchedule,
    options: &LpOptions,
) -> Result<ScheduleOptimum, ExponentLpError> {
    let plain = LpOptions {
        margin: None,
        relax_vertex: options.relax_vertex,
    };
    let base = solve_audited(h, s, &plain)?.expect("the all-zero point is feasible");
    let strict_ok = check_admissibility(h, &base.witness, options.relax_vertex)?.strict_ok;
    let mut out = ScheduleOptimum {
        schedule: s.clone(),
        exponent: base.exponent,
        witness: base.witness,
        tight_rows: base.tight_rows,
        strict_ok,
        margin: None,
        margin_exponent: None,
        margin_witness: None,
    };
    if !strict_ok {
        let margin = options.margin.clone().unwrap_or_else(default_margin);
        let with_margin = LpOptions {
            margin: Some(margin.clone()),
            relax_vertex: options.relax_vertex,
        };
        let solved = solve_audited(h, s, &with_margin)?;
        out.margin = Some(margin);
        if let Some(m) = solved {
            out.margin_exponent = Some(m.exponent);
            out.margin_witness = Some(m.witness);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::cost_exponent;
    use crate::pattern::{k4_reference_schedule, Pair};

    #[test]
    fn k4_lp_has_fifteen_variables() {
        let lp = build_exponent_lp(&PatternHypergraph::k4(), &k4_reference_schedule(), &LpOptions::default()).unwrap();
        assert_eq!(lp.width(), 15);
    }

    #[test]
    fn single_triple_variables() {
        let h = PatternHypergraph::single_triple();
        let s = LoadingSchedule::parse_compact("v1 v2 v3 p12 p13 p23 t123").unwrap();
        let lp = build_exponent_lp(&h, &s, &LpOptions::default()).unwrap();
        assert_eq!(lp.names, ["x1", "x2", "x3", "y12", "y13", "y23", "z123", "T"]);
    }

    #[test]
    fn constant_branch_row_at_every_level() {
        let h = PatternHypergraph::k4();
        let lp = build_exponent_lp(&h, &k4_reference_schedule(), &LpOptions::default()).unwrap();
        for t in 1..=14 {
            let prefix = format!("level{t}[");
            assert!(lp.rows.iter().any(|r| r.label.starts_with(&prefix) && r.label.ends_with("#0")));
        }
    }

    #[test]
    fn k4_reference_lp_optimum() {
        let h = PatternHypergraph::k4();
        let s = k4_reference_schedule();
        let o = solve_schedule(&h, &s, &LpOptions::default()).unwrap();
        assert_eq!(o.exponent, ratio(241, 128));
        // The witness attains its own LP value under the cost model.
        assert_eq!(cost_exponent(&h, &s, &o.witness).unwrap().overall, o.exponent);
    }

    #[test]
    fn margin_rows_cut_the_feasible_region() {
        let h = PatternHypergraph::k4();
        let s = k4_reference_schedule();
        let opts = LpOptions {
            margin: Some(ratio(1, 1024)),
            relax_vertex: false,
        };
        let lp = build_exponent_lp(&h, &s, &opts).unwrap();
        assert!(lp.rows.iter().any(|r| r.label == "margin[f12/r1]"));
        let sol = solve_exact(&lp).unwrap();
        let layout = VarLayout::new(&h);
        let w = &sol.witness;
        assert!(&w[layout.y(Pair::new(1, 2))] - &w[layout.x(1)] >= ratio(1, 1024));
    }
}
