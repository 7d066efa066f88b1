//! One test per acceptance criterion. Each prints a `PASS` or `FAIL` line
//! before asserting.

use hyperwalk::assoc::{
    build_reduction, find_certificate, is_associative, verify_certificate, AssocCertificate, Associativity, CertCase,
    TernaryOperator,
};
use hyperwalk::cli_io::{parse_params, parse_pattern, parse_schedule};
use hyperwalk::complexity::{check_admissibility, cost_exponent, ConditionKind, ParameterExponents};
use hyperwalk::lp::{
    build_exponent_lp, optimize_over_schedules, solve_exact, verify_certificate as verify_lp, LpOptions,
    OptimizeConfig,
};
use hyperwalk::oracle::{find_subhypergraph, plant_pattern, verify_embedding, InstanceHypergraph, QueryCounter};
use hyperwalk::pattern::{is_valid_schedule, LoadingSchedule, Pair, PatternHypergraph, ScheduleElement, Triple};
use hyperwalk::rational::{format_rational, ratio, Rational};
use hyperwalk::schedule_enum::{count_complete_schedules, enumerate_complete_schedules};
use hyperwalk::stats::{verify_tail_bounds, TailGrid};
use hyperwalk::walk_sim::{
    mc_lambda_claim, mc_lemma3_random, mc_pair_swap, mc_regularity, mc_vertex_swap, Lemma3Params, RegularityParams,
    SwapParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn k4() -> PatternHypergraph {
    parse_pattern(&fixture("k4.json")).unwrap()
}

fn h7() -> PatternHypergraph {
    parse_pattern(&fixture("h7_assoc.json")).unwrap()
}

/// Writes the verdict line straight to stderr so it shows even for passing
/// tests, whose captured output the harness discards.
fn verdict(id: u32, title: &str, ok: bool, detail: &str) {
    let line = format!("criterion {id:>2} {}: {title} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_01_k4_schedule_count() {
    let start = Instant::now();
    let count = count_complete_schedules(&k4()).unwrap();
    let took = start.elapsed();
    verdict(
        1,
        "K4 schedule count",
        count == 1_680_384 && took < Duration::from_secs(60),
        &format!("count {count}, {took:?}"),
    );
}

/// Independent oracle: filter all orderings of the seven elements through a
/// direct statement of the loading rules.
fn brute_force_single_triple() -> usize {
    let elems = ["v1", "v2", "v3", "p12", "p13", "p23", "t123"];
    let needs: [&[usize]; 7] = [&[], &[], &[], &[0, 1], &[0, 2], &[1, 2], &[3, 4, 5]];
    let mut count = 0;
    let mut perm: Vec<usize> = (0..7).collect();
    fn permute(k: usize, perm: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if k == perm.len() {
            f(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(k + 1, perm, f);
            perm.swap(k, i);
        }
    }
    permute(0, &mut perm, &mut |p| {
        let pos = |e: usize| p.iter().position(|&x| x == e).unwrap();
        if (0..7).all(|e| needs[e].iter().all(|&d| pos(d) < pos(e))) {
            count += 1;
        }
    });
    let _ = elems;
    count
}

#[test]
fn criterion_02_single_triple_count() {
    let h = parse_pattern(&fixture("triple.json")).unwrap();
    let start = Instant::now();
    let listed = enumerate_complete_schedules(&h).unwrap().count();
    let counted = count_complete_schedules(&h).unwrap();
    let took = start.elapsed();
    let oracle = brute_force_single_triple();
    verdict(
        2,
        "single triple count",
        listed == 48 && counted == 48 && oracle == 48 && took < Duration::from_secs(1),
        &format!("enumerated {listed}, counted {counted}, brute force {oracle}, {took:?}"),
    );
}

fn k4_schedule() -> LoadingSchedule {
    parse_schedule(&fixture("k4_schedule.json")).unwrap()
}

fn k4_params() -> ParameterExponents {
    parse_params(&fixture("k4_params.json"), &k4()).unwrap()
}

#[test]
fn criterion_03_k4_evaluation() {
    let b = cost_exponent(&k4(), &k4_schedule(), &k4_params()).unwrap();
    verdict(
        3,
        "K4 cost exponent at the reported parameters",
        b.overall == ratio(241, 128),
        &format!("overall {}", format_rational(&b.overall)),
    );
}

#[test]
fn criterion_04_k4_optimization() {
    let h = k4();
    let s = k4_schedule();
    let lp = build_exponent_lp(&h, &s, &LpOptions::default()).unwrap();
    let start = Instant::now();
    let reps = 20;
    let mut sol = solve_exact(&lp).unwrap();
    for _ in 1..reps {
        sol = solve_exact(&lp).unwrap();
    }
    let per_lp = start.elapsed() / reps;
    let audited = verify_lp(&lp, &sol).is_ok();
    let fixed = sol.optimum.clone().unwrap();

    let start = Instant::now();
    let r = optimize_over_schedules(&h, &OptimizeConfig::default()).unwrap();
    let took = start.elapsed();
    let ok = fixed == ratio(241, 128)
        && audited
        && per_lp < Duration::from_millis(20)
        && r.exponent == ratio(241, 128)
        && r.argmins.contains(&s)
        && took < Duration::from_secs(4 * 3600);
    verdict(
        4,
        "K4 LP optimum and exhaustive minimum",
        ok,
        &format!(
            "fixed-schedule LP {} in {per_lp:?} per solve, certificate audited {audited}; exhaustive minimum {} over {} argmins, reference schedule among them {}, {took:?}",
            format_rational(&fixed),
            format_rational(&r.exponent),
            r.argmins.len(),
            r.argmins.contains(&s)
        ),
    );
}

#[test]
fn criterion_05_h7_exponent() {
    let h = h7();
    let s = parse_schedule(&fixture("h7_schedule.json")).unwrap();
    let p = parse_params(&fixture("h7_params.json"), &h).unwrap();
    let b = cost_exponent(&h, &s, &p).unwrap();
    let lp = build_exponent_lp(&h, &s, &LpOptions::default()).unwrap();
    let sol = solve_exact(&lp).unwrap();
    let lp_value = sol.optimum.clone().unwrap();
    let target = ratio(169, 80);
    let worst = b
        .levels
        .iter()
        .max_by(|a, c| a.total_term_exponent.cmp(&c.total_term_exponent))
        .unwrap();
    verdict(
        5,
        "H7 exponent",
        b.overall == target && lp_value <= target,
        &format!(
            "evaluation {} (largest term at level {} {} = {}), fixed-schedule LP {}",
            format_rational(&b.overall),
            worst.t,
            worst.element,
            format_rational(&worst.total_term_exponent),
            format_rational(&lp_value)
        ),
    );
}

#[test]
fn criterion_06_admissibility() {
    let k4_strict = check_admissibility(&k4(), &k4_params(), false).unwrap();
    let h = h7();
    let p = parse_params(&fixture("h7_params.json"), &h).unwrap();
    let relaxed = check_admissibility(&h, &p, true).unwrap();
    let literal = check_admissibility(&h, &p, false).unwrap();
    let failing: BTreeSet<String> = literal.failing().map(|c| c.id.clone()).collect();
    let full_vertices: BTreeSet<String> = p
        .x
        .iter()
        .filter(|(_, x)| **x == Rational::from_integer(1.into()))
        .map(|(v, _)| format!("n/r{v}"))
        .collect();
    let only_vertex_ratios = literal
        .failing()
        .all(|c| c.kind == ConditionKind::Strict && c.slack == Rational::from_integer(0.into()));
    let ok = k4_strict.strict_ok
        && relaxed.strict_ok
        && !literal.strict_ok
        && literal.nonstrict_ok
        && only_vertex_ratios
        && failing == full_vertices;
    verdict(
        6,
        "admissibility",
        ok,
        &format!(
            "K4 strict {}, H7 relaxed {}, H7 literal {} failing {:?}",
            k4_strict.strict_ok, relaxed.strict_ok, literal.strict_ok, failing
        ),
    );
}

#[test]
fn criterion_07_tightness_identity() {
    let p = k4_params();
    let y = |a, b| p.y[&Pair::new(a, b)].clone();
    let x = |v| p.x[&v].clone();
    let bound = y(1, 2) + y(1, 3) + y(2, 3) - (x(1) + x(2) + x(3));
    let z = p.z[&Triple::new(1, 2, 3)].clone();
    verdict(
        7,
        "tightness of z123",
        bound == ratio(241, 128) && z == bound,
        &format!("bound {}, z123 {}", format_rational(&bound), format_rational(&z)),
    );
}

#[test]
fn criterion_08_hypergeometric_tails() {
    let start = Instant::now();
    let r = verify_tail_bounds(&TailGrid::standard(60), false);
    let took = start.elapsed();
    verdict(
        8,
        "hypergeometric tail bounds for N <= 60",
        r.ok() && r.points_checked > 0 && took < Duration::from_secs(300),
        &format!(
            "{} points, {} skipped, {} resolved exactly, {} violations, {took:?}",
            r.points_checked,
            r.skipped,
            r.resolved_exactly,
            r.violations.len()
        ),
    );
}

#[test]
fn criterion_09_lambda_claim() {
    let r = mc_lambda_claim(4, 10_000, hyperwalk::DEFAULT_SEED);
    verdict(
        9,
        "Lambda claim at n = 4",
        r.trials == 10_000 && r.failures == 0,
        &format!("{} instances, {} failures", r.trials, r.failures),
    );
}

#[test]
fn criterion_10_lemma3_coupling() {
    let params = Lemma3Params {
        gamma_size: 100,
        sym_diff: 20,
        p: 120,
        r: 30,
    };
    let r = mc_lemma3_random(8, &params, 10_000, hyperwalk::DEFAULT_SEED).unwrap();
    let again = mc_lemma3_random(8, &params, 10_000, hyperwalk::DEFAULT_SEED).unwrap();
    verdict(
        10,
        "coupling concentration",
        r.sym_diff == 20 && r.frequency >= 0.99 && r.frequency == again.frequency,
        &format!(
            "frequency {} at threshold {:.3}, largest difference {}",
            r.frequency, r.threshold, r.max_observed
        ),
    );
}

#[test]
fn criterion_11_regularity_and_swaps() {
    let seed = hyperwalk::DEFAULT_SEED;
    let reg = mc_regularity(
        &RegularityParams {
            r_i: 16,
            r_j: 16,
            r_k: 16,
            f_ij: 1024,
            f_ik: 1024,
            kappa: 1,
        },
        1000,
        seed,
    );
    let swap = SwapParams {
        r_i: 16,
        r_j: 16,
        r_k: 16,
        f_ij: 1024,
        f_ik: 1024,
        f_jk: 1024,
    };
    let vs = mc_vertex_swap(&swap, 1000, seed);
    let ps = mc_pair_swap(&swap, 1000, seed);
    let ok = matches!(&reg, Ok(r) if r.frequency <= r.bound)
        && matches!(&vs, Ok(r) if r.frequency <= 0.01)
        && matches!(&ps, Ok(r) if r.frequency <= 0.01);
    let show = |name: &str, r: Result<String, String>| match r {
        Ok(s) => format!("{name}: {s}"),
        Err(e) => format!("{name}: {e}"),
    };
    verdict(
        11,
        "regularity and swap lemmas at r = 16, f = 1024",
        ok,
        &[
            show(
                "regularity",
                reg.map(|r| format!("failure {} vs bound {}", r.frequency, r.bound)).map_err(|e| e.to_string()),
            ),
            show("vertex swap", vs.map(|r| format!("exceedance {}", r.frequency)).map_err(|e| e.to_string())),
            show("pair swap", ps.map(|r| format!("exceedance {}", r.frequency)).map_err(|e| e.to_string())),
        ]
        .join("; "),
    );
}

/// Every 4-subset of `1..=n` spanning all four triples.
fn k4_subsets(g: &InstanceHypergraph) -> Vec<[u32; 4]> {
    let e = g.hyperedges();
    let n = g.n();
    let mut out = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            for c in b + 1..=n {
                for d in c + 1..=n {
                    if [[a, b, c], [a, b, d], [a, c, d], [b, c, d]].iter().all(|t| e.contains(t)) {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// All case certificates by direct enumeration of the definition.
fn certificates(f: &TernaryOperator, case: CertCase) -> Vec<[u32; 7]> {
    let n = f.n();
    let mut out = Vec::new();
    for t in 0..n.pow(5) {
        let mut a = [0u32; 5];
        let mut i = t;
        for slot in a.iter_mut().rev() {
            *slot = i % n + 1;
            i /= n;
        }
        let c = AssocCertificate::complete(f, case, a);
        let [a1, a2, _, a4, a5, a6, a7] = c.tuple;
        let differs = match case {
            CertCase::I => f.apply(a6, a4, a5) != f.apply(a1, a7, a5),
            CertCase::II => f.apply(a1, a6, a5) != f.apply(a1, a2, a7),
        };
        if differs {
            out.push(c.tuple);
        }
    }
    out
}

fn random_operator(rng: &mut ChaCha8Rng, n: u32) -> TernaryOperator {
    match rng.gen_range(0..4) {
        0 => TernaryOperator::from_fn(n, |_, _, _| 0).unwrap_or_else(|_| {
            let c = rng.gen_range(1..=n);
            TernaryOperator::from_fn(n, |_, _, _| c).unwrap()
        }),
        1 => {
            let mut f = TernaryOperator::modular_sum(n);
            for _ in 0..rng.gen_range(0..3) {
                let (a, b, c, v) = (rng.gen_range(1..=n), rng.gen_range(1..=n), rng.gen_range(1..=n), rng.gen_range(1..=n));
                f.set(a, b, c, v).unwrap();
            }
            f
        }
        2 => {
            // projections are associative
            if rng.gen_bool(0.5) {
                TernaryOperator::from_fn(n, |a, _, _| a).unwrap()
            } else {
                TernaryOperator::from_fn(n, |_, _, c| c).unwrap()
            }
        }
        _ => {
            let table = (0..n.pow(3)).map(|_| rng.gen_range(1..=n)).collect();
            TernaryOperator::new(n, table).unwrap()
        }
    }
}

#[test]
fn criterion_12_oracle_and_associativity() {
    let h = k4();
    let mut recovered = 0;
    for seed in 0..100u64 {
        let density = [0.0, 0.1, 0.3][seed as usize % 3];
        let (g, planted) = plant_pattern(15, &h, density, seed).unwrap();
        let mut counter = QueryCounter::new();
        let found = find_subhypergraph(&g, &h, &mut counter);
        let subsets = k4_subsets(&g);
        let mut planted_set = planted.clone();
        planted_set.sort();
        let planted_listed = subsets.iter().any(|s| s.as_slice() == planted_set.as_slice());
        let agrees = match &found {
            Some(e) => {
                let mut check = QueryCounter::new();
                subsets.first().map(|s| s.to_vec()) == Some(e.clone()) && verify_embedding(&g, &h, e, &mut check)
            }
            None => false,
        };
        let exact_when_sparse = density > 0.0 || found.as_deref() == Some(planted_set.as_slice());
        if planted_listed && agrees && exact_when_sparse {
            recovered += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyperwalk::DEFAULT_SEED);
    let mut equivalence_ok = 0;
    let mut associative_seen = 0;
    for _ in 0..1000 {
        let f = random_operator(&mut rng, 4);
        let assoc = is_associative(&f) == Associativity::Associative;
        associative_seen += assoc as u32;
        let c1 = find_certificate(&f, CertCase::I);
        let c2 = find_certificate(&f, CertCase::II);
        let certs_ok = c1.iter().chain(c2.iter()).all(|c| verify_certificate(&f, c));
        if assoc == (c1.is_none() && c2.is_none()) && certs_ok {
            equivalence_ok += 1;
        }
    }

    let mut reduction_ok = 0;
    let mut reduction_total = 0;
    for n in 2..=6u32 {
        for _ in 0..4 {
            let f = random_operator(&mut rng, n);
            for case in [CertCase::I, CertCase::II] {
                reduction_total += 1;
                let red = build_reduction(&f, case);
                let occ = red.occurrences(&mut QueryCounter::new());
                let direct = certificates(&f, case);
                let first = find_certificate(&f, case).map(|c| c.tuple);
                if occ == direct && red.find_occurrence(&mut QueryCounter::new()) == first {
                    reduction_ok += 1;
                }
            }
        }
    }

    verdict(
        12,
        "oracle recovery and associativity equivalence",
        recovered == 100 && equivalence_ok == 1000 && associative_seen > 0 && reduction_ok == reduction_total,
        &format!(
            "planted K4 recovered {recovered}/100; equivalence {equivalence_ok}/1000 ({associative_seen} associative); reduction agrees {reduction_ok}/{reduction_total}"
        ),
    );
}

#[test]
fn reference_schedules_are_valid() {
    assert!(is_valid_schedule(&k4(), &k4_schedule()));
    let s = parse_schedule(&fixture("h7_schedule.json")).unwrap();
    assert!(is_valid_schedule(&h7(), &s));
    assert!(matches!(s.elements()[0], ScheduleElement::Vertex(1)));
}
