//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Every tolerance is pinned below.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hadamard::bounds::{evaluate_bound, thm24_rhs, thm25_rhs, BoundParams, TheoremId};
use hadamard::cli;
use hadamard::funcspec::{FunctionSpec, Interval};
use hadamard::harness::{
    findings, run_suite, FindingKind, SuiteId, SuiteStatus, TrialConfig, TrialRng, TrialStatus,
};
use hadamard::means::{k1, k2, prop31_check, MeanOrder};
use hadamard::quad::{lemma11_identity, SignConvention};
use hadamard::special::{beta, beta_duplication_check, gamma};

const IDENTITY_TOL: f64 = 1e-9;
const IDENTITY_BUDGET: Duration = Duration::from_secs(5);
const THM21_TOL: f64 = 1e-12;
const THM24_TOL: f64 = 1e-10;
const ASSERT_SLACK: f64 = 1e-9;
const MIN_ASSERTED: usize = 50;
const SUITE_BUDGET: Duration = Duration::from_secs(60);
const COLLAPSE_REL: f64 = 1e-12;
const DUPLICATION_REL: f64 = 1e-10;
const GAMMA_REL: f64 = 1e-12;
const PROP31_SLACK: f64 = 1e-12;
const ORACLE_DIGITS: usize = 50;
const JENSEN_SLACK: f64 = 1e-10;
const SEED: u64 = 42;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

fn identity_suite() -> Verdict {
    let start = Instant::now();
    let funcs = [
        FunctionSpec::Power(2),
        FunctionSpec::Power(3),
        FunctionSpec::Power(4),
        FunctionSpec::Exp(1.0),
        FunctionSpec::PolyNonneg(vec![0.0, 0.2, 0.0, 1.5]),
    ];
    let mut worst = 0.0f64;
    for i in 0..20 {
        let mut rng = TrialRng::new(SEED, "acceptance-identity", i);
        let (x, y) = (rng.uniform_in(0.0, 3.0), rng.uniform_in(0.0, 3.0));
        let iv = Interval::new(x.min(y), x.max(y).max(x.min(y) + 1e-3)).unwrap();
        for f in &funcs {
            let (l, r) = lemma11_identity(f, &iv).unwrap();
            worst = worst.max((l - r).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= IDENTITY_TOL && elapsed < IDENTITY_BUDGET,
        format!("max |lhs - rhs| = {worst:e} (tol {IDENTITY_TOL:e}), {elapsed:?}"),
    )
}

fn equality_witnesses() -> Verdict {
    let unit = Interval::unit();
    let plus = SignConvention::PlusDerived;
    let r1 = evaluate_bound(
        TheoremId::Thm21,
        &FunctionSpec::Power(1),
        &unit,
        &BoundParams::None,
        plus,
    )
    .unwrap();
    let q1 = BoundParams::Q { q: 1.0 };
    let r3 = evaluate_bound(TheoremId::Thm24, &FunctionSpec::Power(3), &unit, &q1, plus).unwrap();
    let r2 = evaluate_bound(TheoremId::Thm24, &FunctionSpec::Power(2), &unit, &q1, plus).unwrap();
    let ok1 = (r1.lhs_abs - 0.5).abs() <= THM21_TOL && (r1.rhs - 0.5).abs() <= THM21_TOL;
    let ok3 = (r3.lhs_abs - 0.75).abs() <= THM24_TOL && (r3.rhs - 0.75).abs() <= THM24_TOL;
    let ok2 =
        (r2.lhs_abs - 1.0 / 3.0).abs() <= THM24_TOL && (r2.rhs - 1.0 / 3.0).abs() <= THM24_TOL;
    verdict(
        ok1 && ok3 && ok2,
        format!(
            "thm2.1 x: ({}, {}); thm2.4 x^3: ({}, {}); thm2.4 x^2: ({}, {})",
            r1.lhs_abs, r1.rhs, r3.lhs_abs, r3.rhs, r2.lhs_abs, r2.rhs
        ),
    )
}

fn theorem_suites() -> (Verdict, Vec<String>) {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for t in [
        TheoremId::Thm21,
        TheoremId::Thm22,
        TheoremId::Thm23,
        TheoremId::Thm24,
        TheoremId::Thm25,
        TheoremId::Thm26,
        TheoremId::Thm27,
    ] {
        let suite = SuiteId::Theorem(t);
        let config = TrialConfig {
            seed: SEED,
            trials: 1000,
            suites: vec![suite],
            sign: SignConvention::PlusDerived,
            ..TrialConfig::default()
        };
        let batch = run_suite(&config, suite).unwrap();
        let s = &batch.summary;
        let violations = batch
            .records
            .iter()
            .filter(|r| r.status == TrialStatus::Fail || r.margin < -ASSERT_SLACK)
            .count();
        let ok = violations == 0 && s.errors == 0 && s.passed >= MIN_ASSERTED;
        pass &= ok;
        let mut line = format!(
            "{t}: {} ({} asserted, {violations} violations, {} filtered, {} errors, min margin {:e})",
            if ok { "PASS" } else { "FAIL" },
            s.passed + violations,
            s.filtered,
            s.errors,
            s.min_margin.unwrap_or(f64::NAN),
        );
        if matches!(t, TheoremId::Thm22 | TheoremId::Thm23) && violations > 0 {
            // The proof chain yields denominator 2 where 2^{2-1/p} is printed.
            // For thm2.3 it yields 2^{1-1/p+1/(qp)} and keeps 1/(b-a) inside
            // the power mean.
            let remaining = batch
                .records
                .iter()
                .filter(|r| r.is_violation())
                .filter(|r| {
                    let (p, q) = (r.instance.p.unwrap(), r.instance.q.unwrap());
                    let rhs = if t == TheoremId::Thm23 {
                        r.rhs * 2f64.powf(1.0 - 1.0 / (q * p))
                            / (r.instance.b - r.instance.a).powf((q - 1.0) / (q * p))
                    } else {
                        r.rhs * 2f64.powf(1.0 - 1.0 / p)
                    };
                    rhs < r.lhs - ASSERT_SLACK
                })
                .count();
            line.push_str(&format!(
                "; with the constants the proof yields: {remaining} violations"
            ));
        }
        lines.push(line);
    }
    let elapsed = start.elapsed();
    pass &= elapsed < SUITE_BUDGET;
    (
        verdict(pass, format!("total {elapsed:?} (budget {SUITE_BUDGET:?})")),
        lines,
    )
}

fn run_cli(args: &[&str]) -> i32 {
    let argv = std::iter::once("hadamard").chain(args.iter().copied());
    cli::run(argv, &mut Vec::new(), &mut Vec::new())
}

fn sign_discrepancy() -> Verdict {
    let suite = SuiteId::Theorem(TheoremId::Thm24);
    let config = TrialConfig {
        seed: SEED,
        trials: 1000,
        suites: vec![suite],
        sign: SignConvention::MinusAsPrinted,
        q_grid: vec![1.0, 1.5, 2.0, 3.0],
        ..TrialConfig::default()
    };
    let batch = run_suite(&config, suite).unwrap();
    let witness = batch.records.iter().find(|r| {
        r.pinned
            && r.instance.function == FunctionSpec::Power(3)
            && r.instance.a == 0.0
            && r.instance.b == 1.0
    });
    let Some(w) = witness.cloned() else {
        return verdict(false, "no x^3 on [0, 1] record");
    };
    let recorded = (w.lhs - 2.25).abs() <= THM24_TOL
        && (w.rhs - 0.75).abs() <= THM24_TOL
        && w.instance.q == Some(1.0)
        && w.status == TrialStatus::Fail;
    let f = findings(&config, &[batch]);
    let in_findings = f.iter().any(|x| {
        x.kind == FindingKind::SignConvention
            && x.record.as_ref().is_some_and(|r| r.trial == w.trial)
    });
    let code = run_cli(&[
        "verify",
        "--theorem",
        "thm2.4",
        "--sign",
        "minus",
        "--seed",
        "42",
    ]);
    verdict(
        recorded && in_findings && code == 1,
        format!(
            "lhs_abs = {}, rhs = {}, finding listed: {in_findings}, verify exit {code}",
            w.lhs, w.rhs
        ),
    )
}

fn q1_collapse() -> Verdict {
    let mut worst_rhs = 0.0f64;
    let mut worst_k = 0.0f64;
    let families = [
        FunctionSpec::Power(5),
        FunctionSpec::Exp(0.7),
        FunctionSpec::PolyNonneg(vec![1.0, 0.5, 0.25, 2.0]),
    ];
    for i in 0..200u64 {
        let mut rng = TrialRng::new(SEED, "acceptance-collapse", i);
        let a = rng.uniform_in(0.0, 4.0);
        let b = a + rng.uniform_in(1e-3, 1.0);
        let iv = Interval::new(a, b).unwrap();
        let f = match rng.int_in(0, 3) {
            3 => FunctionSpec::Power(rng.int_in(3, 8)),
            k => families[k as usize].clone(),
        };
        let (r4, r5) = (
            thm24_rhs(&f, &iv, 1.0).unwrap(),
            thm25_rhs(&f, &iv, 1.0).unwrap(),
        );
        worst_rhs = worst_rhs.max(rel(r5, r4));

        let n = MeanOrder::new(rng.int_in(3, 8)).unwrap();
        let (x, y) = (rng.uniform_in(0.0, 5.0), rng.uniform_in(0.0, 5.0));
        let (lo, hi) = (x.min(y), x.max(y) + 1e-3);
        worst_k = worst_k.max(rel(
            k2(lo, hi, n, 1.0).unwrap(),
            k1(lo, hi, n, 1.0).unwrap(),
        ));
    }
    verdict(
        worst_rhs <= COLLAPSE_REL && worst_k <= COLLAPSE_REL,
        format!("max rel gap thm2.5/thm2.4 {worst_rhs:e}, K1/K2 {worst_k:e}"),
    )
}

fn special_functions() -> Verdict {
    let mut worst = 0.0f64;
    for p in [0.5, 1.0, 1.5, 2.0, 3.0, 7.5] {
        let (l, r) = beta_duplication_check(p).unwrap();
        worst = worst.max(rel(l, r));
    }
    let g5 = rel(gamma(5.0).unwrap(), 24.0);
    let gh = rel(gamma(0.5).unwrap(), PI.sqrt());
    let b22 = rel(beta(2.0, 2.0).unwrap(), 1.0 / 6.0);
    verdict(
        worst <= DUPLICATION_REL && g5 <= GAMMA_REL && gh <= GAMMA_REL && b22 <= GAMMA_REL,
        format!("duplication {worst:e}, gamma(5) {g5:e}, gamma(1/2) {gh:e}, B(2,2) {b22:e}"),
    )
}

fn prop31_suite() -> Verdict {
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for i in 0..500u64 {
        let mut rng = TrialRng::new(SEED, "acceptance-prop31", i);
        let (mut a, mut b) = (rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0));
        while a == b {
            b = rng.uniform_in(-3.0, 3.0);
        }
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        for n in 1..=8 {
            let r = prop31_check(a, b, MeanOrder::new(n).unwrap()).unwrap();
            min_margin = min_margin.min(r.margin());
            if r.margin() < -PROP31_SLACK {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0,
        format!("4000 checks, {violations} violations, min margin {min_margin:e}"),
    )
}

fn proposition_reports() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for suite in [SuiteId::Prop32, SuiteId::Prop33, SuiteId::Prop34] {
        let config = TrialConfig {
            seed: SEED,
            trials: 1000,
            suites: vec![suite],
            ..TrialConfig::default()
        };
        let batch = run_suite(&config, suite).unwrap();
        let in_domain = batch.records.iter().all(|r| {
            let n = match r.instance.function {
                FunctionSpec::Power(n) => n,
                _ => 0,
            };
            (3..=8).contains(&n) && r.instance.a > 0.0 && r.instance.b <= 5.0
        });
        let violations: Vec<_> = batch.records.iter().filter(|r| r.is_violation()).collect();
        let all_checked = violations.iter().all(|r| {
            r.oracle.as_ref().is_some_and(|o| {
                o.digits >= ORACLE_DIGITS
                    && o.forms.iter().all(|(_, c)| {
                        c.lhs.chars().filter(char::is_ascii_digit).count() >= ORACLE_DIGITS
                            && c.rhs.chars().filter(char::is_ascii_digit).count() >= ORACLE_DIGITS
                    })
            })
        });
        let f = findings(&config, std::slice::from_ref(&batch));
        let findings_confirmed = f
            .iter()
            .filter(|x| x.kind == FindingKind::PropositionViolation)
            .all(|x| {
                x.record
                    .as_ref()
                    .is_some_and(|r| r.oracle.as_ref().is_some_and(|o| o.confirmed))
            });
        let reported = !batch.asserted && batch.summary.status == SuiteStatus::Reported;
        ok &= in_domain && all_checked && findings_confirmed && reported;
        parts.push(format!(
            "{suite}: {} violations, {} confirmed",
            violations.len(),
            batch.summary.confirmed_violations.unwrap_or(0)
        ));
    }
    verdict(ok, parts.join("; "))
}

fn jensen_suite() -> Verdict {
    let config = TrialConfig {
        seed: SEED,
        trials: 200,
        suites: vec![SuiteId::Jensen],
        ..TrialConfig::default()
    };
    let batch = run_suite(&config, SuiteId::Jensen).unwrap();
    let min = batch.summary.min_margin.unwrap_or(f64::NAN);
    verdict(
        min >= -JENSEN_SLACK && batch.summary.passed == 200,
        format!("200 pairs, min lhs - rhs {min:e}"),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let run = || {
        let status = Command::new(env!("CARGO_BIN_EXE_hadamard"))
            .args([
                "verify",
                "--theorem",
                "all",
                "--seed",
                "42",
                "--format",
                "json",
                "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        (status.code(), std::fs::read(&out).unwrap())
    };
    let (c1, first) = run();
    let (c2, second) = run();
    verdict(
        first == second && c1 == c2,
        format!("{} bytes, identical: {}", first.len(), first == second),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: u32, name: &str, v: Verdict| {
        all &= v.pass;
        println!(
            "criterion {n:>2} [{name}]: {} : {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    };
    report(1, "identity suite", identity_suite());
    report(2, "equality witnesses", equality_witnesses());
    let (v, lines) = theorem_suites();
    for l in lines {
        println!("    {l}");
    }
    report(3, "theorem property suites", v);
    report(4, "sign-discrepancy reproduction", sign_discrepancy());
    report(5, "q = 1 collapse", q1_collapse());
    report(6, "special functions", special_functions());
    report(7, "proposition 3.1 suite", prop31_suite());
    report(8, "propositions 3.2-3.4 reports", proposition_reports());
    report(9, "jensen suite", jensen_suite());
    report(10, "determinism", determinism());
    if all {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria fail");
        ExitCode::FAILURE
    }
}
