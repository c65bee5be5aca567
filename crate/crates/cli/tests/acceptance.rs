//! Acceptance suite. Runs criteria 1 to 8 in order and prints one
//! `PASS criterion N` or `FAIL criterion N` line for each.

#![allow(clippy::eq_op)]

use std::process::Command;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use saito_forge_core::family::{legal_pairs, random_instance, DivisorInstance, FamilyParams};
use saito_forge_core::oracle::{freeness_probe, predicted_numerator, series_coefficient};
use saito_forge_core::pipeline::instance_seed;
use saito_forge_core::saito::{
    build_lemma_system, build_saito_matrix, check_eq3, check_eq4, lemma_module_hilbert, lemma_module_series,
    lemma_syzygy_generator, solve_lemma_system, RouteChoice,
};
use saito_forge_core::{parse_poly, Field, Monomial, Poly, Var};
use serde_json::Value;

const SEED: u64 = 20_240_229;
const FP: Field = Field::Prime(1009);

/// One instance of the criterion-1 population.
#[derive(Clone)]
struct Case {
    d: u32,
    alpha: u32,
    beta: u32,
    field: Field,
    seed: u64,
}

impl Case {
    fn field_arg(&self) -> String {
        match self.field {
            Field::Rationals => "q".into(),
            Field::Prime(p) => format!("fp:{p}"),
        }
    }

    fn params(&self) -> FamilyParams {
        random_instance(self.d, self.alpha, self.beta, self.seed, self.field).unwrap()
    }

    fn label(&self) -> String {
        format!("d={} α={} β={} field={} seed={}", self.d, self.alpha, self.beta, self.field_arg(), self.seed)
    }
}

fn population() -> Vec<Case> {
    let mut out = Vec::new();
    for d in 5..=11 {
        for (alpha, beta) in legal_pairs(d) {
            for trial in 0..4 {
                let field = if trial < 3 { FP } else { Field::Rationals };
                out.push(Case {
                    d,
                    alpha,
                    beta,
                    field,
                    seed: instance_seed(SEED, d, alpha, beta, trial),
                });
            }
        }
    }
    out
}

struct Outcome {
    code: Option<i32>,
    stdout: String,
    stderr: String,
}

fn saito_forge(args: &[&str]) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_saito-forge"))
        .args(args)
        .output()
        .expect("binary runs");
    Outcome {
        code: out.status.code(),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn verify_case(case: &Case, extra: &[&str]) -> (Outcome, Option<Value>) {
    let (d, a, b, s, f) = (
        case.d.to_string(),
        case.alpha.to_string(),
        case.beta.to_string(),
        case.seed.to_string(),
        case.field_arg(),
    );
    let mut args = vec!["verify", "--d", &d, "--alpha", &a, "--beta", &b, "--seed", &s, "--field", &f];
    args.extend_from_slice(extra);
    let out = saito_forge(&args);
    let json = serde_json::from_str(&out.stdout).ok();
    (out, json)
}

struct Criterion {
    failures: Vec<String>,
}

impl Criterion {
    fn new() -> Self {
        Criterion { failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn report(n: u32, c: Criterion, summary: &str) -> bool {
    let pass = c.failures.is_empty();
    println!("{} criterion {n}: {summary}", if pass { "PASS" } else { "FAIL" });
    for f in c.failures.iter().take(10) {
        println!("    {f}");
    }
    if c.failures.len() > 10 {
        println!("    ... {} more", c.failures.len() - 10);
    }
    pass
}

fn check_names_failed(report: &Value) -> Vec<String> {
    report["checks"]
        .as_array()
        .map(|cs| {
            cs.iter()
                .filter(|c| c["pass"] == Value::Bool(false))
                .map(|c| c["name"].as_str().unwrap_or("?").to_string())
                .collect()
        })
        .unwrap_or_default()
}

fn criterion_1(cases: &[Case], reports: &mut Vec<Option<Value>>) -> bool {
    let mut c = Criterion::new();
    let start = Instant::now();
    for case in cases {
        let (out, json) = verify_case(case, &[]);
        c.check(out.code == Some(0), || {
            format!("{}: exit {:?}, {}", case.label(), out.code, out.stderr.trim())
        });
        if let Some(j) = &json {
            let det = &j["saito"]["residuals"]["det"];
            c.check(det.as_str() == Some("0"), || format!("{}: det residual {det}", case.label()));
            let unit = &j["saito"]["unit_c"];
            c.check(!unit.is_null() && unit.as_str() != Some("0"), || format!("{}: unit {unit}", case.label()));
        }
        reports.push(json);
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        c,
        &format!("`verify` exits 0 on {} instances of every legal shape, d = 5..11 ({secs:.1} s)", cases.len()),
    )
}

fn same_up_to_scalar(k: &[Poly; 3], g: &[Poly; 3]) -> bool {
    let Some((i, m, gc)) = (0..3).find_map(|i| g[i].leading_term().map(|(m, c)| (i, *m, c.clone()))) else {
        return false;
    };
    let kc = k[i].coeff(&m);
    if kc.is_zero() {
        return false;
    }
    let s = gc.checked_div(&kc).unwrap();
    k.clone().map(|p| p.scale(&s)) == *g
}

fn criterion_2(cases: &[Case]) -> bool {
    let mut c = Criterion::new();
    for case in cases {
        let params = case.params();
        let v = params.v();
        let sys = build_lemma_system(&params, &params.field.one());
        let sol = match solve_lemma_system(&sys) {
            Ok(s) => s,
            Err(e) => {
                c.check(false, || format!("{}: {e}", case.label()));
                continue;
            }
        };
        c.check(sys.residual(&sol.h).iter().all(Poly::is_zero), || {
            format!("{}: particular solution has a residual", case.label())
        });
        c.check(sol.kernel.len() == 1, || {
            format!("{}: kernel dimension {}", case.label(), sol.kernel.len())
        });
        if let Some(k) = sol.kernel.first() {
            c.check(same_up_to_scalar(k, &lemma_syzygy_generator(&params)), || {
                format!("{}: kernel is not the syzygy generator", case.label())
            });
        }
        for i in 0..=2 * v + 3 {
            let hf = lemma_module_hilbert(&params, i) as i64;
            let series = lemma_module_series(&params, i);
            c.check(hf == series, || format!("{}: HF({i}) = {hf}, series {series}", case.label()));
            if i >= 2 * v - 1 {
                c.check(hf == 0, || format!("{}: HF({i}) = {hf} ≠ 0", case.label()));
            }
        }
    }
    report(2, c, "graded system solvable, 1-dimensional kernel spanned by the generator, HF matches series")
}

fn criterion_3(cases: &[Case], reports: &[Option<Value>]) -> bool {
    let mut c = Criterion::new();
    let expected = |d: u32| -> u64 {
        match d {
            5 => 12,
            7 => 27,
            9 => 48,
            6 => 19,
            8 => 37,
            10 => 61,
            _ => {
                let v = (d / 2) as u64;
                if d % 2 == 1 {
                    3 * v * v
                } else {
                    3 * v * v - 3 * v + 1
                }
            }
        }
    };
    for d in 5..=11 {
        let num = predicted_numerator(d);
        let v = d / 2;
        let tail = series_coefficient(&num, 3, 3 * v as i64 + 3);
        c.check(tail as u64 == expected(d), || format!("d={d}: series tail {tail}"));
    }
    for (case, rep) in cases.iter().zip(reports) {
        let Some(rep) = rep else {
            c.check(false, || format!("{}: no report", case.label()));
            continue;
        };
        let res = &rep["resolution"];
        let want = expected(case.d);
        c.check(res["stabilized"].as_u64() == Some(want), || {
            format!("{}: stabilized {} (want {want})", case.label(), res["stabilized"])
        });
        c.check(res["t_max"].as_u64() == Some(3 * (case.d / 2) as u64 + 3), || {
            format!("{}: t_max {}", case.label(), res["t_max"])
        });
        let rows = res["table"].as_array().cloned().unwrap_or_default();
        c.check(
            !rows.is_empty() && rows.iter().all(|r| r["computed"].as_i64() == r["predicted"].as_i64()),
            || format!("{}: HF disagrees at t = {}", case.label(), res["first_mismatch"]),
        );
    }
    report(3, c, "stabilized HF 12/27/48 (odd) and 19/37/61 (even), full agreement for t ≤ 3v+3")
}

fn criterion_4(cases: &[Case], reports: &[Option<Value>]) -> bool {
    let mut c = Criterion::new();
    for (case, rep) in cases.iter().zip(reports) {
        let ps = rep.as_ref().map(|r| r["point_support"].clone()).unwrap_or(Value::Null);
        let bound = 3 * (case.d / 2) as u64 + 2;
        let ok = ps["status"] == "Certified"
            && ps["n_x"].as_u64().is_some_and(|n| n <= bound)
            && ps["n_y"].as_u64().is_some_and(|n| n <= bound);
        c.check(ok, || format!("{}: {ps}", case.label()));
    }
    report(4, c, "x^N, y^N ∈ J(F) with N ≤ 3v+2 on every instance")
}

fn criterion_5(cases: &[Case], reports: &[Option<Value>]) -> bool {
    let mut c = Criterion::new();
    let mut odd = 0;
    for (case, rep) in cases.iter().zip(reports) {
        if case.d % 2 == 0 {
            continue;
        }
        odd += 1;
        let Some(rep) = rep else {
            c.check(false, || format!("{}: no report", case.label()));
            continue;
        };
        let route = rep["saito"]["route"].as_str().unwrap_or("");
        c.check(route.starts_with("Explicit") && rep["saito"]["pass"] == true, || {
            format!("{}: explicit route {route} did not pass", case.label())
        });
        let ag = &rep["route_agreement"];
        c.check(ag["oracle_pass"] == true && ag["columns_in_oracle_span"] == true, || {
            format!("{}: route agreement {ag}", case.label())
        });
    }
    // The oracle route through the binary, on one instance per odd degree.
    for d in [5, 7, 9, 11] {
        let case = cases.iter().find(|k| k.d == d && k.field == FP).unwrap();
        let (out, json) = verify_case(case, &["--route", "oracle"]);
        let route = json.as_ref().map(|j| j["saito"]["route"].clone()).unwrap_or(Value::Null);
        c.check(out.code == Some(0) && route == "Oracle", || {
            format!("{}: `verify --route oracle` exit {:?}, route {route}", case.label(), out.code)
        });
    }
    report(5, c, &format!("explicit and oracle routes agree on {odd} odd-degree instances"))
}

fn criterion_6(cases: &[Case]) -> bool {
    let mut c = Criterion::new();
    let mut n = 0;
    for case in cases.iter().filter(|k| k.d % 2 == 1 && k.beta >= 1) {
        n += 1;
        let inst = DivisorInstance::build(case.params()).unwrap();
        let sm = build_saito_matrix(&inst, RouteChoice::Auto).unwrap();
        let ing = sm.ingredients.as_ref().unwrap();
        c.check(check_eq3(&inst, ing).is_zero(), || format!("{}: eq3 residual", case.label()));
        match check_eq4(&inst, ing) {
            Ok(s) => {
                c.check(s.total.is_zero(), || format!("{}: eq4 residual", case.label()));
                c.check(s.z2.is_zero() && s.z1.is_zero() && s.z0.is_zero(), || {
                    format!("{}: eq4 strata", case.label())
                });
                c.check(s.g1h4_minus_g2h2.is_zero(), || format!("{}: G1H4 ≠ G2H2", case.label()));
            }
            Err(e) => c.check(false, || format!("{}: {e}", case.label())),
        }
        let d = inst.field().from_i64(case.d as i64);
        c.check(inst.f.euler_check().ok() == Some(d), || format!("{}: Euler", case.label()));
    }
    report(6, c, &format!("eq3, eq4 strata, G1H4 = G2H2 and Euler on {n} odd β ≥ 1 instances"))
}

fn expect_fail(c: &mut Criterion, what: &str, args: &[&str], relevant: &[&str]) {
    let out = saito_forge(args);
    c.check(out.code == Some(1), || format!("{what}: exit {:?}", out.code));
    let failed = serde_json::from_str::<Value>(&out.stdout)
        .map(|j| check_names_failed(&j))
        .unwrap_or_default();
    for name in relevant {
        c.check(failed.iter().any(|f| f == name), || format!("{what}: `{name}` did not fail ({failed:?})"));
    }
}

fn criterion_7() -> bool {
    let mut c = Criterion::new();
    // x divides F2.
    expect_fail(
        &mut c,
        "broken divisibility",
        &["verify", "--d", "7", "--f1", "1", "--f2", "x^3 + x^2*y + x*y^2", "--field", "fp:1009"],
        &["validation"],
    );
    // F1 = (x + y)^2 without the repeated-factor mode.
    expect_fail(
        &mut c,
        "square factor in F1",
        &[
            "verify", "--d", "9", "--alpha", "2", "--f1", "x^2 + 2*x*y + y^2", "--f2", "x^3 + y^3", "--field",
            "fp:1009",
        ],
        &["validation"],
    );
    // A random quintic in place of F.
    let quintic = Poly::from_terms(
        FP,
        Monomial::of_degree(5, 3).into_iter().enumerate().map(|(i, m)| {
            let k = (instance_seed(SEED, 5, 0, 0, i as u32) % 19) as i64 - 9;
            (m, FP.from_i64(k))
        }),
    )
    .render();
    expect_fail(
        &mut c,
        "random quintic",
        &["verify", "--d", "5", "--f1", "1", "--f2", "x^2 + x*y + y^2", "--field", "fp:1009", "--poly", &quintic],
        &["family_formula", "saito", "resolution"],
    );
    let fermat = parse_poly("x^5 + y^5 + z^5", FP).unwrap();
    let probe = freeness_probe(&fermat, 9);
    c.check(!probe.found, || format!("Fermat quintic probe found {:?}", probe.column_degrees));
    report(7, c, "negative controls fail in the relevant check; no Saito assembly for the Fermat quintic up to degree 9")
}

fn poly_strategy(field: Field) -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u32..4, 0u32..4, 0u32..4), -20i64..20), 0..8).prop_map(move |terms| {
        Poly::from_terms(
            field,
            terms
                .into_iter()
                .map(|((a, b, c), k)| (Monomial::new(a, b, c), field.from_i64(k))),
        )
    })
}

fn form_strategy(field: Field, t: u32, nvars: usize) -> impl Strategy<Value = Poly> {
    let monos = Monomial::of_degree(t, nvars);
    prop::collection::vec(-20i64..20, monos.len()).prop_map(move |cs| {
        Poly::from_terms(field, monos.iter().copied().zip(cs.into_iter().map(|c| field.from_i64(c))))
    })
}

fn criterion_8() -> bool {
    let mut c = Criterion::new();
    let runner = || {
        TestRunner::new(Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let fields = [Field::Rationals, FP, Field::Prime(2_305_843_009_213_693_951)];

    for field in fields {
        let r = runner().run(&poly_strategy(field), |p| {
            prop_assert_eq!(parse_poly(&p.render(), field).unwrap(), p);
            Ok(())
        });
        c.check(r.is_ok(), || format!("round trip over {field:?}: {r:?}"));

        let r = runner().run(&(poly_strategy(field), poly_strategy(field), poly_strategy(field)), |(p, q, s)| {
            prop_assert_eq!(&p + &q, &q + &p);
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&(&p * &q) * &s, &p * &(&q * &s));
            prop_assert_eq!(&p * &(&q + &s), &(&p * &q) + &(&p * &s));
            prop_assert!((&p - &p).is_zero());
            Ok(())
        });
        c.check(r.is_ok(), || format!("ring axioms over {field:?}: {r:?}"));

        let r = runner().run(&(0u32..7).prop_flat_map(move |t| (Just(t), form_strategy(field, t, 3))), |(t, p)| {
            if !p.is_zero() {
                prop_assert_eq!(p.euler_check().unwrap(), field.from_i64(t as i64));
            }
            Ok(())
        });
        c.check(r.is_ok(), || format!("Euler over {field:?}: {r:?}"));

        let r = runner().run(&(1u32..7).prop_flat_map(move |m| (Just(m), form_strategy(field, m, 2))), |(m, p)| {
            let (qx, cx) = p.split_pure_power(Var::X, m);
            prop_assert_eq!(&qx.shift(1, 0, 0) + &Poly::term(cx, Monomial::new(0, m, 0)), p.clone());
            let (qy, cy) = p.split_pure_power(Var::Y, m);
            prop_assert_eq!(&qy.shift(0, 1, 0) + &Poly::term(cy, Monomial::new(m, 0, 0)), p);
            Ok(())
        });
        c.check(r.is_ok(), || format!("split recomposition over {field:?}: {r:?}"));
    }
    report(8, c, "1000-case round-trip, ring-axiom, Euler and split-recomposition properties")
}

fn main() {
    let cases = population();
    let mut reports = Vec::with_capacity(cases.len());
    let results = [
        criterion_1(&cases, &mut reports),
        criterion_2(&cases),
        criterion_3(&cases, &reports),
        criterion_4(&cases, &reports),
        criterion_5(&cases, &reports),
        criterion_6(&cases),
        criterion_7(),
        criterion_8(),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
