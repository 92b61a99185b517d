//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Seed with `--seed N` or `HECKE_TEST_SEED`.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::process::ExitCode;

use hecke_core::algebra::{AlgInt, GcdOutcome};
use hecke_core::builder::build_polygon;
use hecke_core::builtins::{commutator, fixture, gamma0_2, index2_m3, principal2, FIXTURES};
use hecke_core::congruence::{is_congruence, monodromy_order, Verdict};
use hecke_core::farey::{FareySymbol, IntervalLabel};
use hecke_core::invariants::{realize, signature_of, Realization, SignatureRequest};
use hecke_core::moebius::{decompose, evaluate, is_member, membership_report, qgon_cusps, Cusp, Matrix2};
use hecke_core::oracle::{oracle_from_symbol, OracleRegistry};
use hecke_core::permrep::Omega;
use hecke_core::Error;
use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::TestRunner;
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn e(err: Error) -> String {
    err.to_string()
}

fn membership(seed: u64) -> Outcome {
    let ctx = common::ctx(5);
    let m = Matrix2::parse(&ctx, "[[4L-1,L+1],[3,L]]").map_err(e)?;
    let (ok, cols) = membership_report(&m).map_err(e)?;
    let lm1 = AlgInt::parse(&ctx, "L-1").map_err(e)?;
    ensure!(!ok, "example matrix accepted");
    ensure!(cols[0] == GcdOutcome::BelowOne(lm1), "first column reported {:?}", cols[0]);
    let mut rng = common::rng_from(seed);
    let mut count = 0;
    for q in 3..=12 {
        let ctx = common::ctx(q);
        for g in [Matrix2::s(&ctx), Matrix2::t(&ctx), Matrix2::r(&ctx)] {
            ensure!(is_member(&g), "generator {g} rejected at q={q}");
        }
    }
    for _ in 0..200 {
        let q = rng.gen_range(3..=12);
        let ctx = common::ctx(q);
        let m = common::random_element(&mut rng, &ctx, 30);
        ensure!(is_member(&m), "word matrix {m} rejected at q={q}");
        count += 1;
    }
    Ok(format!("example rejected with remainder L-1; S, T, R for q=3..12 and {count} random words accepted"))
}

/// A random even line (c1, cq) reached by descending `depth` q-gons from (0, ∞).
fn random_line(rng: &mut impl Rng, q: u32, depth: usize) -> (Cusp, Cusp) {
    let ctx = common::ctx(q);
    let (mut a, mut b) = (Cusp::zero(&ctx), Cusp::infinity(&ctx));
    for _ in 0..depth {
        let c = qgon_cusps(&a, &b).unwrap();
        let k = rng.gen_range(0..c.len() - 1);
        (a, b) = (c[k].clone(), c[k + 1].clone());
    }
    (a, b)
}

fn cusp_recurrence(seed: u64) -> Outcome {
    let mut rng = common::rng_from(seed);
    let ctx = common::ctx(6);
    let l = AlgInt::lambda(&ctx);
    let int = |k: i64| AlgInt::from_i64(&ctx, k);
    let coeffs = [(int(1), int(0)), (l.clone(), int(1)), (int(2), l.clone()), (l.clone(), int(2)), (int(1), l.clone()), (int(0), int(1))];
    let mut lines = 0;
    for depth in 0..6 {
        for _ in 0..5 {
            let (c1, c6) = random_line(&mut rng, 6, depth);
            let got = qgon_cusps(&c1, &c6).map_err(e)?;
            for (k, (x, y)) in coeffs.iter().enumerate() {
                let num = &(x * c1.num()) + &(y * c6.num());
                let den = &(x * c1.den()) + &(y * c6.den());
                ensure!(got[k].num() == &num && got[k].den() == &den, "q=6 cusp {} on ({c1}, {c6}) is {}", k + 1, got[k]);
            }
            lines += 1;
        }
    }
    let mut checked = 0;
    for q in 3..=12 {
        for depth in 0..5 {
            for _ in 0..4 {
                let (c1, cq) = random_line(&mut rng, q, depth);
                let c = qgon_cusps(&c1, &cq).map_err(e)?;
                for x in &c[1..c.len() - 1] {
                    ensure!(x.den().cmp_value(c1.den()).is_ge() && x.den().cmp_value(cq.den()).is_ge(), "q={q}: {x} on ({c1}, {cq})");
                }
                checked += 1;
            }
        }
    }
    Ok(format!("q=6 closed form on {lines} lines; denominator bound on {checked} q-gons for q=3..12"))
}

fn cluster_interval(sym: &FareySymbol, want: u32) -> Option<usize> {
    sym.labels().iter().position(|l| matches!(l, IntervalLabel::Cluster { r, .. } if *r == want))
}

fn side_pairings() -> Outcome {
    for q in [4, 6, 8, 10, 12] {
        let m3 = index2_m3(q).map_err(e)?;
        let ctx = m3.ctx().clone();
        let i = cluster_interval(&m3, 2).ok_or("no e2 interval")?;
        ensure!(m3.pairing_matrix(i).map_err(e)? == Matrix2::r(&ctx).pow(2), "e2 pairing at q={q}");
    }
    let s51 = fixture("q6-index3").map_err(e)?;
    let i = cluster_interval(&s51, 3).ok_or("no e3 interval")?;
    ensure!(s51.pairing_matrix(i).map_err(e)? == Matrix2::r(s51.ctx()).pow(3), "e3 pairing");
    for q in [3, 5, 7] {
        let c = commutator(q).map_err(e)?;
        let ctx = c.ctx().clone();
        let zero = c.cusps().iter().position(|x| x.is_zero()).ok_or("no cusp 0")?;
        let (t, r) = (Matrix2::t(&ctx), Matrix2::r(&ctx));
        for i in 1..q as i64 {
            let want = &(&(&t.inverse() * &r.pow(i)) * &t) * &r.pow(-i);
            let got = c.pairing_matrix(zero + i as usize - 1).map_err(e)?;
            ensure!(got == want, "commutator q={q} pair {i}: {got} vs {want}");
        }
    }
    Ok("R^2 on e2 for q=4..12 even, R^3 on e3, T^-1 R^i T R^-i on commutator pairs for q=3,5,7".into())
}

fn signature_key(sym: &FareySymbol) -> Result<(u64, u64, u64, Vec<(u32, u64)>, u64), String> {
    let s = signature_of(sym).map_err(e)?;
    Ok((s.d, s.g, s.tau2, s.v.into_iter().filter(|(_, c)| *c > 0).collect(), s.v_inf))
}

fn builder() -> Outcome {
    let ctx = common::ctx(6);
    let o = OracleRegistry::default().build(&ctx, "cong:n=2;shape=upper0").map_err(e)?;
    let sym = build_polygon(&o, &ctx, 1000).map_err(e)?;
    ensure!(sym.index().map_err(e)? == 3, "index {}", sym.index().map_err(e)?);
    for g in sym.generators().map_err(e)? {
        ensure!(o.contains(&g), "generator {g} fails the oracle");
    }
    ensure!(signature_key(&sym)? == signature_key(&fixture("q6-parity").map_err(e)?)?, "signature differs from the index-3 reference");
    for name in ["q3-normal12", "q4-genus1"] {
        let fx = fixture(name).map_err(e)?;
        let o = oracle_from_symbol(&fx).map_err(e)?;
        let rebuilt = build_polygon(&o, fx.ctx(), 1000).map_err(e)?;
        ensure!(signature_key(&rebuilt)? == signature_key(&fx)?, "{name}: signatures differ");
        let (a, b) = (Omega::of(&rebuilt).map_err(e)?, Omega::of(&fx).map_err(e)?);
        ensure!(a.is_normal() == b.is_normal(), "{name}: normality differs");
    }
    Ok(format!("parity oracle at q=6 gives index 3 ({sym}); q3-normal12 and q4-genus1 rebuilt with matching invariants"))
}

fn relabel(pairs: &[(&'static str, &'static str)]) -> HashMap<&'static str, &'static str> {
    pairs.iter().copied().collect()
}

fn permutation_fixtures() -> Outcome {
    // Reference label ↦ our label; "b" marks the barred triangle.
    let cases: [(&str, HashMap<&str, &str>, &str, &str); 3] = [
        (
            "q3-index11",
            relabel(&[("1", "1"), ("1b", "1~"), ("2", "3"), ("2b", "3~"), ("3", "5"), ("3b", "5~"), ("4", "6~"), ("4b", "6"), ("5", "4"), ("5b", "4~"), ("6", "2")]),
            "(1 1b)(2 2b)(3 3b)(4 4b)(5 5b)(6)",
            "(1 6 2b)(2 5 3b)(3 5b 4)(1b)(4b)",
        ),
        (
            "q3-normal12",
            relabel(&[
                ("1", "1"), ("1b", "1~"), ("2", "2"), ("2b", "2~"), ("3", "5"), ("3b", "5~"),
                ("4", "3"), ("4b", "3~"), ("5", "6"), ("5b", "6~"), ("6", "4"), ("6b", "4~"),
            ]),
            "(1 1b)(2 2b)(3 3b)(4 4b)(5 5b)(6 6b)",
            "(1 2 4b)(4 6 5b)(5 3b 1b)(6b 2b 3)",
        ),
        (
            "q4-genus1",
            relabel(&[("1", "1"), ("1b", "1~"), ("2", "2"), ("2b", "2~"), ("3", "4"), ("3b", "4~"), ("4", "3"), ("4b", "3~")]),
            "(1 1b)(2 2b)(3 3b)(4 4b)",
            "(1 2 1b 4b)(4 3 2b 3b)",
        ),
    ];
    for (name, map, s, r) in &cases {
        let om = Omega::of(&fixture(name).map_err(e)?).map_err(e)?;
        ensure!(om.f_s == common::perm_from_labels(&om, s, map), "{name}: f(S) = {}", om.format(&om.f_s));
        ensure!(om.f_r == common::perm_from_labels(&om, r, map), "{name}: f(R) = {}", om.format(&om.f_r));
    }
    let om = Omega::of(&fixture("q3-noncongruence").map_err(e)?).map_err(e)?;
    let map = relabel(&[
        ("1", "1"), ("1b", "1~"), ("2", "3"), ("2b", "3~"), ("3", "5"), ("3b", "5~"),
        ("4", "7"), ("4b", "7~"), ("5", "2"), ("6", "4"), ("7", "6"),
    ]);
    let ft = common::perm_from_labels(&om, "(1b 2b 3b 4b 4 7 3 6 2 5 1)", &map);
    let fu = common::perm_from_labels(&om, "(1b 5 2b 6 3b 7 4b 4 3 2 1)", &map);
    ensure!(om.f_t() == ft, "q3-noncongruence: f(T) = {}", om.format(&om.f_t()));
    ensure!(om.f_u() == fu, "q3-noncongruence: f(U) = {}", om.format(&om.f_u()));
    Ok("f(S), f(R) on q3-index11, q3-normal12, q4-genus1 and f(T), f(U) on q3-noncongruence match under the frozen relabelings".into())
}

fn normality() -> Outcome {
    for (name, order, normal) in [("q3-normal12", 12u32, true), ("q4-genus1", 16, false)] {
        let om = Omega::of(&fixture(name).map_err(e)?).map_err(e)?;
        ensure!(om.group_order() == BigUint::from(order), "{name}: group order {}", om.group_order());
        ensure!(om.is_normal() == normal, "{name}: normality");
    }
    let mut checked = Vec::new();
    for (name, _) in FIXTURES {
        let om = Omega::of(&fixture(name).map_err(e)?).map_err(e)?;
        if om.size() > 8 {
            continue;
        }
        let fast = om.centralizer().map_err(e)?.len();
        let brute = common::brute_centralizer_count(&[om.f_s.clone(), om.f_r.clone()], om.size());
        ensure!(fast == brute, "{name}: centralizer {fast} vs brute force {brute}");
        checked.push(format!("{name}:{fast}"));
    }
    Ok(format!("orders 12/16 and normality as expected; centralizers {}", checked.join(" ")))
}

fn congruence() -> Outcome {
    let x = fixture("q3-noncongruence").map_err(e)?;
    let rep = is_congruence(&x).map_err(e)?;
    ensure!(rep.level == 11 && rep.verdict == Verdict::NonCongruence, "q3-noncongruence: level {} {}", rep.level, rep.verdict);
    let mono = monodromy_order(&x).map_err(e)?;
    ensure!(mono == BigUint::from(19958400u32), "monodromy order {mono}");
    for s in [principal2(3).map_err(e)?, gamma0_2(3).map_err(e)?] {
        ensure!(is_congruence(&s).map_err(e)?.verdict == Verdict::Congruence, "{s} not congruence");
    }
    Ok("q3-noncongruence level 11 non-congruence, monodromy 19958400; principal2(3), gamma0_2(3) congruence".into())
}

const IDENTITY_QS: [u32; 8] = [3, 4, 5, 6, 7, 8, 9, 12];

fn invariant_identities() -> Outcome {
    let mut runner = TestRunner::new(common::proptest_config(1000));
    let strategy = (0..IDENTITY_QS.len(), any::<bool>(), any::<u64>());
    runner
        .run(&strategy, |(qi, built, s)| {
            let q = IDENTITY_QS[qi];
            let mut rng = common::rng_from(s);
            let sym = if built { common::random_built(&mut rng, q) } else { common::random_realized(&mut rng, q) };
            common::check_identities(&sym).map_err(TestCaseError::fail)
        })
        .map_err(|err| err.to_string())?;
    Ok("1000 built or realized symbols satisfy Riemann-Hurwitz, Euler, the free-pair count and the cusp count".into())
}

fn realization() -> Outcome {
    let mut feasible = 0;
    let mut whole = 0;
    let mut violating: BTreeMap<String, usize> = BTreeMap::new();
    let mut odd_rh = 0;
    for req in common::signature_grid() {
        let want = common::expected_infeasibility(req.q, req.d, req.g, req.tau2, &req.v, req.v_inf);
        if req.q % 2 == 1 && common::rh_rational(req.q, req.d, req.g, req.tau2, &req.v, req.v_inf) {
            ensure!(common::qgon_triangles(req.q, req.d, &req.v) % req.q as i64 == 0, "odd q divisibility fails at {req:?}");
            odd_rh += 1;
        }
        match (want, realize(&req)) {
            (None, Ok(Realization::WholeGroup)) => {
                ensure!(req.d == 1, "whole group for {req:?}");
                whole += 1;
            }
            (None, Ok(Realization::Symbol(sym))) => {
                let back = SignatureRequest::from(&signature_of(&sym).map_err(e)?);
                ensure!(common::same_request(&back, &req), "round trip {req:?} gave {back:?}");
                feasible += 1;
            }
            (Some(w), Err(Error::Infeasible(got))) => {
                ensure!(w == got, "{req:?}: expected {w}, got {got}");
                *violating.entry(got.to_string()).or_default() += 1;
            }
            (w, got) => return Err(format!("{req:?}: expected {w:?}, got {:?}", got.map(|_| ()))),
        }
    }
    let bad: usize = violating.values().sum();
    ensure!(feasible + whole >= 200, "only {} feasible grid points", feasible + whole);
    ensure!(bad >= 200, "only {bad} violating grid points");
    let named: Vec<String> = violating.iter().map(|(k, v)| format!("{k} {v}")).collect();
    Ok(format!(
        "{} feasible realized and round-tripped; {bad} violating rejected ({}); {odd_rh} odd-q points divisible",
        feasible + whole,
        named.join(", ")
    ))
}

fn round_trips(seed: u64) -> Outcome {
    let mut rng = common::rng_from(seed);
    for _ in 0..500 {
        let q = rng.gen_range(3..=7);
        let ctx = common::ctx(q);
        let len = rng.gen_range(0..=40);
        let w = common::random_word(&mut rng, q, len);
        let m = evaluate(&ctx, &w);
        let back = decompose(&m).map_err(e)?;
        ensure!(evaluate(&ctx, &back) == m, "q={q}: {w} decomposed to {back}");
    }
    for (name, _) in FIXTURES {
        let sym = fixture(name).map_err(e)?;
        ensure!(FareySymbol::parse(&sym.to_string()).map_err(e)? == sym, "{name}: text round trip");
        ensure!(FareySymbol::from_json(&sym.to_json()).map_err(e)? == sym, "{name}: JSON round trip");
    }
    Ok(format!("500 random words and {} fixtures round-trip", FIXTURES.len()))
}

fn seed_from_args() -> u64 {
    let args: Vec<String> = std::env::args().collect();
    args.iter()
        .position(|a| a == "--seed")
        .and_then(|i| args.get(i + 1))
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(common::seed)
}

fn main() -> ExitCode {
    let seed = seed_from_args();
    std::env::set_var("HECKE_TEST_SEED", seed.to_string());
    println!("acceptance suite, seed {seed}");
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 10] = [
        ("membership", Box::new(move || membership(seed))),
        ("cusp recurrence", Box::new(move || cusp_recurrence(seed))),
        ("side pairings", Box::new(side_pairings)),
        ("builder", Box::new(builder)),
        ("permutation fixtures", Box::new(permutation_fixtures)),
        ("normality", Box::new(normality)),
        ("congruence", Box::new(congruence)),
        ("invariant identities", Box::new(invariant_identities)),
        ("realization", Box::new(realization)),
        ("round trips", Box::new(move || round_trips(seed))),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} {name}: PASS ({secs:.2}s) {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({secs:.2}s) {msg}", k + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

