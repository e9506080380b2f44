//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N: PASS|FAIL ...` line straight to stderr so it shows up even
//! when output is captured.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use etaforge::analytic::{
    dedekind_sum, eta, eta_multiplier, eta_product, eta_transform_check, verify_eta_relation, verify_zero,
    ModularMatrix, UpperHalfPoint,
};
use etaforge::arith::binomial;
use etaforge::enumerate::{enumerate_eta_quotients, exponent_bounds, Enumerator};
use etaforge::express::{
    certify, exhaustive_search, minimal_level_multiplier, permutation_search, random_search_with,
    rule_out_single_quotient, verify_expression, Expression, RandomSearchOptions, SearchStatus, TargetForm,
    DEFAULT_SUBSET_BUDGET,
};
use etaforge::ingest::load_fixture;
use etaforge::tables::{load_table, MinimalStatus, TableVerifier};
use etaforge::{index_gamma0, QExpansion};

fn report(n: u32, ok: bool, detail: &str) {
    let mark = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {mark} {detail}");
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn form(label: &str) -> TargetForm {
    load_fixture(fixtures().join("forms"), label).unwrap().target().unwrap()
}

fn point(s: &str) -> UpperHalfPoint {
    s.parse().unwrap()
}

const W: &str = "1/2 + i/(2*sqrt(21))";

#[test]
fn criterion_1_enumeration_counts() {
    let mut ok = true;
    let mut parts = Vec::new();
    for (level, expected) in [(32, 131), (96, 22_655), (72, 45_798)] {
        let got = enumerate_eta_quotients(level, 2).unwrap().count;
        ok &= got == expected;
        parts.push(format!("N={level}: {got} (expected {expected})"));
    }
    report(1, ok, &parts.join(", "));
    assert!(ok, "{}", parts.join(", "));
}

/// Exhaustively proved minimal at level 110; the printed row does not verify.
const CORRECTED_55: &str = "\
1 * eta_110[-1,3,1,-1,0,0,4,-2]
2 * eta_110[0,0,1,1,1,1,0,0]
-1 * eta_110[0,0,4,-2,-1,3,1,-1]
2 * eta_110[1,1,0,0,0,0,1,1]
";

#[test]
fn criterion_2_table_verification() {
    let rows = load_table(fixtures().join("tables")).unwrap();
    let with_expr: Vec<_> = rows.into_iter().filter(|r| r.expression.is_some()).collect();
    let verifier = TableVerifier::new(fixtures().join("forms"));
    let reports = verifier.verify_table(&with_expr);
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.outcome.passed())
        .map(|r| r.label.as_str())
        .collect();
    let corrected: Expression = CORRECTED_55.parse().unwrap();
    let corrected_ok = verify_expression(&corrected, &form("55.2.a.a")).unwrap();
    let ok = failed.is_empty();
    let detail = format!(
        "{}/{} expression rows verify; failing: {:?}; replacement for 55.2.a.a verifies: {corrected_ok}",
        reports.len() - failed.len(),
        reports.len(),
        failed
    );
    report(2, ok, &detail);
    assert!(corrected_ok);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_3_level_multipliers() {
    let enumerator = Enumerator::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, d_max, expected) in [
        ("17.2.a.a", 6, Some(4)),
        ("37.2.a.a", 10, Some(8)),
        ("37.2.a.b", 10, Some(8)),
        ("53.2.a.a", 17, None),
        ("73.2.a.a", 15, None),
    ] {
        let f = form(label);
        let got = minimal_level_multiplier(&f, d_max, &enumerator).unwrap();
        if let Some(m) = &got {
            ok &= verify_expression(&m.expression, &f).unwrap();
        }
        let d = got.map(|m| m.multiplier);
        ok &= d == expected;
        parts.push(match d {
            Some(d) => format!("{label}: d={d}"),
            None => format!("{label}: none for d<={d_max}"),
        });
    }
    report(3, ok, &parts.join(", "));
    assert!(ok, "{}", parts.join(", "));
}

fn sorted_terms(e: &Expression) -> Vec<String> {
    let mut t: Vec<String> = e.terms().iter().map(|t| format!("{} * {}", t.coef, t.quotient)).collect();
    t.sort();
    t
}

#[test]
fn criterion_4_exhaustive_minimality() {
    let levels = [11, 14, 15, 20, 24, 27, 30, 32, 35, 36, 42, 54, 56];
    let rows = load_table(fixtures().join("tables")).unwrap();
    let mut ok = true;
    let mut checked = Vec::new();
    let mut bad = Vec::new();
    for level in levels {
        let quotients = enumerate_eta_quotients(level, 2).unwrap();
        let level_rows: Vec<_> = rows
            .iter()
            .filter(|r| r.level == level && r.minimal_status == MinimalStatus::Check)
            .collect();
        ok &= !level_rows.is_empty();
        for row in level_rows {
            let printed = row.expression.as_ref().unwrap();
            let out = exhaustive_search(&form(&row.label), &quotients, DEFAULT_SUBSET_BUDGET).unwrap();
            let same = out.best.as_ref().is_some_and(|b| sorted_terms(b) == sorted_terms(printed));
            let good = out.status == SearchStatus::ProvedMinimal && same;
            ok &= good;
            if good {
                checked.push(row.label.clone());
            } else {
                bad.push(format!("{} ({}, printed terms {})", row.label, out.status, if same { "matched" } else { "differ" }));
            }
        }
    }
    let detail = format!(
        "{} rows proved minimal with the printed terms over {} levels; problems: {:?}",
        checked.len(),
        levels.len(),
        bad
    );
    report(4, ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_5_inferred_minimality() {
    let quotients = enumerate_eta_quotients(96, 2).unwrap();
    let all_pairs = binomial(quotients.count as u64, 2);
    let mut ok = true;
    let mut parts = Vec::new();
    for label in ["96.2.a.a", "96.2.a.b"] {
        let f = form(label);
        let mut out = permutation_search(&f, &quotients, DEFAULT_SUBSET_BUDGET).unwrap();
        let excluded = rule_out_single_quotient(&f);
        if excluded {
            out.n_lower = out.n_lower.max(2);
        }
        let out = certify(out);
        let best = out.best.clone().unwrap();
        let good = excluded
            && out.status == SearchStatus::InferredMinimal
            && !out.exhausted
            && out.budget_spent.subsets < all_pairs
            && best.len() == 2
            && best.has_unit_coefficients()
            && verify_expression(&best, &f).unwrap();
        ok &= good;
        parts.push(format!(
            "{label}: {} with {} terms, {} subsets covered of {all_pairs} pairs",
            out.status,
            best.len(),
            out.budget_spent.subsets
        ));
    }
    report(5, ok, &parts.join(", "));
    assert!(ok, "{}", parts.join(", "));
}

#[test]
fn criterion_6_random_upper_bounds() {
    let quotients = enumerate_eta_quotients(90, 2).unwrap();
    let opts = |workers| RandomSearchOptions {
        iterations: 300,
        seed: 1,
        workers,
        ..Default::default()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for label in ["90.2.a.a", "90.2.a.b", "90.2.a.c"] {
        let f = form(label);
        let first = random_search_with(&f, &quotients, &opts(None)).unwrap();
        let second = random_search_with(&f, &quotients, &opts(Some(2))).unwrap();
        let len = first.best.as_ref().map(Expression::len);
        let verified = first.best.as_ref().is_some_and(|b| verify_expression(b, &f).unwrap());
        let same = first == second;
        ok &= len.is_some_and(|n| n <= 4) && verified && same;
        parts.push(format!("{label}: length {len:?}, reproducible {same}"));
    }
    let detail = format!("seed 1, 300 iterations: {}", parts.join(", "));
    report(6, ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_7_zero_verification() {
    let tol = 1e-10;
    let w = point(W);
    let rows = load_table(fixtures().join("tables")).unwrap();
    let e = rows.iter().find(|r| r.label == "42.2.a.a").unwrap().expression.clone().unwrap();
    let (zero, eval) = verify_zero(&e, &w, tol).unwrap();
    let (zero_at_i, _) = verify_zero(&e, &point("i"), tol).unwrap();
    let mut ok = zero && !zero_at_i;
    let mut parts = vec![format!("|f(w)| = {:.1e}", eval.value.norm())];

    let q = |x: f64| x.powf(0.25);
    let cases = [
        (ModularMatrix::new(1, -11, 2, -21).unwrap(), 21.0, Complex64::from_polar(q(21.0), -5.0 * PI / 6.0)),
        (ModularMatrix::new(3, -22, 1, -7).unwrap(), 14.0, Complex64::from_polar(q(7.0 / 3.0), -PI / 3.0)),
        (ModularMatrix::new(7, -11, 2, -3).unwrap(), 3.0, Complex64::from_polar(1.0 / q(7.0 / 3.0), PI / 6.0)),
        (ModularMatrix::new(21, -22, 1, -1).unwrap(), 2.0, Complex64::from_polar(1.0 / q(21.0), 5.0 * PI / 3.0)),
    ];
    for (g, s, ratio) in cases {
        let z = w.scaled(s).unwrap();
        let law = eta_transform_check(&g, &z, tol).unwrap();
        let lhs = eta(g.apply(z.z()), tol / 10.0).unwrap().value;
        let rhs = eta(z.z(), tol / 10.0).unwrap().value;
        let stated = (lhs - ratio * rhs).norm() < tol;
        ok &= law && stated;
        parts.push(format!("{g} at {s}w: law {law}, stated ratio {stated}"));
    }

    let lhs = eta_product(&w, &[(1, 1), (6, 1), (7, 1), (42, 1)], tol / 100.0).unwrap().value;
    let rhs = eta_product(&w, &[(2, 1), (3, 1), (14, 1), (21, 1)], tol / 100.0).unwrap().value;
    let uncubed = (lhs - Complex64::from_polar(1.0, 2.0 * PI / 3.0) * rhs).norm() < tol;
    let cubed = verify_eta_relation(
        &[(1, 3), (6, 3), (7, 3), (42, 3)],
        &[(2, 3), (3, 3), (14, 3), (21, 3)],
        &w,
        tol,
    )
    .unwrap();
    ok &= uncubed && cubed;
    parts.push(format!("uncubed relation {uncubed}, cubed relation {cubed}"));
    report(7, ok, &parts.join("; "));
    assert!(ok, "{}", parts.join("; "));
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn reciprocity() -> bool {
    for k in 2..=60i64 {
        for h in 1..k {
            if common::gcd(h, k) != 1 {
                continue;
            }
            let lhs = dedekind_sum(h, k).unwrap() + dedekind_sum(k, h).unwrap();
            let rhs = rat(-1, 4) + (rat(h, k) + rat(k, h) + rat(1, h * k)) / BigRational::from_integer(12.into());
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum() * a, a.signum(), 0)
    } else {
        let (g, x, y) = extended_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

fn random_matrix(rng: &mut ChaCha8Rng) -> ModularMatrix {
    loop {
        let c: i64 = rng.random_range(-60..=60);
        let d: i64 = rng.random_range(-60..=60);
        if common::gcd(c, d) != 1 {
            continue;
        }
        // a d - b c = 1
        let (_, x, y) = extended_gcd(d, c);
        let (a, b) = (x, -y);
        let t: i64 = rng.random_range(-5..=5);
        return ModularMatrix::new(a + t * c, b + t * d, c, d).unwrap();
    }
}

fn multiplier_is_24th_root(rng: &mut ChaCha8Rng) -> bool {
    (0..1000).all(|_| {
        let chi = eta_multiplier(&random_matrix(rng)).unwrap();
        (chi.powu(24) - Complex64::new(1.0, 0.0)).norm() < 1e-12
    })
}

/// `sum_c phi(gcd(c, N/c)) * ord_c` from the scaled order table of the oracle.
fn valence_holds(level: u64) -> bool {
    let n = level as i64;
    let orders = common::scaled_orders(n);
    let ds = common::divisors(n);
    let expected = rat(2 * index_gamma0(level) as i64, 12);
    enumerate_eta_quotients(level, 2).unwrap().quotients.iter().all(|q| {
        let total: i64 = ds
            .iter()
            .zip(&orders)
            .map(|(&c, row)| {
                let v: i64 = row.iter().zip(q.exponents()).map(|(b, r)| b * r).sum();
                common::phi(common::gcd(c, n / c)) * v
            })
            .sum();
        let scaled = rat(total, 24 * n);
        scaled == expected && q.cusp_profile().total_order() == expected
    })
}

fn random_series(rng: &mut ChaCha8Rng, prec: usize, unit: bool) -> QExpansion {
    let mut c: Vec<i64> = (0..prec).map(|_| rng.random_range(-9..=9)).collect();
    if unit {
        c[0] = if rng.random_bool(0.5) { 1 } else { -1 };
    }
    QExpansion::from_integers(BigRational::zero(), &c).unwrap()
}

fn series_laws(rng: &mut ChaCha8Rng) -> bool {
    let prec = 12;
    (0..200).all(|_| {
        let a = random_series(rng, prec, true);
        let b = random_series(rng, prec, false);
        let c = random_series(rng, prec, false);
        let assoc = a.mul(&b, prec).mul(&c, prec) == a.mul(&b.mul(&c, prec), prec);
        let comm = a.mul(&b, prec) == b.mul(&a, prec);
        let dist = a.mul(&b.add(&c).unwrap(), prec) == a.mul(&b, prec).add(&a.mul(&c, prec)).unwrap();
        let inv = a.mul(&a.inverse(prec).unwrap(), prec) == QExpansion::one(prec);
        let pow = a.int_pow(3, prec).unwrap().mul(&a.int_pow(-2, prec).unwrap(), prec) == a.truncate(prec);
        assoc && comm && dist && inv && pow
    })
}

fn oracle_agrees(level: u64) -> bool {
    let bounds = exponent_bounds(level, 2).unwrap();
    let expected = common::brute_force(level as i64, 2, &bounds);
    let got: Vec<Vec<i64>> = enumerate_eta_quotients(level, 2)
        .unwrap()
        .quotients
        .iter()
        .map(|q| q.exponents().to_vec())
        .collect();
    got == expected
}

#[test]
fn criterion_8_property_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut parts = Vec::new();
    let mut ok = true;
    let mut record = |name: &str, passed: bool| {
        ok &= passed;
        parts.push(format!("{name} {}", if passed { "ok" } else { "FAILED" }));
    };
    record("Dedekind reciprocity (h < k <= 60)", reciprocity());
    record("chi^24 = 1 (1000 matrices)", multiplier_is_24th_root(&mut rng));
    record(
        "valence identity (N = 11, 20, 32, 42)",
        [11, 20, 32, 42].into_iter().all(valence_holds),
    );
    record("series laws (200 random triples)", series_laws(&mut rng));
    let failed: Vec<u64> = (1..=40).filter(|&n| !oracle_agrees(n)).collect();
    record("brute-force oracle (N <= 40)", failed.is_empty());
    report(8, ok, &parts.join(", "));
    assert!(ok, "{}; oracle disagrees at {failed:?}", parts.join(", "));
}
