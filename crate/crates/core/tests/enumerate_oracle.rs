//! The lattice enumerator against the brute-force box search in `common`.

mod common;

use common::brute_force;
use etaforge::enumerate::{enumerate_eta_quotients, exponent_bounds};
use etaforge::EtaQuotient;

fn check_level(n: u64, weight: u64) {
    let bounds = exponent_bounds(n, weight).unwrap();
    let t = std::time::Instant::now();
    let expected = brute_force(n as i64, weight as i64, &bounds);
    eprintln!("level {n}: {} quotients, bounds {bounds:?}, {:?}", expected.len(), t.elapsed());
    let got = enumerate_eta_quotients(n, weight).unwrap();
    let got: Vec<Vec<i64>> = got.quotients.iter().map(|q| q.exponents().to_vec()).collect();
    assert_eq!(got, expected, "level {n} weight {weight}");
    for r in &got {
        assert!(EtaQuotient::new(n, r.clone()).unwrap().is_holomorphic());
    }
}

#[test]
fn matches_brute_force_small_levels() {
    for n in [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 14, 15, 16, 18, 20] {
        check_level(n, 2);
    }
    check_level(6, 4);
    check_level(11, 4);
}

#[test]
fn matches_brute_force_up_to_40() {
    for n in [13, 17, 19, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33, 34, 35, 37, 38, 39] {
        check_level(n, 2);
    }
}

#[test]
#[ignore = "about 12 minutes; also run by the acceptance suite"]
fn matches_brute_force_36_and_40() {
    check_level(36, 2);
    check_level(40, 2);
}
