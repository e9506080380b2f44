use rayon::prelude::*;

use super::space::{best_solution, QuotientSpace, Solution};
use super::{BudgetSpent, SearchOutcome, SearchStatus, TargetForm, NO_LOWER_BOUND};
use crate::arith::binomial;
use crate::enumerate::EnumerationResult;
use crate::error::Result;

/// Largest number of `n`-subsets a sweep at length `n` may cover.
pub const DEFAULT_SUBSET_BUDGET: u128 = 100_000_000;

/// Every solution of length exactly `n` drawn from `pool`, assuming none
/// shorter exists in `pool`. `first_scan` is the prefix-free scan of the same
/// pool, shared between lengths one and two.
pub(crate) fn solutions_at_length(
    space: &QuotientSpace<'_>,
    pool: &[usize],
    n: usize,
    first_scan: &[Solution],
    spent: &mut BudgetSpent,
) -> Vec<Solution> {
    if n <= 2 {
        return first_scan.iter().filter(|s| s.len() == n).cloned().collect();
    }
    let primes = space.primes_for_length(n);
    let depth = n - 2;
    let results: Vec<(Vec<Solution>, u64)> = (0..pool.len())
        .into_par_iter()
        .map(|first| {
            let mut sols = Vec::new();
            let mut checks = 0;
            let mut prefix = vec![pool[first]];
            extend_prefix(space, pool, first + 1, depth, primes, &mut prefix, &mut sols, &mut checks);
            (sols, checks)
        })
        .collect();
    let mut out = Vec::new();
    for (sols, checks) in results {
        spent.exact_checks += checks;
        out.extend(sols.into_iter().filter(|s| s.len() == n));
    }
    out.sort_by(|a, b| a.indices.cmp(&b.indices));
    out.dedup_by(|a, b| a.indices == b.indices);
    out
}

#[allow(clippy::too_many_arguments)]
fn extend_prefix(
    space: &QuotientSpace<'_>,
    pool: &[usize],
    next: usize,
    depth: usize,
    primes: usize,
    prefix: &mut Vec<usize>,
    sols: &mut Vec<Solution>,
    checks: &mut u64,
) {
    if prefix.len() == depth {
        if next + 1 < pool.len() {
            let scan = space.complete_prefix(prefix, &pool[next..], primes);
            *checks += scan.exact_checks;
            sols.extend(scan.solutions);
        }
        return;
    }
    for pos in next..pool.len() {
        prefix.push(pool[pos]);
        extend_prefix(space, pool, pos + 1, depth, primes, prefix, sols, checks);
        prefix.pop();
    }
}

/// Prefix-free scan of a pool: all solutions of length one and two.
pub(crate) fn first_scan(space: &QuotientSpace<'_>, pool: &[usize], spent: &mut BudgetSpent) -> Vec<Solution> {
    let scan = space.complete_prefix(&[], pool, space.primes_for_length(2));
    spent.exact_checks += scan.exact_checks;
    scan.solutions
}

/// Shortest expressions by sweeping all subsets of length 1, 2, ... while
/// `C(m, n)` stays within `subset_budget`. At the first length with
/// solutions, all of them are compared and the lowest-height one is kept.
pub fn exhaustive_search(
    f: &TargetForm,
    quotients: &EnumerationResult,
    subset_budget: u128,
) -> Result<SearchOutcome> {
    let space = QuotientSpace::new(f, quotients)?;
    let mut spent = BudgetSpent::default();
    let (any, checks) = space.find_any();
    spent.exact_checks += checks;
    let Some(any) = any else {
        return Ok(SearchOutcome::none_found(NO_LOWER_BOUND, spent));
    };
    let fallback = space.expression(&any);
    let m = space.len() as u64;
    let pool: Vec<usize> = (0..space.len()).collect();
    let mut scan0: Option<Vec<Solution>> = None;
    for n in 1..=any.len() {
        let subsets = binomial(m, n as u64);
        if subsets > subset_budget {
            return Ok(SearchOutcome::bounded(Some(fallback), n, spent));
        }
        spent.subsets += subsets;
        let scan0 = scan0.get_or_insert_with(|| first_scan(&space, &pool, &mut spent));
        let sols = solutions_at_length(&space, &pool, n, scan0, &mut spent);
        if let Some(best) = best_solution(sols) {
            return Ok(SearchOutcome {
                best: Some(space.expression(&best)),
                n_lower: n,
                n_upper: Some(n),
                status: SearchStatus::ProvedMinimal,
                budget_spent: spent,
                exhausted: true,
            });
        }
    }
    // The span contains the target, so some length up to `any.len()` has a
    // solution.
    unreachable!("exhaustive sweep missed a known solution of length {}", any.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_eta_quotients;
    use crate::express::{verify_expression, SearchStatus};

    fn f35() -> TargetForm {
        TargetForm::new("35.2.a.a", 35, 2, vec![1, 0, 1, -2, -1, 0, 1, 0, -2, 0, -3, -2]).unwrap()
    }

    #[test]
    fn level_35_is_a_sum_of_two() {
        let e = enumerate_eta_quotients(35, 2).unwrap();
        let out = exhaustive_search(&f35(), &e, DEFAULT_SUBSET_BUDGET).unwrap();
        assert_eq!(out.status, SearchStatus::ProvedMinimal);
        let best = out.best.unwrap();
        assert_eq!(best.to_string(), "1 * eta_35[0,2,2,0]\n1 * eta_35[2,0,0,2]\n");
        assert!(verify_expression(&best, &f35()).unwrap());
        assert_eq!((out.n_lower, out.n_upper), (2, Some(2)));
    }

    #[test]
    fn budget_cutoff_gives_bounds() {
        let e = enumerate_eta_quotients(35, 2).unwrap();
        let out = exhaustive_search(&f35(), &e, 1).unwrap();
        assert_eq!(out.status, SearchStatus::Bounded);
        assert_eq!(out.n_lower, 1);
        assert!(out.best.is_some());
    }
}
