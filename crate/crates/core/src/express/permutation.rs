use std::collections::BTreeMap;

use super::exhaustive::{first_scan, solutions_at_length};
use super::space::{best_solution, QuotientSpace, Solution};
use super::{BudgetSpent, SearchOutcome, TargetForm};
use crate::arith::binomial;
use crate::enumerate::EnumerationResult;
use crate::error::Result;
use crate::etaquot::EtaQuotient;

/// Longest expression looked for inside a class or a pair of classes.
pub const PERMUTATION_MAX_LEN: usize = 4;

/// Indices grouped by exponent multiset: two quotients share a class when
/// one exponent vector is a permutation of the other. Classes are listed in
/// order of their first member.
pub fn exponent_classes(quotients: &[EtaQuotient]) -> Vec<Vec<usize>> {
    let mut by_key: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (i, q) in quotients.iter().enumerate() {
        let mut key = q.exponents().to_vec();
        key.sort_unstable();
        by_key.entry(key).or_default().push(i);
    }
    let mut classes: Vec<Vec<usize>> = by_key.into_values().collect();
    classes.sort_by_key(|c| c[0]);
    classes
}

/// Searches combinations of quotients sharing an exponent multiset, first
/// within single classes and then within unions of two classes. Only upper
/// bounds come out of this; `subset_budget` caps the total number of subsets
/// covered.
pub fn permutation_search(
    f: &TargetForm,
    quotients: &EnumerationResult,
    subset_budget: u128,
) -> Result<SearchOutcome> {
    let space = QuotientSpace::new(f, quotients)?;
    let classes = exponent_classes(&quotients.quotients);
    let mut spent = BudgetSpent::default();
    let mut found: Vec<Solution> = Vec::new();

    'single: for class in &classes {
        if !search_pool(&space, class, None, &mut spent, subset_budget, &mut found) {
            break 'single;
        }
    }
    'pairs: for (a, ca) in classes.iter().enumerate() {
        for cb in &classes[a + 1..] {
            let mut pool: Vec<usize> = ca.iter().chain(cb).copied().collect();
            pool.sort_unstable();
            if !search_pool(&space, &pool, Some((ca, cb)), &mut spent, subset_budget, &mut found) {
                break 'pairs;
            }
        }
    }
    let best = best_solution(found).map(|s| space.expression(&s));
    Ok(SearchOutcome::bounded(best, 1, spent))
}

/// Returns false once the budget is exhausted.
fn search_pool(
    space: &QuotientSpace<'_>,
    pool: &[usize],
    both: Option<(&[usize], &[usize])>,
    spent: &mut BudgetSpent,
    budget: u128,
    found: &mut Vec<Solution>,
) -> bool {
    let mut scan0: Option<Vec<Solution>> = None;
    for n in 1..=PERMUTATION_MAX_LEN.min(pool.len()) {
        let subsets = binomial(pool.len() as u64, n as u64);
        if spent.subsets + subsets > budget {
            return false;
        }
        spent.subsets += subsets;
        let scan0 = scan0.get_or_insert_with(|| first_scan(space, pool, spent));
        let sols: Vec<Solution> = solutions_at_length(space, pool, n, scan0, spent)
            .into_iter()
            .filter(|s| match both {
                Some((a, b)) => {
                    s.indices.iter().any(|i| a.contains(i)) && s.indices.iter().any(|i| b.contains(i))
                }
                None => true,
            })
            .collect();
        if !sols.is_empty() {
            found.extend(sols);
            break;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_eta_quotients;
    use crate::express::verify_expression;

    #[test]
    fn classes_partition_the_quotients() {
        let e = enumerate_eta_quotients(35, 2).unwrap();
        let classes = exponent_classes(&e.quotients);
        let mut all: Vec<usize> = classes.concat();
        all.sort_unstable();
        assert_eq!(all, (0..e.quotients.len()).collect::<Vec<_>>());
        for c in &classes {
            let mut k0 = e.quotients[c[0]].exponents().to_vec();
            k0.sort_unstable();
            for &i in c {
                let mut k = e.quotients[i].exponents().to_vec();
                k.sort_unstable();
                assert_eq!(k, k0);
            }
        }
    }

    #[test]
    fn level_35_pair_is_a_permutation_class() {
        let f = TargetForm::new("35.2.a.a", 35, 2, vec![1, 0, 1, -2, -1, 0, 1, 0, -2, 0, -3, -2]).unwrap();
        let e = enumerate_eta_quotients(35, 2).unwrap();
        let out = permutation_search(&f, &e, 1_000_000).unwrap();
        let best = out.best.unwrap();
        assert_eq!(best.len(), 2);
        assert!(verify_expression(&best, &f).unwrap());
    }
}
