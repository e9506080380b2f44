use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use num_traits::Zero;
use rayon::prelude::*;

use super::exhaustive::{first_scan, solutions_at_length};
use super::space::{best_solution, QuotientSpace, Solution};
use super::{BudgetSpent, SearchOutcome, TargetForm};
use crate::arith::binomial;
use crate::enumerate::EnumerationResult;
use crate::error::{Error, Result};
use crate::modp::{Echelon, Field, PRIMES};

#[derive(Clone, Debug)]
pub struct RandomSearchOptions {
    pub iterations: u64,
    /// Index of the first iteration; lets a long run continue in chunks.
    pub first_iteration: u64,
    pub seed: u64,
    /// Quotients with a nonzero constant term at more than this many cusp
    /// classes are left out of the guided draws.
    pub max_constant_cusps: usize,
    /// Subsets of the fallback spanning set examined per iteration.
    pub subset_budget: u128,
    /// Worker threads; `None` uses the ambient pool. Results do not depend on it.
    pub workers: Option<usize>,
}

impl Default for RandomSearchOptions {
    fn default() -> Self {
        RandomSearchOptions {
            iterations: 1000,
            first_iteration: 0,
            seed: 0,
            max_constant_cusps: 2,
            subset_budget: 20_000,
            workers: None,
        }
    }
}

pub fn random_search(
    f: &TargetForm,
    quotients: &EnumerationResult,
    iterations: u64,
    seed: u64,
) -> Result<SearchOutcome> {
    random_search_with(
        f,
        quotients,
        &RandomSearchOptions {
            iterations,
            seed,
            ..Default::default()
        },
    )
}

struct Context<'s, 'a> {
    space: &'s QuotientSpace<'a>,
    /// Cusp classes where each quotient does not vanish.
    constant_at: Vec<Vec<usize>>,
    pool: Vec<usize>,
    opts: &'s RandomSearchOptions,
}

/// Randomized upper bounds. Each iteration grows a random set of quotients
/// one at a time. The first two draws are guided: the first comes from
/// quotients vanishing at all but `max_constant_cusps` cusp classes, the
/// second from those sharing a non-vanishing cusp with it, so that constant
/// terms can cancel. After each guided draw every completion of the set by
/// one or two further pool quotients is tested. If none contains `f`, the
/// set keeps growing uniformly until its span does, and the shortest
/// expression supported on it is extracted within `subset_budget`.
///
/// Expressions of length one and two over all quotients are found once up
/// front. Iteration `i` draws from its own ChaCha stream of `seed`; the best
/// result over all iterations (ties going to the earliest) depends only on
/// the options, not on `workers`.
pub fn random_search_with(
    f: &TargetForm,
    quotients: &EnumerationResult,
    opts: &RandomSearchOptions,
) -> Result<SearchOutcome> {
    let space = QuotientSpace::new(f, quotients)?;
    let mut spent = BudgetSpent::default();
    if opts.iterations == 0 || space.len() == 0 {
        return Ok(SearchOutcome::bounded(None, 1, spent));
    }
    let constant_at: Vec<Vec<usize>> = quotients
        .quotients
        .iter()
        .map(|q| {
            q.cusp_profile()
                .orders
                .iter()
                .enumerate()
                .filter(|(_, o)| o.is_zero())
                .map(|(c, _)| c)
                .collect()
        })
        .collect();
    let pool: Vec<usize> = (0..space.len())
        .filter(|&i| constant_at[i].len() <= opts.max_constant_cusps)
        .collect();
    let ctx = Context {
        space: &space,
        constant_at,
        pool,
        opts,
    };
    let all: Vec<usize> = (0..space.len()).collect();
    let mut best = best_solution(first_scan(&space, &all, &mut spent));
    let run = || {
        (opts.first_iteration..opts.first_iteration + opts.iterations)
            .into_par_iter()
            .map(|i| run_iteration(&ctx, i))
            .collect::<Vec<_>>()
    };
    let results = match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(run),
        None => run(),
    };
    for (sol, iter_spent) in results {
        spent.absorb(&iter_spent);
        spent.iterations += 1;
        if let Some(sol) = sol {
            let key = (sol.len(), sol.height_product(), sol.exponent_mass);
            if best.as_ref().is_none_or(|b| key < (b.len(), b.height_product(), b.exponent_mass)) {
                best = Some(sol);
            }
        }
    }
    Ok(SearchOutcome::bounded(best.map(|s| space.expression(&s)), 1, spent))
}

fn run_iteration(ctx: &Context<'_, '_>, iteration: u64) -> (Option<Solution>, BudgetSpent) {
    let space = ctx.space;
    let mut spent = BudgetSpent::default();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed);
    rng.set_stream(iteration);
    let mut set: Vec<usize> = Vec::new();
    let mut found: Vec<Solution> = Vec::new();

    if !ctx.pool.is_empty() {
        let a = ctx.pool[rng.random_range(0..ctx.pool.len())];
        set.push(a);
        let partners: Vec<usize> = ctx
            .pool
            .iter()
            .copied()
            .filter(|&j| {
                j != a
                    && (ctx.constant_at[a].is_empty()
                        || ctx.constant_at[j].iter().any(|c| ctx.constant_at[a].contains(c)))
            })
            .collect();
        if !partners.is_empty() {
            set.push(partners[rng.random_range(0..partners.len())]);
        }
        for k in 1..=set.len() {
            let mut prefix = set[..k].to_vec();
            prefix.sort_unstable();
            let rest: Vec<usize> = ctx.pool.iter().copied().filter(|j| !prefix.contains(j)).collect();
            let scan = space.complete_prefix(&prefix, &rest, space.primes_for_length(k + 2));
            spent.exact_checks += scan.exact_checks;
            found.extend(scan.solutions);
        }
        if let Some(best) = best_solution(found) {
            return (Some(best), spent);
        }
    }

    let m = space.len();
    let mut ech = Echelon::new(Field::new(PRIMES[0]));
    let mut used = vec![false; m];
    let mut remaining = m;
    for &j in &set {
        ech.insert(space.vector_mod(j));
        used[j] = true;
        remaining -= 1;
    }
    while remaining > 0 && !ech.contains(space.target_mod()) {
        let j = rng.random_range(0..m);
        if used[j] {
            continue;
        }
        used[j] = true;
        remaining -= 1;
        if ech.insert(space.vector_mod(j)) {
            set.push(j);
        }
    }
    set.sort_unstable();
    spent.exact_checks += 1;
    let Some(full) = space.solve(&set) else {
        return (None, spent);
    };
    let pool = full.indices.clone();
    let mut scan0: Option<Vec<Solution>> = None;
    for n in 1..pool.len() {
        let subsets = binomial(pool.len() as u64, n as u64);
        if spent.subsets + subsets > ctx.opts.subset_budget {
            break;
        }
        spent.subsets += subsets;
        let scan0 = scan0.get_or_insert_with(|| first_scan(space, &pool, &mut spent));
        if let Some(best) = best_solution(solutions_at_length(space, &pool, n, scan0, &mut spent)) {
            return (Some(best), spent);
        }
    }
    (Some(full), spent)
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
    fn zero_iterations_find_nothing() {
        let e = enumerate_eta_quotients(35, 2).unwrap();
        let out = random_search(&f35(), &e, 0, 1).unwrap();
        assert_eq!(out.status, SearchStatus::NoneFound);
        assert_eq!(out.budget_spent, BudgetSpent::default());
    }

    #[test]
    fn deterministic_for_seed_and_independent_of_workers() {
        let e = enumerate_eta_quotients(35, 2).unwrap();
        let opts = |workers| RandomSearchOptions {
            iterations: 20,
            seed: 42,
            workers: Some(workers),
            ..Default::default()
        };
        let a = random_search_with(&f35(), &e, &opts(1)).unwrap();
        let b = random_search_with(&f35(), &e, &opts(4)).unwrap();
        assert_eq!(a, b);
        let best = a.best.unwrap();
        assert!(verify_expression(&best, &f35()).unwrap());
        assert_eq!(best.len(), 2);
    }

    #[test]
    fn chunks_reproduce_a_single_run() {
        let e = enumerate_eta_quotients(35, 2).unwrap();
        let run = |first_iteration, iterations| {
            let opts = RandomSearchOptions {
                iterations,
                first_iteration,
                seed: 7,
                ..Default::default()
            };
            random_search_with(&f35(), &e, &opts).unwrap()
        };
        let whole = run(0, 12);
        let chunked = run(0, 5).merge(run(5, 7));
        assert_eq!(whole.best, chunked.best);
    }
}
