use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use etaforge::enumerate::EnumerationResult;
use etaforge::express::{
    exhaustive_search, permutation_search, random_search_with, RandomSearchOptions, SearchOutcome, TargetForm,
};

use crate::{finish, Strategy};

pub struct Plan {
    pub strategy: Strategy,
    pub budget: u128,
    pub iterations: u64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub chunk: u64,
    pub interval: Duration,
}

/// Progress of a minimization run; stages already done are not repeated.
#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    label: String,
    level: u64,
    seed: u64,
    strategy: String,
    budget: String,
    exhaustive_done: bool,
    permutation_done: bool,
    iterations_done: u64,
    outcome: Option<SearchOutcome>,
}

impl Checkpoint {
    fn absorb(&mut self, o: SearchOutcome) {
        self.outcome = Some(match self.outcome.take() {
            Some(cur) => cur.merge(o),
            None => o,
        });
    }
}

fn save(cp: &Checkpoint, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_vec_pretty(cp)?).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
}

pub fn run(f: &TargetForm, quotients: &EnumerationResult, plan: &Plan, checkpoint: Option<&Path>) -> Result<SearchOutcome> {
    let fresh = Checkpoint {
        label: f.label.clone(),
        level: quotients.level,
        seed: plan.seed,
        strategy: format!("{:?}", plan.strategy).to_lowercase(),
        budget: plan.budget.to_string(),
        exhaustive_done: false,
        permutation_done: false,
        iterations_done: 0,
        outcome: None,
    };
    let mut cp = match checkpoint.filter(|p| p.exists()) {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cp: Checkpoint = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            let key = |c: &Checkpoint| (c.label.clone(), c.level, c.seed, c.strategy.clone(), c.budget.clone());
            if key(&cp) != key(&fresh) {
                bail!("{} belongs to a different run", p.display());
            }
            cp
        }
        None => fresh,
    };
    let mut last = Instant::now();
    let mut save_now = |cp: &Checkpoint, force: bool| -> Result<()> {
        if let Some(p) = checkpoint {
            if force || last.elapsed() >= plan.interval {
                save(cp, p)?;
                last = Instant::now();
            }
        }
        Ok(())
    };

    let use_exhaustive = matches!(plan.strategy, Strategy::Auto | Strategy::Exhaustive);
    if use_exhaustive && !cp.exhaustive_done {
        cp.absorb(exhaustive_search(f, quotients, plan.budget)?);
        cp.exhaustive_done = true;
        save_now(&cp, true)?;
    }
    let settled = cp.outcome.as_ref().is_some_and(|o| o.exhausted);
    if settled && plan.strategy == Strategy::Auto {
        save_now(&cp, true)?;
        return Ok(finish(f, cp.outcome.expect("outcome present")));
    }
    if matches!(plan.strategy, Strategy::Auto | Strategy::Permutation) && !cp.permutation_done {
        cp.absorb(permutation_search(f, quotients, plan.budget)?);
        cp.permutation_done = true;
        save_now(&cp, true)?;
    }
    if matches!(plan.strategy, Strategy::Auto | Strategy::Random) {
        while cp.iterations_done < plan.iterations {
            let n = plan.chunk.min(plan.iterations - cp.iterations_done);
            let opts = RandomSearchOptions {
                iterations: n,
                first_iteration: cp.iterations_done,
                seed: plan.seed,
                workers: plan.workers,
                ..Default::default()
            };
            cp.absorb(random_search_with(f, quotients, &opts)?);
            cp.iterations_done += n;
            save_now(&cp, false)?;
        }
    }
    save_now(&cp, true)?;
    let outcome = cp.outcome.context("no search stage ran")?;
    Ok(finish(f, outcome))
}
