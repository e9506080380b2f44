mod minimize;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use etaforge::analytic::{eta_transform_check, eta_transform_factor, format_complex, verify_zero, ModularMatrix, UpperHalfPoint};
use etaforge::enumerate::{write_enumeration, EnumerationCache, EnumerationOptions, Enumerator};
use etaforge::express::{
    certify, exhaustive_search, minimal_level_multiplier, permutation_search, random_search_with,
    rule_out_single_quotient, Expression, ExpressionFile, RandomSearchOptions, SearchOutcome, TargetForm,
    DEFAULT_SUBSET_BUDGET, NO_LOWER_BOUND,
};
use etaforge::ingest::{default_cache_dir, load_fixture, FormCache, Fetcher, LmfdbClient, NewformLabel, DEFAULT_TIMEOUT_SECS};
use etaforge::sturm_bound;
use etaforge::tables::{load_table, TableVerifier};

/// Eta quotients on Gamma0(N) and eta expressions for weight-2 newforms.
#[derive(Parser, Debug)]
#[command(name = "etaforge", version)]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for cached enumerations and coefficient records.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate holomorphic eta quotients of level N and weight k.
    Enumerate {
        level: u64,
        weight: u64,
        /// Also write the enumeration to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the least level multiplier d and a short expression at level N*d.
    Express {
        label: String,
        #[arg(long, default_value_t = 12)]
        d_max: u64,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        forms: FormArgs,
        /// Write the expression file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a minimal expression at a fixed level, with checkpoints.
    Minimize {
        label: String,
        /// Level multiplier: the search runs at level N*d.
        #[arg(long, default_value_t = 1)]
        d: u64,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        forms: FormArgs,
        /// Checkpoint file; an existing one is resumed.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Seconds between checkpoint writes.
        #[arg(long, default_value_t = 60)]
        checkpoint_secs: u64,
        /// Random-search iterations run between checkpoint opportunities.
        #[arg(long, default_value_t = 50)]
        chunk: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every row of an expression table against coefficient records.
    VerifyTables {
        #[arg(default_value = "fixtures/tables")]
        table_dir: PathBuf,
        #[arg(long, default_value = "fixtures/forms")]
        forms_dir: PathBuf,
        /// Sweep d-bound rows up to this multiplier.
        #[arg(long)]
        d_bound_max: Option<u64>,
    },
    /// Evaluate an expression at a point and check it vanishes.
    VerifyZero {
        /// Newform label (looked up in --table-dir) or an expression file.
        target: String,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 1e-10, value_parser = positive_f64)]
        tol: f64,
        #[arg(long, default_value = "fixtures/tables")]
        table_dir: PathBuf,
        /// Transformation check `MATRIX@S`: eta at g(S*z) against eta at S*z.
        #[arg(long = "matrix")]
        matrices: Vec<String>,
    },
    /// Fetch coefficients of a newform into the cache.
    Fetch {
        label: String,
        #[arg(long, default_value_t = 200)]
        min_coeffs: usize,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS)]
        timeout_secs: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Strategy {
    /// Exhaustive sweep, then the heuristics when the budget runs out.
    Auto,
    Exhaustive,
    Random,
    Permutation,
}

#[derive(clap::Args, Debug, Clone)]
struct SearchArgs {
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    strategy: Strategy,
    /// Subset budget for exhaustive and permutation searches.
    #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
    budget: u128,
    /// Random-search iterations.
    #[arg(long, default_value_t = 1000)]
    iterations: u64,
}

#[derive(clap::Args, Debug, Clone)]
struct FormArgs {
    /// Read coefficients from this directory instead of the cache or LMFDB.
    #[arg(long)]
    forms_dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS)]
    timeout_secs: u64,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("tolerance must be positive, got {s}"))
    }
}

struct App {
    json: bool,
    seed: u64,
    workers: Option<usize>,
    cache_dir: PathBuf,
}

impl App {
    fn enumerator(&self) -> Enumerator {
        Enumerator::with_cache(
            self.cache_dir.join("enumerations"),
            EnumerationOptions {
                workers: self.workers,
                ..Default::default()
            },
        )
    }

    fn emit(&self, text: &str, value: Value) {
        if self.json {
            println!("{value}");
        } else {
            println!("{text}");
        }
    }

    fn target(&self, label: &str, forms: &FormArgs, multiplier: u64) -> Result<TargetForm> {
        let parsed: NewformLabel = label.parse()?;
        let record = match &forms.forms_dir {
            Some(dir) => load_fixture(dir, label)?,
            None => {
                let min = sturm_bound(parsed.level * multiplier, parsed.weight)? as usize;
                let fetcher = Fetcher::new(
                    LmfdbClient::from_env(Duration::from_secs(forms.timeout_secs)),
                    FormCache::new(self.cache_dir.join("forms")),
                );
                fetcher.fetch_newform(label, min)?
            }
        };
        Ok(record.target()?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let app = App {
        json: cli.json,
        seed: cli.seed,
        workers: cli.workers,
        cache_dir: cli.cache_dir.unwrap_or_else(default_cache_dir),
    };
    match run(&app, cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

/// `Ok(false)` when a requested check failed.
fn run(app: &App, command: Command) -> Result<bool> {
    match command {
        Command::Enumerate { level, weight, out } => cmd_enumerate(app, level, weight, out.as_deref()),
        Command::Express {
            label,
            d_max,
            search,
            forms,
            out,
        } => cmd_express(app, &label, d_max, &search, &forms, out.as_deref()),
        Command::Minimize {
            label,
            d,
            search,
            forms,
            checkpoint,
            checkpoint_secs,
            chunk,
            out,
        } => {
            let f = app.target(&label, &forms, d)?;
            let quotients = app.enumerator().get(f.level * d, f.weight)?;
            let plan = minimize::Plan {
                strategy: search.strategy,
                budget: search.budget,
                iterations: search.iterations,
                seed: app.seed,
                workers: app.workers,
                chunk: chunk.max(1),
                interval: Duration::from_secs(checkpoint_secs),
            };
            let outcome = minimize::run(&f, &quotients, &plan, checkpoint.as_deref())?;
            report_outcome(app, &f, Some(d), &outcome, out.as_deref())?;
            Ok(true)
        }
        Command::VerifyTables {
            table_dir,
            forms_dir,
            d_bound_max,
        } => cmd_verify_tables(app, &table_dir, &forms_dir, d_bound_max),
        Command::VerifyZero {
            target,
            point,
            tol,
            table_dir,
            matrices,
        } => cmd_verify_zero(app, &target, &point, tol, &table_dir, &matrices),
        Command::Fetch {
            label,
            min_coeffs,
            timeout_secs,
        } => {
            let fetcher = Fetcher::new(
                LmfdbClient::from_env(Duration::from_secs(timeout_secs)),
                FormCache::new(app.cache_dir.join("forms")),
            );
            let record = fetcher.fetch_newform(&label, min_coeffs)?;
            let path = fetcher.cache.path_for(&label);
            app.emit(
                &format!(
                    "{} level={} weight={} coefficients={} -> {}",
                    record.label,
                    record.level,
                    record.weight,
                    record.an.len(),
                    path.display()
                ),
                json!({
                    "label": record.label,
                    "level": record.level,
                    "weight": record.weight,
                    "coefficients": record.an.len(),
                    "path": path,
                }),
            );
            Ok(true)
        }
    }
}

fn cmd_enumerate(app: &App, level: u64, weight: u64, out: Option<&Path>) -> Result<bool> {
    let dir = app.cache_dir.join("enumerations");
    let result = app.enumerator().get(level, weight)?;
    let path = match out {
        Some(p) => {
            write_enumeration(&result, p)?;
            p.to_path_buf()
        }
        None => EnumerationCache::new(&dir).path_for(level, weight),
    };
    app.emit(
        &result.count.to_string(),
        json!({ "level": level, "weight": weight, "count": result.count, "path": path }),
    );
    Ok(true)
}

fn run_strategy(f: &TargetForm, quotients: &etaforge::enumerate::EnumerationResult, search: &SearchArgs, app: &App) -> Result<SearchOutcome> {
    let random = || {
        random_search_with(
            f,
            quotients,
            &RandomSearchOptions {
                iterations: search.iterations,
                seed: app.seed,
                workers: app.workers,
                ..Default::default()
            },
        )
    };
    Ok(match search.strategy {
        Strategy::Exhaustive => exhaustive_search(f, quotients, search.budget)?,
        Strategy::Permutation => permutation_search(f, quotients, search.budget)?,
        Strategy::Random => random()?,
        Strategy::Auto => {
            let out = exhaustive_search(f, quotients, search.budget)?;
            if out.exhausted || out.n_lower == NO_LOWER_BOUND {
                out
            } else {
                out.merge(permutation_search(f, quotients, search.budget)?).merge(random()?)
            }
        }
    })
}

/// Adds the single-quotient exclusion and upgrades the status where the
/// bounds allow.
pub(crate) fn finish(f: &TargetForm, mut outcome: SearchOutcome) -> SearchOutcome {
    if outcome.best.is_some() && outcome.n_lower < 2 && rule_out_single_quotient(f) {
        outcome.n_lower = 2;
    }
    certify(outcome)
}

fn cmd_express(
    app: &App,
    label: &str,
    d_max: u64,
    search: &SearchArgs,
    forms: &FormArgs,
    out: Option<&Path>,
) -> Result<bool> {
    let f = app.target(label, forms, d_max)?;
    let enumerator = app.enumerator();
    let Some(m) = minimal_level_multiplier(&f, d_max, &enumerator)? else {
        app.emit(
            &format!("{label}: no expression for d ≤ {d_max}"),
            json!({ "label": label, "d": null, "d_max": d_max }),
        );
        return Ok(true);
    };
    let quotients = enumerator.get(f.level * m.multiplier, f.weight)?;
    let fallback = SearchOutcome::bounded(Some(m.expression), 1, Default::default());
    let outcome = finish(&f, run_strategy(&f, &quotients, search, app)?.merge(fallback));
    report_outcome(app, &f, Some(m.multiplier), &outcome, out)?;
    Ok(true)
}

fn report_outcome(app: &App, f: &TargetForm, d: Option<u64>, outcome: &SearchOutcome, out: Option<&Path>) -> Result<()> {
    let Some(best) = outcome.best.as_ref() else {
        app.emit(
            &format!("{}: no expression found", f.label),
            json!({ "label": f.label, "d": d, "status": outcome.status.as_str() }),
        );
        return Ok(());
    };
    let file = ExpressionFile {
        label: f.label.clone(),
        level: best.level(),
        status: outcome.status,
        n_lower: outcome.n_lower,
        n_upper: outcome.n_upper,
        expression: best.clone(),
    };
    if let Some(path) = out {
        std::fs::write(path, file.to_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    let d_text = d.map_or(String::new(), |d| format!("d={d}\n"));
    app.emit(
        &format!("{d_text}{file}"),
        json!({
            "label": f.label,
            "d": d,
            "level": best.level(),
            "terms": best.len(),
            "expression": best.to_string(),
            "n_lower": bound_json(outcome.n_lower),
            "n_upper": outcome.n_upper,
            "status": outcome.status.as_str(),
            "budget_spent": outcome.budget_spent,
        }),
    );
    Ok(())
}

fn bound_json(n: usize) -> Value {
    if n == NO_LOWER_BOUND {
        json!("inf")
    } else {
        json!(n)
    }
}

fn cmd_verify_tables(app: &App, table_dir: &Path, forms_dir: &Path, d_bound_max: Option<u64>) -> Result<bool> {
    let rows = load_table(table_dir)?;
    let verifier = TableVerifier {
        d_bound_max,
        enumerator: app.enumerator(),
        ..TableVerifier::new(forms_dir)
    };
    let reports = verifier.verify_table(&rows);
    let failed = reports.iter().filter(|r| !r.outcome.passed()).count();
    let ok = failed == 0;
    let mut text: Vec<String> = reports.iter().map(ToString::to_string).collect();
    text.push(format!("{} rows, {} failed", reports.len(), failed));
    app.emit(
        &text.join("\n"),
        json!({ "rows": reports, "failed": failed, "passed": ok }),
    );
    Ok(ok)
}

fn load_expression(target: &str, table_dir: &Path) -> Result<Expression> {
    let path = Path::new(target);
    let path = if path.is_file() {
        path.to_path_buf()
    } else if target.parse::<NewformLabel>().is_ok() {
        table_dir.join(format!("{target}.txt"))
    } else {
        bail!("{target} is neither a file nor a newform label");
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('#') {
        Ok(text.parse::<ExpressionFile>()?.expression)
    } else {
        Ok(text.parse::<Expression>()?)
    }
}

fn cmd_verify_zero(
    app: &App,
    target: &str,
    point: &str,
    tol: f64,
    table_dir: &Path,
    matrices: &[String],
) -> Result<bool> {
    let e = load_expression(target, table_dir)?;
    let z: UpperHalfPoint = point.parse()?;
    let (zero, eval) = verify_zero(&e, &z, tol)?;
    let mut ok = zero;
    let mark = |b: bool| if b { "pass" } else { "FAIL" };
    let mut text = vec![format!(
        "|f(z)| = {:.3e} at z = {} (tol {:e}): {}",
        eval.value.norm(),
        z,
        tol,
        mark(zero)
    )];
    let mut checks = Vec::new();
    for spec in matrices {
        let (g, scale) = match spec.split_once('@') {
            Some((g, s)) => (g, s.trim().parse::<f64>().with_context(|| format!("bad scale in {spec}"))?),
            None => (spec.as_str(), 1.0),
        };
        let g: ModularMatrix = g.trim().parse()?;
        let zs = z.scaled(scale)?;
        let pass = eta_transform_check(&g, &zs, tol)?;
        let factor = eta_transform_factor(&g, &zs)?;
        ok &= pass;
        text.push(format!(
            "eta({g} * {scale}z) = ({}) eta({scale}z): {}",
            format_complex(factor),
            mark(pass)
        ));
        checks.push(json!({
            "matrix": g.to_string(),
            "scale": scale,
            "factor": format_complex(factor),
            "passed": pass,
        }));
    }
    app.emit(
        &text.join("\n"),
        json!({
            "point": z.to_string(),
            "abs_value": eval.value.norm(),
            "error_bound": eval.error,
            "tol": tol,
            "zero": zero,
            "matrices": checks,
            "passed": ok,
        }),
    );
    Ok(ok)
}
