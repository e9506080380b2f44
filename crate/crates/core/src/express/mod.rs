//! Eta expressions for newforms: finding one, raising the level, and
//! searching for short expressions with small coefficients.

mod exhaustive;
mod level;
mod permutation;
mod random;
mod space;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::etaquot::{sturm_bound, EtaQuotient};

pub use exhaustive::{exhaustive_search, DEFAULT_SUBSET_BUDGET};
pub use level::{find_any_expression, minimal_level_multiplier, LevelMultiplier};
pub use permutation::{exponent_classes, permutation_search};
pub use random::{random_search, random_search_with, RandomSearchOptions};

/// Newforms known to be a single eta quotient, so length one is possible.
pub const SINGLE_QUOTIENT_FORMS: [&str; 11] = [
    "11.2.a.a", "14.2.a.a", "15.2.a.a", "20.2.a.a", "24.2.a.a", "27.2.a.a", "32.2.a.a",
    "36.2.a.a", "48.2.a.a", "64.2.a.a", "80.2.a.b",
];

/// A weight-k cusp form given by its coefficients `a_1, a_2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetForm {
    pub label: String,
    pub level: u64,
    pub weight: u64,
    pub an: Vec<i64>,
}

impl TargetForm {
    pub fn new(label: impl Into<String>, level: u64, weight: u64, an: Vec<i64>) -> Result<Self> {
        let label = label.into();
        if level == 0 {
            return Err(Error::InvalidArgument("level must be positive".into()));
        }
        if let Some(&a1) = an.first() {
            if a1 != 1 {
                return Err(Error::InvalidRecord {
                    label,
                    message: format!("a_1 = {a1}, expected 1"),
                });
            }
        }
        Ok(TargetForm {
            label,
            level,
            weight,
            an,
        })
    }

    /// Coefficients needed to compare at level `N * d`.
    pub fn required_coefficients(&self, multiplier: u64) -> Result<usize> {
        Ok(sturm_bound(self.level * multiplier, self.weight)? as usize)
    }

    /// `[a_0 = 0, a_1, ..., a_{len-1}]`.
    pub fn coefficient_vector(&self, len: usize) -> Result<Vec<BigInt>> {
        let needed = len.saturating_sub(1);
        if self.an.len() < needed {
            return Err(Error::InsufficientCoefficients {
                label: self.label.clone(),
                required: needed,
                available: self.an.len(),
            });
        }
        Ok((0..len)
            .map(|n| if n == 0 { BigInt::zero() } else { BigInt::from(self.an[n - 1]) })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub coef: BigRational,
    pub quotient: EtaQuotient,
}

/// A linear combination of eta quotients of one level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Expression {
    level: u64,
    terms: Vec<Term>,
}

impl Expression {
    pub fn new(level: u64, terms: Vec<Term>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut weight = None;
        for t in &terms {
            if t.coef.is_zero() {
                return Err(Error::InvalidArgument(format!("zero coefficient on {}", t.quotient)));
            }
            if t.quotient.level() != level {
                return Err(Error::InvalidArgument(format!(
                    "{} is not of level {level}",
                    t.quotient
                )));
            }
            let w = t.quotient.weight();
            if *weight.get_or_insert_with(|| w.clone()) != w {
                return Err(Error::InvalidArgument("terms have different weights".into()));
            }
            if !seen.insert(t.quotient.clone()) {
                return Err(Error::InvalidArgument(format!("duplicate quotient {}", t.quotient)));
            }
        }
        Ok(Expression { level, terms })
    }

    pub fn from_pairs(level: u64, pairs: Vec<(BigRational, EtaQuotient)>) -> Result<Self> {
        Expression::new(
            level,
            pairs
                .into_iter()
                .map(|(coef, quotient)| Term { coef, quotient })
                .collect(),
        )
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight(&self) -> Option<BigRational> {
        self.terms.first().map(|t| t.quotient.weight())
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &BigRational> {
        self.terms.iter().map(|t| &t.coef)
    }

    /// `prod |a * b|` over coefficients `a / b`; ordering by this matches
    /// ordering by total logarithmic height.
    pub fn height_product(&self) -> BigInt {
        self.terms
            .iter()
            .map(|t| (t.coef.numer() * t.coef.denom()).abs())
            .product()
    }

    /// `sum |r|` over all exponents of all terms.
    pub fn exponent_mass(&self) -> u64 {
        self.terms
            .iter()
            .flat_map(|t| t.quotient.exponents())
            .map(|r| r.unsigned_abs())
            .sum()
    }

    pub fn has_unit_coefficients(&self) -> bool {
        self.terms.iter().all(|t| t.coef.abs().is_one())
    }

    /// `sum coef * q-expansion` on `q^0 .. q^{len-1}`.
    pub fn coefficient_vector(&self, len: usize) -> Result<Vec<BigRational>> {
        let mut out = vec![BigRational::zero(); len];
        for t in &self.terms {
            let v = t.quotient.coefficient_vector(len)?;
            for (o, x) in out.iter_mut().zip(v) {
                *o += &t.coef * BigRational::from_integer(x);
            }
        }
        Ok(out)
    }

    /// Same expression with `-coef` everywhere.
    pub fn negated(&self) -> Expression {
        Expression {
            level: self.level,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coef: -t.coef.clone(),
                    quotient: t.quotient.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{} * {}", t.coef, t.quotient)?;
        }
        Ok(())
    }
}

fn parse_term(line: &str) -> Result<Term> {
    let (coef, quot) = line
        .split_once('*')
        .ok_or_else(|| Error::Parse(format!("expected `<coef> * eta_N[...]`, got `{line}`")))?;
    let coef: BigRational = coef
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad coefficient `{}`", coef.trim())))?;
    let quotient: EtaQuotient = quot.trim().parse()?;
    Ok(Term { coef, quotient })
}

impl FromStr for Expression {
    type Err = Error;

    /// One term per line; blank lines and `#` comments are skipped. The level
    /// is taken from the first term.
    fn from_str(s: &str) -> Result<Self> {
        let terms: Vec<Term> = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(parse_term)
            .collect::<Result<_>>()?;
        let level = terms.first().map_or(1, |t| t.quotient.level());
        Expression::new(level, terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    ProvedMinimal,
    InferredMinimal,
    Bounded,
    NoneFound,
}

impl SearchStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchStatus::ProvedMinimal => "proved-minimal",
            SearchStatus::InferredMinimal => "inferred-minimal",
            SearchStatus::Bounded => "bounded",
            SearchStatus::NoneFound => "none-found",
        }
    }
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SearchStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proved-minimal" => Ok(SearchStatus::ProvedMinimal),
            "inferred-minimal" => Ok(SearchStatus::InferredMinimal),
            "bounded" => Ok(SearchStatus::Bounded),
            "none-found" => Ok(SearchStatus::NoneFound),
            _ => Err(Error::Parse(format!("unknown status `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetSpent {
    /// Subsets covered by exhaustive sweeps.
    pub subsets: u128,
    /// Random restarts performed.
    pub iterations: u64,
    /// Exact rational span checks.
    pub exact_checks: u64,
}

impl BudgetSpent {
    pub fn absorb(&mut self, other: &BudgetSpent) {
        self.subsets += other.subsets;
        self.iterations += other.iterations;
        self.exact_checks += other.exact_checks;
    }
}

/// Lower bound meaning "no expression exists at this level".
pub const NO_LOWER_BOUND: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: Option<Expression>,
    /// No expression shorter than this exists.
    pub n_lower: usize,
    pub n_upper: Option<usize>,
    pub status: SearchStatus,
    pub budget_spent: BudgetSpent,
    /// Set when an exhaustive sweep finished at length `n_upper`.
    #[serde(default)]
    pub exhausted: bool,
}

impl SearchOutcome {
    pub fn none_found(n_lower: usize, budget_spent: BudgetSpent) -> Self {
        SearchOutcome {
            best: None,
            n_lower,
            n_upper: None,
            status: SearchStatus::NoneFound,
            budget_spent,
            exhausted: false,
        }
    }

    pub fn bounded(best: Option<Expression>, n_lower: usize, budget_spent: BudgetSpent) -> Self {
        let status = if best.is_some() {
            SearchStatus::Bounded
        } else {
            SearchStatus::NoneFound
        };
        SearchOutcome {
            n_upper: best.as_ref().map(Expression::len),
            best,
            n_lower,
            status,
            budget_spent,
            exhausted: false,
        }
    }

    /// Merge two outcomes for the same form: strongest lower bound, smallest
    /// expression.
    pub fn merge(mut self, other: SearchOutcome) -> SearchOutcome {
        if other.n_lower != NO_LOWER_BOUND && (self.n_lower == NO_LOWER_BOUND || other.n_lower > self.n_lower) {
            self.n_lower = other.n_lower;
        }
        let replace = match (&self.best, &other.best) {
            (None, Some(_)) => true,
            (Some(a), Some(b)) => size_order(b, a) == SizeOrder::Smaller,
            _ => false,
        };
        if replace {
            self.best = other.best;
            self.n_upper = self.best.as_ref().map(Expression::len);
            self.exhausted = other.exhausted;
        }
        self.budget_spent.absorb(&other.budget_spent);
        self.status = self.status.min(other.status);
        if self.best.is_some() && self.status == SearchStatus::NoneFound {
            self.status = SearchStatus::Bounded;
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeOrder {
    Smaller,
    Larger,
    Equivalent,
}

/// Fewer terms first, then smaller total height, then smaller exponent mass.
pub fn size_order(a: &Expression, b: &Expression) -> SizeOrder {
    let ord = a
        .len()
        .cmp(&b.len())
        .then_with(|| a.height_product().cmp(&b.height_product()))
        .then_with(|| a.exponent_mass().cmp(&b.exponent_mass()));
    match ord {
        Ordering::Less => SizeOrder::Smaller,
        Ordering::Greater => SizeOrder::Larger,
        Ordering::Equal => SizeOrder::Equivalent,
    }
}

/// Compares against the form on `q^0 .. q^B`, `B` the Sturm bound of the
/// expression's level.
pub fn verify_expression(e: &Expression, f: &TargetForm) -> Result<bool> {
    let bound = sturm_bound(e.level(), f.weight)? as usize;
    let target = f.coefficient_vector(bound + 1)?;
    if let Some(w) = e.weight() {
        if w != BigRational::from_integer(BigInt::from(f.weight)) {
            return Ok(false);
        }
    }
    if e.level() % f.level != 0 {
        return Ok(false);
    }
    let got = e.coefficient_vector(bound + 1)?;
    Ok(got
        .iter()
        .zip(&target)
        .all(|(a, b)| *a == BigRational::from_integer(b.clone())))
}

/// True when a single quotient is excluded for this form.
pub fn rule_out_single_quotient(f: &TargetForm) -> bool {
    !SINGLE_QUOTIENT_FORMS.contains(&f.label.as_str())
}

/// Strengthen a status from what is already known. Never weakens it.
pub fn certify(outcome: SearchOutcome) -> SearchOutcome {
    let mut out = outcome;
    let Some(best) = &out.best else {
        return out;
    };
    if out.n_lower != best.len() {
        return out;
    }
    if out.exhausted {
        out.status = SearchStatus::ProvedMinimal;
    } else if best.has_unit_coefficients() && out.status != SearchStatus::ProvedMinimal {
        out.status = SearchStatus::InferredMinimal;
    }
    out
}

/// Header plus expression, as stored in table fixtures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpressionFile {
    pub label: String,
    pub level: u64,
    pub status: SearchStatus,
    pub n_lower: usize,
    pub n_upper: Option<usize>,
    pub expression: Expression,
}

fn bound_text(n: usize) -> String {
    if n == NO_LOWER_BOUND {
        "inf".into()
    } else {
        n.to_string()
    }
}

impl fmt::Display for ExpressionFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# label={} level={} status={} n_lower={} n_upper={}",
            self.label,
            self.level,
            self.status,
            bound_text(self.n_lower),
            self.n_upper.map_or("none".to_string(), |n| n.to_string()),
        )?;
        write!(f, "{}", self.expression)
    }
}

impl FromStr for ExpressionFile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .and_then(|h| h.strip_prefix("# "))
            .ok_or_else(|| Error::Parse("missing `# label=...` header".into()))?;
        let mut label = None;
        let mut level = None;
        let mut status = None;
        let mut n_lower = None;
        let mut n_upper = None;
        for kv in header.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{kv}`")))?;
            let num = |v: &str| -> Result<usize> {
                v.parse().map_err(|_| Error::Parse(format!("bad number in `{kv}`")))
            };
            match k {
                "label" => label = Some(v.to_string()),
                "level" => level = Some(num(v)? as u64),
                "status" => status = Some(v.parse()?),
                "n_lower" => n_lower = Some(if v == "inf" { NO_LOWER_BOUND } else { num(v)? }),
                "n_upper" => n_upper = Some(if v == "none" { None } else { Some(num(v)?) }),
                _ => return Err(Error::Parse(format!("unknown header field `{k}`"))),
            }
        }
        let missing = |name: &str| Error::Parse(format!("header is missing `{name}`"));
        let level = level.ok_or_else(|| missing("level"))?;
        let body: Vec<&str> = lines.collect();
        let expression: Expression = body.join("\n").parse()?;
        if !expression.is_empty() && expression.level() != level {
            return Err(Error::Parse(format!(
                "header level {level} but quotients of level {}",
                expression.level()
            )));
        }
        let expression = if expression.is_empty() {
            Expression::new(level, Vec::new())?
        } else {
            expression
        };
        Ok(ExpressionFile {
            label: label.ok_or_else(|| missing("label"))?,
            level,
            status: status.ok_or_else(|| missing("status"))?,
            n_lower: n_lower.ok_or_else(|| missing("n_lower"))?,
            n_upper: n_upper.ok_or_else(|| missing("n_upper"))?,
            expression,
        })
    }
}
