use super::space::QuotientSpace;
use super::{Expression, TargetForm};
use crate::enumerate::{EnumerationResult, Enumerator};
use crate::error::{Error, Result};

/// Some expression for `f` in the span of `quotients`, or `None` when `f` is
/// provably outside it.
pub fn find_any_expression(f: &TargetForm, quotients: &EnumerationResult) -> Result<Option<Expression>> {
    let space = QuotientSpace::new(f, quotients)?;
    let (sol, _) = space.find_any();
    Ok(sol.map(|s| space.expression(&s)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelMultiplier {
    pub multiplier: u64,
    pub expression: Expression,
}

/// Least `d <= d_max` such that `f` is a combination of holomorphic eta
/// quotients of level `N * d`.
pub fn minimal_level_multiplier(
    f: &TargetForm,
    d_max: u64,
    enumerator: &Enumerator,
) -> Result<Option<LevelMultiplier>> {
    if d_max == 0 {
        return Err(Error::InvalidArgument("d_max must be at least 1".into()));
    }
    for d in 1..=d_max {
        let required = f.required_coefficients(d)?;
        if f.an.len() < required {
            return Err(Error::InsufficientCoefficients {
                label: f.label.clone(),
                required,
                available: f.an.len(),
            });
        }
        let quotients = enumerator.get(f.level * d, f.weight)?;
        if quotients.quotients.is_empty() {
            continue;
        }
        if let Some(expression) = find_any_expression(f, &quotients)? {
            return Ok(Some(LevelMultiplier {
                multiplier: d,
                expression,
            }));
        }
    }
    Ok(None)
}
