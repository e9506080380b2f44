//! Coefficient vectors of a quotient list against one target form, with exact
//! span tests and a prime-field scan that finds every one- and two-element
//! completion of a fixed prefix.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{Expression, TargetForm, Term};
use crate::enumerate::EnumerationResult;
use crate::error::{Error, Result};
use crate::etaquot::{sturm_bound, EtaQuotient};
use crate::exactla::{primitive_integer_vector, solve_in_span_integer, CoeffMatrix};
use crate::modp::{norm_power_bits, primes_for_bits, Echelon, Field, PRIMES};

/// A set of quotients with nonzero coefficients representing the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Solution {
    /// Sorted quotient indices.
    pub indices: Vec<usize>,
    pub coeffs: Vec<BigRational>,
    /// Sum of absolute exponents over all quotients used.
    pub exponent_mass: u64,
}

impl Solution {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn height_product(&self) -> BigInt {
        self.coeffs
            .iter()
            .map(|c| (c.numer() * c.denom()).abs())
            .product()
    }

    /// Colexicographic rank of the index set.
    pub fn colex_rank(&self) -> u128 {
        self.indices
            .iter()
            .enumerate()
            .map(|(i, &x)| crate::arith::binomial(x as u64, i as u64 + 1))
            .fold(0u128, u128::saturating_add)
    }

    /// Ordering key: length, height, exponent mass, then colex rank.
    pub fn key(&self) -> (usize, BigInt, u64, u128) {
        (self.len(), self.height_product(), self.exponent_mass, self.colex_rank())
    }
}

pub(crate) fn best_solution(sols: impl IntoIterator<Item = Solution>) -> Option<Solution> {
    sols.into_iter().min_by(|a, b| a.key().cmp(&b.key()))
}

struct PrimeView {
    field: Field,
    vectors: Vec<Vec<u64>>,
    target: Vec<u64>,
}

pub(crate) struct QuotientSpace<'a> {
    level: u64,
    quotients: &'a [EtaQuotient],
    vectors: Vec<Vec<BigInt>>,
    target: Vec<BigInt>,
    views: [OnceLock<PrimeView>; PRIMES.len()],
    norm_bits: u64,
}

#[derive(Debug, Default)]
pub(crate) struct ScanResult {
    pub solutions: Vec<Solution>,
    pub exact_checks: u64,
}

fn hash_vec(v: &[u64]) -> u64 {
    v.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &x| {
        (h ^ x).wrapping_mul(0x0000_0100_0000_01b3).rotate_left(17)
    })
}

impl<'a> QuotientSpace<'a> {
    pub fn new(f: &TargetForm, quotients: &'a EnumerationResult) -> Result<Self> {
        if quotients.weight != f.weight {
            return Err(Error::InvalidArgument(format!(
                "quotients have weight {}, form {} has weight {}",
                quotients.weight, f.label, f.weight
            )));
        }
        if quotients.level % f.level != 0 {
            return Err(Error::InvalidArgument(format!(
                "level {} is not a multiple of {}",
                quotients.level, f.level
            )));
        }
        let len = sturm_bound(quotients.level, f.weight)? as usize + 1;
        let target = f.coefficient_vector(len)?;
        let vectors: Vec<Vec<BigInt>> = quotients
            .quotients
            .iter()
            .map(|q| q.coefficient_vector(len))
            .collect::<Result<_>>()?;
        let mut all = vectors.clone();
        all.push(target.clone());
        let norm_bits = norm_power_bits(&all, 1);
        Ok(QuotientSpace {
            level: quotients.level,
            quotients: &quotients.quotients,
            vectors,
            target,
            views: Default::default(),
            norm_bits,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Primes needed so that a scan for subsets of size `n` misses nothing:
    /// the product must exceed the square of the largest possible relation
    /// coefficient.
    pub fn primes_for_length(&self, n: usize) -> usize {
        primes_for_bits(2 * self.norm_bits * n as u64).min(PRIMES.len())
    }

    /// Coefficient vector of quotient `i` reduced modulo the first prime.
    pub fn vector_mod(&self, i: usize) -> &[u64] {
        &self.view(0).vectors[i]
    }

    /// Target coefficient vector reduced modulo the first prime.
    pub fn target_mod(&self) -> &[u64] {
        &self.view(0).target
    }

    fn view(&self, t: usize) -> &PrimeView {
        self.views[t].get_or_init(|| {
            let field = Field::new(PRIMES[t]);
            PrimeView {
                field,
                vectors: self.vectors.iter().map(|v| field.reduce_vec(v)).collect(),
                target: field.reduce_vec(&self.target),
            }
        })
    }

    /// Exact coefficients of the target over the given quotients, zero
    /// entries dropped.
    pub fn solve(&self, indices: &[usize]) -> Option<Solution> {
        let basis: Vec<Vec<BigInt>> = indices.iter().map(|&i| self.vectors[i].clone()).collect();
        let coeffs = solve_in_span_integer(&basis, &self.target).ok()??;
        let mut pairs: Vec<(usize, BigRational)> = indices
            .iter()
            .copied()
            .zip(coeffs)
            .filter(|(_, c)| !c.is_zero())
            .collect();
        pairs.sort_by_key(|p| p.0);
        Some(Solution {
            exponent_mass: pairs
                .iter()
                .map(|p| self.quotients[p.0].exponents().iter().map(|r| r.unsigned_abs()).sum::<u64>())
                .sum(),
            indices: pairs.iter().map(|p| p.0).collect(),
            coeffs: pairs.into_iter().map(|p| p.1).collect(),
        })
    }

    fn vector_in_span(&self, v: &[BigInt], indices: &[usize]) -> bool {
        if v.iter().all(Zero::is_zero) {
            return true;
        }
        let basis: Vec<Vec<BigInt>> = indices.iter().map(|&i| self.vectors[i].clone()).collect();
        matches!(solve_in_span_integer(&basis, v), Ok(Some(_)))
    }

    pub fn expression(&self, sol: &Solution) -> Expression {
        let terms = sol
            .indices
            .iter()
            .zip(&sol.coeffs)
            .map(|(&i, c)| Term {
                coef: c.clone(),
                quotient: self.quotients[i].clone(),
            })
            .collect();
        Expression::new(self.level, terms).expect("solution terms are distinct and nonzero")
    }

    /// Every subset `prefix + {j}` or `prefix + {j, k}` (`j < k` drawn from
    /// `pool`) whose span contains the target with all coefficients
    /// nonzero. Pairs `j, k` are paired candidates when their images modulo
    /// `span(target, prefix)` are parallel for some prime; the prime count
    /// from [`Self::primes_for_length`] makes this exhaustive.
    pub fn complete_prefix(&self, prefix: &[usize], pool: &[usize], primes: usize) -> ScanResult {
        let mut result = ScanResult::default();
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut zeros: BTreeSet<usize> = BTreeSet::new();
        let mut keyed: Vec<(u64, usize)> = Vec::with_capacity(pool.len());
        for t in 0..primes.max(1) {
            let view = self.view(t);
            let field = view.field;
            let mut ech = Echelon::new(field);
            ech.insert(&view.target);
            for &i in prefix {
                ech.insert(&view.vectors[i]);
            }
            keyed.clear();
            for &j in pool {
                let mut w = view.vectors[j].clone();
                ech.reduce(&mut w);
                if field.normalize(&mut w) {
                    keyed.push((hash_vec(&w), j));
                } else {
                    zeros.insert(j);
                }
            }
            keyed.sort_unstable();
            let mut start = 0;
            while start < keyed.len() {
                let mut end = start + 1;
                while end < keyed.len() && keyed[end].0 == keyed[start].0 {
                    end += 1;
                }
                for a in start..end {
                    for b in a + 1..end {
                        let (x, y) = (keyed[a].1, keyed[b].1);
                        pairs.insert((x.min(y), x.max(y)));
                    }
                }
                start = end;
            }
        }
        // A vanishing image means the quotient completes the prefix on its
        // own, lies in the span of the prefix, or vanished only modulo p.
        let mut spurious = Vec::new();
        for &j in &zeros {
            result.exact_checks += 1;
            let mut idx = prefix.to_vec();
            idx.push(j);
            if let Some(sol) = self.solve(&idx) {
                result.solutions.push(sol);
                continue;
            }
            if self.vector_in_span(&self.vectors[j], prefix) {
                continue;
            }
            spurious.push(j);
        }
        for (a, &x) in spurious.iter().enumerate() {
            for &y in &spurious[a + 1..] {
                pairs.insert((x.min(y), x.max(y)));
            }
        }
        for (j, k) in pairs {
            if zeros.contains(&j) && !spurious.contains(&j) || zeros.contains(&k) && !spurious.contains(&k) {
                continue;
            }
            result.exact_checks += 1;
            let mut idx = prefix.to_vec();
            idx.push(j);
            idx.push(k);
            if let Some(sol) = self.solve(&idx) {
                result.solutions.push(sol);
            }
        }
        result.solutions.sort_by(|a, b| a.indices.cmp(&b.indices));
        result.solutions.dedup_by(|a, b| a.indices == b.indices);
        result
    }

    /// Some representation of the target, or a proof that none exists.
    ///
    /// A prime-field basis of all quotients is solved exactly; when the
    /// target is outside its rational span, a kernel vector orthogonal to the
    /// basis but not to the target is checked against every quotient, and any
    /// quotient it does not annihilate joins the basis.
    pub fn find_any(&self) -> (Option<Solution>, u64) {
        let view = self.view(0);
        let mut ech = Echelon::new(view.field);
        let mut basis: Vec<usize> = Vec::new();
        for (i, v) in view.vectors.iter().enumerate() {
            if ech.insert(v) {
                basis.push(i);
            }
        }
        let mut checks = 0;
        loop {
            checks += 1;
            if let Some(sol) = self.solve(&basis) {
                return (Some(sol), checks);
            }
            let Some(witness) = self.separating_functional(&basis) else {
                return (None, checks);
            };
            let dot = |v: &[BigInt]| -> BigInt { v.iter().zip(&witness).map(|(a, b)| a * b).sum() };
            let extra: Vec<usize> = (0..self.len())
                .filter(|i| !basis.contains(i) && !dot(&self.vectors[*i]).is_zero())
                .collect();
            if extra.is_empty() {
                return (None, checks);
            }
            // one at a time keeps the basis independent
            basis.push(extra[0]);
        }
    }

    /// Integer vector `w` with `w . v = 0` for basis vectors and
    /// `w . target != 0`.
    fn separating_functional(&self, basis: &[usize]) -> Option<Vec<BigInt>> {
        let len = self.target.len();
        let rows: Vec<Vec<BigInt>> = if basis.is_empty() {
            vec![vec![BigInt::zero(); len]]
        } else {
            basis.iter().map(|&i| self.vectors[i].clone()).collect()
        };
        let m = CoeffMatrix::from_integer_rows(&rows).ok()?;
        m.kernel_basis().into_iter().find_map(|w| {
            let w = primitive_integer_vector(&w);
            let d: BigInt = w.iter().zip(&self.target).map(|(a, b)| a * b).sum();
            (!d.is_zero()).then_some(w)
        })
    }
}
