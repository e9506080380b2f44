//! Eta quotients `eta_N[r_1, ..., r_l] = prod_i eta(d_i z)^{r_i}` over the
//! divisors `d_1 < ... < d_l` of a level `N`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, euler_phi, factorize, gcd, sigma, valuation};
use crate::error::{Error, Result};
use crate::series::QExpansion;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EtaQuotient {
    level: u64,
    exponents: Vec<i64>,
}

/// Truth values of the two congruences and the square condition under which
/// an eta quotient transforms like a modular form on Gamma0(N).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NewmanConditions {
    pub divisor_sum: bool,
    pub codivisor_sum: bool,
    pub square_product: bool,
}

impl NewmanConditions {
    pub fn all(&self) -> bool {
        self.divisor_sum && self.codivisor_sum && self.square_product
    }

    pub fn as_tuple(&self) -> (bool, bool, bool) {
        (self.divisor_sum, self.codivisor_sum, self.square_product)
    }
}

/// Orders of vanishing at the cusps of Gamma0(N), grouped by cusp denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspProfile {
    pub denominators: Vec<u64>,
    pub orders: Vec<BigRational>,
    /// Number of cusps with each denominator, `phi(gcd(d, N/d))`.
    pub multiplicities: Vec<u64>,
}

impl CuspProfile {
    /// `sum_d multiplicity_d * order_d`.
    pub fn total_order(&self) -> BigRational {
        self.orders
            .iter()
            .zip(&self.multiplicities)
            .map(|(o, &m)| o * BigRational::from_integer(m.into()))
            .sum()
    }
}

/// Index of Gamma0(N) in SL2(Z): `N * prod_{p | N} (1 + 1/p)`.
pub fn index_gamma0(level: u64) -> u64 {
    factorize(level)
        .into_iter()
        .fold(level, |acc, (p, _)| acc / p * (p + 1))
}

/// `floor(k * index / 12)`; forms in M_k(N) agreeing on `q^0..q^B` are equal.
pub fn sturm_bound(level: u64, weight: u64) -> Result<u64> {
    if level == 0 {
        return Err(Error::InvalidArgument("level must be positive".into()));
    }
    if weight < 2 || weight % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "weight {weight} must be a positive even integer"
        )));
    }
    Ok(weight * index_gamma0(level) / 12)
}

/// Number of Gamma0(N)-cusps with denominator `d`.
pub fn cusp_multiplicity(level: u64, d: u64) -> u64 {
    euler_phi(gcd(d, level / d))
}

/// Ligozat order at a cusp with denominator `d`, as a coefficient row:
/// `order(d) = sum_i row[i] * r_i`.
pub fn ligozat_row(level: u64, d: u64) -> Vec<BigRational> {
    let g = gcd(d, level / d);
    divisors(level)
        .into_iter()
        .map(|di| {
            let c = gcd(d, di);
            BigRational::new(
                BigInt::from(level) * BigInt::from(c * c),
                BigInt::from(24u64) * BigInt::from(g) * BigInt::from(d) * BigInt::from(di),
            )
        })
        .collect()
}

impl EtaQuotient {
    pub fn new(level: u64, exponents: Vec<i64>) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidArgument("level must be positive".into()));
        }
        let l = divisors(level).len();
        if exponents.len() != l {
            return Err(Error::DimensionMismatch {
                expected: l,
                found: exponents.len(),
            });
        }
        Ok(EtaQuotient { level, exponents })
    }

    /// The constant function 1 at this level.
    pub fn one(level: u64) -> Self {
        EtaQuotient {
            level,
            exponents: vec![0; divisors(level).len()],
        }
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn divisors(&self) -> Vec<u64> {
        divisors(self.level)
    }

    pub fn weight(&self) -> BigRational {
        BigRational::new(self.exponents.iter().sum::<i64>().into(), 2.into())
    }

    /// Integral weight, if the exponent sum is even.
    pub fn integral_weight(&self) -> Option<i64> {
        let s: i64 = self.exponents.iter().sum();
        (s % 2 == 0).then_some(s / 2)
    }

    pub fn newman_conditions(&self) -> NewmanConditions {
        let divs = self.divisors();
        let n = self.level as i128;
        let mut s1: i128 = 0;
        let mut s2: i128 = 0;
        for (&d, &r) in divs.iter().zip(&self.exponents) {
            s1 += d as i128 * r as i128;
            s2 += (n / d as i128) * r as i128;
        }
        let square_product = factorize(self.level).into_iter().all(|(p, _)| {
            let v: i64 = divs
                .iter()
                .zip(&self.exponents)
                .map(|(&d, &r)| r * valuation(d, p) as i64)
                .sum();
            v % 2 == 0
        });
        NewmanConditions {
            divisor_sum: s1.rem_euclid(24) == 0,
            codivisor_sum: s2.rem_euclid(24) == 0,
            square_product,
        }
    }

    /// Order of vanishing at the cusps `c/d` (all such cusps share it).
    pub fn cusp_order(&self, d: u64) -> Result<BigRational> {
        if d == 0 || self.level % d != 0 {
            return Err(Error::NotADivisor {
                divisor: d,
                level: self.level,
            });
        }
        Ok(ligozat_row(self.level, d)
            .iter()
            .zip(&self.exponents)
            .map(|(c, &r)| c * BigRational::from_integer(r.into()))
            .sum())
    }

    pub fn cusp_profile(&self) -> CuspProfile {
        let denominators = self.divisors();
        let orders = denominators
            .iter()
            .map(|&d| self.cusp_order(d).expect("divisor of level"))
            .collect();
        let multiplicities = denominators
            .iter()
            .map(|&d| cusp_multiplicity(self.level, d))
            .collect();
        CuspProfile {
            denominators,
            orders,
            multiplicities,
        }
    }

    pub fn is_holomorphic(&self) -> bool {
        self.newman_conditions().all()
            && self
                .divisors()
                .into_iter()
                .all(|d| !self.cusp_order(d).expect("divisor").is_negative())
    }

    /// Leading exponent `(sum d_i r_i) / 24`.
    pub fn offset(&self) -> BigRational {
        let s: i64 = self
            .divisors()
            .iter()
            .zip(&self.exponents)
            .map(|(&d, &r)| d as i64 * r)
            .sum();
        BigRational::new(s.into(), 24.into())
    }

    /// View this quotient at level `N * m`, with zero exponents on the new
    /// divisors.
    pub fn at_level(&self, new_level: u64) -> Result<EtaQuotient> {
        if new_level == 0 || new_level % self.level != 0 {
            return Err(Error::InvalidArgument(format!(
                "{new_level} is not a multiple of {}",
                self.level
            )));
        }
        let old = self.divisors();
        let exponents = divisors(new_level)
            .into_iter()
            .map(|d| match old.binary_search(&d) {
                Ok(i) => self.exponents[i],
                Err(_) => 0,
            })
            .collect();
        Ok(EtaQuotient {
            level: new_level,
            exponents,
        })
    }

    /// q-expansion assembled factor by factor from the Euler product.
    pub fn q_expansion(&self, prec: usize) -> Result<QExpansion> {
        if prec == 0 {
            return Err(Error::InvalidArgument("precision must be at least 1".into()));
        }
        let mut acc = QExpansion::one(prec);
        for (d, &r) in self.divisors().into_iter().zip(&self.exponents) {
            if r == 0 {
                continue;
            }
            let base_prec = prec.div_ceil(d as usize);
            let factor = QExpansion::euler_series(base_prec)?
                .rescale_variable(d, prec)?
                .int_pow(r, prec)?;
            acc = acc.mul(&factor, prec);
        }
        acc.with_offset(self.offset())
    }

    /// Integer coefficients of `prod_i prod_n (1 - q^{d_i n})^{r_i}` (the
    /// expansion without the `q^offset` factor), via the logarithmic
    /// derivative recurrence `n c_n = sum_{k=1}^n g_k c_{n-k}`.
    pub fn product_coefficients(&self, prec: usize) -> Vec<BigInt> {
        let divs = self.divisors();
        let g: Vec<i128> = (0..prec as u64)
            .map(|n| {
                if n == 0 {
                    return 0;
                }
                divs.iter()
                    .zip(&self.exponents)
                    .filter(|(&d, &r)| r != 0 && n % d == 0)
                    .map(|(&d, &r)| -(r as i128) * d as i128 * sigma(n / d) as i128)
                    .sum()
            })
            .collect();
        match small_recurrence(&g, prec) {
            Some(c) => c.into_iter().map(BigInt::from).collect(),
            None => big_recurrence(&g, prec),
        }
    }

    /// Coefficients of `q^0 .. q^{len-1}` of the full expansion. Requires an
    /// integral nonnegative offset.
    pub fn coefficient_vector(&self, len: usize) -> Result<Vec<BigInt>> {
        let offset = self.offset();
        if !offset.is_integer() || offset.is_negative() {
            return Err(Error::InvalidArgument(format!(
                "{self} has offset {offset}, not a nonnegative integer"
            )));
        }
        let off = offset.to_integer().to_usize().unwrap_or(usize::MAX);
        let mut out = vec![BigInt::zero(); len];
        if off < len {
            for (i, c) in self.product_coefficients(len - off).into_iter().enumerate() {
                out[off + i] = c;
            }
        }
        Ok(out)
    }
}

fn small_recurrence(g: &[i128], prec: usize) -> Option<Vec<i128>> {
    let mut c: Vec<i128> = Vec::with_capacity(prec);
    for n in 0..prec {
        if n == 0 {
            c.push(1);
            continue;
        }
        let mut acc: i128 = 0;
        for k in 1..=n {
            if g[k] != 0 {
                acc = acc.checked_add(g[k].checked_mul(c[n - k])?)?;
            }
        }
        debug_assert_eq!(acc % n as i128, 0);
        c.push(acc / n as i128);
    }
    Some(c)
}

fn big_recurrence(g: &[i128], prec: usize) -> Vec<BigInt> {
    let mut c: Vec<BigInt> = Vec::with_capacity(prec);
    for n in 0..prec {
        if n == 0 {
            c.push(BigInt::from(1));
            continue;
        }
        let mut acc = BigInt::zero();
        for k in 1..=n {
            if g[k] != 0 {
                acc += &c[n - k] * g[k];
            }
        }
        c.push(acc / n);
    }
    c
}

impl fmt::Display for EtaQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "eta_{}[", self.level)?;
        for (i, r) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for EtaQuotient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed eta quotient `{s}`"));
        let rest = s.trim().strip_prefix("eta_").ok_or_else(bad)?;
        let open = rest.find('[').ok_or_else(bad)?;
        let level: u64 = rest[..open].trim().parse().map_err(|_| bad())?;
        let body = rest[open + 1..]
            .trim_end()
            .strip_suffix(']')
            .ok_or_else(bad)?;
        let exponents = if body.trim().is_empty() {
            Vec::new()
        } else {
            body.split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        EtaQuotient::new(level, exponents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(level: u64, e: &[i64]) -> EtaQuotient {
        EtaQuotient::new(level, e.to_vec()).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn small(v: &[BigRational]) -> Vec<i64> {
        v.iter().map(|c| c.to_integer().to_i64().unwrap()).collect()
    }

    #[test]
    fn weights() {
        assert_eq!(q(11, &[2, 2]).weight(), r(2, 1));
        assert_eq!(EtaQuotient::one(30).weight(), r(0, 1));
        assert_eq!(q(52, &[-4, 10, -4, -4, 10, -4]).weight(), r(2, 1));
    }

    #[test]
    fn newman_examples() {
        assert_eq!(q(11, &[2, 2]).newman_conditions().as_tuple(), (true, true, true));
        assert!(!q(11, &[4, 0]).newman_conditions().divisor_sum);
        assert!(!q(6, &[0, 1, 1, 0]).newman_conditions().square_product);
    }

    #[test]
    fn cusp_order_examples() {
        let f = q(11, &[2, 2]);
        assert_eq!(f.cusp_order(11).unwrap(), r(1, 1));
        assert_eq!(f.cusp_order(1).unwrap(), r(1, 1));
        assert!(EtaQuotient::one(12).cusp_order(4).unwrap().is_zero());
        assert!(matches!(f.cusp_order(3), Err(Error::NotADivisor { .. })));
    }

    #[test]
    fn holomorphy_examples() {
        assert!(q(11, &[2, 2]).is_holomorphic());
        assert!(EtaQuotient::one(20).is_holomorphic());
        // eta(z)^2 eta(4z)^2 eta(16z)^2 / (eta(2z) eta(8z)^3), divisors 1,2,4,8,16,32
        let weak = q(32, &[2, -1, 2, -3, 2, 0]);
        assert!(!weak.is_holomorphic());
        let negative: Vec<u64> = weak
            .divisors()
            .into_iter()
            .filter(|&d| weak.cusp_order(d).unwrap().is_negative())
            .collect();
        assert!(!negative.is_empty());
    }

    #[test]
    fn index_and_sturm() {
        assert_eq!(index_gamma0(1), 1);
        assert_eq!(index_gamma0(11), 12);
        assert_eq!(index_gamma0(42), 96);
        assert_eq!(sturm_bound(11, 2).unwrap(), 2);
        assert_eq!(sturm_bound(35, 2).unwrap(), 8);
        assert_eq!(sturm_bound(1, 12).unwrap(), 1);
        assert!(sturm_bound(11, 3).is_err());
        assert!(sturm_bound(11, 0).is_err());
    }

    /// Index by counting cosets: the projective line P^1(Z/NZ) has N prod(1+1/p) points.
    #[test]
    fn index_matches_projective_line_count() {
        for n in 1u64..60 {
            let mut count = 0;
            for c in 0..n {
                for d in 0..n {
                    if gcd(gcd(c, d), n) == 1 {
                        count += 1;
                    }
                }
            }
            // pairs (c, d) up to units of Z/NZ
            assert_eq!(count / euler_phi(n), index_gamma0(n), "N={n}");
        }
    }

    #[test]
    fn q_expansion_examples() {
        let f = q(11, &[2, 2]).q_expansion(6).unwrap();
        assert_eq!(f.integral_offset(), Some(1));
        assert_eq!(small(f.coeffs()), vec![1, -2, -1, 2, 1, 2]);

        let delta = q(1, &[24]).q_expansion(3).unwrap();
        assert_eq!(delta.integral_offset(), Some(1));
        assert_eq!(small(delta.coeffs()), vec![1, -24, 252]);

        let one = EtaQuotient::one(6).q_expansion(4).unwrap();
        assert_eq!(one.integral_offset(), Some(0));
        assert_eq!(small(one.coeffs()), vec![1, 0, 0, 0]);
    }

    #[test]
    fn recurrence_matches_series_assembly() {
        let cases = [
            q(11, &[2, 2]),
            q(52, &[-4, 10, -4, -4, 10, -4]),
            q(42, &[-1, 2, 2, -1, -1, 2, 2, -1]),
            q(1, &[24]),
            q(32, &[2, -1, 2, -3, 2, 0]),
        ];
        for f in cases {
            let prec = 40;
            let slow = f.q_expansion(prec).unwrap();
            let fast = f.product_coefficients(prec);
            let fast: Vec<BigRational> = fast.into_iter().map(BigRational::from_integer).collect();
            assert_eq!(slow.coeffs(), &fast[..], "{f}");
        }
    }

    #[test]
    fn products_add_exponents() {
        let a = q(42, &[-1, 2, 2, -1, -1, 2, 2, -1]);
        let b = q(42, &[2, -1, -1, 2, 2, -1, -1, 2]);
        let sum: Vec<i64> = a.exponents().iter().zip(b.exponents()).map(|(x, y)| x + y).collect();
        let ab = q(42, &sum);
        let prod = a.q_expansion(20).unwrap().mul(&b.q_expansion(20).unwrap(), 20);
        assert_eq!(prod, ab.q_expansion(20).unwrap());
    }

    #[test]
    fn raising_level_keeps_expansion_and_conditions() {
        let f = q(11, &[2, 2]);
        let g = f.at_level(44).unwrap();
        assert_eq!(g.exponents(), &[2, 0, 0, 2, 0, 0]);
        assert_eq!(f.q_expansion(30).unwrap(), g.q_expansion(30).unwrap());
        assert_eq!(f.newman_conditions(), g.newman_conditions());
        assert!(g.is_holomorphic());
        assert!(f.at_level(12).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f: EtaQuotient = "eta_42[-1,2,2,-1,-1,2,2,-1]".parse().unwrap();
        assert_eq!(f.to_string(), "eta_42[-1,2,2,-1,-1,2,2,-1]");
        let g: EtaQuotient = "eta_42[ -1, 2, 2, -1, -1, 2, 2, -1 ]".parse().unwrap();
        assert_eq!(f, g);
        assert!("eta_42[1,2]".parse::<EtaQuotient>().is_err());
        assert!("eta42[1,2]".parse::<EtaQuotient>().is_err());
        assert!("eta_11[2,x]".parse::<EtaQuotient>().is_err());
    }

    #[test]
    fn coefficient_vector_shifts_by_offset() {
        let f = q(11, &[2, 2]);
        let v = f.coefficient_vector(4).unwrap();
        assert_eq!(v, vec![0.into(), 1.into(), (-2).into(), (-1).into()]);
        assert!(q(11, &[1, 1]).coefficient_vector(3).is_err());
    }
}
