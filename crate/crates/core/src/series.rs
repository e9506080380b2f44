//! Truncated q-expansions with exact rational coefficients.
//!
//! A [`QExpansion`] stores `q^offset * (c_0 + c_1 q + ... + c_{prec-1} q^{prec-1})`
//! where the offset lives in `(1/24)Z`, enough to hold `eta(dz)^r` for any
//! divisor `d` and integer `r`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExpansion {
    offset: BigRational,
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl QExpansion {
    pub fn new(offset: BigRational, coeffs: Vec<BigRational>) -> Result<Self> {
        let scaled = &offset * rat(24);
        if !scaled.is_integer() {
            return Err(Error::InvalidArgument(format!(
                "offset {offset} is not in (1/24)Z"
            )));
        }
        Ok(QExpansion { offset, coeffs })
    }

    pub fn from_integers(offset: BigRational, coeffs: &[i64]) -> Result<Self> {
        QExpansion::new(offset, coeffs.iter().map(|&c| rat(c)).collect())
    }

    /// The series `1 + O(q^prec)`.
    pub fn one(prec: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); prec];
        if prec > 0 {
            coeffs[0] = BigRational::one();
        }
        QExpansion {
            offset: BigRational::zero(),
            coeffs,
        }
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    /// Offset as an integer, when it is one.
    pub fn integral_offset(&self) -> Option<i64> {
        if self.offset.is_integer() {
            self.offset.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn with_offset(mut self, offset: BigRational) -> Result<Self> {
        self.offset = offset;
        QExpansion::new(self.offset, self.coeffs)
    }

    pub fn truncate(&self, prec: usize) -> Self {
        QExpansion {
            offset: self.offset.clone(),
            coeffs: self.coeffs[..prec.min(self.prec())].to_vec(),
        }
    }

    /// Coefficients of `prod_{n>=1} (1 - q^n)` to `prec` terms, from Euler's
    /// pentagonal number theorem.
    pub fn euler_series(prec: usize) -> Result<Self> {
        if prec == 0 {
            return Err(Error::InvalidArgument("precision must be at least 1".into()));
        }
        let mut coeffs = vec![BigRational::zero(); prec];
        coeffs[0] = BigRational::one();
        let mut k: i64 = 1;
        loop {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let lo = (k * (3 * k - 1) / 2) as usize;
            let hi = (k * (3 * k + 1) / 2) as usize;
            if lo >= prec {
                break;
            }
            coeffs[lo] = rat(sign);
            if hi < prec {
                coeffs[hi] = rat(sign);
            }
            k += 1;
        }
        Ok(QExpansion {
            offset: BigRational::zero(),
            coeffs,
        })
    }

    /// Product truncated to `prec` terms (never more than either factor knows).
    pub fn mul(&self, other: &QExpansion, prec: usize) -> QExpansion {
        let prec = prec.min(self.prec()).min(other.prec());
        let mut coeffs = vec![BigRational::zero(); prec];
        for (i, a) in self.coeffs.iter().take(prec).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(prec - i).enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        QExpansion {
            offset: &self.offset + &other.offset,
            coeffs,
        }
    }

    pub fn add(&self, other: &QExpansion) -> Result<QExpansion> {
        if self.offset != other.offset {
            return Err(Error::InvalidArgument(
                "cannot add series with different offsets".into(),
            ));
        }
        let prec = self.prec().min(other.prec());
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .take(prec)
            .map(|(a, b)| a + b)
            .collect();
        Ok(QExpansion {
            offset: self.offset.clone(),
            coeffs,
        })
    }

    pub fn scale(&self, c: &BigRational) -> QExpansion {
        QExpansion {
            offset: self.offset.clone(),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Multiplicative inverse of the unit part; the offset is negated.
    pub fn inverse(&self, prec: usize) -> Result<QExpansion> {
        let prec = prec.min(self.prec());
        let lead = match self.coeffs.first() {
            Some(c) if !c.is_zero() => c.clone(),
            _ => return Err(Error::NotInvertible),
        };
        let inv_lead = lead.recip();
        let mut out: Vec<BigRational> = Vec::with_capacity(prec);
        for n in 0..prec {
            if n == 0 {
                out.push(inv_lead.clone());
                continue;
            }
            let mut acc = BigRational::zero();
            for k in 1..=n {
                let a = &self.coeffs[k];
                if !a.is_zero() {
                    acc += a * &out[n - k];
                }
            }
            out.push(-(acc * &inv_lead));
        }
        Ok(QExpansion {
            offset: -&self.offset,
            coeffs: out,
        })
    }

    /// `self^e` truncated to `prec` terms; negative exponents invert first.
    pub fn int_pow(&self, e: i64, prec: usize) -> Result<QExpansion> {
        let prec = prec.min(self.prec());
        if e == 0 {
            return Ok(QExpansion::one(prec));
        }
        let base = if e < 0 {
            self.inverse(prec)?
        } else {
            self.truncate(prec)
        };
        let mut exp = e.unsigned_abs();
        let mut result = QExpansion::one(prec);
        let mut square = base;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&square, prec);
            }
            exp >>= 1;
            if exp > 0 {
                square = square.mul(&square, prec);
            }
        }
        Ok(result)
    }

    /// Substitute `q -> q^d`.
    pub fn rescale_variable(&self, d: u64, prec: usize) -> Result<QExpansion> {
        if d == 0 {
            return Err(Error::InvalidArgument("rescaling factor must be positive".into()));
        }
        let d = d as usize;
        let prec = prec.min(d.saturating_mul(self.prec()));
        let mut coeffs = vec![BigRational::zero(); prec];
        for (i, c) in self.coeffs.iter().enumerate() {
            let idx = i * d;
            if idx >= prec {
                break;
            }
            coeffs[idx] = c.clone();
        }
        Ok(QExpansion {
            offset: &self.offset * rat(d as i64),
            coeffs,
        })
    }

    /// Coefficient of `q^n` for an integral exponent `n`, if it is stored.
    pub fn coefficient_at(&self, n: i64) -> Option<BigRational> {
        let off = self.integral_offset()?;
        if n < off {
            return Some(BigRational::zero());
        }
        self.coeffs.get((n - off) as usize).cloned()
    }
}

impl fmt::Display for QExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let exp = &self.offset + rat(i as i64);
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            if exp.is_zero() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write!(f, "q^{exp}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", &self.offset + rat(self.prec() as i64))
    }
}
