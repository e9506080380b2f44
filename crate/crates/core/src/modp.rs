//! Arithmetic and row reduction over prime fields with 61-bit moduli.
//!
//! Used to filter candidate subsets quickly; every positive answer is
//! re-checked over the rationals, and negative answers rely on the number of
//! primes being large enough for the integer relations involved.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// The largest primes below 2^61, in decreasing order.
pub const PRIMES: [u64; 8] = [
    2305843009213693951,
    2305843009213693921,
    2305843009213693907,
    2305843009213693723,
    2305843009213693693,
    2305843009213693669,
    2305843009213693613,
    2305843009213693561,
];

/// Bits of product of the first `t` primes is at least `60 * t`.
pub const BITS_PER_PRIME: u64 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Field {
    p: u64,
}

impl Field {
    pub fn new(p: u64) -> Self {
        assert!(p > 2 && p < (1 << 62));
        Field { p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Panics on zero.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "zero has no inverse");
        self.pow(a, self.p - 2)
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        match x.to_i64() {
            Some(v) => self.from_i64(v),
            None => x.mod_floor(&BigInt::from(self.p)).to_u64().expect("reduced"),
        }
    }

    /// `None` when the denominator vanishes modulo p.
    pub fn from_rational(&self, x: &BigRational) -> Option<u64> {
        let d = self.from_bigint(x.denom());
        if d == 0 {
            return None;
        }
        Some(self.mul(self.from_bigint(x.numer()), self.inv(d)))
    }

    pub fn reduce_vec(&self, v: &[BigInt]) -> Vec<u64> {
        v.iter().map(|x| self.from_bigint(x)).collect()
    }

    /// `v += c * w`
    #[inline]
    pub fn axpy(&self, v: &mut [u64], c: u64, w: &[u64]) {
        if c == 0 {
            return;
        }
        for (x, y) in v.iter_mut().zip(w) {
            *x = self.add(*x, self.mul(c, *y));
        }
    }

    /// Scales `v` so its first nonzero entry is 1. Returns false for the zero
    /// vector.
    pub fn normalize(&self, v: &mut [u64]) -> bool {
        match v.iter().position(|&x| x != 0) {
            None => false,
            Some(i) => {
                let s = self.inv(v[i]);
                for x in v[i..].iter_mut() {
                    *x = self.mul(*x, s);
                }
                true
            }
        }
    }
}

/// Incrementally built echelon basis with unit pivots.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: Field,
    rows: Vec<(usize, Vec<u64>)>,
}

impl Echelon {
    pub fn new(field: Field) -> Self {
        Echelon {
            field,
            rows: Vec::new(),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|(p, _)| *p)
    }

    /// Reduces `v` modulo the span in place.
    pub fn reduce(&self, v: &mut [u64]) {
        let f = self.field;
        for (p, row) in &self.rows {
            let c = v[*p];
            if c != 0 {
                f.axpy(v, f.neg(c), row);
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Adds `v` if independent; returns whether it was.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        self.insert_reduced(w)
    }

    /// Adds an already reduced vector.
    pub fn insert_reduced(&mut self, mut w: Vec<u64>) -> bool {
        let f = self.field;
        let Some(p) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let s = f.inv(w[p]);
        for x in w.iter_mut() {
            *x = f.mul(*x, s);
        }
        // keep earlier rows reduced at the new pivot
        for (_, row) in self.rows.iter_mut() {
            let c = row[p];
            if c != 0 {
                f.axpy(row, f.neg(c), &w);
            }
        }
        self.rows.push((p, w));
        true
    }
}

/// Number of primes from [`PRIMES`] whose product exceeds `2^bits`.
pub fn primes_for_bits(bits: u64) -> usize {
    (bits / BITS_PER_PRIME + 1) as usize
}

/// Bit length of a Hadamard-type bound `max_norm^n` with `max_norm` the
/// largest Euclidean norm among integer vectors.
pub fn norm_power_bits(vectors: &[Vec<BigInt>], n: usize) -> u64 {
    let max_sq = vectors
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<BigInt>())
        .max()
        .unwrap_or_else(BigInt::zero);
    // norm^n <= 2^(n * ceil(bits(norm^2) / 2))
    (max_sq.bits() + 1) / 2 * n as u64
}
