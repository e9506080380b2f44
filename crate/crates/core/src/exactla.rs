//! Dense linear algebra over the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Row-major rational matrix. For q-expansion work, row `i` holds the
/// coefficients of `q^0..q^B` of the `i`-th form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: CoeffMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl CoeffMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigRational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(CoeffMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CoeffMatrix {
            rows,
            cols,
            entries: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CoeffMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    /// All rows must share one length; an empty list gives a 0x0 matrix.
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(CoeffMatrix {
            rows: n,
            cols,
            entries,
        })
    }

    pub fn from_integer_rows(rows: &[Vec<BigInt>]) -> Result<Self> {
        CoeffMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().cloned().map(BigRational::from_integer).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> CoeffMatrix {
        let mut t = CoeffMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &CoeffMatrix) -> Result<CoeffMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = CoeffMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row echelon form. Pivots are taken column by column, using the
    /// first row with a nonzero entry.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            let pivot_row: Vec<BigRational> = m.row(r)[c..].to_vec();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for (off, pv) in pivot_row.iter().enumerate() {
                    if !pv.is_zero() {
                        let v = m.get(i, c + off) - &factor * pv;
                        m.set(i, c + off, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref {
            matrix: m,
            rank: pivots.len(),
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of `{ x : self * x = 0 }`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<BigRational>> {
        let red = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !red.pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut x = vec![BigRational::zero(); self.cols];
                x[fc] = BigRational::one();
                for (row, &pc) in red.pivots.iter().enumerate() {
                    x[pc] = -red.matrix.get(row, fc).clone();
                }
                x
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<CoeffMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = CoeffMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, BigRational::one());
        }
        let red = aug.rref();
        if red.pivots.iter().take(n).copied().ne(0..n) || red.rank < n {
            return None;
        }
        let mut inv = CoeffMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, red.matrix.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> Option<BigRational> {
        if self.rows != self.cols {
            return None;
        }
        let mut m = self.clone();
        let n = self.rows;
        let mut det = BigRational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Some(BigRational::zero());
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let pivot = m.get(c, c).clone();
            det *= &pivot;
            for i in c + 1..n {
                let factor = m.get(i, c) / &pivot;
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(i, j) - &factor * m.get(c, j);
                    m.set(i, j, v);
                }
            }
        }
        Some(det)
    }
}

impl fmt::Display for CoeffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Coefficients `a` with `sum_i a_i * basis[i] == target`, or `None` if the
/// target is outside the span. With a dependent basis, earlier vectors are
/// preferred as pivots and the remaining coefficients are zero.
pub fn solve_in_span(
    basis: &[Vec<BigRational>],
    target: &[BigRational],
) -> Result<Option<Vec<BigRational>>> {
    let len = target.len();
    if let Some(bad) = basis.iter().find(|b| b.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: len,
            found: bad.len(),
        });
    }
    let m = basis.len();
    let mut aug = CoeffMatrix::zeros(len, m + 1);
    for (j, b) in basis.iter().enumerate() {
        for (i, x) in b.iter().enumerate() {
            aug.set(i, j, x.clone());
        }
    }
    for (i, x) in target.iter().enumerate() {
        aug.set(i, m, x.clone());
    }
    let red = aug.rref();
    if red.pivots.last() == Some(&m) {
        return Ok(None);
    }
    let mut coeffs = vec![BigRational::zero(); m];
    for (row, &col) in red.pivots.iter().enumerate() {
        coeffs[col] = red.matrix.get(row, m).clone();
    }
    Ok(Some(coeffs))
}

/// Integer version of [`solve_in_span`].
pub fn solve_in_span_integer(
    basis: &[Vec<BigInt>],
    target: &[BigInt],
) -> Result<Option<Vec<BigRational>>> {
    let to_rat = |v: &Vec<BigInt>| -> Vec<BigRational> {
        v.iter().cloned().map(BigRational::from_integer).collect()
    };
    let basis: Vec<Vec<BigRational>> = basis.iter().map(to_rat).collect();
    solve_in_span(&basis, &to_rat(&target.to_vec()))
}

/// `sum_i coeffs[i] * vectors[i]`.
pub fn combine(coeffs: &[BigRational], vectors: &[Vec<BigRational>]) -> Vec<BigRational> {
    let len = vectors.first().map_or(0, Vec::len);
    let mut out = vec![BigRational::zero(); len];
    for (c, v) in coeffs.iter().zip(vectors) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

/// Scale a rational vector to a primitive integer vector with positive
/// leading nonzero entry.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let den = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let sign = ints.iter().find(|x| !x.is_zero()).map_or(false, |x| x.is_negative());
    ints.into_iter()
        .map(|x| if sign { -(x / &g) } else { x / &g })
        .collect()
}
