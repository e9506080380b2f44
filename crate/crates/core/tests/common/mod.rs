//! Brute-force cross-check of the lattice enumerator: a box search over
//! exponent vectors with interval pruning on the cusp orders.
#![allow(dead_code)]

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

pub fn divisors(n: i64) -> Vec<i64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Cusp orders scaled by 24 * N so they are integers:
/// row c, column i is N^2 gcd(c, d_i)^2 / (gcd(c, N/c) c d_i).
pub fn scaled_orders(n: i64) -> Vec<Vec<i64>> {
    let ds = divisors(n);
    ds.iter()
        .map(|&c| {
            ds.iter()
                .map(|&d| {
                    let g = gcd(c, d);
                    let num = n * n * g * g;
                    let den = gcd(c, n / c) * c * d;
                    assert_eq!(num % den, 0);
                    num / den
                })
                .collect()
        })
        .collect()
}

fn newman(n: i64, r: &[i64]) -> bool {
    let ds = divisors(n);
    let s1: i64 = ds.iter().zip(r).map(|(d, x)| d * x).sum();
    let s2: i64 = ds.iter().zip(r).map(|(d, x)| (n / d) * x).sum();
    if s1 % 24 != 0 || s2 % 24 != 0 {
        return false;
    }
    let mut m = n;
    let mut p = 2;
    while m > 1 {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            let mut par = 0;
            for (d, x) in ds.iter().zip(r) {
                let mut d = *d;
                while d % p == 0 {
                    d /= p;
                    par += x;
                }
            }
            if par % 2 != 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

pub fn phi(n: i64) -> i64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as i64
}

pub fn index(n: i64) -> i64 {
    // |P^1(Z/nZ)| counted directly
    (0..n)
        .flat_map(|c| (0..n).map(move |d| (c, d)))
        .filter(|&(c, d)| gcd(gcd(c, d), n) == 1)
        .count() as i64
        / phi(n)
}

struct Search {
    n: i64,
    b: Vec<Vec<i64>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    upper: Vec<i64>,
    /// For each row and start index, the remaining columns sorted by
    /// decreasing coefficient.
    sorted: Vec<Vec<Vec<usize>>>,
    out: Vec<Vec<i64>>,
}

impl Search {
    /// Extremes of row `c` over the box of columns `i..` with the coordinate
    /// sum fixed to `left` (greedy fill, exact for this LP).
    fn row_range(&self, c: usize, i: usize, left: i64) -> Option<(i64, i64)> {
        let idx = &self.sorted[c][i];
        let base: i64 = idx.iter().map(|&j| self.lo[j]).sum();
        let mut extra = left - base;
        let cap: i64 = idx.iter().map(|&j| self.hi[j] - self.lo[j]).sum();
        if extra < 0 || extra > cap {
            return None;
        }
        let floor: i64 = idx.iter().map(|&j| self.b[c][j] * self.lo[j]).sum();
        let (mut max, mut min) = (floor, floor);
        let mut e2 = extra;
        for &j in idx {
            let t = extra.min(self.hi[j] - self.lo[j]);
            max += t * self.b[c][j];
            extra -= t;
        }
        for &j in idx.iter().rev() {
            let t = e2.min(self.hi[j] - self.lo[j]);
            min += t * self.b[c][j];
            e2 -= t;
        }
        Some((min, max))
    }

    fn rec(&mut self, i: usize, left: i64, r: &mut Vec<i64>, partial: &mut Vec<i64>) {
        let l = r.len();
        if i + 1 == l {
            if left < self.lo[i] || left > self.hi[i] {
                return;
            }
            r[i] = left;
            if (0..l).all(|c| partial[c] + self.b[c][i] * left >= 0) && newman(self.n, r) {
                self.out.push(r.clone());
            }
            return;
        }
        for x in self.lo[i]..=self.hi[i] {
            r[i] = x;
            for c in 0..l {
                partial[c] += self.b[c][i] * x;
            }
            let ok = (0..l).all(|c| match self.row_range(c, i + 1, left - x) {
                Some((min, max)) => partial[c] + max >= 0 && partial[c] + min <= self.upper[c],
                None => false,
            });
            if ok {
                self.rec(i + 1, left - x, r, partial);
            }
            for c in 0..l {
                partial[c] -= self.b[c][i] * x;
            }
        }
    }
}

pub fn brute_force(n: i64, weight: i64, bounds: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let ds = divisors(n);
    let l = ds.len();
    let b = scaled_orders(n);
    let lo: Vec<i64> = bounds.iter().map(|x| x.0).collect();
    let hi: Vec<i64> = bounds.iter().map(|x| x.1).collect();
    // sum_c eps_c v_c = k * index / 12, and v is scaled by 24 n
    let upper: Vec<i64> = ds
        .iter()
        .map(|&c| 2 * n * weight * index(n) / phi(gcd(c, n / c)))
        .collect();
    let sorted = (0..l)
        .map(|c| {
            (0..=l)
                .map(|i| {
                    let mut idx: Vec<usize> = (i..l).collect();
                    idx.sort_by_key(|&j| -b[c][j]);
                    idx
                })
                .collect()
        })
        .collect();
    let mut s = Search { n, b, lo, hi, upper, sorted, out: Vec::new() };
    s.rec(0, 2 * weight, &mut vec![0; l], &mut vec![0; l]);
    s.out.sort();
    s.out
}
