//! Small integer helpers shared by the level-dependent modules.

use num_integer::Integer;

/// Prime factorisation as `(prime, exponent)` pairs in increasing prime order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Positive divisors of `n` in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factorize(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Sum of divisors.
pub fn sigma(n: u64) -> u64 {
    factorize(n).into_iter().fold(1, |acc, (p, e)| {
        let mut s = 1;
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            s += pk;
        }
        acc * s
    })
}

/// Binomial coefficient, saturating at `u128::MAX` on overflow.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc = C(n, i), and C(n, i) * (n - i) is divisible by i + 1.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisors_are_sorted() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(42), vec![1, 2, 3, 6, 7, 14, 21, 42]);
        assert_eq!(divisors(72).len(), 12);
    }

    #[test]
    fn phi_and_sigma() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(36), 12);
        assert_eq!(sigma(12), 28);
        assert_eq!(sigma(1), 1);
    }

    #[test]
    fn binomial_small_and_saturating() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(22655, 2), 256_613_185);
        assert_eq!(binomial(10, 11), 0);
        for n in 0..40u64 {
            let mut row = 1u128;
            for k in 0..=n {
                assert_eq!(binomial(n, k), row);
                row = row * (n - k) as u128 / (k + 1) as u128;
            }
        }
        assert_eq!(binomial(10_000, 5_000), u128::MAX);
    }
}
