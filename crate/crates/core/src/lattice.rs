//! Full-rank integer lattices in Z^n, kept as upper-triangular Hermite bases.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub(crate) type IVec = Vec<BigInt>;

/// Extended gcd row operation: replaces `(a, b)` by `(g-row, 0-row)` at
/// column `c` through a unimodular 2x2 transform.
fn gcd_combine(a: &mut IVec, b: &mut IVec, c: usize) {
    let x = a[c].clone();
    let y = b[c].clone();
    let egcd = x.extended_gcd(&y);
    let (g, s, t) = (egcd.gcd, egcd.x, egcd.y);
    let xg = &x / &g;
    let yg = &y / &g;
    let new_a: IVec = a.iter().zip(b.iter()).map(|(p, q)| &s * p + &t * q).collect();
    let new_b: IVec = a.iter().zip(b.iter()).map(|(p, q)| &yg * p - &xg * q).collect();
    *a = new_a;
    *b = new_b;
}

fn reduce_mod(v: &mut IVec, modulus: Option<&BigInt>) {
    if let Some(m) = modulus {
        for x in v.iter_mut() {
            *x = x.mod_floor(m);
        }
    }
}

/// Upper-triangular Hermite basis of the lattice spanned by `gens` in
/// dimension `dim`. Row `c` has zeros before column `c`, a positive pivot at
/// `c`, and entries right of the pivot reduced modulo the later pivots.
///
/// When `modulus` is given, the lattice must contain `modulus * Z^dim`; entries
/// are then kept reduced modulo it.
///
/// Panics if the generators do not span a full-rank lattice.
pub(crate) fn hermite_basis(gens: Vec<IVec>, dim: usize, modulus: Option<&BigInt>) -> Vec<IVec> {
    let mut pool: Vec<IVec> = gens
        .into_iter()
        .map(|mut v| {
            reduce_mod(&mut v, modulus);
            v
        })
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect();
    let mut basis: Vec<IVec> = Vec::with_capacity(dim);
    for c in 0..dim {
        if let Some(m) = modulus {
            let mut e = vec![BigInt::zero(); dim];
            e[c] = m.clone();
            pool.push(e);
        }
        let mut pivot: Option<IVec> = None;
        let mut rest: Vec<IVec> = Vec::with_capacity(pool.len());
        for mut v in pool.drain(..) {
            if v[c].is_zero() {
                rest.push(v);
                continue;
            }
            match pivot.as_mut() {
                None => pivot = Some(v),
                Some(p) => {
                    gcd_combine(p, &mut v, c);
                    // keep the pivot itself: it may equal the modulus
                    let pc = p[c].clone();
                    reduce_mod(p, modulus);
                    p[c] = pc;
                    reduce_mod(&mut v, modulus);
                    if v.iter().any(|x| !x.is_zero()) {
                        rest.push(v);
                    }
                }
            }
        }
        let mut p = pivot.expect("generators do not span a full-rank lattice");
        if p[c].is_negative() {
            p.iter_mut().for_each(|x| *x = -x.clone());
        }
        basis.push(p);
        pool = rest;
    }
    // Reduce entries right of each pivot by the later rows.
    for c in 0..dim {
        for i in 0..c {
            let q = basis[i][c].div_floor(&basis[c][c]);
            if !q.is_zero() {
                let row_c = basis[c].clone();
                for (x, y) in basis[i].iter_mut().zip(&row_c) {
                    *x -= &q * y;
                }
            }
        }
    }
    basis
}

/// Sublattice `{ v in L : weights . v == 0 (mod modulus) }` of the lattice with
/// basis `basis`, returned as a (non-reduced) basis.
pub(crate) fn intersect_congruence(basis: Vec<IVec>, weights: &[BigInt], modulus: &BigInt) -> Vec<IVec> {
    let value = |v: &IVec| -> BigInt {
        v.iter()
            .zip(weights)
            .map(|(a, w)| a * w)
            .sum::<BigInt>()
            .mod_floor(modulus)
    };
    let mut pairs: Vec<(IVec, BigInt)> = basis
        .into_iter()
        .map(|v| {
            let t = value(&v);
            (v, t)
        })
        .collect();
    // Rotate so that a single basis vector carries gcd of all values.
    let mut pivot: Option<usize> = None;
    for i in 0..pairs.len() {
        if pairs[i].1.is_zero() {
            continue;
        }
        match pivot {
            None => pivot = Some(i),
            Some(p) => {
                let (a, ta) = pairs[p].clone();
                let (b, tb) = pairs[i].clone();
                let egcd = ta.extended_gcd(&tb);
                let (g, s, t) = (egcd.gcd, egcd.x, egcd.y);
                let new_a: IVec = a.iter().zip(&b).map(|(x, y)| &s * x + &t * y).collect();
                let new_b: IVec = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (&tb / &g) * x - (&ta / &g) * y)
                    .collect();
                pairs[p] = (new_a, g);
                pairs[i] = (new_b, BigInt::zero());
            }
        }
    }
    pairs
        .into_iter()
        .enumerate()
        .map(|(i, (v, t))| {
            if Some(i) == pivot {
                let g = t.gcd(modulus);
                let k = modulus / g;
                v.into_iter().map(|x| x * &k).collect()
            } else {
                v
            }
        })
        .collect()
}

pub(crate) fn identity_basis(dim: usize) -> Vec<IVec> {
    (0..dim)
        .map(|i| {
            let mut v = vec![BigInt::zero(); dim];
            v[i] = BigInt::one();
            v
        })
        .collect()
}

/// Index of the lattice in Z^dim, from a triangular basis.
pub(crate) fn triangular_index(basis: &[IVec]) -> BigInt {
    basis
        .iter()
        .enumerate()
        .map(|(i, row)| row[i].abs())
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(xs: &[i64]) -> IVec {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn member(basis: &[IVec], v: &IVec) -> bool {
        // back-substitution through the triangular basis
        let mut rest = v.clone();
        for (c, row) in basis.iter().enumerate() {
            let (q, r) = rest[c].div_rem(&row[c]);
            if !r.is_zero() {
                return false;
            }
            for (x, y) in rest.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
        rest.iter().all(Zero::is_zero)
    }

    #[test]
    fn hermite_of_simple_lattice() {
        let b = hermite_basis(vec![iv(&[2, 1]), iv(&[0, 3])], 2, None);
        assert_eq!(b, vec![iv(&[2, 1]), iv(&[0, 3])]);
        let b = hermite_basis(vec![iv(&[4, 6]), iv(&[6, 4]), iv(&[1, 1])], 2, None);
        assert_eq!(b, vec![iv(&[1, 1]), iv(&[0, 2])]);
    }

    #[test]
    fn congruence_sublattice_by_enumeration() {
        // { v in Z^3 : v0 + 2 v1 + 5 v2 == 0 mod 6 } has index 6
        let w = iv(&[1, 2, 5]);
        let m = BigInt::from(6);
        let basis = intersect_congruence(identity_basis(3), &w, &m);
        let h = hermite_basis(basis, 3, Some(&m));
        assert_eq!(triangular_index(&h), BigInt::from(6));
        for a in -6i64..6 {
            for b in -6i64..6 {
                for c in -6i64..6 {
                    let v = iv(&[a, b, c]);
                    let expected = (a + 2 * b + 5 * c).rem_euclid(6) == 0;
                    assert_eq!(member(&h, &v), expected, "{a} {b} {c}");
                }
            }
        }
    }

    #[test]
    fn modular_and_plain_hermite_agree() {
        let gens = vec![iv(&[24, 0, 0]), iv(&[0, 24, 0]), iv(&[0, 0, 24]), iv(&[1, 5, 7]), iv(&[0, 2, 10])];
        let a = hermite_basis(gens.clone(), 3, None);
        let b = hermite_basis(gens, 3, Some(&BigInt::from(24)));
        assert_eq!(a, b);
    }
}
