//! Complete lists of holomorphic eta quotients of a given level and weight.
//!
//! Exponent vectors `r` are mapped to their cusp orders `v = A r` with the
//! (invertible) Ligozat matrix `A`. Holomorphic quotients of weight `k` are
//! exactly the points of the lattice `A * Lambda` lying in the simplex
//! `v >= 0, sum_d eps_d v_d = k * index / 12`, where `Lambda` is the lattice of
//! exponent vectors satisfying the congruence and square conditions. The
//! simplex is walked coordinate by coordinate through a triangular basis of
//! that lattice.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{divisors, factorize, valuation};
use crate::error::{Error, Result};
use crate::etaquot::{cusp_multiplicity, index_gamma0, ligozat_row, EtaQuotient};
use crate::exactla::CoeffMatrix;
use crate::lattice::{hermite_basis, identity_basis, intersect_congruence, triangular_index, IVec};

/// Default cap on lattice nodes visited.
pub const DEFAULT_CANDIDATE_CAP: u64 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationResult {
    pub level: u64,
    pub weight: u64,
    pub quotients: Vec<EtaQuotient>,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct EnumerationOptions {
    pub candidate_cap: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnumerationStats {
    pub nodes: u64,
}

/// Precomputed walk through the cusp-order lattice.
struct Plan {
    dim: usize,
    /// Divisor index of each walk coordinate.
    #[cfg_attr(not(test), allow(dead_code))]
    perm: Vec<usize>,
    /// Cusp orders are integral after multiplying by this.
    #[cfg_attr(not(test), allow(dead_code))]
    scale: BigInt,
    /// Permuted cusp multiplicities.
    eps: Vec<i64>,
    /// Triangular lattice basis in permuted order-coordinates (scaled by `scale`).
    rows: Vec<Vec<i64>>,
    /// Exponent vector corresponding to each basis row.
    exps: Vec<Vec<i64>>,
    /// `scale * k * index / 12`.
    budget: i64,
}

pub fn enumerate_eta_quotients(level: u64, weight: u64) -> Result<EnumerationResult> {
    enumerate_with(level, weight, &EnumerationOptions::default()).map(|(r, _)| r)
}

pub fn enumerate_with(
    level: u64,
    weight: u64,
    opts: &EnumerationOptions,
) -> Result<(EnumerationResult, EnumerationStats)> {
    if level == 0 {
        return Err(Error::InvalidArgument("level must be positive".into()));
    }
    if weight % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "weight {weight} must be a nonnegative even integer"
        )));
    }
    let plan = build_plan(level, weight)?;
    let run = || walk(&plan, level, weight, opts.candidate_cap);
    let (mut exps, nodes) = match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    exps.sort_unstable();
    exps.dedup();
    let quotients: Vec<EtaQuotient> = exps
        .into_iter()
        .map(|e| EtaQuotient::new(level, e))
        .collect::<Result<_>>()?;
    let count = quotients.len();
    Ok((
        EnumerationResult {
            level,
            weight,
            quotients,
            count,
        },
        EnumerationStats { nodes },
    ))
}

fn to_i64(x: &BigInt, what: &str) -> Result<i64> {
    x.to_i64()
        .filter(|v| v.unsigned_abs() < (1u64 << 55))
        .ok_or_else(|| Error::InvalidArgument(format!("{what} {x} is too large for enumeration")))
}

fn build_plan(level: u64, weight: u64) -> Result<Plan> {
    let divs = divisors(level);
    let dim = divs.len();
    let order_matrix = CoeffMatrix::from_rows(divs.iter().map(|&d| ligozat_row(level, d)).collect())?;
    let eps: Vec<u64> = divs.iter().map(|&d| cusp_multiplicity(level, d)).collect();
    let index = index_gamma0(level);

    // sum_d eps_d * order_d must equal (index / 24) * sum_i r_i for every r.
    let valence = BigRational::new(BigInt::from(index), BigInt::from(24));
    for i in 0..dim {
        let col: BigRational = (0..dim)
            .map(|j| order_matrix.get(j, i) * BigRational::from_integer(eps[j].into()))
            .sum();
        if col != valence {
            return Err(Error::InvalidArgument(format!(
                "valence identity fails at level {level}, column {i}"
            )));
        }
    }
    let inverse = order_matrix
        .inverse()
        .ok_or(Error::SingularOrderMatrix(level))?;

    // Exponent lattice: sum d r == 0, sum (N/d) r == 0 (mod 24), and for
    // every prime p, sum v_p(d) r even.
    let m24 = BigInt::from(24);
    let m2 = BigInt::from(2);
    let mut exp_basis = identity_basis(dim);
    let w1: IVec = divs.iter().map(|&d| BigInt::from(d)).collect();
    let w2: IVec = divs.iter().map(|&d| BigInt::from(level / d)).collect();
    exp_basis = intersect_congruence(exp_basis, &w1, &m24);
    exp_basis = intersect_congruence(exp_basis, &w2, &m24);
    for (p, _) in factorize(level) {
        let w: IVec = divs.iter().map(|&d| BigInt::from(valuation(d, p))).collect();
        exp_basis = intersect_congruence(exp_basis, &w, &m2);
    }
    let exp_basis = hermite_basis(exp_basis, dim, Some(&m24));

    // Orders live in (1/scale) Z.
    let scale = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .fold(BigInt::one(), |acc, (i, j)| acc.lcm(order_matrix.get(i, j).denom()));
    let scaled = |r: &IVec| -> IVec {
        (0..dim)
            .map(|i| {
                let s: BigRational = (0..dim)
                    .map(|j| order_matrix.get(i, j) * BigRational::from_integer(r[j].clone()))
                    .sum();
                (s * BigRational::from_integer(scale.clone())).to_integer()
            })
            .collect()
    };
    let order_gens: Vec<IVec> = exp_basis.iter().map(scaled).collect();

    let perm = choose_order(&order_gens, &eps, dim);
    let permuted: Vec<IVec> = order_gens
        .iter()
        .map(|v| perm.iter().map(|&j| v[j].clone()).collect())
        .collect();
    let tri = hermite_basis(permuted, dim, None);
    debug_assert!(!triangular_index(&tri).is_zero());

    let mut rows = Vec::with_capacity(dim);
    let mut exps = Vec::with_capacity(dim);
    for row in &tri {
        // undo the permutation, then r = A^{-1} v / scale
        let mut v = vec![BigInt::zero(); dim];
        for (c, &j) in perm.iter().enumerate() {
            v[j] = row[c].clone();
        }
        let mut r = Vec::with_capacity(dim);
        for i in 0..dim {
            let s: BigRational = (0..dim)
                .map(|j| inverse.get(i, j) * BigRational::from_integer(v[j].clone()))
                .sum::<BigRational>()
                / BigRational::from_integer(scale.clone());
            if !s.is_integer() {
                return Err(Error::InvalidArgument(format!(
                    "non-integral exponent in lattice basis at level {level}"
                )));
            }
            r.push(to_i64(&s.to_integer(), "exponent")?);
        }
        rows.push(row.iter().map(|x| to_i64(x, "lattice entry")).collect::<Result<Vec<_>>>()?);
        exps.push(r);
    }
    let budget_big = BigInt::from(weight) * BigInt::from(index) * &scale;
    let (budget, rem) = budget_big.div_rem(&BigInt::from(12));
    if !rem.is_zero() {
        // k * index / 12 not integral: impossible for even k, but the scaled
        // budget must stay exact.
        return Err(Error::InvalidArgument(format!(
            "valence total for level {level} weight {weight} is not in the order lattice"
        )));
    }
    Ok(Plan {
        dim,
        eps: perm.iter().map(|&j| eps[j] as i64).collect(),
        perm,
        scale,
        rows,
        exps,
        budget: to_i64(&budget, "budget")?,
    })
}

/// Greedy coordinate order: each step picks the coordinate that makes the
/// projected lattice sparsest relative to the simplex slice it must cover.
fn choose_order(gens: &[IVec], eps: &[u64], dim: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(dim);
    let mut prev_index = BigInt::one();
    while chosen.len() < dim {
        let mut best: Option<(BigInt, usize)> = None;
        for j in (0..dim).filter(|j| !chosen.contains(j)) {
            let mut coords = chosen.clone();
            coords.push(j);
            let proj: Vec<IVec> = gens
                .iter()
                .map(|v| coords.iter().map(|&c| v[c].clone()).collect())
                .collect();
            let idx = triangular_index(&hermite_basis(proj, coords.len(), None));
            // new diagonal entry times the multiplicity that scales the slice
            let gain = (&idx / &prev_index) * BigInt::from(eps[j]);
            if best.as_ref().map_or(true, |(g, _)| gain > *g) {
                best = Some((gain, j));
            }
        }
        let (_, j) = best.expect("coordinate available");
        chosen.push(j);
        let proj: Vec<IVec> = gens
            .iter()
            .map(|v| chosen.iter().map(|&c| v[c].clone()).collect())
            .collect();
        prev_index = triangular_index(&hermite_basis(proj, chosen.len(), None));
    }
    chosen
}

struct Walker<'a> {
    plan: &'a Plan,
    partial: Vec<Vec<i64>>,
    z: Vec<i64>,
    out: Vec<Vec<i64>>,
    nodes: u64,
}

impl Walker<'_> {
    fn new(plan: &Plan) -> Walker<'_> {
        Walker {
            plan,
            partial: vec![vec![0; plan.dim]; plan.dim + 1],
            z: vec![0; plan.dim],
            out: Vec::new(),
            nodes: 0,
        }
    }

    /// Range of `z_c` keeping `0 <= v_c` and `eps_c v_c <= rem`.
    fn range(&self, c: usize, rem: i64) -> (i64, i64) {
        let s = self.partial[c][c];
        let h = self.plan.rows[c][c];
        let cap = rem.div_euclid(self.plan.eps[c]);
        (-(s.div_euclid(h)), (cap - s).div_euclid(h))
    }

    fn step(&mut self, c: usize, zc: i64) -> i64 {
        self.z[c] = zc;
        let (head, tail) = self.partial.split_at_mut(c + 1);
        let src = &head[c];
        let dst = &mut tail[0];
        let row = &self.plan.rows[c];
        for j in c..self.plan.dim {
            dst[j] = src[j] + zc * row[j];
        }
        dst[c]
    }

    fn descend(&mut self, c: usize, rem: i64) {
        let dim = self.plan.dim;
        if c + 1 == dim {
            let e = self.plan.eps[c];
            if rem % e != 0 {
                return;
            }
            let v = rem / e;
            let s = self.partial[c][c];
            let h = self.plan.rows[c][c];
            if (v - s) % h != 0 {
                return;
            }
            self.nodes += 1;
            self.z[c] = (v - s) / h;
            let mut r = vec![0i64; dim];
            for (zc, ex) in self.z.iter().zip(&self.plan.exps) {
                if *zc != 0 {
                    for (ri, x) in r.iter_mut().zip(ex) {
                        *ri += zc * x;
                    }
                }
            }
            self.out.push(r);
            return;
        }
        let (lo, hi) = self.range(c, rem);
        for zc in lo..=hi {
            self.nodes += 1;
            let vc = self.step(c, zc);
            self.descend(c + 1, rem - self.plan.eps[c] * vc);
        }
    }
}

fn walk(plan: &Plan, level: u64, weight: u64, cap: u64) -> Result<(Vec<Vec<i64>>, u64)> {
    // Split the walk at a shallow depth so workers get balanced slices.
    let mut prefixes: Vec<(Vec<i64>, i64)> = vec![(Vec::new(), plan.budget)];
    let mut depth = 0;
    while depth + 1 < plan.dim && prefixes.len() < 256 {
        let mut next = Vec::new();
        for (zs, rem) in &prefixes {
            let mut w = Walker::new(plan);
            for (c, &zc) in zs.iter().enumerate() {
                w.step(c, zc);
            }
            let (lo, hi) = w.range(depth, *rem);
            for zc in lo..=hi {
                let vc = w.step(depth, zc);
                let mut z = zs.clone();
                z.push(zc);
                next.push((z, *rem - plan.eps[depth] * vc));
            }
        }
        prefixes = next;
        depth += 1;
    }
    let counter = AtomicU64::new(0);
    let pieces: Vec<Result<(Vec<Vec<i64>>, u64)>> = prefixes
        .par_iter()
        .map(|(zs, rem)| {
            let mut w = Walker::new(plan);
            for (c, &zc) in zs.iter().enumerate() {
                w.step(c, zc);
            }
            w.nodes = zs.len() as u64;
            w.descend(zs.len(), *rem);
            let total = counter.fetch_add(w.nodes, Ordering::Relaxed) + w.nodes;
            if total > cap {
                return Err(Error::BudgetExceeded { level, weight, cap });
            }
            Ok((std::mem::take(&mut w.out), w.nodes))
        })
        .collect();
    let mut all = Vec::new();
    let mut nodes = 0;
    for p in pieces {
        let (v, n) = p?;
        all.extend(v);
        nodes += n;
    }
    Ok((all, nodes))
}

/// On-disk cache of enumerations, one text file per `(level, weight)`.
#[derive(Clone, Debug)]
pub struct EnumerationCache {
    dir: PathBuf,
}

impl EnumerationCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        EnumerationCache { dir: dir.into() }
    }

    pub fn path_for(&self, level: u64, weight: u64) -> PathBuf {
        self.dir.join(format!("eta_{level}_weight{weight}.txt"))
    }

    pub fn load(&self, level: u64, weight: u64) -> Result<Option<EnumerationResult>> {
        let path = self.path_for(level, weight);
        if !path.exists() {
            return Ok(None);
        }
        read_enumeration(&path).map(Some)
    }

    pub fn store(&self, result: &EnumerationResult) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path_for(result.level, result.weight);
        write_enumeration(result, &path)?;
        Ok(path)
    }

    /// Cached result, or a fresh enumeration that is then stored.
    pub fn get_or_enumerate(
        &self,
        level: u64,
        weight: u64,
        opts: &EnumerationOptions,
    ) -> Result<EnumerationResult> {
        if let Some(r) = self.load(level, weight)? {
            return Ok(r);
        }
        let (r, _) = enumerate_with(level, weight, opts)?;
        self.store(&r)?;
        Ok(r)
    }
}

/// Enumerations with an optional disk cache in front.
#[derive(Clone, Debug, Default)]
pub struct Enumerator {
    cache: Option<EnumerationCache>,
    options: EnumerationOptions,
}

impl Enumerator {
    pub fn new(options: EnumerationOptions) -> Self {
        Enumerator { cache: None, options }
    }

    pub fn with_cache(dir: impl Into<PathBuf>, options: EnumerationOptions) -> Self {
        Enumerator {
            cache: Some(EnumerationCache::new(dir)),
            options,
        }
    }

    pub fn options(&self) -> &EnumerationOptions {
        &self.options
    }

    pub fn get(&self, level: u64, weight: u64) -> Result<EnumerationResult> {
        match &self.cache {
            Some(c) => c.get_or_enumerate(level, weight, &self.options),
            None => enumerate_with(level, weight, &self.options).map(|(r, _)| r),
        }
    }
}

pub fn format_enumeration(result: &EnumerationResult) -> String {
    let mut s = format!(
        "# level={} weight={} count={}\n",
        result.level, result.weight, result.count
    );
    for q in &result.quotients {
        s.push_str(&q.to_string());
        s.push('\n');
    }
    s
}

/// Writes through a temporary file so a partial write never replaces a
/// complete cache entry.
pub fn write_enumeration(result: &EnumerationResult, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(format_enumeration(result).as_bytes())
        .map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn parse_enumeration(text: &str, path: &Path) -> Result<EnumerationResult> {
    let schema = |line: usize, message: String| Error::Schema {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| schema(1, "empty file".into()))?;
    let fields = header
        .strip_prefix("# ")
        .ok_or_else(|| schema(1, "missing header".into()))?;
    let mut level = None;
    let mut weight = None;
    let mut count = None;
    for kv in fields.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| schema(1, format!("bad header field `{kv}`")))?;
        let n: u64 = v
            .parse()
            .map_err(|_| schema(1, format!("bad number in `{kv}`")))?;
        match k {
            "level" => level = Some(n),
            "weight" => weight = Some(n),
            "count" => count = Some(n as usize),
            _ => return Err(schema(1, format!("unknown header field `{k}`"))),
        }
    }
    let (level, weight, count) = match (level, weight, count) {
        (Some(l), Some(w), Some(c)) => (l, w, c),
        _ => return Err(schema(1, "header needs level, weight and count".into())),
    };
    let mut quotients = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let q: EtaQuotient = line
            .parse()
            .map_err(|e: Error| schema(i + 2, e.to_string()))?;
        if q.level() != level {
            return Err(schema(i + 2, format!("quotient level {} != {level}", q.level())));
        }
        quotients.push(q);
    }
    if quotients.len() != count {
        return Err(schema(1, format!("header count {count} but {} quotients", quotients.len())));
    }
    Ok(EnumerationResult {
        level,
        weight,
        quotients,
        count,
    })
}

pub fn read_enumeration(path: &Path) -> Result<EnumerationResult> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_enumeration(&text, path)
}

/// Per-divisor exponent bounds implied by holomorphy: every exponent vector
/// of a holomorphic quotient of weight `k` lies in the returned box.
pub fn exponent_bounds(level: u64, weight: u64) -> Result<Vec<(i64, i64)>> {
    let divs = divisors(level);
    let dim = divs.len();
    let a = CoeffMatrix::from_rows(divs.iter().map(|&d| ligozat_row(level, d)).collect())?;
    let inv = a.inverse().ok_or(Error::SingularOrderMatrix(level))?;
    let total = BigRational::new(
        BigInt::from(weight) * BigInt::from(index_gamma0(level)),
        BigInt::from(12),
    );
    // r = A^{-1} v is linear, so its extremes over the simplex are at vertices
    // v = (total / eps_d) e_d.
    Ok((0..dim)
        .map(|i| {
            let vals: Vec<BigRational> = divs
                .iter()
                .enumerate()
                .map(|(j, &d)| {
                    inv.get(i, j) * &total
                        / BigRational::from_integer(cusp_multiplicity(level, d).into())
                })
                .collect();
            let lo = vals.iter().min().cloned().unwrap_or_else(BigRational::zero);
            let hi = vals.iter().max().cloned().unwrap_or_else(BigRational::zero);
            let lo = lo.floor().to_integer().to_i64().unwrap_or(i64::MIN);
            let hi = hi.ceil().to_integer().to_i64().unwrap_or(i64::MAX);
            (lo.min(0), hi.max(0))
        })
        .collect())
}
