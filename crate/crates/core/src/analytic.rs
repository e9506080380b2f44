//! Floating-point evaluation of eta, the eta multiplier and eta expressions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::express::Expression;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Longest product used after reduction to the fundamental domain.
const MAX_TERMS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl ModularMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a as i128 * d as i128 - b as i128 * c as i128 != 1 {
            return Err(Error::InvalidArgument(format!(
                "[[{a},{b}],[{c},{d}]] has determinant != 1"
            )));
        }
        Ok(ModularMatrix { a, b, c, d })
    }

    pub fn identity() -> Self {
        ModularMatrix { a: 1, b: 0, c: 0, d: 1 }
    }

    pub fn negate(&self) -> Self {
        ModularMatrix {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    /// Representative with `c > 0`, or `c = 0, d = 1`.
    pub fn normalized(&self) -> Self {
        if self.c < 0 || (self.c == 0 && self.d < 0) {
            self.negate()
        } else {
            *self
        }
    }

    pub fn mul(&self, o: &ModularMatrix) -> ModularMatrix {
        ModularMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a as f64 + self.b as f64) / (z * self.c as f64 + self.d as f64)
    }
}

impl fmt::Display for ModularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for ModularMatrix {
    type Err = Error;

    /// `[[a,b],[c,d]]` or `a,b,c,d`.
    fn from_str(s: &str) -> Result<Self> {
        let nums: Vec<i64> = s
            .split(|c: char| c == ',' || c == '[' || c == ']' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("matrix entry {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        match nums[..] {
            [a, b, c, d] => ModularMatrix::new(a, b, c, d),
            _ => Err(Error::Parse(format!("expected four matrix entries in {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperHalfPoint {
    pub re: f64,
    pub im: f64,
    pub exact: Option<String>,
}

impl UpperHalfPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidArgument(format!("{re} + {im}i is not in the upper half-plane")));
        }
        Ok(UpperHalfPoint { re, im, exact: None })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        UpperHalfPoint::new(z.re, z.im)
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// `d * z`.
    pub fn scaled(&self, d: f64) -> Result<Self> {
        UpperHalfPoint::new(self.re * d, self.im * d)
    }
}

impl fmt::Display for UpperHalfPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_complex(self.z()))
    }
}

impl FromStr for UpperHalfPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let z = PointParser::new(s).parse()?;
        let mut p = UpperHalfPoint::from_complex(z)?;
        p.exact = Some(s.trim().to_string());
        Ok(p)
    }
}

fn format_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (14 - mag).clamp(0, 40) as usize;
    format!("{x:.decimals$}")
}

/// `re ± im*i`, 15 significant digits per part.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{} {} {}*i", format_real(z.re), sign, format_real(z.im.abs()))
}

/// Arithmetic over numbers, `i`, `pi`, `sqrt(..)` and parentheses, enough
/// for points such as `1/2 + i/(2*sqrt(21))` or `0.25+1.5i`.
struct PointParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> PointParser<'a> {
    fn new(src: &'a str) -> Self {
        PointParser { src, pos: 0 }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("point {:?} at offset {}: {msg}", self.src, self.pos))
    }

    fn peek(&mut self) -> Option<char> {
        self.src[self.pos..].chars().find(|c| !c.is_whitespace()).inspect(|_| {
            while self.src[self.pos..].starts_with(char::is_whitespace) {
                self.pos += 1;
            }
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<Complex64> {
        let v = self.sum()?;
        if self.peek().is_some() {
            return Err(self.err("trailing input"));
        }
        Ok(v)
    }

    fn sum(&mut self) -> Result<Complex64> {
        let mut v = self.product()?;
        loop {
            if self.eat('+') {
                v += self.product()?;
            } else if self.eat('-') {
                v -= self.product()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn product(&mut self) -> Result<Complex64> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(self.err("division by zero"));
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<Complex64> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Complex64> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.sum()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let rest = &self.src[self.pos..];
                let len = rest
                    .char_indices()
                    .find(|&(i, c)| {
                        !(c.is_ascii_digit()
                            || c == '.'
                            || ((c == 'e' || c == 'E') && rest[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+')))
                            && !((c == '-' || c == '+') && i > 0 && rest[..i].ends_with(['e', 'E']))
                    })
                    .map_or(rest.len(), |(i, _)| i);
                let x: f64 = rest[..len].parse().map_err(|_| self.err("bad number"))?;
                self.pos += len;
                // `2i` means 2*i
                if self.src[self.pos..].starts_with('i') && !self.src[self.pos..].starts_with("inf") {
                    self.pos += 1;
                    return Ok(Complex64::new(0.0, x));
                }
                Ok(Complex64::new(x, 0.0))
            }
            Some(_) => {
                let rest = &self.src[self.pos..];
                let len = rest.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(rest.len());
                let word = &rest[..len];
                self.pos += len;
                match word {
                    "i" => Ok(Complex64::i()),
                    "pi" => Ok(Complex64::new(PI, 0.0)),
                    "sqrt" => {
                        let arg = self.atom()?;
                        if arg.im != 0.0 || arg.re < 0.0 {
                            return Err(self.err("sqrt of a negative or complex number"));
                        }
                        Ok(Complex64::new(arg.re.sqrt(), 0.0))
                    }
                    _ => Err(self.err(&format!("unknown symbol {word:?}"))),
                }
            }
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Dedekind sum `s(h, k)` for coprime `h` and `k > 0`.
pub fn dedekind_sum(h: i64, k: i64) -> Result<BigRational> {
    if k <= 0 {
        return Err(Error::InvalidArgument(format!("dedekind sum needs k > 0, got {k}")));
    }
    if h.gcd(&k) != 1 {
        return Err(Error::InvalidArgument(format!("gcd({h}, {k}) != 1")));
    }
    let half = BigRational::new(1.into(), 2.into());
    let kk = BigInt::from(k);
    let mut sum = BigRational::zero();
    for r in 1..k {
        let hr = BigInt::from(h) * r;
        let frac = BigRational::new(hr.mod_floor(&kk), kk.clone());
        sum += BigRational::new(r.into(), kk.clone()) * (frac - &half);
    }
    Ok(sum)
}

/// The eta multiplier `chi(g)`, a 24th root of unity.
pub fn eta_multiplier(g: &ModularMatrix) -> Result<Complex64> {
    let g = ModularMatrix::new(g.a, g.b, g.c, g.d)?.normalized();
    if g.c == 0 {
        return Ok(Complex64::from_polar(1.0, PI * g.b as f64 / 12.0));
    }
    let phase = BigRational::new((g.a + g.d).into(), (12 * g.c).into()) + dedekind_sum(-g.d, g.c)?;
    // reduce mod 2 before converting, exponents can be large
    let two = BigRational::from_integer(2.into());
    let reduced = &phase - (&phase / &two).floor() * &two;
    Ok(Complex64::from_polar(1.0, PI * reduced.to_f64().unwrap_or(0.0)))
}

/// A value together with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub error: f64,
}

/// Truncated product `e^{pi i z/12} prod_{n<=terms} (1 - e^{2 pi i n z})`
/// with the tail bound `sum_{n>terms} |q|^n / (1-|q|)` scaled by the value.
pub fn eta_numeric(z: &UpperHalfPoint, terms: usize) -> Result<Evaluation> {
    if terms == 0 {
        return Err(Error::InvalidArgument("eta_numeric needs at least one term".into()));
    }
    let z = z.z();
    if !(z.im > 0.0) {
        return Err(Error::InvalidArgument(format!("{z} is not in the upper half-plane")));
    }
    let q = (Complex64::i() * 2.0 * PI * z).exp();
    let mut qn = Complex64::new(1.0, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    for _ in 0..terms {
        qn *= q;
        prod *= Complex64::new(1.0, 0.0) - qn;
    }
    let value = (Complex64::i() * PI * z / 12.0).exp() * prod;
    let aq = q.norm();
    let tail = if aq < 1.0 {
        aq.powi(terms as i32 + 1) / ((1.0 - aq) * (1.0 - aq))
    } else {
        f64::INFINITY
    };
    let rel = tail.exp_m1() + 4.0 * terms as f64 * f64::EPSILON;
    Ok(Evaluation {
        value,
        error: rel * value.norm(),
    })
}

/// `eta(z)` after moving `z` into the standard fundamental domain, using
/// `eta(z+1) = e^{pi i/12} eta(z)` and `eta(-1/z) = sqrt(-iz) eta(z)`. The
/// product length is chosen so the relative truncation error is below
/// `rel_tol`, or the evaluation is refused.
pub fn eta(z: Complex64, rel_tol: f64) -> Result<Evaluation> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidArgument(format!("{z} is not in the upper half-plane")));
    }
    let mut w = z;
    let mut factor = Complex64::new(1.0, 0.0);
    for _ in 0..10_000 {
        let n = w.re.round();
        if n != 0.0 {
            // eta(w) = e^{pi i n/12} eta(w - n)
            factor *= Complex64::from_polar(1.0, PI * n.rem_euclid(24.0) / 12.0);
            w.re -= n;
        }
        if w.norm_sqr() >= 1.0 - 1e-15 {
            break;
        }
        // eta(w) = (-i w')^{1/2} eta(w') with w = -1/w'
        let wp = -1.0 / w;
        factor *= (-Complex64::i() * wp).sqrt();
        w = wp;
    }
    let aq = (-2.0 * PI * w.im).exp();
    let mut terms = 1;
    while terms < MAX_TERMS && aq.powi(terms as i32 + 1) / ((1.0 - aq) * (1.0 - aq)) >= rel_tol / 4.0 {
        terms += 1;
    }
    let base = eta_numeric(&UpperHalfPoint::new(w.re, w.im)?, terms)?;
    let rel = base.error / base.value.norm().max(f64::MIN_POSITIVE) + 64.0 * f64::EPSILON;
    if rel > rel_tol {
        return Err(Error::Precision {
            error: rel,
            limit: rel_tol,
        });
    }
    let value = factor * base.value;
    Ok(Evaluation {
        value,
        error: rel * value.norm(),
    })
}

/// `prod eta(d z)^r` over `(d, r)` pairs.
pub fn eta_product(z: &UpperHalfPoint, factors: &[(u64, i64)], rel_tol: f64) -> Result<Evaluation> {
    let mut value = Complex64::new(1.0, 0.0);
    let mut rel = 0.0;
    for &(d, r) in factors {
        if d == 0 {
            return Err(Error::InvalidArgument("eta factor with d = 0".into()));
        }
        if r == 0 {
            continue;
        }
        let e = eta(z.z() * d as f64, rel_tol)?;
        value *= e.value.powi(r as i32);
        rel += r.unsigned_abs() as f64 * e.error / e.value.norm();
    }
    Ok(Evaluation {
        value,
        error: rel * value.norm(),
    })
}

/// `chi(g) (-i(cz+d))^{1/2}` for normalized `g`, the factor with
/// `eta(gz) = factor * eta(z)`. For `c = 0` the factor is `chi(g)`.
pub fn eta_transform_factor(g: &ModularMatrix, z: &UpperHalfPoint) -> Result<Complex64> {
    let g = ModularMatrix::new(g.a, g.b, g.c, g.d)?.normalized();
    let chi = eta_multiplier(&g)?;
    if g.c == 0 {
        return Ok(chi);
    }
    let s = (-Complex64::i() * (z.z() * g.c as f64 + g.d as f64)).sqrt();
    Ok(chi * s)
}

/// Checks `eta(gz) = chi(g) (-i(cz+d))^{1/2} eta(z)` numerically.
pub fn eta_transform_check(g: &ModularMatrix, z: &UpperHalfPoint, tol: f64) -> Result<bool> {
    check_tol(tol)?;
    let gz = UpperHalfPoint::from_complex(g.apply(z.z()))?;
    let lhs = eta(gz.z(), tol / 10.0)?;
    let rhs = eta(z.z(), tol / 10.0)?;
    let factor = eta_transform_factor(g, z)?;
    Ok((lhs.value - factor * rhs.value).norm() < tol)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// `sum coef * prod eta(d z)^r` over the terms of `e`.
pub fn eval_expression(e: &Expression, z: &UpperHalfPoint, rel_tol: f64) -> Result<Evaluation> {
    let mut value = Complex64::zero();
    let mut error = 0.0;
    for t in e.terms() {
        let factors: Vec<(u64, i64)> = t
            .quotient
            .divisors()
            .into_iter()
            .zip(t.quotient.exponents().iter().copied())
            .collect();
        let p = eta_product(z, &factors, rel_tol)?;
        let c = t.coef.to_f64().unwrap_or(f64::NAN);
        value += p.value * c;
        error += p.error * c.abs();
    }
    Ok(Evaluation { value, error })
}

/// `|f(z)| < tol` for an expression, with the truncation error required to
/// stay below `tol / 10`.
pub fn verify_zero(e: &Expression, z: &UpperHalfPoint, tol: f64) -> Result<(bool, Evaluation)> {
    check_tol(tol)?;
    let ev = eval_expression(e, z, tol / 100.0)?;
    if ev.error >= tol / 10.0 {
        return Err(Error::Precision {
            error: ev.error,
            limit: tol / 10.0,
        });
    }
    Ok((ev.value.norm() < tol, ev))
}

/// Numeric equality of two eta products at `z`.
pub fn verify_eta_relation(lhs: &[(u64, i64)], rhs: &[(u64, i64)], z: &UpperHalfPoint, tol: f64) -> Result<bool> {
    check_tol(tol)?;
    let l = eta_product(z, lhs, tol / 100.0)?;
    let r = eta_product(z, rhs, tol / 100.0)?;
    Ok((l.value - r.value).norm() < tol)
}
