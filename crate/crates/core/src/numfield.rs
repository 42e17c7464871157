//! Exact arithmetic in a real number field `Q(r)`.
//!
//! A field is fixed by a monic, irreducible integer polynomial together with
//! a rational interval isolating one real root `r`. Elements are stored in
//! the power basis `1, r, ..., r^(d-1)` with arbitrary-precision rational
//! coordinates, so equality is structural and every sign query terminates:
//! zero is detected from the coordinates, anything else is separated from
//! zero by refining the root interval.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Largest supported field degree.
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("minimal polynomial is not monic")]
    NotMonic,
    #[error("root interval does not isolate exactly one real root")]
    NoSignChange,
    #[error("minimal polynomial is reducible over the rationals")]
    Reducible,
    #[error("field degree {0} exceeds the supported ceiling of {MAX_DEGREE}")]
    UnsupportedDegree(usize),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse element literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p`, `p/q` or a plain decimal such as `-0.125` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_digits = int.trim().trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
        {
            return None;
        }
        let digits = format!("{int_digits}{frac}");
        let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(num, den);
        return Some(if neg { -r } else { r });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

// ---------------------------------------------------------------------------
// Rational polynomial helpers (coefficients low to high, trimmed).

fn trim(p: &mut Vec<Rational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn poly_sub_mul(a: &[Rational], q: &[Rational], b: &[Rational]) -> Vec<Rational> {
    // a - q*b
    let mut out: Vec<Rational> = a.to_vec();
    let n = if q.is_empty() || b.is_empty() { 0 } else { q.len() + b.len() - 1 };
    if out.len() < n {
        out.resize(n, Rational::zero());
    }
    for (i, qi) in q.iter().enumerate() {
        if qi.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] -= qi * bj;
        }
    }
    trim(&mut out);
    out
}

fn poly_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    while r.len() >= b.len() {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / &lead;
        for (j, bj) in b.iter().enumerate() {
            r[k + j] -= &c * bj;
        }
        q[k] = c;
        r.pop();
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

fn poly_derivative(p: &[Rational]) -> Vec<Rational> {
    let mut d: Vec<Rational> =
        p.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer(BigInt::from(i))).collect();
    trim(&mut d);
    d
}

fn sign_variations(seq: &[Vec<Rational>], x: &Rational) -> usize {
    let mut last = 0i32;
    let mut count = 0;
    for p in seq {
        let v = poly_eval(p, x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of distinct real roots of `p` in `(lo, hi]` (Sturm's theorem).
fn sturm_count(p: &[Rational], lo: &Rational, hi: &Rational) -> usize {
    let mut seq = vec![p.to_vec(), poly_derivative(p)];
    loop {
        let n = seq.len();
        if seq[n - 1].is_empty() {
            seq.pop();
            break;
        }
        let (_, r) = poly_divrem(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    sign_variations(&seq, lo).saturating_sub(sign_variations(&seq, hi))
}

fn divisors(n: i128) -> Vec<i128> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut k = 1i128;
    while k * k <= n {
        if n % k == 0 {
            out.push(k);
            if k * k != n {
                out.push(n / k);
            }
        }
        k += 1;
    }
    out.into_iter().flat_map(|d| [d, -d]).collect()
}

fn int_poly_eval(p: &[i128], x: i128) -> Option<i128> {
    p.iter().rev().try_fold(0i128, |acc, &c| acc.checked_mul(x)?.checked_add(c))
}

/// Irreducibility over Q for monic integer polynomials of degree at most 4.
/// By Gauss's lemma it suffices to look for monic integer factors.
fn is_irreducible(p: &[i128]) -> bool {
    let d = p.len() - 1;
    if d <= 1 {
        return true;
    }
    if p[0] == 0 {
        return false;
    }
    for r in divisors(p[0]) {
        if int_poly_eval(p, r) == Some(0) {
            return false;
        }
    }
    if d < 4 {
        return true;
    }
    // (x^2 + a x + b)(x^2 + c x + e) = x^4 + (a+c)x^3 + (ac+b+e)x^2 + (ae+bc)x + be
    let (c0, c1, c2, c3) = (p[0], p[1], p[2], p[3]);
    for b in divisors(c0) {
        let e = c0 / b;
        if e != b {
            let num = c1 - b * c3;
            let den = e - b;
            if num % den != 0 {
                continue;
            }
            let a = num / den;
            let c = c3 - a;
            if a * c + b + e == c2 {
                return false;
            }
        } else {
            if c1 != b * c3 {
                continue;
            }
            // a + c = c3, a c = c2 - 2b
            let prod = c2 - 2 * b;
            let disc = c3 * c3 - 4 * prod;
            if disc < 0 {
                continue;
            }
            let s = (disc as f64).sqrt().round() as i128;
            for s in [s - 1, s, s + 1] {
                if s >= 0 && s * s == disc && (c3 + s) % 2 == 0 {
                    return false;
                }
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------

struct FieldData {
    min_poly: Vec<BigInt>,
    poly_q: Vec<Rational>,
    interval: (Rational, Rational),
    fine: (Rational, Rational),
    root_f64: f64,
    /// `reduce[k]` holds the power-basis coordinates of `r^(d+k)`.
    reduce: Vec<Vec<Rational>>,
}

/// A real number field `Q[x]/(min_poly)` embedded via one chosen real root.
#[derive(Clone)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.min_poly == other.0.min_poly && self.0.interval == other.0.interval)
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({:?}, r~{})", self.0.min_poly, self.0.root_f64)
    }
}

impl Field {
    /// Builds `Q(r)` where `r` is the unique root of `min_poly` (coefficients
    /// from the constant term up) inside `root_interval`. Degree-one
    /// polynomials give the rationals and ignore the interval.
    pub fn new(min_poly: &[i64], root_interval: (Rational, Rational)) -> Result<Field, FieldError> {
        if min_poly.len() < 2 {
            return Err(FieldError::NotMonic);
        }
        if *min_poly.last().unwrap() != 1 {
            return Err(FieldError::NotMonic);
        }
        let d = min_poly.len() - 1;
        if d > MAX_DEGREE {
            return Err(FieldError::UnsupportedDegree(d));
        }
        let wide: Vec<i128> = min_poly.iter().map(|&c| c as i128).collect();
        if !is_irreducible(&wide) {
            return Err(FieldError::Reducible);
        }
        let poly_q: Vec<Rational> = min_poly.iter().map(|&c| rat_int(c)).collect();
        let (lo, hi) = if d == 1 {
            let root = -rat_int(min_poly[0]);
            (root.clone(), root)
        } else {
            let (lo, hi) = root_interval;
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let plo = poly_eval(&poly_q, &lo);
            let phi = poly_eval(&poly_q, &hi);
            if plo.is_zero() || phi.is_zero() || sturm_count(&poly_q, &lo, &hi) != 1 {
                return Err(FieldError::NoSignChange);
            }
            (lo, hi)
        };
        let mut fine = (lo.clone(), hi.clone());
        let eps = Rational::new(BigInt::one(), BigInt::one() << 64u32);
        while &fine.1 - &fine.0 > eps {
            fine = bisect(&poly_q, fine);
        }
        let root_f64 = ((&fine.0 + &fine.1) / rat_int(2)).to_f64().unwrap_or(f64::NAN);

        // r^d = -(c0 + ... + c_{d-1} r^{d-1}); higher powers by shifting.
        let mut reduce: Vec<Vec<Rational>> = Vec::new();
        let mut cur: Vec<Rational> = poly_q[..d].iter().map(|c| -c).collect();
        for _ in 0..d.saturating_sub(1).max(1) {
            reduce.push(cur.clone());
            // multiply by r
            let top = cur[d - 1].clone();
            let mut next = vec![Rational::zero(); d];
            for i in (1..d).rev() {
                next[i] = cur[i - 1].clone();
            }
            for i in 0..d {
                next[i] -= &top * &poly_q[i];
            }
            cur = next;
        }
        Ok(Field(Arc::new(FieldData {
            min_poly: min_poly.iter().map(|&c| BigInt::from(c)).collect(),
            poly_q,
            interval: (lo, hi),
            fine,
            root_f64,
            reduce,
        })))
    }

    pub fn rationals() -> Field {
        Field::new(&[0, 1], (Rational::zero(), Rational::zero())).expect("x is irreducible")
    }

    pub fn degree(&self) -> usize {
        self.0.min_poly.len() - 1
    }

    pub fn min_poly(&self) -> &[BigInt] {
        &self.0.min_poly
    }

    pub fn root_interval(&self) -> (&Rational, &Rational) {
        (&self.0.interval.0, &self.0.interval.1)
    }

    pub fn root_f64(&self) -> f64 {
        self.0.root_f64
    }

    pub fn is_rational_field(&self) -> bool {
        self.degree() == 1
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { field: self.clone(), coords: vec![Rational::zero(); self.degree()] }
    }

    pub fn one(&self) -> FieldElement {
        self.from_rational(Rational::one())
    }

    pub fn from_i64(&self, n: i64) -> FieldElement {
        self.from_rational(rat_int(n))
    }

    pub fn from_ratio(&self, n: i64, d: i64) -> FieldElement {
        self.from_rational(rat(n, d))
    }

    pub fn from_rational(&self, q: Rational) -> FieldElement {
        let mut coords = vec![Rational::zero(); self.degree()];
        coords[0] = q;
        FieldElement { field: self.clone(), coords }
    }

    /// The distinguished root `r` (for the rationals, the root of `min_poly`).
    pub fn generator(&self) -> FieldElement {
        if self.degree() == 1 {
            let root = self.0.interval.0.clone();
            return self.from_rational(root);
        }
        let mut coords = vec![Rational::zero(); self.degree()];
        coords[1] = Rational::one();
        FieldElement { field: self.clone(), coords }
    }

    /// Element with the given power-basis coordinates; missing coordinates are zero.
    pub fn element(&self, coords: &[Rational]) -> FieldElement {
        let d = self.degree();
        let mut c: Vec<Rational> = coords.to_vec();
        if c.len() > d {
            // reduce higher powers
            let mut e = self.zero();
            let r = self.generator();
            let mut pow = self.one();
            for q in c.drain(..) {
                e += &(&pow * &self.from_rational(q));
                pow = &pow * &r;
            }
            return e;
        }
        c.resize(d, Rational::zero());
        FieldElement { field: self.clone(), coords: c }
    }

    /// Parses the literal format `c0 + c1*r + c2*r^2 ...` (terms in any order,
    /// rationals as `p`, `p/q` or decimals).
    pub fn parse(&self, literal: &str) -> Result<FieldElement, FieldError> {
        let err = |reason: &str| FieldError::Parse { literal: literal.to_string(), reason: reason.to_string() };
        let s: String = literal.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err("empty literal"));
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in s.chars().enumerate() {
            let prev = if i == 0 { None } else { s[..i].chars().last() };
            let split = (ch == '+' || ch == '-') && !matches!(prev, None | Some('e') | Some('E') | Some('*') | Some('^'));
            if split {
                if cur.is_empty() {
                    return Err(err("dangling sign"));
                }
                terms.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
            } else if i == 0 && (ch == '+' || ch == '-') {
                neg = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        if cur.is_empty() {
            return Err(err("dangling sign"));
        }
        terms.push((neg, cur));
        let mut acc = self.zero();
        for (neg, t) in terms {
            let (coef, power) = if let Some(pos) = t.find('r') {
                let coef_str = t[..pos].trim_end_matches('*');
                let coef = if coef_str.is_empty() {
                    Rational::one()
                } else {
                    parse_rational(coef_str).ok_or_else(|| err("bad coefficient"))?
                };
                let rest = &t[pos + 1..];
                let power = if rest.is_empty() {
                    1usize
                } else {
                    rest.strip_prefix('^')
                        .and_then(|p| p.parse::<usize>().ok())
                        .ok_or_else(|| err("bad exponent"))?
                };
                (coef, power)
            } else {
                (parse_rational(&t).ok_or_else(|| err("bad rational"))?, 0)
            };
            let mut term = self.from_rational(if neg { -coef } else { coef });
            let r = self.generator();
            for _ in 0..power {
                term = &term * &r;
            }
            acc += &term;
        }
        Ok(acc)
    }
}

fn bisect(p: &[Rational], (lo, hi): (Rational, Rational)) -> (Rational, Rational) {
    let mid = (&lo + &hi) / rat_int(2);
    let pm = poly_eval(p, &mid);
    let plo = poly_eval(p, &lo);
    if pm.is_zero() {
        (mid.clone(), mid)
    } else if pm.is_positive() == plo.is_positive() {
        (mid, hi)
    } else {
        (lo, mid)
    }
}

fn interval_mul(a: &(Rational, Rational), b: &(Rational, Rational)) -> (Rational, Rational) {
    let c = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let lo = c.iter().min().unwrap().clone();
    let hi = c.iter().max().unwrap().clone();
    (lo, hi)
}

/// Natural interval extension of the polynomial with the given coefficients.
fn interval_eval(coords: &[Rational], x: &(Rational, Rational)) -> (Rational, Rational) {
    let mut acc = (Rational::zero(), Rational::zero());
    for c in coords.iter().rev() {
        let m = interval_mul(&acc, x);
        acc = (m.0 + c, m.1 + c);
    }
    acc
}

// ---------------------------------------------------------------------------

/// An exact element of a [`Field`], canonical in the power basis.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    coords: Vec<Rational>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords && self.field == other.field
    }
}
impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (~{})", self, self.to_f64())
    }
}

impl fmt::Display for FieldElement {
    /// Canonical literal, e.g. `1/2 - 3*r + r^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let basis = match i {
                0 => String::new(),
                1 => "r".to_string(),
                k => format!("r^{k}"),
            };
            if i == 0 {
                out.push_str(&format_rational(&mag));
            } else if mag.is_one() {
                out.push_str(&basis);
            } else {
                out.push_str(&format!("{}*{}", format_rational(&mag), basis));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coords.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coords[0].clone())
    }

    fn check(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn try_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self - other)
    }

    pub fn try_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self * other)
    }

    pub fn try_div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self * &other.inverse()?)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in `Q[x]`.
    pub fn inverse(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.field.degree() == 1 {
            return Ok(self.field.from_rational(self.coords[0].recip()));
        }
        let mut a = self.coords.clone();
        trim(&mut a);
        let mut r0 = self.field.0.poly_q.clone();
        let mut r1 = a;
        let mut s0: Vec<Rational> = Vec::new();
        let mut s1: Vec<Rational> = vec![Rational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1);
            let s2 = poly_sub_mul(&s0, &q, &s1);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is a nonzero constant because min_poly is irreducible.
        let c = r0[0].clone();
        let coords: Vec<Rational> = s0.iter().map(|x| x / &c).collect();
        Ok(self.field.element(&coords))
    }

    pub fn scale(&self, q: &Rational) -> FieldElement {
        FieldElement { field: self.field.clone(), coords: self.coords.iter().map(|c| c * q).collect() }
    }

    /// Floating-point value (rounded; not a certificate).
    pub fn to_f64(&self) -> f64 {
        let r = self.field.0.root_f64;
        if self.field.degree() == 1 {
            return self.coords[0].to_f64().unwrap_or(f64::NAN);
        }
        self.coords.iter().rev().fold(0.0, |acc, c| acc * r + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Sign of the real embedding: -1, 0 or +1.
    pub fn sign(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        if self.field.degree() == 1 {
            return if self.coords[0].is_positive() { 1 } else { -1 };
        }
        // Fast path: a float evaluation far from zero relative to the
        // magnitude of its terms is conclusive.
        let r = self.field.0.root_f64;
        let mut value = 0.0f64;
        let mut mag = 0.0f64;
        for c in self.coords.iter().rev() {
            let cf = c.to_f64().unwrap_or(f64::NAN);
            value = value * r + cf;
            mag = mag * r.abs() + cf.abs();
        }
        if value.is_finite() && mag.is_finite() && mag > 1e-280 && value.abs() > 1e-9 * mag {
            return if value > 0.0 { 1 } else { -1 };
        }
        self.sign_exact()
    }

    /// Sign by interval refinement only.
    pub fn sign_exact(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        let p = &self.field.0.poly_q;
        let mut iv = self.field.0.fine.clone();
        loop {
            let (lo, hi) = interval_eval(&self.coords, &iv);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            iv = bisect(p, iv);
        }
    }

    /// Rational interval of width at most `2^-bits` containing the value.
    pub fn approx(&self, bits: u32) -> (Rational, Rational) {
        let width = Rational::new(BigInt::one(), BigInt::one() << bits);
        let p = &self.field.0.poly_q;
        let mut iv = self.field.0.fine.clone();
        loop {
            let (lo, hi) = interval_eval(&self.coords, &iv);
            if &hi - &lo <= width {
                return (lo, hi);
            }
            iv = bisect(p, iv);
        }
    }

    pub fn abs(&self) -> FieldElement {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn square(&self) -> FieldElement {
        self * self
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    /// Decimal rendering with twelve significant digits.
    pub fn decimal(&self) -> String {
        format!("{:.12e}", self.to_f64())
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).sign().cmp(&0)
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        assert!(self.field == rhs.field, "field mismatch");
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        assert!(self.field == rhs.field, "field mismatch");
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        assert!(self.field == rhs.field, "field mismatch");
        let d = self.field.degree();
        if d == 1 {
            return FieldElement { field: self.field.clone(), coords: vec![&self.coords[0] * &rhs.coords[0]] };
        }
        let mut prod = vec![Rational::zero(); 2 * d - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coords.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let reduce = &self.field.0.reduce;
        let mut coords: Vec<Rational> = prod[..d].to_vec();
        for (k, c) in prod[d..].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, r) in reduce[k].iter().enumerate() {
                if !r.is_zero() {
                    coords[i] += c * r;
                }
            }
        }
        FieldElement { field: self.field.clone(), coords }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { field: self.field.clone(), coords: self.coords.iter().map(|c| -c).collect() }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(mut self) -> FieldElement {
        for c in self.coords.iter_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<FieldElement> for &'a FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&FieldElement> for FieldElement {
    fn add_assign(&mut self, rhs: &FieldElement) {
        assert!(self.field == rhs.field, "field mismatch");
        for (a, b) in self.coords.iter_mut().zip(&rhs.coords) {
            *a += b;
        }
    }
}

impl SubAssign<&FieldElement> for FieldElement {
    fn sub_assign(&mut self, rhs: &FieldElement) {
        assert!(self.field == rhs.field, "field mismatch");
        for (a, b) in self.coords.iter_mut().zip(&rhs.coords) {
            *a -= b;
        }
    }
}

// ---------------------------------------------------------------------------

/// A vector in the plane with both coordinates in one field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PlanarVector {
    pub x: FieldElement,
    pub y: FieldElement,
}

impl fmt::Debug for PlanarVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

impl fmt::Display for PlanarVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", self.x, self.y)
    }
}

impl PlanarVector {
    pub fn new(x: FieldElement, y: FieldElement) -> PlanarVector {
        assert!(x.field == y.field, "field mismatch");
        PlanarVector { x, y }
    }

    pub fn zero(field: &Field) -> PlanarVector {
        PlanarVector { x: field.zero(), y: field.zero() }
    }

    pub fn from_ints(field: &Field, x: i64, y: i64) -> PlanarVector {
        PlanarVector { x: field.from_i64(x), y: field.from_i64(y) }
    }

    pub fn field(&self) -> &Field {
        self.x.field()
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn scale(&self, s: &FieldElement) -> PlanarVector {
        PlanarVector { x: &self.x * s, y: &self.y * s }
    }

    pub fn dot(&self, o: &PlanarVector) -> FieldElement {
        &(&self.x * &o.x) + &(&self.y * &o.y)
    }

    /// The wedge `self ∧ o = self.x*o.y - self.y*o.x`.
    pub fn cross(&self, o: &PlanarVector) -> FieldElement {
        &(&self.x * &o.y) - &(&self.y * &o.x)
    }

    pub fn norm_sq(&self) -> FieldElement {
        self.dot(self)
    }

    /// Rotation by +90 degrees.
    pub fn perp(&self) -> PlanarVector {
        PlanarVector { x: -&self.y, y: self.x.clone() }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }

    pub fn in_field(&self, field: &Field) -> Result<PlanarVector, FieldError> {
        Ok(PlanarVector { x: embed(&self.x, field)?, y: embed(&self.y, field)? })
    }
}

/// Embeds a rational element into another field.
pub fn embed(e: &FieldElement, field: &Field) -> Result<FieldElement, FieldError> {
    if e.field == *field {
        return Ok(e.clone());
    }
    match e.to_rational() {
        Some(q) if e.field.is_rational_field() => Ok(field.from_rational(q)),
        _ => Err(FieldError::FieldMismatch),
    }
}

impl<'a> Add<&'a PlanarVector> for &'a PlanarVector {
    type Output = PlanarVector;
    fn add(self, o: &PlanarVector) -> PlanarVector {
        PlanarVector { x: &self.x + &o.x, y: &self.y + &o.y }
    }
}

impl<'a> Sub<&'a PlanarVector> for &'a PlanarVector {
    type Output = PlanarVector;
    fn sub(self, o: &PlanarVector) -> PlanarVector {
        PlanarVector { x: &self.x - &o.x, y: &self.y - &o.y }
    }
}

impl Neg for &PlanarVector {
    type Output = PlanarVector;
    fn neg(self) -> PlanarVector {
        PlanarVector { x: -&self.x, y: -&self.y }
    }
}

/// A 2x2 matrix `[[a, b], [c, d]]` acting on column vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
    pub d: FieldElement,
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl Mat2 {
    pub fn new(a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn identity(field: &Field) -> Mat2 {
        Mat2 { a: field.one(), b: field.zero(), c: field.zero(), d: field.one() }
    }

    pub fn from_ints(field: &Field, a: i64, b: i64, c: i64, d: i64) -> Mat2 {
        Mat2 { a: field.from_i64(a), b: field.from_i64(b), c: field.from_i64(c), d: field.from_i64(d) }
    }

    pub fn field(&self) -> &Field {
        self.a.field()
    }

    pub fn det(&self) -> FieldElement {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse_sl2(&self) -> Mat2 {
        Mat2 { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn neg(&self) -> Mat2 {
        Mat2 { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d }
    }

    pub fn apply(&self, v: &PlanarVector) -> PlanarVector {
        PlanarVector {
            x: &(&self.a * &v.x) + &(&self.b * &v.y),
            y: &(&self.c * &v.x) + &(&self.d * &v.y),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.a.coords()[0].is_one()
            && self.a.is_rational()
            && self.d.is_rational()
            && self.d.coords()[0].is_one()
            && self.b.is_zero()
            && self.c.is_zero()
    }

    pub fn max_abs_entry_f64(&self) -> f64 {
        [&self.a, &self.b, &self.c, &self.d].iter().map(|e| e.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [self.a.to_f64(), self.b.to_f64(), self.c.to_f64(), self.d.to_f64()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt2() -> Field {
        Field::new(&[-2, 0, 1], (rat_int(1), rat_int(2))).unwrap()
    }

    fn golden() -> Field {
        Field::new(&[-1, -1, 1], (rat_int(1), rat_int(2))).unwrap()
    }

    /// Independent bisection of the root followed by float evaluation; used
    /// as an oracle for interval results.
    fn bisect_root(poly: &[f64], mut lo: f64, mut hi: f64) -> f64 {
        let eval = |x: f64| poly.iter().rev().fold(0.0, |a, c| a * x + c);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (eval(mid) > 0.0) == (eval(lo) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn field_constructors() {
        let q = Field::new(&[0, 1], (rat_int(-5), rat_int(7))).unwrap();
        assert_eq!(q.degree(), 1);
        let f = sqrt2();
        assert_eq!(f.degree(), 2);
        assert!((f.root_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        let g = golden();
        assert!((g.root_f64() - 1.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn field_errors() {
        assert_eq!(Field::new(&[-2, 0, 2], (rat_int(1), rat_int(2))).unwrap_err(), FieldError::NotMonic);
        assert_eq!(Field::new(&[-2, 0, 1], (rat_int(2), rat_int(3))).unwrap_err(), FieldError::NoSignChange);
        // both roots of x^2 - 2 inside
        assert_eq!(Field::new(&[-2, 0, 1], (rat_int(-2), rat_int(2))).unwrap_err(), FieldError::NoSignChange);
        assert_eq!(Field::new(&[-1, 0, 1], (rat(1, 2), rat_int(2))).unwrap_err(), FieldError::Reducible);
        // (x^2 - 2)(x^2 - 3)
        assert_eq!(Field::new(&[6, 0, -5, 0, 1], (rat_int(1), rat(3, 2))).unwrap_err(), FieldError::Reducible);
        // (x^2 + x - 1)(x^2 - x - 1) = x^4 - 3x^2 + 1
        assert_eq!(Field::new(&[1, 0, -3, 0, 1], (rat(1, 2), rat_int(1))).unwrap_err(), FieldError::Reducible);
        assert!(Field::new(&[5, 0, -5, 0, 1], (rat(18, 10), rat_int(2))).is_ok());
        assert!(matches!(Field::new(&[1, 0, 0, 0, 0, 1], (rat_int(-2), rat_int(0))), Err(FieldError::UnsupportedDegree(5))));
    }

    #[test]
    fn arithmetic_examples() {
        let f = sqrt2();
        let r = f.generator();
        assert_eq!(&r * &r, f.from_i64(2));
        let x = &f.one() + &r;
        let inv = x.inverse().unwrap();
        assert_eq!(&inv * &x, f.one());
        assert_eq!(inv, &r - &f.one());
        let g = golden();
        let phi = g.generator();
        assert_eq!(&phi * &phi, &phi + &g.one());
        assert_eq!(f.zero().inverse().unwrap_err(), FieldError::DivisionByZero);
        assert_eq!(r.try_add(&phi).unwrap_err(), FieldError::FieldMismatch);
    }

    #[test]
    fn sign_examples() {
        let f = sqrt2();
        assert_eq!(f.zero().sign(), 0);
        assert_eq!((&f.one() - &f.generator()).sign(), -1);
        let g = golden();
        let e = &g.from_i64(3) - &(&g.from_i64(2) * &g.generator());
        let oracle = 3.0 - 2.0 * bisect_root(&[-1.0, -1.0, 1.0], 1.0, 2.0);
        assert!(oracle < 0.0);
        assert_eq!(e.sign(), -1);
        assert_eq!(e.sign_exact(), -1);
    }

    #[test]
    fn sign_of_tiny_differences_is_exact() {
        // 99/70 is a convergent of sqrt(2): difference about 7e-5; and
        // 665857/470832 differs by about 1.6e-12.
        let f = sqrt2();
        let a = &f.generator() - &f.from_rational(rat(665857, 470832));
        assert_eq!(a.sign(), -1);
        assert_eq!(a.sign_exact(), -1);
        let b = &f.generator() - &f.from_rational(rat(1393, 985));
        assert_eq!(b.sign_exact(), 1);
    }

    #[test]
    fn approx_examples() {
        let f = sqrt2();
        let (lo, hi) = f.generator().approx(20);
        assert!(&hi - &lo <= rat(1, 1 << 20));
        let oracle = bisect_root(&[-2.0, 0.0, 1.0], 1.0, 2.0);
        assert!(lo.to_f64().unwrap() <= oracle + 1e-15 && oracle - 1e-15 <= hi.to_f64().unwrap());
        assert!((lo.to_f64().unwrap() - 1.41421356).abs() < 1e-8);
        let q = f.from_rational(rat(3, 4));
        assert_eq!(q.approx(50), (rat(3, 4), rat(3, 4)));
        let g = golden();
        let (lo, hi) = g.generator().approx(10);
        assert!(&hi - &lo <= rat(1, 1024));
        let phi = bisect_root(&[-1.0, -1.0, 1.0], 1.0, 2.0);
        assert!(lo.to_f64().unwrap() <= phi + 1e-15 && phi - 1e-15 <= hi.to_f64().unwrap());
    }

    #[test]
    fn literals_round_trip() {
        let f = Field::new(&[5, 0, -5, 0, 1], (rat(18, 10), rat_int(2))).unwrap();
        for lit in ["0", "1/2", "-r", "1/2 - 3*r + r^2", "-7/3*r^3 + 2", "r^2 - 5/2"] {
            let e = f.parse(lit).unwrap();
            let back = f.parse(&e.to_string()).unwrap();
            assert_eq!(e, back, "{lit}");
        }
        assert_eq!(f.parse("1/2 - 3*r + r^2").unwrap().to_string(), "1/2 - 3*r + r^2");
        assert_eq!(f.parse("r^4").unwrap(), f.parse("5*r^2 - 5").unwrap());
        assert_eq!(f.parse("0.25").unwrap(), f.from_ratio(1, 4));
        assert!(f.parse("1 + ").is_err());
        assert!(f.parse("x").is_err());
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("-0.125"), Some(rat(-1, 8)));
        assert_eq!(parse_rational("3/6"), Some(rat(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("12"), Some(rat_int(12)));
    }
}
