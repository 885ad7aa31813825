//! Exact fields: prime fields GF(p), small extensions GF(p^k) presented as
//! polynomial quotients, and the rationals.
//!
//! Arithmetic lives on the field value rather than on the element, so that
//! finite-field elements can stay plain `u32` codes inside hot loops. The code
//! of an extension element is its coefficient vector read as base-`p` digits,
//! lowest coefficient first; prime-field codes are the residues themselves.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Largest extension degree accepted.
pub const MAX_EXTENSION_DEGREE: u32 = 4;
/// Largest characteristic accepted for a proper extension.
pub const MAX_EXTENSION_PRIME: u32 = 31;

/// An exact field. Elements are plain values; every operation goes through the
/// field so that the same element type can serve several fields of one kind.
pub trait Field: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    type Elem: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    /// Image of an integer under the canonical ring map.
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Number of elements, `None` when infinite.
    fn order(&self) -> Option<u64>;

    /// The element with the given enumeration index (finite fields only).
    fn element(&self, index: u64) -> Option<Self::Elem>;

    /// Enumeration index of an element (finite fields only).
    fn index_of(&self, a: &Self::Elem) -> Option<u64>;

    /// Image of a rational number, if its denominator is invertible here.
    fn from_rational(&self, r: &BigRational) -> Option<Self::Elem>;

    /// The element as a rational number, when the field is `Q`.
    fn to_rational(&self, _a: &Self::Elem) -> Option<BigRational> {
        None
    }

    fn spec(&self) -> FieldSpec;

    fn elem_to_json(&self, a: &Self::Elem) -> Value;
    fn elem_from_json(&self, v: &Value) -> Result<Self::Elem>;
    fn fmt_elem(&self, a: &Self::Elem) -> String;

    /// In-place reduced row echelon form of a row-major `rows × cols` block.
    /// Returns the pivot columns in increasing order. Pivots are taken as the
    /// first nonzero entry, scanning columns left to right.
    fn rref(&self, data: &mut [Self::Elem], rows: usize, cols: usize) -> Vec<usize> {
        gauss_jordan(self, data, rows, cols)
    }

    /// Rank of a row-major block; destroys its contents.
    fn rank_in_place(&self, data: &mut [Self::Elem], rows: usize, cols: usize) -> usize {
        forward_eliminate(self, data, rows, cols)
    }
}

pub(crate) fn gauss_jordan<F: Field>(
    f: &F,
    data: &mut [F::Elem],
    rows: usize,
    cols: usize,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(i) = (r..rows).find(|&i| !f.is_zero(&data[i * cols + c])) else {
            continue;
        };
        swap_rows(data, cols, i, r);
        let inv = f.inv(&data[r * cols + c]).expect("pivot is nonzero");
        for j in c..cols {
            data[r * cols + j] = f.mul(&data[r * cols + j], &inv);
        }
        for i in 0..rows {
            if i == r || f.is_zero(&data[i * cols + c]) {
                continue;
            }
            let factor = data[i * cols + c].clone();
            for j in c..cols {
                let t = f.mul(&factor, &data[r * cols + j]);
                data[i * cols + j] = f.sub(&data[i * cols + j], &t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub(crate) fn forward_eliminate<F: Field>(
    f: &F,
    data: &mut [F::Elem],
    rows: usize,
    cols: usize,
) -> usize {
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(i) = (r..rows).find(|&i| !f.is_zero(&data[i * cols + c])) else {
            continue;
        };
        swap_rows(data, cols, i, r);
        let inv = f.inv(&data[r * cols + c]).expect("pivot is nonzero");
        for i in r + 1..rows {
            if f.is_zero(&data[i * cols + c]) {
                continue;
            }
            let factor = f.mul(&data[i * cols + c], &inv);
            for j in c..cols {
                let t = f.mul(&factor, &data[r * cols + j]);
                data[i * cols + j] = f.sub(&data[i * cols + j], &t);
            }
        }
        r += 1;
    }
    r
}

fn swap_rows<T>(data: &mut [T], cols: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let (head, tail) = data.split_at_mut(hi * cols);
    head[lo * cols..(lo + 1) * cols].swap_with_slice(&mut tail[..cols]);
}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

// ---------------------------------------------------------------------------
// Rationals

/// The field of rational numbers with arbitrary-precision numerators and
/// denominators. `BigRational` keeps values in lowest terms with a positive
/// denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rationals;

impl fmt::Display for Rationals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("qq")
    }
}

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Result<BigRational> {
        if a.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn order(&self) -> Option<u64> {
        None
    }
    fn element(&self, _index: u64) -> Option<BigRational> {
        None
    }
    fn index_of(&self, _a: &BigRational) -> Option<u64> {
        None
    }
    fn from_rational(&self, r: &BigRational) -> Option<BigRational> {
        Some(r.clone())
    }
    fn to_rational(&self, a: &BigRational) -> Option<BigRational> {
        Some(a.clone())
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::Rationals(Rationals)
    }

    fn elem_to_json(&self, a: &BigRational) -> Value {
        if a.is_integer() {
            if let Some(v) = a.numer().to_i64() {
                return Value::from(v);
            }
        }
        Value::from(self.fmt_elem(a))
    }

    fn elem_from_json(&self, v: &Value) -> Result<BigRational> {
        match v {
            Value::Number(n) => n
                .as_i64()
                .map(|i| self.from_i64(i))
                .ok_or_else(|| Error::Parse(format!("rational entry {n} is not an integer"))),
            Value::String(s) => parse_rational(s),
            other => Err(Error::Parse(format!("bad rational entry {other}"))),
        }
    }

    fn fmt_elem(&self, a: &BigRational) -> String {
        if a.is_integer() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }

    /// Fraction-free Gauss–Jordan: rows are cleared to integers, updated by
    /// cross-multiplication with the row content divided out after each step,
    /// and only the final pass divides by the pivots.
    fn rref(&self, data: &mut [BigRational], rows: usize, cols: usize) -> Vec<usize> {
        let mut ints = integer_rows(data, rows, cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(i) = (r..rows).find(|&i| !ints[i][c].is_zero()) else {
                continue;
            };
            ints.swap(i, r);
            for i in 0..rows {
                if i != r && !ints[i][c].is_zero() {
                    let (pivot_row, row) = pick_two(&mut ints, r, i);
                    cross_eliminate(row, pivot_row, c);
                }
            }
            pivots.push(c);
            r += 1;
        }
        for (i, row) in ints.iter().enumerate() {
            let denom = pivots
                .get(i)
                .map(|&c| row[c].clone())
                .unwrap_or_else(BigInt::one);
            for (j, v) in row.iter().enumerate() {
                data[i * cols + j] = BigRational::new(v.clone(), denom.clone());
            }
        }
        pivots
    }

    fn rank_in_place(&self, data: &mut [BigRational], rows: usize, cols: usize) -> usize {
        let mut ints = integer_rows(data, rows, cols);
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(i) = (r..rows).find(|&i| !ints[i][c].is_zero()) else {
                continue;
            };
            ints.swap(i, r);
            for i in r + 1..rows {
                if !ints[i][c].is_zero() {
                    let (pivot_row, row) = pick_two(&mut ints, r, i);
                    cross_eliminate(row, pivot_row, c);
                }
            }
            r += 1;
        }
        r
    }
}

fn integer_rows(data: &[BigRational], rows: usize, cols: usize) -> Vec<Vec<BigInt>> {
    (0..rows)
        .map(|i| {
            let row = &data[i * cols..(i + 1) * cols];
            let lcm = row
                .iter()
                .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            row.iter()
                .map(|v| v.numer() * (&lcm / v.denom()))
                .collect()
        })
        .collect()
}

fn pick_two<T>(v: &mut [T], a: usize, b: usize) -> (&T, &mut T) {
    debug_assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

/// `row ← p·row − row[c]·pivot_row`, then strip the content of `row`.
fn cross_eliminate(row: &mut [BigInt], pivot_row: &[BigInt], c: usize) {
    let p = pivot_row[c].clone();
    let f = row[c].clone();
    let mut content = BigInt::zero();
    for (x, y) in row.iter_mut().zip(pivot_row) {
        *x = &p * &*x - &f * y;
        content = content.gcd(x);
    }
    if !content.is_zero() && !content.is_one() {
        for x in row.iter_mut() {
            *x = &*x / &content;
        }
    }
}

/// Parses `"a"`, `"-a"` or `"a/b"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational literal {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(num, den))
}

// ---------------------------------------------------------------------------
// Finite fields

#[derive(Debug)]
struct FiniteInner {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus, low to high, length k+1. `[0, 1]` for prime fields.
    modulus: Vec<u32>,
    /// Full operation tables for small proper extensions.
    tables: Option<Tables>,
}

#[derive(Debug)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

const TABLE_LIMIT: u32 = 256;

/// GF(p) or GF(p^k) = GF(p)[x]/(f). Elements are codes in `[0, q)`.
#[derive(Clone, Debug)]
pub struct FiniteField(Arc<FiniteInner>);

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.k == other.0.k && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FiniteField {}

impl FiniteField {
    /// The prime field GF(p), `p < 2^31`.
    pub fn prime(p: u64) -> Result<Self> {
        if p >= 1 << 31 {
            return Err(Error::UnsupportedField(format!("prime {p} is not below 2^31")));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let p = p as u32;
        Ok(FiniteField(Arc::new(FiniteInner {
            p,
            k: 1,
            q: p,
            modulus: vec![0, 1],
            tables: None,
        })))
    }

    /// GF(p^k) with the given monic irreducible modulus (low to high).
    pub fn extension(p: u64, modulus: &[u32]) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if modulus.len() < 2 {
            return Err(Error::Parse("modulus must have degree at least 1".into()));
        }
        let k = (modulus.len() - 1) as u32;
        if k == 1 {
            return Self::prime(p);
        }
        if k > MAX_EXTENSION_DEGREE {
            return Err(Error::UnsupportedDegree(k));
        }
        if p > u64::from(MAX_EXTENSION_PRIME) {
            return Err(Error::UnsupportedField(format!(
                "extensions need p <= {MAX_EXTENSION_PRIME}, got {p}"
            )));
        }
        let p = p as u32;
        if let Some(&c) = modulus.iter().find(|&&c| c >= p) {
            return Err(Error::Parse(format!("modulus coefficient {c} is not reduced mod {p}")));
        }
        if modulus[k as usize] != 1 {
            return Err(Error::Parse("modulus must be monic".into()));
        }
        if !is_irreducible(modulus, p) {
            return Err(Error::ReducibleModulus(modulus.to_vec(), p));
        }
        let q = p.pow(k);
        let mut inner = FiniteInner {
            p,
            k,
            q,
            modulus: modulus.to_vec(),
            tables: None,
        };
        if q <= TABLE_LIMIT {
            inner.tables = Some(build_tables(&inner));
        }
        Ok(FiniteField(Arc::new(inner)))
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.k
    }

    pub fn size(&self) -> u32 {
        self.0.q
    }

    /// Modulus coefficients, low to high (`[0, 1]` for a prime field).
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// Coefficient vector (low to high) of an element.
    pub fn coeffs(&self, a: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.0.k as usize);
        let mut a = a;
        for _ in 0..self.0.k {
            out.push(a % self.0.p);
            a /= self.0.p;
        }
        out
    }

    /// Element with the given coefficients (low to high); coefficients are
    /// reduced mod p, missing ones are zero.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<u32> {
        if coeffs.len() > self.0.k as usize {
            return Err(Error::Parse(format!(
                "element has {} coefficients, field degree is {}",
                coeffs.len(),
                self.0.k
            )));
        }
        let p = i64::from(self.0.p);
        let mut code = 0u32;
        for &c in coeffs.iter().rev() {
            code = code * self.0.p + c.rem_euclid(p) as u32;
        }
        Ok(code)
    }

    /// The class of `x` in GF(p)[x]/(f), a root of the modulus. `None` for
    /// prime fields.
    pub fn generator(&self) -> Option<u32> {
        (self.0.k > 1).then_some(self.0.p)
    }

    #[inline]
    fn add_raw(&self, a: u32, b: u32) -> u32 {
        let inner = &*self.0;
        if inner.k == 1 {
            let s = a + b;
            if s >= inner.p {
                s - inner.p
            } else {
                s
            }
        } else if let Some(t) = &inner.tables {
            t.add[(a * inner.q + b) as usize]
        } else {
            digitwise(inner, a, b, |x, y| (x + y) % inner.p)
        }
    }

    #[inline]
    fn neg_raw(&self, a: u32) -> u32 {
        let inner = &*self.0;
        if inner.k == 1 {
            if a == 0 {
                0
            } else {
                inner.p - a
            }
        } else if let Some(t) = &inner.tables {
            t.neg[a as usize]
        } else {
            digitwise(inner, a, 0, |x, _| (inner.p - x) % inner.p)
        }
    }

    #[inline]
    fn mul_raw(&self, a: u32, b: u32) -> u32 {
        let inner = &*self.0;
        if inner.k == 1 {
            ((u64::from(a) * u64::from(b)) % u64::from(inner.p)) as u32
        } else if let Some(t) = &inner.tables {
            t.mul[(a * inner.q + b) as usize]
        } else {
            poly_mul_mod(inner, a, b)
        }
    }

    fn inv_raw(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let inner = &*self.0;
        if inner.k == 1 {
            Ok(inv_mod(a, inner.p))
        } else if let Some(t) = &inner.tables {
            Ok(t.inv[a as usize])
        } else {
            Ok(self.pow(&a, u64::from(inner.q) - 2))
        }
    }
}

fn digitwise(inner: &FiniteInner, a: u32, b: u32, op: impl Fn(u32, u32) -> u32) -> u32 {
    let (mut a, mut b) = (a, b);
    let mut out = 0;
    let mut place = 1;
    for _ in 0..inner.k {
        out += op(a % inner.p, b % inner.p) * place;
        a /= inner.p;
        b /= inner.p;
        place *= inner.p;
    }
    out
}

fn poly_mul_mod(inner: &FiniteInner, a: u32, b: u32) -> u32 {
    let k = inner.k as usize;
    let p = u64::from(inner.p);
    let (mut da, mut db) = ([0u64; 4], [0u64; 4]);
    let (mut x, mut y) = (a, b);
    for i in 0..k {
        da[i] = u64::from(x % inner.p);
        db[i] = u64::from(y % inner.p);
        x /= inner.p;
        y /= inner.p;
    }
    let mut prod = [0u64; 7];
    for i in 0..k {
        for j in 0..k {
            prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
        }
    }
    for d in (k..2 * k - 1).rev() {
        let t = prod[d];
        if t == 0 {
            continue;
        }
        prod[d] = 0;
        for j in 0..k {
            let m = u64::from(inner.modulus[j]);
            prod[d - k + j] = (prod[d - k + j] + (p - t) * m) % p;
        }
    }
    let mut out = 0u64;
    for i in (0..k).rev() {
        out = out * p + prod[i];
    }
    out as u32
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut old_r, mut r) = (i64::from(a), i64::from(p));
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(i64::from(p)) as u32
}

fn build_tables(inner: &FiniteInner) -> Tables {
    let q = inner.q as usize;
    let mut add = vec![0; q * q];
    let mut mul = vec![0; q * q];
    let mut neg = vec![0; q];
    let mut inv = vec![0; q];
    for a in 0..inner.q {
        neg[a as usize] = digitwise(inner, a, 0, |x, _| (inner.p - x) % inner.p);
        for b in 0..inner.q {
            let idx = a as usize * q + b as usize;
            add[idx] = digitwise(inner, a, b, |x, y| (x + y) % inner.p);
            mul[idx] = poly_mul_mod(inner, a, b);
            if mul[idx] == 1 {
                inv[a as usize] = b;
            }
        }
    }
    Tables { add, mul, neg, inv }
}

/// Remainder of `num` modulo the monic `den` over GF(p); both low to high.
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = num.iter().map(|&c| u64::from(c)).collect();
    let dd = den.len() - 1;
    let p64 = u64::from(p);
    while r.len() > dd {
        let t = r.pop().unwrap_or(0);
        if t != 0 {
            let base = r.len() - dd;
            for (j, &c) in den[..dd].iter().enumerate() {
                r[base + j] = (r[base + j] + (p64 - t) * u64::from(c)) % p64;
            }
        }
    }
    r.into_iter().map(|c| c as u32).collect()
}

/// Irreducibility by exhaustive search for a monic divisor of degree at most
/// `deg/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let k = modulus.len() - 1;
    for d in 1..=k / 2 {
        let count = u64::from(p).pow(d as u32);
        for code in 0..count {
            let mut div = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                div.push((c % u64::from(p)) as u32);
                c /= u64::from(p);
            }
            div.push(1);
            if poly_rem(modulus, &div, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.k == 1 {
            write!(f, "gf({})", self.0.p)
        } else {
            write!(f, "gf({}^{}):", self.0.p, self.0.k)?;
            let coeffs: Vec<String> = self.0.modulus.iter().map(u32::to_string).collect();
            f.write_str(&coeffs.join(","))
        }
    }
}

impl Field for FiniteField {
    type Elem = u32;

    #[inline]
    fn zero(&self) -> u32 {
        0
    }
    #[inline]
    fn one(&self) -> u32 {
        1
    }
    fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(i64::from(self.0.p)) as u32
    }
    #[inline]
    fn add(&self, a: &u32, b: &u32) -> u32 {
        self.add_raw(*a, *b)
    }
    #[inline]
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        self.add_raw(*a, self.neg_raw(*b))
    }
    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        self.mul_raw(*a, *b)
    }
    #[inline]
    fn neg(&self, a: &u32) -> u32 {
        self.neg_raw(*a)
    }
    fn inv(&self, a: &u32) -> Result<u32> {
        self.inv_raw(*a)
    }
    #[inline]
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn order(&self) -> Option<u64> {
        Some(u64::from(self.0.q))
    }
    fn element(&self, index: u64) -> Option<u32> {
        (index < u64::from(self.0.q)).then_some(index as u32)
    }
    fn index_of(&self, a: &u32) -> Option<u64> {
        Some(u64::from(*a))
    }
    fn from_rational(&self, r: &BigRational) -> Option<u32> {
        let p = BigInt::from(self.0.p);
        let num = r.numer().mod_floor(&p).to_i64()?;
        let den = r.denom().mod_floor(&p).to_u32()?;
        if den == 0 {
            return None;
        }
        Some(self.mul_raw(self.from_i64(num), inv_mod(den, self.0.p)))
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::Finite(self.clone())
    }

    fn elem_to_json(&self, a: &u32) -> Value {
        if self.0.k == 1 {
            Value::from(*a)
        } else {
            Value::from(self.coeffs(*a))
        }
    }

    fn elem_from_json(&self, v: &Value) -> Result<u32> {
        match v {
            Value::Number(n) => n
                .as_i64()
                .map(|i| self.from_i64(i))
                .ok_or_else(|| Error::Parse(format!("finite-field entry {n} is not an integer"))),
            Value::Array(items) => {
                let coeffs = items
                    .iter()
                    .map(|c| {
                        c.as_i64()
                            .ok_or_else(|| Error::Parse(format!("bad coefficient {c}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.from_coeffs(&coeffs)
            }
            other => Err(Error::Parse(format!("bad finite-field entry {other}"))),
        }
    }

    fn fmt_elem(&self, a: &u32) -> String {
        if self.0.k == 1 {
            a.to_string()
        } else {
            let terms: Vec<String> = self
                .coeffs(*a)
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| match i {
                    0 => c.to_string(),
                    1 if c == 1 => "x".to_string(),
                    1 => format!("{c}x"),
                    _ if c == 1 => format!("x^{i}"),
                    _ => format!("{c}x^{i}"),
                })
                .collect();
            if terms.is_empty() {
                "0".into()
            } else {
                terms.join("+")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Field specs

/// A parsed field description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldSpec {
    Rationals(Rationals),
    Finite(FiniteField),
}

impl FieldSpec {
    /// Parses the field-spec grammar:
    /// `qq` | `gf(p)` | `gf(p^k)[:c0,...,ck]` | `gf(q)[:c0,...,ck]`,
    /// case-insensitive. `gf(9)` alone means `gf(3^2):1,0,1`.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim().to_ascii_lowercase();
        if s == "qq" {
            return Ok(FieldSpec::Rationals(Rationals));
        }
        let bad = || Error::Parse(format!("bad field spec {text:?}; expected qq | gf(p) | gf(p^k)[:c0,...,ck]"));
        let rest = s.strip_prefix("gf(").ok_or_else(bad)?;
        let (inside, tail) = rest.split_once(')').ok_or_else(bad)?;
        let modulus = match tail {
            "" => None,
            t => {
                let list = t.strip_prefix(':').ok_or_else(bad)?;
                let coeffs = list
                    .split(',')
                    .map(|c| c.trim().parse::<u32>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Some(coeffs)
            }
        };
        let (p, k) = match inside.split_once('^') {
            Some((p, k)) => {
                let p: u64 = p.trim().parse().map_err(|_| bad())?;
                let k: u32 = k.trim().parse().map_err(|_| bad())?;
                if !is_prime(p) {
                    return Err(Error::NotPrime(p));
                }
                if k == 0 {
                    return Err(bad());
                }
                (p, k)
            }
            None => {
                let q: u64 = inside.trim().parse().map_err(|_| bad())?;
                prime_power(q).ok_or(Error::NotPrime(q))?
            }
        };
        if k == 1 {
            if modulus.is_some() {
                return Err(Error::Parse(format!(
                    "prime field gf({p}) takes no modulus"
                )));
            }
            return FiniteField::prime(p).map(FieldSpec::Finite);
        }
        if k > MAX_EXTENSION_DEGREE {
            return Err(Error::UnsupportedDegree(k));
        }
        let modulus = match modulus {
            Some(m) => m,
            None if p == 3 && k == 2 => vec![1, 0, 1],
            None => {
                return Err(Error::Parse(format!(
                    "gf({p}^{k}) needs an explicit modulus"
                )))
            }
        };
        if modulus.len() != k as usize + 1 {
            return Err(Error::Parse(format!(
                "modulus for degree {k} needs {} coefficients, got {}",
                k + 1,
                modulus.len()
            )));
        }
        FiniteField::extension(p, &modulus).map(FieldSpec::Finite)
    }
}

/// Splits `q = p^k` with `p` prime.
fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut k = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

impl FromStr for FieldSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FieldSpec::parse(s)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals(q) => q.fmt(f),
            FieldSpec::Finite(ff) => ff.fmt(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(s: &str) -> FiniteField {
        match FieldSpec::parse(s).unwrap() {
            FieldSpec::Finite(f) => f,
            FieldSpec::Rationals(_) => panic!("expected a finite field"),
        }
    }

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_grammar_terminals() {
        assert_eq!(FieldSpec::parse("qq").unwrap(), FieldSpec::Rationals(Rationals));
        assert_eq!(FieldSpec::parse("QQ").unwrap(), FieldSpec::Rationals(Rationals));
        let f = gf("gf(3)");
        assert_eq!((f.characteristic(), f.degree(), f.size()), (3, 1, 3));
        let f = gf("GF(5^1)");
        assert_eq!(f.size(), 5);
    }

    #[test]
    fn gf9_sugar_matches_explicit_modulus() {
        let sugar = gf("gf(9)");
        assert_eq!(sugar, gf("gf(3^2):1,0,1"));
        assert_eq!(sugar, gf("gf(9):1,0,1"));
        assert_eq!(sugar.to_string(), "gf(3^2):1,0,1");
        assert_eq!(gf("gf(3^2)"), sugar);
    }

    #[test]
    fn x2_plus_1_has_no_root_mod_3() {
        // x in {0,1,2}: x^2+1 in {1,2,2}
        for x in 0u32..3 {
            assert_ne!((x * x + 1) % 3, 0);
        }
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[1, 0, 1], 5)); // 2^2 + 1 = 5
    }

    #[test]
    fn field_spec_errors() {
        assert!(matches!(FieldSpec::parse("gf(4)"), Err(Error::Parse(_))));
        assert!(matches!(FieldSpec::parse("gf(6)"), Err(Error::NotPrime(6))));
        assert!(matches!(FieldSpec::parse("gf(4^2):1,0,1"), Err(Error::NotPrime(4))));
        assert!(matches!(
            FieldSpec::parse("gf(5^2):1,0,1"),
            Err(Error::ReducibleModulus(_, 5))
        ));
        assert!(matches!(
            FieldSpec::parse("gf(2^5):1,0,1,0,0,1"),
            Err(Error::UnsupportedDegree(5))
        ));
        assert!(matches!(FieldSpec::parse("gf(3^2):1,0,2"), Err(Error::Parse(_))));
        assert!(matches!(FieldSpec::parse("gf(3^2):1,1"), Err(Error::Parse(_))));
        assert!(matches!(FieldSpec::parse("gf(3):1,1"), Err(Error::Parse(_))));
        assert!(matches!(FieldSpec::parse("rr"), Err(Error::Parse(_))));
        assert!(matches!(FieldSpec::parse("gf(37^2):2,0,1"), Err(Error::UnsupportedField(_))));
    }

    #[test]
    fn display_round_trips() {
        for s in ["qq", "gf(2)", "gf(7)", "gf(3^2):1,0,1", "gf(2^3):1,1,0,1", "gf(2^4):1,1,0,0,1"] {
            let spec = FieldSpec::parse(s).unwrap();
            assert_eq!(FieldSpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }

    #[test]
    fn small_arithmetic_examples() {
        let f = gf("gf(3)");
        assert_eq!(f.mul(&2, &2), 1);
        let r = Rationals;
        assert_eq!(r.add(&q("1/3"), &q("1/6")), q("1/2"));
        let g = gf("gf(9)");
        let x = g.generator().unwrap();
        assert_eq!(g.coeffs(g.mul(&x, &x)), vec![2, 0]);
        assert_eq!(g.mul(&x, &x), g.neg(&g.one()));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(gf("gf(7)").inv(&0), Err(Error::DivisionByZero));
        assert_eq!(Rationals.inv(&q("0")), Err(Error::DivisionByZero));
        assert_eq!(gf("gf(2^3):1,1,0,1").div(&3, &0), Err(Error::DivisionByZero));
    }

    #[test]
    fn rational_literals_normalize() {
        assert_eq!(q("2/4"), q("1/2"));
        assert_eq!(q("3/-6"), q("-1/2"));
        assert!(q("3/-6").denom() > &BigInt::zero());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn multiplicative_group_orders() {
        let specs = [
            "gf(2)", "gf(3)", "gf(5)", "gf(7)", "gf(9)", "gf(2^2):1,1,1",
            "gf(2^3):1,1,0,1", "gf(2^4):1,1,0,0,1", "gf(3^3):1,2,0,1", "gf(5^2):2,0,1",
            "gf(3^4):2,0,0,1,1",
        ];
        for s in specs {
            let f = gf(s);
            let q = u64::from(f.size());
            assert!(q <= 81);
            let all: std::collections::HashSet<u32> = (0..q).map(|i| f.element(i).unwrap()).collect();
            assert_eq!(all.len() as u64, q, "{s}");
            for a in 1..q as u32 {
                assert_eq!(f.pow(&a, q - 1), 1, "{s}: a={a}");
                assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), 1);
            }
        }
    }

    #[test]
    fn tables_agree_with_polynomial_arithmetic() {
        // 2^8 uses tables; compare against the raw polynomial routines
        let f = gf("gf(2^4):1,1,0,0,1");
        assert!(f.0.tables.is_some());
        for a in 0..16 {
            for b in 0..16 {
                assert_eq!(f.mul(&a, &b), poly_mul_mod(&f.0, a, b));
            }
        }
        let big = FiniteField::extension(31, &[1, 0, 1]).unwrap();
        assert!(big.0.tables.is_none());
        for a in [0u32, 1, 5, 31, 600, 960] {
            if a != 0 {
                assert_eq!(big.mul(&a, &big.inv(&a).unwrap()), 1);
            }
            assert_eq!(big.add(&a, &big.neg(&a)), 0);
        }
    }

    #[test]
    fn rational_reduction_into_finite_fields() {
        let f = gf("gf(7)");
        assert_eq!(f.from_rational(&q("1/2")), Some(4));
        assert_eq!(f.from_rational(&q("-3")), Some(4));
        assert_eq!(f.from_rational(&q("1/7")), None);
    }

    #[test]
    fn json_entries() {
        let g = gf("gf(9)");
        let i = g.elem_from_json(&serde_json::json!([0, 1])).unwrap();
        assert_eq!(Some(i), g.generator());
        assert_eq!(g.elem_to_json(&i), serde_json::json!([0, 1]));
        assert_eq!(g.elem_from_json(&serde_json::json!(-1)).unwrap(), 2);
        let r = Rationals;
        assert_eq!(r.elem_from_json(&serde_json::json!("-4/6")).unwrap(), q("-2/3"));
        assert_eq!(r.elem_to_json(&q("-2/3")), serde_json::json!("-2/3"));
        assert_eq!(r.elem_to_json(&q("5")), serde_json::json!(5));
    }

    fn field_strategy() -> impl Strategy<Value = FiniteField> {
        prop::sample::select(vec![
            "gf(2)", "gf(3)", "gf(13)", "gf(2147483647)", "gf(9)", "gf(2^3):1,1,0,1",
            "gf(31^2):1,0,1", "gf(5^3):2,3,0,1",
        ])
        .prop_map(gf)
    }

    proptest! {
        #[test]
        fn finite_field_axioms(f in field_strategy(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let qn = f.size();
            let (a, b, c) = (a % qn, b % qn, c % qn);
            prop_assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
            prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
            prop_assert_eq!(f.add(&a, &b), f.add(&b, &a));
            prop_assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
            prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
            prop_assert_eq!(f.sub(&f.add(&a, &b), &b), a);
            if a != 0 {
                prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), 1);
            }
        }

        #[test]
        fn rational_field_axioms(n in prop::array::uniform5(any::<i64>()), d in prop::array::uniform3(1i64..)) {
            let r = Rationals;
            let mk = |num: i64, den: i64| BigRational::new(BigInt::from(num), BigInt::from(den));
            let a = mk(n[0], d[0]);
            let b = mk(n[1], d[1]);
            let c = mk(n[2], d[2]);
            prop_assert_eq!(r.sub(&r.add(&a, &b), &b), a.clone());
            prop_assert_eq!(r.mul(&a, &r.add(&b, &c)), r.add(&r.mul(&a, &b), &r.mul(&a, &c)));
            prop_assert_eq!(r.mul(&r.mul(&a, &b), &c), r.mul(&a, &r.mul(&b, &c)));
            if !a.is_zero() {
                prop_assert!(r.is_one(&r.mul(&a, &r.inv(&a).unwrap())));
            }
            let x = mk(n[3], 1);
            let y = mk(n[4], 1);
            prop_assert_eq!(r.sub(&r.add(&x, &y), &y), x);
        }
    }
}
