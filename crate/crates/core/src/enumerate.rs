//! Enumeration helpers over finite fields: element lists, coefficient
//! tuples and canonical projective representatives.

use crate::error::{Error, Result};
use crate::field::Field;

/// All elements of a finite field in index order.
pub fn elements<F: Field>(field: &F) -> Result<Vec<F::Elem>> {
    let q = field.order().ok_or(Error::InfiniteField)?;
    Ok((0..q).map(|i| field.element(i).expect("index below order")).collect())
}

/// `q^e`, or `None` on overflow.
pub fn checked_pow(q: u64, e: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(q)?;
    }
    Some(acc)
}

/// Number of points of the projective space of dimension `m − 1` over GF(q).
pub fn projective_count(q: u64, m: usize) -> Option<u64> {
    if m == 0 {
        return Some(0);
    }
    Some((checked_pow(q, m as u64)? - 1) / (q - 1))
}

/// The `idx`-th normalized vector (first nonzero coordinate equal to one) of
/// length `m`, in lexicographic order of element indices. Vectors with more
/// leading zeros come first.
pub fn projective_point<E: Clone>(elems: &[E], m: usize, mut idx: u64) -> Vec<E> {
    let q = elems.len() as u64;
    for lead in (0..m).rev() {
        let tail_len = m - lead - 1;
        let block = checked_pow(q, tail_len as u64).expect("caller checked the count");
        if idx < block {
            let mut v = Vec::with_capacity(m);
            v.extend(std::iter::repeat_n(elems[0].clone(), lead));
            v.push(elems[1].clone());
            let mut digits = vec![0u64; tail_len];
            for d in digits.iter_mut().rev() {
                *d = idx % q;
                idx /= q;
            }
            v.extend(digits.into_iter().map(|d| elems[d as usize].clone()));
            return v;
        }
        idx -= block;
    }
    panic!("projective index out of range")
}

/// Scales a vector so its first nonzero coordinate is one; `None` for zero.
pub fn normalize<F: Field>(field: &F, v: &[F::Elem]) -> Option<Vec<F::Elem>> {
    let lead = v.iter().find(|x| !field.is_zero(x))?;
    let inv = field.inv(lead).ok()?;
    Some(v.iter().map(|x| field.mul(x, &inv)).collect())
}

pub fn is_normalized<F: Field>(field: &F, v: &[F::Elem]) -> bool {
    v.iter().find(|x| !field.is_zero(x)).is_some_and(|x| field.is_one(x))
}

/// Little-endian base-`q` digits of `code`, `len` of them.
pub fn digits(mut code: u64, q: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(code % q);
        code /= q;
    }
    out
}
