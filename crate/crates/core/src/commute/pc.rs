//! Polynomial-commuting certificates: coefficient vectors `c`, `d` with
//! `[p(A), q(B)] = 0` for `p = Σ c_i x^i`, `q = Σ d_j x^j`, `1 ≤ i, j ≤ n−1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{derogatory, is_scalar, same_pair};
use crate::enumerate::{elements, is_normalized, normalize, projective_count, projective_point};
use crate::error::{Error, Result};
use crate::field::{Field, FiniteField, Rationals};
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct PcCertificate<F: Field> {
    pub cs: Vec<F::Elem>,
    pub ds: Vec<F::Elem>,
    pub pa_scalar: bool,
    pub qb_scalar: bool,
}

impl<F: Field> PcCertificate<F> {
    pub fn nonscalar(&self) -> bool {
        !self.pa_scalar && !self.qb_scalar
    }

    /// `p(A)` and `q(B)`.
    pub fn evaluate(&self, a: &Matrix<F>, b: &Matrix<F>) -> Result<(Matrix<F>, Matrix<F>)> {
        Ok((eval_no_constant(a, &self.cs)?, eval_no_constant(b, &self.ds)?))
    }

    pub fn to_json(&self, field: &F) -> Value {
        json!({
            "cs": self.cs.iter().map(|x| field.elem_to_json(x)).collect::<Vec<_>>(),
            "ds": self.ds.iter().map(|x| field.elem_to_json(x)).collect::<Vec<_>>(),
            "pa_scalar": self.pa_scalar,
            "qb_scalar": self.qb_scalar,
        })
    }

    pub fn from_json(field: &F, v: &Value) -> Result<Self> {
        let vector = |key: &str| -> Result<Vec<F::Elem>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("certificate needs an array `{key}`")))?
                .iter()
                .map(|x| field.elem_from_json(x))
                .collect()
        };
        let flag = |key: &str| v.get(key).and_then(Value::as_bool).unwrap_or(false);
        Ok(PcCertificate { cs: vector("cs")?, ds: vector("ds")?, pa_scalar: flag("pa_scalar"), qb_scalar: flag("qb_scalar") })
    }
}

/// `Σ coeffs[k] · A^{k+1}`.
fn eval_no_constant<F: Field>(a: &Matrix<F>, coeffs: &[F::Elem]) -> Result<Matrix<F>> {
    let mut full = Vec::with_capacity(coeffs.len() + 1);
    full.push(a.field().zero());
    full.extend(coeffs.iter().cloned());
    a.eval_poly(&full)
}

fn certificate<F: Field>(a: &Matrix<F>, b: &Matrix<F>, cs: Vec<F::Elem>, ds: Vec<F::Elem>) -> Result<PcCertificate<F>> {
    let mut cert = PcCertificate { cs, ds, pa_scalar: false, qb_scalar: false };
    let (pa, qb) = cert.evaluate(a, b)?;
    cert.pa_scalar = is_scalar(&pa)?;
    cert.qb_scalar = is_scalar(&qb)?;
    Ok(cert)
}

/// Recomputes `p(A)`, `q(B)` and the scalar flags. Rejects zero or
/// unnormalized coefficient vectors.
pub fn pc_verify<F: Field>(a: &Matrix<F>, b: &Matrix<F>, cert: &PcCertificate<F>) -> Result<bool> {
    let n = same_pair(a, b)?;
    if cert.cs.len() + 1 != n || cert.ds.len() + 1 != n {
        return Err(Error::DimMismatch(format!(
            "certificate lengths {}/{} for n = {n}",
            cert.cs.len(),
            cert.ds.len()
        )));
    }
    let f = a.field();
    if !is_normalized(f, &cert.cs) || !is_normalized(f, &cert.ds) {
        return Ok(false);
    }
    let (pa, qb) = cert.evaluate(a, b)?;
    if is_scalar(&pa)? != cert.pa_scalar || is_scalar(&qb)? != cert.qb_scalar {
        return Ok(false);
    }
    pa.commutes_with(&qb)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PcRoute {
    /// `A` and `B` commute, so `p = q = x`.
    Commuting,
    /// Minimal polynomial of a derogatory `A` (constant dropped), `q = x`.
    DerogatoryA,
    DerogatoryB,
    /// First hit of the projective scan over a finite field.
    Exhaustive,
    /// A candidate `c` lifted from residues modulo the listed primes, with
    /// `d` solved exactly.
    ModularLift(Vec<u64>),
    /// A small-height integer `c`, with `d` solved exactly.
    SmallHeight,
}

impl PcRoute {
    pub fn name(&self) -> String {
        match self {
            PcRoute::Commuting => "commuting".into(),
            PcRoute::DerogatoryA => "derogatory_a".into(),
            PcRoute::DerogatoryB => "derogatory_b".into(),
            PcRoute::Exhaustive => "exhaustive".into(),
            PcRoute::ModularLift(ps) => {
                format!("modular_lift({})", ps.iter().map(u64::to_string).collect::<Vec<_>>().join(","))
            }
            PcRoute::SmallHeight => "small_height".into(),
        }
    }
}

/// What the search learned modulo one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModularEvidence {
    /// The reduction admits a certificate.
    Found(u64),
    /// The reduction admits none; heuristic evidence only.
    NoneModulo(u64),
    /// A denominator vanishes modulo the prime.
    BadReduction(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PcOutcome<F: Field> {
    Found { cert: PcCertificate<F>, route: PcRoute },
    /// The finite-field scan is complete and found nothing.
    None,
    /// Infinite field, nothing verified.
    Unknown { evidence: Vec<ModularEvidence> },
}

impl<F: Field> PcOutcome<F> {
    pub fn certificate(&self) -> Option<&PcCertificate<F>> {
        match self {
            PcOutcome::Found { cert, .. } => Some(cert),
            _ => None,
        }
    }

    pub fn to_json(&self, field: &F) -> Value {
        match self {
            PcOutcome::Found { cert, route } => {
                json!({"status": "found", "route": route.name(), "certificate": cert.to_json(field)})
            }
            PcOutcome::None => json!({"status": "none"}),
            PcOutcome::Unknown { evidence } => {
                let ev: Vec<Value> = evidence
                    .iter()
                    .map(|e| match e {
                        ModularEvidence::Found(p) => json!({"prime": p, "result": "found"}),
                        ModularEvidence::NoneModulo(p) => json!({"prime": p, "result": "none"}),
                        ModularEvidence::BadReduction(p) => json!({"prime": p, "result": "bad_reduction"}),
                    })
                    .collect();
                json!({"status": "unknown", "evidence": ev})
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PcOptions {
    /// Skip certificates where `p(A)` or `q(B)` is scalar.
    pub require_nonscalar: bool,
    /// Bound on the number of projective pairs a finite-field scan may cover.
    pub cap: u64,
    /// Primes used for modular evidence over the rationals.
    pub primes: Vec<u64>,
    /// Integer box `[-h, h]` for the small-height candidates over the rationals.
    pub height: i64,
}

impl Default for PcOptions {
    fn default() -> Self {
        PcOptions { require_nonscalar: false, cap: 1 << 26, primes: vec![3, 5, 7, 11], height: 2 }
    }
}

pub fn pc_search<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Result<PcOutcome<F>> {
    pc_search_with(a, b, &PcOptions::default())
}

/// Shortcuts first (commuting pair, derogatory side), then the exhaustive
/// scan over a finite field or the modular heuristic over the rationals.
pub fn pc_search_with<F: Field>(a: &Matrix<F>, b: &Matrix<F>, opts: &PcOptions) -> Result<PcOutcome<F>> {
    let n = same_pair(a, b)?;
    if n < 3 {
        return Err(Error::InvalidArgument("certificates need n >= 3".into()));
    }
    let f = a.field();
    let accept = |c: &PcCertificate<F>| !opts.require_nonscalar || c.nonscalar();
    let mut x = vec![f.zero(); n - 1];
    x[0] = f.one();
    if a.commutes_with(b)? {
        let cert = certificate(a, b, x.clone(), x.clone())?;
        if accept(&cert) {
            return Ok(PcOutcome::Found { cert, route: PcRoute::Commuting });
        }
    }
    if !opts.require_nonscalar {
        if let Some(p) = lemma_poly(a)? {
            let cert = certificate(a, b, p, x.clone())?;
            return Ok(PcOutcome::Found { cert, route: PcRoute::DerogatoryA });
        }
        if let Some(q) = lemma_poly(b)? {
            let cert = certificate(a, b, x, q)?;
            return Ok(PcOutcome::Found { cert, route: PcRoute::DerogatoryB });
        }
    }
    if f.order().is_some() {
        return Ok(match pc_search_exhaustive(a, b, opts)? {
            Some(cert) => PcOutcome::Found { cert, route: PcRoute::Exhaustive },
            None => PcOutcome::None,
        });
    }
    rational_search(a, b, opts)
}

/// Minimal polynomial without its constant term, normalized, padded to
/// `n − 1` coefficients; `None` unless the matrix is derogatory.
fn lemma_poly<F: Field>(a: &Matrix<F>) -> Result<Option<Vec<F::Elem>>> {
    let n = a.square_dim()?;
    if !derogatory(a)? {
        return Ok(None);
    }
    let f = a.field();
    let m = a.min_poly()?;
    let mut cs: Vec<F::Elem> = m[1..].to_vec();
    cs.resize(n - 1, f.zero());
    Ok(normalize(f, &cs))
}

/// `vec([A^i, B^j])` for `1 ≤ i, j ≤ n−1`, indexed `[i−1][j−1]`.
fn commutator_table<F: Field>(a: &Matrix<F>, b: &Matrix<F>, n: usize) -> Result<Vec<Vec<Vec<F::Elem>>>> {
    let pa = a.powers(n)?;
    let pb = b.powers(n)?;
    (1..n)
        .map(|i| (1..n).map(|j| Ok(pa[i].commutator(&pb[j])?.vec())).collect())
        .collect()
}

/// The `n² × (n−1)` matrix whose kernel is the set of `d` that pair with `c`.
fn kernel_system<F: Field>(f: &F, table: &[Vec<Vec<F::Elem>>], cs: &[F::Elem], nn: usize) -> Matrix<F> {
    let m = cs.len();
    let mut k = Matrix::zeros(f.clone(), nn, m);
    for (i, c) in cs.iter().enumerate() {
        if f.is_zero(c) {
            continue;
        }
        for j in 0..m {
            for r in 0..nn {
                let v = f.add(k.get(r, j), &f.mul(c, &table[i][j][r]));
                k.set(r, j, v);
            }
        }
    }
    k
}

/// Lexicographic scan over projective `c`; for each, the lexicographically
/// first projective `d` in the kernel. Complete for a finite field.
pub fn pc_search_exhaustive<F: Field>(
    a: &Matrix<F>,
    b: &Matrix<F>,
    opts: &PcOptions,
) -> Result<Option<PcCertificate<F>>> {
    let n = same_pair(a, b)?;
    if n < 3 {
        return Err(Error::InvalidArgument("certificates need n >= 3".into()));
    }
    let f = a.field();
    let q = f.order().ok_or(Error::InfiniteField)?;
    let count = projective_count(q, n - 1)
        .filter(|c| c.checked_mul(*c).is_some_and(|sq| sq <= opts.cap))
        .ok_or_else(|| Error::CapExceeded(format!("projective pair count for q={q}, n={n} exceeds {}", opts.cap)))?;
    let elems = elements(f)?;
    let table = commutator_table(a, b, n)?;
    let nn = n * n;
    let found = (0..count).into_par_iter().find_map_first(|idx| {
        let cs = projective_point(&elems, n - 1, idx);
        let pa = eval_no_constant(a, &cs).ok()?;
        let pa_scalar = is_scalar(&pa).ok()?;
        if opts.require_nonscalar && pa_scalar {
            return None;
        }
        let kernel = kernel_system(f, &table, &cs, nn).nullspace_basis();
        let ds = first_in_span(f, &elems, &kernel, |ds| {
            !opts.require_nonscalar || !is_scalar(&eval_no_constant(b, ds).expect("square")).expect("square")
        })?;
        certificate(a, b, cs, ds).ok()
    });
    Ok(found)
}

/// Lexicographically first normalized vector (by element index) in the span
/// of `basis` that satisfies `keep`.
fn first_in_span<F: Field>(
    f: &F,
    elems: &[F::Elem],
    basis: &[Vec<F::Elem>],
    keep: impl Fn(&[F::Elem]) -> bool,
) -> Option<Vec<F::Elem>> {
    let k = basis.len();
    if k == 0 {
        return None;
    }
    let q = elems.len() as u64;
    let total = projective_count(q, k)?;
    let len = basis[0].len();
    let key = |v: &[F::Elem]| v.iter().map(|x| f.index_of(x).unwrap_or(0)).collect::<Vec<u64>>();
    let mut best: Option<(Vec<u64>, Vec<F::Elem>)> = None;
    for idx in 0..total {
        let coeffs = projective_point(elems, k, idx);
        let mut v = vec![f.zero(); len];
        for (c, bv) in coeffs.iter().zip(basis) {
            for (x, y) in v.iter_mut().zip(bv) {
                *x = f.add(x, &f.mul(c, y));
            }
        }
        let v = normalize(f, &v)?;
        if !keep(&v) {
            continue;
        }
        let kv = key(&v);
        if best.as_ref().is_none_or(|(bk, _)| kv < *bk) {
            best = Some((kv, v));
        }
    }
    best.map(|(_, v)| v)
}

/// Rationals: modular evidence, then exact verification of lifted and
/// small-height candidates. Never reports "none".
fn rational_search<F: Field>(a: &Matrix<F>, b: &Matrix<F>, opts: &PcOptions) -> Result<PcOutcome<F>> {
    let n = a.square_dim()?;
    let f = a.field();
    let qa = to_rationals(a)?;
    let qb = to_rationals(b)?;
    let mut evidence = Vec::new();
    let mut residues: Vec<(u64, Vec<u32>)> = Vec::new();
    for &p in &opts.primes {
        let gf = FiniteField::prime(p)?;
        let (Some(ma), Some(mb)) = (reduce(&qa, &gf), reduce(&qb, &gf)) else {
            evidence.push(ModularEvidence::BadReduction(p));
            continue;
        };
        let sub = PcOptions { require_nonscalar: opts.require_nonscalar, ..PcOptions::default() };
        match pc_search_exhaustive(&ma, &mb, &sub) {
            Ok(Some(cert)) => {
                evidence.push(ModularEvidence::Found(p));
                residues.push((p, cert.cs));
            }
            Ok(None) => evidence.push(ModularEvidence::NoneModulo(p)),
            Err(Error::CapExceeded(_)) => {}
            Err(e) => return Err(e),
        }
    }

    let mut candidates: Vec<(Vec<BigRational>, PcRoute)> = Vec::new();
    for (p, cs) in &residues {
        let lifted = cs.iter().map(|&r| BigRational::from_integer(symmetric(r as i64, *p as i64).into())).collect();
        candidates.push((lifted, PcRoute::ModularLift(vec![*p])));
    }
    if residues.len() >= 2 {
        if let Some(cs) = crt_reconstruct(&residues) {
            candidates.push((cs, PcRoute::ModularLift(residues.iter().map(|(p, _)| *p).collect())));
        }
    }
    for cs in small_height(n - 1, opts.height) {
        candidates.push((cs, PcRoute::SmallHeight));
    }

    let table = commutator_table(&qa, &qb, n)?;
    for (cs, route) in candidates {
        let Some(cs) = normalize(&Rationals, &cs) else { continue };
        let pa = eval_no_constant(&qa, &cs)?;
        if opts.require_nonscalar && is_scalar(&pa)? {
            continue;
        }
        let kernel = kernel_system(&Rationals, &table, &cs, n * n).nullspace_basis();
        let mut tries: Vec<Vec<BigRational>> = kernel.clone();
        if kernel.len() > 1 {
            let sum = kernel.iter().fold(vec![BigRational::zero(); n - 1], |acc, v| {
                acc.iter().zip(v).map(|(x, y)| x + y).collect()
            });
            tries.push(sum);
        }
        for ds in tries {
            let Some(ds) = normalize(&Rationals, &ds) else { continue };
            let cert = certificate(&qa, &qb, cs.clone(), ds)?;
            if opts.require_nonscalar && !cert.nonscalar() {
                continue;
            }
            if pc_verify(&qa, &qb, &cert)? {
                let back = PcCertificate {
                    cs: from_rationals(f, &cert.cs)?,
                    ds: from_rationals(f, &cert.ds)?,
                    pa_scalar: cert.pa_scalar,
                    qb_scalar: cert.qb_scalar,
                };
                if pc_verify(a, b, &back)? {
                    return Ok(PcOutcome::Found { cert: back, route });
                }
            }
        }
    }
    Ok(PcOutcome::Unknown { evidence })
}

fn to_rationals<F: Field>(a: &Matrix<F>) -> Result<Matrix<Rationals>> {
    let data = a
        .data()
        .iter()
        .map(|x| a.field().to_rational(x).ok_or_else(|| Error::UnsupportedField("no rational view".into())))
        .collect::<Result<Vec<_>>>()?;
    Matrix::new(Rationals, a.rows(), a.cols(), data)
}

fn from_rationals<F: Field>(f: &F, v: &[BigRational]) -> Result<Vec<F::Elem>> {
    v.iter()
        .map(|r| f.from_rational(r).ok_or_else(|| Error::UnsupportedField("no rational embedding".into())))
        .collect()
}

fn reduce(a: &Matrix<Rationals>, gf: &FiniteField) -> Option<Matrix<FiniteField>> {
    let data = a.data().iter().map(|x| gf.from_rational(x)).collect::<Option<Vec<_>>>()?;
    Matrix::new(gf.clone(), a.rows(), a.cols(), data).ok()
}

fn symmetric(r: i64, m: i64) -> i64 {
    if r > m / 2 {
        r - m
    } else {
        r
    }
}

/// Combines residues by CRT, then recovers each coordinate as a fraction
/// with numerator and denominator below `sqrt(M/2)`.
fn crt_reconstruct(residues: &[(u64, Vec<u32>)]) -> Option<Vec<BigRational>> {
    let len = residues[0].1.len();
    let modulus: i128 = residues.iter().map(|(p, _)| *p as i128).product();
    (0..len)
        .map(|k| {
            let mut x: i128 = 0;
            for (p, r) in residues {
                let p = *p as i128;
                let rest = modulus / p;
                let inv = mod_inverse(rest.rem_euclid(p), p)?;
                x = (x + r[k] as i128 * rest % modulus * inv) % modulus;
            }
            rational_reconstruct(x, modulus)
        })
        .collect()
}

fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(m));
    e.gcd.is_one().then(|| e.x.mod_floor(&BigInt::from(m)).to_i128().expect("below modulus"))
}

fn rational_reconstruct(x: i128, m: i128) -> Option<BigRational> {
    let bound = ((m / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (m, x.rem_euclid(m));
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let qt = r0 / r1;
        (r0, r1) = (r1, r0 - qt * r1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    Some(BigRational::new(BigInt::from(r1), BigInt::from(t1)))
}

/// Nonzero integer vectors in `[-h, h]^m`, normalized, without repeats.
fn small_height(m: usize, h: i64) -> Vec<Vec<BigRational>> {
    let side = (2 * h + 1) as u64;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let total = side.pow(m as u32);
    for code in 1..total {
        let mut c = code;
        let v: Vec<BigRational> = (0..m)
            .map(|_| {
                let d = (c % side) as i64 - h;
                c /= side;
                BigRational::from_integer(d.into())
            })
            .rev()
            .collect();
        if let Some(v) = normalize(&Rationals, &v) {
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
    }
    out.sort_by_key(|v| v.iter().map(|x| x.numer().abs() + x.denom()).sum::<BigInt>());
    out
}
