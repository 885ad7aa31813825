//! Distance-theoretic tests: scalar detection, centralizers through the
//! Kronecker lift, the rank criterion for distance at most two, derogatory
//! classification, idempotent witnesses and polynomial-commuting certificates.

mod distance;
mod pc;

pub use distance::{distance, distance_with, validate_chain, Decision, DistanceKind, DistanceOptions, DistanceResult};
pub use pc::{
    pc_search, pc_search_exhaustive, pc_search_with, pc_verify, ModularEvidence, PcCertificate,
    PcOptions, PcOutcome, PcRoute,
};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumerate::{checked_pow, digits, elements};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;

/// Which lift a [`LiftMatrix`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftKind {
    /// `n² × n²`, `M_A = A ⊗ I − I ⊗ Aᵀ`.
    Single,
    /// `2n² × n²`, `M_A` on top of `M_B`.
    Stacked,
}

/// The linear map `vec(C) ↦ vec(AC − CA)` (or the stack of two such maps).
#[derive(Clone, Debug, PartialEq)]
pub struct LiftMatrix<F: Field> {
    pub n: usize,
    pub kind: LiftKind,
    pub matrix: Matrix<F>,
}

/// `true` iff `a = λI`.
pub fn is_scalar<F: Field>(a: &Matrix<F>) -> Result<bool> {
    let n = a.square_dim()?;
    let f = a.field();
    let d = a.get(0, 0);
    for i in 0..n {
        for j in 0..n {
            let x = a.get(i, j);
            let ok = if i == j { x == d } else { f.is_zero(x) };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn same_pair<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Result<usize> {
    let n = a.square_dim()?;
    let m = b.square_dim()?;
    if a.field() != b.field() {
        return Err(Error::FieldMismatch);
    }
    if n != m {
        return Err(Error::DimMismatch(format!("{n}x{n} vs {m}x{m}")));
    }
    Ok(n)
}

/// Builds `M_A` entrywise: row `(i,j)`, column `(k,l)` carries
/// `a_ik·[l = j] − a_lj·[k = i]`.
pub fn lift_m<F: Field>(a: &Matrix<F>) -> Result<LiftMatrix<F>> {
    let n = a.square_dim()?;
    let f = a.field();
    let nn = n * n;
    let mut m = Matrix::zeros(f.clone(), nn, nn);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                // a_ik c_kj
                let col = k * n + j;
                let v = f.add(m.get(row, col), a.get(i, k));
                m.set(row, col, v);
            }
            for l in 0..n {
                // − c_il a_lj
                let col = i * n + l;
                let v = f.sub(m.get(row, col), a.get(l, j));
                m.set(row, col, v);
            }
        }
    }
    Ok(LiftMatrix { n, kind: LiftKind::Single, matrix: m })
}

/// `M_{A,B}`: `M_A` stacked on top of `M_B`.
pub fn stack_m<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Result<LiftMatrix<F>> {
    let n = same_pair(a, b)?;
    let top = lift_m(a)?.matrix;
    let bottom = lift_m(b)?.matrix;
    Ok(LiftMatrix { n, kind: LiftKind::Stacked, matrix: top.vstack(&bottom)? })
}

fn unflatten<F: Field>(field: &F, n: usize, basis: Vec<Vec<F::Elem>>) -> Vec<Matrix<F>> {
    basis
        .into_iter()
        .map(|v| Matrix::from_vec(field.clone(), n, v).expect("n² entries"))
        .collect()
}

/// Echelon basis of the centralizer of `a`.
pub fn centralizer_basis<F: Field>(a: &Matrix<F>) -> Result<Vec<Matrix<F>>> {
    let lift = lift_m(a)?;
    Ok(unflatten(a.field(), lift.n, lift.matrix.nullspace_basis()))
}

/// Echelon basis of the matrices commuting with both `a` and `b`.
pub fn common_centralizer_basis<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Result<Vec<Matrix<F>>> {
    let lift = stack_m(a, b)?;
    Ok(unflatten(a.field(), lift.n, lift.matrix.nullspace_basis()))
}

/// Distance at most two: `rank M_{A,B} ≤ n² − 2`, i.e. some nonscalar matrix
/// commutes with both.
pub fn dist_le_2<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Result<bool> {
    let n = same_pair(a, b)?;
    if n < 2 {
        return Err(Error::InvalidArgument("distance tests need n >= 2".into()));
    }
    Ok(stack_m(a, b)?.matrix.rank() + 2 <= n * n)
}

/// A nonscalar matrix commuting with both, when one exists.
pub fn common_nonscalar<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Result<Option<Matrix<F>>> {
    for c in common_centralizer_basis(a, b)? {
        if !is_scalar(&c)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Derogatory test through the power stack: the `n × n²` matrix with rows
/// `vec(I), vec(A), …, vec(A^{n−1})` has rank below `n`.
pub fn derogatory<F: Field>(a: &Matrix<F>) -> Result<bool> {
    let n = a.square_dim()?;
    if n < 2 {
        return Err(Error::InvalidArgument("derogatory needs n >= 2".into()));
    }
    let powers = a.powers(n)?;
    let mut data = Vec::with_capacity(n * n * n);
    for p in &powers {
        data.extend(p.vec());
    }
    let stack = Matrix::new(a.field().clone(), n, n * n, data)?;
    Ok(stack.rank() < n)
}

/// How [`zi_membership`] looks for an idempotent.
#[derive(Clone, Debug)]
pub enum ZiMode<F: Field> {
    /// Scan all of `Mat_n(F_q)` in codec order.
    Enumerate,
    /// Check a given candidate.
    Witness(Matrix<F>),
}

/// Searches for (or checks) a rank-`i` idempotent commuting with both `a`
/// and `b`.
pub fn zi_membership<F: Field>(
    a: &Matrix<F>,
    b: &Matrix<F>,
    i: usize,
    mode: &ZiMode<F>,
) -> Result<Option<Matrix<F>>> {
    let n = same_pair(a, b)?;
    if i < 1 || i > n / 2 {
        return Err(Error::InvalidArgument(format!("rank {i} outside 1..={}", n / 2)));
    }
    match mode {
        ZiMode::Witness(p) => {
            if p.field() != a.field() || p.rows() != n || p.cols() != n {
                return Err(Error::BadWitness("witness has the wrong shape or field".into()));
            }
            zi_check(a, b, i, p)?;
            Ok(Some(p.clone()))
        }
        ZiMode::Enumerate => {
            let f = a.field();
            let q = f.order().ok_or(Error::InfiniteField)?;
            let total = checked_pow(q, (n * n) as u64)
                .filter(|&t| t <= 1 << 24)
                .ok_or_else(|| Error::CapExceeded(format!("q^(n^2) for q={q}, n={n} exceeds 2^24")))?;
            let elems = elements(f)?;
            for code in 0..total {
                let entries = digits(code, q, n * n).into_iter().map(|d| elems[d as usize].clone()).collect();
                let p = Matrix::from_vec(f.clone(), n, entries)?;
                if zi_check(a, b, i, &p).is_ok() {
                    return Ok(Some(p));
                }
            }
            Ok(None)
        }
    }
}

fn zi_check<F: Field>(a: &Matrix<F>, b: &Matrix<F>, i: usize, p: &Matrix<F>) -> Result<()> {
    if p.mul(p)? != *p {
        return Err(Error::BadWitness("P^2 != P".into()));
    }
    if p.rank() != i {
        return Err(Error::BadWitness(format!("rank(P) = {} != {i}", p.rank())));
    }
    if !a.commutes_with(p)? {
        return Err(Error::BadWitness("AP != PA".into()));
    }
    if !b.commutes_with(p)? {
        return Err(Error::BadWitness("BP != PB".into()));
    }
    Ok(())
}

/// Outcome of the sampled minors check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinorsReport {
    pub n: usize,
    pub minor_size: usize,
    pub rank: usize,
    pub dist_le_2: bool,
    pub sampled: usize,
    pub nonzero_sampled: usize,
    /// Rows and columns of a nonzero maximal minor, when the rank is full.
    pub nonzero_minor: Option<(Vec<usize>, Vec<usize>)>,
    /// The sampled minors vanish iff the rank criterion holds.
    pub consistent: bool,
}

/// Number of `(n²−1) × (n²−1)` minors of the `2n² × n²` stacked lift.
pub fn minor_count(n: u64) -> u128 {
    let nn = n * n;
    binomial(nn, nn - 1) * binomial(2 * nn, nn - 1)
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Evaluates a seeded random sample of the `(n²−1)`-minors of `M_{A,B}` and
/// checks them against the rank criterion. When the rank is `n² − 1` a
/// nonzero minor is also located directly from pivot rows and columns.
pub fn sampled_minors_check<F: Field>(
    a: &Matrix<F>,
    b: &Matrix<F>,
    samples: usize,
    seed: u64,
) -> Result<MinorsReport> {
    let n = same_pair(a, b)?;
    let m = stack_m(a, b)?.matrix;
    let size = n * n - 1;
    let rank = m.rank();
    let le2 = rank < size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nonzero = 0;
    for _ in 0..samples {
        let mut rows = sample(&mut rng, m.rows(), size).into_vec();
        let mut cols = sample(&mut rng, m.cols(), size).into_vec();
        rows.sort_unstable();
        cols.sort_unstable();
        if !m.field().is_zero(&m.submatrix(&rows, &cols).det()?) {
            nonzero += 1;
        }
    }
    let nonzero_minor = if le2 { None } else { Some(nonzero_maximal_minor(&m, size)?) };
    let witness_ok = match &nonzero_minor {
        Some((r, c)) => !m.field().is_zero(&m.submatrix(r, c).det()?),
        None => true,
    };
    Ok(MinorsReport {
        n,
        minor_size: size,
        rank,
        dist_le_2: le2,
        sampled: samples,
        nonzero_sampled: nonzero,
        nonzero_minor,
        consistent: (le2 && nonzero == 0) || (!le2 && witness_ok),
    })
}

/// Independent rows from the pivots of the transpose, then independent
/// columns of that row block.
fn nonzero_maximal_minor<F: Field>(m: &Matrix<F>, size: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let (_, row_pivots) = m.transpose().rref();
    let rows: Vec<usize> = row_pivots.into_iter().take(size).collect();
    let all_cols: Vec<usize> = (0..m.cols()).collect();
    let (_, col_pivots) = m.submatrix(&rows, &all_cols).rref();
    let cols: Vec<usize> = col_pivots.into_iter().take(size).collect();
    if rows.len() != size || cols.len() != size {
        return Err(Error::InvalidArgument("rank below minor size".into()));
    }
    Ok((rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FiniteField, Rationals};
    use crate::matrix::tests::{arb_finite_matrix, gf};
    use proptest::prelude::*;

    fn qm(rows: &[&[i64]]) -> Matrix<Rationals> {
        Matrix::from_i64_rows(Rationals, rows).unwrap()
    }

    fn fm(f: &FiniteField, rows: &[&[i64]]) -> Matrix<FiniteField> {
        Matrix::from_i64_rows(f.clone(), rows).unwrap()
    }

    fn ex25_a() -> Matrix<Rationals> {
        qm(&[&[1, 2, 0], &[3, 4, 0], &[0, 0, 5]])
    }
    fn ex25_b() -> Matrix<Rationals> {
        qm(&[&[1, 1, 0], &[2, 2, 0], &[0, 0, 3]])
    }
    fn ex46_a() -> Matrix<Rationals> {
        qm(&[&[1, -1, 0, 3], &[-1, 1, 0, -1], &[-2, 2, 0, -4], &[0, 0, 0, -2]])
    }
    fn ex46_b() -> Matrix<Rationals> {
        qm(&[&[1, 1, 0, 0], &[-1, 1, 0, 0], &[0, 0, -1, 1], &[0, 0, -1, -1]])
    }

    #[test]
    fn scalar_detection() {
        assert!(is_scalar(&Matrix::scalar(Rationals, 4, Rationals.from_i64(3))).unwrap());
        assert!(is_scalar(&Matrix::zeros(Rationals, 3, 3)).unwrap());
        assert!(!is_scalar(&qm(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]])).unwrap());
        assert!(!is_scalar(&qm(&[&[1, 1], &[0, 1]])).unwrap());
    }

    #[test]
    fn lift_of_scalar_is_zero_and_stack_dims() {
        let f = gf("gf(5)");
        let s = Matrix::scalar(f.clone(), 3, 2);
        assert!(lift_m(&s).unwrap().matrix.is_zero());
        let st = stack_m(&ex25_a(), &ex25_b()).unwrap();
        assert_eq!((st.matrix.rows(), st.matrix.cols()), (18, 9));
        assert_eq!(st.kind, LiftKind::Stacked);
    }

    #[test]
    fn lift_matches_kronecker_route() {
        let f = gf("gf(5)");
        let a = fm(&f, &[&[1, 4, 2], &[0, 3, 3], &[2, 1, 0]]);
        let i = Matrix::identity(f, 3);
        let kron = a.kron(&i).unwrap().sub(&i.kron(&a.transpose()).unwrap()).unwrap();
        assert_eq!(lift_m(&a).unwrap().matrix, kron);
    }

    #[test]
    fn centralizer_dimensions() {
        let s = Matrix::scalar(Rationals, 3, Rationals.from_i64(7));
        assert_eq!(centralizer_basis(&s).unwrap().len(), 9);
        // non-derogatory: centralizer is k[A]
        assert_eq!(centralizer_basis(&ex25_a()).unwrap().len(), 3);
        assert_eq!(centralizer_basis(&ex46_a()).unwrap().len(), 6);
        assert_eq!(centralizer_basis(&ex46_b()).unwrap().len(), 4);
        let a = ex25_a();
        for c in centralizer_basis(&a).unwrap() {
            assert!(a.commutes_with(&c).unwrap());
        }
    }

    /// Oracle over GF(2): count every matrix commuting with the reduction of
    /// the 3×3 example directly.
    #[test]
    fn centralizer_size_by_exhaustion_gf2() {
        let f = gf("gf(2)");
        let a = fm(&f, &[&[1, 2, 0], &[3, 4, 0], &[0, 0, 5]]);
        let mut count = 0;
        for code in 0..512u64 {
            let c = Matrix::from_vec(f.clone(), 3, digits(code, 2, 9).into_iter().map(|d| d as u32).collect()).unwrap();
            if a.commutes_with(&c).unwrap() {
                count += 1;
            }
        }
        assert_eq!(1u64 << centralizer_basis(&a).unwrap().len(), count);
    }

    #[test]
    fn rank_criterion_examples() {
        assert!(dist_le_2(&ex25_a(), &ex25_b()).unwrap());
        assert!(!ex25_a().commutes_with(&ex25_b()).unwrap());
        assert!(dist_le_2(&ex25_a(), &ex25_a()).unwrap());
        let c = common_nonscalar(&ex25_a(), &ex25_b()).unwrap().unwrap();
        assert!(ex25_a().commutes_with(&c).unwrap() && ex25_b().commutes_with(&c).unwrap());
        assert!(dist_le_2(&Matrix::identity(Rationals, 1), &Matrix::identity(Rationals, 1)).is_err());
    }

    /// Oracle: exhaustive search for a common nonscalar commuter over all 16
    /// matrices of Mat_2(GF(2)).
    #[test]
    fn no_distance_two_pairs_in_mat2_gf2() {
        let f = gf("gf(2)");
        let all: Vec<Matrix<FiniteField>> = (0..16u64)
            .map(|c| Matrix::from_vec(f.clone(), 2, digits(c, 2, 4).into_iter().map(|d| d as u32).collect()).unwrap())
            .collect();
        for a in &all {
            for b in &all {
                let brute = all.iter().any(|c| {
                    !is_scalar(c).unwrap() && a.commutes_with(c).unwrap() && b.commutes_with(c).unwrap()
                });
                assert_eq!(dist_le_2(a, b).unwrap(), brute);
                let strict = !is_scalar(a).unwrap() && !is_scalar(b).unwrap() && !a.commutes_with(b).unwrap();
                if strict {
                    assert!(!dist_le_2(a, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn derogatory_examples() {
        assert!(derogatory(&ex46_a()).unwrap());
        assert!(!derogatory(&ex46_b()).unwrap());
        for n in 2..=5 {
            assert!(derogatory(&Matrix::identity(Rationals, n)).unwrap());
        }
        let f = gf("gf(2)");
        // companion of x^3 + x + 1
        let comp = fm(&f, &[&[0, 0, 1], &[1, 0, 1], &[0, 1, 0]]);
        assert!(!derogatory(&comp).unwrap());
        assert!(!derogatory(&ex25_a()).unwrap());
    }

    #[test]
    fn zi_witness_mode() {
        let p = qm(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 1]]);
        let got = zi_membership(&ex25_a(), &ex25_b(), 1, &ZiMode::Witness(p.clone())).unwrap();
        assert_eq!(got, Some(p));
        let bad = qm(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]]);
        let err = zi_membership(&ex25_a(), &ex25_b(), 1, &ZiMode::Witness(bad)).unwrap_err();
        assert_eq!(err, Error::BadWitness("AP != PA".into()));
        let not_idem = qm(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 2]]);
        let err = zi_membership(&ex25_a(), &ex25_b(), 1, &ZiMode::Witness(not_idem)).unwrap_err();
        assert_eq!(err, Error::BadWitness("P^2 != P".into()));
        assert!(zi_membership(&ex25_a(), &ex25_b(), 2, &ZiMode::Enumerate).is_err());
    }

    #[test]
    fn zi_enumeration_against_independent_scan() {
        let f = gf("gf(2)");
        let s = Matrix::identity(f.clone(), 3);
        let b = fm(&f, &[&[1, 1, 0], &[0, 1, 1], &[1, 0, 0]]);
        let found = zi_membership(&s, &b, 1, &ZiMode::Enumerate).unwrap();
        // oracle: first rank-1 idempotent commuting with b in code order
        let oracle = (0..512u64).find_map(|code| {
            let p = Matrix::from_vec(f.clone(), 3, digits(code, 2, 9).into_iter().map(|d| d as u32).collect()).unwrap();
            let idem = p.mul(&p).unwrap() == p;
            (idem && p.rank() == 1 && p.commutes_with(&b).unwrap()).then_some(p)
        });
        assert_eq!(found, oracle);
    }

    #[test]
    fn zi_rank_two_split_pair() {
        let f = gf("gf(2)");
        let a = fm(&f, &[&[1, 1, 0, 0], &[0, 1, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 1]]);
        let b = fm(&f, &[&[0, 1, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 1], &[0, 0, 0, 1]]);
        let p = zi_membership(&a, &b, 2, &ZiMode::Enumerate).unwrap().expect("block split exists");
        assert_eq!(p.rank(), 2);
        assert!(dist_le_2(&a, &b).unwrap());
    }

    #[test]
    fn minor_count_arithmetic() {
        assert_eq!(minor_count(3), 393_822);
        assert_eq!(binomial(9, 8) * binomial(18, 8), 393_822);
    }

    #[test]
    fn sampled_minors_agree_with_rank() {
        let r = sampled_minors_check(&ex25_a(), &ex25_b(), 40, 7).unwrap();
        assert!(r.dist_le_2 && r.consistent && r.nonzero_sampled == 0);
        let f = gf("gf(7)");
        let a = fm(&f, &[&[0, 0, 2], &[1, 0, 0], &[0, 1, 0]]);
        let b = fm(&f, &[&[1, 1, 0], &[0, 1, 0], &[0, 0, 3]]);
        let r = sampled_minors_check(&a, &b, 40, 7).unwrap();
        assert_eq!(r.rank, 8);
        assert!(!r.dist_le_2 && r.consistent && r.nonzero_minor.is_some());
    }

    proptest! {
        #[test]
        fn lift_identity_gf3(a in arb_finite_matrix("gf(3)", 3, 3), c in arb_finite_matrix("gf(3)", 3, 3)) {
            let lhs = lift_m(&a).unwrap().matrix.mul_vec(&c.vec()).unwrap();
            prop_assert_eq!(lhs, a.commutator(&c).unwrap().vec());
        }

        #[test]
        fn lift_identity_gf9(a in arb_finite_matrix("gf(9)", 4, 4), c in arb_finite_matrix("gf(9)", 4, 4)) {
            let lhs = lift_m(&a).unwrap().matrix.mul_vec(&c.vec()).unwrap();
            prop_assert_eq!(lhs, a.commutator(&c).unwrap().vec());
        }

        #[test]
        fn derogatory_agrees_with_min_poly(a in arb_finite_matrix("gf(2)", 4, 4)) {
            let deg = a.min_poly().unwrap().len() - 1;
            prop_assert_eq!(derogatory(&a).unwrap(), deg < 4);
        }

        #[test]
        fn common_centralizer_has_the_identity(a in arb_finite_matrix("gf(5)", 3, 3), b in arb_finite_matrix("gf(5)", 3, 3)) {
            let st = stack_m(&a, &b).unwrap().matrix;
            prop_assert!(st.nullity() >= 1);
        }

        #[test]
        fn zi_witness_implies_rank_criterion(a in arb_finite_matrix("gf(2)", 3, 3)) {
            // a with itself always shares the idempotents commuting with a
            if let Some(p) = zi_membership(&a, &a, 1, &ZiMode::Enumerate).unwrap() {
                prop_assert!(dist_le_2(&a, &a).unwrap());
                prop_assert!(zi_membership(&a, &a, 1, &ZiMode::Witness(p)).is_ok());
            }
        }
    }
}
