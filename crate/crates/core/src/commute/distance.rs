//! The distance decision ladder and chain validation.

use serde_json::{json, Value};

use super::pc::{pc_search_with, PcCertificate, PcOptions, PcOutcome};
use super::{common_nonscalar, dist_le_2, is_scalar, same_pair};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::graph::{bfs_distance, restricted_chain, BfsLimits, BfsOutcome, MatCodec, RestrictedOutcome, BFS_STATE_CAP};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceKind {
    Exact(u32),
    Infinite,
    /// `upper = None` means no finite upper bound is known.
    Bounded { lower: u32, upper: Option<u32> },
}

/// The rung of the ladder that settled the answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Equal,
    Scalar,
    Commuting,
    TwoByTwo,
    RankCriterion,
    Bfs,
    RestrictedSearch,
    PcCertificate,
    Bounds,
}

impl Decision {
    pub fn name(self) -> &'static str {
        match self {
            Decision::Equal => "equal",
            Decision::Scalar => "scalar",
            Decision::Commuting => "commuting",
            Decision::TwoByTwo => "two_by_two",
            Decision::RankCriterion => "rank_criterion",
            Decision::Bfs => "bfs",
            Decision::RestrictedSearch => "restricted_search",
            Decision::PcCertificate => "pc_certificate",
            Decision::Bounds => "bounds",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceResult<F: Field> {
    pub kind: DistanceKind,
    pub decided_by: Decision,
    /// Interior matrices of a commuting chain from `A` to `B`.
    pub chain: Vec<Matrix<F>>,
    pub certificate: Option<PcCertificate<F>>,
    pub note: Option<String>,
}

impl<F: Field> DistanceResult<F> {
    fn new(kind: DistanceKind, decided_by: Decision) -> Self {
        DistanceResult { kind, decided_by, chain: Vec::new(), certificate: None, note: None }
    }

    fn with_chain(mut self, chain: Vec<Matrix<F>>) -> Self {
        self.chain = chain;
        self
    }

    pub fn to_json(&self, field: &F) -> Value {
        let mut v = json!({"decided_by": self.decided_by.name()});
        match self.kind {
            DistanceKind::Exact(d) => {
                v["kind"] = json!("exact");
                v["value"] = json!(d);
            }
            DistanceKind::Infinite => v["kind"] = json!("infinite"),
            DistanceKind::Bounded { lower, upper } => {
                v["kind"] = json!("bounded");
                v["lower"] = json!(lower);
                v["upper"] = upper.map_or(json!("inf"), |u| json!(u));
            }
        }
        if !self.chain.is_empty() {
            v["witness"] = Value::Array(self.chain.iter().map(|m| m.to_json()["rows"].clone()).collect());
        }
        if let Some(c) = &self.certificate {
            v["certificate"] = c.to_json(field);
        }
        if let Some(n) = &self.note {
            v["note"] = json!(n);
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct DistanceOptions {
    /// Largest `q^{n²}` for which BFS settles the answer.
    pub bfs_states: u64,
    /// Largest candidate count for the restricted search.
    pub restricted_cap: u64,
    pub pc: PcOptions,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { bfs_states: BFS_STATE_CAP, restricted_cap: 1 << 22, pc: PcOptions::default() }
    }
}

pub fn distance<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Result<DistanceResult<F>> {
    distance_with(a, b, &DistanceOptions::default())
}

/// Equality, scalars, commuting, `n = 2`, the rank criterion; then BFS or
/// the restricted search over a finite field, or certificates over the
/// rationals.
pub fn distance_with<F: Field>(a: &Matrix<F>, b: &Matrix<F>, opts: &DistanceOptions) -> Result<DistanceResult<F>> {
    let n = same_pair(a, b)?;
    if a == b {
        return Ok(DistanceResult::new(DistanceKind::Exact(0), Decision::Equal));
    }
    if is_scalar(a)? || is_scalar(b)? {
        return Ok(DistanceResult::new(DistanceKind::Exact(1), Decision::Scalar));
    }
    if a.commutes_with(b)? {
        return Ok(DistanceResult::new(DistanceKind::Exact(1), Decision::Commuting));
    }
    if n == 2 {
        return Ok(DistanceResult::new(DistanceKind::Infinite, Decision::TwoByTwo));
    }
    if dist_le_2(a, b)? {
        let c = common_nonscalar(a, b)?.expect("nullity at least two");
        return Ok(DistanceResult::new(DistanceKind::Exact(2), Decision::RankCriterion).with_chain(vec![c]));
    }
    let f = a.field();
    if f.order().is_some() {
        let within = MatCodec::new(f, n).map(|c| c.size() <= opts.bfs_states).unwrap_or(false);
        if within {
            let limits = BfsLimits { max_radius: None, max_states: opts.bfs_states };
            let report = bfs_distance(a, b, limits)?;
            let kind = match report.outcome {
                BfsOutcome::Reached(d) => DistanceKind::Exact(d),
                BfsOutcome::Unreachable => DistanceKind::Infinite,
                BfsOutcome::ExceedsRadius(r) => DistanceKind::Bounded { lower: r + 1, upper: None },
            };
            return Ok(DistanceResult::new(kind, Decision::Bfs).with_chain(report.chain));
        }
        match restricted_chain(a, b, opts.restricted_cap) {
            Ok(RestrictedOutcome::Chain(c, d)) => {
                return Ok(DistanceResult::new(DistanceKind::Exact(3), Decision::RestrictedSearch).with_chain(vec![c, d]));
            }
            Ok(RestrictedOutcome::NoChain { .. }) => {
                return Ok(DistanceResult::new(DistanceKind::Bounded { lower: 4, upper: None }, Decision::RestrictedSearch));
            }
            Err(Error::CapExceeded(_)) => {}
            Err(e) => return Err(e),
        }
    }
    certificate_rung(a, b, opts)
}

fn certificate_rung<F: Field>(a: &Matrix<F>, b: &Matrix<F>, opts: &DistanceOptions) -> Result<DistanceResult<F>> {
    let strict = PcOptions { require_nonscalar: true, ..opts.pc.clone() };
    let outcome = match pc_search_with(a, b, &strict) {
        Ok(o) => o,
        Err(Error::CapExceeded(msg)) => {
            let mut r = DistanceResult::new(DistanceKind::Bounded { lower: 3, upper: None }, Decision::Bounds);
            r.note = Some(format!("certificate search skipped: {msg}"));
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    if let PcOutcome::Found { cert, .. } = outcome {
        let (pa, qb) = cert.evaluate(a, b)?;
        let mut r = DistanceResult::new(DistanceKind::Exact(3), Decision::PcCertificate).with_chain(vec![pa, qb]);
        r.certificate = Some(cert);
        return Ok(r);
    }
    let mut r = DistanceResult::new(DistanceKind::Bounded { lower: 3, upper: None }, Decision::Bounds);
    let loose = pc_search_with(a, b, &PcOptions { require_nonscalar: false, ..opts.pc.clone() })?;
    r.note = Some(match &loose {
        PcOutcome::Found { .. } => {
            "polynomially commuting with a scalar side: distance at most 3 over the algebraic closure only".into()
        }
        PcOutcome::None => "no polynomial-commuting certificate over this field".into(),
        PcOutcome::Unknown { .. } => "no certificate found; modular evidence attached".into(),
    });
    r.certificate = loose.certificate().cloned();
    Ok(r)
}

/// `A, chain…, B` is a walk of commuting matrices with nonscalar interior.
pub fn validate_chain<F: Field>(a: &Matrix<F>, b: &Matrix<F>, chain: &[Matrix<F>]) -> Result<bool> {
    same_pair(a, b)?;
    for c in chain {
        same_pair(a, c)?;
        if is_scalar(c)? {
            return Ok(false);
        }
    }
    let mut walk = Vec::with_capacity(chain.len() + 2);
    walk.push(a);
    walk.extend(chain.iter());
    walk.push(b);
    for w in walk.windows(2) {
        if !w[0].commutes_with(w[1])? {
            return Ok(false);
        }
    }
    Ok(true)
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

    #[test]
    fn ladder_on_small_cases() {
        let a = qm(&[&[1, 2, 0], &[3, 4, 0], &[0, 0, 5]]);
        let b = qm(&[&[1, 1, 0], &[2, 2, 0], &[0, 0, 3]]);
        let r = distance(&a, &b).unwrap();
        assert_eq!(r.kind, DistanceKind::Exact(2));
        assert_eq!(r.decided_by, Decision::RankCriterion);
        assert!(validate_chain(&a, &b, &r.chain).unwrap());
        assert_eq!(r.to_json(&Rationals)["kind"], json!("exact"));

        assert_eq!(distance(&a, &a).unwrap().kind, DistanceKind::Exact(0));
        let s = Matrix::scalar(Rationals, 3, Rationals.from_i64(2));
        assert_eq!(distance(&s, &s).unwrap().kind, DistanceKind::Exact(0));
        assert_eq!(distance(&s, &a).unwrap().kind, DistanceKind::Exact(1));
        assert_eq!(distance(&a, &a.mul(&a).unwrap()).unwrap().decided_by, Decision::Commuting);

        let f = gf("gf(2)");
        let x = Matrix::from_i64_rows(f.clone(), &[&[0, 1], &[0, 0]]).unwrap();
        let y = Matrix::from_i64_rows(f, &[&[0, 0], &[1, 0]]).unwrap();
        let r = distance(&x, &y).unwrap();
        assert_eq!(r.kind, DistanceKind::Infinite);
        assert_eq!(r.to_json(x.field())["kind"], json!("infinite"));
    }

    #[test]
    fn bounded_json_uses_inf() {
        let r: DistanceResult<Rationals> = DistanceResult::new(DistanceKind::Bounded { lower: 3, upper: None }, Decision::Bounds);
        let v = r.to_json(&Rationals);
        assert_eq!(v["upper"], json!("inf"));
        assert_eq!(v["lower"], json!(3));
    }

    #[test]
    fn shared_idempotent_pair_is_distance_two() {
        let a = qm(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, -1]]);
        let b = qm(&[&[5, 0, 0], &[0, 1, 1], &[0, 1, 0]]);
        let r = distance(&a, &b).unwrap();
        // diag(0,1,1) and the block-diagonal B share the commuter diag(1,0,0)
        assert_eq!(r.kind, DistanceKind::Exact(2));
    }

    #[test]
    fn chain_validation() {
        let a = qm(&[&[1, 2, 0], &[3, 4, 0], &[0, 0, 5]]);
        let b = qm(&[&[1, 1, 0], &[2, 2, 0], &[0, 0, 3]]);
        let c = qm(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]);
        assert!(validate_chain(&a, &b, &[c]).unwrap());
        assert!(!validate_chain(&a, &b, &[]).unwrap());
        let s = Matrix::identity(Rationals, 3);
        assert!(!validate_chain(&a, &b, &[s]).unwrap());
    }

    fn finite_kind(a: &Matrix<FiniteField>, b: &Matrix<FiniteField>) -> DistanceKind {
        distance(a, b).unwrap().kind
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn witness_chains_validate(a in arb_finite_matrix("gf(2)", 3, 3), b in arb_finite_matrix("gf(2)", 3, 3)) {
            let r = distance(&a, &b).unwrap();
            prop_assert!(validate_chain(&a, &b, &r.chain).unwrap() || r.chain.is_empty());
            if let DistanceKind::Exact(d) = r.kind {
                if d >= 2 {
                    prop_assert_eq!(r.chain.len() as u32, d - 1);
                }
            }
            prop_assert_eq!(finite_kind(&b, &a), r.kind);
        }
    }
}
