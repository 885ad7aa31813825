//! Point counts over small finite fields: commuting pairs, pairs at
//! distance at most two, derogatory matrices, idempotent commuters and the
//! full distance distribution.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commute::{derogatory, dist_le_2, lift_m};
use crate::enumerate::checked_pow;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::graph::{CommutingGraph, MatCodec, BFS_STATE_CAP};
use crate::matrix::Matrix;

/// Largest number of ordered pairs an exhaustive pair scan may visit.
pub const PAIR_CAP: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CensusMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CensusValue {
    Count(u64),
    Estimate { estimate: f64, std_error: f64, hits: u64, samples: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    pub field: String,
    pub n: usize,
    pub quantity: String,
    #[serde(flatten)]
    pub mode: CensusMode,
    pub value: CensusValue,
    /// `log_q` of the count (or estimate).
    pub log_q: Option<f64>,
    pub wall_ms: u128,
}

impl CensusReport {
    fn new<F: Field>(field: &F, n: usize, quantity: &str, mode: CensusMode, value: CensusValue, start: Instant) -> Self {
        let q = field.order().unwrap_or(0) as f64;
        let x = match &value {
            CensusValue::Count(c) => *c as f64,
            CensusValue::Estimate { estimate, .. } => *estimate,
        };
        let log_q = (x > 0.0 && q > 1.0).then(|| x.ln() / q.ln());
        CensusReport {
            field: field.spec().to_string(),
            n,
            quantity: quantity.into(),
            mode,
            value,
            log_q,
            wall_ms: start.elapsed().as_millis(),
        }
    }

    pub fn count(&self) -> Option<u64> {
        match self.value {
            CensusValue::Count(c) => Some(c),
            CensusValue::Estimate { .. } => None,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("plain data")
    }
}

fn codec_within<F: Field>(field: &F, n: usize, cap: u64) -> Result<MatCodec<F>> {
    let codec = MatCodec::new(field, n)?;
    if codec.size() > cap {
        return Err(Error::CapExceeded(format!("{} matrices exceed {cap}", codec.size())));
    }
    Ok(codec)
}

/// `Σ_A q^{dim centralizer(A)}`: the number of commuting ordered pairs.
pub fn count_commuting_pairs<F: Field>(field: &F, n: usize) -> Result<CensusReport> {
    let start = Instant::now();
    let codec = codec_within(field, n, BFS_STATE_CAP)?;
    let q = codec.q();
    let total = (0..codec.size())
        .into_par_iter()
        .map(|code| {
            let k = lift_m(&codec.decode(code)).expect("square").matrix.nullity();
            checked_pow(q, k as u64).expect("below q^(n^2)")
        })
        .sum();
    Ok(CensusReport::new(field, n, "pairs_dist_le_1", CensusMode::Exhaustive, CensusValue::Count(total), start))
}

/// Number of `A` with `deg minpoly(A) < n`.
pub fn derogatory_count<F: Field>(field: &F, n: usize) -> Result<CensusReport> {
    let start = Instant::now();
    let codec = codec_within(field, n, BFS_STATE_CAP)?;
    let total = (0..codec.size())
        .into_par_iter()
        .filter(|&code| derogatory(&codec.decode(code)).expect("square"))
        .count() as u64;
    Ok(CensusReport::new(field, n, "derogatory_count", CensusMode::Exhaustive, CensusValue::Count(total), start))
}

/// Sample `index` of a run seeded with `seed`; independent of how the
/// sample range is split.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sampled<F: Field>(
    codec: &MatCodec<F>,
    samples: u64,
    seed: u64,
    test: impl Fn(&Matrix<F>, &Matrix<F>) -> bool + Sync,
) -> CensusValue {
    let hits = (0..samples)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = sample_rng(seed, i);
            let a = codec.decode(rng.gen_range(0..codec.size()));
            let b = codec.decode(rng.gen_range(0..codec.size()));
            test(&a, &b)
        })
        .count() as u64;
    let total = (codec.size() as f64).powi(2);
    let p = hits as f64 / samples.max(1) as f64;
    CensusValue::Estimate {
        estimate: p * total,
        std_error: (p * (1.0 - p) / samples.max(1) as f64).sqrt() * total,
        hits,
        samples,
    }
}

/// Ordered pairs with `rank M_{A,B} ≤ n² − 2`. `Exhaustive` needs
/// `q^{2n²}` within [`PAIR_CAP`].
pub fn count_dist_le_2<F: Field>(field: &F, n: usize, mode: CensusMode) -> Result<CensusReport> {
    let start = Instant::now();
    let codec = MatCodec::new(field, n)?;
    let value = match mode {
        CensusMode::Exhaustive => {
            let pairs = codec
                .size()
                .checked_mul(codec.size())
                .filter(|&p| p <= PAIR_CAP)
                .ok_or_else(|| Error::CapExceeded(format!("q^(2n^2) pairs exceed {PAIR_CAP}")))?;
            let size = codec.size();
            let hits = (0..pairs)
                .into_par_iter()
                .filter(|&p| dist_le_2(&codec.decode(p / size), &codec.decode(p % size)).expect("same shape"))
                .count() as u64;
            CensusValue::Count(hits)
        }
        CensusMode::Sampled { samples, seed } => {
            sampled(&codec, samples, seed, |a, b| dist_le_2(a, b).expect("same shape"))
        }
    };
    Ok(CensusReport::new(field, n, "pairs_dist_le_2", mode, value, start))
}

/// All idempotents of rank `i` in `Mat_n(F_q)`.
pub fn idempotents<F: Field>(field: &F, n: usize, i: usize) -> Result<Vec<Matrix<F>>> {
    let codec = codec_within(field, n, BFS_STATE_CAP)?;
    Ok((0..codec.size())
        .into_par_iter()
        .filter_map(|code| {
            let p = codec.decode(code);
            (p.rank() == i && p.mul(&p).expect("square") == p).then_some(p)
        })
        .collect())
}

/// Sampled census of pairs sharing a rank-`i` idempotent commuter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZiCensus {
    pub field: String,
    pub n: usize,
    pub i: usize,
    pub seed: u64,
    pub samples: u64,
    pub pool: usize,
    pub hits: u64,
    /// Hits failing the rank criterion; always zero when `Z_i ⊆ C²` holds.
    pub violations: u64,
}

pub fn zi_pair_census<F: Field>(field: &F, n: usize, i: usize, samples: u64, seed: u64) -> Result<ZiCensus> {
    if i < 1 || i > n / 2 {
        return Err(Error::InvalidArgument(format!("rank {i} outside 1..={}", n / 2)));
    }
    let codec = codec_within(field, n, BFS_STATE_CAP)?;
    let pool = idempotents(field, n, i)?;
    let (hits, violations) = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = sample_rng(seed, s);
            let a = codec.decode(rng.gen_range(0..codec.size()));
            let b = codec.decode(rng.gen_range(0..codec.size()));
            let hit = pool
                .iter()
                .any(|p| a.commutes_with(p).expect("square") && b.commutes_with(p).expect("square"));
            if !hit {
                return (0, 0);
            }
            (1, u64::from(!dist_le_2(&a, &b).expect("same shape")))
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok(ZiCensus { field: field.spec().to_string(), n, i, seed, samples, pool: pool.len(), hits, violations })
}

/// Ordered pairs of all matrices by extended distance: index `d` counts
/// pairs at distance `d`, with equal pairs at 0 and scalar pairs at 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceCensus {
    pub field: String,
    pub n: usize,
    pub by_distance: Vec<u64>,
    pub infinite: u64,
}

impl DistanceCensus {
    /// Pairs with distance at most `d`.
    pub fn at_most(&self, d: usize) -> u64 {
        self.by_distance.iter().take(d + 1).sum()
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("plain data");
        v["cumulative"] = json!((0..self.by_distance.len()).map(|d| self.at_most(d)).collect::<Vec<_>>());
        v
    }
}

pub fn distance_census<F: Field>(field: &F, n: usize) -> Result<DistanceCensus> {
    let graph = CommutingGraph::build(field, n)?;
    let stats = graph.distance_stats();
    let size = graph.codec().size();
    let scalars = size - graph.vertex_count() as u64;
    let mut by_distance = stats.histogram.clone();
    if by_distance.len() < 2 {
        by_distance.resize(2, 0);
    }
    // every matrix with itself
    by_distance[0] = size;
    // scalar with anything else, both orders, counted once per ordered pair
    by_distance[1] += scalars * (size - 1) * 2 - scalars * (scalars - 1);
    Ok(DistanceCensus { field: field.spec().to_string(), n, by_distance, infinite: stats.unreachable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::tests::gf;

    /// Oracle: test every ordered pair directly.
    fn brute_commuting(spec: &str, n: usize) -> u64 {
        let f = gf(spec);
        let codec = MatCodec::new(&f, n).unwrap();
        let all: Vec<_> = (0..codec.size()).map(|c| codec.decode(c)).collect();
        all.iter().map(|a| all.iter().filter(|b| a.commutes_with(b).unwrap()).count() as u64).sum()
    }

    #[test]
    fn commuting_pairs_against_brute_force() {
        assert_eq!(count_commuting_pairs(&gf("gf(2)"), 2).unwrap().count(), Some(88));
        assert_eq!(brute_commuting("gf(2)", 2), 88);
        assert_eq!(count_commuting_pairs(&gf("gf(3)"), 2).unwrap().count(), Some(brute_commuting("gf(3)", 2)));
        for spec in ["gf(2)", "gf(5)"] {
            let q = gf(spec).order().unwrap();
            assert_eq!(count_commuting_pairs(&gf(spec), 1).unwrap().count(), Some(q * q));
        }
    }

    #[test]
    fn dist_le_2_for_two_by_two_is_commuting() {
        for spec in ["gf(2)", "gf(3)"] {
            let f = gf(spec);
            let c1 = count_commuting_pairs(&f, 2).unwrap().count();
            let c2 = count_dist_le_2(&f, 2, CensusMode::Exhaustive).unwrap().count();
            assert_eq!(c1, c2);
        }
    }

    #[test]
    fn derogatory_counts() {
        assert_eq!(derogatory_count(&gf("gf(2)"), 2).unwrap().count(), Some(2));
        assert_eq!(derogatory_count(&gf("gf(3)"), 2).unwrap().count(), Some(3));
    }

    #[test]
    fn sampling_is_reproducible_and_partition_free() {
        let f = gf("gf(3)");
        let mode = CensusMode::Sampled { samples: 500, seed: 11 };
        let a = count_dist_le_2(&f, 3, mode).unwrap().value;
        let b = count_dist_le_2(&f, 3, mode).unwrap().value;
        assert_eq!(a, b);
        let mut r1 = sample_rng(11, 7);
        let mut r2 = sample_rng(11, 7);
        assert_eq!(r1.gen::<u64>(), r2.gen::<u64>());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| count_dist_le_2(&f, 3, mode).unwrap().value);
        assert_eq!(a, c);
    }

    #[test]
    fn idempotent_pool_sizes() {
        // rank-1 idempotents of Mat_2(GF(2)): 3 lines × 2 complements
        assert_eq!(idempotents(&gf("gf(2)"), 2, 1).unwrap().len(), 6);
        assert_eq!(idempotents(&gf("gf(2)"), 3, 1).unwrap().len(), 7 * 4);
    }

    #[test]
    fn zi_census_has_no_violations() {
        let z = zi_pair_census(&gf("gf(2)"), 3, 1, 400, 5).unwrap();
        assert!(z.hits > 0);
        assert_eq!(z.violations, 0);
        assert!(zi_pair_census(&gf("gf(2)"), 3, 2, 10, 5).is_err());
    }

    #[test]
    fn distance_census_totals() {
        let f = gf("gf(2)");
        let d = distance_census(&f, 2).unwrap();
        assert_eq!(d.by_distance.iter().sum::<u64>() + d.infinite, 256);
        assert_eq!(d.at_most(1), 88);
        assert_eq!(d.by_distance.get(2).copied().unwrap_or(0), 0);
        let d3 = distance_census(&f, 3).unwrap();
        let le2 = count_dist_le_2(&f, 3, CensusMode::Exhaustive).unwrap().count().unwrap();
        assert_eq!(d3.at_most(2), le2);
    }
}
