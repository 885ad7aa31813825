//! The commuting graph on nonscalar matrices over a small finite field:
//! matrix codes, centralizer-driven neighbor expansion, BFS, components and
//! diameter, plus the restricted search for chains of length three.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::commute::{centralizer_basis, common_nonscalar, is_scalar, stack_m};
use crate::enumerate::{checked_pow, elements, projective_count, projective_point};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;

/// Default bound on the state space a BFS may touch.
pub const BFS_STATE_CAP: u64 = 1 << 24;
/// Bound for graphs whose adjacency is held in memory.
pub const GRAPH_STATE_CAP: u64 = 1 << 20;

/// Bijection between `Mat_n(F_q)` and `0..q^{n²}`: entries in row-major
/// order, entry `(0,0)` the least significant base-`q` digit.
#[derive(Clone, Debug)]
pub struct MatCodec<F: Field> {
    field: F,
    n: usize,
    q: u64,
    size: u64,
    elems: Vec<F::Elem>,
}

impl<F: Field> MatCodec<F> {
    pub fn new(field: &F, n: usize) -> Result<Self> {
        let q = field.order().ok_or(Error::InfiniteField)?;
        let size = checked_pow(q, (n * n) as u64)
            .ok_or_else(|| Error::CapExceeded(format!("q^(n^2) overflows for q={q}, n={n}")))?;
        Ok(MatCodec { field: field.clone(), n, q, size, elems: elements(field)? })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `q^{n²}`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn encode(&self, a: &Matrix<F>) -> u64 {
        self.encode_vec(a.data())
    }

    pub fn encode_vec(&self, v: &[F::Elem]) -> u64 {
        v.iter().rev().fold(0u64, |acc, x| acc * self.q + self.field.index_of(x).expect("finite element"))
    }

    pub fn decode(&self, mut code: u64) -> Matrix<F> {
        let data = (0..self.n * self.n)
            .map(|_| {
                let d = code % self.q;
                code /= self.q;
                self.elems[d as usize].clone()
            })
            .collect();
        Matrix::from_vec(self.field.clone(), self.n, data).expect("n² entries")
    }

    /// Codes of the `q` scalar matrices.
    pub fn scalar_codes(&self) -> Vec<u64> {
        self.elems
            .iter()
            .map(|e| self.encode(&Matrix::scalar(self.field.clone(), self.n, e.clone())))
            .collect()
    }
}

/// Calls `out` on every linear combination of `basis`.
fn for_each_combination<F: Field>(f: &F, elems: &[F::Elem], basis: &[Vec<F::Elem>], len: usize, out: &mut impl FnMut(&[F::Elem])) {
    fn rec<F: Field>(
        f: &F,
        elems: &[F::Elem],
        basis: &[Vec<F::Elem>],
        partial: &[F::Elem],
        out: &mut impl FnMut(&[F::Elem]),
    ) {
        match basis.split_first() {
            None => out(partial),
            Some((head, rest)) => {
                for e in elems {
                    let next: Vec<F::Elem> = if f.is_zero(e) {
                        partial.to_vec()
                    } else {
                        partial.iter().zip(head).map(|(p, h)| f.add(p, &f.mul(e, h))).collect()
                    };
                    rec(f, elems, rest, &next, out);
                }
            }
        }
    }
    rec(f, elems, basis, &vec![f.zero(); len], out);
}

/// Codes of the nonscalar matrices other than `a` that commute with `a`.
pub fn neighbor_codes<F: Field>(codec: &MatCodec<F>, a: &Matrix<F>) -> Result<Vec<u64>> {
    if is_scalar(a)? {
        return Err(Error::ScalarVertex);
    }
    let own = codec.encode(a);
    let scalars = codec.scalar_codes();
    let basis: Vec<Vec<F::Elem>> = centralizer_basis(a)?.into_iter().map(|m| m.vec()).collect();
    let mut out = Vec::new();
    for_each_combination(codec.field(), &codec.elems, &basis, codec.n * codec.n, &mut |v| {
        let c = codec.encode_vec(v);
        if c != own && !scalars.contains(&c) {
            out.push(c);
        }
    });
    out.sort_unstable();
    Ok(out)
}

/// The nonscalar matrices other than `a` in the centralizer of `a`.
pub fn neighbors<F: Field>(a: &Matrix<F>) -> Result<Vec<Matrix<F>>> {
    let codec = MatCodec::new(a.field(), a.square_dim()?)?;
    Ok(neighbor_codes(&codec, a)?.into_iter().map(|c| codec.decode(c)).collect())
}

struct Visited {
    bits: Option<Vec<u64>>,
    set: std::collections::HashSet<u64>,
}

impl Visited {
    fn new(size: u64) -> Self {
        if size <= BFS_STATE_CAP {
            Visited { bits: Some(vec![0; size.div_ceil(64) as usize]), set: Default::default() }
        } else {
            Visited { bits: None, set: Default::default() }
        }
    }

    /// Marks `code`; `true` if it was new.
    fn insert(&mut self, code: u64) -> bool {
        match &mut self.bits {
            Some(bits) => {
                let (w, b) = ((code / 64) as usize, code % 64);
                let fresh = bits[w] & (1 << b) == 0;
                bits[w] |= 1 << b;
                fresh
            }
            None => self.set.insert(code),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BfsLimits {
    /// Stop after this many levels.
    pub max_radius: Option<u32>,
    /// Refuse state spaces larger than this.
    pub max_states: u64,
}

impl Default for BfsLimits {
    fn default() -> Self {
        BfsLimits { max_radius: None, max_states: BFS_STATE_CAP }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfsOutcome {
    Reached(u32),
    /// The component of the source was exhausted.
    Unreachable,
    /// The radius cap was hit first.
    ExceedsRadius(u32),
}

#[derive(Clone, Debug)]
pub struct BfsReport<F: Field> {
    pub field: F,
    pub n: usize,
    pub source: u64,
    pub target: Option<u64>,
    pub outcome: BfsOutcome,
    /// Frontier size per level; level 0 is the source alone.
    pub levels: Vec<u64>,
    pub visited: u64,
    pub limits: BfsLimits,
    /// Interior vertices of a shortest path, source side first.
    pub chain: Vec<Matrix<F>>,
}

impl<F: Field> BfsReport<F> {
    pub fn to_json(&self) -> Value {
        let (kind, value) = match self.outcome {
            BfsOutcome::Reached(d) => ("reached", json!(d)),
            BfsOutcome::Unreachable => ("infinite", Value::Null),
            BfsOutcome::ExceedsRadius(r) => ("exceeds_cap", json!(r)),
        };
        json!({
            "field": self.field.spec().to_string(),
            "n": self.n,
            "source": self.source,
            "target": self.target,
            "outcome": kind,
            "distance": value,
            "levels": self.levels,
            "visited": self.visited,
            "cap": {"max_radius": self.limits.max_radius, "max_states": self.limits.max_states},
            "chain": self.chain.iter().map(|m| m.to_json()["rows"].clone()).collect::<Vec<_>>(),
        })
    }
}

/// Breadth-first search from `a`, stopping at `b` when given.
pub fn bfs<F: Field>(a: &Matrix<F>, b: Option<&Matrix<F>>, limits: BfsLimits) -> Result<BfsReport<F>> {
    let n = a.square_dim()?;
    if let Some(b) = b {
        if b.field() != a.field() {
            return Err(Error::FieldMismatch);
        }
        if b.square_dim()? != n {
            return Err(Error::DimMismatch("BFS endpoints differ in size".into()));
        }
        if is_scalar(b)? {
            return Err(Error::ScalarVertex);
        }
    }
    if is_scalar(a)? {
        return Err(Error::ScalarVertex);
    }
    let codec = MatCodec::new(a.field(), n)?;
    if codec.size() > limits.max_states {
        return Err(Error::CapExceeded(format!("{} states exceed {}", codec.size(), limits.max_states)));
    }
    let source = codec.encode(a);
    let target = b.map(|m| codec.encode(m));
    let mut visited = Visited::new(codec.size());
    let mut parent: HashMap<u64, u64> = HashMap::new();
    visited.insert(source);
    let mut levels = vec![1u64];
    let mut seen = 1u64;
    let mut frontier = vec![source];
    let mut outcome = BfsOutcome::Unreachable;
    let mut depth = 0u32;
    if target == Some(source) {
        outcome = BfsOutcome::Reached(0);
    }
    while outcome == BfsOutcome::Unreachable && !frontier.is_empty() {
        if limits.max_radius.is_some_and(|r| depth >= r) {
            outcome = BfsOutcome::ExceedsRadius(depth);
            break;
        }
        depth += 1;
        let mut next = Vec::new();
        'level: for &u in &frontier {
            for v in neighbor_codes(&codec, &codec.decode(u))? {
                if visited.insert(v) {
                    parent.insert(v, u);
                    next.push(v);
                    if Some(v) == target {
                        outcome = BfsOutcome::Reached(depth);
                        break 'level;
                    }
                }
            }
        }
        seen += next.len() as u64;
        if !next.is_empty() {
            levels.push(next.len() as u64);
        }
        frontier = next;
    }
    let mut chain = Vec::new();
    if let (BfsOutcome::Reached(d), Some(t)) = (outcome, target) {
        if d > 0 {
            let mut cur = parent[&t];
            while cur != source {
                chain.push(codec.decode(cur));
                cur = parent[&cur];
            }
            chain.reverse();
        }
    }
    Ok(BfsReport { field: a.field().clone(), n, source, target, outcome, levels, visited: seen, limits, chain })
}

/// Graph distance between two nonscalar matrices.
pub fn bfs_distance<F: Field>(a: &Matrix<F>, b: &Matrix<F>, limits: BfsLimits) -> Result<BfsReport<F>> {
    bfs(a, Some(b), limits)
}

/// Whole-graph view with adjacency held in memory, for all-pairs work.
pub struct CommutingGraph<F: Field> {
    codec: MatCodec<F>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    scalar: Vec<bool>,
}

pub const UNREACHED: u32 = u32::MAX;

impl<F: Field> CommutingGraph<F> {
    pub fn build(field: &F, n: usize) -> Result<Self> {
        let codec = MatCodec::new(field, n)?;
        if codec.size() > GRAPH_STATE_CAP {
            return Err(Error::CapExceeded(format!("{} states exceed {GRAPH_STATE_CAP}", codec.size())));
        }
        let size = codec.size();
        let lists: Vec<Option<Vec<u64>>> = (0..size)
            .into_par_iter()
            .map(|code| {
                let m = codec.decode(code);
                if is_scalar(&m).expect("square") {
                    None
                } else {
                    Some(neighbor_codes(&codec, &m).expect("nonscalar"))
                }
            })
            .collect();
        let mut offsets = Vec::with_capacity(size as usize + 1);
        let mut adjacency = Vec::new();
        let mut scalar = Vec::with_capacity(size as usize);
        offsets.push(0);
        for l in lists {
            scalar.push(l.is_none());
            adjacency.extend(l.unwrap_or_default().into_iter().map(|c| c as u32));
            offsets.push(adjacency.len());
        }
        Ok(CommutingGraph { codec, offsets, adjacency, scalar })
    }

    pub fn codec(&self) -> &MatCodec<F> {
        &self.codec
    }

    pub fn is_vertex(&self, code: u64) -> bool {
        !self.scalar[code as usize]
    }

    pub fn vertices(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.codec.size()).filter(|&c| self.is_vertex(c))
    }

    pub fn vertex_count(&self) -> usize {
        self.scalar.iter().filter(|s| !**s).count()
    }

    pub fn neighbors(&self, code: u64) -> &[u32] {
        &self.adjacency[self.offsets[code as usize]..self.offsets[code as usize + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    /// Distances from `source` to every code; [`UNREACHED`] elsewhere.
    pub fn bfs(&self, source: u64) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.codec.size() as usize];
        dist[source as usize] = 0;
        let mut queue = VecDeque::from([source as u32]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in self.neighbors(u as u64) {
                if dist[v as usize] == UNREACHED {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Component sizes, largest first.
    pub fn components(&self) -> Vec<usize> {
        let mut seen = vec![false; self.codec.size() as usize];
        let mut sizes = Vec::new();
        for s in self.vertices() {
            if seen[s as usize] {
                continue;
            }
            seen[s as usize] = true;
            let mut stack = vec![s as u32];
            let mut size = 0;
            while let Some(u) = stack.pop() {
                size += 1;
                for &v in self.neighbors(u as u64) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        stack.push(v);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// All-pairs statistics over ordered pairs of distinct vertices.
    pub fn distance_stats(&self) -> DistanceStats {
        let vertices: Vec<u64> = self.vertices().collect();
        vertices
            .par_iter()
            .map(|&s| {
                let dist = self.bfs(s);
                let mut st = DistanceStats::default();
                for &t in &vertices {
                    if t == s {
                        continue;
                    }
                    match dist[t as usize] {
                        UNREACHED => st.unreachable += 1,
                        d => {
                            let d = d as usize;
                            if st.histogram.len() <= d {
                                st.histogram.resize(d + 1, 0);
                            }
                            st.histogram[d] += 1;
                        }
                    }
                }
                st
            })
            .reduce(DistanceStats::default, DistanceStats::merge)
    }
}

/// Histogram of finite distances (index = distance) and unreachable count.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DistanceStats {
    pub histogram: Vec<u64>,
    pub unreachable: u64,
}

impl DistanceStats {
    fn merge(mut self, other: DistanceStats) -> DistanceStats {
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.unreachable += other.unreachable;
        self
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> u32 {
        self.histogram.iter().rposition(|&c| c > 0).unwrap_or(0) as u32
    }
}

/// Component sizes of the commuting graph on `Mat_n(F_q)`, largest first.
pub fn components<F: Field>(field: &F, n: usize) -> Result<Vec<usize>> {
    let codec = MatCodec::new(field, n)?;
    if codec.size() <= GRAPH_STATE_CAP {
        return Ok(CommutingGraph::build(field, n)?.components());
    }
    if codec.size() > BFS_STATE_CAP {
        return Err(Error::CapExceeded(format!("{} states exceed {BFS_STATE_CAP}", codec.size())));
    }
    let mut seen = Visited::new(codec.size());
    for s in codec.scalar_codes() {
        seen.insert(s);
    }
    let mut sizes = Vec::new();
    for s in 0..codec.size() {
        if !seen.insert(s) {
            continue;
        }
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for v in neighbor_codes(&codec, &codec.decode(u))? {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(sizes)
}

/// Largest finite distance between nonscalar matrices, with the full
/// distance histogram.
pub fn diameter<F: Field>(field: &F, n: usize) -> Result<DistanceStats> {
    Ok(CommutingGraph::build(field, n)?.distance_stats())
}

/// Result of the restricted search for a chain `A ↔ C ↔ D ↔ B`.
#[derive(Clone, Debug, PartialEq)]
pub enum RestrictedOutcome<F: Field> {
    Chain(Matrix<F>, Matrix<F>),
    /// Every candidate was tested; no chain of length at most three exists.
    NoChain { candidates: u64 },
}

/// Decides whether nonscalar `C`, `D` with `A ↔ C ↔ D ↔ B` exist. `C` runs
/// over projective classes of `centralizer(A)/⟨I⟩` on whichever side has
/// the smaller centralizer; each is tested with the rank criterion against
/// the other matrix.
pub fn restricted_chain<F: Field>(a: &Matrix<F>, b: &Matrix<F>, cap: u64) -> Result<RestrictedOutcome<F>> {
    if is_scalar(a)? || is_scalar(b)? {
        return Err(Error::ScalarVertex);
    }
    let n = a.square_dim()?;
    if b.square_dim()? != n || a.field() != b.field() {
        return Err(Error::DimMismatch("restricted search needs a matching pair".into()));
    }
    let f = a.field();
    let q = f.order().ok_or(Error::InfiniteField)?;
    let ca = quotient_basis(a)?;
    let cb = quotient_basis(b)?;
    let swapped = cb.len() < ca.len();
    let (basis, other) = if swapped { (cb, a) } else { (ca, b) };
    let k = basis.len();
    let count = projective_count(q, k)
        .filter(|&c| c <= cap)
        .ok_or_else(|| Error::CapExceeded(format!("restricted search over q={q}, dim={k} exceeds {cap}")))?;
    let elems = elements(f)?;
    let nn = n * n;
    let hit = (0..count).into_par_iter().find_map_first(|idx| {
        let coeffs = projective_point(&elems, k, idx);
        let mut v = vec![f.zero(); nn];
        for (c, bv) in coeffs.iter().zip(&basis) {
            for (x, y) in v.iter_mut().zip(bv) {
                *x = f.add(x, &f.mul(c, y));
            }
        }
        let c = Matrix::from_vec(f.clone(), n, v).expect("n² entries");
        if stack_m(&c, other).ok()?.matrix.rank() + 2 > nn {
            return None;
        }
        let d = common_nonscalar(&c, other).ok()??;
        Some((c, d))
    });
    Ok(match hit {
        Some((c, d)) if swapped => RestrictedOutcome::Chain(d, c),
        Some((c, d)) => RestrictedOutcome::Chain(c, d),
        None => RestrictedOutcome::NoChain { candidates: count },
    })
}

/// A basis of `centralizer(A) ∩ {x_00 = 0}`, a complement of the scalars.
fn quotient_basis<F: Field>(a: &Matrix<F>) -> Result<Vec<Vec<F::Elem>>> {
    let f = a.field();
    let n = a.square_dim()?;
    let shifted: Vec<F::Elem> = centralizer_basis(a)?
        .into_iter()
        .flat_map(|m| {
            let corner = m.get(0, 0).clone();
            m.sub(&Matrix::scalar(f.clone(), n, corner)).expect("same shape").vec()
        })
        .collect();
    let rows = shifted.len() / (n * n);
    let (r, pivots) = Matrix::new(f.clone(), rows, n * n, shifted)?.rref();
    Ok((0..pivots.len()).map(|i| r.row(i).to_vec()).collect())
}
