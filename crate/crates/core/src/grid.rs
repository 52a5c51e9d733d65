//! Grids `[N]^n`, point sets and densities.
//!
//! A point `p = (p_0, .., p_{n-1})` is encoded as the integer index
//! `sum p_i * N^i`. A prefix of length `r` is the first `r` coordinates, so a
//! point splits as `index = prefix_index + N^r * suffix_index`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use thiserror::Error;

use crate::rational::{self, Rational};

/// Largest grid (in cells) that operations are willing to materialize.
pub const MATERIALIZE_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid base must be at least 2, got {0}")]
    BaseTooSmall(u32),
    #[error("grid {base}^{dim} does not fit in 64 bits")]
    TooLarge { base: u32, dim: u32 },
    #[error("grid {base}^{dim} exceeds the materialization limit of 2^24 cells")]
    NotMaterializable { base: u32, dim: u32 },
    #[error("point has {got} coordinates, grid dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {value} outside [0, {base})")]
    CoordinateOutOfRange { value: i64, base: u32 },
    #[error("index {0} outside the grid")]
    IndexOutOfRange(u64),
    #[error("prefix length {r} must satisfy 1 <= r < {n}")]
    PrefixOutOfRange { r: u32, n: u32 },
    #[error("point sets live on different grids")]
    GridMismatch,
    #[error("density threshold must lie in (0, 1]")]
    InvalidDensity,
    #[error("need at least two sets, got {0}")]
    TooFewSets(usize),
    #[error("empty input")]
    EmptyInput,
    #[error("sample n = {n}, size = {size} is invalid (need n >= 1, size >= 1)")]
    InvalidSample { n: u32, size: BigUint },
}

/// The grid `[N]^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridParams {
    base: u32,
    dim: u32,
    size: u64,
}

impl GridParams {
    pub fn new(base: u32, dim: u32) -> Result<Self, GridError> {
        if base < 2 {
            return Err(GridError::BaseTooSmall(base));
        }
        let size = (base as u64)
            .checked_pow(dim)
            .ok_or(GridError::TooLarge { base, dim })?;
        Ok(Self { base, dim, size })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Number of cells `N^n`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn is_materializable(&self) -> bool {
        self.size <= MATERIALIZE_LIMIT
    }

    pub fn require_materializable(&self) -> Result<(), GridError> {
        if self.is_materializable() {
            Ok(())
        } else {
            Err(GridError::NotMaterializable {
                base: self.base,
                dim: self.dim,
            })
        }
    }

    /// `N^k` as a u64; `k <= n` always fits.
    pub fn stride(&self, k: u32) -> u64 {
        (self.base as u64).pow(k)
    }

    pub fn index_of(&self, coords: &[u32]) -> Result<u64, GridError> {
        if coords.len() != self.dim as usize {
            return Err(GridError::DimensionMismatch {
                expected: self.dim as usize,
                got: coords.len(),
            });
        }
        let mut idx = 0u64;
        let mut stride = 1u64;
        for &c in coords {
            if c >= self.base {
                return Err(GridError::CoordinateOutOfRange {
                    value: c as i64,
                    base: self.base,
                });
            }
            idx += c as u64 * stride;
            stride = stride.wrapping_mul(self.base as u64);
        }
        Ok(idx)
    }

    /// Index of an integer vector, or `None` if it leaves the grid.
    pub fn index_of_signed(&self, coords: &[i64]) -> Option<u64> {
        if coords.len() != self.dim as usize {
            return None;
        }
        let mut idx = 0u64;
        let mut stride = 1u64;
        for &c in coords {
            if c < 0 || c >= self.base as i64 {
                return None;
            }
            idx += c as u64 * stride;
            stride = stride.wrapping_mul(self.base as u64);
        }
        Some(idx)
    }

    pub fn coords_of(&self, mut idx: u64) -> Vec<u32> {
        let b = self.base as u64;
        (0..self.dim)
            .map(|_| {
                let c = (idx % b) as u32;
                idx /= b;
                c
            })
            .collect()
    }

    pub fn point(&self, idx: u64) -> Point {
        Point(self.coords_of(idx))
    }
}

impl fmt::Display for GridParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]^{}", self.base, self.dim)
    }
}

/// A grid point as a coordinate vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Vec<u32>);

impl Point {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    /// The concatenation `self x suffix`.
    pub fn concat(&self, suffix: &Point) -> Point {
        let mut v = self.0.clone();
        v.extend_from_slice(&suffix.0);
        Point(v)
    }
}

#[derive(Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(bits: u64) -> Self {
        Self {
            words: vec![0; bits.div_ceil(64) as usize],
        }
    }

    fn get(&self, i: u64) -> bool {
        self.words[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    /// Sets bit `i`; returns whether it changed.
    fn set(&mut self, i: u64, on: bool) -> bool {
        let w = &mut self.words[(i >> 6) as usize];
        let mask = 1u64 << (i & 63);
        let was = *w & mask != 0;
        if on {
            *w |= mask;
        } else {
            *w &= !mask;
        }
        was != on
    }

    fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(wi as u64 * 64 + t)
            })
        })
    }
}

#[derive(Clone, PartialEq, Eq)]
enum Members {
    Dense(BitSet),
    Sparse(BTreeSet<u64>),
}

/// A finite subset of `[N]^n` with exact membership.
///
/// Grids of at most 2^24 cells store membership as a bit vector; larger grids
/// fall back to an ordered set of indices.
#[derive(Clone, PartialEq, Eq)]
pub struct PointSet {
    grid: GridParams,
    members: Members,
    len: u64,
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointSet")
            .field("grid", &self.grid)
            .field("len", &self.len)
            .field("members", &self.iter().collect::<Vec<_>>())
            .finish()
    }
}

impl PointSet {
    pub fn empty(grid: GridParams) -> Self {
        let members = if grid.is_materializable() {
            Members::Dense(BitSet::new(grid.size()))
        } else {
            Members::Sparse(BTreeSet::new())
        };
        Self {
            grid,
            members,
            len: 0,
        }
    }

    /// The whole grid. Only available for materializable grids.
    pub fn full(grid: GridParams) -> Result<Self, GridError> {
        grid.require_materializable()?;
        let mut s = Self::empty(grid);
        for i in 0..grid.size() {
            s.insert(i);
        }
        Ok(s)
    }

    pub fn from_indices<I: IntoIterator<Item = u64>>(
        grid: GridParams,
        indices: I,
    ) -> Result<Self, GridError> {
        let mut s = Self::empty(grid);
        for i in indices {
            if i >= grid.size() {
                return Err(GridError::IndexOutOfRange(i));
            }
            s.insert(i);
        }
        Ok(s)
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a [u32]>>(
        grid: GridParams,
        points: I,
    ) -> Result<Self, GridError> {
        let mut s = Self::empty(grid);
        for p in points {
            s.insert(grid.index_of(p)?);
        }
        Ok(s)
    }

    pub fn grid(&self) -> GridParams {
        self.grid
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Inserts a cell; returns whether the set changed. Panics if the index is
    /// outside the grid.
    pub fn insert(&mut self, idx: u64) -> bool {
        assert!(idx < self.grid.size(), "index {idx} outside grid");
        let changed = match &mut self.members {
            Members::Dense(b) => b.set(idx, true),
            Members::Sparse(s) => s.insert(idx),
        };
        if changed {
            self.len += 1;
        }
        changed
    }

    pub fn remove(&mut self, idx: u64) -> bool {
        if idx >= self.grid.size() {
            return false;
        }
        let changed = match &mut self.members {
            Members::Dense(b) => b.set(idx, false),
            Members::Sparse(s) => s.remove(&idx),
        };
        if changed {
            self.len -= 1;
        }
        changed
    }

    pub fn contains(&self, idx: u64) -> bool {
        if idx >= self.grid.size() {
            return false;
        }
        match &self.members {
            Members::Dense(b) => b.get(idx),
            Members::Sparse(s) => s.contains(&idx),
        }
    }

    pub fn contains_point(&self, coords: &[u32]) -> bool {
        self.grid.index_of(coords).is_ok_and(|i| self.contains(i))
    }

    /// Membership of an arbitrary integer vector; vectors off the grid are
    /// never members.
    pub fn contains_signed(&self, coords: &[i64]) -> bool {
        self.grid
            .index_of_signed(coords)
            .is_some_and(|i| self.contains(i))
    }

    /// Member indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let it: alloc::boxed::Box<dyn Iterator<Item = u64> + '_> = match &self.members {
            Members::Dense(b) => alloc::boxed::Box::new(b.iter()),
            Members::Sparse(s) => alloc::boxed::Box::new(s.iter().copied()),
        };
        it
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.iter().map(|i| self.grid.point(i))
    }

    /// Members sorted lexicographically by coordinate vector (coordinate 0
    /// most significant).
    pub fn lex_sorted(&self) -> Vec<(Vec<u32>, u64)> {
        let mut v: Vec<_> = self.iter().map(|i| (self.grid.coords_of(i), i)).collect();
        v.sort_unstable();
        v
    }

    pub fn intersection(&self, other: &PointSet) -> Result<PointSet, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        let (small, large) = if self.len <= other.len {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = PointSet::empty(self.grid);
        for i in small.iter().filter(|&i| large.contains(i)) {
            out.insert(i);
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.grid == other.grid && self.iter().all(|i| other.contains(i))
    }

    /// Exact density `|S| / N^n`.
    pub fn density(&self) -> Rational {
        Rational::new(BigInt::from(self.len), BigInt::from(self.grid.size()))
    }

    /// Applies a map on coordinate vectors to every member.
    pub fn map_points<F: FnMut(&[u32]) -> Vec<u32>>(
        &self,
        grid: GridParams,
        mut f: F,
    ) -> Result<PointSet, GridError> {
        let mut out = PointSet::empty(grid);
        for p in self.points() {
            out.insert(grid.index_of(&f(&p.0))?);
        }
        Ok(out)
    }
}

/// `delta(S) = |S| / N^n`.
pub fn density(set: &PointSet) -> Rational {
    set.density()
}

fn check_prefix(grid: &GridParams, r: u32) -> Result<(), GridError> {
    if r == 0 || r >= grid.dim() {
        return Err(GridError::PrefixOutOfRange { r, n: grid.dim() });
    }
    Ok(())
}

/// The fibers `T_a = { p in [N]^{n-r} : a x p in S }`, indexed by the prefix
/// index of `a`.
pub fn split_by_prefix(set: &PointSet, r: u32) -> Result<Vec<PointSet>, GridError> {
    let grid = set.grid();
    check_prefix(&grid, r)?;
    let prefixes = GridParams::new(grid.base(), r)?;
    prefixes.require_materializable()?;
    let suffix = GridParams::new(grid.base(), grid.dim() - r)?;
    let stride = grid.stride(r);
    let mut fibers = vec![PointSet::empty(suffix); stride as usize];
    for i in set.iter() {
        fibers[(i % stride) as usize].insert(i / stride);
    }
    Ok(fibers)
}

/// Reassembles `S` from its prefix fibers; the inverse of [`split_by_prefix`].
pub fn glue_fibers(grid: GridParams, r: u32, fibers: &[PointSet]) -> Result<PointSet, GridError> {
    check_prefix(&grid, r)?;
    let stride = grid.stride(r);
    if fibers.len() as u64 != stride {
        return Err(GridError::GridMismatch);
    }
    let mut out = PointSet::empty(grid);
    for (a, t) in fibers.iter().enumerate() {
        if t.grid().dim() != grid.dim() - r || t.grid().base() != grid.base() {
            return Err(GridError::GridMismatch);
        }
        for p in t.iter() {
            out.insert(a as u64 + stride * p);
        }
    }
    Ok(out)
}

/// `k_r`: the number of prefixes `a in [N]^r` whose fiber has density at
/// least `c / 2`.
pub fn count_heavy_prefixes(set: &PointSet, r: u32, c: &Rational) -> Result<u64, GridError> {
    let grid = set.grid();
    check_prefix(&grid, r)?;
    if *c <= Rational::zero() || *c > Rational::from_integer(1.into()) {
        return Err(GridError::InvalidDensity);
    }
    let stride = grid.stride(r);
    let fiber_size = BigInt::from(grid.size() / stride);
    let mut counts = alloc::collections::BTreeMap::<u64, u64>::new();
    for i in set.iter() {
        *counts.entry(i % stride).or_default() += 1;
    }
    // |T_a| / N^{n-r} >= c/2  <=>  2 |T_a| den(c) >= num(c) N^{n-r}
    let rhs = c.numer() * &fiber_size;
    let heavy = counts
        .values()
        .filter(|&&cnt| BigInt::from(2 * cnt) * c.denom() >= rhs)
        .count() as u64;
    // Prefixes with empty fibers have density 0 < c/2 and never count.
    Ok(heavy)
}

/// Among sets over a common grid, the first pair `(i, j)` with `i < j`
/// maximizing `delta(X_i ∩ X_j)`, with that density. Indices are 0-based.
pub fn max_pair_intersection(family: &[PointSet]) -> Result<(usize, usize, Rational), GridError> {
    if family.len() < 2 {
        return Err(GridError::TooFewSets(family.len()));
    }
    let grid = family[0].grid();
    if family.iter().any(|s| s.grid() != grid) {
        return Err(GridError::GridMismatch);
    }
    let mut best: Option<(usize, usize, u64)> = None;
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let k = family[i].intersection(&family[j])?.len();
            if best.is_none_or(|(_, _, b)| k > b) {
                best = Some((i, j, k));
            }
        }
    }
    let (i, j, k) = best.expect("at least one pair");
    Ok((
        i,
        j,
        Rational::new(BigInt::from(k), BigInt::from(grid.size())),
    ))
}

/// `log_N(size_i) / n_i` per sample and their maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    pub values: Vec<f64>,
    pub max: f64,
}

pub fn entropy_profile(base: u32, samples: &[(u32, BigUint)]) -> Result<EntropyProfile, GridError> {
    if base < 2 {
        return Err(GridError::BaseTooSmall(base));
    }
    if samples.is_empty() {
        return Err(GridError::EmptyInput);
    }
    let log2_base = libm::log2(base as f64);
    let mut values = Vec::with_capacity(samples.len());
    for (n, size) in samples {
        if *n == 0 || size.is_zero() {
            return Err(GridError::InvalidSample {
                n: *n,
                size: size.clone(),
            });
        }
        let q = Rational::from_integer(BigInt::from(size.clone()));
        let v = match rational::exact_log(base as u64, &q) {
            Some(k) => k as f64 / *n as f64,
            None => rational::log2_biguint(size) / log2_base / *n as f64,
        };
        values.push(v);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(EntropyProfile { values, max })
}

/// Helper for tests and callers: the index of a point given as a slice.
pub fn index(grid: &GridParams, coords: &[u32]) -> u64 {
    grid.index_of(coords).expect("valid point")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn set(base: u32, dim: u32, pts: &[&[u32]]) -> PointSet {
        PointSet::from_points(GridParams::new(base, dim).unwrap(), pts.iter().copied()).unwrap()
    }

    #[test]
    fn densities() {
        let g = GridParams::new(2, 3).unwrap();
        assert_eq!(PointSet::empty(g).density(), ratio(0, 1));
        assert_eq!(PointSet::full(g).unwrap().density(), ratio(1, 1));
        assert_eq!(set(3, 2, &[&[0, 0], &[1, 1]]).density(), ratio(2, 9));
    }

    #[test]
    fn grid_errors() {
        assert_eq!(GridParams::new(1, 3), Err(GridError::BaseTooSmall(1)));
        assert!(matches!(
            GridParams::new(2, 64),
            Err(GridError::TooLarge { .. })
        ));
        let g = GridParams::new(2, 40).unwrap();
        assert!(!g.is_materializable());
        assert!(PointSet::full(g).is_err());
        let mut s = PointSet::empty(g);
        assert!(s.insert(1 << 39));
        assert!(s.contains(1 << 39));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn index_encoding_is_little_endian() {
        let g = GridParams::new(3, 2).unwrap();
        assert_eq!(g.index_of(&[1, 0]).unwrap(), 1);
        assert_eq!(g.index_of(&[0, 1]).unwrap(), 3);
        assert_eq!(g.coords_of(5), vec![2, 1]);
        assert!(g.index_of(&[3, 0]).is_err());
        assert!(g.index_of(&[0]).is_err());
        assert_eq!(g.index_of_signed(&[-1, 0]), None);
    }

    #[test]
    fn prefix_split_examples() {
        let full = PointSet::full(GridParams::new(2, 2).unwrap()).unwrap();
        let f = split_by_prefix(&full, 1).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|t| t.len() == 2));

        let s = set(2, 2, &[&[0, 0], &[0, 1], &[1, 0]]);
        let f = split_by_prefix(&s, 1).unwrap();
        assert_eq!(f[0].iter().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(f[1].iter().collect::<Vec<_>>(), vec![0]);

        let e = PointSet::empty(GridParams::new(3, 3).unwrap());
        for r in 1..3 {
            assert!(split_by_prefix(&e, r).unwrap().iter().all(|t| t.is_empty()));
        }
        assert!(split_by_prefix(&s, 0).is_err());
        assert!(split_by_prefix(&s, 2).is_err());
    }

    #[test]
    fn heavy_prefix_examples() {
        let full = PointSet::full(GridParams::new(2, 3).unwrap()).unwrap();
        assert_eq!(count_heavy_prefixes(&full, 1, &ratio(1, 1)).unwrap(), 2);
        let e = PointSet::empty(GridParams::new(2, 3).unwrap());
        assert_eq!(count_heavy_prefixes(&e, 1, &ratio(1, 2)).unwrap(), 0);
        // delta(T_0) = 1 and delta(T_1) = 1/2, both >= 1/2.
        let s = set(2, 2, &[&[0, 0], &[0, 1], &[1, 0]]);
        assert_eq!(count_heavy_prefixes(&s, 1, &ratio(1, 1)).unwrap(), 2);
        assert!(count_heavy_prefixes(&s, 1, &ratio(0, 1)).is_err());
        assert!(count_heavy_prefixes(&s, 2, &ratio(1, 2)).is_err());
    }

    #[test]
    fn pair_intersection_examples() {
        let g = GridParams::new(4, 1).unwrap();
        let x = PointSet::from_indices(g, [0, 1]).unwrap();
        let fam = vec![x.clone(), x.clone(), x.clone(), x];
        assert_eq!(max_pair_intersection(&fam).unwrap().2, ratio(1, 2));

        let fam = vec![
            PointSet::from_indices(g, [0, 1]).unwrap(),
            PointSet::from_indices(g, [2, 3]).unwrap(),
        ];
        assert_eq!(max_pair_intersection(&fam).unwrap(), (0, 1, ratio(0, 1)));

        let g3 = GridParams::new(3, 1).unwrap();
        let fam = vec![
            PointSet::from_indices(g3, [0, 1]).unwrap(),
            PointSet::from_indices(g3, [1, 2]).unwrap(),
            PointSet::from_indices(g3, [0, 2]).unwrap(),
        ];
        assert_eq!(max_pair_intersection(&fam).unwrap().2, ratio(1, 3));
        assert_eq!(
            max_pair_intersection(&fam[..1]),
            Err(GridError::TooFewSets(1))
        );
    }

    #[test]
    fn entropy_examples() {
        let p = entropy_profile(2, &[(5, BigUint::from(32u32))]).unwrap();
        assert_eq!(p.values, vec![1.0]);
        let p = entropy_profile(3, &[(4, BigUint::from(1u32))]).unwrap();
        assert_eq!(p.values, vec![0.0]);
        let p = entropy_profile(2, &[(4, BigUint::from(8u32)), (3, BigUint::from(6u32))]).unwrap();
        assert_eq!(p.values[0], 0.75);
        assert!((p.values[1] - libm::log2(6.0) / 3.0).abs() < 1e-12);
        assert_eq!(p.max, libm::log2(6.0) / 3.0);
        assert!(entropy_profile(2, &[]).is_err());
        assert!(entropy_profile(2, &[(0, BigUint::from(1u32))]).is_err());
    }
}
