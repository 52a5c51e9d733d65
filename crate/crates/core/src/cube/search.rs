//! Exact cube search by doubling.
//!
//! A cube grows one generator at a time: from vertex set `V ⊆ S` and a shift
//! `d` with `V + d ⊆ S` the next vertex set is `V ∪ (V + d)`. Bases are tried
//! in lexicographic order and shifts are drawn from `p - z` for members `p`
//! lexicographically after the base `z`, in increasing order. Every cube
//! therefore appears exactly once, in canonical form, and the first witness
//! of maximal dimension in this order is the one reported.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::One;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{linalg, AffineCube, CubeNotion};
use crate::grid::{GridError, GridParams, PointSet};
use crate::rational::{self, Rational};

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Largest grid for which `f_exhaustive` enumerates every subset.
pub const EXHAUSTIVE_CELLS: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("node budget of {budget} expansions exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("M of the empty set is undefined")]
    EmptySet,
    #[error("grid has {cells} cells, exhaustive enumeration allows at most {limit}")]
    TooLarge { cells: u64, limit: u64 },
    #[error("density threshold must lie in (0, 1]")]
    InvalidDensity,
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MValue {
    pub m: usize,
    pub witness: AffineCube,
    /// Search nodes expanded.
    pub nodes: u64,
}

struct Shift {
    d: Vec<i64>,
}

struct Search<'a> {
    set: &'a PointSet,
    grid: GridParams,
    notion: CubeNotion,
    budget: u64,
    nodes: u64,
}

#[derive(Clone, Copy)]
enum Goal {
    Exactly(usize),
    Maximize,
}

struct Found {
    m: usize,
    cube: Option<AffineCube>,
}

impl<'a> Search<'a> {
    fn new(set: &'a PointSet, notion: CubeNotion, budget: u64) -> Self {
        Self {
            set,
            grid: set.grid(),
            notion,
            budget,
            nodes: 0,
        }
    }

    fn tick(&mut self) -> Result<(), SearchError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(SearchError::BudgetExceeded {
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    /// Largest dimension any cube in the set can reach.
    fn cap(&self) -> usize {
        let by_size = 63 - self.set.len().leading_zeros() as usize;
        match self.notion {
            CubeNotion::VertexInjective => by_size,
            _ => by_size.min(self.grid.dim() as usize),
        }
    }

    fn shifted(&self, verts: &[Vec<i64>], d: &[i64]) -> Option<Vec<Vec<i64>>> {
        verts
            .iter()
            .map(|v| {
                let w: Vec<i64> = v.iter().zip(d).map(|(a, b)| a + b).collect();
                self.set.contains_signed(&w).then_some(w)
            })
            .collect()
    }

    fn admissible(&self, gens: &[Vec<i64>], d: &[i64]) -> bool {
        if self.notion == CubeNotion::VertexInjective {
            return true;
        }
        let mut rows: Vec<Vec<i64>> = gens.to_vec();
        rows.push(d.to_vec());
        if linalg::rank(&rows) != rows.len() {
            return false;
        }
        self.notion != CubeNotion::Unimodular || linalg::is_primitive_system(&rows)
    }

    /// Explores every cube with base `z`; `found` carries the best so far.
    fn from_base(
        &mut self,
        z: &[i64],
        later: &[Vec<i64>],
        goal: Goal,
        cap: usize,
        found: &mut Found,
    ) -> Result<bool, SearchError> {
        let shifts: Vec<Shift> = later
            .iter()
            .map(|p| Shift {
                d: p.iter().zip(z).map(|(a, b)| a - b).collect(),
            })
            .collect();
        let cands: Vec<usize> = (0..shifts.len()).collect();
        let mut gens = Vec::new();
        let verts = alloc::vec![z.to_vec()];
        self.grow(z, &shifts, &verts, &mut gens, &cands, goal, cap, found)
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &mut self,
        z: &[i64],
        shifts: &[Shift],
        verts: &[Vec<i64>],
        gens: &mut Vec<Vec<i64>>,
        cands: &[usize],
        goal: Goal,
        cap: usize,
        found: &mut Found,
    ) -> Result<bool, SearchError> {
        let depth = gens.len();
        match goal {
            Goal::Exactly(m) if depth == m => {
                found.m = m;
                found.cube = Some(AffineCube {
                    base: z.to_vec(),
                    generators: gens.clone(),
                });
                return Ok(true);
            }
            Goal::Maximize if depth > found.m || found.cube.is_none() => {
                found.m = depth;
                found.cube = Some(AffineCube {
                    base: z.to_vec(),
                    generators: gens.clone(),
                });
                if depth >= cap {
                    return Ok(true);
                }
            }
            _ => {}
        }
        let need = |found: &Found| match goal {
            Goal::Exactly(m) => m - depth,
            Goal::Maximize => found.m + 1 - depth,
        };
        for (pos, &ci) in cands.iter().enumerate() {
            // Each further generator consumes a distinct remaining candidate.
            if cands.len() - pos < need(found) {
                break;
            }
            self.tick()?;
            let d = &shifts[ci].d;
            // V + d ⊆ S is guaranteed by the candidate filter.
            let moved = self
                .shifted(verts, d)
                .expect("candidate filter keeps V + d inside S");
            if self.notion == CubeNotion::VertexInjective && moved.iter().any(|w| verts.contains(w))
            {
                continue;
            }
            if !self.admissible(gens, d) {
                continue;
            }
            let next: Vec<usize> = cands[pos + 1..]
                .iter()
                .copied()
                .filter(|&cj| self.shifted(&moved, &shifts[cj].d).is_some())
                .collect();
            let mut grown = verts.to_vec();
            grown.extend(moved);
            gens.push(d.clone());
            let stop = self.grow(z, shifts, &grown, gens, &next, goal, cap, found)?;
            gens.pop();
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn lex_points(set: &PointSet) -> Vec<Vec<i64>> {
    set.lex_sorted()
        .into_iter()
        .map(|(c, _)| c.into_iter().map(i64::from).collect())
        .collect()
}

/// A cube of dimension exactly `m` inside `set` under `notion`, or `None` when
/// there is none. The search is exhaustive; running out of budget is an error,
/// never a `None`.
pub fn find_cube(
    set: &PointSet,
    m: usize,
    notion: CubeNotion,
    budget: u64,
) -> Result<Option<AffineCube>, SearchError> {
    let pts = lex_points(set);
    if pts.is_empty() {
        return Ok(None);
    }
    let mut search = Search::new(set, notion, budget);
    if m > search.cap() {
        return Ok(None);
    }
    let mut found = Found { m: 0, cube: None };
    for (i, z) in pts.iter().enumerate() {
        // A cube based at z has 2^m - 1 further vertices, all after z.
        if m < 64 && ((pts.len() - i - 1) as u64) < (1u64 << m) - 1 {
            break;
        }
        if search.from_base(z, &pts[i + 1..], Goal::Exactly(m), m, &mut found)? {
            return Ok(found.cube);
        }
    }
    Ok(None)
}

/// `M(S)` with a witness of maximal dimension.
pub fn m_value(set: &PointSet, notion: CubeNotion, budget: u64) -> Result<MValue, SearchError> {
    let pts = lex_points(set);
    if pts.is_empty() {
        return Err(SearchError::EmptySet);
    }
    let mut search = Search::new(set, notion, budget);
    let cap = search.cap();
    let mut found = Found { m: 0, cube: None };
    for (i, z) in pts.iter().enumerate() {
        if found.cube.is_some() {
            let target = found.m + 1;
            if target < 64 && ((pts.len() - i - 1) as u64) < (1u64 << target) - 1 {
                break;
            }
        }
        if search.from_base(z, &pts[i + 1..], Goal::Maximize, cap, &mut found)? {
            break;
        }
    }
    Ok(MValue {
        m: found.m,
        witness: found.cube.expect("a nonempty set contains a point cube"),
        nodes: search.nodes,
    })
}

/// The largest cube whose base is the `rank`-th member in lexicographic order,
/// explored independently of every other base. Merging these over all ranks
/// (largest `m`, then smallest rank) reproduces [`m_value`] exactly, which is
/// what parallel drivers rely on.
pub fn m_value_at_base(
    set: &PointSet,
    notion: CubeNotion,
    budget: u64,
    rank: usize,
) -> Result<MValue, SearchError> {
    let pts = lex_points(set);
    if rank >= pts.len() {
        return Err(SearchError::EmptySet);
    }
    let mut search = Search::new(set, notion, budget);
    let cap = search.cap();
    let mut found = Found { m: 0, cube: None };
    search.from_base(
        &pts[rank],
        &pts[rank + 1..],
        Goal::Maximize,
        cap,
        &mut found,
    )?;
    Ok(MValue {
        m: found.m,
        witness: found.cube.expect("base point is a cube"),
        nodes: search.nodes,
    })
}

/// Exact `f_N(n, c)` at tiny scale, with a minimizing set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FValue {
    pub value: usize,
    pub argmin: PointSet,
    /// Subsets whose `M` was computed.
    pub subsets: u64,
}

fn threshold_size(grid: &GridParams, c: &Rational) -> Result<u32, SearchError> {
    if *c <= Rational::from_integer(0.into()) || *c > Rational::one() {
        return Err(SearchError::InvalidDensity);
    }
    let k = rational::ceil_int(&(c * Rational::from_integer(BigInt::from(grid.size()))));
    Ok(u32::try_from(k).expect("at most the grid size"))
}

fn mask_set(grid: GridParams, mask: u32) -> PointSet {
    PointSet::from_indices(grid, (0..32u64).filter(|i| mask >> i & 1 == 1))
        .expect("mask within grid")
}

/// Smallest `M` over the `k`-subsets whose largest cell is `top`, with `k`
/// the least size reaching density `c`. The union over `top` ascending is the
/// full enumeration order of [`f_exhaustive`].
pub fn f_exhaustive_with_top(
    base: u32,
    dim: u32,
    c: &Rational,
    notion: CubeNotion,
    budget: u64,
    top: u32,
) -> Result<Option<FValue>, SearchError> {
    let grid = GridParams::new(base, dim)?;
    if grid.size() > EXHAUSTIVE_CELLS {
        return Err(SearchError::TooLarge {
            cells: grid.size(),
            limit: EXHAUSTIVE_CELLS,
        });
    }
    let k = threshold_size(&grid, c)?;
    if top as u64 >= grid.size() || top + 1 < k {
        return Ok(None);
    }
    let mut best: Option<FValue> = None;
    let mut subsets = 0;
    let rest = k - 1;
    let top_bit = 1u32 << top;
    let mut lower: u32 = if rest == 0 { 0 } else { (1u32 << rest) - 1 };
    loop {
        let set = mask_set(grid, lower | top_bit);
        subsets += 1;
        let m = m_value(&set, notion, budget)?.m;
        if best.as_ref().is_none_or(|b| m < b.value) {
            best = Some(FValue {
                value: m,
                argmin: set,
                subsets: 0,
            });
            if m == 0 {
                break;
            }
        }
        // Gosper's hack: next larger mask with the same popcount.
        if rest == 0 {
            break;
        }
        let c0 = lower & lower.wrapping_neg();
        let r0 = lower + c0;
        lower = (((r0 ^ lower) >> 2) / c0) | r0;
        if lower >= top_bit {
            break;
        }
    }
    Ok(best.map(|mut b| {
        b.subsets = subsets;
        b
    }))
}

/// `f_N(n, c) = min { M(S) : S ⊆ [N]^n, δ(S) >= c }` by exhaustive enumeration.
///
/// `M` is monotone under inclusion, so the minimum is attained on subsets of
/// the least admissible size `⌈c N^n⌉`, and only those are enumerated.
pub fn f_exhaustive(
    base: u32,
    dim: u32,
    c: &Rational,
    notion: CubeNotion,
    budget: u64,
) -> Result<FValue, SearchError> {
    let grid = GridParams::new(base, dim)?;
    let mut best: Option<FValue> = None;
    let mut subsets = 0;
    for top in 0..grid.size().min(32) as u32 {
        if let Some(v) = f_exhaustive_with_top(base, dim, c, notion, budget, top)? {
            subsets += v.subsets;
            if best.as_ref().is_none_or(|b| v.value < b.value) {
                best = Some(v);
            }
            if best.as_ref().is_some_and(|b| b.value == 0) {
                break;
            }
        }
    }
    let mut best = best.expect("the full grid always qualifies");
    best.subsets = subsets;
    Ok(best)
}

/// Upper bound on `f_N(n, c)` from `samples` uniformly random subsets of size
/// `⌈c N^n⌉`.
pub fn f_sampled(
    base: u32,
    dim: u32,
    c: &Rational,
    notion: CubeNotion,
    budget: u64,
    samples: u64,
    seed: u64,
) -> Result<FValue, SearchError> {
    let grid = GridParams::new(base, dim)?;
    grid.require_materializable()?;
    let k = threshold_size(&grid, c)? as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<FValue> = None;
    for _ in 0..samples.max(1) {
        let cells = sample(&mut rng, grid.size() as usize, k);
        let set = PointSet::from_indices(grid, cells.iter().map(|i| i as u64))?;
        let m = m_value(&set, notion, budget)?.m;
        if best.as_ref().is_none_or(|b| m < b.value) {
            best = Some(FValue {
                value: m,
                argmin: set,
                subsets: 0,
            });
        }
    }
    let mut best = best.expect("at least one sample");
    best.subsets = samples.max(1);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::is_cube_in;
    use crate::rational::ratio;
    use alloc::vec;

    const B: u64 = DEFAULT_NODE_BUDGET;

    fn line(base: u32, pts: &[u64]) -> PointSet {
        PointSet::from_indices(GridParams::new(base, 1).unwrap(), pts.iter().copied()).unwrap()
    }

    #[test]
    fn find_cube_examples() {
        let full = PointSet::full(GridParams::new(2, 2).unwrap()).unwrap();
        let w = find_cube(&full, 2, CubeNotion::IndependentGenerators, B)
            .unwrap()
            .unwrap();
        assert_eq!(w.canonical_text(), "base=[0,0] gens=[[0,1],[1,0]]");
        assert!(find_cube(&line(3, &[1]), 1, CubeNotion::VertexInjective, B)
            .unwrap()
            .is_none());
        let s = line(5, &[0, 1, 2, 3]);
        let w = find_cube(&s, 2, CubeNotion::VertexInjective, B)
            .unwrap()
            .unwrap();
        assert_eq!(w, AffineCube::new(vec![0], vec![vec![1], vec![2]]).unwrap());
        assert!(find_cube(&s, 2, CubeNotion::IndependentGenerators, B)
            .unwrap()
            .is_none());
        assert_eq!(
            find_cube(&s, 0, CubeNotion::Unimodular, B).unwrap(),
            Some(AffineCube::point(vec![0]))
        );
    }

    #[test]
    fn m_value_examples() {
        for (base, dim) in [(2, 1), (2, 3), (3, 2), (4, 2)] {
            let full = PointSet::full(GridParams::new(base, dim).unwrap()).unwrap();
            let mv = m_value(&full, CubeNotion::IndependentGenerators, B).unwrap();
            assert_eq!(mv.m, dim as usize);
            assert!(is_cube_in(&full, &mv.witness, CubeNotion::IndependentGenerators).unwrap());
            assert!(mv.witness.is_canonical());
        }
        let single = line(4, &[2]);
        let mv = m_value(&single, CubeNotion::Unimodular, B).unwrap();
        assert_eq!((mv.m, mv.witness), (0, AffineCube::point(vec![2])));

        let s = line(5, &[0, 1, 2, 3]);
        assert_eq!(m_value(&s, CubeNotion::VertexInjective, B).unwrap().m, 2);
        assert_eq!(
            m_value(&s, CubeNotion::IndependentGenerators, B).unwrap().m,
            1
        );
        assert_eq!(m_value(&s, CubeNotion::Unimodular, B).unwrap().m, 1);

        let empty = PointSet::empty(GridParams::new(2, 2).unwrap());
        assert_eq!(
            m_value(&empty, CubeNotion::VertexInjective, B),
            Err(SearchError::EmptySet)
        );
    }

    #[test]
    fn unimodular_differs_from_independent() {
        // {(0,0), (1,1), (1,-1)+(1,1)=(2,0), ...}: the square spanned by
        // (1,1) and (1,-1) has determinant -2.
        let g = GridParams::new(3, 2).unwrap();
        let s = PointSet::from_points(g, [&[1u32, 0][..], &[0, 1], &[2, 1], &[1, 2]]).unwrap();
        assert_eq!(
            m_value(&s, CubeNotion::IndependentGenerators, B).unwrap().m,
            2
        );
        assert_eq!(m_value(&s, CubeNotion::Unimodular, B).unwrap().m, 1);
    }

    #[test]
    fn budget_is_reported() {
        let full = PointSet::full(GridParams::new(2, 4).unwrap()).unwrap();
        assert_eq!(
            m_value(&full, CubeNotion::IndependentGenerators, 3),
            Err(SearchError::BudgetExceeded { budget: 3 })
        );
        assert!(matches!(
            find_cube(&full, 4, CubeNotion::VertexInjective, 2),
            Err(SearchError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn per_base_merge_matches_sequential() {
        let g = GridParams::new(3, 2).unwrap();
        let s = PointSet::from_indices(g, [0, 1, 3, 4, 5, 7, 8]).unwrap();
        for notion in CubeNotion::ALL {
            let seq = m_value(&s, notion, B).unwrap();
            let mut best: Option<MValue> = None;
            for rank in 0..s.len() as usize {
                let r = m_value_at_base(&s, notion, B, rank).unwrap();
                if best.as_ref().is_none_or(|b| r.m > b.m) {
                    best = Some(r);
                }
            }
            let best = best.unwrap();
            assert_eq!((best.m, best.witness), (seq.m, seq.witness));
        }
    }

    #[test]
    fn f_small_values() {
        // Values frozen from an independent brute-force enumeration.
        let table: [(u32, [(i64, i64, usize); 4]); 3] = [
            (1, [(1, 4, 0), (1, 2, 0), (3, 4, 1), (1, 1, 1)]),
            (2, [(1, 4, 0), (1, 2, 1), (3, 4, 1), (1, 1, 2)]),
            (3, [(1, 4, 1), (1, 2, 1), (3, 4, 2), (1, 1, 3)]),
        ];
        for (n, row) in table {
            for (num, den, want) in row {
                for notion in CubeNotion::ALL {
                    let f = f_exhaustive(2, n, &ratio(num, den), notion, B).unwrap();
                    assert_eq!(f.value, want, "f_2({n}, {num}/{den}) under {notion}");
                    assert!(f.argmin.density() >= ratio(num, den));
                    assert_eq!(m_value(&f.argmin, notion, B).unwrap().m, want);
                }
            }
        }
    }

    #[test]
    fn f_exhaustive_errors() {
        assert!(matches!(
            f_exhaustive(2, 5, &ratio(1, 2), CubeNotion::VertexInjective, B),
            Err(SearchError::TooLarge { cells: 32, .. })
        ));
        assert_eq!(
            f_exhaustive(2, 2, &ratio(0, 1), CubeNotion::VertexInjective, B),
            Err(SearchError::InvalidDensity)
        );
    }

    #[test]
    fn sampled_upper_bounds_exhaustive() {
        for c in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
            let exact = f_exhaustive(2, 3, &c, CubeNotion::IndependentGenerators, B).unwrap();
            let sampled = f_sampled(2, 3, &c, CubeNotion::IndependentGenerators, B, 50, 7).unwrap();
            assert!(sampled.value >= exact.value);
        }
    }
}
