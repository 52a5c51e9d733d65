//! Affine cubes `z + {0,1}^m A` and the maximal cube dimension `M(S)`.
//!
//! Three cube notions are distinguished. A cube is *vertex-injective* when its
//! `2^m` subset sums are distinct, has *independent generators* when the
//! generators are linearly independent over Q, and is *unimodular* when the
//! generators extend to a basis of `Z^n`. Each notion implies the previous.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};
use core::str::FromStr;

use thiserror::Error;

use crate::grid::PointSet;

pub mod linalg;
pub mod oracle;
pub mod search;

pub use oracle::m_value_oracle;
pub use search::{
    f_exhaustive, f_exhaustive_with_top, f_sampled, find_cube, m_value, m_value_at_base, FValue,
    MValue, SearchError, DEFAULT_NODE_BUDGET, EXHAUSTIVE_CELLS,
};

/// Largest cube dimension whose vertex list is materialized.
pub const MAX_VERTEX_DIM: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum CubeNotion {
    VertexInjective,
    #[default]
    IndependentGenerators,
    Unimodular,
}

impl CubeNotion {
    pub const ALL: [CubeNotion; 3] = [
        CubeNotion::VertexInjective,
        CubeNotion::IndependentGenerators,
        CubeNotion::Unimodular,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CubeNotion::VertexInjective => "vertex-injective",
            CubeNotion::IndependentGenerators => "independent",
            CubeNotion::Unimodular => "unimodular",
        }
    }
}

impl fmt::Display for CubeNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CubeNotion {
    type Err = CubeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vertex-injective" | "injective" | "vertex_injective" => Ok(Self::VertexInjective),
            "independent" | "independent-generators" | "independent_generators" => {
                Ok(Self::IndependentGenerators)
            }
            "unimodular" => Ok(Self::Unimodular),
            _ => Err(CubeError::UnknownNotion(s.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CubeError {
    #[error("generator of length {got} in ambient dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cube dimension {0} exceeds the vertex materialization limit of 30")]
    DimensionOverflow(usize),
    #[error("prefixes must differ")]
    EqualPrefixes,
    #[error("inner cube is not vertex-injective")]
    NotInjective,
    #[error("unknown cube notion `{0}`")]
    UnknownNotion(String),
}

/// Base point `z` and generators `v_1..v_m`; the vertex for `T ⊆ {1..m}` is
/// `z + sum_{i in T} v_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineCube {
    base: Vec<i64>,
    generators: Vec<Vec<i64>>,
}

impl AffineCube {
    pub fn new(base: Vec<i64>, generators: Vec<Vec<i64>>) -> Result<Self, CubeError> {
        for g in &generators {
            if g.len() != base.len() {
                return Err(CubeError::DimensionMismatch {
                    expected: base.len(),
                    got: g.len(),
                });
            }
        }
        Ok(Self { base, generators })
    }

    pub fn point(base: Vec<i64>) -> Self {
        Self {
            base,
            generators: Vec::new(),
        }
    }

    pub fn base(&self) -> &[i64] {
        &self.base
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    /// Cube dimension `m`.
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Dimension `n` of the ambient lattice.
    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// The vertex selected by the bits of `mask`.
    pub fn vertex(&self, mask: u64) -> Vec<i64> {
        let mut v = self.base.clone();
        for (i, g) in self.generators.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for (x, y) in v.iter_mut().zip(g) {
                    *x += y;
                }
            }
        }
        v
    }

    /// Every subset sum in mask order, with repeats removed (first occurrence
    /// kept). Has `2^m` entries iff the cube is vertex-injective.
    pub fn vertices(&self) -> Result<Vec<Vec<i64>>, CubeError> {
        let m = self.dim();
        if m > MAX_VERTEX_DIM {
            return Err(CubeError::DimensionOverflow(m));
        }
        let all: Vec<Vec<i64>> = (0..1u64 << m).map(|mask| self.vertex(mask)).collect();
        let mut seen = alloc::collections::BTreeSet::new();
        Ok(all.into_iter().filter(|v| seen.insert(v.clone())).collect())
    }

    pub fn is_vertex_injective(&self) -> bool {
        match self.vertices() {
            Ok(v) => v.len() == 1usize << self.dim(),
            // 2^m > 2^30 distinct vertices is beyond anything we can hold;
            // injectivity still follows from independence.
            Err(_) => self.has_independent_generators(),
        }
    }

    pub fn has_independent_generators(&self) -> bool {
        linalg::rank(&self.generators) == self.dim()
    }

    pub fn is_unimodular(&self) -> bool {
        self.has_independent_generators() && linalg::is_primitive_system(&self.generators)
    }

    pub fn satisfies(&self, notion: CubeNotion) -> bool {
        match notion {
            CubeNotion::VertexInjective => self.is_vertex_injective(),
            // Independence already forces distinct subset sums.
            CubeNotion::IndependentGenerators => self.has_independent_generators(),
            CubeNotion::Unimodular => self.is_unimodular(),
        }
    }

    /// Canonical form: every generator has a positive first nonzero entry
    /// (flipping `v` to `-v` moves the base to `z + v`) and the generators are
    /// sorted lexicographically. The base is then the lexicographically
    /// smallest vertex.
    pub fn canonical(&self) -> AffineCube {
        let mut base = self.base.clone();
        let mut gens = self.generators.clone();
        for g in gens.iter_mut() {
            if g.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
                for (b, x) in base.iter_mut().zip(g.iter_mut()) {
                    *b += *x;
                    *x = -*x;
                }
            }
        }
        gens.sort();
        AffineCube {
            base,
            generators: gens,
        }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// Single-line text form, e.g. `base=[0,0] gens=[[0,1],[1,0]]`.
    pub fn canonical_text(&self) -> String {
        let mut s = String::from("base=");
        write_vec(&mut s, &self.base);
        s.push_str(" gens=[");
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write_vec(&mut s, g);
        }
        s.push(']');
        s
    }
}

fn write_vec(s: &mut String, v: &[i64]) {
    s.push('[');
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{x}");
    }
    s.push(']');
}

/// A cube certified to lie in a set under a notion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub notion: CubeNotion,
    pub cube: AffineCube,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "notion={} m={} {}",
            self.notion,
            self.cube.dim(),
            self.cube.canonical_text()
        )
    }
}

/// Whether `cube` satisfies `notion` and has every vertex in `set`.
pub fn is_cube_in(
    set: &PointSet,
    cube: &AffineCube,
    notion: CubeNotion,
) -> Result<bool, CubeError> {
    let n = set.grid().dim() as usize;
    if cube.ambient_dim() != n {
        return Err(CubeError::DimensionMismatch {
            expected: n,
            got: cube.ambient_dim(),
        });
    }
    let m = cube.dim();
    if m >= 64 || (1u64 << m) > set.len() {
        return Ok(false);
    }
    if !(0..1u64 << m).all(|mask| set.contains_signed(&cube.vertex(mask))) {
        return Ok(false);
    }
    Ok(cube.satisfies(notion))
}

/// Lifts a cube in the suffix grid to one of dimension `m + 1` in the full
/// grid: base `a x z`, generators `(b - a) x 0` followed by `0 x v_i`. The
/// vertices are `{a x y} ∪ {b x y}` over the vertices `y` of `inner`.
pub fn extend_cube(a: &[u32], b: &[u32], inner: &AffineCube) -> Result<AffineCube, CubeError> {
    if a.len() != b.len() {
        return Err(CubeError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a == b {
        return Err(CubeError::EqualPrefixes);
    }
    if !inner.is_vertex_injective() {
        return Err(CubeError::NotInjective);
    }
    let r = a.len();
    let mut base: Vec<i64> = a.iter().map(|&x| x as i64).collect();
    base.extend_from_slice(inner.base());
    let mut first: Vec<i64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| y as i64 - x as i64)
        .collect();
    first.resize(r + inner.ambient_dim(), 0);
    let mut generators = Vec::with_capacity(inner.dim() + 1);
    generators.push(first);
    for g in inner.generators() {
        let mut v = alloc::vec![0i64; r];
        v.extend_from_slice(g);
        generators.push(v);
    }
    Ok(AffineCube { base, generators })
}

/// Convenience: the vertex list of a cube (see [`AffineCube::vertices`]).
pub fn cube_vertices(cube: &AffineCube) -> Result<Vec<Vec<i64>>, CubeError> {
    cube.vertices()
}
