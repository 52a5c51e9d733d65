//! Brute-force `M(S)` for tiny grids, sharing no code with the search.
//!
//! Every base `z ∈ S` and every strictly increasing tuple of differences
//! `p - z` (`p ∈ S`) is tried; the vertex set, independence (rational
//! elimination) and unimodularity (gcd of maximal minors) are all checked
//! from scratch.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::CubeNotion;
use crate::grid::PointSet;
use crate::rational::Rational;

/// Largest grid the oracle accepts.
pub const ORACLE_CELLS: u64 = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle accepts grids of at most 512 cells, got {0}")]
    TooLarge(u64),
    #[error("M of the empty set is undefined")]
    EmptySet,
}

fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| Rational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect();
    let mut rank = 0;
    let cols = a.first().map_or(0, |r| r.len());
    for col in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in 0..a.len() {
            if i != rank && !a[i][col].is_zero() {
                let f = &a[i][col] / &a[rank][col];
                for j in 0..cols {
                    let v = &a[i][j] - &f * &a[rank][j];
                    a[i][j] = v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Determinant by cofactor expansion along the first row.
fn det(m: &[Vec<i64>]) -> BigInt {
    match m.len() {
        0 => BigInt::one(),
        1 => BigInt::from(m[0][0]),
        k => {
            let mut total = BigInt::zero();
            for j in 0..k {
                if m[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let term = BigInt::from(m[0][j]) * det(&minor);
                if j % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            total
        }
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn minors_gcd(rows: &[Vec<i64>]) -> BigInt {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let mut g = BigInt::zero();
    for cols in combinations(n, m) {
        let sub: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c]).collect())
            .collect();
        g = g.gcd(&det(&sub));
    }
    g
}

fn satisfies(gens: &[Vec<i64>], notion: CubeNotion) -> bool {
    match notion {
        CubeNotion::VertexInjective => true,
        CubeNotion::IndependentGenerators => rational_rank(gens) == gens.len(),
        CubeNotion::Unimodular => {
            gens.is_empty() || (gens.len() <= gens[0].len() && minors_gcd(gens).abs().is_one())
        }
    }
}

fn has_cube(pts: &[Vec<i64>], set: &PointSet, m: usize, notion: CubeNotion) -> bool {
    for z in pts {
        let diffs: Vec<Vec<i64>> = pts
            .iter()
            .filter(|p| *p != z)
            .map(|p| p.iter().zip(z).map(|(a, b)| a - b).collect())
            .collect();
        'tuples: for idx in combinations(diffs.len(), m) {
            let gens: Vec<Vec<i64>> = idx.iter().map(|&i| diffs[i].clone()).collect();
            let mut verts = Vec::with_capacity(1 << m);
            for mask in 0..1u32 << m {
                let mut v = z.clone();
                for (i, g) in gens.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        for (x, y) in v.iter_mut().zip(g) {
                            *x += y;
                        }
                    }
                }
                if !set.contains_signed(&v) {
                    continue 'tuples;
                }
                verts.push(v);
            }
            verts.sort();
            verts.dedup();
            if verts.len() == 1 << m && satisfies(&gens, notion) {
                return true;
            }
        }
    }
    false
}

/// Ground-truth `M(S)` by plain enumeration.
pub fn m_value_oracle(set: &PointSet, notion: CubeNotion) -> Result<usize, OracleError> {
    let grid = set.grid();
    if grid.size() > ORACLE_CELLS {
        return Err(OracleError::TooLarge(grid.size()));
    }
    if set.is_empty() {
        return Err(OracleError::EmptySet);
    }
    let pts: Vec<Vec<i64>> = set
        .points()
        .map(|p| p.0.into_iter().map(i64::from).collect())
        .collect();
    let mut m = 0;
    while (1u64 << (m + 1)) <= set.len() && has_cube(&pts, set, m + 1, notion) {
        m += 1;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridParams;
    use alloc::vec;

    #[test]
    fn separation_example() {
        let s = PointSet::from_indices(GridParams::new(5, 1).unwrap(), [0, 1, 2, 3]).unwrap();
        assert_eq!(m_value_oracle(&s, CubeNotion::VertexInjective).unwrap(), 2);
        assert_eq!(
            m_value_oracle(&s, CubeNotion::IndependentGenerators).unwrap(),
            1
        );
        assert_eq!(m_value_oracle(&s, CubeNotion::Unimodular).unwrap(), 1);
    }

    #[test]
    fn helpers() {
        assert_eq!(det(&[vec![1, 1], vec![1, -1]]), BigInt::from(-2));
        assert_eq!(minors_gcd(&[vec![2, 3]]), BigInt::one());
        assert_eq!(minors_gcd(&[vec![2, 4]]), BigInt::from(2));
        assert_eq!(rational_rank(&[vec![1, 2], vec![2, 4]]), 1);
    }

    #[test]
    fn limits() {
        let g = GridParams::new(2, 10).unwrap();
        assert_eq!(
            m_value_oracle(&PointSet::empty(g), CubeNotion::VertexInjective),
            Err(OracleError::TooLarge(1024))
        );
        let g = GridParams::new(2, 2).unwrap();
        assert_eq!(
            m_value_oracle(&PointSet::empty(g), CubeNotion::VertexInjective),
            Err(OracleError::EmptySet)
        );
    }
}
