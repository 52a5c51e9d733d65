use alloc::vec::Vec;

use num_bigint::BigInt;

use super::{LatticePolytope, PrimeField, ToricError};
use crate::cube::{m_value, CubeNotion};
use crate::grid::{GridParams, PointSet};
use crate::rational::Rational;

/// Largest accepted block length `(q-1)^n`.
pub const BLOCK_CAP: u64 = 1_000_000;
/// Largest accepted message space `q^k` for exhaustive distance.
pub const MESSAGE_CAP: u64 = 10_000_000;

/// Evaluation code of the monomials `x^u`, `u ∈ P ∩ Z^n`, on `(F_q^*)^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricCode {
    pub field: PrimeField,
    pub polytope: LatticePolytope,
    /// Torus points in lexicographic order over `[1, q-1]^n`.
    pub torus: Vec<Vec<u32>>,
    /// One row per lattice point, one column per torus point.
    pub generator: Vec<Vec<u32>>,
}

impl ToricCode {
    pub fn block_length(&self) -> usize {
        self.torus.len()
    }

    /// `k = |P ∩ Z^n|`.
    pub fn dimension(&self) -> usize {
        self.generator.len()
    }

    /// Same code with columns rearranged by `perm` (column `j` becomes
    /// old column `perm[j]`).
    pub fn permute_columns(&self, perm: &[usize]) -> ToricCode {
        let mut out = self.clone();
        out.torus = perm.iter().map(|&j| self.torus[j].clone()).collect();
        out.generator = self
            .generator
            .iter()
            .map(|row| perm.iter().map(|&j| row[j]).collect())
            .collect();
        out
    }
}

pub fn build_code(polytope: &LatticePolytope, q: u32) -> Result<ToricCode, ToricError> {
    let field = PrimeField::new(q)?;
    let n = polytope.dim();
    if !polytope.within_box(q as i64 - 2) {
        return Err(ToricError::OutOfBox { hi: q as i64 - 2 });
    }
    let side = (q - 1) as u64;
    let mut block: u64 = 1;
    for _ in 0..n {
        block = block.saturating_mul(side);
        if block > BLOCK_CAP {
            return Err(ToricError::BlockTooLong { cap: BLOCK_CAP });
        }
    }
    let mut torus = Vec::with_capacity(block as usize);
    let mut t = alloc::vec![1u32; n];
    'torus: loop {
        torus.push(t.clone());
        let mut d = n;
        while d > 0 {
            d -= 1;
            if t[d] < q - 1 {
                t[d] += 1;
                continue 'torus;
            }
            t[d] = 1;
        }
        break;
    }
    let generator = polytope
        .lattice_points()
        .iter()
        .map(|u| {
            torus
                .iter()
                .map(|t| {
                    u.iter()
                        .zip(t)
                        .fold(1, |acc, (&e, &ti)| field.mul(acc, field.pow(ti, e as u64)))
                })
                .collect()
        })
        .collect();
    Ok(ToricCode {
        field,
        polytope: polytope.clone(),
        torus,
        generator,
    })
}

/// Row rank of a matrix over `F_q`.
pub fn rank_mod(field: &PrimeField, rows: &[Vec<u32>]) -> usize {
    let mut a: Vec<Vec<u32>> = rows.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        let inv = field.inv(a[rank][c]).expect("pivot is nonzero");
        for v in a[rank].iter_mut() {
            *v = field.mul(*v, inv);
        }
        let prow = a[rank].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let f = row[c];
                for (v, &p) in row.iter_mut().zip(&prow) {
                    *v = field.sub(*v, field.mul(f, p));
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn code_rank(code: &ToricCode) -> usize {
    rank_mod(&code.field, &code.generator)
}

fn check_message_space(code: &ToricCode) -> Result<(), ToricError> {
    let q = code.field.order() as u64;
    let mut space: u64 = 1;
    for _ in 0..code.dimension() {
        space = space.saturating_mul(q);
        if space > MESSAGE_CAP {
            return Err(ToricError::EnumerationTooLarge { cap: MESSAGE_CAP });
        }
    }
    Ok(())
}

/// Minimum weight over messages whose last nonzero coordinate is `lead` and
/// equals 1. Every nonzero codeword is a scalar multiple of exactly one such
/// message, and scaling keeps the weight, so the parts `lead = 0..k` together
/// cover the code. Returns `None` when `lead >= k`.
pub fn minimum_distance_part(code: &ToricCode, lead: usize) -> Result<Option<usize>, ToricError> {
    check_message_space(code)?;
    let k = code.dimension();
    if lead >= k {
        return Ok(None);
    }
    let f = &code.field;
    let q = f.order();
    let len = code.block_length();
    let mut word = code.generator[lead].clone();
    let mut best = weight(&word);
    // Free digits are the coordinates below `lead`; stepping digit i adds
    // row i once, including on wrap-around since q * row = 0.
    let mut digits = alloc::vec![0u32; lead];
    'outer: loop {
        if best == 1 {
            break;
        }
        let mut i = 0;
        loop {
            if i == lead {
                break 'outer;
            }
            let row = &code.generator[i];
            for j in 0..len {
                word[j] = f.add(word[j], row[j]);
            }
            digits[i] += 1;
            if digits[i] < q {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        let w = weight(&word);
        if w < best {
            best = w;
        }
    }
    Ok(Some(best))
}

fn weight(word: &[u32]) -> usize {
    word.iter().filter(|&&x| x != 0).count()
}

/// Minimum Hamming weight of a nonzero codeword, by exhaustive enumeration.
pub fn minimum_distance(code: &ToricCode) -> Result<usize, ToricError> {
    check_message_space(code)?;
    let mut best = code.block_length();
    for lead in 0..code.dimension() {
        if let Some(w) = minimum_distance_part(code, lead)? {
            best = best.min(w);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeStats {
    pub q: u32,
    pub n: usize,
    pub block_length: usize,
    pub k: usize,
    pub dmin: usize,
    /// `dmin / (q-1)^n`.
    pub relative_distance: Rational,
    /// `k / (q-1)^n`.
    pub rate: Rational,
    /// `M` of the lattice points under the default notion.
    pub m: usize,
}

/// `M(P ∩ Z^n)` on the grid `[max(q-1, 2)]^n`.
pub fn polytope_m_value(
    polytope: &LatticePolytope,
    q: u32,
    budget: u64,
) -> Result<usize, ToricError> {
    let base = (q - 1).max(2);
    let grid = GridParams::new(base, polytope.dim() as u32)?;
    let pts: Vec<Vec<u32>> = polytope
        .lattice_points()
        .iter()
        .map(|p| p.iter().map(|&x| x as u32).collect())
        .collect();
    let set = PointSet::from_points(grid, pts.iter().map(|p| p.as_slice()))?;
    Ok(m_value(&set, CubeNotion::default(), budget)?.m)
}

pub fn stats_from_parts(code: &ToricCode, dmin: usize, m: usize) -> CodeStats {
    let block = code.block_length();
    let k = code.dimension();
    let frac = |a: usize| Rational::new(BigInt::from(a), BigInt::from(block));
    CodeStats {
        q: code.field.order(),
        n: code.polytope.dim(),
        block_length: block,
        k,
        dmin,
        relative_distance: frac(dmin),
        rate: frac(k),
        m,
    }
}

pub fn code_stats(
    polytope: &LatticePolytope,
    q: u32,
    budget: u64,
) -> Result<CodeStats, ToricError> {
    let code = build_code(polytope, q)?;
    let dmin = minimum_distance(&code)?;
    let m = polytope_m_value(polytope, q, budget)?;
    Ok(stats_from_parts(&code, dmin, m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRow {
    pub n: usize,
    pub q: u32,
    pub rate: Rational,
    pub relative_distance: Rational,
    pub m: usize,
    /// `log_{q-1} |P ∩ Z^n| / n`; undefined for `q = 2` or `n = 0`.
    pub entropy_term: Option<f64>,
}

pub fn family_row(stats: &CodeStats) -> FamilyRow {
    let entropy_term = if stats.q > 2 && stats.n > 0 {
        Some(libm::log(stats.k as f64) / libm::log((stats.q - 1) as f64) / stats.n as f64)
    } else {
        None
    };
    FamilyRow {
        n: stats.n,
        q: stats.q,
        rate: stats.rate.clone(),
        relative_distance: stats.relative_distance.clone(),
        m: stats.m,
        entropy_term,
    }
}

/// One row per family member, in input order.
pub fn family_report(
    family: &[(LatticePolytope, u32)],
    budget: u64,
) -> Result<Vec<FamilyRow>, ToricError> {
    family
        .iter()
        .map(|(p, q)| code_stats(p, *q, budget).map(|s| family_row(&s)))
        .collect()
}
