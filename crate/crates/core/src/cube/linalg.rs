//! Exact integer linear algebra on small generator matrices.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Fraction-free (Bareiss) row reduction; returns the rank over the rationals.
fn bareiss_rank<T: Integer + Signed + Clone>(mut a: Vec<Vec<T>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = T::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            for c in col + 1..cols {
                let v = row[c].clone() * pivot_row[col].clone()
                    - row[col].clone() * pivot_row[c].clone();
                row[c] = v / prev.clone();
            }
            row[col] = T::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Rank over Q of the matrix whose rows are `rows`.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = rows.len().min(rows[0].len()) as f64;
    let max = rows
        .iter()
        .flatten()
        .map(|v| v.unsigned_abs())
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    // Hadamard bound on every minor (and so on every Bareiss intermediate),
    // times the pivot for the cross product.
    let bits = m * (libm::log2(max) + 0.5 * libm::log2(m.max(1.0))) * 2.0 + 2.0;
    if bits < 120.0 {
        bareiss_rank(
            rows.iter()
                .map(|r| r.iter().map(|&v| v as i128).collect())
                .collect(),
        )
    } else {
        bareiss_rank(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }
}

/// Nonzero invariant factors (Smith normal form diagonal, all positive) of an
/// integer matrix.
pub fn invariant_factors(rows: &[Vec<i64>]) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let nr = a.len();
    if nr == 0 {
        return Vec::new();
    }
    let nc = a[0].len();
    let mut factors = Vec::new();
    for t in 0..nr.min(nc) {
        // Smallest nonzero entry of the remaining block becomes the pivot.
        let Some((pi, pj)) = min_entry(&a, t) else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..nr {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..nc {
                    let v = &a[i][j] - &q * &a[t][j];
                    a[i][j] = v;
                }
                if !a[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..nc {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let v = &row[j] - &q * &row[t];
                    row[j] = v;
                }
                if !a[t][j].is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                // Pivot must divide the whole remaining block.
                let bad = (t + 1..nr)
                    .flat_map(|i| (t + 1..nc).map(move |j| (i, j)))
                    .find(|&(i, j)| !a[i][j].is_multiple_of(&a[t][t]));
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..nc {
                            let v = &a[t][j] + &a[i][j];
                            a[t][j] = v;
                        }
                    }
                }
            }
            let (pi, pj) = min_entry_in_cross(&a, t);
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
        }
        factors.push(a[t][t].abs());
    }
    factors
}

fn min_entry(a: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, v) in row.iter().enumerate().skip(t) {
            if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs() < a[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Smallest nonzero entry in row `t` or column `t` (the pivot itself counts).
fn min_entry_in_cross(a: &[Vec<BigInt>], t: usize) -> (usize, usize) {
    let mut best = (t, t);
    let better = |v: &BigInt, b: &BigInt| !v.is_zero() && (b.is_zero() || v.abs() < b.abs());
    for i in t..a.len() {
        if better(&a[i][t], &a[best.0][best.1]) {
            best = (i, t);
        }
    }
    for j in t..a[t].len() {
        if better(&a[t][j], &a[best.0][best.1]) {
            best = (t, j);
        }
    }
    best
}

/// Whether the rows extend to a basis of `Z^n`: full row rank and every
/// invariant factor equal to 1.
pub fn is_primitive_system(rows: &[Vec<i64>]) -> bool {
    if rows.is_empty() {
        return true;
    }
    let f = invariant_factors(rows);
    f.len() == rows.len() && f.iter().all(|x| x.is_one())
}
