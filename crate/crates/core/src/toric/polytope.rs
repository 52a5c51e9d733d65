use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::ToricError;
use crate::rational::Rational;

/// Largest bounding box scanned for lattice points.
pub const BOX_CAP: u64 = 10_000_000;

/// Convex hull of finitely many integer points, with its lattice points
/// listed in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePolytope {
    dim: usize,
    vertices: Vec<Vec<i64>>,
    points: Vec<Vec<i64>>,
}

impl LatticePolytope {
    pub fn new(vertices: Vec<Vec<i64>>) -> Result<Self, ToricError> {
        let Some(first) = vertices.first() else {
            return Err(ToricError::EmptyPolytope);
        };
        let dim = first.len();
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(ToricError::DimensionMismatch);
        }
        let points = hull_lattice_points(dim, &vertices)?;
        Ok(Self {
            dim,
            vertices,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    /// `P ∩ Z^n`, lexicographically sorted.
    pub fn lattice_points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.points
            .binary_search_by(|p| p.as_slice().cmp(x))
            .is_ok()
    }

    /// Whether `P ⊆ [0, hi]^n`.
    pub fn within_box(&self, hi: i64) -> bool {
        self.vertices
            .iter()
            .flatten()
            .all(|&x| (0..=hi).contains(&x))
    }
}

fn hull_lattice_points(dim: usize, vertices: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, ToricError> {
    let lo: Vec<i64> = (0..dim)
        .map(|d| vertices.iter().map(|v| v[d]).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..dim)
        .map(|d| vertices.iter().map(|v| v[d]).max().unwrap())
        .collect();
    let mut volume: u64 = 1;
    for d in 0..dim {
        let side = (hi[d] - lo[d]) as u64 + 1;
        volume = volume.saturating_mul(side);
        if volume > BOX_CAP {
            return Err(ToricError::BoxTooLarge { cap: BOX_CAP });
        }
    }
    let mut out = Vec::new();
    let mut x = lo.clone();
    loop {
        if vertices.iter().any(|v| *v == x) || in_hull(vertices, &x) {
            out.push(x.clone());
        }
        // Odometer with the last coordinate fastest, giving lex order.
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            if x[d] < hi[d] {
                x[d] += 1;
                break;
            }
            x[d] = lo[d];
        }
    }
}

/// Phase-one simplex over exact rationals with Bland's rule: is there
/// `λ >= 0` with `Σ λ_j v_j = x` and `Σ λ_j = 1`?
pub fn in_hull(vertices: &[Vec<i64>], x: &[i64]) -> bool {
    let m = vertices.len();
    let rows = x.len() + 1;
    let cols = m + rows;
    let zero = Rational::zero();
    let one = Rational::from_integer(BigInt::from(1));
    // Each row: coefficients for λ, then artificials, then the right side.
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(rows + 1);
    for i in 0..rows {
        let mut row = alloc::vec![zero.clone(); cols + 1];
        let rhs = if i < x.len() { x[i] } else { 1 };
        let sign = if rhs < 0 { -1 } else { 1 };
        for j in 0..m {
            let a = if i < x.len() { vertices[j][i] } else { 1 };
            row[j] = Rational::from_integer(BigInt::from(sign * a));
        }
        row[m + i] = one.clone();
        row[cols] = Rational::from_integer(BigInt::from(sign * rhs));
        t.push(row);
    }
    // Objective: minimise the sum of artificials, priced out.
    let mut obj = alloc::vec![zero.clone(); cols + 1];
    for row in &t {
        for j in 0..m {
            obj[j] -= &row[j];
        }
        obj[cols] -= &row[cols];
    }
    t.push(obj);
    let mut basis: Vec<usize> = (m..cols).collect();
    loop {
        let Some(enter) = (0..cols).find(|&j| t[rows][j].is_negative()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..rows {
            if !t[i][enter].is_positive() {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    let a = &t[i][cols] / &t[i][enter];
                    let b = &t[l][cols] / &t[l][enter];
                    a < b || (a == b && basis[i] < basis[l])
                }
            };
            if better {
                leave = Some(i);
            }
        }
        // Phase one is bounded below by zero, so a leaving row exists.
        let l = leave.expect("phase one is bounded");
        let piv = t[l][enter].clone();
        for v in t[l].iter_mut() {
            *v /= &piv;
        }
        let prow = t[l].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == l || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        basis[l] = enter;
    }
    t[rows][cols].is_zero()
}
