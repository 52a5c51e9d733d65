//! Parallel versions of the expensive searches. Work is split into
//! independent pieces, each piece is deterministic, and the pieces are merged
//! in a fixed order, so the answer never depends on the thread count.

use hcube_core::cube::{f_exhaustive_with_top, m_value_at_base, FValue, MValue, SearchError};
use hcube_core::toric::{minimum_distance_part, ToricCode, ToricError};
use hcube_core::{CubeNotion, PointSet, Rational};
use rayon::prelude::*;

/// Runs `f` on a dedicated pool of `threads` workers (at least one).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// `M(S)` from one independent search per base point, merged by largest `m`
/// and then earliest base. The budget applies to each base separately.
pub fn m_value_par(set: &PointSet, notion: CubeNotion, budget: u64) -> Result<MValue, SearchError> {
    if set.is_empty() {
        return Err(SearchError::EmptySet);
    }
    let parts: Vec<Result<MValue, SearchError>> = (0..set.len() as usize)
        .into_par_iter()
        .map(|rank| m_value_at_base(set, notion, budget, rank))
        .collect();
    let mut best: Option<MValue> = None;
    let mut nodes = 0;
    for part in parts {
        let part = part?;
        nodes += part.nodes;
        if best.as_ref().is_none_or(|b| part.m > b.m) {
            best = Some(part);
        }
    }
    let mut best = best.expect("nonempty set");
    best.nodes = nodes;
    Ok(best)
}

/// `f_N(n, c)` with one task per largest cell, merged in the sequential
/// order (including its stop at value 0).
pub fn f_exhaustive_par(
    base: u32,
    dim: u32,
    c: &Rational,
    notion: CubeNotion,
    budget: u64,
) -> Result<FValue, SearchError> {
    let cells = (base as u64).saturating_pow(dim).min(32) as u32;
    let parts: Vec<Result<Option<FValue>, SearchError>> = (0..cells)
        .into_par_iter()
        .map(|top| f_exhaustive_with_top(base, dim, c, notion, budget, top))
        .collect();
    let mut best: Option<FValue> = None;
    let mut subsets = 0;
    for part in parts {
        if let Some(v) = part? {
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

/// Minimum distance with one task per leading message coordinate.
pub fn minimum_distance_par(code: &ToricCode) -> Result<usize, ToricError> {
    let parts: Vec<Result<Option<usize>, ToricError>> = (0..code.dimension())
        .into_par_iter()
        .map(|lead| minimum_distance_part(code, lead))
        .collect();
    let mut best = code.block_length();
    for part in parts {
        if let Some(w) = part? {
            best = best.min(w);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hcube_core::cube::{f_exhaustive, m_value, DEFAULT_NODE_BUDGET};
    use hcube_core::rational::ratio;
    use hcube_core::toric::{build_code, minimum_distance, LatticePolytope};
    use hcube_core::GridParams;

    #[test]
    fn parallel_matches_sequential() {
        let g = GridParams::new(3, 2).unwrap();
        for mask in [0b1_1111_1111u64, 0b1_0110_1101, 0b0_0101_0111, 0b1] {
            let s = PointSet::from_indices(g, (0..9).filter(|i| mask >> i & 1 == 1)).unwrap();
            for notion in CubeNotion::ALL {
                let seq = m_value(&s, notion, DEFAULT_NODE_BUDGET).unwrap();
                for threads in [1, 4] {
                    let par =
                        with_threads(threads, || m_value_par(&s, notion, DEFAULT_NODE_BUDGET))
                            .unwrap();
                    assert_eq!((par.m, &par.witness), (seq.m, &seq.witness));
                }
            }
        }
        for c in [ratio(1, 4), ratio(1, 2), ratio(1, 1)] {
            let seq = f_exhaustive(2, 3, &c, CubeNotion::default(), DEFAULT_NODE_BUDGET).unwrap();
            let par = with_threads(4, || {
                f_exhaustive_par(2, 3, &c, CubeNotion::default(), DEFAULT_NODE_BUDGET)
            })
            .unwrap();
            assert_eq!(par, seq);
        }
        let p = LatticePolytope::new(vec![vec![0, 0], vec![2, 0], vec![0, 1]]).unwrap();
        let code = build_code(&p, 5).unwrap();
        assert_eq!(
            with_threads(3, || minimum_distance_par(&code)).unwrap(),
            minimum_distance(&code).unwrap()
        );
    }
}
