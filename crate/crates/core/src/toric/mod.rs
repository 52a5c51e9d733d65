//! Toric evaluation codes over prime fields.

mod code;
mod field;
mod polytope;

pub use code::{
    build_code, code_rank, code_stats, family_report, family_row, minimum_distance,
    minimum_distance_part, polytope_m_value, rank_mod, stats_from_parts, CodeStats, FamilyRow,
    ToricCode, BLOCK_CAP, MESSAGE_CAP,
};
pub use field::{PrimeField, MAX_PRIME};
pub use polytope::{in_hull, LatticePolytope, BOX_CAP};

use thiserror::Error;

use crate::cube::SearchError;
use crate::grid::GridError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToricError {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u32),
    #[error("polytope needs at least one vertex")]
    EmptyPolytope,
    #[error("vertices have different dimensions")]
    DimensionMismatch,
    #[error("bounding box exceeds {cap} points")]
    BoxTooLarge { cap: u64 },
    #[error("polytope leaves the box [0, {hi}]^n")]
    OutOfBox { hi: i64 },
    #[error("block length exceeds {cap}")]
    BlockTooLong { cap: u64 },
    #[error("message space exceeds {cap}")]
    EnumerationTooLarge { cap: u64 },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Grid(#[from] GridError),
}
