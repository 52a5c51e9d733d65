//! Cube-free sets by Moser–Tardos resampling.
//!
//! Bad events are "the set contains the vertex image of an affine map
//! `{0,1}^r -> [N]^n`". Instead of listing all of them, each round asks the
//! cube search for a violated event and redraws only its cells.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bounds::{self, BoundError};
use crate::cube::{find_cube, AffineCube, CubeNotion, SearchError};
use crate::grid::{GridError, GridParams, PointSet};
use crate::rational::{self, from_int, Rational};

/// Default cap on the raw map count `N^{n(r+1)}` for catalog enumeration.
pub const DEFAULT_CATALOG_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LllError {
    #[error("catalog would enumerate {raw} maps, above the cap of {cap}")]
    CapExceeded { raw: BigUint, cap: u64 },
    #[error("inclusion probability must lie in [0, 1] with a 64-bit denominator")]
    InvalidProbability,
    #[error("cube dimension r must be at least 1")]
    InvalidDimension,
    #[error("no integer r strictly inside ((1 + ε/2) log2 n, (1 + ε) log2 n) for n = {n}")]
    NoValidR { n: u64 },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// The distinct vertex images `Q_i` of vertex-injective affine maps
/// `{0,1}^r -> [N]^n`, each stored as sorted cell indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadEventCatalog {
    pub grid: GridParams,
    pub r: u32,
    pub events: Vec<Vec<u64>>,
}

impl BadEventCatalog {
    /// `L`, the number of distinct events.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events fully contained in `set`.
    pub fn violated<'a>(&'a self, set: &'a PointSet) -> impl Iterator<Item = &'a Vec<u64>> + 'a {
        self.events
            .iter()
            .filter(|q| q.iter().all(|&i| set.contains(i)))
    }
}

/// Lists every image by choosing the images of `0, e_1, .., e_r` in all
/// `N^{n(r+1)}` ways.
pub fn enumerate_cube_images(
    grid: GridParams,
    r: u32,
    cap: u64,
) -> Result<BadEventCatalog, LllError> {
    let raw = bounds::count_affine_maps_bound(grid.base(), grid.dim(), r);
    if raw > BigUint::from(cap) {
        return Err(LllError::CapExceeded { raw, cap });
    }
    let cells = grid.size();
    let n = grid.dim() as usize;
    let r = r as usize;
    let coords: Vec<Vec<i64>> = (0..cells)
        .map(|i| grid.coords_of(i).into_iter().map(i64::from).collect())
        .collect();
    let mut events = BTreeSet::new();
    // choice[0] is the image of 0, choice[i] the image of e_i.
    let mut choice = alloc::vec![0u64; r + 1];
    loop {
        let z = &coords[choice[0] as usize];
        let gens: Vec<Vec<i64>> = choice[1..]
            .iter()
            .map(|&c| {
                coords[c as usize]
                    .iter()
                    .zip(z)
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect();
        let mut image = Vec::with_capacity(1 << r);
        let mut inside = true;
        for mask in 0..1u64 << r {
            let mut v = z.clone();
            for (i, g) in gens.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for k in 0..n {
                        v[k] += g[k];
                    }
                }
            }
            match grid.index_of_signed(&v) {
                Some(idx) => image.push(idx),
                None => {
                    inside = false;
                    break;
                }
            }
        }
        if inside {
            image.sort_unstable();
            let len = image.len();
            image.dedup();
            if image.len() == len {
                events.insert(image);
            }
        }
        // Odometer over choice.
        let mut pos = 0;
        loop {
            if pos > r {
                return Ok(BadEventCatalog {
                    grid,
                    r: r as u32,
                    events: events.into_iter().collect(),
                });
            }
            choice[pos] += 1;
            if choice[pos] < cells {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Probability that a uniformly random subset of exactly `c N^n` cells
/// contains a fixed set of `2^r` cells:
/// `prod_{i < 2^r} (c N^n - i) / (N^n - i)`. Requires `c N^n` integral.
pub fn containment_probability(grid: GridParams, r: u32, c: &Rational) -> Option<Rational> {
    let total = from_int(grid.size());
    let chosen = c * &total;
    if !chosen.is_integer() || chosen.is_negative() || chosen > total {
        return None;
    }
    let chosen = chosen.to_integer();
    let total = BigInt::from(grid.size());
    let mut p = Rational::one();
    for i in 0..1u64 << r {
        let i = BigInt::from(i);
        if i >= total {
            return Some(Rational::zero());
        }
        p *= Rational::new(&chosen - &i, &total - &i);
        if p.is_zero() {
            break;
        }
    }
    Some(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMeasure {
    /// Each cell independently with probability `p`.
    #[default]
    Bernoulli,
    /// A uniform subset of exactly `⌈p N^n⌉` cells; a violated cube's cells
    /// are moved to uniformly random empty cells.
    FixedSize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerConfig {
    pub p: Rational,
    pub seed: u64,
    pub max_rounds: u64,
    pub notion: CubeNotion,
    /// Node budget for each violation search.
    pub node_budget: u64,
    pub measure: SamplingMeasure,
}

impl SamplerConfig {
    pub fn new(p: Rational, seed: u64) -> Self {
        Self {
            p,
            seed,
            max_rounds: 100_000,
            notion: CubeNotion::default(),
            node_budget: crate::cube::DEFAULT_NODE_BUDGET,
            measure: SamplingMeasure::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleOutcome {
    /// No `r`-cube remains.
    CubeFree { set: PointSet, rounds: u64 },
    /// `max_rounds` resamplings were spent; the last violation is reported.
    RoundsExhausted {
        set: PointSet,
        rounds: u64,
        last_violation: AffineCube,
    },
}

impl SampleOutcome {
    pub fn set(&self) -> &PointSet {
        match self {
            SampleOutcome::CubeFree { set, .. } | SampleOutcome::RoundsExhausted { set, .. } => set,
        }
    }

    pub fn rounds(&self) -> u64 {
        match self {
            SampleOutcome::CubeFree { rounds, .. }
            | SampleOutcome::RoundsExhausted { rounds, .. } => *rounds,
        }
    }
}

struct Coin {
    num: u64,
    den: u64,
}

impl Coin {
    fn new(p: &Rational) -> Result<Self, LllError> {
        if p.is_negative() || *p > Rational::one() {
            return Err(LllError::InvalidProbability);
        }
        let num = p.numer().to_u64().ok_or(LllError::InvalidProbability)?;
        let den = p.denom().to_u64().ok_or(LllError::InvalidProbability)?;
        Ok(Self { num, den })
    }

    fn flip<R: Rng>(&self, rng: &mut R) -> bool {
        rng.gen_range(0..self.den) < self.num
    }
}

fn cube_cells(grid: &GridParams, cube: &AffineCube) -> Vec<u64> {
    let vs = cube
        .vertices()
        .expect("violations have at most 2^30 vertices");
    vs.iter()
        .map(|v| grid.index_of_signed(v).expect("violation lies in the grid"))
        .collect()
}

/// Moser–Tardos resampling until no `r`-cube (under `config.notion`) remains.
pub fn moser_tardos_sample(
    grid: GridParams,
    r: u32,
    config: &SamplerConfig,
) -> Result<SampleOutcome, LllError> {
    if r == 0 {
        return Err(LllError::InvalidDimension);
    }
    grid.require_materializable()?;
    let coin = Coin::new(&config.p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cells = grid.size();
    let mut set = PointSet::empty(grid);
    match config.measure {
        SamplingMeasure::Bernoulli => {
            for i in 0..cells {
                if coin.flip(&mut rng) {
                    set.insert(i);
                }
            }
        }
        SamplingMeasure::FixedSize => {
            let k = rational::ceil_int(&(&config.p * from_int(cells)))
                .to_usize()
                .expect("at most the grid size");
            for i in sample(&mut rng, cells as usize, k).iter() {
                set.insert(i as u64);
            }
        }
    }
    let mut rounds = 0;
    loop {
        let Some(cube) = find_cube(&set, r as usize, config.notion, config.node_budget)? else {
            return Ok(SampleOutcome::CubeFree { set, rounds });
        };
        if rounds >= config.max_rounds {
            return Ok(SampleOutcome::RoundsExhausted {
                set,
                rounds,
                last_violation: cube,
            });
        }
        rounds += 1;
        for cell in cube_cells(&grid, &cube) {
            match config.measure {
                SamplingMeasure::Bernoulli => {
                    if coin.flip(&mut rng) {
                        set.insert(cell);
                    } else {
                        set.remove(cell);
                    }
                }
                SamplingMeasure::FixedSize => {
                    set.remove(cell);
                    loop {
                        let target = rng.gen_range(0..cells);
                        if set.insert(target) {
                            break;
                        }
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    CubeFree,
    ContainsCube(AffineCube),
    /// The search budget ran out; nothing is claimed.
    Inconclusive,
}

/// Self-contained record of a constructed set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub grid: GridParams,
    pub r: u32,
    pub notion: CubeNotion,
    pub p: Option<Rational>,
    pub seed: Option<u64>,
    pub rounds: Option<u64>,
    pub density: Rational,
    pub cardinality: u64,
    pub verification: Verification,
}

impl Certificate {
    pub fn verified(&self) -> bool {
        self.verification == Verification::CubeFree
    }

    pub fn witness(&self) -> Option<&AffineCube> {
        match &self.verification {
            Verification::ContainsCube(c) => Some(c),
            _ => None,
        }
    }
}

/// Fresh search for an `r`-cube in `set`, sharing nothing with the sampler.
pub fn verify_construction(set: &PointSet, r: u32, notion: CubeNotion, budget: u64) -> Certificate {
    let verification = match find_cube(set, r as usize, notion, budget) {
        Ok(None) => Verification::CubeFree,
        Ok(Some(c)) => Verification::ContainsCube(c),
        Err(_) => Verification::Inconclusive,
    };
    Certificate {
        grid: set.grid(),
        r,
        notion,
        p: None,
        seed: None,
        rounds: None,
        density: set.density(),
        cardinality: set.len(),
        verification,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstructOptions {
    pub max_rounds: u64,
    pub node_budget: u64,
    pub notion: CubeNotion,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            max_rounds: 100_000,
            node_budget: crate::cube::DEFAULT_NODE_BUDGET,
            notion: CubeNotion::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructStatus {
    /// Cube-free by independent verification and on target size.
    Verified,
    SamplerExhausted,
    /// Cube-free but below the density or size target.
    BelowTarget,
    /// A search ran out of budget.
    Inconclusive,
}

/// `log_N` of each line of
/// `4 L p^{2^r} <= 4 N^{n(r+1)} N^{-2^r ⌊εn⌋} <= 4 N^{n(r+1)} N^{-2^r(εn - 1)}
///  <= N^2 N^{n(r+1) - 2^r εn/2} <= N^{n(r+3) - 2^{r-1} εn}`, with the
/// `log_N 4` term kept apart from the rational part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseChain {
    /// Rational exponents of the four right-hand lines (lines 1 and 2 carry an
    /// additional `log_N 4`).
    pub exponents: [Rational; 4],
    /// Each displayed inequality between consecutive lines holds.
    pub steps_hold: [bool; 3],
    /// The final exponent is negative, i.e. the last line is below 1.
    pub below_one: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub set: PointSet,
    pub r: u32,
    pub p: Rational,
    pub seed: u64,
    pub status: ConstructStatus,
    pub certificate: Certificate,
    pub rounds: u64,
    pub last_violation: Option<AffineCube>,
    pub dense: Option<DenseReport>,
    pub sparse: Option<SparseReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseReport {
    pub target_density: Rational,
    /// `3 sqrt(p(1-p)/N^n)`.
    pub tolerance: f64,
    pub meets_density: bool,
    pub eq_ep: bounds::EqEpCheck,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseReport {
    /// `N^{(1-ε)n}` is reached: `|S|^q >= N^{p}` with `(1-ε)n = p/q`.
    pub meets_size: bool,
    pub chain: SparseChain,
    /// `4 L p^{2^r} < 1` with `L = N^{n(r+1)}`, decided exactly.
    pub lll_holds: bool,
}

fn finish(
    outcome: Result<SampleOutcome, LllError>,
    r: u32,
    p: &Rational,
    seed: u64,
    opts: &ConstructOptions,
    on_target: impl Fn(&PointSet) -> bool,
) -> Result<
    (
        PointSet,
        ConstructStatus,
        Certificate,
        u64,
        Option<AffineCube>,
    ),
    LllError,
> {
    let (set, rounds, last, exhausted) = match outcome {
        Ok(SampleOutcome::CubeFree { set, rounds }) => (set, rounds, None, false),
        Ok(SampleOutcome::RoundsExhausted {
            set,
            rounds,
            last_violation,
        }) => (set, rounds, Some(last_violation), true),
        Err(LllError::Search(SearchError::BudgetExceeded { .. })) => {
            return Err(LllError::Search(SearchError::BudgetExceeded {
                budget: opts.node_budget,
            }))
        }
        Err(e) => return Err(e),
    };
    let mut cert = verify_construction(&set, r, opts.notion, opts.node_budget);
    cert.p = Some(p.clone());
    cert.seed = Some(seed);
    cert.rounds = Some(rounds);
    let status = if exhausted {
        ConstructStatus::SamplerExhausted
    } else {
        match cert.verification {
            Verification::Inconclusive => ConstructStatus::Inconclusive,
            // The sampler stopped on a cube-free set; a fresh search
            // disagreeing would be a bug, reported rather than hidden.
            Verification::ContainsCube(_) => ConstructStatus::Inconclusive,
            Verification::CubeFree if on_target(&set) => ConstructStatus::Verified,
            Verification::CubeFree => ConstructStatus::BelowTarget,
        }
    };
    Ok((set, status, cert, rounds, last))
}

/// A set of density about `c_n` with no cube of dimension
/// `r ∈ ((1+ε/2) log2 n, (1+ε) log2 n)`.
pub fn construct_dense_small_m(
    n: u32,
    base: u32,
    epsilon: &Rational,
    seed: u64,
    opts: &ConstructOptions,
) -> Result<Construction, LllError> {
    construct_dense_with_measure(n, base, epsilon, seed, opts, SamplingMeasure::Bernoulli)
}

pub fn construct_dense_with_measure(
    n: u32,
    base: u32,
    epsilon: &Rational,
    seed: u64,
    opts: &ConstructOptions,
    measure: SamplingMeasure,
) -> Result<Construction, LllError> {
    let grid = GridParams::new(base, n)?;
    let r = bounds::choose_r_dense(n as u64, epsilon)?.ok_or(LllError::NoValidR { n: n as u64 })?
        as u32;
    let p = bounds::c_n_schedule(n as u64, base)?;
    let eq_ep = bounds::check_eq_ep(n as u64, epsilon, base)?;
    grid.require_materializable()?;
    let config = SamplerConfig {
        p: p.clone(),
        seed,
        max_rounds: opts.max_rounds,
        notion: opts.notion,
        node_budget: opts.node_budget,
        measure,
    };
    let pf = rational::to_f64(&p);
    let tolerance = 3.0 * libm::sqrt(pf * (1.0 - pf) / grid.size() as f64);
    let meets = |s: &PointSet| rational::to_f64(&s.density()) >= pf - tolerance;
    let outcome = moser_tardos_sample(grid, r, &config);
    let (set, status, certificate, rounds, last_violation) =
        finish(outcome, r, &p, seed, opts, meets)?;
    let meets_density = meets(&set);
    Ok(Construction {
        set,
        r,
        p: p.clone(),
        seed,
        status,
        certificate,
        rounds,
        last_violation,
        dense: Some(DenseReport {
            target_density: p,
            tolerance,
            meets_density,
            eq_ep,
        }),
        sparse: None,
    })
}

/// `|S|^q >= N^a` where `(1 - ε) n = a/q`.
pub fn meets_size_target(size: u64, base: u32, n: u32, epsilon: &Rational) -> bool {
    let e = (Rational::one() - epsilon) * from_int(n as u64);
    if !e.is_positive() {
        return size >= 1;
    }
    let a = e.numer().magnitude().clone();
    let q = e.denom().magnitude().clone();
    let lhs: BigUint = BigUint::from(size).pow(&q);
    let rhs: BigUint = BigUint::from(base).pow(&a);
    lhs >= rhs
}

/// Evaluates the exponent chain for the sparse construction exactly.
pub fn sparse_chain(base: u32, n: u32, r: u32, epsilon: &Rational) -> SparseChain {
    let nq = from_int(n as u64);
    let two_r = from_int(1u64 << r);
    let en = epsilon * &nq;
    let floor_en = Rational::from_integer(en.floor().to_integer());
    let nr1 = &nq * from_int(r as u64 + 1);
    let line1 = &nr1 - &two_r * &floor_en;
    let line2 = &nr1 - &two_r * (&en - Rational::one());
    let line3 = from_int(2) + &nr1 - &two_r * &en / from_int(2);
    let line4 = &nq * from_int(r as u64 + 3) - &two_r / from_int(2) * &en;
    // log_N 4 + line2 <= line3  <=>  4 <= N^{line3 - line2}
    let gap = &line3 - &line2;
    let step2 = if gap.is_negative() {
        false
    } else {
        let g = gap.numer().magnitude().clone();
        let q = gap.denom().magnitude().clone();
        let lhs: BigUint = BigUint::from(4u8).pow(&q);
        let rhs: BigUint = BigUint::from(base).pow(&g);
        lhs <= rhs
    };
    SparseChain {
        steps_hold: [line1 <= line2, step2, line3 <= line4],
        below_one: line4.is_negative(),
        exponents: [line1, line2, line3, line4],
    }
}

/// A set of size at least `N^{(1-ε)n}` with no cube of dimension
/// `r = choose_r_sparse(ε)`. Uses the fixed-size measure, so `|S|` is exactly
/// `N^{n - ⌊εn⌋}`.
pub fn construct_sparse_bounded_m(
    n: u32,
    base: u32,
    epsilon: &Rational,
    seed: u64,
    opts: &ConstructOptions,
) -> Result<Construction, LllError> {
    construct_sparse_with_measure(n, base, epsilon, seed, opts, SamplingMeasure::FixedSize)
}

pub fn construct_sparse_with_measure(
    n: u32,
    base: u32,
    epsilon: &Rational,
    seed: u64,
    opts: &ConstructOptions,
    measure: SamplingMeasure,
) -> Result<Construction, LllError> {
    let grid = GridParams::new(base, n)?;
    grid.require_materializable()?;
    let r = bounds::choose_r_sparse(epsilon)?;
    let floor_en = (epsilon * from_int(n as u64)).floor().to_integer();
    let floor_en = floor_en.to_i64().expect("small exponent");
    let p = rational::pow_rational(&from_int(base as u64), -floor_en);
    let config = SamplerConfig {
        p: p.clone(),
        seed,
        max_rounds: opts.max_rounds,
        notion: opts.notion,
        node_budget: opts.node_budget,
        measure,
    };
    let meets = |s: &PointSet| meets_size_target(s.len(), base, n, epsilon);
    let outcome = moser_tardos_sample(grid, r, &config);
    let (set, status, certificate, rounds, last_violation) =
        finish(outcome, r, &p, seed, opts, meets)?;
    let chain = sparse_chain(base, n, r, epsilon);
    let lll_holds = lll_condition_for(base, n, r, &p);
    Ok(Construction {
        sparse: Some(SparseReport {
            meets_size: meets(&set),
            chain,
            lll_holds,
        }),
        set,
        r,
        p,
        seed,
        status,
        certificate,
        rounds,
        last_violation,
        dense: None,
    })
}

fn lll_condition_for(base: u32, n: u32, r: u32, p: &Rational) -> bool {
    if p.is_one() {
        return false;
    }
    bounds::lll_condition(&bounds::count_affine_maps_bound(base, n, r), p, r)
}
