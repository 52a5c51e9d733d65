//! Property suites run by `hcube verify`: each check draws seeded random
//! instances (instance `i` has its own ChaCha stream, so results do not
//! depend on scheduling) and counts violations of a proved statement.

use std::fmt;
use std::str::FromStr;

use hcube_core::cube::{
    extend_cube, f_exhaustive, is_cube_in, m_value, m_value_oracle, SearchError,
    DEFAULT_NODE_BUDGET,
};
use hcube_core::grid::{max_pair_intersection, split_by_prefix};
use hcube_core::lll::containment_probability;
use hcube_core::rational::{from_int, pow_rational, ratio};
use hcube_core::{CubeNotion, GridParams, PointSet, Rational};
use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemmas,
    Oracle,
    Nesting,
    Monotonicity,
    Invariance,
    All,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Lemmas => "lemmas",
            Suite::Oracle => "oracle",
            Suite::Nesting => "nesting",
            Suite::Monotonicity => "monotonicity",
            Suite::Invariance => "invariance",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "oracle" => Ok(Suite::Oracle),
            "nesting" => Ok(Suite::Nesting),
            "monotonicity" => Ok(Suite::Monotonicity),
            "invariance" => Ok(Suite::Invariance),
            "all" => Ok(Suite::All),
            _ => Err(format!(
                "unknown suite {s:?} (expected lemmas, oracle, nesting, monotonicity, invariance or all)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: u64,
    /// Instances where the statement had nothing to check.
    pub vacuous: u64,
    /// Instances whose search ran out of budget.
    pub inconclusive: u64,
    pub violations: u64,
    pub first_violation: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.inconclusive == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

enum Outcome {
    Pass,
    Vacuous,
    Inconclusive,
    Violation(String),
}

type Check = fn(&mut ChaCha8Rng, u64) -> Outcome;

fn instance_rng(seed: u64, stream: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream << 40 | i);
    rng
}

fn run_check(name: &str, stream: u64, seed: u64, instances: u64, check: Check) -> CheckReport {
    let outcomes: Vec<Outcome> = (0..instances)
        .into_par_iter()
        .map(|i| check(&mut instance_rng(seed, stream, i), i))
        .collect();
    let mut report = CheckReport {
        name: name.to_string(),
        instances,
        vacuous: 0,
        inconclusive: 0,
        violations: 0,
        first_violation: None,
    };
    for o in outcomes {
        match o {
            Outcome::Pass => {}
            Outcome::Vacuous => report.vacuous += 1,
            Outcome::Inconclusive => report.inconclusive += 1,
            Outcome::Violation(msg) => {
                report.violations += 1;
                report.first_violation.get_or_insert(msg);
            }
        }
    }
    report
}

fn random_set(rng: &mut ChaCha8Rng, grid: GridParams, p: f64) -> PointSet {
    PointSet::from_indices(grid, (0..grid.size()).filter(|_| rng.gen_bool(p))).expect("in grid")
}

fn nonempty_set(rng: &mut ChaCha8Rng, grid: GridParams, p: f64) -> PointSet {
    let mut s = random_set(rng, grid, p);
    if s.is_empty() {
        s.insert(rng.gen_range(0..grid.size()));
    }
    s
}

/// Grids of at most 27 cells.
fn small_grid(rng: &mut ChaCha8Rng) -> GridParams {
    const SHAPES: [(u32, u32); 10] = [
        (2, 1),
        (2, 2),
        (2, 3),
        (2, 4),
        (3, 1),
        (3, 2),
        (3, 3),
        (4, 1),
        (4, 2),
        (5, 2),
    ];
    let (b, d) = SHAPES[rng.gen_range(0..SHAPES.len())];
    GridParams::new(b, d).expect("valid shape")
}

fn m_of(set: &PointSet, notion: CubeNotion) -> Result<usize, Outcome> {
    match m_value(set, notion, DEFAULT_NODE_BUDGET) {
        Ok(v) => Ok(v.m),
        Err(SearchError::BudgetExceeded { .. }) => Err(Outcome::Inconclusive),
        Err(e) => Err(Outcome::Violation(e.to_string())),
    }
}

macro_rules! m_or_return {
    ($set:expr, $notion:expr) => {
        match m_of($set, $notion) {
            Ok(m) => m,
            Err(o) => return o,
        }
    };
}

/// Some pair among `t >= 2/c` sets of density `>= c` in `[k]` meets in
/// density at least `2/((2/c) + 1)^2`.
fn check_intersection(rng: &mut ChaCha8Rng, _: u64) -> Outcome {
    let k = rng.gen_range(2..=40u32);
    let den = rng.gen_range(1..=8i64);
    let c = ratio(rng.gen_range(1..=den), den);
    let t = hcube_core::rational::ceil_int(&(from_int(2) / &c))
        .try_into()
        .unwrap_or(2usize)
        .max(2)
        + rng.gen_range(0..=2);
    let grid = GridParams::new(k, 1).expect("k >= 2");
    let min_size: u64 = hcube_core::rational::ceil_int(&(&c * from_int(k as u64)))
        .try_into()
        .expect("small");
    let family: Vec<PointSet> = (0..t)
        .map(|_| {
            let size = rng.gen_range(min_size..=k as u64) as usize;
            let cells = sample(rng, k as usize, size);
            PointSet::from_indices(grid, cells.iter().map(|i| i as u64)).expect("in grid")
        })
        .collect();
    let bound = from_int(2) / pow_rational(&(from_int(2) / &c + from_int(1)), 2);
    match max_pair_intersection(&family) {
        Ok((i, j, d)) if i != j && d >= bound => Outcome::Pass,
        Ok((i, j, d)) => Outcome::Violation(format!(
            "k={k} c={c} t={t}: pair ({i},{j}) density {d} < {bound}"
        )),
        Err(e) => Outcome::Violation(e.to_string()),
    }
}

/// `M(S) >= M(T_a ∩ T_b) + 1`, with the extended witness checked in `S`.
fn check_prefix(rng: &mut ChaCha8Rng, _: u64) -> Outcome {
    const SHAPES: [(u32, u32); 4] = [(2, 2), (2, 3), (3, 2), (3, 3)];
    let (base, n) = SHAPES[rng.gen_range(0..SHAPES.len())];
    let grid = GridParams::new(base, n).expect("valid");
    let r = rng.gen_range(1..n);
    let prefixes = GridParams::new(base, r).expect("valid");
    // Redraw until some pair of distinct prefixes has overlapping fibers.
    let (set, a, b, inter) = loop {
        let p = rng.gen_range(0.4..1.0);
        let set = random_set(rng, grid, p);
        let fibers = split_by_prefix(&set, r).expect("valid r");
        let mut pairs = Vec::new();
        for a in 0..fibers.len() {
            for b in 0..fibers.len() {
                if a != b {
                    let inter = fibers[a].intersection(&fibers[b]).expect("same grid");
                    if !inter.is_empty() {
                        pairs.push((a as u64, b as u64, inter));
                    }
                }
            }
        }
        if !pairs.is_empty() {
            let (a, b, inter) = pairs.swap_remove(rng.gen_range(0..pairs.len()));
            break (set, a, b, inter);
        }
    };
    let (ac, bc) = (prefixes.coords_of(a), prefixes.coords_of(b));
    for notion in [
        CubeNotion::VertexInjective,
        CubeNotion::IndependentGenerators,
    ] {
        let inner = match m_value(&inter, notion, DEFAULT_NODE_BUDGET) {
            Ok(v) => v,
            Err(_) => return Outcome::Inconclusive,
        };
        let ext = match extend_cube(&ac, &bc, &inner.witness) {
            Ok(c) => c,
            Err(e) => return Outcome::Violation(e.to_string()),
        };
        if ext.dim() != inner.m + 1 || is_cube_in(&set, &ext, notion) != Ok(true) {
            return Outcome::Violation(format!(
                "{notion}: extended witness {} not a cube of S",
                ext.canonical_text()
            ));
        }
        let m = m_or_return!(&set, notion);
        if m < inner.m + 1 {
            return Outcome::Violation(format!("{notion}: M(S) = {m} < {} + 1", inner.m));
        }
    }
    Outcome::Pass
}

/// The exact-size containment probability is below `c^{2^r}` for `r >= 1`.
fn check_hypergeometric(rng: &mut ChaCha8Rng, _: u64) -> Outcome {
    let (base, n) = loop {
        let b = rng.gen_range(2..=4u32);
        let n = rng.gen_range(1..=4u32);
        if (b as u64).pow(n) <= 256 {
            break (b, n);
        }
    };
    let grid = GridParams::new(base, n).expect("valid");
    let r = rng.gen_range(1..=3u32);
    let c = Rational::new(rng.gen_range(1..grid.size()).into(), grid.size().into());
    let prob = containment_probability(grid, r, &c).expect("integral c N^n");
    let bound = pow_rational(&c, 1 << r);
    if prob < bound {
        Outcome::Pass
    } else {
        Outcome::Violation(format!("{grid} r={r} c={c}: {prob} >= {bound}"))
    }
}

fn check_nesting(rng: &mut ChaCha8Rng, _: u64) -> Outcome {
    let grid = small_grid(rng);
    let p = rng.gen_range(0.2..1.0);
    let set = nonempty_set(rng, grid, p);
    let u = m_or_return!(&set, CubeNotion::Unimodular);
    let i = m_or_return!(&set, CubeNotion::IndependentGenerators);
    let v = m_or_return!(&set, CubeNotion::VertexInjective);
    if u <= i && i <= v && i <= grid.dim() as usize {
        Outcome::Pass
    } else {
        Outcome::Violation(format!(
            "{grid} {:?}: unimodular {u}, independent {i}, injective {v}",
            set.iter().collect::<Vec<_>>()
        ))
    }
}

/// `S ⊆ S'` implies `M(S) <= M(S')`.
fn check_inclusion(rng: &mut ChaCha8Rng, _: u64) -> Outcome {
    let grid = small_grid(rng);
    let p = rng.gen_range(0.3..1.0);
    let big = nonempty_set(rng, grid, p);
    let cells: Vec<u64> = big.iter().collect();
    let keep = rng.gen_range(1..=cells.len());
    let small = PointSet::from_indices(
        grid,
        sample(rng, cells.len(), keep).iter().map(|i| cells[i]),
    )
    .expect("in grid");
    for notion in CubeNotion::ALL {
        let (a, b) = (m_or_return!(&small, notion), m_or_return!(&big, notion));
        if a > b {
            return Outcome::Violation(format!("{notion}: M(S) = {a} > M(S') = {b}"));
        }
    }
    Outcome::Pass
}

/// `M` is unchanged by permuting coordinates and reflecting `p -> N-1-p`.
fn check_invariance(rng: &mut ChaCha8Rng, _: u64) -> Outcome {
    let grid = small_grid(rng);
    let p = rng.gen_range(0.3..1.0);
    let set = nonempty_set(rng, grid, p);
    let n = grid.dim() as usize;
    let top = grid.base() - 1;
    let perm = sample(rng, n, n).into_vec();
    let flips: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let image = set
        .map_points(grid, |p: &[u32]| {
            (0..n)
                .map(|k| {
                    if flips[k] {
                        top - p[perm[k]]
                    } else {
                        p[perm[k]]
                    }
                })
                .collect()
        })
        .expect("stays in grid");
    for notion in CubeNotion::ALL {
        let w = match m_value(&set, notion, DEFAULT_NODE_BUDGET) {
            Ok(w) => w,
            Err(_) => return Outcome::Inconclusive,
        };
        if !w.witness.is_canonical() || w.witness.canonical() != w.witness {
            return Outcome::Violation(format!(
                "witness {} not canonical",
                w.witness.canonical_text()
            ));
        }
        let m = m_or_return!(&image, notion);
        if m != w.m {
            return Outcome::Violation(format!(
                "{notion}: M changed from {} to {m} under perm {perm:?} flips {flips:?}",
                w.m
            ));
        }
    }
    Outcome::Pass
}

/// `m_value` against the brute-force oracle on every subset of `[2]^3` and
/// on random subsets of `[3]^3`, all notions.
pub fn oracle_report(seed: u64, random_sets: u64) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    let g2 = GridParams::new(2, 3).expect("valid");
    let g3 = GridParams::new(3, 3).expect("valid");
    let exhaustive: Vec<PointSet> = (0..256u64)
        .map(|mask| {
            PointSet::from_indices(g2, (0..8).filter(|i| mask >> i & 1 == 1)).expect("in grid")
        })
        .collect();
    let random: Vec<PointSet> = (0..random_sets)
        .map(|i| {
            let mut rng = instance_rng(seed, 5, i);
            let p = rng.gen_range(0.1..1.0);
            nonempty_set(&mut rng, g3, p)
        })
        .collect();
    for (name, sets) in [
        ("oracle [2]^3 exhaustive", exhaustive),
        ("oracle [3]^3 random", random),
    ] {
        for notion in CubeNotion::ALL {
            let outcomes: Vec<Outcome> = sets
                .par_iter()
                .map(|s| {
                    let fast = m_value(s, notion, DEFAULT_NODE_BUDGET);
                    let slow = m_value_oracle(s, notion);
                    match (fast, slow) {
                        (Err(SearchError::EmptySet), Err(_)) => Outcome::Vacuous,
                        (Ok(f), Ok(o)) if f.m == o => Outcome::Pass,
                        (Err(SearchError::BudgetExceeded { .. }), _) => Outcome::Inconclusive,
                        (f, o) => Outcome::Violation(format!(
                            "{:?}: search {:?} vs oracle {:?}",
                            s.iter().collect::<Vec<_>>(),
                            f.map(|v| v.m),
                            o
                        )),
                    }
                })
                .collect();
            let mut report = CheckReport {
                name: format!("{name} ({notion})"),
                instances: sets.len() as u64,
                vacuous: 0,
                inconclusive: 0,
                violations: 0,
                first_violation: None,
            };
            for o in outcomes {
                match o {
                    Outcome::Pass => {}
                    Outcome::Vacuous => report.vacuous += 1,
                    Outcome::Inconclusive => report.inconclusive += 1,
                    Outcome::Violation(m) => {
                        report.violations += 1;
                        report.first_violation.get_or_insert(m);
                    }
                }
            }
            reports.push(report);
        }
    }
    reports
}

/// `f_2(n, c)` is monotone in `c` for `n <= max_n`.
pub fn f_monotone_report(max_n: u32) -> CheckReport {
    let cs = [ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(1, 1)];
    let mut report = CheckReport {
        name: format!("f_2(n, c) monotone in c, n <= {max_n}"),
        instances: 0,
        vacuous: 0,
        inconclusive: 0,
        violations: 0,
        first_violation: None,
    };
    for n in 1..=max_n {
        let mut prev: Option<usize> = None;
        for c in &cs {
            report.instances += 1;
            match f_exhaustive(2, n, c, CubeNotion::default(), DEFAULT_NODE_BUDGET) {
                Ok(v) => {
                    if prev.is_some_and(|p| v.value < p) {
                        report.violations += 1;
                        report
                            .first_violation
                            .get_or_insert(format!("n={n}: f drops to {} at c={c}", v.value));
                    }
                    prev = Some(v.value);
                }
                Err(_) => report.inconclusive += 1,
            }
        }
    }
    report
}

pub fn lemma_reports(seed: u64, instances: u64) -> Vec<CheckReport> {
    vec![
        run_check(
            "intersection density lemma",
            1,
            seed,
            instances,
            check_intersection,
        ),
        run_check(
            "prefix lemma with extended witness",
            2,
            seed,
            instances,
            check_prefix,
        ),
        run_check(
            "hypergeometric product bound",
            3,
            seed,
            instances,
            check_hypergeometric,
        ),
    ]
}

pub fn run_suite(suite: Suite, seed: u64, instances: u64) -> SuiteReport {
    let checks = match suite {
        Suite::Lemmas => lemma_reports(seed, instances),
        Suite::Oracle => oracle_report(seed, 200),
        Suite::Nesting => {
            let mut v = vec![run_check(
                "notion nesting",
                4,
                seed,
                instances,
                check_nesting,
            )];
            // The strict example: {0,1,2,3} in [5]^1 gives 2 against 1.
            let s = PointSet::from_indices(GridParams::new(5, 1).expect("valid"), 0..4)
                .expect("in grid");
            let vi = m_value(&s, CubeNotion::VertexInjective, DEFAULT_NODE_BUDGET).map(|v| v.m);
            let ig =
                m_value(&s, CubeNotion::IndependentGenerators, DEFAULT_NODE_BUDGET).map(|v| v.m);
            let ok = vi == Ok(2) && ig == Ok(1);
            v.push(CheckReport {
                name: "strict separation on {0,1,2,3} in [5]^1".into(),
                instances: 1,
                vacuous: 0,
                inconclusive: 0,
                violations: u64::from(!ok),
                first_violation: (!ok).then(|| format!("injective {vi:?}, independent {ig:?}")),
            });
            v
        }
        Suite::Monotonicity => vec![
            run_check(
                "M monotone under inclusion",
                6,
                seed,
                instances,
                check_inclusion,
            ),
            f_monotone_report(3),
        ],
        Suite::Invariance => vec![run_check(
            "permutation and reflection invariance",
            7,
            seed,
            instances,
            check_invariance,
        )],
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::Lemmas,
                Suite::Oracle,
                Suite::Nesting,
                Suite::Monotonicity,
                Suite::Invariance,
            ] {
                all.extend(run_suite(s, seed, instances).checks);
            }
            all
        }
    };
    SuiteReport {
        suite: suite.to_string(),
        seed,
        passed: checks.iter().all(CheckReport::passed),
        checks,
    }
}
