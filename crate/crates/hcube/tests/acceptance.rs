//! End-to-end acceptance checks. Each test writes one PASS/FAIL line straight
//! to stderr (bypassing the test harness capture) and then asserts.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hcube::suites::{lemma_reports, oracle_report, CheckReport, DEFAULT_SEED};
use hcube_core::bounds::{
    alpha_for, c_n_schedule, choose_r_sparse, lll_condition, lower_bound_closed_form,
    lower_bound_iterated,
};
use hcube_core::cube::{f_exhaustive, find_cube, m_value, DEFAULT_NODE_BUDGET};
use hcube_core::lll::{
    construct_sparse_bounded_m, construct_sparse_with_measure, ConstructOptions, ConstructStatus,
    SamplingMeasure,
};
use hcube_core::rational::ratio;
use hcube_core::toric::{build_code, code_rank, code_stats, minimum_distance, LatticePolytope};
use hcube_core::{CubeNotion, GridParams, PointSet, Rational};
use num_bigint::BigUint;

const B: u64 = DEFAULT_NODE_BUDGET;

fn report(name: &str, pass: bool, detail: &str, elapsed: Duration) {
    let line = format!(
        "acceptance [{}] {name}: {detail} ({:.2}s)\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn summarize(checks: &[CheckReport]) -> String {
    checks
        .iter()
        .map(|c| format!("{} {}/{} violations", c.name, c.violations, c.instances))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Exact f_2(n, c) for c = 1/4, 1/2, 3/4, 1, computed by an independent
/// brute-force script (identical for all three notions at n <= 3).
const F2_TABLE: [[usize; 4]; 4] = [[0, 0, 1, 1], [0, 1, 1, 2], [1, 1, 2, 3], [1, 2, 2, 4]];

fn densities() -> [Rational; 4] {
    [ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(1, 1)]
}

#[test]
fn oracle_equivalence() {
    let start = Instant::now();
    let checks = oracle_report(DEFAULT_SEED, 200);
    let elapsed = start.elapsed();
    let counts_ok = checks.len() == 6
        && checks[..3].iter().all(|c| c.instances == 256)
        && checks[3..].iter().all(|c| c.instances == 200);
    let pass =
        counts_ok && checks.iter().all(CheckReport::passed) && elapsed < Duration::from_secs(60);
    report("oracle equivalence", pass, &summarize(&checks), elapsed);
    assert!(pass, "{checks:#?}");
}

#[test]
fn boundary_identity() {
    let start = Instant::now();
    let values: Vec<usize> = (1..=4)
        .map(|n| {
            f_exhaustive(2, n, &ratio(1, 1), CubeNotion::IndependentGenerators, B)
                .unwrap()
                .value
        })
        .collect();
    let elapsed = start.elapsed();
    let pass = values == [1, 2, 3, 4] && elapsed < Duration::from_secs(300);
    report(
        "f_2(n, 1) = n for n = 1..4",
        pass,
        &format!("values {values:?}"),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn notion_separation() {
    let start = Instant::now();
    let s = PointSet::from_indices(GridParams::new(5, 1).unwrap(), 0..4).unwrap();
    let vi = m_value(&s, CubeNotion::VertexInjective, B).unwrap().m;
    let ig = m_value(&s, CubeNotion::IndependentGenerators, B).unwrap().m;
    let pass = vi == 2 && ig == 1;
    report(
        "notion separation on {0,1,2,3} in [5]^1",
        pass,
        &format!("vertex-injective {vi}, independent {ig}"),
        start.elapsed(),
    );
    assert!(pass);
}

#[test]
fn lemma_suites() {
    let start = Instant::now();
    let checks = lemma_reports(DEFAULT_SEED, 1000);
    let pass = checks.len() == 3
        && checks
            .iter()
            .all(|c| c.passed() && c.instances == 1000 && c.vacuous == 0);
    report("lemma suites", pass, &summarize(&checks), start.elapsed());
    assert!(pass, "{checks:#?}");
}

#[test]
fn bound_consistency() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut compared = 0;
    for n in 1..=4u32 {
        let mut prev = 0;
        for (ci, c) in densities().iter().enumerate() {
            let f = f_exhaustive(2, n, c, CubeNotion::IndependentGenerators, B)
                .unwrap()
                .value;
            if f != F2_TABLE[n as usize - 1][ci] {
                failures.push(format!(
                    "f(n={n}, c={c}) = {f}, brute force says {}",
                    F2_TABLE[n as usize - 1][ci]
                ));
            }
            if f < prev {
                failures.push(format!("f not monotone at n={n}, c={c}"));
            }
            prev = f;
            let it = lower_bound_iterated(n as u64, c, 2).unwrap();
            compared += 1;
            if it as usize > f {
                failures.push(format!("iterated {it} > f = {f} at n={n}, c={c}"));
            }
            if n >= 2 && *c < ratio(1, 1) {
                for eps in [ratio(1, 10), ratio(1, 2), ratio(1, 1)] {
                    let cf = lower_bound_closed_form(n as u64, c, 2, &alpha_for(&eps)).unwrap();
                    compared += 1;
                    if cf.value as usize > f {
                        failures.push(format!(
                            "closed form {} > f = {f} at n={n}, c={c}, ε={eps}",
                            cf.value
                        ));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(600);
    report(
        "bound consistency and monotonicity in c",
        pass,
        &format!(
            "{compared} bound comparisons, {} failures {failures:?}",
            failures.len()
        ),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn sparse_golden_run() {
    let start = Instant::now();
    let eps = ratio(1, 2);
    let r = choose_r_sparse(&eps).unwrap();
    let opts = ConstructOptions::default();
    let seeds: Vec<u64> = (0..10).map(|i| DEFAULT_SEED + i).collect();
    let mut ok = 0;
    for &seed in &seeds {
        let c = construct_sparse_bounded_m(12, 2, &eps, seed, &opts).unwrap();
        // Re-check outside the constructor with a fresh search.
        let cube_free = find_cube(&c.set, r as usize, opts.notion, B)
            .unwrap()
            .is_none();
        if c.status == ConstructStatus::Verified && c.set.len() >= 64 && cube_free && c.r == r {
            ok += 1;
        }
    }
    // The product measure, for the record: |S| >= 64 about half the time.
    let bernoulli = seeds
        .iter()
        .filter(|&&s| {
            construct_sparse_with_measure(12, 2, &eps, s, &opts, SamplingMeasure::Bernoulli)
                .unwrap()
                .status
                == ConstructStatus::Verified
        })
        .count();
    let elapsed = start.elapsed();
    let pass = ok >= 9 && elapsed < Duration::from_secs(300);
    report(
        "sparse construction golden run",
        pass,
        &format!("r = {r}, {ok}/10 verified with |S| >= 64 (product measure: {bernoulli}/10)"),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn toric_cross_check() {
    let start = Instant::now();
    let p = LatticePolytope::new(vec![vec![0], vec![2]]).unwrap();
    let code = build_code(&p, 5).unwrap();
    let stats = code_stats(&p, 5, B).unwrap();
    let main_ok = (
        code.block_length(),
        code.dimension(),
        minimum_distance(&code).unwrap(),
    ) == (4, 3, 2)
        && code_rank(&code) == p.lattice_points().len()
        && p.lattice_points().len() == 3
        && stats.relative_distance == ratio(1, 2)
        && stats.rate == ratio(3, 4);
    let main_elapsed = start.elapsed();
    let mut family = Vec::new();
    for q in [2u32, 3, 5, 7] {
        for k in 0..=(q as i64 - 2) {
            let seg = LatticePolytope::new(vec![vec![0], vec![k]]).unwrap();
            let c = build_code(&seg, q).unwrap();
            let got = (
                c.block_length(),
                code_rank(&c),
                minimum_distance(&c).unwrap(),
            );
            let want = (q as usize - 1, k as usize + 1, q as usize - 1 - k as usize);
            if got != want {
                family.push(format!("q={q} k={k}: {got:?} != {want:?}"));
            }
        }
    }
    let pass = main_ok && family.is_empty() && main_elapsed < Duration::from_secs(10);
    report(
        "toric cross-check",
        pass,
        &format!("q=5 segment (4,3,2) d=1/2 R=3/4: {main_ok}; Reed–Solomon mismatches {family:?}"),
        start.elapsed(),
    );
    assert!(pass);
}

#[test]
fn formula_evaluations() {
    let start = Instant::now();
    let r = choose_r_sparse(&ratio(1, 10)).unwrap();
    let c = c_n_schedule(16, 2).unwrap();
    let lll = lll_condition(&BigUint::from(1u8), &ratio(1, 2), 1);
    let pass = r == 8 && c == ratio(3, 4) && !lll;
    report(
        "pinned formula evaluations",
        pass,
        &format!("choose_r_sparse(1/10) = {r}, c_n(16, 2) = {c}, lll_condition(1, 1/2, 1) = {lll}"),
        start.elapsed(),
    );
    assert!(pass);
}

struct Run {
    stdout: Vec<u8>,
    code: Option<i32>,
    files: Vec<Vec<u8>>,
}

fn hcube(dir: &Path, args: &[&str], threads: &str, outputs: &[&str]) -> Run {
    for f in outputs {
        let _ = std::fs::remove_file(dir.join(f));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_hcube"))
        .current_dir(dir)
        .args(args)
        .args(["--threads", threads])
        .output()
        .expect("binary runs");
    Run {
        stdout: out.stdout,
        code: out.status.code(),
        files: outputs
            .iter()
            .map(|f| std::fs::read(dir.join(f)).unwrap_or_default())
            .collect(),
    }
}

#[test]
fn cli_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("set.txt"), "5 1\n0\n1\n2\n3\n").unwrap();
    std::fs::write(d.join("seg.txt"), "5 1\n0\n2\n").unwrap();
    let cases: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (
            vec![
                "mvalue",
                "set.txt",
                "--notion",
                "vertex-injective",
                "--manifest",
                "m1.json",
            ],
            vec!["m1.json"],
        ),
        (vec!["mvalue", "set.txt", "--format", "csv"], vec![]),
        (vec!["fexact", "-n", "3"], vec![]),
        (vec!["fexact", "-n", "3", "--format", "csv"], vec![]),
        (vec!["bound", "-n", "10,100,1000000", "-c", "1/2"], vec![]),
        (
            vec!["bound", "-n", "10", "-c", "1", "--format", "csv"],
            vec![],
        ),
        (
            vec![
                "construct",
                "sparse",
                "-n",
                "12",
                "-e",
                "1/2",
                "--runs",
                "3",
                "--out",
                "sparse.txt",
            ],
            vec!["sparse.txt.1729"],
        ),
        (
            vec![
                "construct",
                "dense",
                "-n",
                "8",
                "-e",
                "1/2",
                "--out",
                "dense.txt",
                "--manifest",
                "m2.json",
            ],
            vec!["dense.txt", "m2.json"],
        ),
        (vec!["construct", "dense", "-n", "16", "-e", "1/2"], vec![]),
        (vec!["toric", "seg.txt"], vec![]),
        (vec!["toric", "seg.txt", "--format", "csv"], vec![]),
        (vec!["verify", "lemmas", "--instances", "100"], vec![]),
        (
            vec!["verify", "all", "--instances", "30", "--format", "csv"],
            vec![],
        ),
    ];
    let mut failures = Vec::new();
    for (args, outputs) in &cases {
        let a = hcube(d, args, "1", outputs);
        let b = hcube(d, args, "1", outputs);
        let c = hcube(d, args, "4", outputs);
        for (label, other) in [("rerun", &b), ("4 threads", &c)] {
            if a.stdout != other.stdout || a.code != other.code || a.files != other.files {
                failures.push(format!("{} differs on {label}", args.join(" ")));
            }
        }
        if a.stdout.is_empty() && a.code == Some(0) {
            failures.push(format!("{} printed nothing", args.join(" ")));
        }
    }
    // Replaying a manifest reproduces the original output byte for byte.
    for (args, manifest) in [(&cases[0].0, "m1.json"), (&cases[7].0, "m2.json")] {
        let original = hcube(d, args, "1", &[]);
        let replayed = hcube(d, &["replay", manifest], "4", &[]);
        if original.stdout != replayed.stdout || replayed.code != Some(0) {
            failures.push(format!("replay of {manifest} differs"));
        }
    }
    let dense_no_r = hcube(d, &cases[8].0, "1", &[]);
    if dense_no_r.code != Some(4) {
        failures.push(format!(
            "dense without valid r exited {:?}",
            dense_no_r.code
        ));
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty();
    report(
        "CLI determinism across reruns, thread counts and replay",
        pass,
        &format!(
            "{} invocations compared, failures {failures:?}",
            cases.len() * 3 + 4
        ),
        elapsed,
    );
    assert!(pass);
}
