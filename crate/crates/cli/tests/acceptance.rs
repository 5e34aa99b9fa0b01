//! Acceptance suite. Prints one PASS/FAIL line per criterion. With
//! `PFDESIGN_ACCEPTANCE_STRICT=1` the process exits nonzero if any criterion
//! fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pfdesign::bounds::{certify, lipschitz_constant, BoundName, LipschitzKind, BOUND_TOL};
use pfdesign::catalog::{
    known_design, sample_haar_state, sample_haar_unitary, DesignName, RngStream,
};
use pfdesign::ensemble::{Ensemble, EnsembleKind};
use pfdesign::experiment::ExperimentSummary;
use pfdesign::linalg::{
    partial_trace, schatten_norm, symmetric_projector, ComplexMatrix, FactorShape, SchattenIndex,
};
use pfdesign::moments::{
    delta, empirical_moment, frame_potential, haar_projective_moment, haar_simplex_moment,
    haar_unitary_channel_moment,
};
use pfdesign::pushforward::{
    decohere_ensemble, dephase, kraus_multi_indices, kraus_projector_spectrum, ptrace_ensemble,
    pushforward_moment, PushforwardMap,
};
use pfdesign::Complex64;
use rand::Rng;

const EXACT_TOL: f64 = 1e-10;
const PATH_TOL: f64 = 1e-12;
const MC_UNITARY_TOL: f64 = 5e-3;
const MC_UNITARY_SAMPLES: usize = 100_000;
const SLOPE_RANGE: (f64, f64) = (-0.6, -0.4);
const TIGHTNESS_MIN: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn standard_p() -> Vec<SchattenIndex> {
    SchattenIndex::standard()
}

fn random_pure_ensemble(rng: &mut RngStream, d: usize, m: usize) -> Ensemble {
    let pts = (0..m)
        .map(|_| ComplexMatrix::column(&sample_haar_state(d, rng)))
        .collect();
    Ensemble::uniform(EnsembleKind::PureState, pts).unwrap()
}

fn exact_design_zero() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for name in [
        DesignName::SicD2T2,
        DesignName::OnbD2T1,
        DesignName::OctahedronD2T3,
    ] {
        let design = known_design(name).unwrap();
        let t = name.t();
        let emp = empirical_moment(design.ensemble(), t).unwrap();
        let haar = haar_projective_moment(2, t).unwrap();
        for p in standard_p() {
            worst = worst.max(delta(&emp, &haar, p).unwrap());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= EXACT_TOL && elapsed < Duration::from_secs(1),
        format!(
            "max delta {worst:.2e} (tol {EXACT_TOL:.0e}), {:.3}s (< 1s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn welch_identity() -> Outcome {
    let mut rng = RngStream::new(2, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(2..=3);
        let m = rng.random_range(1..=20);
        let e = random_pure_ensemble(&mut rng, d, m);
        let d2 = delta(
            &empirical_moment(&e, 2).unwrap(),
            &haar_projective_moment(d, 2).unwrap(),
            SchattenIndex::TWO,
        )
        .unwrap();
        let f = frame_potential(&e, 2).unwrap();
        let dim = (d * (d + 1) / 2) as f64;
        worst = worst.max((d2 * d2 - (f - 1.0 / dim)).abs());
    }
    outcome(
        worst <= EXACT_TOL,
        format!("100 ensembles, max |δ₂² - (F - 1/D)| = {worst:.2e} (tol {EXACT_TOL:.0e})"),
    )
}

fn random_hermitian(rng: &mut RngStream, n: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&g + &g.adjoint()).scale(0.5)
}

fn symmetric_ptrace_contraction() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(3, 0);
    let mut checks = 0;
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    let t = 2;
    for _ in 0..1000 {
        let d_a = rng.random_range(2..=3);
        let d_b = rng.random_range(2..=3);
        let pi = symmetric_projector(d_a * d_b, t).unwrap();
        let o = &(&pi * &random_hermitian(&mut rng, pi.rows())) * &pi;
        let shape = FactorShape::new(vec![d_a, d_b, d_a, d_b]).unwrap();
        let traced = partial_trace(&o, &shape, &[1, 3]).unwrap();
        for p in standard_p() {
            let lhs = schatten_norm(&traced, p).unwrap();
            let rhs = lipschitz_constant(LipschitzKind::PtraceSym, d_b, t, p).unwrap()
                * schatten_norm(&o, p).unwrap();
            checks += 1;
            if lhs > rhs + BOUND_TOL {
                violations += 1;
            }
            worst_ratio = worst_ratio.max(lhs / rhs);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        violations == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{violations} violations in {checks} checks, max ratio {worst_ratio:.4}, {:.2}s (< 60s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn run_mc(out: &Path, d_a: usize, d_b: usize, workers: Option<usize>) -> ExperimentSummary {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pfdesign"));
    cmd.args([
        "mc",
        "--dA",
        &d_a.to_string(),
        "--dB",
        &d_b.to_string(),
        "-t",
        "2",
        "-N",
        "10000",
    ])
    .args(["--runs", "100", "--seed", "1", "--p", "1,2,3,inf", "--out"])
    .arg(out);
    if let Some(w) = workers {
        cmd.env("PFDESIGN_WORKERS", w.to_string());
    }
    let status = cmd.status().expect("pfdesign binary runs");
    assert!(status.success(), "mc exited with {status}");
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

struct CsvRow {
    p: String,
    bound_obs1: f64,
    bound_thm4: f64,
}

fn read_rows(path: &Path) -> Vec<CsvRow> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            CsvRow {
                p: f[2].to_string(),
                bound_obs1: f[5].parse().unwrap(),
                bound_thm4: f[6].parse().unwrap(),
            }
        })
        .collect()
}

fn mc_reproduction(root: &Path) -> (Outcome, Option<f64>) {
    let mut details = Vec::new();
    let mut pass = true;
    let mut tightness = None;
    for (d_a, d_b) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        let start = Instant::now();
        let dir = root.join(format!("mc_{d_a}{d_b}"));
        let summary = run_mc(&dir, d_a, d_b, None);
        let elapsed = start.elapsed();
        let rows = read_rows(&dir.join("trajectories.csv"));

        let violations = summary.total_violations;
        let above = rows
            .iter()
            .filter(|r| r.bound_thm4 > r.bound_obs1 + BOUND_TOL)
            .count();
        let unequal_p1 = rows
            .iter()
            .filter(|r| r.p == "1" && (r.bound_thm4 - r.bound_obs1).abs() > BOUND_TOL)
            .count();
        let p2 = summary
            .per_p
            .iter()
            .find(|s| s.p == SchattenIndex::TWO)
            .unwrap();
        let slope = p2.slope_source.unwrap_or(f64::NAN);
        let slope_ok = (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&slope);
        let ok = violations == 0
            && above == 0
            && unequal_p1 == 0
            && slope_ok
            && elapsed < Duration::from_secs(600);
        pass &= ok;
        details.push(format!(
            "({d_a},{d_b}): {violations} violations, {above} thm4>obs1, {unequal_p1} unequal at p=1, slope {slope:.3}, {:.1}s",
            elapsed.as_secs_f64()
        ));
        if (d_a, d_b) == (2, 2) {
            tightness = summary
                .per_p
                .iter()
                .find(|s| s.p.is_infinite())
                .map(|s| s.max_final_tightness);
        }
    }
    (outcome(pass, details.join("; ")), tightness)
}

fn near_tightness(ratio: Option<f64>) -> Outcome {
    match ratio {
        Some(r) => outcome(
            r > TIGHTNESS_MIN,
            format!("max final δ'_∞/bound_thm4 = {r:.4} (> {TIGHTNESS_MIN})"),
        ),
        None => outcome(false, "no p=inf summary recorded"),
    }
}

fn unitary_moments() -> Outcome {
    let d = 2;
    let mut details = Vec::new();
    let mut pass = true;

    let exact = haar_unitary_channel_moment(d, 1).unwrap();
    let mut worst: f64 = 0.0;
    for (i, j, k, l) in (0..16).map(|n| (n >> 3 & 1, n >> 2 & 1, n >> 1 & 1, n & 1)) {
        let expected = if i == k && j == l {
            1.0 / d as f64
        } else {
            0.0
        };
        worst = worst
            .max((exact.matrix()[(i * d + j, k * d + l)] - Complex64::new(expected, 0.0)).norm());
    }
    pass &= worst <= EXACT_TOL;
    details.push(format!(
        "t=1 entries max err {worst:.2e} (tol {EXACT_TOL:.0e})"
    ));

    let mut rng = RngStream::new(6, 0);
    let unitaries: Vec<ComplexMatrix> = (0..MC_UNITARY_SAMPLES)
        .map(|_| sample_haar_unitary(d, &mut rng))
        .collect();
    let e = Ensemble::uniform(EnsembleKind::Unitary, unitaries).unwrap();
    for t in 1..=2 {
        let err = delta(
            &empirical_moment(&e, t).unwrap(),
            &haar_unitary_channel_moment(d, t).unwrap(),
            SchattenIndex::TWO,
        )
        .unwrap();
        pass &= err <= MC_UNITARY_TOL;
        let normalized = err / (d as f64).powi(t as i32);
        details.push(format!(
            "t={t} MC Schatten-2 err {err:.2e} (tol {MC_UNITARY_TOL:.0e}; divided by d^t: {normalized:.2e}, informational)"
        ));
    }
    outcome(pass, details.join("; "))
}

fn channel_bound() -> Outcome {
    let (d_a, d_b, t) = (2, 2, 1);
    let map = PushforwardMap::channel_trace_b(d_a, d_b, t).unwrap();
    let reference = haar_unitary_channel_moment(d_a * d_b, t).unwrap();
    let mut checks = 0;
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for m in [4, 16] {
        for seed in 0..100 {
            let mut rng = RngStream::new(seed, m as u64);
            let us = (0..m)
                .map(|_| sample_haar_unitary(d_a * d_b, &mut rng))
                .collect();
            let emp = empirical_moment(&Ensemble::uniform(EnsembleKind::Unitary, us).unwrap(), t)
                .unwrap();
            for p in standard_p() {
                let r = certify(&emp, &reference, &map, p).unwrap();
                checks += 1;
                if !r.satisfied[&BoundName::ChannelLipschitz] {
                    violations += 1;
                }
                worst_ratio =
                    worst_ratio.max(r.delta_pushed / r.bounds[&BoundName::ChannelLipschitz]);
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in {checks} checks, max ratio {worst_ratio:.4}"),
    )
}

fn kraus_audit() -> Outcome {
    let mut audited = 0;
    let mut trace_bad = 0;
    let mut over_dim = 0;
    let mut constant_not_idempotent = 0;
    let mut non_idempotent = 0;
    for t in 1..=3 {
        for d_b in 1..=3 {
            for d_a in 1..=3 {
                for a in kraus_multi_indices(d_b, t).unwrap() {
                    let s = kraus_projector_spectrum(&a, d_a, d_b, t).unwrap();
                    audited += 1;
                    trace_bad += usize::from(!s.trace_consistent);
                    over_dim += usize::from(s.matrix_trace > s.sym_dim_a as f64 + EXACT_TOL);
                    let constant = a.iter().all(|&x| x == a[0]);
                    if !s.idempotent {
                        non_idempotent += 1;
                        constant_not_idempotent += usize::from(constant);
                    }
                }
            }
        }
    }
    outcome(
        trace_bad == 0 && over_dim == 0 && constant_not_idempotent == 0,
        format!(
            "{audited} multi-indices: {trace_bad} trace mismatches, {over_dim} traces above D_A,t, \
             {non_idempotent} non-idempotent (logged), {constant_not_idempotent} of them constant"
        ),
    )
}

fn cross_path() -> Outcome {
    let mut rng = RngStream::new(9, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d_a = rng.random_range(2..=3);
        let d_b = rng.random_range(2..=3);
        let t = rng.random_range(1..=2);
        let m = rng.random_range(1..=10);
        let e = random_pure_ensemble(&mut rng, d_a * d_b, m);
        let src = empirical_moment(&e, t).unwrap();

        let map = PushforwardMap::partial_trace_b(d_a, d_b, t).unwrap();
        let lhs = empirical_moment(&ptrace_ensemble(&e, d_a, d_b).unwrap(), t).unwrap();
        let rhs = pushforward_moment(&src, &map).unwrap();
        worst = worst.max((lhs.matrix() - rhs.matrix()).max_abs());

        let map = PushforwardMap::decohere(d_a * d_b, t).unwrap();
        let lhs = empirical_moment(&decohere_ensemble(&e).unwrap(), t).unwrap();
        let rhs = pushforward_moment(&src, &map).unwrap();
        worst = worst.max((lhs.matrix() - rhs.matrix()).max_abs());
    }
    let mut worst_simplex: f64 = 0.0;
    for d in 2..=4 {
        for t in 1..=3 {
            let flat = haar_simplex_moment(d, t).unwrap();
            let dephased = dephase(haar_projective_moment(d, t).unwrap().matrix());
            worst_simplex = worst_simplex.max((flat.matrix() - &dephased).max_abs());
        }
    }
    outcome(
        worst <= PATH_TOL && worst_simplex <= PATH_TOL,
        format!(
            "100 ensembles max path gap {worst:.2e}; simplex vs dephased projective {worst_simplex:.2e} (tol {PATH_TOL:.0e})"
        ),
    )
}

fn determinism(root: &Path) -> Outcome {
    let first = root.join("mc_22");
    let second = root.join("mc_22_repeat");
    run_mc(&second, 2, 2, Some(2));
    let a = fs::read(first.join("trajectories.csv")).unwrap();
    let b = fs::read(second.join("trajectories.csv")).unwrap();
    outcome(
        a == b,
        format!("{} vs {} bytes, identical: {}", a.len(), b.len(), a == b),
    )
}

fn main() {
    let root = tempfile::tempdir().unwrap();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 exact-design zero", exact_design_zero()),
        ("2 Welch identity", welch_identity()),
        ("3 symmetric partial-trace contraction", symmetric_ptrace_contraction()),
    ];
    let (mc, tightness) = mc_reproduction(root.path());
    results.push(("4 Monte Carlo reproduction", mc));
    results.push(("5 near-tightness witness", near_tightness(tightness)));
    results.push(("6 unitary moments", unitary_moments()));
    results.push(("7 channel bound", channel_bound()));
    results.push(("8 Kraus-projector audit", kraus_audit()));
    results.push(("9 cross-path consistency", cross_path()));
    results.push(("10 determinism", determinism(root.path())));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 && std::env::var_os("PFDESIGN_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
