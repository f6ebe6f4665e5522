//! One test per acceptance criterion. Each runs the library's criterion,
//! recomputes the claim with an independent oracle, and prints a PASS/FAIL
//! line. Run with `--nocapture` to see the lines.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sqcomp::acceptance::{self, random_candidate, random_family, CriterionOutcome, DEFAULT_SEED};
use sqcomp::constructors::{greedy_complement, GreedyStrategy};
use sqcomp::counting::{margin_scan, representation_profile};
use sqcomp::lemma::{theorem1_pipeline, LemmaParameters};
use sqcomp::optimizer::optimize_constants;

const REFERENCE: (f64, f64) = (0.022, 0.084);
const OBJECTIVE_FLOOR: f64 = 0.19302;
const REFERENCE_TARGET: f64 = 0.19303;
const REFERENCE_TOLERANCE: f64 = 1e-5;
const GAP_TARGET: f64 = 1.0235;
const GAP_TOLERANCE: f64 = 5e-5;
#[allow(clippy::approx_constant)]
const PI_OVER_4_TARGET: f64 = 0.7854;
const PI_OVER_4_TOLERANCE: f64 = 1e-4;
const ORACLE_TRIALS: usize = 200;
const ORACLE_MAX: u64 = 5000;
const LEMMA_TRIALS: usize = 100;
const LEMMA_N: u64 = 1_000_000;
const EM_MAX_N: u64 = 1_000_000;
const EM_RESIDUAL_MAX_N: u64 = 10_000;
const EM_RESIDUAL_TOLERANCE: f64 = 1e-7;
const INTEGRAL_FLOOR: f64 = -1e-12;
const AVERAGE_N: u64 = 1_000_000;
const AVERAGE_BAND: (f64, f64) = (0.9, 1.1);
const SCAN_POINTS: [u64; 3] = [10_000, 100_000, 1_000_000];
const MARGIN_CONSTANT: f64 = 0.193;

fn report(outcome: &CriterionOutcome, oracle_ok: bool, oracle_detail: &str) -> bool {
    let ok = outcome.passed && oracle_ok;
    println!(
        "[{}] C{} {}: {}; oracle: {oracle_detail}",
        if ok { "PASS" } else { "FAIL" },
        outcome.id,
        outcome.name,
        outcome.detail
    );
    ok
}

fn objective(d: f64, d0: f64) -> f64 {
    4.0 / PI * d0.sqrt() - 8.0 * d
}

fn feasible(d: f64, d0: f64) -> bool {
    d > 0.0 && d0 > 0.0 && d * d + d0 <= 1.0 && d0 * d0 / (16.0 * d * d) + d0 < 1.0
}

/// Pairs `(k, w)` with `k ≥ 1` and `k² + w ≤ limit`, counted one by one.
fn pair_counts(w: &[u64], limit: u64) -> Vec<u32> {
    let mut counts = vec![0u32; limit as usize + 1];
    let mut k = 1u64;
    while k * k <= limit {
        for &x in w {
            if k * k + x <= limit {
                counts[(k * k + x) as usize] += 1;
            }
        }
        k += 1;
    }
    counts
}

fn total_by_elements(w: &[u64], limit: u64) -> u64 {
    w.iter().filter(|&&x| x < limit).map(|&x| (limit - x).isqrt()).sum()
}

#[test]
fn c1_constant_reproduction() {
    let outcome = acceptance::constant_reproduction().unwrap();
    let best = optimize_constants(2000, 3).unwrap();
    let best_ok = feasible(best.delta, best.delta0) && objective(best.delta, best.delta0) >= OBJECTIVE_FLOOR;
    let reference = objective(REFERENCE.0, REFERENCE.1);
    let reference_ok = feasible(REFERENCE.0, REFERENCE.1) && (reference - REFERENCE_TARGET).abs() <= REFERENCE_TOLERANCE;
    let detail = format!(
        "optimum {:.12} feasible {best_ok}; reference {reference:.12}, |diff| {:.3e}",
        objective(best.delta, best.delta0),
        (reference - REFERENCE_TARGET).abs()
    );
    assert!(report(&outcome, best_ok && reference_ok, &detail), "{detail}");
}

#[test]
fn c2_gap_constant() {
    let outcome = acceptance::theorem2_constants().unwrap();
    let direct = PI / 4.0 + 0.193 * PI * PI / 8.0;
    let ok = (direct - GAP_TARGET).abs() <= GAP_TOLERANCE && (PI / 4.0 - PI_OVER_4_TARGET).abs() <= PI_OVER_4_TOLERANCE;
    assert!(report(&outcome, ok, &format!("closed form {direct:.12}")));
}

#[test]
fn c3_oracle_equivalence() {
    let outcome = acceptance::oracle_equivalence(DEFAULT_SEED).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 0x0bad_5eed);
    let mut mismatches = 0;
    for _ in 0..ORACLE_TRIALS {
        let w = random_candidate(&mut rng, ORACLE_MAX, 400);
        let n = 1 + w.elements().iter().sum::<u64>() % ORACLE_MAX;
        let profile = representation_profile(&w, n).unwrap();
        let brute = pair_counts(w.elements(), n);
        let total: u64 = brute.iter().map(|&c| c as u64).sum();
        if profile.counts != brute || profile.total != total || total_by_elements(w.elements(), n) != total {
            mismatches += 1;
        }
    }
    let detail = format!("{ORACLE_TRIALS} fresh trials, {mismatches} mismatches");
    assert!(report(&outcome, mismatches == 0, &detail));
}

#[test]
fn c4_lemma_verification() {
    let outcome = acceptance::lemma_verification(DEFAULT_SEED).unwrap();
    let params = LemmaParameters::new(REFERENCE.0, REFERENCE.1, LEMMA_N).unwrap();
    let (k, m, window) = (params.k(), params.modulus(), params.window());
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 0x7e57);
    let mut failures = 0;
    let mut witnesses = 0;
    for _ in 0..LEMMA_TRIALS {
        let d = random_family(&mut rng, &params);
        let e = d.elements();
        assert!(e.iter().all(|&x| x <= window && (x - e[0]).is_multiple_of(m)));
        let counts = pair_counts(e, LEMMA_N);
        let lhs: u64 = counts.iter().filter(|&&c| c > 0).map(|&c| c as u64 - 1).sum();
        let rhs = e.iter().filter(|&&x| x <= window).count() as i64 - 2;
        let mut ok = lhs as i64 >= rhs;
        for &ds in &e[1..] {
            let n_s = (ds - e[0]) / (4 * k);
            if n_s == k {
                continue;
            }
            let (x, y) = ((k + n_s) as u128, k.abs_diff(n_s) as u128);
            let left = x * x + e[0] as u128;
            ok &= left == y * y + ds as u128 && left < LEMMA_N as u128;
            witnesses += 1;
        }
        if !ok {
            failures += 1;
        }
    }
    let detail = format!("{LEMMA_TRIALS} fresh families, {witnesses} witnesses, {failures} failures");
    assert!(report(&outcome, failures == 0, &detail));
}

/// `I_k` from the closed-form primitive in `θ = asin(t/√N)`.
fn closed_integral(k: u64, n: u64) -> f64 {
    let sq = (n as f64).sqrt();
    let kf = k as f64;
    let prim = |t: f64| {
        let th = (t / sq).min(1.0).asin();
        n as f64 * (th / 2.0 - (2.0 * th).sin() / 4.0) + (kf + 0.5) * sq * th.cos()
    };
    prim(kf + 1.0) - prim(kf)
}

#[test]
fn c5_euler_maclaurin_suite() {
    let outcome = acceptance::euler_maclaurin_suite().unwrap();
    let mut min_margin = f64::INFINITY;
    let mut max_residual: f64 = 0.0;
    let mut min_integral = f64::INFINITY;
    for r in 1..=EM_MAX_N.isqrt() {
        let n = r * r;
        // Kahan-compensated sum of √(N − m²)
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for m in 1..=r {
            let y = ((n - m * m) as f64).sqrt() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let main = PI / 4.0 * n as f64 - r as f64 / 2.0;
        min_margin = min_margin.min(main - sum);
        if n <= EM_RESIDUAL_MAX_N {
            let integrals: Vec<f64> = (0..r).map(|k| closed_integral(k, n)).collect();
            min_integral = integrals.iter().copied().fold(min_integral, f64::min);
            max_residual = max_residual.max((sum - (main - integrals.iter().sum::<f64>())).abs());
        }
    }
    // the f64 oracle is only good to a few ulps of N
    let ok = min_margin >= -1e-9 && max_residual <= EM_RESIDUAL_TOLERANCE && min_integral >= INTEGRAL_FLOOR - 1e-9;
    let detail = format!("min margin {min_margin:.6}, max residual {max_residual:.3e}, min integral {min_integral:.3e}");
    assert!(report(&outcome, ok, &detail));
}

#[test]
fn c6_quadratic_model_average() {
    let outcome = acceptance::green_average().unwrap();
    let c = PI * PI / 16.0;
    let mut w = Vec::new();
    let mut n = 1u64;
    loop {
        let v = (c * (n * n) as f64).ceil() as u64;
        if w.last() != Some(&v) {
            w.push(v);
        }
        if v >= AVERAGE_N {
            break;
        }
        n += 1;
    }
    let average = total_by_elements(&w, AVERAGE_N) as f64 / AVERAGE_N as f64;
    let ok = (AVERAGE_BAND.0..=AVERAGE_BAND.1).contains(&average);
    assert!(report(&outcome, ok, &format!("n_max {n}, average {average:.9}")));
}

#[test]
fn c7_complement_margin_scan() {
    let outcome = acceptance::complement_margin_scan().unwrap();
    let top = *SCAN_POINTS.last().unwrap();
    let w = greedy_complement(top, GreedyStrategy::LargestSquare).unwrap();
    let e = w.elements();
    let counts = pair_counts(e, top);
    assert!(counts[1..].iter().all(|&c| c > 0), "greedy output leaves a gap");

    let margins: Vec<f64> = SCAN_POINTS
        .iter()
        .map(|&n| (total_by_elements(e, n) as i64 - n as i64) as f64 - MARGIN_CONSTANT * (n as f64).sqrt())
        .collect();
    let mut running = 0i64;
    let mut first_positive = None;
    for n in 1..=top {
        running += counts[n as usize] as i64 - 1;
        if first_positive.is_none() && running as f64 - MARGIN_CONSTANT * (n as f64).sqrt() > 0.0 {
            first_positive = Some(n);
        }
    }
    let scan = margin_scan(&representation_profile(&w, top).unwrap());
    let pipeline = theorem1_pipeline(&w, REFERENCE.0, REFERENCE.1, top).unwrap();
    let excess = total_by_elements(e, top) as i64 - top as i64;
    let ok = scan.first_positive == first_positive
        && pipeline.measured_excess == excess
        && pipeline.lower_bound <= excess;
    let detail = format!(
        "margins {:?}, first positive {first_positive:?}, lower bound {} <= excess {excess}",
        margins.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>(),
        pipeline.lower_bound
    );
    assert!(report(&outcome, ok, &detail));
}

fn run_accept(threads: usize, dir: &Path) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_sqcomp"))
        .args(["--threads", &threads.to_string(), "accept", "--out"])
        .arg(dir)
        .output()
        .expect("run sqcomp");
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn c8_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let (one, four) = (tmp.path().join("t1"), tmp.path().join("t4"));
    let stdout = run_accept(1, &one);
    run_accept(4, &four);
    let a = artifacts(&one);
    let b = artifacts(&four);
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let ok = !a.is_empty() && a.len() == b.len() && differing.is_empty();
    let inner = stdout.lines().any(|l| l.starts_with("[PASS] C8"));
    let line = format!(
        "[{}] C8 determinism: {} CSV files identical across --threads 1 and 4; in-process rerun {}",
        if ok && inner { "PASS" } else { "FAIL" },
        a.len(),
        if inner { "identical" } else { "differs" }
    );
    println!("{line}");
    assert!(ok && inner, "{line}; differing: {differing:?}");
}
