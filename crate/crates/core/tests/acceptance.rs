//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured quantity. Exits nonzero if any criterion fails.
//!
//! Reference values are computed here independently of the library where the
//! criterion allows it (exact rational arithmetic over all received words,
//! direct divergence sums), and the library is held to them.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permchan::approx::{approx_bsc, moment_constants, verify_moment_bounds};
use permchan::bounds::{
    bec_achievability, binary_summands, bsc_achievability, bsc_achievability_by_size, error_event_prob,
    general_summands, neighbor_set, search_max_m, ChannelSpec,
};
use permchan::packing::{
    build_binary_message_set_by_size, build_binary_message_set_with_grid, build_dmc_message_set_with_grid,
    grid_resolution, grid_simplex, kl_radius, packing_count_bounds_for_radius, tv_radius,
};
use permchan::prob::{llr_moments, std_normal_cdf};
use permchan::sim::{permutation_invariance_check, run_trials};
use permchan::{ChannelMatrix, SimConfig};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<u64> {
    let mut v: Vec<u64> = (0..points)
        .map(|i| (lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).round() as u64)
        .collect();
    v.dedup();
    v
}

fn criterion_1() -> Outcome {
    let grid = log_grid(20.0, 2000.0, 30);
    let mut worst = (0.0f64, 0.11, 0.0, 0u64);
    for delta in [0.11f64, 0.22] {
        for eps in [1e-3f64, 1e-6] {
            for &n in &grid {
                let searched = search_max_m(&ChannelSpec::Bsc { delta }, n, eps).unwrap().log2_m;
                let approx = approx_bsc(delta, n, eps, true).unwrap();
                let gap = (searched - approx).abs();
                if gap >= worst.0 {
                    worst = (gap, delta, eps, n);
                }
            }
        }
    }
    outcome(
        worst.0 <= 1.0,
        format!(
            "max |log2 M - ceil approximation| = {} bits (delta={}, eps={:e}, n={}) over {} grid points",
            worst.0,
            worst.1,
            worst.2,
            worst.3,
            grid.len() * 4
        ),
    )
}

fn criterion_2() -> Outcome {
    let ch = ChannelSpec::Bsc { delta: 0.11f64 };
    let mut first = None;
    for n in 1..=450u64 {
        let p = search_max_m(&ch, n, 1e-3).unwrap();
        if p.rate >= 0.25 {
            first = Some((n, p.m_achieved, p.rate));
            break;
        }
    }
    match first {
        Some((n, m, rate)) => outcome(
            (150..=450).contains(&n),
            format!("rate first reaches 0.25 at n={n} (M={m}, rate={rate:.4}); required n in [150, 450]"),
        ),
        None => outcome(false, "rate never reaches 0.25 for n <= 450"),
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = Vec::new();
    for _ in 0..20 {
        let n = rng.random_range(1..=2000u64);
        let m = rng.random_range(2..=40usize);
        let bec = bec_achievability(0.22f64, m, n).unwrap();
        let bsc = bsc_achievability_by_size(0.11f64, m, n).unwrap();
        if bec.to_bits() != bsc.to_bits() {
            mismatches.push((n, m, bec, bsc));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("20 random (n, M) pairs, {} not bit-identical {:?}", mismatches.len(), mismatches),
    )
}

/// Evenly spaced binary centers `0.11 + 0.78 a / (M - 1)` as exact rationals.
fn rational_centers(m: usize) -> Vec<BigRational> {
    let d = BigRational::new(BigInt::from(11), BigInt::from(100));
    let xi = BigRational::new(BigInt::from(78), BigInt::from(100));
    (0..m)
        .map(|a| &d + &xi * BigRational::new(BigInt::from(a), BigInt::from(m - 1)))
        .collect()
}

/// Likelihood of a word with `ones` first-symbol occurrences out of `n`.
fn likelihood(p: &BigRational, ones: u32, n: u32) -> BigRational {
    let q = BigRational::one() - p;
    num_traits::pow(p.clone(), ones as usize) * num_traits::pow(q, (n - ones) as usize)
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for m in [3usize, 4, 5] {
        let centers = rational_centers(m);
        let set = build_binary_message_set_by_size(0.11f64, 0.11, m).unwrap();
        for n in 1..=10u32 {
            for owner in 0..m {
                let nbrs: Vec<usize> = neighbor_set(&set, owner).unwrap().indices().collect();
                let mut full = BigRational::zero();
                let mut local = BigRational::zero();
                for word in 0u32..(1 << n) {
                    let ones = word.count_ones();
                    let own = likelihood(&centers[owner], ones, n);
                    let beats = |j: usize| likelihood(&centers[j], ones, n) >= own;
                    if (0..m).filter(|&j| j != owner).any(beats) {
                        full += &own;
                    }
                    if nbrs.iter().any(|&j| beats(j)) {
                        local += &own;
                    }
                }
                let diff = (full - local).to_f64().unwrap().abs();
                worst = worst.max(diff);
                checked += 1;
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max |full union - neighbor union| = {worst:e} over {checked} (M, n, message) cases"),
    )
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    for m in [3usize, 4, 5] {
        let set = build_binary_message_set_by_size(0.11f64, 0.11, m).unwrap();
        for n in 1..=60u64 {
            let closed = binary_summands(&set, n).unwrap();
            let exact = general_summands(&set, n).unwrap();
            for (a, b) in closed.iter().zip(&exact) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max |binomial-tail summand - type-enumeration summand| = {worst:e}"),
    )
}

fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).log2())
        .sum()
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Strictly positive, diagonally dominant `k x k` channel.
fn random_channel(rng: &mut ChaCha8Rng, k: usize, max_mix: f64) -> ChannelMatrix<f64> {
    loop {
        let s = rng.random_range(0.02..max_mix);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let noise: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
                let total: f64 = noise.iter().sum();
                (0..k)
                    .map(|j| (1.0 - s) * f64::from(u8::from(i == j)) + s * noise[j] / total)
                    .collect()
            })
            .collect();
        let w = ChannelMatrix::new(rows).unwrap();
        if w.strictly_positive() && w.require_full_rank_square().is_ok() {
            return w;
        }
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    let mut nonempty = 0;
    for trial in 0..200 {
        let k = [2usize, 3, 4][trial % 3];
        let grid_n = rng.random_range(1..=12usize);
        let r = 1.0 / grid_n as f64;
        let r0 = kl_radius(r);

        let full = grid_simplex(r, k).unwrap();
        let expect = binomial_u128((grid_n + k - 1) as u128, (k - 1) as u128);
        if full.len() as u128 != expect {
            failures.push(format!("grid count k={k} N={grid_n}: {} != {expect}", full.len()));
        }
        let counts = packing_count_bounds_for_radius(r, k).unwrap();
        let exact = counts.exact_grid as f64;
        if counts.exact_grid != expect || !(counts.lower <= exact && exact <= counts.upper) {
            failures.push(format!("bracket k={k} N={grid_n}: {counts:?}"));
        }

        let w = random_channel(&mut rng, k, 0.5);
        let sets = [
            build_dmc_message_set_with_grid(&w, grid_n).ok(),
            (k == 2).then(|| {
                let d1 = rng.random_range(0.01..0.45);
                let d2 = rng.random_range(0.01..0.45);
                build_binary_message_set_with_grid(d1, d2, grid_n).unwrap()
            }),
        ];
        for set in sets.into_iter().flatten() {
            if set.len() < 2 {
                continue;
            }
            nonempty += 1;
            let c = set.centers();
            let mut min_kl = f64::INFINITY;
            for i in 0..c.len() {
                for j in 0..c.len() {
                    if i != j {
                        min_kl = min_kl.min(kl_bits(c[i].probs(), c[j].probs()));
                    }
                }
            }
            let radius = set.radius_r0();
            if set.binary_params().is_none() && radius != r0 {
                failures.push(format!("grid packing k={k} N={grid_n} records radius {radius}, expected {r0}"));
            }
            if min_kl < radius {
                failures.push(format!("packing k={k} N={grid_n}: min KL {min_kl} < r0 {radius}"));
            }
        }
    }
    outcome(
        failures.is_empty() && nonempty > 50,
        format!("200 constructions ({nonempty} nonempty packings checked), failures: {failures:?}"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pairs = 0usize;
    let mut failures = Vec::new();
    for trial in 0..40 {
        let k = if trial < 20 { 2 } else { 3 };
        let w = random_channel(&mut rng, k, 0.3);
        let cap = moment_constants(&w).unwrap().r0_cap;
        for frac in [1.0, 0.25, 0.05] {
            let r0 = cap * frac;
            let report = match verify_moment_bounds(&w, r0) {
                Ok(r) => r,
                Err(permchan::Error::EmptyMessageSet { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            pairs += report.pairs.len();
            // Independent recomputation of V and T for every reported pair.
            let set = build_dmc_message_set_with_grid(&w, report_grid(r0)).unwrap();
            for pc in &report.pairs {
                let (p, q) = (set.center(pc.owner).probs(), set.center(pc.neighbor).probs());
                let d = kl_bits(p, q);
                let v: f64 = p.iter().zip(q).map(|(&a, &b)| a * ((a / b).log2() - d).powi(2)).sum();
                let t: f64 = p.iter().zip(q).map(|(&a, &b)| a * ((a / b).log2() - d).abs().powi(3)).sum();
                assert!((v - pc.variance).abs() <= 1e-12 * v.max(1.0));
                assert!((t - pc.third_abs).abs() <= 1e-12 * t.max(1.0));
            }
            failures.extend(report.failures().map(|f| format!("k={k} r0={r0:.4}: {f:?}")));
        }
    }
    outcome(
        failures.is_empty() && pairs > 0,
        format!("{pairs} neighbor pairs over 40 matrices, {} violations {:?}", failures.len(), failures.iter().take(3).collect::<Vec<_>>()),
    )
}

/// Grid resolution the moment check builds for radius `r0`.
fn report_grid(r0: f64) -> usize {
    grid_resolution(tv_radius(r0)).unwrap()
}

/// `P[Bin(n, p) <= t]` by direct term-by-term summation.
fn binomial_cdf_direct(n: u64, t: i64, p: f64) -> f64 {
    if t < 0 {
        return 0.0;
    }
    let mut ln_c = 0.0f64;
    let mut acc = 0.0f64;
    for k in 0..=n.min(t as u64) {
        if k > 0 {
            ln_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        acc += (ln_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp();
    }
    acc.min(1.0)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_ratio = 0.0f64;
    let mut failures = 0;
    for _ in 0..100 {
        let d1 = rng.random_range(0.02..0.4);
        let d2 = rng.random_range(0.02..0.4);
        let grid_n = rng.random_range(1..=20usize);
        let set = build_binary_message_set_with_grid(d1, d2, grid_n).unwrap();
        let m = rng.random_range(0..set.len());
        let nbrs: Vec<usize> = neighbor_set(&set, m).unwrap().indices().collect();
        let j = nbrs[rng.random_range(0..nbrs.len())];
        let (p, q) = (set.center(m), set.center(j));
        let mom = llr_moments(p, q).unwrap();
        for n in [50u64, 100, 200] {
            let exact = error_event_prob(p, q, n).unwrap();
            // Cross-check the enumeration against a direct binomial sum.
            let (pm, pj): (f64, f64) = (p.get(0), q.get(0));
            let x = n as f64 * ((1.0 - pj) / (1.0 - pm)).ln() / ((pm * (1.0 - pj)) / (pj * (1.0 - pm))).ln();
            let direct = if pj < pm {
                binomial_cdf_direct(n, x.floor() as i64, pm)
            } else {
                1.0 - binomial_cdf_direct(n, x.ceil() as i64 - 1, pm)
            };
            assert!((exact - direct).abs() < 1e-9, "{exact} vs {direct}");
            let normal = std_normal_cdf(-(n as f64).sqrt() * mom.mean / mom.variance.sqrt());
            let half = 6.0 * mom.third_abs / mom.variance.powf(1.5) / (n as f64).sqrt();
            let gap = (exact - normal).abs();
            worst_ratio = worst_ratio.max(gap / half);
            if gap > half {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("300 (pair, n) cases, {failures} outside the band; max gap/half-width = {worst_ratio:.4}"),
    )
}

fn criterion_9() -> Outcome {
    let n = 100;
    let point = search_max_m(&ChannelSpec::Bsc { delta: 0.11f64 }, n, 1e-3).unwrap();
    let set = build_binary_message_set_by_size(0.11f64, 0.11, point.m_achieved).unwrap();
    let bound = bsc_achievability(0.11, &set, n).unwrap();
    let cfg = SimConfig {
        channel: ChannelMatrix::bsc(0.11).unwrap(),
        message_set: set,
        n,
        trials: 100_000,
        seed: 20_240_901,
        permute: true,
    };
    let report = run_trials(&cfg).unwrap();
    let inv = permutation_invariance_check(&cfg).unwrap();
    let ok = report.p_hat <= bound + 3.0 * report.stderr && inv.z.abs() < 4.0;
    outcome(
        ok,
        format!(
            "M={}, p_hat={} (stderr {:.2e}) vs bound {:.3e}; shuffle on/off z={:.3}",
            point.m_achieved, report.p_hat, report.stderr, bound, inv.z
        ),
    )
}

fn criterion_10() -> Outcome {
    let p = search_max_m(&ChannelSpec::Bsc { delta: 0.11f64 }, 50_000, 1e-3).unwrap();
    outcome(
        p.rate > 0.30,
        format!("n=50000: M={}, rate={:.4} (required > 0.30)", p.m_achieved, p.rate),
    )
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 10] = [
        (1, "approximation gap within 1 bit", Duration::from_secs(60), criterion_1),
        (2, "half-capacity approach", Duration::from_secs(30), criterion_2),
        (3, "erasure/symmetric reduction", Duration::from_secs(5), criterion_3),
        (4, "neighbor-union equivalence", Duration::from_secs(10), criterion_4),
        (5, "closed form vs type enumeration", Duration::from_secs(30), criterion_5),
        (6, "packing guarantees", Duration::from_secs(30), criterion_6),
        (7, "moment bounds", Duration::from_secs(30), criterion_7),
        (8, "Berry-Esseen sandwich", Duration::from_secs(60), criterion_8),
        (9, "Monte Carlo consistency", Duration::from_secs(120), criterion_9),
        (10, "rate at n = 5e4", Duration::from_secs(60), criterion_10),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.passed && took <= budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id:>2} ({name}): {} [{:.2?} / budget {:?}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took,
            budget
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
