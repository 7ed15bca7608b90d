//! Self-checks run by `permchan verify`: reference values, internal
//! consistency between independent code paths, and the guarantees the
//! bounds rest on. Each check is small enough to finish in seconds.

use permchan::approx::{approx_bsc, moment_constants, pairwise_error_estimate, verify_moment_bounds};
use permchan::bounds::{
    bec_achievability, binary_summands, bsc_achievability, bsc_achievability_by_size, error_event_prob,
    general_summands, neighbor_set, search_max_m,
};
use permchan::packing::{
    binomial_count, build_binary_message_set_by_size, build_binary_message_set_with_grid,
    build_dmc_message_set_with_grid, min_pairwise_kl, packing_count_bounds_for_radius,
};
use permchan::prob::{binomial_ln_pmf, binomial_tail, llr_moments, std_normal_cdf, std_normal_quantile};
use permchan::sim::{permutation_invariance_check, run_trials};
use permchan::{ChannelMatrix64, ChannelSpec64, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_values() -> Outcome {
    let cases: [(&str, f64, f64); 5] = [
        ("Phi(1)", std_normal_cdf(1.0), 0.841_344_746_068_542_9),
        ("Phi(-5)", std_normal_cdf(-5.0), 2.866_515_718_791_939e-7),
        ("Phi(-10)", std_normal_cdf(-10.0), 7.619_853_024_160_527e-24),
        ("Phi^-1(0.975)", std_normal_quantile(0.975).map_err(|e| e.to_string())?, 1.959_963_984_540_054),
        ("Phi^-1(5e-4)", std_normal_quantile(5e-4).map_err(|e| e.to_string())?, -3.290_526_731_491_895),
    ];
    let worst = cases
        .iter()
        .map(|(name, got, want)| ((got - want).abs() / want.abs(), *name))
        .fold((0.0, ""), |a, b| if b.0 > a.0 { b } else { a });
    ensure(worst.0 < 1e-13, format!("max relative error {:.1e} ({})", worst.0, worst.1))
}

fn binomial_normalization() -> Outcome {
    let mut worst = 0.0f64;
    for n in [1u64, 10, 100, 1000, 10_000] {
        for p in [0.01f64, 0.11, 0.5, 0.9] {
            worst = worst.max((binomial_tail(n, 0, n as i64, p) - 1.0).abs());
            let cut = (n / 3) as i64;
            let split = binomial_tail(n, 0, cut, p) + binomial_tail(n, cut + 1, n as i64, p);
            worst = worst.max((split - 1.0).abs());
        }
    }
    ensure(worst < 1e-12, format!("max |total - 1| = {worst:.1e}"))
}

fn closed_form_vs_enumeration() -> Outcome {
    let mut worst = 0.0f64;
    for m in 3..=5 {
        let set = build_binary_message_set_by_size(0.11f64, 0.11, m).map_err(|e| e.to_string())?;
        for n in 1..=60 {
            let a = binary_summands(&set, n).map_err(|e| e.to_string())?;
            let b = general_summands(&set, n).map_err(|e| e.to_string())?;
            worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
        }
    }
    ensure(worst <= 1e-12, format!("max summand difference {worst:.1e} over M in 3..=5, n in 1..=60"))
}

fn erasure_reduction(rng: &mut ChaCha8Rng) -> Outcome {
    let mut differ = 0;
    for _ in 0..20 {
        let n = rng.random_range(1..=500u64);
        let m = rng.random_range(2..=12usize);
        let a = bec_achievability(0.22f64, m, n).map_err(|e| e.to_string())?;
        let b = bsc_achievability_by_size(0.11f64, m, n).map_err(|e| e.to_string())?;
        differ += usize::from(a.to_bits() != b.to_bits());
    }
    ensure(differ == 0, format!("{differ} of 20 random (n, M) pairs differ from the BSC(0.11) bound"))
}

/// Error probability of message `i` under ML decoding against the listed
/// rivals, summing over the number of zeros in the received word.
fn union_error(c: &[f64], i: usize, rivals: &[usize], n: u64) -> f64 {
    let ll = |j: usize, t: u64| t as f64 * c[j].ln() + (n - t) as f64 * (1.0 - c[j]).ln();
    (0..=n)
        .filter(|&t| {
            let own = ll(i, t);
            rivals.iter().any(|&j| ll(j, t) >= own - 1e-12 * own.abs().max(1.0))
        })
        .map(|t| binomial_ln_pmf(n, t, c[i]).exp())
        .sum()
}

fn neighbor_union() -> Outcome {
    let mut worst = 0.0f64;
    for m in 3..=5 {
        let set = build_binary_message_set_by_size(0.11f64, 0.11, m).map_err(|e| e.to_string())?;
        let c: Vec<f64> = set.centers().iter().map(|d| d.get(0)).collect();
        for n in 1..=10 {
            for i in 0..m {
                let all: Vec<usize> = (0..m).filter(|&j| j != i).collect();
                let near: Vec<usize> = neighbor_set(&set, i).map_err(|e| e.to_string())?.indices().collect();
                worst = worst.max((union_error(&c, i, &all, n) - union_error(&c, i, &near, n)).abs());
            }
        }
    }
    ensure(worst <= 1e-12, format!("max |all rivals - neighbors only| = {worst:.1e}"))
}

fn random_channel(rng: &mut ChaCha8Rng, k: usize) -> ChannelMatrix64 {
    loop {
        let s = rng.random_range(0.02..0.3);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let noise: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
                let total: f64 = noise.iter().sum();
                (0..k)
                    .map(|j| if i == j { 1.0 - s } else { 0.0 } + s * noise[j] / total)
                    .collect()
            })
            .collect();
        if let Ok(w) = ChannelMatrix64::new(rows) {
            if w.strictly_positive() && w.require_full_rank_square().is_ok() {
                return w;
            }
        }
    }
}

fn packing_guarantees(rng: &mut ChaCha8Rng) -> Outcome {
    let mut checked = 0;
    for _ in 0..60 {
        let k = rng.random_range(2..=3usize);
        let grid_n = rng.random_range(1..=10usize);
        let w = random_channel(rng, k);
        let counts = packing_count_bounds_for_radius(1.0 / grid_n as f64, k).map_err(|e| e.to_string())?;
        let expect = binomial_count((grid_n + k - 1) as u64, (k - 1) as u64);
        if counts.exact_grid != expect {
            return Err(format!("k={k} N={grid_n}: grid count {} != {expect}", counts.exact_grid));
        }
        let (lo, hi) = (counts.lower, counts.upper);
        if !(lo <= expect as f64 + 1e-9 && expect as f64 <= hi + 1e-9) {
            return Err(format!("k={k} N={grid_n}: bracket [{lo}, {hi}] misses {expect}"));
        }
        match build_dmc_message_set_with_grid(&w, grid_n) {
            Ok(set) if set.len() >= 2 => {
                let d = min_pairwise_kl(&set);
                if d < set.radius_r0() * (1.0 - 1e-12) {
                    return Err(format!("k={k} N={grid_n}: min divergence {d} below radius {}", set.radius_r0()));
                }
                checked += 1;
            }
            _ => {}
        }
    }
    Ok(format!("60 grids, {checked} packings with at least two centers"))
}

fn moment_bounds(rng: &mut ChaCha8Rng) -> Outcome {
    let mut pairs = 0;
    for trial in 0..20 {
        let w = random_channel(rng, 2 + trial % 2);
        let cap = moment_constants(&w).map_err(|e| e.to_string())?.r0_cap;
        for frac in [1.0, 0.25] {
            let report = match verify_moment_bounds(&w, cap * frac) {
                Ok(r) => r,
                Err(permchan::Error::EmptyMessageSet { .. }) => continue,
                Err(e) => return Err(e.to_string()),
            };
            if let Some(f) = report.failures().next() {
                return Err(format!("r0={}: pair {}->{} out of range", cap * frac, f.owner, f.neighbor));
            }
            pairs += report.pairs.len();
        }
    }
    ensure(pairs > 0, format!("{pairs} neighbor pairs within the variance and third-moment bounds"))
}

fn berry_esseen(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let d1: f64 = rng.random_range(0.02..0.4);
        let d2: f64 = rng.random_range(0.02..0.4);
        let set = build_binary_message_set_with_grid(d1, d2, rng.random_range(1..=20usize)).map_err(|e| e.to_string())?;
        let m = rng.random_range(0..set.len());
        let nbrs: Vec<usize> = neighbor_set(&set, m).map_err(|e| e.to_string())?.indices().collect();
        let j = nbrs[rng.random_range(0..nbrs.len())];
        let mom = llr_moments(set.center(m), set.center(j)).map_err(|e| e.to_string())?;
        for n in [50u64, 100, 200] {
            let exact = error_event_prob(set.center(m), set.center(j), n).map_err(|e| e.to_string())?;
            let be = pairwise_error_estimate(&mom, n).map_err(|e| e.to_string())?;
            worst = worst.max((exact - be.phi).abs() / be.half_width);
        }
    }
    ensure(worst <= 1.0, format!("max |exact - normal| / half-width = {worst:.4} over 120 cases"))
}

fn approximation_gap() -> Outcome {
    let mut worst = (0.0f64, 0u64);
    for i in 0..10 {
        let n = (20f64 * 100f64.powf(i as f64 / 9.0)).round() as u64;
        let p = search_max_m(&ChannelSpec64::Bsc { delta: 0.11 }, n, 1e-3).map_err(|e| e.to_string())?;
        let a = approx_bsc(0.11, n, 1e-3, true).map_err(|e| e.to_string())?;
        let gap = (p.log2_m - a).abs();
        if gap > worst.0 {
            worst = (gap, n);
        }
    }
    ensure(worst.0 <= 1.0, format!("max |bound - approximation| = {:.3} bits (n = {})", worst.0, worst.1))
}

fn simulation(seed: u64) -> Outcome {
    let n = 100;
    let set = build_binary_message_set_by_size(0.11, 0.11, 4).map_err(|e| e.to_string())?;
    let bound = bsc_achievability(0.11, &set, n).map_err(|e| e.to_string())?;
    let cfg = SimConfig {
        channel: ChannelMatrix64::bsc(0.11).map_err(|e| e.to_string())?,
        message_set: set,
        n,
        trials: 20_000,
        seed,
        permute: true,
    };
    let a = run_trials(&cfg).map_err(|e| e.to_string())?;
    let b = run_trials(&cfg).map_err(|e| e.to_string())?;
    if a != b {
        return Err("two runs with the same seed differ".into());
    }
    let inv = permutation_invariance_check(&cfg).map_err(|e| e.to_string())?;
    ensure(
        a.p_hat <= bound + 3.0 * a.stderr && inv.z.abs() < 4.0,
        format!("M=4: p_hat {:.2e} vs bound {bound:.2e}; shuffle on/off z = {:.2}", a.p_hat, inv.z),
    )
}

fn check(name: &'static str, f: impl FnOnce() -> Outcome) -> Check {
    let (passed, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Check { name, passed, detail }
}

pub fn run_all(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        check("normal reference values", reference_values),
        check("binomial normalization", binomial_normalization),
        check("closed form vs type enumeration", closed_form_vs_enumeration),
        check("erasure/symmetric reduction", || erasure_reduction(&mut rng)),
        check("neighbor union = full union", neighbor_union),
        check("packing guarantees", || packing_guarantees(&mut rng)),
        check("moment bounds", || moment_bounds(&mut rng)),
        check("Berry-Esseen sandwich", || berry_esseen(&mut rng)),
        check("approximation within 1 bit", approximation_gap),
        check("simulation consistency", || simulation(seed)),
    ]
}

pub fn print_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        s += &format!(
            "{:<width$}  {}  {}\n",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    s += &format!("{} passed, {failed} failed\n", checks.len() - failed);
    s
}
