//! Monte Carlo simulation of the permutation channel with maximum-likelihood
//! decoding.
//!
//! Each message is sent as an iid codeword drawn from the input distribution
//! whose channel output is the message's packing center. The received word is
//! optionally shuffled and decoded from its symbol counts.
//!
//! Randomness: ChaCha8 seeded with `seed_from_u64(seed)`, one stream per trial
//! (`set_stream(trial)`). Shuffles use a second generator seeded with
//! `seed ^ SHUFFLE_SALT`, also one stream per trial, so switching the shuffle on
//! or off leaves the message and channel noise of every trial unchanged.
//! Results do not depend on the number of threads.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::packing::{MessageSet, IMAGE_TOL};
use crate::prob::Distribution;
use crate::scalar::Real;

/// Name of the generator, for reports.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), stream = trial index";
const SHUFFLE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Input distribution `P_X` with `P_X W = p`. Entries down to `-IMAGE_TOL` are
/// clamped to zero and the result renormalized.
pub fn input_distribution_for<T: Real>(w: &ChannelMatrix<T>, p: &Distribution<T>) -> Result<Distribution<T>> {
    let x = w.preimage(p)?;
    let tol = T::lit(IMAGE_TOL);
    if let Some((index, &v)) = x.iter().enumerate().find(|(_, &v)| v < -tol) {
        return Err(Error::NotInImage {
            index,
            value: v.as_f64(),
        });
    }
    let clamped: Vec<T> = x.into_iter().map(|v| v.max(T::zero())).collect();
    let total: T = clamped.iter().copied().sum();
    Distribution::new(clamped.into_iter().map(|v| v / total).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub channel: ChannelMatrix<T>,
    pub message_set: MessageSet<T>,
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub permute: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub errors: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// Errors caused by the true message tying for the best likelihood.
    pub ties: u64,
}

impl SimReport {
    fn from_counts(errors: u64, ties: u64, trials: u64) -> Self {
        let p_hat = errors as f64 / trials as f64;
        let stderr = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
        let half = 1.959_963_984_540_054 * stderr;
        Self {
            errors,
            trials,
            p_hat,
            stderr,
            ci95: ((p_hat - half).max(0.0), (p_hat + half).min(1.0)),
            ties,
        }
    }
}

/// Outcome of decoding one received type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Unique(usize),
    /// Several messages share the largest likelihood.
    Tie,
}

/// Maximum-likelihood decoder over a packing. The log-likelihood of message
/// `j` is `sum_y c_y ln P_j(y)`, a function of the counts `c` only.
#[derive(Clone, Debug)]
pub struct TypeDecoder {
    log_probs: Vec<Vec<f64>>,
    /// Largest `|ln P_j(y)|`, used to scale the tie tolerance.
    scale: f64,
    tie_tol: f64,
}

impl TypeDecoder {
    pub fn new<T: Real>(set: &MessageSet<T>) -> Self {
        let log_probs: Vec<Vec<f64>> = set
            .centers()
            .iter()
            .map(|c| c.probs().iter().map(|&p| p.as_f64().ln()).collect())
            .collect();
        let scale = log_probs
            .iter()
            .flatten()
            .filter(|v| v.is_finite())
            .fold(1.0f64, |a, v| a.max(v.abs()));
        Self {
            log_probs,
            scale,
            tie_tol: T::TIE_TOL,
        }
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn log_likelihood(&self, j: usize, counts: &[u64]) -> f64 {
        counts
            .iter()
            .zip(&self.log_probs[j])
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &lp)| c as f64 * lp)
            .sum()
    }

    pub fn decode_counts(&self, counts: &[u64]) -> Decision {
        let total: u64 = counts.iter().sum();
        let tol = self.tie_tol * self.scale * (total.max(1) as f64);
        let scores: Vec<f64> = (0..self.len()).map(|j| self.log_likelihood(j, counts)).collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut winners = scores.iter().enumerate().filter(|(_, &s)| s >= best - tol);
        match (winners.next(), winners.next()) {
            (Some((j, _)), None) => Decision::Unique(j),
            _ => Decision::Tie,
        }
    }

    /// Decodes a received word of output symbol indices.
    pub fn decode_word(&self, word: &[usize], alphabet: usize) -> Decision {
        self.decode_counts(&type_counts(word, alphabet))
    }

    /// Whether the true message `m` wins outright; `Err(())` marks a tie it
    /// shares with another message.
    fn judge(&self, m: usize, counts: &[u64]) -> std::result::Result<bool, ()> {
        let total: u64 = counts.iter().sum();
        let tol = self.tie_tol * self.scale * (total.max(1) as f64);
        let own = self.log_likelihood(m, counts);
        let mut tied = false;
        for j in (0..self.len()).filter(|&j| j != m) {
            let s = self.log_likelihood(j, counts);
            if s > own + tol {
                return Ok(false);
            }
            if s >= own - tol {
                tied = true;
            }
        }
        if tied {
            Err(())
        } else {
            Ok(true)
        }
    }
}

pub fn type_counts(word: &[usize], alphabet: usize) -> Vec<u64> {
    let mut c = vec![0u64; alphabet];
    for &y in word {
        c[y] += 1;
    }
    c
}

fn cumulative<T: Real>(d: &Distribution<T>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = d
        .probs()
        .iter()
        .map(|p| {
            acc += p.as_f64();
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

fn sample(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

struct Prepared {
    inputs: Vec<Vec<f64>>,
    channel: Vec<Vec<f64>>,
    outputs: usize,
    decoder: TypeDecoder,
}

fn prepare<T: Real>(cfg: &SimConfig<T>) -> Result<Prepared> {
    if cfg.trials == 0 || cfg.n == 0 {
        return Err(Error::InvalidParameter("trials and n must be at least 1".into()));
    }
    if cfg.message_set.is_empty() {
        return Err(Error::InvalidParameter("message set is empty".into()));
    }
    if cfg.message_set.alphabet_size() != cfg.channel.output_size() {
        return Err(Error::LengthMismatch {
            left: cfg.channel.output_size(),
            right: cfg.message_set.alphabet_size(),
        });
    }
    let inputs = cfg
        .message_set
        .centers()
        .iter()
        .map(|c| input_distribution_for(&cfg.channel, c).map(|d| cumulative(&d)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        inputs,
        channel: cfg.channel.rows().iter().map(cumulative).collect(),
        outputs: cfg.channel.output_size(),
        decoder: TypeDecoder::new(&cfg.message_set),
    })
}

#[derive(Clone, Copy, Default)]
struct Tally {
    errors: u64,
    ties: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            errors: self.errors + o.errors,
            ties: self.ties + o.ties,
        }
    }
}

fn run_one(p: &Prepared, n: usize, seed: u64, trial: u64, permute: bool) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let m = rng.random_range(0..p.inputs.len());
    let mut x: Vec<usize> = (0..n).map(|_| sample(&p.inputs[m], &mut rng)).collect();
    if permute {
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed ^ SHUFFLE_SALT);
        shuffle_rng.set_stream(trial);
        x.shuffle(&mut shuffle_rng);
    }
    let mut counts = vec![0u64; p.outputs];
    for &xi in &x {
        counts[sample(&p.channel[xi], &mut rng)] += 1;
    }
    if p.inputs.len() == 1 {
        return Tally::default();
    }
    match p.decoder.judge(m, &counts) {
        Ok(true) => Tally::default(),
        Ok(false) => Tally { errors: 1, ties: 0 },
        Err(()) => Tally { errors: 1, ties: 1 },
    }
}

pub fn run_trials<T: Real>(cfg: &SimConfig<T>) -> Result<SimReport> {
    let p = prepare(cfg)?;
    let n = usize::try_from(cfg.n).map_err(|_| Error::InvalidParameter("n too large".into()))?;
    let tally = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_one(&p, n, cfg.seed, t, cfg.permute))
        .reduce(Tally::default, |a, b| a + b);
    Ok(SimReport::from_counts(tally.errors, tally.ties, cfg.trials))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub permuted: SimReport,
    pub unpermuted: SimReport,
    pub difference: f64,
    /// Pooled standard error of the difference.
    pub combined_stderr: f64,
    /// Two-proportion z statistic (zero when both estimates are equal).
    pub z: f64,
}

/// Runs the configuration with the shuffle on and off under the same seed.
pub fn permutation_invariance_check<T: Real>(cfg: &SimConfig<T>) -> Result<InvarianceReport> {
    let on = run_trials(&SimConfig { permute: true, ..cfg.clone() })?;
    let off = run_trials(&SimConfig { permute: false, ..cfg.clone() })?;
    let diff = on.p_hat - off.p_hat;
    let pooled = (on.errors + off.errors) as f64 / (on.trials + off.trials) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / on.trials as f64 + 1.0 / off.trials as f64)).sqrt();
    let z = if diff == 0.0 { 0.0 } else { diff / se };
    Ok(InvarianceReport {
        permuted: on,
        unpermuted: off,
        difference: diff,
        combined_stderr: se,
        z,
    })
}
