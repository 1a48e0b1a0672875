//! Synthetic instance generation: lognormal per-type durations with a
//! random case mix, deterministic per seed, plus the misspecification
//! perturbation used for out-of-sample stress tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, LogNormal};
use serde::{Deserialize, Serialize};

use crate::domain::{estimate_moments, ModeSet, ModeStats};
use crate::error::{Error, Result};

/// Generation parameters. Log-means and log-standard-deviations of each
/// type are drawn uniformly from the given ranges; the case-mix vector is
/// uniform on the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub modes: usize,
    pub logmean_range: (f64, f64),
    pub logstd_range: (f64, f64),
    pub n_train: usize,
    pub n_test: usize,
    /// Draws above this many minutes are stored clipped to it.
    pub clip_max: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            modes: 5,
            logmean_range: (100.0f64.ln(), 600.0f64.ln()),
            logstd_range: (0.5, 1.5),
            n_train: 100,
            n_test: 1000,
            clip_max: 720.0,
            seed: 0,
        }
    }
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::BadParameter("at least one mode".into()));
        }
        if self.logmean_range.0 > self.logmean_range.1
            || self.logstd_range.0 > self.logstd_range.1
        {
            return Err(Error::BadParameter("ranges must be ordered".into()));
        }
        if self.n_train < self.modes {
            return Err(Error::BadParameter(format!(
                "n_train {} cannot place one sample in each of {} modes",
                self.n_train, self.modes
            )));
        }
        if self.n_test < self.modes || self.clip_max.is_nan() || self.clip_max <= 0.0 {
            return Err(Error::BadParameter("invalid test count or clip".into()));
        }
        Ok(())
    }
}

/// Ground-truth lognormal parameters of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeTruth {
    pub log_mean: f64,
    pub log_std: f64,
}

/// A generated instance: per-mode train and test samples, the drawn nominal
/// probabilities (kept as drawn; realized counts are implicit in the sample
/// lengths), and the ground-truth parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub nominal_probs: Vec<f64>,
    pub truth: Vec<ModeTruth>,
    pub train: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
    pub clip_max: f64,
}

impl SampleSet {
    /// Estimates the moment triple of every mode from the training samples.
    pub fn estimate_mode_set(&self) -> Result<ModeSet> {
        let modes: Vec<ModeStats> = self
            .train
            .iter()
            .zip(&self.nominal_probs)
            .map(|(samples, &p)| estimate_moments(samples, p))
            .collect::<Result<_>>()?;
        ModeSet::new(modes)
    }
}

/// Splits `n` into integer per-mode counts proportional to `probs` by
/// largest remainder, then enforces at least one sample per mode by taking
/// from the most over-allocated donor. The result sums to `n` exactly and
/// every count stays within one of its exact share.
pub fn allocate_counts(n: usize, probs: &[f64]) -> Vec<usize> {
    let l = probs.len();
    assert!(n >= l, "cannot give every mode one sample");
    let exact: Vec<f64> = probs.iter().map(|&p| p * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|&e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(n - assigned) {
        counts[i] += 1;
    }
    // Unit floor: donors are picked by largest over-allocation among modes
    // that can spare a sample, so each donated count drops by at most one
    // below its exact share.
    while let Some(zero) = counts.iter().position(|&c| c == 0) {
        let donor = (0..l)
            .filter(|&i| counts[i] >= 2)
            .max_by(|&a, &b| {
                let da = counts[a] as f64 - exact[a];
                let db = counts[b] as f64 - exact[b];
                da.partial_cmp(&db).unwrap().then(b.cmp(&a))
            })
            .expect("some mode must hold surplus mass");
        counts[donor] -= 1;
        counts[zero] += 1;
    }
    counts
}

fn draw_mode_samples(
    rng: &mut ChaCha8Rng,
    truth: &ModeTruth,
    count: usize,
    clip_max: f64,
) -> Vec<f64> {
    let dist = LogNormal::new(truth.log_mean, truth.log_std).expect("valid lognormal");
    (0..count)
        .map(|_| dist.sample(rng).min(clip_max))
        .collect()
}

/// Generates a full instance, fully deterministic per seed.
pub fn generate(config: &GenConfig) -> Result<SampleSet> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let truth: Vec<ModeTruth> = (0..config.modes)
        .map(|_| ModeTruth {
            log_mean: rng.gen_range(config.logmean_range.0..=config.logmean_range.1),
            log_std: rng.gen_range(config.logstd_range.0..=config.logstd_range.1),
        })
        .collect();
    // Uniform on the simplex: normalized unit-exponential draws.
    let raw: Vec<f64> = (0..config.modes).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let nominal_probs: Vec<f64> = raw.iter().map(|&e| e / total).collect();

    let train_counts = allocate_counts(config.n_train, &nominal_probs);
    let train: Vec<Vec<f64>> = truth
        .iter()
        .zip(&train_counts)
        .map(|(t, &c)| draw_mode_samples(&mut rng, t, c, config.clip_max))
        .collect();
    let test_counts = allocate_counts(config.n_test, &nominal_probs);
    let test: Vec<Vec<f64>> = truth
        .iter()
        .zip(&test_counts)
        .map(|(t, &c)| draw_mode_samples(&mut rng, t, c, config.clip_max))
        .collect();
    Ok(SampleSet {
        nominal_probs,
        truth,
        train,
        test,
        clip_max: config.clip_max,
    })
}

/// Misspecification perturbation of the test-generation parameters:
/// `log_mean' = (1 + eps) log_mean`, `log_std' = (1 + eps) log_std`.
pub fn perturb(truth: &[ModeTruth], eps: f64) -> Vec<ModeTruth> {
    truth
        .iter()
        .map(|t| ModeTruth {
            log_mean: (1.0 + eps) * t.log_mean,
            log_std: (1.0 + eps) * t.log_std,
        })
        .collect()
}

/// Draws a fresh per-mode test set from the given (possibly perturbed)
/// parameters and case mix.
pub fn generate_test(
    truth: &[ModeTruth],
    probs: &[f64],
    n_test: usize,
    clip_max: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = allocate_counts(n_test, probs);
    truth
        .iter()
        .zip(&counts)
        .map(|(t, &c)| draw_mode_samples(&mut rng, t, c, clip_max))
        .collect()
}
