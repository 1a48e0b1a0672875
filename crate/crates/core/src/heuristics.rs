//! Clustering-based grouping heuristics: K-Means and K-Medoids over mode
//! feature vectors, the cross-validated choice of the group count, and the
//! end-to-end heuristic solve.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::SampleSet;
use crate::domain::{estimate_moments, CostParams, ModeSet, ModeStats, Partition};
use crate::error::{Error, Result};
use crate::eval::empirical_cost;
use crate::solver::{evaluate_partition, Solution};

/// Which moment coordinates feed the clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureComponent {
    Mean,
    StdDev,
    Semivariance,
}

/// Feature selection plus the standardization switch. Standardization
/// (z-score per component) is on by default so minute-scale means do not
/// drown the unitless semivariance; raw mode is kept for comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub components: Vec<FeatureComponent>,
    pub standardize: bool,
}

impl FeatureSpec {
    /// Default K-Means features: mean and semivariance.
    pub fn kmeans_default() -> Self {
        Self {
            components: vec![FeatureComponent::Mean, FeatureComponent::Semivariance],
            standardize: true,
        }
    }

    /// Default K-Medoids features: mean, standard deviation, semivariance.
    pub fn kmedoids_default() -> Self {
        Self {
            components: vec![
                FeatureComponent::Mean,
                FeatureComponent::StdDev,
                FeatureComponent::Semivariance,
            ],
            standardize: true,
        }
    }

    /// Parses a comma-separated component list: `m`, `sigma` (or `std`),
    /// `s` (or `semivariance`), e.g. `"m,s"`.
    pub fn parse(text: &str, standardize: bool) -> Result<Self> {
        let mut components = Vec::new();
        for part in text.split(',') {
            let c = match part.trim() {
                "m" | "mean" => FeatureComponent::Mean,
                "sigma" | "std" => FeatureComponent::StdDev,
                "s" | "semivariance" => FeatureComponent::Semivariance,
                other => {
                    return Err(Error::Parse(format!("unknown feature component {other:?}")))
                }
            };
            if !components.contains(&c) {
                components.push(c);
            }
        }
        if components.is_empty() {
            return Err(Error::Parse("empty feature list".into()));
        }
        Ok(Self {
            components,
            standardize,
        })
    }
}

/// Extracts (and optionally standardizes) the feature matrix, one row per
/// mode. A component with zero spread standardizes to all zeros.
pub fn feature_matrix(mode_set: &ModeSet, spec: &FeatureSpec) -> Vec<Vec<f64>> {
    let pick = |m: &ModeStats, c: FeatureComponent| -> f64 {
        match c {
            FeatureComponent::Mean => m.mean,
            FeatureComponent::StdDev => m.std_dev,
            FeatureComponent::Semivariance => m.semivariance,
        }
    };
    let n = mode_set.len() as f64;
    let mut rows: Vec<Vec<f64>> = mode_set
        .modes()
        .iter()
        .map(|m| spec.components.iter().map(|&c| pick(m, c)).collect())
        .collect();
    if spec.standardize {
        for j in 0..spec.components.len() {
            let mean: f64 = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var: f64 = rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n;
            let std = var.sqrt();
            for r in rows.iter_mut() {
                r[j] = if std > 0.0 { (r[j] - mean) / std } else { 0.0 };
            }
        }
    }
    rows
}

/// Iteration controls for both clustering methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl ClusterConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            restarts: 10,
            max_iters: 100,
            seed,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared-distance-weighted seeding: the first center is uniform, each
/// further one is drawn proportionally to its squared distance from the
/// nearest chosen center. Plain uniform seeding strands Lloyd's iteration
/// in poor local optima too often on small, well-separated mode sets.
fn weighted_init(features: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let l = features.len();
    let first = rng.gen_range(0..l);
    let mut chosen = vec![first];
    let mut d2: Vec<f64> = features
        .iter()
        .map(|f| sq_dist(f, &features[first]))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            (0..l).find(|i| !chosen.contains(i)).expect("k <= l")
        } else {
            let mut u = rng.gen_range(0.0..total);
            let mut pick = l - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        };
        chosen.push(next);
        for (i, f) in features.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(f, &features[next]));
        }
    }
    chosen
}

fn check_k(k: usize, l: usize) -> Result<()> {
    if k == 0 || k > l {
        return Err(Error::BadParameter(format!(
            "cluster count {k} outside 1..={l}"
        )));
    }
    Ok(())
}

fn assignment_to_partition(assign: &[usize], k: usize) -> Partition {
    let mut groups = vec![Vec::new(); k];
    for (i, &g) in assign.iter().enumerate() {
        groups[g].push(i);
    }
    groups.retain(|g| !g.is_empty());
    let n = assign.len();
    Partition::new(groups, n).expect("assignment covers all points")
}

/// Lloyd's iteration from `k` distinct seed points drawn by
/// squared-distance weighting, best of the configured restarts by
/// within-cluster sum of squares. Empty clusters are repaired by reseeding
/// at the point farthest from its assigned centroid.
pub fn kmeans(features: &[Vec<f64>], config: &ClusterConfig) -> Result<Partition> {
    let l = features.len();
    check_k(config.k, l)?;
    let k = config.k;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..config.restarts.max(1) {
        let idx = weighted_init(features, k, &mut rng);
        let mut centroids: Vec<Vec<f64>> = idx.iter().map(|&i| features[i].clone()).collect();
        let mut assign = vec![0usize; l];
        for _ in 0..config.max_iters {
            let mut changed = false;
            for (i, f) in features.iter().enumerate() {
                let nearest = (0..k)
                    .min_by(|&a, &b| {
                        sq_dist(f, &centroids[a])
                            .partial_cmp(&sq_dist(f, &centroids[b]))
                            .unwrap()
                            .then(a.cmp(&b))
                    })
                    .unwrap();
                if assign[i] != nearest {
                    assign[i] = nearest;
                    changed = true;
                }
            }
            // Repair empty clusters with the farthest point.
            for g in 0..k {
                if assign.contains(&g) {
                    continue;
                }
                let far = (0..l)
                    .max_by(|&a, &b| {
                        sq_dist(&features[a], &centroids[assign[a]])
                            .partial_cmp(&sq_dist(&features[b], &centroids[assign[b]]))
                            .unwrap()
                            .then(b.cmp(&a))
                    })
                    .unwrap();
                assign[far] = g;
                changed = true;
            }
            let dim = features[0].len();
            for (g, centroid) in centroids.iter_mut().enumerate() {
                let members: Vec<&Vec<f64>> = features
                    .iter()
                    .zip(&assign)
                    .filter(|&(_, &a)| a == g)
                    .map(|(f, _)| f)
                    .collect();
                for (d, c) in centroid.iter_mut().enumerate().take(dim) {
                    *c = members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64;
                }
            }
            if !changed {
                break;
            }
        }
        let wcss: f64 = features
            .iter()
            .zip(&assign)
            .map(|(f, &a)| sq_dist(f, &centroids[a]))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| wcss < *b) {
            best = Some((wcss, assign));
        }
    }
    let (_, assign) = best.expect("at least one restart");
    Ok(assignment_to_partition(&assign, k))
}

/// Alternating assignment/medoid-update clustering; the medoid of a cluster
/// is the member minimizing total Euclidean distance to its members, and
/// the objective is total point-to-medoid distance. Best of restarts.
pub fn kmedoids(features: &[Vec<f64>], config: &ClusterConfig) -> Result<Partition> {
    let l = features.len();
    check_k(config.k, l)?;
    let k = config.k;
    let dist = |a: usize, b: usize| sq_dist(&features[a], &features[b]).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..config.restarts.max(1) {
        let mut medoids = weighted_init(features, k, &mut rng);
        let mut assign = vec![0usize; l];
        let mut objective = f64::INFINITY;
        for _ in 0..config.max_iters {
            for (i, a) in assign.iter_mut().enumerate() {
                *a = (0..k)
                    .min_by(|&x, &y| {
                        dist(i, medoids[x])
                            .partial_cmp(&dist(i, medoids[y]))
                            .unwrap()
                            .then(x.cmp(&y))
                    })
                    .unwrap();
            }
            for (g, medoid) in medoids.iter_mut().enumerate() {
                let members: Vec<usize> = (0..l).filter(|&i| assign[i] == g).collect();
                if members.is_empty() {
                    continue;
                }
                *medoid = members
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        let ca: f64 = members.iter().map(|&m| dist(a, m)).sum();
                        let cb: f64 = members.iter().map(|&m| dist(b, m)).sum();
                        ca.partial_cmp(&cb).unwrap().then(a.cmp(&b))
                    })
                    .unwrap();
            }
            let new_objective: f64 = (0..l).map(|i| dist(i, medoids[assign[i]])).sum();
            if new_objective >= objective - 1e-12 {
                objective = new_objective.min(objective);
                break;
            }
            objective = new_objective;
        }
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, assign));
        }
    }
    let (_, assign) = best.expect("at least one restart");
    Ok(assignment_to_partition(&assign, k))
}

/// Clustering method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMethod {
    KMeans,
    KMedoids,
}

impl ClusterMethod {
    pub fn cluster(
        &self,
        features: &[Vec<f64>],
        config: &ClusterConfig,
    ) -> Result<Partition> {
        match self {
            ClusterMethod::KMeans => kmeans(features, config),
            ClusterMethod::KMedoids => kmedoids(features, config),
        }
    }

    pub fn default_features(&self) -> FeatureSpec {
        match self {
            ClusterMethod::KMeans => FeatureSpec::kmeans_default(),
            ClusterMethod::KMedoids => FeatureSpec::kmedoids_default(),
        }
    }
}

/// Clusters the modes into `k` groups and optimizes every group's duration.
pub fn solve_heuristic(
    mode_set: &ModeSet,
    costs: &CostParams,
    spec: &FeatureSpec,
    method: ClusterMethod,
    k: usize,
    seed: u64,
) -> Result<Solution> {
    let features = feature_matrix(mode_set, spec);
    let partition = method.cluster(&features, &ClusterConfig::new(k, seed))?;
    evaluate_partition(partition, mode_set, costs)
}

/// Picks the group count by F-fold cross-validation over the
/// samples-within-mode: each fold re-estimates moments on its complement,
/// clusters, optimizes durations, and scores the held-out fold's empirical
/// cost. Smallest mean validation cost wins; ties go to the smaller K.
pub fn crossvalidate_k(
    samples: &SampleSet,
    costs: &CostParams,
    spec: &FeatureSpec,
    method: ClusterMethod,
    folds: usize,
    k_range: &[usize],
    seed: u64,
) -> Result<usize> {
    let l = samples.train.len();
    if folds < 2 {
        return Err(Error::BadParameter("need at least two folds".into()));
    }
    if k_range.is_empty() {
        return Err(Error::BadParameter("empty K range".into()));
    }
    for (mode, xs) in samples.train.iter().enumerate() {
        if xs.len() < folds {
            return Err(Error::InsufficientSamples {
                mode,
                needed: folds,
                got: xs.len(),
            });
        }
    }
    if l == 1 {
        return Ok(1);
    }

    // Deterministic per-mode shuffles; fold f holds out every index
    // congruent to f.
    let mut shuffled: Vec<Vec<usize>> = Vec::with_capacity(l);
    for mode in 0..l {
        let mut idx: Vec<usize> = (0..samples.train[mode].len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (mode as u64).wrapping_mul(0x9E37_79B9));
        idx.shuffle(&mut rng);
        shuffled.push(idx);
    }

    let mut best: Option<(f64, usize)> = None;
    for &k in k_range {
        if k == 0 || k > l {
            continue;
        }
        let mut total = 0.0;
        let mut evaluated = 0usize;
        for fold in 0..folds {
            let mut train_fold: Vec<Vec<f64>> = Vec::with_capacity(l);
            let mut held_out: Vec<Vec<f64>> = Vec::with_capacity(l);
            for (mode, shuffle) in shuffled.iter().enumerate() {
                let xs = &samples.train[mode];
                let mut tr = Vec::new();
                let mut ho = Vec::new();
                for (pos, &i) in shuffle.iter().enumerate() {
                    if pos % folds == fold {
                        ho.push(xs[i]);
                    } else {
                        tr.push(xs[i]);
                    }
                }
                train_fold.push(tr);
                held_out.push(ho);
            }
            let modes: Vec<ModeStats> = train_fold
                .iter()
                .zip(&samples.nominal_probs)
                .map(|(xs, &p)| estimate_moments(xs, p))
                .collect::<Result<_>>()?;
            let ms = ModeSet::new(modes)?;
            let sol = solve_heuristic(&ms, costs, spec, method, k, seed.wrapping_add(fold as u64))?;
            let report = empirical_cost(&sol, &held_out, &samples.nominal_probs, costs)?;
            total += report.total_cost;
            evaluated += 1;
        }
        let score = total / evaluated as f64;
        let better = match best {
            None => true,
            Some((b, bk)) => score < b - 1e-9 || (score <= b + 1e-9 && k < bk),
        };
        if better {
            best = Some((score, k));
        }
    }
    best.map(|(_, k)| k)
        .ok_or_else(|| Error::BadParameter("no valid K in range".into()))
}

/// Full heuristic pipeline on a generated instance: choose K by
/// cross-validation, then cluster and optimize on the full training
/// moments. Returns the chosen K with the solution.
pub fn solve_heuristic_cv(
    samples: &SampleSet,
    costs: &CostParams,
    spec: &FeatureSpec,
    method: ClusterMethod,
    folds: usize,
    seed: u64,
) -> Result<(usize, Solution)> {
    let l = samples.train.len();
    let k_range: Vec<usize> = (1..=l).collect();
    let k = crossvalidate_k(samples, costs, spec, method, folds, &k_range, seed)?;
    let ms = samples.estimate_mode_set()?;
    let sol = solve_heuristic(&ms, costs, spec, method, k, seed)?;
    Ok((k, sol))
}
