//! Core domain types: per-type duration statistics, moment estimation from
//! raw samples, and set partitions of the type index set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability vectors whose entries sum to one within this slack are
/// accepted and renormalized; anything further off is rejected.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Moment description of one patient type: mean and standard deviation of
/// the treatment duration in minutes, normalized semivariance, and the
/// type's nominal probability in the case mix.
///
/// The struct itself is a plain record; realizability of `(mean, std_dev,
/// semivariance)` as a nonnegative random variable is checked by
/// [`check_feasibility`], and operations that need it error out on inputs
/// that fail the check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeStats {
    /// Mean duration in minutes (> 0).
    pub mean: f64,
    /// Population standard deviation in minutes (> 0).
    pub std_dev: f64,
    /// Normalized semivariance: (upper semi-second-moment minus lower
    /// semi-second-moment about the mean) divided by the variance.
    /// Positive for right-skewed durations, negative for left-skewed.
    pub semivariance: f64,
    /// Nominal probability of this type in (0, 1].
    pub nominal_prob: f64,
}

impl ModeStats {
    pub fn new(mean: f64, std_dev: f64, semivariance: f64, nominal_prob: f64) -> Self {
        Self {
            mean,
            std_dev,
            semivariance,
            nominal_prob,
        }
    }

    /// Lower end of the feasible normalized-semivariance interval,
    /// `(sigma^2 - m^2) / (sigma^2 + m^2)`.
    pub fn semivariance_floor(&self) -> f64 {
        let v = self.std_dev * self.std_dev;
        let m2 = self.mean * self.mean;
        (v - m2) / (v + m2)
    }
}

/// One violated realizability condition, with the signed slack by which it
/// fails (negative slack = amount missing).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: &'static str,
    pub slack: f64,
}

/// Outcome of the realizability check on a moment triple.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// Moments are realizable; carries the semivariance floor for reporting.
    Feasible { semivariance_floor: f64 },
    Infeasible(Vec<Violation>),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Checks that `(mean, std_dev, semivariance)` can be attained by some
/// nonnegative random variable: mean and standard deviation positive, and
/// the normalized semivariance inside `[(sigma^2 - m^2)/(sigma^2 + m^2), 1)`.
/// This is necessary and sufficient, so a passing triple always admits a
/// witness distribution.
pub fn check_feasibility(stats: &ModeStats) -> Feasibility {
    let mut violations = Vec::new();
    if !stats.mean.is_finite() || stats.mean <= 0.0 {
        violations.push(Violation {
            constraint: "mean must be positive",
            slack: stats.mean,
        });
    }
    if !stats.std_dev.is_finite() || stats.std_dev <= 0.0 {
        violations.push(Violation {
            constraint: "std_dev must be positive",
            slack: stats.std_dev,
        });
    }
    if violations.is_empty() {
        let floor = stats.semivariance_floor();
        if stats.semivariance.is_nan() || stats.semivariance < floor {
            violations.push(Violation {
                constraint: "semivariance below (sigma^2-m^2)/(sigma^2+m^2)",
                slack: stats.semivariance - floor,
            });
        }
        if stats.semivariance.is_nan() || stats.semivariance >= 1.0 {
            violations.push(Violation {
                constraint: "semivariance must be < 1",
                slack: 1.0 - stats.semivariance,
            });
        }
        if violations.is_empty() {
            return Feasibility::Feasible {
                semivariance_floor: floor,
            };
        }
    }
    Feasibility::Infeasible(violations)
}

/// Requires feasibility, turning a violation report into an error.
pub fn require_feasible(stats: &ModeStats) -> Result<()> {
    match check_feasibility(stats) {
        Feasibility::Feasible { .. } => Ok(()),
        Feasibility::Infeasible(violations) => {
            let report = violations
                .iter()
                .map(|v| format!("{} (slack {:.6})", v.constraint, v.slack))
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InfeasibleStats { report })
        }
    }
}

/// Estimates `ModeStats` from raw duration samples: sample mean, population
/// (divisor n) standard deviation, and normalized semivariance
/// `(sum((x-m)^+)^2 - sum((m-x)^+)^2) / (n sigma^2)`.
pub fn estimate_moments(samples: &[f64], nominal_prob: f64) -> Result<ModeStats> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    for (index, &value) in samples.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::NegativeSample { index, value });
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mut upper = 0.0;
    let mut lower = 0.0;
    for &x in samples {
        let d = x - mean;
        if d > 0.0 {
            upper += d * d;
        } else {
            lower += d * d;
        }
    }
    let variance = (upper + lower) / n;
    if variance <= 0.0 {
        return Err(Error::DegenerateSample { n: samples.len() });
    }
    let semivariance = (upper - lower) / (n * variance);
    Ok(ModeStats {
        mean,
        std_dev: variance.sqrt(),
        semivariance,
        nominal_prob,
    })
}

/// The ordered collection of patient types. Nominal probabilities must sum
/// to one within [`PROB_SUM_TOL`]; accepted inputs are renormalized exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<ModeStats>,
}

impl ModeSet {
    pub fn new(mut modes: Vec<ModeStats>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::BadParameter("mode set must be nonempty".into()));
        }
        let sum: f64 = modes.iter().map(|m| m.nominal_prob).sum();
        if !sum.is_finite() || (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::BadProbabilities(format!(
                "nominal probabilities sum to {sum}, expected 1 within {PROB_SUM_TOL:e}"
            )));
        }
        for m in &modes {
            if m.nominal_prob.is_nan() || m.nominal_prob <= 0.0 {
                return Err(Error::BadProbabilities(format!(
                    "nominal probability {} not in (0, 1]",
                    m.nominal_prob
                )));
            }
        }
        for m in &mut modes {
            m.nominal_prob /= sum;
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> &[ModeStats] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn get(&self, index: usize) -> &ModeStats {
        &self.modes[index]
    }

    pub fn nominal_probs(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.nominal_prob).collect()
    }
}

/// Cost structure and the decision bounds of a template design run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Unit overtime cost per minute (q >= 0).
    pub overtime_rate: f64,
    /// Unit idle-time cost per minute (b >= 0).
    pub idle_rate: f64,
    /// Activation cost per opened group, uniform across groups.
    pub activation_cost: f64,
    /// Upper bound of the slot-duration range, in minutes.
    pub horizon: f64,
    /// Radius of the total-variation ball around the nominal conditional
    /// mode probabilities. Values up to the TV diameter 2 are accepted;
    /// radii below 1 are the meaningful regime.
    pub tv_radius: f64,
}

impl CostParams {
    pub fn new(
        overtime_rate: f64,
        idle_rate: f64,
        activation_cost: f64,
        horizon: f64,
        tv_radius: f64,
    ) -> Result<Self> {
        let p = Self {
            overtime_rate,
            idle_rate,
            activation_cost,
            horizon,
            tv_radius,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.overtime_rate,
            self.idle_rate,
            self.activation_cost,
            self.horizon,
            self.tv_radius,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParameter("cost parameters must be finite".into()));
        }
        if self.overtime_rate < 0.0 || self.idle_rate < 0.0 {
            return Err(Error::BadParameter("unit costs must be nonnegative".into()));
        }
        if self.overtime_rate + self.idle_rate <= 0.0 {
            return Err(Error::BadParameter(
                "at least one of overtime and idle rates must be positive".into(),
            ));
        }
        if self.activation_cost < 0.0 {
            return Err(Error::BadParameter(
                "activation cost must be nonnegative".into(),
            ));
        }
        if self.horizon <= 0.0 {
            return Err(Error::BadParameter("horizon must be positive".into()));
        }
        if !(0.0..=2.0).contains(&self.tv_radius) {
            return Err(Error::BadParameter(format!(
                "tv_radius {} outside [0, 2]",
                self.tv_radius
            )));
        }
        Ok(())
    }
}

/// Rescales the nominal probabilities of the group members so they sum to
/// one. Invariant under common positive rescaling of all probabilities.
pub fn conditional_probs(group: &[usize], mode_set: &ModeSet) -> Vec<f64> {
    let total: f64 = group.iter().map(|&l| mode_set.get(l).nominal_prob).sum();
    group
        .iter()
        .map(|&l| mode_set.get(l).nominal_prob / total)
        .collect()
}

/// A set partition of the mode indices `0..n`, stored canonically: members
/// sorted within each group, groups ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
    n_modes: usize,
}

impl Partition {
    pub fn new(mut groups: Vec<Vec<usize>>, n_modes: usize) -> Result<Self> {
        if groups.iter().any(|g| g.is_empty()) {
            return Err(Error::BadPartition("empty group".into()));
        }
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.sort_by_key(|g| g[0]);
        let mut seen = vec![false; n_modes];
        for g in &groups {
            for &l in g {
                if l >= n_modes {
                    return Err(Error::BadPartition(format!(
                        "index {l} out of range 0..{n_modes}"
                    )));
                }
                if seen[l] {
                    return Err(Error::BadPartition(format!("index {l} appears twice")));
                }
                seen[l] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::BadPartition("partition does not cover all modes".into()));
        }
        Ok(Self { groups, n_modes })
    }

    /// Builds the partition encoded by a restricted growth string: `rgs[i]`
    /// is the group label of element `i`, with labels first appearing in
    /// increasing order.
    pub fn from_rgs(rgs: &[usize]) -> Self {
        let n_groups = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); n_groups];
        for (i, &g) in rgs.iter().enumerate() {
            groups[g].push(i);
        }
        Self {
            groups,
            n_modes: rgs.len(),
        }
    }

    /// Canonical restricted-growth-string encoding.
    pub fn rgs(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.n_modes];
        for (label, g) in self.groups.iter().enumerate() {
            for &l in g {
                out[l] = label;
            }
        }
        out
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }
}
