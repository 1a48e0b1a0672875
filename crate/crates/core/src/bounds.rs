//! Closed-form lower and upper bounds on a group's optimal worst-case cost,
//! and the conditions under which the optimum is forced to an endpoint of
//! the duration range.

use crate::ambiguity::{worst_case_probs, TvBall};
use crate::domain::{conditional_probs, require_feasible, CostParams, ModeSet};
use crate::error::Result;

/// Bound values together with the group summary statistics they derive
/// from: the extreme member means, the largest member standard deviation,
/// and the worst-case probability mass on the extreme-mean members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupBounds {
    pub lower: f64,
    pub upper: f64,
    pub m_min: f64,
    pub m_max: f64,
    pub sigma_max: f64,
    pub p_bar_min: f64,
    pub p_bar_max: f64,
}

/// Computes both bounds for a group.
///
/// Lower: `b p_min q p_max / (b p_min + q p_max) * (m_max - m_min)`, where
/// `p_min`/`p_max` are the largest TV-ball probability masses on the
/// members attaining the minimum/maximum mean (each maximized separately,
/// reusing the greedy reweighting with indicator values). Zero when the
/// denominator vanishes or all means coincide.
///
/// Upper: `max(b, q) * (sigma_max + (m_max - m_min) / 2)`.
pub fn group_bounds(group: &[usize], mode_set: &ModeSet, costs: &CostParams) -> GroupBounds {
    let q = costs.overtime_rate;
    let b = costs.idle_rate;
    let means: Vec<f64> = group.iter().map(|&l| mode_set.get(l).mean).collect();
    let m_min = means.iter().copied().fold(f64::INFINITY, f64::min);
    let m_max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sigma_max = group
        .iter()
        .map(|&l| mode_set.get(l).std_dev)
        .fold(f64::NEG_INFINITY, f64::max);

    let center = conditional_probs(group, mode_set);
    let ball = TvBall::new(center, costs.tv_radius).expect("conditional probs form a center");
    let mass_on = |predicate: &dyn Fn(usize) -> bool| -> f64 {
        let indicator: Vec<f64> = (0..group.len())
            .map(|i| if predicate(i) { 1.0 } else { 0.0 })
            .collect();
        let p = worst_case_probs(&ball, &indicator);
        p.iter()
            .zip(&indicator)
            .map(|(&pi, &ind)| pi * ind)
            .sum()
    };
    let p_bar_min = mass_on(&|i| means[i] == m_min);
    let p_bar_max = mass_on(&|i| means[i] == m_max);

    let span = m_max - m_min;
    let denom = b * p_bar_min + q * p_bar_max;
    let lower = if denom <= 0.0 || span <= 0.0 {
        0.0
    } else {
        b * p_bar_min * q * p_bar_max / denom * span
    };
    let upper = q.max(b) * (sigma_max + span / 2.0);
    GroupBounds {
        lower,
        upper,
        m_min,
        m_max,
        sigma_max,
        p_bar_min,
        p_bar_max,
    }
}

pub fn lower_bound(group: &[usize], mode_set: &ModeSet, costs: &CostParams) -> f64 {
    group_bounds(group, mode_set, costs).lower
}

pub fn upper_bound(group: &[usize], mode_set: &ModeSet, costs: &CostParams) -> f64 {
    group_bounds(group, mode_set, costs).upper
}

/// Outcome of the endpoint-forcing test.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryForce {
    /// Neither condition fired; when the horizon test could not be
    /// evaluated the diagnostic says why.
    Interior { diagnostic: Option<String> },
    /// The mixture cost is nondecreasing from zero: the optimum is t = 0.
    ForceZero,
    /// The mixture cost is nonincreasing up to the horizon: the optimum is
    /// t = horizon.
    ForceHorizon,
}

/// Evaluates the two closed-form endpoint conditions using the nominal
/// conditional weights.
///
/// Forced zero: `sum p_l (1 - s_l) (sigma_l / m_l)^2 >= 2q / (b + q)`
/// (the common first piece already slopes upward).
///
/// Forced horizon: `sum p_l H_l(T) >= 2b / (b + q)` where `H_l` is the
/// tail-piece slope factor; defined only when the horizon lies in every
/// member's tail piece. A vanishing idle rate forces the horizon without
/// that requirement since every piece is then nonincreasing.
pub fn boundary_conditions(
    group: &[usize],
    mode_set: &ModeSet,
    costs: &CostParams,
) -> Result<BoundaryForce> {
    for &l in group {
        require_feasible(mode_set.get(l))?;
    }
    let q = costs.overtime_rate;
    let b = costs.idle_rate;
    let weights = conditional_probs(group, mode_set);

    let lhs_zero: f64 = group
        .iter()
        .zip(&weights)
        .map(|(&l, &p)| {
            let m = mode_set.get(l);
            let ratio = m.std_dev / m.mean;
            p * (1.0 - m.semivariance) * ratio * ratio
        })
        .sum();
    if lhs_zero >= 2.0 * q / (b + q) {
        return Ok(BoundaryForce::ForceZero);
    }

    if b == 0.0 {
        return Ok(BoundaryForce::ForceHorizon);
    }

    // H_l is the slope factor of the tail piece; it needs the horizon to
    // sit inside every member's tail piece.
    let horizon = costs.horizon;
    for &l in group {
        let m = mode_set.get(l);
        let s = m.semivariance;
        let tail_start = m.mean + m.mean * (1.0 + s) / (2.0 * (1.0 - s));
        if horizon < tail_start {
            return Ok(BoundaryForce::Interior {
                diagnostic: Some(format!(
                    "horizon {horizon} is below the tail piece of a member starting at {tail_start:.3}; \
                     the forced-horizon condition is undefined"
                )),
            });
        }
    }
    let mut lhs_horizon = 0.0;
    for (&l, &p) in group.iter().zip(&weights) {
        let m = mode_set.get(l);
        let var = m.std_dev * m.std_dev;
        let w1 = (1.0 + m.semivariance) * var / 2.0;
        let w2 = (1.0 - m.semivariance) * var / 2.0;
        let beta = 1.0 - w2 / (m.mean * m.mean);
        let delta = horizon - m.mean;
        let s_val = beta * (beta + w1 / (delta * delta) - 2.0 * w2 / (m.mean * delta));
        let root = s_val.max(0.0).sqrt();
        let h = beta - root + beta / root * (w1 / (delta * delta) - w2 / (m.mean * delta));
        lhs_horizon += p * h;
    }
    if lhs_horizon >= 2.0 * b / (b + q) {
        return Ok(BoundaryForce::ForceHorizon);
    }
    Ok(BoundaryForce::Interior { diagnostic: None })
}
