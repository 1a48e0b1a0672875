//! Closed-form worst-case expected idle/overtime cost of a single patient
//! type against its moment ambiguity set, as a five-piece convex function of
//! the slot duration, together with one-sided derivatives and extremal
//! witness distributions attaining the worst case.

use crate::domain::{require_feasible, CostParams, ModeStats};
use crate::error::{Error, Result};

/// Five-piece convex representation of the worst-case expected cost
/// `t -> max over the moment set of E[q(xi - t)^+ + b(t - xi)^+]`.
///
/// Derived quantities, with `m` the mean, `s` the normalized semivariance
/// and `sigma^2` the variance:
/// `w1 = (1+s) sigma^2 / 2` (upper semi-second-moment),
/// `w2 = (1-s) sigma^2 / 2` (lower semi-second-moment),
/// `beta = 1 - w2 / m^2`.
///
/// Breakpoints before clamping:
/// `tau1 = m/2`,
/// `tau2 = m - (sigma/2) sqrt((1-s)/(1+s))`,
/// `tau3 = m + (sigma/2) sqrt((1+s)/(1-s))`,
/// `tau4 = m + m (1+s) / (2 (1-s))`.
/// Feasible moments order them `tau1 <= tau2 <= m <= tau3 <= tau4`; the
/// stored breakpoints are clamped to `[0, horizon]`, which only affects
/// which pieces are reachable, never the formulas.
#[derive(Debug, Clone)]
pub struct PiecewiseWorstCase {
    stats: ModeStats,
    q: f64,
    b: f64,
    horizon: f64,
    w1: f64,
    w2: f64,
    beta: f64,
    raw_breaks: [f64; 4],
    breaks: [f64; 4],
}

/// Builds the five-piece representation for one mode. Errors if the moment
/// triple is not realizable.
pub fn build(stats: &ModeStats, costs: &CostParams) -> Result<PiecewiseWorstCase> {
    require_feasible(stats)?;
    costs.validate()?;
    let m = stats.mean;
    let s = stats.semivariance;
    let var = stats.std_dev * stats.std_dev;
    let w1 = (1.0 + s) * var / 2.0;
    let w2 = (1.0 - s) * var / 2.0;
    let beta = 1.0 - w2 / (m * m);
    let half_sigma = stats.std_dev / 2.0;
    let raw_breaks = [
        m / 2.0,
        m - half_sigma * ((1.0 - s) / (1.0 + s)).sqrt(),
        m + half_sigma * ((1.0 + s) / (1.0 - s)).sqrt(),
        m + m * (1.0 + s) / (2.0 * (1.0 - s)),
    ];
    let breaks = raw_breaks.map(|t| t.clamp(0.0, costs.horizon));
    Ok(PiecewiseWorstCase {
        stats: *stats,
        q: costs.overtime_rate,
        b: costs.idle_rate,
        horizon: costs.horizon,
        w1,
        w2,
        beta,
        raw_breaks,
        breaks,
    })
}

impl PiecewiseWorstCase {
    pub fn stats(&self) -> &ModeStats {
        &self.stats
    }

    /// Breakpoints clamped to `[0, horizon]`; piece `i` spans
    /// `[breaks[i-1], breaks[i]]` with piece 1 starting at 0 and piece 5
    /// ending at the horizon. A breakpoint pair that collapsed under
    /// clamping marks an unreachable (zero-length) piece.
    pub fn breakpoints(&self) -> [f64; 4] {
        self.breaks
    }

    pub fn raw_breakpoints(&self) -> [f64; 4] {
        self.raw_breaks
    }

    pub fn upper_semimoment(&self) -> f64 {
        self.w1
    }

    pub fn lower_semimoment(&self) -> f64 {
        self.w2
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 || t > self.horizon {
            return Err(Error::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// Piece active immediately to the right of `t` (1..=5). At a shared or
    /// collapsed breakpoint this skips zero-length pieces, which also routes
    /// evaluation away from the removable singularities of pieces 2 and 4.
    fn piece_right(&self, t: f64) -> usize {
        for (i, &tau) in self.raw_breaks.iter().enumerate() {
            if t < tau {
                return i + 1;
            }
        }
        5
    }

    /// Piece active immediately to the left of `t` (1..=5).
    fn piece_left(&self, t: f64) -> usize {
        for (i, &tau) in self.raw_breaks.iter().enumerate() {
            if t <= tau {
                return i + 1;
            }
        }
        5
    }

    fn piece_value(&self, piece: usize, t: f64) -> f64 {
        let m = self.stats.mean;
        let (q, b) = (self.q, self.b);
        let (w1, w2) = (self.w1, self.w2);
        match piece {
            1 => ((b + q) * w2 / (m * m) - q) * t + q * m,
            2 => (b + q) * w2 / (4.0 * (m - t)) + q * (m - t),
            3 => {
                (b + q) * (w1 * w2 / (w1 + w2)).sqrt()
                    + (m - t) * (q * w2 - b * w1) / (w1 + w2)
            }
            4 => (b + q) * w1 / (4.0 * (t - m)) + b * (t - m),
            5 => {
                let delta = t - m;
                // beta * R is computed as sqrt(beta (beta delta^2 + w1 - 2 delta w2 / m));
                // the radicand is positive for all delta under feasibility.
                let g = self.beta * (self.beta * delta * delta + w1 - 2.0 * delta * w2 / m);
                b * t + q * m - (b + q) / 2.0 * (m + self.beta * t - g.sqrt())
            }
            _ => unreachable!("piece index out of range"),
        }
    }

    fn piece_slope(&self, piece: usize, t: f64) -> f64 {
        let m = self.stats.mean;
        let (q, b) = (self.q, self.b);
        let (w1, w2) = (self.w1, self.w2);
        match piece {
            1 => (b + q) * w2 / (m * m) - q,
            2 => (b + q) * w2 / (4.0 * (m - t) * (m - t)) - q,
            3 => (b * w1 - q * w2) / (w1 + w2),
            4 => b - (b + q) * w1 / (4.0 * (t - m) * (t - m)),
            5 => {
                let delta = t - m;
                let g = self.beta * (self.beta * delta * delta + w1 - 2.0 * delta * w2 / m);
                b - (b + q) / 2.0
                    * (self.beta - self.beta * (self.beta * delta - w2 / m) / g.sqrt())
            }
            _ => unreachable!("piece index out of range"),
        }
    }

    /// Worst-case expected cost at slot duration `t`.
    pub fn cost(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        Ok(self.piece_value(self.piece_right(t), t))
    }

    /// One-sided derivatives `(left, right)` of the worst-case cost at `t`.
    /// Convexity makes `left <= right`, with equality away from breakpoints.
    pub fn slopes(&self, t: f64) -> Result<(f64, f64)> {
        self.check_range(t)?;
        let left = self.piece_slope(self.piece_left(t), t);
        let right = self.piece_slope(self.piece_right(t), t);
        Ok((left, right))
    }

    pub(crate) fn slope_right(&self, t: f64) -> f64 {
        self.piece_slope(self.piece_right(t), t)
    }

    pub(crate) fn slope_left(&self, t: f64) -> f64 {
        self.piece_slope(self.piece_left(t), t)
    }

    /// Extremal distribution attaining the worst-case cost at `t`. The
    /// two- and three-point families mirror the primal constructions of the
    /// optimality proof; families with a free parameter fix it at the
    /// midpoint of its admissible interval.
    pub fn witness(&self, t: f64) -> Result<DiscreteDistribution> {
        self.check_range(t)?;
        match self.piece_right(t) {
            1 => self.witness_low_linear(t),
            2 => self.witness_low_hyperbolic(t),
            3 => self.witness_two_point(t),
            4 => self.witness_high_hyperbolic(t),
            _ => self.witness_tail(t),
        }
    }

    /// Piece 1: atom at zero plus two atoms above the mean.
    fn witness_low_linear(&self, t: f64) -> Result<DiscreteDistribution> {
        let m = self.stats.mean;
        let (w1, w2) = (self.w1, self.w2);
        let msq = m * m;
        let k = msq - w2;
        let d = (w1 * k - w2 * w2).max(0.0);
        let pi_min = d / (d + w2 * w2);
        let pi = 0.5 * (pi_min + 1.0);
        let sd = d.sqrt();
        let p0 = w2 / msq;
        let x2 = m / k * (msq - sd * ((1.0 - pi) / pi).sqrt());
        let x3 = m / k * (msq + sd * (pi / (1.0 - pi)).sqrt());
        self.finish_witness(t, vec![(0.0, p0), (x2, pi * (1.0 - p0)), (x3, (1.0 - pi) * (1.0 - p0))])
    }

    /// Piece 2: atom at `2t - m` below the mean plus two atoms above it.
    fn witness_low_hyperbolic(&self, t: f64) -> Result<DiscreteDistribution> {
        let m = self.stats.mean;
        let (w1, w2) = (self.w1, self.w2);
        let c = 2.0 * (m - t);
        let csq = c * c;
        let k = csq - w2;
        let d = (w1 * csq - w2 * (w1 + w2)).max(0.0);
        let pi_min = d / (d + w2 * w2);
        let pi = 0.5 * (pi_min + 1.0);
        let sd = d.sqrt();
        let p0 = w2 / csq;
        let x1 = 2.0 * t - m;
        let x2 = m + c / k * (w2 - sd * ((1.0 - pi) / pi).sqrt());
        let x3 = m + c / k * (w2 + sd * (pi / (1.0 - pi)).sqrt());
        self.finish_witness(t, vec![(x1, p0), (x2, pi * (1.0 - p0)), (x3, (1.0 - pi) * (1.0 - p0))])
    }

    /// Piece 3: the two-point distribution `m + sqrt(w1 sigma^2 / w2)` and
    /// `m - sqrt(w2 sigma^2 / w1)` with probabilities `w2/sigma^2`,
    /// `w1/sigma^2`, independent of `t`.
    fn witness_two_point(&self, t: f64) -> Result<DiscreteDistribution> {
        let m = self.stats.mean;
        let (w1, w2) = (self.w1, self.w2);
        let var = w1 + w2;
        let hi = m + (w1 * var / w2).sqrt();
        let lo = m - (w2 * var / w1).sqrt();
        self.finish_witness(t, vec![(lo, w1 / var), (hi, w2 / var)])
    }

    /// Piece 4: atom at `2t - m` above the mean plus two atoms below it.
    /// The free parameter is capped so the lowest atom stays nonnegative.
    fn witness_high_hyperbolic(&self, t: f64) -> Result<DiscreteDistribution> {
        let m = self.stats.mean;
        let (w1, w2) = (self.w1, self.w2);
        let c = 2.0 * (t - m);
        let csq = c * c;
        let k = csq - w1;
        let d = (w2 * csq - w1 * (w1 + w2)).max(0.0);
        let pi_min = d / (d + w1 * w1);
        // Nonnegative support requires sd sqrt(pi/(1-pi)) <= m k / c - w1.
        let cap = m * k / c - w1;
        if cap < 0.0 {
            return Err(Error::UndefinedWitness {
                t,
                reason: "support of the three-point family would be negative".into(),
            });
        }
        let pi_max = if d <= 0.0 {
            1.0
        } else {
            cap * cap / (d + cap * cap)
        };
        if pi_max + 1e-12 < pi_min {
            return Err(Error::UndefinedWitness {
                t,
                reason: "no admissible parameter keeps the support nonnegative".into(),
            });
        }
        let pi = 0.5 * (pi_min + pi_max.min(1.0));
        let sd = d.sqrt();
        let p0 = w1 / csq;
        let x1 = 2.0 * t - m;
        let x2 = m - c / k * (w1 - sd * ((1.0 - pi) / pi).sqrt());
        let x3 = m - c / k * (w1 + sd * (pi / (1.0 - pi)).sqrt());
        self.finish_witness(t, vec![(x1, p0), (x2, pi * (1.0 - p0)), (x3, (1.0 - pi) * (1.0 - p0))])
    }

    /// Piece 5: atom at zero plus two atoms at `t -+ R` straddling the slot
    /// end. Probabilities follow from the moment equations; the family has
    /// no free parameter.
    fn witness_tail(&self, t: f64) -> Result<DiscreteDistribution> {
        let m = self.stats.mean;
        let (w1, w2) = (self.w1, self.w2);
        let beta = self.beta;
        let delta = t - m;
        let g = (beta * (beta * delta * delta + w1 - 2.0 * delta * w2 / m)).max(0.0);
        let r = g.sqrt() / beta;
        let p0 = w2 / (m * m);
        let u = (beta * delta - w2 / m) / r;
        let p2 = 0.5 * (beta + u);
        let p3 = 0.5 * (beta - u);
        if p2 < -1e-10 || p3 < -1e-10 {
            return Err(Error::UndefinedWitness {
                t,
                reason: "tail family probabilities degenerate".into(),
            });
        }
        self.finish_witness(
            t,
            vec![(0.0, p0), (t - r, p2.max(0.0)), (t + r, p3.max(0.0))],
        )
    }

    fn finish_witness(&self, t: f64, atoms: Vec<(f64, f64)>) -> Result<DiscreteDistribution> {
        for &(x, _) in &atoms {
            if x < -1e-9 || !x.is_finite() {
                return Err(Error::UndefinedWitness {
                    t,
                    reason: format!("atom at {x} outside the nonnegative support"),
                });
            }
        }
        DiscreteDistribution::new(
            atoms
                .into_iter()
                .map(|(x, p)| (x.max(0.0), p))
                .collect(),
        )
    }
}

/// A finite distribution given by `(support, probability)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for &(x, p) in &atoms {
            if !x.is_finite() || !p.is_finite() || p < -1e-12 {
                return Err(Error::BadProbabilities(format!(
                    "atom ({x}, {p}) is not a valid mass point"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadProbabilities(format!(
                "atom probabilities sum to {total}"
            )));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(x, p)| x * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms.iter().map(|&(x, p)| p * (x - m) * (x - m)).sum()
    }

    /// Upper and lower semi-second-moments about `center`.
    pub fn semimoments_about(&self, center: f64) -> (f64, f64) {
        let mut upper = 0.0;
        let mut lower = 0.0;
        for &(x, p) in &self.atoms {
            let d = x - center;
            if d > 0.0 {
                upper += p * d * d;
            } else {
                lower += p * d * d;
            }
        }
        (upper, lower)
    }

    /// Expected idle/overtime cost for a slot of length `t`.
    pub fn expected_cost(&self, overtime_rate: f64, idle_rate: f64, t: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&(x, p)| {
                p * (overtime_rate * (x - t).max(0.0) + idle_rate * (t - x).max(0.0))
            })
            .sum()
    }
}

/// Random feasible-instance generators shared by tests across modules.
#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    /// Draws a feasible moment triple away from the degenerate boundaries.
    pub(crate) fn random_feasible_stats(rng: &mut ChaCha8Rng) -> ModeStats {
        let mean = rng.gen_range(30.0..400.0);
        let std_dev = rng.gen_range(0.15 * mean..0.7 * mean);
        let stats0 = ModeStats::new(mean, std_dev, 0.0, 1.0);
        let floor = stats0.semivariance_floor();
        let lo = floor + 0.05 * (1.0 - floor);
        let hi = (floor + 0.90 * (1.0 - floor)).min(0.85);
        let semivariance = rng.gen_range(lo..hi.max(lo + 1e-6));
        ModeStats::new(mean, std_dev, semivariance, 1.0)
    }
}
