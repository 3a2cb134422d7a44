//! Rates, advantages and their confidence intervals.

use serde::{Deserialize, Serialize};

pub const Z95: f64 = 1.959963984540054;

/// A success count with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Proportion {
    pub fn new(successes: usize, trials: usize) -> Self {
        if trials == 0 {
            return Proportion {
                successes,
                trials,
                rate: 0.0,
                ci_lo: 0.0,
                ci_hi: 1.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Proportion {
            successes,
            trials,
            rate: p,
            ci_lo: if successes == 0 {
                0.0
            } else {
                (centre - half).max(0.0)
            },
            ci_hi: if successes == trials {
                1.0
            } else {
                (centre + half).min(1.0)
            },
        }
    }
}

/// `|Pr[b′=1 | b=0] − Pr[b′=1 | b=1]|` with a normal-approximation 95%
/// interval whose half-width is floored at `10/trials`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Advantage {
    pub trials: usize,
    pub n0: usize,
    pub ones_given_0: usize,
    pub n1: usize,
    pub ones_given_1: usize,
    pub advantage: f64,
    pub half_width: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `Pr[b′ = b]`.
    pub win_rate: f64,
}

impl Advantage {
    pub fn from_counts(n0: usize, ones_given_0: usize, n1: usize, ones_given_1: usize) -> Self {
        let trials = n0 + n1;
        let rate = |k: usize, n: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        let p0 = rate(ones_given_0, n0);
        let p1 = rate(ones_given_1, n1);
        let var = |p: f64, n: usize| {
            if n == 0 {
                0.25
            } else {
                p * (1.0 - p) / n as f64
            }
        };
        let se = (var(p0, n0) + var(p1, n1)).sqrt();
        let floor = if trials == 0 {
            1.0
        } else {
            10.0 / trials as f64
        };
        let half_width = (Z95 * se).max(floor);
        let advantage = (p0 - p1).abs();
        let wins = (n0 - ones_given_0) + ones_given_1;
        Advantage {
            trials,
            n0,
            ones_given_0,
            n1,
            ones_given_1,
            advantage,
            half_width,
            ci_lo: (advantage - half_width).max(0.0),
            ci_hi: (advantage + half_width).min(1.0),
            win_rate: rate(wins, trials),
        }
    }

    /// Whether `value` lies inside the interval.
    pub fn covers(&self, value: f64) -> bool {
        self.ci_lo <= value && value <= self.ci_hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn advantage_counts() {
        let a = Advantage::from_counts(100, 0, 100, 100);
        assert_eq!(a.advantage, 1.0);
        assert_eq!(a.win_rate, 1.0);
        let a = Advantage::from_counts(5000, 2500, 5000, 2500);
        assert_eq!(a.advantage, 0.0);
        assert!(a.half_width >= 10.0 / 10_000.0);
        assert!(a.covers(0.0));
    }

    #[test]
    fn wilson_interval_brackets_rate() {
        let p = Proportion::new(90, 100);
        assert!(p.ci_lo < 0.9 && 0.9 < p.ci_hi);
        let p = Proportion::new(0, 50);
        assert_eq!(p.ci_lo, 0.0);
        assert!(p.ci_hi > 0.0);
    }
}
