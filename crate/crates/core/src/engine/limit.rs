//! Plateau detection on a geometric ladder of partial means.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    Oscillating,
    Diverged,
    Inconclusive,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Converged => "converged",
            Status::Oscillating => "oscillating",
            Status::Diverged => "diverged",
            Status::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assessment {
    pub status: Status,
    pub estimate: Option<Complex64>,
    pub amplitude: f64,
}

/// Largest pairwise distance.
pub fn spread(values: &[Complex64]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            best = best.max((a - b).norm());
        }
    }
    best
}

/// Least total turning of the increments, in radians, for a window to count
/// as oscillating rather than drifting.
const MIN_TURNING: f64 = 0.5;

/// Total angle through which successive increments turn.
fn turning(values: &[Complex64]) -> f64 {
    values
        .windows(3)
        .map(|w| ((w[2] - w[1]) * (w[1] - w[0]).conj()).arg().abs())
        .sum()
}

/// Decides the status of `values` (ordered along the ladder), or returns
/// `None` if more points are needed.
///
/// `cap` is the magnitude beyond which growth counts as divergence.
pub fn assess(values: &[Complex64], window: usize, tol: f64, cap: f64) -> Option<Assessment> {
    let n = values.len();
    if window < 2 || n < window {
        return None;
    }
    let last = &values[n - window..];
    if spread(last) < tol {
        return Some(Assessment {
            status: Status::Converged,
            estimate: Some(values[n - 1]),
            amplitude: 0.0,
        });
    }
    let growing = last.windows(2).all(|w| w[1].norm() > w[0].norm());
    if growing && values[n - 1].norm() > cap {
        return Some(Assessment {
            status: Status::Diverged,
            estimate: None,
            amplitude: 0.0,
        });
    }
    if n >= 2 * window {
        let prev = &values[n - 2 * window..n - window];
        let (s_prev, s_last) = (spread(prev), spread(last));
        let bounded = values[n - 2 * window..].iter().all(|v| v.norm() <= cap);
        let ratio = s_last / s_prev;
        let turning = turning(prev) >= MIN_TURNING && turning(last) >= MIN_TURNING;
        if s_prev > tol && s_last > tol && (0.5..=2.0).contains(&ratio) && bounded && turning {
            return Some(Assessment {
                status: Status::Oscillating,
                estimate: None,
                amplitude: 0.5 * spread(&values[n - 2 * window..]),
            });
        }
    }
    None
}

/// Final verdict once the ladder is exhausted.
pub fn conclude(values: &[Complex64], window: usize, tol: f64, cap: f64) -> Assessment {
    assess(values, window, tol, cap).unwrap_or(Assessment {
        status: Status::Inconclusive,
        estimate: None,
        amplitude: 0.0,
    })
}
