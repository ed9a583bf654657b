//! Limit verdicts and the classifier shared by the Abel and Cesàro methods.

use serde::Serialize;

use crate::profile::ToleranceProfile;

/// Number of trailing points that must agree for a `Converged` verdict.
pub const WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Converged { limit: f64, err: f64 },
    Diverged { sign: i8 },
    Oscillating { lo: f64, hi: f64 },
    Inconclusive,
}

impl Status {
    pub fn limit(&self) -> Option<f64> {
        match self {
            Status::Converged { limit, .. } => Some(*limit),
            _ => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Status::Converged { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Status::Converged { .. } => "converged",
            Status::Diverged { .. } => "diverged",
            Status::Oscillating { .. } => "oscillating",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub status: Status,
    pub diagnostics: Vec<String>,
}

impl Verdict {
    pub fn new(status: Status) -> Self {
        Self {
            status,
            diagnostics: Vec::new(),
        }
    }

    pub fn inconclusive(reason: impl Into<String>) -> Self {
        Self {
            status: Status::Inconclusive,
            diagnostics: vec![reason.into()],
        }
    }

    pub fn note(mut self, message: impl Into<String>) -> Self {
        self.diagnostics.push(message.into());
        self
    }
}

/// One usable point of a pre-limit curve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    pub mean: f64,
    pub tail_bound: f64,
    pub heuristic: bool,
}

/// Classify a curve of means approaching its limit point, in the order
/// Converged, Diverged, Oscillating, Inconclusive.
pub(crate) fn classify(samples: &[Sample], profile: &ToleranceProfile) -> Verdict {
    let n = samples.len();
    if n < WINDOW {
        return Verdict::inconclusive(format!("only {n} usable points; need at least {WINDOW}"));
    }
    let last = &samples[n - WINDOW..];
    let means: Vec<f64> = last.iter().map(|s| s.mean).collect();

    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    if spread < profile.eps_conv {
        let tail = last.iter().map(|s| s.tail_bound).fold(0.0, f64::max);
        let limit = means[WINDOW - 1];
        let heuristic = samples.iter().filter(|s| s.heuristic).count();
        if heuristic > 0 && !profile.trust_heuristic {
            return Verdict::inconclusive(format!(
                "last {WINDOW} means agree within {spread:e} near {limit}, but {heuristic} points \
                 have heuristic tails"
            ));
        }
        let mut v = Verdict::new(Status::Converged {
            limit,
            err: spread + tail,
        });
        if heuristic > 0 {
            v = v.note(format!("{heuristic} heuristic tails trusted"));
        }
        return v;
    }

    let sign = means[0].signum();
    let ramp = means.iter().all(|m| *m != 0.0 && m.signum() == sign)
        && means.windows(2).all(|w| w[1].abs() >= 2.0 * w[0].abs());
    if ramp {
        return Verdict::new(Status::Diverged { sign: sign as i8 }).note(format!(
            "|mean| at least doubles across the last {WINDOW} points"
        ));
    }

    let tail = &samples[n / 2..];
    let lo = tail.iter().map(|s| s.mean).fold(f64::INFINITY, f64::min);
    let hi = tail
        .iter()
        .map(|s| s.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > 4.0 * profile.eps_conv {
        let mid = 0.5 * (lo + hi);
        let mut crossings = 0;
        let mut prev: Option<bool> = None;
        for s in tail {
            if s.mean == mid {
                continue;
            }
            let above = s.mean > mid;
            if prev.is_some_and(|p| p != above) {
                crossings += 1;
            }
            prev = Some(above);
        }
        if crossings >= 2 {
            return Verdict::new(Status::Oscillating { lo, hi }).note(format!(
                "{crossings} crossings of the band midpoint in the second half of the curve"
            ));
        }
    }

    Verdict::inconclusive(format!(
        "last {WINDOW} means spread {spread:e} >= eps_conv = {:e}, no divergence ramp or \
         oscillation detected",
        profile.eps_conv
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(means: &[f64]) -> Vec<Sample> {
        means
            .iter()
            .map(|&mean| Sample {
                mean,
                tail_bound: 1e-9,
                heuristic: false,
            })
            .collect()
    }

    #[test]
    fn stable_tail_converges() {
        let p = ToleranceProfile::default();
        let v = classify(&samples(&[0.5, 0.1, 1e-5, 2e-5, 1e-5, 3e-5]), &p);
        match v.status {
            Status::Converged { limit, err } => {
                assert_eq!(limit, 3e-5);
                assert!((2e-5..1e-4).contains(&err));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn doubling_ramp_diverges() {
        let p = ToleranceProfile::default();
        let v = classify(&samples(&[1.0, 3.0, 7.0, 15.0, 31.0]), &p);
        assert_eq!(v.status, Status::Diverged { sign: 1 });
        let v = classify(&samples(&[-1.0, -3.0, -7.0, -15.0]), &p);
        assert_eq!(v.status, Status::Diverged { sign: -1 });
    }

    #[test]
    fn revisited_band_oscillates() {
        let p = ToleranceProfile::default();
        let v = classify(&samples(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]), &p);
        assert_eq!(v.status, Status::Oscillating { lo: 0.0, hi: 1.0 });
    }

    #[test]
    fn short_or_drifting_curves_are_inconclusive() {
        let p = ToleranceProfile::default();
        assert_eq!(
            classify(&samples(&[1.0, 1.0, 1.0]), &p).status,
            Status::Inconclusive
        );
        assert_eq!(
            classify(&samples(&[1.0, 0.5, 0.25, 0.125, 0.0625]), &p).status,
            Status::Inconclusive
        );
    }

    #[test]
    fn heuristic_tails_block_convergence_unless_trusted() {
        let mut s = samples(&[1.0, 1.0, 1.0, 1.0]);
        s[0].heuristic = true;
        let mut p = ToleranceProfile::default();
        assert_eq!(classify(&s, &p).status, Status::Inconclusive);
        p.trust_heuristic = true;
        assert!(classify(&s, &p).status.is_converged());
    }
}
