//! Executable experiments built on the summability methods.
//!
//! * [`probe_abel_continuity`] looks for an Abel-convergent input whose image
//!   under `f` fails to be Abel convergent to `f(limit)`. The battery is fixed
//!   and versioned, so a clean report means "no counterexample on battery v1",
//!   never "Abel continuous".
//! * [`probe_ordinary_continuity`] checks `f(p_k) -> f(point)` along
//!   two-sided convergent sequences.
//! * [`pm1_with_abel_limit`] builds a `±1` sequence with a prescribed Abel
//!   limit.
//! * [`boundedness_probe`] extracts a spike subsequence `|p_{n_j}| > 2^j`.

use serde::Serialize;

use crate::abel;
use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::profile::ToleranceProfile;
use crate::sequence::{Family, Sequence, SequenceSpec};
use crate::verdict::{Status, Verdict};

pub const BATTERY_VERSION: &str = "v1";

/// Rates of the convergent sequences used by [`probe_ordinary_continuity`].
pub const ORDINARY_RATES: [f64; 3] = [0.5, 1.0, 2.0];
/// Number of trailing terms checked by [`probe_ordinary_continuity`].
const ORDINARY_TAIL: u64 = 10;
/// Envelope crossings required for an unboundedness witness.
pub const MIN_SPIKES: usize = 12;

/// The default battery, in order.
pub fn default_battery() -> Vec<SequenceSpec> {
    let spec = |family, params: &[(&str, f64)]| {
        SequenceSpec::new(family, params).expect("battery specs are valid")
    };
    vec![
        spec(Family::Constant, &[("c", 0.0)]),
        spec(Family::Constant, &[("c", 1.0)]),
        spec(Family::Alternating, &[("c", 1.0)]),
        spec(Family::Alternating, &[("c", 0.5)]),
        spec(Family::Convergent, &[("limit", 0.3), ("rate", 1.0)]),
        spec(Family::Pm1Pattern, &[("rho", 0.75)]),
        spec(Family::SquareIndicator, &[]),
        spec(Family::LacunarySpike, &[("beta", 1.0 / 3.0)]),
        spec(Family::ConvergentSlow, &[("limit", 0.0)]),
    ]
}

pub fn default_battery_sequences() -> Vec<Sequence> {
    default_battery().iter().map(Sequence::from_spec).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Match {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub spec: String,
    pub input_verdict: Option<Verdict>,
    pub image_verdict: Option<Verdict>,
    pub f_of_limit: Option<f64>,
    #[serde(rename = "match")]
    pub matches: Match,
    /// `|image limit - f(limit)|` when both exist.
    pub gap: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRow {
    pub row: usize,
    pub spec: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conclusion {
    /// `witness` is the first mismatching row; `all` lists every one.
    Counterexample {
        witness: WitnessRow,
        all: Vec<WitnessRow>,
    },
    NoCounterexampleFound,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub function: String,
    pub battery_version: String,
    pub rows: Vec<ProbeRow>,
    pub conclusion: Conclusion,
}

impl ProbeReport {
    pub fn row(&self, spec: &str) -> Option<&ProbeRow> {
        self.rows.iter().find(|r| r.spec == spec)
    }

    /// True when the row for `spec` is among the counterexamples.
    pub fn is_counterexample_at(&self, spec: &str) -> bool {
        matches!(&self.conclusion, Conclusion::Counterexample { all, .. }
            if all.iter().any(|w| w.spec == spec))
    }
}

/// Compare the Abel limit of `(f(p_k))` with `f(Abel-lim p_k)` on each input.
pub fn probe_abel_continuity(
    f: &FunctionSpec,
    battery: &[Sequence],
    profile: &ToleranceProfile,
) -> Result<ProbeReport> {
    profile.validate()?;
    if battery.is_empty() {
        return Err(Error::InvalidArgument("battery is empty".into()));
    }
    let rows: Vec<ProbeRow> = battery.iter().map(|s| probe_row(f, s, profile)).collect();
    let witnesses: Vec<WitnessRow> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.matches == Match::No)
        .map(|(i, r)| WitnessRow {
            row: i,
            spec: r.spec.clone(),
        })
        .collect();
    let conclusion = if let Some(first) = witnesses.first() {
        Conclusion::Counterexample {
            witness: first.clone(),
            all: witnesses,
        }
    } else if rows.iter().any(|r| r.matches == Match::Yes) {
        Conclusion::NoCounterexampleFound
    } else {
        Conclusion::Inconclusive
    };
    Ok(ProbeReport {
        function: f.to_string(),
        battery_version: BATTERY_VERSION.to_string(),
        rows,
        conclusion,
    })
}

fn probe_row(f: &FunctionSpec, seq: &Sequence, profile: &ToleranceProfile) -> ProbeRow {
    let mut row = ProbeRow {
        spec: seq.label().to_string(),
        input_verdict: None,
        image_verdict: None,
        f_of_limit: None,
        matches: Match::Inconclusive,
        gap: None,
        notes: Vec::new(),
    };
    let input = match abel::abel_limit(seq, profile) {
        Ok(v) => v,
        Err(e) => {
            row.notes.push(format!("input evaluation failed: {e}"));
            return row;
        }
    };
    let limit = input.status.limit();
    row.input_verdict = Some(input);
    let Some(limit) = limit else {
        row.notes
            .push("input is not Abel convergent; the row constrains nothing".into());
        return row;
    };
    let target = match f.eval(limit) {
        Ok(v) => v,
        Err(e) => {
            row.notes.push(format!("f(limit) undefined: {e}"));
            return row;
        }
    };
    row.f_of_limit = Some(target);
    let image = Sequence::map(f, seq);
    let image_verdict = match abel::abel_limit(&image, profile) {
        Ok(v) => v,
        Err(e) => {
            row.notes.push(format!("image evaluation failed: {e}"));
            return row;
        }
    };
    row.matches = match image_verdict.status {
        Status::Converged { limit: l2, .. } => {
            let gap = (l2 - target).abs();
            row.gap = Some(gap);
            if gap > profile.eps_witness {
                Match::No
            } else {
                Match::Yes
            }
        }
        Status::Diverged { .. } | Status::Oscillating { .. } => Match::No,
        Status::Inconclusive => Match::Inconclusive,
    };
    row.image_verdict = Some(image_verdict);
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrdinaryStatus {
    ContinuousEmpirical,
    DiscontinuityDetected,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrdinaryReport {
    pub point: f64,
    pub f_of_point: Option<f64>,
    pub status: OrdinaryStatus,
    /// Largest `|f(p_k) - f(point)|` seen in the checked tails.
    pub max_gap: Option<f64>,
    pub diagnostics: Vec<String>,
}

/// Check `f(p_k) -> f(point)` along `convergent(point, rate)` for each rate in
/// [`ORDINARY_RATES`], using the last terms before `n_max`.
pub fn probe_ordinary_continuity(
    f: &FunctionSpec,
    point: f64,
    profile: &ToleranceProfile,
) -> Result<OrdinaryReport> {
    profile.validate()?;
    let mut report = OrdinaryReport {
        point,
        f_of_point: None,
        status: OrdinaryStatus::Inconclusive,
        max_gap: None,
        diagnostics: Vec::new(),
    };
    let target = match f.eval(point) {
        Ok(v) => v,
        Err(e) => {
            report
                .diagnostics
                .push(format!("f is undefined at the point: {e}"));
            return Ok(report);
        }
    };
    report.f_of_point = Some(target);
    let threshold = 10.0 * profile.eps_conv;
    let end = profile.n_max;
    let start = end.saturating_sub(ORDINARY_TAIL);
    let mut max_gap = 0.0f64;
    for rate in ORDINARY_RATES {
        let spec = SequenceSpec::new(Family::Convergent, &[("limit", point), ("rate", rate)])
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let seq = Sequence::from_spec(&spec);
        for k in start..end {
            let p = seq.term(k)?;
            match f.eval(p) {
                Ok(v) => max_gap = max_gap.max((v - target).abs()),
                Err(e) => {
                    report
                        .diagnostics
                        .push(format!("domain violation along {spec} at k = {k}: {e}"));
                    return Ok(report);
                }
            }
        }
    }
    report.max_gap = Some(max_gap);
    report.status = if max_gap < threshold {
        OrdinaryStatus::ContinuousEmpirical
    } else {
        report.diagnostics.push(format!(
            "images stay {max_gap} away from f(point), threshold {threshold}"
        ));
        OrdinaryStatus::DiscontinuityDetected
    };
    report.diagnostics.push(format!(
        "checked k in [{start}, {end}) for rates {ORDINARY_RATES:?}"
    ));
    Ok(report)
}

/// `pm1_pattern(rho)` with `rho = (1 + t) / 2`, whose Cesàro (hence Abel)
/// limit is `t` up to the `1/1000` resolution of the pattern.
pub fn pm1_with_abel_limit(t: f64) -> Result<Sequence> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} is outside [-1, 1]"
        )));
    }
    let spec = SequenceSpec::new(Family::Pm1Pattern, &[("rho", (1.0 + t) / 2.0)])
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(Sequence::from_spec(&spec))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundednessStatus {
    /// A spike subsequence crossed the doubling envelope often enough.
    NotAbelSequentiallyCompactWitness,
    NoUnboundednessDetected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spike {
    pub j: u32,
    pub n: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub status: BoundednessStatus,
    pub spikes: Vec<Spike>,
    /// Abel verdict of the re-indexed spike sequence `r_j = p_{n_j}`.
    pub embedding_verdict: Option<Verdict>,
    pub diagnostics: Vec<String>,
}

impl BoundednessReport {
    /// The re-indexed spike sequence `r_j = p_{n_j}`, `j = 0, 1, ...`.
    pub fn embedding(&self, label: &str) -> Result<Sequence> {
        Ok(Sequence::finite(
            format!("spikes({label})"),
            self.spikes.iter().map(|s| s.value).collect(),
        )?)
    }
}

/// Greedy scan for `n_1 < n_2 < ...` with `|p_{n_j}| > 2^j`.
///
/// With at least [`MIN_SPIKES`] crossings the spike subsequence is reported
/// as a witness of unboundedness, and its re-indexing `r_j = p_{n_j}` is
/// classified by `abel_limit`: since `|r_j| x^j > (2x)^j`, the power series
/// diverges on the whole grid.
pub fn boundedness_probe(seq: &Sequence, profile: &ToleranceProfile) -> Result<BoundednessReport> {
    profile.validate()?;
    let end = seq.len().map_or(profile.n_max, |l| l.min(profile.n_max));
    let mut spikes = Vec::new();
    let mut j = 1u32;
    let mut envelope = 2.0f64;
    let mut buf = vec![0.0; 4096];
    let mut next = 0u64;
    while next < end && j < 1000 {
        let len = (end - next).min(buf.len() as u64) as usize;
        let block = &mut buf[..len];
        seq.fill(next, block)?;
        for (i, &v) in block.iter().enumerate() {
            if v.abs() > envelope {
                spikes.push(Spike {
                    j,
                    n: next + i as u64,
                    value: v,
                });
                j += 1;
                envelope *= 2.0;
            }
        }
        next += len as u64;
    }
    let mut report = BoundednessReport {
        status: BoundednessStatus::NoUnboundednessDetected,
        spikes,
        embedding_verdict: None,
        diagnostics: vec![format!(
            "scanned k < {end}; envelope |p_(n_j)| > 2^j starting at j = 1"
        )],
    };
    if report.spikes.len() >= MIN_SPIKES {
        let verdict = abel::abel_limit(&report.embedding(seq.label())?, profile)?;
        report.status = BoundednessStatus::NotAbelSequentiallyCompactWitness;
        report.embedding_verdict = Some(verdict);
    } else {
        report.diagnostics.push(format!(
            "{} envelope crossings, fewer than {MIN_SPIKES} (empirical at n_max)",
            report.spikes.len()
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_stable() {
        let labels: Vec<String> = default_battery().iter().map(|s| s.to_string()).collect();
        assert_eq!(labels.len(), 9);
        assert_eq!(labels[2], "alternating(c=1)");
        assert_eq!(labels[7], "lacunary_spike(beta=0.3333333333333333)");
    }

    #[test]
    fn pm1_construction_checks_range() {
        assert!(pm1_with_abel_limit(1.5).is_err());
        let s = pm1_with_abel_limit(1.0).unwrap();
        assert!(s.prefix(1000).unwrap().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn ordinary_continuity_examples() {
        let p = ToleranceProfile::default();
        let f = FunctionSpec::parse("t^2").unwrap();
        assert_eq!(
            probe_ordinary_continuity(&f, 0.0, &p).unwrap().status,
            OrdinaryStatus::ContinuousEmpirical
        );
        let f = FunctionSpec::parse("abs(t)").unwrap();
        assert_eq!(
            probe_ordinary_continuity(&f, 0.0, &p).unwrap().status,
            OrdinaryStatus::ContinuousEmpirical
        );
        let f = FunctionSpec::parse("1/t").unwrap();
        assert_eq!(
            probe_ordinary_continuity(&f, 0.0, &p).unwrap().status,
            OrdinaryStatus::Inconclusive
        );
    }

    #[test]
    fn bounded_sequences_have_few_crossings() {
        let p = ToleranceProfile::default().with_n_max(100_000);
        let r = boundedness_probe(&Sequence::parse("constant(c=5)").unwrap(), &p).unwrap();
        assert_eq!(r.status, BoundednessStatus::NoUnboundednessDetected);
        assert_eq!(r.spikes.len(), 2);
    }
}
