//! Cesàro `(C,1)` means `sigma_n = (p_0 + ... + p_n) / (n + 1)`.

use serde::Serialize;

use crate::abel;
use crate::error::{Error, Result};
use crate::profile::ToleranceProfile;
use crate::report::{csv_float, CsvTable};
use crate::sequence::Sequence;
use crate::summation::CompensatedSum;
use crate::verdict::{classify, Sample, Verdict};

const BLOCK: usize = 4096;

/// Cesàro means on an index grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroProfile {
    pub label: String,
    pub n: Vec<u64>,
    pub sigma: Vec<f64>,
}

impl CesaroProfile {
    /// CSV with header `n,sigma`.
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["n", "sigma"]);
        for (n, s) in self.n.iter().zip(&self.sigma) {
            t.row([n.to_string(), csv_float(*s)]);
        }
        t.finish()
    }
}

/// `round(e^i)` up to `min(n_max, 2^grid_depth)`.
///
/// The grid is capped at the resolution of the Abel grid, and its ratio `e`
/// is incommensurate with 2 so it does not alias with dyadic structure.
pub fn default_n_grid(profile: &ToleranceProfile) -> Vec<u64> {
    let hi = profile
        .n_max
        .min(1u64.checked_shl(profile.grid_depth).unwrap_or(u64::MAX));
    let mut out: Vec<u64> = Vec::new();
    for i in 0.. {
        let n = f64::from(i).exp().round();
        if n > hi as f64 {
            break;
        }
        let n = n as u64;
        if out.last().is_none_or(|&last| n > last) {
            out.push(n);
        }
    }
    out
}

/// Exact prefix means from one running compensated sum.
pub fn cesaro_means(seq: &Sequence, n_grid: &[u64]) -> Result<CesaroProfile> {
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n grid must be strictly increasing".into(),
        ));
    }
    let mut sigma = Vec::with_capacity(n_grid.len());
    let mut acc = CompensatedSum::new();
    let mut buf = vec![0.0; BLOCK];
    let mut next = 0u64;
    for &n in n_grid {
        while next <= n {
            let len = (n + 1 - next).min(BLOCK as u64) as usize;
            seq.fill(next, &mut buf[..len])?;
            for &v in &buf[..len] {
                acc.add(v);
            }
            next += len as u64;
        }
        sigma.push(acc.value() / (n as f64 + 1.0));
    }
    Ok(CesaroProfile {
        label: seq.label().to_string(),
        n: n_grid.to_vec(),
        sigma,
    })
}

pub fn cesaro_limit(seq: &Sequence, profile: &ToleranceProfile) -> Result<Verdict> {
    profile.validate()?;
    let p = cesaro_means(seq, &default_n_grid(profile))?;
    Ok(classify_profile(&p, profile))
}

pub fn classify_profile(p: &CesaroProfile, profile: &ToleranceProfile) -> Verdict {
    let samples: Vec<Sample> = p
        .sigma
        .iter()
        .map(|&mean| Sample {
            mean,
            tail_bound: 0.0,
            heuristic: false,
        })
        .collect();
    classify(&samples, profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KaramataOutcome {
    /// Abel limit exists and the Cesàro limit agrees with it.
    Pass,
    /// Abel limit exists but the Cesàro means disagree or do not settle.
    Fail,
    /// No Abel limit was established, so nothing is asserted.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KaramataReport {
    pub abel: Verdict,
    pub cesaro: Verdict,
    pub outcome: KaramataOutcome,
}

/// For bounded sequences, an Abel limit must also be a Cesàro limit.
pub fn tauberian_karamata_check(
    seq: &Sequence,
    profile: &ToleranceProfile,
) -> Result<KaramataReport> {
    if !seq.growth().is_bounded() {
        return Err(Error::Precondition(format!(
            "{} has growth {}; the check needs a bounded sequence",
            seq.label(),
            seq.growth()
        )));
    }
    let abel = abel::abel_limit(seq, profile)?;
    let cesaro = cesaro_limit(seq, profile)?;
    let outcome = match (abel.status.limit(), cesaro.status.limit()) {
        (None, _) => KaramataOutcome::NotApplicable,
        (Some(a), Some(c)) if (a - c).abs() < 10.0 * profile.eps_conv => KaramataOutcome::Pass,
        (Some(_), _) => KaramataOutcome::Fail,
    };
    Ok(KaramataReport {
        abel,
        cesaro,
        outcome,
    })
}
