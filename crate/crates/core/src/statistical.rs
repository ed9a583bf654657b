//! Statistical and lacunary statistical convergence.
//!
//! Densities count indices `k = 1..=n`; window `r` of a lacunary sequence
//! `theta = (k_r)` is `I_r = (k_{r-1}, k_r]`. All counts are exact integers.
//! A `Converged` verdict here is empirical: the density of far-away terms is
//! small and not increasing at the end of the scanned prefix.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::grid::log_grid;
use crate::profile::ToleranceProfile;
use crate::report::{csv_float, CsvTable};
use crate::sequence::Sequence;
use crate::verdict::{Status, Verdict};

const BLOCK: usize = 4096;
/// Radii at which a candidate limit is tested.
pub const TEST_EPS: [f64; 3] = [1e-1, 1e-2, 1e-3];
/// A passing candidate leaves less than this density outside each radius.
pub const DENSITY_THRESHOLD: f64 = 0.01;
/// Clusters holding less than this share of the terms are not candidates.
const MIN_CLUSTER_SHARE: f64 = 0.01;
/// Histograms with more occupied bins than this are abandoned.
const MAX_BINS: usize = 1 << 20;

/// `d_n = |{1 <= k <= n : |p_k - l| >= eps}| / n` on an index grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    pub eps: f64,
    pub candidate: f64,
    pub n: Vec<u64>,
    pub count: Vec<u64>,
    pub d: Vec<f64>,
}

impl DensityProfile {
    /// CSV with header `n,d_n`.
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["n", "d_n"]);
        for (n, d) in self.n.iter().zip(&self.d) {
            t.row([n.to_string(), csv_float(*d)]);
        }
        t.finish()
    }
}

/// Exact densities of `{k : |p_k - l| >= eps}` in one pass.
pub fn density_profile(seq: &Sequence, l: f64, eps: f64, n_grid: &[u64]) -> Result<DensityProfile> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    if n_grid.first() == Some(&0) || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n grid must be positive and strictly increasing".into(),
        ));
    }
    let count = far_counts(seq, &[(l, eps)], n_grid)?.remove(0);
    let d = count
        .iter()
        .zip(n_grid)
        .map(|(&c, &n)| c as f64 / n as f64)
        .collect();
    Ok(DensityProfile {
        eps,
        candidate: l,
        n: n_grid.to_vec(),
        count,
        d,
    })
}

/// For each `(l, eps)`, the number of `k` in `1..=c` with `|p_k - l| >= eps`
/// at every checkpoint `c` (increasing).
fn far_counts(seq: &Sequence, tests: &[(f64, f64)], checkpoints: &[u64]) -> Result<Vec<Vec<u64>>> {
    let mut out = vec![Vec::with_capacity(checkpoints.len()); tests.len()];
    let mut running = vec![0u64; tests.len()];
    let mut buf = vec![0.0; BLOCK];
    let mut next = 1u64;
    for &c in checkpoints {
        while next <= c {
            let len = (c + 1 - next).min(BLOCK as u64) as usize;
            let block = &mut buf[..len];
            seq.fill(next, block)?;
            for (run, &(l, eps)) in running.iter_mut().zip(tests) {
                *run += block.iter().filter(|&&v| (v - l).abs() >= eps).count() as u64;
            }
            next += len as u64;
        }
        for (o, &run) in out.iter_mut().zip(&running) {
            o.push(run);
        }
    }
    Ok(out)
}

enum Candidates {
    Found(Vec<f64>),
    TooManyBins,
}

/// Cluster centres of the terms `p_1..=p_n` binned at width `width`.
fn candidates(seq: &Sequence, n: u64, width: f64) -> Result<Candidates> {
    let mut bins: HashMap<i64, (u64, f64)> = HashMap::new();
    let mut buf = vec![0.0; BLOCK];
    let mut next = 1u64;
    while next <= n {
        let len = (n + 1 - next).min(BLOCK as u64) as usize;
        let block = &mut buf[..len];
        seq.fill(next, block)?;
        for &v in block.iter() {
            let e = bins.entry((v / width).floor() as i64).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += v;
        }
        if bins.len() > MAX_BINS {
            return Ok(Candidates::TooManyBins);
        }
        next += len as u64;
    }
    let mut keys: Vec<i64> = bins.keys().copied().collect();
    keys.sort_unstable();

    let mut centres = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let mut j = i;
        while j + 1 < keys.len() && keys[j + 1] == keys[j] + 1 {
            j += 1;
        }
        let cluster = &keys[i..=j];
        let mass: u64 = cluster.iter().map(|k| bins[k].0).sum();
        if mass as f64 >= MIN_CLUSTER_SHARE * n as f64 {
            // Ties go to the lowest bin, keeping the choice deterministic.
            let best = cluster
                .iter()
                .copied()
                .fold(None::<i64>, |b, k| match b {
                    Some(b) if bins[&b].0 >= bins[&k].0 => Some(b),
                    _ => Some(k),
                })
                .expect("non-empty cluster");
            let (count, sum) = bins[&best];
            centres.push(sum / count as f64);
        }
        i = j + 1;
    }
    Ok(Candidates::Found(centres))
}

/// Shared decision rule: exactly one candidate whose far-term density (per
/// radius) ends below the threshold and no higher than mid-scan.
fn decide(
    centres: &[f64],
    densities: &[Vec<f64>],
    profile: &ToleranceProfile,
    scope: &str,
) -> Verdict {
    let mut passing = Vec::new();
    let mut report = Vec::new();
    for (ci, &centre) in centres.iter().enumerate() {
        let mut ok = true;
        for (ei, eps) in TEST_EPS.iter().enumerate() {
            let d = &densities[ci * TEST_EPS.len() + ei];
            let last = *d.last().unwrap_or(&1.0);
            let mid = d.get(d.len() / 2).copied().unwrap_or(1.0);
            if !(last <= mid && last < DENSITY_THRESHOLD) {
                ok = false;
                report.push(format!(
                    "candidate {centre}: density {last} outside eps = {eps} (mid-scan {mid})"
                ));
                break;
            }
        }
        if ok {
            passing.push(centre);
        }
    }
    match passing.as_slice() {
        [l] => Verdict::new(Status::Converged {
            limit: *l,
            err: profile.eps_conv,
        })
        .note(format!("empirical at {scope}")),
        [] => {
            let mut v = Verdict::inconclusive(format!(
                "not statistically convergent (empirical at {scope}): no candidate passes"
            ));
            v.diagnostics.extend(report);
            v
        }
        many => Verdict::inconclusive(format!(
            "{} candidates pass ({many:?}); tolerances are likely misconfigured",
            many.len()
        )),
    }
}

/// Statistical limit by histogram clustering and density tests.
pub fn st_limit(seq: &Sequence, profile: &ToleranceProfile) -> Result<Verdict> {
    profile.validate()?;
    let n = match seq.len() {
        Some(len) => len.saturating_sub(1).min(profile.n_max),
        None => profile.n_max,
    };
    let centres = match candidates(seq, n, profile.eps_conv)? {
        Candidates::Found(c) => c,
        Candidates::TooManyBins => {
            return Ok(Verdict::inconclusive(format!(
                "terms occupy more than {MAX_BINS} bins of width {}; no limit candidate",
                profile.eps_conv
            )))
        }
    };
    let grid = log_grid(16.min(n), n, 4);
    let tests: Vec<(f64, f64)> = centres
        .iter()
        .flat_map(|&c| TEST_EPS.iter().map(move |&e| (c, e)))
        .collect();
    let counts = far_counts(seq, &tests, &grid)?;
    let densities: Vec<Vec<f64>> = counts
        .iter()
        .map(|c| {
            c.iter()
                .zip(&grid)
                .map(|(&c, &n)| c as f64 / n as f64)
                .collect()
        })
        .collect();
    Ok(decide(&centres, &densities, profile, &format!("n = {n}")))
}

/// Why a candidate `theta` is not an acceptable lacunary sequence.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("needs at least two entries")]
    TooShort,
    #[error("k_0 must be 0, found {found}")]
    NotStartingAtZero { found: u64 },
    #[error("not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("h_r/k_r = {ratio} <= margin {margin} at r = {r}")]
    RatioLiminfViolated { r: usize, ratio: f64, margin: f64 },
    #[error("window lengths do not grow (h_first = {h_first}, h_last = {h_last})")]
    WindowsNotGrowing { h_first: u64, h_last: u64 },
}

impl Violation {
    /// Prefix heuristics, as opposed to structural defects.
    pub fn is_heuristic(&self) -> bool {
        matches!(
            self,
            Violation::RatioLiminfViolated { .. } | Violation::WindowsNotGrowing { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct LacunaryError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for LacunaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LacunaryOptions {
    /// Required lower bound on `h_r / k_r`, i.e. `k_r / k_{r-1} > 1/(1-margin)`.
    pub margin: f64,
    /// Windows exempt from the ratio check.
    pub burn_in: usize,
    /// Downgrade prefix-heuristic violations to warnings.
    pub allow_heuristic_violations: bool,
}

impl Default for LacunaryOptions {
    fn default() -> Self {
        Self {
            margin: 0.01,
            burn_in: 4,
            allow_heuristic_violations: false,
        }
    }
}

/// A checked lacunary sequence `0 = k_0 < k_1 < ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LacunarySequence {
    k: Vec<u64>,
    pub warnings: Vec<String>,
}

impl LacunarySequence {
    pub fn k(&self) -> &[u64] {
        &self.k
    }

    /// Number of windows.
    pub fn windows(&self) -> usize {
        self.k.len() - 1
    }

    /// `h_r = k_r - k_{r-1}` for `r = 1..`.
    pub fn h(&self) -> Vec<u64> {
        self.k.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Keep only the windows ending at or before `limit`.
    pub fn truncated(&self, limit: u64) -> LacunarySequence {
        LacunarySequence {
            k: self.k.iter().copied().take_while(|&k| k <= limit).collect(),
            warnings: self.warnings.clone(),
        }
    }
}

/// `[0, base, base^2, ...]` up to `limit`.
pub fn powers(base: u64, limit: u64) -> Result<LacunarySequence> {
    if base < 2 {
        return Err(Error::InvalidArgument(format!(
            "powers base must be >= 2, got {base}"
        )));
    }
    let mut k = vec![0u64];
    let mut v = base;
    while v <= limit {
        k.push(v);
        match v.checked_mul(base) {
            Some(next) => v = next,
            None => break,
        }
    }
    Ok(validate_lacunary(&k)?)
}

pub fn validate_lacunary(k_list: &[u64]) -> Result<LacunarySequence, LacunaryError> {
    validate_lacunary_with(k_list, &LacunaryOptions::default())
}

pub fn validate_lacunary_with(
    k_list: &[u64],
    options: &LacunaryOptions,
) -> Result<LacunarySequence, LacunaryError> {
    let fail = |v: Violation| LacunaryError {
        violations: vec![v],
    };
    if k_list.len() < 2 {
        return Err(fail(Violation::TooShort));
    }
    if k_list[0] != 0 {
        return Err(fail(Violation::NotStartingAtZero { found: k_list[0] }));
    }
    if let Some(i) = k_list.windows(2).position(|w| w[1] <= w[0]) {
        return Err(fail(Violation::NotIncreasing { index: i + 1 }));
    }
    let mut found = Vec::new();
    if let Some(r) = (options.burn_in + 1..k_list.len())
        .find(|&r| ((k_list[r] - k_list[r - 1]) as f64 / k_list[r] as f64) <= options.margin)
    {
        found.push(Violation::RatioLiminfViolated {
            r,
            ratio: (k_list[r] - k_list[r - 1]) as f64 / k_list[r] as f64,
            margin: options.margin,
        });
    }
    let h_first = k_list[1] - k_list[0];
    let h_last = k_list[k_list.len() - 1] - k_list[k_list.len() - 2];
    if !(h_last >= h_first && h_last >= 10) {
        found.push(Violation::WindowsNotGrowing { h_first, h_last });
    }
    if !found.is_empty() && !options.allow_heuristic_violations {
        return Err(LacunaryError { violations: found });
    }
    Ok(LacunarySequence {
        k: k_list.to_vec(),
        warnings: found
            .iter()
            .map(|v| format!("{v} (overridden)"))
            .chain(std::iter::once(format!(
                "liminf k_r/k_(r-1) > 1 checked on the prefix only, margin {}",
                options.margin
            )))
            .collect(),
    })
}

/// Per-window ratios `w_r = |{k in I_r : |p_k - l| >= eps}| / h_r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowProfile {
    pub eps: f64,
    pub candidate: f64,
    pub k: Vec<u64>,
    pub count: Vec<u64>,
    pub w: Vec<f64>,
}

impl WindowProfile {
    /// CSV with header `r,k_r,h_r,w_r`.
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["r", "k_r", "h_r", "w_r"]);
        for (i, w) in self.w.iter().enumerate() {
            t.row([
                (i + 1).to_string(),
                self.k[i + 1].to_string(),
                (self.k[i + 1] - self.k[i]).to_string(),
                csv_float(*w),
            ]);
        }
        t.finish()
    }
}

pub fn lacunary_profile(
    seq: &Sequence,
    theta: &LacunarySequence,
    l: f64,
    eps: f64,
) -> Result<WindowProfile> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    let counts = window_counts(seq, theta, &[(l, eps)])?.remove(0);
    let w = counts
        .iter()
        .zip(theta.h())
        .map(|(&c, h)| c as f64 / h as f64)
        .collect();
    Ok(WindowProfile {
        eps,
        candidate: l,
        k: theta.k().to_vec(),
        count: counts,
        w,
    })
}

fn window_counts(
    seq: &Sequence,
    theta: &LacunarySequence,
    tests: &[(f64, f64)],
) -> Result<Vec<Vec<u64>>> {
    let cumulative = far_counts(seq, tests, &theta.k()[1..])?;
    Ok(cumulative
        .into_iter()
        .map(|c| {
            std::iter::once(0)
                .chain(c.iter().copied())
                .collect::<Vec<u64>>()
                .windows(2)
                .map(|w| w[1] - w[0])
                .collect()
        })
        .collect())
}

/// Lacunary statistical limit; windows ending beyond `n_max` are dropped.
pub fn st_lacunary_limit(
    seq: &Sequence,
    theta: &LacunarySequence,
    profile: &ToleranceProfile,
) -> Result<Verdict> {
    profile.validate()?;
    let limit = match seq.len() {
        Some(len) => len.saturating_sub(1).min(profile.n_max),
        None => profile.n_max,
    };
    let theta = theta.truncated(limit);
    if theta.windows() == 0 {
        return Ok(Verdict::inconclusive(format!(
            "no window of theta ends within n_max = {}",
            profile.n_max
        )));
    }
    let end = *theta.k().last().expect("non-empty");
    let centres = match candidates(seq, end, profile.eps_conv)? {
        Candidates::Found(c) => c,
        Candidates::TooManyBins => {
            return Ok(Verdict::inconclusive(format!(
                "terms occupy more than {MAX_BINS} bins of width {}; no limit candidate",
                profile.eps_conv
            )))
        }
    };
    let tests: Vec<(f64, f64)> = centres
        .iter()
        .flat_map(|&c| TEST_EPS.iter().map(move |&e| (c, e)))
        .collect();
    let h = theta.h();
    let densities: Vec<Vec<f64>> = window_counts(seq, &theta, &tests)?
        .iter()
        .map(|c| {
            c.iter()
                .zip(&h)
                .map(|(&c, &h)| c as f64 / h as f64)
                .collect()
        })
        .collect();
    let mut v = decide(
        &centres,
        &densities,
        profile,
        &format!("{} windows up to k = {end}", theta.windows()),
    );
    v.diagnostics.extend(theta.warnings.iter().cloned());
    Ok(v)
}
