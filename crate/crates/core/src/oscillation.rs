//! Empirical slow-oscillation detection.
//!
//! For `lambda > 1` the window maximum is
//! `M_n(lambda) = max_{n+1 <= k <= floor(lambda n)} |p_k - p_n|`, with
//! `M_n = 0` when the window is empty. A slowly oscillating sequence has
//! `lim_{lambda -> 1+} limsup_n M_n(lambda) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::log_grid;
use crate::profile::ToleranceProfile;
use crate::report::{csv_float, CsvTable};
use crate::sequence::Sequence;

/// Decreasing `lambda` values scanned by [`is_slowly_oscillating`].
pub const LAMBDA_GRID: [f64; 12] = [
    1.5, 1.25, 1.1, 1.05, 1.02, 1.01, 1.005, 1.002, 1.001, 1.0005, 1.0002, 1.0001,
];
/// Indices below this are ignored.
pub const N_BURN: u64 = 64;
const BLOCK: usize = 4096;

/// `floor(lambda * n)`.
pub fn window_end(lambda: f64, n: u64) -> u64 {
    (lambda * n as f64).floor() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationProfile {
    pub lambda: Vec<f64>,
    pub n: Vec<u64>,
    /// `m[i][j] = M_{n_j}(lambda_i)`.
    pub m: Vec<Vec<f64>>,
    /// Index `k` attaining `m[i][j]`, if the window is non-empty.
    pub argmax: Vec<Vec<Option<u64>>>,
}

impl OscillationProfile {
    /// `sup_n M_n(lambda_i)` with the `(n, k)` attaining it (first occurrence).
    pub fn tail_sup(&self, i: usize) -> (f64, Option<(u64, u64)>) {
        let mut best = (0.0, None);
        for (j, &m) in self.m[i].iter().enumerate() {
            if m > best.0 {
                best = (m, self.argmax[i][j].map(|k| (self.n[j], k)));
            }
        }
        best
    }

    /// CSV with header `lambda,n,M_n`.
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["lambda", "n", "M_n"]);
        for (i, &l) in self.lambda.iter().enumerate() {
            for (j, &n) in self.n.iter().enumerate() {
                t.row([csv_float(l), n.to_string(), csv_float(self.m[i][j])]);
            }
        }
        t.finish()
    }
}

/// Exact window maxima: one scan per `n` serves every `lambda`.
pub fn so_profile(
    seq: &Sequence,
    lambda_grid: &[f64],
    n_grid: &[u64],
) -> Result<OscillationProfile> {
    if let Some(l) = lambda_grid.iter().find(|&&l| !(l > 1.0 && l.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be > 1, got {l}"
        )));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n grid must be strictly increasing".into(),
        ));
    }
    let mut order: Vec<usize> = (0..lambda_grid.len()).collect();
    order.sort_by(|&a, &b| lambda_grid[a].total_cmp(&lambda_grid[b]));

    let mut m = vec![Vec::with_capacity(n_grid.len()); lambda_grid.len()];
    let mut argmax = vec![Vec::with_capacity(n_grid.len()); lambda_grid.len()];
    let mut buf = vec![0.0; BLOCK];
    for &n in n_grid {
        let pn = seq.term(n)?;
        let ends: Vec<u64> = order
            .iter()
            .map(|&i| window_end(lambda_grid[i], n))
            .collect();
        let last = ends.iter().copied().max().unwrap_or(n);
        let mut best = 0.0f64;
        let mut best_k: Option<u64> = None;
        let mut next = n + 1;
        let mut slot = 0;
        // Windows ending before n+1 are empty.
        while slot < ends.len() && ends[slot] < next {
            m[order[slot]].push(0.0);
            argmax[order[slot]].push(None);
            slot += 1;
        }
        while next <= last {
            let len = (last + 1 - next).min(BLOCK as u64) as usize;
            let block = &mut buf[..len];
            seq.fill(next, block)?;
            for (i, &v) in block.iter().enumerate() {
                let k = next + i as u64;
                let gap = (v - pn).abs();
                if gap > best || best_k.is_none() {
                    best = gap;
                    best_k = Some(k);
                }
                while slot < ends.len() && ends[slot] == k {
                    m[order[slot]].push(best);
                    argmax[order[slot]].push(best_k);
                    slot += 1;
                }
            }
            next += len as u64;
        }
    }
    Ok(OscillationProfile {
        lambda: lambda_grid.to_vec(),
        n: n_grid.to_vec(),
        m,
        argmax,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SoStatus {
    SoEmpirical,
    NotSo,
    Inconclusive,
}

/// A pair of indices `n < k <= floor(lambda n)` with a large gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub lambda: f64,
    pub n: u64,
    pub k: u64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub status: SoStatus,
    pub witness: Option<Witness>,
    pub lambda: Vec<f64>,
    pub tail_sup: Vec<f64>,
    pub diagnostics: Vec<String>,
}

/// The `n` grid used by [`is_slowly_oscillating`]: four points per octave
/// from [`N_BURN`] while the widest window stays within `n_max`.
pub fn default_n_grid(profile: &ToleranceProfile) -> Vec<u64> {
    let hi = (profile.n_max as f64 / LAMBDA_GRID[0]).floor() as u64;
    log_grid(N_BURN, hi, 4)
}

pub fn is_slowly_oscillating(
    seq: &Sequence,
    profile: &ToleranceProfile,
) -> Result<(OscillationReport, OscillationProfile)> {
    profile.validate()?;
    let mut n_grid = default_n_grid(profile);
    if let Some(len) = seq.len() {
        n_grid.retain(|&n| window_end(LAMBDA_GRID[0], n) < len);
    }
    let prof = so_profile(seq, &LAMBDA_GRID, &n_grid)?;
    let sups: Vec<(f64, Option<(u64, u64)>)> =
        (0..LAMBDA_GRID.len()).map(|i| prof.tail_sup(i)).collect();
    let tail_sup: Vec<f64> = sups.iter().map(|s| s.0).collect();
    let threshold = 10.0 * profile.eps_conv;
    let (smallest, at) = sups[sups.len() - 1];
    let largest = sups[0].0;
    let scope = format!(
        "empirical at n_max = {} (n from {N_BURN} to {})",
        profile.n_max,
        n_grid.last().copied().unwrap_or(0)
    );

    let mut diagnostics = vec![scope];
    let monotone = tail_sup.windows(2).all(|w| w[1] <= w[0]);
    let (status, witness) = if n_grid.is_empty() {
        diagnostics.push("no n in the scan range".into());
        (SoStatus::Inconclusive, None)
    } else if smallest < threshold && monotone {
        (SoStatus::SoEmpirical, None)
    } else if smallest >= threshold && smallest >= 0.5 * largest {
        let (n, k) = at.expect("positive sup has a witness");
        let gap = (seq.term(k)? - seq.term(n)?).abs();
        diagnostics.push(format!(
            "gap {gap} persists at lambda = {}",
            LAMBDA_GRID[LAMBDA_GRID.len() - 1]
        ));
        (
            SoStatus::NotSo,
            Some(Witness {
                lambda: LAMBDA_GRID[LAMBDA_GRID.len() - 1],
                n,
                k,
                gap,
            }),
        )
    } else {
        diagnostics.push(format!(
            "smallest-lambda tail sup {smallest} vs threshold {threshold}; largest {largest}"
        ));
        (SoStatus::Inconclusive, None)
    };
    Ok((
        OscillationReport {
            status,
            witness,
            lambda: LAMBDA_GRID.to_vec(),
            tail_sup,
            diagnostics,
        },
        prof,
    ))
}
