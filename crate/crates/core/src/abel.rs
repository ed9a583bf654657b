//! Abel means `(1 - x) * sum_k p_k x^k` with certified truncation.
//!
//! Each mean is summed in ascending `k` with compensated summation and
//! truncated at an index `K` chosen from the sequence's growth class so that
//! the neglected tail is at most `eps_tail`:
//!
//! * `Bounded(M)`: the tail is at most `M * x^(K+1)`, so
//!   `K = ceil(ln(eps_tail / M) / ln x)`.
//! * `Polynomial(C, d)`: for `k > K` consecutive terms of `k^d x^k` shrink by
//!   at least `q = x * (1 + 1/(K+1))^d`, so once `q < 1` the tail is at most
//!   `(1 - x) * C * (K+1)^d * x^(K+1) / (1 - q)`. The smallest such `K` is
//!   found by doubling and bisection.
//! * `Unknown`: summation stops after 50 consecutive increments below
//!   `eps_tail / 100` and the point is marked heuristic.
//!
//! Sequences with sparse support only sum their support indices; `n_max` then
//! caps the number of evaluated terms rather than `K`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::ToleranceProfile;
use crate::report::{csv_float, CsvTable};
use crate::sequence::{GrowthClass, Sequence, SequenceSpec};
use crate::summation::CompensatedSum;
use crate::verdict::{classify, Sample, Status, Verdict};

/// Terms processed per block in the shared grid pass.
const BLOCK: usize = 4096;
/// Running powers `x^k` are recomputed from scratch this often.
const RESYNC: u64 = 64;
/// Consecutive small increments that end a heuristic (unknown-growth) sum.
const HEURISTIC_RUN: u32 = 50;
/// Minimum number of terms before the divergence term test applies.
const TERM_TEST_MIN: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointStatus {
    /// Tail bound certified and within `eps_tail`.
    Resolved,
    /// Growth unknown; summation stopped on small increments.
    Heuristic,
    /// Term budget exhausted before the tail budget was met.
    TailUnmet,
    /// The power series itself diverges at this `x` (term test).
    SeriesDivergent { sign: i8 },
}

/// One Abel mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalPoint {
    pub x: f64,
    pub mean: f64,
    /// Truncation index: the mean sums `k = 0..=truncation`.
    pub truncation: u64,
    /// Terms actually evaluated (smaller than `truncation + 1` for sparse
    /// sequences).
    pub terms_used: u64,
    /// Bound on the neglected tail; `inf` when none is known.
    pub tail_bound: f64,
    pub rigorous: bool,
    pub status: PointStatus,
}

impl EvalPoint {
    /// Usable for classification.
    pub fn is_usable(&self) -> bool {
        matches!(self.status, PointStatus::Resolved | PointStatus::Heuristic)
    }
}

/// Abel means over a grid approaching `x = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCurve {
    pub label: String,
    pub spec: Option<SequenceSpec>,
    pub profile: ToleranceProfile,
    pub points: Vec<EvalPoint>,
}

impl MeanCurve {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    /// CSV with header `x,mean,terms_used,tail_bound,rigorous`.
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["x", "mean", "terms_used", "tail_bound", "rigorous"]);
        for p in &self.points {
            t.row([
                csv_float(p.x),
                csv_float(p.mean),
                p.terms_used.to_string(),
                csv_float(p.tail_bound),
                p.rigorous.to_string(),
            ]);
        }
        t.finish()
    }
}

/// `x_j = 1 - 2^-j` for `j = 1..=grid_depth`.
pub fn default_grid(profile: &ToleranceProfile) -> Vec<f64> {
    (1..=profile.grid_depth)
        .map(|j| 1.0 - (-f64::from(j)).exp2())
        .collect()
}

/// The Abel mean at a single `x` in `[0, 1)`.
pub fn abel_mean(seq: &Sequence, x: f64, profile: &ToleranceProfile) -> Result<EvalPoint> {
    profile.validate()?;
    check_x(x)?;
    Ok(evaluate(seq, &[x], profile)?.remove(0))
}

/// Abel means on the default grid.
pub fn mean_curve(seq: &Sequence, profile: &ToleranceProfile) -> Result<MeanCurve> {
    profile.validate()?;
    let points = evaluate(seq, &default_grid(profile), profile)?;
    Ok(MeanCurve {
        label: seq.label().to_string(),
        spec: seq.spec().cloned(),
        profile: *profile,
        points,
    })
}

/// Abel means at arbitrary points in `[0, 1)`, in the given order.
pub fn means_at(seq: &Sequence, xs: &[f64], profile: &ToleranceProfile) -> Result<Vec<EvalPoint>> {
    profile.validate()?;
    for &x in xs {
        check_x(x)?;
    }
    evaluate(seq, xs, profile)
}

/// Classify the Abel limit from the mean curve.
pub fn abel_limit(seq: &Sequence, profile: &ToleranceProfile) -> Result<Verdict> {
    let curve = mean_curve(seq, profile)?;
    Ok(classify_curve(&curve))
}

/// Classification of an already computed curve.
pub fn classify_curve(curve: &MeanCurve) -> Verdict {
    let profile = &curve.profile;
    if let Some(p) = curve
        .points
        .iter()
        .find(|p| matches!(p.status, PointStatus::SeriesDivergent { .. }))
    {
        let PointStatus::SeriesDivergent { sign } = p.status else {
            unreachable!()
        };
        return Verdict::new(Status::Diverged { sign }).note(format!(
            "power series diverges at x = {}: terms p_k x^k stay >= 1 in magnitude",
            p.x
        ));
    }
    let samples: Vec<Sample> = curve
        .points
        .iter()
        .filter(|p| p.is_usable())
        .map(|p| Sample {
            mean: p.mean,
            tail_bound: p.tail_bound,
            heuristic: p.status == PointStatus::Heuristic,
        })
        .collect();
    let mut verdict = classify(&samples, profile);
    let unmet = curve
        .points
        .iter()
        .filter(|p| p.status == PointStatus::TailUnmet)
        .count();
    if unmet > 0 {
        verdict = verdict.note(format!(
            "{unmet} of {} grid points exhausted the term budget (n_max = {}) before meeting \
             eps_tail and were excluded",
            curve.points.len(),
            profile.n_max
        ));
    }
    verdict
}

fn check_x(x: f64) -> Result<()> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("x = {x} is outside [0, 1)")))
    }
}

/// Tail budget plan for one point.
#[derive(Debug, Clone, Copy)]
enum Plan {
    /// Sum `k = 0..=k`; certified tail bound.
    Certified { k: u64, tail: f64 },
    /// No certificate possible.
    Heuristic,
}

fn plan(growth: GrowthClass, x: f64, eps: f64) -> Plan {
    match growth.normalized() {
        GrowthClass::Bounded { m } => {
            if m == 0.0 || x == 0.0 {
                return Plan::Certified { k: 0, tail: 0.0 };
            }
            let raw = ((eps / m).ln() / x.ln()).ceil().max(0.0);
            let mut k = saturating_u64(raw);
            let mut tail = bounded_tail(m, x, k);
            while tail > eps && k < u64::MAX {
                k += 1;
                tail = bounded_tail(m, x, k);
            }
            Plan::Certified { k, tail }
        }
        GrowthClass::Polynomial { c, d } => match poly_truncation(x, c, d, eps) {
            Some(k) => Plan::Certified {
                k,
                tail: poly_tail(x, c, d, k),
            },
            None => Plan::Certified {
                k: u64::MAX,
                tail: f64::INFINITY,
            },
        },
        GrowthClass::Unknown => Plan::Heuristic,
    }
}

fn saturating_u64(v: f64) -> u64 {
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

/// Tail bound after truncating a `Bounded(m)` sequence at `k`.
fn bounded_tail(m: f64, x: f64, k: u64) -> f64 {
    m * x.powf(k as f64 + 1.0)
}

/// Tail bound after truncating a `Polynomial(c, d)` sequence at `k`;
/// infinite when the ratio bound does not apply yet.
fn poly_tail(x: f64, c: f64, d: u32, k: u64) -> f64 {
    if c == 0.0 || x == 0.0 {
        return 0.0;
    }
    let k1 = k as f64 + 1.0;
    let d = f64::from(d);
    let ln_x = x.ln();
    let ln_q = ln_x + d * (1.0 / k1).ln_1p();
    if ln_q >= 0.0 {
        return f64::INFINITY;
    }
    let ln_bound = (1.0 - x).ln() + c.ln() + d * k1.ln() + k1 * ln_x - (-ln_q.exp_m1()).ln();
    ln_bound.exp()
}

/// Smallest `k` whose polynomial tail bound is at most `eps`.
fn poly_truncation(x: f64, c: f64, d: u32, eps: f64) -> Option<u64> {
    let ok = |k: u64| poly_tail(x, c, d, k) <= eps;
    if ok(0) {
        return Some(0);
    }
    let mut hi = 1u64;
    while !ok(hi) {
        hi = hi.checked_mul(2)?;
    }
    let mut lo = hi / 2;
    // Invariant: !ok(lo) (or lo == 0 and checked above), ok(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Running state of one Abel mean in the dense pass.
struct Accum {
    x: f64,
    plan: Plan,
    /// Last index to sum (inclusive), after caps.
    last: u64,
    acc: CompensatedSum,
    w: f64,
    small_run: u32,
    last_small_term: Option<u64>,
    done: Option<u64>,
}

impl Accum {
    fn new(x: f64, plan: Plan, cap: u64) -> Self {
        let last = match plan {
            Plan::Certified { k, .. } => k.min(cap - 1),
            Plan::Heuristic => cap - 1,
        };
        Self {
            x,
            plan,
            last,
            acc: CompensatedSum::new(),
            w: 1.0,
            small_run: 0,
            last_small_term: None,
            done: None,
        }
    }

    fn finish(self, growth: GrowthClass, eps: f64, heuristic_stop: bool) -> EvalPoint {
        let used = self.done.unwrap_or(self.last) + 1;
        let mean = (1.0 - self.x) * self.acc.value();
        let truncation = used - 1;
        let (status, tail_bound) = match self.plan {
            Plan::Certified { k, tail } if truncation == k => (PointStatus::Resolved, tail),
            Plan::Certified { .. } => {
                let tail = match growth.normalized() {
                    GrowthClass::Bounded { m } => bounded_tail(m, self.x, truncation),
                    GrowthClass::Polynomial { c, d } => poly_tail(self.x, c, d, truncation),
                    GrowthClass::Unknown => f64::INFINITY,
                };
                (PointStatus::TailUnmet, tail)
            }
            Plan::Heuristic if heuristic_stop => (PointStatus::Heuristic, eps),
            Plan::Heuristic => {
                let divergent =
                    used >= TERM_TEST_MIN && self.last_small_term.is_none_or(|k| k < used / 2);
                if divergent {
                    let sign = if mean < 0.0 { -1 } else { 1 };
                    (PointStatus::SeriesDivergent { sign }, f64::INFINITY)
                } else {
                    (PointStatus::TailUnmet, f64::INFINITY)
                }
            }
        };
        EvalPoint {
            x: self.x,
            mean,
            truncation,
            terms_used: used,
            tail_bound,
            rigorous: status == PointStatus::Resolved,
            status,
        }
    }
}

fn evaluate(seq: &Sequence, xs: &[f64], profile: &ToleranceProfile) -> Result<Vec<EvalPoint>> {
    let growth = seq.growth();
    if seq.support().is_some() && growth.is_known() {
        return xs.iter().map(|&x| sparse_point(seq, x, profile)).collect();
    }

    let cap = match seq.len() {
        Some(len) => len.min(profile.n_max),
        None => profile.n_max,
    };
    if cap == 0 {
        return Ok(xs
            .iter()
            .map(|&x| EvalPoint {
                x,
                mean: 0.0,
                truncation: 0,
                terms_used: 0,
                tail_bound: f64::INFINITY,
                rigorous: false,
                status: PointStatus::TailUnmet,
            })
            .collect());
    }
    let threshold = profile.eps_tail / 100.0;
    let mut accums: Vec<Accum> = xs
        .iter()
        .map(|&x| Accum::new(x, plan(growth, x, profile.eps_tail), cap))
        .collect();
    let heuristic: Vec<bool> = accums
        .iter()
        .map(|a| matches!(a.plan, Plan::Heuristic))
        .collect();
    let end = accums.iter().map(|a| a.last).max().unwrap_or(0) + 1;
    let mut block = vec![0.0; BLOCK];
    let mut start = 0u64;
    while start < end {
        if accums.iter().all(|a| a.done.is_some()) {
            break;
        }
        let len = (end - start).min(BLOCK as u64) as usize;
        let block = &mut block[..len];
        seq.fill(start, block)?;
        for a in accums.iter_mut() {
            a.consume(start, block, threshold);
        }
        start += len as u64;
    }
    Ok(accums
        .into_iter()
        .zip(heuristic)
        .map(|(a, was_heuristic)| {
            let stopped_early = was_heuristic && a.small_run >= HEURISTIC_RUN;
            a.finish(growth, profile.eps_tail, stopped_early)
        })
        .collect())
}

impl Accum {
    /// Consume terms `start..start + block.len()`.
    fn consume(&mut self, start: u64, block: &[f64], threshold: f64) {
        if self.done.is_some() {
            return;
        }
        let heuristic = matches!(self.plan, Plan::Heuristic);
        let scale = 1.0 - self.x;
        for (i, &p) in block.iter().enumerate() {
            let k = start + i as u64;
            if k.is_multiple_of(RESYNC) {
                self.w = self.x.powf(k as f64);
            }
            let term = p * self.w;
            self.acc.add(term);
            if term.abs() < 1.0 {
                self.last_small_term = Some(k);
            }
            if heuristic {
                if (scale * term).abs() < threshold {
                    self.small_run += 1;
                    if self.small_run >= HEURISTIC_RUN {
                        self.done = Some(k);
                        return;
                    }
                } else {
                    self.small_run = 0;
                }
            }
            self.w *= self.x;
            if k == self.last {
                self.done = Some(k);
                return;
            }
        }
    }
}

fn sparse_point(seq: &Sequence, x: f64, profile: &ToleranceProfile) -> Result<EvalPoint> {
    let growth = seq.growth();
    let support = seq.support().expect("sparse sequence");
    let Plan::Certified { k: target, tail } = plan(growth, x, profile.eps_tail) else {
        unreachable!("sparse summation requires known growth")
    };
    let mut acc = CompensatedSum::new();
    let mut used = 0u64;
    let mut reached = 0u64;
    let mut capped = false;
    for k in support.indices() {
        if k > target {
            break;
        }
        if used == profile.n_max {
            capped = true;
            break;
        }
        let p = seq.term(k)?;
        acc.add(p * x.powf(k as f64));
        used += 1;
        reached = k;
    }
    let mean = (1.0 - x) * acc.value();
    if capped {
        let tail = match growth.normalized() {
            GrowthClass::Bounded { m } => bounded_tail(m, x, reached),
            GrowthClass::Polynomial { c, d } => poly_tail(x, c, d, reached),
            GrowthClass::Unknown => f64::INFINITY,
        };
        return Ok(EvalPoint {
            x,
            mean,
            truncation: reached,
            terms_used: used,
            tail_bound: tail,
            rigorous: false,
            status: PointStatus::TailUnmet,
        });
    }
    Ok(EvalPoint {
        x,
        mean,
        truncation: target,
        terms_used: used,
        tail_bound: tail,
        rigorous: true,
        status: PointStatus::Resolved,
    })
}
