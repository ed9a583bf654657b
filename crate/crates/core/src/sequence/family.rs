//! Closed forms for the catalog families.

use std::f64::consts::LN_2;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Family, GrowthClass, SequenceSpec, Support};
use crate::summation::CompensatedSum;

/// Distance between stored harmonic checkpoints.
const CHECKPOINT: u64 = 4096;

pub(super) enum FamilyTerms {
    Constant(f64),
    Alternating(f64),
    Convergent { limit: f64, rate: f64 },
    ConvergentSlow { limit: f64 },
    Harmonic(HarmonicMemo),
    SquareIndicator,
    LacunarySpike { beta: f64 },
    Pm1 { count: u64 },
    LogOscillator,
    GeometricSpike,
    BoundedRandom { m: f64, seed: u64 },
    Ramp,
}

impl FamilyTerms {
    pub(super) fn new(spec: &SequenceSpec) -> (Self, GrowthClass, Option<Support>) {
        let p = |name: &str| spec.param(name).expect("validated spec");
        match spec.family() {
            Family::Constant => {
                let c = p("c");
                (Self::Constant(c), GrowthClass::Bounded { m: c.abs() }, None)
            }
            Family::Alternating => {
                let c = p("c");
                (
                    Self::Alternating(c),
                    GrowthClass::Bounded { m: c.abs() },
                    None,
                )
            }
            Family::Convergent => {
                let limit = p("limit");
                (
                    Self::Convergent {
                        limit,
                        rate: p("rate"),
                    },
                    GrowthClass::Bounded {
                        m: limit.abs() + 1.0,
                    },
                    None,
                )
            }
            Family::ConvergentSlow => {
                let limit = p("limit");
                (
                    Self::ConvergentSlow { limit },
                    GrowthClass::Bounded {
                        m: limit.abs() + 1.0 / LN_2,
                    },
                    None,
                )
            }
            // H_k <= 1 + ln k <= k for k >= 1.
            Family::HarmonicLog => (
                Self::Harmonic(HarmonicMemo::new()),
                GrowthClass::Polynomial { c: 1.0, d: 1 },
                None,
            ),
            Family::SquareIndicator => (
                Self::SquareIndicator,
                GrowthClass::Bounded { m: 1.0 },
                Some(Support::Squares),
            ),
            // 2^(j beta) = k^beta <= k^ceil(beta) at k = 2^j.
            Family::LacunarySpike => {
                let beta = p("beta");
                (
                    Self::LacunarySpike { beta },
                    GrowthClass::Polynomial {
                        c: 1.0,
                        d: beta.ceil() as u32,
                    },
                    Some(Support::PowersOfTwo),
                )
            }
            Family::Pm1Pattern => (
                Self::Pm1 {
                    count: (p("rho") * 1000.0).round() as u64,
                },
                GrowthClass::Bounded { m: 1.0 },
                None,
            ),
            Family::LogOscillator => (Self::LogOscillator, GrowthClass::Bounded { m: 1.0 }, None),
            Family::GeometricSpike => (
                Self::GeometricSpike,
                GrowthClass::Polynomial { c: 1.0, d: 1 },
                Some(Support::PowersOfTwo),
            ),
            Family::BoundedRandom => {
                let m = p("m");
                (
                    Self::BoundedRandom {
                        m,
                        seed: spec.seed().unwrap_or(0),
                    },
                    GrowthClass::Bounded { m },
                    None,
                )
            }
            Family::Ramp => (Self::Ramp, GrowthClass::Polynomial { c: 1.0, d: 1 }, None),
        }
    }

    pub(super) fn term(&self, k: u64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Alternating(c) => sign(k) * c,
            Self::Convergent { limit, rate } => {
                let base = k - k % DECAY_SYNC;
                let mut run = [0.0; DECAY_SYNC as usize];
                let run = &mut run[..=(k - base) as usize];
                decay_run(base, *rate, run);
                limit + sign(k) * run[run.len() - 1]
            }
            Self::ConvergentSlow { limit } => limit + 1.0 / ((k + 2) as f64).ln(),
            Self::Harmonic(memo) => memo.value_at(k),
            Self::SquareIndicator => {
                let r = k.isqrt();
                if r * r == k {
                    1.0
                } else {
                    0.0
                }
            }
            Self::LacunarySpike { beta } => match power_of_two(k) {
                Some(j) => (f64::from(j) * beta).exp2(),
                None => 0.0,
            },
            Self::Pm1 { count } => {
                let r = k % 1000;
                if (r + 1) * count / 1000 > r * count / 1000 {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::LogOscillator => ((k + 1) as f64).ln().sin(),
            Self::GeometricSpike => match power_of_two(k) {
                Some(_) => k as f64,
                None => 0.0,
            },
            Self::BoundedRandom { m, seed } => {
                let mut rng = random_stream(*seed, k);
                uniform_term(&mut rng, *m)
            }
            Self::Ramp => k as f64,
        }
    }

    pub(super) fn fill(&self, start: u64, out: &mut [f64]) {
        match self {
            Self::Harmonic(memo) => {
                let mut acc = memo.state_at(start);
                for (i, v) in out.iter_mut().enumerate() {
                    let k = start + i as u64;
                    if i > 0 {
                        acc.add(1.0 / k as f64);
                    }
                    *v = acc.value();
                }
            }
            Self::BoundedRandom { m, seed } => {
                let mut rng = random_stream(*seed, start);
                for v in out.iter_mut() {
                    *v = uniform_term(&mut rng, *m);
                }
            }
            Self::Convergent { limit, rate } => {
                let lead = (start % DECAY_SYNC) as usize;
                if lead == 0 {
                    decay_run(start, *rate, out);
                } else {
                    let mut run = vec![0.0; lead + out.len()];
                    decay_run(start - lead as u64, *rate, &mut run);
                    out.copy_from_slice(&run[lead..]);
                }
                for (i, v) in out.iter_mut().enumerate() {
                    *v = limit + sign(start + i as u64) * *v;
                }
            }
            _ => {
                for (i, v) in out.iter_mut().enumerate() {
                    *v = self.term(start + i as u64);
                }
            }
        }
    }
}

/// Exact resync interval for `decay_run`.
const DECAY_SYNC: u64 = 64;

/// Writes (k+1)^-rate for k = start.. into `out`, `start` a multiple of
/// `DECAY_SYNC`. Between resyncs each term is the previous one times the
/// binomial series of (1 + 1/k)^-rate, with 1/k <= 1/65.
fn decay_run(start: u64, rate: f64, out: &mut [f64]) {
    let mut coeffs = [0.0; 24];
    coeffs[0] = 1.0;
    let mut len = 1;
    while len < coeffs.len() {
        let n = len as f64;
        coeffs[len] = coeffs[len - 1] * (-rate - n + 1.0) / n;
        len += 1;
        if coeffs[len - 1].abs() * 65f64.powf(-n) < 1e-17 {
            break;
        }
    }
    let coeffs = &coeffs[..len];
    for (c, chunk) in out.chunks_mut(DECAY_SYNC as usize).enumerate() {
        let base = start + c as u64 * DECAY_SYNC;
        if base < DECAY_SYNC {
            for (i, v) in chunk.iter_mut().enumerate() {
                *v = ((base + i as u64 + 1) as f64).powf(-rate);
            }
            continue;
        }
        let mut prev = ((base + 1) as f64).powf(-rate);
        chunk[0] = prev;
        for (i, v) in chunk.iter_mut().enumerate().skip(1) {
            let u = 1.0 / (base + i as u64) as f64;
            prev *= coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c);
            *v = prev;
        }
    }
}

fn sign(k: u64) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn power_of_two(k: u64) -> Option<u32> {
    k.is_power_of_two().then(|| k.trailing_zeros())
}

/// Stream positioned so that the next draw is term `k`; each term consumes
/// two 32-bit words.
fn random_stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * u128::from(k));
    rng
}

fn uniform_term(rng: &mut ChaCha8Rng, m: f64) -> f64 {
    let u: f64 = rng.random();
    m * (2.0 * u - 1.0)
}

/// Harmonic numbers with compensated-sum checkpoints every [`CHECKPOINT`]
/// terms, so random access agrees bit for bit with sequential summation.
pub(super) struct HarmonicMemo {
    checkpoints: Mutex<Vec<(f64, f64)>>,
}

impl HarmonicMemo {
    fn new() -> Self {
        Self {
            checkpoints: Mutex::new(vec![(0.0, 0.0)]),
        }
    }

    /// Summation state after adding `1/1 + ... + 1/k`.
    fn state_at(&self, k: u64) -> CompensatedSum {
        let slot = (k / CHECKPOINT) as usize;
        let (sum, comp) = {
            let mut table = self.checkpoints.lock().unwrap_or_else(|e| e.into_inner());
            while table.len() <= slot {
                let last = table.len() - 1;
                let (s, c) = table[last];
                let mut acc = CompensatedSum::from_parts(s, c);
                let from = last as u64 * CHECKPOINT;
                for j in from + 1..=from + CHECKPOINT {
                    acc.add(1.0 / j as f64);
                }
                table.push(acc.parts());
            }
            table[slot]
        };
        let mut acc = CompensatedSum::from_parts(sum, comp);
        for j in slot as u64 * CHECKPOINT + 1..=k {
            acc.add(1.0 / j as f64);
        }
        acc
    }

    fn value_at(&self, k: u64) -> f64 {
        self.state_at(k).value()
    }
}
