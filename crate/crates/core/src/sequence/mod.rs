//! Lazily evaluated real sequences with declared growth.
//!
//! A [`Sequence`] is cheap to clone (it is reference counted) and safe to share
//! between threads. Terms are indexed from 0.

mod family;
mod spec;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::function::FunctionSpec;
use family::FamilyTerms;
pub use spec::{Family, SequenceSpec, SpecError};

/// Static bound on `|p_k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthClass {
    /// `|p_k| <= m` for every `k`.
    Bounded { m: f64 },
    /// `|p_k| <= c * max(k, 1)^d`.
    Polynomial { c: f64, d: u32 },
    /// No bound known; tail estimates are heuristic.
    Unknown,
}

impl GrowthClass {
    /// `Polynomial(c, 0)` means the same thing as `Bounded(c)`; fold it.
    pub fn normalized(self) -> Self {
        match self {
            GrowthClass::Polynomial { c, d: 0 } => GrowthClass::Bounded { m: c },
            other => other,
        }
    }

    /// The bound on `|p_k|`, if one is known.
    pub fn bound_at(self, k: u64) -> Option<f64> {
        match self {
            GrowthClass::Bounded { m } => Some(m),
            GrowthClass::Polynomial { c, d } => Some(c * (k.max(1) as f64).powi(d as i32)),
            GrowthClass::Unknown => None,
        }
    }

    pub fn is_bounded(self) -> bool {
        matches!(self.normalized(), GrowthClass::Bounded { .. })
    }

    pub fn is_known(self) -> bool {
        !matches!(self, GrowthClass::Unknown)
    }

    /// `(c, d)` such that `|p_k| <= c * max(k,1)^d`.
    pub(crate) fn as_polynomial(self) -> Option<(f64, u32)> {
        match self {
            GrowthClass::Bounded { m } => Some((m, 0)),
            GrowthClass::Polynomial { c, d } => Some((c, d)),
            GrowthClass::Unknown => None,
        }
    }
}

impl fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthClass::Bounded { m } => write!(f, "bounded({m})"),
            GrowthClass::Polynomial { c, d } => write!(f, "polynomial({c}, {d})"),
            GrowthClass::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{label}: term {k} is not finite ({value})")]
    NonFinite { label: String, k: u64, value: f64 },
    #[error("{label}: term {k}: {message}")]
    Domain {
        label: String,
        k: u64,
        message: String,
    },
    #[error("{label}: term {k} = {value} violates declared growth {growth}")]
    GrowthViolation {
        label: String,
        k: u64,
        value: f64,
        growth: GrowthClass,
    },
    #[error("{label}: index {k} is past the end (length {len})")]
    OutOfRange { label: String, k: u64, len: u64 },
}

impl EvalError {
    /// Index of the offending term.
    pub fn index(&self) -> u64 {
        match self {
            EvalError::NonFinite { k, .. }
            | EvalError::Domain { k, .. }
            | EvalError::GrowthViolation { k, .. }
            | EvalError::OutOfRange { k, .. } => *k,
        }
    }
}

/// Index sets outside of which a sparse sequence is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// `0, 1, 4, 9, ...`
    Squares,
    /// `1, 2, 4, 8, ...`
    PowersOfTwo,
}

impl Support {
    /// Support indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = u64> {
        let limit = match self {
            Support::Squares => u64::from(u32::MAX),
            Support::PowersOfTwo => 63,
        };
        (0..=limit).map(move |i| match self {
            Support::Squares => i * i,
            Support::PowersOfTwo => 1u64 << i,
        })
    }

    /// Number of support indices in `[1, n]`.
    pub fn count_up_to(self, n: u64) -> u64 {
        match self {
            Support::Squares => n.isqrt(),
            Support::PowersOfTwo if n == 0 => 0,
            Support::PowersOfTwo => u64::from(n.ilog2()) + 1,
        }
    }
}

enum Kind {
    Family(FamilyTerms),
    Map { f: FunctionSpec, base: Sequence },
    Linear(Vec<(f64, Sequence)>),
    Finite(Vec<f64>),
}

struct Inner {
    label: String,
    growth: GrowthClass,
    spec: Option<SequenceSpec>,
    support: Option<Support>,
    kind: Kind,
}

/// A lazily evaluated real sequence `(p_k)_{k >= 0}`.
#[derive(Clone)]
pub struct Sequence {
    inner: Arc<Inner>,
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sequence")
            .field("label", &self.inner.label)
            .field("growth", &self.inner.growth)
            .finish()
    }
}

impl Sequence {
    pub fn from_spec(spec: &SequenceSpec) -> Sequence {
        let (terms, growth, support) = FamilyTerms::new(spec);
        Sequence {
            inner: Arc::new(Inner {
                label: spec.to_string(),
                growth: growth.normalized(),
                spec: Some(spec.clone()),
                support,
                kind: Kind::Family(terms),
            }),
        }
    }

    /// Parse a DSL string and build the sequence.
    pub fn parse(text: &str) -> Result<Sequence, SpecError> {
        SequenceSpec::parse(text).map(|s| Sequence::from_spec(&s))
    }

    /// Finite sequence of explicit values; growth is unknown.
    pub fn finite(label: impl Into<String>, values: Vec<f64>) -> Result<Sequence, EvalError> {
        let label = label.into();
        if let Some((k, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(EvalError::NonFinite {
                label,
                k: k as u64,
                value,
            });
        }
        Ok(Sequence {
            inner: Arc::new(Inner {
                label,
                growth: GrowthClass::Unknown,
                spec: None,
                support: None,
                kind: Kind::Finite(values),
            }),
        })
    }

    /// The image sequence `(f(p_k))`.
    pub fn map(f: &FunctionSpec, base: &Sequence) -> Sequence {
        let growth = f.image_growth(base.growth()).normalized();
        let support = base
            .support()
            .filter(|_| matches!(f.eval(0.0), Ok(v) if v == 0.0));
        Sequence {
            inner: Arc::new(Inner {
                label: format!("map({f}; {})", base.label()),
                growth,
                spec: None,
                support,
                kind: Kind::Map {
                    f: f.clone(),
                    base: base.clone(),
                },
            }),
        }
    }

    /// Pointwise linear combination `sum alpha_i * s_i`.
    pub fn linear(parts: &[(f64, Sequence)]) -> Sequence {
        let mut growth = Some((0.0f64, 0u32));
        for (alpha, s) in parts {
            growth = match (growth, s.growth().as_polynomial()) {
                (Some((c, d)), Some((ci, di))) => Some((c + alpha.abs() * ci, d.max(di))),
                _ => None,
            };
        }
        let growth = match growth {
            // Leave room for rounding in the weighted sum.
            Some((c, d)) => GrowthClass::Polynomial {
                c: c * (1.0 + 1e-12) + f64::MIN_POSITIVE,
                d,
            }
            .normalized(),
            None => GrowthClass::Unknown,
        };
        let label = parts
            .iter()
            .map(|(a, s)| format!("{a}*{}", s.label()))
            .collect::<Vec<_>>()
            .join(" + ");
        Sequence {
            inner: Arc::new(Inner {
                label,
                growth,
                spec: None,
                support: None,
                kind: Kind::Linear(parts.to_vec()),
            }),
        }
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn growth(&self) -> GrowthClass {
        self.inner.growth
    }

    /// The family spec, for catalog sequences.
    pub fn spec(&self) -> Option<&SequenceSpec> {
        self.inner.spec.as_ref()
    }

    /// Number of terms for finite sequences; `None` means infinite.
    pub fn len(&self) -> Option<u64> {
        match &self.inner.kind {
            Kind::Finite(v) => Some(v.len() as u64),
            Kind::Map { base, .. } => base.len(),
            Kind::Linear(parts) => parts.iter().filter_map(|(_, s)| s.len()).min(),
            Kind::Family(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Index set outside of which every term is exactly zero, when known.
    pub fn support(&self) -> Option<Support> {
        self.inner.support
    }

    pub fn term(&self, k: u64) -> Result<f64, EvalError> {
        let v = match &self.inner.kind {
            Kind::Family(t) => t.term(k),
            Kind::Map { f, base } => {
                let x = base.term(k)?;
                f.eval(x).map_err(|e| self.domain_error(k, e.to_string()))?
            }
            Kind::Linear(parts) => {
                let mut acc = 0.0;
                for (alpha, s) in parts {
                    acc += alpha * s.term(k)?;
                }
                acc
            }
            Kind::Finite(values) => match values.get(k as usize) {
                Some(&v) => v,
                None => return Err(self.out_of_range(k)),
            },
        };
        self.check(k, v)
    }

    /// Write `p_start, p_{start+1}, ...` into `out`. Produces exactly the
    /// values `term` would.
    pub fn fill(&self, start: u64, out: &mut [f64]) -> Result<(), EvalError> {
        match &self.inner.kind {
            Kind::Family(t) => t.fill(start, out),
            Kind::Map { f, base } => {
                base.fill(start, out)?;
                for (i, v) in out.iter_mut().enumerate() {
                    *v = f
                        .eval(*v)
                        .map_err(|e| self.domain_error(start + i as u64, e.to_string()))?;
                }
            }
            Kind::Linear(parts) => {
                out.fill(0.0);
                let mut buf = vec![0.0; out.len()];
                for (alpha, s) in parts {
                    s.fill(start, &mut buf)?;
                    for (o, b) in out.iter_mut().zip(&buf) {
                        *o += alpha * b;
                    }
                }
            }
            Kind::Finite(values) => {
                let end = start.saturating_add(out.len() as u64);
                if end > values.len() as u64 {
                    return Err(self.out_of_range(end.max(1) - 1));
                }
                out.copy_from_slice(&values[start as usize..end as usize]);
            }
        }
        for (i, &v) in out.iter().enumerate() {
            self.check(start + i as u64, v)?;
        }
        Ok(())
    }

    /// First `n` terms.
    pub fn prefix(&self, n: usize) -> Result<Vec<f64>, EvalError> {
        let mut out = vec![0.0; n];
        self.fill(0, &mut out)?;
        Ok(out)
    }

    fn check(&self, k: u64, v: f64) -> Result<f64, EvalError> {
        if !v.is_finite() {
            return Err(EvalError::NonFinite {
                label: self.inner.label.clone(),
                k,
                value: v,
            });
        }
        if let GrowthClass::Bounded { m } = self.inner.growth {
            if v.abs() > m {
                return Err(EvalError::GrowthViolation {
                    label: self.inner.label.clone(),
                    k,
                    value: v,
                    growth: self.inner.growth,
                });
            }
        }
        Ok(v)
    }

    fn domain_error(&self, k: u64, message: String) -> EvalError {
        EvalError::Domain {
            label: self.inner.label.clone(),
            k,
            message,
        }
    }

    fn out_of_range(&self, k: u64) -> EvalError {
        EvalError::OutOfRange {
            label: self.inner.label.clone(),
            k,
            len: self.len().unwrap_or(0),
        }
    }
}
