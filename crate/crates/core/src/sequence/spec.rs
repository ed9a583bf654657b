//! Catalog of sequence families and the `name(arg=value, ...)` text DSL.

use std::fmt;

use thiserror::Error;

use crate::parse::{fmt_real, ParseError, Scanner};

/// Built-in sequence families. Terms are indexed from `k = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `p_k = c`
    Constant,
    /// `p_k = c (-1)^k`
    Alternating,
    /// `p_k = limit + (-1)^k (k+1)^-rate`
    Convergent,
    /// `p_k = limit + 1 / ln(k+2)`
    ConvergentSlow,
    /// `p_k = sum_{j=1}^{k} 1/j`, `p_0 = 0`
    HarmonicLog,
    /// `p_k = 1` when `k` is a perfect square (including 0), else 0
    SquareIndicator,
    /// `p_k = 2^(j beta)` when `k = 2^j`, else 0
    LacunarySpike,
    /// period-1000 `±1` pattern with `round(1000 rho)` plus signs per period
    Pm1Pattern,
    /// `p_k = sin(ln(k+1))`
    LogOscillator,
    /// `p_k = 2^j` when `k = 2^j`, else 0
    GeometricSpike,
    /// i.i.d. uniform on `[-m, m]`, ChaCha8 stream keyed by `seed`
    BoundedRandom,
    /// `p_k = k`
    Ramp,
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Constant,
        Family::Alternating,
        Family::Convergent,
        Family::ConvergentSlow,
        Family::HarmonicLog,
        Family::SquareIndicator,
        Family::LacunarySpike,
        Family::Pm1Pattern,
        Family::LogOscillator,
        Family::GeometricSpike,
        Family::BoundedRandom,
        Family::Ramp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::Alternating => "alternating",
            Family::Convergent => "convergent",
            Family::ConvergentSlow => "convergent_slow",
            Family::HarmonicLog => "harmonic_log",
            Family::SquareIndicator => "square_indicator",
            Family::LacunarySpike => "lacunary_spike",
            Family::Pm1Pattern => "pm1_pattern",
            Family::LogOscillator => "log_oscillator",
            Family::GeometricSpike => "geometric_spike",
            Family::BoundedRandom => "bounded_random",
            Family::Ramp => "ramp",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Real-valued parameter names in canonical order.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            Family::Constant | Family::Alternating => &["c"],
            Family::Convergent => &["limit", "rate"],
            Family::ConvergentSlow => &["limit"],
            Family::LacunarySpike => &["beta"],
            Family::Pm1Pattern => &["rho"],
            Family::BoundedRandom => &["m"],
            Family::HarmonicLog
            | Family::SquareIndicator
            | Family::LogOscillator
            | Family::GeometricSpike
            | Family::Ramp => &[],
        }
    }

    pub fn is_random(self) -> bool {
        self == Family::BoundedRandom
    }

    fn check_param(self, param: &str, value: f64) -> Result<(), String> {
        if !value.is_finite() {
            return Err("must be finite".into());
        }
        match (self, param) {
            (Family::Convergent, "rate") if value <= 0.0 => Err("must be > 0".into()),
            (Family::LacunarySpike, "beta") if !(0.0..=16.0).contains(&value) => {
                Err("must lie in [0, 16]".into())
            }
            (Family::Pm1Pattern, "rho") if !(0.0..=1.0).contains(&value) => {
                Err("must lie in [0, 1]".into())
            }
            (Family::BoundedRandom, "m") if value < 0.0 => Err("must be >= 0".into()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("syntax error: {0}")]
    Syntax(#[from] ParseError),
    #[error("unknown family '{name}' at offset {offset}")]
    UnknownFamily { name: String, offset: usize },
    #[error("{family}: missing parameter '{param}'")]
    MissingParam { family: Family, param: &'static str },
    #[error("{family}: unexpected parameter '{param}' at offset {offset}")]
    UnexpectedParam {
        family: Family,
        param: String,
        offset: usize,
    },
    #[error("{family}: parameter '{param}' given twice at offset {offset}")]
    DuplicateParam {
        family: Family,
        param: String,
        offset: usize,
    },
    #[error("{family}: parameter '{param}' {reason}")]
    BadValue {
        family: Family,
        param: String,
        reason: String,
    },
}

impl SpecError {
    /// Byte offset of the problem, when the error came from parsing text.
    pub fn offset(&self) -> Option<usize> {
        match self {
            SpecError::Syntax(e) => Some(e.offset),
            SpecError::UnknownFamily { offset, .. }
            | SpecError::UnexpectedParam { offset, .. }
            | SpecError::DuplicateParam { offset, .. } => Some(*offset),
            SpecError::MissingParam { .. } | SpecError::BadValue { .. } => None,
        }
    }
}

/// A validated family instance: tag, parameters and optional seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    family: Family,
    values: Vec<f64>,
    seed: Option<u64>,
}

impl SequenceSpec {
    /// Build from named parameters; order does not matter.
    pub fn new(family: Family, params: &[(&str, f64)]) -> Result<Self, SpecError> {
        let mut values = Vec::with_capacity(family.params().len());
        for &name in family.params() {
            let mut hits = params.iter().filter(|(p, _)| *p == name);
            let Some(&(_, v)) = hits.next() else {
                return Err(SpecError::MissingParam {
                    family,
                    param: name,
                });
            };
            if hits.next().is_some() {
                return Err(SpecError::DuplicateParam {
                    family,
                    param: name.to_string(),
                    offset: 0,
                });
            }
            family
                .check_param(name, v)
                .map_err(|reason| SpecError::BadValue {
                    family,
                    param: name.to_string(),
                    reason,
                })?;
            values.push(v);
        }
        if let Some((p, _)) = params.iter().find(|(p, _)| !family.params().contains(p)) {
            return Err(SpecError::UnexpectedParam {
                family,
                param: p.to_string(),
                offset: 0,
            });
        }
        Ok(Self {
            family,
            values,
            seed: None,
        })
    }

    /// Shorthand for families without parameters.
    pub fn bare(family: Family) -> Result<Self, SpecError> {
        Self::new(family, &[])
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        if self.family.is_random() {
            self.seed = Some(seed);
        }
        self
    }

    /// Fill in `seed` for random families that did not specify one.
    pub fn with_default_seed(self, seed: u64) -> Self {
        match self.seed {
            Some(_) => self,
            None => self.with_seed(seed),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.family
            .params()
            .iter()
            .position(|p| *p == name)
            .map(|i| self.values[i])
    }

    pub fn params(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.family
            .params()
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    /// Parse `name(arg=value, ...)`. Parentheses may be omitted for families
    /// without parameters.
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut sc = Scanner::new(text);
        let (name_off, name) = sc.ident().ok_or_else(|| sc.unexpected("family name"))?;
        let family = Family::from_name(name).ok_or_else(|| SpecError::UnknownFamily {
            name: name.to_string(),
            offset: name_off,
        })?;

        let mut args: Vec<(usize, &str, usize, &str)> = Vec::new();
        if sc.eat(b'(') && !sc.eat(b')') {
            loop {
                let (arg_off, arg) = sc.ident().ok_or_else(|| sc.unexpected("parameter name"))?;
                sc.expect(b'=', "'='")?;
                let (num_off, num) = sc.number(true).ok_or_else(|| sc.unexpected("number"))?;
                args.push((arg_off, arg, num_off, num));
                if sc.eat(b')') {
                    break;
                }
                sc.expect(b',', "',' or ')'")?;
            }
        }
        if !sc.at_end() {
            return Err(sc.unexpected("end of input").into());
        }

        let mut seed = None;
        let mut named: Vec<(&str, f64)> = Vec::new();
        for &(arg_off, arg, num_off, num) in &args {
            if named.iter().any(|(n, _)| *n == arg) || (arg == "seed" && seed.is_some()) {
                return Err(SpecError::DuplicateParam {
                    family,
                    param: arg.to_string(),
                    offset: arg_off,
                });
            }
            if arg == "seed" && family.is_random() {
                let s = num.parse::<u64>().map_err(|_| {
                    ParseError::new(num_off, "seed must be an unsigned integer literal")
                })?;
                seed = Some(s);
                continue;
            }
            if !family.params().contains(&arg) {
                return Err(SpecError::UnexpectedParam {
                    family,
                    param: arg.to_string(),
                    offset: arg_off,
                });
            }
            let v = num
                .parse::<f64>()
                .map_err(|_| ParseError::new(num_off, format!("malformed number '{num}'")))?;
            named.push((arg, v));
        }
        let mut spec = Self::new(family, &named)?;
        spec.seed = seed;
        Ok(spec)
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.name())?;
        if self.values.is_empty() && self.seed.is_none() {
            return Ok(());
        }
        f.write_str("(")?;
        let mut first = true;
        for (name, v) in self.params() {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{name}={}", fmt_real(v))?;
        }
        if let Some(seed) = self.seed {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "seed={seed}")?;
        }
        f.write_str(")")
    }
}
