//! Summability diagnostics for real sequences.
//!
//! The crate evaluates Abel means `(1 - x) * sum p_k x^k` with certified
//! truncation budgets, Cesàro `(C,1)` means, statistical and lacunary
//! statistical densities, and slow-oscillation window maxima. On top of those
//! methods, [`probes`] runs executable experiments: refuting Abel continuity of
//! a function on a fixed battery of sequences, building sequences with a
//! prescribed Abel limit, and detecting unbounded spike subsequences.
//!
//! Sequences are lazy ([`Sequence`]) and are usually built from the small text
//! DSL understood by [`SequenceSpec::parse`]:
//!
//! ```
//! use summatau::{abel, SequenceSpec, Sequence, Status, ToleranceProfile};
//!
//! let spec = SequenceSpec::parse("alternating(c=1)").unwrap();
//! let seq = Sequence::from_spec(&spec);
//! let verdict = abel::abel_limit(&seq, &ToleranceProfile::default()).unwrap();
//! match verdict.status {
//!     Status::Converged { limit, .. } => assert!(limit.abs() < 1e-4),
//!     other => panic!("unexpected {other:?}"),
//! }
//! ```

pub mod abel;
pub mod cesaro;
pub mod cli;
pub mod function;
pub mod oscillation;
pub mod probes;
pub mod profile;
pub mod report;
pub mod sequence;
pub mod statistical;
pub mod summation;
pub mod verdict;

mod error;
mod grid;
mod parse;

pub use error::{Error, Result};
pub use function::FunctionSpec;
pub use parse::ParseError;
pub use profile::ToleranceProfile;
pub use sequence::{EvalError, Family, GrowthClass, Sequence, SequenceSpec, SpecError};
pub use verdict::{Status, Verdict};
