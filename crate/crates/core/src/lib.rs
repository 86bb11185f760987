//! Smith normal forms of integer matrix powers.
//!
//! For a square integer matrix `A` the Smith forms `S_n` of the powers `A^n`
//! satisfy `S_{n+1} = D_n S_n` for an eventually periodic sequence of diagonal
//! integer matrices `D_n`. This crate computes all of those objects exactly and
//! checks the identities that surround them:
//!
//! * [`exactmat`]: arbitrary-precision matrices, powers, compound matrices,
//!   entry gcd and p-adic valuation.
//! * [`smith`]: Smith normal form by elimination, determinantal divisors and
//!   per-prime localization.
//! * [`seqlab`]: eventually periodic sequences, their combinators and an
//!   empirical `(n0, T)` detector.
//! * [`powertrace`]: the `S_n` / `D_n` pipeline, gcd ratios and the valuation
//!   decomposition `ν_p(A^n) = a·n + h(n)`.
//! * [`ntkit`]: scalar valuations, Newton polygons, Kummer carries and related
//!   helpers.
//! * [`gen`]: instance families with closed-form Smith forms.
//! * [`selftest`]: the acceptance suites, shared by the test target and the CLI.

pub mod error;
pub mod exactmat;
pub mod gen;
pub mod ntkit;
pub mod powertrace;
pub mod selftest;
pub mod seqlab;
pub mod smith;

mod decimal;

pub use error::{Error, Result};
pub use exactmat::{ExtendedNat, IntMatrix};
pub use ntkit::Prime;
pub use seqlab::{FiniteSeq, PeriodReport, PeriodStatus, SeqValue};
pub use smith::{DeterminantalDivisors, SmithForm};

/// Exact rationals used for slopes and sequence samples.
pub type Rational = num_rational::BigRational;
