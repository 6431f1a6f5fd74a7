//! Exact numerics: dyadic rationals, computable-real enclosures, and lazy
//! binary expansions of probabilities.
//!
//! Everything in the sampling paths is built on these three types, so that
//! every emitted digit and every accept/reject decision is provably correct:
//!
//! * [`Dyadic`] / [`DyadicInterval`] — exact numbers `m·2^e` and the
//!   half-open intervals a prefix of coin flips pins a uniform variable to.
//! * [`Real`] / [`RealEnclosure`] — computable reals queried at any
//!   precision, returning certified dyadic bounds (interval series kernels
//!   for exp, ln, sqrt, sin, cos, π, ln 2 — no floating point).
//! * [`ProbabilityExpansion`] — binary digits of probabilities, produced
//!   lazily from dyadics, rationals, or computable reals.

pub mod dyadic;
pub mod expansion;
pub mod real;

pub use dyadic::{Dyadic, DyadicInterval, Round};
pub use expansion::{
    expansion_digit, DigitUndecidable, ProbabilityExpansion, DEFAULT_DIGIT_BUDGET,
};
pub use real::{
    interval_inside, ln2_enclosure, ln2_real, pi_enclosure, pi_real, Real, RealEnclosure,
    RefineBudgetExceeded, TriState,
};
