//! Entropy-optimal random variate generation from fair coin flips.
//!
//! Everything in this crate runs on the *random bit model*: the only source of
//! randomness is a stream of independent fair bits, and the cost of a sampling
//! procedure is the number of bits it consumes. Within that model the crate
//! provides:
//!
//! - **Exact discrete sampling** ([`discrete`]): the Knuth–Yao tree walk and
//!   the Han–Hoshi interval algorithm, both of which emit a requested discrete
//!   distribution *exactly* (no floating-point approximation of the
//!   probabilities) while consuming a number of bits within an additive
//!   constant of the distribution's binary entropy. Both samplers report the
//!   exit leaf they terminated through, which is what makes bit recycling
//!   possible.
//! - **ε-precision continuous sampling** ([`continuous`]): quantile inversion
//!   driven by exact interval arithmetic, a one-dimensional partition sampler,
//!   exponential sampling by two routes (inversion and a Bernoulli
//!   convolution), a two-piece Maxwell sampler, and a Box–Müller style normal
//!   pair. Each sampler couples its output to the target variable within ε
//!   almost surely.
//! - **Randomness extraction and recycling** ([`extract`]): the nested-interval
//!   extractor that converts (symbol, exit leaf) pairs back into fair bits, and
//!   the batch engine that carries the unconsumed randomness of each draw into
//!   the next one exactly, so the amortized fresh-bit cost approaches the
//!   entropy of the target law while the outputs keep the target law exactly.
//! - **Information-theoretic bounds** ([`bounds`]): the 𝓔(f) + d·log2(1/ε) −
//!   log2 V_{d,p} lower bound on the expected bit cost of any ε-accurate
//!   sampler, partition entropies, and a small differential-entropy catalog,
//!   all enclosure-backed.
//! - **Exact numerics** ([`exact`]): dyadic intervals, binary digit oracles for
//!   probabilities, and computable-real enclosures (exp, ln, sqrt, sin, cos,
//!   π), so that every comparison made by the samplers is decided exactly
//!   rather than by floating point.
//! - **A benchmark harness** ([`bench`] and the `coinflow` binary): seeded,
//!   parallel, deterministic measurement of empirical bit costs against the
//!   theoretical bounds, extractor statistics, and batch convergence, with CSV
//!   and JSON reports.
//!
//! # Quick start
//!
//! Sample a discrete law exactly and check the cost against its entropy:
//!
//! ```
//! use coinflow::source::{BitSource, SeededSource};
//! use coinflow::discrete::{DiscreteDistribution, ky_sample};
//!
//! let dist = DiscreteDistribution::from_rationals(&[(1, 2), (1, 4), (1, 4)]).unwrap();
//! let mut src = SeededSource::from_seed(0xC0FFEE);
//! let outcome = ky_sample(&dist, &mut src).unwrap();
//! assert!((1..=3).contains(&outcome.value));
//! assert_eq!(outcome.bits_used, src.consumed());
//! ```
//!
//! Draw an exponential variate to accuracy 2⁻¹²:
//!
//! ```
//! use coinflow::source::SeededSource;
//! use coinflow::exact::Dyadic;
//! use coinflow::continuous::{exp_sample, ExpRoute};
//!
//! let eps = Dyadic::one_half_pow(12); // 2^-12
//! let mut src = SeededSource::from_seed(7);
//! let s = exp_sample(&eps, &mut src, ExpRoute::Inversion).unwrap();
//! assert!(s.y.to_f64() >= 0.0);
//! ```
//!
//! The `coinflow` binary exposes the same machinery as subcommands:
//! `sample`, `bench`, `extract-test`, `batch-bench`, and `bounds`. Run
//! `coinflow --help` or see the examples directory for walkthroughs.
//!
//! # Exactness policy
//!
//! Discrete samplers never approximate: a distribution is specified by exact
//! rationals (or exact built-in constants such as the geometric law with
//! parameter 1/e), binary expansion digits are produced by long division or by
//! refining real enclosures until the digit is unambiguous, and interval
//! comparisons against cumulative boundaries are decided exactly. Continuous
//! samplers return dyadic rationals whose distance to the coupled target
//! variable is at most ε almost surely; the stopping rules are evaluated
//! conservatively through enclosures so the guarantee survives finite
//! precision.

#![forbid(unsafe_code)]
#![warn(missing_docs, missing_debug_implementations, rust_2018_idioms)]

pub mod bench;
pub mod bounds;
pub mod continuous;
pub mod discrete;
pub mod exact;
pub mod extract;
pub mod source;
