//! Arbitrary-precision sampling of continuous laws from fair coin flips.
//!
//! A continuous value cannot be emitted exactly, so every sampler here takes
//! an accuracy `ε` and guarantees the *pathwise* bound `|X − y| ≤ ε`, where
//! `X` is the exact variate determined by the (conceptually infinite) bit
//! sequence and `y` is the dyadic output. Feeding the same prefix of bits at
//! a smaller `ε` refines the same `X` — the output is a coupling, not merely
//! a distributional approximation.
//!
//! The workhorse is [`invert_eps`]: CDF inversion through a
//! [`QuantileOracle`] that evaluates `F^{-1}` on dyadic arguments with
//! certified enclosures. On top of it sit the law-specific samplers:
//! [`exp_sample`] (four routes, see [`ExpRoute`]), [`maxwell_sample`], and
//! [`normal_pair`] (a fully rigorous Box–Müller synthesis that consumes no
//! irrational arithmetic shortcuts — radius and angle are both produced to
//! certified accuracy).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::discrete::{
    hh_sample, ky_sample, DiscreteDistribution, SampleError,
};
use crate::exact::{
    pi_real, DigitUndecidable, Dyadic, DyadicInterval, ProbabilityExpansion, Real,
    RealEnclosure, DEFAULT_DIGIT_BUDGET,
};
use crate::source::{BitSource, SourceError};

/// Cap on first-differing-digit Bernoulli comparisons; reached only when the
/// uniform bits reproduce the probability's expansion digit-for-digit.
pub const BERNOULLI_DEPTH_CAP: u32 = 4096;

/// Largest digit-block size accepted by the joint Knuth–Yao convolution
/// route (the block distribution has `2^k` atoms).
pub const JOINT_BLOCK_MAX_DIGITS: u32 = 16;

/// Error during continuous sampling.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContinuousError {
    /// The bit source failed (e.g. a replay tape ran out).
    #[error(transparent)]
    Source(#[from] SourceError),
    /// A probability digit could not be decided.
    #[error(transparent)]
    Digit(#[from] DigitUndecidable),
    /// An embedded discrete draw failed.
    #[error(transparent)]
    Discrete(#[from] SampleError),
    /// Quantile inversion did not reach the requested accuracy within its
    /// bit budget (possible only on adversarial replay tapes).
    #[error("quantile inversion did not terminate within {bits} bits")]
    QuantileBudgetExceeded {
        /// The budget that was exhausted.
        bits: u64,
    },
    /// A Bernoulli digit comparison ran past its depth cap.
    #[error("Bernoulli comparison exceeded {cap} digits")]
    DepthCapExceeded {
        /// The cap that was hit.
        cap: u32,
    },
    /// The requested accuracy needs a digit block larger than the joint
    /// Knuth–Yao route supports.
    #[error("joint digit block of {digits} digits exceeds the supported maximum of {max}")]
    JointBlockTooLarge {
        /// Digits the accuracy would require.
        digits: u32,
        /// Supported maximum.
        max: u32,
    },
    /// `ε` must be strictly positive.
    #[error("epsilon must be strictly positive")]
    NonpositiveEpsilon,
}

/// A quantile value: either a certified enclosure or an infinite tail.
#[derive(Debug, Clone)]
pub enum QuantileValue {
    /// Finite value with a certified enclosure.
    Finite(RealEnclosure),
    /// The quantile diverges to `-∞` at this argument.
    NegInfinite,
    /// The quantile diverges to `+∞` at this argument.
    PosInfinite,
}

/// Evaluates an inverse CDF `F^{-1}` on exact dyadic arguments in `[0, 1]`.
///
/// Contract: `eval(u, k)` returns an enclosure of `F^{-1}(u)` of width at
/// most `2^{-k}` (or the infinite classification), and `F^{-1}` must be
/// nondecreasing. [`invert_eps`] drives the oracle with a shrinking uniform
/// interval; monotonicity is what lets the two endpoint images bracket the
/// exact variate.
pub struct QuantileOracle {
    eval: Box<dyn Fn(&Dyadic, u32) -> QuantileValue + Send + Sync>,
}

impl fmt::Debug for QuantileOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("QuantileOracle")
    }
}

impl QuantileOracle {
    /// Wrap an inverse-CDF evaluator. See the type-level contract.
    pub fn new(
        eval: impl Fn(&Dyadic, u32) -> QuantileValue + Send + Sync + 'static,
    ) -> Self {
        QuantileOracle { eval: Box::new(eval) }
    }

    /// Evaluate `F^{-1}(u)` to width `≤ 2^{-k}`.
    pub fn eval(&self, u: &Dyadic, k: u32) -> QuantileValue {
        (self.eval)(u, k)
    }

    /// Uniform on `[0, 1)`: `F^{-1}(u) = u`, exactly.
    pub fn uniform() -> Self {
        Self::new(|u, _| QuantileValue::Finite(RealEnclosure::point(u.clone())))
    }

    /// Unit exponential: `F^{-1}(u) = −ln(1−u)`; diverges at `u = 1`.
    pub fn exponential() -> Self {
        Self::new(|u, k| {
            if u.is_zero() {
                return QuantileValue::Finite(RealEnclosure::point(Dyadic::zero()));
            }
            if *u == Dyadic::one() {
                return QuantileValue::PosInfinite;
            }
            let r = Real::constant(Dyadic::one().sub(u)).ln().neg();
            QuantileValue::Finite(r.enclose(k))
        })
    }

    /// Unit exponential conditioned on `[0, 1)`:
    /// `F^{-1}(u) = −ln(1 − u(1−e^{-1}))`. Bounded, with `F^{-1}(1) = 1`.
    pub fn truncated_exponential() -> Self {
        Self::new(|u, k| {
            if u.is_zero() {
                return QuantileValue::Finite(RealEnclosure::point(Dyadic::zero()));
            }
            if *u == Dyadic::one() {
                return QuantileValue::Finite(RealEnclosure::point(Dyadic::one()));
            }
            let arg = one_minus_inv_e().mul_dyadic(u).neg().add_dyadic(&Dyadic::one());
            QuantileValue::Finite(arg.ln().neg().enclose(k))
        })
    }

    /// Left Maxwell piece: the radius law with density `x·e^{-x²/2}`
    /// conditioned on `[0, 1]`, via `F^{-1}(v) = √(−2·ln(1 − v·C))` with
    /// `C = 1 − e^{-1/2}` the piece's mass.
    pub fn maxwell_left() -> Self {
        Self::new(|v, k| {
            if v.is_zero() {
                return QuantileValue::Finite(RealEnclosure::point(Dyadic::zero()));
            }
            if *v == Dyadic::one() {
                // √(−2·ln e^{-1/2}) = 1 exactly.
                return QuantileValue::Finite(RealEnclosure::point(Dyadic::one()));
            }
            let arg = maxwell_split_real().mul_dyadic(v).neg().add_dyadic(&Dyadic::one());
            let r = arg.ln().mul_dyadic(&Dyadic::from_int(-2)).sqrt();
            QuantileValue::Finite(r.enclose(k))
        })
    }

    /// Right Maxwell piece: the same radius law conditioned on `[1, ∞)`,
    /// via `F^{-1}(v) = √(1 − 2·ln(1−v))`; diverges at `v = 1`.
    pub fn maxwell_right() -> Self {
        Self::new(|v, k| {
            if v.is_zero() {
                return QuantileValue::Finite(RealEnclosure::point(Dyadic::one()));
            }
            if *v == Dyadic::one() {
                return QuantileValue::PosInfinite;
            }
            let r = Real::constant(Dyadic::one().sub(v))
                .ln()
                .mul_dyadic(&Dyadic::from_int(-2))
                .add_dyadic(&Dyadic::one())
                .sqrt();
            QuantileValue::Finite(r.enclose(k))
        })
    }
}

/// One `ε`-accurate continuous sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonSample {
    /// Dyadic output with `|X − y| ≤ ε` pathwise.
    pub y: Dyadic,
    /// Bits consumed from the source.
    pub bits_used: u64,
    /// The accuracy this sample was produced at.
    pub epsilon: Dyadic,
}

/// One grid-cell sample from [`partition_sample_1d`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSample {
    /// Index `m` of the cell `[2εm, 2ε(m+1))` containing the variate.
    pub index: BigInt,
    /// Cell center `2εm + ε` (so `|X − center| < ε`).
    pub center: Dyadic,
    /// Bits consumed from the source.
    pub bits_used: u64,
    /// Half-width of the cells.
    pub epsilon: Dyadic,
}

/// Enclosure precision used for quantile evaluations at accuracy `eps`:
/// width ≤ `eps/64`.
fn eval_precision(eps: &Dyadic) -> u32 {
    ((-eps.floor_log2()).max(0) as u32) + 6
}

/// Number of fractional digits needed so that `2^{-k} ≤ eps`.
fn frac_digit_count(eps: &Dyadic) -> u32 {
    (-eps.floor_log2()).max(0) as u32
}

fn check_eps(eps: &Dyadic) -> Result<(), ContinuousError> {
    if eps.is_positive() {
        Ok(())
    } else {
        Err(ContinuousError::NonpositiveEpsilon)
    }
}

/// Sample `X = F^{-1}(U)` to accuracy `ε` by refining the uniform `U` one
/// bit at a time.
///
/// Before each read, the current uniform interval's endpoint images are
/// compared: once the spanned output range `[lo, hi]` has `hi − lo ≤ 2ε`,
/// its midpoint `y` satisfies `|X − y| ≤ ε` for *every* continuation of the
/// bit sequence. Zero-bit returns happen whenever the law's full range
/// already fits (e.g. uniform with `ε ≥ 1/2`).
pub fn invert_eps<S: BitSource>(
    oracle: &QuantileOracle,
    eps: &Dyadic,
    src: &mut S,
) -> Result<EpsilonSample, ContinuousError> {
    check_eps(eps)?;
    let start = src.consumed();
    let k_eval = eval_precision(eps);
    let budget = 8 * (u64::from(k_eval) + 8) + 128;
    let two_eps = eps.mul_pow2(1);
    let mut interval = DyadicInterval::unit();
    let mut a = oracle.eval(&interval.lo_dyadic(), k_eval);
    let mut b = oracle.eval(&interval.hi_dyadic(), k_eval);
    loop {
        if let (QuantileValue::Finite(ea), QuantileValue::Finite(eb)) = (&a, &b) {
            let lo = ea.lo();
            let hi = eb.hi();
            if hi.sub(lo) <= two_eps {
                return Ok(EpsilonSample {
                    y: lo.add(hi).mul_pow2(-1),
                    bits_used: src.consumed() - start,
                    epsilon: eps.clone(),
                });
            }
        }
        if src.consumed() - start >= budget {
            return Err(ContinuousError::QuantileBudgetExceeded { bits: budget });
        }
        let bit = src.next_bit()?;
        interval.refine_mut(bit);
        if bit == 0 {
            b = oracle.eval(&interval.hi_dyadic(), k_eval);
        } else {
            a = oracle.eval(&interval.lo_dyadic(), k_eval);
        }
    }
}

/// Exact floor of `a / b` for dyadics with `b > 0`.
fn floor_div_dyadic(a: &Dyadic, b: &Dyadic) -> BigInt {
    use num_integer::Integer;
    let (ea, eb) = (a.exponent(), b.exponent());
    if ea >= eb {
        let na: BigInt = a.mantissa() << (ea - eb) as usize;
        na.div_floor(b.mantissa())
    } else {
        let nb: BigInt = b.mantissa() << (eb - ea) as usize;
        a.mantissa().div_floor(&nb)
    }
}

/// Locate the variate's cell in the uniform grid `{[2εm, 2ε(m+1))}` and
/// return the cell's center.
///
/// This is the partition analogue of [`invert_eps`]: instead of releasing a
/// midpoint, the sampler proves which fixed grid cell contains `X`, which is
/// the form a discretized output table wants. Costs the same bits up to the
/// alignment of cell boundaries.
pub fn partition_sample_1d<S: BitSource>(
    oracle: &QuantileOracle,
    eps: &Dyadic,
    src: &mut S,
) -> Result<PartitionSample, ContinuousError> {
    check_eps(eps)?;
    let start = src.consumed();
    let k_eval = eval_precision(eps);
    let budget = 8 * (u64::from(k_eval) + 8) + 128;
    let cell = eps.mul_pow2(1);
    let mut interval = DyadicInterval::unit();
    let mut a = oracle.eval(&interval.lo_dyadic(), k_eval);
    let mut b = oracle.eval(&interval.hi_dyadic(), k_eval);
    loop {
        if let (QuantileValue::Finite(ea), QuantileValue::Finite(eb)) = (&a, &b) {
            // X ∈ [A_lo, B_hi); the unique candidate cell is the one
            // containing A_lo.
            let m = floor_div_dyadic(ea.lo(), &cell);
            let grid_hi = Dyadic::new(cell.mantissa() * (&m + 1), cell.exponent());
            if *eb.hi() <= grid_hi {
                let center = Dyadic::new(
                    eps.mantissa() * (&m * 2 + 1),
                    eps.exponent(),
                );
                return Ok(PartitionSample {
                    index: m,
                    center,
                    bits_used: src.consumed() - start,
                    epsilon: eps.clone(),
                });
            }
        }
        if src.consumed() - start >= budget {
            return Err(ContinuousError::QuantileBudgetExceeded { bits: budget });
        }
        let bit = src.next_bit()?;
        interval.refine_mut(bit);
        if bit == 0 {
            b = oracle.eval(&interval.hi_dyadic(), k_eval);
        } else {
            a = oracle.eval(&interval.lo_dyadic(), k_eval);
        }
    }
}

/// Draw a Bernoulli(`p`) bit by comparing uniform bits against `p`'s binary
/// expansion; terminates at the first differing digit (2 expected bits).
///
/// Returns `(outcome, bits_used)` with `P(outcome = 1) = p` exactly.
pub fn bernoulli_sample<S: BitSource>(
    p: &ProbabilityExpansion,
    src: &mut S,
) -> Result<(u8, u64), ContinuousError> {
    let start = src.consumed();
    for j in 1..=BERNOULLI_DEPTH_CAP {
        let b = src.next_bit()?;
        let d = p.expansion_digit(j)?;
        if b != d {
            // U < p exactly when the first differing uniform digit is low.
            return Ok((u8::from(b < d), src.consumed() - start));
        }
    }
    Err(ContinuousError::DepthCapExceeded { cap: BERNOULLI_DEPTH_CAP })
}

/// `1 − e^{-1}`, shared handle.
fn one_minus_inv_e() -> Real {
    static CELL: OnceLock<Real> = OnceLock::new();
    CELL.get_or_init(|| {
        Real::constant(Dyadic::one()).sub(&Real::constant(Dyadic::from_int(-1)).exp())
    })
    .clone()
}

/// `C = 1 − e^{-1/2}`, the mass of the left Maxwell piece.
fn maxwell_split_real() -> Real {
    static CELL: OnceLock<Real> = OnceLock::new();
    CELL.get_or_init(|| {
        let neg_half = Dyadic::new(BigInt::from(-1), -1);
        Real::constant(Dyadic::one()).sub(&Real::constant(neg_half).exp())
    })
    .clone()
}

fn maxwell_split_expansion() -> &'static ProbabilityExpansion {
    static CELL: OnceLock<ProbabilityExpansion> = OnceLock::new();
    CELL.get_or_init(|| {
        ProbabilityExpansion::from_real(maxwell_split_real(), DEFAULT_DIGIT_BUDGET)
    })
}

/// Shared integer-part law (digit caches persist across draws).
fn geometric_shared() -> &'static DiscreteDistribution {
    static CELL: OnceLock<DiscreteDistribution> = OnceLock::new();
    CELL.get_or_init(DiscreteDistribution::geometric_one_over_e)
}

/// `P(digit_j = 1) = e^{-2^{-j}} / (1 + e^{-2^{-j}})` for the binary digits
/// of the exponential's fractional part — the digits are independent because
/// `e^{-x}` factorizes over them.
fn digit_prob(j: u32) -> ProbabilityExpansion {
    static TABLE: Mutex<Vec<ProbabilityExpansion>> = Mutex::new(Vec::new());
    let mut table = TABLE.lock().unwrap();
    while table.len() < j as usize {
        let jj = table.len() as u32 + 1;
        let t = Real::constant(Dyadic::one_half_pow(jj)).neg().exp();
        let p = t.div(&t.add_dyadic(&Dyadic::one()));
        table.push(ProbabilityExpansion::from_real(p, DEFAULT_DIGIT_BUDGET));
    }
    table[j as usize - 1].clone()
}

/// The `2^k`-atom joint law of the first `k` fractional digits, for the
/// single-walk Knuth–Yao convolution route. Cached per `k`.
fn joint_block(k: u32) -> Result<DiscreteDistribution, ContinuousError> {
    if k > JOINT_BLOCK_MAX_DIGITS {
        return Err(ContinuousError::JointBlockTooLarge {
            digits: k,
            max: JOINT_BLOCK_MAX_DIGITS,
        });
    }
    static CACHE: OnceLock<Mutex<HashMap<u32, DiscreteDistribution>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    if let Some(d) = map.get(&k) {
        return Ok(d.clone());
    }
    fn tree_mul(fs: &[Real]) -> Real {
        if fs.len() == 1 {
            fs[0].clone()
        } else {
            let mid = fs.len() / 2;
            tree_mul(&fs[..mid]).mul(&tree_mul(&fs[mid..]))
        }
    }
    let mut f1 = Vec::new();
    let mut f0 = Vec::new();
    for j in 1..=k {
        let t = Real::constant(Dyadic::one_half_pow(j)).neg().exp();
        let p = t.div(&t.add_dyadic(&Dyadic::one()));
        let q = Real::constant(Dyadic::one()).sub(&p);
        f1.push(p);
        f0.push(q);
    }
    let atoms: Vec<ProbabilityExpansion> = (0..(1u32 << k))
        .map(|i| {
            // Atom i encodes the digit block: bit (k-1-jj) of i is digit jj+1.
            let fs: Vec<Real> = (0..k)
                .map(|jj| {
                    if (i >> (k - 1 - jj)) & 1 == 1 {
                        f1[jj as usize].clone()
                    } else {
                        f0[jj as usize].clone()
                    }
                })
                .collect();
            ProbabilityExpansion::from_real(tree_mul(&fs), DEFAULT_DIGIT_BUDGET)
        })
        .collect();
    let dist = DiscreteDistribution::from_probability_expansions(atoms)
        .expect("digit-block probabilities sum to 1");
    map.insert(k, dist.clone());
    Ok(dist)
}

/// Integer part `⌊E⌋` of a unit exponential via the geometric law.
fn exponential_integer_part<S: BitSource>(src: &mut S) -> Result<i64, ContinuousError> {
    let out = hh_sample(geometric_shared(), src)?;
    Ok(out.value as i64 - 1)
}

/// Strategy for [`exp_sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpRoute {
    /// Direct CDF inversion of `−ln(1−u)`.
    Inversion,
    /// Geometric integer part + CDF inversion of the fractional part.
    SplitInversion,
    /// Geometric integer part + one Bernoulli per fractional digit.
    ConvolutionRaw,
    /// Geometric integer part + a single Knuth–Yao walk over the joint law
    /// of all fractional digits (saves ~1 bit per digit over the raw route).
    ConvolutionJointKy,
}

/// Sample a unit exponential to accuracy `ε`.
pub fn exp_sample<S: BitSource>(
    eps: &Dyadic,
    src: &mut S,
    route: ExpRoute,
) -> Result<EpsilonSample, ContinuousError> {
    check_eps(eps)?;
    let start = src.consumed();
    match route {
        ExpRoute::Inversion => invert_eps(&QuantileOracle::exponential(), eps, src),
        ExpRoute::SplitInversion => {
            let m = exponential_integer_part(src)?;
            let frac = invert_eps(&QuantileOracle::truncated_exponential(), eps, src)?;
            Ok(EpsilonSample {
                y: Dyadic::from_int(m).add(&frac.y),
                bits_used: src.consumed() - start,
                epsilon: eps.clone(),
            })
        }
        ExpRoute::ConvolutionRaw => {
            let m = exponential_integer_part(src)?;
            let k = frac_digit_count(eps);
            let mut frac = Dyadic::zero();
            for j in 1..=k {
                let (b, _) = bernoulli_sample(&digit_prob(j), src)?;
                if b == 1 {
                    frac = frac.add(&Dyadic::one_half_pow(j));
                }
            }
            Ok(EpsilonSample {
                y: Dyadic::from_int(m).add(&frac).add(&Dyadic::one_half_pow(k + 1)),
                bits_used: src.consumed() - start,
                epsilon: eps.clone(),
            })
        }
        ExpRoute::ConvolutionJointKy => {
            let m = exponential_integer_part(src)?;
            let k = frac_digit_count(eps);
            let frac = if k == 0 {
                Dyadic::zero()
            } else {
                let dist = joint_block(k)?;
                let out = ky_sample(&dist, src)?;
                Dyadic::new(BigInt::from(out.value as u64 - 1), -i64::from(k))
            };
            Ok(EpsilonSample {
                y: Dyadic::from_int(m).add(&frac).add(&Dyadic::one_half_pow(k + 1)),
                bits_used: src.consumed() - start,
                epsilon: eps.clone(),
            })
        }
    }
}

/// Sample the exponential's fractional part (the unit exponential
/// conditioned on `[0,1)`) by independent digit Bernoullis — the raw
/// convolution building block. Mean fresh-bit cost is at most `2k` for
/// `k = ⌈log2(1/ε)⌉` digits.
pub fn truncated_exp_sample<S: BitSource>(
    eps: &Dyadic,
    src: &mut S,
) -> Result<EpsilonSample, ContinuousError> {
    check_eps(eps)?;
    let start = src.consumed();
    let k = frac_digit_count(eps);
    let mut frac = Dyadic::zero();
    for j in 1..=k {
        let (b, _) = bernoulli_sample(&digit_prob(j), src)?;
        if b == 1 {
            frac = frac.add(&Dyadic::one_half_pow(j));
        }
    }
    Ok(EpsilonSample {
        y: frac.add(&Dyadic::one_half_pow(k + 1)),
        bits_used: src.consumed() - start,
        epsilon: eps.clone(),
    })
}

/// Sample the uniform law on `[0,1)` to accuracy `ε`. Consumes exactly
/// `min{t : 2^{-t} ≤ 2ε}` bits.
pub fn uniform_sample<S: BitSource>(
    eps: &Dyadic,
    src: &mut S,
) -> Result<EpsilonSample, ContinuousError> {
    invert_eps(&QuantileOracle::uniform(), eps, src)
}

/// Sample the Box–Müller radius law (density `x·e^{-x²/2}`, `x ≥ 0`) to
/// accuracy `ε`: a Bernoulli picks the piece split at `x = 1` (left mass
/// `C = 1 − e^{-1/2}`), then the piece's bounded-or-monotone quantile is
/// inverted.
pub fn maxwell_sample<S: BitSource>(
    eps: &Dyadic,
    src: &mut S,
) -> Result<EpsilonSample, ContinuousError> {
    check_eps(eps)?;
    let start = src.consumed();
    let (left, _) = bernoulli_sample(maxwell_split_expansion(), src)?;
    let oracle = if left == 1 {
        QuantileOracle::maxwell_left()
    } else {
        QuantileOracle::maxwell_right()
    };
    let s = invert_eps(&oracle, eps, src)?;
    Ok(EpsilonSample {
        y: s.y,
        bits_used: src.consumed() - start,
        epsilon: eps.clone(),
    })
}

/// Sample a pair of independent standard normals to accuracy `ε` each.
///
/// Polar synthesis: the radius `R` (Maxwell law) is sampled to `ε/2`; the
/// angle grid is then sized adaptively so that `(m+ε/2)·|Θ − θ| ≤
/// (63/64)·ε/2`, reading `⌈log2(2π(m+ε/2)·32/63·2/ε)⌉` uniform bits for the
/// angle cell; finally `m·cos θ` and `m·sin θ` are evaluated to width
/// `ε/128` and their midpoints released. The error budget sums to
/// `ε/2 + (63/128)ε + ε/256 = (255/256)ε < ε` pathwise for each coordinate.
///
/// Both returned samples carry the *total* bit cost of the pair (the two
/// coordinates are produced by one indivisible procedure).
pub fn normal_pair<S: BitSource>(
    eps: &Dyadic,
    src: &mut S,
) -> Result<(EpsilonSample, EpsilonSample), ContinuousError> {
    check_eps(eps)?;
    let start = src.consumed();
    let half = eps.mul_pow2(-1);
    let radius = maxwell_sample(&half, src)?;
    let m = radius.y;
    debug_assert!(!m.is_negative());
    // Angle cell count 2^{a1} ≥ 2π/δ' with δ' = (63/32)·(ε/2)/(m + ε/2):
    // 2π/δ' = π·64·(m + ε/2) / (63·(ε/2)).
    let den = m.add(&half);
    let (e_d, e_h) = (den.exponent(), half.exponent());
    let (num_i, den_i) = if e_d >= e_h {
        (den.mantissa() << (e_d - e_h) as usize, half.mantissa().clone())
    } else {
        (den.mantissa().clone(), half.mantissa() << (e_h - e_d) as usize)
    };
    let ratio = Real::from_ratio(num_i * 64, den_i * 63);
    let cells_needed = pi_real().mul(&ratio);
    let a1 = cells_needed.enclose(8).hi().ceil_log2().max(1) as u32;
    let mut j = BigInt::zero();
    for _ in 0..a1 {
        j = (j << 1) + src.next_bit()?;
    }
    // θ = 2π·(j + 1/2)/2^{a1} = π·(2j+1)/2^{a1} ∈ (0, 2π).
    let theta = pi_real().mul_dyadic(&Dyadic::new(j * 2 + 1, -i64::from(a1)));
    let k_out = ((-eps.floor_log2()).max(0) as u32) + 7;
    let x = theta.cos().mul_dyadic(&m).enclose(k_out).midpoint();
    let y = theta.sin().mul_dyadic(&m).enclose(k_out).midpoint();
    let bits_used = src.consumed() - start;
    Ok((
        EpsilonSample { y: x, bits_used, epsilon: eps.clone() },
        EpsilonSample { y, bits_used, epsilon: eps.clone() },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{ReplaySource, SeededSource};

    fn tape(s: &str) -> ReplaySource {
        ReplaySource::from_tape_str(s).unwrap()
    }

    #[test]
    fn uniform_consumes_deterministic_bit_count() {
        for k in 1..=12u32 {
            let eps = Dyadic::one_half_pow(k);
            let mut src = SeededSource::from_seed(41);
            let s = uniform_sample(&eps, &mut src).unwrap();
            assert_eq!(s.bits_used, u64::from(k) - 1, "eps = 2^-{k}");
        }
        // ε ≥ 1/2 needs no bits at all.
        let mut src = ReplaySource::from_bits(vec![]);
        let s = uniform_sample(&Dyadic::one(), &mut src).unwrap();
        assert_eq!(s.bits_used, 0);
        assert_eq!(s.y, Dyadic::new(BigInt::from(1), -1));
    }

    #[test]
    fn uniform_tape_trace() {
        // "011" pins [3/8, 1/2); at ε = 1/16 the span 1/8 = 2ε stops there.
        let mut src = tape("011");
        let s = uniform_sample(&Dyadic::one_half_pow(4), &mut src).unwrap();
        assert_eq!(s.bits_used, 3);
        assert_eq!(s.y, Dyadic::new(BigInt::from(7), -4));
    }

    #[test]
    fn exponential_inversion_small_trace() {
        // One 0-bit pins U ∈ [0, 1/2): X ∈ [0, ln 2], span ≈ 0.694 ≤ 2ε = 1.
        let mut src = tape("0");
        let s = exp_sample(&Dyadic::new(BigInt::from(1), -1), &mut src, ExpRoute::Inversion)
            .unwrap();
        assert_eq!(s.bits_used, 1);
        let y = s.y.to_f64();
        assert!((y - 0.3466).abs() < 0.01, "midpoint ≈ ln2/2, got {y}");
    }

    #[test]
    fn exponential_inversion_needs_bits_in_upper_tail() {
        // All-ones prefixes keep the upper quantile infinite; the tape runs
        // out and the error says how many bits were served.
        let mut src = tape("1111");
        let err = exp_sample(
            &Dyadic::new(BigInt::from(1), -1),
            &mut src,
            ExpRoute::Inversion,
        )
        .unwrap_err();
        assert_eq!(
            err,
            ContinuousError::Source(SourceError::TapeExhausted { consumed: 4 })
        );
    }

    #[test]
    fn split_inversion_zero_bit_fraction() {
        // Integer part "100" → 0; at ε = 1/2 the bounded truncated quantile
        // spans [0,1] ≤ 2ε before any fractional bit.
        let mut src = tape("100");
        let s = exp_sample(
            &Dyadic::new(BigInt::from(1), -1),
            &mut src,
            ExpRoute::SplitInversion,
        )
        .unwrap();
        assert_eq!(s.bits_used, 3);
        assert_eq!(s.y, Dyadic::new(BigInt::from(1), -1));
    }

    #[test]
    fn convolution_raw_trace() {
        // "100" → integer part 0 (3 bits); digits 1 and 2 of the fractional
        // part both resolve on their first uniform bit (p₁, p₂ < 1/2 have
        // leading digit 0, the tape bits are 1 → both digits come out 0).
        let mut src = tape("10011");
        let s = exp_sample(&Dyadic::one_half_pow(2), &mut src, ExpRoute::ConvolutionRaw)
            .unwrap();
        assert_eq!(s.bits_used, 5);
        assert_eq!(s.y, Dyadic::one_half_pow(3));
    }

    #[test]
    fn convolution_joint_ky_trace() {
        // Same integer part; the 4-atom digit block has no level-1 leaves,
        // and "00" walks to the all-zeros block at level 2.
        let mut src = tape("10000");
        let s = exp_sample(&Dyadic::one_half_pow(2), &mut src, ExpRoute::ConvolutionJointKy)
            .unwrap();
        assert_eq!(s.bits_used, 5);
        assert_eq!(s.y, Dyadic::one_half_pow(3));
    }

    #[test]
    fn convolution_routes_agree_in_distribution_cheaply() {
        // Not a statistical test — just that both routes produce outputs on
        // the same grid m + i·2^{-2} + 2^{-3}.
        let eps = Dyadic::one_half_pow(2);
        for seed in 0..8u64 {
            let mut s1 = SeededSource::from_seed(seed);
            let a = exp_sample(&eps, &mut s1, ExpRoute::ConvolutionRaw).unwrap();
            let mut s2 = SeededSource::from_seed(seed + 100);
            let b = exp_sample(&eps, &mut s2, ExpRoute::ConvolutionJointKy).unwrap();
            for v in [&a.y, &b.y] {
                let scaled = v.mul_pow2(3); // grid step 2^{-3}
                assert!(scaled.exponent() >= 0, "output off-grid: {v}");
            }
        }
    }

    #[test]
    fn maxwell_right_piece_trace() {
        // Split digit 1 of C = 0.39346… is 0; tape bit 1 → right piece.
        // Then one 0-bit pins v ∈ [0, 1/2): X ∈ [1, √(1+2ln2) ≈ 1.5448].
        let mut src = tape("10");
        let s = maxwell_sample(&Dyadic::new(BigInt::from(1), -1), &mut src).unwrap();
        assert_eq!(s.bits_used, 2);
        let y = s.y.to_f64();
        assert!(y > 1.26 && y < 1.29, "midpoint ≈ 1.272, got {y}");
    }

    #[test]
    fn partition_uniform_and_exponential_traces() {
        // Uniform, ε = 1/8: "01" pins [1/4, 1/2) = cell 1 exactly.
        let mut src = tape("01");
        let p = partition_sample_1d(
            &QuantileOracle::uniform(),
            &Dyadic::one_half_pow(3),
            &mut src,
        )
        .unwrap();
        assert_eq!(p.index, BigInt::from(1));
        assert_eq!(p.center, Dyadic::new(BigInt::from(3), -3));
        assert_eq!(p.bits_used, 2);
        // Exponential, ε = 1/2: [0, ln 2] ⊆ [0, 1) after one bit.
        let mut src = tape("0");
        let p = partition_sample_1d(
            &QuantileOracle::exponential(),
            &Dyadic::new(BigInt::from(1), -1),
            &mut src,
        )
        .unwrap();
        assert_eq!(p.index, BigInt::zero());
        assert_eq!(p.center, Dyadic::new(BigInt::from(1), -1));
        assert_eq!(p.bits_used, 1);
    }

    #[test]
    fn bernoulli_first_digit_decisions() {
        // p = 1/2 = (0.1000…)₂: uniform bit 0 < digit 1 → success.
        let p = ProbabilityExpansion::from_ratio(BigInt::from(1), BigInt::from(2));
        let mut src = tape("0");
        assert_eq!(bernoulli_sample(&p, &mut src).unwrap(), (1, 1));
        // A leading 1 matches digit 1 exactly; digit 2 (= 0) decides.
        let mut src = tape("11");
        assert_eq!(bernoulli_sample(&p, &mut src).unwrap(), (0, 2));
        // p = 1/4 = (0.01)₂: tape "00" matches digit 1, decides on digit 2.
        let p = ProbabilityExpansion::from_ratio(BigInt::from(1), BigInt::from(4));
        let mut src = tape("00");
        assert_eq!(bernoulli_sample(&p, &mut src).unwrap(), (1, 2));
    }

    #[test]
    fn normal_pair_smoke_and_determinism() {
        let eps = Dyadic::one_half_pow(2);
        let mut s1 = SeededSource::from_seed(7);
        let (a1, b1) = normal_pair(&eps, &mut s1).unwrap();
        let mut s2 = SeededSource::from_seed(7);
        let (a2, b2) = normal_pair(&eps, &mut s2).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        assert_eq!(a1.bits_used, b1.bits_used);
        assert!(a1.bits_used >= 3);
        assert!(a1.y.to_f64().abs() < 30.0);
        assert!(b1.y.to_f64().abs() < 30.0);
        // The pair's squared norm is within reach of the radius bound
        // (|R − m| ≤ ε/2 and angle/output slack ≤ ε/2 per coordinate).
        let (x, y) = (a1.y.to_f64(), b1.y.to_f64());
        let r = (x * x + y * y).sqrt();
        assert!(r < 40.0);
    }

    #[test]
    fn nonpositive_epsilon_rejected() {
        let mut src = tape("0");
        let err = uniform_sample(&Dyadic::zero(), &mut src).unwrap_err();
        assert_eq!(err, ContinuousError::NonpositiveEpsilon);
        let mut src = tape("0");
        let err = exp_sample(
            &Dyadic::from_int(-1),
            &mut src,
            ExpRoute::Inversion,
        )
        .unwrap_err();
        assert_eq!(err, ContinuousError::NonpositiveEpsilon);
    }

    #[test]
    fn joint_block_size_guard() {
        let mut src = SeededSource::from_seed(1);
        let eps = Dyadic::one_half_pow(JOINT_BLOCK_MAX_DIGITS + 1);
        let err = exp_sample(&eps, &mut src, ExpRoute::ConvolutionJointKy).unwrap_err();
        assert!(matches!(err, ContinuousError::JointBlockTooLarge { .. }));
    }

    #[test]
    fn inversion_coupling_respects_epsilon() {
        // Pathwise guarantee: running the same prefix at finer ε refines the
        // same variate, so coarse and fine outputs differ by ≤ ε_coarse+ε_fine.
        let coarse = Dyadic::one_half_pow(4);
        let fine = Dyadic::one_half_pow(10);
        for seed in 0..20u64 {
            let mut s1 = SeededSource::from_seed(seed);
            let a = exp_sample(&coarse, &mut s1, ExpRoute::Inversion).unwrap();
            let mut s2 = SeededSource::from_seed(seed);
            let b = exp_sample(&fine, &mut s2, ExpRoute::Inversion).unwrap();
            let gap = a.y.sub(&b.y).abs();
            assert!(
                gap <= coarse.add(&fine),
                "seed {seed}: coarse {} vs fine {}",
                a.y,
                b.y
            );
        }
    }
}
