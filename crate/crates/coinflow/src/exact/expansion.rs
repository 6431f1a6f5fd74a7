//! Binary expansions of probabilities, queried one digit at a time.
//!
//! Discrete samplers never need a probability as a number — they need its
//! binary digits `p = Σ_{j≥1} b_j 2^{-j}`, lazily and exactly. This module
//! provides that digit oracle for three representations:
//!
//! * exact dyadics (terminating expansions, zero digits past the end),
//! * exact rationals (memoized long division, eventually periodic),
//! * computable reals (digits decided by enclosure refinement, with an
//!   explicit budget after which an undecidable digit is reported as an
//!   error instead of being guessed).
//!
//! A computable-real-backed probability whose value is *exactly* a dyadic
//! boundary can never have the digit at that boundary decided; such values
//! must be constructed with the dyadic or rational representation instead.

use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::dyadic::{Dyadic, Round};
use super::real::{Real, RealEnclosure};

/// Default refinement budget (in bits) for digit queries on
/// computable-real-backed probabilities.
pub const DEFAULT_DIGIT_BUDGET: u32 = 4096;

/// Error: a binary digit could not be decided within the refinement budget.
///
/// With a correctly-modeled probability this occurs only when the value sits
/// exactly on the queried dyadic boundary, which means it should have been
/// represented exactly (dyadic or rational) rather than as a computable real.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error(
    "binary digit {digit} of a probability could not be decided within a \
     {budget}-bit refinement budget (exact dyadic boundary?)"
)]
pub struct DigitUndecidable {
    /// Index (1-based) of the digit that was queried.
    pub digit: u32,
    /// The refinement budget, in bits, that was exhausted.
    pub budget: u32,
}

struct RationalMemo {
    /// Digits produced so far, `digits[j-1]` = digit j.
    digits: Vec<u8>,
    /// Long-division remainder after the produced digits.
    rem: BigInt,
}

enum Repr {
    Dyadic(Dyadic),
    Rational {
        num: BigInt,
        den: BigInt,
        memo: Mutex<RationalMemo>,
    },
    RealBacked {
        value: Real,
        budget: u32,
    },
}

/// A probability `p ∈ [0, 1]` exposed through its binary expansion.
pub struct ProbabilityExpansion {
    repr: Repr,
}

impl fmt::Debug for ProbabilityExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Dyadic(d) => write!(f, "ProbabilityExpansion::dyadic({d})"),
            Repr::Rational { num, den, .. } => {
                write!(f, "ProbabilityExpansion::rational({num}/{den})")
            }
            Repr::RealBacked { budget, .. } => {
                write!(f, "ProbabilityExpansion::real(budget={budget})")
            }
        }
    }
}

impl Clone for ProbabilityExpansion {
    fn clone(&self) -> Self {
        let repr = match &self.repr {
            Repr::Dyadic(d) => Repr::Dyadic(d.clone()),
            Repr::Rational { num, den, memo } => {
                let memo = memo.lock().unwrap();
                Repr::Rational {
                    num: num.clone(),
                    den: den.clone(),
                    memo: Mutex::new(RationalMemo {
                        digits: memo.digits.clone(),
                        rem: memo.rem.clone(),
                    }),
                }
            }
            Repr::RealBacked { value, budget } => Repr::RealBacked {
                value: value.clone(),
                budget: *budget,
            },
        };
        ProbabilityExpansion { repr }
    }
}

impl ProbabilityExpansion {
    /// An exact dyadic probability; requires `0 ≤ p ≤ 1`.
    pub fn from_dyadic(p: Dyadic) -> Self {
        assert!(
            !p.is_negative() && p <= Dyadic::one(),
            "probability out of range: {p}"
        );
        ProbabilityExpansion { repr: Repr::Dyadic(p) }
    }

    /// An exact rational probability `num/den`; requires `0 ≤ num ≤ den`,
    /// `den ≥ 1`. The fraction is reduced internally.
    pub fn from_ratio(num: BigInt, den: BigInt) -> Self {
        assert!(den.is_positive(), "denominator must be positive");
        assert!(
            !num.is_negative() && num <= den,
            "probability out of range: {num}/{den}"
        );
        let g = num.gcd(&den);
        let (num, den) = if g.is_zero() {
            (num, den)
        } else {
            (&num / &g, &den / &g)
        };
        let rem = num.clone();
        ProbabilityExpansion {
            repr: Repr::Rational {
                num,
                den,
                memo: Mutex::new(RationalMemo { digits: Vec::new(), rem }),
            },
        }
    }

    /// A probability backed by a computable real, assumed to lie strictly
    /// inside `(0, 1)` and away from every dyadic it will be queried at.
    pub fn from_real(value: Real, budget: u32) -> Self {
        ProbabilityExpansion {
            repr: Repr::RealBacked { value, budget },
        }
    }

    /// Whether the probability is exactly 0.
    ///
    /// Computable-real-backed probabilities are assumed interior, so this
    /// returns false for them.
    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Dyadic(d) => d.is_zero(),
            Repr::Rational { num, .. } => num.is_zero(),
            Repr::RealBacked { .. } => false,
        }
    }

    /// Whether the probability is exactly 1 (see [`Self::is_zero`] for the
    /// computable-real caveat).
    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Dyadic(d) => *d == Dyadic::one(),
            Repr::Rational { num, den, .. } => num == den,
            Repr::RealBacked { .. } => false,
        }
    }

    /// Whether the value is an integer multiple of `2^{-k}`, so its
    /// expansion terminates within `k` digits.
    ///
    /// Decidable for dyadic and rational probabilities; `None` for
    /// real-backed ones (termination cannot be certified from enclosures).
    /// `p = 1` counts as terminated even though [`Self::expansion_digit`]
    /// exposes it as the all-ones tail; digit-scanning callers must
    /// special-case mass-one atoms (as the samplers do via [`Self::is_one`]).
    pub fn terminated_by(&self, k: u32) -> Option<bool> {
        match &self.repr {
            Repr::Dyadic(d) => Some(d.is_zero() || d.exponent() + i64::from(k) >= 0),
            Repr::Rational { num, den, .. } => {
                if num.is_zero() || num == den {
                    return Some(true);
                }
                // The fraction is stored reduced, so it terminates exactly
                // when the denominator is a power of two no larger than 2^k.
                let s = den.trailing_zeros().unwrap_or(0);
                let odd: BigInt = den >> (s as usize);
                Some(odd.is_one() && s <= u64::from(k))
            }
            Repr::RealBacked { .. } => None,
        }
    }

    /// Digit `b_j` (1-based) of the binary expansion `p = Σ b_j 2^{-j}`.
    ///
    /// Dyadics in `[0, 1)` use the terminating expansion; `p = 1` is exposed
    /// as the all-ones expansion `0.111…` so that `Σ b_j 2^{-j} = 1` holds.
    pub fn expansion_digit(&self, j: u32) -> Result<u8, DigitUndecidable> {
        assert!(j >= 1, "digit indices are 1-based");
        if self.is_one() {
            return Ok(1);
        }
        match &self.repr {
            Repr::Dyadic(d) => {
                let shifted = d.floor_mul_pow2(j as i64);
                Ok(if shifted.is_odd() { 1 } else { 0 })
            }
            Repr::Rational { den, memo, .. } => {
                let mut memo = memo.lock().unwrap();
                while memo.digits.len() < j as usize {
                    let doubled: BigInt = &memo.rem * 2;
                    let digit = doubled.div_floor(den);
                    memo.rem = &doubled - &digit * den;
                    memo.digits.push(if digit.is_zero() { 0 } else { 1 });
                }
                Ok(memo.digits[j as usize - 1])
            }
            Repr::RealBacked { value, budget } => {
                let mut k = j + 8;
                loop {
                    let e = value.enclose(k);
                    let a = e.lo().floor_mul_pow2(j as i64);
                    let b = e.hi().floor_mul_pow2(j as i64);
                    if a == b {
                        return Ok(if a.is_odd() { 1 } else { 0 });
                    }
                    if k >= *budget {
                        return Err(DigitUndecidable { digit: j, budget: *budget });
                    }
                    k = (k * 2).min(*budget);
                }
            }
        }
    }

    /// Partial sum `Σ_{j≤k} b_j 2^{-j}` as an exact dyadic.
    pub fn partial_sum(&self, k: u32) -> Result<Dyadic, DigitUndecidable> {
        let mut acc = BigInt::zero();
        for j in 1..=k {
            acc <<= 1;
            if self.expansion_digit(j)? == 1 {
                acc += 1;
            }
        }
        Ok(Dyadic::new(acc, -(k as i64)))
    }

    /// The probability as a computable-real handle.
    pub fn as_real(&self) -> Real {
        match &self.repr {
            Repr::Dyadic(d) => Real::constant(d.clone()),
            Repr::Rational { num, den, .. } => Real::from_ratio(num.clone(), den.clone()),
            Repr::RealBacked { value, .. } => value.clone(),
        }
    }

    /// Enclosure of the probability's value of width ≤ `2^{-k}`.
    pub fn value_enclosure(&self, k: u32) -> RealEnclosure {
        match &self.repr {
            Repr::Dyadic(d) => RealEnclosure::point(d.clone()),
            Repr::Rational { num, den, .. } => {
                let n = Dyadic::from_bigint(num.clone());
                let d = Dyadic::from_bigint(den.clone());
                RealEnclosure::new(
                    n.div_round(&d, k + 1, Round::Floor),
                    n.div_round(&d, k + 1, Round::Ceil),
                )
            }
            Repr::RealBacked { value, .. } => value.enclose(k),
        }
    }
}

/// Free-function form of [`ProbabilityExpansion::expansion_digit`].
pub fn expansion_digit(
    p: &ProbabilityExpansion,
    j: u32,
) -> Result<u8, DigitUndecidable> {
    p.expansion_digit(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digits(p: &ProbabilityExpansion, n: u32) -> Vec<u8> {
        (1..=n).map(|j| p.expansion_digit(j).unwrap()).collect()
    }

    #[test]
    fn dyadic_digits_terminate() {
        let half = ProbabilityExpansion::from_dyadic(Dyadic::one_half_pow(1));
        assert_eq!(digits(&half, 5), vec![1, 0, 0, 0, 0]);
        let quarter = ProbabilityExpansion::from_dyadic(Dyadic::one_half_pow(2));
        assert_eq!(digits(&quarter, 4), vec![0, 1, 0, 0]);
        // 5/8 = 0.101
        let five_eighths =
            ProbabilityExpansion::from_dyadic(Dyadic::new(BigInt::from(5), -3));
        assert_eq!(digits(&five_eighths, 5), vec![1, 0, 1, 0, 0]);
        let zero = ProbabilityExpansion::from_dyadic(Dyadic::zero());
        assert_eq!(digits(&zero, 3), vec![0, 0, 0]);
        let one = ProbabilityExpansion::from_dyadic(Dyadic::one());
        assert_eq!(digits(&one, 4), vec![1, 1, 1, 1]);
    }

    #[test]
    fn rational_digits_repeat() {
        // 1/3 = 0.01010101…
        let third = ProbabilityExpansion::from_ratio(BigInt::from(1), BigInt::from(3));
        assert_eq!(digits(&third, 8), vec![0, 1, 0, 1, 0, 1, 0, 1]);
        // 2/3 = 0.10101010…
        let two_thirds = ProbabilityExpansion::from_ratio(BigInt::from(2), BigInt::from(3));
        assert_eq!(digits(&two_thirds, 8), vec![1, 0, 1, 0, 1, 0, 1, 0]);
        // 1/7 = 0.001001…
        let seventh = ProbabilityExpansion::from_ratio(BigInt::from(1), BigInt::from(7));
        assert_eq!(digits(&seventh, 6), vec![0, 0, 1, 0, 0, 1]);
        // Reduction: 2/6 behaves as 1/3.
        let reduced = ProbabilityExpansion::from_ratio(BigInt::from(2), BigInt::from(6));
        assert_eq!(digits(&reduced, 4), vec![0, 1, 0, 1]);
    }

    #[test]
    fn real_backed_digits_match_value() {
        // 1/e = 0.36787944… = 0.0101111000…₂
        let inv_e = Real::constant(Dyadic::from_int(-1)).exp();
        let p = ProbabilityExpansion::from_real(inv_e, DEFAULT_DIGIT_BUDGET);
        assert_eq!(digits(&p, 10), vec![0, 1, 0, 1, 1, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn termination_is_decided_for_exact_representations() {
        let three_eighths = ProbabilityExpansion::from_dyadic(Dyadic::new(BigInt::from(3), -3));
        assert_eq!(three_eighths.terminated_by(3), Some(true));
        assert_eq!(three_eighths.terminated_by(2), Some(false));

        let quarter = ProbabilityExpansion::from_ratio(BigInt::from(2), BigInt::from(8));
        assert_eq!(quarter.terminated_by(2), Some(true));
        assert_eq!(quarter.terminated_by(1), Some(false));

        let third = ProbabilityExpansion::from_ratio(BigInt::from(1), BigInt::from(3));
        assert_eq!(third.terminated_by(1000), Some(false));

        let zero = ProbabilityExpansion::from_ratio(BigInt::from(0), BigInt::from(7));
        assert_eq!(zero.terminated_by(0), Some(true));
        let one = ProbabilityExpansion::from_dyadic(Dyadic::one());
        assert_eq!(one.terminated_by(0), Some(true));

        let real = ProbabilityExpansion::from_real(Real::from_ratio(1.into(), 3.into()), 64);
        assert_eq!(real.terminated_by(10), None);
    }

    #[test]
    fn partial_sums_reconstruct_the_value() {
        let third = ProbabilityExpansion::from_ratio(BigInt::from(1), BigInt::from(3));
        for k in [1u32, 5, 10, 20] {
            let s = third.partial_sum(k).unwrap();
            let err = (1.0 / 3.0) - s.to_f64();
            assert!(err >= 0.0, "partial sum exceeds the value");
            assert!(err <= 2f64.powi(-(k as i32)), "partial sum too far below");
        }
        // Exact reconstruction for a dyadic.
        let p = ProbabilityExpansion::from_dyadic(Dyadic::new(BigInt::from(11), -4));
        assert_eq!(p.partial_sum(4).unwrap(), Dyadic::new(BigInt::from(11), -4));
    }

    #[test]
    fn dyadic_boundary_on_real_backed_is_reported() {
        // A handle for exactly 1/2 that never returns a point enclosure:
        // digit 1 can never be decided.
        let straddler = Real::from_fn(|k| {
            let eps = Dyadic::one_half_pow(k + 1);
            RealEnclosure::new(
                Dyadic::one_half_pow(1).sub(&eps),
                Dyadic::one_half_pow(1).add(&eps),
            )
        });
        let p = ProbabilityExpansion::from_real(straddler, 128);
        assert_eq!(
            p.expansion_digit(1),
            Err(DigitUndecidable { digit: 1, budget: 128 })
        );
    }

    #[test]
    fn value_enclosures_are_tight() {
        let third = ProbabilityExpansion::from_ratio(BigInt::from(1), BigInt::from(3));
        let e = third.value_enclosure(30);
        assert!(e.width() <= Dyadic::one_half_pow(30));
        let v = third.as_real().to_f64(50);
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn clone_preserves_the_expansion() {
        let p = ProbabilityExpansion::from_ratio(BigInt::from(3), BigInt::from(7));
        let _ = digits(&p, 5);
        let q = p.clone();
        assert_eq!(digits(&q, 10), digits(&p, 10));
    }
}
